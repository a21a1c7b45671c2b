//! The generic semi-decision procedure: a stream of candidate membership
//! witnesses interleaved with a stream of candidate finite quotients, run
//! until one of them settles the question or the budget runs out.

use std::collections::{BTreeSet, HashSet};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::context::{Ball, GroupContext, Twist};
use crate::error::Result;
use crate::quotient::{
    image_of_set, invariant_refine, set_image, verify_separation, FiniteHom, HomEnumerator,
    SeparatingCertificate, SetKind,
};
use crate::set::SetSpec;
use crate::word::Word;

/// Limits on the search. `max_len` bounds conjugator length, set-element
/// depth and orbit exponents; `max_degree` bounds quotient degree; `max_steps`
/// bounds the total number of candidates examined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_len: usize,
    pub max_degree: usize,
    pub max_steps: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_len: 8,
            max_degree: 6,
            max_steps: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
    Undecided,
}

impl Answer {
    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "YES",
            Answer::No => "NO",
            Answer::Undecided => "UNDECIDED",
        }
    }
}

/// `target = z⁻¹ (s φ^k) z` for the conjugacy kinds, `target = (z⁻¹φ) s z`
/// for the twisted kind, all as words over the presentation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub set_element: Word,
    pub exponent: i64,
    pub conjugator: Word,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Effort {
    pub member_steps: u64,
    pub separator_steps: u64,
    pub len_reached: usize,
    pub degree_reached: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub answer: Answer,
    pub witness: Option<Witness>,
    pub certificate: Option<SeparatingCertificate>,
    pub effort: Effort,
    /// Which route produced the verdict.
    pub route: String,
}

impl Verdict {
    pub fn yes(witness: Witness, route: &str) -> Self {
        Verdict {
            answer: Answer::Yes,
            witness: Some(witness),
            certificate: None,
            effort: Effort::default(),
            route: route.into(),
        }
    }

    pub fn no(certificate: SeparatingCertificate, route: &str) -> Self {
        Verdict {
            answer: Answer::No,
            witness: None,
            certificate: Some(certificate),
            effort: Effort::default(),
            route: route.into(),
        }
    }

    pub fn undecided(effort: Effort, route: &str) -> Self {
        Verdict {
            answer: Answer::Undecided,
            witness: None,
            certificate: None,
            effort,
            route: route.into(),
        }
    }
}

pub type Membership<'a, E> = &'a (dyn Fn(&E) -> bool + Sync);

/// `target ∈ op(set)` in the group of `ctx`.
pub struct Problem<'a, C: GroupContext> {
    pub ctx: &'a C,
    pub kind: SetKind,
    pub twist: Option<&'a dyn Twist<C::Elem>>,
    pub set: &'a SetSpec<C::Elem>,
    pub target: &'a C::Elem,
    /// Exact membership test for `set`, when one is available.
    pub membership: Option<Membership<'a, C::Elem>>,
    pub set_ref: String,
}

impl<'a, C: GroupContext> Problem<'a, C> {
    pub fn new(ctx: &'a C, kind: SetKind, set: &'a SetSpec<C::Elem>, target: &'a C::Elem) -> Self {
        Problem {
            ctx,
            kind,
            twist: None,
            set,
            target,
            membership: None,
            set_ref: "K".into(),
        }
    }

    pub fn with_twist(mut self, twist: &'a dyn Twist<C::Elem>) -> Self {
        self.twist = Some(twist);
        self
    }

    pub fn with_membership(mut self, m: Membership<'a, C::Elem>) -> Self {
        self.membership = Some(m);
        self
    }

    pub fn with_set_ref(mut self, r: &str) -> Self {
        self.set_ref = r.into();
        self
    }

    fn phi_images(&self) -> Option<Vec<Word>> {
        self.twist.map(|t| t.generator_images())
    }

    /// `op` applied to `s` with conjugator `z` and exponent `k`.
    pub fn act(&self, s: &C::Elem, k: i64, z: &C::Elem) -> Result<C::Elem> {
        let ctx = self.ctx;
        Ok(match self.kind {
            SetKind::Conj => ctx.conj(s, z),
            SetKind::Twisted => {
                let tw = self.twist.expect("twisted kind carries an automorphism");
                let zphi = tw.apply(z);
                ctx.mul(&ctx.mul(&ctx.inv(&zphi), s), z)
            }
            SetKind::Orbit => self.twist.expect("orbit kind").power_apply(s, k)?,
            SetKind::BrinkConj => ctx.conj(&self.twist.expect("orbit kind").power_apply(s, k)?, z),
        })
    }
}

/// Set elements by generation depth.
struct SetEnum<C: GroupContext> {
    levels: Vec<Vec<C::Elem>>,
    seen: HashSet<C::Elem>,
    frontier: Vec<(usize, C::Elem)>,
    frontier_seen: HashSet<(usize, C::Elem)>,
    exhausted: bool,
}

const SET_ENUM_CAP: usize = 200_000;

impl<C: GroupContext> SetEnum<C> {
    fn new(ctx: &C, set: &SetSpec<C::Elem>) -> Self {
        let mut me = SetEnum {
            levels: Vec::new(),
            seen: HashSet::new(),
            frontier: Vec::new(),
            frontier_seen: HashSet::new(),
            exhausted: false,
        };
        let first: Vec<C::Elem> = match set {
            SetSpec::Fin(v) => {
                me.exhausted = true;
                v.clone()
            }
            SetSpec::Coset { rep, .. } => {
                me.frontier = vec![(0, ctx.identity())];
                vec![rep.clone()]
            }
            SetSpec::Rat(nfa) => {
                me.frontier = nfa.initial.iter().map(|&i| (i, ctx.identity())).collect();
                me.frontier_seen = me.frontier.iter().cloned().collect();
                nfa.initial
                    .iter()
                    .filter(|i| nfa.finals.contains(i))
                    .map(|_| ctx.identity())
                    .collect()
            }
        };
        let fresh = first.into_iter().filter(|e| me.seen.insert(e.clone())).collect();
        me.levels.push(fresh);
        if let SetSpec::Coset { .. } = set {
            me.frontier_seen.insert((0, ctx.identity()));
        }
        me
    }

    /// Grows by one generation; returns whether anything new appeared.
    fn grow(&mut self, ctx: &C, set: &SetSpec<C::Elem>) -> bool {
        if self.exhausted || self.seen.len() > SET_ENUM_CAP {
            self.exhausted = true;
            return false;
        }
        let mut next_frontier = Vec::new();
        let mut fresh = Vec::new();
        match set {
            SetSpec::Fin(_) => {}
            SetSpec::Coset { gens, rep } => {
                let steps: Vec<C::Elem> = gens
                    .iter()
                    .flat_map(|g| [g.clone(), ctx.inv(g)])
                    .collect();
                for (_, h) in &self.frontier {
                    for g in &steps {
                        let h2 = ctx.mul(h, g);
                        if self.frontier_seen.insert((0, h2.clone())) {
                            let e = ctx.mul(&h2, rep);
                            if self.seen.insert(e.clone()) {
                                fresh.push(e);
                            }
                            next_frontier.push((0, h2));
                        }
                    }
                }
            }
            SetSpec::Rat(nfa) => {
                for (q, h) in &self.frontier {
                    for &(p, l, r) in &nfa.transitions {
                        if p != *q {
                            continue;
                        }
                        let h2 = ctx.mul(h, &ctx.letter(l));
                        if self.frontier_seen.insert((r, h2.clone())) {
                            if nfa.finals.contains(&r) && self.seen.insert(h2.clone()) {
                                fresh.push(h2.clone());
                            }
                            next_frontier.push((r, h2));
                        }
                    }
                }
            }
        }
        if next_frontier.is_empty() {
            self.exhausted = true;
        }
        self.frontier = next_frontier;
        let grew = !fresh.is_empty();
        self.levels.push(fresh);
        grew
    }
}

/// Whether `e` lies in the set, searching generations up to `depth`.
pub fn set_contains_bounded<C: GroupContext>(ctx: &C, set: &SetSpec<C::Elem>, e: &C::Elem, depth: usize) -> bool {
    let mut en = SetEnum::new(ctx, set);
    for _ in 0..depth {
        if en.seen.contains(e) {
            return true;
        }
        en.grow(ctx, set);
    }
    en.seen.contains(e)
}

struct MemberSearch<'p, 'a, C: GroupContext> {
    problem: &'p Problem<'a, C>,
    ball: Ball<C>,
    set: SetEnum<C>,
    level: usize,
    queue: Vec<(usize, usize, i64)>,
    pos: usize,
    steps: u64,
    done: bool,
    max_len: usize,
    has_inverse: bool,
}

impl<'p, 'a, C: GroupContext> MemberSearch<'p, 'a, C> {
    fn new(problem: &'p Problem<'a, C>, max_len: usize) -> Self {
        let ctx = problem.ctx;
        let has_inverse = problem
            .twist
            .map(|t| t.apply_inverse(&ctx.identity()).is_ok())
            .unwrap_or(true);
        let mut me = MemberSearch {
            problem,
            ball: Ball::new(ctx),
            set: SetEnum::new(ctx, problem.set),
            level: 0,
            queue: Vec::new(),
            pos: 0,
            steps: 0,
            done: false,
            max_len,
            has_inverse,
        };
        me.fill(false);
        me
    }

    fn uses_exponent(&self) -> bool {
        matches!(self.problem.kind, SetKind::Orbit | SetKind::BrinkConj)
    }

    fn uses_conjugator(&self) -> bool {
        !matches!(self.problem.kind, SetKind::Orbit)
    }

    /// Candidates `(len, index, k)` of the current level. When the set grew,
    /// every earlier candidate is re-examined against the new elements.
    fn fill(&mut self, set_grew: bool) {
        let ctx = self.problem.ctx;
        let l = self.level;
        let lmin = if set_grew || l == 0 { 0 } else { l };
        let max_z = if self.uses_conjugator() { l } else { 0 };
        let max_k = if self.uses_exponent() { l as i64 } else { 0 };
        self.queue.clear();
        self.pos = 0;
        for len in 0..=max_z {
            let count = self.ball.level(ctx, len).len();
            for idx in 0..count {
                for k in -max_k..=max_k {
                    if len.max(k.unsigned_abs() as usize) >= lmin {
                        self.queue.push((len, idx, k));
                    }
                }
            }
        }
    }

    fn advance_level(&mut self) -> bool {
        if self.level >= self.max_len {
            return false;
        }
        self.level += 1;
        let grew = self.set.grow(self.problem.ctx, self.problem.set);
        self.fill(grew);
        true
    }

    /// `s` with `op_{z,k}(s) = target`, if it lies in the set.
    fn check(&self, z: &C::Elem, k: i64) -> Result<Option<C::Elem>> {
        let p = self.problem;
        let ctx = p.ctx;
        let pre = match p.kind {
            SetKind::Conj | SetKind::BrinkConj => ctx.conj(p.target, &ctx.inv(z)),
            SetKind::Twisted => {
                let zphi = p.twist.expect("twisted kind").apply(z);
                ctx.mul(&ctx.mul(&zphi, p.target), &ctx.inv(z))
            }
            SetKind::Orbit => p.target.clone(),
        };
        let member = |s: &C::Elem| match p.membership {
            Some(m) => m(s),
            None => self.set.seen.contains(s),
        };
        if k == 0 {
            return Ok(member(&pre).then_some(pre));
        }
        let tw = p.twist.expect("orbit kind");
        if self.has_inverse {
            let s = tw.power_apply(&pre, -k)?;
            return Ok(member(&s).then_some(s));
        }
        if k < 0 {
            return Ok(None);
        }
        for s in &self.set.seen {
            if tw.power_apply(s, k)? == pre {
                return Ok(Some(s.clone()));
            }
        }
        Ok(None)
    }

    fn step(&mut self) -> Result<Option<Witness>> {
        while self.pos >= self.queue.len() {
            if !self.advance_level() {
                self.done = true;
                return Ok(None);
            }
        }
        let (len, idx, k) = self.queue[self.pos];
        self.pos += 1;
        self.steps += 1;
        let ctx = self.problem.ctx;
        let z = self.ball.level(ctx, len)[idx].clone();
        Ok(self.check(&z, k)?.map(|s| Witness {
            set_element: ctx.to_word(&s),
            exponent: k,
            conjugator: ctx.to_word(&z),
        }))
    }
}

/// Cap on induced-automorphism refinement terms per candidate quotient.
const REFINE_TERMS: usize = 8;

struct SeparatorSearch<'p, 'a, C: GroupContext> {
    problem: &'p Problem<'a, C>,
    degree: usize,
    max_degree: usize,
    homs: HomEnumerator,
    tested: HashSet<FiniteHom>,
    phi_images: Option<Vec<Word>>,
    target_word: Word,
    steps: u64,
    done: bool,
}

impl<'p, 'a, C: GroupContext> SeparatorSearch<'p, 'a, C> {
    fn new(problem: &'p Problem<'a, C>, max_degree: usize) -> Self {
        let pres = problem.ctx.presentation();
        SeparatorSearch {
            problem,
            degree: 1,
            max_degree,
            homs: HomEnumerator::canonical(pres, 1),
            tested: HashSet::new(),
            phi_images: problem.phi_images(),
            target_word: problem.ctx.to_word(problem.target),
            steps: 0,
            done: max_degree == 0,
        }
    }

    fn step(&mut self) -> Option<SeparatingCertificate> {
        let psi = loop {
            match self.homs.next() {
                Some(h) => break h,
                None => {
                    if self.degree >= self.max_degree {
                        self.done = true;
                        return None;
                    }
                    self.degree += 1;
                    self.homs = HomEnumerator::canonical(self.problem.ctx.presentation(), self.degree);
                }
            }
        };
        self.steps += 1;
        self.try_hom(psi)
    }

    fn try_hom(&mut self, psi: FiniteHom) -> Option<SeparatingCertificate> {
        let p = self.problem;
        let (pi, aut) = if p.kind.needs_aut() {
            let images = self.phi_images.as_ref()?;
            let (pi, aut) = invariant_refine(&psi, images, REFINE_TERMS).ok()?;
            (pi, Some(aut))
        } else {
            (psi, None)
        };
        if !self.tested.insert(pi.clone()) {
            return None;
        }
        let target = pi.eval(&self.target_word);
        let seed = set_image(&pi, p.set, |e| p.ctx.to_word(e)).ok()?;
        if seed.contains(&target) {
            return None;
        }
        let image = image_of_set(&pi, aut.as_ref(), p.kind, &seed).ok()?;
        if image.contains(&target) {
            return None;
        }
        Some(SeparatingCertificate {
            hom: pi,
            kind: p.kind,
            set_ref: p.set_ref.clone(),
            excluded: p.ctx.format(p.target),
            image: image.into_iter().collect(),
        })
    }
}

/// Runs the two streams in strict alternation, one candidate each, until a
/// witness or certificate appears or the budget is spent. With
/// `skip_members` the membership stream is known to be empty and only
/// quotients are searched.
pub fn search<C: GroupContext>(problem: &Problem<'_, C>, budget: &Budget, skip_members: bool) -> Result<Verdict> {
    let mut members = MemberSearch::new(problem, budget.max_len);
    members.done |= skip_members;
    let mut seps = SeparatorSearch::new(problem, budget.max_degree);
    let mut total = 0u64;
    loop {
        if members.done && seps.done || total >= budget.max_steps {
            break;
        }
        if !members.done {
            total += 1;
            if let Some(w) = members.step()? {
                let mut v = Verdict::yes(w, "search");
                v.effort = effort(&members, &seps);
                return Ok(v);
            }
        }
        if total >= budget.max_steps {
            break;
        }
        if !seps.done {
            total += 1;
            if let Some(c) = seps.step() {
                let mut v = Verdict::no(c, "search");
                v.effort = effort(&members, &seps);
                return Ok(v);
            }
        }
    }
    Ok(Verdict::undecided(effort(&members, &seps), "search"))
}

fn effort<C: GroupContext>(m: &MemberSearch<'_, '_, C>, s: &SeparatorSearch<'_, '_, C>) -> Effort {
    Effort {
        member_steps: m.steps,
        separator_steps: s.steps,
        len_reached: m.level,
        degree_reached: s.degree,
    }
}

/// The same search with each stream on its own thread. When one stream
/// finds a result at its `i`-th candidate, the other keeps going as far as
/// the sequential schedule would have taken it, so that the verdict (and the
/// budget cut-off) agrees with [`search`].
pub fn search_parallel<C: GroupContext>(
    problem: &Problem<'_, C>,
    budget: &Budget,
    skip_members: bool,
) -> Result<Verdict> {
    let member_found = AtomicU64::new(u64::MAX);
    let sep_found = AtomicU64::new(u64::MAX);
    let (member_result, sep_result) = std::thread::scope(|scope| {
        let (member_found, sep_found) = (&member_found, &sep_found);
        let member = scope.spawn(move || -> Result<(Option<Witness>, u64, usize)> {
            let mut m = MemberSearch::new(problem, budget.max_len);
            m.done |= skip_members;
            while !m.done && m.steps < budget.max_steps && m.steps < sep_found.load(Ordering::Acquire) {
                if let Some(w) = m.step()? {
                    member_found.store(m.steps, Ordering::Release);
                    return Ok((Some(w), m.steps, m.level));
                }
            }
            Ok((None, m.steps, m.level))
        });
        let sep = scope.spawn(move || {
            let mut s = SeparatorSearch::new(problem, budget.max_degree);
            while !s.done
                && s.steps < budget.max_steps
                && s.steps + 1 < member_found.load(Ordering::Acquire)
            {
                if let Some(c) = s.step() {
                    sep_found.store(s.steps, Ordering::Release);
                    return (Some(c), s.steps, s.degree);
                }
            }
            (None, s.steps, s.degree)
        });
        (member.join().expect("member worker"), sep.join().expect("separator worker"))
    });
    let (witness, m_steps, level) = member_result?;
    let (cert, s_steps, degree) = sep_result;
    let effort = Effort {
        member_steps: m_steps,
        separator_steps: s_steps,
        len_reached: level,
        degree_reached: degree,
    };
    // Sequentially, member step i is preceded by min(i-1, S) separator
    // steps, and separator step j by min(j, M) member steps.
    if let Some(w) = witness {
        if m_steps + s_steps.min(m_steps - 1) <= budget.max_steps {
            let mut v = Verdict::yes(w, "search");
            v.effort = effort;
            return Ok(v);
        }
    } else if let Some(c) = cert {
        if s_steps + m_steps.min(s_steps) <= budget.max_steps {
            let mut v = Verdict::no(c, "search");
            v.effort = effort;
            return Ok(v);
        }
    }
    Ok(Verdict::undecided(effort, "search"))
}

/// Checks a YES witness against the problem. Set membership of the witness
/// element uses the exact test when available, else bounded enumeration.
pub fn verify_witness<C: GroupContext>(problem: &Problem<'_, C>, w: &Witness, depth: usize) -> Result<bool> {
    let ctx = problem.ctx;
    let s = ctx.eval(&w.set_element);
    let z = ctx.eval(&w.conjugator);
    let in_set = match problem.membership {
        Some(m) => m(&s),
        None => set_contains_bounded(ctx, problem.set, &s, depth),
    };
    if !in_set {
        return Ok(false);
    }
    if !problem.kind.needs_aut() && w.exponent != 0 {
        return Ok(false);
    }
    if problem.kind == SetKind::Orbit && !w.conjugator.is_empty() {
        return Ok(false);
    }
    Ok(problem.act(&s, w.exponent, &z)? == *problem.target)
}

/// Recomputes a NO certificate from scratch.
pub fn verify_certificate<C: GroupContext>(problem: &Problem<'_, C>, c: &SeparatingCertificate) -> Result<bool> {
    let images = problem.phi_images();
    verify_separation(
        c,
        problem.ctx.presentation(),
        &problem.ctx.to_word(problem.target),
        problem.kind,
        problem.set,
        |e| problem.ctx.to_word(e),
        images.as_deref(),
    )
}

pub fn verify_verdict<C: GroupContext>(problem: &Problem<'_, C>, v: &Verdict, depth: usize) -> Result<bool> {
    match v.answer {
        Answer::Yes => match &v.witness {
            Some(w) => verify_witness(problem, w, depth),
            None => Ok(false),
        },
        Answer::No => match &v.certificate {
            Some(c) => verify_certificate(problem, c),
            None => Ok(false),
        },
        Answer::Undecided => Ok(true),
    }
}

/// Images of the set's elements, kept for reporting.
pub fn finite_set_image<C: GroupContext>(problem: &Problem<'_, C>, hom: &FiniteHom) -> Result<BTreeSet<crate::perm::Perm>> {
    set_image(hom, problem.set, |e| problem.ctx.to_word(e))
}
