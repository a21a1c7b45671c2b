//! Decision instances: a group, a set operator, a finitely described set and
//! a target element, with the reductions tried before the generic search.

use std::collections::HashSet;

use crate::automaton::{StallingsGraph, BENOIS_STATE_BUDGET};
use crate::context::{
    ExtensionCtx, FatfCtx, FatfTwist, FreeCtx, GPhiCtx, GroupContext, SemidirectCtx, Twist,
};
use crate::engine::{
    search, search_parallel, Answer, Budget, Membership, Problem, Verdict, Witness,
};
use crate::error::{Error, Result};
use crate::exact::via_brinkmann_reduce;
use crate::extension::{
    semidirect_conjugacy_instance, twisted_to_gphi, ExtensionDatum, GPhi, SemidirectElement,
    SemidirectReduction,
};
use crate::perm::Perm;
use crate::quotient::{
    image_of_set, induced_automorphism, set_image, FiniteHom, SeparatingCertificate, SetKind,
};
use crate::set::SetSpec;
use crate::word::{free_conjugacy, Alphabet, FreeAutomorphism, ViaCertificate, Word};

#[derive(Clone, Debug)]
pub enum GroupSpec {
    Free { rank: usize },
    Semidirect { phi: FreeAutomorphism, via: Option<ViaCertificate> },
    GPhi(GPhi),
    Extension(ExtensionDatum),
    /// `F_rank × Z^dim`.
    Fatf { rank: usize, dim: usize },
}

impl GroupSpec {
    /// Fiber letters first; `t` for the mapping-torus groups; coset or
    /// central letters continue the fiber alphabet otherwise.
    pub fn alphabet(&self) -> Result<Alphabet> {
        match self {
            GroupSpec::Free { rank } => Alphabet::standard(*rank),
            GroupSpec::Semidirect { phi, .. } => torus_alphabet(phi.rank()),
            GroupSpec::GPhi(g) => torus_alphabet(g.rank()),
            GroupSpec::Extension(d) => Alphabet::standard(d.ext_rank()),
            GroupSpec::Fatf { rank, dim } => Alphabet::standard(rank + dim),
        }
    }
}

fn torus_alphabet(n: usize) -> Result<Alphabet> {
    let mut names: Vec<char> = Alphabet::standard(n)?.names().to_vec();
    if names.contains(&'t') {
        return Err(Error::Input("fiber rank too large for the letter t".into()));
    }
    names.push('t');
    Alphabet::new(names)
}

/// An automorphism of the instance group given by generator images over the
/// group's alphabet, with an optional certificate `φ^p = λ_Δ`.
#[derive(Clone, Debug)]
pub struct AutSpec {
    pub map: FreeAutomorphism,
    pub via: Option<ViaCertificate>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub group: GroupSpec,
    pub kind: SetKind,
    pub aut: Option<AutSpec>,
    pub set: SetSpec<Word>,
    pub set_name: String,
    pub target: Word,
    pub budget: Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Options {
    pub fast_path: bool,
    pub parallel: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            fast_path: true,
            parallel: false,
        }
    }
}

impl Instance {
    fn aut(&self) -> Result<&AutSpec> {
        self.aut
            .as_ref()
            .ok_or_else(|| Error::Input(format!("set kind {} needs an automorphism", self.kind.name())))
    }

    fn check_kind_supported(&self) -> Result<()> {
        let twisted_ok = matches!(self.group, GroupSpec::Free { .. } | GroupSpec::Fatf { .. });
        if self.kind.needs_aut() && !twisted_ok {
            return Err(Error::Capability(format!(
                "set kind {} is supported only in free groups and F_n × Z^m",
                self.kind.name()
            )));
        }
        if self.kind.needs_aut() {
            self.aut()?;
        }
        Ok(())
    }
}

/// Runs the fast paths (unless disabled) and then the generic search.
pub fn decide(inst: &Instance, opts: &Options) -> Result<Verdict> {
    inst.check_kind_supported()?;
    match &inst.group {
        GroupSpec::Free { rank } => decide_free(inst, *rank, opts),
        GroupSpec::Semidirect { phi, via } => decide_semidirect(inst, phi, via.as_ref(), opts),
        GroupSpec::GPhi(g) => {
            let ctx = GPhiCtx::new(g.clone())?;
            generic(&ctx, inst, None, None, opts, false)
        }
        GroupSpec::Extension(d) => {
            let ctx = ExtensionCtx::new(d.clone())?;
            generic(&ctx, inst, None, None, opts, false)
        }
        GroupSpec::Fatf { rank, dim } => {
            let ctx = FatfCtx::new(*rank, *dim)?;
            let twist = fatf_twist(&ctx, inst)?;
            generic(&ctx, inst, twist.as_ref().map(|t| t as &dyn Twist<_>), None, opts, false)
        }
    }
}

/// Re-checks a verdict: witnesses by recomputation, certificates by
/// recomputing the finite image of the set.
pub fn verify(inst: &Instance, v: &Verdict) -> Result<bool> {
    inst.check_kind_supported()?;
    let depth = inst.budget.max_len.max(8);
    match &inst.group {
        GroupSpec::Free { rank } => {
            let ctx = FreeCtx::new(*rank);
            let oracle = free_membership(&inst.set, *rank);
            let twist = inst.aut.as_ref().map(|a| &a.map as &dyn Twist<Word>);
            let p = problem(&ctx, inst, twist, oracle.as_deref());
            verify_verdict_owned(&p, v, depth)
        }
        GroupSpec::Semidirect { phi, .. } => {
            let ctx = SemidirectCtx::new(phi.clone())?;
            verify_verdict_owned(&problem(&ctx, inst, None, None), v, depth)
        }
        GroupSpec::GPhi(g) => {
            let ctx = GPhiCtx::new(g.clone())?;
            verify_verdict_owned(&problem(&ctx, inst, None, None), v, depth)
        }
        GroupSpec::Extension(d) => {
            let ctx = ExtensionCtx::new(d.clone())?;
            verify_verdict_owned(&problem(&ctx, inst, None, None), v, depth)
        }
        GroupSpec::Fatf { rank, dim } => {
            let ctx = FatfCtx::new(*rank, *dim)?;
            let twist = fatf_twist(&ctx, inst)?;
            let p = problem(&ctx, inst, twist.as_ref().map(|t| t as &dyn Twist<_>), None);
            verify_verdict_owned(&p, v, depth)
        }
    }
}

type Oracle<E> = Box<dyn Fn(&E) -> bool + Sync>;

struct Lifted<C: GroupContext> {
    set: SetSpec<C::Elem>,
    target: C::Elem,
}

fn lift<C: GroupContext>(ctx: &C, inst: &Instance) -> Lifted<C> {
    Lifted {
        set: inst.set.map(|w| ctx.eval(w)),
        target: ctx.eval(&inst.target),
    }
}

fn problem<'a, C: GroupContext>(
    ctx: &'a C,
    inst: &Instance,
    twist: Option<&'a dyn Twist<C::Elem>>,
    oracle: Option<Membership<'a, C::Elem>>,
) -> OwnedProblem<'a, C> {
    OwnedProblem {
        ctx,
        lifted: lift(ctx, inst),
        kind: inst.kind,
        twist,
        oracle,
        set_ref: inst.set_name.clone(),
    }
}

/// A problem that owns its lifted set and target.
struct OwnedProblem<'a, C: GroupContext> {
    ctx: &'a C,
    lifted: Lifted<C>,
    kind: SetKind,
    twist: Option<&'a dyn Twist<C::Elem>>,
    oracle: Option<Membership<'a, C::Elem>>,
    set_ref: String,
}

impl<'a, C: GroupContext> OwnedProblem<'a, C> {
    fn borrow(&self) -> Problem<'_, C> {
        let mut p = Problem::new(self.ctx, self.kind, &self.lifted.set, &self.lifted.target)
            .with_set_ref(&self.set_ref);
        p.twist = self.twist;
        p.membership = self.oracle;
        p
    }
}

fn verify_verdict_owned<C: GroupContext>(p: &OwnedProblem<'_, C>, v: &Verdict, depth: usize) -> Result<bool> {
    crate::engine::verify_verdict(&p.borrow(), v, depth)
}

fn run<C: GroupContext>(p: &Problem<'_, C>, budget: &Budget, opts: &Options, skip_members: bool) -> Result<Verdict> {
    if opts.parallel {
        search_parallel(p, budget, skip_members)
    } else {
        search(p, budget, skip_members)
    }
}

fn generic<C: GroupContext>(
    ctx: &C,
    inst: &Instance,
    twist: Option<&dyn Twist<C::Elem>>,
    oracle: Option<Membership<'_, C::Elem>>,
    opts: &Options,
    skip_members: bool,
) -> Result<Verdict> {
    let p = problem(ctx, inst, twist, oracle);
    run(&p.borrow(), &inst.budget, opts, skip_members)
}

fn fatf_twist(ctx: &FatfCtx, inst: &Instance) -> Result<Option<FatfTwist>> {
    let Some(aut) = &inst.aut else {
        return Ok(None);
    };
    let psi = ctx.automorphism(aut.map.forward(), aut.map.backward())?;
    FatfTwist::new(ctx, psi).map(Some)
}

/// Exact membership in a set of a free group: hashing, Stallings folding, or
/// rewriting of the rational language.
fn free_membership(set: &SetSpec<Word>, rank: usize) -> Option<Oracle<Word>> {
    match set {
        SetSpec::Fin(v) => {
            let h: HashSet<Word> = v.iter().cloned().collect();
            Some(Box::new(move |w| h.contains(w)))
        }
        SetSpec::Coset { gens, rep } => {
            let g = StallingsGraph::fold(rank, gens);
            let ri = rep.inverse();
            Some(Box::new(move |w| g.membership(&w.mul(&ri))))
        }
        SetSpec::Rat(nfa) if nfa.states <= BENOIS_STATE_BUDGET => {
            let nfa = nfa.clone();
            Some(Box::new(move |w| nfa.image_contains(w)))
        }
        SetSpec::Rat(_) => None,
    }
}

enum Fast {
    Done(Verdict),
    /// The set provably misses the target; only a certificate is missing.
    KnownNo,
    Unknown,
}

fn decide_free(inst: &Instance, rank: usize, opts: &Options) -> Result<Verdict> {
    let ctx = FreeCtx::new(rank);
    let oracle = free_membership(&inst.set, rank);
    let twist = inst.aut.as_ref().map(|a| &a.map as &dyn Twist<Word>);
    let fast = if opts.fast_path {
        free_fast_path(inst, opts)?
    } else {
        Fast::Unknown
    };
    let skip = match fast {
        Fast::Done(v) => return Ok(v),
        Fast::KnownNo => true,
        Fast::Unknown => false,
    };
    let p = problem(&ctx, inst, twist, oracle.as_deref());
    run(&p.borrow(), &inst.budget, opts, skip)
}

fn free_fast_path(inst: &Instance, opts: &Options) -> Result<Fast> {
    let y = &inst.target;
    match (inst.kind, &inst.set) {
        (SetKind::Conj, SetSpec::Fin(elems)) => {
            for s in elems {
                if let Some(z) = free_conjugacy(s, y) {
                    return Ok(Fast::Done(Verdict::yes(witness(s, 0, z), "cyclic-reduction")));
                }
            }
            Ok(Fast::KnownNo)
        }
        (SetKind::Twisted, set) => {
            let aut = inst.aut()?;
            let Some(cert) = &aut.via else {
                return Ok(Fast::Unknown);
            };
            if cert.p == 1 {
                // φ = λ_Δ, so y = (z⁻¹φ) s z iff Δy = z⁻¹ (Δs) z.
                let SetSpec::Fin(elems) = set else {
                    return Ok(Fast::Unknown);
                };
                let dy = cert.delta.mul(y);
                for s in elems {
                    if let Some(z) = free_conjugacy(&cert.delta.mul(s), &dy) {
                        return Ok(Fast::Done(Verdict::yes(witness(s, 0, z), "inner")));
                    }
                }
                return Ok(Fast::KnownNo);
            }
            let gphi = GPhi::new(aut.map.clone(), cert.clone())?;
            let v = twisted_via_gphi(&gphi, set, y, &inst.set_name, &inst.budget, opts)?;
            Ok(match v.answer {
                Answer::Undecided => Fast::Unknown,
                _ => Fast::Done(v),
            })
        }
        (SetKind::BrinkConj, SetSpec::Fin(elems)) => {
            let aut = inst.aut()?;
            let Some(cert) = &aut.via else {
                return Ok(Fast::Unknown);
            };
            for s in elems {
                let images = via_brinkmann_reduce(&aut.map, cert, s)?;
                for (i, x) in images.iter().enumerate() {
                    if let Some(z) = free_conjugacy(x, y) {
                        return Ok(Fast::Done(Verdict::yes(witness(s, i as i64 + 1, z), "brinkmann-reduction")));
                    }
                }
            }
            Ok(Fast::KnownNo)
        }
        _ => Ok(Fast::Unknown),
    }
}

fn witness(s: &Word, k: i64, z: Word) -> Witness {
    Witness {
        set_element: s.clone(),
        exponent: k,
        conjugator: z,
    }
}

/// Decides `y ∈ φ-TCC(K)` as the conjugacy question `t y ∈ α(t K)` in
/// `G^φ`, converting the answer back: a conjugator `t^n g` becomes the
/// twisted conjugator `x g` where `kφ^n = (x⁻¹φ) k x`, and a quotient of
/// `G^φ` restricts to a quotient of `G` on which `φ` induces conjugation by
/// the image of `t`.
pub fn twisted_via_gphi(
    gphi: &GPhi,
    set: &SetSpec<Word>,
    y: &Word,
    set_ref: &str,
    budget: &Budget,
    opts: &Options,
) -> Result<Verdict> {
    let n = gphi.rank();
    let ctx = GPhiCtx::new(gphi.clone())?;
    let (ty, tset) = twisted_to_gphi(gphi, set, y);
    let fiber = free_membership(set, n);
    let tinv = gphi.invert(&gphi.t());
    let member = |e: &crate::extension::GPhiElement| {
        let k = gphi.multiply(&tinv, e);
        k.t_exp == 0 && fiber.as_ref().is_some_and(|f| f(&k.g))
    };
    let mut p = Problem::new(&ctx, SetKind::Conj, &tset, &ty).with_set_ref(set_ref);
    if fiber.is_some() {
        p = p.with_membership(&member);
    }
    let v = run(&p, budget, opts, false)?;
    let mut out = match v.answer {
        Answer::Yes => {
            let w = v.witness.as_ref().expect("YES carries a witness");
            let tk = ctx.eval(&w.set_element);
            let k = gphi.multiply(&tinv, &tk).g;
            let c = ctx.eval(&w.conjugator);
            let mut x = Word::empty();
            let mut cur = k.clone();
            for _ in 0..c.t_exp {
                x = x.mul(&cur.inverse());
                cur = gphi.phi.apply(&cur);
            }
            Verdict::yes(witness(&k, 0, x.mul(&c.g)), "gphi")
        }
        Answer::No => {
            let cert = v.certificate.as_ref().expect("NO carries a certificate");
            match restrict_certificate(&cert.hom, n, &gphi.phi, set, y, set_ref)? {
                Some(c) => Verdict::no(c, "gphi"),
                None => Verdict::undecided(v.effort.clone(), "gphi"),
            }
        }
        Answer::Undecided => Verdict::undecided(v.effort.clone(), "gphi"),
    };
    out.effort = v.effort;
    Ok(out)
}

fn restrict_certificate(
    hom: &FiniteHom,
    n: usize,
    phi: &FreeAutomorphism,
    set: &SetSpec<Word>,
    y: &Word,
    set_ref: &str,
) -> Result<Option<SeparatingCertificate>> {
    let psi = FiniteHom {
        degree: hom.degree,
        images: hom.images[..n].to_vec(),
    };
    let Some(aut) = induced_automorphism(&psi, phi.forward()) else {
        return Ok(None);
    };
    let seed = set_image(&psi, set, Word::clone)?;
    let image = image_of_set(&psi, Some(&aut), SetKind::Twisted, &seed)?;
    if image.contains(&psi.eval(y)) {
        return Ok(None);
    }
    Ok(Some(SeparatingCertificate {
        hom: psi,
        kind: SetKind::Twisted,
        set_ref: set_ref.into(),
        excluded: Alphabet::standard(n)?.format(y),
        image: image.into_iter().collect(),
    }))
}

fn decide_semidirect(
    inst: &Instance,
    phi: &FreeAutomorphism,
    via: Option<&ViaCertificate>,
    opts: &Options,
) -> Result<Verdict> {
    let ctx = SemidirectCtx::new(phi.clone())?;
    let mut skip = false;
    if opts.fast_path && inst.kind == SetKind::Conj {
        if let SetSpec::Fin(elems) = &inst.set {
            match semidirect_fast_path(&ctx, elems, &inst.target, via, inst, opts)? {
                Fast::Done(v) => return Ok(v),
                Fast::KnownNo => skip = true,
                Fast::Unknown => {}
            }
        }
    }
    generic(&ctx, inst, None, None, opts, skip)
}

/// Conjugacy in `G ⋊_φ Z` by comparing `t`-exponents and reducing exponents
/// 0 and 1 to Brinkmann and twisted conjugacy in the fiber.
fn semidirect_fast_path(
    ctx: &SemidirectCtx,
    elems: &[Word],
    target: &Word,
    via: Option<&ViaCertificate>,
    inst: &Instance,
    opts: &Options,
) -> Result<Fast> {
    let y = ctx.eval(target);
    let xs: Vec<SemidirectElement> = elems.iter().map(|w| ctx.eval(w)).collect();
    let mut all_no = true;
    for (s, x) in elems.iter().zip(&xs) {
        match semidirect_conjugacy_instance(x, &y) {
            SemidirectReduction::ExponentMismatch { .. } => {}
            SemidirectReduction::Brinkmann { x: xg, y: yg } => {
                let Some(cert) = via else {
                    all_no = false;
                    continue;
                };
                for (i, xi) in via_brinkmann_reduce(&ctx.phi, cert, &xg)?.iter().enumerate() {
                    if let Some(z) = free_conjugacy(xi, &yg) {
                        // t^{-i} x t^i = xφ^i
                        let c = SemidirectElement::new(i as i64 + 1, z);
                        return Ok(Fast::Done(Verdict::yes(witness(s, 0, ctx.to_word(&c)), "brinkmann-reduction")));
                    }
                }
            }
            SemidirectReduction::Twisted { x: xg, y: yg } => {
                let Some(cert) = via else {
                    all_no = false;
                    continue;
                };
                let v = if cert.p == 1 {
                    let dy = cert.delta.mul(&yg);
                    match free_conjugacy(&cert.delta.mul(&xg), &dy) {
                        Some(z) => Verdict::yes(witness(&xg, 0, z), "inner"),
                        None => {
                            continue;
                        }
                    }
                } else {
                    let gphi = GPhi::new(ctx.phi.clone(), cert.clone())?;
                    twisted_via_gphi(&gphi, &SetSpec::Fin(vec![xg.clone()]), &yg, "K", &inst.budget, opts)?
                };
                match v.answer {
                    Answer::Yes => {
                        let z = v.witness.expect("witness").conjugator;
                        // z⁻¹ (t x) z = t (z⁻¹φ) x z
                        return Ok(Fast::Done(Verdict::yes(witness(s, 0, z), "twisted-reduction")));
                    }
                    Answer::No => {}
                    Answer::Undecided => all_no = false,
                }
            }
            SemidirectReduction::Generic { .. } => all_no = false,
        }
    }
    if !all_no {
        return Ok(Fast::Unknown);
    }
    if xs.iter().all(|x| x.t_exp != y.t_exp) {
        return Ok(Fast::Done(Verdict::no(
            exponent_certificate(ctx, &xs, &y, &inst.set_name)?,
            "exponent",
        )));
    }
    Ok(Fast::KnownNo)
}

/// `a_i ↦ 1`, `t ↦` an `N`-cycle with `N` larger than every exponent gap.
fn exponent_certificate(
    ctx: &SemidirectCtx,
    xs: &[SemidirectElement],
    y: &SemidirectElement,
    set_ref: &str,
) -> Result<SeparatingCertificate> {
    let gap = xs.iter().map(|x| (x.t_exp - y.t_exp).unsigned_abs()).max().unwrap_or(0);
    let degree = gap as usize + 1;
    let n = ctx.phi.rank();
    let mut images = vec![Perm::identity(degree); n];
    images.push(Perm::from_images((0..degree).map(|i| (i + 1) % degree).collect())?);
    let hom = FiniteHom { degree, images };
    let seed = set_image(&hom, &SetSpec::Fin(xs.to_vec()), |e| ctx.to_word(e))?;
    let image = image_of_set(&hom, None, SetKind::Conj, &seed)?;
    Ok(SeparatingCertificate {
        hom,
        kind: SetKind::Conj,
        set_ref: set_ref.into(),
        excluded: ctx.format(y),
        image: image.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{ball, twisted_conj};

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn swap() -> FreeAutomorphism {
        FreeAutomorphism::new(vec![w("b"), w("a")], Some(vec![w("b"), w("a")])).unwrap()
    }

    fn free_instance(kind: SetKind, aut: Option<AutSpec>, set: Vec<&str>, y: &str) -> Instance {
        Instance {
            group: GroupSpec::Free { rank: 2 },
            kind,
            aut,
            set: SetSpec::Fin(set.into_iter().map(w).collect()),
            set_name: "K".into(),
            target: w(y),
            budget: Budget::default(),
        }
    }

    fn swap_aut() -> AutSpec {
        AutSpec {
            map: swap(),
            via: Some(ViaCertificate { p: 2, delta: Word::empty() }),
        }
    }

    fn check(inst: &Instance, opts: &Options) -> Answer {
        let v = decide(inst, opts).unwrap();
        assert!(verify(inst, &v).unwrap(), "{v:?}");
        v.answer
    }

    #[test]
    fn free_conjugacy_verdicts() {
        for fast in [true, false] {
            let opts = Options { fast_path: fast, parallel: false };
            assert_eq!(check(&free_instance(SetKind::Conj, None, vec!["ab"], "ba"), &opts), Answer::Yes);
            assert_eq!(check(&free_instance(SetKind::Conj, None, vec!["ab"], "aB"), &opts), Answer::No);
            assert_eq!(check(&free_instance(SetKind::Conj, None, vec!["abAB"], "aaB"), &opts), Answer::No);
        }
    }

    #[test]
    fn twisted_swap_agrees_with_brute_force() {
        let phi = swap();
        let mut reachable = HashSet::new();
        for z in ball(2, 4) {
            reachable.insert(twisted_conj(&phi, &w("a"), &z));
        }
        for y in ball(2, 3) {
            for fast in [true, false] {
                let opts = Options { fast_path: fast, parallel: false };
                let inst = free_instance(SetKind::Twisted, Some(swap_aut()), vec!["a"], "");
                let inst = Instance { target: y.clone(), ..inst };
                let a = check(&inst, &opts);
                if reachable.contains(&y) {
                    assert_eq!(a, Answer::Yes, "{y:?}");
                }
                if fast {
                    assert_ne!(a, Answer::Undecided, "{y:?}");
                }
            }
        }
    }

    #[test]
    fn brinkmann_conjugacy() {
        let inst = free_instance(SetKind::BrinkConj, Some(swap_aut()), vec!["aab"], "abb");
        assert_eq!(check(&inst, &Options::default()), Answer::Yes);
        let inst = free_instance(SetKind::BrinkConj, Some(swap_aut()), vec!["aab"], "aaab");
        assert_eq!(check(&inst, &Options::default()), Answer::No);
        let inst = free_instance(SetKind::Orbit, Some(swap_aut()), vec!["aab"], "bba");
        assert_eq!(check(&inst, &Options::default()), Answer::Yes);
    }

    #[test]
    fn parallel_matches_sequential() {
        for y in ball(2, 2) {
            let inst = free_instance(SetKind::Twisted, Some(swap_aut()), vec!["ab"], "");
            let inst = Instance { target: y, ..inst };
            let a = decide(&inst, &Options { fast_path: false, parallel: false }).unwrap();
            let b = decide(&inst, &Options { fast_path: false, parallel: true }).unwrap();
            assert_eq!((a.answer, a.witness, a.certificate), (b.answer, b.witness, b.certificate));
        }
    }

    #[test]
    fn semidirect_exponents() {
        let group = GroupSpec::Semidirect {
            phi: swap(),
            via: Some(ViaCertificate { p: 2, delta: Word::empty() }),
        };
        let inst = |x: &str, y: &str| Instance {
            group: group.clone(),
            kind: SetKind::Conj,
            aut: None,
            set: SetSpec::Fin(vec![w(x)]),
            set_name: "K".into(),
            target: w(y),
            budget: Budget::default(),
        };
        // letters: a = 0, b = 1, t = 2 (written c by Word::parse)
        assert_eq!(check(&inst("cab", "cba"), &Options::default()), Answer::Yes);
        assert_eq!(check(&inst("ca", "caab"), &Options::default()), Answer::No);
        assert_eq!(check(&inst("ca", "cb"), &Options::default()), Answer::Yes);
        assert_eq!(check(&inst("a", "b"), &Options::default()), Answer::Yes);
        assert_eq!(check(&inst("a", "cca"), &Options::default()), Answer::No);
        assert_eq!(check(&inst("a", "ab"), &Options::default()), Answer::No);
    }

    #[test]
    fn fatf_twisted() {
        // F_2 × Z with a ↦ b t, b ↦ a, t ↦ t⁻¹ (letters a, b, c).
        let map = FreeAutomorphism::new(vec![w("bc"), w("a"), w("C")], Some(vec![w("b"), w("aC"), w("C")])).unwrap();
        let ctx = FatfCtx::new(2, 1).unwrap();
        let tw = FatfTwist::new(&ctx, ctx.automorphism(map.forward(), map.backward()).unwrap()).unwrap();
        let x = ctx.eval(&w("ab"));
        for z in ball(3, 2) {
            let ze = ctx.eval(&z);
            let y = ctx.mul(&ctx.mul(&ctx.inv(&tw.apply(&ze)), &x), &ze);
            let inst = Instance {
                group: GroupSpec::Fatf { rank: 2, dim: 1 },
                kind: SetKind::Twisted,
                aut: Some(AutSpec { map: map.clone(), via: None }),
                set: SetSpec::Fin(vec![w("ab")]),
                set_name: "K".into(),
                target: ctx.to_word(&y),
                budget: Budget::default(),
            };
            assert_eq!(check(&inst, &Options::default()), Answer::Yes);
        }
    }
}
