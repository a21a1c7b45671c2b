//! Finite quotients: homomorphisms from finitely presented groups into
//! symmetric groups, induced automorphisms on those quotients, finite images
//! of conjugacy-type sets, and separating certificates.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::automaton::Nfa;
use crate::error::{Error, Result};
use crate::perm::{all_perms, class_representatives, generated_group, Perm};
use crate::set::SetSpec;
use crate::word::{Letter, Word};

/// `⟨A | R⟩`, generators indexed `0..rank`, with display labels.
///
/// `order` is the order in which homomorphism enumeration assigns generator
/// images; putting generators that others are conjugate to first lets the
/// enumerator solve for the rest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub rank: usize,
    pub relators: Vec<Word>,
    pub labels: Vec<char>,
    pub order: Vec<usize>,
}

impl Presentation {
    pub fn free(rank: usize) -> Self {
        Presentation {
            rank,
            relators: Vec::new(),
            labels: (0..rank).map(|i| (b'a' + i as u8) as char).collect(),
            order: (0..rank).collect(),
        }
    }

    pub fn new(rank: usize, relators: Vec<Word>, labels: Vec<char>) -> Result<Self> {
        if labels.len() != rank {
            return Err(Error::Input("label count differs from rank".into()));
        }
        if relators.iter().any(|r| r.support_rank() > rank) {
            return Err(Error::Input("relator uses an unknown generator".into()));
        }
        Ok(Presentation {
            rank,
            relators,
            labels,
            order: (0..rank).collect(),
        })
    }

    pub fn with_order(mut self, order: Vec<usize>) -> Result<Self> {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (0..self.rank).collect::<Vec<_>>() {
            return Err(Error::Input("generator order is not a permutation".into()));
        }
        self.order = order;
        Ok(self)
    }

    pub fn is_free(&self) -> bool {
        self.relators.iter().all(Word::is_empty)
    }

    pub fn format(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.letters()
            .iter()
            .map(|l| {
                let c = self.labels[l.index()];
                if l.inv {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }
}

/// Generator images in `Sym(degree)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteHom {
    pub degree: usize,
    pub images: Vec<Perm>,
}

impl FiniteHom {
    pub fn eval(&self, w: &Word) -> Perm {
        let mut out = Perm::identity(self.degree);
        for l in w.letters() {
            let p = &self.images[l.index()];
            out = if l.inv { out.mul(&p.inverse()) } else { out.mul(p) };
        }
        out
    }

    pub fn eval_letter(&self, l: Letter) -> Perm {
        let p = &self.images[l.index()];
        if l.inv {
            p.inverse()
        } else {
            p.clone()
        }
    }

    pub fn respects(&self, pres: &Presentation) -> bool {
        self.images.len() == pres.rank
            && self.images.iter().all(|p| p.degree() == self.degree)
            && pres.relators.iter().all(|r| self.eval(r).is_identity())
    }

    /// Elements of the image subgroup, or `None` past `limit`.
    pub fn image_group(&self, limit: usize) -> Option<Vec<Perm>> {
        generated_group(self.degree, &self.images, limit)
    }

    pub fn direct_sum(&self, other: &FiniteHom) -> FiniteHom {
        FiniteHom {
            degree: self.degree + other.degree,
            images: self
                .images
                .iter()
                .zip(&other.images)
                .map(|(a, b)| a.direct_sum(b))
                .collect(),
        }
    }
}

#[derive(Clone, Copy)]
struct Forcing {
    relator: usize,
    position: usize,
}

/// Streams every homomorphism `pres → Sym(degree)` in lexicographic order of
/// generator-image tuples.
///
/// With `canonical_first` set, the first generator's image ranges only over
/// one representative per cycle type. Every homomorphism is then conjugate in
/// `Sym(degree)` to at least one emitted homomorphism.
pub struct HomEnumerator {
    pres: Presentation,
    degree: usize,
    canonical_first: bool,
    perms: Arc<Vec<Perm>>,
    reps: Arc<Vec<Perm>>,
    checks: Vec<Vec<usize>>,
    forced: Vec<Option<Forcing>>,
    idx: Vec<usize>,
    current: Vec<Perm>,
    level: usize,
    started: bool,
    done: bool,
}

impl HomEnumerator {
    pub fn new(pres: &Presentation, degree: usize) -> Self {
        Self::with_options(pres, degree, false)
    }

    pub fn canonical(pres: &Presentation, degree: usize) -> Self {
        Self::with_options(pres, degree, true)
    }

    fn with_options(pres: &Presentation, degree: usize, canonical_first: bool) -> Self {
        let rank = pres.rank;
        let mut position = vec![0; rank];
        for (level, &g) in pres.order.iter().enumerate() {
            position[g] = level;
        }
        let mut checks = vec![Vec::new(); rank];
        let mut forced: Vec<Option<Forcing>> = vec![None; rank];
        for (ri, r) in pres.relators.iter().enumerate() {
            let Some(top) = r.letters().iter().map(|l| position[l.index()]).max() else {
                continue;
            };
            checks[top].push(ri);
            let occurrences: Vec<usize> = r
                .letters()
                .iter()
                .enumerate()
                .filter(|(_, l)| position[l.index()] == top)
                .map(|(i, _)| i)
                .collect();
            let blocked = canonical_first && top == 0;
            if occurrences.len() == 1 && forced[top].is_none() && !blocked {
                forced[top] = Some(Forcing {
                    relator: ri,
                    position: occurrences[0],
                });
            }
        }
        HomEnumerator {
            pres: pres.clone(),
            degree,
            canonical_first,
            perms: all_perms(degree),
            reps: class_representatives(degree),
            checks,
            forced,
            idx: vec![0; rank],
            current: vec![Perm::identity(degree); rank],
            level: 0,
            started: false,
            done: rank == 0,
        }
    }

    fn eval_prefix(&self, letters: &[Letter]) -> Perm {
        let mut out = Perm::identity(self.degree);
        for &l in letters {
            let p = &self.current[l.index()];
            out = if l.inv { out.mul(&p.inverse()) } else { out.mul(p) };
        }
        out
    }

    fn candidate(&self, level: usize, i: usize) -> Option<Perm> {
        if let Some(f) = self.forced[level] {
            if i > 0 {
                return None;
            }
            let r = &self.pres.relators[f.relator];
            let letters = r.letters();
            let u = self.eval_prefix(&letters[..f.position]);
            let v = self.eval_prefix(&letters[f.position + 1..]);
            let x = u.inverse().mul(&v.inverse());
            return Some(if letters[f.position].inv { x.inverse() } else { x });
        }
        let pool = if self.canonical_first && level == 0 {
            &self.reps
        } else {
            &self.perms
        };
        pool.get(i).cloned()
    }

    fn level_ok(&self, level: usize) -> bool {
        self.checks[level]
            .iter()
            .all(|&ri| self.eval_prefix(self.pres.relators[ri].letters()).is_identity())
    }
}

impl Iterator for HomEnumerator {
    type Item = FiniteHom;

    fn next(&mut self) -> Option<FiniteHom> {
        if self.done {
            return None;
        }
        let rank = self.pres.rank;
        if !self.started {
            self.started = true;
            self.level = 0;
            self.idx[0] = 0;
        } else {
            self.level = rank - 1;
            self.idx[self.level] += 1;
        }
        loop {
            let level = self.level;
            match self.candidate(level, self.idx[level]) {
                None => {
                    if level == 0 {
                        self.done = true;
                        return None;
                    }
                    self.level -= 1;
                    self.idx[self.level] += 1;
                }
                Some(p) => {
                    self.current[self.pres.order[level]] = p;
                    if self.level_ok(level) {
                        if level + 1 == rank {
                            return Some(FiniteHom {
                                degree: self.degree,
                                images: self.current.clone(),
                            });
                        }
                        self.level += 1;
                        self.idx[self.level] = 0;
                    } else {
                        self.idx[level] += 1;
                    }
                }
            }
        }
    }
}

/// Every homomorphism `pres → Sym(degree)`, lexicographically.
pub fn enum_homs(pres: &Presentation, degree: usize) -> HomEnumerator {
    HomEnumerator::new(pres, degree)
}

/// An automorphism `φ̄` of the image subgroup with `(aφ)ψ = (aψ)φ̄`.
#[derive(Clone, Debug)]
pub struct InducedAut {
    pub base: FiniteHom,
    map: HashMap<Perm, Perm>,
}

impl InducedAut {
    pub fn apply(&self, p: &Perm) -> Option<&Perm> {
        self.map.get(p)
    }

    pub fn group_order(&self) -> usize {
        self.map.len()
    }

    pub fn elements(&self) -> impl Iterator<Item = &Perm> {
        self.map.keys()
    }
}

/// Default cap on image-subgroup orders handled by the quotient machinery.
pub const GROUP_LIMIT: usize = 50_000;

/// Tries to define `φ̄` by `aψ ↦ (aφ)ψ`, where `phi_images[i]` is the word
/// `a_i φ` over the same presentation. Returns `None` when the assignment
/// does not extend to a well-defined bijection of the image subgroup.
pub fn induced_automorphism(psi: &FiniteHom, phi_images: &[Word]) -> Option<InducedAut> {
    let targets: Vec<Perm> = phi_images.iter().map(|w| psi.eval(w)).collect();
    let id = Perm::identity(psi.degree);
    let mut map: HashMap<Perm, Perm> = HashMap::new();
    map.insert(id.clone(), id.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        let v = map[&g].clone();
        for (s, t) in psi.images.iter().zip(&targets) {
            let g2 = g.mul(s);
            let v2 = v.mul(t);
            match map.get(&g2) {
                Some(existing) if *existing != v2 => return None,
                Some(_) => {}
                None => {
                    if map.len() >= GROUP_LIMIT {
                        return None;
                    }
                    map.insert(g2.clone(), v2);
                    queue.push_back(g2);
                }
            }
        }
    }
    let values: HashSet<&Perm> = map.values().collect();
    if values.len() != map.len() || values.iter().any(|v| !map.contains_key(*v)) {
        return None;
    }
    Some(InducedAut {
        base: psi.clone(),
        map,
    })
}

/// Refines `ψ` to a homomorphism whose kernel is `φ`-invariant and contained
/// in `Ker ψ`, namely the intersection of the kernels of `φ^j ψ`, `j ≥ 0`.
/// The intersection stabilises after finitely many terms; the returned
/// homomorphism is the direct sum of the terms up to that point, together
/// with its induced automorphism.
pub fn invariant_refine(
    psi: &FiniteHom,
    phi_images: &[Word],
    max_terms: usize,
) -> Result<(FiniteHom, InducedAut)> {
    if let Some(aut) = induced_automorphism(psi, phi_images) {
        return Ok((psi.clone(), aut));
    }
    let mut combined = psi.clone();
    let mut term = psi.clone();
    let mut order = combined
        .image_group(GROUP_LIMIT)
        .map(|g| g.len())
        .ok_or_else(|| resource("image group", 0))?;
    for j in 1..=max_terms {
        // (φ^j ψ)(a) = (φ^{j-1} ψ)(aφ)
        term = FiniteHom {
            degree: term.degree,
            images: phi_images.iter().map(|w| term.eval(w)).collect(),
        };
        let candidate = combined.direct_sum(&term);
        let new_order = candidate
            .image_group(GROUP_LIMIT)
            .map(|g| g.len())
            .ok_or_else(|| resource("image group", j))?;
        if new_order == order {
            let aut = induced_automorphism(&combined, phi_images).ok_or_else(|| {
                Error::Input("stabilised kernel is not invariant; is φ an automorphism?".into())
            })?;
            return Ok((combined, aut));
        }
        combined = candidate;
        order = new_order;
    }
    Err(resource("invariant refinement terms", max_terms))
}

fn resource(what: &str, progress: usize) -> Error {
    Error::Resource {
        what: what.to_string(),
        progress: format!("{progress} steps completed"),
    }
}

/// The four set operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    /// `α(K)`: union of conjugacy classes.
    Conj,
    /// `φ-TCC(K)`: union of twisted conjugacy classes.
    Twisted,
    /// `O_φ(K)`: union of orbits.
    Orbit,
    /// `φ-BCC(K)`: conjugates of orbit elements.
    BrinkConj,
}

impl SetKind {
    pub fn needs_aut(self) -> bool {
        !matches!(self, SetKind::Conj)
    }

    pub fn name(self) -> &'static str {
        match self {
            SetKind::Conj => "conj",
            SetKind::Twisted => "twisted",
            SetKind::Orbit => "brinkmann",
            SetKind::BrinkConj => "brinkconj",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "conj" => SetKind::Conj,
            "twisted" => SetKind::Twisted,
            "brinkmann" | "orbit" => SetKind::Orbit,
            "brinkconj" => SetKind::BrinkConj,
            _ => return None,
        })
    }
}

/// Image `Kψ` of a set, as a finite set of permutations.
pub fn set_image<E>(
    psi: &FiniteHom,
    set: &SetSpec<E>,
    to_word: impl Fn(&E) -> Word,
) -> Result<BTreeSet<Perm>> {
    Ok(match set {
        SetSpec::Fin(elems) => elems.iter().map(|e| psi.eval(&to_word(e))).collect(),
        SetSpec::Coset { gens, rep } => {
            let gen_images: Vec<Perm> = gens.iter().map(|g| psi.eval(&to_word(g))).collect();
            let r = psi.eval(&to_word(rep));
            generated_group(psi.degree, &gen_images, GROUP_LIMIT)
                .ok_or_else(|| resource("coset image", 0))?
                .into_iter()
                .map(|h| h.mul(&r))
                .collect()
        }
        SetSpec::Rat(nfa) => rational_image(psi, nfa)?,
    })
}

/// Evaluates every accepted word of an automaton in the finite group by a
/// product search over (state, group element).
pub fn rational_image(psi: &FiniteHom, nfa: &Nfa) -> Result<BTreeSet<Perm>> {
    let id = Perm::identity(psi.degree);
    let mut seen: HashSet<(usize, Perm)> = HashSet::new();
    let mut queue = VecDeque::new();
    for &i in &nfa.initial {
        if seen.insert((i, id.clone())) {
            queue.push_back((i, id.clone()));
        }
    }
    let mut by_state: Vec<Vec<(Letter, usize)>> = vec![Vec::new(); nfa.states];
    for &(p, l, q) in &nfa.transitions {
        by_state[p].push((l, q));
    }
    let letter_images: HashMap<Letter, Perm> = nfa
        .transitions
        .iter()
        .map(|&(_, l, _)| (l, psi.eval_letter(l)))
        .collect();
    while let Some((s, g)) = queue.pop_front() {
        if seen.len() > GROUP_LIMIT * 4 {
            return Err(resource("rational image", seen.len()));
        }
        for &(l, q) in &by_state[s] {
            let g2 = g.mul(&letter_images[&l]);
            if seen.insert((q, g2.clone())) {
                queue.push_back((q, g2));
            }
        }
    }
    let finals: HashSet<usize> = nfa.finals.iter().copied().collect();
    Ok(seen
        .into_iter()
        .filter(|(s, _)| finals.contains(s))
        .map(|(_, g)| g)
        .collect())
}

/// Closes `seed` inside the image subgroup under the operator of `kind`.
pub fn image_of_set(
    psi: &FiniteHom,
    aut: Option<&InducedAut>,
    kind: SetKind,
    seed: &BTreeSet<Perm>,
) -> Result<BTreeSet<Perm>> {
    if kind.needs_aut() && aut.is_none() {
        return Err(Error::Input(format!(
            "set kind {} needs an induced automorphism",
            kind.name()
        )));
    }
    let gens = &psi.images;
    let twisted_gens: Vec<(Perm, Perm)> = match (kind, aut) {
        (SetKind::Twisted, Some(a)) => gens
            .iter()
            .map(|s| {
                let phis = a.apply(s).expect("generator lies in the image").clone();
                (phis.inverse(), s.clone())
            })
            .collect(),
        _ => Vec::new(),
    };
    let mut out: BTreeSet<Perm> = seed.clone();
    let mut queue: VecDeque<Perm> = seed.iter().cloned().collect();
    while let Some(s) = queue.pop_front() {
        let mut next = Vec::new();
        match kind {
            SetKind::Conj => next.extend(gens.iter().map(|g| s.conj(g))),
            SetKind::Twisted => next.extend(twisted_gens.iter().map(|(l, r)| l.mul(&s).mul(r))),
            SetKind::Orbit => next.push(apply_aut(aut, &s)?),
            SetKind::BrinkConj => {
                next.extend(gens.iter().map(|g| s.conj(g)));
                next.push(apply_aut(aut, &s)?);
            }
        }
        for n in next {
            if out.insert(n.clone()) {
                if out.len() > GROUP_LIMIT {
                    return Err(resource("set image", out.len()));
                }
                queue.push_back(n);
            }
        }
    }
    Ok(out)
}

fn apply_aut(aut: Option<&InducedAut>, p: &Perm) -> Result<Perm> {
    aut.and_then(|a| a.apply(p).cloned())
        .ok_or_else(|| Error::Input("set element outside the image subgroup".into()))
}

/// A homomorphism to a finite group under which the excluded element's image
/// avoids the image of the set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatingCertificate {
    pub hom: FiniteHom,
    pub kind: SetKind,
    pub set_ref: String,
    pub excluded: String,
    pub image: Vec<Perm>,
}

#[derive(Serialize, Deserialize)]
struct GeneratorImage {
    gen: String,
    perm: String,
}

#[derive(Serialize, Deserialize)]
struct CertificateFile {
    degree: usize,
    generators: Vec<GeneratorImage>,
    kind: SetKind,
    set: String,
    excluded: String,
    image: Vec<String>,
}

impl SeparatingCertificate {
    pub fn to_json(&self, labels: &[char]) -> String {
        let file = CertificateFile {
            degree: self.hom.degree,
            generators: self
                .hom
                .images
                .iter()
                .zip(labels)
                .map(|(p, c)| GeneratorImage {
                    gen: c.to_string(),
                    perm: p.to_cycle_string(),
                })
                .collect(),
            kind: self.kind,
            set: self.set_ref.clone(),
            excluded: self.excluded.clone(),
            image: self.image.iter().map(Perm::to_cycle_string).collect(),
        };
        serde_json::to_string_pretty(&file).expect("certificate serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: CertificateFile =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("certificate: {e}")))?;
        let images = file
            .generators
            .iter()
            .map(|g| Perm::parse_cycles(&g.perm, file.degree))
            .collect::<Result<Vec<_>>>()?;
        let image = file
            .image
            .iter()
            .map(|p| Perm::parse_cycles(p, file.degree))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeparatingCertificate {
            hom: FiniteHom {
                degree: file.degree,
                images,
            },
            kind: file.kind,
            set_ref: file.set,
            excluded: file.excluded,
            image,
        })
    }
}

/// Recomputes the finite image of the set under the certificate's
/// homomorphism and checks that the target's image avoids it.
///
/// `phi_images` must be supplied for the twisted and orbit kinds; the induced
/// automorphism is recomputed from it. A homomorphism that violates a
/// relator is a malformed certificate.
pub fn verify_separation<E>(
    cert: &SeparatingCertificate,
    pres: &Presentation,
    target: &Word,
    kind: SetKind,
    set: &SetSpec<E>,
    to_word: impl Fn(&E) -> Word,
    phi_images: Option<&[Word]>,
) -> Result<bool> {
    if !cert.hom.respects(pres) {
        return Err(Error::Input(
            "certificate map is not a homomorphism of the presentation".into(),
        ));
    }
    if cert.kind != kind {
        return Ok(false);
    }
    let aut = match (kind.needs_aut(), phi_images) {
        (false, _) => None,
        (true, None) => return Err(Error::Input("automorphism required".into())),
        (true, Some(phi)) => match induced_automorphism(&cert.hom, phi) {
            Some(a) => Some(a),
            None => return Ok(false),
        },
    };
    let seed = set_image(&cert.hom, set, to_word)?;
    let image = image_of_set(&cert.hom, aut.as_ref(), kind, &seed)?;
    Ok(!image.contains(&cert.hom.eval(target)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn p(s: &str, k: usize) -> Perm {
        Perm::parse_cycles(s, k).unwrap()
    }

    #[test]
    fn hom_counts() {
        assert_eq!(enum_homs(&Presentation::free(2), 3).count(), 36);
        let c2 = Presentation::new(1, vec![w("aa")], vec!['a']).unwrap();
        assert_eq!(enum_homs(&c2, 3).count(), 4);
        assert_eq!(enum_homs(&c2, 1).count(), 1);
        assert_eq!(enum_homs(&Presentation::free(3), 1).count(), 1);
        assert_eq!(enum_homs(&Presentation::free(1), 4).count(), 24);
    }

    #[test]
    fn hom_enumeration_is_lexicographic() {
        let homs: Vec<FiniteHom> = enum_homs(&Presentation::free(2), 3).collect();
        assert!(homs.windows(2).all(|h| h[0].images < h[1].images));
    }

    #[test]
    fn forced_generators_keep_every_hom() {
        // ⟨a, b | b = a²⟩ ≅ Z: homs to Sym(3) are determined by a.
        let pres = Presentation::new(2, vec![w("aaB")], vec!['a', 'b']).unwrap();
        let homs: Vec<_> = enum_homs(&pres, 3).collect();
        assert_eq!(homs.len(), 6);
        assert!(homs.iter().all(|h| h.respects(&pres)));
    }

    #[test]
    fn generator_order_matches_filtered_enumeration() {
        // F_2 ⋊ Z with the swap, t = generator 2 enumerated first.
        let pres = Presentation::new(3, vec![w("CacB"), w("CbcA")], vec!['a', 'b', 't'])
            .unwrap()
            .with_order(vec![2, 0, 1])
            .unwrap();
        let mut fast: Vec<_> = enum_homs(&pres, 3).collect();
        let mut brute: Vec<_> = enum_homs(&Presentation::free(3), 3)
            .filter(|h| h.respects(&pres))
            .collect();
        fast.sort_by(|a, b| a.images.cmp(&b.images));
        brute.sort_by(|a, b| a.images.cmp(&b.images));
        assert_eq!(fast, brute);
        assert!(!fast.is_empty());
    }

    fn swap_images() -> Vec<Word> {
        vec![w("b"), w("a")]
    }

    fn abelian_mod2() -> FiniteHom {
        // (Z/2)² acting regularly on 4 points.
        FiniteHom {
            degree: 4,
            images: vec![p("(1 2)(3 4)", 4), p("(1 3)(2 4)", 4)],
        }
    }

    #[test]
    fn induced_examples() {
        let psi = abelian_mod2();
        let aut = induced_automorphism(&psi, &swap_images()).unwrap();
        assert_eq!(aut.apply(&psi.images[0]), Some(&psi.images[1]));
        assert_eq!(aut.group_order(), 4);

        let psi = FiniteHom {
            degree: 2,
            images: vec![p("(1 2)", 2), Perm::identity(2)],
        };
        assert!(induced_automorphism(&psi, &[w("a"), w("ab")]).is_none());
        assert!(induced_automorphism(&psi, &[w("a"), w("b")]).is_some());
    }

    #[test]
    fn refine_examples() {
        let psi = FiniteHom {
            degree: 2,
            images: vec![p("(1 2)", 2), Perm::identity(2)],
        };
        let (pi, aut) = invariant_refine(&psi, &swap_images(), 8).unwrap();
        assert_eq!(pi.image_group(100).unwrap().len(), 4);
        assert_eq!(aut.group_order(), 4);
        // Ker π ⊆ Ker ψ on a sample
        for x in crate::word::ball(2, 4) {
            if pi.eval(&x).is_identity() {
                assert!(psi.eval(&x).is_identity());
            }
        }
        let trivial = FiniteHom {
            degree: 1,
            images: vec![Perm::identity(1); 2],
        };
        let (pi, _) = invariant_refine(&trivial, &swap_images(), 8).unwrap();
        assert_eq!(pi, trivial);
    }

    #[test]
    fn image_examples() {
        let psi = FiniteHom {
            degree: 3,
            images: vec![p("(1 2)", 3), p("(2 3)", 3)],
        };
        let seed = set_image(&psi, &SetSpec::Fin(vec![w("a")]), Clone::clone).unwrap();
        let img = image_of_set(&psi, None, SetKind::Conj, &seed).unwrap();
        let expect: BTreeSet<Perm> = ["(1 2)", "(1 3)", "(2 3)"].iter().map(|s| p(s, 3)).collect();
        assert_eq!(img, expect);

        let psi = abelian_mod2();
        let aut = induced_automorphism(&psi, &swap_images()).unwrap();
        let seed = set_image(&psi, &SetSpec::Fin(vec![w("a")]), Clone::clone).unwrap();
        let orbit = image_of_set(&psi, Some(&aut), SetKind::Orbit, &seed).unwrap();
        assert_eq!(orbit, [psi.images[0].clone(), psi.images[1].clone()].into_iter().collect());

        // identity twist agrees with conjugation
        let psi = FiniteHom {
            degree: 3,
            images: vec![p("(1 2 3)", 3), p("(1 2)", 3)],
        };
        let id = [w("a"), w("b")];
        let aut = induced_automorphism(&psi, &id).unwrap();
        let seed = set_image(&psi, &SetSpec::Fin(vec![w("ab")]), Clone::clone).unwrap();
        assert_eq!(
            image_of_set(&psi, Some(&aut), SetKind::Twisted, &seed).unwrap(),
            image_of_set(&psi, None, SetKind::Conj, &seed).unwrap()
        );
        assert!(image_of_set(&psi, None, SetKind::Twisted, &seed).is_err());
    }

    #[test]
    fn separation_examples() {
        let pres = Presentation::free(2);
        let psi = abelian_mod2();
        let set = SetSpec::Fin(vec![w("a")]);
        let mk = |hom: FiniteHom| SeparatingCertificate {
            hom,
            kind: SetKind::Conj,
            set_ref: "{a}".into(),
            excluded: "b".into(),
            image: Vec::new(),
        };
        assert!(verify_separation(&mk(psi.clone()), &pres, &w("b"), SetKind::Conj, &set, Clone::clone, None).unwrap());
        assert!(!verify_separation(&mk(psi), &pres, &w("Bab"), SetKind::Conj, &set, Clone::clone, None).unwrap());
        let trivial = FiniteHom {
            degree: 1,
            images: vec![Perm::identity(1); 2],
        };
        assert!(!verify_separation(&mk(trivial), &pres, &w("b"), SetKind::Conj, &set, Clone::clone, None).unwrap());

        let c2 = Presentation::new(1, vec![w("aa")], vec!['a']).unwrap();
        let bad = FiniteHom {
            degree: 3,
            images: vec![p("(1 2 3)", 3)],
        };
        assert!(verify_separation(&mk(bad), &c2, &w("a"), SetKind::Conj, &set, Clone::clone, None).is_err());
    }

    #[test]
    fn certificate_json_round_trip() {
        let cert = SeparatingCertificate {
            hom: abelian_mod2(),
            kind: SetKind::Twisted,
            set_ref: "fin a".into(),
            excluded: "b".into(),
            image: vec![p("(1 2)(3 4)", 4)],
        };
        let json = cert.to_json(&['a', 'b']);
        assert!(json.contains("\"kind\": \"twisted\""));
        assert_eq!(SeparatingCertificate::from_json(&json).unwrap(), cert);
    }
}
