//! Free-group words and automorphisms.
//!
//! A [`Word`] is always stored freely reduced. Letters are signed generator
//! indices; the text format writes generator `i` as the `i`-th name of the
//! alphabet (lowercase) and its inverse as the uppercase letter, with `1`
//! standing for the empty word.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum number of generators representable in the text format.
pub const MAX_RANK: usize = 26;

/// A generator or its inverse.
///
/// Ordering is `a < A < b < B < ...`, which is the order used for all
/// shortlex enumerations in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: u8,
    pub inv: bool,
}

impl Letter {
    pub const fn pos(gen: usize) -> Self {
        Letter {
            gen: gen as u8,
            inv: false,
        }
    }

    pub const fn neg(gen: usize) -> Self {
        Letter {
            gen: gen as u8,
            inv: true,
        }
    }

    pub fn inverse(self) -> Self {
        Letter {
            gen: self.gen,
            inv: !self.inv,
        }
    }

    pub fn index(self) -> usize {
        self.gen as usize
    }

    /// All `2 * rank` letters in shortlex order.
    pub fn all(rank: usize) -> impl Iterator<Item = Letter> {
        (0..rank).flat_map(|g| [Letter::pos(g), Letter::neg(g)])
    }
}

/// Generator names of a free group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    names: Vec<char>,
}

impl Alphabet {
    /// The standard alphabet `a, b, c, ...` of the given rank.
    pub fn standard(rank: usize) -> Result<Self> {
        if rank == 0 || rank > MAX_RANK {
            return Err(Error::Input(format!(
                "rank must lie in 1..={MAX_RANK}, got {rank}"
            )));
        }
        Ok(Alphabet {
            names: (0..rank).map(|i| (b'a' + i as u8) as char).collect(),
        })
    }

    pub fn new(names: Vec<char>) -> Result<Self> {
        if names.is_empty() || names.len() > MAX_RANK {
            return Err(Error::Input("alphabet must have 1..=26 names".into()));
        }
        for (i, c) in names.iter().enumerate() {
            if !c.is_ascii_lowercase() {
                return Err(Error::Input(format!("generator name {c:?} is not a lowercase letter")));
            }
            if names[..i].contains(c) {
                return Err(Error::Input(format!("duplicate generator name {c:?}")));
            }
        }
        Ok(Alphabet { names })
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    fn letter(&self, c: char) -> Option<Letter> {
        let lower = c.to_ascii_lowercase();
        let gen = self.names.iter().position(|&n| n == lower)?;
        Some(if c.is_ascii_uppercase() {
            Letter::neg(gen)
        } else {
            Letter::pos(gen)
        })
    }

    /// Parses a word, reducing it. Errors carry the 1-based column of the
    /// offending character.
    pub fn parse(&self, text: &str) -> Result<Word> {
        if text == "1" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::with_capacity(text.len());
        for (col, c) in text.chars().enumerate() {
            match self.letter(c) {
                Some(l) => letters.push(l),
                None => {
                    return Err(Error::Parse {
                        line: 1,
                        column: col + 1,
                        message: format!("character {c:?} is not in the alphabet"),
                    })
                }
            }
        }
        Ok(Word::from_letters(letters))
    }

    pub fn format(&self, w: &Word) -> String {
        if w.is_empty() {
            return "1".to_string();
        }
        w.letters()
            .iter()
            .map(|l| {
                let c = self.names[l.index()];
                if l.inv {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn gen(g: usize) -> Self {
        Word(vec![Letter::pos(g)])
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    /// Reduces an arbitrary letter sequence.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    /// Parses with the standard alphabet of rank 26.
    pub fn parse(text: &str) -> Result<Self> {
        Alphabet::standard(MAX_RANK)?.parse(text)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest generator index used, plus one.
    pub fn support_rank(&self) -> usize {
        self.0.iter().map(|l| l.index() + 1).max().unwrap_or(0)
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::empty();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `z⁻¹ · self · z`.
    pub fn conj(&self, z: &Word) -> Word {
        z.inverse().mul(self).mul(z)
    }

    /// Returns `(core, t)` with `core = t⁻¹ · self · t` cyclically reduced.
    pub fn cyclic_reduction(&self) -> (Word, Word) {
        let l = &self.0;
        let mut i = 0;
        let n = l.len();
        while i < n / 2 && l[i] == l[n - 1 - i].inverse() {
            i += 1;
        }
        let t = Word(l[..i].to_vec());
        let core = Word(l[i..n - i].to_vec());
        (core, t)
    }

    /// Cyclic rotation `q p` of `self = p q` where `|p| = k`.
    pub fn rotate(&self, k: usize) -> Word {
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    /// Exponent-sum vector of length `rank`.
    pub fn abelianize(&self, rank: usize) -> AbelianVector {
        let mut coords = vec![0i64; rank];
        for l in &self.0 {
            if l.index() < rank {
                coords[l.index()] += if l.inv { -1 } else { 1 };
            }
        }
        AbelianVector(coords)
    }

    /// Substitutes `images[g]` for each generator `g`.
    pub fn substitute(&self, images: &[Word]) -> Word {
        let mut out = Word::empty();
        for l in &self.0 {
            let img = &images[l.index()];
            if l.inv {
                out = out.mul(&img.inverse());
            } else {
                out = out.mul(img);
            }
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            let c = (b'a' + l.gen) as char;
            write!(f, "{}", if l.inv { c.to_ascii_uppercase() } else { c })?;
        }
        Ok(())
    }
}

/// Exponent-sum vector of a word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianVector(pub Vec<i64>);

/// Decides conjugacy in a free group by cyclic reduction. The witness `z`
/// satisfies `z⁻¹ x z = y`.
pub fn free_conjugacy(x: &Word, y: &Word) -> Option<Word> {
    let (cx, tx) = x.cyclic_reduction();
    let (cy, ty) = y.cyclic_reduction();
    if cx.len() != cy.len() {
        return None;
    }
    if cx.is_empty() {
        return Some(tx.mul(&ty.inverse()));
    }
    (0..cx.len()).find_map(|k| {
        if cx.rotate(k) == cy {
            let p = Word(cx.letters()[..k].to_vec());
            Some(tx.mul(&p).mul(&ty.inverse()))
        } else {
            None
        }
    })
}

/// All reduced words of length at most `max_len` over `rank` generators, in
/// shortlex order.
pub fn ball(rank: usize, max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut frontier = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for l in Letter::all(rank) {
                if w.0.last() == Some(&l.inverse()) {
                    continue;
                }
                let mut v = w.0.clone();
                v.push(l);
                next.push(Word(v));
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// A free-group automorphism given by generator images, with an optional
/// claimed inverse. Acts on the right: `x(φψ) = (xφ)ψ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeAutomorphism {
    forward: Vec<Word>,
    backward: Option<Vec<Word>>,
}

impl FreeAutomorphism {
    pub fn new(forward: Vec<Word>, backward: Option<Vec<Word>>) -> Result<Self> {
        let rank = forward.len();
        if rank == 0 {
            return Err(Error::Input("automorphism of the trivial group".into()));
        }
        if let Some(b) = &backward {
            if b.len() != rank {
                return Err(Error::Input("forward and backward maps differ in rank".into()));
            }
        }
        let bad = forward
            .iter()
            .chain(backward.iter().flatten())
            .any(|w| w.support_rank() > rank);
        if bad {
            return Err(Error::Input("image uses a generator outside the rank".into()));
        }
        Ok(FreeAutomorphism { forward, backward })
    }

    pub fn identity(rank: usize) -> Self {
        let gens: Vec<Word> = (0..rank).map(Word::gen).collect();
        FreeAutomorphism {
            forward: gens.clone(),
            backward: Some(gens),
        }
    }

    /// The inner automorphism `λ_g : x ↦ g⁻¹ x g`.
    pub fn inner(rank: usize, g: &Word) -> Self {
        let gi = g.inverse();
        FreeAutomorphism {
            forward: (0..rank).map(|i| Word::gen(i).conj(g)).collect(),
            backward: Some((0..rank).map(|i| Word::gen(i).conj(&gi)).collect()),
        }
    }

    pub fn rank(&self) -> usize {
        self.forward.len()
    }

    pub fn forward(&self) -> &[Word] {
        &self.forward
    }

    pub fn backward(&self) -> Option<&[Word]> {
        self.backward.as_deref()
    }

    pub fn apply(&self, w: &Word) -> Word {
        w.substitute(&self.forward)
    }

    pub fn apply_inverse(&self, w: &Word) -> Result<Word> {
        match &self.backward {
            Some(b) => Ok(w.substitute(b)),
            None => Err(Error::Capability(
                "automorphism has no inverse map".into(),
            )),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        match &self.backward {
            Some(b) => Ok(FreeAutomorphism {
                forward: b.clone(),
                backward: Some(self.forward.clone()),
            }),
            None => Err(Error::Capability("automorphism has no inverse map".into())),
        }
    }

    /// `self` followed by `other`.
    pub fn compose(&self, other: &FreeAutomorphism) -> Self {
        let forward = self.forward.iter().map(|w| other.apply(w)).collect();
        let backward = match (&self.backward, &other.backward) {
            (Some(sb), Some(ob)) => Some(ob.iter().map(|w| w.substitute(sb)).collect()),
            _ => None,
        };
        FreeAutomorphism { forward, backward }
    }

    pub fn power(&self, k: i64) -> Result<Self> {
        let base = if k < 0 { self.inverse()? } else { self.clone() };
        let mut out = FreeAutomorphism::identity(self.rank());
        if base.backward.is_none() {
            out.backward = None;
        }
        for _ in 0..k.unsigned_abs() {
            out = out.compose(&base);
        }
        Ok(out)
    }

    /// Checks that the backward map is a two-sided inverse.
    pub fn verify(&self) -> bool {
        let Some(back) = &self.backward else {
            return false;
        };
        (0..self.rank()).all(|i| {
            let g = Word::gen(i);
            self.forward[i].substitute(back) == g && back[i].substitute(&self.forward) == g
        })
    }

    /// Row `i` is the abelianization of the image of generator `i`, so that
    /// `abelianize(wφ) = abelianize(w) · M`.
    pub fn abelian_matrix(&self) -> Vec<Vec<i64>> {
        self.forward
            .iter()
            .map(|w| w.abelianize(self.rank()).0)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.forward
            .iter()
            .enumerate()
            .all(|(i, w)| *w == Word::gen(i))
    }
}

/// Witness that `φ^p = λ_Δ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViaCertificate {
    pub p: u32,
    pub delta: Word,
}

pub fn verify_via_certificate(phi: &FreeAutomorphism, cert: &ViaCertificate) -> bool {
    if cert.p == 0 {
        return false;
    }
    let Ok(pow) = phi.power(cert.p as i64) else {
        return false;
    };
    (0..phi.rank()).all(|i| pow.forward[i] == Word::gen(i).conj(&cert.delta))
}

/// Looks for `p ≤ max_p` and `Δ` with `φ^p = λ_Δ`.
///
/// `Δ⁻¹ a Δ = aφ^p` pins `Δ` down to `a^k Δ₀` for one solution `Δ₀`; the
/// remaining generators then fix `k`, whose size is bounded by the lengths
/// of the images.
pub fn find_via_certificate(phi: &FreeAutomorphism, max_p: u32) -> Option<ViaCertificate> {
    let a = Word::gen(0);
    let mut pow = FreeAutomorphism::identity(phi.rank());
    for p in 1..=max_p {
        pow = pow.compose(phi);
        let Some(d0) = free_conjugacy(&a, &pow.forward[0]) else {
            continue;
        };
        let bound = pow.forward.iter().map(Word::len).sum::<usize>() as i64 + d0.len() as i64 + 2;
        for k in (0..=bound).flat_map(|k| [k, -k]) {
            let delta = a.pow(k).mul(&d0);
            if (0..phi.rank()).all(|i| pow.forward[i] == Word::gen(i).conj(&delta)) {
                return Some(ViaCertificate { p, delta });
            }
        }
    }
    None
}

/// Rewrites `y ∈ φ-TCC(g)` as `y' ∈ φ'-TCC(1)` with `φ' = φλ_g` and
/// `y' = g⁻¹y`.
pub fn twist_normalize(phi: &FreeAutomorphism, g: &Word, y: &Word) -> (FreeAutomorphism, Word) {
    let lambda = FreeAutomorphism::inner(phi.rank(), g);
    (phi.compose(&lambda), g.inverse().mul(y))
}

/// The twisted conjugate `(z⁻¹φ) x z`.
pub fn twisted_conj(phi: &FreeAutomorphism, x: &Word, z: &Word) -> Word {
    phi.apply(&z.inverse()).mul(x).mul(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn swap() -> FreeAutomorphism {
        FreeAutomorphism::new(vec![w("b"), w("a")], Some(vec![w("b"), w("a")])).unwrap()
    }

    fn transvection() -> FreeAutomorphism {
        FreeAutomorphism::new(vec![w("a"), w("ab")], Some(vec![w("a"), w("Ab")])).unwrap()
    }

    #[test]
    fn via_certificates_are_found() {
        let c = find_via_certificate(&swap(), 4).unwrap();
        assert_eq!((c.p, c.delta.clone()), (2, Word::empty()));
        let inner = FreeAutomorphism::inner(2, &w("abA"));
        let c = find_via_certificate(&inner, 4).unwrap();
        assert_eq!((c.p, c.delta.clone()), (1, w("abA")));
        let mixed = swap().compose(&FreeAutomorphism::inner(2, &w("a")));
        let c = find_via_certificate(&mixed, 4).unwrap();
        assert!(verify_via_certificate(&mixed, &c));
        assert!(find_via_certificate(&transvection(), 6).is_none());
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(w("aA"), Word::empty());
        assert_eq!(w("abBA"), Word::empty());
        assert_eq!(w("aab").to_string(), "aab");
        assert_eq!(w("1"), Word::empty());
    }

    #[test]
    fn parse_rejects_unknown_letters() {
        let alpha = Alphabet::standard(2).unwrap();
        match alpha.parse("abc") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(alpha.parse("a b").is_err());
        assert_eq!(alpha.format(&alpha.parse("aBA").unwrap()), "aBA");
    }

    #[test]
    fn conjugacy_examples() {
        let z = free_conjugacy(&w("ab"), &w("ba")).unwrap();
        assert_eq!(z, w("a"));
        assert!(free_conjugacy(&w("ab"), &w("aB")).is_none());
        assert_eq!(free_conjugacy(&Word::empty(), &Word::empty()), Some(Word::empty()));
        let x = w("bbaBaB");
        let y = x.conj(&w("baB"));
        assert_eq!(x.conj(&free_conjugacy(&x, &y).unwrap()), y);
    }

    #[test]
    fn endomorphism_examples() {
        assert_eq!(swap().apply(&w("ab")), w("ba"));
        let la = FreeAutomorphism::inner(2, &w("a"));
        assert_eq!(la.apply(&w("b")), w("Aba"));
        assert!(swap().power(2).unwrap().is_identity());
        assert!(swap().power(0).unwrap().is_identity());
        let no_back = FreeAutomorphism::new(vec![w("b"), w("a")], None).unwrap();
        assert!(matches!(no_back.power(-1), Err(Error::Capability(_))));
    }

    #[test]
    fn verify_automorphism_examples() {
        assert!(swap().verify());
        assert!(transvection().verify());
        let bad = FreeAutomorphism::new(vec![w("a"), w("a")], Some(vec![w("a"), w("b")])).unwrap();
        assert!(!bad.verify());
    }

    #[test]
    fn via_examples() {
        let g = w("abA");
        let lg = FreeAutomorphism::inner(2, &g);
        assert!(verify_via_certificate(&lg, &ViaCertificate { p: 1, delta: g }));
        assert!(verify_via_certificate(&swap(), &ViaCertificate { p: 2, delta: Word::empty() }));
        assert!(!verify_via_certificate(
            &transvection(),
            &ViaCertificate { p: 2, delta: Word::empty() }
        ));
        assert_eq!(transvection().power(2).unwrap().apply(&w("b")), w("aab"));
    }

    #[test]
    fn abelianize_examples() {
        assert_eq!(w("abA").abelianize(2).0, vec![0, 1]);
        assert_eq!(Word::empty().abelianize(2).0, vec![0, 0]);
        assert_eq!(w("aabB").abelianize(2).0, vec![2, 0]);
    }

    #[test]
    fn twist_normalize_examples() {
        let id = FreeAutomorphism::identity(2);
        let (p, y) = twist_normalize(&swap(), &Word::empty(), &w("ab"));
        assert_eq!(p, swap());
        assert_eq!(y, w("ab"));

        let (p, y) = twist_normalize(&id, &w("a"), &w("a"));
        assert_eq!(p.forward(), FreeAutomorphism::inner(2, &w("a")).forward());
        assert_eq!(y, Word::empty());
        assert_eq!(twisted_conj(&p, &Word::empty(), &Word::empty()), y);

        // "Ab" is not a λ_a-twisted conjugate of 1: brute force over |x| <= 6.
        let (p, y) = twist_normalize(&id, &w("a"), &w("b"));
        assert_eq!(y, w("Ab"));
        assert!(ball(2, 6).iter().all(|x| twisted_conj(&p, &Word::empty(), x) != y));
    }

    #[test]
    fn ball_is_shortlex_and_counts() {
        let b = ball(2, 3);
        assert_eq!(b.len(), 1 + 4 + 12 + 36);
        assert_eq!(b[1], w("a"));
        assert_eq!(b[2], w("A"));
        assert!(b.windows(2).all(|p| (p[0].len(), &p[0]) < (p[1].len(), &p[1])));
    }
}
