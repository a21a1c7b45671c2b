//! Groups the search engine can work in: each supplies a multiplication on
//! normal forms, a presentation for quotient enumeration, and conversions
//! between elements and words over the presentation's generators.

use std::collections::HashSet;
use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{Error, Result};
use crate::exact::{FatfAutomorphism, FatfElement};
use crate::extension::{sd_invert, sd_multiply, ExtElement, ExtensionDatum, GPhi, GPhiElement, SemidirectElement};
use crate::quotient::Presentation;
use crate::word::{FreeAutomorphism, Letter, Word};

pub trait GroupContext: Sync {
    type Elem: Clone + Eq + Hash + Debug + Send + Sync;

    fn presentation(&self) -> &Presentation;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn letter(&self, l: Letter) -> Self::Elem;
    fn to_word(&self, e: &Self::Elem) -> Word;

    fn eval(&self, w: &Word) -> Self::Elem {
        w.letters()
            .iter()
            .fold(self.identity(), |acc, &l| self.mul(&acc, &self.letter(l)))
    }

    fn conj(&self, x: &Self::Elem, z: &Self::Elem) -> Self::Elem {
        self.mul(&self.mul(&self.inv(z), x), z)
    }

    fn format(&self, e: &Self::Elem) -> String {
        self.presentation().format(&self.to_word(e))
    }
}

/// An automorphism of a context's group.
pub trait Twist<E>: Sync {
    fn apply(&self, e: &E) -> E;
    fn apply_inverse(&self, e: &E) -> Result<E>;
    /// Images of the presentation generators, as presentation words.
    fn generator_images(&self) -> Vec<Word>;

    /// `eφ^k` for any integer `k`.
    fn power_apply(&self, e: &E, k: i64) -> Result<E>
    where
        E: Clone,
    {
        let mut out = e.clone();
        for _ in 0..k.unsigned_abs() {
            out = if k > 0 { self.apply(&out) } else { self.apply_inverse(&out)? };
        }
        Ok(out)
    }
}

fn labels(rank: usize) -> Vec<char> {
    (0..rank).map(|i| (b'a' + i as u8) as char).collect()
}

/// The free group on `rank` generators.
pub struct FreeCtx {
    pres: Presentation,
}

impl FreeCtx {
    pub fn new(rank: usize) -> Self {
        FreeCtx {
            pres: Presentation::free(rank),
        }
    }
}

impl GroupContext for FreeCtx {
    type Elem = Word;

    fn presentation(&self) -> &Presentation {
        &self.pres
    }
    fn identity(&self) -> Word {
        Word::empty()
    }
    fn mul(&self, a: &Word, b: &Word) -> Word {
        a.mul(b)
    }
    fn inv(&self, a: &Word) -> Word {
        a.inverse()
    }
    fn letter(&self, l: Letter) -> Word {
        Word::letter(l)
    }
    fn to_word(&self, e: &Word) -> Word {
        e.clone()
    }
    fn eval(&self, w: &Word) -> Word {
        w.clone()
    }
}

impl Twist<Word> for FreeAutomorphism {
    fn apply(&self, e: &Word) -> Word {
        FreeAutomorphism::apply(self, e)
    }
    fn apply_inverse(&self, e: &Word) -> Result<Word> {
        FreeAutomorphism::apply_inverse(self, e)
    }
    fn generator_images(&self) -> Vec<Word> {
        self.forward().to_vec()
    }
}

/// Relators `t⁻¹ a t (aφ)⁻¹` with `t` the last generator, enumerated first.
fn mapping_torus_presentation(phi: &FreeAutomorphism, extra: Option<Word>) -> Result<Presentation> {
    let n = phi.rank();
    if n >= 19 {
        return Err(Error::Input("fiber rank too large for the letter t".into()));
    }
    let t = Word::gen(n);
    let mut relators: Vec<Word> = (0..n)
        .map(|i| {
            t.inverse()
                .mul(&Word::gen(i))
                .mul(&t)
                .mul(&phi.forward()[i].inverse())
        })
        .collect();
    relators.extend(extra);
    let mut names = labels(n);
    names.push('t');
    let mut order = vec![n];
    order.extend(0..n);
    Presentation::new(n + 1, relators, names)?.with_order(order)
}

/// `G ⋊_φ Z` over the alphabet `a, b, …, t`.
pub struct SemidirectCtx {
    pub phi: FreeAutomorphism,
    pres: Presentation,
}

impl SemidirectCtx {
    pub fn new(phi: FreeAutomorphism) -> Result<Self> {
        if phi.backward().is_none() {
            return Err(Error::Input("semidirect product needs the inverse of φ".into()));
        }
        let pres = mapping_torus_presentation(&phi, None)?;
        Ok(SemidirectCtx { phi, pres })
    }
}

impl GroupContext for SemidirectCtx {
    type Elem = SemidirectElement;

    fn presentation(&self) -> &Presentation {
        &self.pres
    }
    fn identity(&self) -> SemidirectElement {
        SemidirectElement::identity()
    }
    fn mul(&self, a: &SemidirectElement, b: &SemidirectElement) -> SemidirectElement {
        sd_multiply(&self.phi, a, b).expect("inverse map present")
    }
    fn inv(&self, a: &SemidirectElement) -> SemidirectElement {
        sd_invert(&self.phi, a).expect("inverse map present")
    }
    fn letter(&self, l: Letter) -> SemidirectElement {
        let n = self.phi.rank();
        let e = if l.index() == n {
            SemidirectElement::t()
        } else {
            SemidirectElement::new(0, Word::gen(l.index()))
        };
        if l.inv {
            self.inv(&e)
        } else {
            e
        }
    }
    fn to_word(&self, e: &SemidirectElement) -> Word {
        Word::gen(self.phi.rank()).pow(e.t_exp).mul(&e.g)
    }
}

/// `G^φ` over the alphabet `a, b, …, t`.
pub struct GPhiCtx {
    pub gphi: GPhi,
    pres: Presentation,
}

impl GPhiCtx {
    pub fn new(gphi: GPhi) -> Result<Self> {
        let n = gphi.rank();
        let extra = Word::gen(n)
            .pow(gphi.p() as i64)
            .mul(&gphi.cert.delta.inverse());
        let pres = mapping_torus_presentation(&gphi.phi, Some(extra))?;
        Ok(GPhiCtx { gphi, pres })
    }
}

impl GroupContext for GPhiCtx {
    type Elem = GPhiElement;

    fn presentation(&self) -> &Presentation {
        &self.pres
    }
    fn identity(&self) -> GPhiElement {
        self.gphi.identity()
    }
    fn mul(&self, a: &GPhiElement, b: &GPhiElement) -> GPhiElement {
        self.gphi.multiply(a, b)
    }
    fn inv(&self, a: &GPhiElement) -> GPhiElement {
        self.gphi.invert(a)
    }
    fn letter(&self, l: Letter) -> GPhiElement {
        let e = if l.index() == self.gphi.rank() {
            self.gphi.t()
        } else {
            self.gphi.fiber(Word::gen(l.index()))
        };
        if l.inv {
            self.inv(&e)
        } else {
            e
        }
    }
    fn to_word(&self, e: &GPhiElement) -> Word {
        Word::gen(self.gphi.rank()).pow(e.t_exp as i64).mul(&e.g)
    }
}

/// A finite extension of a free group, over the fiber letters followed by
/// one letter per non-trivial coset representative.
pub struct ExtensionCtx {
    pub datum: ExtensionDatum,
    pres: Presentation,
}

impl ExtensionCtx {
    pub fn new(datum: ExtensionDatum) -> Result<Self> {
        let n = datum.rank;
        let m = datum.cosets();
        let rank = datum.ext_rank();
        if rank > 26 {
            return Err(Error::Input("extension alphabet exceeds 26 letters".into()));
        }
        let b = |i: usize| {
            if i == 0 {
                Word::empty()
            } else {
                Word::gen(n + i - 1)
            }
        };
        let mut relators = Vec::new();
        for i in 1..m {
            for x in 0..n {
                let image = datum.phis[i].apply(&Word::gen(x));
                relators.push(b(i).inverse().mul(&Word::gen(x)).mul(&b(i)).mul(&image.inverse()));
            }
        }
        for i in 1..m {
            for j in 1..m {
                let rhs = datum.nu[i][j].mul(&b(datum.sigma[i][j]));
                relators.push(b(i).mul(&b(j)).mul(&rhs.inverse()));
            }
        }
        let mut order: Vec<usize> = (n..rank).collect();
        order.extend(0..n);
        let pres = Presentation::new(rank, relators, labels(rank))?.with_order(order)?;
        Ok(ExtensionCtx { datum, pres })
    }
}

impl GroupContext for ExtensionCtx {
    type Elem = ExtElement;

    fn presentation(&self) -> &Presentation {
        &self.pres
    }
    fn identity(&self) -> ExtElement {
        self.datum.identity()
    }
    fn mul(&self, a: &ExtElement, b: &ExtElement) -> ExtElement {
        self.datum.multiply(a, b)
    }
    fn inv(&self, a: &ExtElement) -> ExtElement {
        self.datum.invert(a)
    }
    fn letter(&self, l: Letter) -> ExtElement {
        self.datum.eval_letter(l)
    }
    fn to_word(&self, e: &ExtElement) -> Word {
        self.datum.to_word(e)
    }
}

/// `F_n × Z^m` over the letters `a_1 … a_n` followed by the central letters.
pub struct FatfCtx {
    pub rank: usize,
    pub dim: usize,
    pres: Presentation,
}

impl FatfCtx {
    pub fn new(rank: usize, dim: usize) -> Result<Self> {
        let total = rank + dim;
        if total > 26 {
            return Err(Error::Input("alphabet exceeds 26 letters".into()));
        }
        let comm = |x: usize, y: usize| {
            Word::gen(x)
                .inverse()
                .mul(&Word::gen(y).inverse())
                .mul(&Word::gen(x))
                .mul(&Word::gen(y))
        };
        let mut relators = Vec::new();
        for j in rank..total {
            for i in 0..j {
                relators.push(comm(i, j));
            }
        }
        let pres = Presentation::new(total, relators, labels(total))?;
        Ok(FatfCtx { rank, dim, pres })
    }

    /// Reads an automorphism given by generator images over this alphabet as
    /// `Ψ_{φ,Q,P}`, checking that the images have the required shape.
    /// The inverse map, when given, supplies `φ⁻¹`.
    pub fn automorphism(&self, images: &[Word], inverse: Option<&[Word]>) -> Result<FatfAutomorphism> {
        let (n, m) = (self.rank, self.dim);
        if images.len() != n + m || inverse.is_some_and(|v| v.len() != n + m) {
            return Err(Error::Input("one image per generator required".into()));
        }
        let mut phi_images = Vec::new();
        let mut p = Vec::new();
        for w in &images[..n] {
            let e = self.eval(w);
            phi_images.push(e.u);
            p.push(e.a);
        }
        let mut q = Vec::new();
        for w in &images[n..] {
            let e = self.eval(w);
            if !e.u.is_empty() {
                return Err(Error::Input("central generators must map into the centre".into()));
            }
            q.push(e.a);
        }
        let back = inverse.map(|v| v[..n].iter().map(|w| self.eval(w).u).collect());
        let phi = FreeAutomorphism::new(phi_images, back)?;
        if phi.backward().is_some() && !phi.verify() {
            return Err(Error::Input("inverse map does not invert φ".into()));
        }
        FatfAutomorphism::new(phi, q, p)
    }
}

impl GroupContext for FatfCtx {
    type Elem = FatfElement;

    fn presentation(&self) -> &Presentation {
        &self.pres
    }
    fn identity(&self) -> FatfElement {
        FatfElement {
            a: vec![0; self.dim],
            u: Word::empty(),
        }
    }
    fn mul(&self, x: &FatfElement, y: &FatfElement) -> FatfElement {
        FatfElement {
            a: x.a.iter().zip(&y.a).map(|(s, t)| s + t).collect(),
            u: x.u.mul(&y.u),
        }
    }
    fn inv(&self, x: &FatfElement) -> FatfElement {
        FatfElement {
            a: x.a.iter().map(|s| -s).collect(),
            u: x.u.inverse(),
        }
    }
    fn letter(&self, l: Letter) -> FatfElement {
        let mut e = self.identity();
        let sign = if l.inv { -1 } else { 1 };
        if l.index() < self.rank {
            e.u = Word::letter(l);
        } else {
            e.a[l.index() - self.rank] = sign;
        }
        e
    }
    fn to_word(&self, e: &FatfElement) -> Word {
        let mut w = Word::empty();
        for (j, &k) in e.a.iter().enumerate() {
            w = w.mul(&Word::gen(self.rank + j).pow(k));
        }
        w.mul(&e.u)
    }
}

/// `Ψ` together with its inverse, acting on `F_n × Z^m`.
pub struct FatfTwist {
    pub forward: FatfAutomorphism,
    pub backward: FatfAutomorphism,
    images: Vec<Word>,
}

impl FatfTwist {
    pub fn new(ctx: &FatfCtx, forward: FatfAutomorphism) -> Result<Self> {
        let backward = forward.inverse()?;
        let mut images = Vec::new();
        for i in 0..ctx.rank {
            let e = forward.apply(&ctx.letter(Letter::pos(i)));
            images.push(ctx.to_word(&e));
        }
        for j in 0..ctx.dim {
            let e = forward.apply(&ctx.letter(Letter::pos(ctx.rank + j)));
            images.push(ctx.to_word(&e));
        }
        Ok(FatfTwist {
            forward,
            backward,
            images,
        })
    }
}

impl Twist<FatfElement> for FatfTwist {
    fn apply(&self, e: &FatfElement) -> FatfElement {
        self.forward.apply(e)
    }
    fn apply_inverse(&self, e: &FatfElement) -> Result<FatfElement> {
        Ok(self.backward.apply(e))
    }
    fn generator_images(&self) -> Vec<Word> {
        self.images.clone()
    }
}

/// Breadth-first enumeration of distinct group elements by word length.
pub struct Ball<C: GroupContext> {
    levels: Vec<Vec<C::Elem>>,
    seen: HashSet<C::Elem>,
}

impl<C: GroupContext> Ball<C> {
    pub fn new(ctx: &C) -> Self {
        let id = ctx.identity();
        Ball {
            levels: vec![vec![id.clone()]],
            seen: HashSet::from([id]),
        }
    }

    /// Elements of length exactly `len`, growing the ball as needed.
    pub fn level(&mut self, ctx: &C, len: usize) -> &[C::Elem] {
        while self.levels.len() <= len {
            let last = self.levels.last().expect("non-empty");
            let mut next = Vec::new();
            for e in last {
                for l in Letter::all(ctx.presentation().rank) {
                    let f = ctx.mul(e, &ctx.letter(l));
                    if self.seen.insert(f.clone()) {
                        next.push(f);
                    }
                }
            }
            self.levels.push(next);
        }
        &self.levels[len]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::{ball, ViaCertificate};

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn swap() -> FreeAutomorphism {
        FreeAutomorphism::new(vec![w("b"), w("a")], Some(vec![w("b"), w("a")])).unwrap()
    }

    fn relators_hold<C: GroupContext>(ctx: &C) {
        for r in &ctx.presentation().relators {
            assert_eq!(ctx.eval(r), ctx.identity(), "relator {r:?}");
        }
        for x in ball(ctx.presentation().rank, 3) {
            let e = ctx.eval(&x);
            assert_eq!(ctx.eval(&ctx.to_word(&e)), e);
            assert_eq!(ctx.mul(&e, &ctx.inv(&e)), ctx.identity());
        }
    }

    #[test]
    fn presentations_are_satisfied() {
        relators_hold(&FreeCtx::new(2));
        relators_hold(&SemidirectCtx::new(swap()).unwrap());
        let tw = FreeAutomorphism::new(vec![w("ab"), w("b")], Some(vec![w("aB"), w("b")])).unwrap();
        relators_hold(&SemidirectCtx::new(tw).unwrap());
        let gphi = GPhi::new(swap(), ViaCertificate { p: 2, delta: Word::empty() }).unwrap();
        relators_hold(&GPhiCtx::new(gphi.clone()).unwrap());
        relators_hold(&ExtensionCtx::new(gphi.to_datum().unwrap()).unwrap());
        relators_hold(&FatfCtx::new(2, 2).unwrap());
    }

    #[test]
    fn fatf_twist_inverse() {
        let ctx = FatfCtx::new(2, 1).unwrap();
        let images = [w("bc"), w("a"), w("C")];
        let inverse = [w("b"), w("aC"), w("C")];
        let psi = ctx.automorphism(&images, Some(&inverse)).unwrap();
        let tw = FatfTwist::new(&ctx, psi).unwrap();
        for x in ball(3, 3) {
            let e = ctx.eval(&x);
            assert_eq!(tw.apply_inverse(&tw.apply(&e)).unwrap(), e);
            assert_eq!(tw.apply(&e), ctx.eval(&x.substitute(&tw.generator_images())));
        }
    }

    #[test]
    fn ball_counts() {
        let ctx = FreeCtx::new(2);
        let mut b = Ball::new(&ctx);
        assert_eq!(b.level(&ctx, 2).len(), 12);
        let g = GPhiCtx::new(GPhi::new(swap(), ViaCertificate { p: 2, delta: Word::empty() }).unwrap()).unwrap();
        let mut b = Ball::new(&g);
        assert_eq!(b.level(&g, 1).len(), 5);
    }
}
