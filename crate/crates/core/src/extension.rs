//! Normal forms for `G ⋊_φ Z`, the finite extension `G^φ`, and general
//! finite extensions of a free group given by an explicit datum, with the
//! reductions of conjugacy problems in these groups to twisted conjugacy
//! problems in the fiber.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::automaton::Nfa;
use crate::error::{Error, Result};
use crate::set::SetSpec;
use crate::word::{verify_via_certificate, FreeAutomorphism, Letter, ViaCertificate, Word};

/// `t^a g` in `G ⋊_φ Z = ⟨A, t | t⁻¹ a t = aφ⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SemidirectElement {
    pub t_exp: i64,
    pub g: Word,
}

impl SemidirectElement {
    pub fn new(t_exp: i64, g: Word) -> Self {
        SemidirectElement { t_exp, g }
    }

    pub fn identity() -> Self {
        SemidirectElement::new(0, Word::empty())
    }

    pub fn t() -> Self {
        SemidirectElement::new(1, Word::empty())
    }
}

/// `(t^a g)(t^b h) = t^{a+b} (gφ^b) h`.
pub fn sd_multiply(
    phi: &FreeAutomorphism,
    x: &SemidirectElement,
    y: &SemidirectElement,
) -> Result<SemidirectElement> {
    let pushed = phi.power(y.t_exp)?.apply(&x.g);
    Ok(SemidirectElement::new(x.t_exp + y.t_exp, pushed.mul(&y.g)))
}

/// `(t^a g)⁻¹ = t^{-a} (g⁻¹φ^{-a})`.
pub fn sd_invert(phi: &FreeAutomorphism, x: &SemidirectElement) -> Result<SemidirectElement> {
    let g = phi.power(-x.t_exp)?.apply(&x.g.inverse());
    Ok(SemidirectElement::new(-x.t_exp, g))
}

/// `t^k g` in `G^φ = ⟨G, t | t⁻¹ a t = aφ, t^p = Δ⟩` with `0 ≤ k < p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GPhiElement {
    pub t_exp: u32,
    pub g: Word,
}

/// The data of `G^φ`: an automorphism with a certificate `φ^p = λ_Δ`.
#[derive(Clone, Debug)]
pub struct GPhi {
    pub phi: FreeAutomorphism,
    pub cert: ViaCertificate,
    powers: Vec<FreeAutomorphism>,
}

impl GPhi {
    pub fn new(phi: FreeAutomorphism, cert: ViaCertificate) -> Result<Self> {
        if !verify_via_certificate(&phi, &cert) {
            return Err(Error::Input(format!(
                "invalid certificate: φ^{} is not conjugation by {}",
                cert.p, cert.delta
            )));
        }
        if phi.apply(&cert.delta) != cert.delta {
            return Err(Error::Input("certificate word is not fixed by φ".into()));
        }
        let mut powers = vec![FreeAutomorphism::identity(phi.rank())];
        for k in 1..cert.p as usize {
            let next = powers[k - 1].compose(&phi);
            powers.push(next);
        }
        Ok(GPhi { phi, cert, powers })
    }

    pub fn p(&self) -> u32 {
        self.cert.p
    }

    pub fn rank(&self) -> usize {
        self.phi.rank()
    }

    /// `t^k g` with `k = rp + s` becomes `t^s (Δ^r g)`.
    pub fn normalize(&self, k: i64, g: &Word) -> GPhiElement {
        let p = self.cert.p as i64;
        let r = k.div_euclid(p);
        let s = k.rem_euclid(p);
        GPhiElement {
            t_exp: s as u32,
            g: self.cert.delta.pow(r).mul(g),
        }
    }

    pub fn identity(&self) -> GPhiElement {
        self.normalize(0, &Word::empty())
    }

    pub fn t(&self) -> GPhiElement {
        self.normalize(1, &Word::empty())
    }

    pub fn fiber(&self, g: Word) -> GPhiElement {
        GPhiElement { t_exp: 0, g }
    }

    pub fn multiply(&self, x: &GPhiElement, y: &GPhiElement) -> GPhiElement {
        let pushed = self.powers[y.t_exp as usize].apply(&x.g);
        self.normalize(x.t_exp as i64 + y.t_exp as i64, &pushed.mul(&y.g))
    }

    /// `g⁻¹ t^{-k} = g⁻¹ t^{p-k} Δ⁻¹ = t^{p-k} (g⁻¹φ^{p-k}) Δ⁻¹`.
    pub fn invert(&self, x: &GPhiElement) -> GPhiElement {
        if x.t_exp == 0 {
            return self.fiber(x.g.inverse());
        }
        let s = self.cert.p - x.t_exp;
        let g = self.powers[s as usize]
            .apply(&x.g.inverse())
            .mul(&self.cert.delta.inverse());
        GPhiElement { t_exp: s, g }
    }

    /// `φ^k` for `0 ≤ k < p`.
    pub fn phi_power(&self, k: u32) -> &FreeAutomorphism {
        &self.powers[k as usize]
    }

    /// The same group as an extension datum with `b_i = t^{i}`.
    pub fn to_datum(&self) -> Result<ExtensionDatum> {
        let m = self.cert.p as usize;
        let mut nu = vec![vec![Word::empty(); m]; m];
        let mut sigma = vec![vec![0; m]; m];
        for i in 0..m {
            for j in 0..m {
                let e = self.normalize((i + j) as i64, &Word::empty());
                nu[i][j] = e.g;
                sigma[i][j] = e.t_exp as usize;
            }
        }
        ExtensionDatum::new(self.rank(), self.powers.clone(), nu, sigma)
    }
}

/// `g b_i`: a fiber word and a coset index (0-based, `b_0 = 1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtElement {
    pub g: Word,
    pub coset: usize,
}

impl ExtElement {
    pub fn new(g: Word, coset: usize) -> Self {
        ExtElement { g, coset }
    }
}

/// A finite extension `G = N b_0 ∪ … ∪ N b_{m-1}` of `N = F_n`, given by
/// `x φ_i = b_i⁻¹ x b_i` on `N` and `b_i b_j = ν(i,j) b_{σ(i,j)}`.
#[derive(Clone, Debug)]
pub struct ExtensionDatum {
    pub rank: usize,
    pub phis: Vec<FreeAutomorphism>,
    pub nu: Vec<Vec<Word>>,
    pub sigma: Vec<Vec<usize>>,
    inverses: Vec<FreeAutomorphism>,
}

/// A failed check of an extension datum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub k: Option<usize>,
    pub generator: Option<usize>,
    pub message: String,
}

impl ExtensionDatum {
    /// Builds and fully validates a datum. Missing inverse maps of the `φ_i`
    /// are derived from `b_i^p = c ∈ N`, which forces `φ_i^p = λ_c`.
    pub fn new(
        rank: usize,
        phis: Vec<FreeAutomorphism>,
        nu: Vec<Vec<Word>>,
        sigma: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let (datum, violations) = Self::build(rank, phis, nu, sigma)?;
        match violations.first() {
            None => Ok(datum),
            Some(v) => Err(Error::Input(format!(
                "invalid extension datum: {} (i={}, j={}{}{})",
                v.message,
                v.i + 1,
                v.j + 1,
                v.k.map(|k| format!(", k={}", k + 1)).unwrap_or_default(),
                v.generator
                    .map(|g| format!(", generator {}", (b'a' + g as u8) as char))
                    .unwrap_or_default()
            ))),
        }
    }

    /// Validation report for a candidate datum; empty means valid.
    pub fn validate(
        rank: usize,
        phis: Vec<FreeAutomorphism>,
        nu: Vec<Vec<Word>>,
        sigma: Vec<Vec<usize>>,
    ) -> Result<Vec<Violation>> {
        Ok(Self::build(rank, phis, nu, sigma)?.1)
    }

    fn build(
        rank: usize,
        phis: Vec<FreeAutomorphism>,
        nu: Vec<Vec<Word>>,
        sigma: Vec<Vec<usize>>,
    ) -> Result<(Self, Vec<Violation>)> {
        let m = phis.len();
        if m == 0
            || nu.len() != m
            || sigma.len() != m
            || nu.iter().any(|r| r.len() != m)
            || sigma.iter().any(|r| r.len() != m || r.iter().any(|&s| s >= m))
            || phis.iter().any(|p| p.rank() != rank)
        {
            return Err(Error::Input("extension datum has inconsistent sizes".into()));
        }
        let mut datum = ExtensionDatum {
            rank,
            phis,
            nu,
            sigma,
            inverses: Vec::new(),
        };
        let mut violations = Vec::new();
        let v = |i, j, k, generator, message: &str| Violation {
            i,
            j,
            k,
            generator,
            message: message.to_string(),
        };
        if !datum.phis[0].is_identity() {
            violations.push(v(0, 0, None, None, "φ_1 is not the identity"));
        }
        for i in 0..m {
            if datum.sigma[0][i] != i || datum.sigma[i][0] != i {
                violations.push(v(0, i, None, None, "σ is not normalized at the identity coset"));
            }
            if !datum.nu[0][i].is_empty() || !datum.nu[i][0].is_empty() {
                violations.push(v(0, i, None, None, "ν is not normalized at the identity coset"));
            }
            let mut row: Vec<usize> = datum.sigma[i].clone();
            row.sort_unstable();
            if row != (0..m).collect::<Vec<_>>() {
                violations.push(v(i, 0, None, None, "σ row is not a permutation"));
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let s = &datum.sigma;
                    if s[s[i][j]][k] != s[i][s[j][k]] {
                        violations.push(v(i, j, Some(k), None, "σ is not associative"));
                    }
                }
            }
        }
        if !violations.is_empty() {
            return Ok((datum, violations));
        }
        for i in 0..m {
            match datum.derive_inverse(i) {
                Some(inv) => datum.inverses.push(inv),
                None => {
                    violations.push(v(i, i, None, None, "φ_i is not invertible as the datum requires"));
                    return Ok((datum, violations));
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                let lambda = FreeAutomorphism::inner(rank, &datum.nu[i][j]);
                for g in 0..rank {
                    let x = Word::gen(g);
                    let lhs = datum.phis[j].apply(&datum.phis[i].apply(&x));
                    let rhs = datum.phis[datum.sigma[i][j]].apply(&lambda.apply(&x));
                    if lhs != rhs {
                        violations.push(v(i, j, None, Some(g), "cocycle identity fails"));
                    }
                }
                for k in 0..m {
                    let s = &datum.sigma;
                    let left = datum.nu[i][j].mul(&datum.nu[s[i][j]][k]);
                    let right = datum.inverses[i]
                        .apply(&datum.nu[j][k])
                        .mul(&datum.nu[i][s[j][k]]);
                    if left != right {
                        violations.push(v(i, j, Some(k), None, "multiplication is not associative"));
                    }
                }
            }
        }
        Ok((datum, violations))
    }

    fn derive_inverse(&self, i: usize) -> Option<FreeAutomorphism> {
        let phi = &self.phis[i];
        let candidate = if phi.verify() {
            phi.clone()
        } else {
            // b_i^p = c with σ-power returning to the identity coset
            let mut cur = ExtElement::new(Word::empty(), i);
            let mut p = 1;
            while cur.coset != 0 {
                let nu = &self.nu[cur.coset][i];
                cur = ExtElement::new(cur.g.mul(nu), self.sigma[cur.coset][i]);
                p += 1;
                if p > self.phis.len() + 1 {
                    return None;
                }
            }
            // φ_i^p = λ_c, so φ_i⁻¹ = φ_i^{p-1} λ_{c⁻¹}
            let fwd = FreeAutomorphism::new(phi.forward().to_vec(), None).ok()?;
            let mut pow = FreeAutomorphism::identity(self.rank);
            for _ in 0..p - 1 {
                pow = FreeAutomorphism::new(
                    pow.forward().iter().map(|w| fwd.apply(w)).collect(),
                    None,
                )
                .ok()?;
            }
            let c_inv = cur.g.inverse();
            let back: Vec<Word> = pow.forward().iter().map(|w| w.conj(&c_inv)).collect();
            FreeAutomorphism::new(phi.forward().to_vec(), Some(back)).ok()?
        };
        candidate.verify().then_some(candidate.inverse().ok()?)
    }

    pub fn cosets(&self) -> usize {
        self.phis.len()
    }

    /// `x φ_i⁻¹`.
    pub fn phi_inverse(&self, i: usize, x: &Word) -> Word {
        self.inverses[i].apply(x)
    }

    /// `φ_i` with its inverse attached.
    pub fn phi_with_inverse(&self, i: usize) -> FreeAutomorphism {
        FreeAutomorphism::new(
            self.phis[i].forward().to_vec(),
            Some(self.inverses[i].forward().to_vec()),
        )
        .expect("validated datum")
    }

    /// `(u b_i)(v b_j) = u (vφ_i⁻¹) ν(i,j) b_{σ(i,j)}`.
    pub fn multiply(&self, x: &ExtElement, y: &ExtElement) -> ExtElement {
        let i = x.coset;
        let j = y.coset;
        let g = x
            .g
            .mul(&self.phi_inverse(i, &y.g))
            .mul(&self.nu[i][j]);
        ExtElement::new(g, self.sigma[i][j])
    }

    pub fn invert(&self, x: &ExtElement) -> ExtElement {
        let i = x.coset;
        let i2 = (0..self.cosets())
            .find(|&k| self.sigma[i][k] == 0)
            .expect("σ rows are permutations");
        // (u b_i)(v b_{i2}) = u (vφ_i⁻¹) ν(i,i2) = 1 gives v = (u⁻¹ ν⁻¹)φ_i
        let v = self.phis[i].apply(&x.g.inverse().mul(&self.nu[i][i2].inverse()));
        ExtElement::new(v, i2)
    }

    pub fn identity(&self) -> ExtElement {
        ExtElement::new(Word::empty(), 0)
    }

    /// Rank of the generating alphabet of the extension: the fiber
    /// generators followed by `b_1, …, b_{m-1}`.
    pub fn ext_rank(&self) -> usize {
        self.rank + self.cosets() - 1
    }

    pub fn eval_letter(&self, l: Letter) -> ExtElement {
        let e = if l.index() < self.rank {
            ExtElement::new(Word::gen(l.index()), 0)
        } else {
            ExtElement::new(Word::empty(), l.index() - self.rank + 1)
        };
        if l.inv {
            self.invert(&e)
        } else {
            e
        }
    }

    /// Evaluates a word over the extension alphabet.
    pub fn eval(&self, w: &Word) -> ExtElement {
        w.letters()
            .iter()
            .fold(self.identity(), |acc, &l| self.multiply(&acc, &self.eval_letter(l)))
    }

    /// A word over the extension alphabet representing `e`.
    pub fn to_word(&self, e: &ExtElement) -> Word {
        if e.coset == 0 {
            e.g.clone()
        } else {
            e.g.mul(&Word::gen(self.rank + e.coset - 1))
        }
    }

    pub fn conj(&self, x: &ExtElement, z: &ExtElement) -> ExtElement {
        self.multiply(&self.multiply(&self.invert(z), x), z)
    }

    /// `b_k⁻¹ b_j b_k = μ b_r`, returned as `(μ, r)`.
    pub fn coset_conjugate(&self, j: usize, k: usize) -> ExtElement {
        let bk = ExtElement::new(Word::empty(), k);
        self.conj(&ExtElement::new(Word::empty(), j), &bk)
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_datum(text)
    }

    pub fn format(&self) -> String {
        let alpha = crate::word::Alphabet::standard(self.rank).expect("rank within alphabet");
        let mut out = format!("extension fiber {} cosets {}\n", self.rank, self.cosets());
        let maps = |ws: &[Word]| -> String {
            ws.iter()
                .enumerate()
                .map(|(g, w)| format!("{}->{}", alpha.names()[g], alpha.format(w)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for i in 1..self.cosets() {
            out.push_str(&format!(
                "phi {} {} inverse {}\n",
                i + 1,
                maps(self.phis[i].forward()),
                maps(self.inverses[i].forward())
            ));
        }
        out.push_str("nu\n");
        for row in &self.nu {
            let r: Vec<String> = row.iter().map(|w| alpha.format(w)).collect();
            out.push_str(&r.join(" "));
            out.push('\n');
        }
        out.push_str("sigma\n");
        for row in &self.sigma {
            let r: Vec<String> = row.iter().map(|s| (s + 1).to_string()).collect();
            out.push_str(&r.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Datum file format:
///
/// ```text
/// extension fiber <n> cosets <m>
/// phi <i> <gen>-><word> … [inverse <gen>-><word> …]   (2 ≤ i ≤ m)
/// nu
/// <m rows of m words>
/// sigma
/// <m rows of m coset numbers, 1-based>
/// ```
fn parse_datum(text: &str) -> Result<ExtensionDatum> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let perr = |line: usize, message: String| Error::Parse {
        line,
        column: 1,
        message,
    };
    let (hl, header) = *lines.first().ok_or_else(|| perr(1, "empty datum".into()))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 5 || h[0] != "extension" || h[1] != "fiber" || h[3] != "cosets" {
        return Err(perr(hl, "expected 'extension fiber <n> cosets <m>'".into()));
    }
    let n: usize = h[2].parse().map_err(|_| perr(hl, "bad fiber rank".into()))?;
    let m: usize = h[4].parse().map_err(|_| perr(hl, "bad coset count".into()))?;
    let alpha = crate::word::Alphabet::standard(n)?;
    let mut phis = vec![FreeAutomorphism::identity(n); m];
    let mut nu = Vec::new();
    let mut sigma = Vec::new();
    let mut idx = 1;
    while idx < lines.len() {
        let (ln, line) = lines[idx];
        idx += 1;
        let parts: Vec<&str> = line.split_whitespace().collect();
        match parts[0] {
            "phi" => {
                let i: usize = parts
                    .get(1)
                    .and_then(|s| s.parse().ok())
                    .filter(|&i| (2..=m).contains(&i))
                    .ok_or_else(|| perr(ln, "phi index must be between 2 and m".into()))?;
                let (fwd, back) = crate::dsl::parse_maps(&parts[2..], &alpha, ln)?;
                phis[i - 1] = FreeAutomorphism::new(fwd, back)?;
            }
            "nu" | "sigma" => {
                let mut rows = Vec::new();
                for _ in 0..m {
                    let (rl, row) = *lines
                        .get(idx)
                        .ok_or_else(|| perr(ln, format!("{} needs {m} rows", parts[0])))?;
                    idx += 1;
                    let cells: Vec<&str> = row.split_whitespace().collect();
                    if cells.len() != m {
                        return Err(perr(rl, format!("row needs {m} entries")));
                    }
                    rows.push((rl, cells));
                }
                if parts[0] == "nu" {
                    nu = rows
                        .iter()
                        .map(|(rl, cells)| {
                            cells
                                .iter()
                                .map(|c| alpha.parse(c).map_err(|e| perr(*rl, e.to_string())))
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<_>>()?;
                } else {
                    sigma = rows
                        .iter()
                        .map(|(rl, cells)| {
                            cells
                                .iter()
                                .map(|c| {
                                    c.parse::<usize>()
                                        .ok()
                                        .filter(|&s| (1..=m).contains(&s))
                                        .map(|s| s - 1)
                                        .ok_or_else(|| perr(*rl, format!("bad coset {c:?}")))
                                })
                                .collect::<Result<Vec<_>>>()
                        })
                        .collect::<Result<_>>()?;
                }
            }
            other => return Err(perr(ln, format!("unknown directive {other:?}"))),
        }
    }
    if nu.is_empty() {
        nu = vec![vec![Word::empty(); m]; m];
    }
    if sigma.is_empty() {
        return Err(perr(hl, "missing sigma table".into()));
    }
    ExtensionDatum::new(n, phis, nu, sigma)
}

/// `K ∩ N b_j = L_j b_j`: one fiber automaton per coset.
#[derive(Clone, Debug)]
pub struct RationalDecomposition {
    pub pieces: Vec<Nfa>,
}

/// Builds an automaton over the extension alphabet for a set of extension
/// elements.
pub fn ext_set_to_nfa(d: &ExtensionDatum, set: &SetSpec<ExtElement>) -> Nfa {
    let rank = d.ext_rank();
    match set {
        SetSpec::Fin(elems) => {
            let words: Vec<Word> = elems.iter().map(|e| d.to_word(e)).collect();
            Nfa::from_words(rank, &words)
        }
        SetSpec::Coset { gens, rep } => {
            // (gens ∪ gens⁻¹)* · rep
            let mut nfa = Nfa::from_words(rank, &[Word::empty()]);
            nfa.finals = vec![0];
            for g in gens {
                let w = d.to_word(g);
                for word in [w.clone(), w.inverse()] {
                    let letters = word.letters();
                    if letters.is_empty() {
                        continue;
                    }
                    let mut cur = 0;
                    for (i, &l) in letters.iter().enumerate() {
                        let next = if i + 1 == letters.len() {
                            0
                        } else {
                            nfa.states += 1;
                            nfa.states - 1
                        };
                        nfa.transitions.push((cur, l, next));
                        cur = next;
                    }
                }
            }
            nfa.translate(&d.to_word(rep), false)
        }
        SetSpec::Rat(n) => n.clone(),
    }
}

/// Splits the image of `k` (over the extension alphabet) by cosets: runs the
/// automaton alongside the coset action, emitting fiber words along the way.
pub fn decompose_over_extension(k: &Nfa, d: &ExtensionDatum) -> Result<RationalDecomposition> {
    if k.rank > d.ext_rank() {
        return Err(Error::Input("automaton alphabet exceeds the extension alphabet".into()));
    }
    let m = d.cosets();
    let mut by_state: Vec<Vec<(Letter, usize)>> = vec![Vec::new(); k.states];
    for &(p, l, q) in &k.transitions {
        by_state[p].push((l, q));
    }
    let mut number: HashMap<(usize, usize), usize> = HashMap::new();
    let mut order: Vec<(usize, usize)> = Vec::new();
    let mut queue = VecDeque::new();
    for &i in &k.initial {
        if let std::collections::hash_map::Entry::Vacant(e) = number.entry((i, 0)) {
            e.insert(order.len());
            order.push((i, 0));
            queue.push_back((i, 0));
        }
    }
    let mut labelled: Vec<(usize, Word, usize)> = Vec::new();
    while let Some((q, c)) = queue.pop_front() {
        let from = number[&(q, c)];
        for &(l, q2) in &by_state[q] {
            let step = d.multiply(&ExtElement::new(Word::empty(), c), &d.eval_letter(l));
            let key = (q2, step.coset);
            let to = match number.get(&key) {
                Some(&t) => t,
                None => {
                    number.insert(key, order.len());
                    order.push(key);
                    queue.push_back(key);
                    order.len() - 1
                }
            };
            labelled.push((from, step.g, to));
        }
    }
    let finals: HashSet<usize> = k.finals.iter().copied().collect();
    let mut pieces = Vec::with_capacity(m);
    for j in 0..m {
        let mut base = Nfa {
            rank: d.rank,
            states: order.len(),
            transitions: Vec::new(),
            initial: if order.is_empty() { Vec::new() } else { vec![0] },
            finals: order
                .iter()
                .enumerate()
                .filter(|(_, (q, c))| *c == j && finals.contains(q))
                .map(|(i, _)| i)
                .collect(),
        };
        let mut coded = Vec::new();
        let mut labels: Vec<Word> = Vec::new();
        let mut label_index: HashMap<Word, usize> = HashMap::new();
        for (p, w, q) in &labelled {
            let idx = *label_index.entry(w.clone()).or_insert_with(|| {
                labels.push(w.clone());
                labels.len() - 1
            });
            coded.push((*p, Letter::pos(idx), *q));
        }
        base.rank = labels.len();
        base.transitions = coded;
        pieces.push(base.substitute(&labels, d.rank));
    }
    Ok(RationalDecomposition { pieces })
}

/// A fiber twisted-membership problem produced by the extension reduction:
/// the target lies in `α(K)` iff `target` lies in `φ_j-TCC_N(L_j)` for some
/// emitted subinstance.
#[derive(Clone, Debug)]
pub struct ExtSubinstance {
    pub j: usize,
    pub k: usize,
    pub mu: Word,
    pub twist: FreeAutomorphism,
    pub set: Nfa,
    pub target: Word,
}

impl ExtSubinstance {
    /// Converts a twisted witness `w` with `(w⁻¹φ_j) l w = target` into a
    /// conjugator `g` of the extension, `g⁻¹ (l b_j) g = x b_i`.
    pub fn conjugator(&self, d: &ExtensionDatum, w: &Word) -> ExtElement {
        let z = d.phis[self.j].apply(w);
        ExtElement::new(z, self.k)
    }
}

/// Reduces `target ∈ α(K)` to twisted membership problems in the fiber:
/// conjugating `l b_j` by `z b_k` gives `((w⁻¹φ_j) l w)φ_k · μ b_i` with
/// `w = zφ_j⁻¹` and `b_k⁻¹ b_j b_k = μ b_i`.
pub fn extension_conjugacy_decompose(
    d: &ExtensionDatum,
    k: &RationalDecomposition,
    target: &ExtElement,
) -> Vec<ExtSubinstance> {
    let m = d.cosets();
    let mut out = Vec::new();
    for j in 0..m {
        let piece = &k.pieces[j];
        if piece.finals.is_empty() || piece.initial.is_empty() {
            continue;
        }
        for kk in 0..m {
            let c = d.coset_conjugate(j, kk);
            if c.coset != target.coset {
                continue;
            }
            let fiber_target = d.phi_inverse(kk, &target.g.mul(&c.g.inverse()));
            out.push(ExtSubinstance {
                j,
                k: kk,
                mu: c.g,
                twist: d.phi_with_inverse(j),
                set: piece.clone(),
                target: fiber_target,
            });
        }
    }
    out
}

/// The reduced form of a conjugacy question `x ~ y` in `G ⋊_φ Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SemidirectReduction {
    /// Different `t`-exponents: never conjugate.
    ExponentMismatch { a: i64, b: i64 },
    /// `x ~ y ⇔ y ∈ φ-BCC(x)` (both exponents 0).
    Brinkmann { x: Word, y: Word },
    /// `t x ~ t y ⇔ y ∈ φ-TCC(x)`.
    Twisted { x: Word, y: Word },
    /// Any other common exponent: no reduction.
    Generic { exponent: i64 },
}

pub fn semidirect_conjugacy_instance(x: &SemidirectElement, y: &SemidirectElement) -> SemidirectReduction {
    if x.t_exp != y.t_exp {
        return SemidirectReduction::ExponentMismatch {
            a: x.t_exp,
            b: y.t_exp,
        };
    }
    match x.t_exp {
        0 => SemidirectReduction::Brinkmann {
            x: x.g.clone(),
            y: y.g.clone(),
        },
        1 => SemidirectReduction::Twisted {
            x: x.g.clone(),
            y: y.g.clone(),
        },
        e => SemidirectReduction::Generic { exponent: e },
    }
}

/// `y ∈ φ-TCC(K)` iff `t y ∈ α_{G^φ}(t K)`: conjugating `t k` by `z ∈ G`
/// gives `t (z⁻¹φ) k z`. Returns the target `t y` and the set `t K`.
pub fn twisted_to_gphi(gphi: &GPhi, set: &SetSpec<Word>, y: &Word) -> (GPhiElement, SetSpec<GPhiElement>) {
    let t = gphi.t();
    let shift = |w: &Word| gphi.multiply(&t, &gphi.fiber(w.clone()));
    let set = match set {
        SetSpec::Fin(v) => SetSpec::Fin(v.iter().map(shift).collect()),
        SetSpec::Coset { gens, rep } => {
            // t H r = (t H t⁻¹) t r
            let tinv = gphi.invert(&t);
            SetSpec::Coset {
                gens: gens
                    .iter()
                    .map(|g| gphi.multiply(&gphi.multiply(&t, &gphi.fiber(g.clone())), &tinv))
                    .collect(),
                rep: shift(rep),
            }
        }
        SetSpec::Rat(n) => {
            let mut lifted = n.clone();
            lifted.rank = gphi.rank() + 1;
            SetSpec::Rat(lifted.translate(&Word::gen(gphi.rank()), true))
        }
    };
    (shift(y), set)
}

/// Converts a `G^φ` conjugator `c = t^n z` of `t k` into twisted witness
/// data. Conjugating by `t^n` sends `t k` to some `t k'` with
/// `k' ∈ φ-TCC(k)`; the result `(k', z)` satisfies `y = (z⁻¹φ) k' z` where
/// `t y = c⁻¹ (t k) c`.
pub fn gphi_witness_to_twisted(gphi: &GPhi, k: &Word, c: &GPhiElement) -> (Word, Word) {
    let t = gphi.t();
    let tk = gphi.multiply(&t, &gphi.fiber(k.clone()));
    let tn = GPhiElement {
        t_exp: c.t_exp,
        g: Word::empty(),
    };
    let conj = gphi.multiply(&gphi.multiply(&gphi.invert(&tn), &tk), &tn);
    // conj = t k' as an element of t·G
    let tinv = gphi.invert(&t);
    let kprime = gphi.multiply(&tinv, &conj);
    debug_assert_eq!(kprime.t_exp, 0);
    (kprime.g, c.g.clone())
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

    #[test]
    fn semidirect_examples() {
        let phi = swap();
        let x = SemidirectElement::new(1, w("a"));
        let y = SemidirectElement::new(1, w("b"));
        assert_eq!(sd_multiply(&phi, &x, &y).unwrap(), SemidirectElement::new(2, w("bb")));
        let g = SemidirectElement::new(0, w("ab"));
        let h = SemidirectElement::new(0, w("Ba"));
        assert_eq!(sd_multiply(&phi, &g, &h).unwrap(), SemidirectElement::new(0, w("aa")));
        for e in [-2, 0, 3] {
            let x = SemidirectElement::new(e, w("abA"));
            let xi = sd_invert(&phi, &x).unwrap();
            assert_eq!(sd_multiply(&phi, &x, &xi).unwrap(), SemidirectElement::identity());
        }
    }

    #[test]
    fn semidirect_reductions() {
        let sx = |a, s| SemidirectElement::new(a, w(s));
        assert!(matches!(semidirect_conjugacy_instance(&sx(1, "a"), &sx(1, "b")), SemidirectReduction::Twisted { .. }));
        assert!(matches!(semidirect_conjugacy_instance(&sx(0, "a"), &sx(0, "b")), SemidirectReduction::Brinkmann { .. }));
        assert_eq!(
            semidirect_conjugacy_instance(&sx(2, "a"), &sx(3, "b")),
            SemidirectReduction::ExponentMismatch { a: 2, b: 3 }
        );
        // twisted witness z converts to conjugator z of t x
        let phi = swap();
        let x = w("ab");
        let z = w("aB");
        let y = twisted_conj(&phi, &x, &z);
        let tx = sx(1, "ab");
        let ze = SemidirectElement::new(0, z.clone());
        let conj = sd_multiply(&phi, &sd_multiply(&phi, &sd_invert(&phi, &ze).unwrap(), &tx).unwrap(), &ze).unwrap();
        assert_eq!(conj, SemidirectElement::new(1, y));
    }

    #[test]
    fn gphi_examples() {
        let g = GPhi::new(swap(), ViaCertificate { p: 2, delta: Word::empty() }).unwrap();
        assert_eq!(g.normalize(3, &w("a")), GPhiElement { t_exp: 1, g: w("a") });
        let inner = GPhi::new(
            FreeAutomorphism::inner(2, &w("ab")),
            ViaCertificate { p: 1, delta: w("ab") },
        )
        .unwrap();
        assert_eq!(inner.normalize(2, &w("b")), GPhiElement { t_exp: 0, g: w("ababb") });
        assert!(GPhi::new(swap(), ViaCertificate { p: 1, delta: Word::empty() }).is_err());
        for x in ball(2, 2) {
            for k in 0..2 {
                let e = g.normalize(k, &x);
                let ei = g.invert(&e);
                assert_eq!(g.multiply(&e, &ei), g.identity());
                assert_eq!(g.multiply(&ei, &e), g.identity());
            }
        }
    }

    fn swap_datum() -> ExtensionDatum {
        ExtensionDatum::new(
            2,
            vec![FreeAutomorphism::identity(2), swap()],
            vec![vec![Word::empty(); 2]; 2],
            vec![vec![0, 1], vec![1, 0]],
        )
        .unwrap()
    }

    #[test]
    fn datum_validation() {
        swap_datum();
        let phi = FreeAutomorphism::new(vec![w("b"), w("a")], None).unwrap();
        let bad = ExtensionDatum::new(
            2,
            vec![FreeAutomorphism::identity(2), phi.clone()],
            vec![vec![Word::empty(), Word::empty()], vec![Word::empty(), w("ab").mul(&w("ba"))]],
            vec![vec![0, 1], vec![1, 0]],
        );
        // abba is fixed by the swap, but the swap squares to id, not λ_abba
        assert!(bad.is_err());
        let report = ExtensionDatum::validate(
            2,
            vec![FreeAutomorphism::identity(2), swap()],
            vec![vec![Word::empty(), Word::empty()], vec![Word::empty(), w("a")]],
            vec![vec![0, 1], vec![1, 0]],
        )
        .unwrap();
        assert!(report.iter().any(|v| v.i == 1 && v.j == 1 && v.generator.is_some()));
    }

    #[test]
    fn datum_from_gphi() {
        let inner = GPhi::new(FreeAutomorphism::inner(2, &w("ab")), ViaCertificate { p: 2, delta: w("abab") }).unwrap();
        let d = inner.to_datum().unwrap();
        assert_eq!(d.nu[1][1], w("abab"));
        let d = GPhi::new(swap(), ViaCertificate { p: 2, delta: Word::empty() }).unwrap().to_datum().unwrap();
        let x = ExtElement::new(w("ab"), 1);
        assert_eq!(d.multiply(&x, &d.invert(&x)), d.identity());
        assert_eq!(d.multiply(&d.invert(&x), &x), d.identity());
    }

    #[test]
    fn datum_file_round_trip() {
        let d = swap_datum();
        let text = d.format();
        let back = ExtensionDatum::parse(&text).unwrap();
        assert_eq!(back.format(), text);
        assert_eq!(back.sigma, d.sigma);
        assert!(ExtensionDatum::parse("extension fiber 2 cosets 2\nsigma\n1 2\n2 2\n").is_err());
    }

    #[test]
    fn decomposition_examples() {
        let d = swap_datum();
        // K = {b_2}
        let k = ext_set_to_nfa(&d, &SetSpec::Fin(vec![ExtElement::new(Word::empty(), 1)]));
        let dec = decompose_over_extension(&k, &d).unwrap();
        assert!(dec.pieces[1].image_contains(&Word::empty()));
        assert!(dec.pieces[0].finals.is_empty());
        // a singleton in coset 2, written as c·a (= (aσ⁻¹)... = b·b_2)
        let word = w("ca");
        let e = d.eval(&word);
        assert_eq!(e, ExtElement::new(w("b"), 1));
        let k = Nfa::from_words(3, &[word]);
        let dec = decompose_over_extension(&k, &d).unwrap();
        assert!(dec.pieces[1].image_contains(&w("b")));
        assert!(!dec.pieces[1].image_contains(&w("a")));
    }

    #[test]
    fn extension_conjugacy_swap() {
        let d = swap_datum();
        let k = ext_set_to_nfa(&d, &SetSpec::Fin(vec![ExtElement::new(w("a"), 0)]));
        let dec = decompose_over_extension(&k, &d).unwrap();
        let target = ExtElement::new(w("b"), 0);
        let subs = extension_conjugacy_decompose(&d, &dec, &target);
        assert_eq!(subs.len(), 2);
        let hit = subs.iter().find(|s| s.k == 1).unwrap();
        // a ∈ φ_1-TCC({a}) with witness 1, giving conjugator b_2
        assert_eq!(hit.target, w("a"));
        let g = hit.conjugator(&d, &Word::empty());
        assert_eq!(d.conj(&ExtElement::new(w("a"), 0), &g), target);
        // target in the other coset: no pieces
        let subs = extension_conjugacy_decompose(&d, &dec, &ExtElement::new(w("a"), 1));
        assert!(subs.is_empty());
    }

    #[test]
    fn twisted_to_gphi_identity_case() {
        let g = GPhi::new(FreeAutomorphism::identity(2), ViaCertificate { p: 1, delta: Word::empty() }).unwrap();
        let (ty, set) = twisted_to_gphi(&g, &SetSpec::Fin(vec![w("ab")]), &w("ba"));
        assert_eq!(ty, g.fiber(w("ba")));
        assert_eq!(set, SetSpec::Fin(vec![g.fiber(w("ab"))]));
    }

    #[test]
    fn gphi_witness_conversion() {
        let phi = swap();
        let g = GPhi::new(phi.clone(), ViaCertificate { p: 2, delta: Word::empty() }).unwrap();
        let k = w("ab");
        for z in ball(2, 2) {
            for n in 0..2 {
                let c = GPhiElement { t_exp: n, g: z.clone() };
                let tk = g.multiply(&g.t(), &g.fiber(k.clone()));
                let conj = g.multiply(&g.multiply(&g.invert(&c), &tk), &c);
                let (kp, zz) = gphi_witness_to_twisted(&g, &k, &c);
                let y = twisted_conj(&phi, &kp, &zz);
                assert_eq!(conj, g.multiply(&g.t(), &g.fiber(y)));
            }
        }
    }
}
