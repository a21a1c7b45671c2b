//! Closed-form deciders: twisted conjugacy and orbits in `Z^m`, the
//! automorphism calculus of `F_n × Z^m`, reductions for `F_n × F_m`, the
//! finite-union reduction of Brinkmann conjugacy for virtually inner
//! automorphisms, and the integer separators for `F_n × Z`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{verify_via_certificate, FreeAutomorphism, ViaCertificate, Word};

/// Integer matrix, row-major. Vectors act as rows: `x ↦ x M`.
pub type Matrix = Vec<Vec<i64>>;

pub fn identity_matrix(m: usize) -> Matrix {
    (0..m)
        .map(|i| (0..m).map(|j| i64::from(i == j)).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn mat_pow(a: &Matrix, k: u32) -> Matrix {
    (0..k).fold(identity_matrix(a.len()), |acc, _| mat_mul(&acc, a))
}

pub fn vec_mat(x: &[i64], m: &Matrix) -> Vec<i64> {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| x.iter().zip(m).map(|(a, row)| a * row[j]).sum())
        .collect()
}

fn vec_add(x: &[i64], y: &[i64]) -> Vec<i64> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

fn vec_sub(x: &[i64], y: &[i64]) -> Vec<i64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

fn dot(x: &[i64], y: &[i64]) -> i128 {
    x.iter().zip(y).map(|(a, b)| *a as i128 * *b as i128).sum()
}

/// Determinant by fraction-free elimination.
pub fn determinant(m: &Matrix) -> i128 {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| a[i][k] != 0) else {
                return 0;
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    if n == 0 {
        1
    } else {
        sign * a[n - 1][n - 1]
    }
}

pub fn is_unimodular(m: &Matrix) -> bool {
    m.iter().all(|r| r.len() == m.len()) && determinant(m).abs() == 1
}

/// Row echelon form `H = U G` with unimodular `U`.
struct Echelon {
    h: Vec<Vec<i128>>,
    u: Vec<Vec<i128>>,
    pivots: Vec<(usize, usize)>,
}

fn echelon(g: &[Vec<i64>], cols: usize, reduce_above: bool) -> Echelon {
    let k = g.len();
    let mut h: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..k)
        .map(|i| (0..k).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == k {
            break;
        }
        loop {
            let Some(best) = (r..k)
                .filter(|&i| h[i][c] != 0)
                .min_by_key(|&i| h[i][c].abs())
            else {
                break;
            };
            h.swap(r, best);
            u.swap(r, best);
            let mut done = true;
            for i in r + 1..k {
                if h[i][c] != 0 {
                    let q = h[i][c].div_euclid(h[r][c]);
                    for j in 0..cols {
                        h[i][j] -= q * h[r][j];
                    }
                    for j in 0..k {
                        u[i][j] -= q * u[r][j];
                    }
                    if h[i][c] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if h.get(r).is_some_and(|row| row[c] != 0) {
            if h[r][c] < 0 {
                h[r].iter_mut().for_each(|x| *x = -*x);
                u[r].iter_mut().for_each(|x| *x = -*x);
            }
            if reduce_above {
                for i in 0..r {
                    let q = h[i][c].div_euclid(h[r][c]);
                    if q != 0 {
                        for j in 0..cols {
                            h[i][j] -= q * h[r][j];
                        }
                        for j in 0..k {
                            u[i][j] -= q * u[r][j];
                        }
                    }
                }
            }
            pivots.push((r, c));
            r += 1;
        }
    }
    Echelon { h, u, pivots }
}

/// Coefficients `c` with `Σ c_i g_i = v`, if `v` lies in the row lattice.
pub fn lattice_solve(gens: &[Vec<i64>], v: &[i64]) -> Option<Vec<i64>> {
    let cols = v.len();
    if gens.is_empty() {
        return v.iter().all(|&x| x == 0).then(Vec::new);
    }
    let e = echelon(gens, cols, false);
    let mut rest: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    let mut coeff = vec![0i128; gens.len()];
    for &(r, c) in &e.pivots {
        if rest[c] % e.h[r][c] != 0 {
            return None;
        }
        let q = rest[c] / e.h[r][c];
        coeff[r] = q;
        for j in 0..cols {
            rest[j] -= q * e.h[r][j];
        }
    }
    if rest.iter().any(|&x| x != 0) {
        return None;
    }
    let out: Vec<i128> = (0..gens.len())
        .map(|j| (0..gens.len()).map(|r| coeff[r] * e.u[r][j]).sum())
        .collect();
    out.into_iter().map(|x| i64::try_from(x).ok()).collect()
}

/// Inverse of a unimodular matrix.
pub fn unimodular_inverse(m: &Matrix) -> Result<Matrix> {
    if !is_unimodular(m) {
        return Err(Error::Input("matrix is not unimodular".into()));
    }
    let e = echelon(m, m.len(), true);
    e.u.iter()
        .map(|r| {
            r.iter()
                .map(|&x| i64::try_from(x).map_err(|_| Error::Input("inverse overflows".into())))
                .collect()
        })
        .collect()
}

/// Smith form data: column transform `V` and invariant factors `d_i`, with
/// `rowspace(G) · V = rowspace(diag(d))`.
fn smith_columns(g: &[Vec<i64>], cols: usize) -> (Vec<Vec<i128>>, Vec<i128>) {
    let mut a: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let rows = a.len();
    let mut v: Vec<Vec<i128>> = (0..cols)
        .map(|i| (0..cols).map(|j| i128::from(i == j)).collect())
        .collect();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let Some((pi, pj)) = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs())
        else {
            break;
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            let q = a[i][t].div_euclid(a[t][t]);
            if q != 0 {
                for j in 0..cols {
                    a[i][j] -= q * a[t][j];
                }
            }
            if a[i][t] != 0 {
                clean = false;
            }
        }
        for j in t + 1..cols {
            let q = a[t][j].div_euclid(a[t][t]);
            if q != 0 {
                for row in a.iter_mut() {
                    row[j] -= q * row[t];
                }
                for row in v.iter_mut() {
                    row[j] -= q * row[t];
                }
            }
            if a[t][j] != 0 {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    (v, diag)
}

/// Witness for `y ∈ φ-TCC(H x)` in `Z^m`: `y = -zM + Σ h_i basis_i + x + z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZmTccWitness {
    pub h_coeffs: Vec<i64>,
    pub z: Vec<i64>,
}

/// A linear functional `f` and modulus `N` with `f(lattice) ⊆ NZ` and
/// `f(y - x) ≢ 0 mod N`: the quotient `Z^m → Z/N` separates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeCertificate {
    pub functional: Vec<i64>,
    pub modulus: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZmTccVerdict {
    Member(ZmTccWitness),
    NonMember(LatticeCertificate),
}

fn tcc_lattice(m: &Matrix, basis: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let dim = m.len();
    let mut gens: Vec<Vec<i64>> = basis.to_vec();
    for i in 0..dim {
        gens.push((0..dim).map(|j| i64::from(i == j) - m[i][j]).collect());
    }
    gens
}

/// Decides `y ∈ φ-TCC(H x) = H + Im(I - M) + x` exactly.
pub fn zm_tcc_member(m: &Matrix, basis: &[Vec<i64>], x: &[i64], y: &[i64]) -> Result<ZmTccVerdict> {
    let dim = m.len();
    if x.len() != dim || y.len() != dim || basis.iter().any(|b| b.len() != dim) {
        return Err(Error::Input("dimension mismatch".into()));
    }
    if !is_unimodular(m) {
        return Err(Error::Input("matrix is not unimodular".into()));
    }
    let gens = tcc_lattice(m, basis);
    let diff = vec_sub(y, x);
    if let Some(c) = lattice_solve(&gens, &diff) {
        let (h, z) = c.split_at(basis.len());
        return Ok(ZmTccVerdict::Member(ZmTccWitness {
            h_coeffs: h.to_vec(),
            z: z.to_vec(),
        }));
    }
    let (v, d) = smith_columns(&gens, dim);
    let u: Vec<i128> = (0..dim)
        .map(|j| diff.iter().enumerate().map(|(i, &x)| x as i128 * v[i][j]).sum())
        .collect();
    for (i, &ui) in u.iter().enumerate() {
        let modulus = if i < d.len() {
            if ui % d[i] == 0 {
                continue;
            }
            d[i]
        } else {
            if ui == 0 {
                continue;
            }
            ui.abs() + 1
        };
        let functional = (0..dim).map(|r| v[r][i] as i64).collect();
        return Ok(ZmTccVerdict::NonMember(LatticeCertificate {
            functional,
            modulus: modulus as i64,
        }));
    }
    Err(Error::Input("lattice residue inconsistent with membership test".into()))
}

pub fn verify_zm_tcc_witness(m: &Matrix, basis: &[Vec<i64>], x: &[i64], y: &[i64], w: &ZmTccWitness) -> bool {
    if w.h_coeffs.len() != basis.len() || w.z.len() != m.len() {
        return false;
    }
    let mut h = vec![0; m.len()];
    for (c, b) in w.h_coeffs.iter().zip(basis) {
        h = vec_add(&h, &b.iter().map(|x| c * x).collect::<Vec<_>>());
    }
    let zm = vec_mat(&w.z, m);
    let got = vec_add(&vec_add(&vec_sub(&w.z, &zm), &h), x);
    got == y
}

pub fn verify_lattice_certificate(m: &Matrix, basis: &[Vec<i64>], x: &[i64], y: &[i64], c: &LatticeCertificate) -> bool {
    let n = c.modulus as i128;
    if n < 2 || c.functional.len() != m.len() {
        return false;
    }
    tcc_lattice(m, basis)
        .iter()
        .all(|g| dot(g, &c.functional).rem_euclid(n) == 0)
        && dot(&vec_sub(y, x), &c.functional).rem_euclid(n) != 0
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitVerdict {
    /// `x M^k = y`.
    Yes(i64),
    /// The orbit of `x mod N` avoids `y mod N`.
    No(i64),
    Undecided,
}

/// Decides `y ∈ {x M^k : k ∈ Z}`, searching exponents `|k| ≤ budget` and
/// moduli `2 ≤ N ≤ budget` alternately.
pub fn zm_orbit_member(m: &Matrix, x: &[i64], y: &[i64], budget: usize) -> Result<OrbitVerdict> {
    let inv = unimodular_inverse(m)?;
    if x == y {
        return Ok(OrbitVerdict::Yes(0));
    }
    let mut fwd = x.to_vec();
    let mut back = x.to_vec();
    for k in 1..=budget {
        fwd = vec_mat(&fwd, m);
        if fwd == y {
            return Ok(OrbitVerdict::Yes(k as i64));
        }
        back = vec_mat(&back, &inv);
        if back == y {
            return Ok(OrbitVerdict::Yes(-(k as i64)));
        }
        let n = k as i64 + 1;
        if orbit_mod_avoids(m, x, y, n) {
            return Ok(OrbitVerdict::No(n));
        }
    }
    Ok(OrbitVerdict::Undecided)
}

fn reduce_mod(v: &[i64], n: i64) -> Vec<i64> {
    v.iter().map(|a| a.rem_euclid(n)).collect()
}

/// True when `y mod N` is not in the (finite, cyclic) orbit of `x mod N`.
pub fn orbit_mod_avoids(m: &Matrix, x: &[i64], y: &[i64], n: i64) -> bool {
    if n < 2 {
        return false;
    }
    let mm: Matrix = m.iter().map(|r| reduce_mod(r, n)).collect();
    let start = reduce_mod(x, n);
    let target = reduce_mod(y, n);
    let mut cur = start.clone();
    loop {
        if cur == target {
            return false;
        }
        cur = reduce_mod(&vec_mat(&cur, &mm), n);
        if cur == start {
            return true;
        }
    }
}

/// `Ψ_{φ,Q,P}: t^a u ↦ t^{aQ + ūP} uφ` on `F_n × Z^m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FatfAutomorphism {
    pub phi: FreeAutomorphism,
    pub q: Matrix,
    pub p: Matrix,
}

/// `t^a u` with `a ∈ Z^m`, `u ∈ F_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FatfElement {
    pub a: Vec<i64>,
    pub u: Word,
}

impl FatfAutomorphism {
    pub fn new(phi: FreeAutomorphism, q: Matrix, p: Matrix) -> Result<Self> {
        let n = phi.rank();
        let m = q.len();
        if !is_unimodular(&q) {
            return Err(Error::Input("Q is not unimodular".into()));
        }
        if p.len() != n || p.iter().any(|r| r.len() != m) {
            return Err(Error::Input("P must be an n×m matrix".into()));
        }
        Ok(FatfAutomorphism { phi, q, p })
    }

    pub fn apply(&self, x: &FatfElement) -> FatfElement {
        let ubar = x.u.abelianize(self.phi.rank()).0;
        FatfElement {
            a: vec_add(&vec_mat(&x.a, &self.q), &vec_mat(&ubar, &self.p)),
            u: self.phi.apply(&x.u),
        }
    }

    /// `(φ⁻¹, Q⁻¹, −(φ⁻¹)^{ab} P Q⁻¹)`.
    pub fn inverse(&self) -> Result<FatfAutomorphism> {
        let phi = self.phi.inverse()?;
        let q = unimodular_inverse(&self.q)?;
        let p = mat_mul(&mat_mul(&phi.abelian_matrix(), &self.p), &q)
            .into_iter()
            .map(|row| row.into_iter().map(|x| -x).collect())
            .collect();
        Ok(FatfAutomorphism { phi, q, p })
    }

    /// `self` followed by `other`: `(φ₁φ₂, Q₁Q₂, P₁Q₂ + φ₁^{ab}P₂)`.
    pub fn compose(&self, other: &FatfAutomorphism) -> FatfAutomorphism {
        FatfAutomorphism {
            phi: self.phi.compose(&other.phi),
            q: mat_mul(&self.q, &other.q),
            p: mat_add(
                &mat_mul(&self.p, &other.q),
                &mat_mul(&self.phi.abelian_matrix(), &other.p),
            ),
        }
    }
}

/// `Ψ^k = Ψ_{φ^k, Q^k, P^{(k)}}` with
/// `P^{(k)} = Σ_{i=1}^k (φ^{ab})^{i-1} P Q^{k-i}`.
pub fn fatf_power(psi: &FatfAutomorphism, k: u32) -> Result<FatfAutomorphism> {
    if k == 0 {
        return Err(Error::Input("power must be positive".into()));
    }
    let ab = psi.phi.abelian_matrix();
    let n = psi.phi.rank();
    let m = psi.q.len();
    let mut sum = vec![vec![0; m]; n];
    for i in 1..=k {
        let term = mat_mul(&mat_mul(&mat_pow(&ab, i - 1), &psi.p), &mat_pow(&psi.q, k - i));
        sum = mat_add(&sum, &term);
    }
    Ok(FatfAutomorphism {
        phi: psi.phi.power(k as i64)?,
        q: mat_pow(&psi.q, k),
        p: sum,
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

fn euler_phi(mut n: u64) -> u64 {
    let mut out = n;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

/// Every finite-order matrix in `GL(m, Z)` has order dividing this number:
/// its eigenvalues are roots of unity of orders `n` with `φ(n) ≤ m`.
pub fn finite_order_exponent(m: usize) -> u64 {
    let bound = (2 * m * m + 2) as u64;
    (1..=bound.max(2))
        .filter(|&n| euler_phi(n) <= m as u64)
        .fold(1, lcm)
}

fn checked_mat_mul(a: &Matrix, b: &Matrix) -> Option<Matrix> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter().zip(b).try_fold(0i64, |acc, (x, brow)| {
                        acc.checked_add(x.checked_mul(brow[j])?)
                    })
                })
                .collect()
        })
        .collect()
}

/// The order of `Q`, or `None` when `Q` has infinite order.
pub fn matrix_order(q: &Matrix) -> Option<u64> {
    let id = identity_matrix(q.len());
    let e = finite_order_exponent(q.len());
    let mut cur = id.clone();
    for k in 1..=e {
        cur = checked_mat_mul(&cur, q)?;
        if cur == id {
            return Some(k);
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FatfViaVerdict {
    /// `Ψ^k` fixes the `Z^m` coordinate shift, so `Ψ^k` is inner.
    Yes(u32),
    No(String),
    Undecided(String),
}

/// Decides whether `Ψ_{φ,Q,P}` is virtually inner, given `φ^p = λ_Δ`.
///
/// With `L = lcm(p, ord Q)`, `Ψ^L = Ψ_{λ_c, I, P^{(L)}}`; since `λ_c` acts
/// trivially on the abelianization, `P^{(jL)} = j P^{(L)}`. So a suitable
/// exponent exists iff `P^{(L)} = 0`, and then `L` itself works.
pub fn fatf_via_test(psi: &FatfAutomorphism, cert: &ViaCertificate, k_bound: u32) -> Result<FatfViaVerdict> {
    if !verify_via_certificate(&psi.phi, cert) {
        return Err(Error::Input("invalid certificate for φ".into()));
    }
    let Some(order_q) = matrix_order(&psi.q) else {
        return Ok(FatfViaVerdict::No(format!(
            "Q has infinite order: Q^{} is not the identity",
            finite_order_exponent(psi.q.len())
        )));
    };
    let l = lcm(cert.p as u64, order_q);
    if l > k_bound as u64 {
        return Ok(FatfViaVerdict::Undecided(format!(
            "lcm(p, ord Q) = {l} exceeds the bound {k_bound}"
        )));
    }
    let pl = fatf_power(psi, l as u32)?;
    if pl.p.iter().flatten().all(|&x| x == 0) {
        Ok(FatfViaVerdict::Yes(l as u32))
    } else {
        Ok(FatfViaVerdict::No(format!(
            "P^({l}) = {:?} is nonzero and P^(jL) = j·P^(L) for all j ≥ 1",
            pl.p
        )))
    }
}

/// A twisted membership question in a free group: `target ∈ φ-TCC(set)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeTwistedInstance {
    pub phi: FreeAutomorphism,
    pub set: Vec<Word>,
    pub target: Word,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FnFmKind {
    /// `(x, y) ↦ (xφ, yψ)`.
    Six,
    /// `(x, y) ↦ (yψ, xφ)`.
    Seven,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnFmAutomorphism {
    pub kind: FnFmKind,
    pub phi: FreeAutomorphism,
    pub psi: FreeAutomorphism,
}

impl FnFmAutomorphism {
    pub fn new(kind: FnFmKind, phi: FreeAutomorphism, psi: FreeAutomorphism) -> Result<Self> {
        if kind == FnFmKind::Seven && phi.rank() != psi.rank() {
            return Err(Error::Input("type VII needs equal ranks".into()));
        }
        Ok(FnFmAutomorphism { kind, phi, psi })
    }

    pub fn apply(&self, x: &Word, y: &Word) -> (Word, Word) {
        match self.kind {
            FnFmKind::Six => (self.phi.apply(x), self.psi.apply(y)),
            FnFmKind::Seven => (self.psi.apply(y), self.phi.apply(x)),
        }
    }

    /// `((u,v)⁻¹Ψ) (x,y) (u,v)`.
    pub fn twisted_conj(&self, x: &Word, y: &Word, u: &Word, v: &Word) -> (Word, Word) {
        let (pu, pv) = self.apply(&u.inverse(), &v.inverse());
        (pu.mul(x).mul(u), pv.mul(y).mul(v))
    }
}

/// Reduces `(z, w) ∈ Ψ-TCC((x, y))` to free twisted membership problems.
///
/// Type VI splits into `z ∈ φ-TCC(x)` and `w ∈ ψ-TCC(y)`. For type VII the
/// second coordinate forces `v = y⁻¹ (uφ) w`, and substituting into the
/// first gives the single condition `(wψ) z ∈ φψ-TCC((yψ) x)`.
pub fn fnfm_twisted_reduce(
    psi: &FnFmAutomorphism,
    x: &Word,
    y: &Word,
    z: &Word,
    w: &Word,
) -> Vec<FreeTwistedInstance> {
    match psi.kind {
        FnFmKind::Six => vec![
            FreeTwistedInstance {
                phi: psi.phi.clone(),
                set: vec![x.clone()],
                target: z.clone(),
            },
            FreeTwistedInstance {
                phi: psi.psi.clone(),
                set: vec![y.clone()],
                target: w.clone(),
            },
        ],
        FnFmKind::Seven => vec![FreeTwistedInstance {
            phi: psi.phi.compose(&psi.psi),
            set: vec![psi.psi.apply(y).mul(x)],
            target: psi.psi.apply(w).mul(z),
        }],
    }
}

/// Rebuilds a `Ψ`-twisted conjugator from witnesses of the reduced
/// instances (one per instance, in order).
pub fn fnfm_conjugator(psi: &FnFmAutomorphism, y: &Word, w: &Word, witnesses: &[Word]) -> Option<(Word, Word)> {
    match psi.kind {
        FnFmKind::Six => Some((witnesses.first()?.clone(), witnesses.get(1)?.clone())),
        FnFmKind::Seven => {
            let u = witnesses.first()?.clone();
            let v = y.inverse().mul(&psi.phi.apply(&u)).mul(w);
            Some((u, v))
        }
    }
}

/// `y ∈ φ-BCC(x)` iff `y` is conjugate to some `xφ^i`, `1 ≤ i ≤ p`, when
/// `φ^p = λ_Δ`. Returns those `p` words.
pub fn via_brinkmann_reduce(phi: &FreeAutomorphism, cert: &ViaCertificate, x: &Word) -> Result<Vec<Word>> {
    if !verify_via_certificate(phi, cert) {
        return Err(Error::Input("invalid certificate".into()));
    }
    let mut out = Vec::with_capacity(cert.p as usize);
    let mut cur = x.clone();
    for _ in 0..cert.p {
        cur = phi.apply(&cur);
        out.push(cur.clone());
    }
    Ok(out)
}

/// The homomorphism `ζ: F_n × Z → Z`,
/// `t^a u ↦ -k a - Σ_{i=1}^{k-1} (k-i) \overline{uφ^{i-1}} P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Zeta {
    pub k: u32,
    /// Row `i-1` holds `(φ^{ab})^{i-1} P` for `i = 1..k-1`.
    pub columns: Vec<Vec<i64>>,
}

impl Zeta {
    pub fn new(phi: &FreeAutomorphism, p: &[i64], k: u32) -> Self {
        let ab = phi.abelian_matrix();
        let pcol: Matrix = p.iter().map(|&x| vec![x]).collect();
        let columns = (1..k)
            .map(|i| {
                mat_mul(&mat_pow(&ab, i - 1), &pcol)
                    .into_iter()
                    .map(|r| r[0])
                    .collect()
            })
            .collect();
        Zeta { k, columns }
    }

    pub fn value(&self, a: i64, u: &Word) -> i128 {
        let rank = self.columns.first().map_or(0, Vec::len);
        let ubar = u.abelianize(rank.max(u.support_rank())).0;
        let k = self.k as i128;
        let mut out = -k * a as i128;
        for (i, col) in self.columns.iter().enumerate() {
            let weight = k - (i as i128 + 1);
            out -= weight * dot(&ubar[..col.len()], col);
        }
        out
    }
}

/// Separating data for `t^q v ∉ Ψ-TCC(1)` in `F_n × Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZetaSeparator {
    /// Orientation preserving: `ζ` kills `Ψ-TCC(1)` and sends the target to
    /// a nonzero value, so reduction mod `modulus` separates.
    Preserving { zeta: Zeta, value: i128, modulus: i128 },
    /// Orientation reversing: the index-2 subgroup `H = {u : ūP even}` and
    /// a representative `w` of its other coset.
    Reversing { parity: Vec<i64>, coset_rep: Word },
}

/// Builds the integer separator for `t^q (y⁻¹φ) y`, given
/// `Ψ: t^m u ↦ t^{±m + ūP} uφ` and `k` a multiple of the order of `φ`
/// with `Σ_{i=1}^k (φ^{ab})^{i-1} P = 0` (preserving case).
pub fn fnxz_zeta_separator(
    preserving: bool,
    phi: &FreeAutomorphism,
    k: u32,
    p: &[i64],
    q: i64,
    y: &Word,
) -> Result<ZetaSeparator> {
    let n = phi.rank();
    if p.len() != n {
        return Err(Error::Input("P must have one entry per generator".into()));
    }
    let ybar = y.abelianize(n).0;
    if preserving {
        let ab = phi.abelian_matrix();
        let pcol: Matrix = p.iter().map(|&x| vec![x]).collect();
        let mut total = vec![vec![0]; n];
        for i in 1..=k {
            total = mat_add(&total, &mat_mul(&mat_pow(&ab, i - 1), &pcol));
        }
        if total.iter().any(|r| r[0] != 0) {
            return Err(Error::Capability(format!(
                "Σ (φ^ab)^(i-1) P does not vanish for k = {k}"
            )));
        }
        let yp = dot(&ybar, p);
        if q as i128 == -yp {
            return Err(Error::Capability("target lies in the twisted class (q = -ȳP)".into()));
        }
        let zeta = Zeta::new(phi, p, k);
        let value = -(k as i128) * (q as i128 + yp);
        Ok(ZetaSeparator::Preserving {
            zeta,
            value,
            modulus: value.abs() + 1,
        })
    } else {
        let odd = (0..n).find(|&i| p[i].rem_euclid(2) == 1);
        let Some(g) = odd else {
            return Err(Error::Capability("every generator has even ūP; H is everything".into()));
        };
        let yp = dot(&ybar, p);
        if (q as i128 + yp).rem_euclid(2) == 0 {
            return Err(Error::Capability("no parity obstruction (q ∈ -ȳP + 2Z)".into()));
        }
        Ok(ZetaSeparator::Reversing {
            parity: p.iter().map(|x| x.rem_euclid(2)).collect(),
            coset_rep: Word::gen(g),
        })
    }
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

    fn swap_matrix() -> Matrix {
        vec![vec![0, 1], vec![1, 0]]
    }

    fn brute_tcc(m: &Matrix, x: &[i64], y: &[i64], r: i64) -> bool {
        let mut found = false;
        for z0 in -r..=r {
            for z1 in -r..=r {
                let z = vec![z0, z1];
                let got = vec_add(&vec_sub(&z, &vec_mat(&z, m)), x);
                found |= got == y;
            }
        }
        found
    }

    #[test]
    fn zm_examples() {
        let m = swap_matrix();
        match zm_tcc_member(&m, &[], &[0, 0], &[1, -1]).unwrap() {
            ZmTccVerdict::Member(wt) => assert!(verify_zm_tcc_witness(&m, &[], &[0, 0], &[1, -1], &wt)),
            other => panic!("{other:?}"),
        }
        assert!(brute_tcc(&m, &[0, 0], &[1, -1], 2));
        match zm_tcc_member(&m, &[], &[0, 0], &[1, 0]).unwrap() {
            ZmTccVerdict::NonMember(c) => assert!(verify_lattice_certificate(&m, &[], &[0, 0], &[1, 0], &c)),
            other => panic!("{other:?}"),
        }
        assert!(!brute_tcc(&m, &[0, 0], &[1, 0], 4));
        let id = identity_matrix(2);
        assert!(matches!(zm_tcc_member(&id, &[], &[3, 1], &[3, 1]).unwrap(), ZmTccVerdict::Member(_)));
        assert!(matches!(zm_tcc_member(&id, &[], &[3, 1], &[3, 2]).unwrap(), ZmTccVerdict::NonMember(_)));
        let full = identity_matrix(2);
        assert!(matches!(zm_tcc_member(&id, &full, &[0, 0], &[7, -5]).unwrap(), ZmTccVerdict::Member(_)));
        assert!(zm_tcc_member(&id, &[], &[0], &[0, 0]).is_err());
    }

    #[test]
    fn orbit_examples() {
        let m = vec![vec![1, 1], vec![0, 1]];
        assert_eq!(zm_orbit_member(&m, &[1, 0], &[1, 3], 10).unwrap(), OrbitVerdict::Yes(3));
        assert_eq!(zm_orbit_member(&m, &[1, 0], &[1, -2], 10).unwrap(), OrbitVerdict::Yes(-2));
        match zm_orbit_member(&m, &[1, 0], &[2, 3], 10).unwrap() {
            OrbitVerdict::No(n) => assert!(orbit_mod_avoids(&m, &[1, 0], &[2, 3], n)),
            other => panic!("{other:?}"),
        }
        assert_eq!(zm_orbit_member(&m, &[4, 4], &[4, 4], 1).unwrap(), OrbitVerdict::Yes(0));
    }

    #[test]
    fn matrices() {
        assert_eq!(determinant(&swap_matrix()), -1);
        let m = vec![vec![2, 1, 0], vec![1, 1, 0], vec![0, 3, 1]];
        let inv = unimodular_inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity_matrix(3));
        assert_eq!(matrix_order(&vec![vec![0, -1], vec![1, 1]]), Some(6));
        assert_eq!(matrix_order(&vec![vec![1, 1], vec![0, 1]]), None);
        assert_eq!(finite_order_exponent(1), 2);
        assert_eq!(finite_order_exponent(3), 12);
    }

    fn fatf(phi: FreeAutomorphism, q: i64, p: Vec<i64>) -> FatfAutomorphism {
        let pm = p.into_iter().map(|x| vec![x]).collect();
        FatfAutomorphism::new(phi, vec![vec![q]], pm).unwrap()
    }

    #[test]
    fn fatf_examples() {
        let id1 = FreeAutomorphism::identity(1);
        let psi = fatf(id1.clone(), -1, vec![3]);
        assert_eq!(fatf_power(&psi, 1).unwrap(), psi);
        assert_eq!(fatf_power(&psi, 2).unwrap().p, vec![vec![0]]);
        let cert = ViaCertificate { p: 1, delta: Word::empty() };
        assert_eq!(fatf_via_test(&psi, &cert, 10).unwrap(), FatfViaVerdict::Yes(2));
        let psi = fatf(id1.clone(), 1, vec![3]);
        assert!(matches!(fatf_via_test(&psi, &cert, 10).unwrap(), FatfViaVerdict::No(_)));
        let psi = fatf(id1, -1, vec![0]);
        assert_eq!(fatf_via_test(&psi, &cert, 10).unwrap(), FatfViaVerdict::Yes(2));
        let psi = FatfAutomorphism::new(swap(), vec![vec![1, 1], vec![0, 1]], vec![vec![0, 0]; 2]).unwrap();
        let cert2 = ViaCertificate { p: 2, delta: Word::empty() };
        assert!(matches!(fatf_via_test(&psi, &cert2, 10).unwrap(), FatfViaVerdict::No(_)));
    }

    #[test]
    fn fatf_power_is_iteration() {
        let psi = fatf(swap(), -1, vec![2, -1]);
        let x = FatfElement { a: vec![3], u: w("abA") };
        let mut cur = x.clone();
        for k in 1..=4 {
            cur = psi.apply(&cur);
            assert_eq!(fatf_power(&psi, k).unwrap().apply(&x), cur);
        }
        let p2 = fatf_power(&psi, 2).unwrap();
        let p3 = fatf_power(&psi, 3).unwrap();
        assert_eq!(p2.compose(&p3), fatf_power(&psi, 5).unwrap());
    }

    #[test]
    fn fnfm_examples() {
        let id = FreeAutomorphism::identity(2);
        let seven = FnFmAutomorphism::new(FnFmKind::Seven, id.clone(), id.clone()).unwrap();
        let inst = fnfm_twisted_reduce(&seven, &w("a"), &w("A"), &Word::empty(), &Word::empty());
        assert_eq!(inst.len(), 1);
        assert_eq!(inst[0].set, vec![Word::empty()]);
        assert_eq!(inst[0].target, Word::empty());
        let inst = fnfm_twisted_reduce(&seven, &w("a"), &w("a"), &Word::empty(), &Word::empty());
        assert_eq!(inst[0].set, vec![w("aa")]);
        let six = FnFmAutomorphism::new(FnFmKind::Six, id.clone(), id).unwrap();
        assert_eq!(fnfm_twisted_reduce(&six, &w("a"), &w("b"), &w("a"), &w("b")).len(), 2);
        let r1 = FnFmAutomorphism::new(FnFmKind::Seven, swap(), FreeAutomorphism::identity(1));
        assert!(r1.is_err());
    }

    #[test]
    fn fnfm_seven_reduction_round_trip() {
        let lambda = FreeAutomorphism::inner(2, &w("a"));
        let psi = FnFmAutomorphism::new(FnFmKind::Seven, swap(), lambda).unwrap();
        let words = ball(2, 2);
        for x in &words {
            for y in &words {
                for u in &words {
                    for v in &words {
                        let (z, wv) = psi.twisted_conj(x, y, u, v);
                        let inst = &fnfm_twisted_reduce(&psi, x, y, &z, &wv)[0];
                        assert_eq!(twisted_conj(&inst.phi, &inst.set[0], u), inst.target);
                        let (u2, v2) = fnfm_conjugator(&psi, y, &wv, std::slice::from_ref(u)).unwrap();
                        assert_eq!(psi.twisted_conj(x, y, &u2, &v2), (z.clone(), wv.clone()));
                    }
                }
            }
        }
    }

    #[test]
    fn via_brinkmann_examples() {
        let cert = ViaCertificate { p: 2, delta: Word::empty() };
        let inst = via_brinkmann_reduce(&swap(), &cert, &w("a")).unwrap();
        assert_eq!(inst, vec![w("b"), w("a")]);
        let id_inst = via_brinkmann_reduce(&FreeAutomorphism::identity(2), &ViaCertificate { p: 1, delta: Word::empty() }, &w("a")).unwrap();
        assert_eq!(id_inst, vec![w("a")]);
    }

    #[test]
    fn zeta_examples() {
        // φ = swap (order 2), P = (1, -1): Σ_{i=1}^2 (φ^ab)^{i-1} P = P + Pswap = 0
        let phi = swap();
        let p = vec![1, -1];
        let sep = fnxz_zeta_separator(true, &phi, 2, &p, 1, &w("a")).unwrap();
        let ZetaSeparator::Preserving { zeta, value, .. } = sep else {
            panic!()
        };
        for x in ball(2, 3) {
            let xp = dot(&x.abelianize(2).0, &p) as i64;
            assert_eq!(zeta.value(-xp, &twisted_conj(&phi, &Word::empty(), &x)), 0, "{x}");
        }
        let y = w("a");
        let tgt = twisted_conj(&phi, &Word::empty(), &y);
        assert_eq!(zeta.value(1, &tgt), value);
        assert_ne!(value, 0);
        assert!(fnxz_zeta_separator(true, &phi, 2, &p, -1, &w("a")).is_err());
        match fnxz_zeta_separator(false, &phi, 2, &[1, 0], 0, &w("a")).unwrap() {
            ZetaSeparator::Reversing { coset_rep, .. } => assert_eq!(coset_rep, w("a")),
            other => panic!("{other:?}"),
        }
    }
}
