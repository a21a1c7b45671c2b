//! Permutations of `{0, …, k-1}` acting on the right.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// `p.images()[i]` is the image of point `i`. Products compose left to
/// right: `i · (pq) = (i · p) · q`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm(Vec<u16>);

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm((0..degree as u16).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::Input(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Perm(images.into_iter().map(|i| i as u16).collect()))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn mul(&self, other: &Perm) -> Perm {
        Perm(self.0.iter().map(|&i| other.0[i as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut out = vec![0u16; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            out[j as usize] = i as u16;
        }
        Perm(out)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j as usize)
    }

    /// `q⁻¹ p q`.
    pub fn conj(&self, q: &Perm) -> Perm {
        q.inverse().mul(self).mul(q)
    }

    pub fn pow(&self, k: i64) -> Perm {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Perm::identity(self.degree());
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// Direct sum acting on the disjoint union of both point sets.
    pub fn direct_sum(&self, other: &Perm) -> Perm {
        let shift = self.0.len() as u16;
        let mut v = self.0.clone();
        v.extend(other.0.iter().map(|&i| i + shift));
        Perm(v)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut j = self.image(start);
            while j != start {
                seen[j] = true;
                cyc.push(j);
                j = self.image(j);
            }
            if cyc.len() > 1 {
                out.push(cyc);
            }
        }
        out
    }

    /// Sorted cycle lengths, fixed points included.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        let moved: usize = t.iter().sum();
        t.extend(std::iter::repeat_n(1, self.degree() - moved));
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    pub fn order(&self) -> u64 {
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles()
            .iter()
            .fold(1u64, |acc, c| acc / gcd(acc, c.len() as u64) * c.len() as u64)
    }

    /// One-line cycle notation with 1-based points, e.g. `(1 2)(3 4 5)`;
    /// the identity is `()`.
    pub fn to_cycle_string(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".into();
        }
        cycles
            .iter()
            .map(|c| {
                let inner: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
                format!("({})", inner.join(" "))
            })
            .collect()
    }

    pub fn parse_cycles(text: &str, degree: usize) -> Result<Perm> {
        let mut images: Vec<usize> = (0..degree).collect();
        let mut seen = vec![false; degree];
        let bad = |m: &str| Error::Input(format!("bad cycle notation {text:?}: {m}"));
        let mut rest = text.trim();
        while !rest.is_empty() {
            if !rest.starts_with('(') {
                return Err(bad("expected '('"));
            }
            let close = rest.find(')').ok_or_else(|| bad("unclosed cycle"))?;
            let pts: Vec<usize> = rest[1..close]
                .split_whitespace()
                .map(|s| s.parse::<usize>().map_err(|_| bad("not a number")))
                .collect::<Result<_>>()?;
            for &p in &pts {
                if p == 0 || p > degree || seen[p - 1] {
                    return Err(bad("point out of range or repeated"));
                }
                seen[p - 1] = true;
            }
            for (i, &p) in pts.iter().enumerate() {
                images[p - 1] = pts[(i + 1) % pts.len()] - 1;
            }
            rest = rest[close + 1..].trim_start();
        }
        Perm::from_images(images)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycle_string())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_cycle_string())
    }
}

/// All permutations of the given degree in lexicographic order of their image
/// arrays. Cached per degree.
pub fn all_perms(degree: usize) -> Arc<Vec<Perm>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Perm>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&degree) {
        return v.clone();
    }
    let mut out = Vec::new();
    let mut cur: Vec<u16> = (0..degree as u16).collect();
    loop {
        out.push(Perm(cur.clone()));
        // next lexicographic permutation
        let Some(i) = (0..degree.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..degree).rev().find(|&j| cur[j] > cur[i]).unwrap();
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    let out = Arc::new(out);
    cache.lock().unwrap().insert(degree, out.clone());
    out
}

/// The lexicographically least permutation of each cycle type, in
/// lexicographic order.
pub fn class_representatives(degree: usize) -> Arc<Vec<Perm>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Perm>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&degree) {
        return v.clone();
    }
    let mut seen = HashSet::new();
    let reps: Vec<Perm> = all_perms(degree)
        .iter()
        .filter(|p| seen.insert(p.cycle_type()))
        .cloned()
        .collect();
    let reps = Arc::new(reps);
    cache.lock().unwrap().insert(degree, reps.clone());
    reps
}

/// Elements of the group generated by `gens`, in breadth-first order from
/// the identity. Returns `None` if the group exceeds `limit` elements.
pub fn generated_group(degree: usize, gens: &[Perm], limit: usize) -> Option<Vec<Perm>> {
    let id = Perm::identity(degree);
    let mut seen: HashSet<Perm> = HashSet::new();
    let mut order = vec![id.clone()];
    seen.insert(id.clone());
    let mut queue = VecDeque::from([id]);
    while let Some(g) = queue.pop_front() {
        for s in gens {
            let h = g.mul(s);
            if seen.insert(h.clone()) {
                if order.len() >= limit {
                    return None;
                }
                order.push(h.clone());
                queue.push_back(h);
            }
        }
    }
    Some(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(all_perms(3).len(), 6);
        assert_eq!(all_perms(4).len(), 24);
        // partitions of 5 and 7
        assert_eq!(class_representatives(5).len(), 7);
        assert_eq!(class_representatives(7).len(), 15);
        assert!(all_perms(4).windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cycle_notation_round_trip() {
        let p = Perm::parse_cycles("(1 2)(3 4 5)", 5).unwrap();
        assert_eq!(p.to_cycle_string(), "(1 2)(3 4 5)");
        assert_eq!(p.order(), 6);
        assert_eq!(Perm::parse_cycles("()", 3).unwrap(), Perm::identity(3));
        assert!(Perm::parse_cycles("(1 1)", 3).is_err());
        assert!(Perm::parse_cycles("(1 4)", 3).is_err());
    }

    #[test]
    fn right_action() {
        let a = Perm::parse_cycles("(1 2)", 3).unwrap();
        let b = Perm::parse_cycles("(2 3)", 3).unwrap();
        // 1 -a-> 2 -b-> 3
        assert_eq!(a.mul(&b).image(0), 2);
        assert!(a.mul(&a.inverse()).is_identity());
        assert_eq!(generated_group(3, &[a, b], 100).unwrap().len(), 6);
    }
}
