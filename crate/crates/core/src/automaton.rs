//! Stallings graphs of finitely generated subgroups of free groups, finite
//! index machinery, and automata for rational subsets.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::perm::{generated_group, Perm};
use crate::quotient::{HomEnumerator, Presentation};
use crate::word::{Alphabet, Letter, Word};

fn slot(l: Letter) -> usize {
    2 * l.index() + l.inv as usize
}

/// A folded core graph with basepoint `0`. States are numbered in
/// breadth-first order from the basepoint, following letters in shortlex
/// order, so two graphs of the same subgroup are identical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StallingsGraph {
    rank: usize,
    adj: Vec<Vec<Option<usize>>>,
}

/// Coset representatives `b_1 = 1, b_2, …` of a subgroup, one per state of
/// its Stallings graph, each the shortlex-least word reaching that state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transversal {
    pub reps: Vec<Word>,
}

impl StallingsGraph {
    /// The graph of `⟨gens⟩`.
    pub fn fold(rank: usize, gens: &[Word]) -> Self {
        let mut n = 1;
        let mut edges = Vec::new();
        for g in gens.iter().filter(|g| !g.is_empty()) {
            let letters = g.letters();
            let mut cur = 0;
            for (i, &l) in letters.iter().enumerate() {
                let next = if i + 1 == letters.len() {
                    0
                } else {
                    n += 1;
                    n - 1
                };
                edges.push(positive_edge(cur, l, next));
                cur = next;
            }
        }
        Self::from_edges(rank, n, &edges)
    }

    /// The whole free group: one state with a loop for every generator.
    pub fn full(rank: usize) -> Self {
        StallingsGraph {
            rank,
            adj: vec![(0..2 * rank).map(|_| Some(0)).collect()],
        }
    }

    /// Folds, trims and renumbers an arbitrary graph with positive edges
    /// `(source, generator, target)` and basepoint `0`.
    pub fn from_edges(rank: usize, states: usize, edges: &[(usize, usize, usize)]) -> Self {
        let mut parent: Vec<usize> = (0..states.max(1)).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        loop {
            let mut changed = false;
            let mut out: HashMap<(usize, usize), usize> = HashMap::new();
            let mut inn: HashMap<(usize, usize), usize> = HashMap::new();
            for &(p, g, q) in edges {
                let p = find(&mut parent, p);
                let q = find(&mut parent, q);
                if let Some(&q2) = out.get(&(p, g)) {
                    let q2 = find(&mut parent, q2);
                    if q2 != q {
                        parent[q2.max(q)] = q2.min(q);
                        changed = true;
                        continue;
                    }
                } else {
                    out.insert((p, g), q);
                }
                if let Some(&p2) = inn.get(&(q, g)) {
                    let p2 = find(&mut parent, p2);
                    if p2 != p {
                        parent[p2.max(p)] = p2.min(p);
                        changed = true;
                    }
                } else {
                    inn.insert((q, g), p);
                }
            }
            if !changed {
                break;
            }
        }
        let mut folded: HashSet<(usize, usize, usize)> = HashSet::new();
        for &(p, g, q) in edges {
            folded.insert((find(&mut parent, p), g, find(&mut parent, q)));
        }
        // trim hanging trees
        let mut alive: HashSet<(usize, usize, usize)> = folded;
        loop {
            let mut degree: HashMap<usize, usize> = HashMap::new();
            for &(p, _, q) in &alive {
                *degree.entry(p).or_default() += 1;
                *degree.entry(q).or_default() += 1;
            }
            let dead: HashSet<usize> = degree
                .iter()
                .filter(|&(&v, &d)| v != 0 && d <= 1)
                .map(|(&v, _)| v)
                .collect();
            if dead.is_empty() {
                break;
            }
            alive.retain(|(p, _, q)| !dead.contains(p) && !dead.contains(q));
        }
        let mut raw: HashMap<usize, Vec<Option<usize>>> = HashMap::new();
        raw.insert(0, vec![None; 2 * rank]);
        for &(p, g, q) in &alive {
            raw.entry(p).or_insert_with(|| vec![None; 2 * rank])[2 * g] = Some(q);
            raw.entry(q).or_insert_with(|| vec![None; 2 * rank])[2 * g + 1] = Some(p);
        }
        Self::canonical(rank, &raw)
    }

    fn canonical(rank: usize, raw: &HashMap<usize, Vec<Option<usize>>>) -> Self {
        let mut number: HashMap<usize, usize> = HashMap::new();
        let mut order = vec![0];
        number.insert(0, 0);
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            for s in 0..2 * rank {
                if let Some(t) = raw[&v][s] {
                    if let std::collections::hash_map::Entry::Vacant(e) = number.entry(t) {
                        e.insert(order.len());
                        order.push(t);
                    }
                }
            }
            i += 1;
        }
        let adj = order
            .iter()
            .map(|v| raw[v].iter().map(|t| t.map(|t| number[&t])).collect())
            .collect();
        StallingsGraph { rank, adj }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn states(&self) -> usize {
        self.adj.len()
    }

    pub fn target(&self, state: usize, l: Letter) -> Option<usize> {
        self.adj[state][slot(l)]
    }

    /// Positive edges `(source, generator, target)`.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (p, row) in self.adj.iter().enumerate() {
            for g in 0..self.rank {
                if let Some(q) = row[2 * g] {
                    out.push((p, g, q));
                }
            }
        }
        out
    }

    /// End state of the path reading `w` from `start`.
    pub fn read(&self, start: usize, w: &Word) -> Option<usize> {
        w.letters()
            .iter()
            .try_fold(start, |s, &l| self.target(s, l))
    }

    pub fn membership(&self, w: &Word) -> bool {
        self.read(0, w) == Some(0)
    }

    /// Shortlex-least access words of all states.
    pub fn access_words(&self) -> Vec<Word> {
        let mut words: Vec<Option<Word>> = vec![None; self.states()];
        words[0] = Some(Word::empty());
        let mut queue = VecDeque::from([0]);
        while let Some(v) = queue.pop_front() {
            for l in Letter::all(self.rank) {
                if let Some(t) = self.target(v, l) {
                    if words[t].is_none() {
                        words[t] = Some(words[v].as_ref().unwrap().mul(&Word::letter(l)));
                        queue.push_back(t);
                    }
                }
            }
        }
        words.into_iter().map(|w| w.expect("core graph is connected")).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.adj.iter().all(|row| row.iter().all(Option::is_some))
    }

    /// `(Some(m), reps)` for index `m`, or `(None, reps)` for infinite index,
    /// where `reps` are the access words of the graph's states.
    pub fn index_and_transversal(&self) -> (Option<usize>, Transversal) {
        let reps = self.access_words();
        let m = self.is_complete().then_some(self.states());
        (m, Transversal { reps })
    }

    /// The coset `H·w` as a state index, for finite index subgroups.
    pub fn coset_of(&self, w: &Word) -> Option<usize> {
        self.read(0, w)
    }

    /// The graph of `H_1 ∩ H_2`.
    pub fn intersect(&self, other: &StallingsGraph) -> StallingsGraph {
        assert_eq!(self.rank, other.rank, "rank mismatch");
        let mut number: HashMap<(usize, usize), usize> = HashMap::new();
        let mut order = vec![(0, 0)];
        number.insert((0, 0), 0);
        let mut edges = Vec::new();
        let mut i = 0;
        while i < order.len() {
            let (a, b) = order[i];
            for l in Letter::all(self.rank) {
                if let (Some(a2), Some(b2)) = (self.target(a, l), other.target(b, l)) {
                    let next = *number.entry((a2, b2)).or_insert_with(|| {
                        order.push((a2, b2));
                        order.len() - 1
                    });
                    if !l.inv {
                        edges.push((i, l.index(), next));
                    }
                }
            }
            i += 1;
        }
        StallingsGraph::from_edges(self.rank, order.len(), &edges)
    }

    /// Schreier generators `b_i · a · (rep of H b_i a)⁻¹`, nontrivial ones
    /// only, for a finite index subgroup.
    pub fn schreier_generators(&self) -> Result<Vec<Word>> {
        if !self.is_complete() {
            return Err(Error::Capability(
                "Schreier generators need a finite index subgroup".into(),
            ));
        }
        let reps = self.access_words();
        let mut out = Vec::new();
        let mut seen = HashSet::new();
        for (i, rep) in reps.iter().enumerate() {
            for g in 0..self.rank {
                let j = self.adj[i][2 * g].unwrap();
                let w = rep.mul(&Word::gen(g)).mul(&reps[j].inverse());
                if !w.is_empty() && seen.insert(w.clone()) {
                    out.push(w);
                }
            }
        }
        Ok(out)
    }

    /// Free generators read off a spanning tree; works for any index.
    pub fn generators(&self) -> Vec<Word> {
        let reps = self.access_words();
        let mut out = Vec::new();
        for (p, g, q) in self.edges() {
            let w = reps[p].mul(&Word::gen(g)).mul(&reps[q].inverse());
            if !w.is_empty() {
                out.push(w);
            }
        }
        out
    }

    /// The Cayley graph of the finite permutation group generated by
    /// `images` (as the graph of the kernel of `a_i ↦ images[i]`).
    pub fn kernel_graph(rank: usize, degree: usize, images: &[Perm], limit: usize) -> Option<Self> {
        let elements = generated_group(degree, images, limit)?;
        let index: HashMap<&Perm, usize> = elements.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut edges = Vec::new();
        for (i, e) in elements.iter().enumerate() {
            for (g, s) in images.iter().enumerate().take(rank) {
                edges.push((i, g, index[&e.mul(s)]));
            }
        }
        Some(StallingsGraph::from_edges(rank, elements.len(), &edges))
    }
}

fn positive_edge(p: usize, l: Letter, q: usize) -> (usize, usize, usize) {
    if l.inv {
        (q, l.index(), p)
    } else {
        (p, l.index(), q)
    }
}

/// The intersection of the kernels of all homomorphisms from `F_rank` onto
/// groups of order at most `m`. Every such group embeds in `Sym(m)`, so the
/// enumeration runs over homomorphisms to `Sym(m)` with small image.
pub fn fully_invariant_core(rank: usize, m: usize, max_states: usize) -> Result<(StallingsGraph, Transversal)> {
    if m > 8 {
        return Err(Error::Resource {
            what: format!("fully invariant core with bound {m}"),
            progress: "no homomorphisms enumerated; bound above 8".into(),
        });
    }
    let free = Presentation::free(rank);
    let mut core = StallingsGraph::full(rank);
    for (count, hom) in HomEnumerator::new(&free, m).enumerate() {
        let gens = core.schreier_generators()?;
        if gens.iter().all(|w| hom.eval(w).is_identity()) {
            continue;
        }
        let Some(kernel) = StallingsGraph::kernel_graph(rank, m, &hom.images, m + 1) else {
            continue;
        };
        core = core.intersect(&kernel);
        if core.states() > max_states {
            return Err(Error::Resource {
                what: format!("fully invariant core with bound {m}"),
                progress: format!(
                    "{count} homomorphisms processed, core index {}",
                    core.states()
                ),
            });
        }
    }
    let (_, t) = core.index_and_transversal();
    Ok((core, t))
}

/// A nondeterministic automaton over signed generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    pub rank: usize,
    pub states: usize,
    pub transitions: Vec<(usize, Letter, usize)>,
    pub initial: Vec<usize>,
    pub finals: Vec<usize>,
}

/// States past which image membership falls back to bounded search.
pub const BENOIS_STATE_BUDGET: usize = 400;

impl Nfa {
    pub fn new(
        rank: usize,
        states: usize,
        transitions: Vec<(usize, Letter, usize)>,
        initial: Vec<usize>,
        finals: Vec<usize>,
    ) -> Result<Self> {
        let ok = transitions
            .iter()
            .all(|&(p, l, q)| p < states && q < states && l.index() < rank)
            && initial.iter().chain(&finals).all(|&s| s < states);
        if !ok {
            return Err(Error::Input("automaton refers to unknown states or letters".into()));
        }
        Ok(Nfa {
            rank,
            states,
            transitions,
            initial,
            finals,
        })
    }

    /// Accepts exactly the given words.
    pub fn from_words(rank: usize, words: &[Word]) -> Self {
        let mut states = 1;
        let mut transitions = Vec::new();
        let mut finals = Vec::new();
        for w in words {
            let mut cur = 0;
            for &l in w.letters() {
                transitions.push((cur, l, states));
                cur = states;
                states += 1;
            }
            finals.push(cur);
        }
        finals.sort_unstable();
        finals.dedup();
        Nfa {
            rank,
            states,
            transitions,
            initial: vec![0],
            finals,
        }
    }

    /// Loop language of a Stallings graph, i.e. the subgroup itself.
    pub fn from_stallings(g: &StallingsGraph) -> Self {
        let mut transitions = Vec::new();
        for (p, gen, q) in g.edges() {
            transitions.push((p, Letter::pos(gen), q));
            transitions.push((q, Letter::neg(gen), p));
        }
        Nfa {
            rank: g.rank(),
            states: g.states(),
            transitions,
            initial: vec![0],
            finals: vec![0],
        }
    }

    /// The set `r·K` (left) or `K·r` (right).
    pub fn translate(&self, r: &Word, left: bool) -> Nfa {
        let mut out = self.clone();
        let letters = r.letters();
        let n = letters.len();
        if n == 0 {
            return out;
        }
        let base = out.states;
        out.states += n;
        if left {
            for i in 0..n - 1 {
                out.transitions.push((base + i, letters[i], base + i + 1));
            }
            for &i in &self.initial {
                out.transitions.push((base + n - 1, letters[n - 1], i));
            }
            out.initial = vec![base];
        } else {
            for &f in &self.finals {
                out.transitions.push((f, letters[0], base));
            }
            for i in 1..n {
                out.transitions.push((base + i - 1, letters[i], base + i));
            }
            out.finals = vec![base + n - 1];
        }
        out
    }

    pub fn union(&self, other: &Nfa) -> Nfa {
        let shift = self.states;
        let mut transitions = self.transitions.clone();
        transitions.extend(other.transitions.iter().map(|&(p, l, q)| (p + shift, l, q + shift)));
        Nfa {
            rank: self.rank.max(other.rank),
            states: self.states + other.states,
            transitions,
            initial: self
                .initial
                .iter()
                .copied()
                .chain(other.initial.iter().map(|i| i + shift))
                .collect(),
            finals: self
                .finals
                .iter()
                .copied()
                .chain(other.finals.iter().map(|i| i + shift))
                .collect(),
        }
    }

    /// Applies a letter-to-word substitution; `images[g]` is the image of
    /// the positive letter of generator `g` over an alphabet of `rank`.
    pub fn substitute(&self, images: &[Word], rank: usize) -> Nfa {
        let mut out = Nfa {
            rank,
            states: self.states,
            transitions: Vec::new(),
            initial: self.initial.clone(),
            finals: self.finals.clone(),
        };
        let mut eps = Vec::new();
        for &(p, l, q) in &self.transitions {
            let w = if l.inv {
                images[l.index()].inverse()
            } else {
                images[l.index()].clone()
            };
            out.add_path(p, &w, q, &mut eps);
        }
        out.remove_epsilons(&eps)
    }

    fn add_path(&mut self, p: usize, w: &Word, q: usize, eps: &mut Vec<(usize, usize)>) {
        let letters = w.letters();
        if letters.is_empty() {
            eps.push((p, q));
            return;
        }
        let mut cur = p;
        for (i, &l) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() {
                q
            } else {
                self.states += 1;
                self.states - 1
            };
            self.transitions.push((cur, l, next));
            cur = next;
        }
    }

    fn remove_epsilons(mut self, eps: &[(usize, usize)]) -> Nfa {
        if eps.is_empty() {
            return self;
        }
        let closure = closure_of(self.states, eps);
        let mut transitions = HashSet::new();
        for &(p, l, q) in &self.transitions {
            for &p0 in &closure.reverse[p] {
                transitions.insert((p0, l, q));
            }
        }
        let mut finals: HashSet<usize> = HashSet::new();
        for s in 0..self.states {
            if closure.forward[s].iter().any(|t| self.finals.contains(t)) {
                finals.insert(s);
            }
        }
        let mut transitions: Vec<_> = transitions.into_iter().collect();
        transitions.sort_unstable();
        let mut finals: Vec<_> = finals.into_iter().collect();
        finals.sort_unstable();
        self.transitions = transitions;
        self.finals = finals;
        self
    }

    /// All reduced words of the image set up to length `max_len`, obtained
    /// by reading accepted words of length at most `2 * max_len + states`.
    pub fn accepted_reduced(&self, max_len: usize, max_words: usize) -> Vec<Word> {
        let path_bound = 2 * max_len + self.states;
        let mut by_state: Vec<Vec<(Letter, usize)>> = vec![Vec::new(); self.states];
        for &(p, l, q) in &self.transitions {
            by_state[p].push((l, q));
        }
        let finals: HashSet<usize> = self.finals.iter().copied().collect();
        let mut seen: HashSet<(usize, Word)> = HashSet::new();
        let mut out: HashSet<Word> = HashSet::new();
        let mut frontier: Vec<(usize, Word)> = Vec::new();
        for &i in &self.initial {
            if seen.insert((i, Word::empty())) {
                frontier.push((i, Word::empty()));
            }
        }
        for _ in 0..=path_bound {
            let mut next = Vec::new();
            for (s, w) in &frontier {
                if finals.contains(s) && w.len() <= max_len {
                    out.insert(w.clone());
                }
                for &(l, q) in &by_state[*s] {
                    let w2 = w.mul(&Word::letter(l));
                    if w2.len() > max_len + self.states {
                        continue;
                    }
                    if seen.insert((q, w2.clone())) {
                        next.push((q, w2));
                    }
                }
                if seen.len() > max_words {
                    break;
                }
            }
            frontier = next;
            if frontier.is_empty() || seen.len() > max_words {
                break;
            }
        }
        let mut out: Vec<Word> = out.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// ε-edges added by the reduction closure: `p ⇝ q` whenever the
    /// automaton reads a word freely equal to the empty word from `p` to `q`.
    fn saturate(&self) -> Vec<Vec<bool>> {
        let n = self.states;
        let mut eps = vec![vec![false; n]; n];
        for (i, row) in eps.iter_mut().enumerate() {
            row[i] = true;
        }
        let mut by_letter: HashMap<Letter, Vec<(usize, usize)>> = HashMap::new();
        for &(p, l, q) in &self.transitions {
            by_letter.entry(l).or_default().push((p, q));
        }
        loop {
            let mut changed = false;
            for &(p, l, p2) in &self.transitions {
                let Some(back) = by_letter.get(&l.inverse()) else {
                    continue;
                };
                for &(q2, q) in back {
                    if eps[p2][q2] && !eps[p][q] {
                        eps[p][q] = true;
                        changed = true;
                    }
                }
            }
            // transitive closure
            for k in 0..n {
                for i in 0..n {
                    if eps[i][k] {
                        for j in 0..n {
                            if eps[k][j] && !eps[i][j] {
                                eps[i][j] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                return eps;
            }
        }
    }

    /// Exact membership of `w` in the image of the accepted language.
    pub fn image_contains(&self, w: &Word) -> bool {
        let eps = self.saturate();
        let n = self.states;
        let close = |set: &[bool]| -> Vec<bool> {
            let mut out = vec![false; n];
            for (i, &on) in set.iter().enumerate() {
                if on {
                    for j in 0..n {
                        out[j] |= eps[i][j];
                    }
                }
            }
            out
        };
        let mut cur = vec![false; n];
        for &i in &self.initial {
            cur[i] = true;
        }
        cur = close(&cur);
        for &l in w.letters() {
            let mut next = vec![false; n];
            for &(p, l2, q) in &self.transitions {
                if l2 == l && cur[p] {
                    next[q] = true;
                }
            }
            cur = close(&next);
        }
        self.finals.iter().any(|&f| cur[f])
    }

    /// Image membership with exact rewriting up to `state_budget` states and
    /// bounded search (words of length up to `max_len`) beyond. The bounded
    /// search can only answer positively; `None` means undetermined.
    pub fn image_contains_budgeted(&self, w: &Word, state_budget: usize, max_len: usize) -> Option<bool> {
        if self.states <= state_budget {
            return Some(self.image_contains(w));
        }
        if self.accepted_reduced(max_len.max(w.len()), 1_000_000).contains(w) {
            Some(true)
        } else {
            None
        }
    }

    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Nfa> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let perr = |line: usize, column: usize, message: String| Error::Parse {
            line,
            column,
            message,
        };
        let (hline, header) = lines
            .next()
            .ok_or_else(|| perr(1, 1, "missing nfa header".into()))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("nfa") {
            return Err(perr(hline, 1, "header must start with 'nfa'".into()));
        }
        let mut states = None;
        let mut initial = None;
        let mut finals = None;
        for f in fields {
            let column = header.find(f).unwrap_or(0) + 1;
            let (key, value) = f
                .split_once('=')
                .ok_or_else(|| perr(hline, column, format!("expected key=value, got {f:?}")))?;
            let list = || -> Result<Vec<usize>> {
                if value.is_empty() {
                    return Ok(Vec::new());
                }
                value
                    .split(',')
                    .map(|v| {
                        v.parse::<usize>()
                            .map_err(|_| perr(hline, column, format!("bad state {v:?}")))
                    })
                    .collect()
            };
            match key {
                "states" => {
                    states = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| perr(hline, column, "bad state count".into()))?,
                    )
                }
                "initial" => initial = Some(list()?),
                "final" => finals = Some(list()?),
                _ => return Err(perr(hline, column, format!("unknown field {key:?}"))),
            }
        }
        let states = states.ok_or_else(|| perr(hline, 1, "missing states=".into()))?;
        let initial = initial.ok_or_else(|| perr(hline, 1, "missing initial=".into()))?;
        let finals = finals.ok_or_else(|| perr(hline, 1, "missing final=".into()))?;
        let mut transitions = Vec::new();
        for (ln, line) in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(perr(ln, 1, "expected '<src> <letter> <dst>'".into()));
            }
            let src = parts[0]
                .parse::<usize>()
                .map_err(|_| perr(ln, 1, format!("bad state {:?}", parts[0])))?;
            let col = line.find(parts[1]).unwrap_or(0) + 1;
            let w = alphabet.parse(parts[1]).map_err(|_| perr(ln, col, format!("bad letter {:?}", parts[1])))?;
            if w.len() != 1 || parts[1].chars().count() != 1 {
                return Err(perr(ln, col, format!("expected one letter, got {:?}", parts[1])));
            }
            let dst = parts[2]
                .parse::<usize>()
                .map_err(|_| perr(ln, line.rfind(parts[2]).unwrap_or(0) + 1, format!("bad state {:?}", parts[2])))?;
            transitions.push((src, w.letters()[0], dst));
        }
        Nfa::new(alphabet.rank(), states, transitions, initial, finals)
    }

    pub fn format(&self, alphabet: &Alphabet) -> String {
        let join = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut out = format!(
            "nfa states={} initial={} final={}\n",
            self.states,
            join(&self.initial),
            join(&self.finals)
        );
        for &(p, l, q) in &self.transitions {
            let _ = writeln!(out, "{p} {} {q}", alphabet.format(&Word::letter(l)));
        }
        out
    }
}

struct Closure {
    forward: Vec<Vec<usize>>,
    reverse: Vec<Vec<usize>>,
}

fn closure_of(n: usize, eps: &[(usize, usize)]) -> Closure {
    let mut adj = vec![Vec::new(); n];
    for &(p, q) in eps {
        adj[p].push(q);
    }
    let mut forward = vec![Vec::new(); n];
    let mut reverse = vec![Vec::new(); n];
    for s in 0..n {
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            forward[s].push(v);
            reverse[v].push(s);
            for &t in &adj[v] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
    }
    Closure { forward, reverse }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::ball;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn fold_examples() {
        let g = StallingsGraph::fold(2, &[w("a")]);
        assert_eq!(g.states(), 1);
        assert_eq!(g.edges(), vec![(0, 0, 0)]);
        let g = StallingsGraph::fold(2, &[w("aa"), w("b")]);
        assert!(!g.membership(&w("a")));
        assert!(g.membership(&w("aab")));
        let g = StallingsGraph::fold(2, &[w("a"), w("b")]);
        assert!(ball(2, 4).iter().all(|x| g.membership(x)));
        assert_eq!(g, StallingsGraph::full(2));
    }

    #[test]
    fn index_examples() {
        let g = StallingsGraph::fold(2, &[w("aa"), w("b"), w("abA")]);
        let (m, t) = g.index_and_transversal();
        assert_eq!(m, Some(2));
        assert_eq!(t.reps, vec![Word::empty(), w("a")]);
        assert_eq!(StallingsGraph::full(2).index_and_transversal().0, Some(1));
        assert_eq!(StallingsGraph::fold(2, &[w("a")]).index_and_transversal().0, None);
    }

    #[test]
    fn intersect_examples() {
        let a = StallingsGraph::fold(2, &[w("a")]);
        let b = StallingsGraph::fold(2, &[w("b")]);
        let i = a.intersect(&b);
        assert_eq!(i.states(), 1);
        assert!(i.edges().is_empty());
        let h = StallingsGraph::fold(2, &[w("aa"), w("bab")]);
        assert_eq!(h.intersect(&StallingsGraph::full(2)), h);
        let x = StallingsGraph::fold(2, &[w("aa"), w("b")]).intersect(&StallingsGraph::fold(2, &[w("aaa"), w("b")]));
        assert!(x.membership(&w("aaaaaa")));
        assert!(!x.membership(&w("aa")));
    }

    #[test]
    fn schreier_examples() {
        let full = StallingsGraph::full(2);
        assert_eq!(full.schreier_generators().unwrap(), vec![w("a"), w("b")]);
        let g = StallingsGraph::fold(2, &[w("aa"), w("b"), w("abA")]);
        let gens = g.schreier_generators().unwrap();
        for x in ["aa", "b", "abA"] {
            assert!(gens.contains(&w(x)), "{x}");
        }
        assert!(gens.len() <= 4);
        assert!(StallingsGraph::fold(2, &[w("a")]).schreier_generators().is_err());
    }

    #[test]
    fn core_examples() {
        let (core, t) = fully_invariant_core(2, 2, 1000).unwrap();
        assert_eq!(t.reps.len(), 4);
        assert!(core.is_complete());
        let (core1, _) = fully_invariant_core(3, 1, 1000).unwrap();
        assert_eq!(core1, StallingsGraph::full(3));
        let swap = [w("b"), w("a")];
        for g in core.schreier_generators().unwrap() {
            assert!(core.membership(&g.substitute(&swap)));
        }
    }

    #[test]
    fn nfa_examples() {
        let one = Nfa::from_words(2, &[Word::empty()]);
        let ta = one.translate(&w("a"), false);
        assert!(ta.image_contains(&w("a")));
        assert!(!ta.image_contains(&Word::empty()));
        let u = Nfa::from_words(2, &[w("a")]).union(&Nfa::from_words(2, &[w("b")]));
        assert!(u.image_contains(&w("a")) && u.image_contains(&w("b")));
        assert!(!u.image_contains(&w("ab")));
        let h = StallingsGraph::fold(2, &[w("aa"), w("b")]);
        let k = Nfa::from_stallings(&h).translate(&w("B"), true);
        for x in ball(2, 4) {
            assert_eq!(k.image_contains(&x), h.membership(&w("b").mul(&x)), "{x}");
        }
        let kr = Nfa::from_stallings(&h).translate(&w("ab"), false);
        for x in ball(2, 4) {
            assert_eq!(kr.image_contains(&x), h.membership(&x.mul(&w("BA"))), "{x}");
        }
    }

    #[test]
    fn benois_handles_cancellation() {
        // language a·(bB)*·A: image {1}
        let n = Nfa::new(
            2,
            3,
            vec![
                (0, Letter::pos(0), 1),
                (1, Letter::pos(1), 2),
                (2, Letter::neg(1), 1),
                (1, Letter::neg(0), 0),
            ],
            vec![0],
            vec![0],
        )
        .unwrap();
        assert!(n.image_contains(&Word::empty()));
        assert!(!n.image_contains(&w("b")));
        assert_eq!(n.accepted_reduced(3, 1000), vec![Word::empty()]);
    }

    #[test]
    fn nfa_text_round_trip() {
        let alpha = Alphabet::standard(2).unwrap();
        let text = "nfa states=2 initial=0 final=1\n0 a 1\n1 B 1\n";
        let n = Nfa::parse(text, &alpha).unwrap();
        assert_eq!(n.format(&alpha), text);
        assert!(n.image_contains(&w("aBB")));
        match Nfa::parse("nfa states=2 initial=0 final=1\n0 x 1\n", &alpha) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 3)),
            other => panic!("{other:?}"),
        }
        assert!(Nfa::parse("nfa states=1 initial=0 final=3\n", &alpha).is_err());
    }

    #[test]
    fn substitute_maps_language() {
        let n = Nfa::from_words(2, &[w("ab")]);
        let m = n.substitute(&[w("b"), Word::empty()], 2);
        assert!(m.image_contains(&w("b")));
        assert!(!m.image_contains(&w("ab")));
    }
}
