//! Finitely described subsets of a group.

use crate::automaton::Nfa;

/// `K`: a finite list, a coset `⟨gens⟩·rep`, or the image of a rational
/// language over the group's generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetSpec<E> {
    Fin(Vec<E>),
    Coset { gens: Vec<E>, rep: E },
    Rat(Nfa),
}

impl<E> SetSpec<E> {
    pub fn map<F>(&self, f: impl Fn(&E) -> F) -> SetSpec<F> {
        match self {
            SetSpec::Fin(v) => SetSpec::Fin(v.iter().map(&f).collect()),
            SetSpec::Coset { gens, rep } => SetSpec::Coset {
                gens: gens.iter().map(&f).collect(),
                rep: f(rep),
            },
            SetSpec::Rat(n) => SetSpec::Rat(n.clone()),
        }
    }

    pub fn is_empty_fin(&self) -> bool {
        matches!(self, SetSpec::Fin(v) if v.is_empty())
    }
}
