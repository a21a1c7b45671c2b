//! Text formats: automorphism maps and the decision instance language.
//!
//! ```text
//! # comment
//! aut phi a->b b->a inverse a->b b->a
//! via phi p 2 delta 1
//! group free rank 2
//! set fin ab,ba
//! elem y BA
//! decide twisted target y aut phi
//! budget len 8 degree 6 steps 200000
//! ```
//!
//! Other group lines: `group fatf rank <n> dim <m>`, `group semidirect <aut>`,
//! `group gphi <aut> p <p> delta <word>`, `group extension <file>`. Other set
//! lines: `set coset gens <word>,… rep <word>`, `set rat <nfa-file>`.

use std::collections::HashMap;

use crate::automaton::Nfa;
use crate::engine::Budget;
use crate::error::{Error, Result};
use crate::extension::{ExtensionDatum, GPhi};
use crate::instance::{AutSpec, GroupSpec, Instance};
use crate::quotient::SetKind;
use crate::set::SetSpec;
use crate::word::{Alphabet, FreeAutomorphism, ViaCertificate, Word};

/// Parses `<gen>-><word> … [inverse <gen>-><word> …]`, requiring every
/// generator to be mapped exactly once on each side that is present.
pub fn parse_maps(
    tokens: &[&str],
    alphabet: &Alphabet,
    line: usize,
) -> Result<(Vec<Word>, Option<Vec<Word>>)> {
    let toks: Vec<Token> = tokens.iter().map(|t| Token { text: t, col: 1 }).collect();
    parse_map_tokens(&toks, alphabet, line)
}

#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

fn perr(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Re-anchors a word parse error to the token's position.
fn word_at(alphabet: &Alphabet, text: &str, line: usize, col: usize) -> Result<Word> {
    alphabet.parse(text).map_err(|e| match e {
        Error::Parse { column, message, .. } => perr(line, col + column - 1, message),
        other => other,
    })
}

fn parse_map_tokens(
    tokens: &[Token],
    alphabet: &Alphabet,
    line: usize,
) -> Result<(Vec<Word>, Option<Vec<Word>>)> {
    let split = tokens.iter().position(|t| t.text == "inverse");
    let (fwd, back) = match split {
        Some(i) => (&tokens[..i], Some(&tokens[i + 1..])),
        None => (tokens, None),
    };
    let fwd = parse_map_side(fwd, alphabet, line)?;
    let back = back.map(|b| parse_map_side(b, alphabet, line)).transpose()?;
    Ok((fwd, back))
}

fn parse_map_side(tokens: &[Token], alphabet: &Alphabet, line: usize) -> Result<Vec<Word>> {
    let end_col = tokens.last().map(|t| t.col).unwrap_or(1);
    let mut images: Vec<Option<Word>> = vec![None; alphabet.rank()];
    for t in tokens {
        let (g, w) = t
            .text
            .split_once("->")
            .ok_or_else(|| perr(line, t.col, format!("expected <gen>-><word>, got {:?}", t.text)))?;
        let mut chars = g.chars();
        let idx = match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_lowercase() => alphabet.names().iter().position(|&n| n == c),
            _ => None,
        };
        let Some(idx) = idx else {
            return Err(perr(line, t.col, format!("{g:?} is not a generator")));
        };
        if images[idx].is_some() {
            return Err(perr(line, t.col, format!("generator {g} mapped twice")));
        }
        images[idx] = Some(word_at(alphabet, w, line, t.col + g.len() + 2)?);
    }
    images
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            w.ok_or_else(|| perr(line, end_col, format!("generator {} has no image", alphabet.names()[i])))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupLine {
    Free { rank: usize },
    Fatf { rank: usize, dim: usize },
    Semidirect { aut: String },
    GPhi { aut: String, p: u32, delta: Word },
    Extension { path: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetLine {
    Fin(Vec<Word>),
    Coset { gens: Vec<Word>, rep: Word },
    Rat { path: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecideLine {
    pub kind: SetKind,
    pub target: String,
    pub aut: Option<String>,
}

/// A parsed instance file, with the contents of referenced files loaded.
#[derive(Clone, Debug)]
pub struct InstanceFile {
    pub auts: Vec<(String, FreeAutomorphism)>,
    pub vias: Vec<(String, ViaCertificate)>,
    pub group: GroupLine,
    pub set: Option<SetLine>,
    pub elems: Vec<(String, Word)>,
    pub decide: DecideLine,
    pub budget: Option<Budget>,
    extension: Option<ExtensionDatum>,
    nfa: Option<Nfa>,
}

impl PartialEq for InstanceFile {
    fn eq(&self, other: &Self) -> bool {
        self.auts == other.auts
            && self.vias == other.vias
            && self.group == other.group
            && self.set == other.set
            && self.elems == other.elems
            && self.decide == other.decide
            && self.budget == other.budget
    }
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..i],
                    col: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            col: line[..s].chars().count() + 1,
        });
    }
    out
}

struct Cursor<'a, 'b> {
    toks: &'b [Token<'a>],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl<'a, 'b> Cursor<'a, 'b> {
    fn next(&mut self, what: &str) -> Result<Token<'a>> {
        let t = self
            .toks
            .get(self.pos)
            .copied()
            .ok_or_else(|| perr(self.line, self.end_col, format!("expected {what}")))?;
        self.pos += 1;
        Ok(t)
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        let t = self.next(&format!("'{kw}'"))?;
        if t.text != kw {
            return Err(perr(self.line, t.col, format!("expected '{kw}', got {:?}", t.text)));
        }
        Ok(())
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T> {
        let t = self.next(what)?;
        t.text
            .parse()
            .map_err(|_| perr(self.line, t.col, format!("expected {what}, got {:?}", t.text)))
    }

    fn name(&mut self, what: &str) -> Result<Token<'a>> {
        let t = self.next(what)?;
        let ok = t.text.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && t.text.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !ok {
            return Err(perr(self.line, t.col, format!("{:?} is not a valid name", t.text)));
        }
        Ok(t)
    }

    fn rest(&self) -> &'b [Token<'a>] {
        &self.toks[self.pos..]
    }

    fn finish(&self) -> Result<()> {
        match self.toks.get(self.pos) {
            Some(t) => Err(perr(self.line, t.col, format!("unexpected {:?}", t.text))),
            None => Ok(()),
        }
    }
}

/// Comma-separated words spread over one or more tokens.
fn word_list(toks: &[Token], alphabet: &Alphabet, line: usize) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for t in toks {
        let mut offset = 0;
        for piece in t.text.split(',') {
            if !piece.is_empty() {
                out.push(word_at(alphabet, piece, line, t.col + offset)?);
            }
            offset += piece.chars().count() + 1;
        }
    }
    Ok(out)
}

impl InstanceFile {
    /// Parses instance text; `load` reads files named by `group extension`
    /// and `set rat` lines.
    pub fn parse(text: &str, load: &dyn Fn(&str) -> Result<String>) -> Result<Self> {
        let mut auts: Vec<(String, FreeAutomorphism)> = Vec::new();
        let mut vias: Vec<(String, ViaCertificate)> = Vec::new();
        let mut group: Option<(GroupLine, Alphabet)> = None;
        let mut extension = None;
        let mut set = None;
        let mut nfa = None;
        let mut elems: Vec<(String, Word)> = Vec::new();
        let mut decide = None;
        let mut budget = None;
        let mut last_line = 1;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("");
            let toks = tokenize(content);
            let Some(head) = toks.first() else {
                continue;
            };
            let end_col = content.trim_end().chars().count() + 1;
            let mut c = Cursor {
                toks: &toks,
                pos: 1,
                line,
                end_col,
            };
            let aut_index = |name: &Token, auts: &[(String, FreeAutomorphism)]| {
                auts.iter()
                    .position(|(n, _)| n == name.text)
                    .ok_or_else(|| perr(line, name.col, format!("undefined automorphism {:?}", name.text)))
            };
            let alphabet = |group: &Option<(GroupLine, Alphabet)>, col: usize| {
                group
                    .as_ref()
                    .map(|(_, a)| a.clone())
                    .ok_or_else(|| perr(line, col, "group must be declared first"))
            };
            match head.text {
                "aut" => {
                    let name = c.name("automorphism name")?;
                    if auts.iter().any(|(n, _)| n == name.text) {
                        return Err(perr(line, name.col, format!("automorphism {:?} redefined", name.text)));
                    }
                    let rest = c.rest();
                    let split = rest.iter().position(|t| t.text == "inverse").unwrap_or(rest.len());
                    if split == 0 {
                        return Err(perr(line, end_col, "automorphism needs generator images"));
                    }
                    let alpha = Alphabet::standard(split).map_err(|e| perr(line, name.col, e.to_string()))?;
                    let (fwd, back) = parse_map_tokens(rest, &alpha, line)?;
                    let map = FreeAutomorphism::new(fwd, back).map_err(|e| perr(line, head.col, e.to_string()))?;
                    if map.backward().is_some() && !map.verify() {
                        return Err(perr(line, head.col, "inverse map does not invert the automorphism"));
                    }
                    auts.push((name.text.to_string(), map));
                }
                "via" => {
                    let name = c.name("automorphism name")?;
                    let idx = aut_index(&name, &auts)?;
                    c.keyword("p")?;
                    let p: u32 = c.number("power p")?;
                    c.keyword("delta")?;
                    let d = c.next("delta word")?;
                    c.finish()?;
                    let alpha = Alphabet::standard(auts[idx].1.rank())?;
                    let delta = word_at(&alpha, d.text, line, d.col)?;
                    if p == 0 {
                        return Err(perr(line, head.col, "p must be positive"));
                    }
                    vias.push((name.text.to_string(), ViaCertificate { p, delta }));
                }
                "group" => {
                    if group.is_some() {
                        return Err(perr(line, head.col, "group declared twice"));
                    }
                    let kind = c.next("group type")?;
                    let (g, alpha) = match kind.text {
                        "free" => {
                            c.keyword("rank")?;
                            let rank = c.number("rank")?;
                            let a = Alphabet::standard(rank).map_err(|e| perr(line, kind.col, e.to_string()))?;
                            (GroupLine::Free { rank }, a)
                        }
                        "fatf" => {
                            c.keyword("rank")?;
                            let rank: usize = c.number("rank")?;
                            c.keyword("dim")?;
                            let dim: usize = c.number("dimension")?;
                            let a = Alphabet::standard(rank + dim).map_err(|e| perr(line, kind.col, e.to_string()))?;
                            if rank == 0 {
                                return Err(perr(line, kind.col, "fatf rank must be positive"));
                            }
                            (GroupLine::Fatf { rank, dim }, a)
                        }
                        "semidirect" => {
                            let name = c.name("automorphism name")?;
                            let idx = aut_index(&name, &auts)?;
                            let g = GroupLine::Semidirect {
                                aut: name.text.to_string(),
                            };
                            let a = torus(auts[idx].1.rank(), line, name.col)?;
                            (g, a)
                        }
                        "gphi" => {
                            let name = c.name("automorphism name")?;
                            let idx = aut_index(&name, &auts)?;
                            c.keyword("p")?;
                            let p: u32 = c.number("power p")?;
                            c.keyword("delta")?;
                            let d = c.next("delta word")?;
                            let fiber = Alphabet::standard(auts[idx].1.rank())?;
                            let delta = word_at(&fiber, d.text, line, d.col)?;
                            let a = torus(auts[idx].1.rank(), line, name.col)?;
                            (
                                GroupLine::GPhi {
                                    aut: name.text.to_string(),
                                    p,
                                    delta,
                                },
                                a,
                            )
                        }
                        "extension" => {
                            let path = c.next("datum file")?;
                            let text = load(path.text).map_err(|e| perr(line, path.col, e.to_string()))?;
                            let d = ExtensionDatum::parse(&text).map_err(|e| perr(line, path.col, format!("{}: {e}", path.text)))?;
                            let a = Alphabet::standard(d.ext_rank()).map_err(|e| perr(line, path.col, e.to_string()))?;
                            extension = Some(d);
                            (
                                GroupLine::Extension {
                                    path: path.text.to_string(),
                                },
                                a,
                            )
                        }
                        other => return Err(perr(line, kind.col, format!("unknown group type {other:?}"))),
                    };
                    c.finish()?;
                    group = Some((g, alpha));
                }
                "set" => {
                    if set.is_some() {
                        return Err(perr(line, head.col, "set declared twice"));
                    }
                    let alpha = alphabet(&group, head.col)?;
                    let kind = c.next("set type")?;
                    set = Some(match kind.text {
                        "fin" => SetLine::Fin(word_list(c.rest(), &alpha, line)?),
                        "coset" => {
                            c.keyword("gens")?;
                            let rest = c.rest();
                            let r = rest
                                .iter()
                                .position(|t| t.text == "rep")
                                .ok_or_else(|| perr(line, end_col, "expected 'rep'"))?;
                            let gens = word_list(&rest[..r], &alpha, line)?;
                            let rep_tok = rest
                                .get(r + 1)
                                .ok_or_else(|| perr(line, end_col, "expected representative word"))?;
                            if let Some(extra) = rest.get(r + 2) {
                                return Err(perr(line, extra.col, format!("unexpected {:?}", extra.text)));
                            }
                            SetLine::Coset {
                                gens,
                                rep: word_at(&alpha, rep_tok.text, line, rep_tok.col)?,
                            }
                        }
                        "rat" => {
                            let path = c.next("automaton file")?;
                            c.finish()?;
                            let text = load(path.text).map_err(|e| perr(line, path.col, e.to_string()))?;
                            let n = Nfa::parse(&text, &alpha).map_err(|e| perr(line, path.col, format!("{}: {e}", path.text)))?;
                            nfa = Some(n);
                            SetLine::Rat {
                                path: path.text.to_string(),
                            }
                        }
                        other => return Err(perr(line, kind.col, format!("unknown set type {other:?}"))),
                    });
                }
                "elem" => {
                    let alpha = alphabet(&group, head.col)?;
                    let name = c.name("element name")?;
                    if elems.iter().any(|(n, _)| n == name.text) {
                        return Err(perr(line, name.col, format!("element {:?} redefined", name.text)));
                    }
                    let w = c.next("word")?;
                    c.finish()?;
                    elems.push((name.text.to_string(), word_at(&alpha, w.text, line, w.col)?));
                }
                "decide" => {
                    if decide.is_some() {
                        return Err(perr(line, head.col, "decide declared twice"));
                    }
                    let k = c.next("set kind")?;
                    let kind = SetKind::from_name(k.text)
                        .filter(|_| k.text != "orbit")
                        .ok_or_else(|| perr(line, k.col, format!("unknown kind {:?}", k.text)))?;
                    c.keyword("target")?;
                    let target = c.name("target element")?;
                    if !elems.iter().any(|(n, _)| n == target.text) {
                        return Err(perr(line, target.col, format!("undefined element {:?}", target.text)));
                    }
                    let aut = if c.rest().is_empty() {
                        None
                    } else {
                        c.keyword("aut")?;
                        let name = c.name("automorphism name")?;
                        aut_index(&name, &auts)?;
                        Some(name.text.to_string())
                    };
                    c.finish()?;
                    decide = Some(DecideLine {
                        kind,
                        target: target.text.to_string(),
                        aut,
                    });
                }
                "budget" => {
                    c.keyword("len")?;
                    let max_len = c.number("length")?;
                    c.keyword("degree")?;
                    let max_degree = c.number("degree")?;
                    c.keyword("steps")?;
                    let max_steps = c.number("step count")?;
                    c.finish()?;
                    if max_len == 0 || max_degree == 0 || max_steps == 0 {
                        return Err(perr(line, head.col, "budget entries must be positive"));
                    }
                    budget = Some(Budget {
                        max_len,
                        max_degree,
                        max_steps,
                    });
                }
                other => return Err(perr(line, head.col, format!("unknown directive {other:?}"))),
            }
        }
        let (group, _) = group.ok_or_else(|| perr(last_line, 1, "missing group line"))?;
        let decide = decide.ok_or_else(|| perr(last_line, 1, "missing decide line"))?;
        Ok(InstanceFile {
            auts,
            vias,
            group,
            set,
            elems,
            decide,
            budget,
            extension,
            nfa,
        })
    }

    fn aut(&self, name: &str) -> Result<&FreeAutomorphism> {
        self.auts
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a)
            .ok_or_else(|| Error::Input(format!("undefined automorphism {name:?}")))
    }

    fn via(&self, name: &str) -> Option<&ViaCertificate> {
        self.vias.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn group_spec(&self) -> Result<GroupSpec> {
        Ok(match &self.group {
            GroupLine::Free { rank } => GroupSpec::Free { rank: *rank },
            GroupLine::Fatf { rank, dim } => GroupSpec::Fatf {
                rank: *rank,
                dim: *dim,
            },
            GroupLine::Semidirect { aut } => GroupSpec::Semidirect {
                phi: self.aut(aut)?.clone(),
                via: self.via(aut).cloned(),
            },
            GroupLine::GPhi { aut, p, delta } => GroupSpec::GPhi(GPhi::new(
                self.aut(aut)?.clone(),
                ViaCertificate {
                    p: *p,
                    delta: delta.clone(),
                },
            )?),
            GroupLine::Extension { .. } => {
                GroupSpec::Extension(self.extension.clone().expect("datum loaded at parse time"))
            }
        })
    }

    /// The decision instance described by the file. An absent set line
    /// means the empty finite set.
    pub fn instance(&self) -> Result<Instance> {
        let group = self.group_spec()?;
        let target = self
            .elems
            .iter()
            .find(|(n, _)| *n == self.decide.target)
            .map(|(_, w)| w.clone())
            .ok_or_else(|| Error::Input(format!("undefined element {:?}", self.decide.target)))?;
        let aut = match &self.decide.aut {
            Some(name) => {
                let map = self.aut(name)?.clone();
                let rank = group.alphabet()?.rank();
                if map.rank() != rank {
                    return Err(Error::Input(format!(
                        "automorphism {name:?} has rank {} but the group has {rank} generators",
                        map.rank()
                    )));
                }
                Some(AutSpec {
                    map,
                    via: self.via(name).cloned(),
                })
            }
            None => None,
        };
        let set = match &self.set {
            None => SetSpec::Fin(Vec::new()),
            Some(SetLine::Fin(v)) => SetSpec::Fin(v.clone()),
            Some(SetLine::Coset { gens, rep }) => SetSpec::Coset {
                gens: gens.clone(),
                rep: rep.clone(),
            },
            Some(SetLine::Rat { .. }) => SetSpec::Rat(self.nfa.clone().expect("automaton loaded at parse time")),
        };
        Ok(Instance {
            group,
            kind: self.decide.kind,
            aut,
            set,
            set_name: "K".into(),
            target,
            budget: self.budget.unwrap_or_default(),
        })
    }

    /// Canonical text: automorphisms, certificates, group, set, elements,
    /// decide and budget lines, in that order.
    pub fn print(&self) -> String {
        let mut out = String::new();
        let mut names: HashMap<&str, Alphabet> = HashMap::new();
        for (name, a) in &self.auts {
            let alpha = Alphabet::standard(a.rank()).expect("rank checked at parse time");
            let side = |ws: &[Word]| {
                ws.iter()
                    .enumerate()
                    .map(|(g, w)| format!("{}->{}", alpha.names()[g], alpha.format(w)))
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            out.push_str(&format!("aut {name} {}", side(a.forward())));
            if let Some(b) = a.backward() {
                out.push_str(&format!(" inverse {}", side(b)));
            }
            out.push('\n');
            names.insert(name, alpha);
        }
        for (name, v) in &self.vias {
            out.push_str(&format!("via {name} p {} delta {}\n", v.p, names[name.as_str()].format(&v.delta)));
        }
        let alpha = match &self.group {
            GroupLine::Free { rank } => {
                out.push_str(&format!("group free rank {rank}\n"));
                Alphabet::standard(*rank)
            }
            GroupLine::Fatf { rank, dim } => {
                out.push_str(&format!("group fatf rank {rank} dim {dim}\n"));
                Alphabet::standard(rank + dim)
            }
            GroupLine::Semidirect { aut } => {
                out.push_str(&format!("group semidirect {aut}\n"));
                torus(names[aut.as_str()].rank(), 0, 0)
            }
            GroupLine::GPhi { aut, p, delta } => {
                let fiber = &names[aut.as_str()];
                out.push_str(&format!("group gphi {aut} p {p} delta {}\n", fiber.format(delta)));
                torus(fiber.rank(), 0, 0)
            }
            GroupLine::Extension { path } => {
                out.push_str(&format!("group extension {path}\n"));
                Alphabet::standard(self.extension.as_ref().expect("datum loaded").ext_rank())
            }
        }
        .expect("alphabet checked at parse time");
        let list = |ws: &[Word]| ws.iter().map(|w| alpha.format(w)).collect::<Vec<_>>().join(",");
        match &self.set {
            Some(SetLine::Fin(v)) => out.push_str(&format!("set fin {}\n", list(v)).replace(" \n", "\n")),
            Some(SetLine::Coset { gens, rep }) => {
                out.push_str(&format!("set coset gens {} rep {}\n", list(gens), alpha.format(rep)))
            }
            Some(SetLine::Rat { path }) => out.push_str(&format!("set rat {path}\n")),
            None => {}
        }
        for (name, w) in &self.elems {
            out.push_str(&format!("elem {name} {}\n", alpha.format(w)));
        }
        out.push_str(&format!("decide {} target {}", self.decide.kind.name(), self.decide.target));
        if let Some(a) = &self.decide.aut {
            out.push_str(&format!(" aut {a}"));
        }
        out.push('\n');
        if let Some(b) = &self.budget {
            out.push_str(&format!("budget len {} degree {} steps {}\n", b.max_len, b.max_degree, b.max_steps));
        }
        out
    }
}

fn torus(n: usize, line: usize, col: usize) -> Result<Alphabet> {
    let mut names = Alphabet::standard(n)
        .map_err(|e| perr(line, col, e.to_string()))?
        .names()
        .to_vec();
    if names.contains(&'t') {
        return Err(perr(line, col, "fiber rank too large for the letter t"));
    }
    names.push('t');
    Alphabet::new(names)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_files(_: &str) -> Result<String> {
        Err(Error::Input("no files".into()))
    }

    const TWISTED: &str = "\
# swap-twisted conjugacy
aut phi a->b b->a inverse a->b b->a
via phi p 2 delta 1
group free rank 2
set fin ab,ba
elem y BA
decide twisted target y aut phi
budget len 6 degree 5 steps 1000
";

    #[test]
    fn round_trip() {
        let f = InstanceFile::parse(TWISTED, &no_files).unwrap();
        let printed = f.print();
        let g = InstanceFile::parse(&printed, &no_files).unwrap();
        assert_eq!(f, g);
        assert_eq!(g.print(), printed);
        let inst = f.instance().unwrap();
        assert_eq!(inst.budget.max_len, 6);
        assert!(inst.aut.unwrap().via.is_some());
    }

    #[test]
    fn empty_word_and_semidirect() {
        let text = "aut s a->b b->a inverse a->b b->a\ngroup semidirect s\nset fin ta\nelem y 1\ndecide conj target y\n";
        let f = InstanceFile::parse(text, &no_files).unwrap();
        assert_eq!(f.elems[0].1, Word::empty());
        assert_eq!(f.print(), text);
        assert!(matches!(f.instance().unwrap().group, GroupSpec::Semidirect { .. }));
    }

    fn error_at(text: &str) -> (usize, usize) {
        match InstanceFile::parse(text, &no_files) {
            Err(Error::Parse { line, column, .. }) => (line, column),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn positions_of_errors() {
        assert_eq!(error_at("group free rank 2\nelem x abz\ndecide conj target x\n"), (2, 10));
        assert_eq!(error_at("group free rank 2\nset fin ab,xb\n"), (2, 12));
        assert_eq!(error_at("group free rank 2\nelem x a\ndecide conj target y\n"), (3, 20));
        assert_eq!(error_at("group semidirect phi\n"), (1, 18));
        assert_eq!(error_at("elem x a\n"), (1, 1));
        assert_eq!(error_at("group free rank 2\nfrobnicate\n"), (2, 1));
        assert_eq!(error_at("aut f a->b b->q\n"), (1, 15));
    }

    #[test]
    fn files_are_loaded() {
        let load = |p: &str| -> Result<String> {
            match p {
                "k.nfa" => Ok("nfa states=1 initial=0 final=0\n0 a 0\n".into()),
                _ => Err(Error::Input(format!("missing {p}"))),
            }
        };
        let text = "group free rank 2\nset rat k.nfa\nelem y aaa\ndecide conj target y\n";
        let f = InstanceFile::parse(text, &load).unwrap();
        assert!(matches!(f.instance().unwrap().set, SetSpec::Rat(_)));
        assert_eq!(f.print(), text);
        assert!(InstanceFile::parse("group extension nope.ext\n", &load).is_err());
    }
}
