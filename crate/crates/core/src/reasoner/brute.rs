//! Exhaustive finite-model search, used as an independent oracle for the
//! tableau. It evaluates class expressions directly on interpretations and
//! shares no code with the tableau or with `normalize`.

use std::collections::BTreeSet;

use crate::dl::{ABox, Axiom, ClassExpr};
use crate::rdf::{Iri, Term};

use super::{KnowledgeBase, ReasonerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    /// No model with at most the given number of elements.
    UnsatUpToBound,
}

/// A finite interpretation over `0..size`; class extensions and role
/// relations as bitmasks.
#[derive(Debug, Clone)]
pub struct Interpretation {
    pub size: usize,
    pub classes: Vec<(Iri, u32)>,
    /// Bit `x * size + y` set iff `(x, y)` is in the relation.
    pub roles: Vec<(String, u32)>,
}

impl Interpretation {
    fn class(&self, c: &Iri) -> u32 {
        self.classes.iter().find(|(n, _)| n == c).map_or(0, |(_, m)| *m)
    }

    fn role(&self, r: &str) -> u32 {
        self.roles.iter().find(|(n, _)| n == r).map_or(0, |(_, m)| *m)
    }

    fn has_edge(&self, rel: u32, x: usize, y: usize) -> bool {
        rel >> (x * self.size + y) & 1 == 1
    }

    fn all(&self) -> u32 {
        (1u32 << self.size) - 1
    }

    /// Extension of `e` as a bitmask over the domain.
    pub fn extension(&self, e: &ClassExpr) -> u32 {
        match e {
            ClassExpr::Top => self.all(),
            ClassExpr::Bottom => 0,
            ClassExpr::Named(i) => self.class(i),
            ClassExpr::Not(x) => !self.extension(x) & self.all(),
            ClassExpr::And(v) => v.iter().fold(self.all(), |m, x| m & self.extension(x)),
            ClassExpr::Or(v) => v.iter().fold(0, |m, x| m | self.extension(x)),
            ClassExpr::Exists(r, f) | ClassExpr::Forall(r, f) => {
                let rel = self.role(&r.name);
                let filler = self.extension(f);
                let forall = matches!(e, ClassExpr::Forall(..));
                let mut out = 0;
                for x in 0..self.size {
                    let mut any = false;
                    let mut every = true;
                    for y in 0..self.size {
                        let linked = if r.inverse { self.has_edge(rel, y, x) } else { self.has_edge(rel, x, y) };
                        if linked {
                            let inside = filler >> y & 1 == 1;
                            any |= inside;
                            every &= inside;
                        }
                    }
                    if (forall && every) || (!forall && any) {
                        out |= 1 << x;
                    }
                }
                out
            }
        }
    }

    pub fn satisfies_axiom(&self, ax: &Axiom) -> bool {
        match ax {
            Axiom::SubClass(a, b) => self.extension(a) & !self.extension(b) == 0,
            Axiom::Equivalent(a, b) => self.extension(a) == self.extension(b),
            Axiom::Disjoint(a, b) => self.extension(a) & self.extension(b) == 0,
            Axiom::SubProperty(a, b) => self.role(a) & !self.role(b) == 0,
            Axiom::Domain(r, c) => {
                let ext = self.extension(c);
                let rel = self.role(r);
                (0..self.size).all(|x| (0..self.size).all(|y| !self.has_edge(rel, x, y) || ext >> x & 1 == 1))
            }
            Axiom::Range(r, c) => {
                let ext = self.extension(c);
                let rel = self.role(r);
                (0..self.size).all(|x| (0..self.size).all(|y| !self.has_edge(rel, x, y) || ext >> y & 1 == 1))
            }
        }
    }

    fn satisfies_abox(&self, abox: &ABox, inds: &[Term], map: &[usize]) -> bool {
        let at = |t: &Term| map[inds.iter().position(|i| i == t).expect("declared individual")];
        abox.types.iter().all(|(t, c)| self.extension(c) >> at(t) & 1 == 1)
            && abox.roles.iter().all(|(s, r, o)| self.has_edge(self.role(r), at(s), at(o)))
    }
}

/// Enumerates every interpretation with 1..=`max_domain` elements (at most
/// 4). Fails once more than `node_limit` candidate interpretations would be
/// examined.
pub fn brute_force_consistent(kb: &KnowledgeBase, max_domain: usize, node_limit: u64) -> Result<Verdict, ReasonerError> {
    assert!((1..=4).contains(&max_domain), "max_domain must be in 1..=4");
    let mut classes: BTreeSet<Iri> = BTreeSet::new();
    let mut roles: BTreeSet<String> = BTreeSet::new();
    for ax in &kb.tbox {
        classes.extend(ax.classes());
        roles.extend(ax.roles());
    }
    for (_, c) in &kb.abox.types {
        c.classes(&mut classes);
        c.roles(&mut roles);
    }
    for (_, r, _) in &kb.abox.roles {
        roles.insert(r.clone());
    }
    let classes: Vec<Iri> = classes.into_iter().collect();
    let roles: Vec<String> = roles.into_iter().collect();
    let inds: Vec<Term> = kb.abox.individuals.iter().cloned().collect();

    let mut examined: u64 = 0;
    for size in 1..=max_domain {
        let class_space = 1u64 << size;
        let role_space = 1u64 << (size * size);
        let per_size = class_space
            .checked_pow(classes.len() as u32)
            .and_then(|a| role_space.checked_pow(roles.len() as u32).and_then(|b| a.checked_mul(b)))
            .and_then(|a| (size as u64).checked_pow(inds.len() as u32).and_then(|b| a.checked_mul(b)));
        let Some(per_size) = per_size else {
            return Err(ReasonerError::BudgetExceeded(node_limit as usize));
        };
        if examined + per_size > node_limit {
            return Err(ReasonerError::BudgetExceeded(node_limit as usize));
        }
        examined += per_size;

        let mut interp = Interpretation {
            size,
            classes: classes.iter().map(|c| (c.clone(), 0)).collect(),
            roles: roles.iter().map(|r| (r.clone(), 0)).collect(),
        };
        if search(&mut interp, 0, kb, &inds) {
            return Ok(Verdict::Sat);
        }
    }
    Ok(Verdict::UnsatUpToBound)
}

fn search(interp: &mut Interpretation, slot: usize, kb: &KnowledgeBase, inds: &[Term]) -> bool {
    let nc = interp.classes.len();
    let nr = interp.roles.len();
    if slot == nc + nr {
        if !kb.tbox.iter().all(|ax| interp.satisfies_axiom(ax)) {
            return false;
        }
        let mut map = vec![0usize; inds.len()];
        return assign(interp, kb, inds, &mut map, 0);
    }
    let space: u32 = if slot < nc { 1 << interp.size } else { 1 << (interp.size * interp.size) };
    for mask in 0..space {
        if slot < nc {
            interp.classes[slot].1 = mask;
        } else {
            interp.roles[slot - nc].1 = mask;
        }
        if search(interp, slot + 1, kb, inds) {
            return true;
        }
    }
    false
}

fn assign(interp: &Interpretation, kb: &KnowledgeBase, inds: &[Term], map: &mut Vec<usize>, i: usize) -> bool {
    if i == inds.len() {
        return interp.satisfies_abox(&kb.abox, inds, map);
    }
    for x in 0..interp.size {
        map[i] = x;
        if assign(interp, kb, inds, map, i + 1) {
            return true;
        }
    }
    false
}
