//! Class expressions, axioms and the namespaced micro-ontologies that hold
//! them.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::{Iri, Term};

/// A role name with direction. Role names are global, never prefixed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Role {
    pub name: String,
    pub inverse: bool,
}

impl Role {
    pub fn new(name: impl Into<String>) -> Self {
        Role { name: name.into(), inverse: false }
    }

    pub fn inv(name: impl Into<String>) -> Self {
        Role { name: name.into(), inverse: true }
    }

    pub fn inverted(&self) -> Self {
        Role { name: self.name.clone(), inverse: !self.inverse }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}⁻", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassExpr {
    Top,
    Bottom,
    Named(Iri),
    Not(Box<ClassExpr>),
    /// At least two members.
    And(Vec<ClassExpr>),
    /// At least two members.
    Or(Vec<ClassExpr>),
    Exists(Role, Box<ClassExpr>),
    /// Only produced by [`normalize`] when pushing negation through `Exists`.
    Forall(Role, Box<ClassExpr>),
}

impl ClassExpr {
    pub fn named(ns: &str, local: &str) -> Self {
        ClassExpr::Named(Iri::new(ns, local))
    }

    pub fn not(e: ClassExpr) -> Self {
        ClassExpr::Not(Box::new(e))
    }

    pub fn exists(role: Role, filler: ClassExpr) -> Self {
        ClassExpr::Exists(role, Box::new(filler))
    }

    pub fn forall(role: Role, filler: ClassExpr) -> Self {
        ClassExpr::Forall(role, Box::new(filler))
    }

    /// Conjunction; flattens nested `And`s and collapses singletons.
    pub fn and(items: impl IntoIterator<Item = ClassExpr>) -> Self {
        Self::nary(items, true)
    }

    /// Disjunction; flattens nested `Or`s and collapses singletons.
    pub fn or(items: impl IntoIterator<Item = ClassExpr>) -> Self {
        Self::nary(items, false)
    }

    fn nary(items: impl IntoIterator<Item = ClassExpr>, conj: bool) -> Self {
        let mut flat = Vec::new();
        for it in items {
            match it {
                ClassExpr::And(v) if conj => flat.extend(v),
                ClassExpr::Or(v) if !conj => flat.extend(v),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => {
                if conj {
                    ClassExpr::Top
                } else {
                    ClassExpr::Bottom
                }
            }
            1 => flat.pop().unwrap(),
            _ if conj => ClassExpr::And(flat),
            _ => ClassExpr::Or(flat),
        }
    }

    pub fn as_named(&self) -> Option<&Iri> {
        match self {
            ClassExpr::Named(i) => Some(i),
            _ => None,
        }
    }

    /// Named classes occurring anywhere in the expression.
    pub fn classes(&self, out: &mut BTreeSet<Iri>) {
        match self {
            ClassExpr::Top | ClassExpr::Bottom => {}
            ClassExpr::Named(i) => {
                out.insert(i.clone());
            }
            ClassExpr::Not(e) | ClassExpr::Exists(_, e) | ClassExpr::Forall(_, e) => e.classes(out),
            ClassExpr::And(v) | ClassExpr::Or(v) => v.iter().for_each(|e| e.classes(out)),
        }
    }

    pub fn roles(&self, out: &mut BTreeSet<String>) {
        match self {
            ClassExpr::Top | ClassExpr::Bottom | ClassExpr::Named(_) => {}
            ClassExpr::Not(e) => e.roles(out),
            ClassExpr::Exists(r, e) | ClassExpr::Forall(r, e) => {
                out.insert(r.name.clone());
                e.roles(out);
            }
            ClassExpr::And(v) | ClassExpr::Or(v) => v.iter().for_each(|e| e.roles(out)),
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            ClassExpr::Top | ClassExpr::Bottom | ClassExpr::Named(_) => true,
            ClassExpr::Not(e) => matches!(**e, ClassExpr::Named(_)),
            ClassExpr::Exists(_, e) | ClassExpr::Forall(_, e) => e.is_nnf(),
            ClassExpr::And(v) | ClassExpr::Or(v) => v.iter().all(ClassExpr::is_nnf),
        }
    }
}

impl fmt::Display for ClassExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[ClassExpr], sep: &str| v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(sep);
        match self {
            ClassExpr::Top => write!(f, "⊤"),
            ClassExpr::Bottom => write!(f, "⊥"),
            ClassExpr::Named(i) => write!(f, "{i}"),
            ClassExpr::Not(e) => write!(f, "¬{e}"),
            ClassExpr::And(v) => write!(f, "({})", join(v, " ⊓ ")),
            ClassExpr::Or(v) => write!(f, "({})", join(v, " ⊔ ")),
            ClassExpr::Exists(r, e) => write!(f, "∃{r}.{e}"),
            ClassExpr::Forall(r, e) => write!(f, "∀{r}.{e}"),
        }
    }
}

/// Negation normal form: negation applies only to named classes.
pub fn normalize(expr: &ClassExpr) -> ClassExpr {
    nnf(expr, false)
}

fn nnf(e: &ClassExpr, neg: bool) -> ClassExpr {
    use ClassExpr::*;
    match (e, neg) {
        (Top, false) | (Bottom, true) => Top,
        (Top, true) | (Bottom, false) => Bottom,
        (Named(_), false) => e.clone(),
        (Named(_), true) => ClassExpr::not(e.clone()),
        (Not(inner), _) => nnf(inner, !neg),
        (And(v), false) => ClassExpr::and(v.iter().map(|x| nnf(x, false))),
        (And(v), true) => ClassExpr::or(v.iter().map(|x| nnf(x, true))),
        (Or(v), false) => ClassExpr::or(v.iter().map(|x| nnf(x, false))),
        (Or(v), true) => ClassExpr::and(v.iter().map(|x| nnf(x, true))),
        (Exists(r, x), false) => ClassExpr::exists(r.clone(), nnf(x, false)),
        (Exists(r, x), true) => ClassExpr::forall(r.clone(), nnf(x, true)),
        (Forall(r, x), false) => ClassExpr::forall(r.clone(), nnf(x, false)),
        (Forall(r, x), true) => ClassExpr::exists(r.clone(), nnf(x, true)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axiom {
    SubClass(ClassExpr, ClassExpr),
    Equivalent(ClassExpr, ClassExpr),
    Disjoint(ClassExpr, ClassExpr),
    SubProperty(String, String),
    Domain(String, ClassExpr),
    Range(String, ClassExpr),
}

impl Axiom {
    /// The axiom as plain subsumptions (`Equivalent` yields two).
    pub fn subsumptions(&self) -> Vec<(ClassExpr, ClassExpr)> {
        match self {
            Axiom::SubClass(a, b) => vec![(a.clone(), b.clone())],
            Axiom::Equivalent(a, b) => vec![(a.clone(), b.clone()), (b.clone(), a.clone())],
            Axiom::Disjoint(a, b) => vec![(ClassExpr::and([a.clone(), b.clone()]), ClassExpr::Bottom)],
            Axiom::SubProperty(..) => vec![],
            Axiom::Domain(r, d) => vec![(ClassExpr::exists(Role::new(r), ClassExpr::Top), d.clone())],
            Axiom::Range(r, d) => vec![(ClassExpr::exists(Role::inv(r), ClassExpr::Top), d.clone())],
        }
    }

    /// `(role, class)` if the axiom restricts the domain of a role to a named
    /// class, either directly or as `∃r.⊤ ⊑ C`.
    pub fn as_domain(&self) -> Option<(&str, &Iri)> {
        match self {
            Axiom::Domain(r, ClassExpr::Named(c)) => Some((r, c)),
            Axiom::SubClass(ClassExpr::Exists(r, f), ClassExpr::Named(c)) if **f == ClassExpr::Top => {
                (!r.inverse).then_some((r.name.as_str(), c))
            }
            _ => None,
        }
    }

    /// Like [`Axiom::as_domain`] for ranges (`∃r⁻.⊤ ⊑ C`).
    pub fn as_range(&self) -> Option<(&str, &Iri)> {
        match self {
            Axiom::Range(r, ClassExpr::Named(c)) => Some((r, c)),
            Axiom::SubClass(ClassExpr::Exists(r, f), ClassExpr::Named(c)) if **f == ClassExpr::Top => {
                r.inverse.then_some((r.name.as_str(), c))
            }
            _ => None,
        }
    }

    pub fn classes(&self) -> BTreeSet<Iri> {
        let mut out = BTreeSet::new();
        match self {
            Axiom::SubClass(a, b) | Axiom::Equivalent(a, b) | Axiom::Disjoint(a, b) => {
                a.classes(&mut out);
                b.classes(&mut out);
            }
            Axiom::Domain(_, c) | Axiom::Range(_, c) => c.classes(&mut out),
            Axiom::SubProperty(..) => {}
        }
        out
    }

    pub fn roles(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        match self {
            Axiom::SubClass(a, b) | Axiom::Equivalent(a, b) | Axiom::Disjoint(a, b) => {
                a.roles(&mut out);
                b.roles(&mut out);
            }
            Axiom::Domain(r, c) | Axiom::Range(r, c) => {
                out.insert(r.clone());
                c.roles(&mut out);
            }
            Axiom::SubProperty(a, b) => {
                out.insert(a.clone());
                out.insert(b.clone());
            }
        }
        out
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::SubClass(a, b) => write!(f, "{a} ⊑ {b}"),
            Axiom::Equivalent(a, b) => write!(f, "{a} ≡ {b}"),
            Axiom::Disjoint(a, b) => write!(f, "{a} ⊓ {b} ⊑ ⊥"),
            Axiom::SubProperty(a, b) => write!(f, "{a} ⊑ {b}"),
            Axiom::Domain(r, c) => write!(f, "domain({r}) ⊑ {c}"),
            Axiom::Range(r, c) => write!(f, "range({r}) ⊑ {c}"),
        }
    }
}

/// A small, internally monosemous, namespaced TBox.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MicroOntology {
    pub prefix: String,
    pub iri: String,
    pub title: String,
    pub axioms: Vec<Axiom>,
    /// Properties declared without any axiom (lexicon entries only).
    #[serde(default)]
    pub properties: Vec<String>,
    /// Pronoun surface form → compatibility constraint.
    #[serde(default)]
    pub pronouns: Vec<(String, ClassExpr)>,
}

impl MicroOntology {
    /// Classes this ontology declares senses for: those in its own namespace.
    /// Foreign-qualified references do not count.
    pub fn declared_classes(&self) -> BTreeSet<Iri> {
        self.axioms.iter().flat_map(Axiom::classes).filter(|c| c.ns == self.prefix).collect()
    }

    pub fn roles(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.axioms.iter().flat_map(Axiom::roles).collect();
        out.extend(self.properties.iter().cloned());
        out
    }
}

/// Individuals with their class and role assertions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ABox {
    pub individuals: BTreeSet<Term>,
    pub types: Vec<(Term, ClassExpr)>,
    pub roles: Vec<(Term, String, Term)>,
}

impl ABox {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assert_type(&mut self, ind: Term, class: ClassExpr) {
        self.individuals.insert(ind.clone());
        self.types.push((ind, class));
    }

    pub fn assert_role(&mut self, s: Term, role: impl Into<String>, o: Term) {
        self.individuals.insert(s.clone());
        self.individuals.insert(o.clone());
        self.roles.push((s, role.into(), o));
    }

    pub fn extend(&mut self, other: &ABox) {
        self.individuals.extend(other.individuals.iter().cloned());
        self.types.extend(other.types.iter().cloned());
        self.roles.extend(other.roles.iter().cloned());
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown ontology prefix `{0}`")]
pub struct UnknownPrefix(pub String);

/// `{we,ee}:country` → `we:country ⊔ ee:country`.
pub fn expand_brace_list<S: AsRef<str>>(prefixes: &[S], local: &str, known: &[S]) -> Result<ClassExpr, UnknownPrefix> {
    let mut members = Vec::with_capacity(prefixes.len());
    for p in prefixes {
        let p = p.as_ref();
        if !known.iter().any(|k| k.as_ref() == p) {
            return Err(UnknownPrefix(p.to_string()));
        }
        members.push(ClassExpr::named(p, local));
    }
    Ok(ClassExpr::or(members))
}
