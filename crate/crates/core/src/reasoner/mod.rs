//! Consistency and satisfiability for TBox + ABox knowledge bases in ALCI
//! with a role hierarchy.

mod brute;
mod tableau;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::dl::{ABox, Axiom, ClassExpr};
use crate::rdf::{Iri, Term};

pub use brute::{brute_force_consistent, Interpretation, Verdict};
pub use tableau::PreparedTBox;

pub const DEFAULT_NODE_BUDGET: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasonerError {
    #[error("unsupported input: {0}")]
    UnsupportedAxiom(String),
    #[error("search budget of {0} exceeded")]
    BudgetExceeded(usize),
}

#[derive(Debug, Clone, Default)]
pub struct KnowledgeBase {
    pub tbox: Vec<Axiom>,
    pub abox: ABox,
}

impl KnowledgeBase {
    pub fn new(tbox: Vec<Axiom>, abox: ABox) -> Self {
        KnowledgeBase { tbox, abox }
    }

    /// Reflexive-transitive closure of the declared subproperty pairs over
    /// every role that occurs in the knowledge base.
    pub fn role_hierarchy(&self) -> BTreeSet<(String, String)> {
        let mut roles: BTreeSet<String> = self.tbox.iter().flat_map(Axiom::roles).collect();
        roles.extend(self.abox.roles.iter().map(|(_, r, _)| r.clone()));
        let mut pairs: BTreeSet<(String, String)> = roles.iter().map(|r| (r.clone(), r.clone())).collect();
        for ax in &self.tbox {
            if let Axiom::SubProperty(a, b) = ax {
                pairs.insert((a.clone(), b.clone()));
            }
        }
        loop {
            let mut added = Vec::new();
            for (a, b) in &pairs {
                for (c, d) in &pairs {
                    if b == c && !pairs.contains(&(a.clone(), d.clone())) {
                        added.push((a.clone(), d.clone()));
                    }
                }
            }
            if added.is_empty() {
                return pairs;
            }
            pairs.extend(added);
        }
    }
}

/// Pure reasoning service; every call is independent.
#[derive(Debug, Clone, Copy)]
pub struct Reasoner {
    pub node_budget: usize,
}

impl Default for Reasoner {
    fn default() -> Self {
        Reasoner { node_budget: DEFAULT_NODE_BUDGET }
    }
}

impl Reasoner {
    pub fn with_budget(node_budget: usize) -> Self {
        Reasoner { node_budget }
    }

    pub fn is_consistent(&self, kb: &KnowledgeBase) -> Result<bool, ReasonerError> {
        PreparedTBox::new(&kb.tbox).consistent(&kb.abox, self.node_budget)
    }

    /// Whether `expr` can have a non-empty extension in some model of `tbox`.
    pub fn is_satisfiable(&self, tbox: &[Axiom], expr: &ClassExpr) -> Result<bool, ReasonerError> {
        self.satisfiable_in(&PreparedTBox::new(tbox), expr)
    }

    pub fn satisfiable_in(&self, prepared: &PreparedTBox, expr: &ClassExpr) -> Result<bool, ReasonerError> {
        let mut abox = ABox::new();
        // Probe individual: an anonymous id no parsed discourse reaches.
        abox.assert_type(Term::Anon(u32::MAX), expr.clone());
        prepared.consistent(&abox, self.node_budget)
    }

    /// Named classes of `tbox` that cannot have instances, in sorted order.
    /// An empty result means the TBox is coherent.
    pub fn unsatisfiable_classes(&self, tbox: &[Axiom]) -> Result<Vec<Iri>, ReasonerError> {
        let prepared = PreparedTBox::new(tbox);
        let classes: BTreeSet<Iri> = tbox.iter().flat_map(Axiom::classes).collect();
        let mut out = Vec::new();
        for c in classes {
            if !self.satisfiable_in(&prepared, &ClassExpr::Named(c.clone()))? {
                out.push(c);
            }
        }
        Ok(out)
    }
}

/// `is_consistent` with the default budget.
pub fn is_consistent(kb: &KnowledgeBase) -> Result<bool, ReasonerError> {
    Reasoner::default().is_consistent(kb)
}

/// `is_satisfiable` with the default budget.
pub fn is_satisfiable(tbox: &[Axiom], expr: &ClassExpr) -> Result<bool, ReasonerError> {
    Reasoner::default().is_satisfiable(tbox, expr)
}
