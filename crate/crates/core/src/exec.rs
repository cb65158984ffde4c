//! Compiles resolved paraphrase atoms into update statements and executes
//! them into a stepwise trace, filling in entailed and planned triples.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dl::{ABox, Axiom, ClassExpr, Role};
use crate::parser::{AtomKind, EntityRef, ParaphraseAtom, SenseRef, VerbRef};
use crate::rdf::{
    apply_update, match_pattern, Bindings, Iri, Provenance, Snapshot, Term, Trace, Triple, UpdateError, UpdateOp,
};
use crate::reasoner::{KnowledgeBase, Reasoner, ReasonerError};
use crate::templates::{compile_invocation, CompiledStatement, ProceduralTemplate, TemplateError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("statement {label}: precondition {triple} cannot be satisfied")]
    PreconditionUnsatisfiable { label: String, triple: String },
    #[error("statement {label}: WHERE pattern has no match")]
    WhereUnmatched { label: String },
    #[error("statement {label}: knowledge base becomes inconsistent")]
    Inconsistent { label: String },
    #[error("statement {0} still has unresolved ambiguity")]
    Unresolved(String),
    #[error("unknown procedure `{0}`")]
    UnknownTemplate(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Update(#[from] UpdateError),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
}

fn entity(label: &str, e: &EntityRef) -> Result<Term, ExecError> {
    e.term().ok_or_else(|| ExecError::Unresolved(label.to_string()))
}

/// Translates one resolved atom. Type and property atoms become plain
/// inserts, invocations go through their template, and negated
/// existentials become constraints on the individual.
pub fn compile_atom(atom: &ParaphraseAtom, templates: &[ProceduralTemplate]) -> Result<CompiledStatement, ExecError> {
    let label = atom.label.clone();
    let unresolved = || ExecError::Unresolved(label.clone());
    let mut st = match &atom.kind {
        AtomKind::Type { entity: e, noun } => {
            let SenseRef::Known(class) = &noun.sense else { return Err(unresolved()) };
            let t = Triple::new(entity(&label, e)?, Iri::rdf_type(), Term::Iri(class.clone()));
            CompiledStatement { op: UpdateOp::insert([t]), ..Default::default() }
        }
        AtomKind::Property { subject, property, object } => {
            let t = Triple::new(entity(&label, subject)?, Iri::property(property.clone()), entity(&label, object)?);
            CompiledStatement { op: UpdateOp::insert([t]), ..Default::default() }
        }
        AtomKind::Invocation { verb, args, .. } => {
            let VerbRef::Known(name) = verb else { return Err(unresolved()) };
            let t = templates.iter().find(|t| &t.name == name).ok_or_else(|| ExecError::UnknownTemplate(name.clone()))?;
            let args = args.iter().map(|(s, e)| Ok((s.clone(), entity(&label, e)?))).collect::<Result<Vec<_>, ExecError>>()?;
            compile_invocation(t, &args)?
        }
        AtomKind::NegatedExistential { entity: e, property, inverse, filler } => {
            let SenseRef::Known(class) = &filler.sense else { return Err(unresolved()) };
            let role = if *inverse { Role::inv(property.clone()) } else { Role::new(property.clone()) };
            let c = ClassExpr::not(ClassExpr::exists(role, ClassExpr::Named(class.clone())));
            CompiledStatement { constraint: Some((entity(&label, e)?, c)), ..Default::default() }
        }
    };
    st.label = label;
    Ok(st)
}

pub fn compile_atoms(atoms: &[ParaphraseAtom], templates: &[ProceduralTemplate]) -> Result<Vec<CompiledStatement>, ExecError> {
    atoms.iter().map(|a| compile_atom(a, templates)).collect()
}

/// Why an implicit triple appeared.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum Reason {
    Planned { consumer: String },
    Domain { property: String },
    Range { property: String },
    SubProperty { sub: String, sup: String },
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::Planned { consumer } => {
                write!(f, "Inserted by planning because of procedural template precondition at step {consumer}.")
            }
            Reason::Domain { property } => write!(f, "Entailed by domain of the property {property}."),
            Reason::Range { property } => write!(f, "Entailed by range of the property {property}."),
            Reason::SubProperty { sub, sup } => write!(f, "Entailed by {sub} being a subproperty of {sup}."),
        }
    }
}

/// RDFS-style rules extracted from a TBox.
#[derive(Debug, Clone, Default)]
pub struct EntailmentRules {
    domains: Vec<(String, Iri)>,
    ranges: Vec<(String, Iri)>,
    /// Strict superproperties, transitively closed.
    supers: BTreeMap<String, BTreeSet<String>>,
}

impl EntailmentRules {
    pub fn new(tbox: &[Axiom]) -> Self {
        let mut r = EntailmentRules::default();
        for ax in tbox {
            if let Some((p, c)) = ax.as_domain() {
                r.domains.push((p.to_string(), c.clone()));
            }
            if let Some((p, c)) = ax.as_range() {
                r.ranges.push((p.to_string(), c.clone()));
            }
            if let Axiom::SubProperty(a, b) = ax {
                r.supers.entry(a.clone()).or_default().insert(b.clone());
            }
        }
        loop {
            let mut changed = false;
            let snapshot = r.supers.clone();
            for (a, sups) in &snapshot {
                for b in sups {
                    for c in snapshot.get(b).into_iter().flatten() {
                        if c != a && r.supers.entry(a.clone()).or_default().insert(c.clone()) {
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        r
    }
}

/// Fixed-point closure of `snapshot` under the domain, range and
/// subproperty rules. Returns only triples not already present.
pub fn entail_step(snapshot: &Snapshot, rules: &EntailmentRules) -> Vec<(Triple, Reason)> {
    let mut all = snapshot.triples.clone();
    let mut out = Vec::new();
    let mut frontier: Vec<Triple> = all.iter().cloned().collect();
    while let Some(t) = frontier.pop() {
        if t.is_type() {
            continue;
        }
        let p = t.p.local.as_str();
        let mut derived = Vec::new();
        for (r, c) in &rules.domains {
            if r == p {
                derived.push((Triple::new(t.s.clone(), Iri::rdf_type(), Term::Iri(c.clone())), Reason::Domain { property: r.clone() }));
            }
        }
        for (r, c) in &rules.ranges {
            if r == p {
                derived.push((Triple::new(t.o.clone(), Iri::rdf_type(), Term::Iri(c.clone())), Reason::Range { property: r.clone() }));
            }
        }
        for sup in rules.supers.get(p).into_iter().flatten() {
            derived.push((
                Triple::new(t.s.clone(), Iri::property(sup.clone()), t.o.clone()),
                Reason::SubProperty { sub: p.to_string(), sup: sup.clone() },
            ));
        }
        for (d, why) in derived {
            if all.insert(d.clone()) {
                frontier.push(d.clone());
                out.push((d, why));
            }
        }
    }
    out.sort();
    out
}

/// The snapshot read as an ABox: type triples with a class object become
/// class assertions, everything else a role assertion.
pub fn snapshot_abox(snapshot: &Snapshot) -> ABox {
    let mut abox = ABox::new();
    for t in &snapshot.triples {
        match (&t.o, t.is_type()) {
            (Term::Iri(c), true) => abox.assert_type(t.s.clone(), ClassExpr::Named(c.clone())),
            _ => abox.assert_role(t.s.clone(), t.p.local.clone(), t.o.clone()),
        }
    }
    abox
}

/// Whether the TBox, the snapshot and the class constraints accumulated so
/// far have a common model.
pub fn check_consistency_at_step(
    snapshot: &Snapshot,
    tbox: &[Axiom],
    constraints: &[(Term, ClassExpr)],
    reasoner: &Reasoner,
) -> Result<bool, ReasonerError> {
    let mut abox = snapshot_abox(snapshot);
    for (t, c) in constraints {
        abox.assert_type(t.clone(), c.clone());
    }
    reasoner.is_consistent(&KnowledgeBase::new(tbox.to_vec(), abox))
}

/// Index of the first snapshot mentioning `term`, and of the first one
/// typing it.
fn introduced_and_typed(snapshots: &[Snapshot], term: &Term) -> (Option<usize>, Option<usize>) {
    let intro = snapshots.iter().position(|s| s.triples.iter().any(|t| &t.s == term || &t.o == term));
    let typed = snapshots.iter().position(|s| s.triples.iter().any(|t| t.is_type() && &t.s == term));
    (intro, typed)
}

/// Placement of a retroactive insert of `unmet`, needed by the step at
/// index `consumer`: the earliest step by which every constant already
/// known before the consumer has been both introduced and typed. Constants
/// the consumer introduces itself are exempt.
pub fn plan_precondition(prefix: &[Snapshot], unmet: &Triple, consumer: usize) -> Option<usize> {
    if consumer == 0 || prefix.is_empty() {
        return None;
    }
    let mut placement = 0;
    for term in [&unmet.s, &unmet.o] {
        if !matches!(term, Term::Anon(_)) {
            continue;
        }
        match introduced_and_typed(&prefix[..consumer], term) {
            (None, _) => {}
            (Some(i), Some(t)) => placement = placement.max(i.max(t)),
            (Some(_), None) => placement = placement.max(consumer - 1),
        }
    }
    (placement < consumer).then_some(placement)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImplicitInsert {
    pub triple: Triple,
    pub reason: Reason,
}

/// One row of the two-column execution report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub explicit: UpdateOp,
    pub template: Option<String>,
    pub implicit: Vec<ImplicitInsert>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Execution {
    pub trace: Trace,
    pub report: Vec<ReportRow>,
}

impl Execution {
    /// Per step, the explicit op followed by one ground insert op holding
    /// that step's implicit triples.
    pub fn replay_ops(&self) -> Vec<(String, Vec<UpdateOp>)> {
        self.report
            .iter()
            .map(|row| {
                let mut ops = vec![row.explicit.clone()];
                if !row.implicit.is_empty() {
                    let mut op = UpdateOp::insert(row.implicit.iter().map(|i| i.triple.clone()));
                    op.provenance = Provenance::Entailed;
                    ops.push(op);
                }
                (row.label.clone(), ops)
            })
            .collect()
    }

    /// The two-column report as text.
    pub fn render_report(&self) -> String {
        let mut s = String::new();
        for row in &self.report {
            let explicit = if row.explicit.is_empty() { "(constraint only)".to_string() } else { row.explicit.to_string() };
            let _ = writeln!(s, "{}\t{}", row.label, explicit);
            for i in &row.implicit {
                let _ = writeln!(s, "\t\tINSERT {{{}}}  {}", i.triple, i.reason);
            }
        }
        s
    }
}

/// Re-applies exported ops, with no entailment or planning.
pub fn replay(ops: &[(String, Vec<UpdateOp>)]) -> Result<Trace, ExecError> {
    let mut snapshots: Vec<Snapshot> = Vec::new();
    for (label, step) in ops {
        let mut s = snapshots.last().cloned().unwrap_or_default().with_label(label.clone());
        for op in step {
            s = apply_update(&s, op, &Bindings::new())?.with_label(label.clone());
        }
        snapshots.push(s);
    }
    Ok(Trace { snapshots })
}

enum Attempt {
    Done(Execution),
    Unmet { step: usize, triple: Triple, prefix: Vec<Snapshot> },
}

fn simulate(
    statements: &[CompiledStatement],
    tbox: &[Axiom],
    rules: &EntailmentRules,
    planned: &BTreeMap<usize, Vec<(Triple, String)>>,
    reasoner: &Reasoner,
) -> Result<Attempt, ExecError> {
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut report = Vec::new();
    let mut constraints = Vec::new();
    for (k, st) in statements.iter().enumerate() {
        let prev = snapshots.last().cloned().unwrap_or_default();
        for check in &st.checks {
            if !prev.contains(check) {
                return Ok(Attempt::Unmet { step: k, triple: check.clone(), prefix: snapshots });
            }
        }
        if !st.absent.is_empty() && !match_pattern(&prev, &st.absent, &[]).is_empty() {
            let triple = st.absent.iter().map(ToString::to_string).collect::<Vec<_>>().join(". ");
            return Err(ExecError::PreconditionUnsatisfiable { label: st.label.clone(), triple });
        }
        if !st.op.where_patterns.is_empty() && match_pattern(&prev, &st.op.where_patterns, &st.op.filters).is_empty() {
            return Err(ExecError::WhereUnmatched { label: st.label.clone() });
        }
        let mut next = apply_update(&prev, &st.op, &Bindings::new())?.with_label(st.label.clone());
        let mut implicit = Vec::new();
        for (t, consumer) in planned.get(&k).into_iter().flatten() {
            if !next.contains(t) {
                next.add(t.clone(), true);
                implicit.push(ImplicitInsert { triple: t.clone(), reason: Reason::Planned { consumer: consumer.clone() } });
            }
        }
        for (t, reason) in entail_step(&next, rules) {
            next.add(t.clone(), true);
            implicit.push(ImplicitInsert { triple: t, reason });
        }
        if let Some(c) = &st.constraint {
            constraints.push(c.clone());
        }
        if !check_consistency_at_step(&next, tbox, &constraints, reasoner)? {
            return Err(ExecError::Inconsistent { label: st.label.clone() });
        }
        report.push(ReportRow { label: st.label.clone(), explicit: st.op.clone(), template: st.template.clone(), implicit });
        snapshots.push(next);
    }
    Ok(Attempt::Done(Execution { trace: Trace { snapshots }, report }))
}

/// Executes `statements` in order. Unmet ground preconditions are planned
/// retroactively (see [`plan_precondition`]) and the run restarts with the
/// planned insert in place.
pub fn run(statements: &[CompiledStatement], tbox: &[Axiom], reasoner: &Reasoner) -> Result<Execution, ExecError> {
    let rules = EntailmentRules::new(tbox);
    let mut planned: BTreeMap<usize, Vec<(Triple, String)>> = BTreeMap::new();
    loop {
        match simulate(statements, tbox, &rules, &planned, reasoner)? {
            Attempt::Done(exec) => return Ok(exec),
            Attempt::Unmet { step, triple, prefix } => {
                let label = statements[step].label.clone();
                let unsat = || ExecError::PreconditionUnsatisfiable { label: label.clone(), triple: triple.to_string() };
                let at = plan_precondition(&prefix, &triple, step).ok_or_else(unsat)?;
                let slot = planned.entry(at).or_default();
                if slot.iter().any(|(t, _)| t == &triple) {
                    return Err(unsat());
                }
                slot.push((triple.clone(), label.clone()));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::templates::{parse_templates, tests::STORY_TEMPLATES, Slot};

    fn t(s: &str, p: &str, o: &str) -> Triple {
        Triple::new(s.parse().unwrap(), p.parse().unwrap(), o.parse().unwrap())
    }

    fn insert(label: &str, ts: Vec<Triple>) -> CompiledStatement {
        CompiledStatement { label: label.into(), op: UpdateOp::insert(ts), ..Default::default() }
    }

    fn invoke(label: &str, name: &str, args: &[(Slot, &str)]) -> CompiledStatement {
        let ts = parse_templates(STORY_TEMPLATES).unwrap();
        let tpl = ts.iter().find(|t| t.name == name).unwrap();
        let args: Vec<_> = args.iter().map(|(s, e)| (s.clone(), e.parse().unwrap())).collect();
        let mut st = compile_invocation(tpl, &args).unwrap();
        st.label = label.into();
        st
    }

    #[test]
    fn single_insert_gives_one_snapshot() {
        let e = run(&[insert("A", vec![t("obj1", "rdf:type", "pp:Person")])], &[], &Reasoner::default()).unwrap();
        assert_eq!(e.trace.len(), 1);
        assert_eq!(e.trace.snapshots[0].triples.len(), 1);
    }

    #[test]
    fn removing_without_source_fails() {
        let st = invoke("A", "Removing", &[(Slot::Subject, "obj1"), (Slot::Object, "obj2"), (Slot::Prep("from".into()), "obj3")]);
        let err = run(&[st], &[], &Reasoner::default()).unwrap_err();
        assert!(matches!(err, ExecError::PreconditionUnsatisfiable { .. }), "{err:?}");
    }

    #[test]
    fn range_and_subproperty_entailment() {
        let tbox = vec![
            Axiom::Range("hasMother".into(), ClassExpr::named("pp", "Mother")),
            Axiom::SubProperty("contains".into(), "stores".into()),
        ];
        let rules = EntailmentRules::new(&tbox);
        let mut s = Snapshot::new("A");
        s.add(t("obj4", "hasMother", "obj11"), false);
        s.add(t("obj1", "contains", "obj2"), false);
        let got: Vec<Triple> = entail_step(&s, &rules).into_iter().map(|(t, _)| t).collect();
        assert_eq!(got.len(), 2);
        assert!(got.contains(&t("obj11", "rdf:type", "pp:Mother")));
        assert!(got.contains(&t("obj1", "stores", "obj2")));
    }

    #[test]
    fn placement_follows_latest_typing() {
        let steps = vec![
            insert("A", vec![t("obj1", "knows", "obj2")]),
            insert("B", vec![t("obj1", "rdf:type", "x:A")]),
            insert("C", vec![t("obj3", "knows", "obj1")]),
            insert("D", vec![t("obj2", "rdf:type", "x:B")]),
            invoke("E", "Removing", &[(Slot::Subject, "obj3"), (Slot::Object, "obj2"), (Slot::Prep("from".into()), "obj1")]),
        ];
        let e = run(&steps, &[], &Reasoner::default()).unwrap();
        let planned = t("obj1", "stores", "obj2");
        let rows: Vec<&str> = e.report.iter().filter(|r| r.implicit.iter().any(|i| i.triple == planned)).map(|r| r.label.as_str()).collect();
        assert_eq!(rows, ["D"]);
        assert!(!e.trace.get("C").unwrap().contains(&planned));
        assert!(e.trace.get("D").unwrap().implicit.contains(&planned));
        assert!(!e.trace.get("E").unwrap().contains(&planned));
    }

    #[test]
    fn satisfied_precondition_plans_nothing() {
        let steps = vec![
            insert("A", vec![t("obj1", "stores", "obj2")]),
            invoke("B", "Removing", &[(Slot::Subject, "obj3"), (Slot::Object, "obj2"), (Slot::Prep("from".into()), "obj1")]),
        ];
        let e = run(&steps, &[], &Reasoner::default()).unwrap();
        assert!(e.report.iter().all(|r| r.implicit.is_empty()));
    }

    #[test]
    fn disjoint_types_are_inconsistent() {
        let tbox = vec![Axiom::SubClass(ClassExpr::named("x", "A"), ClassExpr::not(ClassExpr::named("x", "B")))];
        let mut s = Snapshot::new("A");
        let r = Reasoner::default();
        assert!(check_consistency_at_step(&s, &tbox, &[], &r).unwrap());
        s.add(t("obj1", "rdf:type", "x:A"), false);
        s.add(t("obj1", "rdf:type", "x:B"), false);
        assert!(!check_consistency_at_step(&s, &tbox, &[], &r).unwrap());
    }

    #[test]
    fn where_without_match() {
        let st = invoke("A", "Bringing", &[(Slot::Subject, "obj1"), (Slot::Object, "obj2"), (Slot::Prep("to".into()), "obj3")]);
        let steps = vec![insert("Z", vec![t("obj1", "stores", "obj2"), t("obj2", "rdf:type", "x:T"), t("obj1", "rdf:type", "x:T")]), st];
        assert_eq!(run(&steps, &[], &Reasoner::default()), Err(ExecError::WhereUnmatched { label: "A".into() }));
    }
}
