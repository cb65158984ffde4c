//! Property checks shared by the proptest suites and the acceptance run.
//! Each check returns `Err(reason)` on a counterexample.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use cnl_core::dl::{normalize, ABox, Axiom, ClassExpr, MicroOntology, Role};
use cnl_core::exec::{replay, run, Execution};
use cnl_core::merge::{partition_senses, MergeError};
use cnl_core::parser::{
    parse_factual, render_paraphrase, AmbiguityItem, AtomKind, Discourse, EntityRef, NounRef, ParaphraseAtom, SenseRef, Style,
};
use cnl_core::query::{evaluate, Block, Projection, Selector, TemporalQuery};
use cnl_core::rdf::{apply_update, Bindings, Iri, Snapshot, Term, Trace, Triple, TriplePattern, UpdateOp};
use cnl_core::reasoner::{brute_force_consistent, KnowledgeBase, Reasoner, ReasonerError, Verdict};
use cnl_core::wsd::{disambiguate, ChoiceProvider, WsdContext};
use cnl_core::templates::{compile_invocation, parse_templates, CompiledStatement, ProceduralTemplate, Slot};

pub const CLASSES: [&str; 3] = ["A", "B", "C"];
pub const ROLES: [&str; 2] = ["r", "s"];

pub fn class_expr() -> impl Strategy<Value = ClassExpr> {
    let leaf = prop_oneof![
        1 => Just(ClassExpr::Top),
        1 => Just(ClassExpr::Bottom),
        6 => prop::sample::select(&CLASSES[..]).prop_map(|c| ClassExpr::named("k", c)),
    ];
    leaf.prop_recursive(3, 12, 3, |inner| {
        let role = (prop::sample::select(&ROLES[..]), any::<bool>())
            .prop_map(|(r, inv)| if inv { Role::inv(r) } else { Role::new(r) });
        prop_oneof![
            inner.clone().prop_map(ClassExpr::not),
            prop::collection::vec(inner.clone(), 2..3).prop_map(ClassExpr::And),
            prop::collection::vec(inner.clone(), 2..3).prop_map(ClassExpr::Or),
            (role.clone(), inner.clone()).prop_map(|(r, e)| ClassExpr::exists(r, e)),
            (role, inner).prop_map(|(r, e)| ClassExpr::Forall(r, Box::new(e))),
        ]
    })
}

fn is_nnf(e: &ClassExpr) -> bool {
    match e {
        ClassExpr::Top | ClassExpr::Bottom | ClassExpr::Named(_) => true,
        ClassExpr::Not(inner) => matches!(**inner, ClassExpr::Named(_)),
        ClassExpr::And(v) | ClassExpr::Or(v) => v.iter().all(is_nnf),
        ClassExpr::Exists(_, f) | ClassExpr::Forall(_, f) => is_nnf(f),
    }
}

fn probe(e: ClassExpr) -> KnowledgeBase {
    let mut abox = ABox::new();
    abox.assert_type(Term::Anon(1), e);
    KnowledgeBase::new(Vec::new(), abox)
}

/// Largest domain the oracle can afford for this knowledge base.
pub fn oracle(kb: &KnowledgeBase) -> Result<Verdict, ReasonerError> {
    match brute_force_consistent(kb, 3, 400_000) {
        Err(ReasonerError::BudgetExceeded(_)) => brute_force_consistent(kb, 2, 400_000),
        other => other,
    }
}

/// Normal form is idempotent, negation-normal, and equivalent to the input:
/// neither `e ⊓ ¬nnf(e)` nor `¬e ⊓ nnf(e)` has a small model, and the
/// tableau agrees on satisfiability.
pub fn check_normalize(e: &ClassExpr) -> Result<(), String> {
    let n = normalize(e);
    if normalize(&n) != n {
        return Err(format!("not idempotent on {e}"));
    }
    if !is_nnf(&n) {
        return Err(format!("{n} is not in negation normal form"));
    }
    for diff in [
        ClassExpr::and([e.clone(), ClassExpr::not(n.clone())]),
        ClassExpr::and([ClassExpr::not(e.clone()), n.clone()]),
    ] {
        if oracle(&probe(diff.clone())).map_err(|x| x.to_string())? == Verdict::Sat {
            return Err(format!("{e} and {n} differ on a small model"));
        }
    }
    let r = Reasoner::default();
    let a = r.is_satisfiable(&[], e).map_err(|x| x.to_string())?;
    let b = r.is_satisfiable(&[], &n).map_err(|x| x.to_string())?;
    if a != b {
        return Err(format!("satisfiability changed: {e} ({a}) vs {n} ({b})"));
    }
    Ok(())
}

pub fn axiom() -> impl Strategy<Value = Axiom> {
    let c = || class_expr();
    let role = || prop::sample::select(&ROLES[..]).prop_map(str::to_string);
    prop_oneof![
        5 => (c(), c()).prop_map(|(a, b)| Axiom::SubClass(a, b)),
        1 => (c(), c()).prop_map(|(a, b)| Axiom::Equivalent(a, b)),
        1 => (c(), c()).prop_map(|(a, b)| Axiom::Disjoint(a, b)),
        1 => (role(), role()).prop_filter("distinct", |(a, b)| a != b).prop_map(|(a, b)| Axiom::SubProperty(a, b)),
        1 => (role(), c()).prop_map(|(r, e)| Axiom::Domain(r, e)),
        1 => (role(), c()).prop_map(|(r, e)| Axiom::Range(r, e)),
    ]
}

pub fn knowledge_base() -> impl Strategy<Value = KnowledgeBase> {
    let ind = || (1u32..=2).prop_map(Term::Anon);
    let types = prop::collection::vec((ind(), class_expr()), 1..3);
    let roles = prop::collection::vec((ind(), prop::sample::select(&ROLES[..]), ind()), 0..2);
    (prop::collection::vec(axiom(), 0..=6), types, roles).prop_map(|(tbox, types, roles)| {
        let mut abox = ABox::new();
        for (t, c) in types {
            abox.assert_type(t, c);
        }
        for (s, r, o) in roles {
            abox.assert_role(s, r, o);
        }
        KnowledgeBase::new(tbox, abox)
    })
}

#[derive(Debug, Default, Clone, Copy)]
pub struct OracleTally {
    pub sat: usize,
    pub unsat_up_to_bound: usize,
    pub skipped: usize,
}

/// Whenever the oracle finds a model the tableau must answer consistent.
pub fn check_tableau(kb: &KnowledgeBase, tally: &mut OracleTally) -> Result<(), String> {
    let verdict = match oracle(kb) {
        Ok(v) => v,
        Err(_) => {
            tally.skipped += 1;
            return Ok(());
        }
    };
    let tableau = Reasoner::default().is_consistent(kb).map_err(|e| e.to_string())?;
    match verdict {
        Verdict::Sat => {
            tally.sat += 1;
            if !tableau {
                return Err(format!("oracle found a model, tableau says inconsistent: {kb:?}"));
            }
        }
        Verdict::UnsatUpToBound => tally.unsat_up_to_bound += 1,
    }
    Ok(())
}

/// Small knowledge bases checked by hand to have no model of any size.
pub fn unsat_fixtures() -> Vec<(&'static str, KnowledgeBase)> {
    let n = |c: &str| ClassExpr::named("k", c);
    let kb = |tbox: Vec<Axiom>, types: Vec<(u32, ClassExpr)>, roles: Vec<(u32, &str, u32)>| {
        let mut abox = ABox::new();
        for (i, c) in types {
            abox.assert_type(Term::Anon(i), c);
        }
        for (s, r, o) in roles {
            abox.assert_role(Term::Anon(s), r, Term::Anon(o));
        }
        KnowledgeBase::new(tbox, abox)
    };
    vec![
        ("self-complement", kb(vec![Axiom::SubClass(n("A"), ClassExpr::not(n("A")))], vec![(1, n("A"))], vec![])),
        (
            "existential into empty class",
            kb(
                vec![Axiom::SubClass(n("A"), ClassExpr::exists(Role::new("r"), n("B"))), Axiom::SubClass(n("B"), ClassExpr::Bottom)],
                vec![(1, n("A"))],
                vec![],
            ),
        ),
        (
            "inverse universal",
            kb(
                vec![
                    Axiom::SubClass(n("A"), ClassExpr::exists(Role::new("r"), n("B"))),
                    Axiom::SubClass(n("B"), ClassExpr::Forall(Role::inv("r"), Box::new(ClassExpr::not(n("A"))))),
                ],
                vec![(1, n("A"))],
                vec![],
            ),
        ),
        (
            "subproperty universal",
            kb(
                vec![
                    Axiom::SubProperty("r".into(), "s".into()),
                    Axiom::SubClass(n("A"), ClassExpr::Forall(Role::new("s"), Box::new(ClassExpr::Bottom))),
                ],
                vec![(1, n("A"))],
                vec![(1, "r", 2)],
            ),
        ),
        (
            "range against disjointness",
            kb(
                vec![Axiom::Range("r".into(), n("B")), Axiom::Disjoint(n("A"), n("B"))],
                vec![(2, n("A"))],
                vec![(1, "r", 2)],
            ),
        ),
        (
            "negated existential with witness",
            kb(
                vec![],
                vec![(1, ClassExpr::not(ClassExpr::exists(Role::inv("r"), n("C")))), (2, n("C"))],
                vec![(2, "r", 1)],
            ),
        ),
        (
            "exhausted union",
            kb(
                vec![Axiom::SubClass(n("A"), ClassExpr::or([n("B"), n("C")])), Axiom::Disjoint(n("A"), n("B"))],
                vec![(1, ClassExpr::and([n("A"), ClassExpr::not(n("C"))]))],
                vec![],
            ),
        ),
    ]
}

/// Micro-ontology sets over shared local names `X`, `Y`, `Z`, with a
/// bridge ontology that may relate the namespaces.
pub fn ontology_set() -> impl Strategy<Value = Vec<MicroOntology>> {
    let local = || prop::sample::select(&["X", "Y", "Z"][..]);
    let own = |p: &'static str| {
        prop::collection::vec((local(), local(), any::<bool>()), 1..4).prop_map(move |rows| {
            let axioms = rows
                .into_iter()
                .filter(|(a, b, _)| a != b)
                .map(|(a, b, neg)| {
                    let rhs = ClassExpr::named(p, b);
                    Axiom::SubClass(ClassExpr::named(p, a), if neg { ClassExpr::not(rhs) } else { rhs })
                })
                .collect();
            MicroOntology {
                prefix: p.to_string(),
                iri: format!("http://example.org/{p}.owl"),
                title: p.to_uppercase(),
                axioms,
                ..Default::default()
            }
        })
    };
    let ns = || prop::sample::select(&["a", "b", "c"][..]);
    let bridge = prop::collection::vec((ns(), local(), ns(), local()), 0..3).prop_map(|rows| MicroOntology {
        prefix: "z".into(),
        iri: "http://example.org/z.owl".into(),
        title: "Z".into(),
        axioms: rows
            .into_iter()
            .filter(|(p, a, q, b)| (p, a) != (q, b))
            .map(|(p, a, q, b)| Axiom::Disjoint(ClassExpr::named(p, a), ClassExpr::named(q, b)))
            .collect(),
        ..Default::default()
    });
    (own("a"), own("b"), own("c"), bridge).prop_map(|(a, b, c, z)| vec![a, b, c, z])
}

/// Every kept insertion leaves all classes satisfiable; rerunning with the
/// merged axioms added as one more ontology keeps no new relation and
/// yields the same sense groups.
pub fn check_merge(onts: &[MicroOntology]) -> Result<(), String> {
    let inv = match partition_senses(onts) {
        Ok(inv) => inv,
        Err(MergeError::InconsistentInput { .. }) => return Ok(()),
        Err(MergeError::MergeInconsistent { .. }) => {
            let union: Vec<Axiom> = onts.iter().flat_map(|o| o.axioms.iter().cloned()).collect();
            let bad = Reasoner::default().unsatisfiable_classes(&union).map_err(|e| e.to_string())?;
            return if bad.is_empty() { Err("refused a merge whose inputs are jointly coherent".into()) } else { Ok(()) };
        }
        Err(e) => return Err(e.to_string()),
    };
    let r = Reasoner::default();
    let bad = r.unsatisfiable_classes(&inv.merged_tbox).map_err(|e| e.to_string())?;
    if !bad.is_empty() {
        return Err(format!("merged ontology has unsatisfiable classes {bad:?}"));
    }
    let mut again = onts.to_vec();
    again.push(MicroOntology {
        prefix: "merged".into(),
        iri: "http://example.org/merged.owl".into(),
        title: "merged".into(),
        axioms: inv.merged_tbox.clone(),
        ..Default::default()
    });
    let inv2 = partition_senses(&again).map_err(|e| format!("rerun failed: {e}"))?;
    let kept = |i: &cnl_core::merge::SenseInventory| -> BTreeSet<(Iri, Iri)> {
        i.kept().map(|k| (k.sub.clone(), k.sup.clone())).collect()
    };
    if kept(&inv) != kept(&inv2) {
        return Err("rerun kept a different set of insertions".into());
    }
    let members = |i: &cnl_core::merge::SenseInventory| -> Vec<Vec<Iri>> { i.groups.iter().map(|g| g.members.clone()).collect() };
    if members(&inv) != members(&inv2) {
        return Err("rerun changed the sense groups".into());
    }
    Ok(())
}

pub fn story_templates() -> Vec<ProceduralTemplate> {
    parse_templates(&super::fixture("lrrh/templates.tpl")).unwrap()
}

#[derive(Debug, Clone)]
pub enum Step {
    Type(u32, &'static str),
    Stores(u32, u32),
    Invoke(&'static str, u32, u32, u32),
}

pub fn steps() -> impl Strategy<Value = Vec<Step>> {
    let obj = || 1u32..=4;
    let step = prop_oneof![
        2 => (obj(), prop::sample::select(&["x:P", "x:Q"][..])).prop_map(|(o, c)| Step::Type(o, c)),
        3 => (obj(), obj()).prop_map(|(a, b)| Step::Stores(a, b)),
        3 => (prop::sample::select(&["Residence", "Removing", "Bringing"][..]), obj(), obj(), obj())
            .prop_map(|(t, a, b, c)| Step::Invoke(t, a, b, c)),
    ];
    prop::collection::vec(step, 1..8)
}

pub fn compile_steps(steps: &[Step], templates: &[ProceduralTemplate]) -> Vec<CompiledStatement> {
    let o = |n: u32| Term::Anon(n);
    steps
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut st = match s {
                Step::Type(x, c) => CompiledStatement {
                    op: UpdateOp::insert([Triple::new(o(*x), Iri::rdf_type(), c.parse().unwrap())]),
                    ..Default::default()
                },
                Step::Stores(a, b) => CompiledStatement {
                    op: UpdateOp::insert([Triple::new(o(*a), Iri::property("stores"), o(*b))]),
                    ..Default::default()
                },
                Step::Invoke(name, a, b, c) => {
                    let t = templates.iter().find(|t| t.name == *name).unwrap();
                    let third = match *name {
                        "Residence" => Slot::Prep("in".into()),
                        "Removing" => Slot::Prep("from".into()),
                        _ => Slot::Prep("to".into()),
                    };
                    let args = vec![(Slot::Subject, o(*a)), (Slot::Object, o(*b)), (third, o(*c))];
                    let args = if *name == "Residence" {
                        vec![(Slot::Subject, o(*a)), (Slot::Prep("with".into()), o(*b)), (Slot::Prep("in".into()), o(*c))]
                    } else {
                        args
                    };
                    compile_invocation(t, &args).unwrap()
                }
            };
            st.label = cnl_core::rdf::step_label(i);
            st
        })
        .collect()
}

fn ground(p: &TriplePattern, b: &Bindings) -> Option<Triple> {
    p.substitute(b).ground()
}

/// Between consecutive snapshots only triples touched by the step's op or
/// listed among its implicit inserts change; replaying the exported ops
/// reproduces the trace; two runs agree.
pub fn check_exec(statements: &[CompiledStatement], tbox: &[Axiom]) -> Result<(), String> {
    let r = Reasoner::default();
    let exec: Execution = match run(statements, tbox, &r) {
        Ok(e) => e,
        Err(_) => return Ok(()),
    };
    let mut prev = Snapshot::default();
    for (k, snap) in exec.trace.snapshots.iter().enumerate() {
        let row = &exec.report[k];
        let mut touched: BTreeSet<Triple> = row.implicit.iter().map(|i| i.triple.clone()).collect();
        let solutions = if row.explicit.where_patterns.is_empty() {
            vec![Bindings::new()]
        } else {
            cnl_core::rdf::match_pattern(&prev, &row.explicit.where_patterns, &row.explicit.filters)
        };
        for b in &solutions {
            for p in row.explicit.deletes.iter().chain(&row.explicit.inserts) {
                touched.extend(ground(p, b));
            }
        }
        let changed: BTreeSet<&Triple> = prev.triples.symmetric_difference(&snap.triples).collect();
        if let Some(t) = changed.iter().find(|t| !touched.contains(**t)) {
            return Err(format!("step {}: {t} changed without being touched", snap.label));
        }
        let direct = apply_update(&prev, &row.explicit, &Bindings::new()).map_err(|e| e.to_string())?;
        let mut expected = direct.triples.clone();
        expected.extend(row.implicit.iter().map(|i| i.triple.clone()));
        if expected != snap.triples {
            return Err(format!("step {}: snapshot is not op result plus implicit inserts", snap.label));
        }
        prev = snap.clone();
    }
    let replayed = replay(&exec.replay_ops()).map_err(|e| e.to_string())?;
    if replayed != exec.trace {
        return Err("replay differs from the executed trace".into());
    }
    if run(statements, tbox, &r).map_err(|e| e.to_string())? != exec {
        return Err("two runs differ".into());
    }
    Ok(())
}

pub fn small_trace() -> impl Strategy<Value = Trace> {
    let term = || (1u32..=6).prop_map(Term::Anon);
    let triple = prop_oneof![
        3 => (term(), prop::sample::select(&["p", "q"][..]), term()).prop_map(|(s, p, o)| Triple::new(s, Iri::property(p), o)),
        1 => (term(), prop::sample::select(&["x:K", "x:L"][..])).prop_map(|(s, c)| Triple::new(s, Iri::rdf_type(), c.parse().unwrap())),
    ];
    prop::collection::vec(prop::collection::btree_set(triple, 0..6), 1..=8).prop_map(|steps| Trace {
        snapshots: steps
            .into_iter()
            .enumerate()
            .map(|(i, ts)| {
                let mut s = Snapshot::new(cnl_core::rdf::step_label(i));
                for t in ts {
                    s.add(t, false);
                }
                s
            })
            .collect(),
    })
}

pub fn small_query() -> impl Strategy<Value = TemporalQuery> {
    let var = || prop::sample::select(&["x", "y", "z"][..]).prop_map(Term::var);
    let node = || prop_oneof![3 => var(), 1 => (1u32..=6).prop_map(Term::Anon)];
    let pattern = prop_oneof![
        3 => (node(), prop::sample::select(&["p", "q"][..]), node())
            .prop_map(|(s, p, o)| TriplePattern::new(s, Term::Iri(Iri::property(p)), o)),
        1 => (var(), prop::sample::select(&["x:K", "x:L"][..]))
            .prop_map(|(s, c)| TriplePattern::new(s, Term::Iri(Iri::rdf_type()), c.parse().unwrap())),
    ];
    let selector = prop_oneof![
        Just(Selector::Any),
        Just(Selector::Min),
        Just(Selector::Step { var: "n".into(), offset: 0 }),
        prop::sample::select(&["A", "B", "C"][..]).prop_map(|l| Selector::Label(l.into())),
    ];
    let block = (selector, prop::collection::vec(pattern, 1..3))
        .prop_map(|(selector, patterns)| Block { selector, patterns, filters: vec![] });
    let second = prop::option::of((1u32..=2, prop::collection::vec((var(), var()), 1..2)));
    (block, second, any::<bool>()).prop_map(|(first, second, star)| {
        let mut blocks = vec![first.clone()];
        if let (Selector::Step { .. }, Some((k, pairs))) = (&first.selector, second) {
            blocks.push(Block {
                selector: Selector::Step { var: "n".into(), offset: k },
                patterns: pairs
                    .into_iter()
                    .map(|(a, b)| TriplePattern::new(a, Term::Iri(Iri::property("p")), b))
                    .collect(),
                filters: vec![],
            });
        }
        let projection = if star {
            Projection::All
        } else {
            let mut vars = vec!["x".to_string()];
            if blocks.iter().any(|b| matches!(b.selector, Selector::Step { .. })) {
                vars.push("n".into());
            }
            Projection::Vars(vars)
        };
        TemporalQuery { projection, blocks }
    })
}

/// Direct enumeration of step indexes and variable assignments.
pub fn brute_force_answers(q: &TemporalQuery, trace: &Trace) -> BTreeSet<BTreeMap<String, String>> {
    let types: BTreeSet<Triple> =
        trace.snapshots.iter().flat_map(|s| s.triples.iter().filter(|t| t.is_type()).cloned()).collect();
    let holds = |i: usize, t: &Triple| if t.is_type() { types.contains(t) } else { trace.snapshots[i].triples.contains(t) };
    let mut terms: BTreeSet<Term> = BTreeSet::new();
    for s in &trace.snapshots {
        for t in &s.triples {
            terms.insert(t.s.clone());
            terms.insert(t.o.clone());
        }
    }
    let terms: Vec<Term> = terms.into_iter().collect();
    let vars: Vec<String> = {
        let mut v: BTreeSet<String> = BTreeSet::new();
        for b in &q.blocks {
            for p in &b.patterns {
                v.extend(p.vars().map(str::to_string));
            }
        }
        v.into_iter().collect()
    };
    let block_ok = |b: &Block, i: usize, asg: &Bindings| b.patterns.iter().all(|p| p.substitute(asg).ground().is_some_and(|t| holds(i, &t)));
    let block_vars = |b: &Block| -> BTreeSet<String> { b.patterns.iter().flat_map(|p| p.vars().map(str::to_string)).collect() };
    let has_step = q.step_var().is_some();
    let ns: Vec<Option<usize>> = if has_step { (0..trace.len()).map(Some).collect() } else { vec![None] };
    let mut out = BTreeSet::new();
    let total = terms.len().pow(vars.len() as u32);
    for n in ns {
        for code in 0..total {
            let mut asg = Bindings::new();
            let mut c = code;
            for v in &vars {
                asg.insert(v.clone(), terms[c % terms.len()].clone());
                c /= terms.len();
            }
            let ok = q.blocks.iter().all(|b| match &b.selector {
                Selector::Step { offset, .. } => {
                    let i = n.unwrap() + *offset as usize;
                    i < trace.len() && block_ok(b, i, &asg)
                }
                Selector::Any => (0..trace.len()).any(|i| block_ok(b, i, &asg)),
                Selector::Min => {
                    let own = block_vars(b);
                    let first = (0..trace.len()).find(|&i| {
                        (0..terms.len().pow(own.len() as u32)).any(|code| {
                            let mut a = Bindings::new();
                            let mut c = code;
                            for v in &own {
                                a.insert(v.clone(), terms[c % terms.len()].clone());
                                c /= terms.len();
                            }
                            block_ok(b, i, &a)
                        })
                    });
                    first.is_some_and(|i| block_ok(b, i, &asg))
                }
                Selector::Label(l) => trace.index_of(l).is_some_and(|i| block_ok(b, i, &asg)),
            });
            if ok {
                let mut row: BTreeMap<String, String> = asg.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
                if let Some(n) = n {
                    row.insert("n".into(), trace.snapshots[n].label.clone());
                }
                if let Projection::Vars(vs) = &q.projection {
                    row.retain(|k, _| vs.contains(k));
                }
                out.insert(row);
            }
        }
    }
    out
}

pub fn check_query(q: &TemporalQuery, trace: &Trace) -> Result<(), String> {
    let got: BTreeSet<BTreeMap<String, String>> =
        evaluate(q, trace, &[]).map_err(|e| e.to_string())?.rows.into_iter().collect();
    let want = brute_force_answers(q, trace);
    if got != want {
        return Err(format!("evaluate {got:?} but enumeration {want:?}"));
    }
    Ok(())
}

/// Runs `check` on `cases` generated inputs with a fixed seed.
pub fn run_property<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl FnMut(&S::Value) -> Result<(), String>,
) -> Result<u32, String>
where
    S::Value: std::fmt::Debug,
{
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]);
    let mut runner = TestRunner::new_with_rng(config, rng);
    let count = std::cell::Cell::new(0);
    let check = std::cell::RefCell::new(check);
    runner
        .run(&strategy, |v| {
            count.set(count.get() + 1);
            (check.borrow_mut())(&v).map_err(proptest::test_runner::TestCaseError::fail)
        })
        .map_err(|e| e.to_string())?;
    Ok(count.get())
}

/// Answers every open ambiguity with the candidate at the next index,
/// cycling through `picks`.
pub struct IndexProvider {
    pub picks: Vec<usize>,
    pub pos: usize,
}

impl ChoiceProvider for IndexProvider {
    fn ask(&mut self, item: &AmbiguityItem, _: &Discourse) -> Option<String> {
        let pick = self.picks[self.pos % self.picks.len()];
        self.pos += 1;
        item.candidates.get(pick % item.candidates.len().max(1)).map(|c| c.id.clone())
    }
}

pub fn picks() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..4, 1..6)
}

fn canonical_entity(e: &EntityRef, seen: &mut Vec<u32>) -> String {
    match e {
        EntityRef::Known(id) => {
            let i = seen.iter().position(|x| x == id).unwrap_or_else(|| {
                seen.push(*id);
                seen.len() - 1
            });
            format!("e{i}")
        }
        EntityRef::Open(i) => format!("open{i}"),
    }
}

fn canonical_noun(n: &NounRef) -> String {
    match &n.sense {
        SenseRef::Known(iri) => iri.to_string(),
        SenseRef::Open(_) => n.surface.to_lowercase(),
    }
}

/// Atoms with discourse ids renamed by first appearance and noun surfaces
/// replaced by their senses.
pub fn canonical_atoms(atoms: &[ParaphraseAtom]) -> Vec<String> {
    let mut seen = Vec::new();
    atoms
        .iter()
        .map(|a| {
            let body = match &a.kind {
                AtomKind::Type { entity, noun } => format!("{}:{}", canonical_entity(entity, &mut seen), canonical_noun(noun)),
                AtomKind::Property { subject, property, object } => {
                    let s = canonical_entity(subject, &mut seen);
                    format!("{s} {property} {}", canonical_entity(object, &mut seen))
                }
                AtomKind::Invocation { verb, args, .. } => {
                    let args: Vec<String> =
                        args.iter().map(|(slot, e)| format!("{slot:?}={}", canonical_entity(e, &mut seen))).collect();
                    format!("{verb:?}({})", args.join(","))
                }
                AtomKind::NegatedExistential { entity, property, inverse, filler } => {
                    let e = canonical_entity(entity, &mut seen);
                    format!("{e} not {property}{} {}", if *inverse { "^-1" } else { "" }, canonical_noun(filler))
                }
            };
            format!("{}. {body}", a.label)
        })
        .collect()
}

/// Disambiguates `text` with the given picks; when that succeeds, both
/// paraphrase styles parse back to the same atoms up to renaming.
pub fn check_round_trip(text: &str, ctx: &WsdContext, picks: &[usize]) -> Result<(), String> {
    let d = parse_factual(text, ctx.lexicon).map_err(|e| e.to_string())?;
    let mut provider = IndexProvider { picks: picks.to_vec(), pos: 0 };
    let Ok(resolved) = disambiguate(&d, ctx, &[], &mut provider) else {
        return Ok(());
    };
    let want = canonical_atoms(&resolved.atoms);
    for style in [Style::Narrative, Style::Formal] {
        let text = render_paraphrase(&resolved.atoms, ctx.lexicon, style).map_err(|e| format!("{e:?}"))?;
        let back = parse_factual(&text, ctx.lexicon).map_err(|e| format!("{text}: {e}"))?;
        if !back.items.is_empty() {
            return Err(format!("paraphrase is ambiguous again: {text}"));
        }
        let got = canonical_atoms(&back.atoms);
        if got != want {
            return Err(format!("{style:?} paraphrase does not round trip:\n{text}\n{want:?}\n{got:?}"));
        }
    }
    Ok(())
}

/// Background for the executor property: two disjoint classes.
pub fn exec_tbox() -> Vec<Axiom> {
    vec![Axiom::Disjoint(ClassExpr::named("x", "P"), ClassExpr::named("x", "Q"))]
}
