//! Tableau procedure for ALCI with a role hierarchy.
//!
//! The TBox is preprocessed by absorption: axioms whose left side reduces to
//! a named class are unfolded lazily, axioms of the form `∃r.C ⊑ D` become
//! `C ⊑ ∀r⁻.D`, and everything else is internalized as a global constraint
//! added to every node. Inverse roles need equality blocking, re-evaluated
//! every time the generating rule fires.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::dl::{normalize, ABox, Axiom, ClassExpr, Role};
use crate::rdf::{Iri, Term};

use super::ReasonerError;

type CId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct R {
    name: u32,
    inv: bool,
}

impl R {
    fn inverted(self) -> R {
        R { name: self.name, inv: !self.inv }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum C {
    Top,
    Bottom,
    Atom(u32),
    Neg(u32),
    And(Vec<CId>),
    Or(Vec<CId>),
    Some(R, CId),
    All(R, CId),
}

#[derive(Debug, Default, Clone)]
struct Interner {
    map: HashMap<C, CId>,
    items: Vec<C>,
    atoms: HashMap<Iri, u32>,
    roles: BTreeMap<String, u32>,
}

impl Interner {
    fn atom(&mut self, iri: &Iri) -> u32 {
        let next = self.atoms.len() as u32;
        *self.atoms.entry(iri.clone()).or_insert(next)
    }

    fn role_id(&mut self, name: &str) -> u32 {
        let next = self.roles.len() as u32;
        *self.roles.entry(name.to_string()).or_insert(next)
    }

    fn role(&mut self, r: &Role) -> R {
        R { name: self.role_id(&r.name), inv: r.inverse }
    }

    fn put(&mut self, c: C) -> CId {
        if let Some(&id) = self.map.get(&c) {
            return id;
        }
        let id = self.items.len() as CId;
        self.items.push(c.clone());
        self.map.insert(c, id);
        id
    }

    /// Interns an expression already in negation normal form.
    fn intern(&mut self, e: &ClassExpr) -> CId {
        let c = match e {
            ClassExpr::Top => C::Top,
            ClassExpr::Bottom => C::Bottom,
            ClassExpr::Named(i) => C::Atom(self.atom(i)),
            ClassExpr::Not(inner) => match &**inner {
                ClassExpr::Named(i) => C::Neg(self.atom(i)),
                other => return self.intern(&normalize(&ClassExpr::not(other.clone()))),
            },
            ClassExpr::And(v) => {
                let mut ids: Vec<CId> = v.iter().map(|x| self.intern(x)).collect();
                ids.sort_unstable();
                ids.dedup();
                C::And(ids)
            }
            ClassExpr::Or(v) => {
                // Source order is kept: branches are explored in it.
                let mut ids: Vec<CId> = Vec::new();
                for x in v {
                    let id = self.intern(x);
                    if !ids.contains(&id) {
                        ids.push(id);
                    }
                }
                C::Or(ids)
            }
            ClassExpr::Exists(r, f) => {
                let f = self.intern(f);
                C::Some(self.role(r), f)
            }
            ClassExpr::Forall(r, f) => {
                let f = self.intern(f);
                C::All(self.role(r), f)
            }
        };
        self.put(c)
    }
}

#[derive(Default)]
struct Absorbed {
    unfold: BTreeMap<Iri, Vec<ClassExpr>>,
    global: Vec<ClassExpr>,
}

fn neg(e: &ClassExpr) -> ClassExpr {
    normalize(&ClassExpr::not(e.clone()))
}

fn absorb(lhs: ClassExpr, rhs: ClassExpr, out: &mut Absorbed) {
    match lhs {
        ClassExpr::Top => out.global.push(rhs),
        ClassExpr::Bottom => {}
        ClassExpr::Named(a) => out.unfold.entry(a).or_default().push(rhs),
        ClassExpr::Or(v) => {
            for x in v {
                absorb(x, rhs.clone(), out);
            }
        }
        ClassExpr::Exists(r, f) => absorb(*f, ClassExpr::forall(r.inverted(), rhs), out),
        ClassExpr::And(v) => {
            if let Some(i) = v.iter().position(|x| matches!(x, ClassExpr::Or(_))) {
                let mut others = v.clone();
                let ClassExpr::Or(ds) = others.remove(i) else { unreachable!() };
                for d in ds {
                    let mut conj = others.clone();
                    conj.push(d);
                    absorb(ClassExpr::and(conj), rhs.clone(), out);
                }
            } else if let Some(i) = v.iter().position(|x| matches!(x, ClassExpr::Named(_))) {
                let mut others = v.clone();
                let ClassExpr::Named(a) = others.remove(i) else { unreachable!() };
                let mut disj: Vec<ClassExpr> = others.iter().map(neg).collect();
                disj.push(rhs);
                out.unfold.entry(a).or_default().push(ClassExpr::or(disj));
            } else if let Some(i) = v.iter().position(|x| matches!(x, ClassExpr::Exists(..))) {
                let mut others = v.clone();
                let ClassExpr::Exists(r, f) = others.remove(i) else { unreachable!() };
                let mut disj: Vec<ClassExpr> = others.iter().map(neg).collect();
                disj.push(rhs);
                absorb(*f, ClassExpr::forall(r.inverted(), ClassExpr::or(disj)), out);
            } else {
                out.global.push(ClassExpr::or([neg(&ClassExpr::And(v)), rhs]));
            }
        }
        other => out.global.push(ClassExpr::or([neg(&other), rhs])),
    }
}

/// A TBox compiled for repeated consistency tests.
#[derive(Debug, Clone)]
pub struct PreparedTBox {
    interner: Interner,
    unfold: HashMap<u32, Vec<CId>>,
    global: Vec<CId>,
    /// `sub[a][b]`: role `a` is a (reflexive, transitive) subrole of `b`.
    sub: Vec<Vec<bool>>,
    role_pairs: Vec<(String, String)>,
}

impl PreparedTBox {
    pub fn new(tbox: &[Axiom]) -> Self {
        let mut absorbed = Absorbed::default();
        let mut role_pairs = Vec::new();
        for ax in tbox {
            if let Axiom::SubProperty(a, b) = ax {
                role_pairs.push((a.clone(), b.clone()));
            }
            for (l, r) in ax.subsumptions() {
                absorb(normalize(&l), normalize(&r), &mut absorbed);
            }
        }
        let mut interner = Interner::default();
        for ax in tbox {
            for r in ax.roles() {
                interner.role_id(&r);
            }
        }
        let mut unfold: HashMap<u32, Vec<CId>> = HashMap::new();
        for (a, rhs) in &absorbed.unfold {
            let atom = interner.atom(a);
            let ids: Vec<CId> = rhs.iter().map(|e| interner.intern(e)).collect();
            unfold.entry(atom).or_default().extend(ids);
        }
        let global = absorbed.global.iter().map(|e| interner.intern(e)).collect();
        let mut p = PreparedTBox { interner, unfold, global, sub: Vec::new(), role_pairs };
        p.close_roles();
        p
    }

    fn close_roles(&mut self) {
        let n = self.interner.roles.len();
        let mut sub = vec![vec![false; n]; n];
        for (i, row) in sub.iter_mut().enumerate() {
            row[i] = true;
        }
        for (a, b) in &self.role_pairs {
            let a = self.interner.roles[a] as usize;
            let b = self.interner.roles[b] as usize;
            sub[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if sub[i][k] {
                    for j in 0..n {
                        if sub[k][j] {
                            sub[i][j] = true;
                        }
                    }
                }
            }
        }
        self.sub = sub;
    }

    /// Decides consistency of this TBox together with `abox`.
    pub fn consistent(&self, abox: &ABox, budget: usize) -> Result<bool, ReasonerError> {
        let mut me = self.clone();
        let mut graph = Graph::default();
        let mut index: BTreeMap<&Term, usize> = BTreeMap::new();
        for ind in &abox.individuals {
            if ind.is_var() {
                return Err(ReasonerError::UnsupportedAxiom(format!("variable {ind} in assertions")));
            }
            index.insert(ind, graph.nodes.len());
            graph.nodes.push(Node { label: BTreeMap::new(), parent: None, root: true });
        }
        for (ind, class) in &abox.types {
            let x = *index
                .get(ind)
                .ok_or_else(|| ReasonerError::UnsupportedAxiom(format!("{ind} asserted but not declared")))?;
            let c = me.interner.intern(&normalize(class));
            graph.nodes[x].label.insert(c, Deps::new());
        }
        for (_, r, _) in &abox.roles {
            me.interner.role_id(r);
        }
        if me.sub.len() != me.interner.roles.len() {
            me.close_roles();
        }
        for (s, r, o) in &abox.roles {
            let (Some(&a), Some(&b)) = (index.get(s), index.get(o)) else {
                return Err(ReasonerError::UnsupportedAxiom(format!("{s} {r} {o}: undeclared individual")));
            };
            let role = R { name: me.interner.roles[r], inv: false };
            graph.edges.push(Edge { from: a, to: b, role, deps: Deps::new() });
        }
        for x in 0..graph.nodes.len() {
            for &g in &me.global {
                graph.nodes[x].label.insert(g, Deps::new());
            }
        }
        let mut search = Search { used: graph.nodes.len(), budget, next_branch: 0 };
        Ok(matches!(me.expand(graph, &mut search)?, Outcome::Open))
    }

    fn role_sub(&self, a: R, b: R) -> bool {
        a.inv == b.inv && self.sub[a.name as usize][b.name as usize]
    }

    /// `r`-neighbours of `x`, each with the dependencies of the connecting edge.
    fn neighbours(&self, g: &Graph, x: usize, r: R) -> Vec<(usize, Deps)> {
        let mut out = Vec::new();
        for e in &g.edges {
            if e.from == x && self.role_sub(e.role, r) {
                out.push((e.to, e.deps.clone()));
            }
            if e.to == x && self.role_sub(e.role.inverted(), r) {
                out.push((e.from, e.deps.clone()));
            }
        }
        out
    }

    fn negation_of_atom(&self, a: u32) -> Option<CId> {
        self.interner.map.get(&C::Neg(a)).copied()
    }

    /// Dependencies of the first clash in `label`, if any.
    fn clash(&self, label: &Label) -> Option<Deps> {
        label.iter().find_map(|(&c, deps)| match &self.interner.items[c as usize] {
            C::Bottom => Some(deps.clone()),
            C::Atom(a) => self
                .negation_of_atom(*a)
                .and_then(|n| label.get(&n))
                .map(|other| deps.union(other).copied().collect()),
            _ => None,
        })
    }

    fn blocked(&self, g: &Graph) -> Vec<bool> {
        let n = g.nodes.len();
        let mut direct = vec![false; n];
        for y in 0..n {
            if g.nodes[y].root {
                continue;
            }
            let mut p = g.nodes[y].parent;
            while let Some(a) = p {
                if g.nodes[a].root {
                    break;
                }
                if g.nodes[a].label.keys().eq(g.nodes[y].label.keys()) {
                    direct[y] = true;
                    break;
                }
                p = g.nodes[a].parent;
            }
        }
        // Parents always precede children, so one forward pass suffices.
        let mut blocked = direct.clone();
        for y in 0..n {
            if let Some(p) = g.nodes[y].parent {
                if blocked[p] {
                    blocked[y] = true;
                }
            }
        }
        blocked
    }

    /// Applies the deterministic rules (⊓, unfolding, ∀) to a fixpoint.
    /// Returns the dependencies of a clash if one arises.
    fn saturate(&self, g: &mut Graph) -> Result<(), Deps> {
        loop {
            let blocked = self.blocked(g);
            let mut changed = false;
            for x in 0..g.nodes.len() {
                if blocked[x] && g.nodes[x].parent.is_some_and(|p| blocked[p]) {
                    continue;
                }
                let label: Vec<(CId, Deps)> = g.nodes[x].label.iter().map(|(&c, d)| (c, d.clone())).collect();
                for (c, deps) in label {
                    match &self.interner.items[c as usize] {
                        C::And(v) => {
                            for &m in v {
                                changed |= add(&mut g.nodes[x].label, m, &deps);
                            }
                        }
                        C::Atom(a) => {
                            if let Some(ds) = self.unfold.get(a) {
                                for &d in ds {
                                    changed |= add(&mut g.nodes[x].label, d, &deps);
                                }
                            }
                        }
                        C::All(r, f) => {
                            for (y, edge) in self.neighbours(g, x, *r) {
                                let both: Deps = deps.union(&edge).copied().collect();
                                changed |= add(&mut g.nodes[y].label, *f, &both);
                            }
                        }
                        _ => {}
                    }
                }
            }
            if let Some(deps) = g.nodes.iter().find_map(|n| self.clash(&n.label)) {
                return Err(deps);
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn expand(&self, mut g: Graph, search: &mut Search) -> Result<Outcome, ReasonerError> {
        loop {
            if let Err(deps) = self.saturate(&mut g) {
                return Ok(Outcome::Clash(deps));
            }
            let blocked = self.blocked(&g);
            if let Some((x, ds, base)) = self.open_disjunction(&g, &blocked) {
                let point = search.next_branch;
                search.next_branch += 1;
                let mut failed = base.clone();
                for d in ds {
                    if let C::Atom(a) = self.interner.items[d as usize] {
                        if let Some(other) = self.negation_of_atom(a).and_then(|n| g.nodes[x].label.get(&n)) {
                            failed.extend(other.iter().copied());
                            continue;
                        }
                    }
                    search.charge()?;
                    let mut deps = base.clone();
                    deps.insert(point);
                    let mut branch = g.clone();
                    branch.nodes[x].label.insert(d, deps);
                    match self.expand(branch, search)? {
                        Outcome::Open => return Ok(Outcome::Open),
                        Outcome::Clash(why) if !why.contains(&point) => return Ok(Outcome::Clash(why)),
                        Outcome::Clash(why) => failed.extend(why.into_iter().filter(|&b| b != point)),
                    }
                }
                return Ok(Outcome::Clash(failed));
            }
            match self.open_existential(&g, &blocked) {
                Some((x, r, f, deps)) => {
                    search.charge()?;
                    let y = g.nodes.len();
                    let mut label: Label = self.global.iter().map(|&c| (c, deps.clone())).collect();
                    label.insert(f, deps.clone());
                    g.nodes.push(Node { label, parent: Some(x), root: false });
                    g.edges.push(Edge { from: x, to: y, role: r, deps });
                }
                None => return Ok(Outcome::Open),
            }
        }
    }

    fn open_disjunction(&self, g: &Graph, blocked: &[bool]) -> Option<(usize, Vec<CId>, Deps)> {
        for (x, node) in g.nodes.iter().enumerate() {
            if blocked[x] && node.parent.is_some_and(|p| blocked[p]) {
                continue;
            }
            for (&c, deps) in &node.label {
                if let C::Or(ds) = &self.interner.items[c as usize] {
                    if !ds.iter().any(|d| node.label.contains_key(d)) {
                        return Some((x, ds.clone(), deps.clone()));
                    }
                }
            }
        }
        None
    }

    fn open_existential(&self, g: &Graph, blocked: &[bool]) -> Option<(usize, R, CId, Deps)> {
        for (x, node) in g.nodes.iter().enumerate() {
            if blocked[x] {
                continue;
            }
            for (&c, deps) in &node.label {
                if let C::Some(r, f) = self.interner.items[c as usize] {
                    let witnessed = self.neighbours(g, x, r).into_iter().any(|(y, _)| g.nodes[y].label.contains_key(&f));
                    if !witnessed {
                        return Some((x, r, f, deps.clone()));
                    }
                }
            }
        }
        None
    }
}

/// Branch points a label entry or edge depends on.
type Deps = BTreeSet<u32>;
type Label = BTreeMap<CId, Deps>;

fn add(label: &mut Label, c: CId, deps: &Deps) -> bool {
    if label.contains_key(&c) {
        return false;
    }
    label.insert(c, deps.clone());
    true
}

enum Outcome {
    Open,
    Clash(Deps),
}

struct Search {
    used: usize,
    budget: usize,
    next_branch: u32,
}

impl Search {
    fn charge(&mut self) -> Result<(), ReasonerError> {
        self.used += 1;
        if self.used > self.budget {
            return Err(ReasonerError::BudgetExceeded(self.budget));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Node {
    label: Label,
    parent: Option<usize>,
    root: bool,
}

#[derive(Debug, Clone)]
struct Edge {
    from: usize,
    to: usize,
    role: R,
    deps: Deps,
}

#[derive(Debug, Clone, Default)]
struct Graph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}
