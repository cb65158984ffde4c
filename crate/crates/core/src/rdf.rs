//! Terms, triples, immutable snapshots and the trace of snapshots produced by
//! executing a narrative.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Namespace used for `rdf:type`.
pub const RDF_NS: &str = "rdf";

/// A qualified name `prefix:local`. Properties live in the shared (empty)
/// namespace and render without a prefix.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri {
    pub ns: String,
    pub local: String,
}

impl Iri {
    pub fn new(ns: impl Into<String>, local: impl Into<String>) -> Self {
        let iri = Iri { ns: ns.into(), local: local.into() };
        debug_assert!(!iri.local.is_empty() && !iri.local.contains(char::is_whitespace));
        iri
    }

    /// A property name in the shared namespace.
    pub fn property(local: impl Into<String>) -> Self {
        Iri::new("", local)
    }

    pub fn rdf_type() -> Self {
        Iri::new(RDF_NS, "type")
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ns.is_empty() {
            write!(f, "{}", self.local)
        } else {
            write!(f, "{}:{}", self.ns, self.local)
        }
    }
}

impl FromStr for Iri {
    type Err = TermParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('<').trim_end_matches('>');
        if s.is_empty() || s.contains(char::is_whitespace) {
            return Err(TermParseError(s.to_string()));
        }
        match s.split_once(':') {
            Some((ns, local)) if !local.is_empty() => Ok(Iri::new(ns, local)),
            Some(_) => Err(TermParseError(s.to_string())),
            None => Ok(Iri::property(s)),
        }
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed term `{0}`")]
pub struct TermParseError(pub String);

/// A node or predicate position in a triple or pattern.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Var(String),
    /// Discourse object, rendered `objN`.
    Anon(u32),
}

impl Term {
    pub fn iri(ns: &str, local: &str) -> Self {
        Term::Iri(Iri::new(ns, local))
    }

    pub fn var(name: &str) -> Self {
        Term::Var(name.trim_start_matches('?').to_string())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "{i}"),
            Term::Var(v) => write!(f, "?{v}"),
            Term::Anon(n) => write!(f, "obj{n}"),
        }
    }
}

impl FromStr for Term {
    type Err = TermParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('<').trim_end_matches('>');
        if let Some(v) = s.strip_prefix('?') {
            if v.is_empty() {
                return Err(TermParseError(s.to_string()));
            }
            return Ok(Term::Var(v.to_string()));
        }
        if let Some(n) = s.strip_prefix("obj").or_else(|| s.strip_prefix("Obj")) {
            if !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) {
                return n.parse().map(Term::Anon).map_err(|_| TermParseError(s.to_string()));
            }
        }
        s.parse().map(Term::Iri)
    }
}

impl Serialize for Term {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Term {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A stored triple. Never contains variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub s: Term,
    pub p: Iri,
    pub o: Term,
}

impl Triple {
    pub fn new(s: Term, p: Iri, o: Term) -> Self {
        debug_assert!(!s.is_var() && !o.is_var());
        Triple { s, p, o }
    }

    pub fn is_type(&self) -> bool {
        self.p == Iri::rdf_type()
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}> <{}> <{}>", self.s, self.p, self.o)
    }
}

/// A triple pattern; any position may be a variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TriplePattern {
    pub s: Term,
    pub p: Term,
    pub o: Term,
}

impl TriplePattern {
    pub fn new(s: Term, p: Term, o: Term) -> Self {
        TriplePattern { s, p, o }
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        [&self.s, &self.p, &self.o].into_iter().filter_map(Term::as_var)
    }

    pub fn substitute(&self, b: &Bindings) -> TriplePattern {
        TriplePattern { s: subst(&self.s, b), p: subst(&self.p, b), o: subst(&self.o, b) }
    }

    /// The ground triple, if no variables remain.
    pub fn ground(&self) -> Option<Triple> {
        match (&self.s, &self.p, &self.o) {
            (s, Term::Iri(p), o) if !s.is_var() && !o.is_var() => {
                Some(Triple { s: s.clone(), p: p.clone(), o: o.clone() })
            }
            _ => None,
        }
    }
}

impl From<&Triple> for TriplePattern {
    fn from(t: &Triple) -> Self {
        TriplePattern { s: t.s.clone(), p: Term::Iri(t.p.clone()), o: t.o.clone() }
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |t: &Term| match t {
            Term::Var(_) => t.to_string(),
            _ => format!("<{t}>"),
        };
        write!(f, "{} {} {}", show(&self.s), show(&self.p), show(&self.o))
    }
}

fn subst(t: &Term, b: &Bindings) -> Term {
    match t {
        Term::Var(v) => b.get(v).cloned().unwrap_or_else(|| t.clone()),
        _ => t.clone(),
    }
}

/// `left != right` filter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NotEqual {
    pub left: Term,
    pub right: Term,
}

impl NotEqual {
    /// False when either side stays unbound.
    pub fn holds(&self, b: &Bindings) -> bool {
        let l = subst(&self.left, b);
        let r = subst(&self.right, b);
        !l.is_var() && !r.is_var() && l != r
    }
}

impl fmt::Display for NotEqual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |t: &Term| match t {
            Term::Var(_) => t.to_string(),
            _ => format!("<{t}>"),
        };
        write!(f, "FILTER ({} != {})", show(&self.left), show(&self.right))
    }
}

pub type Bindings = BTreeMap<String, Term>;

/// How an update came to exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    #[default]
    Explicit,
    Entailed,
    Planned,
}

/// A delete/insert/where update statement.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UpdateOp {
    pub deletes: Vec<TriplePattern>,
    pub inserts: Vec<TriplePattern>,
    pub where_patterns: Vec<TriplePattern>,
    pub filters: Vec<NotEqual>,
    pub provenance: Provenance,
}

impl UpdateOp {
    pub fn insert(triples: impl IntoIterator<Item = Triple>) -> Self {
        UpdateOp { inserts: triples.into_iter().map(|t| (&t).into()).collect(), ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.deletes.is_empty() && self.inserts.is_empty() && self.where_patterns.is_empty()
    }
}

impl fmt::Display for UpdateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let block = |ps: &[TriplePattern]| ps.iter().map(ToString::to_string).collect::<Vec<_>>().join(". ");
        let mut parts = Vec::new();
        if !self.deletes.is_empty() {
            parts.push(format!("DELETE {{{}}}", block(&self.deletes)));
        }
        if !self.inserts.is_empty() {
            parts.push(format!("INSERT {{{}}}", block(&self.inserts)));
        }
        if !self.where_patterns.is_empty() || !self.filters.is_empty() {
            let mut body = block(&self.where_patterns);
            for flt in &self.filters {
                if !body.is_empty() {
                    body.push_str(". ");
                }
                body.push_str(&flt.to_string());
            }
            parts.push(format!("WHERE {{{body}}}"));
        }
        write!(f, "{}", parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UpdateError {
    #[error("variable ?{0} has no binding")]
    UnboundVariable(String),
}

/// One immutable state of the knowledge base.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Snapshot {
    pub label: String,
    pub triples: BTreeSet<Triple>,
    /// Subset of `triples` that were entailed or planned rather than stated.
    pub implicit: BTreeSet<Triple>,
}

impl Snapshot {
    pub fn new(label: impl Into<String>) -> Self {
        Snapshot { label: label.into(), ..Default::default() }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn add(&mut self, t: Triple, implicit: bool) {
        if implicit {
            if !self.triples.contains(&t) {
                self.implicit.insert(t.clone());
            }
        } else {
            self.implicit.remove(&t);
        }
        self.triples.insert(t);
    }

    pub fn remove(&mut self, t: &Triple) {
        self.triples.remove(t);
        self.implicit.remove(t);
    }

    /// Every term occurring in a subject, predicate or object position.
    pub fn terms(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for t in &self.triples {
            out.insert(t.s.clone());
            out.insert(Term::Iri(t.p.clone()));
            out.insert(t.o.clone());
        }
        out
    }

    pub fn explicit(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter().filter(|t| !self.implicit.contains(*t))
    }
}

/// Applies `op` to `snapshot`: all where-solutions are computed first, then
/// every grounded delete is removed, then every grounded insert is added.
/// Inserts are flagged implicit unless the op is explicit.
pub fn apply_update(snapshot: &Snapshot, op: &UpdateOp, bindings: &Bindings) -> Result<Snapshot, UpdateError> {
    let solutions = if op.where_patterns.is_empty() {
        let ok = op.filters.iter().all(|f| f.holds(bindings));
        if ok { vec![bindings.clone()] } else { Vec::new() }
    } else {
        let pattern: Vec<_> = op.where_patterns.iter().map(|p| p.substitute(bindings)).collect();
        match_pattern(snapshot, &pattern, &op.filters_bound(bindings))
            .into_iter()
            .map(|mut b| {
                b.extend(bindings.iter().map(|(k, v)| (k.clone(), v.clone())));
                b
            })
            .collect()
    };

    let mut deletes = Vec::new();
    let mut inserts = Vec::new();
    for b in &solutions {
        for p in &op.deletes {
            deletes.push(ground(p, b)?);
        }
        for p in &op.inserts {
            inserts.push(ground(p, b)?);
        }
    }
    // With no solutions nothing is grounded; still report unbound variables
    // that no where-pattern could ever bind.
    if solutions.is_empty() {
        let bindable: BTreeSet<&str> = op.where_patterns.iter().flat_map(|p| p.vars()).collect();
        for p in op.deletes.iter().chain(&op.inserts) {
            if let Some(v) = p.vars().find(|v| !bindable.contains(v) && !bindings.contains_key(*v)) {
                return Err(UpdateError::UnboundVariable(v.to_string()));
            }
        }
    }

    let mut out = snapshot.clone();
    for t in &deletes {
        out.remove(t);
    }
    let implicit = op.provenance != Provenance::Explicit;
    for t in inserts {
        out.add(t, implicit);
    }
    Ok(out)
}

impl UpdateOp {
    fn filters_bound(&self, b: &Bindings) -> Vec<NotEqual> {
        self.filters
            .iter()
            .map(|f| NotEqual { left: subst(&f.left, b), right: subst(&f.right, b) })
            .collect()
    }
}

fn ground(p: &TriplePattern, b: &Bindings) -> Result<Triple, UpdateError> {
    let g = p.substitute(b);
    for t in [&g.s, &g.p, &g.o] {
        if let Term::Var(v) = t {
            return Err(UpdateError::UnboundVariable(v.clone()));
        }
    }
    g.ground().ok_or_else(|| UpdateError::UnboundVariable(format!("{}", g.p)))
}

/// Every binding under which all patterns ground to triples of `snapshot`
/// and all filters hold. Returned sorted and duplicate-free.
pub fn match_pattern(snapshot: &Snapshot, pattern: &[TriplePattern], filters: &[NotEqual]) -> Vec<Bindings> {
    match_in(&snapshot.triples, pattern, filters)
}

/// [`match_pattern`] over an arbitrary triple set.
pub fn match_in(triples: &BTreeSet<Triple>, pattern: &[TriplePattern], filters: &[NotEqual]) -> Vec<Bindings> {
    let mut out = BTreeSet::new();
    let mut current = Bindings::new();
    join(triples, pattern, &mut current, &mut out);
    out.into_iter().filter(|b| filters.iter().all(|f| f.holds(b))).collect()
}

fn join(triples: &BTreeSet<Triple>, rest: &[TriplePattern], b: &mut Bindings, out: &mut BTreeSet<Bindings>) {
    let Some((first, rest)) = rest.split_first() else {
        out.insert(b.clone());
        return;
    };
    let p = first.substitute(b);
    for t in triples {
        let mut added = Vec::new();
        let ok = unify(&p.s, &t.s, b, &mut added)
            && unify(&p.p, &Term::Iri(t.p.clone()), b, &mut added)
            && unify(&p.o, &t.o, b, &mut added);
        if ok {
            join(triples, rest, b, out);
        }
        for v in added {
            b.remove(&v);
        }
    }
}

fn unify(p: &Term, t: &Term, b: &mut Bindings, added: &mut Vec<String>) -> bool {
    match p {
        Term::Var(v) => match b.get(v) {
            Some(bound) => bound == t,
            None => {
                b.insert(v.clone(), t.clone());
                added.push(v.clone());
                true
            }
        },
        _ => p == t,
    }
}

/// Ordered sequence of snapshots with unique labels.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub snapshots: Vec<Snapshot>,
}

#[derive(Debug, Error)]
pub enum TraceFormatError {
    #[error("duplicate step label `{0}`")]
    DuplicateLabel(String),
    #[error("line {line}: {msg}")]
    Quad { line: usize, msg: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Term(#[from] TermParseError),
}

#[derive(Serialize, Deserialize)]
struct JsonTrace {
    steps: Vec<JsonStep>,
}

#[derive(Serialize, Deserialize)]
struct JsonStep {
    label: String,
    triples: Vec<[String; 3]>,
    implicit: Vec<[String; 3]>,
}

fn row(t: &Triple) -> [String; 3] {
    [t.s.to_string(), t.p.to_string(), t.o.to_string()]
}

fn parse_row(r: &[String; 3]) -> Result<Triple, TermParseError> {
    let s: Term = r[0].parse()?;
    let p: Iri = r[1].parse()?;
    let o: Term = r[2].parse()?;
    if s.is_var() || o.is_var() {
        return Err(TermParseError(format!("{} {} {}", r[0], r[1], r[2])));
    }
    Ok(Triple::new(s, p, o))
}

impl Trace {
    pub fn new(snapshots: Vec<Snapshot>) -> Result<Self, TraceFormatError> {
        let mut seen = BTreeSet::new();
        for s in &snapshots {
            if !seen.insert(s.label.clone()) {
                return Err(TraceFormatError::DuplicateLabel(s.label.clone()));
            }
        }
        Ok(Trace { snapshots })
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    pub fn get(&self, label: &str) -> Option<&Snapshot> {
        self.snapshots.iter().find(|s| s.label == label)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.snapshots.iter().position(|s| s.label == label)
    }

    pub fn to_json(&self) -> String {
        let doc = JsonTrace {
            steps: self
                .snapshots
                .iter()
                .map(|s| JsonStep {
                    label: s.label.clone(),
                    triples: s.triples.iter().map(row).collect(),
                    implicit: s.implicit.iter().map(row).collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, TraceFormatError> {
        let doc: JsonTrace = serde_json::from_str(text)?;
        let mut snapshots = Vec::with_capacity(doc.steps.len());
        for step in doc.steps {
            let mut s = Snapshot::new(step.label);
            for r in &step.triples {
                s.triples.insert(parse_row(r)?);
            }
            for r in &step.implicit {
                let t = parse_row(r)?;
                s.triples.insert(t.clone());
                s.implicit.insert(t);
            }
            snapshots.push(s);
        }
        Trace::new(snapshots)
    }

    /// One `s p o label .` line per triple per snapshot.
    pub fn to_quads(&self) -> String {
        let mut out = String::new();
        for s in &self.snapshots {
            for t in &s.triples {
                out.push_str(&format!("{} {} {} {} .\n", t.s, t.p, t.o, s.label));
            }
        }
        out
    }

    /// Reads the quad format back. Implicit flags are not part of that
    /// format, and snapshots that held no triples cannot be recovered.
    pub fn from_quads(text: &str) -> Result<Self, TraceFormatError> {
        let mut snapshots: Vec<Snapshot> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 || fields[4] != "." {
                return Err(TraceFormatError::Quad { line: i + 1, msg: "expected `s p o label .`".into() });
            }
            let t = parse_row(&[fields[0].into(), fields[1].into(), fields[2].into()])?;
            let label = fields[3];
            match snapshots.iter_mut().find(|s| s.label == label) {
                Some(s) => {
                    s.triples.insert(t);
                }
                None => {
                    let mut s = Snapshot::new(label);
                    s.triples.insert(t);
                    snapshots.push(s);
                }
            }
        }
        Trace::new(snapshots)
    }
}

/// Step labels: `A`..`Z`, then ordinals from 27 on.
pub fn step_label(index: usize) -> String {
    if index < 26 {
        ((b'A' + index as u8) as char).to_string()
    } else {
        (index + 1).to_string()
    }
}
