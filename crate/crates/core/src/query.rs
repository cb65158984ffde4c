//! Temporal queries over a trace: SPARQL-like basic graph patterns, each
//! evaluated at the steps chosen by its `WHERE-AT-STEP` selector.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::dl::{Axiom, ClassExpr};
use crate::rdf::{match_in, Bindings, Iri, NotEqual, Term, Trace, Triple, TriplePattern};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("query syntax: expected {expected}, found `{found}`")]
    Syntax { expected: String, found: String },
    #[error("query uses more than one step variable (?{0} and ?{1})")]
    TwoStepVariables(String, String),
    #[error("step offset +{0} is outside 1..=3")]
    Offset(u32),
    #[error("a WHERE-AT-STEP(any) block needs at least one pattern")]
    EmptyAnyBlock,
    #[error("offset selector ?{0}+k needs a block selecting ?{0}")]
    DanglingOffset(String),
    #[error("the trace is empty")]
    EmptyTrace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    /// `?n` plus an offset of 0..=3.
    Step { var: String, offset: u32 },
    Any,
    Min,
    Label(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub selector: Selector,
    pub patterns: Vec<TriplePattern>,
    pub filters: Vec<NotEqual>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    /// `SELECT *`: an existence question answered yes or no.
    All,
    Vars(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalQuery {
    pub projection: Projection,
    pub blocks: Vec<Block>,
}

impl TemporalQuery {
    pub fn step_var(&self) -> Option<&str> {
        self.blocks.iter().find_map(|b| match &b.selector {
            Selector::Step { var, .. } => Some(var.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Iri(String),
    Var(String),
    Punct(char),
    NotEq,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => write!(f, "{w}"),
            Tok::Iri(i) => write!(f, "<{i}>"),
            Tok::Var(v) => write!(f, "?{v}"),
            Tok::Punct(c) => write!(f, "{c}"),
            Tok::NotEq => write!(f, "!="),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Tok>, QueryError> {
    let cs: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let word = |c: char| c.is_alphanumeric() || matches!(c, '_' | '-' | ':');
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            while i < cs.len() && cs[i] != '\n' {
                i += 1;
            }
        } else if c == '<' {
            let end = cs[i..].iter().position(|&x| x == '>').map(|p| p + i).ok_or(QueryError::Syntax {
                expected: "`>`".into(),
                found: "end of query".into(),
            })?;
            out.push(Tok::Iri(cs[i + 1..end].iter().collect::<String>().trim().to_string()));
            i = end + 1;
        } else if c == '?' {
            let start = i + 1;
            i = start;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Var(cs[start..i].iter().collect()));
        } else if c == '!' && cs.get(i + 1) == Some(&'=') {
            out.push(Tok::NotEq);
            i += 2;
        } else if word(c) {
            let start = i;
            while i < cs.len() && word(cs[i]) {
                i += 1;
            }
            out.push(Tok::Word(cs[start..i].iter().collect()));
        } else {
            out.push(Tok::Punct(c));
            i += 1;
        }
    }
    Ok(out)
}

struct P {
    toks: Vec<Tok>,
    pos: usize,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn err(&self, expected: &str) -> QueryError {
        QueryError::Syntax {
            expected: expected.into(),
            found: self.peek().map_or_else(|| "end of query".into(), ToString::to_string),
        }
    }

    fn punct(&mut self, c: char) -> Result<(), QueryError> {
        if self.peek() == Some(&Tok::Punct(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("`{c}`")))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(x)) if x.eq_ignore_ascii_case(w))
    }

    fn keyword(&mut self, w: &str) -> Result<(), QueryError> {
        if self.is_word(w) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(w))
        }
    }

    fn term(&mut self) -> Result<Term, QueryError> {
        let t = match self.peek() {
            Some(Tok::Var(v)) => Term::Var(v.clone()),
            Some(Tok::Iri(i)) => i.parse().map_err(|_| self.err("a term"))?,
            _ => return Err(self.err("a term")),
        };
        self.pos += 1;
        Ok(t)
    }

    fn selector(&mut self) -> Result<Selector, QueryError> {
        self.punct('(')?;
        let sel = match self.peek().cloned() {
            Some(Tok::Var(v)) => {
                self.pos += 1;
                let mut offset = 0;
                if self.peek() == Some(&Tok::Punct('+')) {
                    self.pos += 1;
                    offset = match self.peek() {
                        Some(Tok::Word(n)) => n.parse().map_err(|_| self.err("a step offset"))?,
                        _ => return Err(self.err("a step offset")),
                    };
                    self.pos += 1;
                    if !(1..=3).contains(&offset) {
                        return Err(QueryError::Offset(offset));
                    }
                }
                Selector::Step { var: v, offset }
            }
            Some(Tok::Word(w)) => {
                self.pos += 1;
                match w.to_lowercase().as_str() {
                    "any" => Selector::Any,
                    "min" => Selector::Min,
                    _ => Selector::Label(w),
                }
            }
            _ => return Err(self.err("a step selector")),
        };
        self.punct(')')?;
        Ok(sel)
    }

    fn block(&mut self) -> Result<Block, QueryError> {
        self.keyword("WHERE-AT-STEP")?;
        let selector = self.selector()?;
        self.punct('{')?;
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        loop {
            match self.peek() {
                Some(Tok::Punct('}')) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Punct('.')) => self.pos += 1,
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {
                    self.pos += 1;
                    self.punct('(')?;
                    let left = self.term()?;
                    if self.peek() != Some(&Tok::NotEq) {
                        return Err(self.err("`!=`"));
                    }
                    self.pos += 1;
                    let right = self.term()?;
                    self.punct(')')?;
                    filters.push(NotEqual { left, right });
                }
                Some(_) => {
                    let s = self.term()?;
                    let p = self.term()?;
                    let o = self.term()?;
                    patterns.push(TriplePattern::new(s, p, o));
                }
                None => return Err(self.err("`}`")),
            }
        }
        if selector == Selector::Any && patterns.is_empty() {
            return Err(QueryError::EmptyAnyBlock);
        }
        Ok(Block { selector, patterns, filters })
    }

    fn query(&mut self) -> Result<TemporalQuery, QueryError> {
        self.keyword("SELECT")?;
        let projection = if self.peek() == Some(&Tok::Punct('*')) {
            self.pos += 1;
            Projection::All
        } else {
            let mut vars = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                vars.push(v.clone());
                self.pos += 1;
            }
            if vars.is_empty() {
                return Err(self.err("`*` or variables"));
            }
            Projection::Vars(vars)
        };
        let mut blocks = Vec::new();
        while self.is_word("WHERE-AT-STEP") {
            blocks.push(self.block()?);
        }
        if blocks.is_empty() {
            return Err(self.err("WHERE-AT-STEP"));
        }
        Ok(TemporalQuery { projection, blocks })
    }
}

fn validate(q: &TemporalQuery) -> Result<(), QueryError> {
    let mut base: Option<&str> = None;
    let mut anchored = BTreeSet::new();
    for b in &q.blocks {
        if let Selector::Step { var, offset } = &b.selector {
            match base {
                Some(v) if v != var => return Err(QueryError::TwoStepVariables(v.into(), var.clone())),
                _ => base = Some(var),
            }
            if *offset == 0 {
                anchored.insert(var.clone());
            }
        }
    }
    if let Some(v) = base {
        if !anchored.contains(v) {
            return Err(QueryError::DanglingOffset(v.into()));
        }
    }
    Ok(())
}

/// Parses one query.
pub fn parse_query(text: &str) -> Result<TemporalQuery, QueryError> {
    let mut p = P { toks: lex(text)?, pos: 0 };
    let q = p.query()?;
    if p.pos < p.toks.len() {
        return Err(p.err("end of query"));
    }
    validate(&q)?;
    Ok(q)
}

/// Parses a file holding several queries, each starting at `SELECT`.
pub fn parse_queries(text: &str) -> Result<Vec<TemporalQuery>, QueryError> {
    let toks = lex(text)?;
    let starts: Vec<usize> = toks
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, Tok::Word(w) if w.eq_ignore_ascii_case("SELECT")))
        .map(|(i, _)| i)
        .collect();
    let mut out = Vec::new();
    for (k, &s) in starts.iter().enumerate() {
        let e = starts.get(k + 1).copied().unwrap_or(toks.len());
        let mut p = P { toks: toks[s..e].to_vec(), pos: 0 };
        let q = p.query()?;
        if p.pos < p.toks.len() {
            return Err(p.err("end of query"));
        }
        validate(&q)?;
        out.push(q);
    }
    if out.is_empty() && !toks.is_empty() {
        return Err(QueryError::Syntax { expected: "SELECT".into(), found: toks[0].to_string() });
    }
    Ok(out)
}

/// Sorted, duplicate-free answers. Step variables bind to labels.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct AnswerSet {
    pub existence: bool,
    pub rows: Vec<BTreeMap<String, String>>,
}

impl AnswerSet {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Every stored type across the trace, closed under named subsumption.
/// Types are treated as holding at every step.
fn rigid_types(trace: &Trace, tbox: &[Axiom]) -> BTreeSet<Triple> {
    let mut supers: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    for ax in tbox {
        for (a, b) in ax.subsumptions() {
            if let (ClassExpr::Named(a), ClassExpr::Named(b)) = (a, b) {
                supers.entry(a).or_default().insert(b);
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut stack: Vec<Triple> =
        trace.snapshots.iter().flat_map(|s| s.triples.iter().filter(|t| t.is_type()).cloned()).collect();
    while let Some(t) = stack.pop() {
        if !out.insert(t.clone()) {
            continue;
        }
        if let Term::Iri(c) = &t.o {
            for sup in supers.get(c).into_iter().flatten() {
                stack.push(Triple::new(t.s.clone(), t.p.clone(), Term::Iri(sup.clone())));
            }
        }
    }
    out
}

fn join(left: Vec<Bindings>, right: &[Bindings]) -> Vec<Bindings> {
    let mut out = Vec::new();
    for l in &left {
        for r in right {
            if r.iter().all(|(k, v)| l.get(k).is_none_or(|x| x == v)) {
                let mut m = l.clone();
                m.extend(r.iter().map(|(k, v)| (k.clone(), v.clone())));
                out.push(m);
            }
        }
    }
    out
}

/// Evaluates `q` over `trace`. Relation triples are read from the selected
/// snapshot; type triples from the whole trace plus subsumption closure.
pub fn evaluate(q: &TemporalQuery, trace: &Trace, tbox: &[Axiom]) -> Result<AnswerSet, QueryError> {
    if trace.is_empty() {
        return Err(QueryError::EmptyTrace);
    }
    let types = rigid_types(trace, tbox);
    let views: Vec<BTreeSet<Triple>> = trace
        .snapshots
        .iter()
        .map(|s| s.triples.iter().filter(|t| !t.is_type()).cloned().chain(types.iter().cloned()).collect())
        .collect();
    let at = |b: &Block, i: usize| match_in(&views[i], &b.patterns, &b.filters);
    let step_var = q.step_var().map(str::to_string);
    let steps: Vec<Option<usize>> = match step_var {
        Some(_) => (0..trace.len()).map(Some).collect(),
        None => vec![None],
    };
    let mut rows: BTreeSet<BTreeMap<String, String>> = BTreeSet::new();
    for n in steps {
        let mut acc = vec![Bindings::new()];
        for b in &q.blocks {
            let matches = match &b.selector {
                Selector::Step { offset, .. } => {
                    let i = n.unwrap_or(0) + *offset as usize;
                    if i < trace.len() { at(b, i) } else { Vec::new() }
                }
                Selector::Any => (0..trace.len()).flat_map(|i| at(b, i)).collect::<BTreeSet<_>>().into_iter().collect(),
                Selector::Min => (0..trace.len()).map(|i| at(b, i)).find(|m| !m.is_empty()).unwrap_or_default(),
                Selector::Label(l) => trace.index_of(l).map(|i| at(b, i)).unwrap_or_default(),
            };
            acc = join(acc, &matches);
            if acc.is_empty() {
                break;
            }
        }
        for b in acc {
            let mut row: BTreeMap<String, String> = b.into_iter().map(|(k, v)| (k, v.to_string())).collect();
            if let (Some(v), Some(n)) = (&step_var, n) {
                row.insert(v.clone(), trace.snapshots[n].label.clone());
            }
            if let Projection::Vars(vars) = &q.projection {
                row.retain(|k, _| vars.contains(k));
            }
            rows.insert(row);
        }
    }
    Ok(AnswerSet { existence: q.projection == Projection::All, rows: rows.into_iter().collect() })
}

/// `?x = obj4` lines, or `yes`/`no` for existence queries.
pub fn render_answer(q: &TemporalQuery, answers: &AnswerSet) -> String {
    match &q.projection {
        Projection::All => if answers.is_empty() { "no" } else { "yes" }.to_string(),
        Projection::Vars(vars) => answers
            .rows
            .iter()
            .map(|r| {
                vars.iter()
                    .filter_map(|v| r.get(v).map(|x| format!("?{v} = {x}")))
                    .collect::<Vec<_>>()
                    .join(", ")
            })
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

/// Substitutes `{var}` placeholders of a sentence skeleton, once per row.
pub fn render_phrased(answers: &AnswerSet, skeleton: &str) -> String {
    answers
        .rows
        .iter()
        .map(|r| r.iter().fold(skeleton.to_string(), |s, (k, v)| s.replace(&format!("{{{k}}}"), v)))
        .collect::<Vec<_>>()
        .join("\n")
}
