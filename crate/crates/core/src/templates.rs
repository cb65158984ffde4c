//! Procedural verb templates: parsing the `Procedure:` file format and
//! compiling invocations into delete/insert/where updates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dl::{ClassExpr, MicroOntology};
use crate::rdf::{Iri, NotEqual, Term, Triple, TriplePattern, UpdateOp};

/// Syntactic position a clause argument fills.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    Subject,
    Object,
    Prep(String),
}

impl Slot {
    pub fn parse(s: &str) -> Slot {
        match s {
            "subject" => Slot::Subject,
            "object" => Slot::Object,
            p => Slot::Prep(p.to_string()),
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Subject => write!(f, "subject"),
            Slot::Object => write!(f, "object"),
            Slot::Prep(p) => write!(f, "{p}"),
        }
    }
}

/// Binary atom `(pred a b)`; arguments are variables or constants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Literal {
    pub predicate: Iri,
    pub args: [Term; 2],
}

impl Literal {
    fn vars(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(Term::as_var)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    Holds(Literal),
    /// Compiles to an absence check.
    Absent(Literal),
    NotEqual(Term, Term),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Effect {
    pub positive: bool,
    pub literal: Literal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProceduralTemplate {
    pub name: String,
    /// Canonical variable names (`-` folded to `_`), without `?`.
    pub parameters: Vec<String>,
    pub precondition: Vec<Condition>,
    pub effect: Vec<Effect>,
    pub lexical_units: Vec<String>,
    pub roles: Vec<(Slot, String)>,
    /// Loader remarks such as spelling variants of one variable.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ProceduralTemplate {
    pub fn parameter_for(&self, slot: &Slot) -> Option<&str> {
        self.roles.iter().find(|(s, _)| s == slot).map(|(_, p)| p.as_str())
    }

    pub fn slots(&self) -> impl Iterator<Item = &Slot> {
        self.roles.iter().map(|(s, _)| s)
    }

    /// Predicates the template reads or writes.
    pub fn predicates(&self) -> BTreeSet<&Iri> {
        let mut out = BTreeSet::new();
        for c in &self.precondition {
            if let Condition::Holds(l) | Condition::Absent(l) = c {
                out.insert(&l.predicate);
            }
        }
        for e in &self.effect {
            out.insert(&e.literal.predicate);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("duplicate template name `{0}`")]
    DuplicateTemplateName(String),
    #[error("template `{template}`: no binding for role parameter ?{parameter}")]
    MissingRole { template: String, parameter: String },
    #[error("template `{template}`: clause slot `{slot}` has no role")]
    UnknownSlot { template: String, slot: String },
    #[error("template `{template}`: effect variable ?{variable} is never bound")]
    UnboundEffectVariable { template: String, variable: String },
}

fn perr(line: usize, msg: impl Into<String>) -> TemplateError {
    TemplateError::Parse { line, msg: msg.into() }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Sexp {
    Sym(String),
    List(Vec<Sexp>),
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        match ch {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(ch.to_string());
            }
            c if c.is_whitespace() || c == ',' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn read_all(tokens: &[String], line: usize) -> Result<Vec<Sexp>, TemplateError> {
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < tokens.len() {
        out.push(read(tokens, &mut pos, line)?);
    }
    Ok(out)
}

fn read(tokens: &[String], pos: &mut usize, line: usize) -> Result<Sexp, TemplateError> {
    let tok = tokens.get(*pos).ok_or_else(|| perr(line, "unexpected end of section"))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(read(tokens, pos, line)?),
                    None => return Err(perr(line, "unbalanced parentheses")),
                }
            }
        }
        ")" => Err(perr(line, "unexpected `)`")),
        s => Ok(Sexp::Sym(s.to_string())),
    }
}

fn canonical_var(s: &str) -> String {
    s.trim_start_matches('?').replace('-', "_")
}

fn term(sym: &str, line: usize) -> Result<Term, TemplateError> {
    if sym.starts_with('?') {
        Ok(Term::Var(canonical_var(sym)))
    } else {
        sym.parse().map_err(|_| perr(line, format!("bad constant `{sym}`")))
    }
}

fn literal(items: &[Sexp], line: usize) -> Result<Literal, TemplateError> {
    match items {
        [Sexp::Sym(p), Sexp::Sym(a), Sexp::Sym(b)] => Ok(Literal {
            predicate: p.parse().map_err(|_| perr(line, format!("bad predicate `{p}`")))?,
            args: [term(a, line)?, term(b, line)?],
        }),
        _ => Err(perr(line, "expected a binary atom `(predicate ?a ?b)`")),
    }
}

/// Flattens `(and …)`; `()` is the empty conjunction.
fn conjuncts(e: &Sexp, line: usize) -> Result<Vec<Sexp>, TemplateError> {
    match e {
        Sexp::List(items) if items.is_empty() => Ok(vec![]),
        Sexp::List(items) if items[0] == Sexp::Sym("and".into()) => {
            let mut out = Vec::new();
            for x in &items[1..] {
                out.extend(conjuncts(x, line)?);
            }
            Ok(out)
        }
        Sexp::List(_) => Ok(vec![e.clone()]),
        Sexp::Sym(s) => Err(perr(line, format!("expected a list, found `{s}`"))),
    }
}

fn condition(e: &Sexp, line: usize) -> Result<Condition, TemplateError> {
    let Sexp::List(items) = e else { return Err(perr(line, "expected a list")) };
    match items.as_slice() {
        [Sexp::Sym(n), inner] if n == "not" => match inner {
            Sexp::List(eq) if eq.len() == 3 && eq[0] == Sexp::Sym("=".into()) => match (&eq[1], &eq[2]) {
                (Sexp::Sym(a), Sexp::Sym(b)) => Ok(Condition::NotEqual(term(a, line)?, term(b, line)?)),
                _ => Err(perr(line, "malformed inequality")),
            },
            Sexp::List(atom) => Ok(Condition::Absent(literal(atom, line)?)),
            _ => Err(perr(line, "malformed negation")),
        },
        [Sexp::Sym(eq), ..] if eq == "=" => Err(perr(line, "positive equality constraints are not supported")),
        _ => Ok(Condition::Holds(literal(items, line)?)),
    }
}

fn effect(e: &Sexp, line: usize) -> Result<Effect, TemplateError> {
    let Sexp::List(items) = e else { return Err(perr(line, "expected a list")) };
    match items.as_slice() {
        [Sexp::Sym(n), Sexp::List(atom)] if n == "not" => Ok(Effect { positive: false, literal: literal(atom, line)? }),
        _ => Ok(Effect { positive: true, literal: literal(items, line)? }),
    }
}

#[derive(Default)]
struct Block {
    name: String,
    line: usize,
    sections: BTreeMap<String, (usize, String)>,
}

/// Parses every `Procedure:` block of a template file.
pub fn parse_templates(text: &str) -> Result<Vec<ProceduralTemplate>, TemplateError> {
    let mut blocks: Vec<Block> = Vec::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with(';') || trimmed.starts_with("```") {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix("Procedure:") {
            let name = name.trim();
            if name.is_empty() {
                return Err(perr(line, "missing procedure name"));
            }
            blocks.push(Block { name: name.to_string(), line, ..Default::default() });
            section = None;
            continue;
        }
        let block = blocks.last_mut().ok_or_else(|| perr(line, "content before first `Procedure:`"))?;
        let mut rest = trimmed;
        if let Some(stripped) = trimmed.strip_prefix(':') {
            let (key, body) = stripped.split_once(char::is_whitespace).unwrap_or((stripped, ""));
            if block.sections.contains_key(key) {
                return Err(perr(line, format!("repeated section :{key}")));
            }
            block.sections.insert(key.to_string(), (line, String::new()));
            section = Some(key.to_string());
            rest = body;
        }
        let key = section.as_ref().ok_or_else(|| perr(line, "expected a `:section`"))?;
        let entry = block.sections.get_mut(key).expect("section registered");
        entry.1.push(' ');
        entry.1.push_str(rest);
    }

    let mut out: Vec<ProceduralTemplate> = Vec::new();
    for b in blocks {
        if out.iter().any(|t| t.name == b.name) {
            return Err(TemplateError::DuplicateTemplateName(b.name));
        }
        out.push(build(b)?);
    }
    Ok(out)
}

fn build(b: Block) -> Result<ProceduralTemplate, TemplateError> {
    let get = |key: &str| -> Result<(usize, Vec<Sexp>), TemplateError> {
        let (line, body) = b.sections.get(key).ok_or_else(|| perr(b.line, format!("{}: missing :{key}", b.name)))?;
        Ok((*line, read_all(&tokenize(body), *line)?))
    };
    let mut notes = Vec::new();

    let (pline, params) = get("parameters")?;
    let mut parameters = Vec::new();
    let mut raw_names: BTreeMap<String, String> = BTreeMap::new();
    match params.as_slice() {
        [Sexp::List(items)] => {
            for it in items {
                let Sexp::Sym(s) = it else { return Err(perr(pline, "parameters must be variables")) };
                if !s.starts_with('?') {
                    return Err(perr(pline, format!("parameter `{s}` must start with `?`")));
                }
                let c = canonical_var(s);
                raw_names.insert(c.clone(), s.clone());
                parameters.push(c);
            }
        }
        _ => return Err(perr(pline, "expected `(?a ?b …)`")),
    }

    let (cline, pre) = get("precondition")?;
    let pre = match pre.as_slice() {
        [e] => conjuncts(e, cline)?,
        _ => return Err(perr(cline, "expected one expression")),
    };
    let precondition = pre.iter().map(|e| condition(e, cline)).collect::<Result<Vec<_>, _>>()?;

    let (eline, eff) = get("effect")?;
    let eff = match eff.as_slice() {
        [e] => conjuncts(e, eline)?,
        _ => return Err(perr(eline, "expected one expression")),
    };
    let effects = eff.iter().map(|e| effect(e, eline)).collect::<Result<Vec<_>, _>>()?;

    let (lline, lus) = get("lexicalUnits")?;
    let lexical_units = match lus.as_slice() {
        [Sexp::List(items)] => items
            .iter()
            .map(|x| match x {
                Sexp::Sym(s) => Ok(s.to_lowercase()),
                _ => Err(perr(lline, "lexical units must be words")),
            })
            .collect::<Result<Vec<_>, _>>()?,
        _ => return Err(perr(lline, "expected `(word, word …)`")),
    };

    let (rline, role_items) = get("roles")?;
    let mut roles = Vec::new();
    for r in &role_items {
        match r {
            Sexp::List(pair) => match pair.as_slice() {
                [Sexp::Sym(slot), Sexp::Sym(var)] if var.starts_with('?') => {
                    roles.push((Slot::parse(&slot.to_lowercase()), canonical_var(var)))
                }
                _ => return Err(perr(rline, "expected `(slot ?parameter)`")),
            },
            _ => return Err(perr(rline, "expected `(slot ?parameter)`")),
        }
    }

    // Spelling variants (`?co-resident` vs `?co_resident`) fold to one name.
    let mut seen_raw: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (c, raw) in &raw_names {
        seen_raw.entry(c.clone()).or_default().insert(raw.clone());
    }
    for (_, body) in b.sections.values() {
        for tok in tokenize(body) {
            if tok.starts_with('?') {
                seen_raw.entry(canonical_var(&tok)).or_default().insert(tok);
            }
        }
    }
    for (c, spellings) in &seen_raw {
        if spellings.len() > 1 {
            let list: Vec<&str> = spellings.iter().map(String::as_str).collect();
            notes.push(format!("variable spellings {} folded to ?{c}", list.join(", ")));
        }
    }

    for p in &parameters {
        if !roles.iter().any(|(_, v)| v == p) {
            return Err(perr(rline, format!("{}: parameter ?{p} has no role slot", b.name)));
        }
    }
    for (slot, v) in &roles {
        if !parameters.contains(v) {
            return Err(perr(rline, format!("{}: role {slot} names unknown parameter ?{v}", b.name)));
        }
    }

    Ok(ProceduralTemplate {
        name: b.name,
        parameters,
        precondition,
        effect: effects,
        lexical_units,
        roles,
        notes,
    })
}

/// Properties a template may manipulate directly: those without domain or
/// range restrictions, plus their declared subproperties' parents. Returns
/// one warning per offending predicate.
pub fn check_universal_properties(templates: &[ProceduralTemplate], ontologies: &[MicroOntology]) -> Vec<String> {
    let mut restricted = BTreeSet::new();
    for o in ontologies {
        for ax in &o.axioms {
            if let Some((r, _)) = ax.as_domain().or_else(|| ax.as_range()) {
                restricted.insert(r.to_string());
            }
        }
    }
    let mut out = Vec::new();
    for t in templates {
        for p in t.predicates() {
            if *p != Iri::rdf_type() && restricted.contains(&p.local) {
                out.push(format!("template {} manipulates non-universal property {p}", t.name));
            }
        }
    }
    out
}

/// An executable statement: the update plus the ground preconditions the
/// executor must establish before applying it.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CompiledStatement {
    pub label: String,
    pub op: UpdateOp,
    /// Ground positive preconditions.
    pub checks: Vec<Triple>,
    /// Patterns that must have no match.
    pub absent: Vec<TriplePattern>,
    pub template: Option<String>,
    /// Negated-existential assertions are kept as class constraints on an
    /// individual, not triples.
    pub constraint: Option<(Term, ClassExpr)>,
}

/// Compiles one invocation. `args` maps clause slots to discourse terms.
pub fn compile_invocation(
    template: &ProceduralTemplate,
    args: &[(Slot, Term)],
) -> Result<CompiledStatement, TemplateError> {
    let mut bind: BTreeMap<String, Term> = BTreeMap::new();
    for (slot, t) in args {
        let p = template.parameter_for(slot).ok_or_else(|| TemplateError::UnknownSlot {
            template: template.name.clone(),
            slot: slot.to_string(),
        })?;
        bind.insert(p.to_string(), t.clone());
    }
    for p in &template.parameters {
        if !bind.contains_key(p) {
            return Err(TemplateError::MissingRole { template: template.name.clone(), parameter: p.clone() });
        }
    }
    let sub = |t: &Term| match t {
        Term::Var(v) => bind.get(v).cloned().unwrap_or_else(|| t.clone()),
        _ => t.clone(),
    };
    let pattern = |l: &Literal| {
        TriplePattern::new(sub(&l.args[0]), Term::Iri(l.predicate.clone()), sub(&l.args[1]))
    };

    let mut st = CompiledStatement { template: Some(template.name.clone()), ..Default::default() };
    for c in &template.precondition {
        match c {
            Condition::Holds(l) => {
                let p = pattern(l);
                match p.ground() {
                    Some(t) => st.checks.push(t),
                    None => st.op.where_patterns.push(p),
                }
            }
            Condition::Absent(l) => st.absent.push(pattern(l)),
            Condition::NotEqual(a, b) => st.op.filters.push(NotEqual { left: sub(a), right: sub(b) }),
        }
    }
    let bindable: BTreeSet<String> =
        st.op.where_patterns.iter().flat_map(|p| p.vars().map(str::to_string).collect::<Vec<_>>()).collect();
    for e in &template.effect {
        for v in e.literal.vars() {
            if !bind.contains_key(v) && !bindable.contains(v) {
                return Err(TemplateError::UnboundEffectVariable {
                    template: template.name.clone(),
                    variable: v.to_string(),
                });
            }
        }
        let p = pattern(&e.literal);
        if e.positive {
            st.op.inserts.push(p);
        } else {
            st.op.deletes.push(p);
        }
    }
    Ok(st)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const STORY_TEMPLATES: &str = "\
Procedure: Residence
:parameters (?resident ?co-resident ?location)
:precondition ()
:effect (and(stores ?location ?resident)
         (stores ?location ?co_resident))
:lexicalUnits (camp, inhabit, live, lodge, reside, stay)
:roles (subject ?resident) (in ?location) (with ?co-resident)

Procedure: Removing
:parameters (?agent ?source ?theme)
:precondition (stores ?source ?theme)
:effect (and(stores ?agent ?theme)
         (not(stores ?source ?theme)))
:lexicalUnits (confiscate, remove, snatch, take, withdraw)
:roles (subject ?agent) (object ?theme) (from ?source)

Procedure: Bringing
:parameters (?agent ?goal ?theme)
:precondition (and(stores ?agent ?theme)
              (stores ?a ?agent) (not(= ?a ?goal)))
:effect (and(stores ?goal ?theme) (stores ?goal ?agent)
        (not(stores ?agent ?theme))
        (not(stores ?a ?agent)))
:lexicalUnits (bring, carry, convey, drive, haul, take)
:roles (subject ?agent) (object ?theme) (to ?goal)
";

    fn stores(a: &str, b: &str) -> Literal {
        Literal { predicate: Iri::property("stores"), args: [Term::var(a), Term::var(b)] }
    }

    fn by_name<'a>(ts: &'a [ProceduralTemplate], n: &str) -> &'a ProceduralTemplate {
        ts.iter().find(|t| t.name == n).unwrap()
    }

    #[test]
    fn removing_block() {
        let ts = parse_templates(STORY_TEMPLATES).unwrap();
        let r = by_name(&ts, "Removing");
        assert_eq!(r.parameters, ["agent", "source", "theme"]);
        assert_eq!(r.precondition, vec![Condition::Holds(stores("source", "theme"))]);
        assert_eq!(
            r.effect,
            vec![
                Effect { positive: true, literal: stores("agent", "theme") },
                Effect { positive: false, literal: stores("source", "theme") },
            ]
        );
    }

    #[test]
    fn residence_block_folds_variable_spelling() {
        let ts = parse_templates(STORY_TEMPLATES).unwrap();
        let r = by_name(&ts, "Residence");
        assert!(r.precondition.is_empty());
        assert_eq!(r.effect.len(), 2);
        assert!(r.effect.iter().all(|e| e.positive));
        assert_eq!(r.parameters[1], "co_resident");
        assert!(r.notes.iter().any(|n| n.contains("?co-resident") && n.contains("?co_resident")));
    }

    #[test]
    fn bringing_block_has_existential_and_inequality() {
        let ts = parse_templates(STORY_TEMPLATES).unwrap();
        let b = by_name(&ts, "Bringing");
        assert!(b.precondition.contains(&Condition::Holds(stores("a", "agent"))));
        assert!(b.precondition.contains(&Condition::NotEqual(Term::var("a"), Term::var("goal"))));
        assert!(b.lexical_units.contains(&"take".to_string()));
    }

    #[test]
    fn duplicate_names_rejected() {
        let text = format!("{STORY_TEMPLATES}\n{}", &STORY_TEMPLATES[..STORY_TEMPLATES.find("Procedure: Removing").unwrap()]);
        assert_eq!(parse_templates(&text), Err(TemplateError::DuplicateTemplateName("Residence".into())));
    }

    fn slot_args(pairs: &[(&str, u32)]) -> Vec<(Slot, Term)> {
        pairs.iter().map(|(s, n)| (Slot::parse(s), Term::Anon(*n))).collect()
    }

    #[test]
    fn compile_bringing() {
        let ts = parse_templates(STORY_TEMPLATES).unwrap();
        let st = compile_invocation(by_name(&ts, "Bringing"), &slot_args(&[("subject", 4), ("to", 25), ("object", 15)]))
            .unwrap();
        assert_eq!(
            st.op.to_string(),
            "DELETE {<obj4> <stores> <obj15>. ?a <stores> <obj4>} \
             INSERT {<obj25> <stores> <obj15>. <obj25> <stores> <obj4>} \
             WHERE {?a <stores> <obj4>. FILTER (?a != <obj25>)}"
        );
        assert_eq!(st.checks, vec![Triple::new(Term::Anon(4), Iri::property("stores"), Term::Anon(15))]);
    }

    #[test]
    fn compile_removing() {
        let ts = parse_templates(STORY_TEMPLATES).unwrap();
        let st = compile_invocation(by_name(&ts, "Removing"), &slot_args(&[("subject", 4), ("from", 8), ("object", 15)]))
            .unwrap();
        assert_eq!(st.op.to_string(), "DELETE {<obj8> <stores> <obj15>} INSERT {<obj4> <stores> <obj15>}");
        assert_eq!(st.checks, vec![Triple::new(Term::Anon(8), Iri::property("stores"), Term::Anon(15))]);
    }

    #[test]
    fn compile_residence() {
        let ts = parse_templates(STORY_TEMPLATES).unwrap();
        let st = compile_invocation(by_name(&ts, "Residence"), &slot_args(&[("subject", 4), ("in", 8), ("with", 11)]))
            .unwrap();
        assert_eq!(st.op.to_string(), "INSERT {<obj8> <stores> <obj4>. <obj8> <stores> <obj11>}");
        assert!(st.checks.is_empty());
    }

    #[test]
    fn missing_role_and_unknown_slot() {
        let ts = parse_templates(STORY_TEMPLATES).unwrap();
        let removing = by_name(&ts, "Removing");
        assert!(matches!(
            compile_invocation(removing, &slot_args(&[("subject", 4), ("object", 15)])),
            Err(TemplateError::MissingRole { .. })
        ));
        assert!(matches!(
            compile_invocation(by_name(&ts, "Bringing"), &slot_args(&[("subject", 4), ("object", 15), ("from", 8)])),
            Err(TemplateError::UnknownSlot { .. })
        ));
    }

    #[test]
    fn unbound_effect_variable() {
        let text = "Procedure: Vanish\n:parameters (?x)\n:precondition ()\n:effect (not(stores ?y ?x))\n\
                    :lexicalUnits (vanish)\n:roles (subject ?x)\n";
        let ts = parse_templates(text).unwrap();
        assert!(matches!(
            compile_invocation(&ts[0], &slot_args(&[("subject", 1)])),
            Err(TemplateError::UnboundEffectVariable { .. })
        ));
    }
}
