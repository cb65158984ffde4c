//! Ontological sentences and the micro-ontology file format.

use crate::dl::{Axiom, ClassExpr, MicroOntology, Role};

use super::morph::participle_property;
use super::{sentences, tokenize, Cursor, ParseError, Token};

const KEYWORDS: &[&str] = &[
    "a", "an", "and", "by", "every", "everything", "if", "is", "no", "not", "or", "something", "that", "then",
];

struct OntologyParser<'p> {
    prefix: &'p str,
    /// Properties seen so far; used to pick between participle readings.
    properties: Vec<String>,
}

impl OntologyParser<'_> {
    fn class(&self, tok: &Token, sentence: usize) -> Result<ClassExpr, ParseError> {
        let text = tok.text.as_str();
        let bad = || ParseError::Syntax { sentence, expected: vec!["class name".into()], found: text.to_string() };
        if KEYWORDS.contains(&text.to_lowercase().as_str()) {
            return Err(bad());
        }
        if let Some(rest) = text.strip_prefix('{') {
            let (list, local) = rest.split_once("}:").ok_or_else(bad)?;
            let prefixes: Vec<&str> = list.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
            if prefixes.is_empty() || local.is_empty() {
                return Err(bad());
            }
            return Ok(ClassExpr::or(prefixes.iter().map(|p| ClassExpr::named(p, local))));
        }
        match text.split_once(':') {
            Some((p, l)) if !p.is_empty() && !l.is_empty() => Ok(ClassExpr::named(p, l)),
            Some(_) => Err(bad()),
            None => Ok(ClassExpr::named(self.prefix, text)),
        }
    }

    fn property(&mut self, word: &str) -> String {
        if !self.properties.iter().any(|p| p == word) {
            self.properties.push(word.to_string());
        }
        word.to_string()
    }

    fn verb(&mut self, c: &mut Cursor) -> Result<String, ParseError> {
        let t = c.word("verb")?;
        if KEYWORDS.contains(&t.text.to_lowercase().as_str()) {
            return Err(ParseError::Syntax {
                sentence: c.sentence,
                expected: vec!["verb".into()],
                found: t.text.clone(),
            });
        }
        Ok(self.property(&t.text))
    }

    fn passive(&mut self, c: &mut Cursor) -> Result<Role, ParseError> {
        let t = c.word("past participle")?;
        let name = participle_property(&t.text, &self.properties);
        c.expect(&["by"])?;
        Ok(Role::inv(self.property(&name)))
    }

    /// `noun [that …]`, or `something [that …]`.
    fn noun_phrase(&mut self, c: &mut Cursor) -> Result<ClassExpr, ParseError> {
        let head = if c.eat("something") || c.eat("thing") {
            ClassExpr::Top
        } else {
            let t = c.word("noun")?;
            self.class(t, c.sentence)?
        };
        if c.is("that") {
            let rc = self.relative(c)?;
            return Ok(if head == ClassExpr::Top { rc } else { ClassExpr::and([head, rc]) });
        }
        Ok(head)
    }

    /// Object of a verb: `a NP`, `an NP` or `something [that …]`.
    fn object(&mut self, c: &mut Cursor) -> Result<ClassExpr, ParseError> {
        if c.is("something") {
            return self.noun_phrase(c);
        }
        if !c.article() {
            return Err(c.err(&["a", "an", "something"]));
        }
        self.noun_phrase(c)
    }

    /// `that RC ((and|or) [that] RC)*`, left-associative.
    fn relative(&mut self, c: &mut Cursor) -> Result<ClassExpr, ParseError> {
        c.expect(&["that"])?;
        let mut acc = self.relative_body(c)?;
        loop {
            let conj = if c.eat("and") {
                true
            } else if c.eat("or") {
                false
            } else {
                return Ok(acc);
            };
            c.eat("that");
            let next = self.relative_body(c)?;
            acc = if conj { ClassExpr::and([acc, next]) } else { ClassExpr::or([acc, next]) };
        }
    }

    fn relative_body(&mut self, c: &mut Cursor) -> Result<ClassExpr, ParseError> {
        if c.eat("is") {
            let negated = c.eat("not");
            let body = self.copula_rest(c)?;
            return Ok(if negated { ClassExpr::not(body) } else { body });
        }
        if c.eat("something") {
            // Object relative: "that something VERBs".
            let v = self.verb(c)?;
            return Ok(ClassExpr::exists(Role::inv(v), ClassExpr::Top));
        }
        let v = self.verb(c)?;
        let obj = self.object(c)?;
        Ok(ClassExpr::exists(Role::new(v), obj))
    }

    /// After `is [not]`: `a NP`, `something`, or `PARTICIPLE by OBJ`.
    fn copula_rest(&mut self, c: &mut Cursor) -> Result<ClassExpr, ParseError> {
        if c.article() {
            return self.noun_phrase(c);
        }
        if c.eat("something") {
            return Ok(ClassExpr::Top);
        }
        if c.peek().is_none() || c.is(".") {
            return Err(c.err(&["a", "an", "something", "past participle"]));
        }
        let role = self.passive(c)?;
        let obj = self.object(c)?;
        Ok(ClassExpr::exists(role, obj))
    }

    fn verb_phrase(&mut self, c: &mut Cursor) -> Result<ClassExpr, ParseError> {
        if c.eat("is") {
            let negated = c.eat("not");
            let body = self.copula_rest(c)?;
            return Ok(if negated { ClassExpr::not(body) } else { body });
        }
        let v = self.verb(c)?;
        let obj = self.object(c)?;
        Ok(ClassExpr::exists(Role::new(v), obj))
    }

    fn sentence(&mut self, c: &mut Cursor) -> Result<Axiom, ParseError> {
        let ax = match c.peek_lower().as_str() {
            "every" => {
                c.next();
                let sub = self.noun_phrase(c)?;
                let sup = self.verb_phrase(c)?;
                Axiom::SubClass(sub, sup)
            }
            "no" => {
                c.next();
                let a = self.noun_phrase(c)?;
                let b = self.verb_phrase(c)?;
                Axiom::Disjoint(a, b)
            }
            "everything" => {
                c.next();
                let sub = self.relative(c)?;
                c.expect(&["is"])?;
                let sup = if c.eat("something") {
                    ClassExpr::Top
                } else {
                    if !c.article() {
                        return Err(c.err(&["a", "an"]));
                    }
                    self.noun_phrase(c)?
                };
                Axiom::SubClass(sub, sup)
            }
            "if" => {
                c.next();
                let x = c.word("variable")?.text.clone();
                let v = self.verb(c)?;
                let y = c.word("variable")?.text.clone();
                c.expect(&["then"])?;
                let x2 = c.word("variable")?.text.clone();
                let w = self.verb(c)?;
                let y2 = c.word("variable")?.text.clone();
                if x != x2 || y != y2 {
                    return Err(ParseError::Syntax {
                        sentence: c.sentence,
                        expected: vec![format!("{x} … {y}")],
                        found: format!("{x2} … {y2}"),
                    });
                }
                Axiom::SubProperty(v, w)
            }
            _ => return Err(c.err(&["Every", "No", "Everything", "If"])),
        };
        c.finish()?;
        Ok(ax)
    }
}

fn mutual_pair(a: &Axiom, b: &Axiom) -> Option<Axiom> {
    match (a, b) {
        (Axiom::SubClass(x @ ClassExpr::Named(_), y @ ClassExpr::Named(_)), Axiom::SubClass(y2, x2))
            if x == x2 && y == y2 =>
        {
            Some(Axiom::Equivalent(x.clone(), y.clone()))
        }
        _ => None,
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_lines(
    text: &str,
    prefix: &str,
    known_properties: &[String],
    mut directive: impl FnMut(usize, &str) -> Result<(), ParseError>,
) -> Result<(Vec<Axiom>, Vec<String>), ParseError> {
    let mut p = OntologyParser { prefix, properties: known_properties.to_vec() };
    let mut axioms = Vec::new();
    let mut sentence = 0;
    for (ln, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('@') {
            directive(ln + 1, line)?;
            continue;
        }
        let toks = tokenize(line);
        let mut on_line = Vec::new();
        for s in sentences(&toks) {
            sentence += 1;
            let mut c = Cursor::new(s, sentence);
            on_line.push(p.sentence(&mut c)?);
        }
        if on_line.len() == 2 {
            if let Some(eq) = mutual_pair(&on_line[0], &on_line[1]) {
                axioms.push(eq);
                continue;
            }
        }
        axioms.extend(on_line);
    }
    Ok((axioms, p.properties))
}

/// Parses ontological sentences; unqualified class names get `prefix`.
/// A line holding `Every X is a Y. Every Y is an X.` yields one
/// `Equivalent` axiom.
pub fn parse_ontological(text: &str, prefix: &str) -> Result<Vec<Axiom>, ParseError> {
    parse_lines(text, prefix, &[], |line, _| Err(ParseError::Directive { line, msg: "directive outside a file".into() }))
        .map(|(ax, _)| ax)
}

/// `[not] noun ((and|or) [not] noun)*`, used by `@pronoun` directives.
pub fn parse_class_phrase(text: &str, prefix: &str) -> Result<ClassExpr, ParseError> {
    let toks = tokenize(text);
    let p = OntologyParser { prefix, properties: Vec::new() };
    let mut c = Cursor::new(&toks, 0);
    let operand = |c: &mut Cursor| -> Result<ClassExpr, ParseError> {
        let negated = c.eat("not");
        let e = if c.eat("something") {
            ClassExpr::Top
        } else {
            let t = c.word("class name")?;
            p.class(t, 0)?
        };
        Ok(if negated { ClassExpr::not(e) } else { e })
    };
    let mut acc = operand(&mut c)?;
    loop {
        if c.eat("and") {
            acc = ClassExpr::and([acc, operand(&mut c)?]);
        } else if c.eat("or") {
            acc = ClassExpr::or([acc, operand(&mut c)?]);
        } else {
            c.finish()?;
            return Ok(acc);
        }
    }
}

fn title_from_iri(iri: &str) -> String {
    let last = iri.trim_end_matches('/').rsplit(['/', '#']).next().unwrap_or(iri);
    last.split('.').next().unwrap_or(last).to_string()
}

fn parse_prefix_directive(line: usize, rest: &str) -> Result<(String, String, String), ParseError> {
    let bad = |msg: &str| ParseError::Directive { line, msg: msg.to_string() };
    let rest = rest.trim();
    let (id, rest) = rest.split_once(char::is_whitespace).ok_or_else(|| bad("@prefix needs an id and an iri"))?;
    let rest = rest.trim();
    let (iri, rest) = match rest.strip_prefix('<') {
        Some(r) => {
            let end = r.find('>').ok_or_else(|| bad("unterminated <iri>"))?;
            (r[..end].to_string(), r[end + 1..].trim())
        }
        None => match rest.split_once(char::is_whitespace) {
            Some((i, r)) => (i.to_string(), r.trim()),
            None => (rest.to_string(), ""),
        },
    };
    let title = if rest.is_empty() {
        title_from_iri(&iri)
    } else {
        rest.strip_prefix('"')
            .and_then(|r| r.strip_suffix('"'))
            .ok_or_else(|| bad("title must be quoted"))?
            .to_string()
    };
    Ok((id.trim_end_matches(':').to_string(), iri, title))
}

/// Reads one micro-ontology file: an `@prefix id <iri> "Title"` line, then
/// sentences. `@property p …` declares properties used only in factual
/// text; `@pronoun word class-phrase` sets a pronoun's compatibility
/// constraint.
pub fn load_ontology(text: &str) -> Result<MicroOntology, ParseError> {
    let header = text
        .lines()
        .enumerate()
        .find(|(_, l)| !strip_comment(l).trim().is_empty())
        .ok_or(ParseError::Directive { line: 1, msg: "empty ontology file".into() })?;
    let first = strip_comment(header.1).trim();
    let rest = first
        .strip_prefix("@prefix")
        .ok_or(ParseError::Directive { line: header.0 + 1, msg: "first line must be @prefix".into() })?;
    let (prefix, iri, title) = parse_prefix_directive(header.0 + 1, rest)?;

    let mut properties = Vec::new();
    let mut pronouns = Vec::new();
    let mut seen_prefix = false;
    let (axioms, _) = parse_lines(text, &prefix, &[], |line, d| {
        let (name, rest) = d.split_once(char::is_whitespace).unwrap_or((d, ""));
        match name {
            "@prefix" if !seen_prefix => {
                seen_prefix = true;
                Ok(())
            }
            "@property" => {
                properties.extend(rest.split_whitespace().map(str::to_string));
                Ok(())
            }
            "@pronoun" => {
                let (word, phrase) = rest
                    .trim()
                    .split_once(char::is_whitespace)
                    .ok_or(ParseError::Directive { line, msg: "@pronoun needs a word and a class".into() })?;
                let expr = parse_class_phrase(phrase, &prefix)
                    .map_err(|e| ParseError::Directive { line, msg: e.to_string() })?;
                pronouns.push((word.to_lowercase(), expr));
                Ok(())
            }
            other => Err(ParseError::Directive { line, msg: format!("unknown directive {other}") }),
        }
    })?;
    Ok(MicroOntology { prefix, iri, title, axioms, properties, pronouns })
}
