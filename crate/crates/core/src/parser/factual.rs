//! Factual narrative text → paraphrase atoms with discourse objects and
//! open ambiguity items.

use serde::{Deserialize, Serialize};

use crate::rdf::{step_label, Iri, Term};
use crate::templates::Slot;

use super::lexicon::Lexicon;
use super::morph::lemma;
use super::{sentences, tokenize, Cursor, ParseError, Token};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SenseRef {
    Known(Iri),
    /// Index into [`Discourse::items`].
    Open(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounRef {
    /// The word as written (`basket`, `food-basket`, `LittleRedRidingHood`).
    pub surface: String,
    pub sense: SenseRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntityRef {
    Known(u32),
    Open(usize),
}

impl EntityRef {
    pub fn term(&self) -> Option<Term> {
        match self {
            EntityRef::Known(id) => Some(Term::Anon(*id)),
            EntityRef::Open(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerbRef {
    Known(String),
    Open(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtomKind {
    Type { entity: EntityRef, noun: NounRef },
    Property { subject: EntityRef, property: String, object: EntityRef },
    /// Arguments in clause order: subject, object, then prepositional
    /// phrases as written.
    Invocation { verb: VerbRef, surface: String, args: Vec<(Slot, EntityRef)> },
    /// `entity` has no `property` link to anything of class `filler`; with
    /// `inverse`, nothing of class `filler` links to `entity`.
    NegatedExistential { entity: EntityRef, property: String, inverse: bool, filler: NounRef },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParaphraseAtom {
    pub label: String,
    pub kind: AtomKind,
}

impl ParaphraseAtom {
    fn entity_refs(&self) -> Vec<EntityRef> {
        match &self.kind {
            AtomKind::Type { entity, .. } | AtomKind::NegatedExistential { entity, .. } => vec![*entity],
            AtomKind::Property { subject, object, .. } => vec![*subject, *object],
            AtomKind::Invocation { args, .. } => args.iter().map(|(_, e)| *e).collect(),
        }
    }

    /// Ambiguity items this atom still depends on.
    pub fn open_items(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .entity_refs()
            .into_iter()
            .filter_map(|e| match e {
                EntityRef::Open(i) => Some(i),
                EntityRef::Known(_) => None,
            })
            .collect();
        match &self.kind {
            AtomKind::Type { noun, .. } | AtomKind::NegatedExistential { filler: noun, .. } => {
                if let SenseRef::Open(i) = noun.sense {
                    out.push(i);
                }
            }
            AtomKind::Invocation { verb: VerbRef::Open(i), .. } => out.push(*i),
            _ => {}
        }
        out
    }

    pub fn is_resolved(&self) -> bool {
        self.open_items().is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ItemKind {
    NounSense,
    VerbSense,
    Antecedent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hint {
    Valid,
    Invalid,
    Unknown,
}

impl Hint {
    pub fn tag(&self) -> &'static str {
        match self {
            Hint::Valid => "[valid]",
            Hint::Invalid => "[invalid]",
            Hint::Unknown => "[?]",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    /// `fd:Basket`, a template name, or `objN`.
    pub id: String,
    pub display: String,
    pub hint: Hint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguityItem {
    /// `word@token`, e.g. `she@10`.
    pub site: String,
    pub word: String,
    pub token: usize,
    /// Label of the first atom depending on this item.
    pub label: String,
    pub kind: ItemKind,
    pub candidates: Vec<Candidate>,
    pub resolution: Option<String>,
}

impl AmbiguityItem {
    /// Whether a choices-file key addresses this item.
    pub fn answers_to(&self, key: &str) -> bool {
        let key = key.trim();
        key.eq_ignore_ascii_case(&self.site)
            || key.eq_ignore_ascii_case(&self.word)
            || (self.kind == ItemKind::VerbSense && key.eq_ignore_ascii_case(&lemma(&self.word.to_lowercase())))
    }
}

/// A discourse object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: u32,
    /// Token of the introducing noun phrase's head.
    pub token: usize,
    pub noun: Option<NounRef>,
    /// Paraphrase variable such as `X1`.
    pub var: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Discourse {
    pub atoms: Vec<ParaphraseAtom>,
    pub items: Vec<AmbiguityItem>,
    pub tokens: Vec<Token>,
    pub entities: Vec<Entity>,
}

impl Discourse {
    pub fn entity(&self, id: u32) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn unresolved(&self) -> Vec<&AmbiguityItem> {
        self.items.iter().filter(|i| i.resolution.is_none()).collect()
    }
}

fn is_obj_ref(w: &str) -> Option<u32> {
    let rest = w.strip_prefix("obj").or_else(|| w.strip_prefix("Obj"))?;
    rest.parse().ok()
}

fn is_var(w: &str) -> bool {
    let mut ch = w.chars();
    ch.next().is_some_and(|c| c.is_ascii_uppercase()) && w.len() > 1 && ch.all(|c| c.is_ascii_digit())
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

struct FactParser<'l> {
    lex: &'l Lexicon,
    d: Discourse,
}

/// An indefinite noun phrase used only as a class (in negations).
struct ClassNp {
    noun: NounRef,
}

impl<'l> FactParser<'l> {
    fn fresh_id(&self, token: usize) -> u32 {
        let id = token as u32;
        if self.d.entities.iter().any(|e| e.id == id) {
            self.d.entities.iter().map(|e| e.id).max().unwrap_or(0) + 1
        } else {
            id
        }
    }

    fn add_item(&mut self, word: &str, token: usize, kind: ItemKind, candidates: Vec<Candidate>) -> usize {
        self.d.items.push(AmbiguityItem {
            site: format!("{}@{token}", word.to_lowercase()),
            word: word.to_string(),
            token,
            label: String::new(),
            kind,
            candidates,
            resolution: None,
        });
        self.d.items.len() - 1
    }

    /// Resolves a noun word (plain lexeme, MWU, or qualified class).
    fn noun(&mut self, tok: &Token, sentence: usize) -> Result<NounRef, ParseError> {
        let w = tok.text.as_str();
        let unknown = || ParseError::UnknownWord { sentence, word: w.to_string() };
        if let Some((ns, local)) = w.split_once(':') {
            let class = Iri::new(ns, local);
            self.lex.sense_of(&class).ok_or_else(unknown)?;
            return Ok(NounRef { surface: w.to_string(), sense: SenseRef::Known(class) });
        }
        if let Some(senses) = self.lex.noun(w) {
            if senses.len() == 1 {
                return Ok(NounRef { surface: w.to_string(), sense: SenseRef::Known(senses[0].class.clone()) });
            }
            let cands = senses
                .iter()
                .map(|s| Candidate { id: s.class.to_string(), display: s.formal_name(), hint: Hint::Unknown })
                .collect();
            let item = self.add_item(w, tok.index, ItemKind::NounSense, cands);
            return Ok(NounRef { surface: w.to_string(), sense: SenseRef::Open(item) });
        }
        if let Some(s) = self.lex.noun_mwu(w) {
            let surface = w.split_once('-').map_or(w, |(_, l)| l).to_string();
            return Ok(NounRef { surface, sense: SenseRef::Known(s.class.clone()) });
        }
        Err(unknown())
    }

    fn is_noun(&self, w: &str) -> bool {
        self.lex.noun(w).is_some() || self.lex.noun_mwu(w).is_some()
    }

    fn introduce(&mut self, token: usize, noun: Option<NounRef>, var: Option<String>) -> u32 {
        let id = self.fresh_id(token);
        self.d.entities.push(Entity { id, token, noun, var });
        id
    }

    fn atom(&mut self, out: &mut Vec<AtomKind>, kind: AtomKind) {
        out.push(kind);
    }

    fn optional_var(c: &mut Cursor) -> Option<String> {
        match c.peek() {
            Some(t) if is_var(&t.text) && is_obj_ref(&t.text).is_none() => {
                c.next();
                Some(t.text.clone())
            }
            _ => None,
        }
    }

    /// A noun phrase denoting a discourse object. Atoms the phrase
    /// contributes (type assertions, possessives, relative clauses) go to
    /// `out`; `subject` is the clause subject for possessives.
    fn entity_np(
        &mut self,
        c: &mut Cursor,
        out: &mut Vec<AtomKind>,
        subject: Option<EntityRef>,
    ) -> Result<EntityRef, ParseError> {
        let s = c.sentence;
        let tok = c.peek().ok_or_else(|| c.err(&["noun phrase"]))?;
        let lower = tok.text.to_lowercase();

        if let Some(id) = is_obj_ref(&tok.text) {
            c.next();
            if self.d.entity(id).is_none() {
                self.d.entities.push(Entity { id, token: tok.index, noun: None, var: None });
            }
            return Ok(EntityRef::Known(id));
        }

        if lower == "her" || lower == "his" || lower == "its" {
            if let Some(next) = c.peek_at(1) {
                if self.is_noun(next) {
                    c.next();
                    let head = c.next().unwrap();
                    let owner = subject.ok_or_else(|| c.err(&["clause subject before possessive"]))?;
                    let noun = self.noun(head, s)?;
                    let property = format!("has{}", capitalize(&noun.surface));
                    if !self.lex.properties.contains(&property) {
                        return Err(ParseError::UnknownWord { sentence: s, word: property });
                    }
                    let id = self.introduce(head.index, Some(noun), None);
                    let e = EntityRef::Known(id);
                    self.atom(out, AtomKind::Property { subject: owner, property, object: e });
                    return Ok(e);
                }
            }
        }

        if self.lex.is_pronoun(&lower) {
            c.next();
            if self.d.entities.is_empty() {
                return Err(ParseError::UnknownAntecedent { sentence: s, word: tok.text.clone() });
            }
            let cands = self
                .d
                .entities
                .iter()
                .rev()
                .map(|e| Candidate {
                    id: format!("obj{}", e.id),
                    display: e.noun.as_ref().map_or_else(|| format!("obj{}", e.id), |n| n.surface.clone()),
                    hint: Hint::Unknown,
                })
                .collect();
            let item = self.add_item(&tok.text, tok.index, ItemKind::Antecedent, cands);
            return Ok(EntityRef::Open(item));
        }

        if lower == "the" {
            c.next();
            let head = c.word("noun")?;
            let var = Self::optional_var(c);
            if let Some(v) = &var {
                if let Some(e) = self.d.entities.iter().rev().find(|e| e.var.as_deref() == Some(v)) {
                    return Ok(EntityRef::Known(e.id));
                }
            }
            let probe = self.noun(head, s)?;
            let want = probe.surface.to_lowercase();
            let found = self.d.entities.iter().rev().find(|e| {
                e.noun.as_ref().is_some_and(|n| n.surface.to_lowercase() == want || n.sense == probe.sense)
            });
            // The probe may have opened an item for a polysemous word.
            if let SenseRef::Open(i) = probe.sense {
                if i + 1 == self.d.items.len() {
                    self.d.items.pop();
                }
            }
            return match found {
                Some(e) => Ok(EntityRef::Known(e.id)),
                None => Err(ParseError::UnknownAntecedent { sentence: s, word: format!("the {}", head.text) }),
            };
        }

        let indefinite = c.article();
        let head = c.word("noun")?;
        if !indefinite && !self.is_noun(&head.text) && !head.text.contains(':') {
            return Err(ParseError::UnknownWord { sentence: s, word: head.text.clone() });
        }
        let noun = self.noun(head, s)?;
        let var = Self::optional_var(c);
        let id = self.introduce(head.index, Some(noun.clone()), var);
        let e = EntityRef::Known(id);
        self.atom(out, AtomKind::Type { entity: e, noun });
        if c.is("that") {
            self.relative(c, out, e)?;
        }
        Ok(e)
    }

    /// `a NP` used as a class filler.
    fn class_np(&mut self, c: &mut Cursor) -> Result<ClassNp, ParseError> {
        if !c.article() {
            return Err(c.err(&["a", "an"]));
        }
        let head = c.word("noun")?;
        Ok(ClassNp { noun: self.noun(head, c.sentence)? })
    }

    /// `that is [not] PARTICIPLE by a NP`.
    fn relative(&mut self, c: &mut Cursor, out: &mut Vec<AtomKind>, e: EntityRef) -> Result<(), ParseError> {
        c.expect(&["that"])?;
        c.expect(&["is"])?;
        let negated = c.eat("not");
        let part = c.word("past participle")?;
        let known: Vec<String> = self.lex.properties.iter().cloned().collect();
        let property = super::morph::participle_property(&part.text, &known);
        c.expect(&["by"])?;
        if negated {
            let f = self.class_np(c)?;
            self.atom(out, AtomKind::NegatedExistential { entity: e, property, inverse: true, filler: f.noun });
        } else {
            let mut inner = Vec::new();
            let agent = self.entity_np(c, &mut inner, None)?;
            self.atom(out, AtomKind::Property { subject: agent, property, object: e });
            out.extend(inner);
        }
        Ok(())
    }

    fn is_np_start(&self, c: &Cursor) -> bool {
        match c.peek() {
            None => false,
            Some(t) => {
                let l = t.text.to_lowercase();
                !(t.text == "." || t.text == "," || l == "and" || self.lex.prepositions.contains(&l))
            }
        }
    }

    /// One verb phrase for `subject`, appending its atoms in order.
    fn verb_phrase(&mut self, c: &mut Cursor, subject: EntityRef, out: &mut Vec<AtomKind>) -> Result<(), ParseError> {
        let s = c.sentence;
        if c.eat("is") {
            if !c.article() {
                return Err(c.err(&["a", "an"]));
            }
            let head = c.word("noun")?;
            let noun = self.noun(head, s)?;
            out.push(AtomKind::Type { entity: subject, noun });
            return Ok(());
        }
        let vt = c.word("verb")?;
        let w = vt.text.clone();

        if self.lex.properties.contains(&w) {
            let mut after = Vec::new();
            let object = self.entity_np(c, &mut after, Some(subject))?;
            out.push(AtomKind::Property { subject, property: w, object });
            out.extend(after);
            return Ok(());
        }

        let (verb, surface) = match w.split_once('-') {
            Some((prefix, surf)) => {
                let templates = self.lex.verb(&lemma(surf)).unwrap_or(&[]);
                let t = templates
                    .iter()
                    .find(|t| t.eq_ignore_ascii_case(prefix))
                    .ok_or_else(|| ParseError::UnknownWord { sentence: s, word: w.clone() })?;
                (VerbRef::Known(t.clone()), surf.to_string())
            }
            None => {
                let templates = self
                    .lex
                    .verb(&lemma(&w.to_lowercase()))
                    .ok_or_else(|| ParseError::UnknownWord { sentence: s, word: w.clone() })?
                    .to_vec();
                if templates.len() == 1 {
                    (VerbRef::Known(templates[0].clone()), w.clone())
                } else {
                    let cands = templates
                        .iter()
                        .map(|t| Candidate {
                            id: t.clone(),
                            display: format!("{}-{}", t.to_lowercase(), w),
                            hint: Hint::Unknown,
                        })
                        .collect();
                    let item = self.add_item(&w, vt.index, ItemKind::VerbSense, cands);
                    (VerbRef::Open(item), w.clone())
                }
            }
        };

        let mut args = vec![(Slot::Subject, subject)];
        let mut after = Vec::new();
        if self.is_np_start(c) {
            let o = self.entity_np(c, &mut after, Some(subject))?;
            args.push((Slot::Object, o));
        }
        while let Some(t) = c.peek() {
            let p = t.text.to_lowercase();
            if !self.lex.prepositions.contains(&p) {
                break;
            }
            c.next();
            let e = self.entity_np(c, &mut after, Some(subject))?;
            args.push((Slot::Prep(p), e));
        }
        out.push(AtomKind::Invocation { verb, surface, args });
        out.extend(after);
        Ok(())
    }

    fn sentence(&mut self, c: &mut Cursor) -> Result<Vec<AtomKind>, ParseError> {
        let mut out = Vec::new();
        if c.is("there") && c.peek_at(1).is_some_and(|w| w.eq_ignore_ascii_case("is")) {
            c.next();
            c.next();
            self.entity_np(c, &mut out, None)?;
            c.finish()?;
            return Ok(out);
        }
        let negation = ["it", "is", "false", "that"];
        if negation.iter().enumerate().all(|(k, w)| c.peek_at(k).is_some_and(|t| t.eq_ignore_ascii_case(w))) {
            for _ in 0..4 {
                c.next();
            }
            return self.negation(c);
        }
        let subject = self.entity_np(c, &mut out, None)?;
        loop {
            self.verb_phrase(c, subject, &mut out)?;
            if !c.eat("and") {
                break;
            }
        }
        c.finish()?;
        Ok(out)
    }

    /// After `It is false that`: `a N VERBs REF` or `REF VERBs a N`.
    fn negation(&mut self, c: &mut Cursor) -> Result<Vec<AtomKind>, ParseError> {
        let mut out = Vec::new();
        let atom = if c.is("a") || c.is("an") {
            let f = self.class_np(c)?;
            let property = c.word("verb")?.text.clone();
            let e = self.entity_np(c, &mut out, None)?;
            AtomKind::NegatedExistential { entity: e, property, inverse: true, filler: f.noun }
        } else {
            let e = self.entity_np(c, &mut out, None)?;
            let property = c.word("verb")?.text.clone();
            let f = self.class_np(c)?;
            AtomKind::NegatedExistential { entity: e, property, inverse: false, filler: f.noun }
        };
        c.finish()?;
        out.push(atom);
        Ok(out)
    }
}

/// Parses factual text. Each noun phrase introduction mints a discourse id
/// equal to the token index of its head noun (or the next free id).
/// Polysemous words and pronouns become ambiguity items.
pub fn parse_factual(text: &str, lexicon: &Lexicon) -> Result<Discourse, ParseError> {
    let tokens = tokenize(text);
    let mut p = FactParser { lex: lexicon, d: Discourse::default() };
    let mut kinds = Vec::new();
    for (i, s) in sentences(&tokens).into_iter().enumerate() {
        let mut c = Cursor::new(s, i + 1);
        kinds.extend(p.sentence(&mut c)?);
    }
    let mut d = p.d;
    d.tokens = tokens;
    d.atoms = kinds.into_iter().enumerate().map(|(i, kind)| ParaphraseAtom { label: step_label(i), kind }).collect();
    for (idx, item) in d.items.iter_mut().enumerate() {
        if let Some(a) = d.atoms.iter().find(|a| a.open_items().contains(&idx)) {
            item.label = a.label.clone();
        }
    }
    Ok(d)
}
