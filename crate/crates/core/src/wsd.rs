//! Word-sense and antecedent disambiguation of parsed factual text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::dl::{ABox, Axiom, ClassExpr, Role};
use crate::parser::{
    AmbiguityItem, AtomKind, Discourse, EntityRef, Hint, ItemKind, Lexicon, NounRef, ParaphraseAtom, SenseRef,
    VerbRef,
};
use crate::rdf::{Iri, Term};
use crate::reasoner::{KnowledgeBase, Reasoner};
use crate::templates::{compile_invocation, ProceduralTemplate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WsdError {
    #[error("unresolved ambiguity at {}", .0.join(", "))]
    UnresolvedAmbiguity(Vec<String>),
    #[error("no compatible antecedent for `{0}`")]
    NoAntecedent(String),
    #[error("choice `{key} = {value}` matches no candidate")]
    BadChoice { key: String, value: String },
    #[error("choice key `{0}` matches no ambiguity site")]
    UnknownSite(String),
    #[error("choices line {line}: expected `site = candidate`")]
    ChoicesSyntax { line: usize },
}

/// Everything disambiguation consults.
#[derive(Debug, Clone, Copy)]
pub struct WsdContext<'a> {
    pub tbox: &'a [Axiom],
    pub lexicon: &'a Lexicon,
    pub templates: &'a [ProceduralTemplate],
    pub reasoner: Reasoner,
}

/// Answers ambiguity items that neither the choices file nor hinting
/// settled. Returning `None` leaves the item unresolved.
pub trait ChoiceProvider {
    fn ask(&mut self, item: &AmbiguityItem, discourse: &Discourse) -> Option<String>;
}

/// Never answers.
pub struct NoPrompt;

impl ChoiceProvider for NoPrompt {
    fn ask(&mut self, _: &AmbiguityItem, _: &Discourse) -> Option<String> {
        None
    }
}

/// Parses `site = candidate` lines; `#` starts a comment.
pub fn parse_choices(text: &str) -> Result<Vec<(String, String)>, WsdError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(WsdError::ChoicesSyntax { line: i + 1 })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(WsdError::ChoicesSyntax { line: i + 1 });
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Atoms with every resolved item substituted in.
pub fn substitute(atoms: &[ParaphraseAtom], items: &[AmbiguityItem]) -> Vec<ParaphraseAtom> {
    let ent = |e: &EntityRef| match e {
        EntityRef::Open(i) => match items[*i].resolution.as_deref().and_then(obj_id) {
            Some(id) => EntityRef::Known(id),
            None => *e,
        },
        EntityRef::Known(_) => *e,
    };
    let noun = |n: &NounRef| match n.sense {
        SenseRef::Open(i) => match items[i].resolution.as_deref().and_then(|r| r.parse::<Iri>().ok()) {
            Some(c) => NounRef { surface: n.surface.clone(), sense: SenseRef::Known(c) },
            None => n.clone(),
        },
        SenseRef::Known(_) => n.clone(),
    };
    atoms
        .iter()
        .map(|a| {
            let kind = match &a.kind {
                AtomKind::Type { entity, noun: n } => AtomKind::Type { entity: ent(entity), noun: noun(n) },
                AtomKind::Property { subject, property, object } => {
                    AtomKind::Property { subject: ent(subject), property: property.clone(), object: ent(object) }
                }
                AtomKind::Invocation { verb, surface, args } => AtomKind::Invocation {
                    verb: match verb {
                        VerbRef::Open(i) => match &items[*i].resolution {
                            Some(t) => VerbRef::Known(t.clone()),
                            None => verb.clone(),
                        },
                        VerbRef::Known(_) => verb.clone(),
                    },
                    surface: surface.clone(),
                    args: args.iter().map(|(s, e)| (s.clone(), ent(e))).collect(),
                },
                AtomKind::NegatedExistential { entity, property, inverse, filler } => AtomKind::NegatedExistential {
                    entity: ent(entity),
                    property: property.clone(),
                    inverse: *inverse,
                    filler: noun(filler),
                },
            };
            ParaphraseAtom { label: a.label.clone(), kind }
        })
        .collect()
}

fn obj_id(s: &str) -> Option<u32> {
    s.strip_prefix("obj").and_then(|n| n.parse().ok())
}

fn known_class(n: &NounRef) -> Option<ClassExpr> {
    match &n.sense {
        SenseRef::Known(c) => Some(ClassExpr::Named(c.clone())),
        SenseRef::Open(_) => None,
    }
}

/// ABox of every fully known assertion among `atoms`. Invocations carry no
/// ontological content and are skipped, as are atoms touching open sites.
pub fn abox_of(atoms: &[ParaphraseAtom]) -> ABox {
    let mut abox = ABox::new();
    for a in atoms {
        match &a.kind {
            AtomKind::Type { entity: EntityRef::Known(id), noun } => {
                if let Some(c) = known_class(noun) {
                    abox.assert_type(Term::Anon(*id), c);
                }
            }
            AtomKind::Property { subject: EntityRef::Known(s), property, object: EntityRef::Known(o) } => {
                abox.assert_role(Term::Anon(*s), property.clone(), Term::Anon(*o));
            }
            AtomKind::NegatedExistential { entity: EntityRef::Known(id), property, inverse, filler } => {
                if let Some(c) = known_class(filler) {
                    let role = if *inverse { Role::inv(property.clone()) } else { Role::new(property.clone()) };
                    abox.assert_type(Term::Anon(*id), ClassExpr::not(ClassExpr::exists(role, c)));
                }
            }
            _ => {}
        }
    }
    abox
}

/// Marks each sense candidate valid iff the merged ontology plus the text's
/// known assertions, with this sense substituted, stays consistent.
pub fn hint_noun_senses(atoms: &[ParaphraseAtom], items: &mut [AmbiguityItem], item: usize, ctx: &WsdContext) {
    for k in 0..items[item].candidates.len() {
        let mut probe = items.to_vec();
        probe[item].resolution = Some(items[item].candidates[k].id.clone());
        let kb = KnowledgeBase::new(ctx.tbox.to_vec(), abox_of(&substitute(atoms, &probe)));
        items[item].candidates[k].hint = match ctx.reasoner.is_consistent(&kb) {
            Ok(true) => Hint::Valid,
            Ok(false) => Hint::Invalid,
            Err(_) => Hint::Unknown,
        };
    }
}

/// Marks each template candidate valid iff its role map covers the clause's
/// syntactic arguments and binds every parameter.
pub fn hint_verb_senses(atoms: &[ParaphraseAtom], items: &mut [AmbiguityItem], item: usize, ctx: &WsdContext) {
    let args = atoms.iter().find_map(|a| match &a.kind {
        AtomKind::Invocation { verb: VerbRef::Open(i), args, .. } if *i == item => Some(args.clone()),
        _ => None,
    });
    let Some(args) = args else { return };
    let terms: Vec<_> = args
        .iter()
        .enumerate()
        .map(|(k, (s, e))| (s.clone(), e.term().unwrap_or(Term::Var(format!("open{k}")))))
        .collect();
    for c in &mut items[item].candidates {
        c.hint = match ctx.templates.iter().find(|t| t.name == c.id) {
            Some(t) if compile_invocation(t, &terms).is_ok() => Hint::Valid,
            _ => Hint::Invalid,
        };
    }
}

/// Class an entity is known to have, or the union of its open senses.
fn entity_class(id: u32, atoms: &[ParaphraseAtom], items: &[AmbiguityItem], d: &Discourse) -> ClassExpr {
    let mut parts = Vec::new();
    if let Some(SenseRef::Known(c)) = d.entity(id).and_then(|e| e.noun.as_ref()).map(|n| &n.sense) {
        parts.push(ClassExpr::Named(c.clone()));
    }
    for a in atoms {
        if let AtomKind::Type { entity: EntityRef::Known(e), noun } = &a.kind {
            if *e != id {
                continue;
            }
            match &noun.sense {
                SenseRef::Known(c) => parts.push(ClassExpr::Named(c.clone())),
                SenseRef::Open(i) => parts.push(ClassExpr::or(
                    items[*i].candidates.iter().filter_map(|c| c.id.parse().ok()).map(ClassExpr::Named),
                )),
            }
        }
    }
    if parts.is_empty() {
        ClassExpr::Top
    } else {
        ClassExpr::and(parts)
    }
}

/// Keeps the antecedent candidates whose class is compatible with the
/// pronoun's constraint, in recency order.
pub fn resolve_anaphor(
    atoms: &[ParaphraseAtom],
    d: &Discourse,
    items: &mut [AmbiguityItem],
    item: usize,
    ctx: &WsdContext,
) -> Result<(), WsdError> {
    let constraint = ctx.lexicon.pronouns.get(&items[item].word.to_lowercase()).cloned().unwrap_or(ClassExpr::Top);
    let snapshot = items.to_vec();
    let mut kept = Vec::new();
    for c in &items[item].candidates {
        let Some(id) = obj_id(&c.id) else { continue };
        let expr = ClassExpr::and([entity_class(id, atoms, &snapshot, d), constraint.clone()]);
        let hint = match ctx.reasoner.is_satisfiable(ctx.tbox, &expr) {
            Ok(true) => Hint::Valid,
            Ok(false) => continue,
            Err(_) => Hint::Unknown,
        };
        let mut c = c.clone();
        c.hint = hint;
        kept.push(c);
    }
    if kept.is_empty() {
        return Err(WsdError::NoAntecedent(items[item].site.clone()));
    }
    items[item].candidates = kept;
    Ok(())
}

/// Maps a user-supplied value to a candidate id: the id itself, a member
/// class, an MWU prefix or name, a template name, or an antecedent's noun.
pub fn match_choice(item: &AmbiguityItem, value: &str, d: &Discourse, lex: &Lexicon) -> Option<String> {
    let v = value.trim();
    if let Some(c) = item.candidates.iter().find(|c| c.id.eq_ignore_ascii_case(v) || c.display.eq_ignore_ascii_case(v)) {
        return Some(c.id.clone());
    }
    let hit = |c: &&crate::parser::Candidate| match item.kind {
        ItemKind::NounSense => c
            .id
            .parse::<Iri>()
            .ok()
            .and_then(|iri| lex.sense_of(&iri).cloned())
            .is_some_and(|s| s.answers_to(v)),
        ItemKind::VerbSense => {
            v.split_once('-').is_some_and(|(t, _)| c.id.eq_ignore_ascii_case(t))
        }
        ItemKind::Antecedent => obj_id(&c.id).and_then(|id| d.entity(id)).and_then(|e| e.noun.as_ref()).is_some_and(|n| {
            n.surface.eq_ignore_ascii_case(v)
                || matches!(&n.sense, SenseRef::Known(iri) if iri.to_string().eq_ignore_ascii_case(v))
        }),
    };
    let matches: Vec<&crate::parser::Candidate> = item.candidates.iter().filter(hit).collect();
    match matches.as_slice() {
        [one] => Some(one.id.clone()),
        _ => None,
    }
}

/// Result of [`disambiguate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolved {
    pub atoms: Vec<ParaphraseAtom>,
    /// The input discourse with hints and resolutions filled in.
    pub discourse: Discourse,
}

/// Processes ambiguity sites in text order. Each site is settled by an
/// explicit choice, else automatically when exactly one candidate is
/// valid, else by `provider`.
pub fn disambiguate(
    discourse: &Discourse,
    ctx: &WsdContext,
    choices: &[(String, String)],
    provider: &mut dyn ChoiceProvider,
) -> Result<Resolved, WsdError> {
    let mut d = discourse.clone();
    for (k, _) in choices {
        if !d.items.iter().any(|i| i.answers_to(k)) {
            return Err(WsdError::UnknownSite(k.clone()));
        }
    }
    let mut order: Vec<usize> = (0..d.items.len()).collect();
    order.sort_by_key(|&i| d.items[i].token);
    for i in order {
        if d.items[i].resolution.is_some() {
            continue;
        }
        let atoms = substitute(&d.atoms, &d.items);
        match d.items[i].kind {
            ItemKind::NounSense => hint_noun_senses(&atoms, &mut d.items, i, ctx),
            ItemKind::VerbSense => hint_verb_senses(&atoms, &mut d.items, i, ctx),
            ItemKind::Antecedent => {
                let mut items = d.items.clone();
                resolve_anaphor(&atoms, &d, &mut items, i, ctx)?;
                d.items = items;
            }
        }
        let item = &d.items[i];
        if let Some((key, value)) = choices.iter().find(|(k, _)| item.answers_to(k)) {
            let id = match_choice(item, value, &d, ctx.lexicon)
                .ok_or_else(|| WsdError::BadChoice { key: key.clone(), value: value.clone() })?;
            d.items[i].resolution = Some(id);
            continue;
        }
        let valid: Vec<&str> =
            item.candidates.iter().filter(|c| c.hint == Hint::Valid).map(|c| c.id.as_str()).collect();
        if let [only] = valid.as_slice() {
            d.items[i].resolution = Some(only.to_string());
            continue;
        }
        if let Some(answer) = provider.ask(item, &d) {
            if let Some(id) = match_choice(item, &answer, &d, ctx.lexicon) {
                d.items[i].resolution = Some(id);
            }
        }
    }
    let open: Vec<String> = d.unresolved().iter().map(|i| i.site.clone()).collect();
    if !open.is_empty() {
        return Err(WsdError::UnresolvedAmbiguity(open));
    }
    let atoms = substitute(&d.atoms, &d.items);
    Ok(Resolved { atoms, discourse: d })
}

/// One block per site: candidates with their hints and the resolution.
pub fn ambiguity_report(d: &Discourse) -> String {
    let mut s = String::new();
    for item in &d.items {
        let kind = match item.kind {
            ItemKind::NounSense => "sense",
            ItemKind::VerbSense => "procedure",
            ItemKind::Antecedent => "antecedent",
        };
        let _ = writeln!(s, "{} ({kind}, statement {})", item.site, item.label);
        for (n, c) in item.candidates.iter().enumerate() {
            let mark = if item.resolution.as_deref() == Some(c.id.as_str()) { " <=" } else { "" };
            let _ = writeln!(s, "  {}. {} {} {}{mark}", n + 1, c.id, c.display, c.hint.tag());
        }
    }
    s
}

/// Hint summary keyed by site, for machine consumers.
pub fn hints(d: &Discourse) -> BTreeMap<String, Vec<(String, Hint)>> {
    d.items
        .iter()
        .map(|i| (i.site.clone(), i.candidates.iter().map(|c| (c.id.clone(), c.hint)).collect()))
        .collect()
}
