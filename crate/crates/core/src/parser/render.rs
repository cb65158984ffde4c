//! Paraphrase rendering: one line per atom, and inline re-emission of the
//! original text with senses and antecedents spelled out.

use thiserror::Error;

use super::factual::{AtomKind, Discourse, EntityRef, ItemKind, NounRef, ParaphraseAtom, SenseRef, VerbRef};
use super::lexicon::Lexicon;

/// How polysemous words are spelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Style {
    /// `food-basket`, `removing-takes`.
    #[default]
    Narrative,
    /// `ColdWarEasternEurope-Germany`.
    Formal,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unresolved ambiguity at {}", sites.join(", "))]
pub struct UnresolvedAmbiguity {
    pub sites: Vec<String>,
}

fn entity(e: &EntityRef, initial: bool) -> Result<String, UnresolvedAmbiguity> {
    match e {
        EntityRef::Known(id) if initial => Ok(format!("Obj{id}")),
        EntityRef::Known(id) => Ok(format!("obj{id}")),
        EntityRef::Open(i) => Err(UnresolvedAmbiguity { sites: vec![format!("item {i}")] }),
    }
}

fn noun_name(n: &NounRef, lex: &Lexicon, style: Style) -> Result<String, UnresolvedAmbiguity> {
    let SenseRef::Known(class) = &n.sense else {
        return Err(UnresolvedAmbiguity { sites: vec![n.surface.clone()] });
    };
    let Some(sense) = lex.sense_of(class) else {
        return Ok(n.surface.clone());
    };
    Ok(match style {
        Style::Narrative => sense.narrative_name(&n.surface),
        Style::Formal => sense.formal_name(),
    })
}

fn article(word: &str) -> &'static str {
    match word.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

fn verb_name(verb: &VerbRef, surface: &str, lex: &Lexicon) -> Result<String, UnresolvedAmbiguity> {
    let VerbRef::Known(t) = verb else {
        return Err(UnresolvedAmbiguity { sites: vec![surface.to_string()] });
    };
    let poly = lex.verb(&super::morph::lemma(&surface.to_lowercase())).is_some_and(|ts| ts.len() > 1);
    Ok(if poly { format!("{}-{surface}", t.to_lowercase()) } else { surface.to_string() })
}

fn render_atom(a: &ParaphraseAtom, lex: &Lexicon, style: Style) -> Result<String, UnresolvedAmbiguity> {
    Ok(match &a.kind {
        AtomKind::Type { entity: e, noun } => {
            let n = noun_name(noun, lex, style)?;
            format!("{} is {} {n}.", entity(e, true)?, article(&n))
        }
        AtomKind::Property { subject, property, object } => {
            format!("{} {property} {}.", entity(subject, true)?, entity(object, false)?)
        }
        AtomKind::Invocation { verb, surface, args } => {
            let mut line = String::new();
            for (k, (slot, e)) in args.iter().enumerate() {
                match slot {
                    crate::templates::Slot::Subject => {
                        line.push_str(&entity(e, k == 0)?);
                        line.push(' ');
                        line.push_str(&verb_name(verb, surface, lex)?);
                    }
                    crate::templates::Slot::Object => {
                        line.push(' ');
                        line.push_str(&entity(e, false)?);
                    }
                    crate::templates::Slot::Prep(p) => {
                        line.push_str(&format!(" {p} {}", entity(e, false)?));
                    }
                }
            }
            line.push('.');
            line
        }
        AtomKind::NegatedExistential { entity: e, property, inverse, filler } => {
            let f = noun_name(filler, lex, style)?;
            if *inverse {
                format!("It is false that {} {f} {property} {}.", article(&f), entity(e, false)?)
            } else {
                format!("It is false that {} {property} {} {f}.", entity(e, false)?, article(&f))
            }
        }
    })
}

/// One line per atom, e.g. `Obj4 removing-takes obj15 from obj8.`
pub fn render_paraphrase(atoms: &[ParaphraseAtom], lex: &Lexicon, style: Style) -> Result<String, UnresolvedAmbiguity> {
    let mut open = Vec::new();
    let mut lines = Vec::new();
    for a in atoms {
        match render_atom(a, lex, style) {
            Ok(l) => lines.push(l),
            Err(e) => open.extend(e.sites.into_iter().map(|s| format!("{} ({s})", a.label))),
        }
    }
    if !open.is_empty() {
        return Err(UnresolvedAmbiguity { sites: open });
    }
    Ok(lines.iter().map(|l| format!("{l}\n")).collect())
}

/// The original text with each resolved site rewritten: senses as MWUs,
/// pronouns as `She-LittleRedRidingHood`.
pub fn render_inline(d: &Discourse, lex: &Lexicon, style: Style) -> String {
    let mut words: Vec<String> = d.tokens.iter().map(|t| t.text.clone()).collect();
    for item in &d.items {
        let Some(choice) = &item.resolution else { continue };
        let slot = &mut words[item.token - 1];
        match item.kind {
            ItemKind::NounSense => {
                if let Ok(class) = choice.parse() {
                    if let Some(s) = lex.sense_of(&class) {
                        *slot = match style {
                            Style::Narrative => s.narrative_name(&item.word),
                            Style::Formal => s.formal_name(),
                        };
                    }
                }
            }
            ItemKind::VerbSense => *slot = format!("{}-{}", choice.to_lowercase(), item.word),
            ItemKind::Antecedent => {
                let name = choice
                    .strip_prefix("obj")
                    .and_then(|n| n.parse().ok())
                    .and_then(|id| d.entity(id))
                    .and_then(|e| e.noun.as_ref())
                    .map_or_else(|| choice.clone(), |n| n.surface.clone());
                *slot = format!("{}-{name}", item.word);
            }
        }
    }
    let mut out = String::new();
    for w in words {
        let punct = w.len() == 1 && !w.chars().next().unwrap().is_alphanumeric();
        if !out.is_empty() && !punct {
            out.push(' ');
        }
        out.push_str(&w);
    }
    out
}
