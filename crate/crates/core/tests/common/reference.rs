//! Reference renderings of the story analysis and helpers comparing them
//! with computed output up to discourse-id renaming.

use std::collections::{BTreeMap, BTreeSet};

use cnl_core::exec::Execution;
use cnl_core::parser::Lexicon;
use cnl_core::rdf::{Iri, Term, Triple};

pub const PARAPHRASE: [(&str, &str); 8] = [
    ("A", "Obj4 is a LittleRedRidingHood."),
    ("B", "Obj4 lives in obj8 with obj11."),
    ("C", "Obj8 is a farmhouse."),
    ("D", "Obj4 hasMother obj11."),
    ("E", "Obj4 removing-takes obj15 from obj8."),
    ("F", "Obj15 is a food-basket."),
    ("G", "Obj4 carries obj15 to obj25."),
    ("H", "Obj4 hasGranny obj25."),
];

/// Label, explicit statement, and implicit statement with its reason.
pub type ReportLine = (&'static str, &'static str, Option<(&'static str, &'static str)>);

pub const REPORT: [ReportLine; 8] = [
    ("A", "INSERT {<obj4> <rdf:type> <pp:LittleRedRidingHood>}", None),
    ("B", "INSERT {<obj8> <stores> <obj4>. <obj8> <stores> <obj11>}", None),
    (
        "C",
        "INSERT {<obj8> <rdf:type> <bd:Farmhouse>}",
        Some(("INSERT {<obj8> <stores> <obj15>}", "Inserted by planning because of procedural template precondition at step E.")),
    ),
    (
        "D",
        "INSERT {<obj4> <hasMother> <obj11>}",
        Some(("INSERT {<obj11> <rdf:type> <pp:Mother>}", "Entailed by range of the property hasMother.")),
    ),
    ("E", "DELETE {<obj8> <stores> <obj15>} INSERT {<obj4> <stores> <obj15>}", None),
    ("F", "INSERT {<obj15> <rdf:type> <fd:Basket>}", None),
    (
        "G",
        "DELETE {<obj4> <stores> <obj15>. ?a <stores> <obj4>} INSERT {<obj25> <stores> <obj15>. <obj25> <stores> <obj4>} WHERE {?a <stores> <obj4>. FILTER (?a != <obj25>)}",
        None,
    ),
    (
        "H",
        "INSERT {<obj4> <hasGranny> <obj25>}",
        Some(("INSERT {<obj25> <rdf:type> <pp:Granny>}", "Entailed by range of the property hasGranny.")),
    ),
];

/// Database content after each step.
pub const SNAPSHOTS: [(&str, &[&str]); 8] = [
    ("A", &["<obj4> <type> <LittleRedRidingHood>"]),
    ("B", &["<obj4> <type> <LittleRedRidingHood>", "<obj8> <stores> <obj4>", "<obj8> <stores> <obj11>"]),
    (
        "C",
        &[
            "<obj4> <type> <LittleRedRidingHood>",
            "<obj8> <stores> <obj4>",
            "<obj8> <stores> <obj11>",
            "<obj8> <type> <farmhouse>",
            "<obj8> <stores> <obj15>",
        ],
    ),
    (
        "D",
        &[
            "<obj4> <type> <LittleRedRidingHood>",
            "<obj8> <stores> <obj4>",
            "<obj8> <stores> <obj11>",
            "<obj8> <type> <farmhouse>",
            "<obj4> <hasMother> <obj11>",
            "<obj11> <type> <mother>",
            "<obj8> <stores> <obj15>",
        ],
    ),
    (
        "E",
        &[
            "<obj4> <type> <LittleRedRidingHood>",
            "<obj8> <stores> <obj4>",
            "<obj8> <stores> <obj11>",
            "<obj8> <type> <farmhouse>",
            "<obj4> <hasMother> <obj11>",
            "<obj11> <type> <mother>",
            "<obj4> <stores> <obj15>",
        ],
    ),
    (
        "F",
        &[
            "<obj4> <type> <LittleRedRidingHood>",
            "<obj8> <stores> <obj4>",
            "<obj8> <stores> <obj11>",
            "<obj8> <type> <farmhouse>",
            "<obj4> <hasMother> <obj11>",
            "<obj11> <type> <mother>",
            "<obj4> <stores> <obj15>",
            "<obj15> <type> <food-basket>",
        ],
    ),
    (
        "G",
        &[
            "<obj4> <type> <LittleRedRidingHood>",
            "<obj25> <stores> <obj4>",
            "<obj8> <stores> <obj11>",
            "<obj8> <type> <farmhouse>",
            "<obj4> <hasMother> <obj11>",
            "<obj11> <type> <mother>",
            "<obj25> <stores> <obj15>",
            "<obj15> <type> <food-basket>",
        ],
    ),
    (
        "H",
        &[
            "<obj4> <type> <LittleRedRidingHood>",
            "<obj25> <stores> <obj4>",
            "<obj8> <stores> <obj11>",
            "<obj8> <type> <farmhouse>",
            "<obj4> <hasMother> <obj11>",
            "<obj11> <type> <mother>",
            "<obj25> <stores> <obj15>",
            "<obj15> <type> <food-basket>",
            "<obj4> <hasGranny> <obj25>",
            "<obj25> <type> <granny>",
        ],
    ),
];

/// Discourse ids (`objN`, any case) in order of first appearance.
pub fn ids_in(text: &str) -> Vec<u32> {
    let mut out = Vec::new();
    let lower = text.to_lowercase();
    let mut rest = lower.as_str();
    while let Some(i) = rest.find("obj") {
        rest = &rest[i + 3..];
        let digits: String = rest.chars().take_while(char::is_ascii_digit).collect();
        if let Ok(n) = digits.parse::<u32>() {
            if !out.contains(&n) {
                out.push(n);
            }
        }
    }
    out
}

/// Maps computed ids to reference ids by order of first appearance in the
/// two paraphrases. `None` when the id counts differ.
pub fn id_map(ours: &str, reference: &str) -> Option<BTreeMap<u32, u32>> {
    let a = ids_in(ours);
    let b = ids_in(reference);
    (a.len() == b.len()).then(|| a.into_iter().zip(b).collect())
}

/// Rewrites every `objN` in `text` through `map`, keeping the case of the
/// `obj` prefix.
pub fn rename(text: &str, map: &BTreeMap<u32, u32>) -> String {
    let mut out = String::new();
    let mut chars = text.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        let tail = &text[i..];
        if tail.len() > 3 && tail[..3].eq_ignore_ascii_case("obj") && tail.as_bytes()[3].is_ascii_digit() {
            let digits: String = tail[3..].chars().take_while(char::is_ascii_digit).collect();
            let n: u32 = digits.parse().unwrap();
            out.push_str(&tail[..3]);
            out.push_str(&map.get(&n).copied().unwrap_or(n).to_string());
            for _ in 0..2 + digits.len() {
                chars.next();
            }
            continue;
        }
        out.push(c);
    }
    out
}

/// `<objN> <type> <narrative-class>` style rendering of a triple, lowercased.
pub fn plain_triple(t: &Triple, lex: &Lexicon, map: &BTreeMap<u32, u32>) -> String {
    let iri = |i: &Iri| match lex.sense_of(i) {
        Some(s) => format!("<{}>", s.narrative_name(&i.local)),
        None => format!("<{}>", i.local),
    };
    let term = |x: &Term| match x {
        Term::Iri(i) => iri(i),
        other => format!("<{other}>"),
    };
    rename(&format!("{} {} {}", term(&t.s), iri(&t.p), term(&t.o)), map).to_lowercase()
}

pub fn reference_snapshot(label: &str) -> BTreeSet<String> {
    let (_, rows) = SNAPSHOTS.iter().find(|(l, _)| *l == label).expect("known step");
    rows.iter().map(|r| r.to_lowercase()).collect()
}

pub fn computed_snapshot(e: &Execution, label: &str, lex: &Lexicon, map: &BTreeMap<u32, u32>) -> BTreeSet<String> {
    let s = e.trace.snapshots.iter().find(|s| s.label == label).expect("computed step");
    s.triples.iter().map(|t| plain_triple(t, lex, map)).collect()
}
