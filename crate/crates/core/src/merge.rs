//! Word-sense partitioning: merges monosemous micro-ontologies into one
//! sense inventory by probing cross-ontology subsumptions between
//! same-named classes with the reasoner.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dl::{Axiom, ClassExpr, MicroOntology};
use crate::parser::{Lexicon, NounSense};
use crate::rdf::Iri;
use crate::reasoner::{PreparedTBox, Reasoner, ReasonerError};
use crate::templates::ProceduralTemplate;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MergeError {
    #[error("micro-ontology `{prefix}` is incoherent: unsatisfiable {}", fmt_iris(classes))]
    InconsistentInput { prefix: String, classes: Vec<Iri> },
    #[error("merged ontology is incoherent: unsatisfiable {}", fmt_iris(classes))]
    MergeInconsistent { classes: Vec<Iri>, log: Vec<Insertion> },
    #[error("unknown ontology prefix `{0}`")]
    UnknownPrefix(String),
    #[error("duplicate ontology prefix `{0}`")]
    DuplicatePrefix(String),
    #[error(transparent)]
    Reasoner(#[from] ReasonerError),
}

fn fmt_iris(v: &[Iri]) -> String {
    v.iter().map(Iri::to_string).collect::<Vec<_>>().join(", ")
}

/// One tentative `sub ⊑ sup` insertion and its verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Insertion {
    pub sub: Iri,
    pub sup: Iri,
    pub kept: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseGroup {
    pub lexeme: String,
    /// Sorted; the first member represents the group.
    pub members: Vec<Iri>,
    pub name: String,
    /// Title of the ontology the MWU prefix comes from, for polysemous
    /// lexemes.
    pub mwu_prefix: Option<String>,
    #[serde(default)]
    pub alias: Option<String>,
}

impl SenseGroup {
    pub fn representative(&self) -> &Iri {
        &self.members[0]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseInventory {
    pub ontologies: Vec<MicroOntology>,
    /// Union of the inputs plus the kept cross-ontology axioms.
    pub merged_tbox: Vec<Axiom>,
    pub groups: Vec<SenseGroup>,
    /// Kept one-directional subsumptions between groups, as group names.
    pub cross_subsumptions: Vec<(String, String)>,
    pub log: Vec<Insertion>,
}

/// Options for [`partition_senses_with`].
#[derive(Debug, Clone, Default)]
pub struct MergeOptions {
    pub reasoner: Reasoner,
    /// Display-name overrides keyed by any member class of a group.
    pub aliases: BTreeMap<Iri, String>,
}

/// Merges `ontologies` with default options.
pub fn partition_senses(ontologies: &[MicroOntology]) -> Result<SenseInventory, MergeError> {
    partition_senses_with(ontologies, &MergeOptions::default())
}

fn check_prefixes(ontologies: &[MicroOntology]) -> Result<(), MergeError> {
    let mut known = BTreeSet::new();
    for o in ontologies {
        if !known.insert(o.prefix.as_str()) {
            return Err(MergeError::DuplicatePrefix(o.prefix.clone()));
        }
    }
    for o in ontologies {
        for ax in &o.axioms {
            for c in ax.classes() {
                if !known.contains(c.ns.as_str()) {
                    return Err(MergeError::UnknownPrefix(c.ns));
                }
            }
        }
    }
    Ok(())
}

fn unsatisfiable(reasoner: &Reasoner, tbox: &[Axiom], classes: &BTreeSet<Iri>) -> Result<Vec<Iri>, ReasonerError> {
    let prepared = PreparedTBox::new(tbox);
    let mut out = Vec::new();
    for c in classes {
        if !reasoner.satisfiable_in(&prepared, &ClassExpr::Named(c.clone()))? {
            out.push(c.clone());
        }
    }
    Ok(out)
}

/// Same-named declared classes, as ordered pairs `(x, y)` with `x.ns < y.ns`,
/// sorted by (local name, x prefix, y prefix).
pub fn same_named_pairs(ontologies: &[MicroOntology]) -> Vec<(Iri, Iri)> {
    let mut by_local: BTreeMap<String, BTreeSet<Iri>> = BTreeMap::new();
    for o in ontologies {
        for c in o.declared_classes() {
            by_local.entry(c.local.clone()).or_default().insert(c);
        }
    }
    let mut pairs = Vec::new();
    for classes in by_local.values() {
        let v: Vec<&Iri> = classes.iter().collect();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                pairs.push((v[i].clone(), v[j].clone()));
            }
        }
    }
    pairs.sort_by(|a, b| (&a.0.local, &a.0.ns, &a.1.ns).cmp(&(&b.0.local, &b.0.ns, &b.1.ns)));
    pairs
}

/// Display name for a sense group: the bare lexeme when the lexeme has a
/// single group, otherwise `Title-lexeme` with the title of the group's
/// lexicographically first prefix. An alias on any member wins.
pub fn mint_mwu(
    lexeme: &str,
    members: &[Iri],
    groups_with_lexeme: usize,
    titles: &BTreeMap<String, String>,
    aliases: &BTreeMap<Iri, String>,
) -> (String, Option<String>, Option<String>) {
    let alias = members.iter().find_map(|m| aliases.get(m)).cloned();
    let prefix = (groups_with_lexeme > 1).then(|| {
        let first = members.iter().map(|m| m.ns.as_str()).min().unwrap_or_default();
        titles.get(first).cloned().unwrap_or_else(|| first.to_string())
    });
    let name = match (&alias, &prefix) {
        (Some(a), _) => a.clone(),
        (None, Some(t)) => format!("{t}-{lexeme}"),
        (None, None) => lexeme.to_string(),
    };
    (name, prefix, alias)
}

/// The partitioning procedure. Stage 1 probes every same-named pair in
/// both directions against the accumulated ontology and keeps an insertion
/// iff every class stays satisfiable; pairs kept both ways become
/// equivalences, whose connected components are the sense groups.
pub fn partition_senses_with(ontologies: &[MicroOntology], opts: &MergeOptions) -> Result<SenseInventory, MergeError> {
    check_prefixes(ontologies)?;
    let r = &opts.reasoner;
    for o in ontologies {
        let classes: BTreeSet<Iri> = o.axioms.iter().flat_map(Axiom::classes).collect();
        let bad = unsatisfiable(r, &o.axioms, &classes)?;
        if !bad.is_empty() {
            return Err(MergeError::InconsistentInput { prefix: o.prefix.clone(), classes: bad });
        }
    }

    let mut acc: Vec<Axiom> = ontologies.iter().flat_map(|o| o.axioms.iter().cloned()).collect();
    let all_classes: BTreeSet<Iri> = acc.iter().flat_map(Axiom::classes).collect();
    let baseline = unsatisfiable(r, &acc, &all_classes)?;
    let mut log = Vec::new();
    let mut kept: BTreeSet<(Iri, Iri)> = BTreeSet::new();
    for (x, y) in same_named_pairs(ontologies) {
        for (sub, sup) in [(x.clone(), y.clone()), (y.clone(), x.clone())] {
            let ax = Axiom::SubClass(ClassExpr::Named(sub.clone()), ClassExpr::Named(sup.clone()));
            acc.push(ax);
            let broken: Vec<Iri> =
                unsatisfiable(r, &acc, &all_classes)?.into_iter().filter(|c| !baseline.contains(c)).collect();
            let entry = if broken.is_empty() {
                kept.insert((sub.clone(), sup.clone()));
                Insertion { sub, sup, kept: true, reason: "all classes remain satisfiable".into() }
            } else {
                acc.pop();
                Insertion { sub, sup, kept: false, reason: format!("makes {} unsatisfiable", fmt_iris(&broken)) }
            };
            log.push(entry);
        }
    }

    // Stage 2: equivalences replace mutual subsumptions.
    let mut merged: Vec<Axiom> = ontologies.iter().flat_map(|o| o.axioms.iter().cloned()).collect();
    let mut equivalent = Vec::new();
    let mut one_way = Vec::new();
    for (sub, sup) in &kept {
        if kept.contains(&(sup.clone(), sub.clone())) {
            if sub < sup {
                merged.push(Axiom::Equivalent(ClassExpr::Named(sub.clone()), ClassExpr::Named(sup.clone())));
                equivalent.push((sub.clone(), sup.clone()));
            }
        } else {
            merged.push(Axiom::SubClass(ClassExpr::Named(sub.clone()), ClassExpr::Named(sup.clone())));
            one_way.push((sub.clone(), sup.clone()));
        }
    }

    // Stage 3.
    let bad: Vec<Iri> = unsatisfiable(r, &merged, &all_classes)?.into_iter().filter(|c| !baseline.contains(c)).collect();
    if !bad.is_empty() || !baseline.is_empty() {
        let mut classes = baseline;
        classes.extend(bad);
        return Err(MergeError::MergeInconsistent { classes, log });
    }

    // Stage 4: groups are connected components of the equivalences.
    let declared: BTreeSet<Iri> = ontologies.iter().flat_map(MicroOntology::declared_classes).collect();
    let mut parent: BTreeMap<Iri, Iri> = declared.iter().map(|c| (c.clone(), c.clone())).collect();
    fn find(p: &mut BTreeMap<Iri, Iri>, x: &Iri) -> Iri {
        let mut root = x.clone();
        while p[&root] != root {
            root = p[&root].clone();
        }
        p.insert(x.clone(), root.clone());
        root
    }
    for (a, b) in &equivalent {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent.insert(hi, lo);
        }
    }
    let mut components: BTreeMap<Iri, Vec<Iri>> = BTreeMap::new();
    for c in &declared {
        let root = find(&mut parent, c);
        components.entry(root).or_default().push(c.clone());
    }
    let mut per_lexeme: BTreeMap<String, usize> = BTreeMap::new();
    for members in components.values() {
        *per_lexeme.entry(members[0].local.clone()).or_default() += 1;
    }
    let titles: BTreeMap<String, String> = ontologies.iter().map(|o| (o.prefix.clone(), o.title.clone())).collect();
    let mut groups: Vec<SenseGroup> = components
        .into_values()
        .map(|mut members| {
            members.sort();
            let lexeme = members[0].local.clone();
            let (name, mwu_prefix, alias) = mint_mwu(&lexeme, &members, per_lexeme[&lexeme], &titles, &opts.aliases);
            SenseGroup { lexeme, members, name, mwu_prefix, alias }
        })
        .collect();
    groups.sort_by(|a, b| (&a.lexeme, &a.members).cmp(&(&b.lexeme, &b.members)));

    let group_name = |c: &Iri| groups.iter().find(|g| g.members.contains(c)).map(|g| g.name.clone()).unwrap_or_default();
    let mut cross: Vec<(String, String)> = one_way.iter().map(|(a, b)| (group_name(a), group_name(b))).collect();
    cross.sort();
    cross.dedup();

    Ok(SenseInventory { ontologies: ontologies.to_vec(), merged_tbox: merged, groups, cross_subsumptions: cross, log })
}

impl SenseInventory {
    pub fn groups_of(&self, lexeme: &str) -> Vec<&SenseGroup> {
        self.groups.iter().filter(|g| g.lexeme == lexeme).collect()
    }

    pub fn group_of(&self, class: &Iri) -> Option<&SenseGroup> {
        self.groups.iter().find(|g| g.members.contains(class))
    }

    pub fn kept(&self) -> impl Iterator<Item = &Insertion> {
        self.log.iter().filter(|i| i.kept)
    }

    /// The parser's view: one noun sense per group.
    pub fn lexicon(&self, templates: &[ProceduralTemplate]) -> Lexicon {
        let senses = self
            .groups
            .iter()
            .map(|g| NounSense {
                lexeme: g.lexeme.clone(),
                class: g.representative().clone(),
                mwu_prefix: g.mwu_prefix.clone(),
                alias: g.alias.clone(),
                members: g.members.clone(),
            })
            .collect();
        Lexicon::new(senses, &self.ontologies, templates)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("inventory serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Human-readable merge report: insertion log, sense groups, MWU table
    /// and the one-directional subsumptions between senses.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Insertion log");
        for i in &self.log {
            let verdict = if i.kept { "kept" } else { "rejected" };
            let _ = writeln!(s, "  {} ⊑ {}  {verdict}: {}", i.sub, i.sup, i.reason);
        }
        let _ = writeln!(s, "\nSense groups");
        for g in &self.groups {
            let _ = writeln!(s, "  {}  [{}]", g.name, fmt_iris(&g.members));
        }
        let _ = writeln!(s, "\nMulti-word units");
        let mwus: Vec<&SenseGroup> = self.groups.iter().filter(|g| g.name != g.lexeme).collect();
        if mwus.is_empty() {
            let _ = writeln!(s, "  (none)");
        }
        for g in mwus {
            let _ = writeln!(s, "  {} = {}", g.name, g.representative());
        }
        let _ = writeln!(s, "\nSubsumptions between senses");
        if self.cross_subsumptions.is_empty() {
            let _ = writeln!(s, "  (none)");
        }
        for (a, b) in &self.cross_subsumptions {
            let _ = writeln!(s, "  {a} - - -> {b}");
        }
        s
    }
}
