use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dl::{ClassExpr, MicroOntology};
use crate::rdf::Iri;
use crate::templates::{ProceduralTemplate, Slot};

/// One sense of a noun lexeme: a merged class identified by its
/// representative qualified name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounSense {
    pub lexeme: String,
    pub class: Iri,
    /// Title of the ontology naming this sense when the lexeme is
    /// polysemous; `None` for monosemous lexemes.
    pub mwu_prefix: Option<String>,
    /// Operator-supplied display name, overriding the generated MWU.
    #[serde(default)]
    pub alias: Option<String>,
    /// Every qualified class of the merged sense, `class` included.
    #[serde(default)]
    pub members: Vec<Iri>,
}

impl NounSense {
    pub fn monosemous(class: Iri) -> Self {
        NounSense { lexeme: class.local.clone(), members: vec![class.clone()], class, mwu_prefix: None, alias: None }
    }

    /// `ColdWarEasternEurope-Germany`, or the bare lexeme.
    pub fn formal_name(&self) -> String {
        if let Some(a) = &self.alias {
            return a.clone();
        }
        match &self.mwu_prefix {
            Some(t) => format!("{t}-{}", self.lexeme),
            None => self.lexeme.clone(),
        }
    }

    /// `food-basket` for the surface word `basket`, or the surface itself.
    pub fn narrative_name(&self, surface: &str) -> String {
        match (&self.alias, &self.mwu_prefix) {
            (Some(a), _) => a.clone(),
            (None, Some(t)) => format!("{}-{surface}", t.to_lowercase()),
            (None, None) => surface.to_string(),
        }
    }

    /// Whether a choice string or MWU prefix names this sense.
    pub fn answers_to(&self, s: &str) -> bool {
        let s = s.trim();
        s == self.class.to_string()
            || self.members.iter().any(|m| m.to_string() == s)
            || self.alias.as_deref().is_some_and(|a| a.eq_ignore_ascii_case(s))
            || self.mwu_prefix.as_deref().is_some_and(|t| t.eq_ignore_ascii_case(s))
            || self.formal_name().eq_ignore_ascii_case(s)
            || s.eq_ignore_ascii_case(&self.class.ns)
            || self.members.iter().any(|m| s.eq_ignore_ascii_case(&m.ns))
    }
}

/// Word-level view of the background knowledge used by the parser.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    /// Lowercased lexeme → senses.
    pub nouns: BTreeMap<String, Vec<NounSense>>,
    /// Verb lemma → names of the templates listing it.
    pub verbs: BTreeMap<String, Vec<String>>,
    pub properties: BTreeSet<String>,
    pub prepositions: BTreeSet<String>,
    pub pronouns: BTreeMap<String, ClassExpr>,
}

impl Lexicon {
    /// Builds the lexicon from explicit noun senses plus the roles,
    /// directives and templates of the loaded background knowledge.
    pub fn new(senses: Vec<NounSense>, ontologies: &[MicroOntology], templates: &[ProceduralTemplate]) -> Self {
        let mut lex = Lexicon::default();
        for s in senses {
            lex.nouns.entry(s.lexeme.to_lowercase()).or_default().push(s);
        }
        for v in lex.nouns.values_mut() {
            v.sort_by(|a, b| a.class.cmp(&b.class));
        }
        for o in ontologies {
            lex.properties.extend(o.roles());
            for (w, c) in &o.pronouns {
                lex.pronouns.insert(w.clone(), c.clone());
            }
        }
        for t in templates {
            for lu in &t.lexical_units {
                lex.verbs.entry(lu.to_lowercase()).or_default().push(t.name.clone());
            }
            for s in t.slots() {
                if let Slot::Prep(p) = s {
                    lex.prepositions.insert(p.clone());
                }
            }
        }
        lex
    }

    /// Every declared class becomes its own monosemous sense unless its
    /// local name is shared, in which case each gets its ontology's title.
    pub fn from_ontologies(ontologies: &[MicroOntology], templates: &[ProceduralTemplate]) -> Self {
        let titles: BTreeMap<&str, &str> = ontologies.iter().map(|o| (o.prefix.as_str(), o.title.as_str())).collect();
        let mut by_lexeme: BTreeMap<String, Vec<Iri>> = BTreeMap::new();
        for o in ontologies {
            for c in o.declared_classes() {
                by_lexeme.entry(c.local.to_lowercase()).or_default().push(c);
            }
        }
        let mut senses = Vec::new();
        for classes in by_lexeme.into_values() {
            let poly = classes.len() > 1;
            for c in classes {
                let prefix = poly.then(|| titles.get(c.ns.as_str()).copied().unwrap_or(&c.ns).to_string());
                senses.push(NounSense {
                    lexeme: c.local.clone(),
                    members: vec![c.clone()],
                    class: c,
                    mwu_prefix: prefix,
                    alias: None,
                });
            }
        }
        Lexicon::new(senses, ontologies, templates)
    }

    pub fn noun(&self, word: &str) -> Option<&[NounSense]> {
        self.nouns.get(&word.to_lowercase()).map(Vec::as_slice)
    }

    /// The sense an MWU such as `food-basket` names.
    pub fn noun_mwu(&self, word: &str) -> Option<&NounSense> {
        let (prefix, lexeme) = word.split_once('-')?;
        self.noun(lexeme)?.iter().find(|s| s.answers_to(prefix) || s.answers_to(word))
    }

    /// Sense by qualified class name.
    pub fn sense_of(&self, class: &Iri) -> Option<&NounSense> {
        self.nouns.get(&class.local.to_lowercase())?.iter().find(|s| &s.class == class || s.members.contains(class))
    }

    pub fn verb(&self, lemma: &str) -> Option<&[String]> {
        self.verbs.get(&lemma.to_lowercase()).map(Vec::as_slice)
    }

    pub fn is_pronoun(&self, word: &str) -> bool {
        self.pronouns.contains_key(&word.to_lowercase())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mwu_names() {
        let s = NounSense {
            lexeme: "Germany".into(),
            class: "ee:Germany".parse().unwrap(),
            mwu_prefix: Some("ColdWarEasternEurope".into()),
            alias: None,
            members: vec![],
        };
        assert_eq!(s.formal_name(), "ColdWarEasternEurope-Germany");
        assert_eq!(s.narrative_name("Germany"), "coldwareasterneurope-Germany");
        assert!(s.answers_to("ee:Germany") && s.answers_to("coldwareasterneurope") && !s.answers_to("we"));
        let m = NounSense::monosemous("ps:grandpa".parse().unwrap());
        assert_eq!(m.formal_name(), "grandpa");
        assert_eq!(m.narrative_name("grandpa"), "grandpa");
    }
}
