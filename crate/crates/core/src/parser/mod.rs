//! The controlled language: ontological sentences, factual narrative and
//! paraphrase rendering.

pub(crate) mod factual;
mod lexicon;
pub mod morph;
mod ontology;
mod render;

use thiserror::Error;

pub use factual::{
    parse_factual, AmbiguityItem, AtomKind, Candidate, Discourse, Entity, EntityRef, Hint, ItemKind, NounRef,
    ParaphraseAtom, SenseRef, VerbRef,
};
pub use lexicon::{Lexicon, NounSense};
pub use ontology::{load_ontology, parse_class_phrase, parse_ontological};
pub use render::{render_inline, render_paraphrase, Style, UnresolvedAmbiguity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("sentence {sentence}: expected {}, found `{found}`", expected.join(" | "))]
    Syntax { sentence: usize, expected: Vec<String>, found: String },
    #[error("sentence {sentence}: unknown word `{word}`")]
    UnknownWord { sentence: usize, word: String },
    #[error("sentence {sentence}: no antecedent for `{word}`")]
    UnknownAntecedent { sentence: usize, word: String },
    #[error("line {line}: {msg}")]
    Directive { line: usize, msg: String },
}

/// A token with its 1-based position in the document. Punctuation counts.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Token {
    pub text: String,
    pub index: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == ':'
}

/// Splits text into words and punctuation. Square brackets are dropped, so
/// `[a] Germany` reads as `a Germany`; a brace list directly followed by a
/// colon (`{we,ee}:country`) stays one token.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() || c == '[' || c == ']' {
            i += 1;
        } else if c == '{' {
            let close = chars[i..].iter().position(|&x| x == '}').map(|p| p + i);
            match close {
                Some(j) if chars.get(j + 1) == Some(&':') => {
                    let mut k = j + 1;
                    while k < chars.len() && is_word_char(chars[k]) {
                        k += 1;
                    }
                    out.push(chars[i..k].iter().filter(|c| !c.is_whitespace()).collect());
                    i = k;
                }
                _ => {
                    out.push(c.to_string());
                    i += 1;
                }
            }
        } else if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            // A trailing colon belongs to punctuation, not the word.
            let mut end = i;
            while end > start + 1 && chars[end - 1] == ':' {
                end -= 1;
            }
            out.push(chars[start..end].iter().collect());
            for _ in end..i {
                out.push(":".into());
            }
        } else {
            out.push(c.to_string());
            i += 1;
        }
    }
    out.into_iter().enumerate().map(|(k, text)| Token { text, index: k + 1 }).collect()
}

/// Groups tokens into sentences ending with `.`; the period is kept.
pub fn sentences(tokens: &[Token]) -> Vec<&[Token]> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, t) in tokens.iter().enumerate() {
        if t.text == "." {
            out.push(&tokens[start..=i]);
            start = i + 1;
        }
    }
    if start < tokens.len() {
        out.push(&tokens[start..]);
    }
    out
}

/// Recursive-descent helper over one sentence.
pub(crate) struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
    pub sentence: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token], sentence: usize) -> Self {
        Cursor { toks, pos: 0, sentence }
    }

    pub fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    pub fn peek_at(&self, k: usize) -> Option<&'a str> {
        self.toks.get(self.pos + k).map(|t| t.text.as_str())
    }

    pub fn peek_lower(&self) -> String {
        self.peek().map(|t| t.text.to_lowercase()).unwrap_or_default()
    }

    pub fn is(&self, kw: &str) -> bool {
        self.peek().is_some_and(|t| t.text.eq_ignore_ascii_case(kw))
    }

    pub fn is_any(&self, kws: &[&str]) -> bool {
        kws.iter().any(|k| self.is(k))
    }

    pub fn eat(&mut self, kw: &str) -> bool {
        if self.is(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn err(&self, expected: &[&str]) -> ParseError {
        ParseError::Syntax {
            sentence: self.sentence,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().map_or_else(|| "end of sentence".to_string(), |t| t.text.clone()),
        }
    }

    pub fn expect(&mut self, kws: &[&str]) -> Result<&'a Token, ParseError> {
        if self.is_any(kws) {
            Ok(self.next().unwrap())
        } else {
            Err(self.err(kws))
        }
    }

    /// Any word token (not punctuation).
    pub fn word(&mut self, what: &str) -> Result<&'a Token, ParseError> {
        match self.peek() {
            Some(t) if t.text.chars().next().is_some_and(|c| c.is_alphanumeric() || c == '{') => {
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.err(&[what])),
        }
    }

    pub fn article(&mut self) -> bool {
        self.eat("a") || self.eat("an")
    }

    pub fn finish(&mut self) -> Result<(), ParseError> {
        self.eat(".");
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.err(&["."])),
        }
    }
}
