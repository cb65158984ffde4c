//! Numbered prompts for open ambiguities, with reasoner hints inline.

use std::io::{BufRead, Write};

use cnl_core::parser::{AmbiguityItem, Discourse, ItemKind};
use cnl_core::wsd::ChoiceProvider;

pub struct Prompter<R, W> {
    input: R,
    output: W,
    /// `(site, candidate id)` for every answered prompt, in order.
    pub answers: Vec<(String, String)>,
}

impl<R: BufRead, W: Write> Prompter<R, W> {
    pub fn new(input: R, output: W) -> Self {
        Prompter { input, output, answers: Vec::new() }
    }

    fn show(&mut self, item: &AmbiguityItem) -> std::io::Result<()> {
        let what = match item.kind {
            ItemKind::NounSense => "sense of",
            ItemKind::VerbSense => "meaning of",
            ItemKind::Antecedent => "antecedent of",
        };
        writeln!(self.output, "{what} `{}` ({}, statement {}):", item.word, item.site, item.label)?;
        for (i, c) in item.candidates.iter().enumerate() {
            let shown = if c.display == c.id { c.id.clone() } else { format!("{} ({})", c.display, c.id) };
            writeln!(self.output, "  {}. {shown} {}", i + 1, c.hint.tag())?;
        }
        write!(self.output, "choice [1-{}]: ", item.candidates.len())?;
        self.output.flush()
    }

    fn pick(item: &AmbiguityItem, answer: &str) -> Option<String> {
        if let Ok(n) = answer.parse::<usize>() {
            return item.candidates.get(n.checked_sub(1)?).map(|c| c.id.clone());
        }
        item.candidates
            .iter()
            .find(|c| c.id.eq_ignore_ascii_case(answer) || c.display.eq_ignore_ascii_case(answer))
            .map(|c| c.id.clone())
    }

    /// Recorded answers in the choices-file format.
    pub fn transcript(&self) -> String {
        self.answers.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

impl<R: BufRead, W: Write> ChoiceProvider for Prompter<R, W> {
    fn ask(&mut self, item: &AmbiguityItem, _: &Discourse) -> Option<String> {
        loop {
            self.show(item).ok()?;
            let mut line = String::new();
            if self.input.read_line(&mut line).ok()? == 0 {
                return None;
            }
            match Self::pick(item, line.trim()) {
                Some(id) => {
                    self.answers.push((item.site.clone(), id.clone()));
                    return Some(id);
                }
                None => writeln!(self.output, "not a listed choice: {}", line.trim()).ok()?,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cnl_core::parser::{Candidate, Hint};

    fn item() -> AmbiguityItem {
        AmbiguityItem {
            site: "basket@13".into(),
            word: "basket".into(),
            token: 13,
            label: "E".into(),
            kind: ItemKind::NounSense,
            candidates: vec![
                Candidate { id: "fd:Basket".into(), display: "Food-Basket".into(), hint: Hint::Valid },
                Candidate { id: "sp:Basket".into(), display: "Sports-Basket".into(), hint: Hint::Invalid },
            ],
            resolution: None,
        }
    }

    #[test]
    fn prompts_with_hints_and_records_answer() {
        let mut out = Vec::new();
        let mut p = Prompter::new(&b"7\nsports-basket\n"[..], &mut out);
        assert_eq!(p.ask(&item(), &Discourse::default()).as_deref(), Some("sp:Basket"));
        assert_eq!(p.transcript(), "basket@13 = sp:Basket\n");
        drop(p);
        let shown = String::from_utf8(out).unwrap();
        assert!(shown.contains("1. Food-Basket (fd:Basket) [valid]"), "{shown}");
        assert!(shown.contains("2. Sports-Basket (sp:Basket) [invalid]"), "{shown}");
        assert!(shown.contains("not a listed choice: 7"), "{shown}");
    }

    #[test]
    fn end_of_input_leaves_item_open() {
        let mut p = Prompter::new(&b""[..], Vec::new());
        assert_eq!(p.ask(&item(), &Discourse::default()), None);
        assert!(p.answers.is_empty());
    }
}
