//! The four analysis stages end to end: parse, disambiguate, compile and
//! execute.

use thiserror::Error;

use crate::exec::{compile_atoms, run, ExecError, Execution};
use crate::merge::{MergeError, SenseInventory};
use crate::parser::{parse_factual, render_inline, render_paraphrase, Discourse, Lexicon, ParaphraseAtom, ParseError, Style};
use crate::reasoner::Reasoner;
use crate::templates::{CompiledStatement, ProceduralTemplate, TemplateError};
use crate::wsd::{disambiguate, ChoiceProvider, WsdContext, WsdError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parse: {0}")]
    Parse(#[from] ParseError),
    #[error("templates: {0}")]
    Template(#[from] TemplateError),
    #[error("merge: {0}")]
    Merge(#[from] MergeError),
    #[error("disambiguation: {0}")]
    Wsd(#[from] WsdError),
    #[error("execution: {0}")]
    Exec(#[from] ExecError),
}

impl PipelineError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Parse(_) | PipelineError::Template(_) => 1,
            PipelineError::Merge(_) => 2,
            PipelineError::Wsd(WsdError::UnresolvedAmbiguity(_)) => 3,
            PipelineError::Wsd(WsdError::NoAntecedent(_)) => 3,
            PipelineError::Wsd(_) => 1,
            PipelineError::Exec(ExecError::Inconsistent { .. }) => 2,
            PipelineError::Exec(ExecError::Unresolved(_)) => 3,
            PipelineError::Exec(ExecError::Reasoner(_)) => 2,
            PipelineError::Exec(ExecError::Template(_) | ExecError::UnknownTemplate(_)) => 1,
            PipelineError::Exec(_) => 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub discourse: Discourse,
    pub atoms: Vec<ParaphraseAtom>,
    pub paraphrase: String,
    pub inline: String,
    pub statements: Vec<CompiledStatement>,
    pub execution: Execution,
}

/// Background knowledge for factual text: a sense inventory and the
/// procedural templates.
pub struct Background {
    pub inventory: SenseInventory,
    pub templates: Vec<ProceduralTemplate>,
    pub lexicon: Lexicon,
    pub reasoner: Reasoner,
}

impl Background {
    pub fn new(inventory: SenseInventory, templates: Vec<ProceduralTemplate>) -> Self {
        let lexicon = inventory.lexicon(&templates);
        Background { inventory, templates, lexicon, reasoner: Reasoner::default() }
    }

    pub fn context(&self) -> WsdContext<'_> {
        WsdContext {
            tbox: &self.inventory.merged_tbox,
            lexicon: &self.lexicon,
            templates: &self.templates,
            reasoner: self.reasoner,
        }
    }

    pub fn parse(&self, text: &str) -> Result<Discourse, ParseError> {
        parse_factual(text, &self.lexicon)
    }

    /// Runs every stage on `text`, resolving ambiguity from `choices` first
    /// and `provider` second.
    pub fn analyze(
        &self,
        text: &str,
        choices: &[(String, String)],
        provider: &mut dyn ChoiceProvider,
    ) -> Result<Analysis, PipelineError> {
        let discourse = self.parse(text)?;
        let resolved = disambiguate(&discourse, &self.context(), choices, provider)?;
        let paraphrase = render_paraphrase(&resolved.atoms, &self.lexicon, Style::Narrative)
            .map_err(|u| WsdError::UnresolvedAmbiguity(u.sites))?;
        let inline = render_inline(&resolved.discourse, &self.lexicon, Style::Narrative);
        let statements = compile_atoms(&resolved.atoms, &self.templates)?;
        let execution = run(&statements, &self.inventory.merged_tbox, &self.reasoner)?;
        Ok(Analysis { discourse: resolved.discourse, atoms: resolved.atoms, paraphrase, inline, statements, execution })
    }
}
