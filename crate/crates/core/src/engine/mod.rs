//! Seeded reduction engine for the coordination core.

mod config;
mod redex;
mod step;
mod trace;

use rand::Rng;
use thiserror::Error;

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::eval::EvalError;
use crate::par::{self, Parallelism};
use crate::store::StoreError;
use crate::syntax::{Name, Program, Span};

pub use config::{Agent, ChanInfo, ChanScope, Configuration, Pid};
pub use redex::{alternatives, enabled_redexes, Endpoint, Redex};
pub use trace::{
    render_object, render_trace_records, render_trace_text, render_value, EventKind, TraceEvent,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("evaluating `{name}`: {source}")]
    Definition { name: Name, source: EvalError },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("channel `{0}` is not in scope")]
    UnboundChannel(Name),
    #[error("unknown process `{0}`")]
    UnknownProc(Name),
    #[error("channel `{chan}` cannot carry a {found}")]
    SortViolation { chan: String, found: &'static str },
    #[error("guard compares a {0} with a {1}")]
    IncomparableGuard(&'static str, &'static str),
    #[error("object literals cannot appear in guards")]
    ObjectLiteralInGuard,
    #[error("cannot update a {0}")]
    NotAnObject(&'static str),
    #[error("redex is not enabled in this configuration")]
    StaleRedex,
}

impl EngineError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        let span = match self {
            EngineError::Definition { source, .. } | EngineError::Eval(source) => source.span,
            _ => Span::default(),
        };
        Diagnostic::error(DiagnosticKind::Runtime, span, self.to_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Terminated,
    Deadlock,
    StepLimit,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Terminated => "terminated",
            Verdict::Deadlock => "deadlock",
            Verdict::StepLimit => "step-limit",
        }
    }

    fn event_kind(self) -> EventKind {
        match self {
            Verdict::Terminated => EventKind::Terminated,
            Verdict::Deadlock => EventKind::Deadlock,
            Verdict::StepLimit => EventKind::StepLimit,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: Configuration,
    pub verdict: Verdict,
}

impl RunOutcome {
    pub fn trace(&self) -> &[TraceEvent] {
        self.config.trace()
    }
}

/// Loads `program` and runs it, picking uniformly among enabled redexes.
pub fn run(program: &Program, seed: u64, max_steps: u64) -> Result<RunOutcome, EngineError> {
    run_config(Configuration::load(program, seed)?, max_steps)
}

/// One run per seed, results in seed order.
pub fn run_seeds(
    program: &Program,
    seeds: &[u64],
    max_steps: u64,
    mode: Parallelism,
) -> Vec<Result<RunOutcome, EngineError>> {
    par::map(mode, seeds, |&seed| run(program, seed, max_steps))
}

pub fn run_config(mut config: Configuration, max_steps: u64) -> Result<RunOutcome, EngineError> {
    let verdict = loop {
        if config.is_terminated() {
            break Verdict::Terminated;
        }
        let redexes = enabled_redexes(&config)?;
        if redexes.is_empty() {
            break Verdict::Deadlock;
        }
        if config.step_count() >= max_steps {
            break Verdict::StepLimit;
        }
        let pick = config.rng.gen_range(0..redexes.len());
        config.apply(&redexes[pick])?;
    };
    if config.recording {
        let event = TraceEvent::verdict(config.step_count, verdict.event_kind());
        config.trace.push(event);
    }
    Ok(RunOutcome { config, verdict })
}
