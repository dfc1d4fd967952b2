use std::fmt::Write;

use serde::Serialize;

use super::config::Configuration;
use crate::store::StoredObject;
use crate::syntax::{CompExpr, CompKind, CompPrinter, Span};
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    Comm,
    Spawn,
    Deadlock,
    Terminated,
    StepLimit,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Comm => "comm",
            EventKind::Spawn => "spawn",
            EventKind::Deadlock => "deadlock",
            EventKind::Terminated => "terminated",
            EventKind::StepLimit => "step-limit",
        }
    }

    /// Reductions advance the step counter; verdicts do not.
    pub fn is_reduction(self) -> bool {
        matches!(self, EventKind::Comm | EventKind::Spawn)
    }
}

/// One trace line. For `comm`, `pids` is `[sender, receiver]`; for
/// `spawn`, the replication followed by the new agents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceEvent {
    pub step: u64,
    pub kind: EventKind,
    pub pids: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chan: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<String>,
    pub eval_steps: u64,
    pub store_delta: Vec<String>,
}

impl TraceEvent {
    pub(crate) fn verdict(step: u64, kind: EventKind) -> TraceEvent {
        TraceEvent {
            step,
            kind,
            pids: Vec::new(),
            chan: None,
            payload: None,
            eval_steps: 0,
            store_delta: Vec::new(),
        }
    }

    /// `#<step> <kind> <details>`
    pub fn to_text(&self) -> String {
        let mut out = format!("#{} {}", self.step, self.kind.as_str());
        match self.kind {
            EventKind::Comm => {
                let _ = write!(
                    out,
                    " {} {} {}->{} eval={}",
                    self.chan.as_deref().unwrap_or("?"),
                    self.payload.as_deref().unwrap_or("?"),
                    self.pids[0],
                    self.pids[1],
                    self.eval_steps
                );
                if !self.store_delta.is_empty() {
                    let _ = write!(out, " store={}", self.store_delta.join(","));
                }
            }
            EventKind::Spawn => {
                let new: Vec<String> = self.pids[1..].iter().map(u64::to_string).collect();
                let _ = write!(out, " {} -> {}", self.pids[0], new.join(","));
            }
            _ => {}
        }
        out
    }

    pub fn to_record(&self) -> String {
        serde_json::to_string(self).expect("trace events serialize")
    }
}

pub fn render_trace_text(trace: &[TraceEvent]) -> String {
    trace.iter().map(|e| e.to_text() + "\n").collect()
}

pub fn render_trace_records(trace: &[TraceEvent]) -> String {
    trace.iter().map(|e| e.to_record() + "\n").collect()
}

/// Renders a value for traces: naturals in decimal, channels by label,
/// objects by id, closures as source with their captured locals inlined.
pub fn render_value(config: &Configuration, value: &Value) -> String {
    match value {
        Value::Nat(n) => n.to_string(),
        Value::Chan(id) => config.chan_label(*id),
        Value::Obj(id) => id.to_string(),
        Value::Closure(c) => {
            let lambda = CompExpr::new(
                CompKind::Lambda {
                    param: c.param.clone(),
                    param_ty: c.param_ty.clone(),
                    body: c.body.clone(),
                },
                Span::default(),
            );
            let env = c.env.clone();
            let mut free = |name: &_| {
                env.lookup_local_value(name)
                    .map(|v| format!("({})", render_value(config, v)))
            };
            CompPrinter::new(&mut free).print(&lambda)
        }
    }
}

/// `obj#<id>{label=value,...}@v<version>`
pub fn render_object(config: &Configuration, obj: &StoredObject) -> String {
    let fields: Vec<String> = obj
        .fields()
        .map(|(label, v)| format!("{label}={}", render_value(config, v)))
        .collect();
    format!("{}{{{}}}@v{}", obj.id, fields.join(","), obj.version)
}
