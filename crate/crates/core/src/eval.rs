//! Call-by-value evaluator for the computation core.
//!
//! An explicit-stack machine: deep `rec` unfoldings and long application
//! chains never grow the native stack. Every lambda application and every
//! `rec` unfolding (including the one at zero) costs one step.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::store::{ObjectStore, StoreError};
use crate::syntax::{CompExpr, CompKind, Name, RecExpr, Span};
use crate::value::{Closure, Value, ValueEnv};

pub const DEFAULT_FUEL: u64 = 10_000_000;

/// A positive step budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel(u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("fuel limit must be positive")]
pub struct InvalidFuel;

impl Fuel {
    pub fn new(limit: u64) -> Result<Fuel, InvalidFuel> {
        if limit == 0 {
            Err(InvalidFuel)
        } else {
            Ok(Fuel(limit))
        }
    }

    pub fn limit(self) -> u64 {
        self.0
    }
}

impl Default for Fuel {
    fn default() -> Self {
        Fuel(DEFAULT_FUEL)
    }
}

#[derive(Clone, Debug)]
pub struct EvalResult {
    pub value: Value,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalErrorKind {
    #[error("unbound variable `{0}`")]
    Unbound(Name),
    #[error("cannot apply a {0}")]
    NotAClosure(&'static str),
    #[error("expected a nat, found a {0}")]
    NotANat(&'static str),
    #[error("cannot select a field from a {0}")]
    NotAnObject(&'static str),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error("fuel exhausted after {0} steps")]
    FuelExhausted(u64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub span: Span,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl std::error::Error for EvalError {}

impl EvalError {
    fn new(kind: impl Into<EvalErrorKind>, span: Span) -> EvalError {
        EvalError {
            kind: kind.into(),
            span,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(DiagnosticKind::Runtime, self.span, self.kind.to_string())
    }
}

/// Evaluates `e` under the default budget.
pub fn eval_comp(
    env: &ValueEnv,
    store: &ObjectStore,
    e: &CompExpr,
) -> Result<EvalResult, EvalError> {
    eval_with_fuel(env, store, e, Fuel::default())
}

enum Frame {
    Succ(Span),
    AppArg {
        arg: Arc<CompExpr>,
        env: ValueEnv,
        span: Span,
    },
    AppCall {
        func: Value,
        span: Span,
    },
    Field {
        label: Name,
        span: Span,
    },
    RecScrutinee {
        rec: RecExpr,
        env: ValueEnv,
        span: Span,
    },
    /// Holds the accumulator position `done` of `target` unfoldings.
    RecLoop {
        rec: RecExpr,
        env: ValueEnv,
        done: BigUint,
        target: BigUint,
        span: Span,
    },
}

enum Control {
    Eval(Arc<CompExpr>, ValueEnv),
    Return(Value),
}

struct Meter {
    steps: u64,
    limit: u64,
}

impl Meter {
    fn tick(&mut self, span: Span) -> Result<(), EvalError> {
        if self.steps == self.limit {
            return Err(EvalError::new(
                EvalErrorKind::FuelExhausted(self.steps),
                span,
            ));
        }
        self.steps += 1;
        Ok(())
    }
}

pub fn eval_with_fuel(
    env: &ValueEnv,
    store: &ObjectStore,
    e: &CompExpr,
    fuel: Fuel,
) -> Result<EvalResult, EvalError> {
    let mut meter = Meter {
        steps: 0,
        limit: fuel.0,
    };
    let mut stack: Vec<Frame> = Vec::new();
    let mut control = Control::Eval(Arc::new(e.clone()), env.clone());
    loop {
        control = match control {
            Control::Eval(expr, env) => match &expr.kind {
                CompKind::Var(name) => match env.lookup_value(name) {
                    Some(v) => Control::Return(v.clone()),
                    None => {
                        return Err(EvalError::new(
                            EvalErrorKind::Unbound(name.clone()),
                            expr.span,
                        ))
                    }
                },
                CompKind::Zero => Control::Return(Value::Nat(BigUint::zero())),
                CompKind::Num(n) => Control::Return(Value::Nat(n.clone())),
                CompKind::Succ(inner) => {
                    stack.push(Frame::Succ(expr.span));
                    Control::Eval(inner.clone(), env)
                }
                CompKind::Lambda {
                    param,
                    param_ty,
                    body,
                } => Control::Return(Value::Closure(Arc::new(Closure {
                    param: param.clone(),
                    param_ty: param_ty.clone(),
                    body: body.clone(),
                    env,
                }))),
                CompKind::App(f, a) => {
                    stack.push(Frame::AppArg {
                        arg: a.clone(),
                        env: env.clone(),
                        span: expr.span,
                    });
                    Control::Eval(f.clone(), env)
                }
                CompKind::FieldSel(subject, label) => {
                    stack.push(Frame::Field {
                        label: label.clone(),
                        span: expr.span,
                    });
                    Control::Eval(subject.clone(), env)
                }
                CompKind::Rec(rec) => {
                    stack.push(Frame::RecScrutinee {
                        rec: rec.clone(),
                        env: env.clone(),
                        span: expr.span,
                    });
                    Control::Eval(rec.scrutinee.clone(), env)
                }
            },
            Control::Return(value) => {
                let Some(frame) = stack.pop() else {
                    return Ok(EvalResult {
                        value,
                        steps: meter.steps,
                    });
                };
                match frame {
                    Frame::Succ(span) => match value {
                        Value::Nat(n) => Control::Return(Value::Nat(n + 1u32)),
                        other => {
                            return Err(EvalError::new(
                                EvalErrorKind::NotANat(other.category()),
                                span,
                            ))
                        }
                    },
                    Frame::AppArg { arg, env, span } => {
                        stack.push(Frame::AppCall { func: value, span });
                        Control::Eval(arg, env)
                    }
                    Frame::AppCall { func, span } => match func {
                        Value::Closure(c) => {
                            meter.tick(span)?;
                            Control::Eval(c.body.clone(), c.env.bind(c.param.clone(), value))
                        }
                        other => {
                            return Err(EvalError::new(
                                EvalErrorKind::NotAClosure(other.category()),
                                span,
                            ))
                        }
                    },
                    Frame::Field { label, span } => match value {
                        Value::Obj(id) => match store.get(id, &label) {
                            Ok(v) => Control::Return(v.clone()),
                            Err(err) => return Err(EvalError::new(err, span)),
                        },
                        other => {
                            return Err(EvalError::new(
                                EvalErrorKind::NotAnObject(other.category()),
                                span,
                            ))
                        }
                    },
                    Frame::RecScrutinee { rec, env, span } => match value {
                        Value::Nat(target) => {
                            meter.tick(span)?;
                            let zero_branch = rec.zero_branch.clone();
                            stack.push(Frame::RecLoop {
                                rec,
                                env: env.clone(),
                                done: BigUint::zero(),
                                target,
                                span,
                            });
                            Control::Eval(zero_branch, env)
                        }
                        other => {
                            return Err(EvalError::new(
                                EvalErrorKind::NotANat(other.category()),
                                span,
                            ))
                        }
                    },
                    Frame::RecLoop {
                        rec,
                        env,
                        done,
                        target,
                        span,
                    } => {
                        if done == target {
                            Control::Return(value)
                        } else {
                            meter.tick(span)?;
                            let body_env = env
                                .bind(rec.succ_binder.clone(), Value::Nat(done.clone()))
                                .bind(rec.rec_binder.clone(), value);
                            let branch = rec.succ_branch.clone();
                            stack.push(Frame::RecLoop {
                                rec,
                                env,
                                done: done + BigUint::one(),
                                target,
                                span,
                            });
                            Control::Eval(branch, body_env)
                        }
                    }
                }
            }
        };
    }
}
