//! Static checking for all three cores.

use std::collections::BTreeSet;

use crate::diagnostics::{Diagnostic, DiagnosticKind};
use crate::syntax::{
    pretty_sort, pretty_type, Action, ActionKind, ChannelSort, CompExpr, CompKind, CompType,
    DataExpr, DataKind, Item, Name, ObjSig, Payload, ProcKind, ProcTerm, Program, Span,
};

/// Typing context. Computation variables and channels live in separate
/// scopes; the innermost binding of each kind wins.
#[derive(Clone, Debug, Default)]
pub struct TypeEnv {
    comp: Vec<(Name, CompType)>,
    chan: Vec<(Name, ChannelSort)>,
    procs: BTreeSet<Name>,
}

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv::default()
    }

    pub fn with_comp(mut self, name: impl Into<Name>, ty: CompType) -> TypeEnv {
        self.comp.push((name.into(), ty));
        self
    }

    pub fn with_chan(mut self, name: impl Into<Name>, sort: ChannelSort) -> TypeEnv {
        self.chan.push((name.into(), sort));
        self
    }

    pub fn lookup_comp(&self, name: &Name) -> Option<&CompType> {
        self.comp
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn lookup_chan(&self, name: &Name) -> Option<&ChannelSort> {
        self.chan
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, s)| s)
    }

    pub fn has_proc(&self, name: &Name) -> bool {
        self.procs.contains(name)
    }

    pub fn comp_bindings(&self) -> impl Iterator<Item = (&Name, &CompType)> {
        self.comp.iter().map(|(n, t)| (n, t))
    }

    pub fn chan_bindings(&self) -> impl Iterator<Item = (&Name, &ChannelSort)> {
        self.chan.iter().map(|(n, s)| (n, s))
    }
}

fn type_error(span: Span, message: String) -> Diagnostic {
    Diagnostic::error(DiagnosticKind::Type, span, message)
}

fn show(t: &CompType) -> String {
    format!("`{}`", pretty_type(t))
}

pub fn infer_comp(env: &TypeEnv, e: &CompExpr) -> Result<CompType, Diagnostic> {
    let mut env = env.clone();
    infer(&mut env, e)
}

fn infer(env: &mut TypeEnv, e: &CompExpr) -> Result<CompType, Diagnostic> {
    match &e.kind {
        CompKind::Var(name) => match env.lookup_comp(name) {
            Some(t) => Ok(t.clone()),
            None if env.lookup_chan(name).is_some() => Err(type_error(
                e.span,
                format!("`{name}` is a channel, not a value"),
            )),
            None => Err(Diagnostic::error(
                DiagnosticKind::UnboundName,
                e.span,
                format!("unbound variable `{name}`"),
            )),
        },
        CompKind::Zero | CompKind::Num(_) => Ok(CompType::Nat),
        CompKind::Succ(inner) => {
            expect(env, inner, &CompType::Nat, "the argument of `succ`")?;
            Ok(CompType::Nat)
        }
        CompKind::Rec(rec) => {
            expect(env, &rec.scrutinee, &CompType::Nat, "a `rec` scrutinee")?;
            let result = infer(env, &rec.zero_branch)?;
            env.comp.push((rec.succ_binder.clone(), CompType::Nat));
            env.comp.push((rec.rec_binder.clone(), result.clone()));
            let succ = infer(env, &rec.succ_branch);
            env.comp.truncate(env.comp.len() - 2);
            let succ = succ?;
            if succ != result {
                return Err(type_error(
                    rec.succ_branch.span,
                    format!(
                        "`rec` branches disagree: zero case has type {}, successor case has type {}",
                        show(&result),
                        show(&succ)
                    ),
                ));
            }
            Ok(result)
        }
        CompKind::Lambda {
            param,
            param_ty,
            body,
        } => {
            env.comp.push((param.clone(), param_ty.clone()));
            let body_ty = infer(env, body);
            env.comp.pop();
            Ok(CompType::arrow(param_ty.clone(), body_ty?))
        }
        CompKind::App(f, a) => {
            let f_ty = infer(env, f)?;
            let CompType::Arrow(domain, codomain) = f_ty else {
                return Err(type_error(
                    f.span,
                    format!("cannot apply an expression of type {}", show(&f_ty)),
                ));
            };
            let a_ty = infer(env, a)?;
            if a_ty != *domain {
                return Err(type_error(
                    a.span,
                    format!(
                        "argument has type {}, expected {}",
                        show(&a_ty),
                        show(&domain)
                    ),
                ));
            }
            Ok(*codomain)
        }
        CompKind::FieldSel(subject, label) => {
            let s_ty = infer(env, subject)?;
            let CompType::Obj(sig) = &s_ty else {
                return Err(type_error(
                    e.span,
                    format!(
                        "cannot select `{label}` from a value of type {}",
                        show(&s_ty)
                    ),
                ));
            };
            sig.get(label).cloned().ok_or_else(|| {
                type_error(
                    e.span,
                    format!("type {} has no field `{label}`", show(&s_ty)),
                )
            })
        }
    }
}

fn expect(env: &mut TypeEnv, e: &CompExpr, want: &CompType, what: &str) -> Result<(), Diagnostic> {
    let got = infer(env, e)?;
    if got == *want {
        Ok(())
    } else {
        Err(type_error(
            e.span,
            format!("{what} must have type {}, found {}", show(want), show(&got)),
        ))
    }
}

pub fn check_data(env: &TypeEnv, d: &DataExpr) -> Result<ObjSig, Diagnostic> {
    let mut env = env.clone();
    data(&mut env, d)
}

fn data(env: &mut TypeEnv, d: &DataExpr) -> Result<ObjSig, Diagnostic> {
    match &d.kind {
        DataKind::MakeObject(fields) => {
            let mut typed = Vec::with_capacity(fields.len());
            for (i, (label, init)) in fields.iter().enumerate() {
                if fields[..i].iter().any(|(l, _)| l == label) {
                    return Err(Diagnostic::error(
                        DiagnosticKind::DuplicateLabel,
                        d.span,
                        format!("label `{label}` appears more than once"),
                    ));
                }
                typed.push((label.clone(), infer(env, init)?));
            }
            ObjSig::new(typed)
                .ok_or_else(|| type_error(d.span, "an object needs at least one field".into()))
        }
        DataKind::UpdateObject { target, updates } => {
            let t_ty = infer(env, target)?;
            let CompType::Obj(sig) = t_ty else {
                return Err(type_error(
                    target.span,
                    format!("cannot update a value of type {}", show(&t_ty)),
                ));
            };
            if updates.is_empty() {
                return Err(type_error(
                    d.span,
                    "an update needs at least one field".into(),
                ));
            }
            for (i, (label, value)) in updates.iter().enumerate() {
                if updates[..i].iter().any(|(l, _)| l == label) {
                    return Err(Diagnostic::error(
                        DiagnosticKind::DuplicateLabel,
                        d.span,
                        format!("label `{label}` is updated more than once"),
                    ));
                }
                let Some(field_ty) = sig.get(label) else {
                    return Err(type_error(
                        value.span,
                        format!(
                            "type {} has no field `{label}`",
                            show(&CompType::Obj(sig.clone()))
                        ),
                    ));
                };
                let v_ty = infer(env, value)?;
                if v_ty != *field_ty {
                    return Err(type_error(
                        value.span,
                        format!(
                            "field `{label}` has type {}, cannot store {}",
                            show(field_ty),
                            show(&v_ty)
                        ),
                    ));
                }
            }
            Ok(sig)
        }
    }
}

/// What a payload denotes statically.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PayloadType {
    Chan(ChannelSort),
    Value(CompType),
}

fn payload(env: &mut TypeEnv, p: &Payload) -> Result<PayloadType, Diagnostic> {
    match p {
        Payload::Chan { name, span } => env
            .lookup_chan(name)
            .cloned()
            .map(PayloadType::Chan)
            .ok_or_else(|| {
                Diagnostic::error(
                    DiagnosticKind::Sort,
                    *span,
                    format!("unsorted channel `{name}`"),
                )
            }),
        Payload::Comp(e) => infer(env, e).map(PayloadType::Value),
        Payload::Data(d) => data(env, d).map(|sig| PayloadType::Value(CompType::Obj(sig))),
    }
}

fn sort_error(span: Span, message: String) -> Diagnostic {
    Diagnostic::error(DiagnosticKind::Sort, span, message)
}

fn describe(p: &PayloadType) -> String {
    match p {
        PayloadType::Chan(s) => format!("a channel of sort `{}`", pretty_sort(s)),
        PayloadType::Value(t) => format!("a value of type {}", show(t)),
    }
}

fn conforms(sort: &ChannelSort, p: &PayloadType) -> bool {
    match (sort, p) {
        (ChannelSort::CarriesChan(inner), PayloadType::Chan(s)) => **inner == *s,
        (ChannelSort::CarriesChan(_), PayloadType::Value(_)) => false,
        (_, PayloadType::Chan(_)) => false,
        (sort, PayloadType::Value(t)) => sort.carried_type().as_ref() == Some(t),
    }
}

fn chan_sort(env: &TypeEnv, chan: &Name, span: Span) -> Result<ChannelSort, Diagnostic> {
    env.lookup_chan(chan)
        .cloned()
        .ok_or_else(|| sort_error(span, format!("unsorted channel `{chan}`")))
}

/// Checks an action; returns how many bindings it pushed.
fn action(env: &mut TypeEnv, a: &Action) -> Result<Binding, Diagnostic> {
    match &a.kind {
        ActionKind::Send { chan, payload: p } => {
            let sort = chan_sort(env, chan, a.span)?;
            let got = payload(env, p)?;
            if !conforms(&sort, &got) {
                return Err(sort_error(
                    p.span(),
                    format!(
                        "channel `{chan}` carries `{}`, cannot send {}",
                        pretty_sort(&sort),
                        describe(&got)
                    ),
                ));
            }
            Ok(Binding::None)
        }
        ActionKind::Receive { chan, binder } => {
            let sort = chan_sort(env, chan, a.span)?;
            Ok(match sort {
                ChannelSort::CarriesChan(inner) => {
                    env.chan.push((binder.clone(), *inner));
                    Binding::Chan
                }
                other => {
                    let ty = other
                        .carried_type()
                        .expect("non-channel sorts carry a type");
                    env.comp.push((binder.clone(), ty));
                    Binding::Comp
                }
            })
        }
        ActionKind::Match { left, right, inner } => {
            let l = payload(env, left)?;
            let r = payload(env, right)?;
            let comparable = matches!(
                (&l, &r),
                (PayloadType::Chan(_), PayloadType::Chan(_))
                    | (
                        PayloadType::Value(CompType::Nat),
                        PayloadType::Value(CompType::Nat)
                    )
                    | (
                        PayloadType::Value(CompType::Obj(_)),
                        PayloadType::Value(CompType::Obj(_))
                    )
            );
            if !comparable {
                return Err(Diagnostic::error(
                    DiagnosticKind::Guard,
                    a.span,
                    format!("cannot compare {} with {}", describe(&l), describe(&r)),
                ));
            }
            action(env, inner)
        }
    }
}

enum Binding {
    None,
    Comp,
    Chan,
}

fn is_guarded(p: &ProcTerm) -> bool {
    match &p.kind {
        ProcKind::Nil | ProcKind::Prefix(..) => true,
        ProcKind::Sum(l, r) => is_guarded(l) && is_guarded(r),
        _ => false,
    }
}

pub fn check_proc(env: &TypeEnv, p: &ProcTerm) -> Result<(), Vec<Diagnostic>> {
    let mut env = env.clone();
    let mut errors = Vec::new();
    proc(&mut env, p, &mut errors);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

fn proc(env: &mut TypeEnv, p: &ProcTerm, errors: &mut Vec<Diagnostic>) {
    match &p.kind {
        ProcKind::Nil => {}
        ProcKind::Prefix(a, cont) => match action(env, a) {
            Ok(binding) => {
                proc(env, cont, errors);
                match binding {
                    Binding::None => {}
                    Binding::Comp => {
                        env.comp.pop();
                    }
                    Binding::Chan => {
                        env.chan.pop();
                    }
                }
            }
            Err(d) => errors.push(d),
        },
        ProcKind::Sum(l, r) => {
            for operand in [l, r] {
                if !is_guarded(operand) {
                    errors.push(Diagnostic::error(
                        DiagnosticKind::Guard,
                        operand.span,
                        "operands of `+` must be `0`, prefixed processes, or sums of them",
                    ));
                }
                proc(env, operand, errors);
            }
        }
        ProcKind::Par(l, r) => {
            proc(env, l, errors);
            proc(env, r, errors);
        }
        ProcKind::Restrict { chan, sort, body } => {
            env.chan.push((chan.clone(), sort.clone()));
            proc(env, body, errors);
            env.chan.pop();
        }
        ProcKind::Repl(body) => proc(env, body, errors),
        ProcKind::Ref(name) => {
            if !env.has_proc(name) {
                errors.push(Diagnostic::error(
                    DiagnosticKind::UnboundName,
                    p.span,
                    format!("unknown process `{name}`"),
                ));
            }
        }
    }
}

/// Checks a program's items in order, extending `base`. Returns the
/// environment holding every top-level name.
pub fn check_program_with(base: &TypeEnv, program: &Program) -> Result<TypeEnv, Vec<Diagnostic>> {
    let mut env = base.clone();
    let mut errors = Vec::new();
    for item in &program.items {
        match item {
            Item::Def { name, body, .. } => match infer(&mut env, body) {
                Ok(ty) => env.comp.push((name.clone(), ty)),
                Err(d) => errors.push(d),
            },
            Item::Chan { name, sort, .. } => env.chan.push((name.clone(), sort.clone())),
            Item::Proc { name, body, .. } => {
                proc(&mut env, body, &mut errors);
                env.procs.insert(name.clone());
            }
        }
    }
    if let Some(system) = &program.system {
        proc(&mut env, system, &mut errors);
    }
    if errors.is_empty() {
        Ok(env)
    } else {
        Err(errors)
    }
}

pub fn check_program(program: &Program) -> Result<TypeEnv, Vec<Diagnostic>> {
    check_program_with(&TypeEnv::new(), program)
}

/// One diagnostic per replicated process, for the replication-free subset.
pub fn reject_replication(program: &Program) -> Vec<Diagnostic> {
    fn walk(p: &ProcTerm, out: &mut Vec<Diagnostic>) {
        match &p.kind {
            ProcKind::Nil | ProcKind::Ref(_) => {}
            ProcKind::Prefix(_, cont) => walk(cont, out),
            ProcKind::Sum(l, r) | ProcKind::Par(l, r) => {
                walk(l, out);
                walk(r, out);
            }
            ProcKind::Restrict { body, .. } => walk(body, out),
            ProcKind::Repl(body) => {
                out.push(Diagnostic::error(
                    DiagnosticKind::Replication,
                    p.span,
                    "replication is disabled",
                ));
                walk(body, out);
            }
        }
    }
    let mut out = Vec::new();
    for item in &program.items {
        if let Item::Proc { body, .. } = item {
            walk(body, &mut out);
        }
    }
    if let Some(system) = &program.system {
        walk(system, &mut out);
    }
    out
}
