//! Name resolution over a parsed program.
//!
//! Variables, labels and channels share one identifier space. Each use is
//! resolved by position: channel subjects look for the innermost channel,
//! expression variables for the innermost value, and a bare identifier in
//! payload position takes whichever binding is innermost. Bare payloads that
//! resolve to channels are rewritten to [`Payload::Chan`].

use std::collections::hash_map::Entry;
use std::collections::HashMap;

use super::ast::*;
use crate::diagnostics::{Diagnostic, DiagnosticKind};

#[derive(Clone, Debug)]
enum Global {
    Def,
    Chan(ChannelSort),
    Proc,
}

#[derive(Clone, Debug)]
enum Local {
    Var,
    Chan(Option<ChannelSort>),
}

pub(crate) struct Resolver {
    globals: HashMap<Name, Global>,
    locals: Vec<(Name, Local)>,
    errors: Vec<Diagnostic>,
}

enum Found {
    Value,
    Chan,
}

impl Resolver {
    pub(crate) fn with_base(base: &Program) -> Resolver {
        let mut r = Resolver {
            globals: HashMap::new(),
            locals: Vec::new(),
            errors: Vec::new(),
        };
        for item in &base.items {
            r.globals.insert(item.name().clone(), global_of(item));
        }
        r
    }

    pub(crate) fn resolve_program(mut self, program: &mut Program) -> Vec<Diagnostic> {
        for item in &mut program.items {
            match item {
                Item::Def { body, .. } => self.comp(body),
                Item::Chan { .. } => {}
                Item::Proc { body, .. } => self.proc(body),
            }
            let name = item.name().clone();
            match self.globals.entry(name) {
                Entry::Occupied(e) => self.errors.push(Diagnostic::error(
                    DiagnosticKind::DuplicateDefinition,
                    item.span(),
                    format!("`{}` is already defined", e.key()),
                )),
                Entry::Vacant(e) => {
                    e.insert(global_of(item));
                }
            }
        }
        if let Some(system) = &mut program.system {
            self.proc(system);
        }
        self.errors
    }

    fn unbound(&mut self, span: Span, message: String) {
        self.errors.push(Diagnostic::error(
            DiagnosticKind::UnboundName,
            span,
            message,
        ));
    }

    fn lookup_any(&self, name: &Name) -> Option<Found> {
        if let Some((_, local)) = self.locals.iter().rev().find(|(n, _)| n == name) {
            return Some(match local {
                Local::Var => Found::Value,
                Local::Chan(_) => Found::Chan,
            });
        }
        match self.globals.get(name) {
            Some(Global::Def) => Some(Found::Value),
            Some(Global::Chan(_)) => Some(Found::Chan),
            Some(Global::Proc) | None => None,
        }
    }

    fn has_value(&self, name: &Name) -> bool {
        self.locals
            .iter()
            .rev()
            .any(|(n, l)| n == name && matches!(l, Local::Var))
            || matches!(self.globals.get(name), Some(Global::Def))
    }

    /// `Err(())` when unbound; `Ok(None)` when bound to a channel whose sort
    /// could not be determined (an earlier error).
    fn lookup_chan(&self, name: &Name) -> Result<Option<ChannelSort>, ()> {
        for (n, local) in self.locals.iter().rev() {
            if n == name {
                if let Local::Chan(sort) = local {
                    return Ok(sort.clone());
                }
            }
        }
        match self.globals.get(name) {
            Some(Global::Chan(sort)) => Ok(Some(sort.clone())),
            _ => Err(()),
        }
    }

    fn comp(&mut self, e: &CompExpr) {
        match &e.kind {
            CompKind::Var(name) => {
                if !self.has_value(name) {
                    let msg = match self.lookup_any(name) {
                        Some(Found::Chan) => {
                            format!("`{name}` is a channel, not a value")
                        }
                        _ if matches!(self.globals.get(name), Some(Global::Proc)) => {
                            format!("`{name}` is a process, not a value")
                        }
                        _ => format!("unbound variable `{name}`"),
                    };
                    self.unbound(e.span, msg);
                }
            }
            CompKind::Zero | CompKind::Num(_) => {}
            CompKind::Succ(inner) => self.comp(inner),
            CompKind::Rec(rec) => {
                self.comp(&rec.scrutinee);
                self.comp(&rec.zero_branch);
                self.locals.push((rec.succ_binder.clone(), Local::Var));
                self.locals.push((rec.rec_binder.clone(), Local::Var));
                self.comp(&rec.succ_branch);
                self.locals.truncate(self.locals.len() - 2);
            }
            CompKind::Lambda { param, body, .. } => {
                self.locals.push((param.clone(), Local::Var));
                self.comp(body);
                self.locals.pop();
            }
            CompKind::App(f, a) => {
                self.comp(f);
                self.comp(a);
            }
            CompKind::FieldSel(subject, _) => self.comp(subject),
        }
    }

    fn data(&mut self, d: &DataExpr) {
        match &d.kind {
            DataKind::MakeObject(fields) => fields.iter().for_each(|(_, e)| self.comp(e)),
            DataKind::UpdateObject { target, updates } => {
                self.comp(target);
                updates.iter().for_each(|(_, e)| self.comp(e));
            }
        }
    }

    fn payload(&mut self, p: &mut Payload) {
        match p {
            Payload::Chan { name, span } => {
                if self.lookup_chan(name).is_err() {
                    let span = *span;
                    let msg = format!("unbound channel `{name}`");
                    self.unbound(span, msg);
                }
            }
            Payload::Comp(e) => {
                if let CompKind::Var(name) = &e.kind {
                    if let Some(Found::Chan) = self.lookup_any(name) {
                        *p = Payload::Chan {
                            name: name.clone(),
                            span: e.span,
                        };
                        return;
                    }
                }
                self.comp(e);
            }
            Payload::Data(d) => self.data(d),
        }
    }

    fn subject(&mut self, chan: &Name, span: Span) -> Option<ChannelSort> {
        match self.lookup_chan(chan) {
            Ok(sort) => sort,
            Err(()) => {
                self.unbound(span, format!("unbound channel `{chan}`"));
                None
            }
        }
    }

    /// Resolves an action; returns the number of locals it pushed.
    fn action(&mut self, a: &mut Action) -> usize {
        let span = a.span;
        match &mut a.kind {
            ActionKind::Send { chan, payload } => {
                self.subject(chan, span);
                self.payload(payload);
                0
            }
            ActionKind::Receive { chan, binder } => {
                let sort = self.subject(chan, span);
                let local = match sort {
                    Some(ChannelSort::CarriesChan(inner)) => Local::Chan(Some(*inner)),
                    _ => Local::Var,
                };
                self.locals.push((binder.clone(), local));
                1
            }
            ActionKind::Match { left, right, inner } => {
                self.payload(left);
                self.payload(right);
                self.action(inner)
            }
        }
    }

    fn proc(&mut self, p: &mut ProcTerm) {
        let span = p.span;
        match &mut p.kind {
            ProcKind::Nil => {}
            ProcKind::Prefix(action, cont) => {
                let pushed = self.action(action);
                self.proc(cont);
                self.locals.truncate(self.locals.len() - pushed);
            }
            ProcKind::Sum(l, r) | ProcKind::Par(l, r) => {
                self.proc(l);
                self.proc(r);
            }
            ProcKind::Restrict { chan, sort, body } => {
                self.locals
                    .push((chan.clone(), Local::Chan(Some(sort.clone()))));
                self.proc(body);
                self.locals.pop();
            }
            ProcKind::Repl(body) => self.proc(body),
            ProcKind::Ref(name) => {
                if !matches!(self.globals.get(name), Some(Global::Proc)) {
                    let msg = format!("unknown process `{name}`");
                    self.unbound(span, msg);
                }
            }
        }
    }
}

fn global_of(item: &Item) -> Global {
    match item {
        Item::Def { .. } => Global::Def,
        Item::Chan { sort, .. } => Global::Chan(sort.clone()),
        Item::Proc { .. } => Global::Proc,
    }
}

#[cfg(test)]
mod tests {
    use crate::syntax::parse_program;
    use crate::syntax::*;

    fn system(src: &str) -> ProcTerm {
        parse_program(src).unwrap().system.unwrap()
    }

    #[test]
    fn bare_channel_payloads_become_channel_names() {
        let p = system("chan a : chan nat\nchan c : nat\nsystem = a!(c).0");
        let ProcKind::Prefix(
            Action {
                kind: ActionKind::Send { payload, .. },
                ..
            },
            _,
        ) = p.kind
        else {
            panic!()
        };
        assert_eq!(payload, Payload::chan("c"));
    }

    #[test]
    fn received_channels_are_channels() {
        let p = system("chan a : chan nat\nsystem = a?(x).x!(z).0");
        assert!(matches!(p.kind, ProcKind::Prefix(..)));
    }

    #[test]
    fn innermost_binding_wins_in_payloads() {
        // `x` the received nat shadows the channel `x` in payload position,
        // but the subject `x!` still refers to the channel.
        let p = system("chan x : nat\nsystem = x?(x).x!(x).0");
        let ProcKind::Prefix(_, cont) = p.kind else {
            panic!()
        };
        let ProcKind::Prefix(
            Action {
                kind: ActionKind::Send { payload, .. },
                ..
            },
            _,
        ) = cont.kind
        else {
            panic!()
        };
        assert_eq!(payload, Payload::Comp(CompExpr::var("x")));
    }

    #[test]
    fn channels_are_not_values() {
        let errs = parse_program("chan c : nat\nsystem = c!(succ(c)).0").unwrap_err();
        assert!(errs[0].message.contains("channel"));
    }

    #[test]
    fn processes_must_be_defined_before_use() {
        let errs = parse_program("proc P = Q\nproc Q = 0").unwrap_err();
        assert_eq!(
            errs[0].kind,
            crate::diagnostics::DiagnosticKind::UnboundName
        );
    }

    #[test]
    fn base_program_names_are_visible() {
        let base = parse_program("def one = succ(z)").unwrap();
        let user = crate::syntax::parse_program_in("def two = succ(one)", &base).unwrap();
        assert_eq!(user.items.len(), 1);
        let errs = crate::syntax::parse_program_in("def one = z", &base).unwrap_err();
        assert_eq!(
            errs[0].kind,
            crate::diagnostics::DiagnosticKind::DuplicateDefinition
        );
    }
}
