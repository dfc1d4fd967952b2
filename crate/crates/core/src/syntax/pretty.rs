//! Pretty-printer. Output re-parses to a structurally identical tree.

use std::fmt::Write;

use super::ast::*;

// Precedence levels for computation expressions.
const LEVEL_LAMBDA: u8 = 0;
const LEVEL_APP: u8 = 1;
const LEVEL_POSTFIX: u8 = 2;
const LEVEL_ATOM: u8 = 3;

// Precedence levels for processes.
const LEVEL_PAR: u8 = 0;
const LEVEL_SUM: u8 = 1;
const LEVEL_UNARY: u8 = 2;

pub fn pretty_type(t: &CompType) -> String {
    let mut out = String::new();
    write_type(&mut out, t, false);
    out
}

fn write_type(out: &mut String, t: &CompType, as_domain: bool) {
    match t {
        CompType::Nat => out.push_str("nat"),
        CompType::Arrow(d, c) => {
            if as_domain {
                out.push('(');
            }
            write_type(out, d, true);
            out.push_str(" -> ");
            write_type(out, c, false);
            if as_domain {
                out.push(')');
            }
        }
        CompType::Obj(sig) => write_sig(out, sig),
    }
}

fn write_sig(out: &mut String, sig: &ObjSig) {
    out.push('{');
    for (i, (label, ty)) in sig.fields().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{label} : ");
        write_type(out, ty, false);
    }
    out.push('}');
}

pub fn pretty_sort(s: &ChannelSort) -> String {
    match s {
        ChannelSort::CarriesChan(inner) => format!("chan {}", pretty_sort(inner)),
        ChannelSort::CarriesNat => "nat".to_string(),
        ChannelSort::CarriesFn(t) => pretty_type(t),
        ChannelSort::CarriesObj(sig) => {
            let mut out = String::new();
            write_sig(&mut out, sig);
            out
        }
    }
}

/// Renders a computation expression, letting `free` substitute text for
/// free variables. Bound variables are always printed by name.
pub struct CompPrinter<'f> {
    bound: Vec<Name>,
    free: &'f mut dyn FnMut(&Name) -> Option<String>,
}

impl<'f> CompPrinter<'f> {
    pub fn new(free: &'f mut dyn FnMut(&Name) -> Option<String>) -> Self {
        CompPrinter {
            bound: Vec::new(),
            free,
        }
    }

    pub fn print(&mut self, e: &CompExpr) -> String {
        let mut out = String::new();
        self.write(&mut out, e, LEVEL_LAMBDA);
        out
    }

    fn write(&mut self, out: &mut String, e: &CompExpr, ctx: u8) {
        let level = comp_level(e);
        let paren = level < ctx;
        if paren {
            out.push('(');
        }
        match &e.kind {
            CompKind::Var(name) => {
                let text = if self.bound.contains(name) {
                    None
                } else {
                    (self.free)(name)
                };
                match text {
                    Some(t) => out.push_str(&t),
                    None => out.push_str(name.as_str()),
                }
            }
            CompKind::Zero => out.push('z'),
            CompKind::Num(n) => {
                let _ = write!(out, "{n}");
            }
            CompKind::Succ(inner) => {
                out.push_str("succ(");
                self.write(out, inner, LEVEL_LAMBDA);
                out.push(')');
            }
            CompKind::Rec(rec) => {
                out.push_str("rec ");
                self.write(out, &rec.scrutinee, LEVEL_APP);
                out.push_str(" { z -> ");
                self.write(out, &rec.zero_branch, LEVEL_LAMBDA);
                let _ = write!(
                    out,
                    " | succ({}) with {} -> ",
                    rec.succ_binder, rec.rec_binder
                );
                self.bound.push(rec.succ_binder.clone());
                self.bound.push(rec.rec_binder.clone());
                self.write(out, &rec.succ_branch, LEVEL_LAMBDA);
                self.bound.truncate(self.bound.len() - 2);
                out.push_str(" }");
            }
            CompKind::Lambda {
                param,
                param_ty,
                body,
            } => {
                let _ = write!(out, "fun ({param} : {}) ", pretty_type(param_ty));
                self.bound.push(param.clone());
                self.write(out, body, LEVEL_LAMBDA);
                self.bound.pop();
            }
            CompKind::App(f, a) => {
                self.write(out, f, LEVEL_APP);
                out.push(' ');
                self.write(out, a, LEVEL_POSTFIX);
            }
            CompKind::FieldSel(subject, label) => {
                self.write(out, subject, LEVEL_POSTFIX);
                let _ = write!(out, ".{label}");
            }
        }
        if paren {
            out.push(')');
        }
    }

    pub fn write_payload(&mut self, out: &mut String, p: &Payload) {
        match p {
            Payload::Chan { name, .. } => out.push_str(name.as_str()),
            Payload::Comp(e) => self.write(out, e, LEVEL_LAMBDA),
            Payload::Data(d) => self.write_data(out, d),
        }
    }

    pub fn write_data(&mut self, out: &mut String, d: &DataExpr) {
        match &d.kind {
            DataKind::MakeObject(fields) => {
                out.push('[');
                self.write_fields(out, fields, "=");
                out.push(']');
            }
            DataKind::UpdateObject { target, updates } => {
                self.write(out, target, LEVEL_POSTFIX);
                out.push_str(".[");
                self.write_fields(out, updates, "<=");
                out.push(']');
            }
        }
    }

    fn write_fields(&mut self, out: &mut String, fields: &[(Name, CompExpr)], sep: &str) {
        for (i, (label, e)) in fields.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{label} {sep} ");
            self.write(out, e, LEVEL_LAMBDA);
        }
    }
}

fn comp_level(e: &CompExpr) -> u8 {
    match &e.kind {
        CompKind::Lambda { .. } | CompKind::Rec(_) => LEVEL_LAMBDA,
        CompKind::App(..) => LEVEL_APP,
        CompKind::FieldSel(..) => LEVEL_POSTFIX,
        _ => LEVEL_ATOM,
    }
}

pub fn pretty_comp(e: &CompExpr) -> String {
    CompPrinter::new(&mut |_| None).print(e)
}

pub fn pretty_data(d: &DataExpr) -> String {
    let mut out = String::new();
    CompPrinter::new(&mut |_| None).write_data(&mut out, d);
    out
}

pub fn pretty_payload(p: &Payload) -> String {
    let mut out = String::new();
    CompPrinter::new(&mut |_| None).write_payload(&mut out, p);
    out
}

pub fn pretty_action(a: &Action) -> String {
    let mut out = String::new();
    write_action(&mut out, a);
    out
}

fn write_action(out: &mut String, a: &Action) {
    match &a.kind {
        ActionKind::Send { chan, payload } => {
            let _ = write!(out, "{chan}!(");
            out.push_str(&pretty_payload(payload));
            out.push(')');
        }
        ActionKind::Receive { chan, binder } => {
            let _ = write!(out, "{chan}?({binder})");
        }
        ActionKind::Match { left, right, inner } => {
            let _ = write!(
                out,
                "[{} = {}] ",
                pretty_payload(left),
                pretty_payload(right)
            );
            write_action(out, inner);
        }
    }
}

pub fn pretty_proc(p: &ProcTerm) -> String {
    let mut out = String::new();
    write_proc(&mut out, p, LEVEL_PAR);
    out
}

fn proc_level(p: &ProcTerm) -> u8 {
    match p.kind {
        ProcKind::Par(..) => LEVEL_PAR,
        ProcKind::Sum(..) => LEVEL_SUM,
        _ => LEVEL_UNARY,
    }
}

fn write_proc(out: &mut String, p: &ProcTerm, ctx: u8) {
    let paren = proc_level(p) < ctx;
    if paren {
        out.push('(');
    }
    match &p.kind {
        ProcKind::Nil => out.push('0'),
        ProcKind::Prefix(action, cont) => {
            write_action(out, action);
            out.push_str(" . ");
            write_proc(out, cont, LEVEL_UNARY);
        }
        ProcKind::Sum(l, r) => {
            write_proc(out, l, LEVEL_SUM);
            out.push_str(" + ");
            write_proc(out, r, LEVEL_UNARY);
        }
        ProcKind::Par(l, r) => {
            write_proc(out, l, LEVEL_PAR);
            out.push_str(" | ");
            write_proc(out, r, LEVEL_SUM);
        }
        ProcKind::Restrict { chan, sort, body } => {
            let _ = write!(out, "new {chan} : {} in ", pretty_sort(sort));
            write_proc(out, body, LEVEL_UNARY);
        }
        ProcKind::Repl(body) => {
            out.push('!');
            write_proc(out, body, LEVEL_UNARY);
        }
        ProcKind::Ref(name) => out.push_str(name.as_str()),
    }
    if paren {
        out.push(')');
    }
}

pub fn pretty_item(item: &Item) -> String {
    match item {
        Item::Def { name, body, .. } => format!("def {name} = {}", pretty_comp(body)),
        Item::Chan { name, sort, .. } => format!("chan {name} : {}", pretty_sort(sort)),
        Item::Proc { name, body, .. } => format!("proc {name} = {}", pretty_proc(body)),
    }
}

/// One item per line, `system` last.
pub fn pretty_program(p: &Program) -> String {
    let mut out = String::new();
    for item in &p.items {
        out.push_str(&pretty_item(item));
        out.push('\n');
    }
    if let Some(system) = &p.system {
        let _ = writeln!(out, "system = {}", pretty_proc(system));
    }
    out
}
