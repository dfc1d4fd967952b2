//! Recursive-descent parser with one-token lookahead (two at `ident !`/`ident ?`).

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigUint;

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::resolve::Resolver;
use crate::diagnostics::{Diagnostic, DiagnosticKind};

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<Span> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("{tok}")))
        }
    }

    fn unexpected(&self, wanted: &str) -> Diagnostic {
        Diagnostic::error(
            DiagnosticKind::Syntax,
            self.span(),
            format!("expected {wanted}, found {}", self.peek()),
        )
    }

    fn ident(&mut self) -> PResult<(Name, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((Name::new(&s).expect("lexer yields identifiers"), span))
            }
            _ => Err(self.unexpected("an identifier")),
        }
    }

    // ---- types -------------------------------------------------------

    fn comp_type(&mut self) -> PResult<CompType> {
        let domain = self.type_atom()?;
        if self.eat(&Tok::Arrow) {
            let codomain = self.comp_type()?;
            Ok(CompType::arrow(domain, codomain))
        } else {
            Ok(domain)
        }
    }

    fn type_atom(&mut self) -> PResult<CompType> {
        match self.peek() {
            Tok::Nat => {
                self.bump();
                Ok(CompType::Nat)
            }
            Tok::LParen => {
                self.bump();
                let t = self.comp_type()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::LBrace => {
                let open = self.bump().span;
                let mut fields = Vec::new();
                let mut seen = HashSet::new();
                loop {
                    let (label, span) = self.ident()?;
                    if !seen.insert(label.clone()) {
                        return Err(Diagnostic::error(
                            DiagnosticKind::DuplicateLabel,
                            span,
                            format!("label `{label}` appears twice in object type"),
                        ));
                    }
                    self.expect(Tok::Colon)?;
                    fields.push((label, self.comp_type()?));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBrace)?;
                ObjSig::new(fields).map(CompType::Obj).ok_or_else(|| {
                    Diagnostic::error(DiagnosticKind::Syntax, open, "empty object type")
                })
            }
            _ => Err(self.unexpected("a type")),
        }
    }

    fn sort(&mut self) -> PResult<ChannelSort> {
        if self.eat(&Tok::Chan) {
            Ok(ChannelSort::CarriesChan(Box::new(self.sort()?)))
        } else {
            Ok(ChannelSort::of_type(self.comp_type()?))
        }
    }

    // ---- computation expressions -------------------------------------

    fn expr(&mut self) -> PResult<CompExpr> {
        match self.peek() {
            Tok::Fun => {
                let start = self.bump().span;
                self.expect(Tok::LParen)?;
                let (param, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let param_ty = self.comp_type()?;
                self.expect(Tok::RParen)?;
                let body = self.expr()?;
                let span = start.to(body.span);
                Ok(CompExpr::new(
                    CompKind::Lambda {
                        param,
                        param_ty,
                        body: Arc::new(body),
                    },
                    span,
                ))
            }
            Tok::Rec => {
                let start = self.bump().span;
                let scrutinee = self.app()?;
                self.expect(Tok::LBrace)?;
                self.expect(Tok::Z)?;
                self.expect(Tok::Arrow)?;
                let zero_branch = self.expr()?;
                self.expect(Tok::Bar)?;
                self.expect(Tok::Succ)?;
                self.expect(Tok::LParen)?;
                let (succ_binder, _) = self.ident()?;
                self.expect(Tok::RParen)?;
                self.expect(Tok::With)?;
                let (rec_binder, rec_span) = self.ident()?;
                if rec_binder == succ_binder {
                    return Err(Diagnostic::error(
                        DiagnosticKind::DuplicateBinder,
                        rec_span,
                        format!("`rec` binds `{rec_binder}` twice"),
                    ));
                }
                self.expect(Tok::Arrow)?;
                let succ_branch = self.expr()?;
                let end = self.expect(Tok::RBrace)?;
                Ok(CompExpr::new(
                    CompKind::Rec(RecExpr {
                        scrutinee: Arc::new(scrutinee),
                        zero_branch: Arc::new(zero_branch),
                        succ_binder,
                        rec_binder,
                        succ_branch: Arc::new(succ_branch),
                    }),
                    start.to(end),
                ))
            }
            _ => self.app(),
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Ident(_) | Tok::Z | Tok::Num(_) | Tok::Succ | Tok::LParen
        )
    }

    fn app(&mut self) -> PResult<CompExpr> {
        let mut f = self.postfix()?;
        while self.starts_atom() {
            let a = self.postfix()?;
            let span = f.span.to(a.span);
            f = CompExpr::new(CompKind::App(Arc::new(f), Arc::new(a)), span);
        }
        Ok(f)
    }

    fn postfix(&mut self) -> PResult<CompExpr> {
        let mut e = self.atom()?;
        while *self.peek() == Tok::Dot && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.bump();
            let (label, lspan) = self.ident()?;
            let span = e.span.to(lspan);
            e = CompExpr::new(CompKind::FieldSel(Arc::new(e), label), span);
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<CompExpr> {
        match self.peek().clone() {
            Tok::Ident(_) => {
                let (name, span) = self.ident()?;
                Ok(CompExpr::new(CompKind::Var(name), span))
            }
            Tok::Z => Ok(CompExpr::new(CompKind::Zero, self.bump().span)),
            Tok::Num(n) => Ok(CompExpr::new(CompKind::Num(n), self.bump().span)),
            Tok::Succ => {
                let start = self.bump().span;
                self.expect(Tok::LParen)?;
                let inner = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                Ok(CompExpr::new(
                    CompKind::Succ(Arc::new(inner)),
                    start.to(end),
                ))
            }
            Tok::LParen => {
                let start = self.bump().span;
                let mut inner = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                inner.span = start.to(end);
                Ok(inner)
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    // ---- data expressions and payloads --------------------------------

    fn field_list(&mut self, sep: Tok) -> PResult<Vec<(Name, CompExpr)>> {
        let mut fields: Vec<(Name, CompExpr)> = Vec::new();
        loop {
            let (label, span) = self.ident()?;
            if fields.iter().any(|(l, _)| *l == label) {
                return Err(Diagnostic::error(
                    DiagnosticKind::DuplicateLabel,
                    span,
                    format!("label `{label}` appears twice"),
                ));
            }
            self.expect(sep.clone())?;
            fields.push((label, self.expr()?));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(fields)
    }

    fn payload(&mut self) -> PResult<Payload> {
        if *self.peek() == Tok::LBracket {
            let start = self.bump().span;
            let fields = self.field_list(Tok::Eq)?;
            let end = self.expect(Tok::RBracket)?;
            return Ok(Payload::Data(DataExpr {
                kind: DataKind::MakeObject(fields),
                span: start.to(end),
            }));
        }
        let e = self.expr()?;
        if *self.peek() == Tok::Dot && *self.peek_at(1) == Tok::LBracket {
            self.bump();
            self.bump();
            let updates = self.field_list(Tok::LeftArrow)?;
            let end = self.expect(Tok::RBracket)?;
            let span = e.span.to(end);
            return Ok(Payload::Data(DataExpr {
                kind: DataKind::UpdateObject { target: e, updates },
                span,
            }));
        }
        Ok(Payload::Comp(e))
    }

    // ---- processes ----------------------------------------------------

    fn proc(&mut self) -> PResult<ProcTerm> {
        let mut l = self.sum()?;
        while self.eat(&Tok::Bar) {
            let r = self.sum()?;
            let span = l.span.to(r.span);
            l = ProcTerm::new(ProcKind::Par(Box::new(l), Box::new(r)), span);
        }
        Ok(l)
    }

    fn sum(&mut self) -> PResult<ProcTerm> {
        let mut l = self.unary()?;
        while self.eat(&Tok::Plus) {
            let r = self.unary()?;
            let span = l.span.to(r.span);
            l = ProcTerm::new(ProcKind::Sum(Box::new(l), Box::new(r)), span);
        }
        Ok(l)
    }

    fn unary(&mut self) -> PResult<ProcTerm> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Num(n) if n == BigUint::default() => {
                self.bump();
                Ok(ProcTerm::new(ProcKind::Nil, start))
            }
            Tok::Bang => {
                self.bump();
                let body = self.unary()?;
                let span = start.to(body.span);
                Ok(ProcTerm::new(ProcKind::Repl(Box::new(body)), span))
            }
            Tok::New => {
                self.bump();
                let (chan, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let sort = self.sort()?;
                self.expect(Tok::In)?;
                let body = self.unary()?;
                let span = start.to(body.span);
                Ok(ProcTerm::new(
                    ProcKind::Restrict {
                        chan,
                        sort,
                        body: Box::new(body),
                    },
                    span,
                ))
            }
            Tok::LParen => {
                self.bump();
                let mut p = self.proc()?;
                let end = self.expect(Tok::RParen)?;
                p.span = start.to(end);
                Ok(p)
            }
            Tok::LBracket => self.prefixed(),
            Tok::Ident(_) if matches!(self.peek_at(1), Tok::Bang | Tok::Question) => {
                self.prefixed()
            }
            Tok::Ident(_) => {
                let (name, span) = self.ident()?;
                Ok(ProcTerm::new(ProcKind::Ref(name), span))
            }
            _ => Err(self.unexpected("a process")),
        }
    }

    fn prefixed(&mut self) -> PResult<ProcTerm> {
        let action = self.action()?;
        self.expect(Tok::Dot)?;
        let cont = self.unary()?;
        let span = action.span.to(cont.span);
        Ok(ProcTerm::new(
            ProcKind::Prefix(action, Box::new(cont)),
            span,
        ))
    }

    fn action(&mut self) -> PResult<Action> {
        let start = self.span();
        if self.eat(&Tok::LBracket) {
            let left = Payload::Comp(self.expr()?);
            self.expect(Tok::Eq)?;
            let right = Payload::Comp(self.expr()?);
            self.expect(Tok::RBracket)?;
            let inner = self.action()?;
            let span = start.to(inner.span);
            return Ok(Action {
                kind: ActionKind::Match {
                    left,
                    right,
                    inner: Box::new(inner),
                },
                span,
            });
        }
        let (chan, _) = self.ident()?;
        match self.peek() {
            Tok::Bang => {
                self.bump();
                self.expect(Tok::LParen)?;
                let payload = self.payload()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Action {
                    kind: ActionKind::Send { chan, payload },
                    span: start.to(end),
                })
            }
            Tok::Question => {
                self.bump();
                self.expect(Tok::LParen)?;
                let (binder, _) = self.ident()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Action {
                    kind: ActionKind::Receive { chan, binder },
                    span: start.to(end),
                })
            }
            _ => Err(self.unexpected("`!` or `?`")),
        }
    }

    // ---- programs -----------------------------------------------------

    fn item_start(&self) -> bool {
        matches!(
            self.peek(),
            Tok::Def | Tok::Chan | Tok::Proc | Tok::System | Tok::Eof
        )
    }

    // Every item parser consumes its keyword first, so this always makes progress.
    fn recover(&mut self) {
        while !self.item_start() {
            self.bump();
        }
    }

    fn program(&mut self) -> (Program, Vec<Diagnostic>) {
        let mut program = Program::default();
        let mut errors = Vec::new();
        loop {
            let start = self.span();
            let item = match self.peek() {
                Tok::Eof => break,
                Tok::Def => self.def_item(start).map(Some),
                Tok::Chan => self.chan_item(start).map(Some),
                Tok::Proc => self.proc_item(start).map(Some),
                Tok::System => self.system_item(start).and_then(|sys| {
                    if program.system.is_some() {
                        Err(Diagnostic::error(
                            DiagnosticKind::DuplicateDefinition,
                            start,
                            "`system` is defined more than once",
                        ))
                    } else {
                        program.system = Some(sys);
                        Ok(None)
                    }
                }),
                _ => Err(self.unexpected("`def`, `chan`, `proc`, or `system`")),
            };
            match item {
                Ok(Some(item)) => program.items.push(item),
                Ok(None) => {}
                Err(d) => {
                    errors.push(d);
                    self.recover();
                }
            }
        }
        (program, errors)
    }

    fn item_end(&mut self, result: PResult<Span>) -> PResult<Span> {
        let span = result?;
        if self.item_start() {
            Ok(span)
        } else {
            Err(self.unexpected("the start of the next definition"))
        }
    }

    fn def_item(&mut self, start: Span) -> PResult<Item> {
        self.bump();
        let (name, _) = self.ident()?;
        self.expect(Tok::Eq)?;
        let body = self.expr()?;
        let span = self.item_end(Ok(start.to(body.span)))?;
        Ok(Item::Def { name, body, span })
    }

    fn chan_item(&mut self, start: Span) -> PResult<Item> {
        self.bump();
        let (name, _) = self.ident()?;
        self.expect(Tok::Colon)?;
        let sort = self.sort()?;
        let span = self.item_end(Ok(start.to(self.prev_span())))?;
        Ok(Item::Chan { name, sort, span })
    }

    fn proc_item(&mut self, start: Span) -> PResult<Item> {
        self.bump();
        let (name, _) = self.ident()?;
        self.expect(Tok::Eq)?;
        let body = self.proc()?;
        let span = self.item_end(Ok(start.to(body.span)))?;
        Ok(Item::Proc { name, body, span })
    }

    fn system_item(&mut self, _start: Span) -> PResult<ProcTerm> {
        self.bump();
        self.expect(Tok::Eq)?;
        let body = self.proc()?;
        self.item_end(Ok(body.span))?;
        Ok(body)
    }
}

fn parser_for(src: &str) -> Result<Parser, Vec<Diagnostic>> {
    let (tokens, errors) = lex(src);
    if errors.is_empty() {
        Ok(Parser { tokens, pos: 0 })
    } else {
        Err(errors)
    }
}

fn fragment<T>(src: &str, f: impl FnOnce(&mut Parser) -> PResult<T>) -> Result<T, Vec<Diagnostic>> {
    let mut p = parser_for(src)?;
    let value = f(&mut p).map_err(|d| vec![d])?;
    if *p.peek() != Tok::Eof {
        return Err(vec![p.unexpected("end of input")]);
    }
    Ok(value)
}

/// Parses a standalone computation expression (no name resolution).
pub fn parse_comp_expr(src: &str) -> Result<CompExpr, Vec<Diagnostic>> {
    fragment(src, Parser::expr)
}

pub fn parse_comp_type(src: &str) -> Result<CompType, Vec<Diagnostic>> {
    fragment(src, Parser::comp_type)
}

pub fn parse_sort(src: &str) -> Result<ChannelSort, Vec<Diagnostic>> {
    fragment(src, Parser::sort)
}

/// Parses a standalone payload. Bare identifiers come back as computation
/// variables since there is no scope to tell channels apart.
pub fn parse_payload(src: &str) -> Result<Payload, Vec<Diagnostic>> {
    fragment(src, Parser::payload)
}

/// Parses a standalone process term (no name resolution; see [`parse_payload`]).
pub fn parse_proc_term(src: &str) -> Result<ProcTerm, Vec<Diagnostic>> {
    fragment(src, Parser::proc)
}

/// Parses and resolves a whole program.
pub fn parse_program(src: &str) -> Result<Program, Vec<Diagnostic>> {
    parse_program_in(src, &Program::default())
}

/// Parses and resolves a program whose names may refer to `base`'s items.
/// The returned program holds only the items from `src`.
pub fn parse_program_in(src: &str, base: &Program) -> Result<Program, Vec<Diagnostic>> {
    let mut p = parser_for(src)?;
    let (mut program, errors) = p.program();
    if !errors.is_empty() {
        return Err(errors);
    }
    let errors = Resolver::with_base(base).resolve_program(&mut program);
    if errors.is_empty() {
        Ok(program)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(src: &str) -> CompExpr {
        parse_comp_expr(src).unwrap_or_else(|e| panic!("{src}: {e:?}"))
    }

    #[test]
    fn zero_is_z() {
        assert_eq!(comp("z"), CompExpr::zero());
    }

    #[test]
    fn application_is_left_associative_and_field_selection_binds_tighter() {
        assert_eq!(
            comp("f x.size 3"),
            CompExpr::apply(
                CompExpr::var("f"),
                [
                    CompExpr::field(CompExpr::var("x"), "size"),
                    CompExpr::num(3)
                ]
            )
        );
    }

    #[test]
    fn lambda_body_extends_right() {
        assert_eq!(
            comp("fun (x : nat) f x"),
            CompExpr::lambda(
                "x",
                CompType::Nat,
                CompExpr::app(CompExpr::var("f"), CompExpr::var("x"))
            )
        );
    }

    #[test]
    fn rec_form() {
        assert_eq!(
            comp("rec x { z -> y | succ(_) with r -> succ(r) }"),
            CompExpr::rec(
                CompExpr::var("x"),
                CompExpr::var("y"),
                "_",
                "r",
                CompExpr::succ(CompExpr::var("r"))
            )
        );
    }

    #[test]
    fn rec_binders_must_differ() {
        let errs = parse_comp_expr("rec x { z -> y | succ(r) with r -> r }").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::DuplicateBinder);
    }

    #[test]
    fn arrow_types_associate_right() {
        assert_eq!(
            parse_comp_type("nat -> nat -> nat").unwrap(),
            CompType::arrow(CompType::Nat, CompType::arrow(CompType::Nat, CompType::Nat))
        );
    }

    #[test]
    fn object_literal_payload() {
        let p = parse_payload("[size = z, creation = t, permissions = p]").unwrap();
        let Payload::Data(DataExpr {
            kind: DataKind::MakeObject(fields),
            ..
        }) = p
        else {
            panic!("not an object literal: {p:?}");
        };
        let labels: Vec<_> = fields.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["size", "creation", "permissions"]);
    }

    #[test]
    fn update_payload() {
        let p = parse_payload("f.[size <= mul s 2, permissions <= q]").unwrap();
        assert_eq!(
            p,
            Payload::Data(DataExpr::update(
                CompExpr::var("f"),
                vec![
                    (
                        "size".into(),
                        CompExpr::apply(
                            CompExpr::var("mul"),
                            [CompExpr::var("s"), CompExpr::num(2)]
                        )
                    ),
                    ("permissions".into(), CompExpr::var("q")),
                ]
            ))
        );
    }

    #[test]
    fn duplicate_labels_rejected() {
        let errs = parse_payload("[a = z, a = z]").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::DuplicateLabel);
        let errs = parse_payload("f.[a <= z, a <= z]").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::DuplicateLabel);
    }

    #[test]
    fn empty_update_rejected() {
        assert!(parse_payload("f.[]").is_err());
        assert!(parse_payload("[]").is_err());
    }

    #[test]
    fn write_reserve_pipeline() {
        let p = parse_proc_term("write?(n) . reserve!(blockCount n) . 0").unwrap();
        let expected = ProcTerm::prefix(
            Action::receive("write", "n"),
            ProcTerm::prefix(
                Action::send(
                    "reserve",
                    Payload::Comp(CompExpr::app(
                        CompExpr::var("blockCount"),
                        CompExpr::var("n"),
                    )),
                ),
                ProcTerm::nil(),
            ),
        );
        assert_eq!(p, expected);
    }

    #[test]
    fn bar_binds_looser_than_plus() {
        let p = parse_proc_term("a?(x).0 + b?(y).0 | 0").unwrap();
        assert!(matches!(p.kind, ProcKind::Par(ref l, _) if matches!(l.kind, ProcKind::Sum(..))));
    }

    #[test]
    fn match_guard_and_restriction() {
        let p = parse_proc_term("new c : nat in [z = z] c!(z).0").unwrap();
        let ProcKind::Restrict { chan, sort, body } = p.kind else {
            panic!()
        };
        assert_eq!(chan.as_str(), "c");
        assert_eq!(sort, ChannelSort::CarriesNat);
        assert!(matches!(
            body.kind,
            ProcKind::Prefix(
                Action {
                    kind: ActionKind::Match { .. },
                    ..
                },
                _
            )
        ));
    }

    #[test]
    fn sorts() {
        assert_eq!(parse_sort("nat").unwrap(), ChannelSort::CarriesNat);
        assert_eq!(
            parse_sort("chan chan nat").unwrap(),
            ChannelSort::CarriesChan(Box::new(ChannelSort::CarriesChan(Box::new(
                ChannelSort::CarriesNat
            ))))
        );
        assert!(matches!(
            parse_sort("nat -> nat").unwrap(),
            ChannelSort::CarriesFn(CompType::Arrow(..))
        ));
        assert!(matches!(
            parse_sort("{a : nat}").unwrap(),
            ChannelSort::CarriesObj(_)
        ));
    }

    #[test]
    fn program_items() {
        let prog = parse_program(
            "def one = succ(z)\nchan c : nat\nproc P = c!(one).0\nsystem = P | c?(x).0",
        )
        .unwrap();
        assert_eq!(prog.items.len(), 3);
        assert!(prog.system.is_some());
    }

    #[test]
    fn duplicate_definitions_are_reported() {
        let errs = parse_program("def a = z\ndef a = z").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::DuplicateDefinition);
    }

    #[test]
    fn unbound_names_are_reported() {
        let errs = parse_program("def a = b").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::UnboundName);
        let errs = parse_program("system = c!(z).0").unwrap_err();
        assert_eq!(errs[0].kind, DiagnosticKind::UnboundName);
    }

    #[test]
    fn syntax_errors_recover_at_next_item() {
        let errs = parse_program("def a = (z\ndef b = )\ndef c = z").unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(errs.iter().all(|e| e.kind == DiagnosticKind::Syntax));
    }

    #[test]
    fn diagnostics_point_inside_the_input() {
        for src in [
            "def a = (z",
            "system = c!",
            "@",
            "def = z",
            "proc P = c?(1).0",
        ] {
            let errs = parse_program(src).unwrap_err();
            for e in errs {
                assert!(e.span.start <= src.len(), "{src}: {e:?}");
            }
        }
    }
}
