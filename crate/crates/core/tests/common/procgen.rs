//! Random well-sorted process terms over a fixed set of global channels,
//! and rewrites that preserve structural congruence.

use microlang::engine::Configuration;
use microlang::syntax::{
    Action, ActionKind, ChannelSort, CompExpr, CompKind, Name, Payload, ProcKind, ProcTerm, Program,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// `a`, `b` carry naturals; `c` carries channels that carry naturals.
pub const GLOBALS: &str = "chan a : nat\nchan b : nat\nchan c : chan nat\nsystem = 0";

pub fn with_system(term: ProcTerm) -> Program {
    let mut p = super::program(GLOBALS);
    p.system = Some(term);
    p
}

pub fn load(term: &ProcTerm) -> Configuration {
    Configuration::load(&with_system(term.clone()), 0).expect("generated terms load")
}

pub struct ProcGen<'r, R: Rng> {
    pub rng: &'r mut R,
    fresh: usize,
}

#[derive(Clone, Default)]
struct Scope {
    nat_chans: Vec<Name>,
    values: Vec<Name>,
}

impl<'r, R: Rng> ProcGen<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        ProcGen { rng, fresh: 0 }
    }

    fn name(&mut self, prefix: &str) -> Name {
        self.fresh += 1;
        Name::from(format!("{prefix}{}", self.fresh).as_str())
    }

    /// A parallel composition of one to four random components.
    pub fn system(&mut self) -> ProcTerm {
        let scope = Scope {
            nat_chans: vec!["a".into(), "b".into()],
            values: Vec::new(),
        };
        let n = self.rng.gen_range(1..=4);
        let mut term = self.term(&scope, 3);
        for _ in 1..n {
            let next = self.term(&scope, 3);
            term = ProcTerm::par(term, next);
        }
        term
    }

    fn nat_payload(&mut self, scope: &Scope) -> Payload {
        match scope.values.choose(self.rng) {
            Some(v) if self.rng.gen_bool(0.4) => Payload::Comp(CompExpr::var(v.clone())),
            _ => Payload::Comp(CompExpr::num(self.rng.gen_range(0..2))),
        }
    }

    fn action(&mut self, scope: &mut Scope) -> Action {
        // Guards are evaluated before the action binds anything.
        let guard = if self.rng.gen_bool(0.1) {
            Some((self.nat_payload(scope), self.nat_payload(scope)))
        } else {
            None
        };
        let chan = scope.nat_chans.choose(self.rng).expect("a and b").clone();
        let action = match self.rng.gen_range(0..6) {
            0 | 1 => Action::send(chan, self.nat_payload(scope)),
            2 | 3 => {
                let x = self.name("x");
                scope.values.push(x.clone());
                Action::receive(chan, x)
            }
            4 => Action::send("c", Payload::chan(chan)),
            _ => {
                let y = self.name("y");
                scope.nat_chans.push(y.clone());
                Action::receive("c", y)
            }
        };
        match guard {
            Some((l, r)) => Action::guarded(l, r, action),
            None => action,
        }
    }

    fn prefixed(&mut self, scope: &Scope, depth: usize) -> ProcTerm {
        let mut inner = scope.clone();
        let a = self.action(&mut inner);
        let cont = self.term(&inner, depth.saturating_sub(1));
        ProcTerm::prefix(a, cont)
    }

    fn term(&mut self, scope: &Scope, depth: usize) -> ProcTerm {
        if depth == 0 {
            return if self.rng.gen_bool(0.7) {
                ProcTerm::nil()
            } else {
                let mut inner = scope.clone();
                ProcTerm::prefix(self.action(&mut inner), ProcTerm::nil())
            };
        }
        match self.rng.gen_range(0..12) {
            0 => ProcTerm::nil(),
            1..=5 => self.prefixed(scope, depth),
            6 | 7 => ProcTerm::par(self.term(scope, depth - 1), self.term(scope, depth - 1)),
            8 => ProcTerm::sum(
                self.prefixed(scope, depth - 1),
                self.prefixed(scope, depth - 1),
            ),
            9 | 10 => {
                let n = self.name("n");
                let mut inner = scope.clone();
                inner.nat_chans.push(n.clone());
                ProcTerm::restrict(n, ChannelSort::CarriesNat, self.term(&inner, depth - 1))
            }
            _ => ProcTerm::repl(self.prefixed(scope, depth - 1)),
        }
    }

    /// Applies one congruence-preserving rewrite at a random position.
    pub fn rewrite(&mut self, t: &ProcTerm) -> ProcTerm {
        let positions = count(t);
        let target = self.rng.gen_range(0..positions);
        let mut seen = 0;
        self.rewrite_at(t, target, &mut seen, false)
    }

    fn rewrite_at(
        &mut self,
        t: &ProcTerm,
        target: usize,
        seen: &mut usize,
        under_sum: bool,
    ) -> ProcTerm {
        let here = *seen;
        *seen += 1;
        if here == target {
            // Sum operands must stay guarded, so no unit law there.
            if under_sum && matches!(t.kind, ProcKind::Prefix(..)) {
                return t.clone();
            }
            return self.rewrite_here(t);
        }
        match &t.kind {
            ProcKind::Nil | ProcKind::Ref(_) => t.clone(),
            ProcKind::Prefix(a, cont) => {
                ProcTerm::prefix(a.clone(), self.rewrite_at(cont, target, seen, false))
            }
            ProcKind::Par(l, r) => {
                let l = self.rewrite_at(l, target, seen, false);
                ProcTerm::par(l, self.rewrite_at(r, target, seen, false))
            }
            ProcKind::Sum(l, r) => {
                let l = self.rewrite_at(l, target, seen, true);
                ProcTerm::sum(l, self.rewrite_at(r, target, seen, true))
            }
            ProcKind::Restrict { chan, sort, body } => ProcTerm::restrict(
                chan.clone(),
                sort.clone(),
                self.rewrite_at(body, target, seen, false),
            ),
            ProcKind::Repl(body) => ProcTerm::repl(self.rewrite_at(body, target, seen, false)),
        }
    }

    fn rewrite_here(&mut self, t: &ProcTerm) -> ProcTerm {
        match &t.kind {
            ProcKind::Par(l, r) => match (self.rng.gen_range(0..3), &l.kind, &r.kind) {
                (0, ProcKind::Par(a, b), _) => {
                    ProcTerm::par((**a).clone(), ProcTerm::par((**b).clone(), (**r).clone()))
                }
                (1, _, ProcKind::Par(b, c)) => {
                    ProcTerm::par(ProcTerm::par((**l).clone(), (**b).clone()), (**c).clone())
                }
                _ => ProcTerm::par((**r).clone(), (**l).clone()),
            },
            ProcKind::Sum(l, r) => match (self.rng.gen_range(0..3), &l.kind, &r.kind) {
                (0, ProcKind::Sum(a, b), _) => {
                    ProcTerm::sum((**a).clone(), ProcTerm::sum((**b).clone(), (**r).clone()))
                }
                (1, _, ProcKind::Sum(b, c)) => {
                    ProcTerm::sum(ProcTerm::sum((**l).clone(), (**b).clone()), (**c).clone())
                }
                _ => ProcTerm::sum((**r).clone(), (**l).clone()),
            },
            ProcKind::Restrict { chan, sort, body } => {
                let fresh = self.name("m");
                ProcTerm::restrict(fresh.clone(), sort.clone(), rename(body, chan, &fresh))
            }
            _ if self.rng.gen_bool(0.5) => ProcTerm::par(t.clone(), ProcTerm::nil()),
            _ => ProcTerm::par(ProcTerm::nil(), t.clone()),
        }
    }
}

fn count(t: &ProcTerm) -> usize {
    1 + match &t.kind {
        ProcKind::Nil | ProcKind::Ref(_) => 0,
        ProcKind::Prefix(_, c) | ProcKind::Restrict { body: c, .. } | ProcKind::Repl(c) => count(c),
        ProcKind::Par(l, r) | ProcKind::Sum(l, r) => count(l) + count(r),
    }
}

fn rename_name(n: &Name, from: &Name, to: &Name) -> Name {
    if n == from {
        to.clone()
    } else {
        n.clone()
    }
}

fn rename_payload(p: &Payload, from: &Name, to: &Name) -> Payload {
    match p {
        Payload::Chan { name, .. } => Payload::chan(rename_name(name, from, to)),
        Payload::Comp(e) => match &e.kind {
            CompKind::Var(v) => Payload::Comp(CompExpr::var(rename_name(v, from, to))),
            _ => p.clone(),
        },
        Payload::Data(_) => p.clone(),
    }
}

fn rename_action(a: &Action, from: &Name, to: &Name) -> Action {
    match &a.kind {
        ActionKind::Send { chan, payload } => Action::send(
            rename_name(chan, from, to),
            rename_payload(payload, from, to),
        ),
        ActionKind::Receive { chan, binder } => {
            Action::receive(rename_name(chan, from, to), binder.clone())
        }
        ActionKind::Match { left, right, inner } => Action::guarded(
            rename_payload(left, from, to),
            rename_payload(right, from, to),
            rename_action(inner, from, to),
        ),
    }
}

/// Renames free occurrences of channel `from`. Generated binder names are
/// unique, so nothing can capture.
pub fn rename(t: &ProcTerm, from: &Name, to: &Name) -> ProcTerm {
    match &t.kind {
        ProcKind::Nil | ProcKind::Ref(_) => t.clone(),
        ProcKind::Prefix(a, c) => ProcTerm::prefix(rename_action(a, from, to), rename(c, from, to)),
        ProcKind::Par(l, r) => ProcTerm::par(rename(l, from, to), rename(r, from, to)),
        ProcKind::Sum(l, r) => ProcTerm::sum(rename(l, from, to), rename(r, from, to)),
        ProcKind::Restrict { chan, sort, body } => {
            ProcTerm::restrict(chan.clone(), sort.clone(), rename(body, from, to))
        }
        ProcKind::Repl(b) => ProcTerm::repl(rename(b, from, to)),
    }
}
