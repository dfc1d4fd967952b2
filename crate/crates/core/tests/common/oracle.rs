//! Reference evaluator for closed computation terms.
//!
//! Works by substitution on its own term type with `u64` naturals, and
//! counts one unit per beta step and per recursor unfolding (a recursor on
//! n unfolds n + 1 times). Shares no code with the library's evaluator.

use microlang::syntax::{CompExpr, CompKind};
use num_traits::ToPrimitive;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Term {
    Var(String),
    Nat(u64),
    Succ(Box<Term>),
    Rec {
        scrutinee: Box<Term>,
        zero: Box<Term>,
        k: String,
        r: String,
        succ: Box<Term>,
    },
    Lam(String, Box<Term>),
    App(Box<Term>, Box<Term>),
}

#[derive(Debug, PartialEq, Eq)]
pub enum Failure {
    Stuck(String),
    OutOfFuel,
}

pub fn from_expr(e: &CompExpr) -> Term {
    match &e.kind {
        CompKind::Var(x) => Term::Var(x.to_string()),
        CompKind::Zero => Term::Nat(0),
        CompKind::Num(n) => Term::Nat(n.to_u64().expect("small numeral")),
        CompKind::Succ(e) => Term::Succ(Box::new(from_expr(e))),
        CompKind::Rec(r) => Term::Rec {
            scrutinee: Box::new(from_expr(&r.scrutinee)),
            zero: Box::new(from_expr(&r.zero_branch)),
            k: r.succ_binder.to_string(),
            r: r.rec_binder.to_string(),
            succ: Box::new(from_expr(&r.succ_branch)),
        },
        CompKind::Lambda { param, body, .. } => {
            Term::Lam(param.to_string(), Box::new(from_expr(body)))
        }
        CompKind::App(f, a) => Term::App(Box::new(from_expr(f)), Box::new(from_expr(a))),
        CompKind::FieldSel(..) => panic!("the reference evaluator has no objects"),
    }
}

/// `t[x := v]` for closed `v`.
fn subst(t: &Term, x: &str, v: &Term) -> Term {
    match t {
        Term::Var(y) if y == x => v.clone(),
        Term::Var(_) | Term::Nat(_) => t.clone(),
        Term::Succ(e) => Term::Succ(Box::new(subst(e, x, v))),
        Term::Lam(y, _) if y == x => t.clone(),
        Term::Lam(y, b) => Term::Lam(y.clone(), Box::new(subst(b, x, v))),
        Term::App(f, a) => Term::App(Box::new(subst(f, x, v)), Box::new(subst(a, x, v))),
        Term::Rec {
            scrutinee,
            zero,
            k,
            r,
            succ,
        } => Term::Rec {
            scrutinee: Box::new(subst(scrutinee, x, v)),
            zero: Box::new(subst(zero, x, v)),
            k: k.clone(),
            r: r.clone(),
            succ: if k == x || r == x {
                succ.clone()
            } else {
                Box::new(subst(succ, x, v))
            },
        },
    }
}

pub struct Oracle {
    pub steps: u64,
    fuel: u64,
}

impl Oracle {
    pub fn new(fuel: u64) -> Oracle {
        Oracle { steps: 0, fuel }
    }

    fn tick(&mut self) -> Result<(), Failure> {
        if self.steps == self.fuel {
            return Err(Failure::OutOfFuel);
        }
        self.steps += 1;
        Ok(())
    }

    pub fn eval(&mut self, t: &Term) -> Result<Term, Failure> {
        match t {
            Term::Var(x) => Err(Failure::Stuck(format!("free variable {x}"))),
            Term::Nat(_) | Term::Lam(..) => Ok(t.clone()),
            Term::Succ(e) => match self.eval(e)? {
                Term::Nat(n) => Ok(Term::Nat(n + 1)),
                other => Err(Failure::Stuck(format!("succ of {other:?}"))),
            },
            Term::App(f, a) => {
                let f = self.eval(f)?;
                let a = self.eval(a)?;
                match f {
                    Term::Lam(x, body) => {
                        self.tick()?;
                        self.eval(&subst(&body, &x, &a))
                    }
                    other => Err(Failure::Stuck(format!("applying {other:?}"))),
                }
            }
            Term::Rec {
                scrutinee,
                zero,
                k,
                r,
                succ,
            } => {
                let n = match self.eval(scrutinee)? {
                    Term::Nat(n) => n,
                    other => return Err(Failure::Stuck(format!("rec on {other:?}"))),
                };
                self.tick()?;
                let mut acc = self.eval(zero)?;
                for m in 0..n {
                    self.tick()?;
                    let body = subst(&subst(succ, k, &Term::Nat(m)), r, &acc);
                    acc = self.eval(&body)?;
                }
                Ok(acc)
            }
        }
    }
}

/// Value and beta-plus-iota step count of a closed term.
pub fn evaluate(e: &CompExpr, fuel: u64) -> Result<(Term, u64), Failure> {
    let mut oracle = Oracle::new(fuel);
    let v = oracle.eval(&from_expr(e))?;
    Ok((v, oracle.steps))
}
