//! Type-directed generator of closed, well-typed computation terms.

use microlang::syntax::{CompExpr, CompKind, CompType, Name};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_DEPTH: usize = 8;
pub const MAX_NUMERAL: u64 = 5;

pub fn nat() -> CompType {
    CompType::Nat
}

pub fn arrow(a: CompType, b: CompType) -> CompType {
    CompType::arrow(a, b)
}

/// Types the corpus draws from.
pub fn target_types() -> Vec<CompType> {
    vec![
        nat(),
        nat(),
        nat(),
        arrow(nat(), nat()),
        arrow(nat(), arrow(nat(), nat())),
        arrow(arrow(nat(), nat()), nat()),
    ]
}

/// Smallest AST depth of a term of type `ty` with nothing in scope.
fn min_depth(ty: &CompType) -> usize {
    match ty {
        CompType::Arrow(_, b) => 1 + min_depth(b),
        _ => 1,
    }
}

pub fn depth(e: &CompExpr) -> usize {
    match &e.kind {
        CompKind::Var(_) | CompKind::Zero | CompKind::Num(_) => 1,
        CompKind::Succ(e) | CompKind::Lambda { body: e, .. } | CompKind::FieldSel(e, _) => {
            1 + depth(e)
        }
        CompKind::App(f, a) => 1 + depth(f).max(depth(a)),
        CompKind::Rec(r) => {
            1 + depth(&r.scrutinee)
                .max(depth(&r.zero_branch))
                .max(depth(&r.succ_branch))
        }
    }
}

pub fn max_numeral(e: &CompExpr) -> u64 {
    use num_traits::ToPrimitive;
    match &e.kind {
        CompKind::Num(n) => n.to_u64().unwrap_or(u64::MAX),
        CompKind::Var(_) | CompKind::Zero => 0,
        CompKind::Succ(e) | CompKind::Lambda { body: e, .. } | CompKind::FieldSel(e, _) => {
            max_numeral(e)
        }
        CompKind::App(f, a) => max_numeral(f).max(max_numeral(a)),
        CompKind::Rec(r) => max_numeral(&r.scrutinee)
            .max(max_numeral(&r.zero_branch))
            .max(max_numeral(&r.succ_branch)),
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
    fresh: usize,
}

type Ctx = Vec<(Name, CompType)>;

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            fresh: 0,
        }
    }

    fn name(&mut self, prefix: &str) -> Name {
        self.fresh += 1;
        Name::from(format!("{prefix}{}", self.fresh).as_str())
    }

    /// A closed term and the type it was generated at.
    pub fn closed(&mut self) -> (CompExpr, CompType) {
        let ty = target_types()
            .choose(&mut self.rng)
            .expect("nonempty")
            .clone();
        let budget = self.rng.gen_range(min_depth(&ty)..=MAX_DEPTH);
        let e = self.expr(&ty, &Vec::new(), budget);
        (e, ty)
    }

    pub fn expr(&mut self, ty: &CompType, ctx: &Ctx, budget: usize) -> CompExpr {
        match ty {
            CompType::Nat => self.nat(ctx, budget),
            CompType::Arrow(a, b) => self.function(a, b, ctx, budget),
            CompType::Obj(_) => panic!("the generator has no objects"),
        }
    }

    fn var_of(&mut self, ty: &CompType, ctx: &Ctx) -> Option<CompExpr> {
        let candidates: Vec<&Name> = ctx
            .iter()
            .filter(|(_, t)| t == ty)
            .map(|(n, _)| n)
            .collect();
        candidates
            .choose(&mut self.rng)
            .map(|n| CompExpr::var((*n).clone()))
    }

    fn leaf(&mut self, ctx: &Ctx) -> CompExpr {
        if self.rng.gen_bool(0.4) {
            if let Some(v) = self.var_of(&nat(), ctx) {
                return v;
            }
        }
        if self.rng.gen_bool(0.15) {
            CompExpr::zero()
        } else {
            CompExpr::num(self.rng.gen_range(0..=MAX_NUMERAL))
        }
    }

    fn nat(&mut self, ctx: &Ctx, budget: usize) -> CompExpr {
        if budget <= 1 || self.rng.gen_bool(0.25) {
            return self.leaf(ctx);
        }
        let inner = budget - 1;
        match self.rng.gen_range(0..10) {
            0..=1 => CompExpr::succ(self.nat(ctx, inner)),
            2..=5 => {
                let scrutinee = self.nat(ctx, inner.min(3));
                let zero = self.nat(ctx, inner);
                let k = self.name("k");
                let r = self.name("r");
                let mut inner_ctx = ctx.clone();
                inner_ctx.push((k.clone(), nat()));
                inner_ctx.push((r.clone(), nat()));
                let succ = self.nat(&inner_ctx, inner);
                CompExpr::rec(scrutinee, zero, k, r, succ)
            }
            6..=9 if inner >= 2 => {
                let arg_ty = if inner >= 3 && self.rng.gen_bool(0.3) {
                    arrow(nat(), nat())
                } else {
                    nat()
                };
                let f = self.expr(&arrow(arg_ty.clone(), nat()), ctx, inner);
                let a = self.expr(&arg_ty, ctx, inner);
                CompExpr::app(f, a)
            }
            _ => CompExpr::succ(self.nat(ctx, inner)),
        }
    }

    fn function(&mut self, a: &CompType, b: &CompType, ctx: &Ctx, budget: usize) -> CompExpr {
        let ty = arrow(a.clone(), b.clone());
        if budget < min_depth(&ty) || self.rng.gen_bool(0.2) {
            if let Some(v) = self.var_of(&ty, ctx) {
                return v;
            }
        }
        if budget > min_depth(&ty) + 1 && self.rng.gen_bool(0.15) {
            let f = self.expr(&arrow(nat(), ty.clone()), ctx, budget - 1);
            let x = self.nat(ctx, budget - 1);
            return CompExpr::app(f, x);
        }
        let x = self.name("x");
        let mut inner = ctx.clone();
        inner.push((x.clone(), a.clone()));
        let body = self.expr(b, &inner, budget.saturating_sub(1).max(min_depth(b)));
        CompExpr::lambda(x, a.clone(), body)
    }
}

/// `count` closed terms from a fixed seed.
pub fn corpus(seed: u64, count: usize) -> Vec<(CompExpr, CompType)> {
    let mut gen = Gen::new(seed);
    (0..count).map(|_| gen.closed()).collect()
}
