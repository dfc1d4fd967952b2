mod common;

use std::sync::Arc;

use common::gen::{self, corpus, depth, max_numeral};
use common::oracle::{self, Term};
use microlang::eval::{eval_with_fuel, Fuel, DEFAULT_FUEL};
use microlang::store::ObjectStore;
use microlang::syntax::{CompExpr, CompType};
use microlang::typecheck::{infer_comp, TypeEnv};
use microlang::value::{Globals, Value, ValueEnv};
use num_traits::ToPrimitive;

fn empty_env() -> ValueEnv {
    ValueEnv::new(Arc::new(Globals::default()))
}

fn eval(e: &CompExpr) -> (Value, u64) {
    let r = eval_with_fuel(
        &empty_env(),
        &ObjectStore::new(),
        e,
        Fuel::new(DEFAULT_FUEL).unwrap(),
    )
    .unwrap_or_else(|err| panic!("{err:?}"));
    (r.value, r.steps)
}

/// Closed sample arguments of a type.
fn samples(ty: &CompType) -> Vec<CompExpr> {
    match ty {
        CompType::Nat => vec![CompExpr::num(0), CompExpr::num(1), CompExpr::num(4)],
        CompType::Arrow(a, b) if **a == CompType::Nat && **b == CompType::Nat => vec![
            CompExpr::lambda("s", gen::nat(), CompExpr::var("s")),
            CompExpr::lambda(
                "s",
                gen::nat(),
                CompExpr::succ(CompExpr::succ(CompExpr::var("s"))),
            ),
            CompExpr::lambda("s", gen::nat(), CompExpr::num(3)),
        ],
        other => panic!("no samples for {other:?}"),
    }
}

/// Applies the library's closure and the oracle's lambda to the same
/// argument and compares, down to naturals.
fn agree(lib: &Value, reference: &Term, ty: &CompType) {
    match (ty, lib, reference) {
        (CompType::Nat, Value::Nat(n), Term::Nat(m)) => assert_eq!(n.to_u64(), Some(*m)),
        (CompType::Arrow(a, b), Value::Closure(_), Term::Lam(..)) => {
            for arg in samples(a) {
                let env = empty_env().bind("f".into(), lib.clone());
                let call = CompExpr::app(CompExpr::var("f"), arg.clone());
                let got = eval_with_fuel(&env, &ObjectStore::new(), &call, Fuel::default())
                    .unwrap()
                    .value;
                let mut o = oracle::Oracle::new(DEFAULT_FUEL);
                let expected = o
                    .eval(&Term::App(
                        Box::new(reference.clone()),
                        Box::new(oracle::from_expr(&arg)),
                    ))
                    .unwrap();
                agree(&got, &expected, b);
            }
        }
        _ => panic!("{lib:?} and {reference:?} disagree at {ty:?}"),
    }
}

#[test]
fn corpus_respects_bounds() {
    for (e, ty) in corpus(7, 1000) {
        assert!(depth(&e) <= gen::MAX_DEPTH, "{e:?}");
        assert!(max_numeral(&e) <= gen::MAX_NUMERAL);
        assert_eq!(infer_comp(&TypeEnv::new(), &e).unwrap(), ty);
    }
}

#[test]
fn values_and_step_counts_match_reference() {
    for (e, ty) in corpus(11, 1000) {
        let (v, steps) = eval(&e);
        let (expected, expected_steps) = oracle::evaluate(&e, DEFAULT_FUEL).unwrap();
        assert_eq!(steps, expected_steps, "{e:?}");
        agree(&v, &expected, &ty);
    }
}

#[test]
fn capture_avoidance() {
    let inner = CompExpr::lambda("x", gen::nat(), CompExpr::var("x"));
    let outer = CompExpr::lambda("x", gen::nat(), inner);
    let e = CompExpr::apply(outer, [CompExpr::num(1), CompExpr::num(2)]);
    assert_eq!(eval(&e).0.as_nat().and_then(|n| n.to_u64()), Some(2));
}

#[test]
fn deterministic_and_pure() {
    let store = ObjectStore::new();
    for (e, _) in corpus(3, 200) {
        let a = eval_with_fuel(&empty_env(), &store, &e, Fuel::default()).unwrap();
        let b = eval_with_fuel(&empty_env(), &store, &e, Fuel::default()).unwrap();
        assert_eq!(a.steps, b.steps);
        assert_eq!(format!("{:?}", a.value), format!("{:?}", b.value));
        assert_eq!(store.write_count(), 0);
    }
}

#[test]
fn corpus_is_not_trivial() {
    let steps: Vec<u64> = corpus(11, 1000).iter().map(|(e, _)| eval(e).1).collect();
    let busy = steps.iter().filter(|s| **s >= 10).count();
    let recs = corpus(11, 1000)
        .iter()
        .filter(|(e, _)| format!("{e:?}").contains("Rec"))
        .count();
    println!(
        "max steps {}, {busy} terms with at least 10 steps, {recs} with rec",
        steps.iter().max().unwrap()
    );
    assert!(busy >= 100);
    assert!(recs >= 300);
}
