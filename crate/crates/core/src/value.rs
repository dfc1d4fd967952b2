//! Runtime values and environments.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use serde::Serialize;

use crate::syntax::{CompExpr, CompType, Name};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ObjId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ChanId(pub u64);

impl fmt::Display for ObjId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "obj#{}", self.0)
    }
}

#[derive(Clone, Debug)]
pub struct Closure {
    pub param: Name,
    pub param_ty: CompType,
    pub body: Arc<CompExpr>,
    pub env: ValueEnv,
}

#[derive(Clone, Debug)]
pub enum Value {
    Nat(BigUint),
    Closure(Arc<Closure>),
    Obj(ObjId),
    Chan(ChanId),
}

impl Value {
    pub fn nat(n: u64) -> Value {
        Value::Nat(BigUint::from(n))
    }

    pub fn as_nat(&self) -> Option<&BigUint> {
        match self {
            Value::Nat(n) => Some(n),
            _ => None,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            Value::Nat(_) => "nat",
            Value::Closure(_) => "function",
            Value::Obj(_) => "object",
            Value::Chan(_) => "channel",
        }
    }
}

/// Equality for match guards: naturals by value, references by identity.
/// Closures are never comparable.
pub fn guard_equal(a: &Value, b: &Value) -> Option<bool> {
    match (a, b) {
        (Value::Nat(x), Value::Nat(y)) => Some(x == y),
        (Value::Chan(x), Value::Chan(y)) => Some(x == y),
        (Value::Obj(x), Value::Obj(y)) => Some(x == y),
        (Value::Closure(_), _) | (_, Value::Closure(_)) => None,
        _ => None,
    }
}

/// Top-level bindings: evaluated definitions and declared channels.
#[derive(Clone, Debug, Default)]
pub struct Globals {
    values: BTreeMap<Name, Value>,
}

impl Globals {
    pub fn get(&self, name: &Name) -> Option<&Value> {
        self.values.get(name)
    }

    pub fn insert(&mut self, name: Name, value: Value) {
        self.values.insert(name, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Value)> {
        self.values.iter()
    }
}

#[derive(Debug)]
struct Frame {
    name: Name,
    value: Value,
    next: Option<Arc<Frame>>,
}

/// Persistent environment: extension never mutates the parent.
///
/// Local bindings shadow globals. Lookups are split by kind, so a channel
/// and a value with the same name do not hide each other.
#[derive(Clone, Debug)]
pub struct ValueEnv {
    locals: Option<Arc<Frame>>,
    globals: Arc<Globals>,
}

impl Default for ValueEnv {
    fn default() -> Self {
        ValueEnv::new(Arc::new(Globals::default()))
    }
}

impl ValueEnv {
    pub fn new(globals: Arc<Globals>) -> ValueEnv {
        ValueEnv {
            locals: None,
            globals,
        }
    }

    pub fn globals(&self) -> &Arc<Globals> {
        &self.globals
    }

    pub fn bind(&self, name: Name, value: Value) -> ValueEnv {
        ValueEnv {
            locals: Some(Arc::new(Frame {
                name,
                value,
                next: self.locals.clone(),
            })),
            globals: self.globals.clone(),
        }
    }

    fn frames(&self) -> impl Iterator<Item = &Frame> {
        std::iter::successors(self.locals.as_deref(), |f| f.next.as_deref())
    }

    /// Innermost non-channel binding.
    pub fn lookup_value(&self, name: &Name) -> Option<&Value> {
        self.lookup_local_value(name).or_else(|| {
            self.globals
                .get(name)
                .filter(|v| !matches!(v, Value::Chan(_)))
        })
    }

    /// Innermost non-channel local binding, ignoring globals.
    pub fn lookup_local_value(&self, name: &Name) -> Option<&Value> {
        self.frames()
            .find(|f| f.name == *name && !matches!(f.value, Value::Chan(_)))
            .map(|f| &f.value)
    }

    /// Innermost channel binding.
    pub fn lookup_chan(&self, name: &Name) -> Option<ChanId> {
        self.frames()
            .find_map(|f| match f.value {
                Value::Chan(id) if f.name == *name => Some(id),
                _ => None,
            })
            .or_else(|| match self.globals.get(name) {
                Some(Value::Chan(id)) => Some(*id),
                _ => None,
            })
    }

    /// Innermost binding of either kind.
    pub fn lookup_any(&self, name: &Name) -> Option<&Value> {
        self.frames()
            .find(|f| f.name == *name)
            .map(|f| &f.value)
            .or_else(|| self.globals.get(name))
    }

    /// Every value reachable from local bindings (outermost last).
    pub fn local_values(&self) -> impl Iterator<Item = (&Name, &Value)> {
        self.frames().map(|f| (&f.name, &f.value))
    }
}
