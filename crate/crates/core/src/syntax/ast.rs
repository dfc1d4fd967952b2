//! Abstract syntax for the three cores.
//!
//! Every node carries a [`Span`]. Spans never take part in equality or
//! hashing, so two trees compare equal iff they are structurally identical.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigUint;

/// Byte range into the source text.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl Hash for Span {
    fn hash<H: Hasher>(&self, _: &mut H) {}
}

/// An identifier: computation variable, field label, channel, or process name.
/// Keywords are not identifiers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid identifier `{0}`")]
pub struct InvalidName(pub String);

impl Name {
    pub fn new(text: &str) -> Result<Name, InvalidName> {
        if is_identifier(text) {
            Ok(Name(Arc::from(text)))
        } else {
            Err(InvalidName(text.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_identifier(text: &str) -> bool {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && !super::is_keyword(text)
}

/// Panics on an invalid identifier; meant for building trees in code.
impl From<&str> for Name {
    fn from(text: &str) -> Name {
        Name::new(text).expect("invalid identifier")
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{}`", self.0)
    }
}

/// Object signature: a nonempty map from labels to field types.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ObjSig(BTreeMap<Name, CompType>);

impl ObjSig {
    /// `None` when `fields` is empty or repeats a label.
    pub fn new(fields: impl IntoIterator<Item = (Name, CompType)>) -> Option<ObjSig> {
        let mut map = BTreeMap::new();
        for (label, ty) in fields {
            if map.insert(label, ty).is_some() {
                return None;
            }
        }
        if map.is_empty() {
            None
        } else {
            Some(ObjSig(map))
        }
    }

    pub fn get(&self, label: &Name) -> Option<&CompType> {
        self.0.get(label)
    }

    pub fn fields(&self) -> impl Iterator<Item = (&Name, &CompType)> {
        self.0.iter()
    }

    pub fn labels(&self) -> impl Iterator<Item = &Name> {
        self.0.keys()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CompType {
    Nat,
    Arrow(Box<CompType>, Box<CompType>),
    Obj(ObjSig),
}

impl CompType {
    pub fn arrow(domain: CompType, codomain: CompType) -> CompType {
        CompType::Arrow(Box::new(domain), Box::new(codomain))
    }
}

/// What a channel carries.
///
/// `CarriesFn` always holds an arrow type: a channel of computational type
/// `nat` is `CarriesNat`, and one of object type is `CarriesObj`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ChannelSort {
    CarriesChan(Box<ChannelSort>),
    CarriesNat,
    CarriesFn(CompType),
    CarriesObj(ObjSig),
}

impl ChannelSort {
    /// The sort of a channel that carries values of `ty`.
    pub fn of_type(ty: CompType) -> ChannelSort {
        match ty {
            CompType::Nat => ChannelSort::CarriesNat,
            CompType::Obj(sig) => ChannelSort::CarriesObj(sig),
            arrow @ CompType::Arrow(..) => ChannelSort::CarriesFn(arrow),
        }
    }

    /// The computational type carried, or `None` for channel-carrying sorts.
    pub fn carried_type(&self) -> Option<CompType> {
        match self {
            ChannelSort::CarriesChan(_) => None,
            ChannelSort::CarriesNat => Some(CompType::Nat),
            ChannelSort::CarriesFn(ty) => Some(ty.clone()),
            ChannelSort::CarriesObj(sig) => Some(CompType::Obj(sig.clone())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompExpr {
    pub kind: CompKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RecExpr {
    pub scrutinee: Arc<CompExpr>,
    pub zero_branch: Arc<CompExpr>,
    pub succ_binder: Name,
    pub rec_binder: Name,
    pub succ_branch: Arc<CompExpr>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CompKind {
    Var(Name),
    Zero,
    /// A decimal literal; denotes `succ` applied n times to `z`.
    Num(BigUint),
    Succ(Arc<CompExpr>),
    Rec(RecExpr),
    Lambda {
        param: Name,
        param_ty: CompType,
        body: Arc<CompExpr>,
    },
    App(Arc<CompExpr>, Arc<CompExpr>),
    FieldSel(Arc<CompExpr>, Name),
}

impl CompExpr {
    pub fn new(kind: CompKind, span: Span) -> CompExpr {
        CompExpr { kind, span }
    }

    pub fn var(name: impl Into<Name>) -> CompExpr {
        CompExpr::new(CompKind::Var(name.into()), Span::default())
    }

    pub fn zero() -> CompExpr {
        CompExpr::new(CompKind::Zero, Span::default())
    }

    pub fn num(n: u64) -> CompExpr {
        CompExpr::new(CompKind::Num(BigUint::from(n)), Span::default())
    }

    pub fn succ(e: CompExpr) -> CompExpr {
        CompExpr::new(CompKind::Succ(Arc::new(e)), Span::default())
    }

    pub fn rec(
        scrutinee: CompExpr,
        zero_branch: CompExpr,
        succ_binder: impl Into<Name>,
        rec_binder: impl Into<Name>,
        succ_branch: CompExpr,
    ) -> CompExpr {
        CompExpr::new(
            CompKind::Rec(RecExpr {
                scrutinee: Arc::new(scrutinee),
                zero_branch: Arc::new(zero_branch),
                succ_binder: succ_binder.into(),
                rec_binder: rec_binder.into(),
                succ_branch: Arc::new(succ_branch),
            }),
            Span::default(),
        )
    }

    pub fn lambda(param: impl Into<Name>, param_ty: CompType, body: CompExpr) -> CompExpr {
        CompExpr::new(
            CompKind::Lambda {
                param: param.into(),
                param_ty,
                body: Arc::new(body),
            },
            Span::default(),
        )
    }

    pub fn app(f: CompExpr, a: CompExpr) -> CompExpr {
        CompExpr::new(CompKind::App(Arc::new(f), Arc::new(a)), Span::default())
    }

    /// Left-nested application of `f` to every argument in order.
    pub fn apply(f: CompExpr, args: impl IntoIterator<Item = CompExpr>) -> CompExpr {
        args.into_iter().fold(f, CompExpr::app)
    }

    pub fn field(subject: CompExpr, label: impl Into<Name>) -> CompExpr {
        CompExpr::new(
            CompKind::FieldSel(Arc::new(subject), label.into()),
            Span::default(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DataExpr {
    pub kind: DataKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DataKind {
    MakeObject(Vec<(Name, CompExpr)>),
    UpdateObject {
        target: CompExpr,
        updates: Vec<(Name, CompExpr)>,
    },
}

impl DataExpr {
    pub fn make(fields: Vec<(Name, CompExpr)>) -> DataExpr {
        DataExpr {
            kind: DataKind::MakeObject(fields),
            span: Span::default(),
        }
    }

    pub fn update(target: CompExpr, updates: Vec<(Name, CompExpr)>) -> DataExpr {
        DataExpr {
            kind: DataKind::UpdateObject { target, updates },
            span: Span::default(),
        }
    }
}

/// What a send transmits or a match guard compares.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Payload {
    Chan { name: Name, span: Span },
    Comp(CompExpr),
    Data(DataExpr),
}

impl Payload {
    pub fn chan(name: impl Into<Name>) -> Payload {
        Payload::Chan {
            name: name.into(),
            span: Span::default(),
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Payload::Chan { span, .. } => *span,
            Payload::Comp(e) => e.span,
            Payload::Data(d) => d.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Action {
    pub kind: ActionKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Send {
        chan: Name,
        payload: Payload,
    },
    Receive {
        chan: Name,
        binder: Name,
    },
    Match {
        left: Payload,
        right: Payload,
        inner: Box<Action>,
    },
}

impl Action {
    pub fn send(chan: impl Into<Name>, payload: Payload) -> Action {
        Action {
            kind: ActionKind::Send {
                chan: chan.into(),
                payload,
            },
            span: Span::default(),
        }
    }

    pub fn receive(chan: impl Into<Name>, binder: impl Into<Name>) -> Action {
        Action {
            kind: ActionKind::Receive {
                chan: chan.into(),
                binder: binder.into(),
            },
            span: Span::default(),
        }
    }

    pub fn guarded(left: Payload, right: Payload, inner: Action) -> Action {
        Action {
            kind: ActionKind::Match {
                left,
                right,
                inner: Box::new(inner),
            },
            span: Span::default(),
        }
    }

    /// The send or receive underneath any match guards.
    pub fn innermost(&self) -> &Action {
        match &self.kind {
            ActionKind::Match { inner, .. } => inner.innermost(),
            _ => self,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProcTerm {
    pub kind: ProcKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[allow(clippy::large_enum_variant)]
pub enum ProcKind {
    Nil,
    Prefix(Action, Box<ProcTerm>),
    Sum(Box<ProcTerm>, Box<ProcTerm>),
    Par(Box<ProcTerm>, Box<ProcTerm>),
    Restrict {
        chan: Name,
        sort: ChannelSort,
        body: Box<ProcTerm>,
    },
    Repl(Box<ProcTerm>),
    /// Reference to an earlier `proc` definition.
    Ref(Name),
}

impl ProcTerm {
    pub fn new(kind: ProcKind, span: Span) -> ProcTerm {
        ProcTerm { kind, span }
    }

    pub fn nil() -> ProcTerm {
        ProcTerm::new(ProcKind::Nil, Span::default())
    }

    pub fn prefix(action: Action, cont: ProcTerm) -> ProcTerm {
        ProcTerm::new(ProcKind::Prefix(action, Box::new(cont)), Span::default())
    }

    pub fn sum(l: ProcTerm, r: ProcTerm) -> ProcTerm {
        ProcTerm::new(ProcKind::Sum(Box::new(l), Box::new(r)), Span::default())
    }

    pub fn par(l: ProcTerm, r: ProcTerm) -> ProcTerm {
        ProcTerm::new(ProcKind::Par(Box::new(l), Box::new(r)), Span::default())
    }

    pub fn restrict(chan: impl Into<Name>, sort: ChannelSort, body: ProcTerm) -> ProcTerm {
        ProcTerm::new(
            ProcKind::Restrict {
                chan: chan.into(),
                sort,
                body: Box::new(body),
            },
            Span::default(),
        )
    }

    pub fn repl(body: ProcTerm) -> ProcTerm {
        ProcTerm::new(ProcKind::Repl(Box::new(body)), Span::default())
    }

    pub fn reference(name: impl Into<Name>) -> ProcTerm {
        ProcTerm::new(ProcKind::Ref(name.into()), Span::default())
    }

    pub fn is_nil(&self) -> bool {
        matches!(self.kind, ProcKind::Nil)
    }

    /// True if `!` occurs anywhere in the term.
    pub fn uses_replication(&self) -> bool {
        match &self.kind {
            ProcKind::Repl(_) => true,
            ProcKind::Nil | ProcKind::Ref(_) => false,
            ProcKind::Prefix(_, p) => p.uses_replication(),
            ProcKind::Restrict { body, .. } => body.uses_replication(),
            ProcKind::Sum(l, r) | ProcKind::Par(l, r) => {
                l.uses_replication() || r.uses_replication()
            }
        }
    }
}

/// A top-level item of a program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
#[allow(clippy::large_enum_variant)]
pub enum Item {
    Def {
        name: Name,
        body: CompExpr,
        span: Span,
    },
    Chan {
        name: Name,
        sort: ChannelSort,
        span: Span,
    },
    Proc {
        name: Name,
        body: ProcTerm,
        span: Span,
    },
}

impl Item {
    pub fn name(&self) -> &Name {
        match self {
            Item::Def { name, .. } | Item::Chan { name, .. } | Item::Proc { name, .. } => name,
        }
    }

    pub fn span(&self) -> Span {
        match self {
            Item::Def { span, .. } | Item::Chan { span, .. } | Item::Proc { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Program {
    pub items: Vec<Item>,
    pub system: Option<ProcTerm>,
}

impl Program {
    /// `base`'s items followed by `self`'s; the system comes from `self`.
    pub fn linked_after(&self, base: &Program) -> Program {
        let mut items = base.items.clone();
        items.extend(self.items.iter().cloned());
        Program {
            items,
            system: self.system.clone(),
        }
    }

    pub fn uses_replication(&self) -> bool {
        self.items.iter().any(|item| match item {
            Item::Proc { body, .. } => body.uses_replication(),
            _ => false,
        }) || self.system.as_ref().is_some_and(ProcTerm::uses_replication)
    }
}
