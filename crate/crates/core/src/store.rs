//! Object heap: allocation, field reads, and atomic multi-field updates.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::syntax::{CompType, Name, ObjSig};
use crate::value::{ObjId, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("dangling reference {0}")]
    Dangling(ObjId),
    #[error("{0} has no field `{1}`")]
    UnknownLabel(ObjId, Name),
    #[error("initial fields do not match the signature (missing or extra `{0}`)")]
    DomainMismatch(Name),
    #[error("field `{0}` given a {1} where the signature says otherwise")]
    FieldType(Name, &'static str),
    #[error("label `{0}` written twice in one update")]
    DuplicateLabel(Name),
    #[error("update with no writes")]
    EmptyUpdate,
}

#[derive(Clone, Debug)]
pub struct StoredObject {
    pub id: ObjId,
    pub signature: ObjSig,
    fields: BTreeMap<Name, Value>,
    pub version: u64,
}

impl StoredObject {
    pub fn fields(&self) -> impl Iterator<Item = (&Name, &Value)> {
        self.fields.iter()
    }

    pub fn get(&self, label: &Name) -> Option<&Value> {
        self.fields.get(label)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ObjectStore {
    objects: BTreeMap<ObjId, StoredObject>,
    next_id: u64,
    writes: u64,
}

impl ObjectStore {
    pub fn new() -> ObjectStore {
        ObjectStore::default()
    }

    /// Number of committed mutations (allocations and updates) so far.
    pub fn write_count(&self) -> u64 {
        self.writes
    }

    pub fn object(&self, id: ObjId) -> Option<&StoredObject> {
        self.objects.get(&id)
    }

    pub fn objects(&self) -> impl Iterator<Item = &StoredObject> {
        self.objects.values()
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Whether `value` inhabits `ty`. Closures are checked shallowly, by
    /// parameter type.
    pub fn inhabits(&self, value: &Value, ty: &CompType) -> bool {
        match (value, ty) {
            (Value::Nat(_), CompType::Nat) => true,
            (Value::Closure(c), CompType::Arrow(domain, _)) => c.param_ty == **domain,
            (Value::Obj(id), CompType::Obj(sig)) => {
                self.objects.get(id).is_some_and(|o| o.signature == *sig)
            }
            _ => false,
        }
    }

    pub fn alloc(
        &mut self,
        signature: ObjSig,
        initial: BTreeMap<Name, Value>,
    ) -> Result<ObjId, StoreError> {
        if let Some(extra) = initial.keys().find(|l| signature.get(l).is_none()) {
            return Err(StoreError::DomainMismatch(extra.clone()));
        }
        for (label, ty) in signature.fields() {
            let value = initial
                .get(label)
                .ok_or_else(|| StoreError::DomainMismatch(label.clone()))?;
            if !self.inhabits(value, ty) {
                return Err(StoreError::FieldType(label.clone(), value.category()));
            }
        }
        let id = ObjId(self.next_id);
        self.next_id += 1;
        self.writes += 1;
        self.objects.insert(
            id,
            StoredObject {
                id,
                signature,
                fields: initial,
                version: 0,
            },
        );
        Ok(id)
    }

    pub fn get(&self, id: ObjId, label: &Name) -> Result<&Value, StoreError> {
        let obj = self.objects.get(&id).ok_or(StoreError::Dangling(id))?;
        obj.fields
            .get(label)
            .ok_or_else(|| StoreError::UnknownLabel(id, label.clone()))
    }

    /// Applies every write or none of them; bumps the version once.
    pub fn update(&mut self, id: ObjId, writes: Vec<(Name, Value)>) -> Result<(), StoreError> {
        if writes.is_empty() {
            return Err(StoreError::EmptyUpdate);
        }
        let obj = self.objects.get(&id).ok_or(StoreError::Dangling(id))?;
        for (i, (label, value)) in writes.iter().enumerate() {
            if writes[..i].iter().any(|(l, _)| l == label) {
                return Err(StoreError::DuplicateLabel(label.clone()));
            }
            let ty = obj
                .signature
                .get(label)
                .ok_or_else(|| StoreError::UnknownLabel(id, label.clone()))?;
            if !self.inhabits(value, ty) {
                return Err(StoreError::FieldType(label.clone(), value.category()));
            }
        }
        let obj = self.objects.get_mut(&id).expect("checked above");
        for (label, value) in writes {
            obj.fields.insert(label, value);
        }
        obj.version += 1;
        self.writes += 1;
        Ok(())
    }
}
