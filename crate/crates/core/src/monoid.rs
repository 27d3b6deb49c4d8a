//! Edge-weight algebra.
//!
//! Every ordered pair of cell types `(receiver, sender)` owns a commutative
//! monoid in which the weights of edges between such cells live. Parallel
//! edges are combined with the monoid operation and the identity element
//! stands for "no edge".
//!
//! Two kinds are provided. [`MonoidKind::IntegerAdd`] is the default and is
//! the only kind accepted by the dynamics module. [`MonoidKind::TropicalMin`]
//! combines weights with `min` and uses `+inf` (stored as `i64::MAX`) as
//! its identity.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Cell-type identifier. Types are numbered contiguously from 1.
pub type TypeId = u32;

/// Largest absolute weight accepted in a network. Keeping weights well
/// inside the `i64` range lets row sums over any realistic cell count be
/// computed with plain addition.
pub const MAX_ABS_WEIGHT: i64 = 1 << 40;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonoidError {
    #[error("weights belong to different monoids: {left} vs {right}")]
    TypePairMismatch { left: String, right: String },
    #[error("weight {0} is outside the supported range")]
    OutOfRange(i128),
    #[error("unknown monoid kind '{0}'")]
    UnknownKind(String),
}

/// The available weight algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum MonoidKind {
    #[default]
    IntegerAdd,
    TropicalMin,
}

impl MonoidKind {
    pub fn name(self) -> &'static str {
        match self {
            MonoidKind::IntegerAdd => "int-add",
            MonoidKind::TropicalMin => "tropical-min",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, MonoidError> {
        match name {
            "int-add" => Ok(MonoidKind::IntegerAdd),
            "tropical-min" => Ok(MonoidKind::TropicalMin),
            other => Err(MonoidError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for MonoidKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One monoid instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct MonoidSpec {
    pub kind: MonoidKind,
}

impl MonoidSpec {
    pub const fn new(kind: MonoidKind) -> Self {
        MonoidSpec { kind }
    }

    /// The identity element.
    pub fn zero(&self) -> i64 {
        match self.kind {
            MonoidKind::IntegerAdd => 0,
            MonoidKind::TropicalMin => i64::MAX,
        }
    }

    /// Combine two elements. Both must lie in the supported range; the
    /// result of adding two such integers always fits in `i64`.
    pub fn add(&self, a: i64, b: i64) -> i64 {
        match self.kind {
            MonoidKind::IntegerAdd => a + b,
            MonoidKind::TropicalMin => a.min(b),
        }
    }

    /// Combine two elements and reject results outside the supported range.
    pub fn checked_add(&self, a: i64, b: i64) -> Result<i64, MonoidError> {
        match self.kind {
            MonoidKind::IntegerAdd => {
                let sum = a as i128 + b as i128;
                if sum.abs() > MAX_ABS_WEIGHT as i128 {
                    Err(MonoidError::OutOfRange(sum))
                } else {
                    Ok(sum as i64)
                }
            }
            MonoidKind::TropicalMin => Ok(a.min(b)),
        }
    }

    pub fn is_zero(&self, a: i64) -> bool {
        a == self.zero()
    }

    /// Fold an iterator of elements, starting from the identity.
    pub fn sum<I: IntoIterator<Item = i64>>(&self, items: I) -> i64 {
        items.into_iter().fold(self.zero(), |acc, w| self.add(acc, w))
    }

    /// Whether `value` is a legal element of this monoid.
    pub fn contains(&self, value: i64) -> bool {
        match self.kind {
            MonoidKind::IntegerAdd => value.abs() <= MAX_ABS_WEIGHT,
            MonoidKind::TropicalMin => value == i64::MAX || value.abs() <= MAX_ABS_WEIGHT,
        }
    }
}

/// A monoid per `(receiver type, sender type)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoidFamily {
    num_types: u32,
    specs: Vec<MonoidSpec>,
}

impl MonoidFamily {
    /// The same monoid kind for every type pair.
    pub fn uniform(kind: MonoidKind, num_types: u32) -> Self {
        let n = num_types as usize;
        MonoidFamily {
            num_types,
            specs: vec![MonoidSpec::new(kind); n * n],
        }
    }

    pub fn num_types(&self) -> u32 {
        self.num_types
    }

    /// The monoid of edges from a `sender` cell to a `receiver` cell.
    pub fn get(&self, receiver: TypeId, sender: TypeId) -> MonoidSpec {
        let n = self.num_types as usize;
        self.specs[(receiver as usize - 1) * n + (sender as usize - 1)]
    }

    pub fn set(&mut self, receiver: TypeId, sender: TypeId, spec: MonoidSpec) {
        let n = self.num_types as usize;
        self.specs[(receiver as usize - 1) * n + (sender as usize - 1)] = spec;
    }

    /// The shared kind if every pair uses the same one.
    pub fn homogeneous_kind(&self) -> Option<MonoidKind> {
        let first = self.specs.first()?.kind;
        self.specs.iter().all(|s| s.kind == first).then_some(first)
    }

    /// Restrict to a subset of types, renumbered in the order given.
    pub fn restrict(&self, old_types: &[TypeId]) -> MonoidFamily {
        let mut out = MonoidFamily::uniform(MonoidKind::IntegerAdd, old_types.len() as u32);
        for (i, &ri) in old_types.iter().enumerate() {
            for (j, &sj) in old_types.iter().enumerate() {
                out.set(i as TypeId + 1, j as TypeId + 1, self.get(ri, sj));
            }
        }
        out
    }
}

/// A monoid element tagged with the type pair whose monoid it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Weight {
    pub value: i64,
    pub receiver_type: TypeId,
    pub sender_type: TypeId,
    pub monoid: MonoidSpec,
}

impl Weight {
    pub fn new(value: i64, receiver_type: TypeId, sender_type: TypeId, monoid: MonoidSpec) -> Self {
        Weight {
            value,
            receiver_type,
            sender_type,
            monoid,
        }
    }

    pub fn zero(receiver_type: TypeId, sender_type: TypeId, monoid: MonoidSpec) -> Self {
        Weight::new(monoid.zero(), receiver_type, sender_type, monoid)
    }

    fn describe(&self) -> String {
        format!(
            "{}[{},{}]",
            self.monoid.kind, self.receiver_type, self.sender_type
        )
    }
}

/// Combine two weights of the same monoid.
pub fn monoid_add(a: Weight, b: Weight) -> Result<Weight, MonoidError> {
    if a.receiver_type != b.receiver_type || a.sender_type != b.sender_type || a.monoid != b.monoid
    {
        return Err(MonoidError::TypePairMismatch {
            left: a.describe(),
            right: b.describe(),
        });
    }
    let value = a.monoid.checked_add(a.value, b.value)?;
    Ok(Weight { value, ..a })
}

/// Whether a weight is the identity of its monoid.
pub fn is_zero(a: Weight) -> bool {
    a.monoid.is_zero(a.value)
}
