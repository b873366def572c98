//! Finite integer domains and the classification of domain updates.
//!
//! A [`Domain`] is an explicit ordered set of integers; no interval or
//! bit-set compression is attempted, so a domain always renders exactly as
//! the value list a trace consumer sees (`[1,2,3]`). All operations are
//! pure: they return new domains and never mutate their inputs.

use std::fmt;
use std::sync::Arc;

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A finite-domain variable: a unique 1-based index plus its source name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef {
    index: u32,
    name: Arc<str>,
}

impl VarRef {
    pub fn new(index: u32, name: impl Into<Arc<str>>) -> Self {
        let name = name.into();
        assert!(index >= 1, "variable indices are 1-based");
        assert!(!name.is_empty(), "variable names are nonempty");
        VarRef { index, name }
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn name_arc(&self) -> Arc<str> {
        Arc::clone(&self.name)
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "var({}, {})", self.index, self.name)
    }
}

/// An ordered set of integers. Doubles as the value-set type for
/// withdrawals, so `remove_values` takes a `Domain` on both sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Domain {
    values: Arc<[i64]>,
}

impl Domain {
    /// Builds a domain from arbitrary values; sorts and deduplicates.
    pub fn new(mut values: Vec<i64>) -> Self {
        values.sort_unstable();
        values.dedup();
        Domain { values: values.into() }
    }

    pub fn empty() -> Self {
        Domain { values: Arc::from([]) }
    }

    pub fn singleton(v: i64) -> Self {
        Domain { values: Arc::from([v]) }
    }

    /// The inclusive range `lo..=hi`; empty when `lo > hi`.
    pub fn from_range(lo: i64, hi: i64) -> Self {
        Domain { values: (lo..=hi).collect() }
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> + '_ {
        self.values.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_singleton(&self) -> bool {
        self.values.len() == 1
    }

    /// The single value of a singleton domain.
    pub fn single_value(&self) -> Option<i64> {
        match *self.values {
            [v] => Some(v),
            _ => None,
        }
    }

    pub fn min(&self) -> Option<i64> {
        self.values.first().copied()
    }

    pub fn max(&self) -> Option<i64> {
        self.values.last().copied()
    }

    pub fn contains(&self, v: i64) -> bool {
        self.values.binary_search(&v).is_ok()
    }

    pub fn is_subset_of(&self, other: &Domain) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    /// Sorted set intersection.
    pub fn intersect(&self, other: &Domain) -> Domain {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.values.len() && j < other.values.len() {
            match self.values[i].cmp(&other.values[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.values[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        Domain { values: out.into() }
    }

    /// Returns `self` minus `withdrawn`, order preserved.
    pub fn remove_values(&self, withdrawn: &Domain) -> Domain {
        let out: Vec<i64> = self.iter().filter(|v| !withdrawn.contains(*v)).collect();
        Domain { values: out.into() }
    }

    /// Keeps the values satisfying `keep`; the complement is the withdrawal
    /// set of a reduction operator.
    pub fn filter(&self, mut keep: impl FnMut(i64) -> bool) -> Domain {
        let out: Vec<i64> = self.iter().filter(|v| keep(*v)).collect();
        Domain { values: out.into() }
    }
}

impl FromIterator<i64> for Domain {
    fn from_iter<T: IntoIterator<Item = i64>>(iter: T) -> Self {
        Domain::new(iter.into_iter().collect())
    }
}

impl fmt::Display for Domain {
    /// Renders as a bracketed comma list, e.g. `[1,2,3]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.values.len()))?;
        for v in self.iter() {
            seq.serialize_element(&v)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct DomainVisitor;
        impl<'de> Visitor<'de> for DomainVisitor {
            type Value = Domain;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an array of integers")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Domain, A::Error> {
                let mut values = Vec::with_capacity(seq.size_hint().unwrap_or(0));
                while let Some(v) = seq.next_element::<i64>()? {
                    values.push(v);
                }
                Ok(Domain::new(values))
            }
        }
        deserializer.deserialize_seq(DomainVisitor)
    }
}

/// The five kinds of domain modification a single reduction can cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateType {
    Min,
    Max,
    Any,
    Ground,
    Empty,
}

impl UpdateType {
    pub fn as_str(self) -> &'static str {
        match self {
            UpdateType::Min => "min",
            UpdateType::Max => "max",
            UpdateType::Any => "any",
            UpdateType::Ground => "ground",
            UpdateType::Empty => "empty",
        }
    }
}

impl fmt::Display for UpdateType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DomainError {
    #[error("withdrawal set is empty")]
    EmptyWithdrawal,
    #[error("withdrawal set {withdrawn} is not a subset of {domain}")]
    NotASubset { domain: Domain, withdrawn: Domain },
    #[error("unknown variable {0}")]
    UnknownVariable(String),
}

/// Classifies the removal of `withdrawn` from `old` into update types, in
/// the canonical emission order `[any, ground, min, max, empty]`.
///
/// `min`/`max` are suppressed when the result is empty (bounds undefined
/// there; `empty` carries that information).
pub fn classify_update(old: &Domain, withdrawn: &Domain) -> Result<Vec<UpdateType>, DomainError> {
    if withdrawn.is_empty() {
        return Err(DomainError::EmptyWithdrawal);
    }
    if !withdrawn.is_subset_of(old) {
        return Err(DomainError::NotASubset {
            domain: old.clone(),
            withdrawn: withdrawn.clone(),
        });
    }
    let new = old.remove_values(withdrawn);
    let mut updates = vec![UpdateType::Any];
    if new.is_singleton() {
        updates.push(UpdateType::Ground);
    }
    if !new.is_empty() {
        if new.min() != old.min() {
            updates.push(UpdateType::Min);
        }
        if new.max() != old.max() {
            updates.push(UpdateType::Max);
        }
    } else {
        updates.push(UpdateType::Empty);
    }
    Ok(updates)
}

/// The current domain of every variable of a model, total by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainState {
    vars: Arc<[VarRef]>,
    domains: Vec<Domain>,
}

impl DomainState {
    /// Builds the state from `(variable, initial domain)` pairs. Variables
    /// must carry the indices `1..=n` in order.
    pub fn new(entries: Vec<(VarRef, Domain)>) -> Self {
        for (i, (v, _)) in entries.iter().enumerate() {
            assert_eq!(v.index() as usize, i + 1, "variable indices must be 1..=n in order");
        }
        let (vars, domains): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        DomainState { vars: vars.into(), domains }
    }

    pub fn vars(&self) -> &[VarRef] {
        &self.vars
    }

    pub fn get(&self, var: &VarRef) -> Result<&Domain, DomainError> {
        self.domains
            .get(var.index() as usize - 1)
            .ok_or_else(|| DomainError::UnknownVariable(var.name().to_string()))
    }

    pub fn set(&mut self, var: &VarRef, domain: Domain) -> Result<(), DomainError> {
        let slot = self
            .domains
            .get_mut(var.index() as usize - 1)
            .ok_or_else(|| DomainError::UnknownVariable(var.name().to_string()))?;
        *slot = domain;
        Ok(())
    }

    pub fn contains_var(&self, var: &VarRef) -> bool {
        self.vars
            .get(var.index() as usize - 1)
            .is_some_and(|v| v == var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VarRef, &Domain)> {
        self.vars.iter().zip(self.domains.iter())
    }

    /// Total domain size, in values; the quantity the counting oracle and
    /// the evolution analyzer track.
    pub fn total_size(&self) -> usize {
        self.domains.iter().map(Domain::len).sum()
    }
}
