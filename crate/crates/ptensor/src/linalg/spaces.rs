//! Labels for tensor factors of multi-leg operators.
//!
//! Every multi-leg operator carries an ordered list of [`SpaceLabel`]s, one
//! per tensor factor, recording which timestep the factor belongs to, whether
//! it is an input leg (state fed out of the process, available for
//! measurement), an output leg (state fed back in, available for
//! preparation), or an ancillary leg (process-owned register fed out once).
//!
//! Fine-grained temporal order of legs: within a timestep the input leg comes
//! first (the experimenter receives before they send), ancillary legs sit
//! between input and output. The canonical storage order is latest-first:
//! n^i, n−1^o, n−1^i, …, 1^o, 1^i.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leg {
    Input,
    Ancillary,
    Output,
}

impl Leg {
    /// Rank inside a timestep for fine-grained temporal ordering.
    fn rank(self) -> u8 {
        match self {
            Leg::Input => 0,
            Leg::Ancillary => 1,
            Leg::Output => 2,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct SpaceLabel {
    pub timestep: u32,
    pub leg: Leg,
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tag: Option<String>,
}

impl SpaceLabel {
    pub fn input(timestep: u32, dim: usize) -> Self {
        Self { timestep, leg: Leg::Input, dim, tag: None }
    }

    pub fn output(timestep: u32, dim: usize) -> Self {
        Self { timestep, leg: Leg::Output, dim, tag: None }
    }

    pub fn ancillary(timestep: u32, dim: usize, tag: &str) -> Self {
        Self { timestep, leg: Leg::Ancillary, dim, tag: Some(tag.to_string()) }
    }

    /// Identity of a leg: (timestep, leg kind, tag). The dimension is a
    /// property, not part of the identity.
    pub fn key(&self) -> (u32, Leg, Option<&str>) {
        (self.timestep, self.leg, self.tag.as_deref())
    }

    /// Fine-grained temporal sort key (ascending time).
    pub fn temporal_key(&self) -> (u32, u8, Option<&str>) {
        (self.timestep, self.leg.rank(), self.tag.as_deref())
    }
}

impl std::fmt::Display for SpaceLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let leg = match self.leg {
            Leg::Input => "i",
            Leg::Output => "o",
            Leg::Ancillary => "a",
        };
        match &self.tag {
            Some(t) => write!(f, "{}^{}[{}]({})", self.timestep, leg, t, self.dim),
            None => write!(f, "{}^{}({})", self.timestep, leg, self.dim),
        }
    }
}

/// Ordered list of space labels attached to a multi-leg operator. The i-th
/// label describes the i-th Kronecker factor (leftmost factor first).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct SpaceList {
    labels: Vec<SpaceLabel>,
}

impl SpaceList {
    pub fn new(labels: Vec<SpaceLabel>) -> Result<Self> {
        let list = Self { labels };
        list.check_unique()?;
        Ok(list)
    }

    pub fn empty() -> Self {
        Self { labels: Vec::new() }
    }

    fn check_unique(&self) -> Result<()> {
        for (i, a) in self.labels.iter().enumerate() {
            for b in &self.labels[i + 1..] {
                if a.key() == b.key() {
                    return Err(Error::DimMismatch(format!(
                        "duplicate space label {a}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn labels(&self) -> &[SpaceLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.labels.iter().map(|l| l.dim).product()
    }

    pub fn index_of(&self, label: &SpaceLabel) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l.key() == label.key())
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn contains(&self, label: &SpaceLabel) -> bool {
        self.labels.iter().any(|l| l.key() == label.key())
    }

    /// Labels sorted by descending fine-grained time: the canonical order
    /// n^i, n−1^o, n−1^i, …, 1^o, 1^i (ancillaries just above their
    /// timestep's input leg).
    pub fn canonical(&self) -> Vec<SpaceLabel> {
        let mut v = self.labels.clone();
        v.sort_by(|a, b| {
            b.temporal_key()
                .cmp(&a.temporal_key())
        });
        v
    }

    pub fn is_canonical(&self) -> bool {
        self.labels == self.canonical()
    }

    /// Labels sorted by ascending fine-grained time.
    pub fn time_ordered(&self) -> Vec<SpaceLabel> {
        let mut v = self.labels.clone();
        v.sort_by(|a, b| a.temporal_key().cmp(&b.temporal_key()));
        v
    }

    pub fn max_timestep(&self) -> u32 {
        self.labels.iter().map(|l| l.timestep).max().unwrap_or(0)
    }

    /// All labels at a given timestep with the given leg kind.
    pub fn at(&self, timestep: u32, leg: Leg) -> Vec<SpaceLabel> {
        self.labels
            .iter()
            .filter(|l| l.timestep == timestep && l.leg == leg)
            .cloned()
            .collect()
    }

    /// Product of output-leg dimensions; the trace any valid process tensor
    /// over these legs must carry.
    pub fn output_dim_product(&self) -> f64 {
        self.labels
            .iter()
            .filter(|l| l.leg == Leg::Output)
            .map(|l| l.dim as f64)
            .product()
    }

    /// True when `subset` forms a contiguous run of the full list in
    /// fine-grained temporal order.
    pub fn is_contiguous(&self, subset: &[SpaceLabel]) -> bool {
        if subset.is_empty() {
            return true;
        }
        let ordered = self.time_ordered();
        let mut hit: Vec<bool> = ordered
            .iter()
            .map(|l| subset.iter().any(|s| s.key() == l.key()))
            .collect();
        // strip leading/trailing misses, then no gaps allowed
        while hit.first() == Some(&false) {
            hit.remove(0);
        }
        while hit.last() == Some(&false) {
            hit.pop();
        }
        hit.len() == subset.len() && hit.iter().all(|&h| h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_is_latest_first() {
        let list = SpaceList::new(vec![
            SpaceLabel::input(1, 2),
            SpaceLabel::output(1, 2),
            SpaceLabel::input(2, 2),
            SpaceLabel::ancillary(2, 4, "A"),
        ])
        .unwrap();
        let canon = list.canonical();
        assert_eq!(canon[0], SpaceLabel::ancillary(2, 4, "A"));
        assert_eq!(canon[1], SpaceLabel::input(2, 2));
        assert_eq!(canon[2], SpaceLabel::output(1, 2));
        assert_eq!(canon[3], SpaceLabel::input(1, 2));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let r = SpaceList::new(vec![SpaceLabel::input(1, 2), SpaceLabel::input(1, 3)]);
        assert!(r.is_err());
    }

    #[test]
    fn contiguity() {
        let list = SpaceList::new(vec![
            SpaceLabel::input(3, 2),
            SpaceLabel::output(2, 2),
            SpaceLabel::input(2, 2),
            SpaceLabel::output(1, 2),
            SpaceLabel::input(1, 2),
        ])
        .unwrap();
        assert!(list.is_contiguous(&[SpaceLabel::input(2, 2), SpaceLabel::output(2, 2)]));
        assert!(!list.is_contiguous(&[SpaceLabel::input(1, 2), SpaceLabel::input(2, 2)]));
    }
}
