//! Joint (single, triangle) degree laws and their size-biased variants.
//!
//! A node with joint degree `(k_s, k_delta)` carries `k_s` single half-edges
//! and `k_delta` pairs of triangle half-edges, so its total degree in the
//! generated graph is `k_s + 2 * k_delta`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Masses may deviate from a total of one by at most this much; they are
/// renormalized when accepted.
pub const PMF_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct JointDegree {
    pub k_s: u32,
    pub k_delta: u32,
}

impl JointDegree {
    pub const fn new(k_s: u32, k_delta: u32) -> Self {
        Self { k_s, k_delta }
    }

    /// Number of graph neighbours before erasure.
    pub fn total(&self) -> u32 {
        self.k_s + 2 * self.k_delta
    }
}

impl fmt::Display for JointDegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k_s, self.k_delta)
    }
}

/// Which half-edge family a size-biasing or downshift refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Single,
    Triangle,
}

/// A finite-support pmf over joint degrees. Every stored mass is strictly
/// positive and the masses sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    atoms: BTreeMap<JointDegree, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `P(max(Δ, S) ≥ 2) > 0` and `E(ΔS) > 0`: the mean matrices are
    /// positively regular when additionally `0 < E(T) < 1`.
    pub a2_holds: bool,
    pub has_single: bool,
    pub has_triangle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeMoments {
    pub mean_s: f64,
    pub mean_delta: f64,
    pub mean_s2: f64,
    pub mean_delta2: f64,
    pub mean_s_delta: f64,
}

/// Means of the downshifted size-biased laws. A branch whose normaliser
/// (`E(S)` or `E(Δ)`) vanishes is `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DownshiftedMeans {
    /// `E(S_•^(s)) = E(S²)/E(S) − 1`
    pub s_given_s: Option<f64>,
    /// `E(Δ_•^(s)) = E(SΔ)/E(S)`
    pub delta_given_s: Option<f64>,
    /// `E(S_•^(Δ)) = E(SΔ)/E(Δ)`
    pub s_given_delta: Option<f64>,
    /// `E(Δ_•^(Δ)) = E(Δ²)/E(Δ) − 1`
    pub delta_given_delta: Option<f64>,
}

impl DegreeDistribution {
    /// Builds a pmf from `(degree, mass)` records. Duplicate degrees are
    /// merged and zero masses dropped. The total must lie within
    /// [`PMF_SUM_TOLERANCE`] of one.
    pub fn new<I>(records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (JointDegree, f64)>,
    {
        let mut atoms: BTreeMap<JointDegree, f64> = BTreeMap::new();
        for (degree, mass) in records {
            if !mass.is_finite() || mass < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "mass {mass} at degree {degree} is not a nonnegative number"
                )));
            }
            if mass > 0.0 {
                *atoms.entry(degree).or_insert(0.0) += mass;
            }
        }
        let total: f64 = atoms.values().sum();
        if atoms.is_empty() || (total - 1.0).abs() > PMF_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        for mass in atoms.values_mut() {
            *mass /= total;
        }
        Ok(Self { atoms })
    }

    /// Convenience constructor from `(k_s, k_delta, mass)` triples.
    pub fn from_triples(records: &[(u32, u32, f64)]) -> Result<Self> {
        Self::new(
            records
                .iter()
                .map(|&(k_s, k_delta, p)| (JointDegree::new(k_s, k_delta), p)),
        )
    }

    /// Point mass at a single joint degree.
    pub fn degenerate(k_s: u32, k_delta: u32) -> Self {
        let mut atoms = BTreeMap::new();
        atoms.insert(JointDegree::new(k_s, k_delta), 1.0);
        Self { atoms }
    }

    pub fn iter(&self) -> impl Iterator<Item = (JointDegree, f64)> + '_ {
        self.atoms.iter().map(|(&d, &p)| (d, p))
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self, degree: JointDegree) -> f64 {
        self.atoms.get(&degree).copied().unwrap_or(0.0)
    }

    /// `E(g(S, Δ))`.
    pub fn expect<F: Fn(JointDegree) -> f64>(&self, g: F) -> f64 {
        self.atoms.iter().map(|(&d, &p)| p * g(d)).sum()
    }

    pub fn max_single(&self) -> u32 {
        self.atoms.keys().map(|d| d.k_s).max().unwrap_or(0)
    }

    pub fn max_triangle(&self) -> u32 {
        self.atoms.keys().map(|d| d.k_delta).max().unwrap_or(0)
    }

    pub fn max_total_degree(&self) -> u32 {
        self.atoms.keys().map(JointDegree::total).max().unwrap_or(0)
    }

    pub fn validate(&self) -> ValidationReport {
        let m = self.moments();
        let big = self.atoms.keys().any(|d| d.k_s.max(d.k_delta) >= 2);
        ValidationReport {
            a2_holds: big && m.mean_s_delta > 0.0,
            has_single: m.mean_s > 0.0,
            has_triangle: m.mean_delta > 0.0,
        }
    }

    pub fn moments(&self) -> DegreeMoments {
        let mut m = DegreeMoments {
            mean_s: 0.0,
            mean_delta: 0.0,
            mean_s2: 0.0,
            mean_delta2: 0.0,
            mean_s_delta: 0.0,
        };
        for (d, p) in self.iter() {
            let s = f64::from(d.k_s);
            let t = f64::from(d.k_delta);
            m.mean_s += p * s;
            m.mean_delta += p * t;
            m.mean_s2 += p * s * s;
            m.mean_delta2 += p * t * t;
            m.mean_s_delta += p * s * t;
        }
        m
    }

    /// Law of a node reached along a uniformly chosen half-edge of `kind`.
    pub fn size_biased(&self, kind: EdgeKind) -> Result<Self> {
        let weight = |d: JointDegree| match kind {
            EdgeKind::Single => f64::from(d.k_s),
            EdgeKind::Triangle => f64::from(d.k_delta),
        };
        let norm = self.expect(weight);
        if norm <= 0.0 {
            return Err(Error::Domain(format!(
                "cannot size-bias by {kind:?} degree: its mean is zero"
            )));
        }
        let atoms = self
            .iter()
            .filter_map(|(d, p)| {
                let w = weight(d) * p / norm;
                (w > 0.0).then_some((d, w))
            })
            .collect();
        Ok(Self { atoms })
    }

    /// Removes the half-edge (or triangle membership) used to reach the node.
    pub fn downshift(&self, kind: EdgeKind) -> Result<Self> {
        let mut atoms = BTreeMap::new();
        for (d, p) in self.iter() {
            let shifted = match kind {
                EdgeKind::Single if d.k_s >= 1 => JointDegree::new(d.k_s - 1, d.k_delta),
                EdgeKind::Triangle if d.k_delta >= 1 => JointDegree::new(d.k_s, d.k_delta - 1),
                _ => {
                    return Err(Error::Domain(format!(
                        "atom {d} has no {kind:?} half-edge to remove"
                    )))
                }
            };
            atoms.insert(shifted, p);
        }
        Ok(Self { atoms })
    }

    /// `downshift(size_biased(kind))`, or `None` when that branch is absent.
    pub fn downshifted(&self, kind: EdgeKind) -> Option<Self> {
        let biased = self.size_biased(kind).ok()?;
        Some(
            biased
                .downshift(kind)
                .expect("size-biased atoms always carry the biased half-edge"),
        )
    }

    pub fn downshifted_means(&self) -> DownshiftedMeans {
        let m = self.moments();
        let (s_given_s, delta_given_s) = if m.mean_s > 0.0 {
            (
                Some(m.mean_s2 / m.mean_s - 1.0),
                Some(m.mean_s_delta / m.mean_s),
            )
        } else {
            (None, None)
        };
        let (s_given_delta, delta_given_delta) = if m.mean_delta > 0.0 {
            (
                Some(m.mean_s_delta / m.mean_delta),
                Some(m.mean_delta2 / m.mean_delta - 1.0),
            )
        } else {
            (None, None)
        };
        DownshiftedMeans {
            s_given_s,
            delta_given_s,
            s_given_delta,
            delta_given_delta,
        }
    }
}
