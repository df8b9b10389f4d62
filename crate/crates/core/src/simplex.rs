//! Domain types for points of the standard simplex and the scalar quantities
//! derived from them: the mean field `r`, the squared norm `L` and the
//! favorability-weighted interaction `L_c`.
//!
//! Indices are 0-based in this crate. Serialized forms of index sets are
//! 1-based; the conversion happens in the `Serialize`/`Deserialize` impls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum - 1|` that a constructed state always satisfies.
pub const SUM_TOLERANCE: f64 = 1e-12;
/// Inputs whose sum deviates from 1 by at most this much are renormalized;
/// anything worse is rejected.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-9;
/// Threshold used by the explicit snap operation.
pub const SNAP_THRESHOLD: f64 = 1e-15;

/// A stochastic vector: nonnegative coordinates summing to one, `n >= 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexState {
    p: Vec<f64>,
}

impl SimplexState {
    /// Validates `p`. Sums within [`SUM_TOLERANCE`] of one are accepted as
    /// given; sums within [`RENORMALIZE_TOLERANCE`] are renormalized.
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.len() < 2 {
            return Err(Error::Dimension(format!(
                "a simplex state needs n >= 2 coordinates, got {}",
                p.len()
            )));
        }
        if let Some((i, x)) = p.iter().enumerate().find(|(_, x)| !x.is_finite()) {
            return Err(Error::InvalidState(format!(
                "coordinate {} is not finite ({x})",
                i + 1
            )));
        }
        if let Some((i, x)) = p.iter().enumerate().find(|(_, x)| **x < 0.0) {
            return Err(Error::InvalidState(format!(
                "coordinate {} is negative ({x})",
                i + 1
            )));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > RENORMALIZE_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "coordinates sum to {sum}, expected 1"
            )));
        }
        let p = if (sum - 1.0).abs() <= SUM_TOLERANCE {
            p
        } else {
            p.into_iter().map(|x| x / sum).collect()
        };
        Ok(Self { p })
    }

    /// The barycenter `(1/n, ..., 1/n)`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!("n must be >= 2, got {n}")));
        }
        Ok(Self {
            p: vec![1.0 / n as f64; n],
        })
    }

    /// The vertex `e_i` (0-based).
    pub fn vertex(n: usize, i: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!("n must be >= 2, got {n}")));
        }
        if i >= n {
            return Err(Error::InvalidParameter(format!(
                "vertex index {} out of range 1..={n}",
                i + 1
            )));
        }
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        Ok(Self { p })
    }

    /// Builds a state from weights that are already known to be nonnegative,
    /// finite and to have a positive sum. Used by the step maps.
    pub(crate) fn from_weights(w: Vec<f64>) -> Self {
        let total: f64 = w.iter().sum();
        debug_assert!(total > 0.0 && total.is_finite());
        Self {
            p: w.into_iter().map(|x| x / total).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }

    pub fn get(&self, i: usize) -> f64 {
        self.p[i]
    }

    /// 0-based indices of the strictly positive coordinates.
    pub fn support(&self) -> ActiveSet {
        ActiveSet::from_sorted(
            self.p
                .iter()
                .enumerate()
                .filter(|(_, x)| **x > 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    /// Number of coordinates that are exactly zero (`m` in the uniform-limit formulas).
    pub fn zero_count(&self) -> usize {
        self.p.iter().filter(|x| **x == 0.0).count()
    }

    pub fn is_vertex(&self) -> bool {
        self.p.iter().filter(|x| **x > 0.0).count() == 1
    }

    /// Zeroes every coordinate below [`SNAP_THRESHOLD`] and renormalizes.
    /// Never called implicitly.
    pub fn snapped(&self) -> Self {
        if !self.p.iter().any(|x| *x > 0.0 && *x < SNAP_THRESHOLD) {
            return self.clone();
        }
        let w: Vec<f64> = self
            .p
            .iter()
            .map(|x| if *x < SNAP_THRESHOLD { 0.0 } else { *x })
            .collect();
        Self::from_weights(w)
    }

    /// `max_i |p_i - q_i|`.
    pub fn distance_inf(&self, other: &SimplexState) -> f64 {
        inf_distance(&self.p, &other.p)
    }
}

impl TryFrom<Vec<f64>> for SimplexState {
    type Error = Error;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        Self::new(p)
    }
}

impl From<SimplexState> for Vec<f64> {
    fn from(s: SimplexState) -> Self {
        s.p
    }
}

pub(crate) fn inf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// The mean field `r_i = (1 - p_i)/(n - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeanField {
    r: Vec<f64>,
}

impl MeanField {
    pub fn as_slice(&self) -> &[f64] {
        &self.r
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.r
    }
}

/// How strictly [`Favorability`] validates its upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FavorabilityMode {
    /// `0 < c_i <= 1`.
    Strict,
    /// Any finite `c_i > 0`.
    #[default]
    Permissive,
}

/// Per-component attraction constants `c_i > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Favorability {
    c: Vec<f64>,
}

impl Favorability {
    /// Permissive construction: every entry finite and strictly positive.
    pub fn new(c: Vec<f64>) -> Result<Self> {
        Self::with_mode(c, FavorabilityMode::Permissive)
    }

    /// Strict construction: additionally requires `c_i <= 1`.
    pub fn strict(c: Vec<f64>) -> Result<Self> {
        Self::with_mode(c, FavorabilityMode::Strict)
    }

    pub fn with_mode(c: Vec<f64>, mode: FavorabilityMode) -> Result<Self> {
        if c.len() < 2 {
            return Err(Error::Dimension(format!(
                "favorability needs n >= 2 entries, got {}",
                c.len()
            )));
        }
        for (i, x) in c.iter().enumerate() {
            if !x.is_finite() || *x <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "c_{} = {x} must be finite and positive",
                    i + 1
                )));
            }
            if mode == FavorabilityMode::Strict && *x > 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "c_{} = {x} exceeds 1 (strict mode)",
                    i + 1
                )));
            }
        }
        Ok(Self { c })
    }

    pub fn uniform(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }

    pub fn get(&self, i: usize) -> f64 {
        self.c[i]
    }

    /// Copy with entry `i` replaced.
    pub fn with_entry(&self, i: usize, value: f64) -> Result<Self> {
        let mut c = self.c.clone();
        c[i] = value;
        Self::new(c)
    }
}

impl TryFrom<Vec<f64>> for Favorability {
    type Error = Error;

    fn try_from(c: Vec<f64>) -> Result<Self> {
        Self::new(c)
    }
}

impl From<Favorability> for Vec<f64> {
    fn from(f: Favorability) -> Self {
        f.c
    }
}

/// Sorted set of 0-based component indices. Serialized 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ActiveSet {
    indices: Vec<usize>,
}

impl ActiveSet {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    /// Cardinality `gamma`.
    pub fn gamma(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    /// Indices of `0..n` not in the set.
    pub fn complement(&self, n: usize) -> ActiveSet {
        ActiveSet::from_sorted((0..n).filter(|i| !self.contains(*i)).collect())
    }

    /// 1-based indices, for display and I/O.
    pub fn one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }
}

impl std::fmt::Display for ActiveSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.indices.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for ActiveSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ActiveSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<usize>::deserialize(d)?;
        if raw.contains(&0) {
            return Err(serde::de::Error::custom("indices are 1-based"));
        }
        Ok(ActiveSet::new(raw.into_iter().map(|i| i - 1).collect()))
    }
}

/// The mean field of `p`: `r_i = (1 - p_i)/(n - 1)`.
pub fn mean_field(p: &SimplexState) -> MeanField {
    let denom = (p.dim() - 1) as f64;
    MeanField {
        r: p.as_slice().iter().map(|x| (1.0 - x) / denom).collect(),
    }
}

/// `L = sum p_i^2`.
pub fn l2_sq(p: &SimplexState) -> f64 {
    p.as_slice().iter().map(|x| x * x).sum()
}

/// `L_c = sum c_i p_i (1 - p_i)`.
pub fn weighted_interaction(p: &SimplexState, c: &Favorability) -> Result<f64> {
    check_dims(p.dim(), c.dim())?;
    Ok(weighted_interaction_raw(p.as_slice(), c.as_slice()))
}

pub(crate) fn weighted_interaction_raw(p: &[f64], c: &[f64]) -> f64 {
    p.iter().zip(c).map(|(x, ci)| ci * x * (1.0 - x)).sum()
}

pub(crate) fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
