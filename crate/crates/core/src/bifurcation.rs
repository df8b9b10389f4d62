//! Transcritical thresholds and parameter-space scans.
//!
//! A component `i` is switched off exactly when `c_i` drops to
//! `Lambda` of the remaining active components. Everything here is computed
//! from the analytic fixed point; no trajectories are simulated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::Map;
use crate::equilibrium::{find_fixed_point, THRESHOLD_GUARD};
use crate::error::{Error, Result};
use crate::simplex::{ActiveSet, Favorability, SimplexState};
use crate::stability::{classify, Verdict};

/// Width of the bracket a detected threshold is bisected down to.
pub const BISECTION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub value: f64,
    /// Whether every other parameter exceeds `value`, i.e. the remaining
    /// components are all positive at the threshold. The value is returned
    /// either way.
    pub precondition_ok: bool,
}

/// Threshold `(n - 2) / sum_j 1/c_j` for one parameter, given the other
/// `n - 1` parameters.
pub fn critical_value(c_others: &[f64]) -> Result<CriticalValue> {
    if c_others.len() < 2 {
        return Err(Error::Dimension(format!(
            "need n >= 3 (at least two other parameters), got {}",
            c_others.len()
        )));
    }
    if let Some(x) = c_others.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::InvalidParameter(format!("parameter {x} must be positive")));
    }
    let value = (c_others.len() - 1) as f64 / c_others.iter().map(|x| 1.0 / x).sum::<f64>();
    Ok(CriticalValue {
        value,
        precondition_ok: c_others.iter().all(|x| *x > value),
    })
}

/// [`critical_value`] for entry `i` of a full parameter vector (the current
/// value of `c_i` is ignored).
pub fn critical_value_at(c: &Favorability, i: usize) -> Result<CriticalValue> {
    let others: Vec<f64> = c
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != i)
        .map(|(_, x)| *x)
        .collect();
    critical_value(&others)
}

/// Which coordinates of the limit state vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub zero_set: ActiveSet,
    pub description: String,
    /// The parameters lie within the threshold guard of a region boundary;
    /// the label is the zero side.
    #[serde(default)]
    pub critical: bool,
}

impl RegionLabel {
    fn new(zero_set: ActiveSet, n: usize, critical: bool) -> Self {
        let description = if zero_set.is_empty() {
            "interior: all components positive".to_string()
        } else {
            format!(
                "p_i = 0 for i in {}; {} of {} components positive",
                zero_set,
                n - zero_set.gamma(),
                n
            )
        };
        Self {
            zero_set,
            description,
            critical,
        }
    }
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= THRESHOLD_GUARD * a.abs().max(b.abs())
}

/// Two-parameter classification for `c = (c1, c2, c_rest...)`, `n >= 4`.
///
/// The tail must satisfy `c_k > (n - 3) / sum_rest 1/c_j` and must stay
/// above `Lambda` of the predicted active set; otherwise an error is returned
/// and [`classify_codimk`] applies.
pub fn classify_codim2(c1: f64, c2: f64, c_rest: &[f64]) -> Result<RegionLabel> {
    let n = c_rest.len() + 2;
    if n < 4 {
        return Err(Error::Dimension(format!("need n >= 4, got {n}")));
    }
    for x in [c1, c2].iter().chain(c_rest) {
        if !(x.is_finite() && *x > 0.0) {
            return Err(Error::InvalidParameter(format!("parameter {x} must be positive")));
        }
    }
    let rest_inv: f64 = c_rest.iter().map(|x| 1.0 / x).sum();
    let h = (n - 3) as f64 / rest_inv;
    if let Some(x) = c_rest.iter().find(|x| **x <= h) {
        return Err(Error::InvalidParameter(format!(
            "fixed parameter {x} does not exceed (n-3)/sum 1/c_j = {h}"
        )));
    }
    let g1 = (n - 2) as f64 / (1.0 / c2 + rest_inv);
    let g2 = (n - 2) as f64 / (1.0 / c1 + rest_inv);

    let (zero, critical) = if c1 > g1 && c2 > g2 {
        (vec![], near(c1, g1) || near(c2, g2))
    } else if c1 <= h && c2 <= h {
        (vec![0, 1], near(c1, h) || near(c2, h))
    } else if c1 <= g1 && c2 > h {
        (vec![0], near(c1, g1) || near(c2, h))
    } else {
        (vec![1], near(c2, g2) || near(c1, h))
    };
    // The fixed tail must also survive against the predicted active set;
    // the tail condition above alone does not guarantee it.
    let mut inv = rest_inv;
    let mut active = n - 2;
    for (k, ck) in [c1, c2].iter().enumerate() {
        if !zero.contains(&k) {
            inv += 1.0 / ck;
            active += 1;
        }
    }
    let lambda = (active - 1) as f64 / inv;
    if let Some(x) = c_rest.iter().find(|x| **x <= lambda) {
        return Err(Error::InvalidParameter(format!(
            "fixed parameter {x} does not exceed the threshold {lambda} of the predicted active set"
        )));
    }
    Ok(RegionLabel::new(ActiveSet::new(zero), n, critical))
}

/// General classification through the analytic fixed point from the
/// barycenter.
pub fn classify_codimk(c: &Favorability) -> Result<RegionLabel> {
    let fp = find_fixed_point(&SimplexState::uniform(c.dim())?, c)?;
    Ok(RegionLabel::new(fp.zero_set(), c.dim(), fp.is_critical()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSample1D {
    pub c_value: f64,
    pub p_inf: SimplexState,
    pub zero_set: ActiveSet,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult1D {
    /// 0-based; 1-based when serialized.
    #[serde(with = "one_based_index")]
    pub parameter_index: usize,
    pub samples: Vec<ScanSample1D>,
    pub critical_values: Vec<f64>,
}

/// Evenly spaced `steps` values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|k| {
            if k + 1 == steps {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn check_range(lo: f64, hi: f64, steps: usize) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo < hi) {
        return Err(Error::InvalidParameter(format!(
            "range must satisfy 0 < lo < hi, got {lo}..{hi}"
        )));
    }
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 steps, got {steps}")));
    }
    Ok(())
}

fn zero_set_at(c_base: &Favorability, i: usize, value: f64) -> Result<ActiveSet> {
    let c = c_base.with_entry(i, value)?;
    Ok(find_fixed_point(&SimplexState::uniform(c.dim())?, &c)?.zero_set())
}

fn refine(c_base: &Favorability, i: usize, mut lo: f64, mut hi: f64) -> Result<f64> {
    let left = zero_set_at(c_base, i, lo)?;
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if zero_set_at(c_base, i, mid)? == left {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Sweeps `c_i` over `[lo, hi]`, recording the limit state and its verdict,
/// and bisects every change of the zero set between neighbouring samples.
pub fn scan_1d(i: usize, lo: f64, hi: f64, steps: usize, c_base: &Favorability) -> Result<ScanResult1D> {
    check_range(lo, hi, steps)?;
    if i >= c_base.dim() {
        return Err(Error::InvalidParameter(format!(
            "parameter index {} out of range 1..={}",
            i + 1,
            c_base.dim()
        )));
    }
    let p0 = SimplexState::uniform(c_base.dim())?;
    let samples = linspace(lo, hi, steps)
        .into_par_iter()
        .map(|value| {
            let c = c_base.with_entry(i, value)?;
            let fp = find_fixed_point(&p0, &c)?;
            let verdict = classify(&fp, &Map::Heterogeneous(c))?.verdict;
            Ok(ScanSample1D {
                c_value: value,
                zero_set: fp.zero_set(),
                p_inf: fp.p_inf,
                verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let critical_values = samples
        .windows(2)
        .filter(|w| w[0].zero_set != w[1].zero_set)
        .map(|w| refine(c_base, i, w[0].c_value, w[1].c_value))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult1D {
        parameter_index: i,
        samples,
        critical_values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.steps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub name: String,
    /// Points `(c_i, c_j)`.
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult2D {
    /// Varied parameters (0-based; 1-based when serialized).
    #[serde(with = "one_based_pair")]
    pub indices: (usize, usize),
    pub values_i: Vec<f64>,
    pub values_j: Vec<f64>,
    /// `labels[a][b]` is the region at `(values_i[a], values_j[b])`.
    pub labels: Vec<Vec<RegionLabel>>,
    /// Analytic region boundaries clipped to the grid.
    pub curves: Vec<Curve>,
}

impl ScanResult2D {
    /// Distinct zero sets present in the grid, in first-seen order.
    pub fn distinct_labels(&self) -> Vec<ActiveSet> {
        let mut seen: Vec<ActiveSet> = Vec::new();
        for label in self.labels.iter().flatten() {
            if !seen.contains(&label.zero_set) {
                seen.push(label.zero_set.clone());
            }
        }
        seen
    }
}

/// Labels every cell of the `(c_i, c_j)` grid. Uses the two-parameter
/// classifier when its preconditions hold and the general one otherwise.
pub fn scan_2d(
    i: usize,
    j: usize,
    axis_i: GridAxis,
    axis_j: GridAxis,
    c_base: &Favorability,
) -> Result<ScanResult2D> {
    let n = c_base.dim();
    if i >= n || j >= n || i == j {
        return Err(Error::InvalidParameter(format!(
            "need two distinct parameter indices in 1..={n}, got {} and {}",
            i + 1,
            j + 1
        )));
    }
    check_range(axis_i.lo, axis_i.hi, axis_i.steps)?;
    check_range(axis_j.lo, axis_j.hi, axis_j.steps)?;
    let rest: Vec<f64> = (0..n)
        .filter(|k| *k != i && *k != j)
        .map(|k| c_base.get(k))
        .collect();
    let values_i = axis_i.values();
    let values_j = axis_j.values();

    let labels = values_i
        .par_iter()
        .map(|&ci| {
            values_j
                .iter()
                .map(|&cj| match classify_codim2(ci, cj, &rest) {
                    Ok(label) => {
                        let zero = label
                            .zero_set
                            .iter()
                            .map(|k| if k == 0 { i } else { j })
                            .collect();
                        Ok(RegionLabel::new(ActiveSet::new(zero), n, label.critical))
                    }
                    Err(_) => {
                        let mut c = c_base.with_entry(i, ci)?;
                        c = c.with_entry(j, cj)?;
                        classify_codimk(&c)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let curves = if n >= 4 {
        boundary_curves(&rest, axis_i, axis_j)
    } else {
        Vec::new()
    };
    Ok(ScanResult2D {
        indices: (i, j),
        values_i,
        values_j,
        labels,
        curves,
    })
}

/// `Gamma_1: c_i (1/c_j + R) = n - 2`, `Gamma_2: c_j (1/c_i + R) = n - 2` and
/// the two segments `c = (n - 3)/R` bounding the region where both vanish.
fn boundary_curves(rest: &[f64], ai: GridAxis, aj: GridAxis) -> Vec<Curve> {
    const SAMPLES: usize = 400;
    let n = rest.len() + 2;
    let r: f64 = rest.iter().map(|x| 1.0 / x).sum();
    let h = (n - 3) as f64 / r;
    let in_i = |x: f64| x >= ai.lo && x <= ai.hi;
    let in_j = |y: f64| y >= aj.lo && y <= aj.hi;

    let gamma1 = linspace(aj.lo, aj.hi, SAMPLES)
        .into_iter()
        .filter(|cj| *cj >= h)
        .map(|cj| [(n - 2) as f64 / (1.0 / cj + r), cj])
        .filter(|[x, _]| in_i(*x))
        .collect();
    let gamma2 = linspace(ai.lo, ai.hi, SAMPLES)
        .into_iter()
        .filter(|ci| *ci >= h)
        .map(|ci| [ci, (n - 2) as f64 / (1.0 / ci + r)])
        .filter(|[_, y]| in_j(*y))
        .collect();
    let mut curves = vec![
        Curve {
            name: "gamma_1".into(),
            points: gamma1,
        },
        Curve {
            name: "gamma_2".into(),
            points: gamma2,
        },
    ];
    if in_i(h) || in_j(h) {
        curves.push(Curve {
            name: "codim2_i".into(),
            points: vec![[h, aj.lo.min(h)], [h, h]]
                .into_iter()
                .filter(|[x, y]| in_i(*x) && in_j(*y))
                .collect(),
        });
        curves.push(Curve {
            name: "codim2_j".into(),
            points: vec![[ai.lo.min(h), h], [h, h]]
                .into_iter()
                .filter(|[x, y]| in_i(*x) && in_j(*y))
                .collect(),
        });
    }
    curves
}

mod one_based_index {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(i: &usize, s: S) -> Result<S::Ok, S::Error> {
        (i + 1).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        let i = usize::deserialize(d)?;
        i.checked_sub(1)
            .ok_or_else(|| serde::de::Error::custom("indices are 1-based"))
    }
}

mod one_based_pair {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &(usize, usize), s: S) -> Result<S::Ok, S::Error> {
        [p.0 + 1, p.1 + 1].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(usize, usize), D::Error> {
        let [a, b] = <[usize; 2]>::deserialize(d)?;
        match (a.checked_sub(1), b.checked_sub(1)) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(serde::de::Error::custom("indices are 1-based")),
        }
    }
}
