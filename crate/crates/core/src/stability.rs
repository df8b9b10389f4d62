//! Linear stability of fixed points.
//!
//! The Jacobian of either map has the all-ones vector as a left eigenvector
//! on the simplex, so the tangent space `{d : sum d = 0}` is invariant. The
//! tangential spectrum is computed exactly on that subspace: in the basis
//! `e_a - e_last` the restriction has entries `J_ab - J_a,last`. The leftover
//! normal-mode eigenvalue (the common column sum) is reported separately.
//!
//! Perturbations that re-activate a zero coordinate `i` grow or decay with
//! the diagonal entry `J_ii` (the transversal value).

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::Map;
use crate::equilibrium::FixedPointReport;
use crate::error::{Error, Result};
use crate::linalg::{spectrum, DenseMatrix};
use crate::simplex::{check_dims, l2_sq, weighted_interaction_raw, Favorability, SimplexState};

/// Largest residual accepted by [`classify`].
pub const FIXED_POINT_RESIDUAL: f64 = 1e-8;
/// Distance from one inside which an eigenvalue is reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-9;

/// Jacobian of the heterogeneous map at `p`.
pub fn jacobian(p: &SimplexState, c: &Favorability) -> Result<DenseMatrix> {
    check_dims(p.dim(), c.dim())?;
    let (pv, cv) = (p.as_slice(), c.as_slice());
    let nm1 = (p.dim() - 1) as f64;
    let d = nm1 + weighted_interaction_raw(pv, cv);
    let d2 = d * d;
    let k: Vec<f64> = pv.iter().zip(cv).map(|(x, ci)| nm1 + ci * (1.0 - x)).collect();
    Ok(DenseMatrix::from_fn(p.dim(), |i, j| {
        if i == j {
            k[i] / d + pv[i] * (-cv[i] * d - cv[i] * (1.0 - 2.0 * pv[i]) * k[i]) / d2
        } else {
            -pv[i] * k[i] * cv[j] * (1.0 - 2.0 * pv[j]) / d2
        }
    }))
}

/// Jacobian of the uniform map at `p`.
pub fn jacobian_uniform(p: &SimplexState) -> DenseMatrix {
    let pv = p.as_slice();
    let n = p.dim() as f64;
    let d = n - l2_sq(p);
    let d2 = d * d;
    DenseMatrix::from_fn(p.dim(), |i, k| {
        if i == k {
            (n - pv[i]) / d + pv[i] * (-d + 2.0 * pv[i] * (n - pv[i])) / d2
        } else {
            pv[i] * (n - pv[i]) * 2.0 * pv[k] / d2
        }
    })
}

pub fn jacobian_for(map: &Map, p: &SimplexState) -> Result<DenseMatrix> {
    match map {
        Map::Uniform => Ok(jacobian_uniform(p)),
        Map::Heterogeneous(c) => jacobian(p, c),
    }
}

/// Growth factor of a perturbation of the zero coordinate `i` (0-based):
/// the diagonal Jacobian entry `J_ii` at `p`.
pub fn normal_eigenvalue(p: &SimplexState, map: &Map, i: usize) -> Result<f64> {
    if i >= p.dim() {
        return Err(Error::InvalidParameter(format!(
            "index {} out of range 1..={}",
            i + 1,
            p.dim()
        )));
    }
    if p.get(i) != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "coordinate {} is {} but must be zero",
            i + 1,
            p.get(i)
        )));
    }
    match map {
        Map::Uniform => {
            let n = p.dim() as f64;
            Ok(n / (n - l2_sq(p)))
        }
        Map::Heterogeneous(c) => {
            check_dims(p.dim(), c.dim())?;
            let nm1 = (p.dim() - 1) as f64;
            Ok((nm1 + c.get(i)) / (nm1 + weighted_interaction_raw(p.as_slice(), c.as_slice())))
        }
    }
}

/// Eigenvalues of `j` restricted to `{d : sum d = 0}`, assuming that subspace
/// is invariant (true for Jacobians of either map at points of the simplex).
pub fn tangential_spectrum(j: &DenseMatrix) -> Result<Vec<Complex64>> {
    let m = j.dim();
    if m <= 1 {
        return Ok(Vec::new());
    }
    let last = m - 1;
    let restricted = DenseMatrix::from_fn(last, |a, b| j.get(a, b) - j.get(a, last));
    spectrum(&restricted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    TangentiallyUnstable,
    TransversallyUnstable,
    BothUnstable,
}

impl Verdict {
    pub fn is_stable(self) -> bool {
        self == Verdict::Stable
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::TangentiallyUnstable => "tangentially_unstable",
            Verdict::TransversallyUnstable => "transversally_unstable",
            Verdict::BothUnstable => "both_unstable",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub tangential_spectrum: Vec<Complex64>,
    pub spectral_radius: f64,
    /// Zero coordinate (0-based; 1-based when serialized) -> `J_ii`.
    #[serde(with = "one_based_keys")]
    pub transversal_values: BTreeMap<usize, f64>,
    pub verdict: Verdict,
    /// Some eigenvalue lies within [`MARGINAL_BAND`] of modulus one.
    pub marginal: bool,
    /// Eigenvalue of the active Jacobian along the simplex normal; not part
    /// of the verdict.
    pub normal_mode: Option<f64>,
}

impl StabilityReport {
    /// Largest of the spectral radius and the transversal values.
    pub fn dominant_modulus(&self) -> f64 {
        self.transversal_values
            .values()
            .copied()
            .fold(self.spectral_radius, f64::max)
    }

    /// Distance from one of the closest tangential or transversal eigenvalue.
    pub fn distance_to_unit(&self) -> f64 {
        self.tangential_spectrum
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .chain(self.transversal_values.values().map(|v| (v - 1.0).abs()))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Tangential and transversal stability of a fixed point of `map`.
pub fn classify(fp: &FixedPointReport, map: &Map) -> Result<StabilityReport> {
    if !(fp.residual < FIXED_POINT_RESIDUAL) {
        return Err(Error::NotFixedPoint(fp.residual));
    }
    let p = &fp.p_inf;
    let j = jacobian_for(map, p)?;
    let active: Vec<usize> = p.support().indices().to_vec();
    let j_active = j.submatrix(&active);
    let tangential = tangential_spectrum(&j_active)?;
    let spectral_radius = tangential.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let normal_mode = (!active.is_empty()).then(|| (0..active.len()).map(|a| j_active.get(a, 0)).sum());

    let mut transversal_values = BTreeMap::new();
    for i in (0..p.dim()).filter(|i| p.get(*i) == 0.0) {
        transversal_values.insert(i, normal_eigenvalue(p, map, i)?);
    }

    let tangential_ok = spectral_radius < 1.0;
    let transversal_ok = transversal_values.values().all(|v| *v < 1.0);
    let verdict = match (tangential_ok, transversal_ok) {
        (true, true) => Verdict::Stable,
        (false, true) => Verdict::TangentiallyUnstable,
        (true, false) => Verdict::TransversallyUnstable,
        (false, false) => Verdict::BothUnstable,
    };
    let mut report = StabilityReport {
        tangential_spectrum: tangential,
        spectral_radius,
        transversal_values,
        verdict,
        marginal: false,
        normal_mode,
    };
    report.marginal = report.distance_to_unit() < MARGINAL_BAND;
    Ok(report)
}

/// `f'(x_inf) = (c1 + c2) / (c1 + c2 + c1 c2)` for the two-component map.
pub fn derivative_n2(c: &Favorability) -> Result<f64> {
    if c.dim() != 2 {
        return Err(Error::Dimension(format!("expected n = 2, got {}", c.dim())));
    }
    let (c1, c2) = (c.get(0), c.get(1));
    Ok((c1 + c2) / (c1 + c2 + c1 * c2))
}

/// The two-component map written in the first coordinate `x = p_1`:
/// `f(x) = (x + c1 x - c1 x^2) / (1 + (c1 + c2)(x - x^2))`.
pub fn map_n2(x: f64, c: &Favorability) -> Result<f64> {
    if c.dim() != 2 {
        return Err(Error::Dimension(format!("expected n = 2, got {}", c.dim())));
    }
    let (c1, c2) = (c.get(0), c.get(1));
    Ok((x + c1 * x - c1 * x * x) / (1.0 + (c1 + c2) * x - (c1 + c2) * x * x))
}

mod one_based_keys {
    use std::collections::BTreeMap;

    use serde::de::Error;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<usize, f64>, s: S) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|(k, v)| ((k + 1).to_string(), *v))
            .collect::<BTreeMap<String, f64>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, f64>, D::Error> {
        BTreeMap::<String, f64>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| match k.parse::<usize>() {
                Ok(i) if i >= 1 => Ok((i - 1, v)),
                _ => Err(D::Error::custom(format!("bad component key {k:?}"))),
            })
            .collect()
    }
}
