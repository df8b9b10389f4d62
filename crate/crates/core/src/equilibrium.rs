//! Analytic limit states.
//!
//! For favorability `c` the limit of the heterogeneous map is determined by
//! its active set `M*`: with `Lambda(M) = (|M| - 1) / sum_{k in M} 1/c_k`,
//! every `k in M*` satisfies `c_k > Lambda(M*)` and sits at
//! `p_k = 1 - Lambda(M*)/c_k`; every other coordinate is zero.

use serde::{Deserialize, Serialize};

use crate::dynamics::{step, step_uniform, Map};
use crate::error::{Error, Result};
use crate::simplex::{check_dims, mean_field, ActiveSet, Favorability, MeanField, SimplexState};

/// Relative width of the band around `Lambda` in which a parameter is
/// reported as critical.
pub const THRESHOLD_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub p_inf: SimplexState,
    pub r_inf: MeanField,
    pub active_set: ActiveSet,
    pub lambda_value: f64,
    /// Infinity norm of `step(p_inf) - p_inf`.
    pub residual: f64,
    /// Indices whose `c_k` lies within [`THRESHOLD_GUARD`] of `lambda_value`
    /// (transcritical points). They are still classified by the strict rule.
    #[serde(default)]
    pub critical: ActiveSet,
}

impl FixedPointReport {
    pub fn dim(&self) -> usize {
        self.p_inf.dim()
    }

    pub fn zero_set(&self) -> ActiveSet {
        self.active_set.complement(self.dim())
    }

    pub fn is_critical(&self) -> bool {
        !self.critical.is_empty()
    }

    /// Report for a caller-supplied point, taking its support as the active
    /// set. The residual tells whether `p` actually is a fixed point of `map`.
    pub fn at(p: &SimplexState, map: &Map) -> Result<Self> {
        let c = map.favorability(p.dim())?;
        let active = p.support();
        let lambda = lambda_raw(active.iter(), c.as_slice());
        let residual = p.distance_inf(&map.step(p)?);
        Ok(Self {
            p_inf: p.clone(),
            r_inf: mean_field(p),
            active_set: active,
            lambda_value: lambda,
            residual,
            critical: ActiveSet::default(),
        })
    }
}

/// `Lambda(M) = (|M| - 1) / sum_{k in M} 1/c_k`; zero for a singleton.
pub fn lambda_threshold(m: &ActiveSet, c: &Favorability) -> Result<f64> {
    if m.is_empty() {
        return Err(Error::InvalidParameter("active set is empty".into()));
    }
    if let Some(i) = m.iter().find(|i| *i >= c.dim()) {
        return Err(Error::InvalidParameter(format!(
            "index {} out of range 1..={}",
            i + 1,
            c.dim()
        )));
    }
    Ok(lambda_raw(m.iter(), c.as_slice()))
}

fn lambda_raw(m: impl Iterator<Item = usize>, c: &[f64]) -> f64 {
    let (count, inv_sum) = m.fold((0usize, 0.0), |(k, s), i| (k + 1, s + 1.0 / c[i]));
    (count - 1) as f64 / inv_sum
}

/// `p_i = 1 - Lambda(M)/c_i` for an active index.
pub fn limit_coordinate(c: &Favorability, m: &ActiveSet, i: usize) -> Result<f64> {
    let lambda = lambda_threshold(m, c)?;
    if !m.contains(i) || c.get(i) <= lambda {
        return Err(Error::NotActive {
            index: i,
            c: c.get(i),
            threshold: lambda,
        });
    }
    Ok(1.0 - lambda / c.get(i))
}

fn near_threshold(ck: f64, lambda: f64) -> bool {
    (ck - lambda).abs() <= THRESHOLD_GUARD * ck.abs().max(lambda.abs())
}

/// Limit of the heterogeneous map from `p0`.
///
/// Starts from the support of `p0` and repeatedly drops indices with
/// `c_k <= Lambda` until the candidate set is stable; at most `n` passes.
pub fn find_fixed_point(p0: &SimplexState, c: &Favorability) -> Result<FixedPointReport> {
    check_dims(p0.dim(), c.dim())?;
    let cv = c.as_slice();
    let initial = p0.support();
    if initial.is_empty() {
        return Err(Error::InvalidState("all coordinates are zero".into()));
    }
    let mut active = initial.clone();
    let mut lambda = lambda_raw(active.iter(), cv);
    for _ in 0..c.dim() {
        let kept: Vec<usize> = active.iter().filter(|k| cv[*k] > lambda).collect();
        if kept.len() == active.gamma() {
            break;
        }
        active = ActiveSet::new(kept);
        lambda = lambda_raw(active.iter(), cv);
    }
    let critical = ActiveSet::new(
        initial
            .iter()
            .filter(|k| near_threshold(cv[*k], lambda))
            .collect(),
    );
    let p: Vec<f64> = (0..c.dim())
        .map(|k| {
            if active.contains(k) {
                1.0 - lambda / cv[k]
            } else {
                0.0
            }
        })
        .collect();
    let p_inf = SimplexState::new(p)?;
    let residual = p_inf.distance_inf(&step(&p_inf, c)?);
    Ok(FixedPointReport {
        r_inf: mean_field(&p_inf),
        p_inf,
        active_set: active,
        lambda_value: lambda,
        residual,
        critical,
    })
}

/// Limit of the uniform map: `1/(n - m)` on the support of `p0`, where `m`
/// is the number of zero coordinates.
pub fn uniform_limit(p0: &SimplexState) -> FixedPointReport {
    let n = p0.dim();
    let active = p0.support();
    let share = 1.0 / active.gamma() as f64;
    let p: Vec<f64> = (0..n)
        .map(|k| if active.contains(k) { share } else { 0.0 })
        .collect();
    let p_inf = SimplexState::new(p).expect("face barycenter is a valid state");
    let residual = p_inf.distance_inf(&step_uniform(&p_inf));
    FixedPointReport {
        r_inf: mean_field(&p_inf),
        p_inf,
        lambda_value: (active.gamma() - 1) as f64 / active.gamma() as f64,
        active_set: active,
        residual,
        critical: ActiveSet::default(),
    }
}

fn closed_form_report(p: Vec<f64>, c: &Favorability) -> Result<FixedPointReport> {
    let p_inf = SimplexState::new(p)?;
    let active = p_inf.support();
    let lambda = lambda_raw(active.iter(), c.as_slice());
    let residual = p_inf.distance_inf(&step(&p_inf, c)?);
    Ok(FixedPointReport {
        r_inf: mean_field(&p_inf),
        p_inf,
        active_set: active,
        lambda_value: lambda,
        residual,
        critical: ActiveSet::default(),
    })
}

/// Two components: `p = (c1, c2) / (c1 + c2)`.
pub fn fixed_point_n2(c: &Favorability) -> Result<FixedPointReport> {
    if c.dim() != 2 {
        return Err(Error::Dimension(format!("expected n = 2, got {}", c.dim())));
    }
    let (c1, c2) = (c.get(0), c.get(1));
    closed_form_report(vec![c1 / (c1 + c2), c2 / (c1 + c2)], c)
}

/// Three components. When every `c_i > c_j c_k / (c_j + c_k)` the interior
/// closed form is used; otherwise the general active-set solver decides
/// which coordinate vanishes.
pub fn fixed_point_n3(c: &Favorability) -> Result<FixedPointReport> {
    if c.dim() != 3 {
        return Err(Error::Dimension(format!("expected n = 3, got {}", c.dim())));
    }
    let (c1, c2, c3) = (c.get(0), c.get(1), c.get(2));
    let interior = c1 > c2 * c3 / (c2 + c3) && c2 > c1 * c3 / (c1 + c3) && c3 > c1 * c2 / (c1 + c2);
    if !interior {
        return find_fixed_point(&SimplexState::uniform(3)?, c);
    }
    let denom = c1 * c2 + c1 * c3 + c2 * c3;
    closed_form_report(
        vec![
            (c1 * c2 + c1 * c3 - c2 * c3) / denom,
            (c1 * c2 + c2 * c3 - c1 * c3) / denom,
            (c1 * c3 + c2 * c3 - c1 * c2) / denom,
        ],
        c,
    )
}
