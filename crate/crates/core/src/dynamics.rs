//! One-step maps and trajectory iteration.
//!
//! Both maps are evaluated as `p'_i = w_i / sum_j w_j` with weights
//! `w_i = p_i * k_i`. On the simplex the weight sum equals the analytic
//! denominator (`n - L` or `n - 1 + L_c`); dividing by the computed sum keeps
//! iterates from drifting off the simplex along the expanding normal mode.
//!
//! The heterogeneous multiplier `n - 1 + c_i (1 - p_i)` is evaluated as
//! `(n - p_i) + (c_i - 1)(1 - p_i)`, which is the same quantity on the simplex
//! and makes the `c = 1` map bit-identical to the uniform one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{check_dims, inf_distance, Favorability, SimplexState};

/// Which map drives the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub enum Map {
    /// `p'_i = p_i (n - p_i) / (n - L)`.
    Uniform,
    /// `p'_i = p_i (n - 1 + c_i (1 - p_i)) / (n - 1 + L_c)`.
    Heterogeneous(Favorability),
}

impl Map {
    pub fn step(&self, p: &SimplexState) -> Result<SimplexState> {
        match self {
            Map::Uniform => Ok(step_uniform(p)),
            Map::Heterogeneous(c) => step(p, c),
        }
    }

    /// Dimension fixed by the parameters, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Map::Uniform => None,
            Map::Heterogeneous(c) => Some(c.dim()),
        }
    }

    /// The favorability vector equivalent to this map at dimension `n`
    /// (`c = 1` for the uniform map).
    pub fn favorability(&self, n: usize) -> Result<Favorability> {
        match self {
            Map::Uniform => Favorability::uniform(n, 1.0),
            Map::Heterogeneous(c) => {
                check_dims(c.dim(), n)?;
                Ok(c.clone())
            }
        }
    }
}

/// One step of the uniform map.
pub fn step_uniform(p: &SimplexState) -> SimplexState {
    let n = p.dim() as f64;
    let w = p.as_slice().iter().map(|x| x * (n - x)).collect();
    SimplexState::from_weights(w)
}

/// One step of the heterogeneous map.
pub fn step(p: &SimplexState, c: &Favorability) -> Result<SimplexState> {
    check_dims(p.dim(), c.dim())?;
    step_with_coefficients(p, c.as_slice(), 0)
}

/// One step of the heterogeneous map with arbitrary real coefficients, as
/// produced by delayed feedback. Fails when a multiplier `n - 1 + c_i (1 - p_i)`
/// or the denominator `n - 1 + L_c` is nonpositive; `t` labels the error.
pub fn step_with_coefficients(p: &SimplexState, c: &[f64], t: usize) -> Result<SimplexState> {
    check_dims(p.dim(), c.len())?;
    let n = p.dim() as f64;
    let mut w = Vec::with_capacity(p.dim());
    let mut lc = 0.0;
    for (i, (&x, &ci)) in p.as_slice().iter().zip(c).enumerate() {
        let k = (n - x) + (ci - 1.0) * (1.0 - x);
        if !(k > 0.0) {
            return Err(Error::DomainViolation {
                step: t,
                index: Some(i),
                value: k,
            });
        }
        lc += ci * x * (1.0 - x);
        w.push(x * k);
    }
    let denom = n - 1.0 + lc;
    if !(denom > 0.0) {
        return Err(Error::DomainViolation {
            step: t,
            index: None,
            value: denom,
        });
    }
    Ok(SimplexState::from_weights(w))
}

/// Stopping and recording policy for [`iterate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    pub max_steps: usize,
    /// Stop once `max_i |p_i^{t+1} - p_i^t| < tol`.
    pub tol: f64,
    pub record_every: usize,
    /// Zero coordinates below `1e-15` after each step.
    #[serde(default)]
    pub snap: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            max_steps: 100_000,
            tol: 1e-12,
            record_every: 1,
            snap: false,
        }
    }
}

impl IterationConfig {
    /// Defaults with the recording stride chosen by dimension.
    pub fn for_dim(n: usize) -> Self {
        Self {
            record_every: if n <= 10 { 1 } else { 10 },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps < 1 {
            return Err(Error::InvalidParameter("max_steps must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be > 0".into()));
        }
        if self.record_every < 1 {
            return Err(Error::InvalidParameter("record_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// A recorded orbit. `times[k]` is the step index of `states[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<SimplexState>,
    pub times: Vec<usize>,
    pub steps_taken: usize,
    pub converged: bool,
    /// Infinity-norm displacement of the last step.
    pub final_residual: f64,
}

impl Trajectory {
    pub fn initial(&self) -> &SimplexState {
        &self.states[0]
    }

    pub fn last(&self) -> &SimplexState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Series of coordinate `i` across the recorded states.
    pub fn coordinate(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s.get(i)).collect()
    }
}

/// Iterates `map` from `p0` until the step displacement drops below
/// `cfg.tol` or `cfg.max_steps` is exhausted. Convergence is never assumed.
pub fn iterate(p0: &SimplexState, map: &Map, cfg: &IterationConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if let Some(n) = map.dim() {
        check_dims(n, p0.dim())?;
    }
    let mut states = vec![p0.clone()];
    let mut times = vec![0];
    let mut p = p0.clone();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut t = 0;
    while t < cfg.max_steps {
        t += 1;
        let mut next = map.step(&p)?;
        if cfg.snap {
            next = next.snapped();
        }
        residual = inf_distance(next.as_slice(), p.as_slice());
        p = next;
        if t % cfg.record_every == 0 {
            states.push(p.clone());
            times.push(t);
        }
        if residual < cfg.tol {
            converged = true;
            break;
        }
    }
    if *times.last().unwrap() != t {
        states.push(p);
        times.push(t);
    }
    Ok(Trajectory {
        states,
        times,
        steps_taken: t,
        converged,
        final_residual: residual,
    })
}
