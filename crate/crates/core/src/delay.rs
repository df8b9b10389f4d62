//! Delayed self-inhibition: `c_i(t) = c_base,i - beta * p_i(t - tau)`.
//!
//! The prehistory is constant, `p(t) = p0` for `t` in `[-tau, 0]`, so
//! `beta = 0` reproduces the static map exactly.

use std::collections::VecDeque;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dynamics::{step_with_coefficients, Trajectory};
use crate::error::{Error, Result};
use crate::simplex::{check_dims, inf_distance, Favorability, SimplexState};

/// How the undelayed coefficient of each component is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineMode {
    /// `c_base,i` is entry `i` of the supplied vector.
    #[default]
    PerComponent,
    /// Every component uses `max_k c_base,k`.
    GlobalMax,
}

impl BaselineMode {
    pub fn as_str(self) -> &'static str {
        match self {
            BaselineMode::PerComponent => "per_component",
            BaselineMode::GlobalMax => "global_max",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayConfig {
    pub beta: f64,
    pub tau: usize,
    #[serde(default)]
    pub baseline_mode: BaselineMode,
    pub c_base: Favorability,
}

impl DelayConfig {
    pub fn new(c_base: Favorability, beta: f64, tau: usize) -> Result<Self> {
        let cfg = Self {
            beta,
            tau,
            baseline_mode: BaselineMode::PerComponent,
            c_base,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_mode(mut self, mode: BaselineMode) -> Self {
        self.baseline_mode = mode;
        self
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let cfg = Self {
            beta,
            ..self.clone()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and >= 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.c_base.dim()
    }

    /// Undelayed coefficients after applying the baseline mode.
    pub fn baseline(&self) -> Vec<f64> {
        match self.baseline_mode {
            BaselineMode::PerComponent => self.c_base.as_slice().to_vec(),
            BaselineMode::GlobalMax => {
                let m = self.c_base.as_slice().iter().copied().fold(f64::NEG_INFINITY, f64::max);
                vec![m; self.dim()]
            }
        }
    }
}

/// The `tau + 1` most recent states, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer {
    states: VecDeque<SimplexState>,
    t: usize,
}

impl HistoryBuffer {
    /// Constant prehistory at `p0`, current time 0.
    pub fn new(p0: SimplexState, tau: usize) -> Self {
        Self {
            states: std::iter::repeat_n(p0, tau + 1).collect(),
            t: 0,
        }
    }

    pub fn tau(&self) -> usize {
        self.states.len() - 1
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `p(t)`.
    pub fn current(&self) -> &SimplexState {
        self.states.back().expect("history holds tau + 1 states")
    }

    /// `p(t - tau)`.
    pub fn delayed(&self) -> &SimplexState {
        self.states.front().expect("history holds tau + 1 states")
    }

    /// Appends `p(t + 1)` and drops the oldest entry.
    pub fn push(&mut self, next: SimplexState) {
        self.states.pop_front();
        self.states.push_back(next);
        self.t += 1;
    }
}

/// Coefficients in force at the buffer's current time. May be negative.
pub fn effective_c(history: &HistoryBuffer, cfg: &DelayConfig) -> Vec<f64> {
    cfg.baseline()
        .iter()
        .zip(history.delayed().as_slice())
        .map(|(c, p)| c - cfg.beta * p)
        .collect()
}

/// `p(t + 1)` from the history ending at `p(t)`.
pub fn step_delayed(history: &HistoryBuffer, cfg: &DelayConfig) -> Result<SimplexState> {
    check_dims(cfg.dim(), history.current().dim())?;
    if history.tau() != cfg.tau {
        return Err(Error::InvalidState(format!(
            "history spans tau = {}, config has tau = {}",
            history.tau(),
            cfg.tau
        )));
    }
    step_with_coefficients(history.current(), &effective_c(history, cfg), history.time())
}

/// Runs `steps` delayed steps from `p0` and records `p(t)` for
/// `t = transient..=steps`.
pub fn simulate_delayed(
    p0: &SimplexState,
    cfg: &DelayConfig,
    steps: usize,
    transient: usize,
) -> Result<Trajectory> {
    cfg.validate()?;
    check_dims(cfg.dim(), p0.dim())?;
    if steps <= transient {
        return Err(Error::InvalidParameter(format!(
            "steps ({steps}) must exceed transient ({transient})"
        )));
    }
    let mut history = HistoryBuffer::new(p0.clone(), cfg.tau);
    let mut states = Vec::with_capacity(steps - transient + 1);
    let mut times = Vec::with_capacity(steps - transient + 1);
    if transient == 0 {
        states.push(p0.clone());
        times.push(0);
    }
    let mut residual = f64::INFINITY;
    for t in 1..=steps {
        let next = step_delayed(&history, cfg)?;
        residual = inf_distance(next.as_slice(), history.current().as_slice());
        if t >= transient {
            states.push(next.clone());
            times.push(t);
        }
        history.push(next);
    }
    Ok(Trajectory {
        states,
        times,
        steps_taken: steps,
        converged: false,
        final_residual: residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FixedPoint,
    Periodic,
    QuasiPeriodic,
    Aperiodic,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::FixedPoint => "fixed_point",
            Regime::Periodic => "periodic",
            Regime::QuasiPeriodic => "quasi_periodic",
            Regime::Aperiodic => "aperiodic",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub period: Option<usize>,
    /// Local extrema of the sampled coordinate over the window; the final
    /// value alone for a fixed point.
    pub tail_extrema: Vec<f64>,
    /// Infinity-norm diameter of the window.
    pub diameter: f64,
    /// Share of spectral power in the two dominant peaks.
    pub peak_power_fraction: f64,
}

/// Fraction of the power spectrum above which two peaks mark a
/// quasi-periodic signal.
pub const QUASI_PERIODIC_POWER: f64 = 0.9;
/// Bins on either side of a peak counted toward its power.
const PEAK_HALF_WIDTH: usize = 2;

/// [`classify_regime_coord`] sampling coordinate 1.
pub fn classify_regime(traj: &Trajectory, tol_fp: f64, window: usize) -> Result<RegimeReport> {
    classify_regime_coord(traj, tol_fp, window, 0)
}

/// Labels the last `window` states of `traj`.
///
/// Fixed point if the window diameter is below `tol_fp`; periodic with the
/// minimal `q` in `[2, window/2]` for which `|p(t+q) - p(t)|_inf < tol_fp`
/// across the window; quasi-periodic if two spectral peaks of coordinate
/// `coord` carry more than 90% of its power; aperiodic otherwise.
pub fn classify_regime_coord(
    traj: &Trajectory,
    tol_fp: f64,
    window: usize,
    coord: usize,
) -> Result<RegimeReport> {
    if !(tol_fp > 0.0) {
        return Err(Error::InvalidParameter(format!("tol_fp must be > 0, got {tol_fp}")));
    }
    if window < 4 {
        return Err(Error::InvalidParameter(format!("window must be >= 4, got {window}")));
    }
    if traj.len() < window {
        return Err(Error::InsufficientData(format!(
            "need {window} recorded states, trajectory has {}",
            traj.len()
        )));
    }
    let n = traj.last().dim();
    if coord >= n {
        return Err(Error::InvalidParameter(format!(
            "coordinate {} out of range 1..={n}",
            coord + 1
        )));
    }
    let tail = &traj.states[traj.len() - window..];
    let series: Vec<f64> = tail.iter().map(|s| s.get(coord)).collect();
    let diameter = (0..n)
        .map(|i| {
            let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                (lo.min(s.get(i)), hi.max(s.get(i)))
            });
            hi - lo
        })
        .fold(0.0, f64::max);

    if diameter < tol_fp {
        return Ok(RegimeReport {
            regime: Regime::FixedPoint,
            period: None,
            tail_extrema: vec![series[window - 1]],
            diameter,
            peak_power_fraction: 0.0,
        });
    }
    let tail_extrema = local_extrema(&series);
    let period = (2..=window / 2).find(|&q| {
        (0..window - q).all(|t| tail[t].distance_inf(&tail[t + q]) < tol_fp)
    });
    let peak_power_fraction = peak_power_fraction(&series);
    let regime = if period.is_some() {
        Regime::Periodic
    } else if peak_power_fraction > QUASI_PERIODIC_POWER {
        Regime::QuasiPeriodic
    } else {
        Regime::Aperiodic
    };
    Ok(RegimeReport {
        regime,
        period,
        tail_extrema,
        diameter,
        peak_power_fraction,
    })
}

/// Values at strict local maxima and minima.
pub fn local_extrema(x: &[f64]) -> Vec<f64> {
    x.windows(3)
        .filter(|w| (w[1] > w[0] && w[1] > w[2]) || (w[1] < w[0] && w[1] < w[2]))
        .map(|w| w[1])
        .collect()
}

/// Share of the Hann-windowed power spectrum (mean removed) within
/// `PEAK_HALF_WIDTH` bins of the two largest local peaks.
fn peak_power_fraction(x: &[f64]) -> f64 {
    let len = x.len();
    let mean = x.iter().sum::<f64>() / len as f64;
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let hann = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (len - 1) as f64).cos();
            Complex::new((v - mean) * hann, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);
    let mut power: Vec<f64> = buf[..len / 2 + 1].iter().map(|z| z.norm_sqr()).collect();
    power[0] = 0.0;
    let total: f64 = power.iter().sum();
    if !(total > 0.0) {
        return 0.0;
    }
    let mut peaks: Vec<usize> = (1..power.len() - 1)
        .filter(|&k| power[k] >= power[k - 1] && power[k] >= power[k + 1] && power[k] > 0.0)
        .collect();
    peaks.sort_by(|a, b| power[*b].total_cmp(&power[*a]).then(a.cmp(b)));
    let mut counted = vec![false; power.len()];
    let mut captured = 0.0;
    for &k in peaks.iter().take(2) {
        for b in k.saturating_sub(PEAK_HALF_WIDTH)..=(k + PEAK_HALF_WIDTH).min(power.len() - 1) {
            if !counted[b] {
                counted[b] = true;
                captured += power[b];
            }
        }
    }
    captured / total
}

/// Simulation and classification settings shared by every sweep sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub steps: usize,
    pub transient: usize,
    pub tol_fp: f64,
    pub window: usize,
    /// Sampled coordinate, 0-based.
    pub coord: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            steps: 30_000,
            transient: 10_000,
            tol_fp: 1e-8,
            window: 2000,
            coord: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSample {
    pub beta: f64,
    pub regime: Option<Regime>,
    pub period: Option<usize>,
    pub tail_extrema: Vec<f64>,
    /// Set when the simulation failed; the sweep continues.
    pub error: Option<String>,
}

/// Simulates and classifies every `beta`, in parallel, returning samples in
/// input order.
pub fn beta_sweep(
    p0: &SimplexState,
    template: &DelayConfig,
    betas: &[f64],
    sweep: &SweepConfig,
) -> Result<Vec<SweepSample>> {
    check_dims(template.dim(), p0.dim())?;
    if sweep.steps <= sweep.transient || sweep.steps - sweep.transient + 1 < sweep.window {
        return Err(Error::InvalidParameter(format!(
            "steps - transient must cover the window ({} - {} < {})",
            sweep.steps, sweep.transient, sweep.window
        )));
    }
    Ok(betas
        .par_iter()
        .map(|&beta| {
            let run = template.with_beta(beta).and_then(|cfg| {
                let traj = simulate_delayed(p0, &cfg, sweep.steps, sweep.transient)?;
                classify_regime_coord(&traj, sweep.tol_fp, sweep.window, sweep.coord)
            });
            match run {
                Ok(r) => SweepSample {
                    beta,
                    regime: Some(r.regime),
                    period: r.period,
                    tail_extrema: r.tail_extrema,
                    error: None,
                },
                Err(e) => SweepSample {
                    beta,
                    regime: None,
                    period: None,
                    tail_extrema: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}
