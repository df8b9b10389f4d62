//! Acceptance criteria 1 to 11. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::time::Instant;

use meanfield::bifurcation::{scan_1d, scan_2d, GridAxis};
use meanfield::delay::{classify_regime, simulate_delayed, DelayConfig, Regime};
use meanfield::dynamics::{iterate, step, step_uniform, IterationConfig, Map};
use meanfield::equilibrium::{find_fixed_point, fixed_point_n2, fixed_point_n3};
use meanfield::simplex::{l2_sq, ActiveSet, Favorability, SimplexState};
use meanfield::stability::{
    classify, derivative_n2, jacobian, jacobian_uniform, normal_eigenvalue, tangential_spectrum,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PRINTED_TOL: f64 = 1e-3;
const CLOSED_FORM_TOL: f64 = 1e-8;
const LIMIT_TOL: f64 = 1e-8;
const TANGENT_TOL: f64 = 1e-10;
const NORMAL_TOL: f64 = 1e-12;
const DERIVATIVE_TOL: f64 = 1e-12;
const FD_DERIVATIVE_TOL: f64 = 1e-8;
const ORACLE_TOL: f64 = 1e-6;
const RESIDUAL_TOL: f64 = 1e-12;
const FIG3_REL_TOL: f64 = 0.01;
const THRESHOLD_TOL: f64 = 1e-8;
const UNIT_EIGEN_TOL: f64 = 1e-6;
const DELAY_STATIC_TOL: f64 = 1e-8;
const DELAY_BUDGET_SECS: f64 = 30.0;
const JACOBIAN_FD_TOL: f64 = 1e-6;
const PROPERTY_CASES: usize = 1000;

type Outcome = (bool, String);

fn st(v: &[f64]) -> SimplexState {
    SimplexState::new(v.to_vec()).unwrap()
}

fn fav(v: &[f64]) -> Favorability {
    Favorability::new(v.to_vec()).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_interior(rng: &mut ChaCha8Rng, n: usize) -> SimplexState {
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    st(&w.iter().map(|x| x / s).collect::<Vec<_>>())
}

fn run_to_limit(p0: &SimplexState, map: &Map) -> SimplexState {
    let cfg = IterationConfig {
        max_steps: 1_000_000,
        tol: 1e-14,
        record_every: 100_000,
        snap: false,
    };
    iterate(p0, map, &cfg).unwrap().last().clone()
}

fn criterion_1() -> Outcome {
    let c = fav(&[0.3, 0.4, 0.25]);
    let closed = fixed_point_n3(&c).unwrap().p_inf;
    let printed = [0.322, 0.4915, 0.1865];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut to_printed, mut to_closed) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let lim = run_to_limit(&random_interior(&mut rng, 3), &Map::Heterogeneous(c.clone()));
        to_printed = to_printed.max(max_diff(lim.as_slice(), &printed));
        to_closed = to_closed.max(max_diff(lim.as_slice(), closed.as_slice()));
    }
    (
        to_printed < PRINTED_TOL && to_closed < CLOSED_FORM_TOL,
        format!("20 starts; max |p - printed| = {to_printed:.2e}, max |p - closed form| = {to_closed:.2e}"),
    )
}

fn criterion_2() -> Outcome {
    let c = fav(&[0.8, 0.1, 0.9]);
    let lim = run_to_limit(&SimplexState::uniform(3).unwrap(), &Map::Heterogeneous(c.clone()));
    let err = max_diff(lim.as_slice(), &[0.4706, 0.0, 0.5294]);
    let fp = find_fixed_point(&SimplexState::uniform(3).unwrap(), &c).unwrap();
    let m = fp.active_set.one_based();
    (
        err < PRINTED_TOL && m == vec![1, 3],
        format!("|p - printed| = {err:.2e}, M* = {}", fp.active_set),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_full, mut worst_face) = (0.0f64, 0.0f64);
    let mut zeros_kept = true;
    for n in 2..=10 {
        for _ in 0..50 {
            let lim = run_to_limit(&random_interior(&mut rng, n), &Map::Uniform);
            worst_full = worst_full.max(max_diff(lim.as_slice(), &vec![1.0 / n as f64; n]));

            let m = rng.random_range(1..n);
            let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let mut idx: Vec<usize> = (0..n).collect();
            for k in 0..m {
                let j = rng.random_range(k..n);
                idx.swap(k, j);
                w[idx[k]] = 0.0;
            }
            let s: f64 = w.iter().sum();
            let p0 = st(&w.iter().map(|x| x / s).collect::<Vec<_>>());
            let lim = run_to_limit(&p0, &Map::Uniform);
            for i in 0..n {
                if p0.get(i) == 0.0 {
                    zeros_kept &= lim.get(i) == 0.0;
                } else {
                    worst_face = worst_face.max((lim.get(i) - 1.0 / (n - m) as f64).abs());
                }
            }
        }
    }
    (
        worst_full < LIMIT_TOL && worst_face < LIMIT_TOL && zeros_kept,
        format!(
            "n = 2..10, 50 starts each; interior err {worst_full:.2e}, face err {worst_face:.2e}, zeros exact: {zeros_kept}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let (mut tangent_err, mut normal_err) = (0.0f64, 0.0f64);
    for n in 2..=10usize {
        let nf = n as f64;
        let j = jacobian_uniform(&SimplexState::uniform(n).unwrap());
        let eig = tangential_spectrum(&j).unwrap();
        let want = (nf * nf - 2.0) / (nf * nf - 1.0);
        if eig.len() != n - 1 {
            return (false, format!("n = {n}: {} tangential eigenvalues", eig.len()));
        }
        for z in &eig {
            tangent_err = tangent_err.max((z - want).norm());
        }
        let mut face = vec![1.0 / (nf - 1.0); n];
        face[n - 1] = 0.0;
        let v = normal_eigenvalue(&st(&face), &Map::Uniform, n - 1).unwrap();
        normal_err = normal_err.max((v - nf * (nf - 1.0) / (nf * (nf - 1.0) - 1.0)).abs());
    }
    (
        tangent_err < TANGENT_TOL && normal_err < NORMAL_TOL,
        format!("n = 2..10; tangent err {tangent_err:.2e}, normal err {normal_err:.2e}"),
    )
}

/// The two-component map written out directly.
fn f_n2(x: f64, c1: f64, c2: f64) -> f64 {
    (x + c1 * x - c1 * x * x) / (1.0 + (c1 + c2) * (x - x * x))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut formula, mut fd, mut ends) = (0.0f64, 0.0f64, 0.0f64);
    let h = 1e-5;
    for _ in 0..100 {
        let (c1, c2) = (rng.random_range(0.01..1.0), rng.random_range(0.01..1.0));
        let c = fav(&[c1, c2]);
        let d = derivative_n2(&c).unwrap();
        formula = formula.max((d - (c1 + c2) / (c1 + c2 + c1 * c2)).abs());
        let x = fixed_point_n2(&c).unwrap().p_inf.get(0);
        let central = (f_n2(x + h, c1, c2) - f_n2(x - h, c1, c2)) / (2.0 * h);
        fd = fd.max((d - central).abs());
        let at0 = (-3.0 * f_n2(0.0, c1, c2) + 4.0 * f_n2(h, c1, c2) - f_n2(2.0 * h, c1, c2)) / (2.0 * h);
        let at1 = (3.0 * f_n2(1.0, c1, c2) - 4.0 * f_n2(1.0 - h, c1, c2) + f_n2(1.0 - 2.0 * h, c1, c2)) / (2.0 * h);
        ends = ends.max((at0 - (1.0 + c1)).abs()).max((at1 - (1.0 + c2)).abs());
    }
    (
        formula < DERIVATIVE_TOL && fd < FD_DERIVATIVE_TOL && ends < FD_DERIVATIVE_TOL,
        format!("100 draws; formula err {formula:.2e}, finite-difference err {fd:.2e}, endpoint err {ends:.2e}"),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut worst, mut worst_res) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let n = rng.random_range(2..=8);
        let c = fav(&(0..n).map(|_| rng.random_range(0.02..1.5)).collect::<Vec<_>>());
        let p0 = random_interior(&mut rng, n);
        let fp = find_fixed_point(&p0, &c).unwrap();
        let lim = run_to_limit(&p0, &Map::Heterogeneous(c.clone()));
        worst = worst.max(max_diff(lim.as_slice(), fp.p_inf.as_slice()));
        worst_res = worst_res.max(fp.p_inf.distance_inf(&step(&fp.p_inf, &c).unwrap()));
    }
    (
        worst < ORACLE_TOL && worst_res < RESIDUAL_TOL,
        format!("500 cases; max |iterate - solver| = {worst:.2e}, max residual = {worst_res:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let p_inf: [f64; 10] = [0.160, 0.148, 0.135, 0.122, 0.109, 0.096, 0.080, 0.068, 0.054, 0.028];
    let q1 = 0.71 * (1.0 - p_inf[0]);
    let q10 = 0.61 * (1.0 - p_inf[9]);
    let rel = (q1 - q10).abs() / q1.max(q10);
    let lambda = 0.5 * (q1 + q10);
    (
        rel < FIG3_REL_TOL && (lambda - 0.595).abs() / 0.595 < FIG3_REL_TOL,
        format!("c_1(1-p_1) = {q1:.5}, c_10(1-p_10) = {q10:.5}, relative gap {rel:.2e}, Lambda ~ {lambda:.4}"),
    )
}

fn criterion_8() -> Outcome {
    let base = fav(&[0.8, 0.5, 0.9]);
    let scan = scan_1d(1, 0.05, 1.0, 200, &base).unwrap();
    let want = 0.8 * 0.9 / 1.7;
    let Some(&crit) = scan.critical_values.first() else {
        return (false, "no threshold detected".into());
    };
    let located = scan.critical_values.len() == 1 && (crit - want).abs() < THRESHOLD_TOL;
    let below = scan.samples.iter().filter(|s| s.c_value < crit).all(|s| s.p_inf.get(1) == 0.0);
    let above: Vec<f64> = scan.samples.iter().filter(|s| s.c_value > crit).map(|s| s.p_inf.get(1)).collect();
    let increasing = above.first().is_some_and(|x| *x > 0.0) && above.windows(2).all(|w| w[1] > w[0]);
    let c = base.with_entry(1, crit).unwrap();
    let fp = find_fixed_point(&SimplexState::uniform(3).unwrap(), &c).unwrap();
    let unit = classify(&fp, &Map::Heterogeneous(c)).unwrap().distance_to_unit();
    (
        located && below && increasing && unit < UNIT_EIGEN_TOL,
        format!(
            "critical {crit:.10} (formula {want:.10}, err {:.1e}); zero below: {below}; increasing above: {increasing}; |eig - 1| = {unit:.1e}",
            (crit - want).abs()
        ),
    )
}

fn criterion_9() -> Outcome {
    let axis = GridAxis {
        lo: 0.05,
        hi: 1.5,
        steps: 100,
    };
    let scan = scan_2d(0, 1, axis, axis, &fav(&[1.0, 1.0, 1.0, 1.0])).unwrap();
    let mut labels: Vec<Vec<usize>> = scan.distinct_labels().iter().map(ActiveSet::one_based).collect();
    labels.sort();
    let four = labels == vec![vec![], vec![1], vec![1, 2], vec![2]];

    let cell = (axis.hi - axis.lo) / (axis.steps - 1) as f64;
    let h = 0.5; // (n - 3) / (1/c_3 + 1/c_4)
    let boundary = |other: f64| if other > h { 2.0 / (1.0 / other + 2.0) } else { h };
    let (mut worst, mut crossings) = (0.0f64, 0usize);
    let mut single = true;
    // Gamma_1 along rows (c_1 varies), Gamma_2 along columns (c_2 varies).
    for (slot, b) in [(0usize, 0usize), (1, 1)].iter().flat_map(|&(s, _)| (0..axis.steps).map(move |b| (s, b))) {
        let zero = |a: usize| {
            let l = if slot == 0 { &scan.labels[a][b] } else { &scan.labels[b][a] };
            l.zero_set.contains(slot)
        };
        let switches: Vec<usize> = (0..axis.steps - 1).filter(|&a| zero(a) != zero(a + 1)).collect();
        single &= switches.len() <= 1;
        for a in switches {
            let mid = 0.5 * (scan.values_i[a] + scan.values_i[a + 1]);
            worst = worst.max((mid - boundary(scan.values_j[b])).abs());
            crossings += 1;
        }
    }
    (
        four && single && crossings > 0 && worst <= cell,
        format!(
            "labels {labels:?}; {crossings} boundary crossings, max distance to analytic boundary {worst:.2e} (cell {cell:.2e})"
        ),
    )
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let c = fav(&[0.9, 0.85, 0.95, 0.8]);
    let p0 = st(&[0.25, 0.26, 0.24, 0.25]);
    let regime = |beta: f64| {
        let cfg = DelayConfig::new(c.clone(), beta, 30).unwrap();
        let traj = simulate_delayed(&p0, &cfg, 30_000, 10_000).unwrap();
        (classify_regime(&traj, 1e-8, 2000).unwrap(), traj)
    };
    let (r12, _) = regime(1.2);
    let (r3, _) = regime(3.0);
    let (r15, _) = regime(1.5);
    let (r0, t0) = regime(0.0);
    let fp = find_fixed_point(&p0, &c).unwrap();
    let static_err = t0.last().distance_inf(&fp.p_inf);
    let secs = start.elapsed().as_secs_f64();
    let checks = [
        r12.regime == Regime::FixedPoint,
        r3.regime == Regime::Periodic,
        r15.regime != Regime::FixedPoint,
        r0.regime == Regime::FixedPoint && static_err < DELAY_STATIC_TOL,
        secs <= DELAY_BUDGET_SECS,
    ];
    (
        checks.iter().all(|x| *x),
        format!(
            "beta=1.2: {}; beta=3: {}{}; beta=1.5: {}; beta=0: {} (|p - static| = {static_err:.1e}); {secs:.1}s",
            r12.regime,
            r3.regime,
            if r3.regime == Regime::Periodic { String::new() } else { " (expected periodic)".into() },
            r15.regime,
            r0.regime
        ),
    )
}

fn random_case(rng: &mut ChaCha8Rng, zeros: bool) -> (SimplexState, Favorability) {
    let n = rng.random_range(2..=10);
    let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    if zeros {
        for x in w.iter_mut() {
            if rng.random_bool(0.3) {
                *x = 0.0;
            }
        }
    }
    if w.iter().all(|x| *x == 0.0) {
        w[0] = 1.0;
    }
    let s: f64 = w.iter().sum();
    let p = st(&w.iter().map(|x| x / s).collect::<Vec<_>>());
    let c = fav(&(0..n).map(|_| rng.random_range(0.01..1.0)).collect::<Vec<_>>());
    (p, c)
}

/// Raw heterogeneous map, independent of the library's weight form.
fn raw_step(p: &[f64], c: &[f64]) -> Vec<f64> {
    let n = p.len() as f64;
    let lc: f64 = p.iter().zip(c).map(|(x, k)| k * x * (1.0 - x)).sum();
    p.iter()
        .zip(c)
        .map(|(x, k)| x * (n - 1.0 + k * (1.0 - x)) / (n - 1.0 + lc))
        .collect()
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures: Vec<&str> = Vec::new();

    let mut ok = true;
    for _ in 0..PROPERTY_CASES {
        let (p, c) = random_case(&mut rng, true);
        let q = step(&p, &c).unwrap();
        ok &= (q.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12 && q.as_slice().iter().all(|x| *x >= 0.0);
    }
    if !ok {
        failures.push("conservation");
    }

    ok = true;
    for _ in 0..PROPERTY_CASES {
        let (p, c) = random_case(&mut rng, true);
        let mut q = p.clone();
        for _ in 0..20 {
            q = step(&q, &c).unwrap();
        }
        ok &= (0..p.dim()).all(|i| (p.get(i) == 0.0) == (q.get(i) == 0.0));
    }
    if !ok {
        failures.push("zero invariance");
    }

    ok = true;
    for _ in 0..PROPERTY_CASES {
        let (p, _) = random_case(&mut rng, true);
        let q = step_uniform(&p);
        for i in 0..p.dim() {
            for j in 0..p.dim() {
                if p.get(i) > p.get(j) {
                    ok &= q.get(i) >= q.get(j);
                }
            }
        }
    }
    if !ok {
        failures.push("order preservation");
    }

    ok = true;
    for _ in 0..PROPERTY_CASES {
        let (p, _) = random_case(&mut rng, true);
        let q = step_uniform(&p);
        let floor = 1.0 / p.support().gamma() as f64;
        ok &= l2_sq(&q) <= l2_sq(&p) + 1e-15 && l2_sq(&q) >= floor - 1e-15 && l2_sq(&q) <= 1.0 + 1e-15;
    }
    if !ok {
        failures.push("L monotone and bounded");
    }

    ok = true;
    for _ in 0..PROPERTY_CASES {
        let (p, _) = random_case(&mut rng, true);
        let q = step_uniform(&p);
        let max = |s: &SimplexState| s.as_slice().iter().copied().fold(0.0, f64::max);
        let min_pos = |s: &SimplexState| {
            s.as_slice().iter().copied().filter(|x| *x > 0.0).fold(f64::INFINITY, f64::min)
        };
        ok &= max(&q) <= max(&p) + 1e-15 && min_pos(&q) >= min_pos(&p) - 1e-15;
    }
    if !ok {
        failures.push("extremal monotonicity");
    }

    let mut fd_err = 0.0f64;
    for _ in 0..PROPERTY_CASES {
        let (p, c) = random_case(&mut rng, false);
        let j = jacobian(&p, &c).unwrap();
        let h = 1e-6;
        for k in 0..p.dim() {
            let mut plus = p.as_slice().to_vec();
            let mut minus = p.as_slice().to_vec();
            plus[k] += h;
            minus[k] -= h;
            let (fp, fm) = (raw_step(&plus, c.as_slice()), raw_step(&minus, c.as_slice()));
            for i in 0..p.dim() {
                fd_err = fd_err.max(((fp[i] - fm[i]) / (2.0 * h) - j.get(i, k)).abs());
            }
        }
    }
    if fd_err >= JACOBIAN_FD_TOL {
        failures.push("Jacobian vs finite differences");
    }

    ok = true;
    for _ in 0..PROPERTY_CASES {
        let (p, c) = random_case(&mut rng, false);
        let i = rng.random_range(0..p.dim());
        let bumped = c.with_entry(i, c.get(i) * rng.random_range(1.0..2.0)).unwrap();
        let a = find_fixed_point(&p, &c).unwrap().p_inf.get(i);
        let b = find_fixed_point(&p, &bumped).unwrap().p_inf.get(i);
        ok &= b >= a - 1e-15;
    }
    if !ok {
        failures.push("monotonicity of p_i in c_i");
    }

    (
        failures.is_empty(),
        if failures.is_empty() {
            format!("7 suites x {PROPERTY_CASES} cases; max Jacobian FD err {fd_err:.1e}")
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("three-component interior limit", criterion_1),
        ("three-component boundary limit", criterion_2),
        ("uniform-map limits", criterion_3),
        ("uniform spectral closed forms", criterion_4),
        ("n=2 derivative", criterion_5),
        ("solver vs iteration", criterion_6),
        ("ten-component printed limit", criterion_7),
        ("transcritical threshold", criterion_8),
        ("two-parameter region map", criterion_9),
        ("delay regimes", criterion_10),
        ("property suites", criterion_11),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = f();
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {detail}",
            k + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
