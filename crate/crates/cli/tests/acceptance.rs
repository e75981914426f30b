//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Runs without the libtest harness so the criteria execute sequentially and the
//! timing checks do not compete with each other for cores.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use msw_core::color::read_rgb;
use msw_core::exact_ot::{brute_force_wasserstein, exact_wasserstein};
use msw_core::flow::{make_gaussian, make_s_shape, run_flow, DistanceSpec, FlowConfig, S_SHAPE_NOISE};
use msw_core::gradients::{grad_direction, value_and_grad_supports};
use msw_core::max_sw::{max_sw, AscentConfig};
use msw_core::msw::{
    estimator_variance_report, log_log_slope, monte_carlo_report, msw_directions, msw_estimate,
    msw_estimate_burn_thin, sample_chain, sample_chains, MswConfig, TransitionKind,
};
use msw_core::ot1d::wasserstein_1d;
use msw_core::sphere::{sample_uniform_sphere, sample_vmf, VmfParams};
use msw_core::sw_family::{projected_pth_powers, sliced_value, sw, sw_directions};
use msw_core::{project, Direction, DistanceParams, EmpiricalMeasure, RngStream};
use ndarray::{Array1, Array2};

const ORACLE_TOL: f64 = 1e-10;
const SANDWICH_TOL: f64 = 1e-9;
const TRIANGLE_TOL: f64 = 1e-9;
const SLOPE_TARGET: f64 = -0.5;
const SLOPE_TOL: f64 = 0.15;
const GRAD_REL_TOL: f64 = 1e-4;
const GRAD_MIN_SEPARATION: f64 = 1e-3;
const FD_STEP: f64 = 1e-6;
const UNIT_TOL: f64 = 1e-9;
const VMF_ANGLE_TOL: f64 = 0.01;
const LINEAR_RATIO: (f64, f64) = (1.6, 2.6);
const NLOGN_RATIO: (f64, f64) = (1.7, 2.8);

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cloud(rng: &mut RngStream, n: usize, d: usize, shift: f64) -> EmpiricalMeasure {
    EmpiricalMeasure::uniform(Array2::from_shape_fn((n, d), |_| rng.standard_normal() + shift)).unwrap()
}

const KERNELS: [TransitionKind; 4] = [
    TransitionKind::RandomWalk { kappa: 50.0 },
    TransitionKind::OrthogonalBased,
    TransitionKind::InputAwareDeterministic { eta: 0.1 },
    TransitionKind::InputAwareVmf { eta: 0.1, kappa: 50.0 },
];

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(1, 0);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let n = 1 + k % 6;
        let p = [1.0, 2.0, 3.0, 1.5][k % 4];
        let (mu, nu) = (cloud(&mut rng, n, 1, 0.0), cloud(&mut rng, n, 1, 0.3));
        let e = Direction::axis(1, 0);
        let fast = wasserstein_1d(&project(&mu, &e).unwrap(), &project(&nu, &e).unwrap(), p).unwrap();
        let brute = brute_force_wasserstein(&mu, &nu, p).unwrap();
        worst = worst.max((fast - brute).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= ORACLE_TOL && secs < 5.0, format!("200 fixtures, max |diff| {worst:.1e}, {secs:.2} s"))
}

fn hungarian_correctness() -> Outcome {
    let mut rng = RngStream::new(2, 0);
    let mut worst_brute: f64 = 0.0;
    for k in 0..100 {
        let (n, d, p) = (1 + k % 6, 1 + k % 3, [1.0, 2.0, 3.0][k % 3]);
        let (mu, nu) = (cloud(&mut rng, n, d, 0.0), cloud(&mut rng, n, d, 0.5));
        let diff = exact_wasserstein(&mu, &nu, p).unwrap() - brute_force_wasserstein(&mu, &nu, p).unwrap();
        worst_brute = worst_brute.max(diff.abs());
    }
    let mut worst_1d: f64 = 0.0;
    let e = Direction::axis(1, 0);
    for k in 0..100 {
        let p = [1.0, 2.0][k % 2];
        let (mu, nu) = (cloud(&mut rng, 50, 1, 0.0), cloud(&mut rng, 50, 1, 0.5));
        let sorted = wasserstein_1d(&project(&mu, &e).unwrap(), &project(&nu, &e).unwrap(), p).unwrap();
        worst_1d = worst_1d.max((exact_wasserstein(&mu, &nu, p).unwrap() - sorted).abs());
    }
    ensure(
        worst_brute <= ORACLE_TOL && worst_1d <= ORACLE_TOL,
        format!("vs brute force {worst_brute:.1e}, vs sorted 1D {worst_1d:.1e}"),
    )
}

fn sandwich() -> Outcome {
    let start = Instant::now();
    let mut rng = RngStream::new(3, 0);
    let mut checks = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..50u64 {
        let (mu, nu) = (cloud(&mut rng, 20, 5, 0.0), cloud(&mut rng, 20, 5, 0.4));
        let exact = exact_wasserstein(&mu, &nu, 2.0).unwrap();
        let mut values = Vec::new();
        let root = RngStream::new(seed, 0);
        let mut dirs = sw_directions(5, 20, &root).unwrap();
        for kind in KERNELS {
            let cfg = MswConfig::new(4, 5, 2.0, kind, seed);
            dirs.extend(msw_directions(&mu, &nu, &cfg, &cfg.root_stream()).unwrap());
            values.push(msw_estimate(&mu, &nu, &cfg).unwrap());
        }
        values.extend(projected_pth_powers(&mu, &nu, &dirs, 2.0).unwrap().iter().map(|w| w.sqrt()));
        values.push(max_sw(&mu, &nu, 2.0, &AscentConfig::new(50, 0.1, seed).unwrap()).unwrap().distance);
        for v in values {
            worst = worst.max(v - exact);
            checks += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        worst <= SANDWICH_TOL && secs < 60.0,
        format!("{checks} values, max (value - exact) {worst:.3e}, {secs:.1} s"),
    )
}

fn single_step_reduction() -> Outcome {
    let mut rng = RngStream::new(4, 0);
    let (mu, nu) = (cloud(&mut rng, 30, 4, 0.0), cloud(&mut rng, 30, 4, 1.0));
    let mut mismatches = 0;
    for seed in 0..20 {
        let reference = sw(&mu, &nu, 2.0, 8, &RngStream::new(seed, 0)).unwrap();
        for kind in KERNELS {
            let value = msw_estimate(&mu, &nu, &MswConfig::new(8, 1, 2.0, kind, seed)).unwrap();
            mismatches += usize::from(value.to_bits() != reference.to_bits());
        }
    }
    ensure(mismatches == 0, format!("20 seeds x 4 kernels, {mismatches} bitwise mismatches"))
}

fn metric_axioms() -> Outcome {
    let mut rng = RngStream::new(5, 0);
    let mut worst_triangle = f64::NEG_INFINITY;
    let (mut asymmetric, mut nonzero_identity) = (0, 0);
    for k in 0..100u64 {
        let kind = if k % 2 == 0 { KERNELS[0] } else { KERNELS[1] };
        let cfg = MswConfig::new(5, 4, 2.0, kind, k);
        let dirs: Vec<Direction> = sample_chains(3, None, &cfg, &cfg.root_stream())
            .unwrap()
            .iter()
            .flat_map(|c| c.kept_directions().cloned())
            .collect();
        let n = 3 + (k as usize) % 6;
        let (a, b, c) = (cloud(&mut rng, n, 3, 0.0), cloud(&mut rng, n, 3, 1.0), cloud(&mut rng, n, 3, -0.5));
        let dist = |x: &EmpiricalMeasure, y: &EmpiricalMeasure| sliced_value(x, y, &dirs, 2.0).unwrap();
        asymmetric += usize::from(dist(&a, &b).to_bits() != dist(&b, &a).to_bits());
        nonzero_identity += usize::from(dist(&a, &a) != 0.0);
        worst_triangle = worst_triangle.max(dist(&a, &c) - dist(&a, &b) - dist(&b, &c));
    }
    ensure(
        asymmetric == 0 && nonzero_identity == 0 && worst_triangle <= TRIANGLE_TOL,
        format!("100 triples, asymmetric {asymmetric}, identity violations {nonzero_identity}, max triangle excess {worst_triangle:.1e}"),
    )
}

fn monte_carlo_rate() -> Outcome {
    let x = make_gaussian(50, &[0.0; 5], 1.0, 1).unwrap();
    let y = make_gaussian(50, &[1.0, 0.0, 0.0, 0.0, 0.0], 1.5, 2).unwrap();
    let grid = [10, 40, 160];
    let lx: Vec<f64> = grid.iter().map(|&l| l as f64).collect();
    let slope = |rows: Vec<msw_core::msw::VarianceRow>| {
        let sds: Vec<f64> = rows.iter().map(|r| r.stddev).collect();
        log_log_slope(&lx, &sds)
    };
    let mut slopes = vec![("sw".to_string(), slope(monte_carlo_report(&grid, 50, |l, s| sw(&x, &y, 2.0, l, &RngStream::new(s, 0))).unwrap()))];
    for (name, kind) in ["msw-r", "msw-o", "msw-i", "msw-vi"].iter().zip(KERNELS) {
        let cfg = MswConfig::new(10, 5, 2.0, kind, 0);
        slopes.push((name.to_string(), slope(estimator_variance_report(&x, &y, &cfg, 50, &grid).unwrap())));
    }
    let ok = slopes.iter().all(|(_, s)| (s - SLOPE_TARGET).abs() <= SLOPE_TOL);
    let detail = slopes.iter().map(|(n, s)| format!("{n} {s:.3}")).collect::<Vec<_>>().join(", ");
    ensure(ok, format!("log-log slopes: {detail}"))
}

fn sorted_projection(x: &Array2<f64>, v: &Array1<f64>) -> Vec<f64> {
    let mut p = x.dot(v).to_vec();
    p.sort_by(f64::total_cmp);
    p
}

/// `W_p^p` of projections onto any vector `v`, by sorting.
fn projected_pth_power(x: &Array2<f64>, y: &Array2<f64>, v: &Array1<f64>, p: f64) -> f64 {
    let (a, b) = (sorted_projection(x, v), sorted_projection(y, v));
    a.iter().zip(&b).map(|(s, t)| (s - t).abs().powf(p)).sum::<f64>() / a.len() as f64
}

fn separation(x: &Array2<f64>, y: &Array2<f64>, v: &Array1<f64>) -> f64 {
    let (a, b) = (sorted_projection(x, v), sorted_projection(y, v));
    let gap = |s: &[f64]| s.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let residual = a.iter().zip(&b).map(|(s, t)| (s - t).abs()).fold(f64::INFINITY, f64::min);
    gap(&a).min(gap(&b)).min(residual)
}

fn rel_err(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let diff = a - b;
    diff.dot(&diff).sqrt() / b.dot(b).sqrt().max(1e-12)
}

fn gradient_checks() -> Outcome {
    let mut rng = RngStream::new(7, 0);
    let (mut worst_dir, mut worst_sup): (f64, f64) = (0.0, 0.0);
    let mut done = 0;
    while done < 100 {
        let (n, d, p) = (2 + done % 7, 1 + done % 4, [1.0, 1.5, 2.0, 3.0][done % 4]);
        let (mu, nu) = (cloud(&mut rng, n, d, 0.0), cloud(&mut rng, n, d, 0.6));
        let dirs: Vec<Direction> = (0..1 + done % 3).map(|_| sample_uniform_sphere(d, &mut rng).unwrap()).collect();
        let (x, y) = (mu.supports(), nu.supports());
        if dirs.iter().any(|t| separation(x, y, t.coords()) <= GRAD_MIN_SEPARATION) {
            continue;
        }
        done += 1;

        let theta = dirs[0].coords();
        let w = |v: &Array1<f64>| projected_pth_power(x, y, v, p).powf(1.0 / p);
        let fd = Array1::from_shape_fn(d, |i| {
            let (mut up, mut down) = (theta.clone(), theta.clone());
            up[i] += FD_STEP;
            down[i] -= FD_STEP;
            (w(&up) - w(&down)) / (2.0 * FD_STEP)
        });
        worst_dir = worst_dir.max(rel_err(&grad_direction(&mu, &nu, &dirs[0], p).unwrap(), &fd));

        let coords: Vec<Array1<f64>> = dirs.iter().map(|t| t.coords().clone()).collect();
        let sliced = |xs: &Array2<f64>| {
            let total: f64 = coords.iter().map(|v| projected_pth_power(xs, y, v, p)).sum();
            (total / coords.len() as f64).powf(1.0 / p)
        };
        let fd = Array1::from_shape_fn(n * d, |k| {
            let (mut up, mut down) = (x.clone(), x.clone());
            up[[k / d, k % d]] += FD_STEP;
            down[[k / d, k % d]] -= FD_STEP;
            (sliced(&up) - sliced(&down)) / (2.0 * FD_STEP)
        });
        let (_, g) = value_and_grad_supports(&mu, &nu, &dirs, p).unwrap();
        worst_sup = worst_sup.max(rel_err(&Array1::from_iter(g.iter().copied()), &fd));
    }
    ensure(
        worst_dir <= GRAD_REL_TOL && worst_sup <= GRAD_REL_TOL,
        format!("100 fixtures, max relative error direction {worst_dir:.1e}, supports {worst_sup:.1e}"),
    )
}

fn vmf_sampler() -> Outcome {
    let d = 5;
    let eps = sample_uniform_sphere(d, &mut RngStream::new(8, 0)).unwrap();
    let mut worst_norm: f64 = 0.0;
    let mut means = Vec::new();
    for (i, kappa) in [0.0, 1.0, 10.0, 100.0].into_iter().enumerate() {
        let params = VmfParams::new(eps.clone(), kappa).unwrap();
        let mut rng = RngStream::new(9, i as u64);
        let mut total = 0.0;
        for _ in 0..10_000 {
            let x = sample_vmf(&params, &mut rng).unwrap();
            worst_norm = worst_norm.max((x.coords().dot(x.coords()).sqrt() - 1.0).abs());
            total += x.dot(&eps);
        }
        means.push(total / 10_000.0);
    }
    let params = VmfParams::new(eps.clone(), 1e6).unwrap();
    let mut rng = RngStream::new(10, 0);
    let mut worst_angle: f64 = 0.0;
    for _ in 0..1000 {
        let x = sample_vmf(&params, &mut rng).unwrap();
        worst_norm = worst_norm.max((x.coords().dot(x.coords()).sqrt() - 1.0).abs());
        worst_angle = worst_angle.max(x.dot(&eps).min(1.0).acos());
    }
    let increasing = means.windows(2).all(|w| w[0] < w[1]);
    ensure(
        worst_norm <= UNIT_TOL && increasing && worst_angle < VMF_ANGLE_TOL,
        format!(
            "max |norm - 1| {worst_norm:.1e}, mean cosines {:?}, max angle at kappa=1e6 {worst_angle:.1e} rad",
            means.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn burn_thin_reduction() -> Outcome {
    let mut rng = RngStream::new(11, 0);
    let (mu, nu) = (cloud(&mut rng, 25, 3, 0.0), cloud(&mut rng, 25, 3, 0.8));
    let mut mismatches = 0;
    for seed in 0..20 {
        for kind in KERNELS {
            let cfg = MswConfig::new(3, 6, 2.0, kind, seed);
            let plain = msw_estimate(&mu, &nu, &cfg).unwrap();
            let burned = msw_estimate_burn_thin(&mu, &nu, &cfg.with_burn_thin(0, 1)).unwrap();
            mismatches += usize::from(plain.to_bits() != burned.to_bits());
        }
    }
    let mut endpoint_mismatches = 0;
    for seed in 0..20 {
        let t = 6;
        let cfg = MswConfig::new(1, t, 2.0, KERNELS[2], seed).with_burn_thin(t - 1, 1);
        let chain = sample_chain(3, Some((&mu, &nu)), &cfg, 1, &cfg.root_stream()).unwrap();
        let endpoint = sliced_value(&mu, &nu, &chain.directions[t - 1..], 2.0).unwrap();
        let burned = msw_estimate_burn_thin(&mu, &nu, &cfg).unwrap();
        endpoint_mismatches += usize::from(endpoint.to_bits() != burned.to_bits());
    }
    ensure(
        mismatches == 0 && endpoint_mismatches == 0,
        format!("(M=0,N=1) mismatches {mismatches} of 80, endpoint mismatches {endpoint_mismatches} of 20"),
    )
}

fn flow_descent() -> Outcome {
    let start = Instant::now();
    let specs = [
        ("sw", DistanceParams { projections: 10, ..Default::default() }),
        ("max-sw", DistanceParams { steps: 10, ..Default::default() }),
        ("ksw", DistanceParams { projections: 5, block: 2, ..Default::default() }),
        ("msw-i", DistanceParams { projections: 2, steps: 5, ..Default::default() }),
        ("msw-vi", DistanceParams { projections: 2, steps: 5, kappa: 50.0, ..Default::default() }),
    ];
    let mut failures = Vec::new();
    let mut wins = 0;
    for seed in 0..10u64 {
        let x = make_gaussian(100, &[0.0, 0.0], 1.0, 1000 + seed).unwrap();
        let y = make_s_shape(100, S_SHAPE_NOISE, 2000 + seed).unwrap();
        let mut finals = Vec::new();
        for (name, params) in &specs {
            let cfg = FlowConfig { steps: 300, step_size: 1e-3, distance: DistanceSpec::new(*name, *params), score_every: 300, seed };
            let trace = run_flow(&x, &y, &cfg).unwrap();
            if trace.final_w2() >= trace.initial_w2() {
                failures.push(format!("{name} seed {seed}"));
            }
            finals.push(trace.final_w2());
        }
        wins += usize::from(finals[3] <= finals[0]);
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(
        failures.is_empty() && wins >= 8 && secs < 600.0,
        format!("50 flows, non-descending {failures:?}, iMSW <= SW on {wins}/10 seeds, {secs:.1} s"),
    )
}

fn msw_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_msw"))
}

fn run_json(cmd: &mut Command) -> Result<serde_json::Value, String> {
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn color_transfer(work: &Path) -> Outcome {
    let out = work.join("transfer.png");
    let source = fixtures().join("sunset.png");
    let v = run_json(msw_bin().args(["color", "--k", "512", "--distance", "msw-i", "-L", "10", "-T", "5", "--seed", "1", "--out"]).arg(&out).arg(&source).arg(fixtures().join("sea.png")))?;
    let (before, after) = (v["source_w2"].as_f64().unwrap(), v["transferred_w2"].as_f64().unwrap());
    let image = read_rgb(&out).map_err(|e| e.to_string())?;
    let dims_ok = image.dimensions() == read_rgb(&source).map_err(|e| e.to_string())?.dimensions();
    // The PNG is 8-bit RGB, so every decoded channel is an integer in 0..=255.
    ensure(
        after < before && dims_ok && v["k"] == 512,
        format!("palette W2 {before:.4} -> {after:.4} at k = {}, dimensions preserved: {dims_ok}", v["k"]),
    )
}

fn bench_rows(work: &Path, name: &str, config: &str) -> Result<Vec<f64>, String> {
    let cfg = work.join(format!("{name}.json"));
    let out = work.join(format!("{name}.csv"));
    std::fs::write(&cfg, config).map_err(|e| e.to_string())?;
    let status = msw_bin().args(["--threads", "1", "bench"]).arg(&cfg).arg("--out").arg(&out).status().map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("bench {name} exited with {status}"));
    }
    let text = std::fs::read_to_string(&out).map_err(|e| e.to_string())?;
    Ok(text.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect())
}

fn complexity_trends(work: &Path) -> Outcome {
    let sw_l = bench_rows(work, "sw_l", r#"{"specs": [{"distance": "sw", "L": 250}, {"distance": "sw", "L": 500}], "n": [4000], "d": [10], "repetitions": 5}"#)?;
    let sw_n = bench_rows(work, "sw_n", r#"{"specs": [{"distance": "sw", "L": 250}], "n": [4000, 8000], "d": [10], "repetitions": 5}"#)?;
    let msw_t = bench_rows(work, "msw_t", r#"{"specs": [{"distance": "msw-i", "L": 10, "T": 10}, {"distance": "msw-i", "L": 10, "T": 20}], "n": [4000], "d": [10], "repetitions": 5}"#)?;
    let msw_l = bench_rows(work, "msw_l", r#"{"specs": [{"distance": "msw-i", "L": 10, "T": 10}, {"distance": "msw-i", "L": 20, "T": 10}], "n": [4000], "d": [10], "repetitions": 5}"#)?;
    let ratio = |v: &[f64]| v[1] / v[0];
    let within = |r: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&r);
    let (a, b, c, e) = (ratio(&sw_l), ratio(&sw_n), ratio(&msw_t), ratio(&msw_l));
    ensure(
        within(a, LINEAR_RATIO) && within(b, NLOGN_RATIO) && within(c, LINEAR_RATIO) && within(e, LINEAR_RATIO),
        format!("time ratios: sw L x2 {a:.2}, sw n x2 {b:.2}, msw-i T x2 {c:.2}, msw-i L x2 {e:.2}"),
    )
}

/// Output of one CLI invocation with wall-clock fields blanked.
fn deterministic_outputs(work: &Path, run: &str) -> Result<Vec<String>, String> {
    let dir = work.join(run);
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    make_gaussian(60, &[0.0, 0.0], 1.0, 1).unwrap().write_csv_file(&a).unwrap();
    make_s_shape(60, S_SHAPE_NOISE, 2).unwrap().write_csv_file(&b).unwrap();
    let threads = ["--threads", "2"];
    let mut outputs = Vec::new();

    for name in ["sw", "ksw", "max-sw", "max-ksw", "msw-r", "msw-o", "msw-i", "msw-vi", "exact"] {
        let mut v = run_json(msw_bin().args(threads).arg("dist").arg(&a).arg(&b).args(["--distance", name, "--seed", "7"]))?;
        v["seconds"] = serde_json::Value::Null;
        outputs.push(v.to_string());
    }

    let flow_dir = dir.join("flow");
    run_json(msw_bin().args(threads).args(["flow", "--fixture", "s-shape", "--steps", "100", "--seed", "5", "--out-dir"]).arg(&flow_dir))?;
    let trace = std::fs::read_to_string(flow_dir.join("trace.csv")).map_err(|e| e.to_string())?;
    outputs.push(trace.lines().map(|l| l.rsplit_once(',').unwrap().0).collect::<Vec<_>>().join("\n"));
    outputs.push(std::fs::read_to_string(flow_dir.join("final.csv")).map_err(|e| e.to_string())?);

    let png = dir.join("color.png");
    let v = run_json(
        msw_bin().args(threads).args(["color", "--k", "64", "--steps", "200", "--seed", "5", "--out"]).arg(&png)
            .arg(fixtures().join("sunset.png")).arg(fixtures().join("sea.png")),
    )?;
    outputs.push(format!("{} {}", v["source_w2"], v["transferred_w2"]));
    outputs.push(format!("{:?}", std::fs::read(&png).map_err(|e| e.to_string())?));

    let cfg = dir.join("bench.json");
    std::fs::write(&cfg, r#"{"specs": [{"distance": "msw-vi", "L": 3}, {"distance": "max-ksw"}], "n": [50], "d": [3]}"#).unwrap();
    let csv = dir.join("bench.csv");
    let status = msw_bin().args(threads).arg("bench").arg(&cfg).arg("--out").arg(&csv).status().map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("bench exited with {status}"));
    }
    let text = std::fs::read_to_string(&csv).map_err(|e| e.to_string())?;
    let masked = text.lines().map(|l| {
        let mut f: Vec<&str> = l.split(',').collect();
        f[3] = "-";
        f.join(",")
    });
    outputs.push(masked.collect::<Vec<_>>().join("\n"));
    Ok(outputs)
}

fn determinism(work: &Path) -> Outcome {
    let first = deterministic_outputs(work, "run1")?;
    let second = deterministic_outputs(work, "run2")?;
    let differing = first.iter().zip(&second).filter(|(a, b)| a != b).count();
    ensure(differing == 0, format!("{} outputs compared (timing fields masked), {differing} differ", first.len()))
}

fn main() -> ExitCode {
    let work = std::env::temp_dir().join(format!("msw-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&work).expect("scratch directory");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("hungarian correctness", Box::new(hungarian_correctness)),
        ("sandwich MSW <= Max-SW <= W_p", Box::new(sandwich)),
        ("T = 1 reduces to SW", Box::new(single_step_reduction)),
        ("metric axioms", Box::new(metric_axioms)),
        ("Monte Carlo rate", Box::new(monte_carlo_rate)),
        ("gradient checks", Box::new(gradient_checks)),
        ("vMF sampler", Box::new(vmf_sampler)),
        ("burn/thin reduction", Box::new(burn_thin_reduction)),
        ("flow descent", Box::new(flow_descent)),
        ("color transfer improvement", Box::new(|| color_transfer(&work))),
        ("complexity trends", Box::new(|| complexity_trends(&work))),
        ("determinism", Box::new(|| determinism(&work))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    std::fs::remove_dir_all(&work).ok();
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
