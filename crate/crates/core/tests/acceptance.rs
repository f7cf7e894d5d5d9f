//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use argmaxlab::cli::{execute, ExperimentConfig, Overrides, ResolvedConfig};
use argmaxlab::mc_harness::MCReport;
use argmaxlab::process_lab::{
    argmax_over, polyhedral_argmax, ArgmaxConstraint, PathSample, QuadraticLimit,
};
use argmaxlab::set_kernel::families::family;
use argmaxlab::set_kernel::{hausdorff, pk_limit_estimate, GridSet, Offset, PolyhedralSet};
use argmaxlab::Execution;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

type Check = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Run {
    report: MCReport,
    secs: f64,
}

fn load(name: &str) -> ResolvedConfig {
    let path = common::configs_dir().join(format!("{name}.json"));
    ExperimentConfig::load(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .resolve(&Overrides::default())
        .unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn run(name: &str, exec: Execution) -> Run {
    let mut cfg = load(name);
    cfg.opts.exec = exec;
    let t = Instant::now();
    let report = execute(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
    Run {
        report,
        secs: t.elapsed().as_secs_f64(),
    }
}

fn failed_rules(r: &MCReport) -> String {
    let bad: Vec<String> = r
        .rules
        .iter()
        .filter(|x| !x.pass)
        .map(|x| x.line())
        .collect();
    if bad.is_empty() {
        String::new()
    } else {
        format!("; failing: {}", bad.join("; "))
    }
}

fn ks_list(r: &MCReport) -> String {
    r.comparisons
        .iter()
        .map(|c| format!("{} {:.4}", c.name, c.ks))
        .collect::<Vec<_>>()
        .join(", ")
}

fn from_report(run: &Run, max_secs: Option<f64>) -> Outcome {
    let fast = max_secs.is_none_or(|m| run.secs < m);
    outcome(
        run.report.pass && fast,
        format!(
            "KS [{}], {:.1} s{}",
            ks_list(&run.report),
            run.secs,
            failed_rules(&run.report)
        ),
    )
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for (problem, want) in family("remark3", None)
        .unwrap()
        .into_iter()
        .zip([vec![0.0, 1.0], vec![0.0]])
    {
        let est = pk_limit_estimate(
            &problem.sequence,
            &problem.window,
            &problem.schedule,
            problem.grid_step,
        )
        .unwrap();
        let d = &est.diagnostics;
        let fwd = *d.forward.last().unwrap();
        let bwd = *d.backward.last().unwrap();
        let exact = est.set.coords() == want.as_slice();
        ok &= exact
            && d.converged
            && fwd < 1e-3
            && bwd < 1e-3
            && *d.schedule.last().unwrap() == 10_000;
        parts.push(format!(
            "{}: {:?} (d+ {fwd:.1e}, d- {bwd:.1e})",
            problem.name,
            est.set.coords()
        ));
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        ok && secs < 1.0,
        format!("{}, {secs:.3} s", parts.join("; ")),
    )
}

fn criterion_2() -> Outcome {
    let t = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut problems: Vec<(Option<f64>, _)> = family("lemma2a", None)
        .unwrap()
        .into_iter()
        .map(|p| (None, p))
        .collect();
    for a in [-0.5, 0.0, 1.0] {
        problems.extend(
            family("lemma2b", Some(a))
                .unwrap()
                .into_iter()
                .map(|p| (Some(a), p)),
        );
    }
    for (a, p) in problems {
        let est = pk_limit_estimate(&p.sequence, &p.window, &p.schedule, p.grid_step).unwrap();
        let lattice = GridSet::lattice(&p.window, p.grid_step).unwrap();
        let target = match a {
            None => lattice,
            Some(a) => lattice.filter(|x| x[0] <= a + 1e-9),
        };
        let err = hausdorff(&est.set, &target).unwrap();
        ok &= est.diagnostics.converged
            && err <= p.grid_step + 1e-12
            && *p.schedule.last().unwrap() == 1_000_000;
        parts.push(format!("{}: Hausdorff {err:.3}", p.name));
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        ok && secs < 10.0,
        format!("{}, {secs:.2} s", parts.join("; ")),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = common::rng(0x5eed_0008);
    let mut worst_err: f64 = 0.0;
    let mut worst_kkt: f64 = 0.0;
    let mut worst_grid_gain = f64::NEG_INFINITY;
    let mut solve_secs = 0.0;
    for _ in 0..1000 {
        let inst = common::random_qp(&mut rng);
        let d = inst.v.nrows();
        let m = inst.g.nrows();
        let rows: Vec<Vec<f64>> = (0..m)
            .map(|j| inst.g.row(j).iter().copied().collect())
            .collect();
        let offsets = (0..m).map(|j| Offset::Finite(inst.b[j])).collect();
        let p = PolyhedralSet::new(d, rows, offsets).unwrap();
        let q = QuadraticLimit::new(inst.v.clone(), DMatrix::identity(d, d), DVector::zeros(d))
            .unwrap();
        let t = Instant::now();
        let sol = polyhedral_argmax(&q, &inst.z, &p).unwrap();
        solve_secs += t.elapsed().as_secs_f64();
        let exact = common::enumerate_qp(&inst.v, &inst.z, &inst.g, &inst.b);
        let err = sol
            .h
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst_err = worst_err.max(err);
        let grid = common::brute_force_qp(&inst.v, &inst.z, &inst.g, &inst.b);
        let h: Vec<f64> = sol.h.iter().copied().collect();
        let gain =
            common::qp_value(&inst.v, &inst.z, &grid) - common::qp_value(&inst.v, &inst.z, &h);
        worst_grid_gain = worst_grid_gain.max(gain);
        worst_kkt = worst_kkt.max(sol.kkt.worst());
    }
    outcome(
        worst_err <= 2e-3 && worst_grid_gain <= 1e-9 && worst_kkt <= 1e-8 && solve_secs < 30.0,
        format!(
            "max |h - h_enum| {worst_err:.2e}, best grid point beats solver by {worst_grid_gain:.2e}, \
             max KKT residual {worst_kkt:.2e}, solver {solve_secs:.3} s"
        ),
    )
}

fn dyadic_path(rng: &mut impl Rng, len: usize) -> (Vec<f64>, Vec<f64>) {
    let start = rng.random_range(-512i64..512) as f64 / 64.0;
    let grid = (0..len).map(|j| start + j as f64 / 64.0).collect();
    // coarse values so that exact ties occur
    let values = (0..len)
        .map(|_| rng.random_range(-64i64..64) as f64 / 16.0)
        .collect();
    (grid, values)
}

fn sup(grid: &[f64], values: &[f64]) -> f64 {
    let path = PathSample::new(grid.to_vec(), values.to_vec(), 0, "test").unwrap();
    argmax_over(&path, &ArgmaxConstraint::Full).unwrap().value
}

fn argmax_s(grid: Vec<f64>, values: Vec<f64>) -> f64 {
    let path = PathSample::new(grid, values, 0, "test").unwrap();
    argmax_over(&path, &ArgmaxConstraint::Full).unwrap().s
}

fn criterion_9() -> Outcome {
    let mut rng = common::rng(0x5eed_0009);
    let mut bound_fail = 0;
    for _ in 0..1000 {
        let len = rng.random_range(2..200);
        let (grid, f) = dyadic_path(&mut rng, len);
        let (_, g) = dyadic_path(&mut rng, len);
        let gap = f
            .iter()
            .zip(&g)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if (sup(&grid, &f) - sup(&grid, &g)).abs() > gap {
            bound_fail += 1;
        }
    }
    let mut inv_fail = 0;
    for _ in 0..1000 {
        let len = rng.random_range(2..200);
        let (grid, f) = dyadic_path(&mut rng, len);
        let s0 = argmax_s(grid.clone(), f.clone());
        let scale = 2f64.powi(rng.random_range(-6..=6));
        let shift = rng.random_range(-1000i64..1000) as f64;
        let moved = rng.random_range(-256i64..256) as f64 / 32.0;
        let scaled = argmax_s(grid.clone(), f.iter().map(|v| scale * v + shift).collect());
        let translated = argmax_s(grid.iter().map(|s| s + moved).collect(), f.clone());
        if scaled != s0 || translated != s0 + moved {
            inv_fail += 1;
        }
    }
    let (repro_ok, repro_detail) = reproducibility();
    outcome(
        bound_fail == 0 && inv_fail == 0 && repro_ok,
        format!("sup-difference violations {bound_fail}/1000, invariance violations {inv_fail}/1000, {repro_detail}"),
    )
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect()
}

static FIRST_RUNS: std::sync::OnceLock<std::sync::Mutex<BTreeMap<String, MCReport>>> =
    std::sync::OnceLock::new();

fn first_runs() -> &'static std::sync::Mutex<BTreeMap<String, MCReport>> {
    FIRST_RUNS.get_or_init(Default::default)
}

fn remember(name: &str, r: &Run) {
    first_runs()
        .lock()
        .unwrap()
        .insert(name.to_string(), r.report.clone());
}

const ALL_CONFIGS: [&str; 13] = [
    "pk_remark3",
    "pk_lemma2a",
    "pk_lemma2b",
    "pk_lemma6_weak",
    "pk_lemma6_semistrong",
    "corollary1a",
    "corollary1b",
    "corollary2",
    "corollary3_weak",
    "corollary3_semistrong",
    "value_convergence",
    "limit_sample",
    "smoke_corollary1a",
];

/// Rerun every example config sequentially and compare raw CSVs with the
/// first (parallel) run byte for byte.
fn reproducibility() -> (bool, String) {
    let tmp = tempfile::tempdir().unwrap();
    let mut files = 0;
    let mut differing = Vec::new();
    for name in ALL_CONFIGS {
        let first = match first_runs().lock().unwrap().get(name) {
            Some(r) => r.clone(),
            None => run(name, Execution::Parallel).report,
        };
        let second = run(name, Execution::Sequential).report;
        let (a, b) = (
            tmp.path().join(name).join("a"),
            tmp.path().join(name).join("b"),
        );
        first.write(&a).unwrap();
        second.write(&b).unwrap();
        let (fa, fb) = (csv_files(&a), csv_files(&b));
        files += fa.len();
        if fa.is_empty() || fa != fb {
            differing.push(name);
        }
    }
    (
        differing.is_empty(),
        format!(
            "{} configs, {files} CSV files, byte-identical across runs{}",
            ALL_CONFIGS.len(),
            if differing.is_empty() {
                String::new()
            } else {
                format!(" except {}", differing.join(", "))
            }
        ),
    )
}

fn report_criterion(name: &str, max_secs: Option<f64>) -> Outcome {
    let r = run(name, Execution::Parallel);
    remember(name, &r);
    from_report(&r, max_secs)
}

fn criterion_6() -> Outcome {
    let w = run("corollary3_weak", Execution::Parallel);
    let s = run("corollary3_semistrong", Execution::Parallel);
    remember("corollary3_weak", &w);
    remember("corollary3_semistrong", &s);
    let a = from_report(&w, None);
    let b = from_report(&s, None);
    outcome(
        a.pass && b.pass,
        format!("weak: {}; semi-strong: {}", a.detail, b.detail),
    )
}

fn main() {
    let criteria: [Check; 10] = [
        (
            1,
            "set limit of {1/n, 1-1/n} and its intersection with F",
            criterion_1,
        ),
        (
            2,
            "rescaled break-date sets converge to K and K ∩ (-inf, a]",
            criterion_2,
        ),
        (
            3,
            "break date, interior drift: finite vs limit and symmetry",
            || report_criterion("corollary1a", Some(600.0)),
        ),
        (4, "break date, drifting toward the trimming bound", || {
            report_criterion("corollary1b", None)
        }),
        (
            5,
            "boundary parameter: coordinates and boundary mass",
            || report_criterion("corollary2", Some(300.0)),
        ),
        (6, "weak and semi-strong identification", criterion_6),
        (7, "value convergence of the centered sup", || {
            report_criterion("value_convergence", None)
        }),
        (8, "quadratic program vs exhaustive oracles", criterion_8),
        (
            9,
            "sup bound, argmax invariance and reproducibility",
            criterion_9,
        ),
        (10, "limit sampler noise floor", || {
            report_criterion("limit_sample", None)
        }),
    ];
    let mut failures = 0;
    for (id, title, check) in criteria {
        let o = check();
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {id:>2} [{}] {title}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of 10 criteria passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
