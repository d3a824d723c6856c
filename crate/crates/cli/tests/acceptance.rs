//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs as a plain binary (`harness = false`) so the lines
//! are always printed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use aadp_core::aadp::solve_with_bases;
use aadp_core::diagnostics::occupancy_equivalence_test;
use aadp_core::features::{generate_frequencies, hadamard, kernel_estimate, FeatureSet, FeatureStyle, FrequencyMode};
use aadp_core::mdp::{build_exact_lp, MdpParts, SampledMdp, SparseRows};
use aadp_core::pricing::bs_call;
use aadp_lp::{residuals, solve, solve_with, DenseLp, RowSense, Sense, SolverOptions, Status};
use aadp_testkit::{best_policy_by_enumeration, random_mdp, rbf, vertex_enumeration, Constraint, Rel, TabularMdp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

// ---------------------------------------------------------------- helpers

fn aadp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_aadp"))
}

/// Runs the binary; returns its exit code. Artifacts are read from `out`.
fn run_cli(args: &[&str], out: &Path) -> i32 {
    let status = aadp()
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    status.status.code().unwrap_or(-1)
}

fn read_csv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).unwrap_or_default();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let Some(header) = lines.next() else { return Vec::new() };
    let cols: Vec<&str> = header.split(',').collect();
    lines
        .map(|l| cols.iter().map(|c| c.to_string()).zip(l.split(',').map(str::to_string)).collect())
        .collect()
}

fn num(row: &BTreeMap<String, String>, col: &str) -> Option<f64> {
    row.get(col).and_then(|v| v.parse().ok())
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn to_sampled(t: &TabularMdp) -> SampledMdp {
    let (s, u) = (t.n_states(), t.n_actions());
    SampledMdp::new(MdpParts {
        states: (0..s).map(|x| vec![x as f64]).collect(),
        actions: (0..u).map(|a| format!("a{a}")).collect(),
        transitions: t.transition.iter().map(|p| SparseRows::from_dense(p)).collect(),
        reward: t.reward.iter().flatten().copied().collect(),
        cost: vec![0.0; s * u],
        cost_budget: None,
        discount: t.discount,
        initial: t.initial.clone(),
    })
    .expect("testkit MDPs are valid")
}

fn oracle_instances() -> Vec<TabularMdp> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_24);
    (0..50)
        .map(|i| {
            let s = rng.random_range(1..=6);
            let u = rng.random_range(1..=3);
            random_mdp(&mut rng, s, u, if i % 2 == 0 { 0.5 } else { 0.9 })
        })
        .collect()
}

// --------------------------------------------------------------- criteria

fn black_scholes() -> Outcome {
    let published = [(80.0, 1.86), (90.0, 5.09), (100.0, 10.45), (110.0, 17.66), (120.0, 26.17)];
    let worst = published
        .iter()
        .map(|&(s0, p)| (bs_call(s0, 100.0, 0.05, 0.2, 1.0) - p).abs())
        .fold(0.0, f64::max);
    check(worst <= 0.005, format!("max |BS - published| = {worst:.5}"))
}

fn oracle_suite() -> Outcome {
    let start = Instant::now();
    let mut worst_enum = 0.0f64;
    let mut worst_equiv = 0.0f64;
    let mut failures = Vec::new();
    for (i, t) in oracle_instances().iter().enumerate() {
        let mdp = to_sampled(t);
        let lp = solve(&build_exact_lp(&mdp));
        if !lp.is_optimal() {
            failures.push(format!("{i}: {:?}", lp.status));
            continue;
        }
        let (best, _) = best_policy_by_enumeration(t);
        worst_enum = worst_enum.max((lp.objective - best).abs());
        match occupancy_equivalence_test(&mdp) {
            Ok(r) => worst_equiv = worst_equiv.max((r.occupancy_objective - r.lp_objective).abs().max(r.flow_residual)),
            Err(e) => failures.push(format!("{i}: {e}")),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        failures.is_empty() && worst_enum <= 1e-6 && worst_equiv <= 1e-6 && secs < 30.0,
        format!("50 MDPs: max |LP - enumeration| {worst_enum:.2e}, max equivalence gap {worst_equiv:.2e}, {secs:.2}s {failures:?}"),
    )
}

fn identity_collapse() -> Outcome {
    let mut worst = 0.0f64;
    let mut unsolved = 0;
    for t in oracle_instances() {
        let mdp = to_sampled(&t);
        let exact = solve(&build_exact_lp(&mdp)).objective;
        let phi = FeatureSet::state_action_indicators(t.n_states(), t.n_actions());
        let psi = FeatureSet::state_indicators(t.n_states());
        match solve_with_bases(&mdp, &phi, &psi, 0.0, &SolverOptions::default()).map(|r| r.objective()) {
            Ok(Some(v)) => worst = worst.max((v - exact).abs()),
            _ => unsolved += 1,
        }
    }
    check(
        unsolved == 0 && worst <= 1e-6,
        format!("50 MDPs: max |AADP - exact| {worst:.2e}, unsolved {unsolved}"),
    )
}

fn random_bounded_lp(rng: &mut ChaCha8Rng, m: usize, n: usize) -> (DenseLp, Vec<Constraint>) {
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..2.0)).collect();
    let mut lp = DenseLp::new(Sense::Maximize, c);
    let mut oracle = Vec::new();
    for i in 0..m {
        let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
        let total: f64 = coeffs.iter().sum();
        // x = 1 satisfies every row, and the positive <= rows bound the region.
        let (sense, rel, rhs) = match i % 4 {
            1 => (RowSense::Ge, Rel::Ge, 0.5 * total),
            3 if n > m => (RowSense::Eq, Rel::Eq, total),
            _ => (RowSense::Le, Rel::Le, total * rng.random_range(1.0..3.0)),
        };
        lp.add_row(coeffs.clone(), sense, rhs).unwrap();
        oracle.push(Constraint { coeffs, rel, rhs });
    }
    (lp, oracle)
}

fn lp_solver() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_gap = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut bad = 0;
    for _ in 0..100 {
        let m = rng.random_range(2..=6);
        let n = rng.random_range(2..=7);
        let (lp, rows) = random_bounded_lp(&mut rng, m, n);
        let sol = solve(&lp);
        let Some((best, _)) = vertex_enumeration(lp.objective(), true, &rows) else {
            bad += 1;
            continue;
        };
        if sol.status != Status::Optimal {
            bad += 1;
            continue;
        }
        let res = residuals(&lp, &sol);
        let scale = 1.0 + sol.objective.abs();
        worst_gap = worst_gap.max((res.dual_objective - sol.objective).abs() / scale);
        worst_oracle = worst_oracle.max((sol.objective - best).abs() / scale);
    }
    let opts = SolverOptions {
        max_iterations: Some(10_000),
        ..SolverOptions::default()
    };
    let mut beale = DenseLp::new(Sense::Minimize, vec![-0.75, 20.0, -0.5, 6.0]);
    beale.add_row(vec![0.25, -8.0, -1.0, 9.0], RowSense::Le, 0.0).unwrap();
    beale.add_row(vec![0.5, -12.0, -0.5, 3.0], RowSense::Le, 0.0).unwrap();
    beale.add_row(vec![0.0, 0.0, 1.0, 0.0], RowSense::Le, 1.0).unwrap();
    let b = solve_with(&beale, &opts);
    let beale_ok = b.status == Status::Optimal && (b.objective + 1.25).abs() < 1e-9;
    let mut ms = DenseLp::new(Sense::Minimize, vec![-2.3, -2.15, 13.55, 0.4]);
    ms.add_row(vec![0.4, 0.2, -1.4, -0.2], RowSense::Le, 0.0).unwrap();
    ms.add_row(vec![-7.8, -1.4, 7.8, 0.4], RowSense::Le, 0.0).unwrap();
    let ms_status = solve_with(&ms, &opts).status;
    let ms_ok = matches!(ms_status, Status::Optimal | Status::Unbounded);
    let secs = start.elapsed().as_secs_f64();
    check(
        bad == 0 && worst_gap <= 1e-7 && worst_oracle <= 1e-7 && beale_ok && ms_ok && secs < 60.0,
        format!(
            "100 LPs: max duality gap {worst_gap:.2e}, max |LP - vertex enumeration| {worst_oracle:.2e}, failures {bad}; Beale {:?}, Marshall-Suurballe {ms_status:?}; {secs:.2}s",
            b.status
        ),
    )
}

fn kernel_error(m: usize, pts: &[Vec<f64>]) -> f64 {
    let per_seed: Vec<f64> = (0..20)
        .map(|seed| {
            let f = generate_frequencies(3, m, FrequencyMode::Gaussian, 1.0, seed, true).unwrap();
            let errs = (0..100)
                .map(|i| {
                    let (x, y) = (&pts[2 * i], &pts[2 * i + 1]);
                    (kernel_estimate(x, y, &f, FeatureStyle::PairedCosSin).unwrap() - rbf(x, y, 1.0)).abs()
                })
                .collect();
            median(errs).unwrap()
        })
        .collect();
    median(per_seed).unwrap()
}

fn kernel_approximation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts: Vec<Vec<f64>> = (0..200).map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let f = generate_frequencies(3, 512, FrequencyMode::HadamardRademacher, 1.0, 1, true).unwrap();
    let diag = pts
        .iter()
        .map(|x| (kernel_estimate(x, x, &f, FeatureStyle::PairedCosSin).unwrap() - 1.0).abs())
        .fold(0.0, f64::max);
    let errs: Vec<f64> = [64, 256, 1024].iter().map(|&m| kernel_error(m, &pts)).collect();
    let hadamard_ok = (0..=10u32).all(|k| {
        let h = hadamard(k).unwrap();
        let n = h.len();
        (0..n).all(|i| (0..n).all(|j| (0..n).map(|c| (h[i][c] * h[j][c]) as i64).sum::<i64>() == if i == j { n as i64 } else { 0 }))
    });
    check(
        diag <= 1e-12 && errs[0] > errs[1] && errs[1] > errs[2] && errs[2] <= 0.1 && hadamard_ok,
        format!("max |K(x,x) - 1| {diag:.1e}; median error m=64,256,1024: {errs:.4?}; Hadamard identity k<=10 {hadamard_ok}"),
    )
}

fn table1(dir: &Path) -> Outcome {
    let out = dir.join("table1");
    let start = Instant::now();
    let code = run_cli(
        &["price-american", "--set", "s0=[100.0]", "--set", "I=200", "--set", "table1_I=[200]", "--set", "table1_K=[200, 400]", "--set", "replications=5"],
        &out,
    );
    let secs = start.elapsed().as_secs_f64();
    let runs = read_csv(&out.join("table1_runs.csv"));
    let rho = |k: &str| -> Vec<Option<f64>> {
        runs.iter().filter(|r| r["K"] == k).map(|r| num(r, "rho")).collect()
    };
    let (r200, r400) = (rho("200"), rho("400"));
    let statuses: Vec<&str> = runs.iter().map(|r| r["status"].as_str()).collect();
    let med = median(r400.iter().flatten().copied().collect());
    let trend = r200.iter().zip(&r400).filter(|(a, b)| matches!((a, b), (Some(a), Some(b)) if a <= b)).count();
    check(
        med.is_some_and(|m| m >= 0.9) && trend >= 4 && secs < 300.0,
        format!("exit {code}; median rho(K=400) {med:?}; rho(K=200) <= rho(K=400) in {trend}/5 seeds; statuses {statuses:?}; {secs:.1}s"),
    )
}

fn table2(dir: &Path) -> Outcome {
    let out = dir.join("table2");
    let code = run_cli(&["price-american", "--set", "s0=[100.0]", "--set", "table1_K=[400]", "--set", "replications=1"], &out);
    let rows = read_csv(&out.join("table2.csv"));
    let Some(row) = rows.first() else { return Err(format!("exit {code}; no table2.csv row")) };
    let price = num(row, "aadp_price");
    let std = num(row, "std_dev");
    let bs = num(row, "bs_price");
    check(
        price.is_some_and(|p| (p - 10.45).abs() <= 0.5) && std.is_some_and(|s| (0.3..=0.8).contains(&s)),
        format!("exit {code}; P* {bs:?}, simulated {price:?}, per-path std {std:?}, status {}", row["status"]),
    )
}

fn table3(dir: &Path) -> Outcome {
    let out = dir.join("table3");
    let start = Instant::now();
    let code = run_cli(&["price-bermudan"], &out);
    let secs = start.elapsed().as_secs_f64();
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap_or_default();
    let recorded = manifest.contains("desk scale");
    let rows = read_csv(&out.join("table3.csv"));
    let mut all = rows.len() == 3 && recorded;
    let mut detail = Vec::new();
    for r in &rows {
        let lo = num(r, "ls_lb").unwrap_or(f64::NAN).min(num(r, "po_lb").unwrap_or(f64::NAN)) - 1.0;
        let hi = [num(r, "dp_ub"), num(r, "po_ub"), num(r, "dvf_ub")].iter().flatten().fold(f64::NAN, |a, b| a.max(*b)) + 1.0;
        let p = num(r, "aadp");
        all &= p.is_some_and(|p| lo <= p && p <= hi);
        detail.push(format!("s0 {}: {p:?} in [{lo:.3}, {hi:.3}] ({})", r["s0"], r["status"]));
    }
    check(all, format!("exit {code}; {}; scale recorded {recorded}; {secs:.1}s", detail.join("; ")))
}

fn bound_report(dir: &Path) -> Outcome {
    let out = dir.join("bounds");
    let code = run_cli(&["diagnose", "--set", "n_instances=20"], &out);
    let rows = read_csv(&out.join("bounds.csv"));
    let finite = rows
        .iter()
        .all(|r| num(r, "lhs").is_some_and(f64::is_finite) && num(r, "rhs").is_some_and(f64::is_finite));
    let holding = rows.iter().filter(|r| r["holds"] == "true").count();
    check(
        code == 0 && rows.len() == 20 && finite,
        format!("exit {code}; {} reports, all finite {finite}; inequality holds on {holding}/20 (violations logged only)", rows.len()),
    )
}

fn csv_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .map(|entries| {
            entries
                .flatten()
                .filter(|e| e.path().extension().is_some_and(|x| x == "csv"))
                .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
                .collect()
        })
        .unwrap_or_default()
}

fn determinism(dir: &Path, data: &Path) -> Outcome {
    let mdp = format!("mdp=\"{}\"", data.join("three_state_chain.json").display());
    let runs: [(&str, Vec<&str>); 5] = [
        ("oracle", vec!["oracle", "--set", "n_instances=10"]),
        ("diagnose", vec!["diagnose", "--set", "n_instances=5"]),
        ("solve", vec!["solve", "--set", &mdp, "--set", "K=6", "--set", "L=3"]),
        ("american", vec!["price-american", "--set", "s0=[100.0]", "--set", "table1_K=[200]", "--set", "replications=2"]),
        ("bermudan", vec!["price-bermudan", "--set", "s0=[100.0]", "--set", "I=100", "--set", "K=40", "--set", "L=10", "--set", "sample_paths=200", "--set", "n_paths=200"]),
    ];
    let mut mismatched = Vec::new();
    let mut files = 0;
    for (name, args) in runs {
        let first = dir.join(format!("{name}-a"));
        let second = dir.join(format!("{name}-b"));
        run_cli(&args, &first);
        let manifest = first.join("manifest.json");
        run_cli(&["replay", manifest.to_str().unwrap()], &second);
        let (a, b) = (csv_files(&first), csv_files(&second));
        files += a.len();
        if a.is_empty() || a != b {
            mismatched.push(name);
        }
    }
    check(
        mismatched.is_empty(),
        format!("{files} CSVs from 5 commands replayed from their manifests; mismatched {mismatched:?}"),
    )
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir: PathBuf = tmp.path().to_path_buf();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 Black-Scholes prices", Box::new(black_scholes)),
        ("2 small-instance oracle suite", Box::new(oracle_suite)),
        ("3 identity-basis collapse", Box::new(identity_collapse)),
        ("4 LP solver", Box::new(lp_solver)),
        ("5 kernel approximation", Box::new(kernel_approximation)),
        ("6 American agreement rate", Box::new(|| table1(&dir))),
        ("7 American simulated price", Box::new(|| table2(&dir))),
        ("8 Bermudan barrier price", Box::new(|| table3(&dir))),
        ("9 approximation bound report", Box::new(|| bound_report(&dir))),
        ("10 determinism", Box::new(|| determinism(&dir, &data))),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        match run() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
