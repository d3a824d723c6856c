use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use aadp_core::aadp::{run_aadp, AadpConfig, AadpResult};
use aadp_core::diagnostics::{bound_reports_csv, default_bound_config, oracle_csv, oracle_row, oracle_suite, random_bound_reports};
use aadp_core::features::{derive_seed, FeatureStyle, FourierConfig, FrequencyMode};
use aadp_core::mdp::{MdpDocument, SampledMdp};
use aadp_core::pricing::{
    american_call_grid, bs_call, build_american_call_mdp, build_bermudan_barrier_mdp, epsilon_optimal_rate,
    simulate_policy_price, ActionRule, BarrierBenchmark, BermudanSampling, GbmModel, OptionContract, HOLD,
};
use toml::Value;

use crate::config::Params;
use crate::failure::{Failure, Kind};
use crate::manifest::{Manifest, OutputDir};

/// Stream of the simulation seed, apart from feature and sampling streams.
const SIMULATION_STREAM: u64 = 0x51;
const SAMPLING_STREAM: u64 = 0x52;

/// Tiny MDPs shipped with the binary for the oracle command.
const BUNDLED: [(&str, &str); 3] = [
    ("two-state-choice", include_str!("../data/two_state_choice.json")),
    ("three-state-chain", include_str!("../data/three_state_chain.json")),
    ("budgeted-pair", include_str!("../data/budgeted_pair.json")),
];

/// What a command leaves behind besides its files.
struct Report {
    notes: Vec<String>,
    summary: String,
    /// Raised after the manifest is written.
    deferred: Option<Failure>,
}

impl Report {
    fn new() -> Self {
        Report {
            notes: Vec::new(),
            summary: String::new(),
            deferred: None,
        }
    }

    fn line(&mut self, text: impl AsRef<str>) {
        self.summary.push_str(text.as_ref());
        self.summary.push('\n');
    }
}

/// Runs `command` into `out_dir`, writes the manifest and prints a summary.
pub fn execute(command: &str, mut params: Params, out_dir: &Path) -> Result<(), Failure> {
    let start = Instant::now();
    let mut out = OutputDir::create(out_dir)?;
    let mut report = Report::new();
    match command {
        "solve" => solve(&mut params, &mut out, &mut report)?,
        "price-american" => price_american(&params, &mut out, &mut report)?,
        "price-bermudan" => price_bermudan(&params, &mut out, &mut report)?,
        "diagnose" => diagnose(&params, &mut out, &mut report)?,
        "oracle" => oracle(&params, &mut out, &mut report)?,
        other => return Err(Failure::usage(format!("unknown command `{other}`"))),
    }
    let manifest = Manifest {
        tool: env!("CARGO_BIN_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        seed: params.u64("seed")?,
        parameters: params.to_json(),
        outputs: Vec::new(),
        outcome: report.deferred.as_ref().map_or("ok", |f| f.kind.as_str()).to_string(),
        notes: report.notes.clone(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
    };
    out.finish(manifest)?;
    print!("{}", report.summary);
    match report.deferred {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn features(params: &Params) -> Result<FourierConfig, Failure> {
    let style = match params.str("feature_style")? {
        "cos_only" => FeatureStyle::CosOnly,
        "paired_cos_sin" => FeatureStyle::PairedCosSin,
        other => return Err(Failure::usage(format!("feature_style `{other}` is not cos_only or paired_cos_sin"))),
    };
    let mode = match params.str("feature_mode")? {
        "hadamard_rademacher" => FrequencyMode::HadamardRademacher,
        "gaussian" => FrequencyMode::Gaussian,
        other => return Err(Failure::usage(format!("feature_mode `{other}` is not hadamard_rademacher or gaussian"))),
    };
    let bandwidth = match params.values.get("bandwidth") {
        Some(Value::String(s)) if s == "median" => None,
        _ => {
            let b = params.f64("bandwidth")?;
            if !(b > 0.0 && b.is_finite()) {
                return Err(Failure::usage(format!("bandwidth must be positive, got {b}")));
            }
            Some(b)
        }
    };
    Ok(FourierConfig {
        style,
        mode,
        bandwidth,
        radii: params.bool("radii")?,
    })
}

fn aadp_config(params: &Params, seed: u64) -> Result<AadpConfig, Failure> {
    Ok(AadpConfig {
        k: params.usize("K")?,
        l: params.usize("L")?,
        features: features(params)?,
        seed,
        slack: params.f64("slack")?,
    })
}

fn action_rule(params: &Params) -> Result<ActionRule, Failure> {
    match params.str("action_rule")? {
        "greedy" => Ok(ActionRule::Greedy),
        "sample" => Ok(ActionRule::Sample),
        other => Err(Failure::usage(format!("action_rule `{other}` is not greedy or sample"))),
    }
}

fn aadp(mdp: &SampledMdp, config: &AadpConfig) -> Result<AadpResult, Failure> {
    run_aadp(mdp, config).map_err(|e| Failure::usage(e.to_string()))
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Tallies unsolved AADP runs into one deferred LP failure.
#[derive(Default)]
struct Unsolved {
    count: usize,
    total: usize,
    first: Option<&'static str>,
}

impl Unsolved {
    fn record(&mut self, result: &AadpResult) {
        self.total += 1;
        if !result.is_solved() {
            self.count += 1;
            self.first.get_or_insert(result.status.as_str());
        }
    }

    fn into_failure(self) -> Option<Failure> {
        (self.count > 0).then(|| {
            Failure::new(
                Kind::Lp,
                format!(
                    "{} of {} AADP runs did not solve (first status {})",
                    self.count,
                    self.total,
                    self.first.unwrap_or("")
                ),
            )
        })
    }
}

fn solve(params: &mut Params, out: &mut OutputDir, report: &mut Report) -> Result<(), Failure> {
    let path = params.path("mdp")?;
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
    let doc: MdpDocument = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("{} is not an MDP document: {e}", path.display())))?;
    let mdp = SampledMdp::try_from(doc).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    // Record an absolute path so the manifest replays from any directory.
    if let Ok(abs) = path.canonicalize() {
        params.set("mdp", Value::String(abs.display().to_string()));
    }
    let config = aadp_config(params, params.u64("seed")?)?;
    let result = aadp(&mdp, &config)?;
    out.write("policy.csv", &result.to_csv(&mdp))?;
    // Kept for inspection with external solvers, solved or not.
    out.write("reduced.lp", &result.reduced.lp.to_lp_format())?;
    report.line(format!("status     {}", result.status.as_str()));
    report.line(format!("objective  {}", opt(result.objective())));
    report.line(format!("clipped    {}", result.clipped_mass));
    if !result.is_solved() {
        report.deferred = Some(Failure::new(Kind::Lp, format!("AADP status {}", result.status.as_str())));
    }
    Ok(())
}

fn american_model(params: &Params) -> Result<GbmModel, Failure> {
    let horizon = params.f64("T")?;
    let dt = params.f64("dt")?;
    if !(dt > 0.0 && horizon > 0.0) {
        return Err(Failure::usage("T and dt must be positive"));
    }
    let steps = (horizon / dt).round();
    if steps < 1.0 || (steps * dt - horizon).abs() > 1e-9 * horizon {
        return Err(Failure::usage(format!("T = {horizon} is not a whole number of steps dt = {dt}")));
    }
    GbmModel::new(params.f64("rate")?, params.f64("sigma")?, horizon, steps as usize).map_err(|e| Failure::usage(e.to_string()))
}

fn price_american(params: &Params, out: &mut OutputDir, report: &mut Report) -> Result<(), Failure> {
    let model = american_model(params)?;
    let strike = params.f64("strike")?;
    let seed = params.u64("seed")?;
    let n_paths = params.usize("n_paths")?;
    if n_paths == 0 {
        return Err(Failure::usage("n_paths must be at least 1"));
    }
    let rule = action_rule(params)?;
    let epsilon = params.f64("epsilon")?;
    let n_grid = params.usize("I")?;
    let mut unsolved = Unsolved::default();

    // Agreement of the AADP policy with never exercising, per (I, K) cell.
    let t1_s0 = params.f64("table1_s0")?;
    let t1_i = params.usize_list("table1_I")?;
    let t1_k = params.usize_list("table1_K")?;
    let replications = params.usize("replications")?;
    let mut runs = String::from("I,K,seed,status,rho,objective,clipped_mass\n");
    let mut wide = String::from("I");
    for k in &t1_k {
        let _ = write!(wide, ",K={k}");
    }
    wide.push('\n');
    for &i in &t1_i {
        let contract = OptionContract::american_call(strike, t1_s0);
        let grid = american_call_grid(&model, t1_s0, i);
        let sm = build_american_call_mdp(&model, &contract, &grid).map_err(|e| Failure::usage(e.to_string()))?;
        let reference = sm.always_hold();
        let _ = write!(wide, "{i}");
        for &k in &t1_k {
            let mut rhos = Vec::new();
            for r in 0..replications as u64 {
                let config = AadpConfig {
                    k,
                    ..aadp_config(params, seed + r)?
                };
                let result = aadp(&sm.mdp, &config)?;
                unsolved.record(&result);
                let rho = result.policy.as_ref().map(|p| epsilon_optimal_rate(p, &reference, HOLD, epsilon));
                rhos.extend(rho);
                let _ = writeln!(
                    runs,
                    "{i},{k},{},{},{},{},{}",
                    seed + r,
                    result.status.as_str(),
                    opt(rho),
                    opt(result.objective()),
                    result.clipped_mass
                );
            }
            let _ = write!(wide, ",{}", opt(median(&mut rhos)));
        }
        wide.push('\n');
    }
    out.write("table1.csv", &wide)?;
    out.write("table1_runs.csv", &runs)?;
    report.line(format!("rate of {epsilon}-optimal policy (median over {replications} seeds)"));
    report.summary.push_str(&wide);

    // Black-Scholes price against the simulated AADP policy, per initial price.
    let mut table2 = String::from("s0,bs_price,aadp_price,std_dev,std_error,n_paths,status,objective,clipped_mass\n");
    for s0 in params.f64_list("s0")? {
        let bs = bs_call(s0, strike, model.rate, model.sigma, model.horizon);
        let contract = OptionContract::american_call(strike, s0);
        let grid = american_call_grid(&model, s0, n_grid);
        let sm = build_american_call_mdp(&model, &contract, &grid).map_err(|e| Failure::usage(e.to_string()))?;
        let result = aadp(&sm.mdp, &aadp_config(params, seed)?)?;
        unsolved.record(&result);
        let est = result
            .policy
            .as_ref()
            .map(|p| simulate_policy_price(&sm, p, n_paths, derive_seed(seed, SIMULATION_STREAM), rule));
        let _ = writeln!(
            table2,
            "{s0},{bs},{},{},{},{n_paths},{},{},{}",
            opt(est.map(|e| e.mean)),
            opt(est.map(|e| e.std_dev)),
            opt(est.map(|e| e.std_error)),
            result.status.as_str(),
            opt(result.objective()),
            result.clipped_mass
        );
    }
    out.write("table2.csv", &table2)?;
    report.line("approximate price per initial price");
    report.summary.push_str(&table2);
    report.deferred = unsolved.into_failure();
    Ok(())
}

fn price_bermudan(params: &Params, out: &mut OutputDir, report: &mut Report) -> Result<(), Failure> {
    let model = GbmModel::new(params.f64("rate")?, params.f64("sigma")?, params.f64("T")?, params.usize("M")?)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let seed = params.u64("seed")?;
    let n_paths = params.usize("n_paths")?;
    if n_paths == 0 {
        return Err(Failure::usage("n_paths must be at least 1"));
    }
    let rule = action_rule(params)?;
    let sampling = BermudanSampling {
        n_states: params.usize("I")?,
        n_paths: params.usize("sample_paths")?,
        seed: derive_seed(seed, SAMPLING_STREAM),
        mesh_weights: params.bool("mesh_weights")?,
    };
    let config = aadp_config(params, seed)?;
    report.notes.push(format!(
        "desk scale: {} sampled live states from {} paths, K={}, L={}, M={}; the published table does not state its sampling scale",
        sampling.n_states, sampling.n_paths, config.k, config.l, model.steps
    ));
    report.notes.push(format!(
        "aadp is the mean over n_paths={n_paths} simulated paths and std_dev the per-path deviation; the published AADP column averages 100 simulations"
    ));
    let mut unsolved = Unsolved::default();
    let mut table3 = String::from(
        "s0,ls_lb,po_lb,aadp,std_dev,std_error,n_paths,dp_ub,po_ub,dvf_ub,published_aadp,published_std,status,objective,clipped_mass\n",
    );
    for s0 in params.f64_list("s0")? {
        let contract = OptionContract::bermudan_max_call(params.f64("strike")?, params.f64("barrier")?, params.usize("n_assets")?, s0);
        let sm = build_bermudan_barrier_mdp(&model, &contract, &sampling).map_err(|e| Failure::usage(e.to_string()))?;
        let result = aadp(&sm.mdp, &config)?;
        unsolved.record(&result);
        let est = result
            .policy
            .as_ref()
            .map(|p| simulate_policy_price(&sm, p, n_paths, derive_seed(seed, SIMULATION_STREAM), rule));
        let b = BarrierBenchmark::for_s0(s0);
        let _ = writeln!(
            table3,
            "{s0},{},{},{},{},{},{n_paths},{},{},{},{},{},{},{},{}",
            opt(b.map(|b| b.ls_lower)),
            opt(b.map(|b| b.po_lower)),
            opt(est.map(|e| e.mean)),
            opt(est.map(|e| e.std_dev)),
            opt(est.map(|e| e.std_error)),
            opt(b.map(|b| b.dp_upper)),
            opt(b.map(|b| b.po_upper)),
            opt(b.map(|b| b.dvf_upper)),
            opt(b.map(|b| b.aadp)),
            opt(b.map(|b| b.aadp_std)),
            result.status.as_str(),
            opt(result.objective()),
            result.clipped_mass
        );
    }
    out.write("table3.csv", &table3)?;
    report.line("price bounds and the simulated AADP price per initial price");
    report.summary.push_str(&table3);
    report.deferred = unsolved.into_failure();
    Ok(())
}

fn diagnose(params: &Params, out: &mut OutputDir, report: &mut Report) -> Result<(), Failure> {
    let n_states = params.usize("n_states")?;
    let gamma = params.f64("gamma")?;
    if !(0.0..1.0).contains(&gamma) {
        return Err(Failure::usage(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    let seed = params.u64("seed")?;
    let defaults = default_bound_config(n_states, seed);
    let config = AadpConfig {
        k: params.usize_or_auto("K")?.unwrap_or(defaults.k),
        l: params.usize_or_auto("L")?.unwrap_or(defaults.l),
        features: features(params)?,
        ..defaults
    };
    let reports = random_bound_reports(params.usize("n_instances")?, n_states, gamma, &config, seed)
        .map_err(|e| Failure::new(Kind::Lp, e.to_string()))?;
    out.write("bounds.csv", &bound_reports_csv(&reports))?;
    for r in reports.iter().filter(|r| !r.holds) {
        report
            .notes
            .push(format!("instance {}: lhs {} exceeds rhs {}", r.instance_id, r.lhs, r.rhs));
    }
    let holding = reports.iter().filter(|r| r.holds).count();
    report.line(format!("bound holds on {holding} of {} instances", reports.len()));
    Ok(())
}

fn oracle(params: &Params, out: &mut OutputDir, report: &mut Report) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for (name, text) in BUNDLED {
        let doc: MdpDocument = serde_json::from_str(text).expect("bundled documents parse");
        let mdp = SampledMdp::try_from(doc).expect("bundled documents are valid");
        rows.push(oracle_row(&mdp, name).map_err(|e| Failure::new(Kind::Check, format!("{name}: {e}")))?);
    }
    let random = oracle_suite(params.usize("n_instances")?, params.u64("seed")?)
        .map_err(|e| Failure::new(Kind::Check, e.to_string()))?;
    rows.extend(random);
    out.write("oracle.csv", &oracle_csv(&rows))?;
    let failed: Vec<&str> = rows.iter().filter(|r| !r.passed).map(|r| r.instance.as_str()).collect();
    report.line(format!("oracle: {} of {} instances pass", rows.len() - failed.len(), rows.len()));
    if !failed.is_empty() {
        report.deferred = Some(Failure::new(Kind::Check, format!("oracle disagreement on {}", failed.join(" "))));
    }
    Ok(())
}
