//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line with the measured numbers.
//!
//! Run: `cargo test -p lwa-harness --test acceptance -- --nocapture`
//!
//! Criteria 5-7 share one set of ARMA sweep runs (20 replications x
//! 200k iterations per setting), computed once behind a lazy fixture.

use std::path::Path;
use std::sync::LazyLock;

use lwa_harness::commands::{
    cmd_generate, cmd_oracle_check, cmd_run, cmd_sweep, SweepReport,
};
use lwa_harness::config::ExperimentConfig;
use lwa_mcmc::analysis::{
    cost_to_error_threshold, grid_posterior_probit, kl_on_grid, probit_grid_spec, prop1_bound,
    tv_samples_vs_grid,
};
use lwa_mcmc::models::{
    classification_error, pack_params, simulate_gaussmix, simulate_probit, GaussMixClassModel,
    ProbitModel,
};
use lwa_mcmc::samplers::{run_chain, Budget, RunConfig, SamplerKind, SubsetProposalConfig};
use lwa_mcmc::summary::{make_statistic, StatisticKind};
use lwa_mcmc::{Dataset, RngStream};

const GAMMA: f64 = 1.0;
const PROBIT_PRIOR: (f64, f64) = (0.0, 10.0);

fn pass_line(criterion: &str, detail: String) {
    println!("[acceptance] {criterion}: PASS ({detail})");
}

/// Probit N = 10^4 instance with the one-count rounded to a multiple of
/// 100 (< 1% of labels flipped), so that statistic mismatches
/// r in {0, .01, ...} are exactly realizable with n = 100 subsets.
fn adjusted_probit_instance() -> Dataset {
    let mut rng = RngStream::new(33);
    let data = simulate_probit(10_000, 1.0, GAMMA, &mut rng);
    let mut values = data.raw().to_vec();
    let ones = values.iter().filter(|&&v| v > 0.5).count();
    let mut surplus = ones % 100;
    for v in values.iter_mut() {
        if surplus == 0 {
            break;
        }
        if *v > 0.5 {
            *v = 0.0;
            surplus -= 1;
        }
    }
    Dataset::univariate(values, lwa_mcmc::Flavor::Iid).unwrap()
}

fn count_ones(data: &Dataset) -> u64 {
    data.raw().iter().filter(|&&v| v > 0.5).count() as u64
}

// ---------------------------------------------------------------------
// Criteria 1 + 2: enumeration oracles on the probit N=8, n=3 instance.
// ---------------------------------------------------------------------

static ORACLE: LazyLock<lwa_harness::commands::OracleReport> = LazyLock::new(|| {
    let dir = tempfile::tempdir().unwrap();
    cmd_oracle_check(dir.path(), 1_000_000, 5).unwrap()
});

#[test]
fn criterion_01_oracle_stationarity() {
    let report = &*ORACLE;
    let get = |name: &str| report.checks.iter().find(|c| c.name == name).unwrap();
    let nu = get("nu_sums_to_one");
    let subset = get("subset_chain_tv");
    let joint = get("joint_marginal_tv");
    assert!(nu.pass, "nu normalization off by {}", nu.measured);
    assert!(subset.pass, "subset-chain TV {} > {}", subset.measured, subset.tolerance);
    assert!(joint.pass, "joint-marginal TV {} > {}", joint.measured, joint.tolerance);
    pass_line(
        "criterion 1 (oracle stationarity)",
        format!(
            "nu gap {:.1e}, subset TV {:.4}, joint TV {:.4} at 1e6 steps",
            nu.measured, subset.measured, joint.measured
        ),
    );
}

#[test]
fn criterion_02_detailed_balance() {
    let report = &*ORACLE;
    let db = report.checks.iter().find(|c| c.name == "detailed_balance").unwrap();
    assert!(db.pass, "detailed-balance violation {} > {}", db.measured, db.tolerance);
    pass_line(
        "criterion 2 (detailed balance identity)",
        format!("max violation {:.1e} over all subset pairs", db.measured),
    );
}

// ---------------------------------------------------------------------
// Criteria 3 + 4: KL bound and sub-posterior geometry on grid oracles.
// ---------------------------------------------------------------------

#[test]
fn criterion_03_kl_bound_table() {
    let data = adjusted_probit_instance();
    let (n_full, ones_full) = (10_000u64, count_ones(&data));
    assert_eq!(ones_full % 100, 0);
    let n_sub = 100u64;
    let p_hat = ones_full as f64 / n_full as f64;
    let base_ones = (p_hat * n_sub as f64).round() as u64;
    let r_values = [0.0, 0.01, 0.04, 0.07, 0.1];
    let ones_subs: Vec<u64> =
        r_values.iter().map(|r| base_ones + (r * n_sub as f64).round() as u64).collect();

    // one shared grid covering the full posterior, the table's
    // sub-posteriors, and the random subsets of part (d)
    let mut rng = RngStream::new(34);
    let random_subsets: Vec<u64> = (0..50)
        .map(|_| {
            let picks = rand::seq::index::sample(&mut rng, n_full as usize, n_sub as usize);
            picks.iter().filter(|&i| data.value(i) > 0.5).count() as u64
        })
        .collect();
    let mut spec = probit_grid_spec(n_full, ones_full, GAMMA, PROBIT_PRIOR, 8192);
    for &ones in ones_subs.iter().chain(&random_subsets) {
        spec = spec.union(&probit_grid_spec(n_sub, ones, GAMMA, PROBIT_PRIOR, 8192));
    }
    let posterior =
        grid_posterior_probit(n_full, ones_full, GAMMA, PROBIT_PRIOR, &spec).unwrap();

    let mut kls = Vec::new();
    let mut bs = Vec::new();
    for (&r, &ones) in r_values.iter().zip(&ones_subs) {
        let sub = grid_posterior_probit(n_sub, ones, GAMMA, PROBIT_PRIOR, &spec).unwrap();
        let kl = kl_on_grid(&posterior, &sub).unwrap();
        let bound = prop1_bound(&posterior, GAMMA, n_full, ones_full, n_sub, ones).unwrap();
        assert!(
            (bound.xi_norm - r).abs() < 1e-9,
            "requested r = {r}, achieved {}",
            bound.xi_norm
        );
        kls.push(kl);
        bs.push(bound.b);
    }

    // (a) perfect match has B = 0
    assert!(bs[0].abs() <= 1e-10, "B at r=0 is {}", bs[0]);
    // (b) B non-decreasing, strictly overall
    for w in bs.windows(2) {
        assert!(w[1] >= w[0], "B decreased: {:?}", bs);
    }
    assert!(bs[4] > bs[0], "B failed to grow across the table: {bs:?}");
    // (c) measured KL strictly increasing, ratio at r=.1 within [1.8, 4.0]
    for w in kls.windows(2) {
        assert!(w[1] > w[0], "KL not strictly increasing: {kls:?}");
    }
    let ratio = kls[4] / kls[0];
    assert!(
        (1.8..=4.0).contains(&ratio),
        "KL ratio at r=0.1 vs r=0 is {ratio}, outside [1.8, 4.0]"
    );
    // (d) KL <= Psi + B on 50 random subsets
    for &ones in &random_subsets {
        let sub = grid_posterior_probit(n_sub, ones, GAMMA, PROBIT_PRIOR, &spec).unwrap();
        let kl = kl_on_grid(&posterior, &sub).unwrap();
        let bound = prop1_bound(&posterior, GAMMA, n_full, ones_full, n_sub, ones).unwrap();
        assert!(
            kl <= bound.psi + bound.b + 1e-8,
            "KL {kl} exceeds bound {}",
            bound.psi + bound.b
        );
    }
    pass_line(
        "criterion 3 (KL bound table)",
        format!("KL ratio at r=.1: {ratio:.2}; B(0) = {:.1e}; bound held on 50 subsets", bs[0]),
    );
}

#[test]
fn criterion_04_subposterior_sd_scaling() {
    let data = adjusted_probit_instance();
    let (n_full, ones_full) = (10_000u64, count_ones(&data));
    let p_hat = ones_full as f64 / n_full as f64;

    let sizes = [50u64, 100, 1000, 5000];
    let mut spec = probit_grid_spec(n_full, ones_full, GAMMA, PROBIT_PRIOR, 8192);
    for &n in &sizes {
        let ones = (p_hat * n as f64).round() as u64;
        spec = spec.union(&probit_grid_spec(n, ones, GAMMA, PROBIT_PRIOR, 8192));
    }
    let full = grid_posterior_probit(n_full, ones_full, GAMMA, PROBIT_PRIOR, &spec).unwrap();
    let (full_mean, full_sd) = (full.mean(), full.sd());

    let mut scaled_sds = Vec::new();
    for &n in &sizes {
        let ones = (p_hat * n as f64).round() as u64;
        let sub = grid_posterior_probit(n, ones, GAMMA, PROBIT_PRIOR, &spec).unwrap();
        assert!(
            (sub.mean() - full_mean).abs() <= 3.0 * full_sd,
            "n = {n}: sub-posterior mean {} vs full {} +- 3 x {}",
            sub.mean(),
            full_mean,
            full_sd
        );
        scaled_sds.push(sub.sd() * (n as f64).sqrt());
    }
    let lo = scaled_sds.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = scaled_sds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(
        hi / lo <= 1.5,
        "sd x sqrt(n) spans {scaled_sds:?}, ratio {} > 1.5",
        hi / lo
    );
    pass_line(
        "criterion 4 (sub-posterior scaling)",
        format!("sd*sqrt(n) range [{lo:.3}, {hi:.3}], ratio {:.2}", hi / lo),
    );
}

// ---------------------------------------------------------------------
// Criteria 5-7: ARMA sweeps (shared fixture).
// ---------------------------------------------------------------------

const ARMA_N: usize = 100_000;
const ARMA_ITERS: u64 = 200_000;
const ARMA_REPS: u32 = 20;
const ARMA_WORKERS: usize = 8;

struct ArmaFixture {
    _dir: tempfile::TempDir,
    eps_sweep: SweepReport,
    stat_sweep: SweepReport,
}

fn arma_config(sweep: serde_json::Value) -> ExperimentConfig {
    let value = serde_json::json!({
        "model": {"kind": "arma", "theta_star": [0.5, 0.7, 0.1], "sigma": 1.0, "prior_sd": 5.0},
        "n_data": ARMA_N,
        "data_seed": 2024,
        "sampler": "lwa",
        "subset_size": 100,
        "epsilon": 0.01,
        "statistic": "arma_s0",
        "subset_proposal": {"kind": "window_shift", "omega": 0.9, "lambda": 0.1},
        "inner_steps": 1,
        "budget": {"iterations": ARMA_ITERS},
        "burn_in": 10_000,
        "replications": ARMA_REPS,
        "seed": 515,
        "sweep": sweep,
    });
    let config: ExperimentConfig = serde_json::from_value(value).unwrap();
    config.validate().unwrap();
    config
}

static ARMA: LazyLock<ArmaFixture> = LazyLock::new(|| {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    let eps_config = arma_config(serde_json::json!({
        "axis": "epsilon",
        "values": ["free", "1", "1e-1", "1e-2", "1e-3", "1e-4", "fixed"],
    }));
    cmd_generate(&eps_config, &data_dir).unwrap();
    let eps_sweep =
        cmd_sweep(&eps_config, &data_dir, &dir.path().join("eps"), Some(ARMA_WORKERS)).unwrap();
    let stat_config = arma_config(serde_json::json!({
        "axis": "statistic",
        "values": ["arma_s0", "arma_s1", "arma_s2"],
    }));
    let stat_sweep =
        cmd_sweep(&stat_config, &data_dir, &dir.path().join("stat"), Some(ARMA_WORKERS))
            .unwrap();
    ArmaFixture { _dir: dir, eps_sweep, stat_sweep }
});

#[test]
fn criterion_05_refresh_rate_table() {
    let sweep = &ARMA.eps_sweep;
    let rate = |setting: &str| -> f64 {
        sweep
            .aggregates
            .iter()
            .find(|a| a.setting == setting)
            .unwrap_or_else(|| panic!("missing sweep setting {setting}"))
            .mean_refresh_rate
    };
    let order = ["free", "1", "1e-1", "1e-2", "1e-3", "1e-4", "fixed"];
    let rates: Vec<f64> = order.iter().map(|s| rate(s)).collect();
    println!(
        "[acceptance] criterion 5 measured refresh rates: {}",
        order
            .iter()
            .zip(&rates)
            .map(|(s, r)| format!("{s}={r:.4e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    for (w, labels) in rates.windows(2).zip(order.windows(2)) {
        assert!(
            w[0] > w[1],
            "refresh rate at eps={} ({:.4e}) is not strictly above eps={} ({:.4e}); at this              desk scale the exact subset-weight distribution concentrates on a single window              for eps <= 1e-3 and the stationary refresh rates saturate at zero (see the              decisions ledger for the enumeration analysis)",
            labels[0],
            w[0],
            labels[1],
            w[1]
        );
    }
    assert_eq!(rates[0], 1.0, "free subset must refresh every transition");
    assert_eq!(rates[6], 0.0, "fixed subset must never refresh");
    assert!(
        (0.6..=0.95).contains(&rates[1]),
        "refresh at eps=1 is {} outside [0.6, 0.95]",
        rates[1]
    );
    assert!(rates[5] < 0.02, "refresh at eps=1e-4 is {}", rates[5]);
    pass_line(
        "criterion 5 (refresh-rate table)",
        format!(
            "rates across eps: {}",
            rates.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(" > ")
        ),
    );
}

#[test]
fn criterion_06_arma_recovery() {
    let sweep = &ARMA.eps_sweep;
    let agg = sweep.aggregates.iter().find(|a| a.setting == "1e-2").unwrap();
    let truth = [0.5, 0.7, 0.1];
    for (d, (&m, &t)) in agg.mean_posterior_mean.iter().zip(&truth).enumerate() {
        assert!(
            (m - t).abs() <= 0.07,
            "component {d}: across-replication mean {m} vs true {t}"
        );
    }
    pass_line(
        "criterion 6 (parameter recovery at eps=1e-2)",
        format!(
            "mean posterior means {:?} vs (0.5, 0.7, 0.1)",
            agg.mean_posterior_mean.iter().map(|m| (m * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_07_statistic_quality_ordering() {
    let sweep = &ARMA.stat_sweep;
    let rmse = |setting: &str| -> f64 {
        sweep.aggregates.iter().find(|a| a.setting == setting).unwrap().rmse_total
    };
    let (s0, s1, s2) = (rmse("arma_s0"), rmse("arma_s1"), rmse("arma_s2"));
    assert!(s0 <= s1, "S0 RMSE {s0} should not exceed S1 RMSE {s1}");
    assert!(s1 < s2, "S1 RMSE {s1} should be below S2 RMSE {s2}");
    assert!(s2 >= 1.5 * s0, "S2 RMSE {s2} not at least 1.5x S0 RMSE {s0}");
    pass_line(
        "criterion 7 (statistic quality ordering)",
        format!("RMSE S0 {s0:.4} <= S1 {s1:.4} < S2 {s2:.4} (S2/S0 = {:.2})", s2 / s0),
    );
}

// ---------------------------------------------------------------------
// Criterion 8: classification cost race.
// ---------------------------------------------------------------------

const CLASS_N: usize = 100_000;
const CLASS_TEST_N: usize = 20_000;
const CLASS_BUDGET: u64 = 60_000_000;

struct RaceOutcome {
    lwa_cost: f64,
    full_cost: f64,
    sub_cost: f64,
}

fn classification_scenario(seed: u64) -> (RaceOutcome, f64) {
    let mu1 = [-1.0, 0.0];
    let mu2 = [1.0, 0.0];
    let sigma = 0.25;
    let model = GaussMixClassModel::new();
    let mut data_rng = RngStream::with_stream(seed, 7_001);
    let train = simulate_gaussmix(CLASS_N, mu1, mu2, sigma, sigma, &mut data_rng);
    let mut test_rng = RngStream::with_stream(seed, 7_002);
    let test = simulate_gaussmix(CLASS_TEST_N, mu1, mu2, sigma, sigma, &mut test_rng);

    let truth = pack_params(mu1, mu2, sigma, sigma);
    let bayes_error = classification_error(&model, &truth, &test);
    let threshold = 1.2 * bayes_error;

    let stat = make_statistic(StatisticKind::ClassCounts, &train).unwrap();
    let budget = Budget::CostUnits(CLASS_BUDGET);
    // all three samplers share the same proposal kernel and adaptation
    // settings; the initial step is small relative to the prior so the
    // warm-up phase does not dominate the race
    let cost_of = |kind: SamplerKind, use_stat: bool| -> (f64, lwa_mcmc::samplers::Trace) {
        let mut config = RunConfig {
            subset_proposal: SubsetProposalConfig::UniformSwap { m: None },
            ..RunConfig::new(1000, 0.01, budget)
        };
        config.rw.initial_scale = 0.05;
        let mut rng = RngStream::with_stream(seed, 0);
        let trace = run_chain(
            kind,
            &config,
            &model,
            &train,
            use_stat.then_some(stat.as_ref()),
            &mut rng,
        )
        .unwrap();
        let theta_dim = trace.param_dim;
        let cost = cost_to_error_threshold(&trace, threshold, |theta| {
            let theta = lwa_mcmc::ParamVector::new(theta.to_vec()).unwrap();
            debug_assert_eq!(theta.dim(), theta_dim);
            classification_error(&model, &theta, &test)
        });
        (cost, trace)
    };

    let (lwa_cost, _) = cost_of(SamplerKind::Lwa, true);
    let (full_cost, _) = cost_of(SamplerKind::FullMh, false);
    let (sub_cost, sub_trace) = cost_of(SamplerKind::MhSubLhd, false);

    // data-usage trend: mean observations used per transition once the chain
    // is near stationarity (after reaching the threshold, else final 25%)
    let reach_row = sub_trace
        .rows
        .iter()
        .position(|r| (r.cost() as f64) >= sub_cost)
        .unwrap_or(3 * sub_trace.len() / 4);
    let tail_start = reach_row.max(3 * sub_trace.len() / 4);
    let tail = &sub_trace.rows[tail_start..];
    let sub_tail_usage =
        tail.iter().map(|r| r.data_used as f64).sum::<f64>() / tail.len() as f64;

    (RaceOutcome { lwa_cost, full_cost, sub_cost }, sub_tail_usage)
}

#[test]
fn criterion_08_classification_cost_race() {
    let seeds = [9_101u64, 9_202, 9_303, 9_404];
    let mut wins = 0;
    let mut usage_hits = 0;
    let mut details = Vec::new();
    for &seed in &seeds {
        let (race, sub_tail_usage) = classification_scenario(seed);
        let win = race.lwa_cost.is_finite()
            && race.lwa_cost * 5.0 <= race.full_cost
            && race.lwa_cost * 5.0 <= race.sub_cost;
        if win {
            wins += 1;
        }
        if sub_tail_usage > 0.1 * CLASS_N as f64 {
            usage_hits += 1;
        }
        details.push(format!(
            "seed {seed}: lwa {:.2e}, full {:.2e}, sub {:.2e}, sub tail usage {:.0}",
            race.lwa_cost, race.full_cost, race.sub_cost, sub_tail_usage
        ));
    }
    for d in &details {
        println!("[acceptance]   {d}");
    }
    assert!(wins >= 3, "LWA won only {wins}/4 scenarios: {details:?}");
    assert!(
        usage_hits >= 3,
        "subsampling baseline exceeded 10% of N near stationarity in only {usage_hits}/4"
    );
    pass_line(
        "criterion 8 (classification cost race)",
        format!("{wins}/4 scenarios won at >= 5x margin; {usage_hits}/4 tail usage > 10% of N"),
    );
}

// ---------------------------------------------------------------------
// Criterion 9: full M-H against the grid posterior + adaptation band.
// ---------------------------------------------------------------------

#[test]
fn criterion_09_full_mh_grid_check() {
    let data = adjusted_probit_instance();
    let (n_full, ones_full) = (10_000u64, count_ones(&data));
    let model = ProbitModel::new(GAMMA, PROBIT_PRIOR.0, PROBIT_PRIOR.1);
    let iterations = 1_000_000u64;
    let config = RunConfig::new(n_full as usize, 1.0, Budget::Iterations(iterations));
    let target_rate = config.rw.adapt.unwrap().target_rate;
    let mut rng = RngStream::new(35);
    let trace =
        run_chain(SamplerKind::FullMh, &config, &model, &data, None, &mut rng).unwrap();

    let spec = probit_grid_spec(n_full, ones_full, GAMMA, PROBIT_PRIOR, 8192);
    let posterior =
        grid_posterior_probit(n_full, ones_full, GAMMA, PROBIT_PRIOR, &spec).unwrap();
    let samples: Vec<f64> =
        trace.post_burn_in(10_000).unwrap().iter().map(|r| r.theta[0]).collect();
    let tv = tv_samples_vs_grid(&samples, &posterior, 60).unwrap();
    assert!(tv < 0.03, "full M-H TV {tv} against the grid posterior");

    let acc = trace.acceptance_rate(iterations / 2).unwrap();
    assert!(
        (acc - target_rate).abs() <= 0.07,
        "final-half acceptance {acc} vs target {target_rate}"
    );
    pass_line(
        "criterion 9 (full M-H spot check)",
        format!("TV {tv:.4} < 0.03; final-half acceptance {acc:.3} within ±0.07 of {target_rate}"),
    );
}

// ---------------------------------------------------------------------
// Criterion 10: byte-identical reruns.
// ---------------------------------------------------------------------

fn assert_identical(a: &Path, b: &Path) {
    let left = std::fs::read(a).unwrap();
    let right = std::fs::read(b).unwrap();
    assert!(
        left == right,
        "{} and {} differ ({} vs {} bytes)",
        a.display(),
        b.display(),
        left.len(),
        right.len()
    );
}

#[test]
fn criterion_10_determinism() {
    let value = serde_json::json!({
        "model": {"kind": "probit", "theta_star": 1.0, "gamma": 1.0},
        "n_data": 2000,
        "data_seed": 77,
        "sampler": "lwa",
        "subset_size": 100,
        "epsilon": 0.05,
        "statistic": "identity_mean",
        "budget": {"iterations": 5000},
        "burn_in": 1000,
        "replications": 3,
        "seed": 99,
    });
    let config: ExperimentConfig = serde_json::from_value(value).unwrap();
    config.validate().unwrap();

    let dir = tempfile::tempdir().unwrap();
    let (data_a, data_b) = (dir.path().join("data_a"), dir.path().join("data_b"));
    cmd_generate(&config, &data_a).unwrap();
    cmd_generate(&config, &data_b).unwrap();
    assert_identical(&data_a.join("dataset.bin"), &data_b.join("dataset.bin"));

    let (run_a, run_b) = (dir.path().join("run_a"), dir.path().join("run_b"));
    cmd_run(&config, &data_a, &run_a, Some(3)).unwrap();
    cmd_run(&config, &data_a, &run_b, Some(1)).unwrap();
    for rep in 0..3 {
        assert_identical(
            &run_a.join(format!("trace_{rep:03}.csv")),
            &run_b.join(format!("trace_{rep:03}.csv")),
        );
    }
    assert_identical(&run_a.join("summary.json"), &run_b.join("summary.json"));
    pass_line(
        "criterion 10 (determinism)",
        "dataset, traces and summaries byte-identical across reruns and worker counts".into(),
    );
}
