//! The six runnable scenarios. Each returns the files it produced as
//! `(name, contents)` pairs; writing them is left to the caller.

use mzi_core::analysis::{visibility_from_fringe, Estimate};
use mzi_core::experiment::{analyze_alpha, fringe_windows, interferometer_for_alpha, ramp_influence};
use mzi_core::montecarlo::{click_counts, derive_seed, run_trials, Histogram, RunConfig};
use mzi_core::optics::analytic_intensity;
use mzi_core::source::{simulate_heralded_hbt, CorrelationReport, EnvelopeModel};
use serde::Serialize;

use crate::config::ConfigFile;
use crate::error::CliError;
use crate::output::{pretty, Cell, Format, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    SourceStats,
    RampInfluence,
}

/// Measured visibilities the ideal-model fringe is compared against.
const MEASURED_VISIBILITY: [(&str, f64); 3] = [("early", 0.968), ("late", 0.043), ("full", 0.306)];

/// Ramp influence bound on the D0 probability.
const RAMP_BOUND: f64 = 0.04;

pub type Files = Vec<(String, String)>;

pub fn run(scenario: Scenario, cfg: &ConfigFile, format: Format) -> Result<Files, CliError> {
    let cfg = cfg.effective()?;
    let env = cfg.envelope_model()?;
    match scenario {
        Scenario::Fig2a => fig2a(&cfg, &env, format),
        Scenario::Fig2b => fig2b(&cfg, &env, format),
        Scenario::Fig3a => fig3a(&cfg, &env, format),
        Scenario::Fig3b => fig3b(&cfg, &env, format),
        Scenario::SourceStats => source_stats(&cfg),
        Scenario::RampInfluence => ramp(&cfg, &env),
    }
}

/// Alpha realized by the configured switch time on `env`.
fn configured_alpha(cfg: &ConfigFile, env: &EnvelopeModel<f64>) -> f64 {
    env.cdf(cfg.switch_time_ns).clamp(0.0, 1.0).sqrt().acos()
}

fn base_run(cfg: &ConfigFile, env: &EnvelopeModel<f64>, alpha: f64) -> Result<RunConfig<f64>, CliError> {
    let params = cfg.preparation(alpha.to_degrees().clamp(0.0, 90.0), 0.0)?;
    let run = RunConfig {
        n_trials: cfg.trials,
        master_seed: cfg.seed,
        bin_width: cfg.bin_width_ns,
        detector_efficiency: cfg.detector_efficiency,
        ..RunConfig::new(params, cfg.interferometer(cfg.model_ramp), env.clone())
    };
    run.validate().map_err(CliError::model)?;
    Ok(run)
}

fn radians(deg: &[f64]) -> Vec<f64> {
    deg.iter().map(|d| d.to_radians()).collect()
}

fn fig2a(cfg: &ConfigFile, env: &EnvelopeModel<f64>, format: Format) -> Result<Files, CliError> {
    let base = base_run(cfg, env, configured_alpha(cfg, env))?;
    let mut runs = Vec::with_capacity(cfg.phi_grid.len());
    for (i, &phi) in cfg.phi_grid.iter().enumerate() {
        let mut run = base.clone();
        run.params = run.params.with_phi(phi.to_radians()).map_err(|e| CliError::single("phi_grid", e))?;
        run.master_seed = derive_seed(cfg.seed, i as u64);
        runs.push(run_trials(&run).map_err(CliError::model)?);
    }
    // One common bin range across phases.
    let last = runs.iter().flatten().map(|r| r.time).fold(0.0, f64::max);
    let n_bins = (last / cfg.bin_width_ns).floor() as usize + 1;
    let mut table = Table::new(&["phi_deg", "bin_start_ns", "d0", "d1"]);
    for (&phi, records) in cfg.phi_grid.iter().zip(&runs) {
        let mut h = Histogram::new(0.0, cfg.bin_width_ns, n_bins).map_err(|e| CliError::single("bin_width_ns", e))?;
        h.accumulate(records);
        for i in 0..h.len() {
            table.push(vec![phi.into(), h.bin_start(i).into(), h.counts_d0[i].into(), h.counts_d1[i].into()]);
        }
    }
    Ok(vec![(format!("fig2a.{}", format.extension()), table.render(format)?)])
}

#[derive(Serialize)]
struct WindowVisibility {
    visibility: f64,
    std_err: f64,
    ideal: f64,
    measured: f64,
}

#[derive(Serialize)]
struct Fig2bReport {
    alpha_deg: f64,
    alpha_estimate_deg: f64,
    alpha_estimate_err_deg: f64,
    trials_per_phase: u64,
    early: WindowVisibility,
    late: WindowVisibility,
    full: WindowVisibility,
}

fn fig2b(cfg: &ConfigFile, env: &EnvelopeModel<f64>, format: Format) -> Result<Files, CliError> {
    let alpha = configured_alpha(cfg, env);
    let base = base_run(cfg, env, alpha)?;
    let phis = radians(&cfg.phi_grid);
    let fringe = fringe_windows(&base, &phis).map_err(|e| CliError::single("phi_grid", e))?;
    let scans = [
        ("early", fringe.early(), 1.0),
        ("late", fringe.late(), 0.0),
        ("full", fringe.full(), alpha.cos().powi(2)),
    ];
    let mut table = Table::new(&["window", "phi_deg", "p_d0", "clicks"]);
    let mut fitted = Vec::new();
    for ((name, scan, ideal), (_, measured)) in scans.into_iter().zip(MEASURED_VISIBILITY) {
        let scan = scan.map_err(|e| CliError::single("phi_grid", e))?;
        for (p, &deg) in scan.points().iter().zip(&cfg.phi_grid) {
            table.push(vec![name.into(), deg.into(), p.p_d0.into(), p.n.into()]);
        }
        let v: Estimate<f64> = visibility_from_fringe(&scan).map_err(|e| CliError::single("phi_grid", e))?;
        fitted.push(WindowVisibility { visibility: v.value, std_err: v.std_err, ideal, measured });
    }
    let (early, late) = fringe.early_late_clicks();
    let a = mzi_core::analysis::estimate_alpha::<f64>(early, late).map_err(CliError::model)?;
    let mut it = fitted.into_iter();
    let report = Fig2bReport {
        alpha_deg: alpha.to_degrees(),
        alpha_estimate_deg: a.value.to_degrees(),
        alpha_estimate_err_deg: a.std_err.to_degrees(),
        trials_per_phase: cfg.trials,
        early: it.next().unwrap(),
        late: it.next().unwrap(),
        full: it.next().unwrap(),
    };
    Ok(vec![
        (format!("fig2b_scan.{}", format.extension()), table.render(format)?),
        ("fig2b_visibility.json".into(), pretty(&report)?),
    ])
}

#[derive(Serialize)]
struct Fig3aSummary {
    trials_per_point: u64,
    points: usize,
    max_abs_diff: f64,
    /// Largest deviation in units of the binomial standard error.
    max_z: f64,
}

fn fig3a(cfg: &ConfigFile, env: &EnvelopeModel<f64>, format: Format) -> Result<Files, CliError> {
    let base = base_run(cfg, env, 0.0)?;
    let mut table = Table::new(&["alpha_deg", "phi_deg", "p_d0_mc", "p_d0_analytic"]);
    let mut summary = Fig3aSummary { trials_per_point: cfg.trials, points: 0, max_abs_diff: 0.0, max_z: 0.0 };
    for (ia, &alpha_deg) in cfg.alpha_grid.iter().enumerate() {
        let ifo = interferometer_for_alpha(env, alpha_deg.to_radians(), &base.interferometer)
            .map_err(|e| CliError::single("alpha_grid", e))?;
        for (ip, &phi_deg) in cfg.phi_grid.iter().enumerate() {
            let mut run = base.clone();
            run.interferometer = ifo;
            run.params = cfg.preparation(alpha_deg, phi_deg)?;
            run.master_seed = derive_seed(cfg.seed, (ia * cfg.phi_grid.len() + ip) as u64);
            let counts = click_counts(&run).map_err(CliError::model)?;
            let analytic = analytic_intensity(&run.params);
            let p = counts.d0_fraction().unwrap_or(f64::NAN);
            let diff = (p - analytic).abs();
            let sigma = (analytic * (1.0 - analytic) / counts.clicks().max(1) as f64).sqrt();
            summary.max_abs_diff = summary.max_abs_diff.max(diff);
            if sigma > 0.0 {
                summary.max_z = summary.max_z.max(diff / sigma);
            }
            summary.points += 1;
            table.push(vec![alpha_deg.into(), phi_deg.into(), Cell::Float(p), analytic.into()]);
        }
    }
    Ok(vec![
        (format!("fig3a.{}", format.extension()), table.render(format)?),
        ("fig3a_summary.json".into(), pretty(&summary)?),
    ])
}

fn fig3b(cfg: &ConfigFile, env: &EnvelopeModel<f64>, format: Format) -> Result<Files, CliError> {
    let base = base_run(cfg, env, 0.0)?;
    let phis = radians(&cfg.phi_grid);
    let mut table = Table::new(&["alpha_deg", "V", "V2", "D", "D2", "eg_sum"]);
    let mut summaries = Vec::new();
    for (i, &alpha_deg) in cfg.alpha_grid.iter().enumerate() {
        let mut run = base.clone();
        run.master_seed = derive_seed(cfg.seed, i as u64);
        let (res, _) = analyze_alpha(&run, alpha_deg.to_radians(), &phis).map_err(|e| CliError::Model {
            keys: vec!["alpha_grid".into(), "phi_grid".into()],
            message: e.to_string(),
        })?;
        let (v, d) = (res.visibility.value, res.distinguishability.value);
        table.push(vec![alpha_deg.into(), v.into(), (v * v).into(), d.into(), (d * d).into(), res.eg.sum.into()]);
        summaries.push(res.summary());
    }
    Ok(vec![
        (format!("fig3b.{}", format.extension()), table.render(format)?),
        ("fig3b_summary.json".into(), pretty(&summaries)?),
    ])
}

#[derive(Serialize)]
struct SourceReport {
    #[serde(flatten)]
    correlation: CorrelationReport,
    counts: mzi_core::source::HeraldCounts,
    pair_rate: f64,
    duty_cycle: f64,
    mean_pair_rate: f64,
}

fn source_stats(cfg: &ConfigFile) -> Result<Files, CliError> {
    let stats = cfg.source_stats();
    let counts = simulate_heralded_hbt(&stats, cfg.heralds, cfg.seed).map_err(CliError::model)?;
    let correlation = CorrelationReport::new(cfg.g2_cross_peak, &counts).map_err(|e| CliError::single("heralds", e))?;
    let report = SourceReport {
        correlation,
        counts,
        pair_rate: stats.pair_rate,
        duty_cycle: stats.duty_cycle(),
        mean_pair_rate: stats.mean_pair_rate(),
    };
    Ok(vec![("source_stats.json".into(), pretty(&report)?)])
}

#[derive(Serialize)]
struct RampReport {
    ramp_ns: f64,
    max_abs_diff: f64,
    alpha_deg: f64,
    phi_deg: f64,
    bound: f64,
    within_bound: bool,
}

fn ramp(cfg: &ConfigFile, env: &EnvelopeModel<f64>) -> Result<Files, CliError> {
    let r = ramp_influence(
        env,
        &cfg.interferometer(true),
        &radians(&cfg.alpha_grid),
        &radians(&cfg.phi_grid),
        cfg.gamma_deg.to_radians(),
        cfg.grid_step_ns,
    )
    .map_err(CliError::model)?;
    let report = RampReport {
        ramp_ns: cfg.ramp_ns,
        max_abs_diff: r.max_abs_diff,
        alpha_deg: r.alpha.to_degrees(),
        phi_deg: r.phi.to_degrees(),
        bound: RAMP_BOUND,
        within_bound: r.max_abs_diff < RAMP_BOUND,
    };
    Ok(vec![("ramp_influence.json".into(), pretty(&report)?)])
}
