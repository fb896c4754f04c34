//! Flat run configuration, loaded from TOML or JSON.
//!
//! Angles are given in degrees and converted to radians here, at the
//! boundary. The run manifest written next to every output is this struct
//! serialized as JSON with the decay constant resolved, so loading it again
//! reproduces the same effective configuration.

use std::path::{Path, PathBuf};

use mzi_core::optics::{EomSchedule, InterferometerConfig, PreparationParams};
use mzi_core::source::{load_envelope_table, solve_decay_constant, EnvelopeModel, SourceStats};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn default_phi_grid() -> Vec<f64> {
    (0..=24).map(|k| -90.0 + 15.0 * k as f64).collect()
}

fn default_alpha_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=6).map(|k| 15.0 * k as f64).collect();
    g.push(57.3);
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: u64,
    /// Trials per Monte Carlo run (per phase point / per blocked-arm run).
    pub trials: u64,
    pub switch_time_ns: f64,
    /// Nominal packet length; realized grids span at least this long.
    pub coherence_time_ns: f64,
    /// Exponential decay constant; when absent it is solved so that the
    /// switch at `switch_time_ns` realizes `alpha_deg`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay_constant_ns: Option<f64>,
    pub alpha_deg: f64,
    pub phi_grid: Vec<f64>,
    pub alpha_grid: Vec<f64>,
    pub gamma_deg: f64,
    pub v_pi_volts: f64,
    pub eom_axis_deg: f64,
    pub ramp_ns: f64,
    /// Apply `ramp_ns` inside the Monte Carlo scenarios too (otherwise they
    /// use an instantaneous switch and only `ramp-influence` sees the ramp).
    pub model_ramp: bool,
    /// `exponential` or `table:<path>`.
    pub envelope: String,
    pub detector_efficiency: f64,
    pub bin_width_ns: f64,
    pub grid_step_ns: f64,
    pub heralds: u64,
    pub multi_pair_prob: f64,
    pub g2_cross_peak: f64,
    pub pair_rate: f64,
    pub trap_time_ms: f64,
    pub generation_time_ms: f64,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let source = SourceStats::default();
        Self {
            seed: 1,
            trials: 100_000,
            switch_time_ns: 80.0,
            coherence_time_ns: 400.0,
            decay_constant_ns: None,
            alpha_deg: 57.3,
            phi_grid: default_phi_grid(),
            alpha_grid: default_alpha_grid(),
            gamma_deg: 0.0,
            v_pi_volts: 198.0,
            eom_axis_deg: 22.5,
            ramp_ns: 15.0,
            model_ramp: false,
            envelope: "exponential".into(),
            detector_efficiency: 1.0,
            bin_width_ns: 1.0,
            grid_step_ns: 0.25,
            heralds: 1_000_000,
            multi_pair_prob: source.multi_pair_prob,
            g2_cross_peak: 39.0,
            pair_rate: source.pair_rate,
            trap_time_ms: source.trap_time_ms,
            generation_time_ms: source.generation_time_ms,
        }
    }
}

/// How the photon envelope is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeSource {
    Exponential,
    Table(PathBuf),
}

impl ConfigFile {
    /// Loads `.json` files as JSON and anything else as TOML. Missing keys
    /// take their defaults; unknown keys are rejected.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        if is_json {
            serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
        } else {
            toml::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
        }
    }

    pub fn envelope_source(&self) -> Option<EnvelopeSource> {
        if self.envelope == "exponential" {
            Some(EnvelopeSource::Exponential)
        } else {
            self.envelope.strip_prefix("table:").filter(|p| !p.is_empty()).map(|p| EnvelopeSource::Table(p.into()))
        }
    }

    /// Checks every key against the model's preconditions and reports all
    /// offending keys at once.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut bad: Vec<(&str, String)> = Vec::new();
        let positive = |x: f64| x.is_finite() && x > 0.0;
        let phase_ok = |d: f64| d.is_finite() && (-180.0..=360.0).contains(&d);
        if self.trials == 0 {
            bad.push(("trials", "must be at least 1".into()));
        }
        if !positive(self.switch_time_ns) {
            bad.push(("switch_time_ns", "must be positive".into()));
        }
        if !positive(self.coherence_time_ns) {
            bad.push(("coherence_time_ns", "must be positive".into()));
        }
        if let Some(d) = self.decay_constant_ns {
            if !positive(d) {
                bad.push(("decay_constant_ns", "must be positive".into()));
            }
        } else if !(self.alpha_deg > 0.0 && self.alpha_deg < 90.0) {
            bad.push(("alpha_deg", "must lie strictly between 0 and 90 to solve the decay constant".into()));
        }
        if !(0.0..=90.0).contains(&self.alpha_deg) {
            bad.push(("alpha_deg", "must lie in [0, 90]".into()));
        }
        if self.phi_grid.is_empty() || !self.phi_grid.iter().all(|&p| phase_ok(p)) {
            bad.push(("phi_grid", "needs at least one value, each in [-180, 360]".into()));
        }
        if self.alpha_grid.is_empty() || !self.alpha_grid.iter().all(|a| (0.0..=90.0).contains(a)) {
            bad.push(("alpha_grid", "needs at least one value, each in [0, 90]".into()));
        }
        if !phase_ok(self.gamma_deg) {
            bad.push(("gamma_deg", "must lie in [-180, 360]".into()));
        }
        if !positive(self.v_pi_volts) {
            bad.push(("v_pi_volts", "must be positive".into()));
        }
        if !self.eom_axis_deg.is_finite() {
            bad.push(("eom_axis_deg", "must be finite".into()));
        }
        if !(self.ramp_ns.is_finite() && self.ramp_ns >= 0.0) {
            bad.push(("ramp_ns", "must be finite and non-negative".into()));
        }
        match self.envelope_source() {
            None => bad.push(("envelope", "must be `exponential` or `table:<path>`".into())),
            Some(EnvelopeSource::Table(p)) if !p.exists() => {
                bad.push(("envelope", format!("table {} does not exist", p.display())))
            }
            _ => {}
        }
        if !(self.detector_efficiency > 0.0 && self.detector_efficiency <= 1.0) {
            bad.push(("detector_efficiency", "must lie in (0, 1]".into()));
        }
        if !positive(self.bin_width_ns) {
            bad.push(("bin_width_ns", "must be positive".into()));
        }
        if !positive(self.grid_step_ns) {
            bad.push(("grid_step_ns", "must be positive".into()));
        }
        if self.heralds == 0 {
            bad.push(("heralds", "must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.multi_pair_prob) {
            bad.push(("multi_pair_prob", "must lie in [0, 1)".into()));
        }
        if !(self.g2_cross_peak.is_finite() && self.g2_cross_peak >= 0.0) {
            bad.push(("g2_cross_peak", "must be non-negative".into()));
        }
        if !(self.pair_rate.is_finite() && self.pair_rate >= 0.0) {
            bad.push(("pair_rate", "must be non-negative".into()));
        }
        if !(self.trap_time_ms.is_finite() && self.trap_time_ms >= 0.0) {
            bad.push(("trap_time_ms", "must be non-negative".into()));
        }
        if !positive(self.generation_time_ms) {
            bad.push(("generation_time_ms", "must be positive".into()));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(bad.into_iter().map(|(k, m)| (k.to_string(), m)).collect()))
        }
    }

    /// Decay constant actually used by an exponential envelope.
    pub fn resolved_decay_constant(&self) -> Result<f64, CliError> {
        match self.decay_constant_ns {
            Some(d) => Ok(d),
            None => {
                let early = self.alpha_deg.to_radians().cos().powi(2);
                solve_decay_constant(self.switch_time_ns, early).map_err(|e| CliError::single("alpha_deg", e))
            }
        }
    }

    /// The configuration with every derived default filled in.
    pub fn effective(&self) -> Result<Self, CliError> {
        self.validate()?;
        let mut eff = self.clone();
        if matches!(self.envelope_source(), Some(EnvelopeSource::Exponential)) {
            eff.decay_constant_ns = Some(self.resolved_decay_constant()?);
        }
        Ok(eff)
    }

    pub fn envelope_model(&self) -> Result<EnvelopeModel<f64>, CliError> {
        match self.envelope_source() {
            Some(EnvelopeSource::Exponential) => {
                EnvelopeModel::exponential_with_duration(self.resolved_decay_constant()?, self.coherence_time_ns)
                    .map_err(|e| CliError::single("decay_constant_ns", e))
            }
            Some(EnvelopeSource::Table(path)) => {
                load_envelope_table(&path).map_err(|e| CliError::single("envelope", e))
            }
            None => Err(CliError::Validation(vec![("envelope".into(), "unrecognized envelope".into())])),
        }
    }

    /// Interferometer with the configured switch time. The ramp is included
    /// only when `with_ramp` is set.
    pub fn interferometer(&self, with_ramp: bool) -> InterferometerConfig<f64> {
        let schedule = EomSchedule::step(self.v_pi_volts, self.switch_time_ns)
            .with_ramp(if with_ramp { self.ramp_ns } else { 0.0 });
        InterferometerConfig { eom_axis: self.eom_axis_deg.to_radians(), schedule, blocked_arm: None }
    }

    pub fn preparation(&self, alpha_deg: f64, phi_deg: f64) -> Result<PreparationParams<f64>, CliError> {
        PreparationParams::from_degrees(alpha_deg, phi_deg, self.gamma_deg).map_err(|e| CliError::single("gamma_deg", e))
    }

    pub fn source_stats(&self) -> SourceStats {
        SourceStats {
            pair_rate: self.pair_rate,
            trap_time_ms: self.trap_time_ms,
            generation_time_ms: self.generation_time_ms,
            multi_pair_prob: self.multi_pair_prob,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ConfigFile::default();
        c.validate().unwrap();
        assert_eq!(c.phi_grid.len(), 25);
        assert_eq!(c.phi_grid[0], -90.0);
        assert_eq!(c.phi_grid[24], 270.0);
        assert_eq!(c.alpha_grid.len(), 8);
        let tau = c.resolved_decay_constant().unwrap();
        assert!((tau - 231.7).abs() < 0.2, "{tau}");
    }

    #[test]
    fn validation_lists_every_offending_key() {
        let c = ConfigFile { trials: 0, v_pi_volts: -1.0, envelope: "gaussian".into(), ..Default::default() };
        let CliError::Validation(keys) = c.validate().unwrap_err() else { panic!() };
        let names: Vec<_> = keys.iter().map(|k| k.0.as_str()).collect();
        assert_eq!(names, ["trials", "v_pi_volts", "envelope"]);
    }

    #[test]
    fn partial_toml_takes_defaults() {
        let c: ConfigFile = toml::from_str("seed = 9\nphi_grid = [0, 90, 180, 270]\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.trials, 100_000);
        assert_eq!(c.phi_grid, vec![0.0, 90.0, 180.0, 270.0]);
        assert!(toml::from_str::<ConfigFile>("sede = 9\n").is_err());
    }

    #[test]
    fn table_envelope_source() {
        let c = ConfigFile { envelope: "table:/tmp/x.csv".into(), ..Default::default() };
        assert_eq!(c.envelope_source(), Some(EnvelopeSource::Table("/tmp/x.csv".into())));
        assert_eq!(ConfigFile { envelope: "table:".into(), ..Default::default() }.envelope_source(), None);
    }
}
