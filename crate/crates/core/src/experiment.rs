//! Composite procedures built from the lower modules: realizing a target
//! `alpha` by the EOM switch time, exact detection probabilities on a grid,
//! ramp influence, and the Monte Carlo fringe/blocked-arm analyses.
//!
//! The envelope is held fixed and `alpha` is set by where the switch falls in
//! it, so `cos^2(alpha)` is the envelope weight before the switch.

use crate::analysis::{distinguishability, estimate_alpha, visibility_from_fringe, AnalysisResult, FringePoint, FringeScan};
use crate::error::{Error, Result};
use crate::montecarlo::{blocked_arm_counts, derive_seed, windowed_counts, RunConfig, WindowCounts};
use crate::optics::{propagate, Arm, InterferometerConfig, PreparationParams};
use crate::scalar::Real;
use crate::source::EnvelopeModel;

/// `base` with its switch time moved so the closed window carries `cos^2(alpha)`.
pub fn interferometer_for_alpha<T: Real>(
    envelope: &EnvelopeModel<T>,
    alpha: T,
    base: &InterferometerConfig<T>,
) -> Result<InterferometerConfig<T>> {
    let mut cfg = *base;
    cfg.schedule.switch_time = envelope.switch_time_for_alpha(alpha)?;
    Ok(cfg)
}

/// D0 probability from the propagated envelope on a grid of step `dt`
/// aligned to the switch time.
pub fn exact_d0_probability<T: Real>(
    envelope: &EnvelopeModel<T>,
    params: &PreparationParams<T>,
    config: &InterferometerConfig<T>,
    dt: T,
) -> Result<T> {
    let input = envelope.realize(dt, Some(config.schedule.switch_time))?;
    Ok(propagate(&input, params, config)?.born_intensities().0)
}

/// Largest `|p_D0(ramped) - p_D0(ideal step)|` over an `(alpha, phi)` grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RampInfluence<T> {
    pub max_abs_diff: T,
    pub alpha: T,
    pub phi: T,
}

/// Compares the schedule in `base` (with its ramp) against the same schedule
/// with an instantaneous switch, for every grid point.
pub fn ramp_influence<T: Real>(
    envelope: &EnvelopeModel<T>,
    base: &InterferometerConfig<T>,
    alphas: &[T],
    phis: &[T],
    gamma: T,
    dt: T,
) -> Result<RampInfluence<T>> {
    if alphas.is_empty() || phis.is_empty() {
        return Err(Error::Configuration("ramp influence needs a non-empty grid".into()));
    }
    let mut worst = RampInfluence { max_abs_diff: T::neg_infinity(), alpha: alphas[0], phi: phis[0] };
    for &alpha in alphas {
        let ramped = interferometer_for_alpha(envelope, alpha, base)?;
        let mut step = ramped;
        step.schedule.ramp_duration = T::zero();
        let input = envelope.realize(dt, Some(ramped.schedule.switch_time))?;
        for &phi in phis {
            let params = PreparationParams::new(alpha, phi, gamma)?;
            let p_ramp = propagate(&input, &params, &ramped)?.born_intensities().0;
            let p_step = propagate(&input, &params, &step)?.born_intensities().0;
            let diff = (p_ramp - p_step).abs();
            if diff > worst.max_abs_diff {
                worst = RampInfluence { max_abs_diff: diff, alpha, phi };
            }
        }
    }
    Ok(worst)
}

/// Monte Carlo fringe scans over `phis`, split into the early (closed),
/// late (open) and full windows at the switch time.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedFringe<T> {
    pub phis: Vec<T>,
    pub counts: Vec<WindowCounts>,
}

impl<T: Real> WindowedFringe<T> {
    fn scan(&self, pick: impl Fn(&WindowCounts) -> crate::montecarlo::ClickCounts) -> Result<FringeScan<T>> {
        let points = self
            .phis
            .iter()
            .zip(&self.counts)
            .map(|(&phi, w)| {
                let c = pick(w);
                let p = c
                    .d0_fraction()
                    .ok_or_else(|| Error::UndefinedEstimate(format!("no clicks in window at phi = {phi}")))?;
                Ok(FringePoint { phi, p_d0: T::lit(p), n: c.clicks() })
            })
            .collect::<Result<Vec<_>>>()?;
        FringeScan::new(points)
    }

    pub fn early(&self) -> Result<FringeScan<T>> {
        self.scan(|w| w.early)
    }

    pub fn late(&self) -> Result<FringeScan<T>> {
        self.scan(|w| w.late)
    }

    pub fn full(&self) -> Result<FringeScan<T>> {
        self.scan(|w| w.full())
    }

    /// Clicks before and after the switch, summed over every phase.
    pub fn early_late_clicks(&self) -> (u64, u64) {
        self.counts.iter().fold((0, 0), |(e, l), w| (e + w.early.clicks(), l + w.late.clicks()))
    }
}

/// Runs `base` once per phase (each with its own derived seed) and splits
/// clicks at the configured switch time.
pub fn fringe_windows<T: Real>(base: &RunConfig<T>, phis: &[T]) -> Result<WindowedFringe<T>> {
    let split = base.interferometer.schedule.switch_time;
    let counts = phis
        .iter()
        .enumerate()
        .map(|(i, &phi)| {
            let mut cfg = base.clone();
            cfg.params = cfg.params.with_phi(phi)?;
            cfg.master_seed = derive_seed(base.master_seed, i as u64);
            windowed_counts(&cfg, split)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WindowedFringe { phis: phis.to_vec(), counts })
}

/// Blocked-arm D0 totals `(N1, N2)` with path 1 and path 0 blocked in turn.
pub fn blocked_arm_pair<T: Real>(base: &RunConfig<T>) -> Result<(u64, u64)> {
    let mut cfg = base.clone();
    cfg.master_seed = derive_seed(base.master_seed, 1 << 32);
    let n1 = blocked_arm_counts(&cfg, Arm::Path1)?.n_d0;
    cfg.master_seed = derive_seed(base.master_seed, (1 << 32) + 1);
    let n2 = blocked_arm_counts(&cfg, Arm::Path0)?.n_d0;
    Ok((n1, n2))
}

/// Full wave/particle analysis at one `alpha`: visibility from the full-window
/// fringe, distinguishability from blocked-arm D0 totals, and `alpha`
/// re-estimated from early/late clicks. `base.params` supplies `gamma`.
pub fn analyze_alpha<T: Real>(base: &RunConfig<T>, alpha: T, phis: &[T]) -> Result<(AnalysisResult<T>, WindowedFringe<T>)> {
    let mut cfg = base.clone();
    cfg.interferometer = interferometer_for_alpha(&base.envelope, alpha, &base.interferometer)?;
    cfg.interferometer.blocked_arm = None;
    cfg.params = PreparationParams::new(alpha, base.params.phi(), base.params.gamma())?;
    let fringe = fringe_windows(&cfg, phis)?;
    let v = visibility_from_fringe(&fringe.full()?)?;
    let (n1, n2) = blocked_arm_pair(&cfg)?;
    let d = distinguishability(n1, n2)?;
    let (early, late) = fringe.early_late_clicks();
    let a = estimate_alpha(early, late)?;
    Ok((AnalysisResult::new(v, d, a), fringe))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{analytic_intensity, EomSchedule};
    use approx::assert_abs_diff_eq;

    #[test]
    fn exact_probability_matches_closed_form_at_57_3() {
        let env = EnvelopeModel::exponential(231.7f64).unwrap();
        let cfg = interferometer_for_alpha(
            &env,
            57.3f64.to_radians(),
            &InterferometerConfig::default().with_schedule(EomSchedule::step(198.0, 80.0)),
        )
        .unwrap();
        let p = PreparationParams::from_degrees(57.3, 0.0, 0.0).unwrap();
        let exact = exact_d0_probability(&env, &p, &cfg, 1.0).unwrap();
        assert_abs_diff_eq!(exact, analytic_intensity(&p), epsilon = 1e-9);
        assert_abs_diff_eq!(exact, 0.646, epsilon = 5e-4);
    }

    #[test]
    fn ramp_influence_vanishes_without_ramp() {
        let env = EnvelopeModel::exponential(231.7f64).unwrap();
        let base = InterferometerConfig::default().with_schedule(EomSchedule::step(198.0, 80.0));
        let r = ramp_influence(&env, &base, &[0.3, 1.0], &[0.0, 2.0], 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(r.max_abs_diff, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn blocked_pair_gives_sin_squared() {
        let env = EnvelopeModel::exponential(231.7f64).unwrap();
        let alpha = 57.3f64.to_radians();
        let ifo = interferometer_for_alpha(&env, alpha, &InterferometerConfig::default().with_schedule(EomSchedule::step(198.0, 0.0)))
            .unwrap();
        let p = PreparationParams::new(alpha, 0.0, 0.0).unwrap();
        let cfg = RunConfig { n_trials: 100_000, ..RunConfig::new(p, ifo, env) };
        let (n1, n2) = blocked_arm_pair(&cfg).unwrap();
        let d = distinguishability::<f64>(n1, n2).unwrap();
        assert_abs_diff_eq!(d.value, alpha.sin().powi(2), epsilon = 0.01);
        assert_abs_diff_eq!(d.value, 0.708, epsilon = 0.01);
    }
}
