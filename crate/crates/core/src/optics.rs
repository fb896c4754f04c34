//! Jones-calculus elements, the time-dependent EOM, and propagation through the
//! interferometer with a switchable output beam splitter.
//!
//! Path `|0>` and `|1>` are the two orthogonal polarizations carried by the
//! interferometer arms after `BS_in`. The output half of the setup is a
//! polarization combiner, an EOM acting as a voltage-controlled waveplate, and
//! a polarizing splitter whose two ports are the detectors D0 and D1. With the
//! EOM at `V_pi` and its axis at 22.5 degrees the arms are mixed (closed
//! interferometer); at zero voltage each arm maps to its own detector (open).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::{PathAmplitudes, WavepacketState};

/// A 2x2 complex matrix acting on [`PathAmplitudes`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix<T> {
    pub m00: Complex<T>,
    pub m01: Complex<T>,
    pub m10: Complex<T>,
    pub m11: Complex<T>,
}

impl<T: Real> JonesMatrix<T> {
    pub fn new(m00: Complex<T>, m01: Complex<T>, m10: Complex<T>, m11: Complex<T>) -> Self {
        Self { m00, m01, m10, m11 }
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        Self::new(o, z, z, o)
    }

    pub fn diagonal(d0: Complex<T>, d1: Complex<T>) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(d0, z, z, d1)
    }

    /// Balanced beam splitter `(1/sqrt2) [[1, 1], [1, -1]]`.
    pub fn beam_splitter() -> Self {
        let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        Self::new(h, h, h, -h)
    }

    /// Relative phase `e^{i phi}` on path 1.
    pub fn phase_shifter(phi: T) -> Self {
        Self::diagonal(Complex::new(T::one(), T::zero()), Complex::from_polar(T::one(), phi))
    }

    /// Projector that removes the amplitude of `arm`. Not unitary.
    pub fn block(arm: Arm) -> Self {
        let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
        match arm {
            Arm::Path0 => Self::diagonal(z, o),
            Arm::Path1 => Self::diagonal(o, z),
        }
    }

    pub fn apply(&self, v: PathAmplitudes<T>) -> PathAmplitudes<T> {
        PathAmplitudes::new(self.m00 * v.a0 + self.m01 * v.a1, self.m10 * v.a0 + self.m11 * v.a1)
    }

    /// Matrix product `self * rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &Self) -> Self {
        Self::new(
            self.m00 * rhs.m00 + self.m01 * rhs.m10,
            self.m00 * rhs.m01 + self.m01 * rhs.m11,
            self.m10 * rhs.m00 + self.m11 * rhs.m10,
            self.m10 * rhs.m01 + self.m11 * rhs.m11,
        )
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.m00.conj(), self.m10.conj(), self.m01.conj(), self.m11.conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.m00 * s, self.m01 * s, self.m10 * s, self.m11 * s)
    }

    /// Largest entry-wise deviation of `U^dagger U` from the identity.
    pub fn unitarity_defect(&self) -> T {
        let p = self.adjoint().then_after(self);
        let one = Complex::new(T::one(), T::zero());
        [(p.m00 - one).norm(), p.m01.norm(), p.m10.norm(), (p.m11 - one).norm()]
            .into_iter()
            .fold(T::zero(), T::max)
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_defect() <= tol
    }
}

/// Linear retarder with fast axis at `axis` from path 0 and phase `retardance`:
/// `R(-axis) diag(1, e^{i retardance}) R(axis)`.
pub fn hwp_matrix<T: Real>(axis: T, retardance: T) -> JonesMatrix<T> {
    let (s, c) = axis.sin_cos();
    let e = Complex::from_polar(T::one(), retardance);
    let one = Complex::new(T::one(), T::zero());
    let cs = Complex::new(c * s, T::zero());
    let off = cs * (one - e);
    JonesMatrix::new(e * (s * s) + c * c, off, off, e * (c * c) + s * s)
}

/// Which interferometer arm is obstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Path0,
    Path1,
}

impl Arm {
    pub fn other(self) -> Self {
        match self {
            Arm::Path0 => Arm::Path1,
            Arm::Path1 => Arm::Path0,
        }
    }
}

/// EOM drive program: `level_before` until `switch_time`, then a linear ramp
/// lasting `ramp_duration` to `level_after`.
///
/// `switch_time` may be `+inf` (the EOM never switches) or any value before
/// the packet (it has already switched).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomSchedule<T> {
    pub v_pi: T,
    pub switch_time: T,
    pub ramp_duration: T,
    pub level_before: T,
    pub level_after: T,
}

impl<T: Real> Default for EomSchedule<T> {
    fn default() -> Self {
        Self {
            v_pi: T::lit(198.0),
            switch_time: T::lit(80.0),
            ramp_duration: T::lit(15.0),
            level_before: T::lit(198.0),
            level_after: T::zero(),
        }
    }
}

impl<T: Real> EomSchedule<T> {
    /// Ideal instantaneous `V_pi -> 0` switch at `switch_time`.
    pub fn step(v_pi: T, switch_time: T) -> Self {
        Self { v_pi, switch_time, ramp_duration: T::zero(), level_before: v_pi, level_after: T::zero() }
    }

    pub fn with_ramp(mut self, ramp_duration: T) -> Self {
        self.ramp_duration = ramp_duration;
        self
    }

    pub fn with_switch_time(mut self, switch_time: T) -> Self {
        self.switch_time = switch_time;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_pi > T::zero()) || !self.v_pi.is_finite() {
            return Err(Error::Configuration(format!("v_pi must be positive, got {}", self.v_pi)));
        }
        if !(self.ramp_duration >= T::zero()) || !self.ramp_duration.is_finite() {
            return Err(Error::Configuration(format!(
                "ramp duration must be finite and non-negative, got {}",
                self.ramp_duration
            )));
        }
        if self.switch_time.is_nan() || self.switch_time == T::neg_infinity() {
            return Err(Error::Configuration("switch time must be a number or +inf".into()));
        }
        if !self.level_before.is_finite() || !self.level_after.is_finite() {
            return Err(Error::Configuration("voltage levels must be finite".into()));
        }
        Ok(())
    }

    pub fn voltage(&self, t: T) -> T {
        if t < self.switch_time {
            return self.level_before;
        }
        let ramp_end = self.switch_time + self.ramp_duration;
        if t >= ramp_end || self.ramp_duration == T::zero() {
            return self.level_after;
        }
        let frac = (t - self.switch_time) / self.ramp_duration;
        self.level_before + (self.level_after - self.level_before) * frac
    }
}

/// EOM retardance `pi * V(t) / V_pi` at time `t`.
pub fn eom_retardance<T: Real>(schedule: &EomSchedule<T>, t: T) -> Result<T> {
    if !(schedule.v_pi > T::zero()) {
        return Err(Error::Configuration(format!("v_pi must be positive, got {}", schedule.v_pi)));
    }
    Ok(T::PI() * schedule.voltage(t) / schedule.v_pi)
}

/// The `(alpha, phi, gamma)` preparation angles, in radians.
///
/// `alpha` is the wave/particle mixing angle, `phi` the arm phase, `gamma`
/// the relative phase between the early and late time bins. `phi` and `gamma`
/// are accepted in `[-pi, 2pi]` and stored wrapped to `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparationParams<T> {
    alpha: T,
    phi: T,
    gamma: T,
}

impl<T: Real> PreparationParams<T> {
    pub fn new(alpha: T, phi: T, gamma: T) -> Result<Self> {
        let half_pi = T::FRAC_PI_2();
        let slack = T::epsilon() * T::lit(16.0);
        if !alpha.is_finite() || alpha < -slack || alpha > half_pi + slack {
            return Err(Error::Domain(format!("alpha must lie in [0, pi/2], got {alpha}")));
        }
        let alpha = alpha.max(T::zero()).min(half_pi);
        Ok(Self { alpha, phi: wrap_phase("phi", phi)?, gamma: wrap_phase("gamma", gamma)? })
    }

    pub fn from_degrees(alpha: T, phi: T, gamma: T) -> Result<Self> {
        Self::new(alpha.to_radians(), phi.to_radians(), gamma.to_radians())
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    pub fn with_phi(self, phi: T) -> Result<Self> {
        Self::new(self.alpha, phi, self.gamma)
    }

    pub fn with_gamma(self, gamma: T) -> Result<Self> {
        Self::new(self.alpha, self.phi, gamma)
    }
}

fn wrap_phase<T: Real>(name: &str, x: T) -> Result<T> {
    let pi = T::PI();
    let slack = T::epsilon() * T::lit(64.0);
    if !x.is_finite() || x < -pi - slack || x > pi + pi + slack {
        return Err(Error::Domain(format!("{name} must lie in [-pi, 2pi], got {x}")));
    }
    let two_pi = pi + pi;
    let w = x % two_pi;
    Ok(if w < T::zero() { w + two_pi } else { w })
}

/// Static description of the optical setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerConfig<T> {
    /// EOM fast-axis angle relative to path 0, radians.
    pub eom_axis: T,
    pub schedule: EomSchedule<T>,
    pub blocked_arm: Option<Arm>,
}

impl<T: Real> Default for InterferometerConfig<T> {
    fn default() -> Self {
        Self { eom_axis: T::lit(22.5).to_radians(), schedule: EomSchedule::default(), blocked_arm: None }
    }
}

impl<T: Real> InterferometerConfig<T> {
    pub fn with_schedule(mut self, schedule: EomSchedule<T>) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_blocked_arm(mut self, arm: Option<Arm>) -> Self {
        self.blocked_arm = arm;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.eom_axis.is_finite() {
            return Err(Error::Configuration("EOM axis must be finite".into()));
        }
        self.schedule.validate()
    }
}

/// Per-time transfer matrix of the whole interferometer for fixed
/// preparation angles and configuration.
///
/// Elements in order: `BS_in`, time-bin phase `e^{i gamma}` for
/// `t >= switch_time`, arm phase `phi`, optional arm block, EOM waveplate.
/// The matrices before and after the switch are cached; only times inside the
/// ramp rebuild the waveplate.
#[derive(Debug, Clone, Copy)]
pub struct Propagator<T> {
    config: InterferometerConfig<T>,
    front: JonesMatrix<T>,
    gamma_phase: Complex<T>,
    closed: JonesMatrix<T>,
    open: JonesMatrix<T>,
}

impl<T: Real> Propagator<T> {
    pub fn new(params: &PreparationParams<T>, config: &InterferometerConfig<T>) -> Result<Self> {
        config.validate()?;
        let mut front = JonesMatrix::phase_shifter(params.phi()).then_after(&JonesMatrix::beam_splitter());
        if let Some(arm) = config.blocked_arm {
            front = JonesMatrix::block(arm).then_after(&front);
        }
        let s = &config.schedule;
        let before = hwp_matrix(config.eom_axis, T::PI() * s.level_before / s.v_pi);
        let after = hwp_matrix(config.eom_axis, T::PI() * s.level_after / s.v_pi);
        let gamma_phase = Complex::from_polar(T::one(), params.gamma());
        Ok(Self {
            config: *config,
            front,
            gamma_phase,
            closed: before.then_after(&front),
            open: after.then_after(&front).scale(gamma_phase),
        })
    }

    pub fn config(&self) -> &InterferometerConfig<T> {
        &self.config
    }

    /// Full transfer matrix at time `t`.
    pub fn transfer(&self, t: T) -> JonesMatrix<T> {
        let s = &self.config.schedule;
        if t < s.switch_time {
            self.closed
        } else if t >= s.switch_time + s.ramp_duration {
            self.open
        } else {
            let retardance = T::PI() * s.voltage(t) / s.v_pi;
            hwp_matrix(self.config.eom_axis, retardance).then_after(&self.front).scale(self.gamma_phase)
        }
    }

    /// Detector-basis amplitudes for `input` entering `BS_in` at time `t`.
    pub fn output(&self, t: T, input: PathAmplitudes<T>) -> PathAmplitudes<T> {
        self.transfer(t).apply(input)
    }
}

/// Propagates an input envelope (amplitude on path 0 before `BS_in`) through
/// the interferometer, sample by sample at each cell midpoint. The result is
/// in the detector basis: `a0` reaches D0, `a1` reaches D1.
pub fn propagate<T: Real>(
    input: &WavepacketState<T>,
    params: &PreparationParams<T>,
    config: &InterferometerConfig<T>,
) -> Result<WavepacketState<T>> {
    let norm = input.total_norm();
    if norm > T::one() + T::lit(1e-9) {
        return Err(Error::Structural(format!("input norm {norm} exceeds 1")));
    }
    let prop = Propagator::new(params, config)?;
    input.map(|t, a| prop.output(t, a))
}

/// Closed-form D0 detection probability
/// `cos^2(phi/2) cos^2(alpha) + sin^2(alpha)/2`.
pub fn analytic_intensity<T: Real>(params: &PreparationParams<T>) -> T {
    let c_phi = (params.phi() / T::lit(2.0)).cos();
    let (s_a, c_a) = params.alpha().sin_cos();
    c_phi * c_phi * c_a * c_a + T::lit(0.5) * s_a * s_a
}

/// Which of the closed-form states to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Wave,
    Particle,
    Superposition,
}

/// Two-time-bin, two-path amplitude table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBinAmplitudes<T> {
    pub early: PathAmplitudes<T>,
    pub late: PathAmplitudes<T>,
}

impl<T: Real> TimeBinAmplitudes<T> {
    pub fn norm_sqr(&self) -> T {
        self.early.norm_sqr() + self.late.norm_sqr()
    }

    /// Probability of a D0 click summed over both bins.
    pub fn d0_probability(&self) -> T {
        self.early.a0.norm_sqr() + self.late.a0.norm_sqr()
    }
}

/// Discrete time-bin states: the wave state lives in the early bin,
/// the particle state in the late bin, and the superposition weights them by
/// `cos(alpha)` and `e^{i gamma} sin(alpha)`.
pub fn analytic_state<T: Real>(params: &PreparationParams<T>, kind: StateKind) -> TimeBinAmplitudes<T> {
    let half = params.phi() / T::lit(2.0);
    let wave = PathAmplitudes::new(Complex::new(half.cos(), T::zero()), Complex::new(T::zero(), -half.sin()));
    let h = T::FRAC_1_SQRT_2();
    let particle = PathAmplitudes::new(Complex::new(h, T::zero()), Complex::from_polar(h, params.phi()));
    let zero = PathAmplitudes::zero();
    match kind {
        StateKind::Wave => TimeBinAmplitudes { early: wave, late: zero },
        StateKind::Particle => TimeBinAmplitudes { early: zero, late: particle },
        StateKind::Superposition => {
            let (s, c) = params.alpha().sin_cos();
            TimeBinAmplitudes {
                early: wave.scale(Complex::new(c, T::zero())),
                late: particle.scale(Complex::from_polar(s, params.gamma())),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    /// Explicit `R(-theta) diag(1, e^{i d}) R(theta)` product, independent of
    /// the closed form used by `hwp_matrix`.
    fn waveplate_by_rotation(theta: f64, d: f64) -> JonesMatrix<f64> {
        let (s, co) = theta.sin_cos();
        let rot = |s: f64, co: f64| JonesMatrix::new(c(co, 0.0), c(s, 0.0), c(-s, 0.0), c(co, 0.0));
        let r = rot(s, co);
        let r_inv = rot(-s, co);
        r_inv.then_after(&JonesMatrix::diagonal(c(1.0, 0.0), Complex::from_polar(1.0, d)).then_after(&r))
    }

    /// Equal up to a global phase.
    fn assert_ray_eq(a: PathAmplitudes<f64>, b: PathAmplitudes<f64>, tol: f64) {
        let overlap = a.a0.conj() * b.a0 + a.a1.conj() * b.a1;
        assert_abs_diff_eq!(overlap.norm(), a.norm_sqr().sqrt() * b.norm_sqr().sqrt(), epsilon = tol);
        assert_abs_diff_eq!(a.norm_sqr(), b.norm_sqr(), epsilon = tol);
    }

    #[test]
    fn waveplate_matches_rotation_product() {
        for &(theta, d) in &[(0.3, 1.1), (PI / 8.0, PI), (-0.7, 2.5), (1.2, 0.0)] {
            let a = hwp_matrix(theta, d);
            let b = waveplate_by_rotation(theta, d);
            for (x, y) in [(a.m00, b.m00), (a.m01, b.m01), (a.m10, b.m10), (a.m11, b.m11)] {
                assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zero_retardance_is_identity() {
        for axis in [0.0, 0.4, 1.3] {
            let m = hwp_matrix(axis, 0.0);
            assert_abs_diff_eq!((m.m00 - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m.m01.norm(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!((m.m11 - c(1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn half_wave_at_22_5_rotates_by_45() {
        let m = hwp_matrix(22.5f64.to_radians(), PI);
        let out = m.apply(PathAmplitudes::real(1.0, 0.0));
        assert_ray_eq(out, PathAmplitudes::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2), 1e-12);
    }

    #[test]
    fn half_wave_on_axis_flips_sign() {
        let out = hwp_matrix(0.0, PI).apply(PathAmplitudes::real(0.0, 1.0));
        assert_ray_eq(out, PathAmplitudes::real(0.0, -1.0), 1e-12);
    }

    #[test]
    fn elements_are_unitary() {
        assert!(JonesMatrix::<f64>::beam_splitter().is_unitary(1e-12));
        assert!(JonesMatrix::phase_shifter(0.77f64).is_unitary(1e-12));
        assert!(hwp_matrix(0.3f64, 2.0).is_unitary(1e-12));
        assert!(!JonesMatrix::<f64>::block(Arm::Path0).is_unitary(1e-3));
    }

    #[test]
    fn retardance_follows_schedule() {
        let s = EomSchedule::<f64>::default();
        assert_abs_diff_eq!(eom_retardance(&s, 10.0).unwrap(), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(eom_retardance(&s, 200.0).unwrap(), 0.0, epsilon = 1e-12);
        // Ramp midpoint: linear interpolation between 198 V and 0 V.
        assert_abs_diff_eq!(eom_retardance(&s, 87.5).unwrap(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn retardance_rejects_bad_v_pi() {
        let s = EomSchedule { v_pi: 0.0, ..EomSchedule::<f64>::default() };
        assert!(matches!(eom_retardance(&s, 0.0), Err(Error::Configuration(_))));
        let s = EomSchedule { v_pi: -5.0, ..EomSchedule::<f64>::default() };
        assert!(s.validate().is_err());
    }

    #[test]
    fn step_schedule_switches_exactly() {
        let s = EomSchedule::step(198.0f64, 80.0);
        assert_eq!(s.voltage(79.999), 198.0);
        assert_eq!(s.voltage(80.0), 0.0);
        let never = EomSchedule::step(198.0f64, f64::INFINITY);
        assert_eq!(never.voltage(1e9), 198.0);
    }

    #[test]
    fn params_validate_and_wrap() {
        assert!(PreparationParams::new(-0.1f64, 0.0, 0.0).is_err());
        assert!(PreparationParams::new(2.0f64, 0.0, 0.0).is_err());
        assert!(PreparationParams::new(0.5f64, 7.0, 0.0).is_err());
        assert!(PreparationParams::new(0.5f64, 0.0, -4.0).is_err());
        let p = PreparationParams::new(0.5f64, -FRAC_PI_2, 2.0 * PI).unwrap();
        assert_abs_diff_eq!(p.phi(), 1.5 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(p.gamma(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn analytic_intensity_values() {
        let p = |a: f64, f: f64| PreparationParams::from_degrees(a, f, 0.0).unwrap();
        assert_abs_diff_eq!(analytic_intensity(&p(0.0, 0.0)), 1.0, epsilon = 1e-15);
        for phi in [-90.0, 0.0, 33.0, 180.0, 270.0] {
            assert_abs_diff_eq!(analytic_intensity(&p(90.0, phi)), 0.5, epsilon = 1e-15);
        }
        let a = 57.3f64.to_radians();
        let expected = a.cos().powi(2) + 0.5 * a.sin().powi(2);
        assert_abs_diff_eq!(analytic_intensity(&p(57.3, 0.0)), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(analytic_intensity(&p(57.3, 0.0)), 0.6460, epsilon = 1e-4);
    }

    #[test]
    fn analytic_states() {
        let p = PreparationParams::new(0.0f64, 0.0, 0.0).unwrap();
        let w = analytic_state(&p, StateKind::Wave);
        assert_ray_eq(w.early, PathAmplitudes::real(1.0, 0.0), 1e-12);
        assert_eq!(w.late.norm_sqr(), 0.0);

        let p = PreparationParams::new(0.0f64, FRAC_PI_2, 0.0).unwrap();
        let part = analytic_state(&p, StateKind::Particle);
        assert_ray_eq(part.late, PathAmplitudes::new(c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)), 1e-12);
        assert_eq!(part.early.norm_sqr(), 0.0);

        let p = PreparationParams::new(PI / 4.0, 0.9, 0.0).unwrap();
        let sup = analytic_state(&p, StateKind::Superposition);
        let w = analytic_state(&p, StateKind::Wave);
        let pa = analytic_state(&p, StateKind::Particle);
        assert_abs_diff_eq!((sup.early.a0 - w.early.a0 * FRAC_1_SQRT_2).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!((sup.late.a1 - pa.late.a1 * FRAC_1_SQRT_2).norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sup.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn superposition_state_reproduces_intensity_law() {
        for a in [0.0, 15.0, 57.3, 80.0, 90.0] {
            for phi in [-90.0, 0.0, 60.0, 180.0, 250.0] {
                let p = PreparationParams::from_degrees(a, phi, 37.0f64).unwrap();
                let s = analytic_state(&p, StateKind::Superposition);
                assert_abs_diff_eq!(s.d0_probability(), analytic_intensity(&p), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn propagator_closed_and_open_maps() {
        let cfg = InterferometerConfig::<f64>::default().with_schedule(EomSchedule::step(198.0, 80.0));
        let p = PreparationParams::new(0.0f64, 0.0, 0.0).unwrap();
        let prop = Propagator::new(&p, &cfg).unwrap();
        let before = prop.output(10.0, PathAmplitudes::real(1.0, 0.0));
        assert_abs_diff_eq!(before.a0.norm_sqr(), 1.0, epsilon = 1e-12);
        let after = prop.output(100.0, PathAmplitudes::real(1.0, 0.0));
        assert_abs_diff_eq!(after.a0.norm_sqr(), 0.5, epsilon = 1e-12);
        assert!(prop.transfer(10.0).is_unitary(1e-12));
        assert!(prop.transfer(100.0).is_unitary(1e-12));
    }

    #[test]
    fn blocked_arm_closed_interferometer_splits_evenly() {
        let cfg = InterferometerConfig::<f64>::default()
            .with_schedule(EomSchedule::step(198.0, f64::INFINITY))
            .with_blocked_arm(Some(Arm::Path1));
        let p = PreparationParams::new(0.0f64, 1.0, 0.0).unwrap();
        let out = Propagator::new(&p, &cfg).unwrap().output(0.0, PathAmplitudes::real(1.0, 0.0));
        assert_abs_diff_eq!(out.a0.norm_sqr(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(out.a1.norm_sqr(), 0.25, epsilon = 1e-12);
    }
}
