//! Time-resolved two-path amplitude envelope of a single photon.
//!
//! Amplitudes are stored as densities on a uniform grid: sample `i` covers the
//! half-open cell `[t_start + i*dt, t_start + (i+1)*dt)` and contributes
//! `(|a0|^2 + |a1|^2) * dt` to the total norm. Time windows select cells by
//! their left edge, so adjacent half-open windows partition the grid exactly.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform sampling grid in nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    t_start: T,
    dt: T,
    n: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(t_start: T, dt: T, n: usize) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(Error::Structural(format!("grid step must be positive, got {dt}")));
        }
        if !t_start.is_finite() {
            return Err(Error::Structural("grid start must be finite".into()));
        }
        if n < 2 {
            return Err(Error::Structural(format!("grid needs at least 2 samples, got {n}")));
        }
        Ok(Self { t_start, dt, n })
    }

    pub fn t_start(&self) -> T {
        self.t_start
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Exclusive end of the last cell.
    pub fn t_end(&self) -> T {
        self.t_start + self.dt * T::from_usize(self.n).unwrap()
    }

    /// Left edge of cell `i`.
    pub fn cell_start(&self, i: usize) -> T {
        self.t_start + self.dt * T::from_usize(i).unwrap()
    }

    pub fn midpoint(&self, i: usize) -> T {
        self.t_start + self.dt * (T::from_usize(i).unwrap() + T::lit(0.5))
    }

    /// First cell index whose left edge is `>= t`, snapping `t` onto a cell
    /// boundary when it is within rounding distance of one.
    fn boundary_index(&self, t: T) -> usize {
        let x = (t - self.t_start) / self.dt;
        let r = x.round();
        let k = if (x - r).abs() < T::lit(1e-9) { r } else { x.ceil() };
        k.max(T::zero()).to_usize().unwrap_or(self.n).min(self.n)
    }

    /// Cell index range `[i_a, i_b)` covering the window `[t_a, t_b)`.
    pub fn window_indices(&self, t_a: T, t_b: T) -> Result<std::ops::Range<usize>> {
        if !(t_a < t_b) {
            return Err(Error::Range(format!("window start {t_a} must precede end {t_b}")));
        }
        let tol = self.dt * T::lit(1e-9);
        if t_a < self.t_start - tol || t_b > self.t_end() + tol {
            return Err(Error::Range(format!(
                "window [{t_a}, {t_b}) outside grid [{}, {})",
                self.t_start,
                self.t_end()
            )));
        }
        Ok(self.boundary_index(t_a)..self.boundary_index(t_b))
    }
}

/// Complex amplitudes on path/polarization `|0>` and `|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathAmplitudes<T> {
    pub a0: Complex<T>,
    pub a1: Complex<T>,
}

impl<T: Real> PathAmplitudes<T> {
    pub fn new(a0: Complex<T>, a1: Complex<T>) -> Self {
        Self { a0, a1 }
    }

    pub fn real(a0: T, a1: T) -> Self {
        Self::new(Complex::new(a0, T::zero()), Complex::new(a1, T::zero()))
    }

    pub fn zero() -> Self {
        Self::real(T::zero(), T::zero())
    }

    pub fn norm_sqr(&self) -> T {
        self.a0.norm_sqr() + self.a1.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        [self.a0.re, self.a0.im, self.a1.re, self.a1.im].iter().all(|x| x.is_finite())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.a0 * s, self.a1 * s)
    }
}

/// Single-photon wave packet sampled on a [`TimeGrid`].
///
/// Immutable after construction; element application produces a new state.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketState<T> {
    grid: TimeGrid<T>,
    samples: Vec<PathAmplitudes<T>>,
}

impl<T: Real> WavepacketState<T> {
    pub fn new(grid: TimeGrid<T>, samples: Vec<PathAmplitudes<T>>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Structural(format!(
                "grid has {} cells but {} samples were supplied",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Structural(format!("non-finite amplitude at sample {i}")));
        }
        Ok(Self { grid, samples })
    }

    /// Builds a state by evaluating `f` at each cell midpoint.
    pub fn from_fn(grid: TimeGrid<T>, mut f: impl FnMut(T) -> PathAmplitudes<T>) -> Result<Self> {
        let samples = (0..grid.len()).map(|i| f(grid.midpoint(i))).collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn samples(&self) -> &[PathAmplitudes<T>] {
        &self.samples
    }

    /// `sum_t (|a0|^2 + |a1|^2) dt`.
    pub fn total_norm(&self) -> T {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<T>() * self.grid.dt
    }

    /// Probability weight carried by cells whose left edge lies in `[t_a, t_b)`.
    pub fn window_fraction(&self, t_a: T, t_b: T) -> Result<T> {
        let range = self.grid.window_indices(t_a, t_b)?;
        Ok(self.samples[range].iter().map(|s| s.norm_sqr()).sum::<T>() * self.grid.dt)
    }

    /// Detector-level Born probabilities `(p0, p1)` for a state expressed in
    /// the detector basis (path 0 to D0, path 1 to D1).
    pub fn born_intensities(&self) -> (T, T) {
        let (p0, p1) = self.samples.iter().fold((T::zero(), T::zero()), |(p0, p1), s| {
            (p0 + s.a0.norm_sqr(), p1 + s.a1.norm_sqr())
        });
        (p0 * self.grid.dt, p1 * self.grid.dt)
    }

    /// Per-cell `|a0|^2 dt` and `|a1|^2 dt`.
    pub fn cell_intensities(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        let dt = self.grid.dt;
        self.samples
            .iter()
            .enumerate()
            .map(move |(i, s)| (self.grid.cell_start(i), s.a0.norm_sqr() * dt, s.a1.norm_sqr() * dt))
    }

    /// Applies `f(midpoint, amplitudes)` to every sample.
    pub fn map(&self, mut f: impl FnMut(T, PathAmplitudes<T>) -> PathAmplitudes<T>) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| f(self.grid.midpoint(i), *s))
            .collect();
        Self::new(self.grid, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn flat(n: usize, a0: f64, a1: f64) -> WavepacketState<f64> {
        let grid = TimeGrid::new(0.0, 1.0, n).unwrap();
        WavepacketState::new(grid, vec![PathAmplitudes::real(a0, a1); n]).unwrap()
    }

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(TimeGrid::new(0.0, 0.0, 10).is_err());
        assert!(TimeGrid::new(0.0, -1.0, 10).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(f64::NAN, 1.0, 4).is_err());
    }

    #[test]
    fn sample_count_must_match_grid() {
        let grid = TimeGrid::new(0.0, 1.0, 4).unwrap();
        let err = WavepacketState::new(grid, vec![PathAmplitudes::zero(); 3]).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn non_finite_amplitudes_rejected() {
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let err = WavepacketState::new(grid, vec![PathAmplitudes::real(f64::NAN, 0.0); 2]);
        assert!(err.is_err());
    }

    #[test]
    fn normalized_and_zero_norms() {
        // 400 cells of width 1 with |a0|^2 = 1/400.
        let s = flat(400, (1.0f64 / 400.0).sqrt(), 0.0);
        assert_abs_diff_eq!(s.total_norm(), 1.0, epsilon = 1e-12);
        assert_eq!(flat(10, 0.0, 0.0).total_norm(), 0.0);
    }

    #[test]
    fn blocked_equal_superposition_has_half_norm() {
        let a = (0.5f64 / 400.0).sqrt();
        let split = flat(400, a, a);
        let blocked = split.map(|_, s| PathAmplitudes::new(s.a0, Complex::new(0.0, 0.0))).unwrap();
        let direct: f64 = blocked.samples().iter().map(|s| s.a0.norm_sqr()).sum();
        assert_abs_diff_eq!(blocked.total_norm(), direct, epsilon = 1e-15);
        assert_abs_diff_eq!(blocked.total_norm(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn window_fraction_of_rectangle() {
        let s = flat(400, (1.0f64 / 400.0).sqrt(), 0.0);
        assert_abs_diff_eq!(s.window_fraction(0.0, 400.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.window_fraction(0.0, 200.0).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn window_errors() {
        let s = flat(10, 0.1, 0.0);
        assert!(matches!(s.window_fraction(-1.0, 5.0), Err(Error::Range(_))));
        assert!(matches!(s.window_fraction(0.0, 11.0), Err(Error::Range(_))));
        assert!(matches!(s.window_fraction(5.0, 5.0), Err(Error::Range(_))));
    }

    #[test]
    fn half_open_windows_never_double_count() {
        let s = flat(10, 0.1, 0.2);
        let r = s.grid().window_indices(3.0, 7.0).unwrap();
        assert_eq!(r, 3..7);
        // Cells whose left edge is in [2.5, 7.5): 3..=7.
        assert_eq!(s.grid().window_indices(2.5, 7.5).unwrap(), 3..8);
    }

    #[test]
    fn born_intensities_limits() {
        let s = flat(100, 0.1, 0.0);
        let (p0, p1) = s.born_intensities();
        assert_abs_diff_eq!(p0, 1.0, epsilon = 1e-12);
        assert_eq!(p1, 0.0);
        let a = (0.5f64 / 100.0).sqrt();
        let (p0, p1) = flat(100, a, a).born_intensities();
        assert_abs_diff_eq!(p0, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let grid = TimeGrid::<f32>::new(0.0, 1.0, 4).unwrap();
        let s = WavepacketState::new(grid, vec![PathAmplitudes::real(0.5f32, 0.0); 4]).unwrap();
        assert!((s.total_norm() - 1.0).abs() < 1e-6);
    }
}
