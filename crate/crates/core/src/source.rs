//! Heralded narrowband single-photon source: temporal envelopes, switch-time
//! calibration, and heralded correlation statistics.

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::state::{PathAmplitudes, TimeGrid, WavepacketState};

/// Exponential envelopes are realized on a grid long enough that the mass
/// beyond the last cell is below this bound; the last cell absorbs it.
const TAIL_MASS: f64 = 1e-12;

/// Temporal intensity profile `|f(t)|^2` of the heralded photon, as a
/// probability density in time (ns).
#[derive(Debug, Clone, PartialEq)]
pub enum EnvelopeModel<T> {
    /// `pdf(t) = exp(-t / decay_constant) / decay_constant` for `t >= 0`.
    ///
    /// `duration` is the nominal packet length: realized grids always span at
    /// least this much, and further if the tail needs it.
    Exponential { decay_constant: T, duration: T },
    Table(TableEnvelope<T>),
}

impl<T: Real> EnvelopeModel<T> {
    pub fn exponential(decay_constant: T) -> Result<Self> {
        Self::exponential_with_duration(decay_constant, T::lit(400.0))
    }

    pub fn exponential_with_duration(decay_constant: T, duration: T) -> Result<Self> {
        if !(decay_constant > T::zero()) || !decay_constant.is_finite() {
            return Err(Error::Configuration(format!("decay constant must be positive, got {decay_constant}")));
        }
        if !(duration > T::zero()) || !duration.is_finite() {
            return Err(Error::Configuration(format!("duration must be positive, got {duration}")));
        }
        Ok(Self::Exponential { decay_constant, duration })
    }

    /// Earliest time with non-zero density.
    pub fn support_start(&self) -> T {
        match self {
            Self::Exponential { .. } => T::zero(),
            Self::Table(t) => t.edges[0],
        }
    }

    /// Nominal packet length.
    pub fn duration(&self) -> T {
        match self {
            Self::Exponential { duration, .. } => *duration,
            Self::Table(t) => t.end() - t.edges[0],
        }
    }

    pub fn pdf(&self, t: T) -> T {
        match self {
            Self::Exponential { decay_constant: tau, .. } => {
                if t < T::zero() {
                    T::zero()
                } else {
                    (-t / *tau).exp() / *tau
                }
            }
            Self::Table(table) => table.pdf(t),
        }
    }

    /// Probability that the photon arrives before `t`.
    pub fn cdf(&self, t: T) -> T {
        match self {
            Self::Exponential { decay_constant: tau, .. } => {
                if t <= T::zero() {
                    T::zero()
                } else if t == T::infinity() {
                    T::one()
                } else {
                    -(-t / *tau).exp_m1()
                }
            }
            Self::Table(table) => table.cdf(t),
        }
    }

    /// Inverse CDF. `quantile(1)` is `+inf` for the exponential model.
    pub fn quantile(&self, u: T) -> T {
        let u = u.max(T::zero()).min(T::one());
        match self {
            Self::Exponential { decay_constant: tau, .. } => {
                if u >= T::one() {
                    T::infinity()
                } else {
                    -*tau * (-u).ln_1p()
                }
            }
            Self::Table(table) => table.quantile(u),
        }
    }

    /// End of the region a realized grid has to cover.
    fn realization_end(&self) -> T {
        match self {
            Self::Exponential { decay_constant, duration } => {
                let tail = *decay_constant * -T::lit(TAIL_MASS).ln();
                tail.max(*duration)
            }
            Self::Table(t) => t.end(),
        }
    }

    /// Samples the envelope on a uniform grid of step `dt` as an amplitude
    /// density on path 0 (the input port of `BS_in`).
    ///
    /// Each cell receives the exact probability mass the envelope places in
    /// it, so windows aligned to cell boundaries reproduce the CDF. When
    /// `anchor` is finite and after the support start, the grid is shifted so
    /// that `anchor` falls on a cell boundary.
    pub fn realize(&self, dt: T, anchor: Option<T>) -> Result<WavepacketState<T>> {
        if !(dt > T::zero()) {
            return Err(Error::Structural(format!("grid step must be positive, got {dt}")));
        }
        let start = self.support_start();
        let t_start = match anchor {
            Some(a) if a.is_finite() && a > start => a - ((a - start) / dt).ceil() * dt,
            _ => start,
        };
        let end = self.realization_end();
        let n = ((end - t_start) / dt).ceil().to_usize().unwrap_or(2).max(2);
        let grid = TimeGrid::new(t_start, dt, n)?;
        let mut samples = Vec::with_capacity(n);
        let mut lower = self.cdf(t_start);
        for i in 0..n {
            let upper = if i + 1 == n { T::one() } else { self.cdf(grid.cell_start(i + 1)) };
            let mass = (upper - lower).max(T::zero());
            samples.push(PathAmplitudes::real((mass / dt).sqrt(), T::zero()));
            lower = upper;
        }
        WavepacketState::new(grid, samples)
    }

    /// EOM switch time at which the early (closed) window carries weight
    /// `cos^2(alpha)`. `alpha = 0` never switches (`+inf`).
    pub fn switch_time_for_alpha(&self, alpha: T) -> Result<T> {
        if !(alpha >= T::zero()) || alpha > T::FRAC_PI_2() + T::epsilon() * T::lit(16.0) {
            return Err(Error::Domain(format!("alpha must lie in [0, pi/2], got {alpha}")));
        }
        if alpha == T::zero() {
            return Ok(T::infinity());
        }
        let c = alpha.cos();
        Ok(self.quantile(c * c))
    }
}

/// Piecewise-constant envelope from sampled `(time, intensity)` rows.
///
/// Row `i` covers `[t_i, t_{i+1})`; the last row covers one more spacing
/// (1 ns for a single-row table).
#[derive(Debug, Clone, PartialEq)]
pub struct TableEnvelope<T> {
    edges: Vec<T>,
    cumulative: Vec<T>,
}

impl<T: Real> TableEnvelope<T> {
    pub fn new(rows: &[(T, T)]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Configuration("envelope table is empty".into()));
        }
        for (i, &(t, w)) in rows.iter().enumerate() {
            if !t.is_finite() || !w.is_finite() || w < T::zero() {
                return Err(Error::Configuration(format!("invalid envelope row {i}: ({t}, {w})")));
            }
            if i > 0 && !(t > rows[i - 1].0) {
                return Err(Error::Configuration(format!("envelope times must increase strictly (row {i})")));
            }
        }
        let mut edges: Vec<T> = rows.iter().map(|r| r.0).collect();
        let last_width = if rows.len() > 1 { rows[rows.len() - 1].0 - rows[rows.len() - 2].0 } else { T::one() };
        edges.push(edges[edges.len() - 1] + last_width);

        let masses: Vec<T> = rows.iter().zip(edges.windows(2)).map(|(r, e)| r.1 * (e[1] - e[0])).collect();
        let total: T = masses.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::Configuration("envelope table has zero total intensity".into()));
        }
        let mut cumulative = Vec::with_capacity(edges.len());
        let mut acc = T::zero();
        cumulative.push(acc);
        for m in masses {
            acc = acc + m / total;
            cumulative.push(acc);
        }
        *cumulative.last_mut().unwrap() = T::one();
        Ok(Self { edges, cumulative })
    }

    pub fn end(&self) -> T {
        self.edges[self.edges.len() - 1]
    }

    fn bin_of(&self, t: T) -> Option<usize> {
        if t < self.edges[0] || t >= self.end() {
            return None;
        }
        Some(self.edges.partition_point(|&e| e <= t) - 1)
    }

    pub fn pdf(&self, t: T) -> T {
        match self.bin_of(t) {
            Some(i) => (self.cumulative[i + 1] - self.cumulative[i]) / (self.edges[i + 1] - self.edges[i]),
            None => T::zero(),
        }
    }

    pub fn cdf(&self, t: T) -> T {
        if t <= self.edges[0] {
            return T::zero();
        }
        match self.bin_of(t) {
            Some(i) => {
                let frac = (t - self.edges[i]) / (self.edges[i + 1] - self.edges[i]);
                self.cumulative[i] + (self.cumulative[i + 1] - self.cumulative[i]) * frac
            }
            None => T::one(),
        }
    }

    pub fn quantile(&self, u: T) -> T {
        // First bin whose upper cumulative exceeds u; zero-mass bins are skipped.
        let k = self.cumulative.partition_point(|&c| c <= u);
        if k == 0 {
            return self.edges[0];
        }
        if k >= self.cumulative.len() {
            return self.end();
        }
        let i = k - 1;
        let mass = self.cumulative[i + 1] - self.cumulative[i];
        let frac = (u - self.cumulative[i]) / mass;
        self.edges[i] + (self.edges[i + 1] - self.edges[i]) * frac
    }
}

/// Parses a two-column `time_ns, relative_intensity` table. Commas or
/// whitespace separate columns; blank lines, `#` comments and a non-numeric
/// header line are skipped.
pub fn parse_envelope_table<T: Real>(text: &str) -> Result<EnvelopeModel<T>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|f| !f.is_empty());
        let (Some(a), Some(b)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(t), Ok(w)) => rows.push((T::lit(t), T::lit(w))),
            _ if rows.is_empty() => continue,
            _ => return Err(Error::Parse(format!("line {}: non-numeric value", lineno + 1))),
        }
    }
    Ok(EnvelopeModel::Table(TableEnvelope::new(&rows)?))
}

pub fn load_envelope_table<T: Real>(path: &Path) -> Result<EnvelopeModel<T>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Configuration(format!("cannot read envelope table {}: {e}", path.display())))?;
    parse_envelope_table(&text)
}

/// Draws one detection time from the envelope density.
pub fn sample_detection_time<T: Real, R: Rng + ?Sized>(model: &EnvelopeModel<T>, rng: &mut R) -> T {
    model.quantile(T::lit(rng.random::<f64>()))
}

/// Decay constant that places `early_fraction` of an exponential envelope
/// before `switch_time`: the solution of `1 - exp(-switch_time / tau) = early_fraction`.
pub fn solve_decay_constant<T: Real>(switch_time: T, early_fraction: T) -> Result<T> {
    if !(early_fraction > T::zero() && early_fraction < T::one()) {
        return Err(Error::Domain(format!("early fraction must lie in (0, 1), got {early_fraction}")));
    }
    if !(switch_time > T::zero()) || !switch_time.is_finite() {
        return Err(Error::Domain(format!("switch time must be positive, got {switch_time}")));
    }
    Ok(-switch_time / (-early_fraction).ln_1p())
}

/// Run-level source parameters. Rates only feed summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceStats {
    /// Biphoton generation rate during the generation window, 1/s.
    pub pair_rate: f64,
    pub trap_time_ms: f64,
    pub generation_time_ms: f64,
    /// Probability that a herald is accompanied by a second, independent photon.
    pub multi_pair_prob: f64,
}

impl Default for SourceStats {
    fn default() -> Self {
        Self { pair_rate: 47230.0, trap_time_ms: 4.5, generation_time_ms: 0.5, multi_pair_prob: 0.115 }
    }
}

impl SourceStats {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.multi_pair_prob) {
            return Err(Error::Configuration(format!(
                "multi-pair probability must lie in [0, 1), got {}",
                self.multi_pair_prob
            )));
        }
        if !(self.pair_rate >= 0.0) || !(self.trap_time_ms >= 0.0) || !(self.generation_time_ms > 0.0) {
            return Err(Error::Configuration("rates and times must be non-negative".into()));
        }
        Ok(())
    }

    pub fn duty_cycle(&self) -> f64 {
        self.generation_time_ms / (self.trap_time_ms + self.generation_time_ms)
    }

    /// Pair rate averaged over the trap/generation cycle.
    pub fn mean_pair_rate(&self) -> f64 {
        self.pair_rate * self.duty_cycle()
    }
}

/// Counts from a heralded Hanbury Brown-Twiss measurement: heralds, herald
/// coincidences with each analyzer output, and triple coincidences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct HeraldCounts {
    pub n_heralds: u64,
    pub n_h1: u64,
    pub n_h2: u64,
    pub n_h12: u64,
}

/// Heralded second-order correlation `N_h N_h12 / (N_h1 N_h2)`.
pub fn g2_conditional(counts: &HeraldCounts) -> Result<f64> {
    if counts.n_heralds == 0 || counts.n_h1 == 0 || counts.n_h2 == 0 {
        return Err(Error::UndefinedEstimate(format!(
            "g2 needs non-zero heralds and single-arm counts, got {counts:?}"
        )));
    }
    Ok(counts.n_heralds as f64 * counts.n_h12 as f64 / (counts.n_h1 as f64 * counts.n_h2 as f64))
}

/// Simulates the heralded photon on a 50/50 analyzer with click detectors.
/// Each herald carries one photon plus, with probability `multi_pair_prob`,
/// a second independent one.
pub fn simulate_heralded_hbt(stats: &SourceStats, n_heralds: u64, seed: u64) -> Result<HeraldCounts> {
    stats.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = HeraldCounts { n_heralds, ..Default::default() };
    for _ in 0..n_heralds {
        let photons = if rng.random::<f64>() < stats.multi_pair_prob { 2 } else { 1 };
        let (mut a, mut b) = (false, false);
        for _ in 0..photons {
            if rng.random::<bool>() {
                a = true;
            } else {
                b = true;
            }
        }
        counts.n_h1 += a as u64;
        counts.n_h2 += b as u64;
        counts.n_h12 += (a && b) as u64;
    }
    Ok(counts)
}

/// Cauchy-Schwarz violation factor `g_cross^2 / (g_s g_as)` with both
/// auto-correlations taken as thermal (2).
pub fn cauchy_schwarz_factor(g2_cross_peak: f64) -> f64 {
    g2_cross_peak * g2_cross_peak / 4.0
}

/// Nonclassicality figures for the source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub g2_cross_peak: f64,
    pub g2_conditional: f64,
    pub cs_factor: f64,
}

impl CorrelationReport {
    pub fn new(g2_cross_peak: f64, counts: &HeraldCounts) -> Result<Self> {
        if !(g2_cross_peak >= 0.0) {
            return Err(Error::Domain(format!("cross-correlation peak must be non-negative, got {g2_cross_peak}")));
        }
        Ok(Self { g2_cross_peak, g2_conditional: g2_conditional(counts)?, cs_factor: cauchy_schwarz_factor(g2_cross_peak) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Composite Simpson rule, used as an independent oracle for envelope masses.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn exponential_window_fraction_matches_quadrature() {
        let env = EnvelopeModel::exponential(231.7f64).unwrap();
        let oracle = simpson(|t| (-t / 231.7f64).exp() / 231.7, 0.0, 80.0, 2000);
        let state = env.realize(1.0, Some(80.0)).unwrap();
        let f = state.window_fraction(0.0, 80.0).unwrap();
        assert_abs_diff_eq!(f, oracle, epsilon = 1e-9);
        assert_abs_diff_eq!(f, 0.292, epsilon = 5e-4);
        assert_abs_diff_eq!(state.window_fraction(0.0, state.grid().t_end()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn realized_state_is_normalized() {
        for tau in [20.0, 115.4, 231.7, 800.0] {
            let s = EnvelopeModel::exponential(tau).unwrap().realize(1.0f64, None).unwrap();
            assert_abs_diff_eq!(s.total_norm(), 1.0, epsilon = 1e-9);
            assert!(s.grid().t_end() >= 400.0);
        }
    }

    #[test]
    fn anchor_lands_on_cell_boundary() {
        let env = EnvelopeModel::exponential(231.7f64).unwrap();
        let s = env.realize(1.0, Some(80.37)).unwrap();
        let t0 = s.grid().t_start();
        assert!(t0 <= 0.0);
        let k = (80.37 - t0) / 1.0;
        assert_abs_diff_eq!(k, k.round(), epsilon = 1e-9);
        assert_abs_diff_eq!(s.window_fraction(t0, 80.37).unwrap(), env.cdf(80.37), epsilon = 1e-12);
    }

    #[test]
    fn symmetric_rectangle_first_half() {
        let env: EnvelopeModel<f64> = EnvelopeModel::Table(TableEnvelope::new(&[(0.0, 1.0), (399.0, 1.0)]).unwrap());
        let rows: Vec<(f64, f64)> = (0..400).map(|t| (t as f64, 1.0)).collect();
        let rect = EnvelopeModel::Table(TableEnvelope::new(&rows).unwrap());
        let s = rect.realize(1.0, None).unwrap();
        assert_abs_diff_eq!(s.window_fraction(0.0, 200.0).unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(env.cdf(200.0), 0.5 * 200.0 / 399.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_table_always_samples_its_bin() {
        let rows: Vec<(f64, f64)> = (0..400).map(|t| (t as f64, if t == 137 { 5.0 } else { 0.0 })).collect();
        let env = EnvelopeModel::Table(TableEnvelope::new(&rows).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let t = sample_detection_time(&env, &mut rng);
            assert!((137.0..138.0).contains(&t), "{t}");
        }
    }

    #[test]
    fn exponential_sampling_early_fraction() {
        let env = EnvelopeModel::exponential(231.7f64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let early = (0..n).filter(|_| sample_detection_time(&env, &mut rng) < 80.0).count();
        let frac = early as f64 / n as f64;
        assert_abs_diff_eq!(frac, 1.0 - (-80.0f64 / 231.7).exp(), epsilon = 0.002);
    }

    #[test]
    fn uniform_table_mean() {
        let rows: Vec<(f64, f64)> = (0..400).map(|t| (t as f64, 1.0)).collect();
        let env = EnvelopeModel::Table(TableEnvelope::new(&rows).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let mean = (0..n).map(|_| sample_detection_time(&env, &mut rng)).sum::<f64>() / n as f64;
        assert_abs_diff_eq!(mean, 200.0, epsilon = 0.5);
    }

    #[test]
    fn invalid_tables_rejected() {
        assert!(TableEnvelope::<f64>::new(&[]).is_err());
        assert!(TableEnvelope::new(&[(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(TableEnvelope::new(&[(0.0, 1.0), (0.0, 1.0)]).is_err());
        assert!(TableEnvelope::new(&[(0.0, -1.0), (1.0, 2.0)]).is_err());
        assert!(EnvelopeModel::exponential(0.0f64).is_err());
    }

    #[test]
    fn table_parsing() {
        let text = "# measured\ntime_ns,relative_intensity\n0, 2\n1 2\n\n2,\t0\n";
        let EnvelopeModel::Table(t) = parse_envelope_table::<f64>(text).unwrap() else { panic!() };
        assert_abs_diff_eq!(t.cdf(2.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.cdf(1.0), 0.5, epsilon = 1e-12);
        assert!(parse_envelope_table::<f64>("0,1\nx,2\n").is_err());
        assert!(parse_envelope_table::<f64>("0\n").is_err());
    }

    /// Bisection on `1 - exp(-t/tau) = f`, independent of the closed form.
    fn bisect_decay(t: f64, f: f64) -> f64 {
        let (mut lo, mut hi) = (1e-6, 1e9);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            // Early fraction falls as tau grows.
            if 1.0 - (-t / mid).exp() > f {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn decay_constant_solutions() {
        let tau = solve_decay_constant(80.0f64, 0.2919).unwrap();
        assert_abs_diff_eq!(tau, bisect_decay(80.0, 0.2919), epsilon = 1e-6);
        assert_abs_diff_eq!(tau, 231.7, epsilon = 0.1);
        assert_abs_diff_eq!(solve_decay_constant(55.0f64, 1.0 - (-1.0f64).exp()).unwrap(), 55.0, epsilon = 1e-9);
        let tau = solve_decay_constant(80.0f64, 0.5).unwrap();
        assert_abs_diff_eq!(tau, bisect_decay(80.0, 0.5), epsilon = 1e-6);
        assert_abs_diff_eq!(tau, 115.4, epsilon = 0.05);
        assert!(matches!(solve_decay_constant(80.0f64, 0.0), Err(Error::Domain(_))));
        assert!(matches!(solve_decay_constant(80.0f64, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn switch_time_realizes_alpha() {
        let env = EnvelopeModel::exponential(231.7f64).unwrap();
        assert_eq!(env.switch_time_for_alpha(0.0).unwrap(), f64::INFINITY);
        assert!(env.switch_time_for_alpha(std::f64::consts::FRAC_PI_2).unwrap() < 1e-20);
        let a = 40f64.to_radians();
        let t = env.switch_time_for_alpha(a).unwrap();
        assert_abs_diff_eq!(env.cdf(t), a.cos().powi(2), epsilon = 1e-12);
    }

    /// Exact heralded g2 for click detectors, by enumerating the photon-number
    /// branches and the `2^k` analyzer routings.
    fn g2_by_enumeration(eps: f64) -> f64 {
        let (mut p1, mut p2, mut p12) = (0.0, 0.0, 0.0);
        for (k, pk) in [(1u32, 1.0 - eps), (2, eps)] {
            for routing in 0..(1u32 << k) {
                let w = pk / f64::from(1u32 << k);
                let a = routing != 0;
                let b = routing != (1 << k) - 1;
                p1 += if a { w } else { 0.0 };
                p2 += if b { w } else { 0.0 };
                p12 += if a && b { w } else { 0.0 };
            }
        }
        p12 / (p1 * p2)
    }

    #[test]
    fn g2_estimator_reference_values() {
        assert_abs_diff_eq!(
            g2_conditional(&HeraldCounts { n_heralds: 100, n_h1: 50, n_h2: 50, n_h12: 25 }).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert!(matches!(
            g2_conditional(&HeraldCounts { n_heralds: 100, n_h1: 0, n_h2: 50, n_h12: 0 }),
            Err(Error::UndefinedEstimate(_))
        ));
    }

    #[test]
    fn single_pair_source_has_zero_g2() {
        let stats = SourceStats { multi_pair_prob: 0.0, ..Default::default() };
        let c = simulate_heralded_hbt(&stats, 100_000, 5).unwrap();
        assert_eq!(g2_conditional(&c).unwrap(), 0.0);
    }

    #[test]
    fn simulated_g2_matches_enumeration() {
        let stats = SourceStats { multi_pair_prob: 0.115, ..Default::default() };
        let c = simulate_heralded_hbt(&stats, 1_000_000, 9).unwrap();
        let g2 = g2_conditional(&c).unwrap();
        let exact = g2_by_enumeration(0.115);
        assert_abs_diff_eq!(exact, 2.0 * 0.115 / (1.0f64 + 0.115 / 2.0).powi(2), epsilon = 1e-12);
        assert_abs_diff_eq!(g2, exact, epsilon = 0.02);
    }

    #[test]
    fn g2_falls_with_multi_pair_probability() {
        let g: Vec<f64> = [0.3, 0.1, 0.0]
            .iter()
            .map(|&e| {
                let s = SourceStats { multi_pair_prob: e, ..Default::default() };
                g2_conditional(&simulate_heralded_hbt(&s, 200_000, 1).unwrap()).unwrap()
            })
            .collect();
        assert!(g[0] > g[1] && g[1] > g[2] && g[2] == 0.0, "{g:?}");
    }

    #[test]
    fn cauchy_schwarz_values() {
        assert_abs_diff_eq!(cauchy_schwarz_factor(39.0), 380.25, epsilon = 1e-12);
        assert_abs_diff_eq!(cauchy_schwarz_factor(2.0), 1.0, epsilon = 1e-15);
        assert_eq!(cauchy_schwarz_factor(0.0), 0.0);
    }

    #[test]
    fn duty_cycle_from_defaults() {
        let s = SourceStats::default();
        assert_abs_diff_eq!(s.duty_cycle(), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean_pair_rate(), 4723.0, epsilon = 1e-9);
        assert!(SourceStats { multi_pair_prob: 1.0, ..s }.validate().is_err());
    }
}
