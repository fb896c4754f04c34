//! Seeded photon-counting engine.
//!
//! Each trial draws a detection time from the envelope, then decides between
//! vacuum (blocked arm or detector inefficiency), D0 and D1 from the
//! propagated amplitudes at that time. Trials are grouped into fixed-size
//! blocks; block `b` draws from ChaCha stream `b` keyed by the master seed, so
//! results do not depend on how blocks are scheduled across threads.

use std::io::{self, Write};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::{Arm, InterferometerConfig, PreparationParams, Propagator};
use crate::scalar::Real;
use crate::source::EnvelopeModel;
use crate::state::PathAmplitudes;

/// Trials per random stream.
pub const BLOCK_SIZE: u64 = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub n_trials: u64,
    pub master_seed: u64,
    /// Histogram bin width, ns.
    pub bin_width: T,
    pub params: PreparationParams<T>,
    pub interferometer: InterferometerConfig<T>,
    pub envelope: EnvelopeModel<T>,
    /// Click probability of each detector given a photon, applied as
    /// independent thinning.
    pub detector_efficiency: T,
    /// Thread count; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl<T: Real> RunConfig<T> {
    pub fn new(params: PreparationParams<T>, interferometer: InterferometerConfig<T>, envelope: EnvelopeModel<T>) -> Self {
        Self {
            n_trials: 100_000,
            master_seed: 1,
            bin_width: T::one(),
            params,
            interferometer,
            envelope,
            detector_efficiency: T::one(),
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::Configuration("n_trials must be at least 1".into()));
        }
        if !(self.bin_width > T::zero()) || !self.bin_width.is_finite() {
            return Err(Error::Configuration(format!("bin width must be positive, got {}", self.bin_width)));
        }
        if !(self.detector_efficiency > T::zero() && self.detector_efficiency <= T::one()) {
            return Err(Error::Configuration(format!(
                "detector efficiency must lie in (0, 1], got {}",
                self.detector_efficiency
            )));
        }
        if self.workers == Some(0) {
            return Err(Error::Configuration("worker count must be at least 1".into()));
        }
        self.interferometer.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Detector {
    D0,
    D1,
}

impl Detector {
    pub fn label(self) -> &'static str {
        match self {
            Detector::D0 => "D0",
            Detector::D1 => "D1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRecord<T> {
    pub trial_id: u64,
    pub detector: Detector,
    pub time: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Outcome<T> {
    Click(Detector, T),
    Vacuum(T),
}

/// Click and vacuum totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClickCounts {
    pub n_d0: u64,
    pub n_d1: u64,
    pub n_vacuum: u64,
}

impl ClickCounts {
    pub fn clicks(&self) -> u64 {
        self.n_d0 + self.n_d1
    }

    pub fn total(&self) -> u64 {
        self.clicks() + self.n_vacuum
    }

    /// D0 share of all clicks.
    pub fn d0_fraction(&self) -> Option<f64> {
        (self.clicks() > 0).then(|| self.n_d0 as f64 / self.clicks() as f64)
    }

    fn add(&mut self, o: &ClickCounts) {
        self.n_d0 += o.n_d0;
        self.n_d1 += o.n_d1;
        self.n_vacuum += o.n_vacuum;
    }

    fn record<T>(&mut self, outcome: &Outcome<T>) {
        match outcome {
            Outcome::Click(Detector::D0, _) => self.n_d0 += 1,
            Outcome::Click(Detector::D1, _) => self.n_d1 += 1,
            Outcome::Vacuum(_) => self.n_vacuum += 1,
        }
    }
}

/// Counts split at a time boundary: `early` holds trials with `t < split`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WindowCounts {
    pub early: ClickCounts,
    pub late: ClickCounts,
}

impl WindowCounts {
    pub fn full(&self) -> ClickCounts {
        let mut c = self.early;
        c.add(&self.late);
        c
    }
}

/// Mixes a master seed with an index into an independent 64-bit seed
/// (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct TrialKernel<'a, T> {
    propagator: Propagator<T>,
    envelope: &'a EnvelopeModel<T>,
    efficiency: T,
}

impl<T: Real> TrialKernel<'_, T> {
    fn trial(&self, rng: &mut ChaCha8Rng) -> Outcome<T> {
        // Fixed three draws per trial keeps stream positions independent of outcomes.
        let u_time = T::lit(rng.random::<f64>());
        let u_click = T::lit(rng.random::<f64>());
        let u_port = T::lit(rng.random::<f64>());
        let t = self.envelope.quantile(u_time);
        let out = self.propagator.output(t, PathAmplitudes::real(T::one(), T::zero()));
        let norm = out.norm_sqr();
        if norm <= T::zero() || u_click >= norm * self.efficiency {
            return Outcome::Vacuum(t);
        }
        let p0 = out.a0.norm_sqr() / norm;
        Outcome::Click(if u_port < p0 { Detector::D0 } else { Detector::D1 }, t)
    }
}

/// Runs every block through `f` and returns the per-block results in block order.
fn run_blocks<T, R, F>(config: &RunConfig<T>, f: F) -> Result<Vec<R>>
where
    T: Real,
    R: Send,
    F: Fn(u64, &mut dyn Iterator<Item = (u64, Outcome<T>)>) -> R + Sync,
{
    config.validate()?;
    let kernel = TrialKernel {
        propagator: Propagator::new(&config.params, &config.interferometer)?,
        envelope: &config.envelope,
        efficiency: config.detector_efficiency,
    };
    let n = config.n_trials;
    let n_blocks = n.div_ceil(BLOCK_SIZE);
    let seed = config.master_seed;
    let job = || {
        (0..n_blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(b);
                let first = b * BLOCK_SIZE;
                let last = (first + BLOCK_SIZE).min(n);
                let mut trials = (first..last).map(|id| (id, kernel.trial(&mut rng)));
                f(b, &mut trials)
            })
            .collect::<Vec<R>>()
    };
    match config.workers {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Configuration(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// All click records in trial order. Vacuum trials produce no record.
pub fn run_trials<T: Real>(config: &RunConfig<T>) -> Result<Vec<DetectionRecord<T>>> {
    let blocks = run_blocks(config, |_, trials| {
        trials
            .filter_map(|(trial_id, o)| match o {
                Outcome::Click(detector, time) => Some(DetectionRecord { trial_id, detector, time }),
                Outcome::Vacuum(_) => None,
            })
            .collect::<Vec<_>>()
    })?;
    Ok(blocks.into_iter().flatten().collect())
}

/// Per-detector click totals and vacuum count, without storing records.
pub fn click_counts<T: Real>(config: &RunConfig<T>) -> Result<ClickCounts> {
    Ok(windowed_counts(config, T::infinity())?.early)
}

/// Click totals split into trials detected before and after `split`.
pub fn windowed_counts<T: Real>(config: &RunConfig<T>, split: T) -> Result<WindowCounts> {
    let blocks = run_blocks(config, |_, trials| {
        let mut w = WindowCounts::default();
        for (_, o) in trials {
            let t = match o {
                Outcome::Click(_, t) | Outcome::Vacuum(t) => t,
            };
            if t < split {
                w.early.record(&o);
            } else {
                w.late.record(&o);
            }
        }
        w
    })?;
    Ok(blocks.iter().fold(WindowCounts::default(), |mut acc, w| {
        acc.early.add(&w.early);
        acc.late.add(&w.late);
        acc
    }))
}

/// Repeats `config` with `arm` blocked. A trial whose photon took the blocked
/// arm is vacuum; `n_d0 + n_d1 + n_vacuum == n_trials`.
pub fn blocked_arm_counts<T: Real>(config: &RunConfig<T>, arm: Arm) -> Result<ClickCounts> {
    let mut blocked = config.clone();
    blocked.interferometer.blocked_arm = Some(arm);
    click_counts(&blocked)
}

/// Per-detector counts in uniform time bins starting at `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    pub origin: T,
    pub bin_width: T,
    pub counts_d0: Vec<u64>,
    pub counts_d1: Vec<u64>,
}

impl<T: Real> Histogram<T> {
    pub fn new(origin: T, bin_width: T, n_bins: usize) -> Result<Self> {
        if !(bin_width > T::zero()) || !bin_width.is_finite() {
            return Err(Error::Configuration(format!("bin width must be positive, got {bin_width}")));
        }
        Ok(Self { origin, bin_width, counts_d0: vec![0; n_bins], counts_d1: vec![0; n_bins] })
    }

    pub fn len(&self) -> usize {
        self.counts_d0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts_d0.is_empty()
    }

    pub fn bin_start(&self, i: usize) -> T {
        self.origin + self.bin_width * T::from_usize(i).unwrap()
    }

    pub fn bin_index(&self, t: T) -> Option<usize> {
        let k = ((t - self.origin) / self.bin_width).floor();
        if k < T::zero() {
            return None;
        }
        k.to_usize().filter(|&i| i < self.len())
    }

    /// Adds records; returns how many fell outside the bins.
    pub fn accumulate(&mut self, records: &[DetectionRecord<T>]) -> usize {
        let mut missed = 0;
        for r in records {
            match self.bin_index(r.time) {
                Some(i) => match r.detector {
                    Detector::D0 => self.counts_d0[i] += 1,
                    Detector::D1 => self.counts_d1[i] += 1,
                },
                None => missed += 1,
            }
        }
        missed
    }

    pub fn total(&self) -> u64 {
        self.counts_d0.iter().chain(&self.counts_d1).sum()
    }

    /// Writes `bin_start_ns,d0,d1` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "bin_start_ns,d0,d1")?;
        for i in 0..self.len() {
            writeln!(w, "{},{},{}", self.bin_start(i), self.counts_d0[i], self.counts_d1[i])?;
        }
        Ok(())
    }
}

/// Bins `records` from the later of `0` or the earliest bin edge below the
/// first record, up to the last record.
pub fn histogram<T: Real>(records: &[DetectionRecord<T>], bin_width: T) -> Result<Histogram<T>> {
    if !(bin_width > T::zero()) || !bin_width.is_finite() {
        return Err(Error::Configuration(format!("bin width must be positive, got {bin_width}")));
    }
    if records.is_empty() {
        return Histogram::new(T::zero(), bin_width, 0);
    }
    let (lo, hi) = records
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), r| (lo.min(r.time), hi.max(r.time)));
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Range("record times must be finite".into()));
    }
    let origin = ((lo / bin_width).floor() * bin_width).min(T::zero());
    let n = ((hi - origin) / bin_width).floor().to_usize().unwrap_or(0) + 1;
    let mut h = Histogram::new(origin, bin_width, n)?;
    let missed = h.accumulate(records);
    debug_assert_eq!(missed, 0);
    Ok(h)
}

/// Writes `trial_id,detector,time_ns` rows.
pub fn write_records_csv<T: Real, W: Write>(records: &[DetectionRecord<T>], mut w: W) -> io::Result<()> {
    writeln!(w, "trial_id,detector,time_ns")?;
    for r in records {
        writeln!(w, "{},{},{}", r.trial_id, r.detector.label(), r.time)?;
    }
    Ok(())
}
