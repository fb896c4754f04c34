//! Figures of merit from counts: fringe visibility, path distinguishability,
//! the duality bound `V^2 + D^2 <= 1`, and the mixing angle from time-bin counts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A value with its one-sigma standard error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate<T> {
    pub value: T,
    pub std_err: T,
}

impl<T: Real> Estimate<T> {
    pub fn new(value: T, std_err: T) -> Self {
        Self { value, std_err }
    }

    pub fn exact(value: T) -> Self {
        Self::new(value, T::zero())
    }
}

/// One point of a fringe scan: arm phase, D0 probability and the number of
/// clicks it was estimated from (`0` for noiseless data).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FringePoint<T> {
    pub phi: T,
    pub p_d0: T,
    pub n: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan<T> {
    points: Vec<FringePoint<T>>,
}

impl<T: Real> FringeScan<T> {
    /// Requires at least four distinct phases spanning at least `pi`.
    pub fn new(points: Vec<FringePoint<T>>) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::Fit(format!("fringe scan needs at least 4 points, got {}", points.len())));
        }
        if points.iter().any(|p| !p.phi.is_finite() || !p.p_d0.is_finite()) {
            return Err(Error::Fit("fringe scan contains non-finite values".into()));
        }
        let mut phis: Vec<T> = points.iter().map(|p| p.phi).collect();
        phis.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if phis.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Fit("fringe scan phases must be distinct".into()));
        }
        if phis[phis.len() - 1] - phis[0] < T::PI() - T::lit(1e-9) {
            return Err(Error::Fit("fringe scan must span at least pi of phase".into()));
        }
        Ok(Self { points })
    }

    /// Noiseless scan of `p(phi)`.
    pub fn from_fn(phis: &[T], p: impl Fn(T) -> T) -> Result<Self> {
        Self::new(phis.iter().map(|&phi| FringePoint { phi, p_d0: p(phi), n: 0 }).collect())
    }

    pub fn points(&self) -> &[FringePoint<T>] {
        &self.points
    }
}

fn inverse_3x3<T: Real>(m: &[[T; 3]; 3]) -> Option<[[T; 3]; 3]> {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
    // Scale-free singularity test: det relative to the product of diagonal entries.
    let scale = (m[0][0] * m[1][1] * m[2][2]).abs();
    if !(det.abs() > scale * T::lit(1e-10)) {
        return None;
    }
    let mut inv = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = adj[i][j] / det;
        }
    }
    Some(inv)
}

/// Fits `p(phi) = c + A cos(phi) + B sin(phi)` by least squares and returns
/// `V = sqrt(A^2 + B^2) / c`.
///
/// The standard error propagates binomial point variances `p(1-p)/n` through
/// the least-squares solution; noiseless points (`n = 0`) contribute none.
pub fn visibility_from_fringe<T: Real>(scan: &FringeScan<T>) -> Result<Estimate<T>> {
    let rows: Vec<[T; 3]> = scan.points.iter().map(|p| [T::one(), p.phi.cos(), p.phi.sin()]).collect();
    let mut xtx = [[T::zero(); 3]; 3];
    let mut xty = [T::zero(); 3];
    let mut meat = [[T::zero(); 3]; 3];
    for (x, p) in rows.iter().zip(&scan.points) {
        let var = if p.n > 0 {
            let q = p.p_d0.max(T::zero()).min(T::one());
            q * (T::one() - q) / T::from_count(p.n)
        } else {
            T::zero()
        };
        for i in 0..3 {
            xty[i] = xty[i] + x[i] * p.p_d0;
            for j in 0..3 {
                xtx[i][j] = xtx[i][j] + x[i] * x[j];
                meat[i][j] = meat[i][j] + x[i] * x[j] * var;
            }
        }
    }
    let inv = inverse_3x3(&xtx).ok_or_else(|| Error::Fit("fringe fit is rank-deficient".into()))?;
    let beta: Vec<T> = (0..3).map(|i| (0..3).map(|j| inv[i][j] * xty[j]).sum()).collect();
    // cov = inv * meat * inv
    let mut cov = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            cov[i][j] = (0..3)
                .flat_map(|k| (0..3).map(move |l| (k, l)))
                .map(|(k, l)| inv[i][k] * meat[k][l] * inv[l][j])
                .sum();
        }
    }
    let (c, a, b) = (beta[0], beta[1], beta[2]);
    if !(c > T::zero()) {
        return Err(Error::Fit(format!("fitted fringe offset must be positive, got {c}")));
    }
    let amp = (a * a + b * b).sqrt();
    let v = amp / c;
    let var_v = if amp > T::zero() {
        let g = [-amp / (c * c), a / (amp * c), b / (amp * c)];
        (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| g[i] * cov[i][j] * g[j]).sum::<T>()
    } else {
        (cov[1][1] + cov[2][2]) / (c * c)
    };
    Ok(Estimate::new(v, var_v.max(T::zero()).sqrt()))
}

/// `|n1 - n2| / (n1 + n2)` with a binomial standard error.
pub fn distinguishability<T: Real>(n1: u64, n2: u64) -> Result<Estimate<T>> {
    let n = n1 + n2;
    if n == 0 {
        return Err(Error::UndefinedEstimate("distinguishability needs at least one count".into()));
    }
    let nt = T::from_count(n);
    let p = T::from_count(n1) / nt;
    let d = (T::from_count(n1.abs_diff(n2))) / nt;
    let err = T::lit(2.0) * (p * (T::one() - p) / nt).sqrt();
    Ok(Estimate::new(d, err))
}

/// Outcome of the `V^2 + D^2 <= 1` check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EgCheck<T> {
    pub sum: T,
    pub std_err: T,
    pub satisfied: bool,
}

/// Evaluates `V^2 + D^2` and flags it as satisfying the bound when it does not
/// exceed 1 by more than twice its propagated standard error.
pub fn eg_check<T: Real>(v: Estimate<T>, d: Estimate<T>) -> EgCheck<T> {
    let two = T::lit(2.0);
    let sum = v.value * v.value + d.value * d.value;
    let dv = two * v.value * v.std_err;
    let dd = two * d.value * d.std_err;
    let std_err = (dv * dv + dd * dd).sqrt();
    // Floor absorbs rounding of analytically exact inputs such as cos^4 + sin^4.
    let tol = (two * std_err).max(T::lit(1e-12));
    EgCheck { sum, std_err, satisfied: sum <= T::one() + tol }
}

/// Mixing angle `alpha = arccos(sqrt(early / (early + late)))`, radians.
/// The binomial standard error reduces to `1 / (2 sqrt(N))`.
pub fn estimate_alpha<T: Real>(early_counts: u64, late_counts: u64) -> Result<Estimate<T>> {
    let n = early_counts + late_counts;
    if n == 0 {
        return Err(Error::UndefinedEstimate("alpha needs at least one count".into()));
    }
    let nt = T::from_count(n);
    let f = T::from_count(early_counts) / nt;
    Ok(Estimate::new(f.sqrt().min(T::one()).acos(), T::one() / (T::lit(2.0) * nt.sqrt())))
}

/// Visibility, distinguishability and their combination for one setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisResult<T> {
    pub visibility: Estimate<T>,
    pub distinguishability: Estimate<T>,
    pub eg: EgCheck<T>,
    pub alpha_estimate: Estimate<T>,
}

impl<T: Real> AnalysisResult<T> {
    pub fn new(visibility: Estimate<T>, distinguishability: Estimate<T>, alpha_estimate: Estimate<T>) -> Self {
        Self { visibility, distinguishability, eg: eg_check(visibility, distinguishability), alpha_estimate }
    }

    pub fn summary(&self) -> AnalysisSummary {
        AnalysisSummary {
            alpha_deg: self.alpha_estimate.value.as_f64().to_degrees(),
            v: self.visibility.value.as_f64(),
            v_err: self.visibility.std_err.as_f64(),
            d: self.distinguishability.value.as_f64(),
            d_err: self.distinguishability.std_err.as_f64(),
            eg_sum: self.eg.sum.as_f64(),
            satisfied: self.eg.satisfied,
        }
    }
}

/// JSON export shape of an [`AnalysisResult`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSummary {
    pub alpha_deg: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "V_err")]
    pub v_err: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "D_err")]
    pub d_err: f64,
    pub eg_sum: f64,
    pub satisfied: bool,
}
