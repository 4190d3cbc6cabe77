//! Gaussian states through the port map, heterodyne statistics, Fisher
//! information and the Cramer-Rao bound.
//!
//! Quadratures follow `q = a + a^dagger`, `p = i (a^dagger - a)`, so the
//! vacuum covariance is the identity and a coherent amplitude `beta` has
//! quadrature means `(2 Re beta, 2 Im beta)`.

use nalgebra::Cholesky;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, RMatrix, RVector};
use crate::model::ModelParams;
use crate::scattering::QuadratureResponse;

const SYMMETRY_TOL: f64 = 1e-12;
const MIN_INFORMATION: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    /// `(Q_1..Q_n, P_1..P_n)`.
    pub mean: RVector,
    pub cov: RMatrix,
}

impl GaussianState {
    pub fn vacuum(n_ports: usize) -> Self {
        Self {
            mean: RVector::zeros(2 * n_ports),
            cov: RMatrix::identity(2 * n_ports, 2 * n_ports),
        }
    }

    /// Vacuum everywhere except a real coherent amplitude on one port.
    pub fn coherent_probe(n_ports: usize, port: usize, quadrature_amplitude: f64) -> Self {
        let mut s = Self::vacuum(n_ports);
        s.mean[port] = quadrature_amplitude;
        s
    }

    pub fn n_ports(&self) -> usize {
        self.mean.len() / 2
    }
}

/// Output state together with its derivative along the boundary coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDerivative {
    pub dmean: RVector,
    pub dcov: RMatrix,
}

fn check_dims(qr: &QuadratureResponse, input: &GaussianState) -> Result<()> {
    let d = qr.s_quad.ncols();
    if input.mean.len() != d || input.cov.nrows() != d || input.cov.ncols() != d {
        return Err(Error::Dimension {
            expected: d,
            found: input.mean.len(),
        });
    }
    Ok(())
}

/// `mu_out = S mu_in`, `V_out = S V_in S^T + L L^T` with vacuum reservoirs.
///
/// The real embedding makes this form valid at every frequency: it equals
/// the embedding of the Hermitian port moments `s V s^dagger + l l^dagger`.
pub fn propagate(qr: &QuadratureResponse, input: &GaussianState) -> Result<GaussianState> {
    check_dims(qr, input)?;
    let s = &qr.s_quad;
    let l = &qr.l_quad;
    let mean = s * &input.mean;
    let cov = s * &input.cov * s.transpose() + l * l.transpose();
    let out = GaussianState {
        mean,
        cov: symmetrize(cov),
    };
    check_heterodyne_covariance(&out.cov)?;
    Ok(out)
}

/// Exact first-order change of the propagated state.
pub fn propagate_derivative(qr: &QuadratureResponse, input: &GaussianState) -> Result<StateDerivative> {
    check_dims(qr, input)?;
    let (ds, dl) = match (&qr.ds_quad, &qr.dl_quad) {
        (Some(ds), Some(dl)) => (ds, dl),
        _ => {
            return Err(Error::InvalidParams(
                "quadrature response carries no derivatives".into(),
            ))
        }
    };
    let s = &qr.s_quad;
    let l = &qr.l_quad;
    let a = ds * &input.cov * s.transpose() + dl * l.transpose();
    Ok(StateDerivative {
        dmean: ds * &input.mean,
        dcov: &a + a.transpose(),
    })
}

fn symmetrize(m: RMatrix) -> RMatrix {
    (&m + m.transpose()) * 0.5
}

fn check_heterodyne_covariance(v: &RMatrix) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonPositiveCovariance("non-finite entries".into()));
    }
    let shifted = v + RMatrix::identity(v.nrows(), v.ncols());
    Cholesky::new(shifted)
        .map(|_| ())
        .ok_or_else(|| Error::NonPositiveCovariance("V_out + 1 has a non-positive eigenvalue".into()))
}

/// Outcome density of heterodyning every port.
#[derive(Debug, Clone, PartialEq)]
pub struct HeterodyneDistribution {
    pub mean: RVector,
    /// `V_out + 1`.
    pub cov: RMatrix,
}

impl HeterodyneDistribution {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn cholesky(&self) -> Result<Cholesky<f64, nalgebra::Dyn>> {
        Cholesky::new(self.cov.clone())
            .ok_or_else(|| Error::NonPositiveCovariance("heterodyne covariance".into()))
    }

    /// Log density at `x`.
    pub fn log_density(&self, x: &RVector) -> Result<f64> {
        let chol = self.cholesky()?;
        let r = x - &self.mean;
        let quad = r.dot(&chol.solve(&r));
        let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let d = self.dim() as f64;
        Ok(-0.5 * (quad + log_det + d * (2.0 * std::f64::consts::PI).ln()))
    }
}

pub fn heterodyne(out: &GaussianState) -> Result<HeterodyneDistribution> {
    let d = out.mean.len();
    let cov = &out.cov + RMatrix::identity(d, d);
    let dist = HeterodyneDistribution {
        mean: out.mean.clone(),
        cov,
    };
    if asymmetry(&dist.cov) > SYMMETRY_TOL {
        return Err(Error::NonPositiveCovariance("covariance is not symmetric".into()));
    }
    dist.cholesky()?;
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherResult {
    pub value: f64,
    pub mean_term: f64,
    pub cov_term: f64,
    pub params: Option<ModelParams>,
}

/// Fisher information of a Gaussian family at one parameter value:
/// `1/2 tr[(C^{-1} dC)^2] + dmu^T C^{-1} dmu`, both terms via Cholesky solves.
pub fn fisher_information(mu: &RVector, cov: &RMatrix, dmu: &RVector, dcov: &RMatrix) -> Result<FisherResult> {
    let d = mu.len();
    if cov.shape() != (d, d) || dcov.shape() != (d, d) || dmu.len() != d {
        return Err(Error::Dimension {
            expected: d,
            found: dmu.len(),
        });
    }
    let chol = Cholesky::new(cov.clone())
        .ok_or_else(|| Error::NonPositiveCovariance("Fisher covariance".into()))?;
    let x = chol.solve(dcov);
    let cov_term = 0.5 * (&x * &x).trace();
    let mean_term = dmu.dot(&chol.solve(dmu));
    // both terms are non-negative in exact arithmetic
    let cov_term = cov_term.max(0.0);
    let mean_term = mean_term.max(0.0);
    Ok(FisherResult {
        value: mean_term + cov_term,
        mean_term,
        cov_term,
        params: None,
    })
}

/// Smallest standard deviation of an unbiased estimator, `1 / sqrt(I)`.
pub fn cramer_rao(fisher: &FisherResult) -> Result<f64> {
    if fisher.value.is_nan() || fisher.value <= MIN_INFORMATION {
        return Err(Error::ZeroInformation(fisher.value));
    }
    Ok(1.0 / fisher.value.sqrt())
}

/// `n` seeded draws from the heterodyne density, one sample per row.
pub fn sample_heterodyne(dist: &HeterodyneDistribution, n: usize, seed: u64) -> Result<RMatrix> {
    let chol = dist.cholesky()?;
    let l = chol.l();
    let d = dist.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = RMatrix::zeros(n, d);
    let mut z = vec![0.0; d];
    for r in 0..n {
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(&mut rng);
        }
        for i in 0..d {
            let mut x = dist.mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                x += l[(i, j)] * zj;
            }
            out[(r, i)] = x;
        }
    }
    Ok(out)
}

/// Sample mean and mean scatter, enough to evaluate any Gaussian likelihood.
struct SampleMoments {
    n: usize,
    mean: RVector,
    scatter: RMatrix,
}

impl SampleMoments {
    fn new(samples: &RMatrix) -> Self {
        let n = samples.nrows();
        let mean = samples.row_mean().transpose();
        let mut scatter = RMatrix::zeros(samples.ncols(), samples.ncols());
        for row in samples.row_iter() {
            let r = row.transpose() - &mean;
            scatter.ger(1.0, &r, &r, 1.0);
        }
        Self {
            n,
            mean,
            scatter: scatter / n as f64,
        }
    }

    /// Mean log-likelihood per sample, without the `2 pi` constant.
    fn mean_log_likelihood(&self, dist: &HeterodyneDistribution) -> Result<f64> {
        let chol = dist.cholesky()?;
        let shift = &self.mean - &dist.mean;
        let log_det = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let spread = (chol.solve(&self.scatter)).trace() + shift.dot(&chol.solve(&shift));
        Ok(-0.5 * (log_det + spread))
    }
}

/// Maximum-likelihood estimate of the boundary coupling by golden-section
/// search over `bracket`, to a tolerance of `1e-3` of its width.
pub fn mle_gamma<F>(samples: &RMatrix, model: F, bracket: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> Result<HeterodyneDistribution>,
{
    let (lo, hi) = bracket;
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::Bracket { lo, hi });
    }
    let moments = SampleMoments::new(samples);
    if moments.n == 0 {
        return Err(Error::InvalidParams("no samples".into()));
    }
    let objective = |g: f64| -> Result<f64> { moments.mean_log_likelihood(&model(g)?) };
    let tol = 1e-3 * (hi - lo);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - ratio * (b - a);
    let mut x2 = a + ratio * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - ratio * (b - a);
            f1 = objective(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + ratio * (b - a);
            f2 = objective(x2)?;
        }
    }
    let best = 0.5 * (a + b);
    // an optimum pinned to an end means the likelihood kept rising
    if best - lo <= tol || hi - best <= tol {
        let f_best = objective(best)?;
        let (f_lo, f_hi) = (objective(lo)?, objective(hi)?);
        if f_lo >= f_best || f_hi >= f_best || best - lo <= tol || hi - best <= tol {
            return Err(Error::Bracket { lo, hi });
        }
    }
    Ok(best)
}

/// A one-parameter family of heterodyne densities with known information.
pub trait GammaFamily: Sync {
    fn distribution(&self, gamma: f64) -> Result<HeterodyneDistribution>;
    /// Per-sample Fisher information at `gamma`.
    fn fisher(&self, gamma: f64) -> Result<FisherResult>;
}

/// Gaussian location family: the mean is `gamma` along one axis.
#[derive(Debug, Clone)]
pub struct LocationFamily {
    pub direction: RVector,
    pub cov: RMatrix,
}

impl LocationFamily {
    /// Mean `(gamma, 0)` with covariance `2 * 1`, the heterodyne image of a
    /// displaced vacuum.
    pub fn heterodyne_vacuum() -> Self {
        Self {
            direction: RVector::from_vec(vec![1.0, 0.0]),
            cov: RMatrix::identity(2, 2) * 2.0,
        }
    }
}

impl GammaFamily for LocationFamily {
    fn distribution(&self, gamma: f64) -> Result<HeterodyneDistribution> {
        Ok(HeterodyneDistribution {
            mean: &self.direction * gamma,
            cov: self.cov.clone(),
        })
    }

    fn fisher(&self, gamma: f64) -> Result<FisherResult> {
        let d = self.direction.len();
        fisher_information(&(&self.direction * gamma), &self.cov, &self.direction, &RMatrix::zeros(d, d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CramerRaoCheck {
    pub n_samples: usize,
    pub batches: usize,
    pub mean_estimate: f64,
    pub mle_variance: f64,
    /// `1 / (n_samples * I)`, the bound on the variance of one batch estimate.
    pub inverse_fisher: f64,
    pub ratio: f64,
}

/// Repeats the maximum-likelihood estimate over independent batches and
/// compares the spread with the Cramer-Rao bound. Batch `b` uses seed
/// `seed + b`, so the result does not depend on scheduling.
pub fn validate_cramer_rao<M: GammaFamily>(
    family: &M,
    true_gamma: f64,
    n_samples: usize,
    batches: usize,
    seed: u64,
    bracket: (f64, f64),
) -> Result<CramerRaoCheck> {
    if batches < 2 || n_samples == 0 {
        return Err(Error::InvalidParams("need at least 2 batches and 1 sample".into()));
    }
    let truth = family.distribution(true_gamma)?;
    let estimates = (0..batches)
        .into_par_iter()
        .map(|b| {
            let samples = sample_heterodyne(&truth, n_samples, seed.wrapping_add(b as u64))?;
            mle_gamma(&samples, |g| family.distribution(g), bracket)
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = batches as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let variance = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let fisher = family.fisher(true_gamma)?;
    let inverse_fisher = 1.0 / (n_samples as f64 * fisher.value);
    Ok(CramerRaoCheck {
        n_samples,
        batches,
        mean_estimate: mean,
        mle_variance: variance,
        inverse_fisher,
        ratio: variance / inverse_fisher,
    })
}
