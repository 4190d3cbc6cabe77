//! Reference computations that share no code path with the library beyond
//! building the lattice Hamiltonian.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quantos::metrology::{propagate, GaussianState};
use quantos::model::{default_channel_layout, real_space_hamiltonian, ModelParams};
use quantos::scattering::{mode_green_function, port_response, quadrature_response};

pub type Mat = DMatrix<f64>;

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

pub fn rel_diff(a: &Mat, b: &Mat) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1e-300)
}

/// Quadrature-space scattering built directly from the `2N x 2N` real
/// equations of motion at zero frequency.
///
/// Returns `(S, L)` where `S` is `2np x 2np` over observed rows/columns and
/// `L` is `2np x 4N` with columns `(Q'[w], Q'[-w], P'[w], P'[-w])` per site.
pub fn literal_quadrature_scattering(params: &ModelParams) -> (Mat, Mat) {
    let h = real_space_hamiltonian(params).unwrap().matrix;
    let layout = default_channel_layout(params).unwrap();
    let n = h.nrows();

    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            m[(i, j)] = z.im;
            m[(i, n + j)] = z.re;
            m[(n + i, j)] = -z.re;
            m[(n + i, n + j)] = z.im;
        }
    }
    let g = -m.try_inverse().expect("invertible");

    let mut k_o = Mat::zeros(2 * n, 2 * n);
    let mut k_u = Mat::zeros(2 * n, 4 * n);
    for j in 0..n {
        let ko = (2.0 * layout.kappa[j]).sqrt();
        k_o[(j, j)] = ko;
        k_o[(n + j, n + j)] = ko;
        let kl = (2.0 * layout.eta_loss[j]).sqrt();
        k_u[(j, j)] = kl;
        k_u[(n + j, 2 * n + j)] = kl;
        let kg = (2.0 * layout.eta_gain[j]).sqrt();
        k_u[(j, n + j)] = -kg;
        k_u[(n + j, 3 * n + j)] = kg;
    }
    let s_full = Mat::identity(2 * n, 2 * n) - k_o.transpose() * &g * &k_o;
    let l_full = -(k_o.transpose() * &g * &k_u);

    let rows: Vec<usize> = layout
        .observed_ports
        .iter()
        .copied()
        .chain(layout.observed_ports.iter().map(|&j| n + j))
        .collect();
    let s = Mat::from_fn(rows.len(), rows.len(), |a, b| s_full[(rows[a], rows[b])]);
    let l = Mat::from_fn(rows.len(), 4 * n, |a, c| l_full[(rows[a], c)]);
    (s, l)
}

/// Library quadrature response at zero frequency with the noise columns
/// scattered into the `4N` layout of [`literal_quadrature_scattering`].
pub fn library_quadrature_scattering(params: &ModelParams) -> (Mat, Mat) {
    let h = real_space_hamiltonian(params).unwrap();
    let layout = default_channel_layout(params).unwrap();
    let n = h.n_modes();
    let g = mode_green_function(&h.matrix, 0.0).unwrap();
    let qr = quadrature_response(&port_response(&g, &layout).unwrap());
    let loss = layout.loss_sites();
    let gain = layout.gain_sites();
    let (nl, ng) = (loss.len(), gain.len());
    let target: Vec<usize> = loss
        .iter()
        .copied()
        .chain(gain.iter().map(|&j| n + j))
        .chain(loss.iter().map(|&j| 2 * n + j))
        .chain(gain.iter().map(|&j| 3 * n + j))
        .collect();
    assert_eq!(qr.l_quad.ncols(), 2 * (nl + ng));
    let mut l = Mat::zeros(qr.l_quad.nrows(), 4 * n);
    for (c, &t) in target.iter().enumerate() {
        l.set_column(t, &qr.l_quad.column(c));
    }
    (qr.s_quad, l)
}

/// Output mean and covariance of the full pipeline at a given coupling.
pub fn output_moments(params: &ModelParams) -> (DVector<f64>, Mat) {
    let h = real_space_hamiltonian(params).unwrap();
    let layout = default_channel_layout(params).unwrap();
    let g = mode_green_function(&h.matrix, params.omega).unwrap();
    let qr = quadrature_response(&port_response(&g, &layout).unwrap());
    let probe = GaussianState::coherent_probe(qr.n_ports(), params.probe_port, params.probe_amplitude);
    let out = propagate(&qr, &probe).unwrap();
    (out.mean, out.cov)
}

/// Central differences of the output moments in the boundary coupling.
pub fn finite_difference_moments(params: &ModelParams, step: f64) -> (DVector<f64>, Mat) {
    let (mp, cp) = output_moments(&params.with_big_gamma(params.big_gamma + step));
    let (mm, cm) = output_moments(&params.with_big_gamma(params.big_gamma - step));
    ((mp - mm) / (2.0 * step), (cp - cm) / (2.0 * step))
}

/// A smooth Gaussian family in one or two dimensions:
/// `mu(t) = a + b t + c t^2`, `Sigma(t) = A(t) A(t)^T + eps 1` with
/// `A(t) = A0 + t A1`.
#[derive(Debug, Clone)]
pub struct GaussianFamily {
    pub dim: usize,
    pub a: DVector<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub a0: Mat,
    pub a1: Mat,
    pub eps: f64,
    pub theta: f64,
}

impl GaussianFamily {
    pub fn random(rng: &mut ChaCha8Rng, dim: usize) -> Self {
        let vec = |r: &mut ChaCha8Rng, s: f64| DVector::from_fn(dim, |_, _| r.random_range(-s..s));
        let a = vec(rng, 2.0);
        let b = vec(rng, 1.5);
        let c = vec(rng, 0.5);
        let a0 = Mat::from_fn(dim, dim, |i, j| if i == j { rng.random_range(0.6..1.6) } else { rng.random_range(-0.4..0.4) });
        let a1 = Mat::from_fn(dim, dim, |_, _| rng.random_range(-0.3..0.3));
        Self {
            dim,
            a,
            b,
            c,
            a0,
            a1,
            eps: rng.random_range(0.05..0.3),
            theta: rng.random_range(-0.5..0.5),
        }
    }

    pub fn mean(&self, t: f64) -> DVector<f64> {
        &self.a + &self.b * t + &self.c * (t * t)
    }

    pub fn cov(&self, t: f64) -> Mat {
        let at = &self.a0 + &self.a1 * t;
        &at * at.transpose() + Mat::identity(self.dim, self.dim) * self.eps
    }

    pub fn dmean(&self, t: f64) -> DVector<f64> {
        &self.b + &self.c * (2.0 * t)
    }

    pub fn dcov(&self, t: f64) -> Mat {
        let at = &self.a0 + &self.a1 * t;
        &self.a1 * at.transpose() + &at * self.a1.transpose()
    }

    /// Log density written out with explicit determinant and inverse.
    pub fn log_density(&self, t: f64, x: &[f64]) -> f64 {
        let mu = self.mean(t);
        let s = self.cov(t);
        match self.dim {
            1 => {
                let r = x[0] - mu[0];
                -0.5 * (2.0 * std::f64::consts::PI * s[(0, 0)]).ln() - 0.5 * r * r / s[(0, 0)]
            }
            2 => {
                let (p, q, u) = (s[(0, 0)], s[(0, 1)], s[(1, 1)]);
                let det = p * u - q * q;
                let (r0, r1) = (x[0] - mu[0], x[1] - mu[1]);
                let quad = (u * r0 * r0 - 2.0 * q * r0 * r1 + p * r1 * r1) / det;
                -(2.0 * std::f64::consts::PI).ln() - 0.5 * det.ln() - 0.5 * quad
            }
            _ => unreachable!(),
        }
    }

    /// `E[(d/dt ln p)^2]` by trapezoidal quadrature over a box of half-width
    /// six standard deviations, with the score from central differences.
    pub fn quadrature_fisher(&self, points: usize) -> f64 {
        let t = self.theta;
        let mu = self.mean(t);
        let sigma = self
            .cov(t)
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0f64, |a, v| a.max(*v))
            .sqrt();
        let half = 6.0 * sigma;
        let h = 1e-4;
        let axis = |c: f64| -> Vec<(f64, f64)> {
            let dx = 2.0 * half / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    let w = if i == 0 || i == points - 1 { 0.5 * dx } else { dx };
                    (c - half + dx * i as f64, w)
                })
                .collect()
        };
        let term = |x: &[f64]| {
            let lp = self.log_density(t, x);
            let score = (self.log_density(t + h, x) - self.log_density(t - h, x)) / (2.0 * h);
            lp.exp() * score * score
        };
        match self.dim {
            1 => axis(mu[0]).iter().map(|&(x, w)| w * term(&[x])).sum(),
            2 => {
                let ax = axis(mu[0]);
                let ay = axis(mu[1]);
                ax.iter()
                    .map(|&(x, wx)| ay.iter().map(|&(y, wy)| wx * wy * term(&[x, y])).sum::<f64>())
                    .sum()
            }
            _ => unreachable!(),
        }
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|s|` of a single mode at energy `e` coupled only to an observed channel.
pub fn single_mode_reflection(e: f64, kappa: f64, omega: f64) -> Complex64 {
    use quantos::model::ChannelLayout;
    let h = DMatrix::from_element(1, 1, Complex64::new(e, -kappa));
    let layout = ChannelLayout::new(vec![kappa], vec![0.0], vec![0.0], vec![0]).unwrap();
    let g = mode_green_function(&h, omega).unwrap();
    port_response(&g, &layout).unwrap().s[(0, 0)]
}
