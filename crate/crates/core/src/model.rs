//! The dissipative coupled-mode lattice: Bloch and real-space Hamiltonians,
//! the channel layout that realizes the gain/loss pattern, the spectral
//! winding number and a stability diagnostic.
//!
//! Mode indices are zero-based throughout: site `j` of an `N`-mode chain is
//! an `A` site (loss, `-i gamma`) when `j` is even and a `B` site (gain,
//! `+i gamma`) when `j` is odd. Unit cell `c` holds sites `2c` and `2c + 1`.
//! Because `N` is odd the chain ends on a lone `A` site.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix};

/// Default number of k points for the winding number.
pub const DEFAULT_K_POINTS: usize = 1024;
const MAX_K_POINTS: usize = 1 << 22;
const GAPLESS_TOL: f64 = 1e-12;
const WINDING_INTEGER_TOL: f64 = 1e-6;
const PHASE_BOUNDARY_TOL: f64 = 1e-12;
const STABILITY_MARGIN: f64 = 1e-10;

/// One evaluation point of the sensor model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Intra-cell hopping.
    pub t1: f64,
    /// Inter-cell hopping.
    pub t2: f64,
    /// Gain/loss rate.
    pub gamma: f64,
    /// Boundary coupling between the first and last mode.
    pub big_gamma: f64,
    /// Number of modes; odd and at least 3.
    pub n_modes: usize,
    /// Probe detuning from the free mode frequency.
    pub omega: f64,
    /// Coherent probe quadrature amplitude (mode amplitude is half of it).
    pub probe_amplitude: f64,
    /// Index into the observed ports where the probe is injected.
    pub probe_port: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            t1: 1.0,
            t2: 0.5,
            gamma: 0.7,
            big_gamma: 1e-11,
            n_modes: 21,
            omega: 0.0,
            probe_amplitude: 2.0,
            probe_port: 0,
        }
    }
}

impl ModelParams {
    pub fn new(t1: f64, t2: f64, gamma: f64, big_gamma: f64, n_modes: usize) -> Result<Self> {
        let p = Self {
            t1,
            t2,
            gamma,
            big_gamma,
            n_modes,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t1, self.t2, self.gamma, self.big_gamma, self.omega, self.probe_amplitude];
        if finite.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.n_modes < 3 || self.n_modes.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!(
                "n_modes must be odd and >= 3, got {}",
                self.n_modes
            )));
        }
        if self.gamma < 0.0 || self.big_gamma < 0.0 || self.probe_amplitude < 0.0 {
            return Err(Error::InvalidParams(
                "gamma, big_gamma and probe_amplitude must be non-negative".into(),
            ));
        }
        if self.probe_port >= 2 {
            return Err(Error::InvalidParams(format!(
                "probe_port {} out of range for 2 observed ports",
                self.probe_port
            )));
        }
        Ok(())
    }

    pub fn with_n_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self
    }

    pub fn with_big_gamma(mut self, big_gamma: f64) -> Self {
        self.big_gamma = big_gamma;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_t1(mut self, t1: f64) -> Self {
        self.t1 = t1;
        self
    }

    pub fn bloch(&self) -> BlochParams {
        BlochParams {
            t1: self.t1,
            t2: self.t2,
            gamma: self.gamma,
        }
    }
}

/// The three couplings that define the bulk band structure.
///
/// Unlike [`ModelParams`] no sign constraints apply, so the symmetries of the
/// invariant under `t1 -> -t1` and `t2 -> -t2` can be explored directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochParams {
    pub t1: f64,
    pub t2: f64,
    pub gamma: f64,
}

impl BlochParams {
    pub fn new(t1: f64, t2: f64, gamma: f64) -> Self {
        Self { t1, t2, gamma }
    }
}

impl From<&ModelParams> for BlochParams {
    fn from(p: &ModelParams) -> Self {
        p.bloch()
    }
}

/// A point of the topological phase diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub t1: f64,
    pub t2: f64,
    pub gamma: f64,
    pub nu: i32,
}

/// `H(k) = (t1 + t2 cos k) sigma_x + (t2 sin k - i gamma) sigma_z`.
pub fn bloch_hamiltonian(p: BlochParams, k: f64) -> Matrix2<Complex64> {
    let dx = Complex64::new(p.t1 + p.t2 * k.cos(), 0.0);
    let dz = Complex64::new(p.t2 * k.sin(), -p.gamma);
    Matrix2::new(dz, dx, dx, -dz)
}

fn bloch_determinant(p: BlochParams, k: f64) -> Complex64 {
    bloch_hamiltonian(p, k).determinant()
}

/// Spectral winding number of `det H(k)` around the origin.
///
/// The phase of the determinant is accumulated step by step over a uniform
/// grid. A step larger than `pi / 2` means the grid is too coarse for the
/// unwrapping to be trusted, in which case the grid is doubled.
pub fn winding_number(p: BlochParams, n_k: usize) -> Result<i32> {
    let mut n = n_k.max(4);
    loop {
        match accumulate_phase(p, n)? {
            Some(w) => {
                let rounded = w.round();
                if (w - rounded).abs() <= WINDING_INTEGER_TOL {
                    return Ok(rounded as i32);
                }
                if n >= MAX_K_POINTS {
                    return Err(Error::NonIntegerWinding { n_k: n, winding: w });
                }
            }
            None if n >= MAX_K_POINTS => {
                return Err(Error::NonIntegerWinding {
                    n_k: n,
                    winding: f64::NAN,
                })
            }
            None => {}
        }
        n *= 2;
    }
}

/// Total phase / 2 pi, or `None` when some step is under-resolved.
fn accumulate_phase(p: BlochParams, n: usize) -> Result<Option<f64>> {
    let dk = 2.0 * PI / n as f64;
    let first = bloch_determinant(p, 0.0);
    let check = |k: f64, d: Complex64| -> Result<()> {
        if d.norm() < GAPLESS_TOL {
            Err(Error::Gapless { k, modulus: d.norm() })
        } else {
            Ok(())
        }
    };
    check(0.0, first)?;
    let mut prev = first;
    let mut total = 0.0;
    for j in 1..=n {
        let k = j as f64 * dk;
        // close the loop on the exact starting value
        let d = if j == n { first } else { bloch_determinant(p, k) };
        check(k, d)?;
        let step = (d / prev).arg();
        if step.abs() > PI / 2.0 {
            return Ok(None);
        }
        total += step;
        prev = d;
    }
    Ok(Some(total / (2.0 * PI)))
}

/// Closed-form invariant: nonzero iff `||t1| - |t2|| < |gamma| < |t1| + |t2|`.
///
/// In the nontrivial region `det H(k)` traces an ellipse around the origin
/// whose orientation is `-sign(t1 gamma)`, which fixes the sign.
pub fn analytic_phase(p: BlochParams) -> Result<i32> {
    let g = p.gamma.abs();
    let lower = (p.t1.abs() - p.t2.abs()).abs();
    let upper = p.t1.abs() + p.t2.abs();
    if (g - lower).abs() <= PHASE_BOUNDARY_TOL || (g - upper).abs() <= PHASE_BOUNDARY_TOL {
        return Err(Error::PhaseBoundary { gamma: p.gamma });
    }
    if lower < g && g < upper {
        Ok(-((p.t1 * p.gamma).signum() as i32))
    } else {
        Ok(0)
    }
}

/// Dense real-space Hamiltonian of the open chain with boundary coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSpaceHamiltonian {
    pub matrix: CMatrix,
    pub params: ModelParams,
}

impl RealSpaceHamiltonian {
    pub fn n_modes(&self) -> usize {
        self.matrix.nrows()
    }

    /// `(H + H^dagger) / 2`.
    pub fn hermitian_part(&self) -> CMatrix {
        (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// `(H - H^dagger) / 2`; diagonal with entries `-/+ i gamma`.
    pub fn anti_hermitian_part(&self) -> CMatrix {
        (&self.matrix - self.matrix.adjoint()) * Complex64::new(0.5, 0.0)
    }

    pub fn stability(&self) -> StabilityReport {
        stability_report(&self.matrix)
    }
}

/// Hopping block from cell `c` to cell `c + 1`, i.e. `H[cell c, cell c+1]`.
fn forward_block(t2: f64) -> [[Complex64; 2]; 2] {
    let h = t2 / 2.0;
    [
        [Complex64::new(0.0, h), Complex64::new(h, 0.0)],
        [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
    ]
}

/// Builds the `N x N` lattice matrix: alternating `-i gamma / +i gamma` on
/// the diagonal, `t1` inside each cell, the `t2 / 2` inter-cell pattern
/// with its `+/- i t2 / 2` same-sublattice terms, and `Gamma` added on the
/// two corners.
pub fn real_space_hamiltonian(params: &ModelParams) -> Result<RealSpaceHamiltonian> {
    params.validate()?;
    let n = params.n_modes;
    let mut h = CMatrix::zeros(n, n);
    for j in 0..n {
        let sign = if j % 2 == 0 { -1.0 } else { 1.0 };
        h[(j, j)] = Complex64::new(0.0, sign * params.gamma);
    }
    for c in 0..n / 2 {
        let (a, b) = (2 * c, 2 * c + 1);
        h[(a, b)] += params.t1;
        h[(b, a)] += params.t1;
    }
    let fwd = forward_block(params.t2);
    for c in 0..n / 2 {
        for (u, row) in fwd.iter().enumerate() {
            for (v, &val) in row.iter().enumerate() {
                let (i, j) = (2 * c + u, 2 * c + 2 + v);
                if j < n {
                    h[(i, j)] += val;
                    h[(j, i)] += val.conj();
                }
            }
        }
    }
    h[(0, n - 1)] += params.big_gamma;
    h[(n - 1, 0)] += params.big_gamma;
    Ok(RealSpaceHamiltonian {
        matrix: h,
        params: *params,
    })
}

/// `dH / dGamma`: ones on the two corners.
pub fn coupling_derivative(n_modes: usize) -> RMatrix {
    let mut p = RMatrix::zeros(n_modes, n_modes);
    if n_modes > 0 {
        p[(0, n_modes - 1)] = 1.0;
        p[(n_modes - 1, 0)] = 1.0;
    }
    p
}

/// Per-mode coupling rates of observed, loss and gain channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelLayout {
    pub kappa: Vec<f64>,
    pub eta_loss: Vec<f64>,
    pub eta_gain: Vec<f64>,
    pub observed_ports: Vec<usize>,
}

impl ChannelLayout {
    pub fn new(
        kappa: Vec<f64>,
        eta_loss: Vec<f64>,
        eta_gain: Vec<f64>,
        observed_ports: Vec<usize>,
    ) -> Result<Self> {
        let n = kappa.len();
        for len in [eta_loss.len(), eta_gain.len()] {
            if len != n {
                return Err(Error::Dimension { expected: n, found: len });
            }
        }
        if kappa.iter().chain(&eta_loss).chain(&eta_gain).any(|&r| r.is_nan() || r < 0.0) {
            return Err(Error::InvalidParams("channel rates must be non-negative".into()));
        }
        if let Some(&j) = observed_ports.iter().find(|&&j| j >= n || kappa[j] <= 0.0) {
            return Err(Error::InvalidParams(format!("port {j} has no observed channel")));
        }
        Ok(Self {
            kappa,
            eta_loss,
            eta_gain,
            observed_ports,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.kappa.len()
    }

    /// Net anti-Hermitian rate `eta_j = -kappa_j - eta^l_j + eta^g_j`.
    pub fn net_rates(&self) -> Vec<f64> {
        (0..self.n_modes())
            .map(|j| -self.kappa[j] - self.eta_loss[j] + self.eta_gain[j])
            .collect()
    }

    pub fn loss_sites(&self) -> Vec<usize> {
        (0..self.n_modes()).filter(|&j| self.eta_loss[j] > 0.0).collect()
    }

    pub fn gain_sites(&self) -> Vec<usize> {
        (0..self.n_modes()).filter(|&j| self.eta_gain[j] > 0.0).collect()
    }

    /// Largest mismatch between the net rates and `Im diag(H)`.
    pub fn diagonal_mismatch(&self, h: &CMatrix) -> f64 {
        self.net_rates()
            .iter()
            .enumerate()
            .map(|(j, eta)| (h[(j, j)].im - eta).abs())
            .fold(0.0, f64::max)
    }
}

/// Observed channels on both ends, loss on interior `A` sites, gain on `B`
/// sites. End sites carry only the observed channel so that their net rate
/// stays `-gamma`.
pub fn default_channel_layout(params: &ModelParams) -> Result<ChannelLayout> {
    params.validate()?;
    let n = params.n_modes;
    let g = params.gamma;
    let mut kappa = vec![0.0; n];
    let mut eta_loss = vec![0.0; n];
    let mut eta_gain = vec![0.0; n];
    kappa[0] = g;
    kappa[n - 1] = g;
    for j in 1..n - 1 {
        if j % 2 == 0 {
            eta_loss[j] = g;
        } else {
            eta_gain[j] = g;
        }
    }
    if g > 0.0 {
        ChannelLayout::new(kappa, eta_loss, eta_gain, vec![0, n - 1])
    } else {
        // gamma = 0 leaves no observed channel to validate against
        Ok(ChannelLayout {
            kappa,
            eta_loss,
            eta_gain,
            observed_ports: vec![0, n - 1],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    /// Sorted by modulus, ascending.
    pub eigenvalues: Vec<Complex64>,
    pub max_imag: f64,
    pub stable: bool,
}

/// Eigenvalues of `H` and whether all modes decay (`max Im < -1e-10`).
pub fn stability_report(h: &CMatrix) -> StabilityReport {
    let mut eigenvalues = linalg::eigenvalues(h).unwrap_or_else(|| vec![Complex64::new(f64::NAN, f64::NAN)]);
    eigenvalues.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let max_imag = eigenvalues.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max);
    StabilityReport {
        stable: max_imag < -STABILITY_MARGIN,
        eigenvalues,
        max_imag,
    }
}

/// Ring variant used for the bulk check: the boundary coupling is replaced
/// by full periodic inter-cell hopping. Requires an even mode count.
#[cfg(test)]
pub(crate) fn periodic_hamiltonian(p: BlochParams, n_cells: usize) -> CMatrix {
    let n = 2 * n_cells;
    let mut h = CMatrix::zeros(n, n);
    let fwd = forward_block(p.t2);
    for c in 0..n_cells {
        let (a, b) = (2 * c, 2 * c + 1);
        h[(a, a)] = -linalg::I * p.gamma;
        h[(b, b)] = linalg::I * p.gamma;
        h[(a, b)] += p.t1;
        h[(b, a)] += p.t1;
        let next = (c + 1) % n_cells;
        for (u, row) in fwd.iter().enumerate() {
            for (v, &val) in row.iter().enumerate() {
                let (i, j) = (2 * c + u, 2 * next + v);
                h[(i, j)] += val;
                h[(j, i)] += val.conj();
            }
        }
    }
    h
}
