//! Frequency-space resolvent and the port-level input-output map.
//!
//! Everything is computed in the `N`-dimensional mode basis. With
//! `G(omega) = -i (H - omega)^{-1}` the mode amplitudes are `a = G F`, and the
//! observed outputs `O_out = O_in - sqrt(2 kappa) a` become
//!
//! ```text
//! O_out = s O_in + l_loss L_in + l_gain G_in^dagger
//! s      = 1 - k_o^T G k_o
//! l_loss =   - k_o^T G k_l
//! l_gain =   + k_o^T G k_g
//! ```
//!
//! where the coupling columns `k_*` carry `sqrt(2 rate)` on the coupled sites.
//! The gain column enters with a positive sign because the gain reservoir
//! drives the modes through the conjugated input `-sqrt(2 eta_g) G_in^dagger`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{embed, norm1, CMatrix, RMatrix, I};
use crate::model::{coupling_derivative, ChannelLayout, RealSpaceHamiltonian};

/// Condition estimates above this are treated as a singular resolvent.
pub const MAX_CONDITION: f64 = 1e14;

#[derive(Debug, Clone, PartialEq)]
pub struct ModeGreenFunction {
    pub matrix: CMatrix,
    pub omega: f64,
    /// 1-norm condition number of `H - omega`.
    pub condition_estimate: f64,
}

/// `G(omega) = -i (H - omega)^{-1}` by an LU solve with partial pivoting.
pub fn mode_green_function(h: &CMatrix, omega: f64) -> Result<ModeGreenFunction> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            found: h.ncols(),
        });
    }
    let shifted = h - CMatrix::identity(n, n) * Complex64::new(omega, 0.0);
    let singular = |condition| Error::SingularResolvent { omega, condition };
    let inverse = shifted
        .clone()
        .lu()
        .solve(&CMatrix::identity(n, n))
        .ok_or_else(|| singular(f64::INFINITY))?;
    let condition = norm1(&shifted) * norm1(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(singular(condition));
    }
    Ok(ModeGreenFunction {
        matrix: inverse * (-I),
        omega,
        condition_estimate: condition.max(1.0),
    })
}

/// Normwise relative residual of `(-i omega + i H) G = 1`.
pub fn resolvent_residual(h: &CMatrix, g: &ModeGreenFunction) -> f64 {
    let n = h.nrows();
    let a = (h - CMatrix::identity(n, n) * Complex64::new(g.omega, 0.0)) * I;
    let r = &a * &g.matrix - CMatrix::identity(n, n);
    norm1(&r) / (norm1(&a) * norm1(&g.matrix))
}

/// Coupling columns `(k_o, k_l, k_g)` with `sqrt(2 rate)` on coupled sites.
#[derive(Debug, Clone)]
pub struct CouplingColumns {
    pub observed: CMatrix,
    pub loss: CMatrix,
    pub gain: CMatrix,
}

impl CouplingColumns {
    pub fn from_layout(layout: &ChannelLayout) -> Self {
        let n = layout.n_modes();
        let column = |sites: &[usize], rates: &[f64]| {
            let mut k = CMatrix::zeros(n, sites.len());
            for (c, &j) in sites.iter().enumerate() {
                k[(j, c)] = Complex64::new((2.0 * rates[j]).sqrt(), 0.0);
            }
            k
        };
        Self {
            observed: column(&layout.observed_ports, &layout.kappa),
            loss: column(&layout.loss_sites(), &layout.eta_loss),
            gain: column(&layout.gain_sites(), &layout.eta_gain),
        }
    }
}

/// Derivatives of the port matrices with respect to the boundary coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct PortDerivatives {
    pub ds: CMatrix,
    pub dl_loss: CMatrix,
    pub dl_gain: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortResponse {
    pub s: CMatrix,
    pub l_loss: CMatrix,
    pub l_gain: CMatrix,
    pub omega: f64,
    pub condition_estimate: f64,
    pub derivatives: Option<PortDerivatives>,
}

impl PortResponse {
    pub fn n_ports(&self) -> usize {
        self.s.nrows()
    }

    /// `s s^dagger + l_loss l_loss^dagger - l_gain l_gain^dagger`; the identity
    /// whenever the bosonic commutators of the outputs are preserved.
    pub fn commutator_matrix(&self) -> CMatrix {
        &self.s * self.s.adjoint() + &self.l_loss * self.l_loss.adjoint()
            - &self.l_gain * self.l_gain.adjoint()
    }
}

fn port_blocks(g: &CMatrix, k: &CouplingColumns) -> (CMatrix, CMatrix, CMatrix) {
    let kt = k.observed.transpose();
    let np = kt.nrows();
    let s = CMatrix::identity(np, np) - &kt * g * &k.observed;
    let l_loss = -(&kt * g * &k.loss);
    let l_gain = &kt * g * &k.gain;
    (s, l_loss, l_gain)
}

pub fn port_response(g: &ModeGreenFunction, layout: &ChannelLayout) -> Result<PortResponse> {
    if layout.n_modes() != g.matrix.nrows() {
        return Err(Error::Dimension {
            expected: g.matrix.nrows(),
            found: layout.n_modes(),
        });
    }
    let k = CouplingColumns::from_layout(layout);
    let (s, l_loss, l_gain) = port_blocks(&g.matrix, &k);
    Ok(PortResponse {
        s,
        l_loss,
        l_gain,
        omega: g.omega,
        condition_estimate: g.condition_estimate,
        derivatives: None,
    })
}

/// Port response at `omega` together with its exact derivative along `dh`.
///
/// `d(A^{-1}) = -A^{-1} dA A^{-1}` with `G = -i A^{-1}` gives
/// `dG = -i G dH G`; the port derivatives follow by linearity.
pub fn response_with_derivative(
    h: &CMatrix,
    dh: &CMatrix,
    layout: &ChannelLayout,
    omega: f64,
) -> Result<PortResponse> {
    let g = mode_green_function(h, omega)?;
    let mut response = port_response(&g, layout)?;
    let dg = (&g.matrix * dh * &g.matrix) * (-I);
    let k = CouplingColumns::from_layout(layout);
    let (s_shift, dl_loss, dl_gain) = port_blocks(&dg, &k);
    let np = s_shift.nrows();
    response.derivatives = Some(PortDerivatives {
        // port_blocks adds the identity; the derivative has none
        ds: s_shift - CMatrix::identity(np, np),
        dl_loss,
        dl_gain,
    });
    Ok(response)
}

/// Port response and `d/dGamma` for the lattice Hamiltonian.
pub fn response_derivative(
    h: &RealSpaceHamiltonian,
    layout: &ChannelLayout,
    omega: f64,
) -> Result<PortResponse> {
    let dh = coupling_derivative(h.n_modes()).map(|v| Complex64::new(v, 0.0));
    response_with_derivative(&h.matrix, &dh, layout, omega)
}

/// Real quadrature form of a port response.
///
/// Ports are ordered `Q_1..Q_np, P_1..P_np`. Noise columns are ordered
/// `Q_loss, Q_gain, P_loss, P_gain`. Gain inputs enter conjugated, which
/// flips the sign of their `P` quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResponse {
    pub s_quad: RMatrix,
    pub l_quad: RMatrix,
    pub ds_quad: Option<RMatrix>,
    pub dl_quad: Option<RMatrix>,
    pub omega: f64,
}

impl QuadratureResponse {
    pub fn n_ports(&self) -> usize {
        self.s_quad.nrows() / 2
    }
}

fn embed_noise(l_loss: &CMatrix, l_gain: &CMatrix) -> RMatrix {
    let np = l_loss.nrows();
    let (nl, ng) = (l_loss.ncols(), l_gain.ncols());
    let m = nl + ng;
    let mut out = RMatrix::zeros(2 * np, 2 * m);
    for i in 0..np {
        for c in 0..nl {
            let z = l_loss[(i, c)];
            out[(i, c)] = z.re;
            out[(np + i, c)] = z.im;
            out[(i, m + c)] = -z.im;
            out[(np + i, m + c)] = z.re;
        }
        for c in 0..ng {
            let z = l_gain[(i, c)];
            out[(i, nl + c)] = z.re;
            out[(np + i, nl + c)] = z.im;
            out[(i, m + nl + c)] = z.im;
            out[(np + i, m + nl + c)] = -z.re;
        }
    }
    out
}

pub fn quadrature_response(pr: &PortResponse) -> QuadratureResponse {
    let (ds_quad, dl_quad) = match &pr.derivatives {
        Some(d) => (Some(embed(&d.ds)), Some(embed_noise(&d.dl_loss, &d.dl_gain))),
        None => (None, None),
    };
    QuadratureResponse {
        s_quad: embed(&pr.s),
        l_quad: embed_noise(&pr.l_loss, &pr.l_gain),
        ds_quad,
        dl_quad,
        omega: pr.omega,
    }
}
