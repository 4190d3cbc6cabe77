//! Parameter sweeps and the quantities extracted from them: growth rates of
//! the Fisher information with system size, phase diagrams, resonance scans
//! and the classical edge-mode shift.
//!
//! Every sweep is a pure map over independent parameter points. Points are
//! evaluated in parallel and collected in sweep order, so results do not
//! depend on scheduling.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrology::{
    fisher_information, heterodyne, propagate, propagate_derivative, FisherResult, GaussianState,
};
use crate::model::{
    analytic_phase, default_channel_layout, real_space_hamiltonian, winding_number, BlochParams,
    ModelParams, PhasePoint, DEFAULT_K_POINTS,
};
use crate::scattering::{quadrature_response, response_derivative};

/// Local slopes within a window may spread by this fraction of their mean.
pub const WINDOW_SLOPE_SPREAD: f64 = 0.10;
/// Trailing slopes below this fraction of the window slope mark saturation.
pub const SATURATION_FRACTION: f64 = 0.10;
/// Smallest mean log-slope per mode that counts as growth.
pub const MIN_GROWTH_SLOPE: f64 = 1e-3;
pub const MIN_WINDOW_POINTS: usize = 4;
pub const MIN_FIT_POINTS: usize = 6;
const EDGE_TIE_TOL: f64 = 1e-10;

/// End-to-end Fisher information of heterodyning both ports.
pub fn fisher_point(params: &ModelParams) -> Result<FisherResult> {
    params.validate()?;
    let h = real_space_hamiltonian(params)?;
    let layout = default_channel_layout(params)?;
    let response = response_derivative(&h, &layout, params.omega)?;
    let qr = quadrature_response(&response);
    let probe = GaussianState::coherent_probe(qr.n_ports(), params.probe_port, params.probe_amplitude);
    let out = propagate(&qr, &probe)?;
    let d = propagate_derivative(&qr, &probe)?;
    let het = heterodyne(&out)?;
    let mut f = fisher_information(&het.mean, &het.cov, &d.dmean, &d.dcov)?;
    f.params = Some(*params);
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub params: ModelParams,
    /// `NaN` when the point failed; see `failure`.
    pub fisher: f64,
    pub mean_term: f64,
    pub cov_term: f64,
    pub nu: Option<i32>,
    pub stable: bool,
    pub failure: Option<Error>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Evaluates one point; numerical failures become a flagged row.
pub fn evaluate_row(params: &ModelParams) -> SweepRow {
    let nu = winding_number(params.bloch(), DEFAULT_K_POINTS).ok();
    let stable = real_space_hamiltonian(params)
        .map(|h| h.stability().stable)
        .unwrap_or(false);
    match fisher_point(params) {
        Ok(f) => SweepRow {
            params: *params,
            fisher: f.value,
            mean_term: f.mean_term,
            cov_term: f.cov_term,
            nu,
            stable,
            failure: None,
        },
        Err(e) => SweepRow {
            params: *params,
            fisher: f64::NAN,
            mean_term: f64::NAN,
            cov_term: f64::NAN,
            nu,
            stable,
            failure: Some(e),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    NModes,
    Omega,
    /// Frequency scan repeated for several sizes; rows ordered by `N`, then `omega`.
    OmegaByN,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub fixed: ModelParams,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    fn evaluate(axis: SweepAxis, fixed: ModelParams, points: Vec<ModelParams>) -> Self {
        let rows = points.par_iter().map(evaluate_row).collect();
        Self { axis, fixed, rows }
    }

    pub fn n_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.params.n_modes as f64).collect()
    }

    pub fn fisher_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.fisher).collect()
    }
}

fn check_n_list(n_list: &[usize]) -> Result<()> {
    if n_list.iter().any(|&n| n < 3 || n % 2 == 0) {
        return Err(Error::InvalidParams("system sizes must be odd and >= 3".into()));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParams("system sizes must be strictly ascending".into()));
    }
    Ok(())
}

/// Odd sizes `lo, lo + 2, ..., <= hi`.
pub fn odd_range(lo: usize, hi: usize) -> Vec<usize> {
    let start = if lo.is_multiple_of(2) { lo + 1 } else { lo };
    (start..=hi).step_by(2).collect()
}

pub fn fisher_vs_n(params: &ModelParams, n_list: &[usize]) -> Result<SweepResult> {
    params.validate()?;
    check_n_list(n_list)?;
    let points = n_list.iter().map(|&n| params.with_n_modes(n)).collect();
    Ok(SweepResult::evaluate(SweepAxis::NModes, *params, points))
}

/// Least-squares line through a window of `(x, ln y)` data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Inclusive index range into the input arrays.
    pub window: (usize, usize),
    pub r_squared: f64,
    /// Mean of `y` over the trailing plateau, when one is detected.
    pub saturated_value: Option<f64>,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, intercept, r2)
}

fn qualifies(slopes: &[f64]) -> bool {
    if slopes.iter().any(|s| !s.is_finite()) {
        return false;
    }
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    let max = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    mean > MIN_GROWTH_SLOPE && max - min <= WINDOW_SLOPE_SPREAD * mean
}

/// Finds the longest contiguous run of points whose local log-slopes agree
/// within 10% of their mean, fits a line through it, and looks for a
/// plateau after it.
pub fn fit_log_linear(x: &[f64], y: &[f64]) -> Result<LogLinearFit> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: y.len(),
        });
    }
    let m = x.len();
    if m < MIN_FIT_POINTS {
        return Err(Error::NoLinearWindow(format!("{m} points, need {MIN_FIT_POINTS}")));
    }
    let logs: Vec<f64> = y.iter().map(|v| if *v > 0.0 { v.ln() } else { f64::NAN }).collect();
    let slopes: Vec<f64> = (0..m - 1)
        .map(|i| (logs[i + 1] - logs[i]) / (x[i + 1] - x[i]))
        .collect();

    // (first point, last point), largest first, earliest on ties
    let mut best: Option<(usize, usize)> = None;
    for a in 0..m {
        let mut b = a + MIN_WINDOW_POINTS - 1;
        while b < m && qualifies(&slopes[a..b]) {
            if best.is_none_or(|(ba, bb)| b - a > bb - ba) {
                best = Some((a, b));
            }
            b += 1;
        }
    }
    let (a, b) = best.ok_or_else(|| Error::NoLinearWindow("no run of steady positive slopes".into()))?;
    let (slope, intercept, r_squared) = least_squares(&x[a..=b], &logs[a..=b]);

    let limit = SATURATION_FRACTION * slope;
    let trailing = &slopes[b..];
    let mut plateau_start = None;
    for j in (0..trailing.len()).rev() {
        if trailing[j].is_finite() && trailing[j].abs() < limit {
            plateau_start = Some(b + j);
        } else {
            break;
        }
    }
    let saturated_value = plateau_start.map(|p| {
        let vals = &y[p..];
        vals.iter().sum::<f64>() / vals.len() as f64
    });
    Ok(LogLinearFit {
        slope,
        intercept,
        window: (a, b),
        r_squared,
        saturated_value,
    })
}

/// Exponential growth of the Fisher information, `I ~ exp(2 alpha N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub alpha: f64,
    pub intercept: f64,
    /// Smallest and largest `N` of the fitted window.
    pub window: (usize, usize),
    pub r_squared: f64,
    pub saturated_value: Option<f64>,
}

impl GrowthFit {
    pub fn two_alpha(&self) -> f64 {
        2.0 * self.alpha
    }

    pub fn window_points(&self) -> usize {
        (self.window.1 - self.window.0) / 2 + 1
    }
}

pub fn fit_growth_rate(sweep: &SweepResult) -> Result<GrowthFit> {
    let n: Vec<usize> = sweep.rows.iter().map(|r| r.params.n_modes).collect();
    fit_growth(&n, &sweep.fisher_values())
}

/// Growth fit of Fisher values `fisher[i]` measured at sizes `n[i]`.
pub fn fit_growth(n: &[usize], fisher: &[f64]) -> Result<GrowthFit> {
    let x: Vec<f64> = n.iter().map(|&v| v as f64).collect();
    let fit = fit_log_linear(&x, fisher)?;
    Ok(GrowthFit {
        alpha: fit.slope / 2.0,
        intercept: fit.intercept,
        window: (n[fit.window.0], n[fit.window.1]),
        r_squared: fit.r_squared,
        saturated_value: fit.saturated_value,
    })
}

/// Extends the size sweep in steps of `chunk` modes until a plateau is
/// detected or `n_max` is reached.
pub fn fisher_until_saturated(
    params: &ModelParams,
    n_min: usize,
    n_max: usize,
    chunk: usize,
) -> Result<(SweepResult, GrowthFit)> {
    let mut hi = (n_min + chunk).min(n_max);
    loop {
        let sweep = fisher_vs_n(params, &odd_range(n_min, hi))?;
        let fit = fit_growth_rate(&sweep);
        match fit {
            Ok(f) if f.saturated_value.is_some() && f.window.1 + 4 <= hi => return Ok((sweep, f)),
            _ if hi >= n_max => return fit.map(|f| (sweep, f)),
            _ => hi = (hi + chunk).min(n_max),
        }
    }
}

/// Winding number over a `t1 x t2` grid, `t1` varying slowest.
pub fn phase_diagram(t1_grid: &[f64], t2_grid: &[f64], gamma: f64) -> Result<Vec<PhasePoint>> {
    let points: Vec<(f64, f64)> = t1_grid
        .iter()
        .flat_map(|&t1| t2_grid.iter().map(move |&t2| (t1, t2)))
        .collect();
    points
        .par_iter()
        .map(|&(t1, t2)| {
            let nu = winding_number(BlochParams::new(t1, t2, gamma), DEFAULT_K_POINTS)?;
            Ok(PhasePoint { t1, t2, gamma, nu })
        })
        .collect()
}

/// Grid points where the winding number and the closed form disagree.
pub fn phase_mismatches(points: &[PhasePoint]) -> Vec<PhasePoint> {
    points
        .iter()
        .filter(|p| analytic_phase(BlochParams::new(p.t1, p.t2, p.gamma)).ok() != Some(p.nu))
        .copied()
        .collect()
}

/// `n` evenly spaced points in `(lo, hi]`.
pub fn open_closed_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / n as f64;
    (1..=n).map(|i| lo + step * i as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonancePoint {
    pub t1: f64,
    pub omega: f64,
    pub fit: Result<GrowthFit>,
}

/// Growth rate as a function of the intra-cell hopping.
pub fn t1_resonance_scan(t1_list: &[f64], params: &ModelParams, n_list: &[usize]) -> Result<Vec<ResonancePoint>> {
    t1_list
        .iter()
        .map(|&t1| {
            let p = params.with_t1(t1);
            let sweep = fisher_vs_n(&p, n_list)?;
            Ok(ResonancePoint {
                t1,
                omega: p.omega,
                fit: fit_growth_rate(&sweep),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaPeak {
    pub n_modes: usize,
    pub omega: f64,
    pub fisher: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaScan {
    pub sweep: SweepResult,
    pub peaks: Vec<OmegaPeak>,
}

impl OmegaScan {
    pub fn is_peak(&self, row: &SweepRow) -> bool {
        self.peaks
            .iter()
            .any(|p| p.n_modes == row.params.n_modes && p.omega == row.params.omega)
    }
}

/// Fisher information over a frequency grid for each system size.
pub fn omega_scan(omega_list: &[f64], n_list: &[usize], params: &ModelParams) -> Result<OmegaScan> {
    params.validate()?;
    check_n_list(n_list)?;
    let mut omegas = omega_list.to_vec();
    omegas.sort_by(f64::total_cmp);
    let points: Vec<ModelParams> = n_list
        .iter()
        .flat_map(|&n| omegas.iter().map(move |&w| params.with_n_modes(n).with_omega(w)))
        .collect();
    let sweep = SweepResult::evaluate(SweepAxis::OmegaByN, *params, points);
    let peaks = n_list
        .iter()
        .filter_map(|&n| {
            sweep
                .rows
                .iter()
                .filter(|r| r.params.n_modes == n && r.fisher.is_finite())
                .max_by(|a, b| a.fisher.total_cmp(&b.fisher))
                .map(|r| OmegaPeak {
                    n_modes: n,
                    omega: r.params.omega,
                    fisher: r.fisher,
                })
        })
        .collect();
    Ok(OmegaScan { sweep, peaks })
}

/// `n` logarithmically spaced frequencies in `[lo, hi]`, optionally mirrored
/// to negative values, always including zero.
pub fn log_omega_grid(lo: f64, hi: f64, n: usize, mirrored: bool) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    let mut out = vec![0.0];
    for i in 0..n {
        let w = 10f64.powf(a + (b - a) * i as f64 / (n - 1).max(1) as f64);
        out.push(w);
        if mirrored {
            out.push(-w);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalShift {
    pub n_modes: usize,
    pub big_gamma: f64,
    /// Distance the edge eigenvalue moves when the boundary coupling is on.
    pub delta_e0: f64,
    /// Local rate `d ln(delta_e0 / Gamma) / dN` from the previous size.
    pub alpha_c_running: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalScan {
    pub shifts: Vec<ClassicalShift>,
    /// Fitted `alpha_c` from `delta_e0 / Gamma ~ exp(alpha_c N)`.
    pub fit: Result<LogLinearFit>,
}

impl ClassicalScan {
    pub fn alpha_c(&self) -> Result<f64> {
        self.fit.as_ref().map(|f| f.slope).map_err(Clone::clone)
    }
}

/// Shift of the edge eigenvalue of the open chain caused by `params.big_gamma`.
pub fn edge_mode_shift(params: &ModelParams) -> Result<f64> {
    let open = real_space_hamiltonian(&params.with_big_gamma(0.0))?.stability().eigenvalues;
    let closed = real_space_hamiltonian(params)?.stability().eigenvalues;
    // eigenvalues come sorted by modulus
    let edge = open[0];
    if open.len() > 1 && (open[1].norm() - edge.norm()).abs() < EDGE_TIE_TOL {
        return Err(Error::EdgeModeAmbiguous {
            first: edge.norm(),
            second: open[1].norm(),
        });
    }
    let shift = closed
        .iter()
        .map(|z: &Complex64| (z - edge).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(shift)
}

pub fn classical_edge_shift(params: &ModelParams, n_list: &[usize]) -> Result<ClassicalScan> {
    params.validate()?;
    check_n_list(n_list)?;
    if params.big_gamma.is_nan() || params.big_gamma <= 0.0 {
        return Err(Error::InvalidParams("classical shift needs big_gamma > 0".into()));
    }
    let deltas = n_list
        .par_iter()
        .map(|&n| edge_mode_shift(&params.with_n_modes(n)))
        .collect::<Result<Vec<f64>>>()?;
    let g = params.big_gamma;
    let shifts: Vec<ClassicalShift> = n_list
        .iter()
        .zip(&deltas)
        .enumerate()
        .map(|(i, (&n, &d))| {
            let running = if i == 0 {
                f64::NAN
            } else {
                ((d / g).ln() - (deltas[i - 1] / g).ln()) / (n - n_list[i - 1]) as f64
            };
            ClassicalShift {
                n_modes: n,
                big_gamma: g,
                delta_e0: d,
                alpha_c_running: running,
            }
        })
        .collect();
    let x: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = deltas.iter().map(|d| d / g).collect();
    Ok(ClassicalScan {
        shifts,
        fit: fit_log_linear(&x, &y),
    })
}
