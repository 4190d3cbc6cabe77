//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use quantos::analysis::{
    classical_edge_shift, fisher_until_saturated, fisher_vs_n, fit_growth_rate, fit_log_linear,
    log_omega_grid, odd_range, omega_scan, open_closed_grid, phase_diagram, t1_resonance_scan,
};
use quantos::metrology::{
    fisher_information, propagate_derivative, validate_cramer_rao, GaussianState, LocationFamily,
};
use quantos::model::{default_channel_layout, real_space_hamiltonian, ModelParams};
use quantos::scattering::{quadrature_response, response_derivative};
use quantos::Error;
use rand::Rng;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn topological() -> ModelParams {
    ModelParams::default().with_t1(1.0).with_big_gamma(1e-11)
}

fn phase_diagram_exactness() -> Outcome {
    let grid = open_closed_grid(0.0, 2.0, 50);
    let points = match phase_diagram(&grid, &grid, 0.7) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("winding failed: {e}")),
    };
    let mismatches = points
        .iter()
        .filter(|p| {
            let topo = (p.t1.abs() - p.t2.abs()).abs() < 0.7 && 0.7 < p.t1 + p.t2;
            (p.nu != 0) != topo || p.nu.abs() > 1
        })
        .count();
    outcome(
        mismatches == 0 && points.len() == 2500,
        format!("{} points, {mismatches} mismatches", points.len()),
    )
}

fn exponential_scaling() -> Outcome {
    let n_list = odd_range(11, 41);
    let topo = fisher_vs_n(&topological(), &n_list).and_then(|s| fit_growth_rate(&s));
    let trivial = fisher_vs_n(&topological().with_t1(1.5), &n_list).and_then(|s| fit_growth_rate(&s));

    let x: Vec<f64> = n_list.iter().map(|&n| n as f64).collect();
    let y: Vec<f64> = x.iter().map(|n| (0.43011 * n).exp()).collect();
    let synthetic = fit_log_linear(&x, &y).map(|f| f.slope);

    let topo_ok = matches!(&topo, Ok(f) if f.alpha > 0.0 && f.r_squared >= 0.999 && f.window_points() >= 5);
    let trivial_ok = matches!(trivial, Err(Error::NoLinearWindow(_)));
    let synth_ok = matches!(synthetic, Ok(s) if ((s - 0.43011) / 0.43011).abs() < 0.01);
    let topo_desc = match &topo {
        Ok(f) => format!(
            "alpha={:.5} r2={:.6} window={}..{} ({} pts)",
            f.alpha,
            f.r_squared,
            f.window.0,
            f.window.1,
            f.window_points()
        ),
        Err(e) => format!("error {e}"),
    };
    outcome(
        topo_ok && trivial_ok && synth_ok,
        format!(
            "topological {topo_desc}; trivial {}; synthetic 2alpha={:?}",
            match trivial {
                Err(e) => e.code().to_string(),
                Ok(f) => format!("window found alpha={}", f.alpha),
            },
            synthetic.ok()
        ),
    )
}

fn saturation_monotonicity() -> Outcome {
    let sat = |g: f64| {
        fisher_until_saturated(&topological().with_big_gamma(g), 11, 201, 20)
            .map(|(_, f)| f.saturated_value)
    };
    match (sat(1e-6), sat(1e-9)) {
        (Ok(Some(a)), Ok(Some(b))) => outcome(b > a, format!("I_sat(1e-6)={a:.4e} I_sat(1e-9)={b:.4e}")),
        (a, b) => outcome(false, format!("saturation not detected: {a:?} {b:?}")),
    }
}

fn quantum_alphas(t1s: &[f64]) -> Result<Vec<f64>, Error> {
    let params = ModelParams::default().with_big_gamma(1e-11);
    t1_resonance_scan(t1s, &params, &odd_range(5, 41))?
        .into_iter()
        .map(|r| r.fit.map(|f| f.alpha))
        .collect()
}

fn t1_resonance() -> Outcome {
    match quantum_alphas(&[0.5, 0.6, 0.65, 0.69]) {
        Ok(a) => outcome(
            a.windows(2).all(|w| w[1] > w[0]),
            format!("alpha = {}", a.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")),
        ),
        Err(e) => outcome(false, format!("fit failed: {e}")),
    }
}

fn omega_resonance() -> Outcome {
    let params = ModelParams::default().with_t1(0.69).with_big_gamma(1e-11);
    let n_list = [17, 21];
    let grid = log_omega_grid(1e-9, 1e-2, 281, false);
    let scan = match omega_scan(&grid, &n_list, &params) {
        Ok(s) => s,
        Err(e) => return outcome(false, format!("scan failed: {e}")),
    };
    let mut parts = Vec::new();
    let mut ratios_ok = true;
    for peak in &scan.peaks {
        let at_zero = scan
            .sweep
            .rows
            .iter()
            .find(|r| r.params.n_modes == peak.n_modes && r.params.omega == 0.0)
            .map(|r| r.fisher)
            .unwrap_or(f64::NAN);
        let ratio = peak.fisher / at_zero;
        ratios_ok &= ratio >= 10.0;
        parts.push(format!("N={} peak omega={:.3e} ratio={:.1}", peak.n_modes, peak.omega, ratio));
    }
    let shifted = scan.peaks.len() == 2 && scan.peaks[0].omega != scan.peaks[1].omega;
    outcome(ratios_ok && shifted, parts.join("; "))
}

fn classical_quantum_contrast() -> Outcome {
    let t1s = [0.6, 0.69];
    let classical: Result<Vec<f64>, Error> = t1s
        .iter()
        .map(|&t1| {
            let p = ModelParams::default().with_t1(t1).with_big_gamma(1e-8);
            classical_edge_shift(&p, &odd_range(5, 41))?.alpha_c()
        })
        .collect();
    let quantum = quantum_alphas(&t1s);
    match (classical, quantum) {
        (Ok(c), Ok(q)) => {
            let c_spread = c[0].max(c[1]) / c[0].min(c[1]) - 1.0;
            let q_growth = q[1] / q[0] - 1.0;
            let pass = c.iter().all(|v| v.is_finite() && *v > 0.0) && c_spread < 0.5 && q_growth > 0.5;
            outcome(
                pass,
                format!(
                    "alpha_c = {:.4}, {:.4} (spread {:.1}%); alpha = {:.4}, {:.4} (growth {:.1}%)",
                    c[0],
                    c[1],
                    100.0 * c_spread,
                    q[0],
                    q[1],
                    100.0 * q_growth
                ),
            )
        }
        (c, q) => outcome(false, format!("classical {c:?}, quantum {q:?}")),
    }
}

fn single_mode_unitarity() -> Outcome {
    let mut rng = seeded(11);
    let worst = (0..100)
        .map(|_| {
            let w = rng.random_range(-10.0..10.0);
            (single_mode_reflection(0.3, 0.7, w).norm() - 1.0).abs()
        })
        .fold(0.0, f64::max);
    outcome(worst <= 1e-12, format!("max ||s|-1| = {worst:.2e}"))
}

fn fisher_formula_oracle() -> Outcome {
    let mut rng = seeded(5);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let fam = GaussianFamily::random(&mut rng, 1 + i % 2);
        let t = fam.theta;
        let lib = fisher_information(&fam.mean(t), &fam.cov(t), &fam.dmean(t), &fam.dcov(t));
        let lib = match lib {
            Ok(f) => f.value,
            Err(e) => return outcome(false, format!("family {i}: {e}")),
        };
        let quad = fam.quadrature_fisher(401);
        worst = worst.max(((lib - quad) / quad).abs());
    }
    outcome(worst <= 1e-6, format!("20 families, max relative deviation {worst:.2e}"))
}

fn derivative_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for &w in &[0.0, 0.2] {
        let p = ModelParams::default().with_n_modes(7).with_big_gamma(1e-3).with_omega(w);
        let h = real_space_hamiltonian(&p).unwrap();
        let layout = default_channel_layout(&p).unwrap();
        let qr = quadrature_response(&response_derivative(&h, &layout, w).unwrap());
        let probe = GaussianState::coherent_probe(qr.n_ports(), p.probe_port, p.probe_amplitude);
        let d = propagate_derivative(&qr, &probe).unwrap();
        let (fd_mean, fd_cov) = finite_difference_moments(&p, 1e-6);
        let dm = Mat::from_column_slice(d.dmean.len(), 1, d.dmean.as_slice());
        let fm = Mat::from_column_slice(fd_mean.len(), 1, fd_mean.as_slice());
        worst = worst.max(rel_diff(&dm, &fm)).max(rel_diff(&d.dcov, &fd_cov));
    }
    outcome(worst <= 1e-6, format!("omega in {{0, 0.2}}, max relative deviation {worst:.2e}"))
}

fn cramer_rao_validation() -> Outcome {
    let run = || validate_cramer_rao(&LocationFamily::heterodyne_vacuum(), 0.5, 10_000, 200, 2024, (0.0, 1.0));
    match (run(), run()) {
        (Ok(a), Ok(b)) => outcome(
            a == b && (0.9..=1.3).contains(&a.ratio),
            format!(
                "ratio={:.4} (variance {:.4e}, bound {:.4e}), deterministic={}",
                a.ratio,
                a.mle_variance,
                a.inverse_fisher,
                a == b
            ),
        ),
        (a, _) => outcome(false, format!("{a:?}")),
    }
}

fn quadrature_space_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for &n in &[3, 5, 7] {
        let p = ModelParams::default().with_n_modes(n).with_big_gamma(0.05);
        let (s_lit, l_lit) = literal_quadrature_scattering(&p);
        let (s_lib, l_lib) = library_quadrature_scattering(&p);
        worst = worst.max(max_abs(&(s_lit - s_lib))).max(max_abs(&(l_lit - l_lib)));
    }
    outcome(worst <= 1e-10, format!("N in {{3, 5, 7}}, max deviation {worst:.2e}"))
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check, Option<Duration>); 11] = [
        ("phase-diagram exactness", phase_diagram_exactness, Some(Duration::from_secs(5))),
        ("topological exponential scaling", exponential_scaling, Some(Duration::from_secs(30))),
        ("saturation monotonicity", saturation_monotonicity, Some(Duration::from_secs(120))),
        ("t1 resonance ordering", t1_resonance, Some(Duration::from_secs(120))),
        ("omega resonance", omega_resonance, None),
        ("classical-quantum contrast", classical_quantum_contrast, None),
        ("single-mode unitarity", single_mode_unitarity, None),
        ("Fisher formula oracle", fisher_formula_oracle, None),
        ("derivative oracle", derivative_oracle, None),
        ("Cramer-Rao validation", cramer_rao_validation, None),
        ("quadrature-space oracle", quadrature_space_oracle, None),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let mut result = check();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                result.pass = false;
                result.detail.push_str(&format!("; exceeded {:?}", limit));
            }
        }
        if !result.pass {
            failed += 1;
        }
        println!(
            "{} {name}: {} [{:.2}s]",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
