use std::fmt;
use std::path::Path;
use std::time::Duration;

use quantos::analysis::{
    classical_edge_shift, fisher_until_saturated, fisher_vs_n, fit_growth_rate, log_omega_grid, odd_range,
    omega_scan, open_closed_grid, t1_resonance_scan, GrowthFit, SweepResult,
};
use quantos::metrology::{validate_cramer_rao, LocationFamily};
use quantos::model::winding_number;
use quantos::Error;

use crate::config::RunConfig;
use crate::output::{opt_real, real, write_csv, write_text};

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Numeric(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Numeric(m) => write!(f, "numeric failure: {m}"),
            Self::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) => Self::Config(format!("[{}] {e}", e.code())),
            _ => Self::Numeric(format!("[{}] {e}", e.code())),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

fn csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
    let path = write_csv(dir, name, header, rows).map_err(|e| Failure::Io(format!("{name}: {e}")))?;
    println!("wrote {} ({} rows)", path.display(), rows.len());
    Ok(())
}

fn warn_flagged(sweep: &SweepResult) {
    for row in &sweep.rows {
        if let Some(e) = &row.failure {
            eprintln!(
                "warning: N={} omega={} flagged: [{}] {e}",
                row.params.n_modes,
                row.params.omega,
                e.code()
            );
        }
    }
}

pub fn winding(c: &RunConfig) -> Result<(), Failure> {
    let nu = winding_number(c.model.bloch(), c.winding.n_k)?;
    println!("{nu}");
    Ok(())
}

pub fn phase_diagram(c: &RunConfig) -> Result<(), Failure> {
    let pd = &c.phase_diagram;
    let t1 = open_closed_grid(pd.t1_min, pd.t1_max, pd.t1_points);
    let t2 = open_closed_grid(pd.t2_min, pd.t2_max, pd.t2_points);
    let points = quantos::analysis::phase_diagram(&t1, &t2, c.model.gamma)?;
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![real(p.t1), real(p.t2), real(p.gamma), p.nu.to_string()])
        .collect();
    csv(&c.output_dir, "phase.csv", &["t1", "t2", "gamma", "nu"], &rows)
}

pub const FIT_HEADER: [&str; 8] = [
    "alpha",
    "two_alpha",
    "intercept",
    "window_min",
    "window_max",
    "r_squared",
    "saturated_value",
    "reason",
];

fn fit_row(fit: &Result<GrowthFit, Error>) -> Result<Vec<String>, Failure> {
    match fit {
        Ok(f) => Ok(vec![
            real(f.alpha),
            real(f.two_alpha()),
            real(f.intercept),
            f.window.0.to_string(),
            f.window.1.to_string(),
            real(f.r_squared),
            opt_real(f.saturated_value),
            String::new(),
        ]),
        Err(e @ Error::NoLinearWindow(_)) => {
            let mut row = vec![String::new(); 7];
            row.push(e.code().to_string());
            Ok(row)
        }
        Err(e) => Err(e.clone().into()),
    }
}

pub fn fisher_scaling(c: &RunConfig) -> Result<(), Failure> {
    let fs = &c.fisher_scaling;
    let (sweep, fit) = if fs.saturate {
        match fisher_until_saturated(&c.model, fs.n_min, fs.saturate_n_max, fs.saturate_chunk) {
            Ok((s, f)) => (s, Ok(f)),
            Err(e @ Error::NoLinearWindow(_)) => {
                let s = fisher_vs_n(&c.model, &odd_range(fs.n_min, fs.saturate_n_max))?;
                (s, Err(e))
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        let s = fisher_vs_n(&c.model, &odd_range(fs.n_min, fs.n_max))?;
        let f = fit_growth_rate(&s);
        (s, f)
    };
    warn_flagged(&sweep);
    let rows: Vec<Vec<String>> = sweep
        .rows
        .iter()
        .map(|r| {
            let p = &r.params;
            vec![
                p.n_modes.to_string(),
                real(p.t1),
                real(p.t2),
                real(p.gamma),
                real(p.big_gamma),
                real(p.omega),
                real(r.fisher),
                real(r.mean_term),
                real(r.cov_term),
                r.nu.map(|n| n.to_string()).unwrap_or_default(),
                r.stable.to_string(),
            ]
        })
        .collect();
    csv(
        &c.output_dir,
        "fisher_n.csv",
        &[
            "N",
            "t1",
            "t2",
            "gamma",
            "big_gamma",
            "omega",
            "fisher",
            "mean_term",
            "cov_term",
            "nu",
            "stable",
        ],
        &rows,
    )?;
    match &fit {
        Ok(f) => println!(
            "alpha = {} (2 alpha = {}), r^2 = {}, window N = {}..{}",
            f.alpha,
            f.two_alpha(),
            f.r_squared,
            f.window.0,
            f.window.1
        ),
        Err(e) => println!("no exponential window: {e}"),
    }
    csv(&c.output_dir, "fit.csv", &FIT_HEADER, &[fit_row(&fit)?])
}

pub fn resonance_t1(c: &RunConfig) -> Result<(), Failure> {
    let r = &c.resonance_t1;
    let n_list = odd_range(r.n_min, r.n_max);
    let mut rows = Vec::new();
    for &w in &r.omega_values {
        for point in t1_resonance_scan(&r.t1_values, &c.model.with_omega(w), &n_list)? {
            let fit = match point.fit {
                Ok(f) => Some(f),
                Err(Error::NoLinearWindow(_)) => None,
                Err(e) => return Err(e.into()),
            };
            rows.push(vec![
                real(point.t1),
                real(point.omega),
                opt_real(fit.map(|f| f.alpha)),
                opt_real(fit.map(|f| f.two_alpha())),
                opt_real(fit.map(|f| f.r_squared)),
            ]);
        }
    }
    csv(
        &c.output_dir,
        "alpha_t1.csv",
        &["t1", "omega", "alpha", "two_alpha", "r_squared"],
        &rows,
    )
}

pub fn resonance_omega(c: &RunConfig) -> Result<(), Failure> {
    let r = &c.resonance_omega;
    if !(r.omega_min > 0.0 && r.omega_max > r.omega_min) || r.omega_points < 2 {
        return Err(Failure::Config("need 0 < omega_min < omega_max and omega_points >= 2".into()));
    }
    let grid = log_omega_grid(r.omega_min, r.omega_max, r.omega_points, r.mirrored);
    let scan = omega_scan(&grid, &r.n_values, &c.model)?;
    warn_flagged(&scan.sweep);
    for p in &scan.peaks {
        println!("N = {}: peak at omega = {} with I = {}", p.n_modes, p.omega, p.fisher);
    }
    let rows: Vec<Vec<String>> = scan
        .sweep
        .rows
        .iter()
        .map(|row| {
            vec![
                real(row.params.omega),
                row.params.n_modes.to_string(),
                real(row.fisher),
                scan.is_peak(row).to_string(),
            ]
        })
        .collect();
    csv(&c.output_dir, "fisher_omega.csv", &["omega", "N", "fisher", "peak_flag"], &rows)
}

pub fn classical_shift(c: &RunConfig) -> Result<(), Failure> {
    let cs = &c.classical_shift;
    let scan = classical_edge_shift(&c.model, &odd_range(cs.n_min, cs.n_max))?;
    match scan.alpha_c() {
        Ok(a) => println!("alpha_c = {a}"),
        Err(e) => println!("no exponential window for the edge shift: {e}"),
    }
    let rows: Vec<Vec<String>> = scan
        .shifts
        .iter()
        .map(|s| {
            vec![
                s.n_modes.to_string(),
                real(s.big_gamma),
                real(s.delta_e0),
                real(s.alpha_c_running),
            ]
        })
        .collect();
    csv(
        &c.output_dir,
        "classical.csv",
        &["N", "big_gamma", "delta_e0", "alpha_c_running"],
        &rows,
    )
}

pub fn validate_cr(c: &RunConfig) -> Result<(), Failure> {
    let v = &c.validate_cr;
    let check = validate_cramer_rao(
        &LocationFamily::heterodyne_vacuum(),
        v.true_gamma,
        v.n_samples,
        v.batches,
        c.seed,
        (v.bracket_lo, v.bracket_hi),
    )?;
    println!("variance / bound = {}", check.ratio);
    let row = vec![
        check.n_samples.to_string(),
        check.batches.to_string(),
        real(check.mle_variance),
        real(check.inverse_fisher),
        real(check.ratio),
    ];
    csv(
        &c.output_dir,
        "cr.csv",
        &["n_samples", "batches", "mle_variance", "inverse_fisher", "ratio"],
        &[row],
    )
}

pub fn write_manifest(c: &RunConfig, command: &str, elapsed: Duration) -> Result<(), Failure> {
    let text = format!(
        "quantos {}\ncommand: {command}\nthreads: {}\nwall_time_s: {}\n\n# resolved configuration\n{}",
        env!("CARGO_PKG_VERSION"),
        rayon::current_num_threads(),
        elapsed.as_secs_f64(),
        c.to_toml()
    );
    write_text(&c.output_dir, "manifest.txt", &text).map_err(|e| Failure::Io(format!("manifest.txt: {e}")))?;
    Ok(())
}
