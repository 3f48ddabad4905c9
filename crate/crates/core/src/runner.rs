//! Command execution and artifact files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::certificates::{
    attractivity_constant, build_antidamping_certificate, build_monotone_certificate,
    antidamping_hypotheses, distance_lemma_constant, search_monotone_certificate, Certificate,
    HypothesisCheck,
};
use crate::config::{apply_parameter, CertificateMode, ScenarioConfig, SweepSpec};
use crate::diagnostics::{
    check_decay_bound, energy_identity_residual, fit_decay_rate, lyapunov_gamma, max_abs,
    multiplier_identity_residual, stationary_limit, BoundReport, DecayEnvelope, DecayFit,
    StationaryLimit, WeightRho, DEFAULT_SLACK, FIT_FLOOR,
};
use crate::error::{Error, Result};
use crate::nonlinearities::{lipschitz_constant, sector_params};
use crate::solver::{
    characteristics_oracle, check_transparent_case, make_initial, simulate_observed, Trajectory,
};
use crate::state_space::{dist_to_stationary, energy, EnergyPencil, FieldState};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BOUND_VIOLATION: i32 = 1;

/// Env var capping sweep parallelism.
pub const THREADS_ENV: &str = "WAVEGUARD_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttractivityReport {
    pub k: f64,
    pub m_prime: f64,
    pub holds: bool,
    pub worst_margin: f64,
    pub worst_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub m1: f64,
    pub m2: f64,
    pub holds: bool,
    /// min over steps of `Γ − M1·𝓔`
    pub lower_margin: f64,
    /// min over steps of `M2·𝓔 − Γ`
    pub upper_margin: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub scenario_hash: String,
    pub n_cells: usize,
    pub dt: Option<f64>,
    pub n_steps: Option<usize>,
    pub boundary_warning: bool,
    pub initial_energy: Option<f64>,
    pub final_energy: Option<f64>,
    pub certificate: Option<Certificate>,
    pub certificate_error: Option<String>,
    /// entry conditions, reported when the certificate is infeasible
    pub hypotheses: Option<Vec<HypothesisCheck>>,
    pub decay_fit: Option<DecayFit>,
    pub fit_error: Option<String>,
    /// `μ_obs / μ_cert`; at least 1 when the certificate is honest
    pub mu_ratio: Option<f64>,
    pub bound: Option<BoundReport>,
    pub attractivity: Option<AttractivityReport>,
    pub gamma_sandwich: Option<SandwichReport>,
    pub energy_identity_max: Option<f64>,
    pub multiplier_identity_max: Option<f64>,
    pub neumann_residual_max: Option<f64>,
    pub stationary_limit: Option<StationaryLimit>,
    pub solver_error: Option<String>,
    pub exit_status: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: RunReport,
    pub files: Vec<PathBuf>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_file(dir: &Path, name: &str, contents: &str, files: &mut Vec<PathBuf>) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    files.push(path);
    Ok(())
}

fn write_report(dir: &Path, report: &RunReport, files: &mut Vec<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    write_file(dir, "report.json", &text, files)
}

/// Builds the certificate the config asks for.
pub fn certify(config: &ScenarioConfig) -> Result<Option<Certificate>> {
    let mode = match config.certificate.mode {
        CertificateMode::None => return Ok(None),
        CertificateMode::Auto if config.forcing.is_nonincreasing() => CertificateMode::Monotone,
        CertificateMode::Auto => CertificateMode::Antidamping,
        m => m,
    };
    let sector = sector_params(&config.g)?;
    let length = config.domain.length;
    match mode {
        CertificateMode::Monotone => {
            if !config.forcing.is_nonincreasing() {
                return Err(Error::HypothesisViolated(
                    "monotone certificate needs F nonincreasing".into(),
                ));
            }
            let cert = if config.certificate.grid_search {
                search_monotone_certificate(&sector, length)?
            } else {
                let rho = WeightRho::new(config.certificate.rho0, config.certificate.rho_l, length)?;
                build_monotone_certificate(&sector, &rho)?
            };
            Ok(Some(Certificate::Monotone(cert)))
        }
        _ => {
            let lip = lipschitz_constant(&config.forcing)?;
            let q = lip.q_global.ok_or_else(|| {
                Error::HypothesisViolated("F must be globally Lipschitz".into())
            })?;
            Ok(Some(Certificate::AntiDamping(build_antidamping_certificate(q, &sector, length)?)))
        }
    }
}

fn failed_checklist(config: &ScenarioConfig) -> Option<Vec<HypothesisCheck>> {
    let sector = sector_params(&config.g).ok()?;
    let q = lipschitz_constant(&config.forcing).ok()?.q_global?;
    match config.certificate.mode {
        CertificateMode::Antidamping => Some(antidamping_hypotheses(q, &sector)),
        CertificateMode::Auto if !config.forcing.is_nonincreasing() => Some(antidamping_hypotheses(q, &sector)),
        _ => None,
    }
}

fn weight_for(config: &ScenarioConfig, cert: Option<&Certificate>) -> Result<WeightRho> {
    Ok(match cert {
        Some(Certificate::Monotone(c)) => c.rho,
        Some(Certificate::AntiDamping(c)) => c.rho,
        None => WeightRho::new(config.certificate.rho0, config.certificate.rho_l, config.domain.length)?,
    })
}

struct RunData {
    trajectory: Trajectory,
    gamma: Vec<f64>,
    sandwich: Option<SandwichReport>,
    boundary_warning: bool,
    initial_amplitude: f64,
}

fn run(config: &ScenarioConfig, cert: Option<&Certificate>) -> Result<RunData> {
    let grid = config.grid()?;
    let solver = config.solver_config()?;
    let init = make_initial(&config.init, &grid)?;
    let rho = weight_for(config, cert)?;
    let bounds = match cert {
        Some(Certificate::AntiDamping(c)) => Some((c.m1, c.m2)),
        _ => None,
    };
    let mut gamma = Vec::new();
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    let mut scratch = FieldState::zeros(&grid);
    let trajectory = simulate_observed(
        &init.state,
        &config.g,
        &config.forcing,
        &grid,
        &solver,
        &mut |_, _, u, v| {
            scratch.u.copy_from_slice(u);
            scratch.v.copy_from_slice(v);
            let gam = lyapunov_gamma(&scratch, &rho, &grid).unwrap_or(f64::NAN);
            gamma.push(gam);
            if let Some((m1, m2)) = bounds {
                let e = energy(&scratch, &grid).map(|e| e.total).unwrap_or(f64::NAN);
                lower = lower.min(gam - m1 * e);
                upper = upper.min(m2 * e - gam);
            }
        },
    )?;
    let sandwich = bounds.map(|(m1, m2)| {
        let tol = 1e-12 * trajectory.initial_energy().max(1.0);
        SandwichReport {
            m1,
            m2,
            holds: lower >= -tol && upper >= -tol,
            lower_margin: lower,
            upper_margin: upper,
        }
    });
    Ok(RunData {
        trajectory,
        gamma,
        sandwich,
        boundary_warning: init.boundary_warning,
        initial_amplitude: config.init.amplitude(),
    })
}

fn attractivity(
    traj: &Trajectory,
    envelope: &DecayEnvelope,
) -> Result<Option<AttractivityReport>> {
    if traj.grid.n_cells() > EnergyPencil::MAX_CELLS {
        return Ok(None);
    }
    let pencil = EnergyPencil::new(&traj.grid)?;
    let lemma = distance_lemma_constant(&traj.grid)?;
    let m_prime = attractivity_constant(&lemma, envelope);
    let e0 = traj.initial_energy();
    let mut report = AttractivityReport {
        k: lemma.k,
        m_prime,
        holds: true,
        worst_margin: f64::INFINITY,
        worst_time: 0.0,
    };
    for snap in &traj.snapshots {
        let d = pencil.distance_to_sublevel(&snap.state, envelope.e_s)?;
        let rhs = m_prime * (-envelope.mu * snap.t).exp() * (e0 - envelope.e_s).max(0.0);
        let margin = DEFAULT_SLACK * rhs + 1e-12 - d * d;
        if margin < report.worst_margin {
            report.worst_margin = margin;
            report.worst_time = snap.t;
        }
    }
    report.holds = report.worst_margin >= 0.0;
    Ok(Some(report))
}

/// Fills every trajectory-derived field of `report`.
fn analyze(config: &ScenarioConfig, data: &RunData, cert: Option<&Certificate>, report: &mut RunReport) -> Result<()> {
    let traj = &data.trajectory;
    let energies = traj.total_energies();
    report.dt = Some(traj.dt);
    report.n_steps = Some(traj.times.len() - 1);
    report.boundary_warning = data.boundary_warning;
    report.initial_energy = energies.first().copied();
    report.final_energy = energies.last().copied();
    report.energy_identity_max = Some(max_abs(&energy_identity_residual(traj)));
    let rho = weight_for(config, cert)?;
    report.multiplier_identity_max = Some(multiplier_identity_residual(traj, &rho)?);
    report.neumann_residual_max = Some(
        traj.traces
            .iter()
            .map(|t| (t.dxu_l + t.g_of_vl).abs())
            .fold(0.0, f64::max),
    );
    let threshold = 1e-4 * data.initial_amplitude.abs().max(f64::MIN_POSITIVE);
    report.stationary_limit = Some(stationary_limit(traj, threshold)?);
    report.gamma_sandwich = data.sandwich;

    let e_s = cert.map_or(0.0, |c| c.envelope().e_s);
    match fit_decay_rate(&traj.times, &energies, e_s, FIT_FLOOR, 2.0 * config.domain.length) {
        Ok(fit) => report.decay_fit = Some(fit),
        Err(e) => report.fit_error = Some(e.to_string()),
    }
    if let Some(c) = cert {
        let envelope = c.envelope();
        report.bound = Some(check_decay_bound(&traj.times, &energies, &envelope, DEFAULT_SLACK));
        report.mu_ratio = report.decay_fit.filter(|_| envelope.mu > 0.0).map(|f| f.mu_obs / envelope.mu);
        report.attractivity = attractivity(traj, &envelope)?;
    }
    Ok(())
}

fn energy_csv(data: &RunData, stride: usize) -> String {
    let traj = &data.trajectory;
    let mut s = String::from("t,E_total,E_pot,E_kin,E_bnd,Gamma_rho\n");
    let last = traj.times.len() - 1;
    for (i, (t, e)) in traj.times.iter().zip(&traj.energies).enumerate() {
        if i % stride == 0 || i == last {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                num(*t),
                num(e.total),
                num(e.potential),
                num(e.kinetic),
                num(e.boundary_kinetic),
                num(data.gamma[i])
            );
        }
    }
    s
}

fn traces_csv(traj: &Trajectory, stride: usize) -> String {
    let mut s = String::from("t,u0,v0,dxu0,vL,dxuL,g_vL,F_v0\n");
    let last = traj.traces.len() - 1;
    for (i, r) in traj.traces.iter().enumerate() {
        if i % stride == 0 || i == last {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                num(r.t),
                num(r.u0),
                num(r.v0),
                num(r.dxu0),
                num(r.v_l),
                num(r.dxu_l),
                num(r.g_of_vl),
                num(r.f_of_v0)
            );
        }
    }
    s
}

fn snapshots_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,x,u,v\n");
    let x = traj.grid.nodes();
    for snap in &traj.snapshots {
        for (j, &xj) in x.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                num(snap.t),
                num(xj),
                num(snap.state.u[j]),
                num(snap.state.v[j])
            );
        }
    }
    s
}

fn new_report(command: &str, config: &ScenarioConfig) -> RunReport {
    RunReport {
        command: command.into(),
        scenario_hash: config.hash(),
        n_cells: config.domain.n_cells,
        ..RunReport::default()
    }
}

fn write_series(config: &ScenarioConfig, data: &RunData, out: &Path, files: &mut Vec<PathBuf>) -> Result<()> {
    let stride = config.domain.sample_stride;
    write_file(out, "energy.csv", &energy_csv(data, stride), files)?;
    write_file(out, "traces.csv", &traces_csv(&data.trajectory, stride), files)?;
    if config.output.emit_snapshots {
        write_file(out, "snapshots.csv", &snapshots_csv(&data.trajectory), files)?;
    }
    Ok(())
}

/// Runs the scenario and writes its series. Certificate-dependent fields are
/// filled when the config's certificate is feasible.
pub fn cmd_simulate(config: &ScenarioConfig, out: &Path) -> Result<Outcome> {
    let mut report = new_report("simulate", config);
    let mut files = Vec::new();
    let cert = match certify(config) {
        Ok(c) => c,
        Err(e) => {
            report.certificate_error = Some(e.to_string());
            None
        }
    };
    report.certificate = cert.clone();
    match run(config, cert.as_ref()) {
        Ok(data) => {
            analyze(config, &data, cert.as_ref(), &mut report)?;
            write_series(config, &data, out, &mut files)?;
        }
        Err(e) => {
            report.exit_status = e.exit_code();
            report.solver_error = Some(e.to_string());
        }
    }
    write_report(out, &report, &mut files)?;
    Ok(Outcome { exit_code: report.exit_status, report, files })
}

/// Writes `certificate.json` when feasible; exit code 2 otherwise.
pub fn cmd_certify(config: &ScenarioConfig, out: &Path) -> Result<Outcome> {
    let mut report = new_report("certify", config);
    let mut files = Vec::new();
    match certify(config) {
        Ok(Some(cert)) => {
            write_file(out, "certificate.json", &serde_json::to_string_pretty(&cert)?, &mut files)?;
            report.certificate = Some(cert);
        }
        Ok(None) => {
            return Err(Error::Config("certificate.mode is none; nothing to certify".into()));
        }
        Err(e) => {
            report.exit_status = e.exit_code();
            report.certificate_error = Some(e.to_string());
            report.hypotheses = failed_checklist(config);
        }
    }
    write_report(out, &report, &mut files)?;
    Ok(Outcome { exit_code: report.exit_status, report, files })
}

/// Simulates, certifies and checks every bound. `supplied` replaces the
/// computed certificate's constants (the hypotheses are still checked on the
/// config).
pub fn cmd_verify(config: &ScenarioConfig, out: &Path, supplied: Option<Certificate>) -> Result<Outcome> {
    let mut report = new_report("verify", config);
    let mut files = Vec::new();
    let computed = match certify(config) {
        Ok(Some(c)) => c,
        Ok(None) => return Err(Error::Config("verify needs certificate.mode other than none".into())),
        Err(e) => {
            report.exit_status = e.exit_code();
            report.certificate_error = Some(e.to_string());
            report.hypotheses = failed_checklist(config);
            write_report(out, &report, &mut files)?;
            return Ok(Outcome { exit_code: report.exit_status, report, files });
        }
    };
    let cert = supplied.unwrap_or(computed);
    report.certificate = Some(cert.clone());
    match run(config, Some(&cert)) {
        Ok(data) => {
            analyze(config, &data, Some(&cert), &mut report)?;
            write_series(config, &data, out, &mut files)?;
            let bound_ok = report.bound.is_some_and(|b| b.holds);
            let attr_ok = report.attractivity.is_none_or(|a| a.holds);
            let sandwich_ok = report.gamma_sandwich.is_none_or(|s| s.holds);
            report.exit_status = if bound_ok && attr_ok && sandwich_ok { EXIT_OK } else { EXIT_BOUND_VIOLATION };
        }
        Err(e) => {
            report.exit_status = e.exit_code();
            report.solver_error = Some(e.to_string());
        }
    }
    write_report(out, &report, &mut files)?;
    Ok(Outcome { exit_code: report.exit_status, report, files })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub params: Vec<f64>,
    pub mu_cert: Option<f64>,
    pub mu_obs: Option<f64>,
    pub e_s: Option<f64>,
    pub bound_holds: Option<bool>,
    pub final_dist_stationary: Option<f64>,
    pub status: String,
}

fn sweep_row(base: &ScenarioConfig, names: &[String], point: &[f64]) -> SweepRow {
    let mut row = SweepRow {
        params: point.to_vec(),
        mu_cert: None,
        mu_obs: None,
        e_s: None,
        bound_holds: None,
        final_dist_stationary: None,
        status: "ok".into(),
    };
    let mut config = base.clone();
    for (name, &value) in names.iter().zip(point) {
        match apply_parameter(&config, name, value) {
            Ok(c) => config = c,
            Err(e) => {
                row.status = format!("config_error: {e}");
                return row;
            }
        }
    }
    let cert = match certify(&config) {
        Ok(c) => c,
        Err(e) => {
            row.status = match e {
                Error::HypothesisViolated(_) | Error::NoValidSector(_) => "certificate_infeasible".into(),
                _ => format!("certificate_error: {e}"),
            };
            None
        }
    };
    if let Some(c) = &cert {
        let env = c.envelope();
        row.mu_cert = Some(env.mu);
        row.e_s = Some(env.e_s);
    }
    let grid = match config.grid() {
        Ok(g) => g,
        Err(e) => {
            row.status = format!("config_error: {e}");
            return row;
        }
    };
    let result = config.solver_config().and_then(|solver| {
        let init = make_initial(&config.init, &grid)?;
        simulate_observed(&init.state, &config.g, &config.forcing, &grid, &solver, &mut |_, _, _, _| {})
    });
    match result {
        Ok(traj) => {
            let energies = traj.total_energies();
            let e_s = row.e_s.unwrap_or(0.0);
            row.mu_obs = fit_decay_rate(&traj.times, &energies, e_s, FIT_FLOOR, 2.0 * config.domain.length)
                .ok()
                .map(|f| f.mu_obs);
            if let Some(c) = &cert {
                row.bound_holds = Some(check_decay_bound(&traj.times, &energies, &c.envelope(), DEFAULT_SLACK).holds);
            }
            row.final_dist_stationary = dist_to_stationary(traj.final_state(), &grid).ok();
        }
        Err(e) => {
            if cert.is_some() {
                row.bound_holds = Some(false);
            }
            row.status = match e {
                Error::BlowUp { .. } => "blow_up".into(),
                other => format!("solver_error: {other}"),
            };
        }
    }
    row
}

/// Worker count: `WAVEGUARD_THREADS` if set and positive, else rayon's default.
pub fn sweep_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    let names = spec.names();
    let points = spec.points();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| points.par_iter().map(|p| sweep_row(base, &names, p)).collect()))
}

pub fn cmd_sweep(config: &ScenarioConfig, spec: &SweepSpec, out: &Path) -> Result<Outcome> {
    let rows = run_sweep(config, spec, sweep_threads()?)?;
    let mut s = String::new();
    for name in spec.names() {
        let _ = write!(s, "{name},");
    }
    s.push_str("mu_cert,mu_obs,E_S,bound_holds,final_dist_stationary,status\n");
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    for row in &rows {
        for p in &row.params {
            let _ = write!(s, "{},", num(*p));
        }
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            opt(row.mu_cert),
            opt(row.mu_obs),
            opt(row.e_s),
            row.bound_holds.map(|b| b.to_string()).unwrap_or_default(),
            opt(row.final_dist_stationary),
            row.status.replace(',', ";")
        );
    }
    let mut files = Vec::new();
    write_file(out, "summary.csv", &s, &mut files)?;
    let report = new_report("sweep", config);
    Ok(Outcome { exit_code: EXIT_OK, report, files })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub n_cells: usize,
    pub t: f64,
    pub err_u: f64,
    pub err_v: f64,
    pub energy: f64,
    pub oracle_energy: f64,
}

/// Max-norm and energy errors against the exact transparent-case solution at
/// every stored state with `t ≤ t_max`.
pub fn oracle_comparison(config: &ScenarioConfig, n_cells: usize) -> Result<Vec<OracleRow>> {
    let mut c = config.clone();
    c.domain.n_cells = n_cells;
    let grid = c.grid()?;
    let profile = check_transparent_case(&c.g, &c.forcing, &c.init, &grid)?;
    let solver = c.solver_config()?;
    let t_max = c.oracle.t_max.unwrap_or(c.domain.t_final);
    let init = make_initial(&c.init, &grid)?;
    let traj = simulate_observed(&init.state, &c.g, &c.forcing, &grid, &solver, &mut |_, _, _, _| {})?;
    let mut rows = Vec::new();
    for snap in traj.snapshots.iter().filter(|s| s.t <= t_max + 1e-12) {
        let exact = characteristics_oracle(&profile, &grid, snap.t)?;
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        rows.push(OracleRow {
            n_cells,
            t: snap.t,
            err_u: diff(&snap.state.u, &exact.u),
            err_v: diff(&snap.state.v, &exact.v),
            energy: energy(&snap.state, &grid)?.total,
            oracle_energy: energy(&exact, &grid)?.total,
        });
    }
    Ok(rows)
}

pub fn cmd_oracle(config: &ScenarioConfig, out: &Path) -> Result<Outcome> {
    let mut files = Vec::new();
    let rows = oracle_comparison(config, config.domain.n_cells)?;
    let mut s = String::from("N,t,err_u,err_v,energy,oracle_energy,energy_err\n");
    for r in &rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.n_cells,
            num(r.t),
            num(r.err_u),
            num(r.err_v),
            num(r.energy),
            num(r.oracle_energy),
            num((r.energy - r.oracle_energy).abs())
        );
    }
    write_file(out, "comparison.csv", &s, &mut files)?;

    if !config.oracle.convergence_n.is_empty() {
        let mut table = String::from("N,max_err_u,order\n");
        let mut prev: Option<(usize, f64)> = None;
        for &n in &config.oracle.convergence_n {
            let err = oracle_comparison(config, n)?
                .iter()
                .fold(0.0f64, |m, r| m.max(r.err_u));
            let order = prev
                .map(|(pn, pe)| num((pe / err).ln() / (n as f64 / pn as f64).ln()))
                .unwrap_or_default();
            let _ = writeln!(table, "{n},{},{order}", num(err));
            prev = Some((n, err));
        }
        write_file(out, "convergence.csv", &table, &mut files)?;
    }
    let report = new_report("oracle", config);
    Ok(Outcome { exit_code: EXIT_OK, report, files })
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    crate::config::parse_config(&text)
}

pub fn load_certificate(path: &Path) -> Result<Certificate> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("certificate {}: {e}", path.display())))
}

/// Output directory: explicit argument, then the config's, then `out`.
pub fn output_dir(config: &ScenarioConfig, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| config.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}
