//! The five studies. Every writer emits UTF-8 with LF line endings, and no
//! output depends on thread count or timing except `convergence_timing.csv`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kbavg::dynamics::{
    amplitude_errors, horizon_theta, integrate_effective, integrate_fast, integrate_interaction, integrate_slow,
    sup_distance, Form, SimulationProblem, Trajectory,
};
use kbavg::exec::Execution;
use kbavg::field::{norm, GenericField, PolynomialField, VectorField};
use kbavg::hamiltonian::{action_drift, hamiltonian_field, write_drift_csv, DriftRow, HamiltonianPoly};
use kbavg::resonance::{
    is_nonresonant, numeric_average, resonance_table, resonant_part, write_resonance_csv, AveragingOptions,
    FrequencyVector,
};
use kbavg::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Study, DEFAULT_AVERAGE_TOL, MIN_NONRESONANCE_BOUND};
use crate::CliError;

pub struct RunContext {
    pub out_dir: PathBuf,
    pub exec: Execution,
}

pub fn run_study(study: Study, cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&ctx.out_dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", ctx.out_dir.display())))?;
    match study {
        Study::ResonantPart => cmd_resonant_part(cfg, ctx),
        Study::Average => cmd_average(cfg, ctx),
        Study::Simulate => cmd_simulate(cfg, ctx),
        Study::Convergence => cmd_convergence(cfg, ctx),
        Study::HamiltonianDrift => cmd_hamiltonian_drift(cfg, ctx),
    }
}

struct Outputs<'a> {
    dir: &'a Path,
    written: Vec<PathBuf>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path) -> Self {
        Outputs {
            dir,
            written: Vec::new(),
        }
    }

    fn write_with<F>(&mut self, name: &str, fill: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let mut buf = Vec::new();
        fill(&mut buf).map_err(|e| CliError::Config(format!("cannot format {name}: {e}")))?;
        let path = self.dir.join(name);
        fs::write(&path, buf).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write_with(name, |buf| {
            serde_json::to_writer_pretty(&mut *buf, value)?;
            buf.push(b'\n');
            Ok(())
        })
    }

    fn text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        self.write_with(name, |buf| buf.write_all(text.as_bytes()))
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn cmd_resonant_part(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let field = cfg.field()?;
    let freqs = cfg.frequencies(field.dim())?;
    let tol = cfg.tol.unwrap_or_else(|| freqs.default_tolerance());
    let table = resonance_table(&field, &freqs, tol)?;
    let res = resonant_part(&field, &freqs, tol)?;
    let mut out = Outputs::new(&ctx.out_dir);
    out.write_with("resonance.csv", |buf| write_resonance_csv(&table, buf))?;
    let mut doc = res.to_json();
    doc.push('\n');
    out.text("resonant_part.json", &doc)?;
    out.json(
        "run.json",
        &json!({
            "study": Study::ResonantPart.to_string(),
            "dim": field.dim(),
            "frequencies": freqs,
            "exact_mode": freqs.is_exact(),
            "tolerance": tol,
            "monomials": table.len(),
            "resonant": table.iter().filter(|r| r.resonant).count(),
        }),
    )?;
    Ok(out.written)
}

/// Symbolic (resonant part) and numeric (generic path) averages at each point.
pub struct AverageRow {
    pub point: Vec<Complex64>,
    pub symbolic: Vec<Complex64>,
    pub numeric: Vec<Complex64>,
}

impl AverageRow {
    pub fn discrepancy(&self) -> f64 {
        self.symbolic
            .iter()
            .zip(&self.numeric)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub fn average_study(
    field: &PolynomialField,
    freqs: &FrequencyVector,
    points: &[Vec<Complex64>],
    tol: f64,
    exec: Execution,
) -> Result<Vec<AverageRow>, CliError> {
    let res = resonant_part(field, freqs, freqs.default_tolerance())?;
    let generic = GenericField::from_polynomial(field);
    let opts = AveragingOptions {
        exec: Execution::Sequential,
        ..AveragingOptions::default()
    };
    exec.map(points, |a| -> Result<AverageRow, CliError> {
        Ok(AverageRow {
            point: a.clone(),
            symbolic: res.eval(a)?,
            numeric: numeric_average(&generic, freqs, a, tol, &opts)?,
        })
    })
    .into_iter()
    .collect()
}

pub fn cmd_average(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let field = cfg.field()?;
    let freqs = cfg.frequencies(field.dim())?;
    let tol = cfg.tol.unwrap_or(DEFAULT_AVERAGE_TOL);
    if !(tol > 0.0) {
        return Err(CliError::Config(format!("averaging tolerance {tol} must be positive")));
    }
    let points = cfg.average_points(field.dim())?;
    let rows = average_study(&field, &freqs, &points, tol, ctx.exec)?;
    let mut out = Outputs::new(&ctx.out_dir);
    out.write_with("average.csv", |buf| {
        let mut w = csv_writer(buf);
        w.write_record([
            "point",
            "j",
            "symbolic_re",
            "symbolic_im",
            "numeric_re",
            "numeric_im",
            "abs_diff",
        ])?;
        for (k, row) in rows.iter().enumerate() {
            for j in 0..row.symbolic.len() {
                let (s, n) = (row.symbolic[j], row.numeric[j]);
                w.write_record([
                    k.to_string(),
                    j.to_string(),
                    s.re.to_string(),
                    s.im.to_string(),
                    n.re.to_string(),
                    n.im.to_string(),
                    (s - n).norm().to_string(),
                ])?;
            }
        }
        w.flush()
    })?;
    let max_discrepancy = rows.iter().map(AverageRow::discrepancy).fold(0.0, f64::max);
    out.json(
        "run.json",
        &json!({
            "study": Study::Average.to_string(),
            "dim": field.dim(),
            "frequencies": freqs,
            "tolerance": tol,
            "seed": cfg.seed(),
            "points": rows.iter().map(|r| r.point.iter().copied().map(complex_pair).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "max_discrepancy": max_discrepancy,
        }),
    )?;
    Ok(out.written)
}

/// `θ` from the config or from `R / X(2R)`, plus whether it was overridden.
fn resolve_theta(cfg: &ExperimentConfig, field: &PolynomialField, v0: &[Complex64]) -> Result<(f64, bool), CliError> {
    match cfg.theta {
        Some(t) if t > 0.0 && t.is_finite() => Ok((t, true)),
        Some(t) => Err(CliError::Config(format!("theta {t} must be positive and finite"))),
        None => {
            let theta = horizon_theta(norm(v0), |r| field.chi(r))?;
            if !theta.is_finite() {
                return Err(CliError::Config(
                    "unbounded horizon for a zero field: set \"theta\"".into(),
                ));
            }
            Ok((theta, false))
        }
    }
}

fn problem(
    cfg: &ExperimentConfig,
    field: &PolynomialField,
    freqs: &FrequencyVector,
    eps: f64,
    v0: &[Complex64],
) -> Result<SimulationProblem, CliError> {
    let mut prob = SimulationProblem::new(field.clone(), freqs.clone(), eps, v0.to_vec())?;
    if let Some(t) = cfg.theta {
        prob = prob.with_theta(t)?;
    }
    if let Some(t) = cfg.fast_horizon {
        prob = prob.with_fast_horizon(t)?;
    }
    if cfg.backward {
        prob = prob.backward();
    }
    Ok(prob)
}

fn write_trajectory(out: &mut Outputs, name: &str, traj: &Trajectory) -> Result<(), CliError> {
    out.write_with(name, |buf| traj.write_csv(buf))
}

pub fn cmd_simulate(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let form = cfg
        .form
        .ok_or_else(|| CliError::Config("simulate needs \"form\"".into()))?;
    let field = cfg.field()?;
    let freqs = cfg.frequencies(field.dim())?;
    let v0 = cfg.v0(field.dim())?;
    let mut out = Outputs::new(&ctx.out_dir);
    let mut runs = Vec::new();
    if form == Form::Effective {
        let (theta, overridden) = resolve_theta(cfg, &field, &v0)?;
        let eff = resonant_part(&field, &freqs, freqs.default_tolerance())?;
        let span = if cfg.backward { -theta } else { theta };
        let traj = integrate_effective(&eff, &v0, span, cfg.dtau)?;
        let name = "trajectory_effective.csv".to_string();
        write_trajectory(&mut out, &name, &traj)?;
        runs.push(json!({
            "file": name,
            "theta": theta,
            "theta_overridden": overridden,
            "samples": traj.len(),
            "final_state": traj.last_state().iter().copied().map(complex_pair).collect::<Vec<_>>(),
        }));
    } else {
        let epsilons = cfg.epsilons(1, form == Form::Fast)?;
        let trajectories = ctx
            .exec
            .map(&epsilons, |&eps| -> Result<(SimulationProblem, Trajectory), CliError> {
                let prob = problem(cfg, &field, &freqs, eps, &v0)?;
                let traj = match form {
                    Form::Fast => integrate_fast(&prob, cfg.dt)?,
                    Form::Slow => integrate_slow(&prob, cfg.dtau)?,
                    Form::Interaction => integrate_interaction(&prob, cfg.dtau)?,
                    Form::Effective => unreachable!("handled above"),
                };
                Ok((prob, traj))
            });
        for (k, result) in trajectories.into_iter().enumerate() {
            let (prob, traj) = result?;
            let name = format!("trajectory_{form}_{k}.csv");
            write_trajectory(&mut out, &name, &traj)?;
            runs.push(json!({
                "file": name,
                "epsilon": prob.epsilon(),
                "theta": prob.theta(),
                "theta_overridden": prob.theta_overridden(),
                "radius": prob.radius(),
                "samples": traj.len(),
                "final_time": traj.last_time(),
                "final_state": traj.last_state().iter().copied().map(complex_pair).collect::<Vec<_>>(),
            }));
        }
    }
    out.json(
        "run.json",
        &json!({
            "study": Study::Simulate.to_string(),
            "form": form.to_string(),
            "frequencies": freqs,
            "v0": v0.iter().copied().map(complex_pair).collect::<Vec<_>>(),
            "runs": runs,
        }),
    )?;
    Ok(out.written)
}

/// One epsilon of a convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    /// `sup_τ |a^ε(τ) − a⁰(τ)|`, absent when the row failed.
    pub sup_distance: Option<f64>,
    /// Per component `sup_τ ||a^ε_j| − |a⁰_j||`, equal to the amplitude error
    /// of `v^ε` since rotations preserve `|·|`.
    pub amplitude_errors: Vec<f64>,
    pub failure: Option<String>,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub theta: f64,
    pub theta_overridden: bool,
    pub lemma_theta: f64,
    /// Rows by decreasing epsilon.
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    /// True when every row succeeded and distances strictly decrease.
    pub fn strictly_decreasing(&self) -> bool {
        let d: Vec<Option<f64>> = self.rows.iter().map(|r| r.sup_distance).collect();
        d.iter().all(Option::is_some) && d.windows(2).all(|w| w[1] < w[0])
    }
}

/// Integrates the interaction equation per epsilon and the effective
/// equation once, over `[0, θ]`.
pub fn convergence_study(
    field: &PolynomialField,
    freqs: &FrequencyVector,
    v0: &[Complex64],
    epsilons: &[f64],
    theta: Option<f64>,
    dtau: Option<f64>,
    exec: Execution,
) -> Result<ConvergenceReport, CliError> {
    if epsilons.len() < 2 {
        return Err(CliError::Config(format!(
            "convergence needs at least 2 epsilon values, found {}",
            epsilons.len()
        )));
    }
    let lemma_theta = horizon_theta(norm(v0), |r| field.chi(r))?;
    let (theta, theta_overridden) = match theta {
        Some(t) => (t, true),
        None if lemma_theta.is_finite() => (lemma_theta, false),
        None => {
            return Err(CliError::Config(
                "unbounded horizon for a zero field: set \"theta\"".into(),
            ))
        }
    };
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let eff = resonant_part(field, freqs, freqs.default_tolerance())?;
    let a0 = integrate_effective(&eff, v0, theta, dtau)?;
    let rows = exec.map(&eps, |&e| {
        let start = Instant::now();
        let outcome = SimulationProblem::new(field.clone(), freqs.clone(), e, v0.to_vec())
            .and_then(|p| p.with_theta(theta))
            .and_then(|p| integrate_interaction(&p, dtau))
            .and_then(|a| Ok((sup_distance(&a, &a0)?, amplitude_errors(&a, &a0)?)));
        let wall_seconds = start.elapsed().as_secs_f64();
        match outcome {
            Ok((d, amp)) => ConvergenceRow {
                epsilon: e,
                sup_distance: Some(d),
                amplitude_errors: amp,
                failure: None,
                wall_seconds,
            },
            Err(err) => ConvergenceRow {
                epsilon: e,
                sup_distance: None,
                amplitude_errors: Vec::new(),
                failure: Some(err.to_string()),
                wall_seconds,
            },
        }
    });
    Ok(ConvergenceReport {
        theta,
        theta_overridden,
        lemma_theta,
        rows,
    })
}

pub fn cmd_convergence(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let field = cfg.field()?;
    let freqs = cfg.frequencies(field.dim())?;
    let v0 = cfg.v0(field.dim())?;
    let epsilons = cfg.epsilons(2, false)?;
    let report = convergence_study(&field, &freqs, &v0, &epsilons, cfg.theta, cfg.dtau, ctx.exec)?;
    let n = field.dim();
    let mut out = Outputs::new(&ctx.out_dir);
    out.write_with("convergence.csv", |buf| {
        let mut w = csv_writer(buf);
        let mut header = vec!["epsilon".to_string(), "sup_distance".to_string()];
        header.extend((1..=n).map(|j| format!("amplitude_error_{j}")));
        header.push("status".to_string());
        w.write_record(&header)?;
        for row in &report.rows {
            let mut rec = vec![
                row.epsilon.to_string(),
                row.sup_distance.map(|d| d.to_string()).unwrap_or_default(),
            ];
            for j in 0..n {
                rec.push(row.amplitude_errors.get(j).map(|x| x.to_string()).unwrap_or_default());
            }
            rec.push(row.failure.clone().unwrap_or_else(|| "ok".into()));
            w.write_record(&rec)?;
        }
        w.flush()
    })?;
    out.write_with("convergence_plot.csv", |buf| {
        let mut w = csv_writer(buf);
        w.write_record(["epsilon", "sup_distance", "log10_epsilon", "log10_sup_distance"])?;
        for row in &report.rows {
            if let Some(d) = row.sup_distance {
                w.write_record([
                    row.epsilon.to_string(),
                    d.to_string(),
                    row.epsilon.log10().to_string(),
                    d.log10().to_string(),
                ])?;
            }
        }
        w.flush()
    })?;
    out.write_with("convergence_timing.csv", |buf| {
        let mut w = csv_writer(buf);
        w.write_record(["epsilon", "wall_seconds"])?;
        for row in &report.rows {
            w.write_record([row.epsilon.to_string(), format!("{:.6}", row.wall_seconds)])?;
        }
        w.flush()
    })?;
    out.json(
        "run.json",
        &json!({
            "study": Study::Convergence.to_string(),
            "frequencies": freqs,
            "v0": v0.iter().copied().map(complex_pair).collect::<Vec<_>>(),
            "theta": report.theta,
            "theta_overridden": report.theta_overridden,
            "lemma_theta": report.lemma_theta,
            "epsilons": report.rows.iter().map(|r| r.epsilon).collect::<Vec<_>>(),
            "strictly_decreasing": report.strictly_decreasing(),
            "failed_rows": report.rows.iter().filter(|r| r.failure.is_some()).count(),
        }),
    )?;
    Ok(out.written)
}

/// Checks `Λ·s ≠ 0` for all `0 < max|s_j| ≤ bound`; a resonant `Λ` is
/// refused with its witness.
pub fn certify_nonresonant(freqs: &FrequencyVector, bound: u32) -> Result<(), CliError> {
    if bound < MIN_NONRESONANCE_BOUND {
        return Err(CliError::Config(format!(
            "nonresonance bound {bound} is below the minimum {MIN_NONRESONANCE_BOUND}"
        )));
    }
    let cert = is_nonresonant(freqs, bound)?;
    if let Some(s) = &cert.witness {
        let s: Vec<String> = s.iter().map(|x| x.to_string()).collect();
        return Err(CliError::Config(format!(
            "frequencies are resonant: witness s=({}) satisfies Λ·s=0",
            s.join(",")
        )));
    }
    Ok(())
}

/// Integrates the fast Hamiltonian system per epsilon (decreasing) and
/// reports the action drift.
pub fn drift_study(
    h: &HamiltonianPoly,
    freqs: &FrequencyVector,
    z0: &[Complex64],
    epsilons: &[f64],
    theta: Option<f64>,
    bound: u32,
    exec: Execution,
) -> Result<Vec<DriftRow>, CliError> {
    certify_nonresonant(freqs, bound)?;
    let field = hamiltonian_field(h);
    let mut eps = epsilons.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    let drifts = exec.map(&eps, |&e| -> Result<Vec<f64>, CliError> {
        let mut prob = SimulationProblem::new(field.clone(), freqs.clone(), e, z0.to_vec())?;
        if let Some(t) = theta {
            prob = prob.with_theta(t)?;
        }
        Ok(action_drift(&integrate_fast(&prob, None)?))
    });
    let mut rows = Vec::new();
    for (e, d) in eps.iter().zip(drifts) {
        for (j, drift) in d?.into_iter().enumerate() {
            rows.push(DriftRow { j, drift, epsilon: *e });
        }
    }
    Ok(rows)
}

pub fn cmd_hamiltonian_drift(cfg: &ExperimentConfig, ctx: &RunContext) -> Result<Vec<PathBuf>, CliError> {
    let h = cfg.hamiltonian()?;
    let freqs = cfg.frequencies(h.dim())?;
    let z0 = cfg.v0(h.dim())?;
    let epsilons = cfg.epsilons(1, false)?;
    let bound = cfg.nonresonance_bound.unwrap_or(MIN_NONRESONANCE_BOUND);
    certify_nonresonant(&freqs, bound)?;
    if !cfg.acknowledge_bounded_certificate {
        return Err(CliError::Config(format!(
            "non-resonance is only certified up to |s| <= {bound}: set \"acknowledge_bounded_certificate\": true"
        )));
    }
    let rows = drift_study(&h, &freqs, &z0, &epsilons, cfg.theta, bound, ctx.exec)?;
    let field = hamiltonian_field(&h);
    let theta = resolve_theta(cfg, &field, &z0)?;
    let mut out = Outputs::new(&ctx.out_dir);
    out.write_with("action_drift.csv", |buf| write_drift_csv(&rows, buf))?;
    out.json(
        "run.json",
        &json!({
            "study": Study::HamiltonianDrift.to_string(),
            "frequencies": freqs,
            "nonresonance_bound": bound,
            "certificate": format!("no integer relation with max|s_j| <= {bound}"),
            "z0": z0.iter().copied().map(complex_pair).collect::<Vec<_>>(),
            "theta": theta.0,
            "theta_overridden": theta.1,
            "epsilons": epsilons,
        }),
    )?;
    Ok(out.written)
}
