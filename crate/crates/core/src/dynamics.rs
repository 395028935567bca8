//! Integration of the four equation forms and trajectory comparison.
//!
//! With `τ = εt` and `a = Φ_{τε⁻¹Λ} v` the forms are
//!
//! * fast:        `v' + iΛv = εP(v)`                    (time `t`)
//! * slow:        `∂_τ v + iε⁻¹Λv = P(v)`               (time `τ`)
//! * interaction: `∂_τ a = Φ_{τε⁻¹Λ} P(Φ_{−τε⁻¹Λ} a)`   (time `τ`)
//! * effective:   `∂_τ a = ⟨⟨P⟩⟩(a)`                     (time `τ`)
//!
//! All forms are stepped with fixed-step classical RK4. Step sizes are tied
//! to `max|λ_j|` and `ε` because the slow and interaction forms are stiff in
//! `ε⁻¹`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{distance, norm, Field, GenericField, VectorField};
use crate::resonance::{
    interaction_into, max_oscillation_rate, numeric_average, resonant_part, rotate_scaled, AveragingOptions,
    FrequencyVector,
};

/// Trajectories keep at most this many samples.
pub const MAX_SAMPLES: usize = 100_000;

/// States beyond `BLOW_UP_FACTOR · R` abort the integration.
pub const BLOW_UP_FACTOR: f64 = 2.2;

/// Steps are at most this fraction of the fastest time scale.
pub const STEP_FRACTION: f64 = 0.05;

/// Default steps advance the fastest phase by at most this many radians.
pub const PHASE_STEP: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Fast,
    Slow,
    Interaction,
    Effective,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Form::Fast => "fast",
            Form::Slow => "slow",
            Form::Interaction => "interaction",
            Form::Effective => "effective",
        };
        f.write_str(s)
    }
}

impl FromStr for Form {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Form::Fast),
            "slow" => Ok(Form::Slow),
            "interaction" => Ok(Form::Interaction),
            "effective" => Ok(Form::Effective),
            other => Err(Error::Parse(format!("unknown equation form {other:?}"))),
        }
    }
}

/// Existence horizon `θ = R / X(2R)` in slow time.
pub fn horizon_theta<C: Fn(f64) -> f64>(radius: f64, chi: C) -> Result<f64> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "radius {radius} must be finite and non-negative"
        )));
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    let x = chi(2.0 * radius);
    if x == 0.0 {
        // P vanishes on the ball: the solution never leaves it
        return Ok(f64::INFINITY);
    }
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "witness X(2R) = {x} must be positive for R = {radius}"
        )));
    }
    Ok(radius / x)
}

/// The perturbed system `v' + iΛv = εP(v)`, `v(0) = v0`, with its horizon.
#[derive(Clone, Debug)]
pub struct SimulationProblem {
    field: Field,
    freqs: FrequencyVector,
    epsilon: f64,
    v0: Vec<Complex64>,
    radius: f64,
    theta: f64,
    theta_overridden: bool,
    fast_horizon: Option<f64>,
    backward: bool,
}

impl SimulationProblem {
    /// `epsilon` must lie in `[0, 1]`; `ε = 0` is the unperturbed rotation and
    /// only the fast form can be integrated (see [`Self::with_fast_horizon`]).
    pub fn new(field: impl Into<Field>, freqs: FrequencyVector, epsilon: f64, v0: Vec<Complex64>) -> Result<Self> {
        let field = field.into();
        Error::check_dim(field.dim(), freqs.dim())?;
        Error::check_dim(field.dim(), v0.len())?;
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidArgument(format!("epsilon {epsilon} must lie in (0, 1]")));
        }
        if v0.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("initial state must be finite".into()));
        }
        let radius = norm(&v0);
        let theta = horizon_theta(radius, |r| field.chi(r))?;
        Ok(SimulationProblem {
            field,
            freqs,
            epsilon,
            v0,
            radius,
            theta,
            theta_overridden: false,
            fast_horizon: None,
            backward: false,
        })
    }

    /// Replaces the Lemma-type horizon by an explicit slow-time span.
    pub fn with_theta(mut self, theta: f64) -> Result<Self> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "theta {theta} must be finite and non-negative"
            )));
        }
        self.theta = theta;
        self.theta_overridden = true;
        Ok(self)
    }

    /// Sets the fast-time span directly; needed when `ε = 0`.
    pub fn with_fast_horizon(mut self, t_end: f64) -> Result<Self> {
        if !(t_end >= 0.0) || !t_end.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "fast horizon {t_end} must be finite and non-negative"
            )));
        }
        self.fast_horizon = Some(t_end);
        Ok(self)
    }

    /// Integrate over `[-θ, 0]` instead of `[0, θ]`.
    pub fn backward(mut self) -> Self {
        self.backward = true;
        self
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn freqs(&self) -> &FrequencyVector {
        &self.freqs
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn v0(&self) -> &[Complex64] {
        &self.v0
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_overridden(&self) -> bool {
        self.theta_overridden
    }

    pub fn is_backward(&self) -> bool {
        self.backward
    }

    /// `X(2R)` from the field's witness or coefficient bound.
    pub fn chi_2r(&self) -> f64 {
        self.field.chi(2.0 * self.radius)
    }

    /// End of the fast-time interval.
    pub fn fast_time_span(&self) -> Result<f64> {
        match self.fast_horizon {
            Some(t) => Ok(t),
            None if !self.theta.is_finite() => Err(Error::InvalidArgument(
                "unbounded horizon: set theta or a fast-time horizon".into(),
            )),
            None if self.epsilon > 0.0 => Ok(self.theta / self.epsilon),
            None => Err(Error::InvalidArgument(
                "epsilon = 0 needs an explicit fast-time horizon".into(),
            )),
        }
    }

    /// Slow-time span; equals `θ` unless a fast horizon was set.
    pub fn slow_time_span(&self) -> Result<f64> {
        match self.fast_horizon {
            Some(t) => Ok(t * self.epsilon),
            None if self.theta.is_finite() => Ok(self.theta),
            None => Err(Error::InvalidArgument(
                "unbounded horizon: set theta or a fast-time horizon".into(),
            )),
        }
    }

    fn oscillation_rate(&self) -> f64 {
        match &self.field {
            Field::Polynomial(p) => max_oscillation_rate(p, &self.freqs),
            Field::Generic(_) => self.freqs.max_abs(),
        }
    }

    fn guard(&self) -> f64 {
        BLOW_UP_FACTOR * self.radius
    }

    fn require_positive_epsilon(&self) -> Result<()> {
        if self.epsilon > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument("this form needs epsilon > 0".into()))
        }
    }

    /// Largest admissible fast-time step.
    pub fn fast_step_bound(&self) -> f64 {
        let rotation = STEP_FRACTION / self.freqs.max_abs();
        let perturbation = STEP_FRACTION / (self.epsilon * self.chi_2r());
        rotation.min(perturbation)
    }

    /// Default fast step: resolves the highest harmonic of `y^t` as well.
    pub fn default_fast_step(&self) -> f64 {
        (PHASE_STEP / self.oscillation_rate()).min(self.fast_step_bound())
    }

    /// Largest admissible slow-time step for the slow and interaction forms.
    pub fn slow_step_bound(&self) -> f64 {
        STEP_FRACTION * self.epsilon / self.freqs.max_abs()
    }

    pub fn default_slow_step(&self) -> f64 {
        (PHASE_STEP * self.epsilon / self.oscillation_rate())
            .min(self.slow_step_bound())
            .min(STEP_FRACTION / self.chi_2r())
    }

    /// The averaged field `⟨⟨P⟩⟩`: the resonant part for polynomial fields,
    /// a numerically averaged closure otherwise.
    pub fn effective_field(&self, tol: f64) -> Result<Field> {
        match &self.field {
            Field::Polynomial(p) => Ok(Field::Polynomial(resonant_part(
                p,
                &self.freqs,
                self.freqs.default_tolerance(),
            )?)),
            Field::Generic(g) => Ok(Field::Generic(averaged_generic(g, &self.freqs, tol))),
        }
    }
}

/// Wraps `⟨⟨g⟩⟩` as a generic field. Evaluation failures produce NaN, which
/// the integrators report as a blow-up.
pub fn averaged_generic(g: &GenericField, freqs: &FrequencyVector, tol: f64) -> GenericField {
    let inner = g.clone();
    let freqs = freqs.clone();
    let witness = g.witness().clone();
    GenericField::new(
        g.dim(),
        move |z, out| match numeric_average(&inner, &freqs, z, tol, &AveragingOptions::default()) {
            Ok(v) => out.copy_from_slice(&v),
            Err(_) => out.fill(Complex64::new(f64::NAN, f64::NAN)),
        },
        witness,
    )
}

/// Sampled solution of one of the equation forms.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    form: Form,
    times: Vec<f64>,
    states: Vec<Vec<Complex64>>,
    epsilon: Option<f64>,
}

impl Trajectory {
    pub fn new(form: Form, times: Vec<f64>, states: Vec<Vec<Complex64>>, epsilon: Option<f64>) -> Result<Self> {
        Error::check_dim(times.len(), states.len())?;
        if times.is_empty() {
            return Err(Error::InvalidArgument("trajectory is empty".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        let dim = states[0].len();
        for s in &states {
            Error::check_dim(dim, s.len())?;
            if s.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::InvalidArgument("trajectory states must be finite".into()));
            }
        }
        Ok(Trajectory {
            form,
            times,
            states,
            epsilon,
        })
    }

    pub fn form(&self) -> Form {
        self.form
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[Vec<Complex64>] {
        &self.states
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn first_state(&self) -> &[Complex64] {
        &self.states[0]
    }

    pub fn last_state(&self) -> &[Complex64] {
        &self.states[self.states.len() - 1]
    }

    pub fn last_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    /// Largest `|state|` along the trajectory.
    pub fn max_norm(&self) -> f64 {
        self.states.iter().map(|s| norm(s)).fold(0.0, f64::max)
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn interpolate(&self, t: f64) -> Option<Vec<Complex64>> {
        let first = self.times[0];
        let last = self.last_time();
        let slack = 1e-12 * (1.0 + first.abs().max(last.abs()));
        if t < first - slack || t > last + slack {
            return None;
        }
        let idx = self.times.partition_point(|&s| s < t);
        if idx == 0 {
            return Some(self.states[0].clone());
        }
        if idx >= self.times.len() {
            return Some(self.last_state().to_vec());
        }
        if self.times[idx] == t {
            return Some(self.states[idx].clone());
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let w = (t - t0) / (t1 - t0);
        Some(
            self.states[idx - 1]
                .iter()
                .zip(&self.states[idx])
                .map(|(a, b)| a * (1.0 - w) + b * w)
                .collect(),
        )
    }

    /// CSV with a `# form=…,epsilon=…,dim=…` line, then columns
    /// `time, re_1, im_1, …, re_n, im_n, abs_1, …, abs_n`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let eps = self.epsilon.map(|e| e.to_string()).unwrap_or_else(|| "none".into());
        writeln!(out, "# form={},epsilon={},dim={}", self.form, eps, self.dim())?;
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let n = self.dim();
        let mut header = vec!["time".to_string()];
        for j in 1..=n {
            header.push(format!("re_{j}"));
            header.push(format!("im_{j}"));
        }
        for j in 1..=n {
            header.push(format!("abs_{j}"));
        }
        w.write_record(&header)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![t.to_string()];
            for c in s {
                row.push(c.re.to_string());
                row.push(c.im.to_string());
            }
            for c in s {
                row.push(c.norm().to_string());
            }
            w.write_record(&row)?;
        }
        w.flush()
    }
}

/// Fixed-step classical RK4 from `t = 0` to `span` (negative spans integrate
/// the negated field forward in `-t`).
#[allow(clippy::too_many_arguments)]
fn rk4<F>(
    form: Form,
    epsilon: Option<f64>,
    y0: &[Complex64],
    span: f64,
    max_step: f64,
    guard: f64,
    mut rhs: F,
) -> Result<Trajectory>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
{
    let n = y0.len();
    let backward = span < 0.0;
    let length = span.abs();
    let steps = if length == 0.0 {
        0
    } else {
        ((length / max_step).ceil() as usize).max(1)
    };
    let h = if steps == 0 { 0.0 } else { length / steps as f64 };
    let stride = steps.div_ceil(MAX_SAMPLES - 1).max(1);
    let sign = if backward { -1.0 } else { 1.0 };

    let mut f = |s: f64, y: &[Complex64], out: &mut [Complex64]| {
        rhs(sign * s, y, out);
        if backward {
            out.iter_mut().for_each(|v| *v = -*v);
        }
    };

    let mut y = y0.to_vec();
    let mut times = vec![0.0];
    let mut states = vec![y.clone()];
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![Complex64::default(); n],
        vec![Complex64::default(); n],
        vec![Complex64::default(); n],
        vec![Complex64::default(); n],
        vec![Complex64::default(); n],
    );
    for i in 0..steps {
        let s = i as f64 * h;
        f(s, &y, &mut k1);
        for k in 0..n {
            tmp[k] = y[k] + k1[k] * (h / 2.0);
        }
        f(s + h / 2.0, &tmp, &mut k2);
        for k in 0..n {
            tmp[k] = y[k] + k2[k] * (h / 2.0);
        }
        f(s + h / 2.0, &tmp, &mut k3);
        for k in 0..n {
            tmp[k] = y[k] + k3[k] * h;
        }
        f(s + h, &tmp, &mut k4);
        for k in 0..n {
            y[k] += (k1[k] + k2[k] * 2.0 + k3[k] * 2.0 + k4[k]) * (h / 6.0);
        }
        let s_next = (i + 1) as f64 * h;
        let r = norm(&y);
        if !r.is_finite() || r > guard {
            return Err(Error::BlowUp {
                time: sign * s_next,
                norm: r,
                limit: guard,
            });
        }
        if (i + 1) % stride == 0 || i + 1 == steps {
            times.push(s_next);
            states.push(y.clone());
        }
    }
    if backward {
        times.reverse();
        states.reverse();
        times.iter_mut().for_each(|t| *t = -*t);
    }
    Trajectory::new(form, times, states, epsilon)
}

fn resolve_step(requested: Option<f64>, default: f64, bound: f64, what: &str) -> Result<f64> {
    match requested {
        None => Ok(default),
        Some(h) if h > 0.0 && h <= bound * (1.0 + 1e-12) => Ok(h),
        Some(h) => Err(Error::InvalidArgument(format!(
            "{what} step {h:e} must lie in (0, {bound:e}]"
        ))),
    }
}

/// Fast-time system `v' = −iΛv + εP(v)` over `|t| ≤ ε⁻¹θ`.
pub fn integrate_fast(prob: &SimulationProblem, dt: Option<f64>) -> Result<Trajectory> {
    let dt = resolve_step(dt, prob.default_fast_step(), prob.fast_step_bound(), "fast-time")?;
    let span = prob.fast_time_span()?;
    let span = if prob.is_backward() { -span } else { span };
    let lambda = prob.freqs().values().to_vec();
    let eps = prob.epsilon();
    let field = prob.field();
    rk4(Form::Fast, Some(eps), prob.v0(), span, dt, prob.guard(), |_, v, out| {
        field.eval_into(v, out);
        for ((o, vj), l) in out.iter_mut().zip(v).zip(&lambda) {
            *o = *o * eps - Complex64::new(0.0, *l) * vj;
        }
    })
}

/// Slow-time system `∂_τ v = −iε⁻¹Λv + P(v)` over `|τ| ≤ θ`.
pub fn integrate_slow(prob: &SimulationProblem, dtau: Option<f64>) -> Result<Trajectory> {
    prob.require_positive_epsilon()?;
    let dtau = resolve_step(dtau, prob.default_slow_step(), prob.slow_step_bound(), "slow-time")?;
    let span = prob.slow_time_span()?;
    let span = if prob.is_backward() { -span } else { span };
    let inv_eps = 1.0 / prob.epsilon();
    let lambda = prob.freqs().values().to_vec();
    let field = prob.field();
    rk4(
        Form::Slow,
        Some(prob.epsilon()),
        prob.v0(),
        span,
        dtau,
        prob.guard(),
        |_, v, out| {
            field.eval_into(v, out);
            for ((o, vj), l) in out.iter_mut().zip(v).zip(&lambda) {
                *o -= Complex64::new(0.0, l * inv_eps) * vj;
            }
        },
    )
}

/// Interaction representation `∂_τ a = Φ_{τε⁻¹Λ} P(Φ_{−τε⁻¹Λ} a)`, `a(0) = v0`.
pub fn integrate_interaction(prob: &SimulationProblem, dtau: Option<f64>) -> Result<Trajectory> {
    prob.require_positive_epsilon()?;
    let dtau = resolve_step(dtau, prob.default_slow_step(), prob.slow_step_bound(), "slow-time")?;
    let span = prob.slow_time_span()?;
    let span = if prob.is_backward() { -span } else { span };
    let inv_eps = 1.0 / prob.epsilon();
    let lambda = prob.freqs().values().to_vec();
    let field = prob.field();
    let mut scratch = vec![Complex64::default(); prob.v0().len()];
    rk4(
        Form::Interaction,
        Some(prob.epsilon()),
        prob.v0(),
        span,
        dtau,
        prob.guard(),
        |tau, a, out| interaction_into(field, &lambda, tau * inv_eps, a, &mut scratch, out),
    )
}

/// Largest admissible step for the effective equation, `0.05 / X(2R)`.
pub fn effective_step_bound<F: VectorField + ?Sized>(field_avg: &F, v0: &[Complex64]) -> f64 {
    STEP_FRACTION / field_avg.chi(2.0 * norm(v0))
}

/// Effective equation `∂_τ a = ⟨⟨P⟩⟩(a)` over `[0, θ]` (or `[θ, 0]` for
/// negative `theta`).
pub fn integrate_effective<F: VectorField + ?Sized>(
    field_avg: &F,
    v0: &[Complex64],
    theta: f64,
    dtau: Option<f64>,
) -> Result<Trajectory> {
    Error::check_dim(field_avg.dim(), v0.len())?;
    if !theta.is_finite() {
        return Err(Error::InvalidArgument(format!("theta {theta} must be finite")));
    }
    let bound = effective_step_bound(field_avg, v0);
    let dtau = resolve_step(dtau, bound, bound, "effective")?;
    let guard = BLOW_UP_FACTOR * norm(v0);
    rk4(Form::Effective, None, v0, theta, dtau, guard, |_, a, out| {
        field_avg.eval_into(a, out)
    })
}

fn check_epsilon(traj: &Trajectory, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must be positive")));
    }
    match traj.epsilon() {
        Some(e) if e != epsilon => Err(Error::InvalidArgument(format!(
            "trajectory was computed with epsilon {e}, not {epsilon}"
        ))),
        _ => Ok(()),
    }
}

/// `a(τ) = Φ_{τε⁻¹Λ} v(τ)` from a slow-form trajectory (fast-form input is
/// first rescaled to `τ = εt`).
pub fn to_interaction(v_traj: &Trajectory, freqs: &FrequencyVector, epsilon: f64) -> Result<Trajectory> {
    check_epsilon(v_traj, epsilon)?;
    Error::check_dim(freqs.dim(), v_traj.dim())?;
    let times: Vec<f64> = match v_traj.form() {
        Form::Slow => v_traj.times().to_vec(),
        Form::Fast => v_traj.times().iter().map(|t| t * epsilon).collect(),
        other => {
            return Err(Error::FormMismatch {
                expected: "slow or fast".into(),
                found: other.to_string(),
            })
        }
    };
    let states = rotate_states(&times, v_traj.states(), freqs, 1.0 / epsilon);
    Trajectory::new(Form::Interaction, times, states, Some(epsilon))
}

/// `v(τ) = Φ_{−τε⁻¹Λ} a(τ)`, returned in slow form.
pub fn from_interaction(a_traj: &Trajectory, freqs: &FrequencyVector, epsilon: f64) -> Result<Trajectory> {
    check_epsilon(a_traj, epsilon)?;
    Error::check_dim(freqs.dim(), a_traj.dim())?;
    if a_traj.form() != Form::Interaction {
        return Err(Error::FormMismatch {
            expected: Form::Interaction.to_string(),
            found: a_traj.form().to_string(),
        });
    }
    let states = rotate_states(a_traj.times(), a_traj.states(), freqs, -1.0 / epsilon);
    Trajectory::new(Form::Slow, a_traj.times().to_vec(), states, Some(epsilon))
}

fn rotate_states(times: &[f64], states: &[Vec<Complex64>], freqs: &FrequencyVector, scale: f64) -> Vec<Vec<Complex64>> {
    times
        .iter()
        .zip(states)
        .map(|(&tau, s)| {
            let mut out = vec![Complex64::default(); s.len()];
            rotate_scaled(freqs.values(), tau * scale, s, &mut out);
            out
        })
        .collect()
}

/// Pairs each time of the coarser grid (fewer samples) with the finer
/// trajectory linearly interpolated there.
fn paired_samples<'a>(
    t1: &'a Trajectory,
    t2: &'a Trajectory,
) -> Result<impl Iterator<Item = (&'a [Complex64], Vec<Complex64>)> + 'a> {
    Error::check_dim(t1.dim(), t2.dim())?;
    let (coarse, fine) = if t1.len() <= t2.len() { (t1, t2) } else { (t2, t1) };
    let pairs: Vec<_> = coarse
        .times()
        .iter()
        .zip(coarse.states())
        .filter_map(|(&t, s)| fine.interpolate(t).map(|f| (s.as_slice(), f)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::InvalidArgument("trajectories share no time range".into()));
    }
    Ok(pairs.into_iter())
}

/// `max_t |t1(t) − t2(t)|` over the coarser grid.
pub fn sup_distance(t1: &Trajectory, t2: &Trajectory) -> Result<f64> {
    Ok(paired_samples(t1, t2)?
        .map(|(a, b)| distance(a, &b))
        .fold(0.0, f64::max))
}

/// Per component `max_t ||t1_j(t)| − |t2_j(t)||` over the coarser grid.
pub fn amplitude_errors(t1: &Trajectory, t2: &Trajectory) -> Result<Vec<f64>> {
    let mut out = vec![0.0; t1.dim()];
    for (a, b) in paired_samples(t1, t2)? {
        for (j, o) in out.iter_mut().enumerate() {
            *o = f64::max(*o, (a[j].norm() - b[j].norm()).abs());
        }
    }
    Ok(out)
}
