//! Rotation operators, resonance detection, the symbolic resonant part and
//! numerical (partial) averaging along the flow `t ↦ Φ_{Λt}`.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, Execution};
use crate::field::{Field, MultiIndex, PolynomialField, VectorField};

/// Exact frequency value.
pub type Rational = Ratio<i128>;

/// Spectrum `Λ = (λ_1, …, λ_n)` of the linear part, all entries nonzero.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyVector {
    values: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

fn rational_to_f64(r: &Rational) -> f64 {
    // correctly rounded while numerator and denominator are below 2^53
    *r.numer() as f64 / *r.denom() as f64
}

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        f64::MIN_POSITIVE
    } else {
        f64::from_bits(x.to_bits() + 1) - x
    }
}

impl FrequencyVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("frequency vector is empty".into()));
        }
        for (j, &v) in values.iter().enumerate() {
            if !v.is_finite() || v == 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "frequency λ_{j} = {v} must be finite and nonzero"
                )));
            }
        }
        Ok(FrequencyVector { values, exact: None })
    }

    pub fn from_rationals(exact: Vec<Rational>) -> Result<Self> {
        let values = exact.iter().map(rational_to_f64).collect();
        let mut fv = FrequencyVector::new(values)?;
        fv.exact = Some(exact);
        Ok(fv)
    }

    /// Float values paired with asserted exact values; each pair must agree
    /// to within one unit in the last place.
    pub fn with_exact(values: Vec<f64>, exact: Vec<Rational>) -> Result<Self> {
        Error::check_dim(values.len(), exact.len())?;
        for (j, (v, r)) in values.iter().zip(&exact).enumerate() {
            if (rational_to_f64(r) - v).abs() > ulp(*v) {
                return Err(Error::InvalidArgument(format!(
                    "λ_{j} = {v} does not match exact value {r}"
                )));
            }
        }
        let mut fv = FrequencyVector::new(values)?;
        fv.exact = Some(exact);
        Ok(fv)
    }

    /// Parses literals such as `"3/2"`, `"2"` or `"1.4142"`. The vector is
    /// exact only when every literal is an integer or a ratio.
    pub fn parse<S: AsRef<str>>(literals: &[S]) -> Result<Self> {
        let parsed = literals
            .iter()
            .map(|s| parse_literal(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_literals(parsed)
    }

    fn from_literals(parsed: Vec<Literal>) -> Result<Self> {
        if parsed.iter().all(|l| matches!(l, Literal::Exact(_))) {
            let exact = parsed
                .into_iter()
                .map(|l| match l {
                    Literal::Exact(r) => r,
                    Literal::Float(_) => unreachable!(),
                })
                .collect();
            FrequencyVector::from_rationals(exact)
        } else {
            FrequencyVector::new(parsed.iter().map(Literal::value).collect())
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_abs(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()))
    }

    /// Euclidean norm `|Λ|`.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Float-mode resonance tolerance `1e-9 (1 + |Λ|)`.
    pub fn default_tolerance(&self) -> f64 {
        1e-9 * (1.0 + self.norm())
    }

    /// `λ_j − Λ·α + Λ·β` in floating point.
    pub fn defect(&self, j: usize, alpha: &MultiIndex, beta: &MultiIndex) -> f64 {
        self.values[j] - alpha.dot(&self.values) + beta.dot(&self.values)
    }

    /// `λ_j − Λ·α + Λ·β` exactly, when exact values are known.
    pub fn exact_defect(&self, j: usize, alpha: &MultiIndex, beta: &MultiIndex) -> Option<Rational> {
        let exact = self.exact.as_ref()?;
        let mut d = exact[j];
        for (k, r) in exact.iter().enumerate() {
            let net = beta.get(k) as i128 - alpha.get(k) as i128;
            if net != 0 {
                d += r * Rational::from_integer(net);
            }
        }
        Some(d)
    }

    /// Whether `Λ·α = Λ·β` (exactly, or to within `tol` in float mode).
    pub fn balances(&self, alpha: &MultiIndex, beta: &MultiIndex, tol: f64) -> bool {
        match &self.exact {
            Some(exact) => exact
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (k, r)| {
                    acc + r * Rational::from_integer(alpha.get(k) as i128 - beta.get(k) as i128)
                })
                .is_zero(),
            None => (alpha.dot(&self.values) - beta.dot(&self.values)).abs() <= tol,
        }
    }

    fn literals(&self) -> Vec<Literal> {
        match &self.exact {
            Some(exact) => exact.iter().copied().map(Literal::Exact).collect(),
            None => self.values.iter().copied().map(Literal::Float).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Literal {
    Exact(Rational),
    Float(f64),
}

impl Literal {
    fn value(&self) -> f64 {
        match self {
            Literal::Exact(r) => rational_to_f64(r),
            Literal::Float(v) => *v,
        }
    }
}

fn parse_literal(s: &str) -> Result<Literal> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid frequency literal {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let n: i128 = num.trim().parse().map_err(|_| bad())?;
        let d: i128 = den.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Literal::Exact(Rational::new(n, d)));
    }
    if let Ok(n) = s.parse::<i128>() {
        return Ok(Literal::Exact(Rational::from_integer(n)));
    }
    s.parse::<f64>().map(Literal::Float).map_err(|_| bad())
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LiteralDoc {
    Number(f64),
    Text(String),
}

impl Serialize for FrequencyVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let docs: Vec<LiteralDoc> = self
            .literals()
            .into_iter()
            .map(|l| match l {
                Literal::Exact(r) if r.is_integer() => LiteralDoc::Text(r.numer().to_string()),
                Literal::Exact(r) => LiteralDoc::Text(format!("{}/{}", r.numer(), r.denom())),
                Literal::Float(v) => LiteralDoc::Number(v),
            })
            .collect();
        docs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FrequencyVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let docs = Vec::<LiteralDoc>::deserialize(deserializer)?;
        let literals = docs
            .into_iter()
            .map(|d| match d {
                LiteralDoc::Number(v) => Ok(Literal::Float(v)),
                LiteralDoc::Text(s) => parse_literal(&s),
            })
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        FrequencyVector::from_literals(literals).map_err(serde::de::Error::custom)
    }
}

/// Applies the rotation `Φ_w = diag(e^{i w_j})`.
pub fn rotate(w: &[f64], z: &[Complex64]) -> Result<Vec<Complex64>> {
    Error::check_dim(w.len(), z.len())?;
    Ok(z.iter().zip(w).map(|(zj, &wj)| zj * Complex64::cis(wj)).collect())
}

/// `Φ_{sΛ} z`.
pub(crate) fn rotate_scaled(freqs: &[f64], s: f64, z: &[Complex64], out: &mut [Complex64]) {
    for ((o, zj), &l) in out.iter_mut().zip(z).zip(freqs) {
        *o = zj * Complex64::cis(l * s);
    }
}

/// Evaluates `y^t(a) = Φ_{Λt} P(Φ_{−Λt} a)` into `out` using `scratch`.
pub(crate) fn interaction_into<F: VectorField + ?Sized>(
    field: &F,
    freqs: &[f64],
    t: f64,
    a: &[Complex64],
    scratch: &mut [Complex64],
    out: &mut [Complex64],
) {
    rotate_scaled(freqs, -t, a, scratch);
    field.eval_into(scratch, out);
    for (o, &l) in out.iter_mut().zip(freqs) {
        *o *= Complex64::cis(l * t);
    }
}

/// The rotated field `y^t(a) = Φ_{Λt} ∘ P(Φ_{−Λt} a)`.
pub fn interaction_field<F: VectorField + ?Sized>(
    field: &F,
    freqs: &FrequencyVector,
    t: f64,
    a: &[Complex64],
) -> Result<Vec<Complex64>> {
    Error::check_dim(field.dim(), freqs.dim())?;
    Error::check_dim(field.dim(), a.len())?;
    let mut scratch = vec![Complex64::default(); a.len()];
    let mut out = vec![Complex64::default(); a.len()];
    interaction_into(field, freqs.values(), t, a, &mut scratch, &mut out);
    Ok(out)
}

/// Outcome of a `(Λ, j)`-resonance test for one monomial.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceReport {
    pub j: usize,
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub defect: f64,
    pub resonant: bool,
}

/// Tests `λ_j − Λ·α + Λ·β = 0`. Exact frequencies are compared exactly and
/// `tol` is ignored; float frequencies use `|defect| ≤ tol`.
pub fn is_resonant(
    freqs: &FrequencyVector,
    j: usize,
    alpha: &MultiIndex,
    beta: &MultiIndex,
    tol: f64,
) -> Result<ResonanceReport> {
    Error::check_dim(freqs.dim(), alpha.len())?;
    Error::check_dim(freqs.dim(), beta.len())?;
    if j >= freqs.dim() {
        return Err(Error::InvalidArgument(format!("component {j} out of range")));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be non-negative")));
    }
    let (defect, resonant) = match freqs.exact_defect(j, alpha, beta) {
        Some(d) => (rational_to_f64(&d), d.is_zero()),
        None => {
            let d = freqs.defect(j, alpha, beta);
            (d, d.abs() <= tol)
        }
    };
    Ok(ResonanceReport {
        j,
        alpha: alpha.clone(),
        beta: beta.clone(),
        defect,
        resonant,
    })
}

/// One report per stored monomial, in component then canonical order.
pub fn resonance_table(field: &PolynomialField, freqs: &FrequencyVector, tol: f64) -> Result<Vec<ResonanceReport>> {
    Error::check_dim(field.dim(), freqs.dim())?;
    let mut out = Vec::with_capacity(field.monomial_count());
    for (j, p) in field.components().iter().enumerate() {
        for (a, b, _) in p.terms() {
            out.push(is_resonant(freqs, j, a, b, tol)?);
        }
    }
    Ok(out)
}

/// Writes reports as CSV with columns `j, alpha, beta, defect, resonant`.
/// Indices are space-separated exponents.
pub fn write_resonance_csv<W: Write>(reports: &[ResonanceReport], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["j", "alpha", "beta", "defect", "resonant"])?;
    for r in reports {
        w.write_record([
            r.j.to_string(),
            r.alpha.to_string(),
            r.beta.to_string(),
            r.defect.to_string(),
            r.resonant.to_string(),
        ])?;
    }
    w.flush()
}

/// The resonant part `P^res`: component `j` keeps its `(Λ, j)`-resonant monomials.
pub fn resonant_part(field: &PolynomialField, freqs: &FrequencyVector, tol: f64) -> Result<PolynomialField> {
    Error::check_dim(field.dim(), freqs.dim())?;
    let mut failure = None;
    let out = field.map_components(|j, p| {
        p.filter(|a, b, _| match is_resonant(freqs, j, a, b, tol) {
            Ok(r) => r.resonant,
            Err(e) => {
                failure = Some(e);
                false
            }
        })
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Largest angular frequency present in `y^t(a)` for a polynomial field,
/// never smaller than `max |λ_j|`.
pub fn max_oscillation_rate(field: &PolynomialField, freqs: &FrequencyVector) -> f64 {
    let mut rate = freqs.max_abs();
    for (j, p) in field.components().iter().enumerate() {
        for (a, b, _) in p.terms() {
            rate = rate.max(freqs.defect(j, a, b).abs());
        }
    }
    rate
}

/// Panels handled per work item in the chunked Simpson rule.
const PANELS_PER_CHUNK: usize = 512;

/// Composite Simpson rule for a vector-valued integrand on `[lo, hi]` with
/// `intervals` (even) subintervals. Chunk sums are combined pairwise in a
/// fixed order, so the result does not depend on the execution policy.
fn simpson<G>(exec: Execution, dim: usize, lo: f64, hi: f64, intervals: usize, integrand: &G) -> Vec<Complex64>
where
    G: Fn(f64, &mut [Complex64], &mut [Complex64]) + Sync,
{
    debug_assert!(intervals.is_multiple_of(2) && intervals > 0);
    let h = (hi - lo) / intervals as f64;
    let panels = intervals / 2;
    let chunks = panels.div_ceil(PANELS_PER_CHUNK);
    let parts = exec.map_range(chunks, |c| {
        let p0 = c * PANELS_PER_CHUNK;
        let p1 = (p0 + PANELS_PER_CHUNK).min(panels);
        let mut acc = vec![Complex64::default(); dim];
        let mut scratch = vec![Complex64::default(); dim];
        let mut val = vec![Complex64::default(); dim];
        let (k0, k1) = (2 * p0, 2 * p1);
        for k in k0..=k1 {
            let w = if k == k0 || k == k1 {
                1.0
            } else if (k - k0) % 2 == 1 {
                4.0
            } else {
                2.0
            };
            integrand(lo + k as f64 * h, &mut scratch, &mut val);
            for (a, v) in acc.iter_mut().zip(&val) {
                *a += v * w;
            }
        }
        for a in acc.iter_mut() {
            *a *= h / 3.0;
        }
        acc
    });
    pairwise_sum(&parts, dim)
}

/// Resolution bound on the quadrature step, `π / (4 max|λ_j|)`.
pub fn quadrature_step_bound(freqs: &FrequencyVector) -> f64 {
    std::f64::consts::PI / (4.0 * freqs.max_abs())
}

/// Partial average `⟨⟨P⟩⟩^T(a) = (1/|T|) ∫_0^T y^t(a) dt` (over `[T, 0]`
/// when `T < 0`), by composite Simpson with `steps` subintervals (rounded up
/// to even).
pub fn partial_average<F: VectorField + ?Sized>(
    field: &F,
    freqs: &FrequencyVector,
    a: &[Complex64],
    horizon: f64,
    steps: usize,
) -> Result<Vec<Complex64>> {
    partial_average_with(Execution::default(), field, freqs, a, horizon, steps)
}

pub fn partial_average_with<F: VectorField + ?Sized>(
    exec: Execution,
    field: &F,
    freqs: &FrequencyVector,
    a: &[Complex64],
    horizon: f64,
    steps: usize,
) -> Result<Vec<Complex64>> {
    Error::check_dim(field.dim(), freqs.dim())?;
    Error::check_dim(field.dim(), a.len())?;
    if horizon == 0.0 || !horizon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "averaging horizon {horizon} must be finite and nonzero"
        )));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one step".into()));
    }
    let step = horizon.abs() / steps as f64;
    let bound = quadrature_step_bound(freqs);
    if step > bound {
        return Err(Error::QuadratureResolution { step, bound });
    }
    let intervals = steps + steps % 2;
    let (lo, hi) = if horizon > 0.0 { (0.0, horizon) } else { (horizon, 0.0) };
    let integrand = |t: f64, scratch: &mut [Complex64], out: &mut [Complex64]| {
        interaction_into(field, freqs.values(), t, a, scratch, out)
    };
    let integral = simpson(exec, a.len(), lo, hi, intervals, &integrand);
    Ok(integral.into_iter().map(|v| v / horizon.abs()).collect())
}

/// Controls for the numerical averaging of generic fields.
#[derive(Clone, Copy, Debug)]
pub struct AveragingOptions {
    /// Initial horizon is `t0_factor / min|λ_j|`.
    pub t0_factor: f64,
    /// Give up once the horizon exceeds `max_growth · T₀`.
    pub max_growth: f64,
    /// Quadrature step is the resolution bound divided by this factor.
    pub oversample: f64,
    pub exec: Execution,
}

impl Default for AveragingOptions {
    fn default() -> Self {
        AveragingOptions {
            t0_factor: 64.0,
            max_growth: 1e6,
            oversample: 8.0,
            exec: Execution::default(),
        }
    }
}

/// `⟨⟨P⟩⟩(a)`. Polynomial fields use the resonant part (with the default
/// resonance tolerance of `freqs`); generic fields use [`numeric_average`].
pub fn average(field: &Field, freqs: &FrequencyVector, a: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    match field {
        Field::Polynomial(p) => {
            if !(tol > 0.0) {
                return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
            }
            Error::check_dim(p.dim(), a.len())?;
            resonant_part(p, freqs, freqs.default_tolerance())?.eval(a)
        }
        Field::Generic(g) => numeric_average(g, freqs, a, tol, &AveragingOptions::default()),
    }
}

/// Doubles `T` from `T₀` until successive partial averages differ by less
/// than `tol` in max-norm. Each doubling reuses the integral over `[0, T]`.
///
/// The distance to the limit decays like `C/T`, and with commensurate
/// frequencies two successive horizons can land on the same phase, so the
/// last change alone can understate the error. Convergence additionally
/// requires the tail estimate `max_k T_k |A(T_k) − A(T)| / T` to be below
/// `tol`.
pub fn numeric_average<F: VectorField + ?Sized>(
    field: &F,
    freqs: &FrequencyVector,
    a: &[Complex64],
    tol: f64,
    opts: &AveragingOptions,
) -> Result<Vec<Complex64>> {
    Error::check_dim(field.dim(), freqs.dim())?;
    Error::check_dim(field.dim(), a.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let dim = a.len();
    let t0 = opts.t0_factor / freqs.min_abs();
    let h_max = quadrature_step_bound(freqs) / opts.oversample.max(1.0);
    let mut intervals = (t0 / h_max).ceil() as usize;
    intervals += intervals % 2;
    let integrand = |t: f64, scratch: &mut [Complex64], out: &mut [Complex64]| {
        interaction_into(field, freqs.values(), t, a, scratch, out)
    };
    let mut horizon = t0;
    let mut integral = simpson(opts.exec, dim, 0.0, t0, intervals, &integrand);
    let mut history: Vec<(f64, Vec<Complex64>)> = vec![(horizon, integral.iter().map(|v| v / horizon).collect())];
    let mut last_change = f64::INFINITY;
    let gap = |x: &[Complex64], y: &[Complex64]| x.iter().zip(y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    while horizon * 2.0 <= opts.max_growth * t0 {
        let tail = simpson(opts.exec, dim, horizon, 2.0 * horizon, intervals, &integrand);
        for (i, t) in integral.iter_mut().zip(&tail) {
            *i += t;
        }
        horizon *= 2.0;
        intervals *= 2;
        let cur: Vec<Complex64> = integral.iter().map(|v| v / horizon).collect();
        last_change = gap(&cur, &history[history.len() - 1].1);
        let tail_estimate = history.iter().map(|(t, prev)| t * gap(&cur, prev)).fold(0.0, f64::max) / horizon;
        if last_change < tol && tail_estimate < tol {
            return Ok(cur);
        }
        history.push((horizon, cur));
    }
    Err(Error::NonConvergence { horizon, last_change })
}

/// Result of the bounded search for integer relations `Λ·s = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonresonanceCertificate {
    pub bound: u32,
    /// A relation with minimal `max|s_j|`, first nonzero entry positive.
    pub witness: Option<Vec<i64>>,
}

impl NonresonanceCertificate {
    /// True when no relation exists with `0 < max|s_j| ≤ bound`.
    pub fn is_nonresonant(&self) -> bool {
        self.witness.is_none()
    }
}

impl fmt::Display for NonresonanceCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => write!(f, "no integer relation with max|s| <= {}", self.bound),
            Some(s) => {
                let parts: Vec<String> = s.iter().map(|v| v.to_string()).collect();
                write!(f, "integer relation s = ({})", parts.join(", "))
            }
        }
    }
}

/// Searches shells `max|s_j| = 1, 2, …, bound` in lexicographic order.
pub fn is_nonresonant(freqs: &FrequencyVector, bound: u32) -> Result<NonresonanceCertificate> {
    if bound == 0 {
        return Err(Error::InvalidArgument("non-resonance bound must be at least 1".into()));
    }
    let n = freqs.dim();
    for k in 1..=bound as i64 {
        let mut s = vec![-k; n];
        loop {
            let on_shell = s.iter().any(|v| v.abs() == k);
            let leading_positive = s.iter().find(|v| **v != 0).is_some_and(|v| *v > 0);
            if on_shell && leading_positive && is_relation(freqs, &s) {
                return Ok(NonresonanceCertificate {
                    bound,
                    witness: Some(s),
                });
            }
            // odometer increment over [-k, k]^n
            let mut i = n;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if s[i] < k {
                    s[i] += 1;
                    break;
                }
                s[i] = -k;
            }
            if s.iter().all(|v| *v == -k) {
                break;
            }
        }
    }
    Ok(NonresonanceCertificate { bound, witness: None })
}

fn is_relation(freqs: &FrequencyVector, s: &[i64]) -> bool {
    match freqs.exact() {
        Some(exact) => exact
            .iter()
            .zip(s)
            .fold(Rational::zero(), |acc, (r, &c)| {
                acc + r * Rational::from_integer(c as i128)
            })
            .is_zero(),
        None => {
            let (sum, scale) = freqs.values().iter().zip(s).fold((0.0, 0.0), |(sum, scale), (l, &c)| {
                (sum + l * c as f64, scale + (l * c as f64).abs())
            });
            sum.abs() <= 1e-12 * scale
        }
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match &self.exact {
            Some(exact) => exact.iter().map(|r| r.to_string()).collect(),
            None => self.values.iter().map(|v| v.to_string()).collect(),
        };
        write!(f, "({})", parts.join(", "))
    }
}
