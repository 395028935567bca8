//! Sparse complex polynomial vector fields on ℂⁿ, generic Lipschitz fields
//! and Wirtinger calculus.
//!
//! A scalar [`Polynomial`] is a finite sum `Σ C_{αβ} z^α z̄^β` stored as a
//! sorted map keyed by the exponent pair `(α, β)`. A [`PolynomialField`]
//! bundles one polynomial per component. Both are immutable after
//! construction except through the explicit builder methods.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients smaller than this in magnitude are dropped after arithmetic.
pub const PRUNE_TOL: f64 = 1e-14;

/// Euclidean norm on ℂⁿ ≅ ℝ²ⁿ.
pub fn norm(z: &[Complex64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Euclidean distance between two points of ℂⁿ.
pub fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Real scalar product `Re Σ z_j conj(w_j)`.
pub fn real_dot(z: &[Complex64], w: &[Complex64]) -> f64 {
    z.iter().zip(w).map(|(a, b)| (a * b.conj()).re).sum()
}

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    /// The unit index `e_j`.
    pub fn unit(dim: usize, j: usize) -> Self {
        let mut e = vec![0; dim];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|α| = Σ α_j`.
    pub fn norm(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, j: usize) -> u32 {
        self.0[j]
    }

    /// `α - e_j`, or `None` when `α_j = 0`.
    pub fn lowered(&self, j: usize) -> Option<MultiIndex> {
        if self.0[j] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[j] -= 1;
        Some(MultiIndex(e))
    }

    pub fn raised(&self, j: usize) -> MultiIndex {
        let mut e = self.0.clone();
        e[j] += 1;
        MultiIndex(e)
    }

    /// `Λ·α` in floating point.
    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.0.iter().zip(weights).map(|(&a, &w)| a as f64 * w).sum()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A single term `coeff · z^alpha · z̄^beta`.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub coeff: Complex64,
}

impl Monomial {
    pub fn new(alpha: Vec<u32>, beta: Vec<u32>, coeff: Complex64) -> Self {
        Monomial {
            alpha: MultiIndex::new(alpha),
            beta: MultiIndex::new(beta),
            coeff,
        }
    }

    pub fn degree(&self) -> u32 {
        self.alpha.norm() + self.beta.norm()
    }
}

type Key = (MultiIndex, MultiIndex);

/// Evaluates `z^α z̄^β` without the coefficient.
fn monomial_value(alpha: &MultiIndex, beta: &MultiIndex, z: &[Complex64]) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for (k, zk) in z.iter().enumerate() {
        let a = alpha.0[k];
        let b = beta.0[k];
        if a > 0 {
            acc *= zk.powu(a);
        }
        if b > 0 {
            acc *= zk.conj().powu(b);
        }
    }
    acc
}

/// Scalar polynomial `F(z) = Σ C_{αβ} z^α z̄^β` on ℂⁿ.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Key, Complex64>,
}

#[allow(clippy::len_without_is_empty)]
impl Polynomial {
    /// The zero polynomial in `dim` variables.
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Collects like terms; fails when an index has the wrong length.
    pub fn from_monomials<I>(dim: usize, monomials: I) -> Result<Self>
    where
        I: IntoIterator<Item = Monomial>,
    {
        let mut p = Polynomial::zero(dim);
        for m in monomials {
            p.add_term(m.alpha, m.beta, m.coeff)?;
        }
        Ok(p)
    }

    /// Adds `coeff · z^alpha z̄^beta` to the polynomial, merging like terms.
    pub fn add_term(&mut self, alpha: MultiIndex, beta: MultiIndex, coeff: Complex64) -> Result<()> {
        Error::check_dim(self.dim, alpha.len())?;
        Error::check_dim(self.dim, beta.len())?;
        if !coeff.re.is_finite() || !coeff.im.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite coefficient {coeff}")));
        }
        let key = (alpha, beta);
        let sum = self.terms.get(&key).copied().unwrap_or_default() + coeff;
        if sum.norm() < PRUNE_TOL {
            self.terms.remove(&key);
        } else {
            self.terms.insert(key, sum);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order (lexicographic on `(α, β)`).
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, Complex64)> + '_ {
        self.terms.iter().map(|((a, b), c)| (a, b, *c))
    }

    pub fn monomials(&self) -> Vec<Monomial> {
        self.terms()
            .map(|(a, b, c)| Monomial {
                alpha: a.clone(),
                beta: b.clone(),
                coeff: c,
            })
            .collect()
    }

    pub fn coeff(&self, alpha: &MultiIndex, beta: &MultiIndex) -> Complex64 {
        self.terms
            .get(&(alpha.clone(), beta.clone()))
            .copied()
            .unwrap_or_default()
    }

    /// Largest total degree `|α| + |β|`, zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(a, b)| a.norm() + b.norm()).max().unwrap_or(0)
    }

    /// Smallest total degree, `None` for the zero polynomial.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, b)| a.norm() + b.norm()).min()
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        Error::check_dim(self.dim, z.len())?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|((a, b), c)| c * monomial_value(a, b, z)).sum()
    }

    /// Keeps only the terms accepted by `keep`.
    pub fn filter<F>(&self, mut keep: F) -> Polynomial
    where
        F: FnMut(&MultiIndex, &MultiIndex, Complex64) -> bool,
    {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|((a, b), c)| keep(a, b, **c))
                .map(|(k, c)| (k.clone(), *c))
                .collect(),
        }
    }

    /// Applies `f` to every coefficient, pruning results below [`PRUNE_TOL`].
    pub fn map_coeffs<F>(&self, mut f: F) -> Polynomial
    where
        F: FnMut(&MultiIndex, &MultiIndex, Complex64) -> Complex64,
    {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|((a, b), c)| ((a.clone(), b.clone()), f(a, b, *c)))
                .filter(|(_, c)| c.norm() >= PRUNE_TOL)
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Polynomial {
        self.map_coeffs(|_, _, c| c * factor)
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        Error::check_dim(self.dim, other.dim)?;
        let mut out = self.clone();
        for ((a, b), c) in &other.terms {
            out.add_term(a.clone(), b.clone(), *c)?;
        }
        Ok(out)
    }

    /// Wirtinger derivative `∂F/∂z_j`.
    pub fn dz(&self, j: usize) -> Result<Polynomial> {
        self.check_index(j)?;
        let mut out = Polynomial::zero(self.dim);
        for ((a, b), c) in &self.terms {
            if let Some(lowered) = a.lowered(j) {
                out.add_term(lowered, b.clone(), c * a.get(j) as f64)?;
            }
        }
        Ok(out)
    }

    /// Wirtinger derivative `∂F/∂z̄_j`.
    pub fn dzbar(&self, j: usize) -> Result<Polynomial> {
        self.check_index(j)?;
        let mut out = Polynomial::zero(self.dim);
        for ((a, b), c) in &self.terms {
            if let Some(lowered) = b.lowered(j) {
                out.add_term(a.clone(), lowered, c * b.get(j) as f64)?;
            }
        }
        Ok(out)
    }

    /// The polynomial whose values are the complex conjugates of `self`'s.
    pub fn conj(&self) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|((a, b), c)| ((b.clone(), a.clone()), c.conj()))
                .collect(),
        }
    }

    /// Largest `|C_{αβ} - conj(C_{βα})|`; zero exactly for real-valued polynomials.
    pub fn hermitian_defect(&self) -> f64 {
        self.terms
            .iter()
            .map(|((a, b), c)| (c - self.coeff(b, a).conj()).norm())
            .fold(0.0, f64::max)
    }

    fn check_index(&self, j: usize) -> Result<()> {
        if j < self.dim {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "variable index {j} out of range for dimension {}",
                self.dim
            )))
        }
    }

    /// Coefficient-wise bound on `sup |F|` and on the Lipschitz constant over `B_R`.
    pub fn lipschitz_bound(&self, radius: f64) -> f64 {
        self.terms
            .iter()
            .map(|((a, b), c)| {
                let d = a.norm() + b.norm();
                c.norm() * (d + 1) as f64 * radius.powi(d.saturating_sub(1) as i32) * radius.max(1.0)
            })
            .fold(0.0, |acc, x| acc + x)
    }
}

/// Vector field on ℂⁿ given by one polynomial per component.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialField {
    dim: usize,
    components: Vec<Polynomial>,
}

impl PolynomialField {
    /// The zero field on ℂⁿ.
    pub fn zero(dim: usize) -> Self {
        PolynomialField {
            dim,
            components: (0..dim).map(|_| Polynomial::zero(dim)).collect(),
        }
    }

    pub fn from_components(components: Vec<Polynomial>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("field dimension must be positive".into()));
        }
        for c in &components {
            Error::check_dim(dim, c.dim())?;
        }
        Ok(PolynomialField { dim, components })
    }

    /// Builds a field from `(component, monomial)` pairs.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, Monomial)>,
    {
        let mut field = PolynomialField::zero(dim);
        for (j, m) in terms {
            if j >= dim {
                return Err(Error::InvalidArgument(format!(
                    "component {j} out of range for dimension {dim}"
                )));
            }
            field.components[j].add_term(m.alpha, m.beta, m.coeff)?;
        }
        Ok(field)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, j: usize) -> &Polynomial {
        &self.components[j]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    pub fn monomial_count(&self) -> usize {
        self.components.iter().map(Polynomial::len).sum()
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        Error::check_dim(self.dim, z.len())?;
        Ok(self.components.iter().map(|p| p.eval_unchecked(z)).collect())
    }

    pub fn map_components<F>(&self, mut f: F) -> PolynomialField
    where
        F: FnMut(usize, &Polynomial) -> Polynomial,
    {
        PolynomialField {
            dim: self.dim,
            components: self.components.iter().enumerate().map(|(j, p)| f(j, p)).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> PolynomialField {
        self.map_components(|_, p| p.scale(factor))
    }

    pub fn add(&self, other: &PolynomialField) -> Result<PolynomialField> {
        Error::check_dim(self.dim, other.dim)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(p, q)| p.add(q))
            .collect::<Result<Vec<_>>>()?;
        Ok(PolynomialField {
            dim: self.dim,
            components,
        })
    }

    /// Upper bound for `max(sup_{B_R} |dP|, sup_{B_R} |P|)`.
    pub fn lipschitz_estimate(&self, radius: f64) -> f64 {
        self.components
            .iter()
            .map(|p| p.lipschitz_bound(radius))
            .fold(0.0, |acc, x| acc + x)
    }

    pub fn to_document(&self) -> PolynomialDocument {
        PolynomialDocument {
            dim: self.dim,
            hermitian: None,
            components: self.components.iter().map(component_to_doc).collect(),
        }
    }

    pub fn from_document(doc: &PolynomialDocument) -> Result<Self> {
        if doc.components.len() != doc.dim {
            return Err(Error::Parse(format!(
                "field has dim {} but {} components",
                doc.dim,
                doc.components.len()
            )));
        }
        let components = doc
            .components
            .iter()
            .map(|c| component_from_doc(doc.dim, c))
            .collect::<Result<Vec<_>>>()?;
        PolynomialField::from_components(components)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("field documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PolynomialDocument = serde_json::from_str(text).map_err(json_error)?;
        PolynomialField::from_document(&doc)
    }
}

pub(crate) fn json_error(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e))
}

/// JSON form of one monomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialDocument {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

/// JSON form shared by polynomial fields and Hamiltonians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialDocument {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermitian: Option<bool>,
    pub components: Vec<Vec<MonomialDocument>>,
}

pub(crate) fn component_to_doc(p: &Polynomial) -> Vec<MonomialDocument> {
    p.terms()
        .map(|(a, b, c)| MonomialDocument {
            alpha: a.as_slice().to_vec(),
            beta: b.as_slice().to_vec(),
            re: c.re,
            im: c.im,
        })
        .collect()
}

pub(crate) fn component_from_doc(dim: usize, monos: &[MonomialDocument]) -> Result<Polynomial> {
    Polynomial::from_monomials(
        dim,
        monos
            .iter()
            .map(|m| Monomial::new(m.alpha.clone(), m.beta.clone(), Complex64::new(m.re, m.im))),
    )
    .map_err(|e| Error::Parse(e.to_string()))
}

/// Anything that can be evaluated as a vector field on ℂⁿ.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes `P(z)` into `out`. Both slices have length `dim()`.
    fn eval_into(&self, z: &[Complex64], out: &mut [Complex64]);

    /// The bound `X(R)` on `|P|` and `Lip P` over `B_R`.
    fn chi(&self, radius: f64) -> f64;

    fn eval_checked(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        Error::check_dim(self.dim(), z.len())?;
        let mut out = vec![Complex64::default(); z.len()];
        self.eval_into(z, &mut out);
        Ok(out)
    }
}

impl VectorField for PolynomialField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        for (o, p) in out.iter_mut().zip(&self.components) {
            *o = p.eval_unchecked(z);
        }
    }

    fn chi(&self, radius: f64) -> f64 {
        self.lipschitz_estimate(radius)
    }
}

type ChiFn = dyn Fn(f64) -> f64 + Send + Sync;
type EvalFn = dyn Fn(&[Complex64], &mut [Complex64]) + Send + Sync;

/// A user-supplied non-decreasing bound `X(R)` certifying `f ∈ Lip_X`.
#[derive(Clone)]
pub struct LipschitzWitness {
    chi: Arc<ChiFn>,
}

impl LipschitzWitness {
    pub fn new<F>(chi: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        LipschitzWitness { chi: Arc::new(chi) }
    }

    pub fn constant(value: f64) -> Self {
        LipschitzWitness::new(move |_| value)
    }

    /// Witness derived from the coefficient bound of a polynomial field.
    pub fn for_polynomial(field: &PolynomialField) -> Self {
        let f = field.clone();
        LipschitzWitness::new(move |r| f.lipschitz_estimate(r))
    }

    pub fn chi(&self, radius: f64) -> f64 {
        (self.chi)(radius)
    }

    /// Checks monotonicity on consecutive points of a grid over `[0, r_max]`.
    pub fn is_monotone_on(&self, r_max: f64, samples: usize) -> bool {
        let samples = samples.max(2);
        let mut prev = self.chi(0.0);
        (1..samples).all(|i| {
            let r = r_max * i as f64 / (samples - 1) as f64;
            let next = self.chi(r);
            let ok = next >= prev;
            prev = next;
            ok
        })
    }
}

impl fmt::Debug for LipschitzWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipschitzWitness").finish_non_exhaustive()
    }
}

/// A locally Lipschitz field given by a closure and its witness.
#[derive(Clone)]
pub struct GenericField {
    dim: usize,
    eval: Arc<EvalFn>,
    witness: LipschitzWitness,
}

impl GenericField {
    pub fn new<F>(dim: usize, eval: F, witness: LipschitzWitness) -> Self
    where
        F: Fn(&[Complex64], &mut [Complex64]) + Send + Sync + 'static,
    {
        GenericField {
            dim,
            eval: Arc::new(eval),
            witness,
        }
    }

    /// Hides a polynomial field behind the closure interface.
    pub fn from_polynomial(field: &PolynomialField) -> Self {
        let witness = LipschitzWitness::for_polynomial(field);
        let f = field.clone();
        GenericField::new(field.dim(), move |z, out| f.eval_into(z, out), witness)
    }

    pub fn witness(&self) -> &LipschitzWitness {
        &self.witness
    }

    /// Samples `B_R` and reports whether the witness dominated every observed
    /// value and difference quotient.
    pub fn spot_check_witness(&self, radius: f64, samples: usize, seed: u64) -> bool {
        let bound = self.witness.chi(radius) * (1.0 + 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fa = vec![Complex64::default(); self.dim];
        let mut fb = vec![Complex64::default(); self.dim];
        for _ in 0..samples {
            let a = sample_ball(&mut rng, self.dim, radius);
            let b = sample_ball(&mut rng, self.dim, radius);
            self.eval_into(&a, &mut fa);
            self.eval_into(&b, &mut fb);
            if norm(&fa) > bound || norm(&fb) > bound {
                return false;
            }
            let d = distance(&a, &b);
            if d > 0.0 && distance(&fa, &fb) > bound * d {
                return false;
            }
        }
        true
    }
}

impl fmt::Debug for GenericField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericField")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl VectorField for GenericField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        (self.eval)(z, out)
    }

    fn chi(&self, radius: f64) -> f64 {
        self.witness.chi(radius)
    }
}

/// Either representation of the perturbation `P`.
#[derive(Clone, Debug)]
pub enum Field {
    Polynomial(PolynomialField),
    Generic(GenericField),
}

impl Field {
    pub fn as_polynomial(&self) -> Option<&PolynomialField> {
        match self {
            Field::Polynomial(p) => Some(p),
            Field::Generic(_) => None,
        }
    }
}

impl From<PolynomialField> for Field {
    fn from(p: PolynomialField) -> Self {
        Field::Polynomial(p)
    }
}

impl From<GenericField> for Field {
    fn from(g: GenericField) -> Self {
        Field::Generic(g)
    }
}

impl VectorField for Field {
    fn dim(&self) -> usize {
        match self {
            Field::Polynomial(p) => p.dim(),
            Field::Generic(g) => g.dim(),
        }
    }

    fn eval_into(&self, z: &[Complex64], out: &mut [Complex64]) {
        match self {
            Field::Polynomial(p) => p.eval_into(z, out),
            Field::Generic(g) => g.eval_into(z, out),
        }
    }

    fn chi(&self, radius: f64) -> f64 {
        match self {
            Field::Polynomial(p) => p.chi(radius),
            Field::Generic(g) => g.chi(radius),
        }
    }
}

/// Uniform sample from the closed ball of radius `radius` in ℂⁿ.
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, dim: usize, radius: f64) -> Vec<Complex64> {
    loop {
        let z: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        if norm(&z) <= 1.0 {
            return z.into_iter().map(|c| c * radius).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `v²v̄ + v³` in one variable.
    fn cubic() -> PolynomialField {
        PolynomialField::from_terms(
            1,
            [
                (0, Monomial::new(vec![2], vec![1], c(1.0, 0.0))),
                (0, Monomial::new(vec![3], vec![0], c(1.0, 0.0))),
            ],
        )
        .unwrap()
    }

    #[test]
    fn cubic_at_one() {
        let v = cubic().eval(&[c(1.0, 0.0)]).unwrap();
        assert_eq!(v, vec![c(2.0, 0.0)]);
    }

    #[test]
    fn zero_field_evaluates_to_zero() {
        let f = PolynomialField::zero(3);
        let v = f.eval(&[c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0)]).unwrap();
        assert!(v.iter().all(|x| *x == Complex64::default()));
    }

    #[test]
    fn eval_rejects_wrong_dimension() {
        let err = cubic().eval(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 1, found: 2 });
    }

    #[test]
    fn like_terms_merge_and_cancel() {
        let mut p = Polynomial::zero(2);
        let a = MultiIndex::new(vec![1, 0]);
        let b = MultiIndex::new(vec![0, 1]);
        p.add_term(a.clone(), b.clone(), c(1.0, 1.0)).unwrap();
        p.add_term(a.clone(), b.clone(), c(2.0, 0.0)).unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.coeff(&a, &b), c(3.0, 1.0));
        p.add_term(a.clone(), b.clone(), c(-3.0, -1.0)).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn wirtinger_of_z2_zbar() {
        let p = Polynomial::from_monomials(1, [Monomial::new(vec![2], vec![1], c(1.0, 0.0))]).unwrap();
        let dz = p.dz(0).unwrap();
        assert_eq!(dz.monomials(), vec![Monomial::new(vec![1], vec![1], c(2.0, 0.0))]);
        let dzbar = p.dzbar(0).unwrap();
        assert_eq!(dzbar.monomials(), vec![Monomial::new(vec![2], vec![0], c(1.0, 0.0))]);
    }

    #[test]
    fn holomorphic_and_antiholomorphic_derivatives_vanish() {
        let zbar3 = Polynomial::from_monomials(1, [Monomial::new(vec![0], vec![3], c(1.0, 0.0))]).unwrap();
        assert!(zbar3.dz(0).unwrap().is_zero());
        let z3 = Polynomial::from_monomials(1, [Monomial::new(vec![3], vec![0], c(1.0, 0.0))]).unwrap();
        assert!(z3.dzbar(0).unwrap().is_zero());
    }

    #[test]
    fn derivative_index_out_of_range() {
        let p = Polynomial::zero(2);
        assert!(matches!(p.dz(2), Err(Error::InvalidArgument(_))));
        assert!(matches!(p.dzbar(5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn conjugate_swaps_indices() {
        let p = Polynomial::from_monomials(2, [Monomial::new(vec![1, 0], vec![0, 1], c(2.0, 1.0))]).unwrap();
        assert_eq!(
            p.conj().monomials(),
            vec![Monomial::new(vec![0, 1], vec![1, 0], c(2.0, -1.0))]
        );
    }

    #[test]
    fn conjugate_of_real_polynomial_is_itself() {
        // |z1|^2 + 2 Re(z1 z̄2)
        let p = Polynomial::from_monomials(
            2,
            [
                Monomial::new(vec![1, 0], vec![1, 0], c(1.0, 0.0)),
                Monomial::new(vec![1, 0], vec![0, 1], c(1.0, 0.0)),
                Monomial::new(vec![0, 1], vec![1, 0], c(1.0, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(p.conj(), p);
        assert_eq!(p.hermitian_defect(), 0.0);
    }

    #[test]
    fn lipschitz_estimate_zero_field() {
        assert_eq!(PolynomialField::zero(2).lipschitz_estimate(3.0), 0.0);
    }

    #[test]
    fn lipschitz_estimate_linear_field() {
        let p = PolynomialField::from_terms(1, [(0, Monomial::new(vec![1], vec![0], c(1.0, 0.0)))]).unwrap();
        let est = p.lipschitz_estimate(2.0);
        assert!(est >= 2.0, "estimate {est}");
    }

    #[test]
    fn lipschitz_estimate_dominates_sampled_quotients() {
        let p = cubic();
        let est = p.lipschitz_estimate(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst: f64 = 0.0;
        for _ in 0..100_000 {
            let u1 = sample_ball(&mut rng, 1, 1.0);
            let u2 = sample_ball(&mut rng, 1, 1.0);
            let p1 = p.eval(&u1).unwrap();
            let p2 = p.eval(&u2).unwrap();
            worst = worst.max(norm(&p1));
            let d = distance(&u1, &u2);
            if d > 1e-9 {
                worst = worst.max(distance(&p1, &p2) / d);
            }
        }
        assert!(est >= worst, "estimate {est} < sampled {worst}");
    }

    #[test]
    fn json_round_trip() {
        let p = cubic();
        let back = PolynomialField::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn malformed_json_reports_position() {
        let err =
            PolynomialField::from_json("{\n \"dim\": 1,\n \"components\": [ [ {\"alpha\": [1] } ] ]\n}").unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.starts_with("line 3"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn json_rejects_index_length_mismatch() {
        let text = r#"{"dim": 2, "components": [[{"alpha":[1],"beta":[0,0],"re":1.0,"im":0.0}], []]}"#;
        assert!(matches!(PolynomialField::from_json(text), Err(Error::Parse(_))));
    }

    #[test]
    fn witness_monotone_check() {
        let w = LipschitzWitness::for_polynomial(&cubic());
        assert!(w.is_monotone_on(4.0, 100));
        let bad = LipschitzWitness::new(|r| (r * 3.0).sin().abs());
        assert!(!bad.is_monotone_on(4.0, 100));
    }

    #[test]
    fn generic_wrapper_passes_spot_check() {
        let g = GenericField::from_polynomial(&cubic());
        assert!(g.spot_check_witness(1.5, 2_000, 3));
        let liar = GenericField::new(1, |z, out| out[0] = z[0] * 10.0, LipschitzWitness::constant(1.0));
        assert!(!liar.spot_check_witness(1.0, 100, 3));
    }
}
