//! Hamiltonian systems `ż = −iΛz + 2iε ∂h/∂z̄` with real polynomial `h`.

use std::io::Write;

use num_complex::Complex64;

use crate::dynamics::{SimulationProblem, Trajectory};
use crate::error::{Error, Result};
use crate::field::{
    component_from_doc, component_to_doc, json_error, Monomial, Polynomial, PolynomialDocument, PolynomialField,
};
use crate::resonance::{resonant_part, FrequencyVector};

/// Relative tolerance for Hermitian symmetry and for reality of values.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Real-valued polynomial `h(z) = Σ m_{αβ} z^α z̄^β` with `m_{αβ} = conj(m_{βα})`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianPoly {
    poly: Polynomial,
}

impl HamiltonianPoly {
    pub fn new(poly: Polynomial) -> Result<Self> {
        let scale = poly.terms().map(|(_, _, c)| c.norm()).fold(1.0, f64::max);
        let defect = poly.hermitian_defect();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::InvalidArgument(format!(
                "coefficients are not Hermitian-symmetric (defect {defect:e})"
            )));
        }
        Ok(HamiltonianPoly { poly })
    }

    pub fn from_monomials<I: IntoIterator<Item = Monomial>>(dim: usize, monomials: I) -> Result<Self> {
        HamiltonianPoly::new(Polynomial::from_monomials(dim, monomials)?)
    }

    /// The unperturbed part `h₂ = −½ Σ λ_j |z_j|²`.
    pub fn quadratic(freqs: &FrequencyVector) -> Self {
        let n = freqs.dim();
        let monomials = freqs.values().iter().enumerate().map(|(j, l)| {
            let mut e = vec![0; n];
            e[j] = 1;
            Monomial::new(e.clone(), e, Complex64::new(-0.5 * l, 0.0))
        });
        HamiltonianPoly::from_monomials(n, monomials).expect("diagonal terms are Hermitian")
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    /// Real value `h(z)`.
    pub fn eval(&self, z: &[Complex64]) -> Result<f64> {
        Ok(self.poly.eval(z)?.re)
    }

    /// Complex value, whose imaginary part is rounding noise.
    pub fn eval_complex(&self, z: &[Complex64]) -> Result<Complex64> {
        self.poly.eval(z)
    }

    pub fn to_document(&self) -> PolynomialDocument {
        PolynomialDocument {
            dim: self.dim(),
            hermitian: Some(true),
            components: vec![component_to_doc(&self.poly)],
        }
    }

    pub fn from_document(doc: &PolynomialDocument) -> Result<Self> {
        if doc.hermitian != Some(true) {
            return Err(Error::Parse("Hamiltonian documents need \"hermitian\": true".into()));
        }
        if doc.components.len() != 1 {
            return Err(Error::Parse(format!(
                "Hamiltonian documents hold one component, found {}",
                doc.components.len()
            )));
        }
        HamiltonianPoly::new(component_from_doc(doc.dim, &doc.components[0])?).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("Hamiltonian documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PolynomialDocument = serde_json::from_str(text).map_err(json_error)?;
        HamiltonianPoly::from_document(&doc)
    }
}

/// `P(z) = 2i ∂h/∂z̄`.
pub fn hamiltonian_field(h: &HamiltonianPoly) -> PolynomialField {
    let two_i = Complex64::new(0.0, 2.0);
    let components = (0..h.dim())
        .map(|j| h.poly.dzbar(j).expect("index within dimension").scale(two_i))
        .collect();
    PolynomialField::from_components(components).expect("components share the dimension")
}

/// `⟨h⟩ = Σ_{Λ·α = Λ·β} m_{αβ} z^α z̄^β`.
pub fn averaged_hamiltonian(h: &HamiltonianPoly, freqs: &FrequencyVector, tol: f64) -> Result<HamiltonianPoly> {
    Error::check_dim(h.dim(), freqs.dim())?;
    let kept = h.poly.filter(|a, b, _| freqs.balances(a, b, tol));
    HamiltonianPoly::new(kept)
}

/// Result of comparing `2i ∂⟨h⟩/∂z̄` with `⟨⟨2i ∂h/∂z̄⟩⟩` coefficient by coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct HamEffReport {
    pub max_discrepancy: f64,
    pub exact_mode: bool,
    pub passed: bool,
}

/// Float-mode acceptance threshold for [`check_ham_eff`].
pub const HAM_EFF_TOL: f64 = 1e-12;

pub fn check_ham_eff(h: &HamiltonianPoly, freqs: &FrequencyVector, tol: f64) -> Result<HamEffReport> {
    let lhs = hamiltonian_field(&averaged_hamiltonian(h, freqs, tol)?);
    let rhs = resonant_part(&hamiltonian_field(h), freqs, tol)?;
    let mut worst: f64 = 0.0;
    for (l, r) in lhs.components().iter().zip(rhs.components()) {
        for (a, b, c) in l.terms() {
            worst = worst.max((c - r.coeff(a, b)).norm());
        }
        for (a, b, c) in r.terms() {
            worst = worst.max((c - l.coeff(a, b)).norm());
        }
    }
    let exact_mode = freqs.is_exact();
    let passed = if exact_mode { worst == 0.0 } else { worst <= HAM_EFF_TOL };
    Ok(HamEffReport {
        max_discrepancy: worst,
        exact_mode,
        passed,
    })
}

/// Total energy `H = h₂ + εh`.
pub fn energy(h: &HamiltonianPoly, freqs: &FrequencyVector, epsilon: f64, z: &[Complex64]) -> Result<f64> {
    Ok(HamiltonianPoly::quadratic(freqs).eval(z)? + epsilon * h.eval(z)?)
}

/// Actions `I_j = |z_j|²/2` and angles `φ_j = arg z_j ∈ (−π, π]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionAngle {
    pub actions: Vec<f64>,
    pub angles: Vec<f64>,
}

pub fn to_action_angle(z: &[Complex64]) -> ActionAngle {
    let actions = z.iter().map(|c| 0.5 * c.norm_sqr()).collect();
    let angles = z
        .iter()
        .map(|c| {
            if *c == Complex64::default() {
                0.0
            } else {
                let a = c.arg();
                if a == -std::f64::consts::PI {
                    std::f64::consts::PI
                } else {
                    a
                }
            }
        })
        .collect();
    ActionAngle { actions, angles }
}

pub fn from_action_angle(aa: &ActionAngle) -> Result<Vec<Complex64>> {
    Error::check_dim(aa.actions.len(), aa.angles.len())?;
    aa.actions
        .iter()
        .zip(&aa.angles)
        .map(|(&i, &phi)| {
            if !(i >= 0.0) {
                Err(Error::InvalidArgument(format!("action {i} must be non-negative")))
            } else {
                Ok(Complex64::from_polar((2.0 * i).sqrt(), phi))
            }
        })
        .collect()
}

/// Per component `max_t ||z_j(t)|² − |z_j(0)|²|`.
pub fn action_drift(traj: &Trajectory) -> Vec<f64> {
    let start: Vec<f64> = traj.first_state().iter().map(|c| c.norm_sqr()).collect();
    let mut drift = vec![0.0; start.len()];
    for s in traj.states() {
        for ((d, c), s0) in drift.iter_mut().zip(s).zip(&start) {
            *d = f64::max(*d, (c.norm_sqr() - s0).abs());
        }
    }
    drift
}

/// One line of an action-drift report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftRow {
    pub j: usize,
    pub drift: f64,
    pub epsilon: f64,
}

/// CSV with columns `j, drift, epsilon`.
pub fn write_drift_csv<W: Write>(rows: &[DriftRow], out: W) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["j", "drift", "epsilon"])?;
    for r in rows {
        w.write_record([r.j.to_string(), r.drift.to_string(), r.epsilon.to_string()])?;
    }
    w.flush()
}

/// Checks that every monomial of `field` has degree at least `order`.
pub fn check_order(field: &PolynomialField, order: u32) -> Result<()> {
    for (j, p) in field.components().iter().enumerate() {
        if let Some(d) = p.min_degree() {
            if d < order {
                return Err(Error::OrderViolation {
                    component: j,
                    degree: d,
                    order,
                });
            }
        }
    }
    Ok(())
}

/// For `P = O(z^m)` returns `Q(w) = ε^{−m} P(εw)`; substituting `z = εw` in
/// `ż + iΛz = P(z)` gives `ẇ + iΛw = ε^{m−1} Q(w)`.
pub fn rescale_small_field(field: &PolynomialField, order: u32, epsilon: f64) -> Result<PolynomialField> {
    if order < 2 {
        return Err(Error::InvalidArgument(format!("order {order} must be at least 2")));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} must lie in (0, 1]")));
    }
    check_order(field, order)?;
    Ok(field.map_components(|_, p| {
        p.map_coeffs(|a, b, c| {
            let d = (a.norm() + b.norm()) as i32;
            c * epsilon.powi(d - order as i32)
        })
    }))
}

/// The small-amplitude problem for `ż + iΛz = 2i ∂h/∂z̄` with `z(0) = ε w0`:
/// a `w`-problem with perturbation parameter `ε^{m−1}`.
pub fn rescale_small(
    h: &HamiltonianPoly,
    freqs: &FrequencyVector,
    order: u32,
    epsilon: f64,
    w0: Vec<Complex64>,
) -> Result<SimulationProblem> {
    let field = rescale_small_field(&hamiltonian_field(h), order, epsilon)?;
    SimulationProblem::new(field, freqs.clone(), epsilon.powi(order as i32 - 1), w0)
}
