//! Experiment configuration: one JSON document per run.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use kbavg::dynamics::Form;
use kbavg::field::{Monomial, PolynomialDocument, PolynomialField};
use kbavg::hamiltonian::HamiltonianPoly;
use kbavg::resonance::FrequencyVector;
use kbavg::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const EXAMPLE_2_4: &str = "example-2.4";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Study {
    #[serde(alias = "resonance-table")]
    ResonantPart,
    Average,
    Simulate,
    Convergence,
    HamiltonianDrift,
}

impl fmt::Display for Study {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Study::ResonantPart => "resonant-part",
            Study::Average => "average",
            Study::Simulate => "simulate",
            Study::Convergence => "convergence",
            Study::HamiltonianDrift => "hamiltonian-drift",
        })
    }
}

/// Where a polynomial (field or Hamiltonian) comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Source {
    /// A named system; `"example-2.4"` is `v' + iv = ε(v²v̄ + v³)`.
    Builtin(String),
    /// A JSON polynomial document, relative to the config file.
    File(PathBuf),
    Inline(PolynomialDocument),
    /// Seeded random field with `terms` monomials per component.
    Random {
        dim: usize,
        degree: u32,
        terms: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub study: Option<Study>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<Source>,
    /// Literals such as `"3/2"` select exact mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<FrequencyVector>,
    /// Initial state as `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fast_horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dtau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Form>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub backward: bool,
    /// Resonance tolerance (resonant-part) or averaging tolerance (average).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Evaluation points for `average`, as lists of `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<[f64; 2]>>,
    /// Additional seeded points drawn uniformly from the unit ball.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonresonance_bound: Option<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub acknowledge_bounded_certificate: bool,
}

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_AVERAGE_TOL: f64 = 1e-4;
pub const MIN_NONRESONANCE_BOUND: u32 = 20;

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl FromStr for ExperimentConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|e| config_error(format!("config line {}, column {}: {e}", e.line(), e.column())))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = text.parse()?;
        let base = path.parent().unwrap_or(Path::new("."));
        for source in [&mut cfg.field, &mut cfg.hamiltonian].into_iter().flatten() {
            if let Source::File(p) = source {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("configs always serialize");
        s.push('\n');
        s
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn check_study(&self, study: Study) -> Result<(), CliError> {
        match self.study {
            Some(s) if s != study => Err(config_error(format!("config is for study {s}, not {study}"))),
            _ => Ok(()),
        }
    }

    pub fn field(&self) -> Result<PolynomialField, CliError> {
        let source = self
            .field
            .as_ref()
            .ok_or_else(|| config_error("config has no \"field\""))?;
        match source {
            Source::Builtin(name) if name == EXAMPLE_2_4 => Ok(example_2_4()),
            Source::Builtin(name) => Err(config_error(format!("unknown builtin field {name:?}"))),
            Source::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
                PolynomialField::from_json(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
            }
            Source::Inline(doc) => PolynomialField::from_document(doc).map_err(CliError::from),
            Source::Random { dim, degree, terms } => {
                if *dim == 0 {
                    return Err(config_error("random field needs dim >= 1"));
                }
                Ok(random_field(self.seed(), *dim, *degree, *terms))
            }
        }
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianPoly, CliError> {
        let source = self
            .hamiltonian
            .as_ref()
            .ok_or_else(|| config_error("config has no \"hamiltonian\""))?;
        match source {
            Source::File(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
                HamiltonianPoly::from_json(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
            }
            Source::Inline(doc) => HamiltonianPoly::from_document(doc).map_err(CliError::from),
            other => Err(config_error(format!(
                "Hamiltonians must be given as file or inline, not {other:?}"
            ))),
        }
    }

    /// Configured frequencies; `example-2.4` defaults to `Λ = (1)`.
    pub fn frequencies(&self, dim: usize) -> Result<FrequencyVector, CliError> {
        let freqs = match (&self.frequencies, &self.field) {
            (Some(f), _) => f.clone(),
            (None, Some(Source::Builtin(name))) if name == EXAMPLE_2_4 => FrequencyVector::parse(&["1"])?,
            _ => return Err(config_error("config has no \"frequencies\"")),
        };
        if freqs.dim() != dim {
            return Err(config_error(format!(
                "{} frequencies for a {dim}-dimensional system",
                freqs.dim()
            )));
        }
        Ok(freqs)
    }

    pub fn v0(&self, dim: usize) -> Result<Vec<Complex64>, CliError> {
        let v0 = self.v0.as_ref().ok_or_else(|| config_error("config has no \"v0\""))?;
        if v0.len() != dim {
            return Err(config_error(format!(
                "v0 has {} entries for a {dim}-dimensional system",
                v0.len()
            )));
        }
        Ok(v0.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
    }

    /// Epsilons in `(0, 1]`, or `[0, 1]` when `allow_zero`; at least `min_count`.
    pub fn epsilons(&self, min_count: usize, allow_zero: bool) -> Result<Vec<f64>, CliError> {
        if self.epsilons.len() < min_count {
            return Err(config_error(format!(
                "need at least {min_count} epsilon value(s), found {}",
                self.epsilons.len()
            )));
        }
        for &e in &self.epsilons {
            let ok = if allow_zero {
                (0.0..=1.0).contains(&e)
            } else {
                e > 0.0 && e <= 1.0
            };
            if !ok {
                return Err(config_error(format!("epsilon {e} outside (0, 1]")));
            }
        }
        Ok(self.epsilons.clone())
    }

    /// Explicit points followed by `random_points` seeded draws from `B_1`.
    pub fn average_points(&self, dim: usize) -> Result<Vec<Vec<Complex64>>, CliError> {
        let mut out = Vec::new();
        for p in &self.points {
            if p.len() != dim {
                return Err(config_error(format!(
                    "point has {} entries for a {dim}-dimensional system",
                    p.len()
                )));
            }
            out.push(p.iter().map(|[re, im]| Complex64::new(*re, *im)).collect());
        }
        if let Some(n) = self.random_points {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed() ^ 0x5eed_0fa7);
            for _ in 0..n {
                out.push(kbavg::field::sample_ball(&mut rng, dim, 1.0));
            }
        }
        if out.is_empty() {
            return Err(config_error("average needs \"points\" or \"random_points\""));
        }
        Ok(out)
    }
}

/// `v' + iv = ε(v²v̄ + v³)`.
pub fn example_2_4() -> PolynomialField {
    PolynomialField::from_terms(
        1,
        [
            (0, Monomial::new(vec![2], vec![1], Complex64::new(1.0, 0.0))),
            (0, Monomial::new(vec![3], vec![0], Complex64::new(1.0, 0.0))),
        ],
    )
    .expect("builtin field is valid")
}

/// Seeded random field: `terms` monomials per component, total degree
/// uniform in `0..=degree`, coefficients uniform in the unit square.
pub fn random_field(seed: u64, dim: usize, degree: u32, terms: usize) -> PolynomialField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = |rng: &mut ChaCha8Rng, d: u32| {
        let mut e = vec![0u32; dim];
        for _ in 0..d {
            e[rng.random_range(0..dim)] += 1;
        }
        e
    };
    let mut monomials = Vec::with_capacity(dim * terms);
    for j in 0..dim {
        for _ in 0..terms {
            let d = rng.random_range(0..=degree);
            let da = rng.random_range(0..=d);
            let alpha = index(&mut rng, da);
            let beta = index(&mut rng, d - da);
            let coeff = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            monomials.push((j, Monomial::new(alpha, beta, coeff)));
        }
    }
    PolynomialField::from_terms(dim, monomials).expect("random monomials are well formed")
}
