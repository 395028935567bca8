#![allow(dead_code)]

use kbavg::field::{Monomial, Polynomial, PolynomialField};
use kbavg::hamiltonian::HamiltonianPoly;
use kbavg::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_index<R: Rng>(rng: &mut R, dim: usize, degree: u32) -> Vec<u32> {
    let mut idx = vec![0u32; dim];
    for _ in 0..degree {
        idx[rng.random_range(0..dim)] += 1;
    }
    idx
}

pub fn random_coeff<R: Rng>(rng: &mut R) -> Complex64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// `terms` random monomials per component with total degree in `0..=max_degree`.
pub fn random_field<R: Rng>(rng: &mut R, dim: usize, max_degree: u32, terms: usize) -> PolynomialField {
    let mut monomials = Vec::new();
    for j in 0..dim {
        for _ in 0..terms {
            let d = rng.random_range(0..=max_degree);
            let da = rng.random_range(0..=d);
            let alpha = random_index(rng, dim, da);
            let beta = random_index(rng, dim, d - da);
            monomials.push((j, Monomial::new(alpha, beta, random_coeff(rng))));
        }
    }
    PolynomialField::from_terms(dim, monomials).unwrap()
}

/// A Hermitian-symmetric `h` built from `pairs` random terms and their mirrors.
pub fn random_hamiltonian<R: Rng>(rng: &mut R, dim: usize, max_degree: u32, pairs: usize) -> HamiltonianPoly {
    let mut poly = Polynomial::zero(dim);
    for _ in 0..pairs {
        let d = rng.random_range(1..=max_degree);
        let da = rng.random_range(0..=d);
        let alpha = random_index(rng, dim, da);
        let beta = random_index(rng, dim, d - da);
        let m = random_coeff(rng);
        let term = Polynomial::from_monomials(dim, [Monomial::new(alpha.clone(), beta.clone(), m)]).unwrap();
        let mirror = Polynomial::from_monomials(dim, [Monomial::new(beta, alpha, m.conj())]).unwrap();
        poly = poly.add(&term).unwrap().add(&mirror).unwrap();
    }
    HamiltonianPoly::new(poly).unwrap()
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// The field `v²v̄ + v³` of the one-dimensional worked example.
pub fn example_field() -> PolynomialField {
    PolynomialField::from_terms(
        1,
        [
            (0, Monomial::new(vec![2], vec![1], c(1.0, 0.0))),
            (0, Monomial::new(vec![3], vec![0], c(1.0, 0.0))),
        ],
    )
    .unwrap()
}
