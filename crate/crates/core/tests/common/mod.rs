#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use latticesq_core::StateVector;

pub type CMat = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sx() -> [[Complex64; 2]; 2] {
    [[c(0.0, 0.0), c(0.5, 0.0)], [c(0.5, 0.0), c(0.0, 0.0)]]
}

pub fn sy() -> [[Complex64; 2]; 2] {
    [[c(0.0, 0.0), c(0.0, 0.5)], [c(0.0, -0.5), c(0.0, 0.0)]]
}

pub fn sz() -> [[Complex64; 2]; 2] {
    [[c(-0.5, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]]
}

/// Single-site operator acting on site `k` of an `n`-site register.
pub fn site_op(n: usize, k: usize, o: [[Complex64; 2]; 2]) -> CMat {
    let dim = 1 << n;
    CMat::from_fn(dim, dim, |i, j| {
        if (i ^ j) & !(1 << k) != 0 {
            c(0.0, 0.0)
        } else {
            o[(i >> k) & 1][(j >> k) & 1]
        }
    })
}

/// `Σ coefficient · (o_k o_l)` summed over the listed pairs, for each of the
/// three axis terms.
pub fn pair_hamiltonian(n: usize, pairs: &[(usize, usize)], coeffs: [f64; 3]) -> CMat {
    let dim = 1 << n;
    let mut h = CMat::zeros(dim, dim);
    let ops = [sx(), sy(), sz()];
    for &(k, l) in pairs {
        for (a, &w) in coeffs.iter().enumerate() {
            if w != 0.0 {
                h += (site_op(n, k, ops[a]) * site_op(n, l, ops[a])) * c(w, 0.0);
            }
        }
    }
    h
}

/// Pairs `(k, k + d mod m)` for `d = 1..=r` on a periodic ring.
pub fn ring_pairs(m: usize, r: usize) -> Vec<(usize, usize)> {
    (1..=r)
        .flat_map(|d| (0..m).map(move |k| (k, (k + d) % m)))
        .collect()
}

/// Collective operator `J_a`.
pub fn collective(n: usize, o: [[Complex64; 2]; 2]) -> CMat {
    let dim = 1 << n;
    (0..n).fold(CMat::zeros(dim, dim), |acc, k| acc + site_op(n, k, o))
}

pub fn to_vector(s: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn from_vector(n: usize, v: &DVector<Complex64>) -> StateVector {
    StateVector::from_amplitudes(n, v.iter().copied().collect()).unwrap()
}

/// `exp(−iHt)|ψ⟩` via nalgebra's matrix exponential.
pub fn expm_evolve(h: &CMat, s: &StateVector, t: f64) -> StateVector {
    let u = (h * c(0.0, -t)).exp();
    from_vector(s.num_sites(), &(u * to_vector(s)))
}

pub fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.fidelity(b).unwrap()
}

/// Real expectation value `⟨ψ|O|ψ⟩`.
pub fn expectation(o: &CMat, s: &StateVector) -> f64 {
    let v = to_vector(s);
    (v.adjoint() * o * &v)[(0, 0)].re
}
