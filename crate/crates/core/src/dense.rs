//! Brute-force reference: the Hamiltonian assembled literally as a dense
//! matrix and exponentiated directly, with no gates involved.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::spin::{self, Mat4};
use crate::state::StateVector;

/// Largest register for which a dense matrix is built (4096 × 4096).
pub const MAX_DENSE_SITES: usize = 12;

const TAYLOR_TOL: f64 = 1e-34;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn add_to(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] += value;
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim)
            .all(|i| (i..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Adds `coefficient · op` acting on sites `(k, l)`, where `op` is indexed
    /// `2·bit_k + bit_l`.
    pub fn add_two_site(&mut self, k: usize, l: usize, op: &Mat4, coefficient: f64) {
        let (bk, bl) = (1usize << k, 1usize << l);
        let local = |index: usize| 2 * ((index & bk != 0) as usize) + (index & bl != 0) as usize;
        for col in 0..self.dim {
            let rest = col & !(bk | bl);
            let c = local(col);
            for (r, row_op) in op.iter().enumerate() {
                let entry = row_op[c];
                if entry == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let row = rest | if r & 2 != 0 { bk } else { 0 } | if r & 1 != 0 { bl } else { 0 };
                self.add_to(row, col, entry * coefficient);
            }
        }
    }
}

/// `H = Σ_{(k,l)} w_kl (c_x j_x,k j_x,l + c_y j_y,k j_y,l + c_z j_z,k j_z,l)`
/// over the coupling table, on the atom register.
pub fn build_dense_hamiltonian(spec: &HamiltonianSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    let sites = spec.atom_count();
    if sites > MAX_DENSE_SITES {
        return Err(Error::Capacity {
            what: "dense oracle sites",
            requested: sites,
            limit: MAX_DENSE_SITES,
        });
    }
    let mut h = DenseMatrix::zeros(1usize << sites);
    let [cx, cy, cz] = spec.axis_coefficients();
    let terms = [
        (cx, spin::kron2(&spin::jx(), &spin::jx())),
        (cy, spin::kron2(&spin::jy(), &spin::jy())),
        (cz, spin::kron2(&spin::jz(), &spin::jz())),
    ];
    for pair in spec.register_table()? {
        for (c, op) in &terms {
            if *c != 0.0 {
                h.add_two_site(pair.site_k, pair.site_l, op, c * pair.weight);
            }
        }
    }
    Ok(h)
}

/// `exp(−iHt)·state` by a scaled Taylor series applied to the vector.
pub fn dense_evolve(h: &DenseMatrix, state: &StateVector, t: f64) -> Result<StateVector> {
    if h.dim() != state.dim() {
        return Err(Error::Validation(format!(
            "matrix dimension {} does not match state dimension {}",
            h.dim(),
            state.dim()
        )));
    }
    let mut v = state.amplitudes().to_vec();
    if t == 0.0 {
        return StateVector::from_amplitudes(state.num_sites(), v);
    }
    let scale = h.one_norm() * t.abs();
    let substeps = (scale / 0.5).ceil().max(1.0) as usize;
    let tau = t / substeps as f64;
    let minus_i_tau = Complex64::new(0.0, -tau);
    for _ in 0..substeps {
        let mut term = v.clone();
        let mut sum = v.clone();
        for order in 1..200 {
            term = h.matvec(&term);
            let factor = minus_i_tau / order as f64;
            let mut size = 0.0;
            for (s, x) in sum.iter_mut().zip(term.iter_mut()) {
                *x *= factor;
                *s += *x;
                size += x.norm_sqr();
            }
            if size < TAYLOR_TOL {
                break;
            }
        }
        v = sum;
    }
    StateVector::from_amplitudes(state.num_sites(), v)
}
