//! The N-site spin register and its primitive unitaries.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spin::{self, Mat2, Mat4};

/// Largest register the simulator will allocate (2^24 amplitudes, 256 MiB).
pub const MAX_SITES: usize = 24;

const NORM_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Collision phase: `|1⟩_control |0⟩_target → e^{iφ} |1⟩_control |0⟩_target`,
/// every other two-site component untouched.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGate {
    pub control: usize,
    pub target: usize,
    pub phi: f64,
}

impl PhaseGate {
    pub fn new(control: usize, target: usize, phi: f64) -> Result<Self> {
        if control == target {
            return Err(Error::Validation(format!(
                "phase gate needs two distinct sites, got {control} twice"
            )));
        }
        Ok(Self {
            control,
            target,
            phi,
        })
    }

    fn check(&self, num_sites: usize) -> Result<()> {
        if self.control == self.target {
            return Err(Error::Validation(format!(
                "phase gate needs two distinct sites, got {} twice",
                self.control
            )));
        }
        for index in [self.control, self.target] {
            if index >= num_sites {
                return Err(Error::IndexOutOfRange {
                    index,
                    size: num_sites,
                });
            }
        }
        Ok(())
    }
}

/// Dense amplitudes of the spin register.
///
/// Bit `k` of a basis index is the state of site `k`; a set bit is `|1⟩`
/// (`m = +1/2`), a clear bit is `|0⟩` (`m = -1/2`).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_sites: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// All atoms in `|0⟩`.
    pub fn new(num_sites: usize) -> Result<Self> {
        Self::basis_state(num_sites, 0)
    }

    pub fn basis_state(num_sites: usize, index: usize) -> Result<Self> {
        check_capacity(num_sites)?;
        let dim = 1usize << num_sites;
        if index >= dim {
            return Err(Error::Argument(format!(
                "basis index {index} outside a {num_sites}-site register"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            num_sites,
            amplitudes,
        })
    }

    /// Wraps caller-supplied amplitudes; they must already be normalized.
    pub fn from_amplitudes(num_sites: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_capacity(num_sites)?;
        if amplitudes.len() != 1usize << num_sites {
            return Err(Error::Validation(format!(
                "expected {} amplitudes for {num_sites} sites, got {}",
                1usize << num_sites,
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Validation(format!(
                "amplitudes not normalized: squared norm {norm}"
            )));
        }
        Ok(Self {
            num_sites,
            amplitudes,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.num_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|`, insensitive to global phase.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm())
    }

    /// Distance after removing the optimal global phase,
    /// `min_α ‖self − e^{iα} other‖ = sqrt(2 − 2|⟨self|other⟩|)` for unit vectors.
    pub fn phase_aligned_distance(&self, other: &StateVector) -> Result<f64> {
        let overlap = self.fidelity(other)?;
        Ok((2.0 - 2.0 * overlap).max(0.0).sqrt())
    }

    pub fn apply_phase_gate(&mut self, gate: &PhaseGate) -> Result<()> {
        self.apply_phase_layer(std::slice::from_ref(gate))
    }

    /// Applies a set of phase gates in one sweep. All phase gates are
    /// diagonal, so their order is irrelevant.
    pub fn apply_phase_layer(&mut self, gates: &[PhaseGate]) -> Result<()> {
        for gate in gates {
            gate.check(self.num_sites)?;
        }
        if gates.is_empty() {
            return Ok(());
        }
        let masks: Vec<(usize, usize, f64)> = gates
            .iter()
            .map(|g| (1usize << g.control, 1usize << g.target, g.phi))
            .collect();
        let phi0 = masks[0].2;
        if masks.iter().all(|m| m.2 == phi0) {
            // shared phase: count hits and look the factor up
            let table: Vec<Complex64> = (0..=masks.len())
                .map(|c| Complex64::from_polar(1.0, phi0 * c as f64))
                .collect();
            for (index, amp) in self.amplitudes.iter_mut().enumerate() {
                let hits = masks
                    .iter()
                    .filter(|&&(control, target, _)| index & control != 0 && index & target == 0)
                    .count();
                if hits != 0 {
                    *amp *= table[hits];
                }
            }
            return Ok(());
        }
        for (index, amp) in self.amplitudes.iter_mut().enumerate() {
            let mut phase = 0.0;
            for &(control, target, phi) in &masks {
                if index & control != 0 && index & target == 0 {
                    phase += phi;
                }
            }
            if phase != 0.0 {
                *amp *= Complex64::from_polar(1.0, phase);
            }
        }
        Ok(())
    }

    /// Applies a 2×2 unitary to one site. The caller guarantees unitarity.
    pub fn apply_single_site(&mut self, site: usize, u: &Mat2) -> Result<()> {
        if site >= self.num_sites {
            return Err(Error::IndexOutOfRange {
                index: site,
                size: self.num_sites,
            });
        }
        apply_site_unchecked(&mut self.amplitudes, site, u);
        Ok(())
    }

    /// The same 2×2 unitary on every site.
    pub fn apply_uniform_single_site(&mut self, u: &Mat2) {
        for site in 0..self.num_sites {
            apply_site_unchecked(&mut self.amplitudes, site, u);
        }
    }

    /// `exp(−i·angle·J_axis)` with `J_axis = Σ_k j_axis,k`.
    pub fn collective_rotation(&mut self, axis: Axis, angle: f64) {
        if angle == 0.0 {
            return;
        }
        self.apply_uniform_single_site(&rotation_matrix(axis, angle));
    }

    /// `exp(−i·angle·j_axis,site)` on a single site. Used for state
    /// preparation only; the lattice protocols address all atoms at once.
    pub fn rotate_site(&mut self, site: usize, axis: Axis, angle: f64) -> Result<()> {
        self.apply_single_site(site, &rotation_matrix(axis, angle))
    }

    /// Applies `u` to sites `(k, l)`. The 4×4 matrix is indexed
    /// `2·bit_k + bit_l`, i.e. ordering `(00, 01, 10, 11)` with site `k` first.
    pub fn apply_two_site_unitary(&mut self, k: usize, l: usize, u: &Mat4) -> Result<()> {
        if k == l {
            return Err(Error::Validation(format!(
                "two-site unitary needs distinct sites, got {k} twice"
            )));
        }
        for index in [k, l] {
            if index >= self.num_sites {
                return Err(Error::IndexOutOfRange {
                    index,
                    size: self.num_sites,
                });
            }
        }
        if !spin::is_unitary4(u, UNITARY_TOL) {
            return Err(Error::Validation("two-site matrix is not unitary".into()));
        }
        let (bk, bl) = (1usize << k, 1usize << l);
        for base in 0..self.amplitudes.len() {
            if base & (bk | bl) != 0 {
                continue;
            }
            let idx = [base, base | bl, base | bk, base | bk | bl];
            let v = idx.map(|i| self.amplitudes[i]);
            for (row, &i) in idx.iter().enumerate() {
                self.amplitudes[i] =
                    u[row][0] * v[0] + u[row][1] * v[1] + u[row][2] * v[2] + u[row][3] * v[3];
            }
        }
        Ok(())
    }

    /// `⟨j_z,k⟩ = (P[bit_k = 1] − P[bit_k = 0]) / 2`.
    pub fn site_magnetization(&self, site: usize) -> Result<f64> {
        if site >= self.num_sites {
            return Err(Error::IndexOutOfRange {
                index: site,
                size: self.num_sites,
            });
        }
        let bit = 1usize << site;
        let up: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        Ok(up - 0.5 * self.norm_sqr())
    }

    pub fn magnetization_profile(&self) -> Vec<f64> {
        let mut up = vec![0.0; self.num_sites];
        let mut total = 0.0;
        for (index, amp) in self.amplitudes.iter().enumerate() {
            let p = amp.norm_sqr();
            total += p;
            for (site, acc) in up.iter_mut().enumerate() {
                if index >> site & 1 == 1 {
                    *acc += p;
                }
            }
        }
        up.into_iter().map(|u| u - 0.5 * total).collect()
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    fn check_same_shape(&self, other: &StateVector) -> Result<()> {
        if self.num_sites != other.num_sites {
            return Err(Error::Validation(format!(
                "register sizes differ: {} vs {}",
                self.num_sites, other.num_sites
            )));
        }
        Ok(())
    }
}

fn check_capacity(num_sites: usize) -> Result<()> {
    if num_sites == 0 || num_sites > MAX_SITES {
        return Err(Error::Capacity {
            what: "register sites",
            requested: num_sites,
            limit: MAX_SITES,
        });
    }
    Ok(())
}

fn apply_site_unchecked(amps: &mut [Complex64], site: usize, u: &Mat2) {
    let stride = 1usize << site;
    for block in (0..amps.len()).step_by(stride << 1) {
        for i0 in block..block + stride {
            let i1 = i0 | stride;
            let (a0, a1) = (amps[i0], amps[i1]);
            amps[i0] = u[0][0] * a0 + u[0][1] * a1;
            amps[i1] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

/// `exp(−i·angle·j_axis)` for a single spin-1/2.
pub fn rotation_matrix(axis: Axis, angle: f64) -> Mat2 {
    let c = Complex64::new((angle / 2.0).cos(), 0.0);
    let s = (angle / 2.0).sin();
    let zero = Complex64::new(0.0, 0.0);
    match axis {
        Axis::X => [[c, Complex64::new(0.0, -s)], [Complex64::new(0.0, -s), c]],
        Axis::Y => [[c, Complex64::new(s, 0.0)], [Complex64::new(-s, 0.0), c]],
        Axis::Z => [
            [Complex64::from_polar(1.0, angle / 2.0), zero],
            [zero, Complex64::from_polar(1.0, -angle / 2.0)],
        ],
    }
}

/// `(|0⟩ + |1⟩)/√2` on one site.
pub fn equal_superposition() -> StateVector {
    let a = Complex64::new(FRAC_1_SQRT_2, 0.0);
    StateVector {
        num_sites: 1,
        amplitudes: vec![a, a],
    }
}
