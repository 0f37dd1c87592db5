//! Collective-spin moments, the squeezing parameter and closed-form
//! reference curves.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::PairCoupling;
use crate::state::{Axis, StateVector};

/// `|⟨J_z⟩|` at or below `JZ_UNDEFINED_TOL · N` leaves ξ² undefined.
pub const JZ_UNDEFINED_TOL: f64 = 1e-9;

/// Ratio between the simulated initial slope of `(ΔJ_{−π/4})²` and the raw
/// pair sum `−½ Σ χ_{k,l} ⟨h_k h_l⟩`. Fixed by the fully filled lattice,
/// where the slope must equal `d/dt` of the one-neighbour closed form at
/// `t = 0`, i.e. `−Nχ/4` against a raw sum of `−Nχ/2`.
pub const SLOPE_CONVENTION: f64 = 0.5;

const TIE_TOL: f64 = 1e-12;

/// First moments and symmetrized second moments of `(J_x, J_y, J_z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentSet {
    pub mean: [f64; 3],
    /// `⟨J_a J_b + J_b J_a⟩ / 2`, indexed x = 0, y = 1, z = 2.
    pub second: [[f64; 3]; 3],
}

impl MomentSet {
    pub fn variance(&self, a: usize) -> f64 {
        self.second[a][a] - self.mean[a] * self.mean[a]
    }

    pub fn covariance(&self, a: usize, b: usize) -> f64 {
        self.second[a][b] - self.mean[a] * self.mean[b]
    }

    pub fn jz(&self) -> f64 {
        self.mean[2]
    }

    /// Variance of `J_θ = cos θ J_x + sin θ J_y`.
    pub fn variance_at(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        c * c * self.variance(0) + s * s * self.variance(1) + 2.0 * s * c * self.covariance(0, 1)
    }

    /// Moments after `exp(−i·angle·J_axis)` is applied to the state. The
    /// collective operators transform as a classical rotation, so no state is
    /// needed.
    pub fn rotated(&self, axis: Axis, angle: f64) -> MomentSet {
        let (s, c) = angle.sin_cos();
        // For rotation about a with (a, b, c) cyclic:
        // J_b -> J_b cos - J_c sin, J_c -> J_c cos + J_b sin.
        let (a, b, cc) = match axis {
            Axis::X => (0, 1, 2),
            Axis::Y => (1, 2, 0),
            Axis::Z => (2, 0, 1),
        };
        let mut r = [[0.0; 3]; 3];
        r[a][a] = 1.0;
        r[b][b] = c;
        r[b][cc] = -s;
        r[cc][cc] = c;
        r[cc][b] = s;
        let mut mean = [0.0; 3];
        let mut second = [[0.0; 3]; 3];
        for i in 0..3 {
            mean[i] = (0..3).map(|k| r[i][k] * self.mean[k]).sum();
            for j in 0..3 {
                second[i][j] = (0..3)
                    .flat_map(|k| (0..3).map(move |l| (k, l)))
                    .map(|(k, l)| r[i][k] * self.second[k][l] * r[j][l])
                    .sum();
            }
        }
        MomentSet { mean, second }
    }
}

/// Exact moments of the collective spin.
pub fn collective_moments(state: &StateVector) -> MomentSet {
    let n = state.num_sites();
    let amps = state.amplitudes();
    let dim = amps.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut jx = vec![zero; dim];
    let mut jy = vec![zero; dim];
    for k in 0..n {
        let bit = 1usize << k;
        for base in (0..dim).filter(|i| i & bit == 0) {
            let (a0, a1) = (amps[base], amps[base | bit]);
            jx[base] += a1;
            jx[base | bit] += a0;
            // ⟨0|j_y|1⟩ = i/2, ⟨1|j_y|0⟩ = −i/2
            jy[base] += Complex64::new(-a1.im, a1.re);
            jy[base | bit] += Complex64::new(a0.im, -a0.re);
        }
    }
    let half_n = n as f64 / 2.0;
    let jz: Vec<Complex64> = amps
        .iter()
        .enumerate()
        .map(|(index, a)| a * (index.count_ones() as f64 - half_n))
        .collect();
    for v in jx.iter_mut().chain(jy.iter_mut()) {
        *v *= 0.5;
    }
    let dot = |a: &[Complex64], b: &[Complex64]| -> f64 {
        a.iter().zip(b).map(|(u, v)| (u.conj() * v).re).sum()
    };
    let applied = [&jx, &jy, &jz];
    let mut mean = [0.0; 3];
    let mut second = [[0.0; 3]; 3];
    for a in 0..3 {
        mean[a] = dot(amps, applied[a]);
        for b in a..3 {
            let v = dot(applied[a], applied[b]);
            second[a][b] = v;
            second[b][a] = v;
        }
    }
    MomentSet { mean, second }
}

/// Angle in `(−π/2, π/2]` minimizing `(ΔJ_θ)²`, and that minimum:
/// `(A+B)/2 − sqrt(((A−B)/2)² + C²)`. Returns `θ = 0` when the variance does
/// not depend on θ.
pub fn min_variance_theta(m: &MomentSet) -> (f64, f64) {
    let a = m.variance(0);
    let b = m.variance(1);
    let c = m.covariance(0, 1);
    let half_diff = (a - b) / 2.0;
    let radius = half_diff.hypot(c);
    let min = (a + b) / 2.0 - radius;
    if radius <= TIE_TOL * (a + b).abs().max(1.0) {
        return (0.0, min);
    }
    let mut theta = 0.5 * (-c).atan2(-half_diff);
    if theta <= -FRAC_PI_2 {
        theta += std::f64::consts::PI;
    }
    (theta, min)
}

/// `ξ² = N (ΔJ_θ)² / ⟨J_z⟩²`.
pub fn xi_squared(m: &MomentSet, n_atoms: usize, theta: f64) -> Result<f64> {
    xi_squared_from(m.variance_at(theta), m.jz(), n_atoms)
}

fn xi_squared_from(variance: f64, jz: f64, n_atoms: usize) -> Result<f64> {
    if jz.abs() <= JZ_UNDEFINED_TOL * n_atoms.max(1) as f64 {
        return Err(Error::UndefinedSqueezing { jz });
    }
    Ok(n_atoms as f64 * variance / (jz * jz))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezingReport {
    pub time: f64,
    pub theta_opt: f64,
    pub min_variance: f64,
    /// `None` where `⟨J_z⟩` vanishes.
    pub xi2: Option<f64>,
}

impl SqueezingReport {
    pub fn from_moments(m: &MomentSet, n_atoms: usize, time: f64) -> Self {
        let (theta_opt, min_variance) = min_variance_theta(m);
        Self {
            time,
            theta_opt,
            min_variance,
            xi2: xi_squared_from(min_variance, m.jz(), n_atoms).ok(),
        }
    }
}

/// `(ΔJ_{−π/4})² = N/4 [1 + ¼ sin²(χt) − sin(χt)]` for one visited neighbour.
pub fn analytic_variance_one_neighbor(n: usize, chi_t: f64) -> f64 {
    let s = chi_t.sin();
    n as f64 / 4.0 * (1.0 + 0.25 * s * s - s)
}

/// `⟨J_z⟩ = −N/2 cos²(χt)` as printed for one visited neighbour.
pub fn analytic_jz_one_neighbor(n: usize, chi_t: f64) -> f64 {
    let c = chi_t.cos();
    -(n as f64) / 2.0 * c * c
}

/// ξ² obtained by combining the two closed forms above.
pub fn analytic_xi_squared_one_neighbor(n: usize, chi_t: f64) -> Result<f64> {
    xi_squared_from(
        analytic_variance_one_neighbor(n, chi_t),
        analytic_jz_one_neighbor(n, chi_t),
        n,
    )
}

/// `−½ Σ_{k,l} χ_{k,l} ⟨h_k h_l⟩` with no convention factor applied.
pub fn raw_initial_slope(
    couplings: &[PairCoupling],
    correlation: impl Fn(usize, usize) -> f64,
) -> f64 {
    -0.5 * couplings
        .iter()
        .map(|p| p.weight * correlation(p.site_k, p.site_l))
        .sum::<f64>()
}

/// Predicted `d/dt (ΔJ_{−π/4})²` at `t = 0`, including [`SLOPE_CONVENTION`].
/// `⟨J_z⟩` has zero initial slope.
pub fn initial_slope_prediction(
    couplings: &[PairCoupling],
    correlation: impl Fn(usize, usize) -> f64,
) -> f64 {
    SLOPE_CONVENTION * raw_initial_slope(couplings, correlation)
}

/// Convention factor implied by a simulated slope and the raw pair sum.
pub fn calibrate_slope_convention(simulated_slope: f64, raw_slope: f64) -> Result<f64> {
    if raw_slope == 0.0 {
        return Err(Error::Argument(
            "cannot calibrate against a zero pair sum".into(),
        ));
    }
    Ok(simulated_slope / raw_slope)
}

/// Where a scalar function of time reaches its smallest value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeMinimum {
    pub time: f64,
    pub value: f64,
}

/// Golden-section search for a minimum of `f` inside `[lo, hi]`.
/// `None` values count as `+∞`.
pub fn golden_section(
    mut f: impl FnMut(f64) -> Option<f64>,
    lo: f64,
    hi: f64,
    tol: f64,
) -> TimeMinimum {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut eval = |t: f64| f(t).unwrap_or(f64::INFINITY);
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = eval(x2);
        }
    }
    if f1 <= f2 {
        TimeMinimum {
            time: x1,
            value: f1,
        }
    } else {
        TimeMinimum {
            time: x2,
            value: f2,
        }
    }
}

/// Index of the smallest defined value.
pub fn argmin_defined(values: &[Option<f64>]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
            Some((_, bv)) if bv <= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Refines a sampled minimum: golden-section search between the grid
/// neighbours of the best sample. The grid value wins if refinement does not
/// improve on it.
pub fn refine_sampled_minimum(
    f: impl FnMut(f64) -> Option<f64>,
    times: &[f64],
    values: &[Option<f64>],
    tol: f64,
) -> Option<TimeMinimum> {
    let best = argmin_defined(values)?;
    let grid = TimeMinimum {
        time: times[best],
        value: values[best]?,
    };
    let lo = times[best.saturating_sub(1)];
    let hi = times[(best + 1).min(times.len() - 1)];
    if hi <= lo {
        return Some(grid);
    }
    let refined = golden_section(f, lo, hi, tol);
    Some(if refined.value < grid.value {
        refined
    } else {
        grid
    })
}

/// Uniform grid of `points` times covering `[lo, hi]` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Grid search followed by golden-section refinement.
pub fn minimize_over_time(
    mut f: impl FnMut(f64) -> Option<f64>,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
) -> Option<TimeMinimum> {
    let times = uniform_grid(lo, hi, points);
    let values: Vec<_> = times.iter().map(|&t| f(t)).collect();
    refine_sampled_minimum(f, &times, &values, tol)
}
