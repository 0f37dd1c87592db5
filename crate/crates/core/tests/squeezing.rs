mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use approx::assert_abs_diff_eq;
use common::*;
use latticesq_core::evolution::{apply_schedule, LinearPhaseFamily};
use latticesq_core::observables::{
    analytic_variance_one_neighbor, collective_moments, initial_slope_prediction,
    min_variance_theta, raw_initial_slope, xi_squared, SLOPE_CONVENTION,
};
use latticesq_core::schedule::compile;
use latticesq_core::{Axis, CouplingKind, HamiltonianSpec, LatticeConfig, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps: Vec<_> = (0..1 << n)
        .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(n, amps.into_iter().map(|a| a / norm).collect()).unwrap()
}

fn one_neighbor_family(n: usize) -> LinearPhaseFamily {
    let spec = HamiltonianSpec::new(CouplingKind::Xx, LatticeConfig::periodic(n).unwrap());
    LinearPhaseFamily::new(
        &StateVector::new(n).unwrap(),
        &compile(&spec, 1.0, 0.1).unwrap(),
    )
    .unwrap()
}

#[test]
fn moments_match_operator_expectations() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 5;
    let ops = [
        collective(n, sx()),
        collective(n, sy()),
        collective(n, sz()),
    ];
    for _ in 0..5 {
        let s = random_state(n, &mut rng);
        let m = collective_moments(&s);
        for a in 0..3 {
            assert_abs_diff_eq!(m.mean[a], expectation(&ops[a], &s), epsilon = 1e-12);
            for b in 0..3 {
                let sym = (&ops[a] * &ops[b] + &ops[b] * &ops[a]) * c(0.5, 0.0);
                assert_abs_diff_eq!(m.second[a][b], expectation(&sym, &s), epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn closed_form_minimum_matches_dense_theta_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let m = collective_moments(&random_state(4, &mut rng));
        let (theta, min) = min_variance_theta(&m);
        let points = 100_000;
        let (scan_theta, scan_min) = (0..points)
            .map(|i| -FRAC_PI_2 + PI * (i as f64 + 1.0) / points as f64)
            .map(|t| (t, m.variance_at(t)))
            .fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert_abs_diff_eq!(min, scan_min, epsilon = 1e-9);
        assert_abs_diff_eq!(m.variance_at(theta), min, epsilon = 1e-12);
        assert!(theta > -FRAC_PI_2 && theta <= FRAC_PI_2);
        let gap = (theta - scan_theta).abs();
        assert!(gap.min(PI - gap) < 1e-3);
    }
}

#[test]
fn one_neighbor_variance_matches_closed_form() {
    let n = 15;
    let family = one_neighbor_family(n);
    for i in 0..60 {
        let chi_t = PI * i as f64 / 59.0;
        let m = collective_moments(&family.state_at(chi_t));
        let sim = m.variance_at(-FRAC_PI_4);
        assert_abs_diff_eq!(
            sim,
            analytic_variance_one_neighbor(n, chi_t),
            epsilon = 1e-10
        );
    }
}

#[test]
fn one_neighbor_mean_spin_precesses_at_half_rate() {
    // each atom's x-x bonds rotate its z projection by cos(χt/2) per neighbour
    let n = 9;
    let family = one_neighbor_family(n);
    for chi_t in [0.2, 1.0, 2.5] {
        let jz = collective_moments(&family.state_at(chi_t)).jz();
        assert_abs_diff_eq!(
            jz,
            -(n as f64) / 2.0 * (chi_t / 2.0).cos().powi(2),
            epsilon = 1e-10
        );
    }
}

#[test]
fn short_time_optimal_angle_is_minus_quarter_turn() {
    let family = one_neighbor_family(10);
    let (theta, _) = min_variance_theta(&collective_moments(&family.state_at(1e-3)));
    assert_abs_diff_eq!(theta, -FRAC_PI_4, epsilon = 1e-3);
}

#[test]
fn squeezing_sets_in_immediately() {
    let family = one_neighbor_family(10);
    for chi_t in [0.01, 0.05, 0.2] {
        let m = collective_moments(&family.state_at(chi_t));
        assert!(xi_squared(&m, 10, -FRAC_PI_4).unwrap() < 1.0);
    }
}

#[test]
fn z_rotation_shifts_optimal_angle() {
    let family = one_neighbor_family(8);
    let s = family.state_at(0.6);
    let (theta0, min0) = min_variance_theta(&collective_moments(&s));
    for alpha in [0.2, -0.5, 1.0] {
        let mut r = s.clone();
        r.collective_rotation(Axis::Z, alpha);
        let m = collective_moments(&r);
        let (theta, min) = min_variance_theta(&m);
        assert_abs_diff_eq!(min, min0, epsilon = 1e-10);
        let shift = (theta - theta0 - alpha).rem_euclid(PI);
        assert!(shift.min(PI - shift) < 1e-10, "alpha={alpha}");
        let classical = collective_moments(&s).rotated(Axis::Z, alpha);
        for a in 0..3 {
            assert_abs_diff_eq!(classical.mean[a], m.mean[a], epsilon = 1e-12);
            for b in 0..3 {
                assert_abs_diff_eq!(classical.second[a][b], m.second[a][b], epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn full_lattice_slope_fixes_convention_constant() {
    let n = 12;
    let spec = HamiltonianSpec::new(CouplingKind::Xx, LatticeConfig::periodic(n).unwrap());
    let table = spec.xx_couplings().unwrap();
    let raw = raw_initial_slope(&table, |_, _| 1.0);
    assert_abs_diff_eq!(raw, -(n as f64) / 2.0, epsilon = 1e-12);

    let family = one_neighbor_family(n);
    let h = 1e-5;
    let var = |t: f64| collective_moments(&family.state_at(t)).variance_at(-FRAC_PI_4);
    let simulated = (var(h) - var(0.0)) / h;
    assert_abs_diff_eq!(simulated, -(n as f64) / 4.0, epsilon = 1e-3);
    assert_abs_diff_eq!(simulated / raw, SLOPE_CONVENTION, epsilon = 1e-3);
    assert_abs_diff_eq!(
        initial_slope_prediction(&table, |_, _| 1.0),
        -(n as f64) / 4.0,
        epsilon = 1e-12
    );
}

#[test]
fn longer_range_slope_prediction_matches_simulation() {
    let n = 10;
    for r in [2usize, 3] {
        let spec = HamiltonianSpec::new(CouplingKind::Xx, LatticeConfig::periodic(n).unwrap())
            .with_range(r)
            .with_chi(0.7);
        let family = LinearPhaseFamily::new(
            &StateVector::new(n).unwrap(),
            &compile(&spec, 1.0, 0.1).unwrap(),
        )
        .unwrap();
        let h = 1e-5;
        let var = |t: f64| collective_moments(&family.state_at(t)).variance_at(-FRAC_PI_4);
        let simulated = (var(h) - var(0.0)) / h;
        let predicted = initial_slope_prediction(&spec.xx_couplings().unwrap(), |_, _| 1.0);
        assert_abs_diff_eq!(simulated, predicted, epsilon = 1e-3);
    }
}

#[test]
fn linear_family_agrees_with_stepwise_gates() {
    let n = 7;
    let spec =
        HamiltonianSpec::new(CouplingKind::Xx, LatticeConfig::periodic(n).unwrap()).with_range(2);
    let family = LinearPhaseFamily::new(
        &StateVector::new(n).unwrap(),
        &compile(&spec, 1.0, 0.1).unwrap(),
    )
    .unwrap();
    let mut direct = StateVector::new(n).unwrap();
    apply_schedule(&mut direct, &compile(&spec, 2.3, 0.1).unwrap()).unwrap();
    assert_abs_diff_eq!(
        fidelity(&family.state_at(2.3), &direct),
        1.0,
        epsilon = 1e-12
    );
}
