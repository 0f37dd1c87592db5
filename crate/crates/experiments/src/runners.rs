//! The four experiments.

use std::f64::consts::FRAC_PI_4;

use latticesq_core::evolution::flip_site;
use latticesq_core::lattice::{exact_count_pair_correlation, pair_correlation, sample_occupancy};
use latticesq_core::observables::{
    analytic_variance_one_neighbor, initial_slope_prediction, SqueezingReport, SLOPE_CONVENTION,
};
use latticesq_core::schedule::compile;
use latticesq_core::{
    run_schedule, CouplingKind, HamiltonianSpec, LatticeConfig, OccupancyMask, Probe, StateVector,
};
use rayon::prelude::*;

use crate::config::{Coupling, Experiment, ExperimentConfig};
use crate::ensemble::{grid_step, mean_sem, Aggregate, Ensemble, Evolver};
use crate::error::{ExperimentError, Result};
use crate::output::{ExperimentOutput, Metadata, Record};

/// Finite-difference half step for initial slopes, in units of `1/χ`.
const SLOPE_STEP: f64 = 1e-4;

pub fn run(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    match config.experiment {
        Experiment::Spinwave => run_spinwave(config),
        Experiment::SqueezeFull => run_squeeze_full(config),
        Experiment::SqueezePartial => run_squeeze_partial(config),
        Experiment::TwistScaling => run_twist_scaling(config),
    }
}

type Pick = fn(&Aggregate) -> Option<f64>;

fn expect(config: &ExperimentConfig, experiment: Experiment) -> Result<()> {
    config.validate()?;
    if config.experiment != experiment {
        return Err(ExperimentError::Config(format!(
            "expected a {} configuration, got {}",
            experiment.label(),
            config.experiment.label()
        )));
    }
    Ok(())
}

fn base_metadata(config: &ExperimentConfig, sites: usize) -> Metadata {
    Metadata {
        t_max: config.resolved_t_max(),
        dt: config.dt,
        grid_points: config.grid_points,
        lattice_sites: sites,
        boundary: "periodic",
        ..Metadata::default()
    }
}

fn curve_record(
    coupling: &'static str,
    atoms: usize,
    sites: usize,
    range: usize,
    a: &Aggregate,
    realizations: usize,
) -> Record {
    Record {
        range: Some(range),
        time: Some(a.time),
        jz: Some(a.jz),
        theta_opt: Some(a.theta_opt),
        variance: Some(a.variance),
        variance_sem: a.variance_sem,
        variance_quarter: Some(a.variance_quarter),
        xi2: a.xi2,
        xi2_sem: a.xi2_sem,
        xi2_defined: Some(a.xi2.is_some()),
        realizations,
        ..Record::new("curve", coupling, atoms, sites)
    }
}

fn minimum_records(
    ensemble: &Ensemble,
    curve: &[Aggregate],
    coupling: &'static str,
    sites: usize,
    range: usize,
    realizations: usize,
) -> Vec<Record> {
    let step = grid_step(curve);
    let mut out = Vec::new();
    let kinds: [(&str, Pick); 2] = [
        ("minimum", |a| a.xi2),
        ("variance_minimum", |a| Some(a.variance)),
    ];
    for (label, pick) in kinds {
        let Some(min) = ensemble.minimize(curve, pick) else {
            out.push(Record {
                range: Some(range),
                xi2_defined: Some(false),
                realizations,
                grid_step: Some(step),
                ..Record::new(label, coupling, ensemble.atoms, sites)
            });
            continue;
        };
        let at = ensemble.at(min.time).ok();
        let mut r = match &at {
            Some(a) => curve_record(coupling, ensemble.atoms, sites, range, a, realizations),
            None => Record::new(label, coupling, ensemble.atoms, sites),
        };
        r.record = label;
        r.value = Some(min.value);
        r.grid_step = Some(step);
        out.push(r);
    }
    out
}

pub fn run_spinwave(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect(config, Experiment::Spinwave)?;
    let n = config.atoms;
    let center = n / 2;
    let lattice = LatticeConfig::periodic(n)?;
    let chi = config.chi;
    let spec = HamiltonianSpec::heisenberg(lattice, chi, chi, chi).with_range(config.ranges[0]);
    let mut state = StateVector::new(n)?;
    flip_site(&mut state, center)?;
    let t_max = config.resolved_t_max();
    let schedule = compile(&spec, t_max, config.dt)?;
    let probe = Probe {
        site_magnetization: true,
        collective_moments: true,
    };
    let trace = run_schedule(&mut state, &schedule, config.stride, probe)?;
    let label = CouplingKind::Heisenberg.label();
    let mut records = Vec::new();
    for snap in &trace.snapshots {
        let profile = snap.magnetization.as_ref().expect("magnetization probe");
        for (k, &m) in profile.iter().enumerate() {
            records.push(Record {
                range: Some(config.ranges[0]),
                time: Some(snap.time),
                site: Some(k),
                jz: Some(m),
                ..Record::new("magnetization", label, n, n)
            });
        }
        let moments = snap.moments.expect("moments probe");
        let report = SqueezingReport::from_moments(&moments, n, snap.time);
        records.push(Record {
            range: Some(config.ranges[0]),
            time: Some(snap.time),
            jz: Some(moments.jz()),
            theta_opt: Some(report.theta_opt),
            variance: Some(report.min_variance),
            xi2: report.xi2,
            xi2_defined: Some(report.xi2.is_some()),
            ..Record::new("collective", label, n, n)
        });
    }
    let mut metadata = base_metadata(config, n);
    metadata.grid_step = t_max / schedule.steps.len() as f64;
    metadata.notes.push(format!(
        "site {center} flipped by a pi pulse about x before evolution"
    ));
    Ok(ExperimentOutput { metadata, records })
}

fn full_lattice_ensemble(
    kind: CouplingKind,
    atoms: usize,
    range: usize,
    chi: f64,
    dt: f64,
) -> Result<Ensemble> {
    let spec = HamiltonianSpec::new(kind, LatticeConfig::periodic(atoms)?)
        .with_chi(chi)
        .with_range(range);
    Ok(Ensemble {
        members: vec![Evolver::new(&spec, dt, StateVector::new(atoms)?)?],
        atoms,
    })
}

fn push_curve(
    records: &mut Vec<Record>,
    curve: &[Aggregate],
    stride: usize,
    make: impl Fn(&Aggregate) -> Record,
) {
    let last = curve.len().saturating_sub(1);
    for (i, a) in curve.iter().enumerate() {
        if i % stride == 0 || i == last {
            records.push(make(a));
        }
    }
}

pub fn run_squeeze_full(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect(config, Experiment::SqueezeFull)?;
    let n = config.atoms;
    let t_max = config.resolved_t_max();
    let mut records = Vec::new();
    let mut metadata = base_metadata(config, n);
    metadata.grid_step = t_max / (config.grid_points - 1) as f64;
    for &coupling in &config.couplings {
        let kind = coupling.kind();
        for &r in &config.ranges {
            let ensemble = full_lattice_ensemble(kind, n, r, config.chi, config.dt)?;
            let curve = ensemble.sample(t_max, config.grid_points)?;
            let one_neighbor = kind == CouplingKind::Xx && r == 1;
            push_curve(&mut records, &curve, config.stride, |a| Record {
                reference: one_neighbor
                    .then(|| analytic_variance_one_neighbor(n, config.chi * a.time)),
                ..curve_record(kind.label(), n, n, r, a, 1)
            });
            records.extend(minimum_records(&ensemble, &curve, kind.label(), n, r, 1));
        }
    }
    if config.couplings.contains(&Coupling::Xxyy) {
        metadata.notes.push(
            "xxyy minima: stroboscopic grid of ceil(t_max/dt) steps, refined with ceil(t/dt) equal steps"
                .into(),
        );
    }
    Ok(ExperimentOutput { metadata, records })
}

pub fn run_squeeze_partial(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect(config, Experiment::SqueezePartial)?;
    let n = config.atoms;
    let m = config.lattice_sites();
    if m < n {
        return Err(ExperimentError::Config(format!(
            "lattice of {m} sites cannot hold {n} atoms"
        )));
    }
    let lattice = LatticeConfig::periodic(m)?;
    let t_max = config.resolved_t_max();
    let realizations = config.realizations;
    let masks: Vec<OccupancyMask> = (0..realizations as u64)
        .into_par_iter()
        .map(|i| sample_occupancy(&lattice, n, config.seed, i))
        .collect::<latticesq_core::error::Result<_>>()?;
    let label = CouplingKind::PartialXx.label();
    let mut records = Vec::new();
    for &r in &config.ranges {
        let specs: Vec<HamiltonianSpec> = masks
            .iter()
            .map(|mask| {
                HamiltonianSpec::new(CouplingKind::PartialXx, lattice)
                    .with_chi(config.chi)
                    .with_range(r)
                    .with_mask(mask.clone())
            })
            .collect();
        let members = specs
            .par_iter()
            .map(|spec| Evolver::new(spec, config.dt, StateVector::new(n)?))
            .collect::<Result<Vec<_>>>()?;
        let ensemble = Ensemble { members, atoms: n };
        let curve = ensemble.sample(t_max, config.grid_points)?;
        push_curve(&mut records, &curve, config.stride, |a| {
            curve_record(label, n, m, r, a, realizations)
        });
        records.extend(minimum_records(
            &ensemble,
            &curve,
            label,
            m,
            r,
            realizations,
        ));
        records.extend(slope_records(config, &ensemble, &masks, lattice, r)?);
    }
    let mut metadata = base_metadata(config, m);
    metadata.grid_step = t_max / (config.grid_points - 1) as f64;
    metadata.hypergeometric_pair_correlation = Some(exact_count_pair_correlation(n, m));
    metadata.bernoulli_pair_correlation = Some(config.filling * config.filling);
    metadata.slope_convention = Some(SLOPE_CONVENTION);
    metadata.notes.push(format!(
        "{n} atoms placed uniformly on {m} sites per realization"
    ));
    for (i, mask) in masks.iter().enumerate() {
        metadata.notes.push(format!("mask {i} {mask}"));
    }
    Ok(ExperimentOutput { metadata, records })
}

fn slope_records(
    config: &ExperimentConfig,
    ensemble: &Ensemble,
    masks: &[OccupancyMask],
    lattice: LatticeConfig,
    range: usize,
) -> Result<Vec<Record>> {
    let n = config.atoms;
    let m = lattice.num_sites();
    let h = SLOPE_STEP / config.chi.abs();
    let slopes = ensemble
        .members
        .par_iter()
        .map(|e| {
            let plus = e.moments_at(h)?.variance_at(-FRAC_PI_4);
            let minus = e.moments_at(-h)?.variance_at(-FRAC_PI_4);
            Ok((plus - minus) / (2.0 * h))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (simulated, sem) = mean_sem(&slopes);
    let table = HamiltonianSpec::new(CouplingKind::PartialXx, lattice)
        .with_chi(config.chi)
        .with_range(range)
        .with_mask(OccupancyMask::full(m))
        .xx_couplings()?;
    let ensemble_prediction =
        initial_slope_prediction(&table, |k, l| pair_correlation(masks, k, l).unwrap_or(0.0));
    let hyper = exact_count_pair_correlation(n, m);
    let p2 = config.filling * config.filling;
    let label = CouplingKind::PartialXx.label();
    let row = |record: &'static str, reference: f64| Record {
        range: Some(range),
        time: Some(0.0),
        value: Some(simulated),
        value_sem: sem,
        reference: Some(reference),
        realizations: masks.len(),
        ..Record::new(record, label, n, m)
    };
    Ok(vec![
        row("slope", ensemble_prediction),
        row(
            "slope_hypergeometric",
            initial_slope_prediction(&table, |_, _| hyper),
        ),
        row(
            "slope_bernoulli",
            initial_slope_prediction(&table, |_, _| p2),
        ),
    ])
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Smallest atom number included in the scaling fit.
pub const FIT_MIN_ATOMS: usize = 6;

pub fn run_twist_scaling(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    expect(config, Experiment::TwistScaling)?;
    let t_max = config.resolved_t_max();
    let mut records = Vec::new();
    for &coupling in &config.couplings {
        let kind = coupling.kind();
        let mut fit_points = Vec::new();
        for &n in &config.sizes {
            let range = n - 1;
            // all-to-all steps carry about N times the phase of a nearest-neighbour step
            let dt = config.dt / range as f64;
            let ensemble = full_lattice_ensemble(kind, n, range, config.chi, dt)?;
            let curve = ensemble.sample(t_max, config.grid_points)?;
            let mins = minimum_records(&ensemble, &curve, kind.label(), n, range, 1);
            if kind == CouplingKind::Xx && n >= FIT_MIN_ATOMS {
                if let Some(v) = mins
                    .iter()
                    .find(|r| r.record == "variance_minimum")
                    .and_then(|r| r.value)
                {
                    fit_points.push((n as f64, v));
                }
            }
            records.extend(mins);
        }
        if fit_points.len() >= 2 {
            let mut fit = Record::new("fit", kind.label(), 0, 0);
            fit.value = Some(log_log_slope(&fit_points));
            fit.reference = Some(1.0 / 3.0);
            records.push(fit);
        }
    }
    let mut metadata = base_metadata(config, 0);
    metadata.grid_step = t_max / (config.grid_points - 1) as f64;
    metadata.notes.push(format!(
        "all-to-all: range N-1 on an N-site ring; trotter step dt/(N-1); fit over N >= {FIT_MIN_ATOMS}"
    ));
    Ok(ExperimentOutput { metadata, records })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::config::{Coupling, Experiment, ExperimentConfig};
    use crate::error::ExperimentError;
    use crate::output::Record;

    fn config(experiment: Experiment) -> ExperimentConfig {
        ExperimentConfig::new(experiment)
    }

    fn rows<'a>(records: &'a [Record], kind: &str) -> Vec<&'a Record> {
        records.iter().filter(|r| r.record == kind).collect()
    }

    #[test]
    fn spinwave_starts_from_flipped_center() {
        let mut c = config(Experiment::Spinwave);
        c.atoms = 9;
        c.t_max = Some(1.0);
        let out = run_spinwave(&c).unwrap();
        let first: Vec<_> = rows(&out.records, "magnetization")
            .into_iter()
            .filter(|r| r.time == Some(0.0))
            .collect();
        assert_eq!(first.len(), 9);
        for r in first {
            let expected = if r.site == Some(4) { 0.5 } else { -0.5 };
            assert!((r.jz.unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn spinwave_even_ring_uses_lower_center() {
        let mut c = config(Experiment::Spinwave);
        c.atoms = 8;
        c.t_max = Some(0.5);
        let out = run_spinwave(&c).unwrap();
        let flipped: Vec<_> = rows(&out.records, "magnetization")
            .into_iter()
            .filter(|r| r.time == Some(0.0) && r.jz == Some(0.5))
            .map(|r| r.site.unwrap())
            .collect();
        assert_eq!(flipped, vec![4]);
    }

    #[test]
    fn spinwave_stride_thins_snapshots() {
        let mut c = config(Experiment::Spinwave);
        c.atoms = 7;
        c.t_max = Some(1.0);
        c.stride = 4;
        let out = run_spinwave(&c).unwrap();
        let times: Vec<f64> = rows(&out.records, "collective")
            .iter()
            .map(|r| r.time.unwrap())
            .collect();
        assert_eq!(times.len(), 4);
        assert!(times.windows(2).all(|w| w[1] > w[0]));
        assert!((times[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_neighbor_curve_carries_closed_form_reference() {
        let mut c = config(Experiment::SqueezeFull);
        c.atoms = 8;
        c.couplings = vec![Coupling::Xx];
        c.ranges = vec![1];
        c.grid_points = 30;
        let out = run_squeeze_full(&c).unwrap();
        let curve = rows(&out.records, "curve");
        assert_eq!(curve.len(), 30);
        for r in curve {
            let diff = r.variance_quarter.unwrap() - r.reference.unwrap();
            assert!(diff.abs() < 1e-10);
        }
    }

    #[test]
    fn vanishing_mean_spin_is_flagged() {
        let mut c = config(Experiment::SqueezeFull);
        c.atoms = 6;
        c.couplings = vec![Coupling::Xx];
        c.ranges = vec![1];
        c.t_max = Some(PI);
        c.grid_points = 21;
        let out = run_squeeze_full(&c).unwrap();
        let last = *rows(&out.records, "curve").last().unwrap();
        assert_eq!(last.xi2_defined, Some(false));
        assert!(last.xi2.is_none());
        let min = rows(&out.records, "minimum")[0];
        assert!(min.xi2.unwrap().is_finite());
    }

    #[test]
    fn full_filling_partial_run_reproduces_full_lattice() {
        for r in [1usize, 2] {
            let mut full = config(Experiment::SqueezeFull);
            full.atoms = 8;
            full.couplings = vec![Coupling::Xx];
            full.ranges = vec![r];
            full.grid_points = 25;
            let mut partial = config(Experiment::SqueezePartial);
            partial.atoms = 8;
            partial.filling = 1.0;
            partial.realizations = 3;
            partial.ranges = vec![r];
            partial.grid_points = 25;
            let a = run_squeeze_full(&full).unwrap();
            let b = run_squeeze_partial(&partial).unwrap();
            let (ca, cb) = (rows(&a.records, "curve"), rows(&b.records, "curve"));
            assert_eq!(ca.len(), cb.len());
            for (x, y) in ca.iter().zip(&cb) {
                assert!((x.variance.unwrap() - y.variance.unwrap()).abs() < 1e-10);
                assert!((x.jz.unwrap() - y.jz.unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_run_reports_slopes_and_masks() {
        let mut c = config(Experiment::SqueezePartial);
        c.atoms = 6;
        c.realizations = 5;
        c.ranges = vec![1, 2];
        c.grid_points = 20;
        let out = run_squeeze_partial(&c).unwrap();
        assert_eq!(out.metadata.lattice_sites, 12);
        assert_eq!(rows(&out.records, "slope").len(), 2);
        for r in rows(&out.records, "slope") {
            assert_eq!(r.realizations, 5);
            assert!(r.value_sem.unwrap() >= 0.0);
        }
        let masks = out
            .metadata
            .notes
            .iter()
            .filter(|n| n.starts_with("mask "))
            .count();
        assert_eq!(masks, 5);
    }

    #[test]
    fn partial_capacity_error_suggests_remedy() {
        let mut c = config(Experiment::SqueezePartial);
        c.filling = 1e-5;
        let err = run_squeeze_partial(&c).unwrap_err();
        assert!(matches!(err, ExperimentError::Capacity(_)));
        assert!(err.is_config());
        assert!(err.to_string().contains("larger filling"));
    }

    #[test]
    fn twist_scaling_includes_two_atom_row() {
        let mut c = config(Experiment::TwistScaling);
        c.sizes = vec![2, 4, 6, 7];
        c.grid_points = 60;
        let out = run_twist_scaling(&c).unwrap();
        let two: Vec<_> = out.records.iter().filter(|r| r.atoms == 2).collect();
        assert!(!two.is_empty());
        assert!(two.iter().all(|r| r.value.is_some_and(f64::is_finite)));
        assert_eq!(rows(&out.records, "fit").len(), 1);
    }

    #[test]
    fn log_log_slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (2..10)
            .map(|n| (n as f64, 3.0 * (n as f64).powf(0.4)))
            .collect();
        assert!((log_log_slope(&pts) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let base = config(Experiment::SqueezeFull);
        let mut cases = Vec::new();
        let mut c = base.clone();
        c.filling = 0.0;
        cases.push(c);
        let mut c = base.clone();
        c.dt = -0.1;
        cases.push(c);
        let mut c = base.clone();
        c.realizations = 0;
        cases.push(c);
        let mut c = base.clone();
        c.t_max = Some(0.01);
        cases.push(c);
        let mut c = base.clone();
        c.couplings = vec![Coupling::Zz];
        cases.push(c);
        let mut c = base.clone();
        c.filling = 0.5;
        cases.push(c);
        for c in cases {
            assert!(
                matches!(c.validate(), Err(ExperimentError::Config(_))),
                "{c:?}"
            );
        }
        assert!(base.validate().is_ok());
    }

    #[test]
    fn wrong_runner_is_rejected() {
        let c = config(Experiment::Spinwave);
        assert!(run_squeeze_full(&c).is_err());
    }
}
