//! Squeezing observables of one or more independent evolutions, sampled on a
//! time grid and minimized over time.

use latticesq_core::evolution::{run_schedule, LinearPhaseFamily};
use latticesq_core::observables::{
    collective_moments, min_variance_theta, refine_sampled_minimum, uniform_grid, MomentSet,
    SqueezingReport, TimeMinimum,
};
use latticesq_core::schedule::compile;
use latticesq_core::{HamiltonianSpec, Probe, StateVector};
use rayon::prelude::*;

use crate::error::Result;

const REFINE_TOL: f64 = 1e-10;

/// Produces the state of one ensemble member at arbitrary times.
pub enum Evolver {
    /// Exact schedule, evaluated in closed form at any `t`.
    Exact(LinearPhaseFamily),
    /// Trotterized schedule, recompiled for every `t`.
    Trotter {
        spec: HamiltonianSpec,
        dt: f64,
        initial: StateVector,
    },
}

impl Evolver {
    pub fn new(spec: &HamiltonianSpec, dt: f64, initial: StateVector) -> Result<Self> {
        Ok(if spec.kind.is_exact() {
            Evolver::Exact(LinearPhaseFamily::new(&initial, &compile(spec, 1.0, dt)?)?)
        } else {
            Evolver::Trotter {
                spec: spec.clone(),
                dt,
                initial,
            }
        })
    }

    pub fn moments_at(&self, t: f64) -> Result<MomentSet> {
        match self {
            Evolver::Exact(family) => Ok(family.moments_at(t)),
            Evolver::Trotter { spec, dt, initial } => {
                let mut state = initial.clone();
                let schedule = compile(spec, t, *dt)?;
                latticesq_core::evolution::apply_schedule(&mut state, &schedule)?;
                Ok(collective_moments(&state))
            }
        }
    }

    /// Moments on the natural grid: `points` uniform times for exact
    /// evolution, the stroboscopic step times for Trotter evolution.
    pub fn sample(&self, t_max: f64, points: usize) -> Result<(Vec<f64>, Vec<MomentSet>)> {
        match self {
            Evolver::Exact(_) => {
                let times = uniform_grid(0.0, t_max, points);
                let moments = times
                    .iter()
                    .map(|&t| self.moments_at(t))
                    .collect::<Result<_>>()?;
                Ok((times, moments))
            }
            Evolver::Trotter { spec, dt, initial } => {
                let mut state = initial.clone();
                let schedule = compile(spec, t_max, *dt)?;
                let trace = run_schedule(&mut state, &schedule, 1, Probe::MOMENTS)?;
                let times = trace.times();
                let moments = trace
                    .snapshots
                    .into_iter()
                    .map(|s| s.moments.expect("moments probe"))
                    .collect();
                Ok((times, moments))
            }
        }
    }
}

/// Ensemble averages at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aggregate {
    pub time: f64,
    /// Angle minimizing the ensemble-mean `(ΔJ_θ)²`.
    pub theta_opt: f64,
    /// Mean over members of each member's θ-minimized variance.
    pub variance: f64,
    pub variance_sem: Option<f64>,
    pub variance_quarter: f64,
    pub jz: f64,
    /// Mean of the members' ξ²; `None` if any member's is undefined.
    pub xi2: Option<f64>,
    pub xi2_sem: Option<f64>,
}

pub fn mean_sem(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

pub fn aggregate(moments: &[MomentSet], atoms: usize, time: f64) -> Aggregate {
    let reports: Vec<SqueezingReport> = moments
        .iter()
        .map(|m| SqueezingReport::from_moments(m, atoms, time))
        .collect();
    let variances: Vec<f64> = reports.iter().map(|r| r.min_variance).collect();
    let (variance, variance_sem) = mean_sem(&variances);
    let quarter: Vec<f64> = moments
        .iter()
        .map(|m| m.variance_at(-std::f64::consts::FRAC_PI_4))
        .collect();
    let jz: Vec<f64> = moments.iter().map(|m| m.jz()).collect();
    let xi2: Option<Vec<f64>> = reports.iter().map(|r| r.xi2).collect();
    let (xi2, xi2_sem) = match xi2 {
        Some(v) => {
            let (m, s) = mean_sem(&v);
            (Some(m), s)
        }
        None => (None, None),
    };
    // θ minimizing the mean variance: average the x-y covariance block
    let n = moments.len() as f64;
    let block = |a: usize, b: usize| moments.iter().map(|m| m.covariance(a, b)).sum::<f64>() / n;
    let averaged = MomentSet {
        mean: [0.0; 3],
        second: [
            [block(0, 0), block(0, 1), 0.0],
            [block(0, 1), block(1, 1), 0.0],
            [0.0, 0.0, 0.0],
        ],
    };
    Aggregate {
        time,
        theta_opt: min_variance_theta(&averaged).0,
        variance,
        variance_sem,
        variance_quarter: mean_sem(&quarter).0,
        jz: mean_sem(&jz).0,
        xi2,
        xi2_sem,
    }
}

/// A set of independent evolutions sharing one clock.
pub struct Ensemble {
    pub members: Vec<Evolver>,
    pub atoms: usize,
}

impl Ensemble {
    pub fn at(&self, t: f64) -> Result<Aggregate> {
        let moments = self
            .members
            .par_iter()
            .map(|e| e.moments_at(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(aggregate(&moments, self.atoms, t))
    }

    /// Aggregates on each member's natural grid. All members share the same
    /// kind of evolution, hence the same grid.
    pub fn sample(&self, t_max: f64, points: usize) -> Result<Vec<Aggregate>> {
        let sampled = self
            .members
            .par_iter()
            .map(|e| e.sample(t_max, points))
            .collect::<Result<Vec<_>>>()?;
        let times = sampled[0].0.clone();
        Ok(times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let at_t: Vec<MomentSet> = sampled.iter().map(|s| s.1[i]).collect();
                aggregate(&at_t, self.atoms, t)
            })
            .collect())
    }

    /// Minimum over time of `pick(aggregate)`, starting from the sampled grid
    /// and refined by golden-section search between its neighbours.
    pub fn minimize(
        &self,
        curve: &[Aggregate],
        pick: impl Fn(&Aggregate) -> Option<f64> + Copy,
    ) -> Option<TimeMinimum> {
        let times: Vec<f64> = curve.iter().map(|a| a.time).collect();
        let values: Vec<Option<f64>> = curve.iter().map(pick).collect();
        refine_sampled_minimum(
            |t| self.at(t).ok().as_ref().and_then(pick),
            &times,
            &values,
            REFINE_TOL,
        )
    }
}

/// Largest spacing of a sampled grid.
pub fn grid_step(curve: &[Aggregate]) -> f64 {
    curve
        .windows(2)
        .map(|w| w[1].time - w[0].time)
        .fold(0.0, f64::max)
}
