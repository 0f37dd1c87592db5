//! Executes schedules on a register and records observables along the way.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::observables::{collective_moments, MomentSet};
use crate::schedule::{CollisionLayer, Layer, Schedule};
use crate::spin::{self, Mat2};
use crate::state::{rotation_matrix, Axis, PhaseGate, StateVector};

/// Observables recorded at each snapshot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Probe {
    pub site_magnetization: bool,
    pub collective_moments: bool,
}

impl Probe {
    pub const MAGNETIZATION: Probe = Probe {
        site_magnetization: true,
        collective_moments: false,
    };
    pub const MOMENTS: Probe = Probe {
        site_magnetization: false,
        collective_moments: true,
    };
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub step: usize,
    pub magnetization: Option<Vec<f64>>,
    pub moments: Option<MomentSet>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvolutionTrace {
    pub snapshots: Vec<Snapshot>,
}

impl EvolutionTrace {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }
}

fn record(state: &StateVector, time: f64, step: usize, probe: Probe) -> Snapshot {
    Snapshot {
        time,
        step,
        magnetization: probe
            .site_magnetization
            .then(|| state.magnetization_profile()),
        moments: probe.collective_moments.then(|| collective_moments(state)),
    }
}

/// Consecutive pulses are merged into a single per-site 2×2 before being
/// applied; the gate content is unchanged.
fn apply_layers(state: &mut StateVector, layers: &[Layer]) -> Result<()> {
    let mut pending: Option<Mat2> = None;
    for layer in layers {
        match layer {
            Layer::Rotation { axis, angle } => {
                let u = rotation_matrix(*axis, *angle);
                pending = Some(match pending {
                    Some(prev) => spin::matmul2(&u, &prev),
                    None => u,
                });
            }
            Layer::Collision(CollisionLayer { gates, .. }) => {
                if let Some(u) = pending.take() {
                    state.apply_uniform_single_site(&u);
                }
                state.apply_phase_layer(gates)?;
            }
        }
    }
    if let Some(u) = pending {
        state.apply_uniform_single_site(&u);
    }
    Ok(())
}

fn check_fit(state: &StateVector, schedule: &Schedule) -> Result<()> {
    if schedule.num_sites != state.num_sites() {
        return Err(Error::Validation(format!(
            "schedule built for {} sites, register has {}",
            schedule.num_sites,
            state.num_sites()
        )));
    }
    schedule.validate()
}

/// Applies the whole schedule without recording anything.
pub fn apply_schedule(state: &mut StateVector, schedule: &Schedule) -> Result<()> {
    check_fit(state, schedule)?;
    for step in &schedule.steps {
        apply_layers(state, &step.layers)?;
    }
    Ok(())
}

/// Runs `schedule` on `state` in place, recording `probe` at `t = 0`, after
/// every `snapshot_every` steps, and after the final step.
pub fn run_schedule(
    state: &mut StateVector,
    schedule: &Schedule,
    snapshot_every: usize,
    probe: Probe,
) -> Result<EvolutionTrace> {
    if snapshot_every == 0 {
        return Err(Error::Argument("snapshot stride must be at least 1".into()));
    }
    check_fit(state, schedule)?;
    let mut trace = EvolutionTrace::default();
    trace.snapshots.push(record(state, 0.0, 0, probe));
    let total = schedule.steps.len();
    let uniform = schedule
        .steps
        .first()
        .map(|s| s.duration)
        .filter(|&d| schedule.steps.iter().all(|s| s.duration == d));
    let mut time = 0.0;
    for (n, step) in schedule.steps.iter().enumerate() {
        apply_layers(state, &step.layers)?;
        let done = n + 1;
        // equal steps: multiply rather than accumulate rounding
        time = match uniform {
            Some(d) => done as f64 * d,
            None => time + step.duration,
        };
        if done % snapshot_every == 0 || done == total {
            trace.snapshots.push(record(state, time, done, probe));
        }
    }
    Ok(trace)
}

/// Fast evaluation of an exact single-basis schedule at many times.
///
/// An exact schedule for `j_x j_x` or `j_z j_z` couplings is
/// `post · D(t) · pre` where `D(t)` is diagonal with phases linear in `t`.
/// Built once from the schedule compiled at `t = 1`, `state_at(t)` then costs
/// one diagonal sweep and one pulse.
#[derive(Clone, Debug)]
pub struct LinearPhaseFamily {
    prepared: StateVector,
    /// Distinct phase rates and, per amplitude, the index of its rate.
    rates: Vec<f64>,
    class: Vec<u32>,
    post: Option<Mat2>,
    /// The pulses making up `post`, in application order.
    post_pulses: Vec<(Axis, f64)>,
}

impl LinearPhaseFamily {
    pub fn new(initial: &StateVector, unit_schedule: &Schedule) -> Result<Self> {
        check_fit(initial, unit_schedule)?;
        let mut prepared = initial.clone();
        let mut rates = vec![0.0; initial.dim()];
        let mut post = None;
        let mut post_pulses = Vec::new();
        let layers: Vec<&Layer> = unit_schedule.layers().collect();
        let first_collision = layers.iter().position(|l| matches!(l, Layer::Collision(_)));
        let Some(first) = first_collision else {
            apply_schedule(&mut prepared, unit_schedule)?;
            let (rates, class) = classify(&rates);
            return Ok(Self {
                prepared,
                rates,
                class,
                post,
                post_pulses,
            });
        };
        let last = layers
            .iter()
            .rposition(|l| matches!(l, Layer::Collision(_)))
            .unwrap_or(first);
        if unit_schedule.steps.len() != 1 || (unit_schedule.duration() - 1.0).abs() > 1e-12 {
            return Err(Error::Argument(
                "linear phase family needs a single-step schedule compiled at t = 1".into(),
            ));
        }
        let owned: Vec<Layer> = layers[..first].iter().map(|&l| l.clone()).collect();
        apply_layers(&mut prepared, &owned)?;
        for layer in &layers[first..=last] {
            match layer {
                Layer::Collision(c) => accumulate_rates(&mut rates, &c.gates),
                Layer::Rotation { .. } => {
                    return Err(Error::Argument(
                        "pulses between collision layers do not form a linear phase family".into(),
                    ))
                }
            }
        }
        for layer in &layers[last + 1..] {
            if let Layer::Rotation { axis, angle } = layer {
                let u = rotation_matrix(*axis, *angle);
                post = Some(post.map_or(u, |p| spin::matmul2(&u, &p)));
                post_pulses.push((*axis, *angle));
            }
        }
        let (rates, class) = classify(&rates);
        Ok(Self {
            prepared,
            rates,
            class,
            post,
            post_pulses,
        })
    }

    pub fn state_at(&self, t: f64) -> StateVector {
        let mut state = self.phased(t);
        if let Some(u) = &self.post {
            state.apply_uniform_single_site(u);
        }
        state
    }

    /// Collective moments at `t`. The closing pulses are applied to the
    /// moments rather than to the state.
    pub fn moments_at(&self, t: f64) -> MomentSet {
        self.post_pulses
            .iter()
            .fold(collective_moments(&self.phased(t)), |m, &(axis, angle)| {
                m.rotated(axis, angle)
            })
    }

    fn phased(&self, t: f64) -> StateVector {
        let mut state = self.prepared.clone();
        let phasors: Vec<Complex64> = self
            .rates
            .iter()
            .map(|&r| Complex64::from_polar(1.0, r * t))
            .collect();
        for (amp, &c) in state.amplitudes_mut().iter_mut().zip(&self.class) {
            *amp *= phasors[c as usize];
        }
        state
    }
}

/// Groups bit-identical rates so each distinct phase is evaluated once.
fn classify(rates: &[f64]) -> (Vec<f64>, Vec<u32>) {
    let mut seen = std::collections::HashMap::new();
    let mut distinct = Vec::new();
    let class = rates
        .iter()
        .map(|&r| {
            *seen.entry(r.to_bits()).or_insert_with(|| {
                distinct.push(r);
                distinct.len() as u32 - 1
            })
        })
        .collect();
    (distinct, class)
}

fn accumulate_rates(rates: &mut [f64], gates: &[PhaseGate]) {
    for g in gates {
        let (c, t) = (1usize << g.control, 1usize << g.target);
        for (index, r) in rates.iter_mut().enumerate() {
            if index & c != 0 && index & t == 0 {
                *r += g.phi;
            }
        }
    }
}

/// Flips one site with a π pulse about x. A state-preparation step, not part
/// of the lattice protocol.
pub fn flip_site(state: &mut StateVector, site: usize) -> Result<()> {
    state.rotate_site(site, Axis::X, PI)
}
