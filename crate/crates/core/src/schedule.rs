//! Compilation of coupling Hamiltonians into collision layers and global pulses.
//!
//! A collision layer at displacement `d` applies a phase gate to every
//! occupied pair `(k, k+d)`. A gate with phase `φ` equals
//! `exp(−iφ (j_z,k + 1/2)(j_z,l − 1/2))`. Summed over a layer in which every
//! site is control and target equally often, the linear parts cancel. The
//! layer is then `exp(−iφ Σ j_z,k j_z,l)` up to a global phase. Layers in the
//! x or y basis are the same phase pattern conjugated by a global `π/2` pulse.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::hamiltonian::{CouplingKind, HamiltonianSpec, PairCoupling};
use crate::state::{Axis, PhaseGate};

/// Gate phase per unit of `coupling × time`.
pub const PHASE_PER_COUPLING_TIME: f64 = 1.0;

const BALANCE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub fn label(self) -> &'static str {
        match self {
            Basis::Z => "z",
            Basis::X => "x",
            Basis::Y => "y",
        }
    }

    /// Pulse taking the z frame into this basis (applied before the layer).
    fn entry_pulse(self) -> Option<(Axis, f64)> {
        match self {
            Basis::Z => None,
            Basis::X => Some((Axis::Y, FRAC_PI_2)),
            Basis::Y => Some((Axis::X, FRAC_PI_2)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CollisionLayer {
    pub basis: Basis,
    pub displacement: i64,
    /// Phase per unit pair weight; individual gates carry their own `phi`.
    pub phase: f64,
    pub gates: Vec<PhaseGate>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Collision(CollisionLayer),
    Rotation { axis: Axis, angle: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub duration: f64,
    pub layers: Vec<Layer>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorOrder {
    Exact,
    FirstOrder { dt: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub num_sites: usize,
    pub steps: Vec<Step>,
    pub error_order: ErrorOrder,
}

impl Schedule {
    pub fn identity(num_sites: usize, error_order: ErrorOrder) -> Self {
        Self {
            num_sites,
            steps: Vec::new(),
            error_order,
        }
    }

    pub fn duration(&self) -> f64 {
        self.steps.iter().map(|s| s.duration).sum()
    }

    pub fn layers(&self) -> impl Iterator<Item = &Layer> {
        self.steps.iter().flat_map(|s| s.layers.iter())
    }

    pub fn collision_layers(&self) -> impl Iterator<Item = &CollisionLayer> {
        self.layers().filter_map(|l| match l {
            Layer::Collision(c) => Some(c),
            Layer::Rotation { .. } => None,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.collision_layers().all(|c| c.gates.is_empty())
            && self.layers().all(|l| match l {
                Layer::Rotation { angle, .. } => *angle == 0.0,
                Layer::Collision(_) => true,
            })
    }

    /// Checks that gate indices fit the register and that every x/y collision
    /// layer sits inside its basis-change pulses, with the frame back in z at
    /// the end of every step.
    pub fn validate(&self) -> Result<()> {
        for (n, step) in self.steps.iter().enumerate() {
            let mut frame = Basis::Z;
            for layer in &step.layers {
                match layer {
                    Layer::Rotation { axis, angle } => {
                        frame = next_frame(frame, *axis, *angle).ok_or_else(|| {
                            Error::Validation(format!(
                                "step {n}: pulse {axis}({angle}) outside a basis sandwich"
                            ))
                        })?;
                    }
                    Layer::Collision(c) => {
                        if c.basis != frame {
                            return Err(Error::Validation(format!(
                                "step {n}: {}-basis collision layer in {} frame",
                                c.basis.label(),
                                frame.label()
                            )));
                        }
                        for g in &c.gates {
                            for index in [g.control, g.target] {
                                if index >= self.num_sites {
                                    return Err(Error::IndexOutOfRange {
                                        index,
                                        size: self.num_sites,
                                    });
                                }
                            }
                        }
                    }
                }
            }
            if frame != Basis::Z {
                return Err(Error::Validation(format!(
                    "step {n} ends in the {} frame",
                    frame.label()
                )));
            }
        }
        Ok(())
    }

    /// Human-readable listing, one layer per line.
    pub fn listing(&self) -> String {
        self.to_string()
    }
}

fn next_frame(frame: Basis, axis: Axis, angle: f64) -> Option<Basis> {
    let quarter = |sign: f64| (angle - sign * FRAC_PI_2).abs() < 1e-12;
    match (frame, axis) {
        (Basis::Z, Axis::Y) if quarter(1.0) => Some(Basis::X),
        (Basis::X, Axis::Y) if quarter(-1.0) => Some(Basis::Z),
        (Basis::Z, Axis::X) if quarter(1.0) => Some(Basis::Y),
        (Basis::Y, Axis::X) if quarter(-1.0) => Some(Basis::Z),
        _ => None,
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order = match self.error_order {
            ErrorOrder::Exact => "exact".to_string(),
            ErrorOrder::FirstOrder { dt } => format!("first_order(dt={dt:.10})"),
        };
        writeln!(
            f,
            "schedule sites={} steps={} order={order}",
            self.num_sites,
            self.steps.len()
        )?;
        for (n, step) in self.steps.iter().enumerate() {
            writeln!(f, "step {n} duration={:.10}", step.duration)?;
            for layer in &step.layers {
                match layer {
                    Layer::Rotation { axis, angle } => {
                        writeln!(f, "  rotate axis={axis} angle={angle:+.10}")?
                    }
                    Layer::Collision(c) => {
                        let mut pairs = String::new();
                        for (i, g) in c.gates.iter().enumerate() {
                            if i > 0 {
                                pairs.push(',');
                            }
                            write!(pairs, "{}>{}", g.control, g.target)?;
                        }
                        writeln!(
                            f,
                            "  collide basis={} d={:+} phi={:+.10} gates={} pairs={}",
                            c.basis.label(),
                            c.displacement,
                            c.phase,
                            c.gates.len(),
                            pairs
                        )?
                    }
                }
            }
        }
        Ok(())
    }
}

/// Register-index table ready for gate emission. Unbalanced tables (open
/// chains, partial masks with one-directional visits, per-pair overrides) are
/// split into `+d` and `−d` visits with half the weight each, which makes the
/// linear terms of every layer cancel.
fn balanced_table(table: Vec<PairCoupling>, num_sites: usize) -> Vec<PairCoupling> {
    let mut net = vec![0.0; num_sites];
    for p in &table {
        net[p.site_k] += p.weight;
        net[p.site_l] -= p.weight;
    }
    if net.iter().all(|v| v.abs() < BALANCE_TOL) {
        return table;
    }
    table
        .into_iter()
        .flat_map(|p| {
            let half = p.weight / 2.0;
            [
                PairCoupling { weight: half, ..p },
                PairCoupling {
                    site_k: p.site_l,
                    site_l: p.site_k,
                    displacement: -p.displacement,
                    weight: half,
                },
            ]
        })
        .collect()
}

/// Everything a compiler needs from a spec: register size and the balanced
/// pair table.
struct Plan {
    num_sites: usize,
    table: Vec<PairCoupling>,
    coefficients: [f64; 3],
}

impl Plan {
    fn new(spec: &HamiltonianSpec) -> Result<Self> {
        spec.validate()?;
        let num_sites = spec.atom_count();
        let table = balanced_table(spec.register_table()?, num_sites);
        Ok(Self {
            num_sites,
            table,
            coefficients: spec.axis_coefficients(),
        })
    }

    /// Layers realizing `exp(−i·coefficient·τ Σ w_kl j_b,k j_b,l)`.
    fn sublayer(&self, basis: Basis, coefficient: f64, tau: f64, out: &mut Vec<Layer>) {
        if coefficient == 0.0 || tau == 0.0 || self.table.is_empty() {
            return;
        }
        let phase = PHASE_PER_COUPLING_TIME * coefficient * tau;
        let mut by_displacement: BTreeMap<(bool, u64), Vec<PhaseGate>> = BTreeMap::new();
        for p in &self.table {
            let key = (p.displacement < 0, p.displacement.unsigned_abs());
            by_displacement.entry(key).or_default().push(PhaseGate {
                control: p.site_k,
                target: p.site_l,
                phi: phase * p.weight,
            });
        }
        let entry = basis.entry_pulse();
        if let Some((axis, angle)) = entry {
            out.push(Layer::Rotation { axis, angle });
        }
        for ((negative, d), gates) in by_displacement {
            let displacement = if negative { -(d as i64) } else { d as i64 };
            out.push(Layer::Collision(CollisionLayer {
                basis,
                displacement,
                phase,
                gates,
            }));
        }
        if let Some((axis, angle)) = entry {
            out.push(Layer::Rotation {
                axis,
                angle: -angle,
            });
        }
    }
}

fn require_kind(spec: &HamiltonianSpec, allowed: &[CouplingKind], op: &str) -> Result<()> {
    if allowed.contains(&spec.kind) {
        Ok(())
    } else {
        Err(Error::Argument(format!(
            "{op} cannot compile a {} coupling",
            spec.kind
        )))
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Argument(format!(
            "evolution time must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Argument(format!(
            "time step must be positive, got {dt}"
        )));
    }
    Ok(())
}

/// Number of equal Trotter steps covering `t` with steps no longer than `dt`.
pub fn trotter_steps(t: f64, dt: f64) -> usize {
    let ratio = t / dt;
    let n = ratio.ceil();
    // t = n·dt up to rounding must not gain an extra step
    if n - ratio > 1.0 - 1e-9 {
        (n as usize).saturating_sub(1).max(1)
    } else {
        n as usize
    }
}

fn single_pass(plan: &Plan, bases: &[(Basis, f64)], t: f64) -> Schedule {
    let mut layers = Vec::new();
    for &(basis, coefficient) in bases {
        plan.sublayer(basis, coefficient, t, &mut layers);
    }
    if layers.is_empty() {
        return Schedule::identity(plan.num_sites, ErrorOrder::Exact);
    }
    Schedule {
        num_sites: plan.num_sites,
        steps: vec![Step {
            duration: t,
            layers,
        }],
        error_order: ErrorOrder::Exact,
    }
}

fn trotterized(plan: &Plan, bases: &[(Basis, f64)], t: f64, dt: f64) -> Schedule {
    let error_order = ErrorOrder::FirstOrder { dt };
    if t == 0.0 {
        return Schedule::identity(plan.num_sites, error_order);
    }
    let n = trotter_steps(t, dt);
    let tau = t / n as f64;
    let mut layers = Vec::new();
    for &(basis, coefficient) in bases {
        plan.sublayer(basis, coefficient, tau, &mut layers);
    }
    Schedule {
        num_sites: plan.num_sites,
        steps: (0..n)
            .map(|_| Step {
                duration: tau,
                layers: layers.clone(),
            })
            .collect(),
        error_order,
    }
}

/// Ising coupling: all terms are diagonal, one pass is exact.
pub fn compile_zz(spec: &HamiltonianSpec, t: f64) -> Result<Schedule> {
    require_kind(spec, &[CouplingKind::Zz], "compile_zz")?;
    check_time(t)?;
    let plan = Plan::new(spec)?;
    Ok(single_pass(&plan, &[(Basis::Z, plan.coefficients[2])], t))
}

/// Anisotropic Heisenberg coupling by first-order splitting in the order
/// `(zz, xx, yy)`. With `η = λ = 0` the result is the exact Ising pass.
pub fn compile_heisenberg(spec: &HamiltonianSpec, t: f64, dt: f64) -> Result<Schedule> {
    require_kind(spec, &[CouplingKind::Heisenberg], "compile_heisenberg")?;
    check_dt(dt)?;
    check_time(t)?;
    let plan = Plan::new(spec)?;
    let [cx, cy, cz] = plan.coefficients;
    if cx == 0.0 && cy == 0.0 {
        return Ok(single_pass(&plan, &[(Basis::Z, cz)], t));
    }
    Ok(trotterized(
        &plan,
        &[(Basis::Z, cz), (Basis::X, cx), (Basis::Y, cy)],
        t,
        dt,
    ))
}

/// `Σ χ_{k,l} j_x,k j_x,l`: every term commutes, so one pass is exact.
pub fn compile_xx(spec: &HamiltonianSpec, t: f64) -> Result<Schedule> {
    require_kind(
        spec,
        &[CouplingKind::Xx, CouplingKind::PartialXx],
        "compile_xx",
    )?;
    check_time(t)?;
    let plan = Plan::new(spec)?;
    Ok(single_pass(&plan, &[(Basis::X, plan.coefficients[0])], t))
}

/// `Σ χ_{k,l}(j_x j_x − j_y j_y)`: alternating x layers with phase `+φ` and
/// y layers with phase `−φ`.
pub fn compile_xx_minus_yy(spec: &HamiltonianSpec, t: f64, dt: f64) -> Result<Schedule> {
    require_kind(spec, &[CouplingKind::XxMinusYy], "compile_xx_minus_yy")?;
    check_dt(dt)?;
    check_time(t)?;
    let plan = Plan::new(spec)?;
    let [cx, cy, _] = plan.coefficients;
    Ok(trotterized(&plan, &[(Basis::X, cx), (Basis::Y, cy)], t, dt))
}

/// Dispatches on the spec's kind; `dt` is ignored by exact kinds.
pub fn compile(spec: &HamiltonianSpec, t: f64, dt: f64) -> Result<Schedule> {
    match spec.kind {
        CouplingKind::Zz => compile_zz(spec, t),
        CouplingKind::Heisenberg => compile_heisenberg(spec, t, dt),
        CouplingKind::Xx | CouplingKind::PartialXx => compile_xx(spec, t),
        CouplingKind::XxMinusYy => compile_xx_minus_yy(spec, t, dt),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Boundary, LatticeConfig, OccupancyMask};

    fn ring(m: usize) -> LatticeConfig {
        LatticeConfig::periodic(m).unwrap()
    }

    #[test]
    fn zz_full_ring_is_one_layer_of_fifteen_gates() {
        let spec = HamiltonianSpec::new(CouplingKind::Zz, ring(15));
        let s = compile_zz(&spec, 0.3).unwrap();
        let layers: Vec<_> = s.collision_layers().collect();
        assert_eq!(layers.len(), 1);
        assert_eq!(layers[0].gates.len(), 15);
        assert_eq!(s.error_order, ErrorOrder::Exact);
        assert!(layers[0].gates.iter().all(|g| (g.phi - 0.3).abs() < 1e-15));
        s.validate().unwrap();
    }

    #[test]
    fn zero_time_is_identity() {
        let spec = HamiltonianSpec::new(CouplingKind::Zz, ring(6));
        assert!(compile_zz(&spec, 0.0).unwrap().steps.is_empty());
        let xy = HamiltonianSpec::new(CouplingKind::XxMinusYy, ring(6));
        assert!(compile_xx_minus_yy(&xy, 0.0, 0.1).unwrap().is_identity());
    }

    #[test]
    fn heisenberg_step_structure() {
        let spec = HamiltonianSpec::heisenberg(ring(15), 1.0, 1.0, 1.0);
        let s = compile_heisenberg(&spec, 1.0, 0.1).unwrap();
        assert_eq!(s.steps.len(), 10);
        assert_eq!(s.collision_layers().count(), 30);
        for step in &s.steps {
            let bases: Vec<_> = step
                .layers
                .iter()
                .filter_map(|l| match l {
                    Layer::Collision(c) => Some(c.basis),
                    _ => None,
                })
                .collect();
            assert_eq!(bases, vec![Basis::Z, Basis::X, Basis::Y]);
            assert_eq!(step.layers.len(), 7);
        }
        assert_eq!(s.error_order, ErrorOrder::FirstOrder { dt: 0.1 });
        s.validate().unwrap();
    }

    #[test]
    fn heisenberg_without_transverse_terms_is_ising() {
        let lattice = ring(7);
        let h = HamiltonianSpec::heisenberg(lattice, 0.8, 0.0, 0.0).with_range(2);
        let z = HamiltonianSpec::new(CouplingKind::Zz, lattice)
            .with_chi(0.8)
            .with_range(2);
        assert_eq!(
            compile_heisenberg(&h, 1.3, 0.1).unwrap(),
            compile_zz(&z, 1.3).unwrap()
        );
    }

    #[test]
    fn bad_dt_is_rejected() {
        let spec = HamiltonianSpec::heisenberg(ring(4), 1.0, 1.0, 1.0);
        assert!(matches!(
            compile_heisenberg(&spec, 1.0, 0.0),
            Err(Error::Argument(_))
        ));
        let xy = HamiltonianSpec::new(CouplingKind::XxMinusYy, ring(4));
        assert!(compile_xx_minus_yy(&xy, 1.0, -0.1).is_err());
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let spec = HamiltonianSpec::new(CouplingKind::Xx, ring(4));
        assert!(compile_zz(&spec, 1.0).is_err());
        assert!(compile_heisenberg(&spec, 1.0, 0.1).is_err());
    }

    #[test]
    fn partial_without_mask_errors_and_empty_mask_is_identity() {
        let spec = HamiltonianSpec::new(CouplingKind::PartialXx, ring(6));
        assert!(matches!(compile_xx(&spec, 1.0), Err(Error::Argument(_))));
        let empty = spec.with_mask(OccupancyMask::empty(6));
        assert!(compile_xx(&empty, 1.0).unwrap().is_identity());
    }

    #[test]
    fn open_chain_is_symmetrized() {
        let chain = LatticeConfig::new(4, Boundary::Open).unwrap();
        let spec = HamiltonianSpec::new(CouplingKind::Zz, chain);
        let s = compile_zz(&spec, 1.0).unwrap();
        let layers: Vec<_> = s.collision_layers().collect();
        assert_eq!(layers.len(), 2);
        assert_eq!(layers[0].displacement, 1);
        assert_eq!(layers[1].displacement, -1);
        assert!(layers
            .iter()
            .flat_map(|l| &l.gates)
            .all(|g| (g.phi - 0.5).abs() < 1e-15));
    }

    #[test]
    fn xx_minus_yy_uses_opposite_phases() {
        let spec = HamiltonianSpec::new(CouplingKind::XxMinusYy, ring(5)).with_chi(2.0);
        let s = compile_xx_minus_yy(&spec, 0.4, 0.1).unwrap();
        assert_eq!(s.steps.len(), 4);
        let phases: Vec<_> = s.steps[0]
            .layers
            .iter()
            .filter_map(|l| match l {
                Layer::Collision(c) => Some((c.basis, c.phase)),
                _ => None,
            })
            .collect();
        assert_eq!(phases.len(), 2);
        assert_eq!(phases[0].0, Basis::X);
        assert_eq!(phases[1].0, Basis::Y);
        assert!((phases[0].1 + phases[1].1).abs() < 1e-15);
        assert!(phases[0].1 > 0.0);
    }

    #[test]
    fn trotter_step_count() {
        assert_eq!(trotter_steps(1.0, 0.1), 10);
        assert_eq!(trotter_steps(0.3, 0.1), 3);
        assert_eq!(trotter_steps(0.31, 0.1), 4);
        assert_eq!(trotter_steps(0.05, 0.1), 1);
    }

    #[test]
    fn validate_catches_dangling_basis_change() {
        let mut s = compile_xx(&HamiltonianSpec::new(CouplingKind::Xx, ring(4)), 1.0).unwrap();
        s.steps[0].layers.pop();
        assert!(matches!(s.validate(), Err(Error::Validation(_))));
    }

    #[test]
    fn listing_has_one_line_per_layer() {
        let spec = HamiltonianSpec::new(CouplingKind::Xx, ring(4));
        let text = compile_xx(&spec, 0.5).unwrap().listing();
        let expected = "\
schedule sites=4 steps=1 order=exact
step 0 duration=0.5000000000
  rotate axis=y angle=+1.5707963268
  collide basis=x d=+1 phi=+0.5000000000 gates=4 pairs=0>1,1>2,2>3,3>0
  rotate axis=y angle=-1.5707963268
";
        assert_eq!(text, expected);
    }
}
