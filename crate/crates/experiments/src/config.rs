//! Run parameters shared by all experiments.

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use latticesq_core::lattice::MAX_LATTICE_SITES;
use latticesq_core::state::MAX_SITES;
use latticesq_core::CouplingKind;
use serde::{Deserialize, Serialize};

use crate::error::{ExperimentError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Spinwave,
    SqueezeFull,
    SqueezePartial,
    TwistScaling,
}

impl Experiment {
    pub fn label(self) -> &'static str {
        match self {
            Experiment::Spinwave => "spinwave",
            Experiment::SqueezeFull => "squeeze_full",
            Experiment::SqueezePartial => "squeeze_partial",
            Experiment::TwistScaling => "twist_scaling",
        }
    }
}

/// Coupling names accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    Zz,
    Heisenberg,
    Xx,
    Xxyy,
}

impl Coupling {
    pub fn kind(self) -> CouplingKind {
        match self {
            Coupling::Zz => CouplingKind::Zz,
            Coupling::Heisenberg => CouplingKind::Heisenberg,
            Coupling::Xx => CouplingKind::Xx,
            Coupling::Xxyy => CouplingKind::XxMinusYy,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub atoms: usize,
    pub filling: f64,
    /// Neighbour ranges; each is run separately. The spin wave uses the first
    /// and the all-to-all sweep ignores them.
    pub ranges: Vec<usize>,
    pub couplings: Vec<Coupling>,
    pub chi: f64,
    pub dt: f64,
    /// End of the simulated window. `None` picks the per-experiment default.
    pub t_max: Option<f64>,
    /// Output every `stride`-th time point.
    pub stride: usize,
    pub realizations: usize,
    pub seed: u64,
    /// Points of the uniform time grid used to bracket ξ² minima of exact
    /// evolutions.
    pub grid_points: usize,
    /// Atom numbers swept by `twist_scaling`.
    pub sizes: Vec<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    /// Defaults: 15 atoms, `dt = 0.1/χ`, 20 realizations, periodic lattice.
    pub fn new(experiment: Experiment) -> Self {
        let (couplings, filling) = match experiment {
            Experiment::Spinwave => (vec![Coupling::Heisenberg], 1.0),
            Experiment::SqueezeFull => (vec![Coupling::Xx, Coupling::Xxyy], 1.0),
            Experiment::SqueezePartial => (vec![Coupling::Xx], 0.5),
            Experiment::TwistScaling => (vec![Coupling::Xx, Coupling::Xxyy], 1.0),
        };
        Self {
            experiment,
            atoms: 15,
            filling,
            ranges: match experiment {
                Experiment::Spinwave => vec![1],
                _ => vec![1, 2, 3],
            },
            couplings,
            chi: 1.0,
            dt: 0.1,
            t_max: None,
            stride: 1,
            realizations: 20,
            seed: 1,
            grid_points: 400,
            sizes: std::iter::once(2).chain(6..=14).collect(),
            out: None,
            format: OutputFormat::Csv,
        }
    }

    /// Window end actually used: `floor(N/2)/χ` for the spin wave, which lets
    /// the two fronts reach the far side of the ring, and `χt = π/2` for the
    /// squeezing runs.
    pub fn resolved_t_max(&self) -> f64 {
        self.t_max.unwrap_or_else(|| match self.experiment {
            Experiment::Spinwave => (self.atoms / 2) as f64 / self.chi.abs(),
            _ => FRAC_PI_2 / self.chi.abs(),
        })
    }

    /// Lattice size `round(N/p)`.
    pub fn lattice_sites(&self) -> usize {
        (self.atoms as f64 / self.filling).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if !(self.filling > 0.0 && self.filling <= 1.0) {
            return bad(format!(
                "filling must satisfy 0 < p <= 1, got {}",
                self.filling
            ));
        }
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.chi.is_finite() && self.chi != 0.0) {
            return bad(format!("chi must be finite and nonzero, got {}", self.chi));
        }
        let t_max = self.resolved_t_max();
        if t_max.is_nan() || t_max < self.dt {
            return bad(format!("t_max ({t_max}) must be at least dt ({})", self.dt));
        }
        if self.stride == 0 {
            return bad("stride must be at least 1".into());
        }
        if self.grid_points < 3 {
            return bad("grid must have at least 3 points".into());
        }
        if self.ranges.is_empty() || self.ranges.contains(&0) {
            return bad("neighbour ranges must be at least 1".into());
        }
        if self.couplings.is_empty() {
            return bad("at least one coupling is required".into());
        }
        let allowed: &[Coupling] = match self.experiment {
            Experiment::Spinwave => &[Coupling::Heisenberg],
            Experiment::SqueezeFull | Experiment::TwistScaling => &[Coupling::Xx, Coupling::Xxyy],
            Experiment::SqueezePartial => &[Coupling::Xx],
        };
        if let Some(c) = self.couplings.iter().find(|c| !allowed.contains(c)) {
            return bad(format!(
                "coupling {} is not available for {}",
                c.kind(),
                self.experiment.label()
            ));
        }
        let atoms_needed = match self.experiment {
            Experiment::TwistScaling => {
                if self.sizes.is_empty() || self.sizes.iter().any(|&n| n < 2) {
                    return bad("twist scaling sizes must all be at least 2".into());
                }
                *self.sizes.iter().max().unwrap()
            }
            _ => self.atoms,
        };
        if atoms_needed < 2 {
            return bad("at least 2 atoms are required".into());
        }
        if atoms_needed > MAX_SITES {
            return Err(latticesq_core::error::Error::Capacity {
                what: "atoms",
                requested: atoms_needed,
                limit: MAX_SITES,
            }
            .into());
        }
        match self.experiment {
            Experiment::SqueezeFull | Experiment::TwistScaling | Experiment::Spinwave
                if self.filling != 1.0 =>
            {
                bad(format!(
                    "{} needs a full lattice (p = 1)",
                    self.experiment.label()
                ))
            }
            Experiment::SqueezePartial if self.lattice_sites() > MAX_LATTICE_SITES => {
                Err(ExperimentError::Capacity(format!(
                    "round(N/p) = {} lattice sites exceeds the limit of {MAX_LATTICE_SITES}; \
                     use fewer atoms or a larger filling",
                    self.lattice_sites()
                )))
            }
            _ => Ok(()),
        }
    }
}
