//! Command-line front end.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{Coupling, Experiment, ExperimentConfig, OutputFormat};
use crate::output::write_output;
use crate::runners::run;

#[derive(Parser)]
#[command(
    name = "latticesq",
    version,
    about = "Spin waves and spin squeezing in an optical-lattice simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spin wave launched by flipping the central atom
    Spinwave(RunArgs),
    /// Squeezing on a fully occupied lattice for each neighbour range
    SqueezeFull(RunArgs),
    /// Squeezing averaged over random partial fillings
    SqueezePartial(RunArgs),
    /// All-to-all squeezing as a function of atom number
    TwistScaling(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    atoms: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    filling: Option<f64>,
    /// Neighbour range; repeat or separate with commas
    #[arg(long, value_delimiter = ',')]
    range: Vec<usize>,
    /// Coupling; repeat or separate with commas
    #[arg(long, value_enum, value_delimiter = ',')]
    coupling: Vec<Coupling>,
    #[arg(long, allow_negative_numbers = true)]
    chi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tmax: Option<f64>,
    /// Output every n-th time point
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    realizations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Time-grid points used to bracket minima
    #[arg(long)]
    grid_points: Option<usize>,
    /// Atom numbers for twist-scaling
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

impl RunArgs {
    fn into_config(self, experiment: Experiment) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(experiment);
        if let Some(v) = self.atoms {
            c.atoms = v;
        }
        if let Some(v) = self.filling {
            c.filling = v;
        }
        if !self.range.is_empty() {
            c.ranges = self.range;
        }
        if !self.coupling.is_empty() {
            c.couplings = self.coupling;
        }
        if let Some(v) = self.chi {
            c.chi = v;
        }
        if let Some(v) = self.dt {
            c.dt = v;
        }
        c.t_max = self.tmax.or(c.t_max);
        if let Some(v) = self.stride {
            c.stride = v;
        }
        if let Some(v) = self.realizations {
            c.realizations = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.grid_points {
            c.grid_points = v;
        }
        if !self.sizes.is_empty() {
            c.sizes = self.sizes;
        }
        c.out = self.out;
        if let Some(v) = self.format {
            c.format = v;
        }
        c
    }
}

/// Parses `args` (including the program name), runs the experiment and
/// returns the process exit status: 0 on success, 2 for usage errors and
/// rejected configurations, 1 otherwise.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code as u8;
        }
    };
    let config = match cli.command {
        Command::Spinwave(a) => a.into_config(Experiment::Spinwave),
        Command::SqueezeFull(a) => a.into_config(Experiment::SqueezeFull),
        Command::SqueezePartial(a) => a.into_config(Experiment::SqueezePartial),
        Command::TwistScaling(a) => a.into_config(Experiment::TwistScaling),
    };
    match run(&config).and_then(|output| write_output(&config, &output)) {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                2
            } else {
                1
            }
        }
    }
}
