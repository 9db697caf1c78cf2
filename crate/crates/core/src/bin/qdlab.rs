use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qdlab::error::{QdError, Result};
use qdlab::fsio::write_atomic;
use qdlab::harness::{
    bloch_report, gadget_report, hqd_spectrum, parse_lambda_grid, run_check, run_suite, CheckId, ExperimentConfig,
    GadgetConfig, GadgetInstance, GadgetMode, Report, SiteKind, Tolerances,
};
use qdlab::lattice::LatticeKind;

#[derive(Parser)]
#[command(name = "qdlab", version, about = "Quantum double models, clock gadgets and Bloch series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Low-energy spectrum of the quantum double Hamiltonian on a torus
    Hqd {
        #[arg(long, default_value = "Z2")]
        group: String,
        #[arg(long, default_value = "square")]
        lattice: LatticeKind,
        #[arg(long, default_value = "2x2")]
        size: String,
        /// number of eigenvalues to compute
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one check and print its record as JSON
    Verify {
        check: CheckId,
        #[command(flatten)]
        scope: Scope,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a gadget and report its structure and low spectrum
    Gadget {
        #[command(flatten)]
        gadget: GadgetArgs,
        /// single coupling strength; overrides the grid
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bloch series terms and leading-order checks for a gadget
    Bloch {
        /// gadget config JSON
        #[arg(long = "gadget")]
        gadget_file: Option<PathBuf>,
        #[command(flatten)]
        gadget: GadgetArgs,
        #[arg(long)]
        orders: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a list of checks from a JSON config
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        scope: Scope,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        sweep_csv: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct Scope {
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    lattice: Option<LatticeKind>,
    #[arg(long)]
    size: Option<String>,
    #[arg(long)]
    site: Option<SiteKind>,
    #[arg(long)]
    lambda_grid: Option<String>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl Scope {
    fn apply(self, cfg: &mut ExperimentConfig) -> Result<()> {
        if self.group.is_some() {
            cfg.group = self.group;
        }
        if self.lattice.is_some() {
            cfg.lattice = self.lattice;
        }
        if self.size.is_some() {
            cfg.size = self.size;
        }
        if self.site.is_some() {
            cfg.site = self.site;
        }
        if let Some(g) = self.lambda_grid {
            cfg.lambda_grid = parse_lambda_grid(&g)?;
        }
        if let Some(o) = self.order {
            cfg.order = o;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(())
    }
}

#[derive(Args)]
struct GadgetArgs {
    /// gadget config JSON; flags override its keys
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    lattice: Option<LatticeKind>,
    #[arg(long)]
    size: Option<String>,
    /// vertex or plaquette; shorthand for --mode
    #[arg(long, conflicts_with = "mode")]
    site: Option<SiteKind>,
    /// vertex, plaquette, pair, vertices-only, plaquettes-only or full
    #[arg(long)]
    mode: Option<GadgetMode>,
    #[arg(long)]
    site_index: Option<usize>,
    #[arg(long)]
    lambda_grid: Option<String>,
}

impl GadgetArgs {
    fn resolve(self, file: Option<PathBuf>) -> Result<GadgetConfig> {
        let mut cfg = match file.or(self.config) {
            Some(p) => GadgetConfig::load(&p)?,
            None => GadgetConfig::default(),
        };
        if let Some(g) = self.group {
            cfg.group = g;
        }
        if let Some(l) = self.lattice {
            cfg.lattice = l;
        }
        if self.size.is_some() {
            cfg.size = self.size;
        }
        if let Some(s) = self.site {
            cfg.mode = match s {
                SiteKind::Vertex => GadgetMode::Vertex,
                SiteKind::Plaquette => GadgetMode::Plaquette,
            };
        }
        if let Some(m) = self.mode {
            cfg.mode = m;
        }
        if let Some(i) = self.site_index {
            cfg.site_index = i;
        }
        if let Some(g) = self.lambda_grid {
            cfg.lambda_grid = parse_lambda_grid(&g)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| QdError::Parse(e.to_string()))?;
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn print_summary(report: &Report) {
    for r in &report.records {
        eprintln!(
            "{} {:<14} value={:.3e} threshold={:.3e} ({:.2}s)",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.value,
            r.threshold,
            r.seconds
        );
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Hqd {
            group,
            lattice,
            size,
            count,
            out,
        } => {
            let tol = Tolerances::default();
            let report = hqd_spectrum(&group, lattice, Some(&size), count, tol.degeneracy)?;
            emit(&report, out.as_ref())?;
            Ok(true)
        }
        Command::Verify { check, scope, out } => {
            let mut cfg = ExperimentConfig::single(check);
            scope.apply(&mut cfg)?;
            cfg.validate()?;
            let record = run_check(check, &cfg)?;
            emit(&record, out.as_ref())?;
            Ok(record.pass)
        }
        Command::Gadget { gadget, lambda, out } => {
            let mut cfg = gadget.resolve(None)?;
            if let Some(l) = lambda {
                cfg.lambda_grid = parse_lambda_grid(&l.to_string())?;
            }
            let inst = GadgetInstance::from_config(&cfg)?;
            emit(&gadget_report(&inst, &cfg.lambda_grid)?, out.as_ref())?;
            Ok(true)
        }
        Command::Bloch {
            gadget_file,
            gadget,
            orders,
            out,
        } => {
            let cfg = gadget.resolve(gadget_file)?;
            let inst = GadgetInstance::from_config(&cfg)?;
            let report = bloch_report(
                &inst,
                orders.unwrap_or(cfg.order),
                &cfg.lambda_grid,
                &Tolerances::default(),
            )?;
            emit(&report, out.as_ref())?;
            Ok(report.pass)
        }
        Command::Suite {
            config,
            scope,
            out,
            csv,
            sweep_csv,
        } => {
            let mut cfg = match config {
                Some(p) => ExperimentConfig::load(&p)?,
                None => ExperimentConfig::full_suite(),
            };
            scope.apply(&mut cfg)?;
            if out.is_some() {
                cfg.out = out;
            }
            if csv.is_some() {
                cfg.csv = csv;
            }
            if sweep_csv.is_some() {
                cfg.sweep_csv = sweep_csv;
            }
            let to_stdout = cfg.out.is_none();
            let report = run_suite(&cfg)?;
            print_summary(&report);
            if to_stdout {
                println!("{}", report.to_json());
            }
            Ok(report.all_pass())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error ({}): {e}", e.kind());
            ExitCode::from(2)
        }
    }
}
