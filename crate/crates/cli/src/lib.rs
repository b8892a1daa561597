//! Scenario runner for `msh-core`: TOML configs, subcommands, run
//! directories with a manifest written last.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use msh_core::experiments::{StudyKind, SweepAxis};

use crate::config::{ScenarioConfig, SweepSection};
use crate::error::CliError;
use crate::output::{hex_sha256, RunDir};

#[derive(Debug, Parser)]
#[command(name = "msh", version, about = "Modified Swift-Hohenberg simulator and analysis toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Scenario file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Run directory; overrides output.directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// RNG seed for equilibrium searches.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Forcing bound; rescales the configured amplitudes.
    #[arg(long = "M", global = true)]
    pub m: Option<f64>,
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvalue ladder, λ₀ and the Morse index of 0.
    Spectrum {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 16)]
        modes: usize,
    },
    /// Forward runs from the configured seeds.
    Simulate,
    /// Two forced orbits near 0 and u₀ (Swift-Hohenberg, a < −λ₀).
    Theorem41,
    /// Three forced orbits near 0 and ±u₀ (Chafee-Infante, a > μ₁).
    Chafee,
    /// Parameter sweep over a, b or M.
    Sweep {
        #[arg(long)]
        axis: Option<SweepAxis>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        grid: Option<Vec<f64>>,
    },
}

impl Cli {
    /// The effective config: file or subcommand default, then flag overrides.
    pub fn resolve(&self) -> Result<ScenarioConfig, CliError> {
        let mut cfg = match (&self.config, &self.command) {
            (Some(p), _) => ScenarioConfig::load(p)?,
            (None, Command::Chafee) => ScenarioConfig::three_orbit_default(),
            (None, Command::Spectrum { dim, modes }) => {
                let mut c = ScenarioConfig::two_orbit_default();
                c.model.a = 0.0;
                c.model.b = 0.0;
                c.forcing = Default::default();
                c.domain.dimension = *dim;
                c.domain.modes = vec![*modes; *dim];
                c
            }
            (None, Command::Simulate) => {
                return Err(CliError::Config("simulate needs --config".into()));
            }
            (None, _) => ScenarioConfig::two_orbit_default(),
        };
        if let Some(a) = self.a {
            cfg.model.a = a;
        }
        if let Some(b) = self.b {
            cfg.model.b = b;
        }
        if let Some(m) = self.m {
            cfg.set_forcing_bound(m)?;
        }
        if let Some(t) = self.t_end {
            match self.command {
                Command::Simulate => cfg.integrator.t_end = t,
                _ => cfg.study.horizon = t,
            }
        }
        if let Some(s) = self.seed {
            cfg.study.rng_seed = s;
        }
        if let Some(out) = &self.out {
            cfg.output.directory = out.clone();
        }
        if let Command::Sweep { axis, grid } = &self.command {
            match (axis, grid, &mut cfg.sweep) {
                (Some(axis), Some(grid), sw) => {
                    *sw = Some(SweepSection {
                        axis: *axis,
                        grid: grid.clone(),
                    })
                }
                (None, None, _) => {}
                (_, _, None) => return Err(CliError::Config("--axis and --grid go together".into())),
                (axis, grid, Some(sw)) => {
                    if let Some(a) = axis {
                        sw.axis = *a;
                    }
                    if let Some(g) = grid {
                        sw.grid = g.clone();
                    }
                }
            }
        }
        cfg.build()?;
        Ok(cfg)
    }

    fn name(&self) -> &'static str {
        match self.command {
            Command::Spectrum { .. } => "spectrum",
            Command::Simulate => "simulate",
            Command::Theorem41 => "theorem41",
            Command::Chafee => "chafee",
            Command::Sweep { .. } => "sweep",
        }
    }
}

/// Runs the CLI and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    if let Some(n) = cli.jobs {
        // fails only if a pool already exists (tests), which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let cfg = match cli.resolve() {
        Ok(c) => c,
        Err(e) => return report(&e),
    };
    let hash = hex_sha256(cfg.to_toml().as_bytes());
    // spectrum prints only, unless a directory is asked for
    if let Command::Spectrum { .. } = cli.command {
        if cli.out.is_none() {
            return match commands::spectrum(&cfg, None) {
                Ok(()) => 0,
                Err(e) => report(&e),
            };
        }
    }
    let mut dir = match RunDir::create(&cfg.output.directory) {
        Ok(d) => d,
        Err(e) => return report(&e),
    };
    let res = dir.write("config.toml", |w| std::io::Write::write_all(w, cfg.to_toml().as_bytes())).and_then(|_| {
        match cli.command {
            Command::Spectrum { .. } => commands::spectrum(&cfg, Some(&mut dir)),
            Command::Simulate => commands::simulate(&cfg, &mut dir),
            Command::Theorem41 => commands::study(&cfg, StudyKind::TwoOrbits, &mut dir).map(|_| ()),
            Command::Chafee => commands::study(&cfg, StudyKind::ThreeOrbits, &mut dir).map(|_| ()),
            Command::Sweep { .. } => commands::run_sweep(&cfg, &mut dir),
        }
    });
    let status = match &res {
        Ok(()) => "ok",
        Err(e) => e.kind(),
    };
    if let Err(e) = &res {
        if let Err(w) = dir.write_error(e) {
            eprintln!("{w}");
        }
    }
    if let Err(e) = dir.finish(cli.name(), &hash, status) {
        return report(&e);
    }
    match res {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> i32 {
    eprintln!("{}", serde_json::to_string(&e.record()).unwrap_or_else(|_| e.to_string()));
    e.exit_code()
}
