//! Command-line front-end: configuration layering, subcommand dispatch and
//! artifact emission. Every run writes its CSVs, optional SVG views and a
//! `manifest.toml` holding the fully resolved configuration.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod svg;

/// Environment variable overriding the default output directory.
pub const OUT_ENV: &str = "CHIPLET_IO_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Tech(#[from] chiplet_dse::techlib::TechError),
    #[error(transparent)]
    Extraction(#[from] chiplet_dse::extraction::ExtractionError),
    #[error(transparent)]
    Esd(#[from] chiplet_dse::esd::EsdError),
    #[error(transparent)]
    Dsl(#[from] chiplet_dse::dsl::DslError),
    #[error(transparent)]
    Explore(#[from] chiplet_dse::explorer::ExploreError),
    #[error(transparent)]
    Solver(#[from] chiplet_dse::mna::SolverError),
    #[error(transparent)]
    Netlist(#[from] chiplet_dse::mna::NetlistError),
    #[error("cannot write `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for anything the user can fix on the command line or in a config
    /// file, 2 for model and solver failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Tech(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "chiplet-dse", version, about = "Chiplet I/O design-space exploration")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Built-in preset applied over the defaults (legacy, advanced,
    /// jedec-legacy, jedec-scaled, jedec-hybrid).
    #[arg(long, global = true)]
    pub preset: Option<String>,
    /// User configuration file applied over the preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one key, e.g. `--set dsl.r_drv_ohm=120`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory [default: $CHIPLET_IO_OUT or ./out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Suppress the stdout report.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract channel and pad parasitics for a packaging generation.
    Extract(commands::ExtractArgs),
    /// CDM protection sizing and checks.
    #[command(subcommand)]
    Esd(commands::EsdCommand),
    /// Crosstalk eye-diagram sweeps for the direct-signaling link.
    Eye(commands::EyeArgs),
    /// I/O area and bandwidth versus chiplet edge.
    Explore(commands::ExploreArgs),
    /// Run a raw netlist deck.
    Sim(commands::SimArgs),
}

/// Output sink for one run.
pub struct Output {
    pub dir: PathBuf,
    pub quiet: bool,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: PathBuf, quiet: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Self {
            dir,
            quiet,
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        self.written.push(path);
        Ok(())
    }

    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn output_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let words: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli, &words) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.exit_code() == 1 {
                eprintln!("\nFor more information, try '--help'.");
            }
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, words: &[String]) -> Result<(), CliError> {
    let g = &cli.global;
    let mut layers = Vec::new();
    let mut names = vec!["defaults".to_string()];
    if let Some(p) = &g.preset {
        layers.push(config::preset(p)?);
        names.push(format!("preset {p}"));
    }
    if let Some(path) = &g.config {
        layers.push(config::load_file(path)?);
        names.push(format!("config {}", path.display()));
    }
    for o in &g.overrides {
        layers.push(config::override_fragment(o)?);
        names.push(format!("--set {o}"));
    }
    let mut cfg = config::resolve(layers)?;
    let mut out = Output::new(output_dir(g.out.as_deref()), g.quiet)?;
    match &cli.command {
        Command::Extract(a) => commands::extract(a, &cfg, &mut out)?,
        Command::Esd(c) => commands::esd(c, &mut cfg, &mut out)?,
        Command::Eye(a) => commands::eye(a, &cfg, &mut out)?,
        Command::Explore(a) => commands::explore(a, &cfg, &mut out)?,
        Command::Sim(a) => commands::sim(a, &mut out)?,
    }
    out.write("manifest.toml", &config::manifest(words, &names, &cfg))?;
    Ok(())
}
