//! Command-line experiments over the `assocmem` library.
//!
//! Every subcommand reads its parameters through [`Params`], writes CSVs
//! into the output directory and a summary to the given writer.

pub mod commands;
pub mod config;
pub mod params;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

pub use config::{Config, ConfigError};
pub use params::Params;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, config or input files.
    Input(String),
    /// A checked property failed.
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Violation(_) => EXIT_VIOLATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Violation(m) => write!(f, "violation: {m}"),
        }
    }
}

impl From<assocmem::Error> for CliError {
    fn from(e: assocmem::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("i/o: {e}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "assocmem", version, about = "Associative-memory energy, retrieval and scaling experiments")]
struct Cli {
    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for all randomness.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Override a parameter; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Tabulate 1-D or 2-D energy landscapes.
    Landscape,
    /// Nearest-neighbor distance statistics of activation vectors.
    Radius,
    /// Run the bound and lemma property suites.
    Verify,
    /// Retrieval success rate against stored pattern count.
    Capacity,
    /// Partition function of a union of pattern balls.
    Partition,
    /// Model/data balance ratios and scaling-law losses.
    Scaling,
    /// Select the plateau data size from loss curves.
    Dstar,
}

/// State shared by every subcommand.
pub struct Context<'a> {
    pub params: Params,
    pub out_dir: PathBuf,
    pub stdout: &'a mut dyn Write,
}

impl Context<'_> {
    pub fn seed(&self) -> Result<u64, CliError> {
        self.params.get("seed", 0u64)
    }

    /// Creates the output directory and returns the path of `name` inside it.
    pub fn output(&self, name: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", self.out_dir.display())))?;
        Ok(self.out_dir.join(name))
    }

    /// Writes a CSV produced by `body` into the output directory.
    pub fn write_file<F>(&mut self, name: &str, body: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
    {
        let path = self.output(name)?;
        let mut buf = Vec::new();
        body(&mut buf)?;
        std::fs::write(&path, buf).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))?;
        writeln!(self.stdout, "wrote {}", path.display())?;
        Ok(path)
    }
}

fn parse_overrides(pairs: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("--set expects KEY=VALUE, got {pair:?}")))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(CliError::Input(format!("--set expects KEY=VALUE, got {pair:?}")));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Input(format!("--set {k} given more than once")));
        }
    }
    Ok(map)
}

fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    Config::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut flags = parse_overrides(&cli.set)?;
    if let Some(seed) = cli.seed {
        if flags.insert("seed".into(), seed.to_string()).is_some() {
            return Err(CliError::Input("seed given both as --seed and --set seed=".into()));
        }
    }
    let (config, base) = match &cli.config {
        Some(path) => (load_config(path)?, path.parent().map(Path::to_path_buf)),
        None => (Config::default(), None),
    };
    let mut ctx = Context {
        params: Params::new(flags, config, base),
        out_dir: cli.out,
        stdout,
    };
    // The seed is global: accepted, and validated, for every command.
    ctx.seed()?;
    match cli.command {
        Command::Landscape => commands::landscape::run(&mut ctx),
        Command::Radius => commands::radius::run(&mut ctx),
        Command::Verify => commands::verify::run(&mut ctx),
        Command::Capacity => commands::capacity::run(&mut ctx),
        Command::Partition => commands::partition::run(&mut ctx),
        Command::Scaling => commands::scaling::run(&mut ctx),
        Command::Dstar => commands::dstar::run(&mut ctx),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code()
        }
    }
}
