use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nlwave::Execution;
use nlwave_cli::config::{echo, parse_config_with_overrides, reconfigure, ConfigError, ExperimentConfig};
use nlwave_cli::presets::{list_presets, preset};
use nlwave_cli::runner::{self, RunError, RunReport, EXIT_CONFIG, EXIT_IO};

#[derive(Parser)]
#[command(name = "nlwave", version, about = "Nonlocal coupled wave experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a TOML config or a preset.
    Run {
        /// Config file.
        #[arg(required_unless_present = "preset", conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// List the built-in presets.
    Presets,
    /// Print a preset's description and its full config.
    Describe { preset: String },
    /// Check a config and print it with defaults filled in.
    Validate {
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run several scenarios in parallel, each into its own subdirectory.
    Sweep {
        configs: Vec<PathBuf>,
        /// Preset to include; repeatable, `all` for every preset.
        #[arg(long = "preset")]
        presets: Vec<String>,
        /// Run the members one after another.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    /// Dotted-path assignment applied before validation, e.g. `evolution.dt=5e-4`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, short)]
    quiet: bool,
}

fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig, RunError> {
    let text = fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_config_with_overrides(&text, overrides)?)
}

fn load_preset(name: &str, overrides: &[String]) -> Result<ExperimentConfig, ConfigError> {
    reconfigure(&preset(name)?, overrides)
}

fn summary(report: &RunReport) -> String {
    let mut line = format!("{}: {}", report.config.name, outcome_text(report));
    if let Some(e) = &report.energy {
        line += &format!(", energy drift {:.3e}", e.relative_drift);
    }
    if let Some(c) = &report.certificate {
        line += &format!(", certificate {:?}", c.status);
    }
    if let Some(l) = &report.levine {
        line += &format!(", Levine bound {:.6}", l.bound);
    }
    if let Some(err) = report.oracle_max_error {
        line += &format!(", oracle error {err:.3e}");
    }
    for h in &report.hypotheses {
        line += &format!(", {} {}", h.predicate, if h.passed { "ok" } else { "FAILED" });
    }
    line
}

fn outcome_text(report: &RunReport) -> String {
    match &report.outcome {
        nlwave::Outcome::Completed => format!("completed at t = {}", report.t_final),
        nlwave::Outcome::BlowupDetected { t_detect, bracket } => {
            format!(
                "blow-up detected at t = {t_detect} (bracket [{}, {}])",
                bracket.0, bracket.1
            )
        }
        nlwave::Outcome::Corrupted { t } => format!("non-finite state at t = {t}"),
    }
}

fn fail(err: &dyn std::fmt::Display, code: i32) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code as u8)
}

fn run_one(config: Option<PathBuf>, preset_name: Option<String>, common: Common) -> ExitCode {
    let cfg = match (config, preset_name) {
        (Some(path), _) => load(&path, &common.overrides),
        (None, Some(name)) => load_preset(&name, &common.overrides).map_err(RunError::from),
        (None, None) => unreachable!("clap requires one of them"),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => return fail(&e, e.exit_code()),
    };
    match runner::run_to_dir(&cfg, &common.output_dir) {
        Ok(out) => {
            if !common.quiet {
                println!("{}", summary(&out.report));
                println!("wrote {}", common.output_dir.display());
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => fail(&e, e.exit_code()),
    }
}

fn sweep(configs: Vec<PathBuf>, presets: Vec<String>, sequential: bool, common: Common) -> ExitCode {
    let mut members = Vec::new();
    for path in &configs {
        match load(path, &common.overrides) {
            Ok(c) => members.push(c),
            Err(e) => return fail(&format!("{}: {e}", path.display()), e.exit_code()),
        }
    }
    let names: Vec<String> = if presets.iter().any(|p| p == "all") {
        list_presets().iter().map(|p| p.name.to_owned()).collect()
    } else {
        presets
    };
    for name in &names {
        match load_preset(name, &common.overrides) {
            Ok(c) => members.push(c),
            Err(e) => return fail(&e, EXIT_CONFIG),
        }
    }
    if members.is_empty() {
        return fail(&"nothing to run: give config files or --preset", EXIT_CONFIG);
    }
    if let Err(e) = fs::create_dir_all(&common.output_dir) {
        return fail(&format!("cannot create {}: {e}", common.output_dir.display()), EXIT_IO);
    }

    let execution = if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let entries = runner::run_sweep(&members, &common.output_dir, execution);
    for entry in &entries {
        match &entry.result {
            Ok(report) if !common.quiet => println!("[{}] {}", entry.dir.display(), summary(report)),
            Ok(_) => {}
            Err(e) => eprintln!("[{}] error: {e}", entry.dir.display()),
        }
    }
    ExitCode::from(runner::sweep_exit_code(&entries) as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, preset, common } => run_one(config, preset, common),
        Command::Presets => {
            for p in list_presets() {
                println!("{:<24} {}", p.name, p.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Describe { preset: name } => match list_presets().iter().find(|p| p.name == name) {
            Some(p) => {
                println!("# {}\n# {}\n", p.name, p.summary);
                print!("{}", echo(&p.config()));
                ExitCode::SUCCESS
            }
            None => fail(&ConfigError::UnknownPreset(name), EXIT_CONFIG),
        },
        Command::Validate { config, overrides } => match load(&config, &overrides) {
            Ok(cfg) => {
                print!("{}", echo(&cfg));
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e, e.exit_code()),
        },
        Command::Sweep {
            configs,
            presets,
            sequential,
            common,
        } => sweep(configs, presets, sequential, common),
    }
}
