use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plectic_core::config::{load_model, MODEL_DIR_ENV};
use plectic_core::harness::{chi_dependence, orbits, verify, GroupChoice, Report, Suite};

#[derive(Parser)]
#[command(name = "plectic-cm", version, about = "Verify plectic actions on finite CM models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Builtin model id, id in the model directory, or path to a TOML file.
    #[arg(long)]
    model: String,
    /// Also write the JSON report here (`-` for stdout).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Orbits of CM types under Galois or plectic generators.
    Orbits {
        #[command(flatten)]
        common: Common,
        /// Only this group; both when omitted.
        #[arg(long)]
        group: Option<GroupChoice>,
    },
    /// Run verification suites; all of them unless `--suite` is given.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        suite: Vec<Suite>,
    },
    /// Compare outputs across every admissible splitting χ_F.
    ChiDependence {
        #[command(flatten)]
        common: Common,
    },
}

fn emit(report: &Report, json: Option<&PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    match json {
        Some(p) if p.as_os_str() == "-" => println!("{text}"),
        Some(p) => {
            print!("{}", report.render_text());
            fs::write(p, text + "\n").map_err(|e| format!("writing {}: {e}", p.display()))?;
        }
        None => print!("{}", report.render_text()),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, String> {
    let (common, report) = match cli.command {
        Command::Orbits { common, group } => {
            let m = load_model(&common.model).map_err(|e| e.to_string())?;
            let groups = match group {
                Some(g) => vec![g],
                None => vec![GroupChoice::Galois, GroupChoice::Plectic],
            };
            (common, orbits(&m, &groups))
        }
        Command::Verify { common, suite } => {
            let m = load_model(&common.model).map_err(|e| e.to_string())?;
            let mut suites = if suite.is_empty() { Suite::ALL.to_vec() } else { suite };
            suites.sort();
            suites.dedup();
            (common, verify(&m, &suites))
        }
        Command::ChiDependence { common } => {
            let m = load_model(&common.model).map_err(|e| e.to_string())?;
            let r = chi_dependence(&m).map_err(|e| e.to_string())?;
            (common, r)
        }
    };
    emit(&report, common.json.as_ref())?;
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("(models are looked up as builtins, paths, or files in ${MODEL_DIR_ENV})");
            ExitCode::from(2)
        }
    }
}
