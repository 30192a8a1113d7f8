use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use icefloe::mms::{convergence_study, write_convergence_csv, StudyPlan};
use icefloe::output::{self, EXIT_USAGE};
use icefloe::{load_config_with_overrides, Scheme};

#[derive(Parser)]
#[command(name = "icefloe", version, about = "1D viscous-plastic sea ice simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configuration in a file.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Extra key=value settings applied after the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Manufactured-solution convergence study at 40, 20 and 10 km.
    Converge {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Cd,
    Weno,
}

fn config_error(out: &Path, msg: &str) -> u8 {
    eprintln!("icefloe: {msg}");
    if let Err(e) = output::write_config_error(out, msg) {
        eprintln!("icefloe: {e}");
    }
    EXIT_USAGE as u8
}

fn run(config: PathBuf, out: PathBuf, set: Vec<String>) -> u8 {
    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            let msg = format!("cannot read {}: {e}", config.display());
            return config_error(&out, &msg);
        }
    };
    let spec = match load_config_with_overrides(&text, &set) {
        Ok(s) => s,
        Err(e) => {
            let msg = format!("{}: {e}", config.display());
            return config_error(&out, &msg);
        }
    };
    match output::run(&spec, &out) {
        Ok(report) => {
            let s = &report.summary;
            println!("{} -> {} ({})", config.display(), s.status, out.display());
            if let Some(t) = s.blow_up_time {
                println!("blow-up detected at t = {t} s");
            }
            if let Some(m) = &s.message {
                eprintln!("icefloe: {m}");
            }
            report.code as u8
        }
        Err(e) => {
            eprintln!("icefloe: {e}");
            EXIT_USAGE as u8
        }
    }
}

fn converge(scheme: SchemeArg, out: PathBuf) -> u8 {
    let (scheme, name) = match scheme {
        SchemeArg::Cd => (Scheme::Cd, "cd"),
        SchemeArg::Weno => (Scheme::Weno, "weno"),
    };
    let rows = match convergence_study(scheme, &StudyPlan::default()) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("icefloe: {e}");
            return output::EXIT_NON_CONVERGENCE as u8;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("icefloe: {}: {e}", out.display());
        return EXIT_USAGE as u8;
    }
    let path = out.join(format!("convergence_{name}.csv"));
    let written = std::fs::File::create(&path).and_then(|f| write_convergence_csv(&rows, std::io::BufWriter::new(f)));
    if let Err(e) = written {
        eprintln!("icefloe: {}: {e}", path.display());
        return EXIT_USAGE as u8;
    }
    let mut stdout = std::io::stdout().lock();
    let _ = write_convergence_csv(&rows, &mut stdout);
    0
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    ExitCode::from(match cli.command {
        Command::Run { config, out, set } => run(config, out, set),
        Command::Converge { scheme, out } => converge(scheme, out),
    })
}
