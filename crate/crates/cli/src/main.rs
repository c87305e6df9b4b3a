//! `pdcsim`: sweeps, lossy trajectories and self-checks for cavity
//! parametric down-conversion, written as CSV with optional SVG plots.

mod config;
mod error;
mod output;
mod scenarios;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Arg, ArgAction, Command};

use config::{RawConfig, RunConfig, KEYS};
use error::CliError;

fn command() -> Command {
    let mut cmd = Command::new("pdcsim")
        .version(env!("CARGO_PKG_VERSION"))
        .allow_negative_numbers(true)
        .about("Entanglement criteria and correlators for cavity parametric down-conversion")
        .after_help(
            "Exit status: 0 success, 1 configuration error, 2 accuracy or self-check failure.",
        )
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .value_parser(clap::value_parser!(PathBuf))
                .help("flat key = value file; flags override its entries"),
        );
    for &(key, help) in KEYS {
        let arg = Arg::new(key).long(key).help(help);
        let arg = if key == "plot" {
            arg.action(ArgAction::SetTrue)
        } else {
            arg.value_name("VALUE")
        };
        cmd = cmd.arg(arg);
    }
    cmd
}

fn resolve(args: &clap::ArgMatches) -> Result<RunConfig, CliError> {
    let mut raw = match args.get_one::<PathBuf>("config") {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    for &(key, _) in KEYS {
        if key == "plot" {
            if args.get_flag("plot") {
                raw.set_flag("plot", "true");
            }
        } else if let Some(value) = args.get_one::<String>(key) {
            raw.set_flag(key, value);
        }
    }
    raw.resolve()
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn run(args: &clap::ArgMatches) -> Result<(), CliError> {
    let config = resolve(args)?;
    let plot = config.flag("plot")?;
    let out = config.out();
    if plot && out.is_none() {
        return Err(config.invalid(
            "plot",
            "needs `out` to name the CSV file the plot is written next to",
        ));
    }
    if plot && config.scenario == config::Scenario::SelfCheck {
        return Err(config.invalid("plot", "selfcheck produces no plot"));
    }

    let report = scenarios::run(&config)?;

    let mut header = vec![format!("pdcsim {}", env!("CARGO_PKG_VERSION"))];
    header.extend(config.echo());
    match &out {
        Some(path) => {
            let file = File::create(path).map_err(io_error(path))?;
            let mut w = BufWriter::new(file);
            output::write_csv(&mut w, &header, &report.table)
                .and_then(|_| w.flush())
                .map_err(io_error(path))?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            output::write_csv(&mut w, &header, &report.table)
                .map_err(io_error(Path::new("<stdout>")))?;
        }
    }
    if let (true, Some(path), Some(figure)) = (plot, &out, &report.plot) {
        let svg_path = path.with_extension("svg");
        std::fs::write(&svg_path, output::render_svg(figure)).map_err(io_error(&svg_path))?;
    }

    if !report.failures.is_empty() {
        return Err(CliError::SelfCheck(report.failures.join(", ")));
    }
    Ok(())
}

fn main() {
    let args = match command().try_get_matches() {
        Ok(args) => args,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(&args) {
        eprintln!("pdcsim: {e}");
        std::process::exit(e.exit_code());
    }
}
