use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use relay_aoi::placement::optimal_location;
use relay_aoi::sweep::{evaluate_row, run_sweep, SweepConfig, SweepError};
use relay_aoi::verify::verify;
use relay_aoi::{output, Link};

#[derive(Parser)]
#[command(name = "relay-aoi", version, about = "Age of information over a UAV relay link")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the age-minimizing relay location for every configured link.
    Plan {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one scenario and print its row.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// `optimal`, metres (`250` or `250m`) or a fraction of the span (`0.3`).
        #[arg(long)]
        relay_location: RelayLocation,
        /// Write the age sawtooth breakpoints here.
        #[arg(long)]
        trace_csv: Option<PathBuf>,
    },
    /// Evaluate the full grid and write it as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to `output.csv` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Defaults to `output.svg` from the config.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the built-in self checks.
    Verify {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RelayLocation {
    Optimal,
    Metres(f64),
    Fraction(f64),
}

impl FromStr for RelayLocation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("optimal") {
            return Ok(Self::Optimal);
        }
        let number = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite() && *v > 0.0)
                .ok_or_else(|| format!("expected `optimal`, a distance in metres or a fraction in (0, 1), got `{s}`"))
        };
        match s.strip_suffix('m') {
            Some(m) => number(m).map(Self::Metres),
            None => number(s).map(|v| if v < 1.0 { Self::Fraction(v) } else { Self::Metres(v) }),
        }
    }
}

impl RelayLocation {
    fn policy(self, span: f64) -> Result<relay_aoi::sweep::LocationPolicy, Failure> {
        use relay_aoi::sweep::LocationPolicy;
        let fraction = match self {
            Self::Optimal => return Ok(LocationPolicy::OPTIMAL),
            Self::Fraction(f) => f,
            Self::Metres(m) if m < span => m / span,
            Self::Metres(m) => {
                return Err(Failure::validation(format!(
                    "relay location {m} m is not inside the {span} m span"
                )))
            }
        };
        Ok(LocationPolicy::Fraction(fraction))
    }
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    const VALIDATION: u8 = 1;
    const IO: u8 = 2;
    const VERIFY: u8 = 3;

    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: Self::VALIDATION,
            message: message.into(),
        }
    }

    fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self {
            code: Self::IO,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        Self {
            code: if e.is_io() { Self::IO } else { Self::VALIDATION },
            message: e.to_string(),
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

/// Writes to stdout, tolerating a closed pipe.
fn print_out(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn links(config: &Path) -> Result<Vec<Link>, Failure> {
    let cfg = SweepConfig::load(config)?;
    Ok(cfg.links()?.into_iter().map(|(link, _)| link).collect())
}

fn plan(config: &Path) -> Result<(), Failure> {
    let solutions = links(config)?
        .iter()
        .map(optimal_location)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::validation(e.to_string()))?;
    match solutions.as_slice() {
        [one] => print_out(&to_json(one)),
        many => print_out(&to_json(&many)),
    }
    Ok(())
}

fn simulate(config: &Path, location: RelayLocation, trace_csv: Option<&Path>) -> Result<(), Failure> {
    let cfg = SweepConfig::load(config)?;
    let all = cfg.links()?;
    let [(link, _)] = all.as_slice() else {
        return Err(Failure::validation(format!(
            "simulate needs exactly one power / span / noise combination, the config has {}",
            all.len()
        )));
    };
    let (row, trace) = evaluate_row(link, location.policy(link.span)?, cfg.packet_count)?;
    if let Some(path) = trace_csv {
        let trace = trace.ok_or_else(|| {
            Failure::validation(format!(
                "packet_count {} is too large to keep a trace",
                cfg.packet_count
            ))
        })?;
        let file = std::fs::File::create(path).map_err(|e| Failure::io(path, e))?;
        trace.write_csv(file).map_err(|e| Failure::io(path, e))?;
    }
    print_out(&to_json(&row));
    Ok(())
}

fn sweep(config: &Path, out: Option<PathBuf>, svg: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = SweepConfig::load(config)?;
    let out = out
        .or_else(|| cfg.output.csv.clone())
        .ok_or_else(|| Failure::validation("no CSV destination: pass --out or set output.csv"))?;
    let rows = run_sweep(&cfg)?;
    output::emit_csv(&rows, &out)?;
    if let Some(svg) = svg.or_else(|| cfg.output.svg.clone()) {
        output::emit_svg(&rows, &svg)?;
    }
    eprintln!("{} rows written to {}", rows.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Plan { config } => plan(&config),
        Command::Simulate {
            config,
            relay_location,
            trace_csv,
        } => simulate(&config, relay_location, trace_csv.as_deref()),
        Command::Sweep { config, out, svg } => sweep(&config, out, svg),
        Command::Verify { json } => {
            let report = verify();
            if json {
                print_out(&to_json(&report));
            } else {
                print_out(report.to_string().trim_end());
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure {
                    code: Failure::VERIFY,
                    message: format!("{} check(s) failed", report.failures().count()),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    // Usage errors are validation failures; clap's own exit code 2 is taken by I/O.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(Failure::VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relay_location_parsing() {
        assert_eq!("optimal".parse(), Ok(RelayLocation::Optimal));
        assert_eq!("0.25".parse(), Ok(RelayLocation::Fraction(0.25)));
        assert_eq!("250".parse(), Ok(RelayLocation::Metres(250.0)));
        assert_eq!("0.5m".parse(), Ok(RelayLocation::Metres(0.5)));
        assert!("-3".parse::<RelayLocation>().is_err());
        assert!("far".parse::<RelayLocation>().is_err());
    }

    #[test]
    fn metres_outside_span_rejected() {
        assert!(RelayLocation::Metres(600.0).policy(500.0).is_err());
        assert!(RelayLocation::Metres(100.0).policy(500.0).is_ok());
    }
}
