use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lcentral::moments::CENSUS_THRESHOLD;
use lcentral::offdiag::Sign;
use lcentral_cli::output::write_atomic;
use lcentral_cli::{exit, run, CliError, Command, Format, Output, RunConfig, LONG_VERSION};

#[derive(Parser)]
#[command(name = "lcentral", version, long_version = LONG_VERSION, about = "Central L-value toolkit: batch runs with JSON/CSV output")]
struct Cli {
    /// Cap on worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Artifact path; written via a temporary file and rename. Default: stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Run a saved RunConfig (JSON) instead of a subcommand.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the RunConfig for this invocation and exit.
    #[arg(long, global = true)]
    print_config: bool,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Plus,
    Minus,
    Both,
}

impl From<SignArg> for Sign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Plus => Sign::Plus,
            SignArg::Minus => Sign::Minus,
            SignArg::Both => Sign::Both,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Count even primitive characters with central values above a threshold.
    Census {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        d: u64,
        #[arg(long, default_value_t = CENSUS_THRESHOLD)]
        threshold: f64,
    },
    /// First and second mollified moments.
    Moments {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        d: u64,
        #[arg(long = "X")]
        x: u64,
        #[arg(long, default_value_t = CENSUS_THRESHOLD)]
        threshold: f64,
        #[arg(long)]
        max_delta: Option<f64>,
    },
    /// Approximate functional equation against the Hurwitz oracle.
    AfeCheck {
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        d: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Orthogonality, root number, diagonal Euler and H kernel identities.
    IdentitySuite {
        #[arg(long, default_value_t = 29)]
        max_q: u64,
        #[arg(long = "max-D", default_value_t = 100)]
        max_d: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Shifted convolution sum against its main term at each scale M = N.
    ShiftedConv {
        #[arg(long, default_value_t = 1)]
        a: u64,
        #[arg(long, default_value_t = 1)]
        b: u64,
        #[arg(long)]
        q: u64,
        #[arg(long = "D")]
        d: u64,
        #[arg(long, value_enum, default_value_t = SignArg::Both)]
        sign: SignArg,
        #[arg(long, value_delimiter = ',', default_value = "2500,5000,10000")]
        scales: Vec<f64>,
        #[arg(long)]
        max_deviation: Option<f64>,
    },
    /// Both sides of the twisted Voronoi formula for a bump test function.
    VoronoiCheck {
        #[arg(long = "D")]
        d: u64,
        #[arg(long)]
        c: u64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        bump_lo: f64,
        #[arg(long)]
        bump_hi: f64,
        #[arg(long, default_value_t = 100_000)]
        m_max: u64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Census { q, d, threshold } => Command::Census { q, d, threshold },
            Cmd::Moments {
                q,
                d,
                x,
                threshold,
                max_delta,
            } => Command::Moments {
                q,
                d,
                x,
                threshold,
                max_delta,
            },
            Cmd::AfeCheck { q, d, tol } => Command::AfeCheck { q, d, tol },
            Cmd::IdentitySuite { max_q, max_d, tol } => Command::IdentitySuite { max_q, max_d, tol },
            Cmd::ShiftedConv {
                a,
                b,
                q,
                d,
                sign,
                scales,
                max_deviation,
            } => Command::ShiftedConv {
                a,
                b,
                q,
                d,
                sign: sign.into(),
                scales,
                max_deviation,
            },
            Cmd::VoronoiCheck {
                d,
                c,
                a,
                bump_lo,
                bump_hi,
                m_max,
                tol,
            } => Command::VoronoiCheck {
                d,
                c,
                a,
                bump_lo,
                bump_hi,
                m_max,
                tol,
            },
        }
    }
}

fn build_config(cli: Cli) -> Result<(RunConfig, bool), CliError> {
    let print = cli.print_config;
    let mut cfg = match (cli.config, cli.cmd) {
        (Some(_), Some(_)) => return Err(CliError::usage("--config", "cannot be combined with a subcommand")),
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            RunConfig::from_json(&text)?
        }
        (None, Some(cmd)) => RunConfig {
            command: cmd.into(),
            output: Output {
                path: None,
                format: cli.format,
            },
            threads: None,
        },
        (None, None) => return Err(CliError::usage("<COMMAND>", "a subcommand or --config is required")),
    };
    // Flags given on the command line override the saved config.
    if cli.out.is_some() {
        cfg.output.path = cli.out;
    }
    if cli.format != Format::Json {
        cfg.output.format = cli.format;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    Ok((cfg, print))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = build_config(cli).and_then(|(cfg, print)| {
        if print {
            cfg.validate()?;
            println!("{}", cfg.to_json());
            return Ok(true);
        }
        let art = run(&cfg)?;
        match &cfg.output.path {
            Some(path) => {
                write_atomic(path, art.body.as_bytes())?;
                println!("{} -> {}", art.summary, path.display());
            }
            None => {
                print!("{}", art.body);
                eprintln!("{}", art.summary);
            }
        }
        Ok(art.pass)
    });
    match result {
        Ok(true) => ExitCode::from(exit::SUCCESS),
        Ok(false) => {
            eprintln!("tolerance check failed");
            ExitCode::from(exit::TOLERANCE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
