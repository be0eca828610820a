use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use tilewalk::commands::{run_command, CliError, Context, COMMANDS};
use tilewalk::scenario::{load_scenario, Scenario};
use tilewalk_core::parse_rational;

/// Random walks on tile graphs of expanding circle maps.
#[derive(Parser, Debug)]
#[command(name = "tilewalk", version)]
struct Args {
    /// One of: build, validate, green, martin, classify, simulate, dimension,
    /// hyperbolicity, checks, demo-doubling.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(COMMANDS))]
    command: String,

    /// Scenario document (TOML with dotted keys).
    #[arg(long)]
    scenario: Option<PathBuf>,

    /// Directory for the CSV artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    workers: Option<usize>,

    /// Overrides `run.seed` from the scenario.
    #[arg(long)]
    seed: Option<u64>,

    /// Parameter of the doubling demo, as "p/q".
    #[arg(long)]
    x: Option<String>,
}

fn run(args: Args) -> Result<String, CliError> {
    let x = args
        .x
        .as_deref()
        .map(|text| parse_rational(text).map_err(|e| CliError::Usage(format!("--x: {e}"))))
        .transpose()?;
    if x.is_some() && args.command != "demo-doubling" {
        return Err(CliError::Usage("--x only applies to demo-doubling".into()));
    }
    let mut scenario = match (&args.scenario, &x) {
        (Some(path), _) => load_scenario(path)?,
        (None, Some(x)) if args.command == "demo-doubling" => Scenario::doubling(x),
        (None, None) if args.command == "demo-doubling" => {
            Scenario::doubling(&parse_rational("1/2").expect("literal"))
        }
        (None, _) => return Err(CliError::Usage(format!("{} needs --scenario <path>", args.command))),
    };
    if let Some(seed) = args.seed {
        scenario.run.seed = seed;
    }
    let mut ctx = Context::new(scenario, &args.out, args.workers);
    ctx.x = x;
    Ok(run_command(&args.command, &ctx)?.summary)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("tilewalk: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
