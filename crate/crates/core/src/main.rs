use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use shiftlab::cli::{self, Options, SpecFile, EXIT_USAGE};
use shiftlab::subshift::Caps;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    CheckInjective,
    InverseWindow,
    SynthesizeInverse,
    ImageSft,
    RecoverSft,
    SoficImage,
    SoficPreimage,
    ReduceDirectSum,
    Restrict,
    EmitGraph,
    /// Every `command` line of the spec file.
    Run,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value().unwrap().get_name().to_string()
    }
}

/// Injectivity, left inverses and image presentations for cellular automata on subshifts.
#[derive(Debug, Parser)]
#[command(name = "shiftlab", version)]
struct Args {
    command: Command,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    ca: Option<String>,
    #[arg(long)]
    subshift: Option<String>,
    /// Window for `restrict`, e.g. `0..2` or `{0,2}`.
    #[arg(long)]
    window: Option<String>,
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = 64)]
    nmax: usize,
    /// Machine-readable JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    emit_graph: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    ExitCode::from(real_main(args) as u8)
}

fn real_main(args: Args) -> i32 {
    let caps = Caps::from_env();
    let text = match std::fs::read_to_string(&args.spec) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.spec.display());
            return EXIT_USAGE;
        }
    };
    let spec = match SpecFile::parse(&text, &caps) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", args.spec.display());
            return cli::error_exit_code(&e);
        }
    };
    let opts = Options { ca: args.ca, subshift: args.subshift, window: args.window, depth: args.depth, n_max: args.nmax };
    let run = cli::run(&spec, &args.command.name(), &opts, &caps);
    let mut dot = None;
    for (name, outcome) in &run.outcomes {
        match outcome {
            Ok(o) => {
                println!("{name}: {} ({})", o.summary, o.status.name());
                if dot.is_none() {
                    dot = o.dot.clone();
                }
            }
            Err(e) => println!("{name}: error: {e}"),
        }
    }
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&run.report()).expect("report serializes");
        if let Err(e) = std::fs::write(path, text + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    if let Some(path) = &args.emit_graph {
        match dot {
            Some(d) => {
                if let Err(e) = std::fs::write(path, d) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return EXIT_USAGE;
                }
            }
            None => eprintln!("warning: command produced no graph"),
        }
    } else if matches!(args.command, Command::EmitGraph) {
        if let Some(d) = dot {
            print!("{d}");
        }
    }
    run.exit_code
}
