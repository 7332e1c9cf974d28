use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bidisk_cli::{analyze, emit, AnalyzeOptions, ReportFormat};

/// Decide whether a rigid hypersurface u = F(z, z̄) of Levi signature (2,2)
/// obstructs holomorphic bi-disks through the origin.
#[derive(Parser)]
#[command(name = "bidisk", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a defining function from a file or an inline expression.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Path to a file containing the defining-function expression.
    path: Option<PathBuf>,

    /// Inline defining-function expression.
    #[arg(short = 'e', long = "expr", conflicts_with = "path")]
    expr: Option<String>,

    /// Truncation order of the series kernel.
    #[arg(long, default_value_t = bidisk_core::DEFAULT_ORDER)]
    order: u32,

    /// Grid resolution per angle for the U(2) search.
    #[arg(long, default_value_t = 12)]
    grid: usize,

    /// Nelder-Mead refinement iterations.
    #[arg(long, default_value_t = 200)]
    iters: usize,

    /// Emit the report as a single JSON object.
    #[arg(long)]
    json: bool,

    /// Additionally verify the structure identities (dθ residual, τ/Σ
    /// skewness, torsion reconstruction, dτ structure) and report them.
    #[arg(long)]
    check_structure: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze(args) => run_analyze(args),
    }
}

fn run_analyze(args: AnalyzeArgs) -> ExitCode {
    let json = args.json;
    let input = match (&args.path, &args.expr) {
        (Some(p), None) => match std::fs::read_to_string(p) {
            Ok(text) => text.trim().to_string(),
            Err(e) => {
                report_failure(json, "io_error", &format!("{}: {e}", p.display()));
                return ExitCode::from(2);
            }
        },
        (None, Some(e)) => e.clone(),
        _ => {
            report_failure(json, "usage", "provide a path or -e \"<expr>\", not both");
            return ExitCode::from(2);
        }
    };

    let opts = AnalyzeOptions {
        order: args.order,
        grid: args.grid,
        iters: args.iters,
        check_structure: args.check_structure,
    };
    match analyze(&input, &opts) {
        Ok((report, measured)) => {
            let format = if json {
                ReportFormat::Json
            } else {
                ReportFormat::Text
            };
            let bytes = emit(&report, format);
            std::io::stdout().write_all(&bytes).expect("stdout");
            eprintln!(
                "timings: parse {}ms, pipeline {}ms, search {}ms, total {}ms",
                measured.parse_ms, measured.pipeline_ms, measured.search_ms, measured.total_ms
            );
            match report.verdict {
                bidisk_cli::report::Verdict::WrongSignature
                | bidisk_cli::report::Verdict::LeviDegenerate => ExitCode::from(4),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(err) => {
            if json {
                println!("{}", err.to_json());
            } else {
                eprintln!("error[{}]: {}", err.code(), err.message());
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn report_failure(json: bool, code: &str, message: &str) {
    if json {
        println!(
            "{}",
            serde_json::json!({ "error": { "code": code, "message": message } })
        );
    } else {
        eprintln!("error[{code}]: {message}");
    }
}
