use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, ValueEnum};
use plateau_core::ground::{GroundOptions, GroundTask, DEFAULT_MAX_ACTIONS};
use plateau_core::heuristic::bootstrap;
use plateau_core::plan::{format_plan, parse_plan, validate_plan, Verdict};
use plateau_core::search::{solve, write_trace, Budget, Fallback, PlateauMode, SearchConfig, Status};

/// Forward-chaining PDDL planner.
#[derive(Debug, Parser)]
#[command(name = "plateau", version)]
struct Args {
    /// Domain file.
    #[arg(long)]
    domain: PathBuf,
    /// Problem file.
    #[arg(long)]
    problem: PathBuf,
    /// Write the plan here instead of standard output.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
    /// Write a heuristic trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Disable macro-action learning and use.
    #[arg(long)]
    no_macros: bool,
    #[arg(long, value_enum, default_value_t = PlateauArg::LeastBad)]
    plateau: PlateauArg,
    /// Search run when hill-climbing fails.
    #[arg(long, value_enum, default_value_t = FallbackArg::Greedy)]
    fallback: FallbackArg,
    #[arg(long, default_value_t = 1800.0)]
    max_seconds: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ACTIONS)]
    max_ground_actions: usize,
    #[arg(long, default_value_t = 1024)]
    max_memory_mb: u64,
    /// Print learned macros on standard error.
    #[arg(long)]
    dump_macros: bool,
    /// Check this plan instead of planning.
    #[arg(long, value_name = "PLAN")]
    validate: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlateauArg {
    LeastBad,
    Breadth,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FallbackArg {
    Greedy,
    PlainBfs,
}

const OK: u8 = 0;
const NO_PLAN: u8 = 1;
const ERROR: u8 = 2;

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(ERROR)
        }
    }
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load(args: &Args) -> Result<GroundTask, String> {
    let domain_src = read(&args.domain)?;
    let problem_src = read(&args.problem)?;
    let domain = plateau_core::pddl::parse_domain(&domain_src).map_err(|e| format!("{}: {e}", args.domain.display()))?;
    let problem =
        plateau_core::pddl::parse_problem(&problem_src, &domain).map_err(|e| format!("{}: {e}", args.problem.display()))?;
    let opts = GroundOptions {
        max_actions: args.max_ground_actions,
    };
    plateau_core::ground::ground_task(&domain, &problem, opts).map_err(|e| e.to_string())
}

fn run(args: &Args) -> Result<u8, String> {
    if !(args.max_seconds.is_finite() && args.max_seconds >= 0.0) {
        return Err(format!("invalid --max-seconds {}", args.max_seconds));
    }
    let mut task = load(args)?;
    if let Some(path) = &args.validate {
        return validate(&task, path);
    }

    if bootstrap(&mut task).is_err() {
        eprintln!("goal unreachable");
        return Ok(NO_PLAN);
    }
    let cfg = SearchConfig {
        use_macros: !args.no_macros,
        plateau: match args.plateau {
            PlateauArg::LeastBad => PlateauMode::LeastBad,
            PlateauArg::Breadth => PlateauMode::Breadth,
        },
        fallback: match args.fallback {
            FallbackArg::Greedy => Fallback::Greedy,
            FallbackArg::PlainBfs => Fallback::PlainBfs,
        },
        budget: Budget {
            max_time: Some(Duration::from_secs_f64(args.max_seconds)),
            max_memory_mb: Some(args.max_memory_mb),
        },
        ..SearchConfig::default()
    };
    let result = solve(&task, cfg);

    if let Some(path) = &args.trace {
        let file = fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
        write_trace(&result.trace, io::BufWriter::new(file)).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if args.dump_macros {
        for m in result.library.macros() {
            eprintln!("macro {}", m.describe(&task));
        }
    }
    let s = &result.stats;
    eprintln!(
        "evaluated {} expanded {} plateaux {} macros {} macro-uses {}",
        s.evaluated,
        s.expanded,
        s.episodes.len(),
        result.library.len(),
        s.macro_uses
    );
    if s.macro_cap_hits > 0 {
        eprintln!("warning: macro candidate cap reached {} times", s.macro_cap_hits);
    }
    if s.ehc_failed {
        eprintln!("hill-climbing failed; used fallback search");
    }

    match &result.status {
        Status::Solved(plan) => {
            let text = format_plan(&task, &plan.steps);
            match &args.output {
                Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))?,
                None => io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string())?,
            }
            eprintln!("plan found: {} steps", plan.len());
            Ok(OK)
        }
        Status::NoPlan | Status::Unreachable => {
            eprintln!("no plan");
            Ok(NO_PLAN)
        }
        Status::BudgetExceeded(e) => Err(e.to_string()),
    }
}

fn validate(task: &GroundTask, path: &Path) -> Result<u8, String> {
    let text = read(path)?;
    let steps = parse_plan(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    match validate_plan(task, &steps).map_err(|e| format!("{}: {e}", path.display()))? {
        Verdict::Valid => {
            println!("plan valid: {} steps", steps.len());
            Ok(OK)
        }
        Verdict::StepFailed { step, action } => {
            println!("plan invalid: step {step} {action} is not applicable");
            Ok(NO_PLAN)
        }
        Verdict::GoalNotReached => {
            println!("plan invalid: goal not satisfied after {} steps", steps.len());
            Ok(NO_PLAN)
        }
    }
}
