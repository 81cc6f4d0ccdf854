use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use ucap::io::{self, RunSummary};
use ucap::{Algorithm, AlgorithmConfig, Fixed, GeneratorSpec, RngSeed};

/// Faculty-to-course allocation solver.
#[derive(Parser)]
#[command(name = "ucap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance with one algorithm.
    Solve(SolveArgs),
    /// Run several algorithms from one shared initial solution.
    Compare(CompareArgs),
    /// Generate a synthetic instance.
    Generate(GenerateArgs),
    /// Evaluate a solution file; exits 0 only when it is feasible.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct OutputArg {
    /// Directory for solution, trace and summary files.
    #[arg(long, short, env = "UCAP_OUTPUT_DIR", default_value = "ucap-out")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct TuningArgs {
    /// TOML file with `[solver]` and `[baseline]` tables; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random seed for the initial solution and the search.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lra_iters: Option<u64>,
    #[arg(long)]
    switching_tolerance: Option<u64>,
    #[arg(long)]
    mga_generations: Option<u64>,
    #[arg(long)]
    mini_batch_size: Option<usize>,
    #[arg(long)]
    mutation_tolerance: Option<u64>,
    #[arg(long)]
    population_size: Option<usize>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    local_search_steps: Option<usize>,
    #[arg(long)]
    initial_temperature: Option<f64>,
    #[arg(long)]
    cooling_rate: Option<f64>,
    #[arg(long)]
    tabu_tenure: Option<u64>,
    /// Iteration or generation cap for the baselines.
    #[arg(long)]
    max_iterations: Option<u64>,
}

impl TuningArgs {
    fn resolve(&self) -> Result<AlgorithmConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => AlgorithmConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg = cfg.with_seed(RngSeed(seed));
        }
        let s = &mut cfg.solver;
        set(&mut s.lra_total_iteration, self.lra_iters);
        set(&mut s.switching_tolerance, self.switching_tolerance);
        set(&mut s.mga_max_generation, self.mga_generations);
        set(&mut s.mini_batch_size, self.mini_batch_size);
        set(&mut s.mutation_tolerance, self.mutation_tolerance);
        let b = &mut cfg.baseline;
        set(&mut b.population_size, self.population_size);
        set(&mut b.crossover_rate, self.crossover_rate);
        set(&mut b.mutation_rate, self.mutation_rate);
        set(&mut b.local_search_steps, self.local_search_steps);
        set(&mut b.initial_temperature, self.initial_temperature);
        set(&mut b.cooling_rate, self.cooling_rate);
        set(&mut b.tabu_tenure, self.tabu_tenure);
        set(&mut b.max_iterations, self.max_iterations);
        cfg.solver.validate()?;
        cfg.baseline.validate()?;
        Ok(cfg)
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (TOML).
    instance: PathBuf,
    #[arg(long, default_value = "hybrid", value_parser = parse_algorithm)]
    algo: Algorithm,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    wall_clock_secs: Option<f64>,
    #[command(flatten)]
    tuning: TuningArgs,
    #[command(flatten)]
    output: OutputArg,
}

#[derive(Args)]
struct CompareArgs {
    /// Instance file (TOML).
    instance: PathBuf,
    /// Comma-separated algorithm names.
    #[arg(
        long,
        value_delimiter = ',',
        value_parser = parse_algorithm,
        default_value = "hybrid,ga,shc,sa,ts,memetic"
    )]
    algos: Vec<Algorithm>,
    /// Common wall-clock budget per algorithm, in seconds.
    #[arg(long)]
    budget_secs: Option<f64>,
    /// Ignore iteration caps so the wall clock alone ends each run.
    #[arg(long, requires = "budget_secs")]
    unbounded: bool,
    #[command(flatten)]
    tuning: TuningArgs,
    #[command(flatten)]
    output: OutputArg,
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator spec (TOML); defaults apply when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Start from the large preset instead of the small default.
    #[arg(long, conflicts_with = "spec")]
    paper_scale: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the instance file.
    #[arg(long, short)]
    output: PathBuf,
    #[arg(long)]
    n_faculty: Option<usize>,
    #[arg(long)]
    n_theory_sections: Option<usize>,
    #[arg(long)]
    n_lab_sections: Option<usize>,
    #[arg(long)]
    sections_per_course: Option<usize>,
    #[arg(long)]
    preference_density: Option<f64>,
    #[arg(long)]
    min_credits: Option<f64>,
    #[arg(long)]
    max_credits: Option<f64>,
    #[arg(long)]
    senior_fraction: Option<f64>,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    solution: PathBuf,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: ucap::Error| e.to_string())
}

fn budget(secs: Option<f64>) -> Result<Option<Duration>> {
    secs.map(|s| {
        Duration::try_from_secs_f64(s).context("budget must be a non-negative number of seconds")
    })
    .transpose()
}

fn solve(args: SolveArgs) -> Result<()> {
    let instance = io::load_instance(&args.instance)?;
    let mut cfg = args.tuning.resolve()?;
    if let Some(b) = budget(args.wall_clock_secs)? {
        cfg = cfg.with_wall_clock(Some(b));
    }
    let seed = cfg.solver.seed;
    let start = ucap::initial_solution(&instance, seed)?;
    let t0 = Instant::now();
    let result = ucap::solve(&instance, &start, args.algo, &cfg)?;
    let wall = t0.elapsed();

    let dir = &args.output.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    io::write_solution(dir.join("solution.txt"), &instance, &result.best_solution)?;
    io::write_trace(dir.join("trace.csv"), &result.trace)?;
    io::write_summary(
        dir.join("summary.json"),
        &RunSummary::new(args.algo, seed, &result, wall),
    )?;
    println!(
        "{}: score {:.4} ({:.2}%), hcv {}, {} iterations, stopped by {:?} after {:.2}s",
        args.algo.display_name(),
        result.best_report.score.as_f64(),
        result.best_report.score.percent(),
        result.best_report.hcv.total(),
        result.iterations,
        result.terminated_by,
        wall.as_secs_f64()
    );
    Ok(())
}

fn compare(args: CompareArgs) -> Result<()> {
    let instance = io::load_instance(&args.instance)?;
    let mut cfg = args.tuning.resolve()?;
    if args.unbounded {
        cfg = cfg.unbounded_iterations();
    }
    let seed = cfg.solver.seed;
    let cmp = ucap::compare(
        &instance,
        &args.algos,
        seed,
        budget(args.budget_secs)?,
        &cfg,
    )?;

    let dir = &args.output.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    io::write_solution(dir.join("start.txt"), &instance, &cmp.start)?;
    for row in &cmp.rows {
        let name = row.algorithm.name();
        io::write_trace(dir.join(format!("{name}-trace.csv")), &row.result.trace)?;
        io::write_solution(
            dir.join(format!("{name}-solution.txt")),
            &instance,
            &row.result.best_solution,
        )?;
        let summary = RunSummary::new(row.algorithm, seed, &row.result, row.total_time);
        io::write_summary(dir.join(format!("{name}-summary.json")), &summary)?;
    }
    io::write_comparison(dir.join("comparison.csv"), &cmp)?;
    print!("{}", io::format_comparison(&cmp));
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let mut spec = match (&args.spec, args.paper_scale) {
        (Some(path), _) => io::load_generator_spec(path)?,
        (None, true) => GeneratorSpec::paper_scale(),
        (None, false) => GeneratorSpec::default(),
    };
    set(&mut spec.n_faculty, args.n_faculty);
    set(&mut spec.n_theory_sections, args.n_theory_sections);
    set(&mut spec.n_lab_sections, args.n_lab_sections);
    set(&mut spec.sections_per_course, args.sections_per_course);
    set(&mut spec.preference_density, args.preference_density);
    set(&mut spec.senior_fraction, args.senior_fraction);
    if let Some(lo) = args.min_credits {
        spec.credit_limit_range.0 = credits(lo)?;
    }
    if let Some(hi) = args.max_credits {
        spec.credit_limit_range.1 = credits(hi)?;
    }
    let instance = ucap::generate_instance(&spec, RngSeed(args.seed))?;
    write_parent(&args.output)?;
    io::write_instance(&args.output, &instance)?;
    println!(
        "wrote {} sections and {} faculty to {}",
        instance.sections().len(),
        instance.n_faculty(),
        args.output.display()
    );
    Ok(())
}

fn credits(value: f64) -> Result<Fixed> {
    Fixed::from_f64(value)
        .with_context(|| format!("credit limit {value} needs at most four decimals"))
}

fn write_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<bool> {
    let instance = io::load_instance(&args.instance)?;
    let solution = io::load_solution(&instance, &args.solution)?;
    let report = ucap::evaluate(&instance, &solution)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    let h = &report.hcv;
    if !report.is_feasible() {
        let named = [
            ("hc_theory_unstaffed", h.hc_theory_unstaffed),
            ("hc_lab_understaffed", h.hc_lab_understaffed),
            ("hc_slot_clash", h.hc_slot_clash),
            ("hc_credit_exceeded", h.hc_credit_exceeded),
            ("hc_off_preference", h.hc_off_preference),
        ];
        for (name, count) in named.into_iter().filter(|(_, c)| *c > 0) {
            eprintln!("violated: {name} = {count}");
        }
    }
    Ok(report.is_feasible())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => solve(a).map(|_| true),
        Command::Compare(a) => compare(a).map(|_| true),
        Command::Generate(a) => generate(a).map(|_| true),
        Command::Validate(a) => validate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
