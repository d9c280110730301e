//! Command-line harness: instance generation, single QAOA runs, experiment
//! batches, report emission, and the per-instance diagnostic suite.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qaoa_tsp::bench::{self, ExperimentConfig, ANGLE_SEED_SALT};
use qaoa_tsp::encoding::{gate_count_report, EncodingKind};
use qaoa_tsp::instance::TspInstance;
use qaoa_tsp::qaoa::{self, CostForm, OptimizerKind, QaoaConfig};

#[derive(Parser)]
#[command(
    name = "qaoa-tsp",
    about = "QAOA for the TSP: edge-selection vs 1-hot tour encodings on an exact simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random instance files (JSON weight matrices)
    Generate(GenerateArgs),
    /// Run QAOA on one instance with one encoding
    Solve(SolveArgs),
    /// Run a batch over random instances and write a records CSV
    Experiment(ExperimentArgs),
    /// Summarize a records CSV into statistics and histogram files
    Report(ReportArgs),
    /// Run the diagnostic suite on one instance
    Verify(VerifyArgs),
}

/// `lo..hi` inclusive integer weight range.
#[derive(Clone, Copy, Debug)]
struct WeightRange {
    lo: u32,
    hi: u32,
}

impl FromStr for WeightRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (lo, hi) = s
            .split_once("..")
            .ok_or_else(|| format!("expected lo..hi, got '{s}'"))?;
        Ok(WeightRange {
            lo: lo.trim().parse().map_err(|e| format!("bad lo: {e}"))?,
            hi: hi.trim().parse().map_err(|e| format!("bad hi: {e}"))?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EncodingArg {
    Edge,
    Onehot,
    Both,
}

impl EncodingArg {
    fn kinds(self) -> Vec<EncodingKind> {
        match self {
            EncodingArg::Edge => vec![EncodingKind::Edge],
            EncodingArg::Onehot => vec![EncodingKind::OneHot],
            EncodingArg::Both => vec![EncodingKind::Edge, EncodingKind::OneHot],
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OptimizerArg {
    Cobyla,
    NelderMead,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(o: OptimizerArg) -> Self {
        match o {
            OptimizerArg::Cobyla => OptimizerKind::Cobyla,
            OptimizerArg::NelderMead => OptimizerKind::NelderMead,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CostFormArg {
    Plain,
    Eq1,
}

impl From<CostFormArg> for CostForm {
    fn from(c: CostFormArg) -> Self {
        match c {
            CostFormArg::Plain => CostForm::Plain,
            CostFormArg::Eq1 => CostForm::Eq1,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Vertex count
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Number of instances
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Master seed; per-instance seeds are drawn from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Integer weight range lo..hi (inclusive)
    #[arg(long, value_name = "LO..HI", default_value = "1..20")]
    weight_range: WeightRange,
    /// Output file (count = 1) or directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file; omit to generate one from --n/--seed
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Instance seed; the angle seed is derived from it
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "LO..HI", default_value = "1..20")]
    weight_range: WeightRange,
    /// Tour encoding (a single one; `both` is for `experiment`)
    #[arg(long, value_enum, default_value_t = EncodingArg::Edge)]
    encoding: EncodingArg,
    /// QAOA layer count
    #[arg(long, default_value_t = qaoa::DEFAULT_LAYERS)]
    p: usize,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Cobyla)]
    optimizer: OptimizerArg,
    #[arg(long, default_value_t = qaoa::DEFAULT_MAX_EVALS)]
    max_evals: usize,
    #[arg(long, value_enum, default_value_t = CostFormArg::Plain)]
    cost_form: CostFormArg,
    /// Print the result as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML config file; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    encoding: Option<EncodingArg>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
    #[arg(long)]
    max_evals: Option<usize>,
    #[arg(long, value_name = "LO..HI")]
    weight_range: Option<WeightRange>,
    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    cost_form: Option<CostFormArg>,
    /// Record wall-clock time per run (makes the CSV non-reproducible)
    #[arg(long)]
    timing: bool,
    /// Records CSV path
    #[arg(long, default_value = "records.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Records CSV produced by `experiment`
    #[arg(long)]
    records: PathBuf,
    /// Directory for summary.json and histograms.csv
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance file; omit to generate one from --n/--seed
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_name = "LO..HI", default_value = "1..20")]
    weight_range: WeightRange,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => generate(args),
        Command::Solve(args) => solve(args),
        Command::Experiment(args) => experiment(args),
        Command::Report(args) => report(args),
        Command::Verify(args) => verify(args),
    }
}

fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    use rand::{Rng, SeedableRng};
    if args.count == 0 {
        bail!("--count must be at least 1");
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    let seeds: Vec<u64> = (0..args.count).map(|_| rng.gen()).collect();
    if args.count == 1 && args.out.extension().is_some() {
        let inst = TspInstance::generate_random(
            args.n,
            seeds[0],
            args.weight_range.lo,
            args.weight_range.hi,
        )?;
        inst.write_to(&args.out)?;
        println!("wrote {}", args.out.display());
        return Ok(());
    }
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    for (id, &seed) in seeds.iter().enumerate() {
        let inst =
            TspInstance::generate_random(args.n, seed, args.weight_range.lo, args.weight_range.hi)?;
        let path = args.out.join(format!("instance_{id:04}.json"));
        inst.write_to(&path)?;
    }
    println!("wrote {} instances to {}", args.count, args.out.display());
    Ok(())
}

fn load_or_generate(
    instance: &Option<PathBuf>,
    n: usize,
    seed: u64,
    range: WeightRange,
) -> anyhow::Result<TspInstance> {
    match instance {
        Some(path) => {
            TspInstance::read_from(path).with_context(|| format!("reading {}", path.display()))
        }
        None => Ok(TspInstance::generate_random(n, seed, range.lo, range.hi)?),
    }
}

fn solve(args: SolveArgs) -> anyhow::Result<()> {
    if args.encoding == EncodingArg::Both {
        bail!("`solve` runs a single encoding; pass --encoding edge or --encoding onehot");
    }
    let inst = load_or_generate(&args.instance, args.n, args.seed, args.weight_range)?;
    let config = QaoaConfig {
        layers: args.p,
        encoding: args.encoding.kinds()[0],
        optimizer: args.optimizer.into(),
        max_evals: args.max_evals,
        initial_angles: None,
        seed: args.seed ^ ANGLE_SEED_SALT,
        cost_form: args.cost_form.into(),
    };
    let result = qaoa::optimize(&inst, &config)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&result)?);
        return Ok(());
    }
    let order = result
        .found_tour
        .order
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" -> ");
    println!("encoding:        {}", config.encoding);
    println!("found tour:      {order} -> 0");
    println!("found cost:      {}", result.found_cost);
    println!("relative error:  {:.6}", result.relative_error);
    println!("expectation:     {:.6} (normalized)", result.expectation);
    println!("optimizer evals: {}", result.eval_count);
    Ok(())
}

fn experiment(args: ExperimentArgs) -> anyhow::Result<()> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_toml_file(path)
            .with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(count) = args.count {
        config.count = count;
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(encoding) = args.encoding {
        config.encodings = encoding.kinds();
    }
    if let Some(p) = args.p {
        config.layers = p;
    }
    if let Some(optimizer) = args.optimizer {
        config.optimizer = optimizer.into();
    }
    if let Some(max_evals) = args.max_evals {
        config.max_evals = max_evals;
    }
    if let Some(range) = args.weight_range {
        config.weight_lo = range.lo;
        config.weight_hi = range.hi;
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    if let Some(cost_form) = args.cost_form {
        config.cost_form = cost_form.into();
    }
    if args.timing {
        config.record_wall_time = true;
    }

    let records = bench::run_experiment(&config)?;
    bench::write_records(&args.out, &records)?;
    println!(
        "wrote {} records ({} instances x {} encodings) to {}",
        records.len(),
        config.count,
        config.encodings.len(),
        args.out.display()
    );
    Ok(())
}

fn report(args: ReportArgs) -> anyhow::Result<()> {
    let records = bench::read_records(&args.records)?;
    let summary = bench::summarize(&records)?;
    std::fs::create_dir_all(&args.out)?;
    let json = args.out.join("summary.json");
    let hist = args.out.join("histograms.csv");
    bench::write_summary_json(&json, &summary)?;
    bench::write_histograms_csv(&hist, &summary)?;

    for s in &summary.per_encoding {
        println!("{}:", s.encoding);
        println!("  runs:                {} ({} failed)", s.runs, s.failures);
        println!(
            "  relative error:      mean {:.4}, median {:.4}, zero fraction {:.3}",
            s.mean_relative_error, s.median_relative_error, s.fraction_zero_error
        );
        println!(
            "  optimizer evals:     mean {:.2}, median {:.1}",
            s.mean_eval_count, s.median_eval_count
        );
        if s.mean_wall_time_ms > 0.0 {
            println!("  wall time per run:   mean {:.2} ms", s.mean_wall_time_ms);
        }
    }
    println!("wrote {} and {}", json.display(), hist.display());
    Ok(())
}

fn verify(args: VerifyArgs) -> anyhow::Result<()> {
    let inst = load_or_generate(&args.instance, args.n, args.seed, args.weight_range)?;
    let counts = gate_count_report(inst.vertex_count())?;
    print!("{counts}");
    let report = bench::verify::verify_instance(&inst, args.seed ^ ANGLE_SEED_SALT)?;
    print!("{report}");
    if !report.all_passed() {
        std::process::exit(1);
    }
    Ok(())
}
