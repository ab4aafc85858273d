use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use distinf_core::{
    dcov_distributed, dependence_measure, distributed_jackknife_variance_with, distributed_u_stat_with,
    gini_kernel, max_k_same_leading_mse, partition_random, partition_random_n, predicted_cost, product_kernel,
    select_k, test_block_var, test_var, CostModel, Evaluation, Kernel, PdbMode, SeedSpec, TimeBudget,
    DEFAULT_EPSILON,
};
use distinf_harness::engine::{run_engine, EngineSettings, Method};
use distinf_harness::error::{HarnessError, Result};
use distinf_harness::ingest::{ingest_pair, ingest_table};
use distinf_harness::report::{fmt_f64, write_csv, write_json, BenchRecord, CsvRecord};
use distinf_harness::scenario::{DcovFamily, Univariate};
use distinf_harness::sim::{
    simulate_coverage, simulate_dcov, simulate_mse_ratio, simulate_time_evolution, CoverageConfig, DcovConfig,
    MseConfig, TimeConfig, WidthOracle,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "distinf", version, about = "Split-and-conquer inference for U-statistics")]
struct Cli {
    /// Worker threads (default: all cores, or one for budgeted commands).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Enumerate kernel tuples instead of using closed forms.
    #[arg(long, global = true)]
    exhaustive: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assign rows of a CSV file to K random balanced blocks.
    Partition(PartitionArgs),
    /// Distributed U-statistic and jackknife variance.
    Estimate(EstimateArgs),
    /// Bootstrap confidence interval for the distributed U-statistic.
    Bootstrap(BootstrapArgs),
    /// Distributed distance-covariance independence tests.
    DcovTest(DcovArgs),
    /// Standardized dependence measure.
    Dm(DcovArgs),
    /// Choose the number of blocks under a cost budget.
    PlanK(PlanArgs),
    /// Run a simulation suite.
    #[command(subcommand)]
    Simulate(SimCommand),
    /// Completed bootstrap iterations under a time budget.
    Bench(BenchArgs),
}

impl Command {
    /// Whether the command compares wall-clock budgets, which run on one
    /// worker unless `--threads` says otherwise.
    fn timed(&self) -> bool {
        match self {
            Command::Bench(_) => true,
            Command::Bootstrap(a) => a.budget.is_some(),
            Command::Simulate(SimCommand::Time { .. }) => true,
            Command::Simulate(SimCommand::Coverage { boot, .. }) => boot.budget.is_some(),
            _ => false,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Headered CSV file.
    input: PathBuf,
    /// Columns forming each observation (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    columns: Vec<String>,
    /// Drop rows with missing or unparseable fields.
    #[arg(long)]
    drop_missing: bool,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Gini,
    Product,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long, value_enum, default_value = "gini")]
    kernel: KernelArg,
    /// Centering constant of the product kernel.
    #[arg(long, default_value_t = 0.0)]
    c: f64,
}

impl KernelArgs {
    fn build(&self) -> Box<dyn Kernel<f64>> {
        match self.kernel {
            KernelArg::Gini => Box::new(gini_kernel()),
            KernelArg::Product => Box::new(product_kernel(self.c)),
        }
    }
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, conflicts_with = "full")]
    k: Option<usize>,
    /// Use the whole sample as one block.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct BootstrapArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long)]
    method: Method,
    #[arg(long)]
    k: usize,
    /// Replicates (DB, PDB) or subsets (SDB); an upper limit under a budget.
    #[arg(long, default_value_t = 200)]
    b: usize,
    /// Inflated resamples per BLB subset.
    #[arg(long, default_value_t = 100)]
    blb_b: usize,
    /// Time budget in seconds.
    #[arg(long)]
    budget: Option<f64>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Degenerate rescaling for the pseudo-distributed bootstrap.
    #[arg(long)]
    degenerate: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Var,
    Block,
    Both,
}

#[derive(Args)]
struct DcovArgs {
    input: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    y: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    z: Vec<String>,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    drop_missing: bool,
    #[arg(long, default_value_t = 0.05)]
    level: f64,
    #[arg(long, value_enum, default_value = "both")]
    test: TestArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    n: u64,
    /// Time-complexity exponent of the full-sample statistic.
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    /// Cost constant.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Memory exponent.
    #[arg(long, default_value_t = 1.0)]
    mem: f64,
    /// Cost budget in the units of `c N^a`.
    #[arg(long)]
    budget: f64,
    /// Smallest acceptable K.
    #[arg(long, default_value_t = 1)]
    k0: u64,
    /// Order of the leading bias term, for the advisory ceiling.
    #[arg(long)]
    tau1: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    eps: f64,
}

#[derive(Args)]
struct SimCommon {
    /// TOML file with suite settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Long-format CSV output (stdout when absent).
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON report with configuration and records.
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BootSim {
    #[arg(long)]
    scenario: Option<Univariate>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    blb_b: Option<usize>,
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Subcommand)]
enum SimCommand {
    /// Coverage and width of bootstrap intervals.
    Coverage {
        #[command(flatten)]
        common: SimCommon,
        #[command(flatten)]
        boot: BootSim,
    },
    /// MSE of the distributed statistic and variance estimate versus K.
    Mse {
        #[command(flatten)]
        common: SimCommon,
        #[arg(long)]
        scenario: Option<Univariate>,
    },
    /// Relative width error of each engine over elapsed time.
    Time {
        #[command(flatten)]
        common: SimCommon,
        #[command(flatten)]
        boot: BootSim,
        /// Replications of the width oracle; 0 uses the normal approximation.
        #[arg(long)]
        oracle_reps: Option<usize>,
        #[arg(long)]
        ticks: Option<usize>,
    },
    /// Size and power of the independence tests.
    Dcov {
        #[command(flatten)]
        common: SimCommon,
        #[arg(long)]
        family: Option<DcovFamily>,
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<usize>>,
        #[arg(long)]
        rho: Option<f64>,
    },
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "gaussian")]
    scenario: Univariate,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, value_delimiter = ',', default_value = "100")]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "db,pdb,blb,sdb")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 2.0)]
    budget: f64,
    #[arg(long, default_value_t = 1_000_000)]
    b: usize,
    #[arg(long, default_value_t = 100)]
    blb_b: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.or_else(|| cli.command.timed().then_some(1));
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| HarnessError::Usage(e.to_string()))?;
    }
    let eval = if cli.exhaustive { Evaluation::Exhaustive } else { Evaluation::Auto };
    match cli.command {
        Command::Partition(a) => partition(a),
        Command::Estimate(a) => estimate(a, eval),
        Command::Bootstrap(a) => bootstrap(a, cli.exhaustive),
        Command::DcovTest(a) => dcov_test(a),
        Command::Dm(a) => dm(a),
        Command::PlanK(a) => plan_k(a),
        Command::Simulate(s) => simulate(s, cli.exhaustive),
        Command::Bench(a) => bench(a, cli.exhaustive),
    }
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn partition(a: PartitionArgs) -> Result<()> {
    let data = ingest_table(&a.input.input, &a.input.columns, a.input.drop_missing)?;
    let part = partition_random(&data.data, a.k, &SeedSpec::new(a.seed))?;
    let mut w = csv::Writer::from_writer(sink(&a.output)?);
    w.write_record(["row", "block"])?;
    for (i, b) in part.assignment().iter().enumerate() {
        w.write_record([i.to_string(), b.to_string()])?;
    }
    w.flush()?;
    eprintln!("rows={} dropped={} k={}", data.data.nrows(), data.dropped, part.k());
    Ok(())
}

fn estimate(a: EstimateArgs, eval: Evaluation) -> Result<()> {
    let data = ingest_table(&a.input.input, &a.input.columns, a.input.drop_missing)?;
    let k = if a.full { 1 } else { a.k.ok_or_else(|| HarnessError::Usage("pass --k or --full".into()))? };
    let kernel = a.kernel.build();
    let part = partition_random(&data.data, k, &SeedSpec::new(a.seed))?;
    let est = distributed_u_stat_with(&data.data, &part, kernel.as_ref(), eval)?;
    let var = if kernel.degree() == 2 && part.min_size() >= 3 {
        Some(distributed_jackknife_variance_with(&data.data, &part, kernel.as_ref(), eval)?.value)
    } else {
        None
    };
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(["kernel", "n", "k", "dropped", "estimate", "jackknife_variance"])?;
    w.write_record([
        kernel.name().to_string(),
        est.n().to_string(),
        k.to_string(),
        data.dropped.to_string(),
        fmt_f64(est.aggregate),
        var.map_or_else(|| "NA".into(), fmt_f64),
    ])?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BootstrapOutput {
    method: Method,
    n: usize,
    k: usize,
    dropped: usize,
    estimate: f64,
    level: f64,
    lower: f64,
    upper: f64,
    width: f64,
    scale_convention: &'static str,
    requested: usize,
    completed: usize,
    budgeted: bool,
}

fn bootstrap(a: BootstrapArgs, exhaustive: bool) -> Result<()> {
    let data = ingest_table(&a.input.input, &a.input.columns, a.input.drop_missing)?;
    let kernel = a.kernel.build();
    let settings = EngineSettings {
        b: a.b,
        blb_b: a.blb_b,
        pdb_mode: if a.degenerate { PdbMode::Degenerate } else { PdbMode::Nondegenerate },
        exhaustive,
        ..Default::default()
    };
    let seed = SeedSpec::new(a.seed);
    let part = partition_random(&data.data, a.k, &seed)?;
    let est = distributed_u_stat_with(&data.data, &part, kernel.as_ref(), settings.eval())?;
    let budget = a.budget.map(TimeBudget::new).transpose()?;
    let r = run_engine(a.method, &data.data, &part, &est, kernel.as_ref(), &settings, budget, &seed, a.level)?;
    print_json(&BootstrapOutput {
        method: r.method,
        n: r.n,
        k: r.k,
        dropped: data.dropped,
        estimate: r.point,
        level: a.level,
        lower: r.interval.lower,
        upper: r.interval.upper,
        width: r.interval.width(),
        scale_convention: r.scale_convention.label(),
        requested: r.requested,
        completed: r.completed,
        budgeted: r.budgeted,
    })
}

fn dcov_summary(a: &DcovArgs) -> Result<(distinf_core::DcovSummary, usize)> {
    let data = ingest_pair(&a.input, &a.y, &a.z, a.drop_missing)?;
    let part = partition_random_n(data.data.nrows(), a.k, &SeedSpec::new(a.seed))?;
    Ok((dcov_distributed(&data.data, &part)?, data.dropped))
}

fn dcov_test(a: DcovArgs) -> Result<()> {
    let (summary, dropped) = dcov_summary(&a)?;
    let mut reports = Vec::new();
    if matches!(a.test, TestArg::Var | TestArg::Both) {
        reports.push(test_var(&summary, a.level)?);
    }
    if matches!(a.test, TestArg::Block | TestArg::Both) {
        reports.push(test_block_var(&summary, a.level)?);
    }
    print_json(&serde_json::json!({
        "n": summary.n(),
        "k": summary.k(),
        "dropped": dropped,
        "dcov": summary.aggregate_yz,
        "tests": reports,
    }))
}

fn dm(a: DcovArgs) -> Result<()> {
    let (summary, dropped) = dcov_summary(&a)?;
    print_json(&serde_json::json!({
        "n": summary.n(),
        "k": summary.k(),
        "dropped": dropped,
        "dcov": summary.aggregate_yz,
        "dm": dependence_measure(&summary)?,
    }))
}

fn plan_k(a: PlanArgs) -> Result<()> {
    let model = CostModel::new(a.a, a.c, a.mem)?;
    let k = select_k(a.k0, &model, a.n, a.budget)?;
    let ceiling = a.tau1.map(|t| max_k_same_leading_mse(a.n, t, a.eps)).transpose()?;
    print_json(&serde_json::json!({
        "n": a.n,
        "k": k,
        "predicted_cost": predicted_cost(&model, a.n, k)?,
        "budget": a.budget,
        "max_k_same_leading_mse": ceiling,
        "within_ceiling": ceiling.map(|c| k <= c),
    }))
}

fn load_config<C: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<C> {
    match path {
        None => Ok(C::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn emit<C: Serialize, R: CsvRecord + Serialize>(common: &SimCommon, kind: &str, cfg: &C, records: &[R]) -> Result<()> {
    write_csv(sink(&common.output)?, records)?;
    if let Some(p) = &common.json {
        write_json(File::create(p)?, kind, cfg, records)?;
    }
    Ok(())
}

fn apply_boot(boot: &BootSim, engine: &mut EngineSettings, exhaustive: bool) {
    if let Some(b) = boot.b {
        engine.b = b;
    }
    if let Some(b) = boot.blb_b {
        engine.blb_b = b;
    }
    engine.exhaustive |= exhaustive;
}

fn simulate(cmd: SimCommand, exhaustive: bool) -> Result<()> {
    match cmd {
        SimCommand::Coverage { common, boot } => {
            let mut cfg: CoverageConfig = load_config(&common.config)?;
            override_common(&common, &mut cfg.n, &mut cfg.ks, &mut cfg.reps, &mut cfg.seed);
            if let Some(s) = boot.scenario {
                cfg.scenario = s;
            }
            if let Some(m) = &boot.methods {
                cfg.methods = m.clone();
            }
            if boot.budget.is_some() {
                cfg.budget_seconds = boot.budget;
            }
            apply_boot(&boot, &mut cfg.engine, exhaustive);
            let recs = simulate_coverage(&cfg)?;
            emit(&common, "coverage", &cfg, &recs)
        }
        SimCommand::Mse { common, scenario } => {
            let mut cfg: MseConfig = load_config(&common.config)?;
            override_common(&common, &mut cfg.n, &mut cfg.ks, &mut cfg.reps, &mut cfg.seed);
            if let Some(s) = scenario {
                cfg.scenario = s;
            }
            cfg.exhaustive |= exhaustive;
            let recs = simulate_mse_ratio(&cfg)?;
            emit(&common, "mse", &cfg, &recs)
        }
        SimCommand::Time { common, boot, oracle_reps, ticks } => {
            let mut cfg: TimeConfig = load_config(&common.config)?;
            override_common(&common, &mut cfg.n, &mut cfg.ks, &mut cfg.reps, &mut cfg.seed);
            if let Some(s) = boot.scenario {
                cfg.scenario = s;
            }
            if let Some(m) = &boot.methods {
                cfg.methods = m.clone();
            }
            if let Some(b) = boot.budget {
                cfg.budget_seconds = b;
            }
            if let Some(t) = ticks {
                cfg.ticks = t;
            }
            match oracle_reps {
                Some(0) => cfg.oracle = WidthOracle::Normal,
                Some(r) => cfg.oracle = WidthOracle::MonteCarlo { reps: r },
                None => {}
            }
            apply_boot(&boot, &mut cfg.engine, exhaustive);
            let recs = simulate_time_evolution(&cfg)?;
            emit(&common, "time", &cfg, &recs)
        }
        SimCommand::Dcov { common, family, p, rho } => {
            let mut cfg: DcovConfig = load_config(&common.config)?;
            override_common(&common, &mut cfg.n, &mut cfg.ks, &mut cfg.reps, &mut cfg.seed);
            if let Some(f) = family {
                cfg.family = f;
            }
            if let Some(p) = p {
                cfg.ps = p;
            }
            if let Some(r) = rho {
                cfg.rho = r;
            }
            let recs = simulate_dcov(&cfg)?;
            emit(&common, "dcov", &cfg, &recs)
        }
    }
}

fn override_common(common: &SimCommon, n: &mut usize, ks: &mut Vec<usize>, reps: &mut usize, seed: &mut u64) {
    if let Some(v) = common.n {
        *n = v;
    }
    if let Some(v) = &common.k {
        *ks = v.clone();
    }
    if let Some(v) = common.reps {
        *reps = v;
    }
    if let Some(v) = common.seed {
        *seed = v;
    }
}

fn bench(a: BenchArgs, exhaustive: bool) -> Result<()> {
    let seed = SeedSpec::new(a.seed);
    let table = a.scenario.table(&seed, 0, a.n)?;
    let kernel = gini_kernel();
    let settings = EngineSettings { b: a.b, blb_b: a.blb_b, exhaustive, ..Default::default() };
    let budget = Some(TimeBudget::new(a.budget)?);
    let mut records = Vec::new();
    for &k in &a.k {
        let part = partition_random(&table, k, &seed)?;
        let est = distributed_u_stat_with(&table, &part, &kernel, settings.eval())?;
        for &m in &a.methods {
            let start = Instant::now();
            let (requested, completed) =
                match run_engine(m, &table, &part, &est, &kernel, &settings, budget, &seed, 0.95) {
                    Ok(r) => (r.requested, r.completed),
                    Err(HarnessError::Core(distinf_core::Error::EmptyResult { completed })) => {
                        (if m == Method::Blb { k } else { a.b }, completed)
                    }
                    Err(e) => return Err(e),
                };
            let elapsed = start.elapsed().as_secs_f64().max(a.budget.min(1e-9));
            records.push(BenchRecord {
                method: m.label().to_string(),
                n: a.n,
                k,
                budget_seconds: a.budget,
                requested,
                completed,
                iterations_per_second: completed as f64 / elapsed,
            });
        }
    }
    write_csv(sink(&a.output)?, &records)
}
