use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mfc_grouping::dataset::read_roster;
use mfc_grouping::{
    emit_grouping, generate_semisynthetic, load_dataset, run_sweep, solve, validate_instance,
    write_semisynthetic, Bounds, DatasetSchema, Error, GeneratorConfig, GroupingDocument, Instance,
    Method, ModBasis, OutputFormat, Params, Result, SolverOptions, SweepConfig, TopicOrder,
};

#[derive(Parser)]
#[command(
    name = "mfc",
    version,
    about = "Fair capacitated student-to-topic grouping"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and emit the grouping.
    Solve(SolveArgs),
    /// Solve across a range of lower bounds with C^u = C^l + offset.
    Sweep(SweepArgs),
    /// Check a dataset for structural problems.
    Validate(ValidateArgs),
    /// Write a seeded semi-synthetic dataset.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct Source {
    /// Dataset CSV.
    #[arg(
        long,
        conflicts_with = "generate",
        required_unless_present = "generate"
    )]
    input: Option<PathBuf>,
    /// Generate in memory instead: n,m,h,seed (categories split evenly).
    #[arg(long, value_parser = parse_generate)]
    generate: Option<GeneratorConfig>,
    /// Topic count when the file has no priority columns.
    #[arg(long)]
    topics: Option<usize>,
}

#[derive(Args)]
struct Knobs {
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Prefer the more balanced candidate on welfare ties.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    balance_tiebreak: bool,
    /// Count for the knapsack budget rule: unassigned | global.
    #[arg(long, default_value = "unassigned")]
    mod_basis: ModBasis,
    /// Knapsack topic visiting order: index | demand.
    #[arg(long, default_value = "index")]
    topic_order: TopicOrder,
    /// Oracle state budget (m^n).
    #[arg(long, default_value_t = mfc_grouping::oracle::DEFAULT_MAX_STATES)]
    max_states: u64,
}

impl Knobs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            balance_tiebreak: self.balance_tiebreak,
            mod_basis: self.mod_basis,
            topic_order: self.topic_order,
            oracle_max_states: self.max_states,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 2)]
    cl: usize,
    #[arg(long, default_value_t = 3)]
    cu: usize,
    #[arg(long, default_value = "heuristic")]
    method: Method,
    #[command(flatten)]
    knobs: Knobs,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    source: Source,
    /// Inclusive lower-bound range, e.g. 2..8 or 2-8.
    #[arg(long, default_value = "2..8", value_parser = parse_range)]
    cl_range: RangeInclusive<usize>,
    #[arg(long, default_value_t = 1)]
    cu_offset: usize,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "heuristic,knapsack")]
    methods: Vec<Method>,
    #[command(flatten)]
    knobs: Knobs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long, default_value_t = 2)]
    cl: usize,
    #[arg(long, default_value_t = 3)]
    cu: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Mathematics,
    Portuguese,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, conflicts_with_all = ["n", "m"])]
    preset: Option<Preset>,
    #[arg(long, required_unless_present = "preset")]
    n: Option<usize>,
    #[arg(long, required_unless_present = "preset")]
    m: Option<usize>,
    #[arg(long, default_value_t = 3)]
    h: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Share of category One (F) in a drawn roster.
    #[arg(long)]
    share: Option<f64>,
    /// CSV whose protected-attribute column supplies the roster.
    #[arg(long)]
    roster: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_generate(s: &str) -> std::result::Result<GeneratorConfig, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err("expected n,m,h,seed".into());
    }
    let num = |i: usize| {
        parts[i]
            .parse::<u64>()
            .map_err(|e| format!("{:?}: {e}", parts[i]))
    };
    Ok(GeneratorConfig {
        n: num(0)? as usize,
        m: num(1)? as usize,
        h: num(2)? as usize,
        seed: num(3)?,
        proportions: [0.5, 0.5],
    })
}

fn parse_range(s: &str) -> std::result::Result<RangeInclusive<usize>, String> {
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .or_else(|| s.split_once('-'))
        .or_else(|| s.split_once(':'))
        .ok_or_else(|| format!("expected a range like 2..8, got {s:?}"))?;
    let lo = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let hi = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok(lo..=hi)
}

fn load(source: &Source, params: Params) -> Result<Instance> {
    match (&source.input, &source.generate) {
        (Some(path), _) => {
            let schema = DatasetSchema {
                topics: source.topics,
                ..DatasetSchema::default()
            };
            let loaded = load_dataset(path, &schema, params)?;
            for note in &loaded.report.notes {
                eprintln!("note: {note}");
            }
            for v in &loaded.report.violations {
                eprintln!("warning: {v}");
            }
            Ok(loaded.instance)
        }
        (None, Some(cfg)) => generate_semisynthetic(None, cfg, params),
        (None, None) => Err(Error::Config(
            "either --input or --generate is required".into(),
        )),
    }
}

fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| Error::io(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            w.flush().map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn run_solve(args: &SolveArgs) -> Result<()> {
    let params = Params {
        bounds: Bounds::new(args.cl, args.cu)?,
        alpha: args.knobs.alpha,
        beta: args.knobs.beta,
    };
    let instance = load(&args.source, params)?;
    let sol = solve(&instance, args.method, &args.knobs.options())?;
    if let Some(w) = &sol.metrics.warning {
        eprintln!("warning: {w}");
    }
    let doc = GroupingDocument::new(&sol.grouping, &sol.metrics, &instance, args.method)?;
    with_output(args.out.as_deref(), |w| {
        emit_grouping(&doc, args.format.into(), w)
    })
}

fn run_sweep_cmd(args: &SweepArgs) -> Result<()> {
    let instance = load(&args.source, Params::default())?;
    let config = SweepConfig {
        lower: args.cl_range.clone(),
        upper_offset: args.cu_offset,
        methods: args.methods.clone(),
        alpha: args.knobs.alpha,
        beta: args.knobs.beta,
        options: args.knobs.options(),
    };
    let result = run_sweep(&instance, &config)?;
    with_output(args.out.as_deref(), |w| match args.format {
        Format::Csv => result.write_csv(w),
        Format::Json => result.write_json(w),
    })
}

/// Prints the report as JSON; exits 3 when any violation is found.
fn run_validate(args: &ValidateArgs) -> Result<ExitCode> {
    let params = Params {
        bounds: Bounds::new(args.cl, args.cu)?,
        ..Params::default()
    };
    let schema = DatasetSchema {
        topics: args.topics,
        ..DatasetSchema::default()
    };
    let loaded = load_dataset(&args.input, &schema, params)?;
    let mut report = validate_instance(&loaded.instance);
    report.notes.extend(loaded.report.notes);
    with_output(None, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w).map_err(|e| Error::io("<stdout>", e))
    })?;
    Ok(if report.is_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn run_generate(args: &GenerateArgs) -> Result<()> {
    let mut config = match args.preset {
        Some(Preset::Mathematics) => GeneratorConfig::mathematics(args.seed),
        Some(Preset::Portuguese) => GeneratorConfig::portuguese(args.seed),
        None => GeneratorConfig {
            n: args.n.unwrap_or_default(),
            m: args.m.unwrap_or_default(),
            h: args.h,
            seed: args.seed,
            proportions: [0.5, 0.5],
        },
    };
    if args.preset.is_some() {
        config.h = args.h;
    }
    if let Some(share) = args.share {
        config.proportions = [1.0 - share, share];
    }
    let roster = match &args.roster {
        Some(path) => {
            let r = read_roster(path, &DatasetSchema::default())?;
            config.n = r.len();
            Some(r)
        }
        None => None,
    };
    let instance = generate_semisynthetic(roster.as_deref(), &config, Params::default())?;
    with_output(args.out.as_deref(), |w| {
        write_semisynthetic(&instance, &config, w)
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => run_solve(a).map(|_| ExitCode::SUCCESS),
        Command::Sweep(a) => run_sweep_cmd(a).map(|_| ExitCode::SUCCESS),
        Command::Validate(a) => run_validate(a),
        Command::Generate(a) => run_generate(a).map(|_| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
