use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skipbf::bench::{render_summary, run_bench_with, scaling_curve, write_summary, BenchSpec};
use skipbf::datagen::{read_dataset, write_dataset, GenSpec, UNIFORM};
use skipbf::parallel::{default_worker_count, parallel_search};
use skipbf::{encode_lmer, generate_dataset, Error, MotifProblem};

/// Exact planted (l, d) motif search with parallel skip-brute-force.
#[derive(Parser, Debug)]
#[command(name = "skipbf", version)]
struct Cli {
    /// RNG seed for dataset generation [default: 42]
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads [default: logical CPU count]
    #[arg(long, global = true, env = "MOTIF_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    /// Output path or prefix (generate: file prefix; bench: CSV path)
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate an FM-model dataset: <out>.fasta and <out>.truth
    Generate(GenerateArgs),
    /// Search a FASTA file for all (l, d) motifs
    Search(SearchArgs),
    /// Run the runtime/speedup benchmark and write CSV + summary
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Number of sequences
    #[arg(short = 'n', default_value_t = 20)]
    n: usize,
    /// Sequence length in nucleotides
    #[arg(short = 't', default_value_t = 600)]
    t: usize,
    /// Motif length
    #[arg(short = 'l', default_value_t = 15)]
    l: usize,
    /// Mutations per planted instance
    #[arg(short = 'd', default_value_t = 4)]
    d: usize,
    /// Print the planted consensus
    #[arg(long)]
    reveal: bool,
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// FASTA input; a `.truth` sidecar next to it is used if present
    fasta: PathBuf,
    /// Motif length
    #[arg(short = 'l')]
    l: usize,
    /// Mutation budget
    #[arg(short = 'd')]
    d: usize,
    /// Print at most this many motifs (0 = all)
    #[arg(long, default_value_t = 1000)]
    max_print: usize,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// JSON file with BenchSpec fields; inline flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Instances as l:d pairs, e.g. 9:2,10:2,11:3 [default: 9:2,10:2,11:3]
    #[arg(long, value_delimiter = ',', value_parser = parse_instance)]
    instances: Option<Vec<(usize, usize)>>,
    /// Worker counts, ascending [default: 1,2,4]
    #[arg(long, value_delimiter = ',')]
    workers: Option<Vec<usize>>,
    /// Timed repetitions per cell [default: 3]
    #[arg(long)]
    reps: Option<usize>,
    /// Distinct datasets per instance [default: 3]
    #[arg(long)]
    datasets: Option<usize>,
    /// Sequences per dataset [default: 20]
    #[arg(short = 'n')]
    n: Option<usize>,
    /// Sequence length [default: 600]
    #[arg(short = 't')]
    t: Option<usize>,
    /// Skip the discarded warm-up run per cell
    #[arg(long)]
    no_warmup: bool,
    /// Large instance set (11,3)..(15,4), W up to 64. Expect many hours.
    #[arg(long)]
    full_scale: bool,
}

fn parse_instance(s: &str) -> Result<(usize, usize), String> {
    let (l, d) = s
        .split_once(':')
        .ok_or_else(|| format!("expected l:d, got {s:?}"))?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((num(l)?, num(d)?))
}

#[derive(Debug)]
enum CliError {
    User(String),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let missing_file = matches!(&e, Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound);
        if e.is_user_error() || missing_file {
            CliError::User(e.to_string())
        } else {
            CliError::Internal(e.to_string())
        }
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .map_or_else(default_worker_count, |t| t as usize);
    let result = match &cli.command {
        Command::Generate(args) => {
            cmd_generate(args, cli.seed.unwrap_or(42), cli.output.as_deref())
        }
        Command::Search(args) => cmd_search(args, threads),
        Command::Bench(args) => cmd_bench(args, cli.seed, cli.threads, cli.output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::User(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn cmd_generate(args: &GenerateArgs, seed: u64, output: Option<&Path>) -> CliResult {
    let spec = GenSpec {
        n: args.n,
        t: args.t,
        l: args.l,
        d: args.d,
        seed,
        background_probs: UNIFORM,
    };
    let dataset = generate_dataset(&spec)?;
    let prefix = output.unwrap_or(Path::new("dataset"));
    let paths = write_dataset(&dataset, prefix)?;
    println!("wrote {}", paths.fasta.display());
    println!("wrote {}", paths.truth.display());
    if args.reveal {
        println!("consensus: {}", dataset.record().consensus);
    }
    Ok(())
}

fn cmd_search(args: &SearchArgs, threads: usize) -> CliResult {
    let loaded = read_dataset(&args.fasta)?;
    let problem = MotifProblem::from_strs(&loaded.sequences, args.l, args.d)?;
    if args.d >= args.l {
        eprintln!(
            "warning: trivial budget: all l-mers match (d={} >= l={})",
            args.d, args.l
        );
    }
    let result = parallel_search(&problem, threads)?;
    let merged = &result.merged;

    println!("sequences: {}", problem.sequences().len());
    println!("(l,d): ({},{})", args.l, args.d);
    println!("workers: {threads}");
    println!("motifs: {}", merged.motifs.len());
    let shown = if args.max_print == 0 {
        merged.motifs.len()
    } else {
        args.max_print.min(merged.motifs.len())
    };
    for m in &merged.motifs[..shown] {
        println!("{m}\t{}", m.rank());
    }
    if shown < merged.motifs.len() {
        println!(
            "... {} more (raise --max-print)",
            merged.motifs.len() - shown
        );
    }
    println!("wall time: {:.6} s", merged.elapsed.as_secs_f64());

    if let Some(truth) = &loaded.truth {
        if truth.spec.l == args.l {
            let rank = encode_lmer(&truth.record.consensus)?.rank();
            let found = merged
                .motifs
                .binary_search_by_key(&rank, |m| m.rank())
                .is_ok();
            println!(
                "planted consensus recovered: {}",
                if found { "yes" } else { "no" }
            );
        } else {
            println!(
                "planted consensus recovered: n/a (sidecar has l={}, searched l={})",
                truth.spec.l, args.l
            );
        }
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<BenchSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::User(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::User(format!("{}: {e}", path.display())))
}

fn cmd_bench(
    args: &BenchArgs,
    seed: Option<u64>,
    threads: Option<u64>,
    output: Option<&Path>,
) -> CliResult {
    let mut spec = match (&args.config, args.full_scale) {
        (Some(path), _) => load_config(path)?,
        (None, true) => BenchSpec::full_scale(),
        (None, false) => BenchSpec::desk(),
    };
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    if let Some(v) = &args.instances {
        spec.instances = v.clone();
    }
    if let Some(v) = &args.workers {
        spec.workers = v.clone();
    } else if let Some(t) = threads {
        // --threads caps the default worker sweep
        let t = t as usize;
        spec.workers.retain(|&w| w <= t);
        if !spec.workers.contains(&t) {
            spec.workers.push(t);
        }
    }
    if let Some(v) = args.reps {
        spec.repetitions = v;
    }
    if let Some(v) = args.datasets {
        spec.datasets_per_instance = v;
    }
    if let Some(v) = args.n {
        spec.n = v;
    }
    if let Some(v) = args.t {
        spec.t = v;
    }
    if args.no_warmup {
        spec.warmup = false;
    }
    let csv_path = output
        .map(Path::to_path_buf)
        .or_else(|| spec.output.clone())
        .unwrap_or_else(|| PathBuf::from("bench.csv"));
    spec.output = Some(csv_path.clone());
    spec.validate()?;

    let outcome = run_bench_with(&spec, |r| {
        eprintln!(
            "({},{}) W={} rep={} {:.6}s motifs={}",
            r.l, r.d, r.workers, r.rep, r.wall_seconds, r.motifs
        );
    })?;

    let mut summary_path = csv_path.clone().into_os_string();
    summary_path.push(".summary.txt");
    write_summary(&outcome.summary, PathBuf::from(&summary_path))?;

    print!("{}", render_summary(&outcome.summary));
    for &d in spec
        .instances
        .iter()
        .map(|(_, d)| d)
        .collect::<std::collections::BTreeSet<_>>()
    {
        let curve = scaling_curve(&outcome.records, d, spec.workers[0]);
        if !curve.ratios.is_empty() {
            let ratios: Vec<String> = curve.ratios.iter().map(|r| format!("{r:.2}")).collect();
            println!(
                "runtime growth per unit l (d={d}, W={}): {}",
                curve.workers,
                ratios.join(", ")
            );
        }
    }
    println!("csv: {}", csv_path.display());
    println!("summary: {}", PathBuf::from(summary_path).display());
    Ok(())
}
