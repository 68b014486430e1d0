use std::error::Error;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mbc::export::{self, RankingMeasure, RunManifest};
use mbc::{
    contingency, run, Dataset, EvalSummary, ImportanceMeasure, ImportancePopulation, LoadOptions, MbcConfig,
    Measure, MissingPolicy, Partition, TiePolicy,
};

type BoxError = Box<dyn Error>;

/// Matching based clustering for categorical CSV data.
#[derive(Parser)]
#[command(name = "mbc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a dataset and write assignments, dendrogram, trace and manifest.
    Cluster(ClusterArgs),
    /// Build the dendrogram (anti-merge rule skipped).
    Dendrogram(DendrogramArgs),
    /// Rank features by importance.
    Importance(ImportanceArgs),
    /// Print the pairwise similarity matrix.
    Similarity(SimilarityArgs),
    /// Compare a clustering with a label column.
    Eval(EvalArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV with a header row.
    input: PathBuf,
    /// Column holding class labels; excluded from the features.
    #[arg(long)]
    label_column: Option<String>,
    /// Handling of missing values ("?" or empty fields).
    #[arg(long, value_enum, default_value_t = Missing::Reject)]
    missing: Missing,
}

impl DataArgs {
    fn load(&self, label_override: Option<&str>) -> Result<Dataset, BoxError> {
        let options = LoadOptions {
            label_column: label_override.map(str::to_string).or_else(|| self.label_column.clone()),
            missing: match self.missing {
                Missing::Reject => MissingPolicy::Reject,
                Missing::Category => MissingPolicy::DistinctCategory,
            },
        };
        Ok(Dataset::load_csv(&self.input, &options)?)
    }
}

#[derive(Args)]
struct AlgoArgs {
    /// Importance measure used to choose dropped features.
    #[arg(long, value_enum, default_value_t = Importance::Pgp)]
    importance: Importance,
    /// Handling of features tied at the minimum importance.
    #[arg(long, value_enum, default_value_t = Ties::DropAll)]
    ties: Ties,
    /// Influence threshold used by PGP2.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    /// Count importance over the original objects instead of the current entities.
    #[arg(long)]
    object_frequencies: bool,
}

impl AlgoArgs {
    fn config(&self, anti_merge: bool, k: Option<usize>) -> MbcConfig {
        MbcConfig {
            importance: match self.importance {
                Importance::Pgp => ImportanceMeasure::Pgp,
                Importance::Ppp => ImportanceMeasure::Ppp,
            },
            ties: match self.ties {
                Ties::DropAll => TiePolicy::DropAll,
                Ties::Pgp2 => TiePolicy::Pgp2Single,
            },
            anti_merge,
            alpha: self.alpha,
            k,
            population: if self.object_frequencies {
                ImportancePopulation::Objects
            } else {
                ImportancePopulation::Entities
            },
        }
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    algo: AlgoArgs,
    /// Skip the anti-merge rule (dendrogram mode).
    #[arg(long)]
    no_anti_merge: bool,
    /// Requested cluster count; cuts the dendrogram.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: Option<u64>,
    /// Output directory for all result files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ClusterFormat::Csv)]
    format: ClusterFormat,
}

#[derive(Args)]
struct DendrogramArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    algo: AlgoArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DendrogramFormat::Json)]
    format: DendrogramFormat,
}

#[derive(Args)]
struct ImportanceArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value_t = Ranking::Pgp)]
    measure: Ranking,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = TextFormat::Text)]
    format: TextFormat,
}

#[derive(Args)]
struct SimilarityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value_t = SimilarityMeasure::Cm)]
    measure: SimilarityMeasure,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
    format: MatrixFormat,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    algo: AlgoArgs,
    /// Label column to evaluate against.
    #[arg(long)]
    labels: String,
    /// Assignments CSV written by `cluster`; clusters the input when absent.
    #[arg(long)]
    assignments: Option<PathBuf>,
    #[arg(long)]
    no_anti_merge: bool,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EvalFormat::Text)]
    format: EvalFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Missing {
    Reject,
    Category,
}

#[derive(Clone, Copy, ValueEnum)]
enum Importance {
    Pgp,
    Ppp,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ties {
    DropAll,
    Pgp2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ranking {
    Pgp,
    Ppp,
    Pgp2,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimilarityMeasure {
    Cm,
    Overlap,
    Goodall,
    Lin,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClusterFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DendrogramFormat {
    Json,
    Newick,
}

#[derive(Clone, Copy, ValueEnum)]
enum TextFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalFormat {
    Text,
    Csv,
    Json,
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), BoxError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty(value: &impl serde::Serialize) -> Result<String, BoxError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn cluster(args: &ClusterArgs) -> Result<(), BoxError> {
    let ds = args.data.load(None)?;
    let config = args.algo.config(!args.no_anti_merge, args.k.map(|k| k as usize));
    let started = Instant::now();
    let output = run(&ds, &config)?;
    let elapsed_ms = started.elapsed().as_secs_f64() * 1e3;
    let manifest = RunManifest::new(&args.data.input.display().to_string(), &ds, &config, &output, elapsed_ms);

    let assignments = export::assignments_csv(&output.partition);
    let dendrogram = export::dendrogram_json(&output.dendrogram);
    let trace = export::trace_json(&ds, &output.trace);

    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
            emit(Some(&dir.join("assignments.csv")), &assignments)?;
            emit(Some(&dir.join("dendrogram.json")), &pretty(&dendrogram)?)?;
            emit(Some(&dir.join("dendrogram.nwk")), &(export::dendrogram_newick(&output.dendrogram) + "\n"))?;
            emit(Some(&dir.join("trace.json")), &pretty(&trace)?)?;
            emit(Some(&dir.join("manifest.json")), &pretty(&manifest)?)?;
        }
        None => {
            match args.format {
                ClusterFormat::Csv => emit(None, &assignments)?,
                ClusterFormat::Json => emit(
                    None,
                    &pretty(&json!({
                        "clusters": export::partition_json(&output.partition),
                        "dendrogram": dendrogram,
                        "trace": trace,
                    }))?,
                )?,
            }
            eprintln!("{}", serde_json::to_string(&manifest)?);
        }
    }
    Ok(())
}

fn dendrogram(args: &DendrogramArgs) -> Result<(), BoxError> {
    let ds = args.data.load(None)?;
    let output = run(&ds, &args.algo.config(false, None))?;
    let text = match args.format {
        DendrogramFormat::Json => pretty(&export::dendrogram_json(&output.dendrogram))?,
        DendrogramFormat::Newick => export::dendrogram_newick(&output.dendrogram) + "\n",
    };
    emit(args.out.as_deref(), &text)
}

fn importance(args: &ImportanceArgs) -> Result<(), BoxError> {
    let ds = args.data.load(None)?;
    let measure = match args.measure {
        Ranking::Pgp => RankingMeasure::Pgp,
        Ranking::Ppp => RankingMeasure::Ppp,
        Ranking::Pgp2 => RankingMeasure::Pgp2,
    };
    let rows = export::rank_features(&ds, measure, args.alpha)?;
    let text = match args.format {
        TextFormat::Text => export::ranking_text(&rows),
        TextFormat::Json => pretty(&rows)?,
    };
    emit(args.out.as_deref(), &text)
}

fn similarity(args: &SimilarityArgs) -> Result<(), BoxError> {
    let ds = args.data.load(None)?;
    let measure = match args.measure {
        SimilarityMeasure::Cm => Measure::Cm,
        SimilarityMeasure::Overlap => Measure::Overlap,
        SimilarityMeasure::Goodall => Measure::Goodall,
        SimilarityMeasure::Lin => Measure::Lin,
    };
    let matrix = mbc::similarity::pairwise(&ds, measure)?;
    let text = match args.format {
        MatrixFormat::Csv => export::matrix_csv(&matrix),
        MatrixFormat::Json => pretty(&json!({ "measure": measure.to_string(), "matrix": matrix }))?,
    };
    emit(args.out.as_deref(), &text)
}

fn read_assignments(path: &Path, n: usize) -> Result<Partition, BoxError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut cluster_of = vec![None; n];
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = i + 2;
        let field = |k: usize| -> Result<usize, BoxError> {
            record
                .get(k)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| format!("{}: line {line}: expected 'object,cluster' integers", path.display()).into())
        };
        let object = field(0)?;
        if object == 0 || object > n {
            return Err(format!("{}: line {line}: object {object} outside 1..={n}", path.display()).into());
        }
        cluster_of[object - 1] = Some(field(1)?);
    }
    let labels: Vec<usize> = cluster_of
        .into_iter()
        .enumerate()
        .map(|(o, c)| c.ok_or_else(|| format!("{}: object {} has no cluster", path.display(), o + 1)))
        .collect::<Result<_, _>>()?;
    Ok(Partition::from_assignment(&labels))
}

fn eval(args: &EvalArgs) -> Result<(), BoxError> {
    let ds = args.data.load(Some(&args.labels))?;
    let labels = ds.labels().expect("label column was requested");
    let partition = match &args.assignments {
        Some(path) => read_assignments(path, ds.n())?,
        None => run(&ds, &args.algo.config(!args.no_anti_merge, args.k.map(|k| k as usize)))?.partition,
    };
    let table = contingency(&partition, labels)?;
    let summary = EvalSummary::from(&table);
    match args.format {
        EvalFormat::Text => emit(args.out.as_deref(), &(table.to_text() + &pretty(&summary)?))?,
        EvalFormat::Csv => {
            emit(args.out.as_deref(), &table.to_csv())?;
            eprintln!("{}", serde_json::to_string(&summary)?);
        }
        EvalFormat::Json => emit(args.out.as_deref(), &pretty(&json!({ "table": table, "summary": summary }))?)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Cluster(args) => cluster(args),
        Command::Dendrogram(args) => dendrogram(args),
        Command::Importance(args) => importance(args),
        Command::Similarity(args) => similarity(args),
        Command::Eval(args) => eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
