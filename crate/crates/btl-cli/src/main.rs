//! `btl` — batch tools for the Blink-Think-Link contract:
//! `validate` completions, `reward` them against ground truth, `annotate`
//! element dumps with blink ROIs, and `eval` prediction metrics.
//!
//! Exit codes: 0 success; 1 validation/scoring failure present; 2 usage or
//! configuration error; 3 IO or join error.

mod config;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use btl_core::annotate::{annotate_dataset, AnnotateOptions, HeuristicRanker, RoiRanker};
use btl_core::client::ModelClient;
use btl_core::eval::evaluate;
use btl_core::format::{validate_completion_with, Issue};
use btl_core::grpo::{group_advantages, RewardGroup};
use btl_core::records::{read_jsonl, GtRecord, PredictionRecord, StepId};
use btl_core::reward::{reward_total_with, GroundTruthStep, RewardBreakdown};

use config::{Overrides, ToolConfig};

#[derive(Parser)]
#[command(name = "btl", version, about = "Blink-Think-Link batch toolkit")]
struct Cli {
    /// JSON config file; flags override file values, file values override
    /// built-in defaults
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// IoU threshold for blink matching, in (0, 1]
    #[arg(long, global = true)]
    tau: Option<f64>,

    /// Maximum number of blink ROIs
    #[arg(long, global = true)]
    lambda: Option<usize>,

    /// KL coefficient for group advantage reporting
    #[arg(long, global = true)]
    beta: Option<f64>,

    /// Emit contiguous N-completion reward groups with advantages
    #[arg(long, global = true, value_name = "N")]
    group_size: Option<usize>,

    /// Analysis-model endpoint URL (enables the model ranking path)
    #[arg(long, global = true, value_name = "URL")]
    endpoint_url: Option<String>,

    /// Fall back to the offline heuristic when the endpoint fails
    #[arg(long, global = true, overrides_with = "no_fallback")]
    fallback: bool,

    /// Never fall back; endpoint failures fail the record
    #[arg(long, global = true, overrides_with = "fallback")]
    no_fallback: bool,

    /// Output path (default: stdout)
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Print the effective configuration and exit
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Check completions against the dual format rules, one report line per
    /// input line; exits 1 if any line is invalid
    Validate {
        /// Completions: plain text lines, or JSONL with a "completion" field
        input: PathBuf,
    },
    /// Score completions against ground truth, one reward breakdown per line
    Reward {
        /// JSONL completions: {"id": ..., "completion": ...}
        completions: PathBuf,
        /// JSONL ground truth, joined by id
        groundtruth: PathBuf,
    },
    /// Attach blink ROI annotations to a dataset of parsed UI elements
    Annotate {
        /// JSONL input: {"instruction", "history", "elements", ...}
        input: PathBuf,
        /// Annotated JSONL output
        output: PathBuf,
    },
    /// Compute Type/GR/SR (and grounding) metrics for predictions
    Eval {
        /// JSONL ground-truth dataset
        dataset: PathBuf,
        /// JSONL predictions: {"id": ..., "completion": ...}
        predictions: PathBuf,
    },
}

enum Failure {
    /// Usage or configuration problem (exit 2).
    Usage(String),
    /// IO, parse or join problem in the data path (exit 3).
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let mut cfg = ToolConfig::load(cli.config.as_deref()).map_err(Failure::Usage)?;
    cfg.apply(&Overrides {
        tau: cli.tau,
        lambda: cli.lambda,
        beta: cli.beta,
        endpoint_url: cli.endpoint_url.clone(),
        fallback: match (cli.fallback, cli.no_fallback) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        },
    });
    cfg.validate().map_err(Failure::Usage)?;

    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return Ok(ExitCode::SUCCESS);
    }

    match cli
        .command
        .ok_or_else(|| Failure::Usage("missing subcommand; see --help".into()))?
    {
        Command::Validate { input } => cmd_validate(&input, cli.out.as_deref(), &cfg),
        Command::Reward {
            completions,
            groundtruth,
        } => cmd_reward(
            &completions,
            &groundtruth,
            cli.group_size,
            cli.out.as_deref(),
            &cfg,
        ),
        Command::Annotate { input, output } => cmd_annotate(&input, &output, &cfg),
        Command::Eval {
            dataset,
            predictions,
        } => cmd_eval(&dataset, &predictions, cli.out.as_deref(), &cfg),
    }
}

fn open_reader(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn open_writer(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    match out {
        None => Ok(Box::new(std::io::stdout().lock())),
        Some(path) => File::create(path)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display()))),
    }
}

fn write_line(writer: &mut dyn Write, row: &impl Serialize) -> Result<(), Failure> {
    let line = serde_json::to_string(row).expect("row serializes");
    writeln!(writer, "{line}").map_err(|e| Failure::Data(format!("write failed: {e}")))
}

#[derive(Serialize)]
struct ValidateRow {
    line: usize,
    template_ok: bool,
    content_ok: bool,
    issues: Vec<Issue>,
}

/// A line is either a JSON object with a "completion" field or the raw
/// completion text itself.
fn extract_completion(line: &str) -> String {
    if let Ok(serde_json::Value::Object(map)) = serde_json::from_str(line) {
        if let Some(serde_json::Value::String(completion)) = map.get("completion") {
            return completion.clone();
        }
    }
    line.to_string()
}

fn cmd_validate(input: &Path, out: Option<&Path>, cfg: &ToolConfig) -> Result<ExitCode, Failure> {
    let reader = open_reader(input)?;
    let mut writer = open_writer(out)?;
    let mut any_invalid = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Failure::Data(format!("{}: {e}", input.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let completion = extract_completion(&line);
        let report = validate_completion_with(&completion, cfg.lambda_max);
        any_invalid |= !report.is_valid();
        write_line(
            writer.as_mut(),
            &ValidateRow {
                line: idx + 1,
                template_ok: report.template_ok,
                content_ok: report.content_ok,
                issues: report.issues,
            },
        )?;
    }
    writer
        .flush()
        .map_err(|e| Failure::Data(format!("write failed: {e}")))?;
    Ok(if any_invalid {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

#[derive(Serialize)]
struct RewardRow {
    id: StepId,
    #[serde(flatten)]
    breakdown: RewardBreakdown<f64>,
}

#[derive(Serialize)]
struct GroupRow {
    group: usize,
    ids: Vec<StepId>,
    rewards: Vec<f64>,
    advantages: Vec<f64>,
}

/// Group lines go to `<out>.groups` when `--out` is set, otherwise to stdout
/// interleaved after each completed group.
fn groups_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".groups");
    out.with_file_name(name)
}

fn cmd_reward(
    completions: &Path,
    groundtruth: &Path,
    group_size: Option<usize>,
    out: Option<&Path>,
    cfg: &ToolConfig,
) -> Result<ExitCode, Failure> {
    if group_size == Some(0) {
        return Err(Failure::Usage("--group-size must be at least 1".into()));
    }
    let gt_records: Vec<GtRecord<f64>> =
        read_jsonl(groundtruth).map_err(|e| Failure::Data(e.to_string()))?;
    let mut table: BTreeMap<StepId, GroundTruthStep<f64>> = BTreeMap::new();
    for record in gt_records {
        if table.insert(record.id.clone(), record.step).is_some() {
            return Err(Failure::Data(format!(
                "join error: duplicate ground-truth id {}",
                record.id
            )));
        }
    }

    let reader = open_reader(completions)?;
    let mut writer = open_writer(out)?;
    let mut group_file: Option<BufWriter<File>> = match (group_size, out) {
        (Some(_), Some(path)) => {
            let path = groups_path(path);
            Some(BufWriter::new(File::create(&path).map_err(|e| {
                Failure::Data(format!("{}: {e}", path.display()))
            })?))
        }
        _ => None,
    };

    let reward_cfg = cfg.reward_config();
    let grpo_cfg = cfg.grpo_config();
    let mut pending: Vec<(StepId, f64)> = Vec::new();
    let mut group_index = 0usize;
    let mut n_scored = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Failure::Data(format!("{}: {e}", completions.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord = serde_json::from_str(&line).map_err(|e| {
            Failure::Data(format!("{} line {}: {e}", completions.display(), idx + 1))
        })?;
        let step = table.get(&record.id).ok_or_else(|| {
            Failure::Data(format!(
                "join error: completion id {} has no ground-truth record",
                record.id
            ))
        })?;
        let breakdown = reward_total_with(&record.completion, step, &reward_cfg);
        n_scored += 1;
        write_line(
            writer.as_mut(),
            &RewardRow {
                id: record.id.clone(),
                breakdown,
            },
        )?;

        if let Some(n) = group_size {
            pending.push((record.id, breakdown.r_total));
            if pending.len() == n {
                let (ids, rewards): (Vec<StepId>, Vec<f64>) = pending.drain(..).unzip();
                let group = RewardGroup::try_new(rewards.clone()).expect("n >= 1");
                let row = GroupRow {
                    group: group_index,
                    ids,
                    rewards,
                    advantages: group_advantages(&group, &grpo_cfg),
                };
                match group_file.as_mut() {
                    Some(f) => write_line(f, &row)?,
                    None => write_line(writer.as_mut(), &row)?,
                }
                group_index += 1;
            }
        }
    }

    if !pending.is_empty() {
        return Err(Failure::Usage(format!(
            "{} completions do not divide into groups of {}: {} left over",
            n_scored,
            group_size.unwrap_or(0),
            pending.len()
        )));
    }
    writer
        .flush()
        .map_err(|e| Failure::Data(format!("write failed: {e}")))?;
    if let Some(mut f) = group_file {
        f.flush()
            .map_err(|e| Failure::Data(format!("write failed: {e}")))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_annotate(input: &Path, output: &Path, cfg: &ToolConfig) -> Result<ExitCode, Failure> {
    let opts = AnnotateOptions {
        lambda: cfg.lambda_max,
        concurrency: cfg.concurrency,
        fallback: cfg.fallback_ranker,
    };
    let heuristic = HeuristicRanker;
    let client;
    let (primary, fallback): (&dyn RoiRanker<f64>, Option<&dyn RoiRanker<f64>>) =
        match &cfg.endpoint {
            Some(endpoint) => {
                client = ModelClient::new(endpoint.clone())
                    .map_err(|e| Failure::Usage(e.to_string()))?;
                (
                    &client,
                    cfg.fallback_ranker
                        .then_some(&heuristic as &dyn RoiRanker<f64>),
                )
            }
            None => (&heuristic, None),
        };
    let summary = annotate_dataset::<f64>(input, output, primary, fallback, &opts)
        .map_err(|e| Failure::Data(e.to_string()))?;
    println!(
        "{}",
        serde_json::to_string(&summary).expect("summary serializes")
    );
    Ok(if summary.failed > 0 {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_eval(
    dataset: &Path,
    predictions: &Path,
    out: Option<&Path>,
    cfg: &ToolConfig,
) -> Result<ExitCode, Failure> {
    let report = evaluate::<f64>(dataset, predictions, &cfg.reward_config())
        .map_err(|e| Failure::Data(e.to_string()))?;
    let pretty = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{pretty}");
    if let Some(path) = out {
        std::fs::write(path, format!("{pretty}\n"))
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    }
    Ok(ExitCode::SUCCESS)
}
