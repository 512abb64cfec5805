use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cogsig_core::analysis::{AnalysisReport, Analyzer};
use cogsig_core::complexity::{train_ngram, NgramModel, DEFAULT_ALPHA, DEFAULT_ORDER};
use cogsig_core::error::{CogsigError, Result};
use cogsig_core::event_log::parse_log;
use cogsig_core::par::Execution;
use cogsig_core::sweep::{sweep, synthesize_population, to_csv};
use cogsig_core::synth::{Attack, PopulationModel, SessionKind, SynthConfig, Synthesizer};
use cogsig_core::verify::{
    build_evidence, calibrate_baseline, calibrate_norms, canonical_json, commit, consistency_check,
    verify_commitment, BaselineProfile, Commitment, EvidenceRecord, NormCalibration, PopulationNorms, SALT_LEN,
};

#[derive(Parser)]
#[command(name = "cogsig", version, about = "Keystroke-timing cognitive signature toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a cogsig-v1 log and write it back in normalized form.
    Ingest {
        log: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Full analysis report (segments, CLC, verdict, entropy, spectral slope).
    Analyze {
        log: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1000)]
        planning_ms: u64,
        #[arg(long, default_value_t = 2000)]
        burst_break_ms: u64,
        #[arg(long, default_value_t = cogsig_core::clc::DEFAULT_TAU)]
        tau: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a labelled synthetic session.
    Synth {
        /// composition, transcription or forgery:<naive_slowdown|pause_map|rehearsed_profile>
        #[arg(long, value_parser = parse_kind)]
        kind: SessionKind,
        #[arg(long, default_value_t = 1500)]
        words: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "writer")]
        writer: String,
        #[arg(long)]
        session: Option<String>,
        /// Emit payload-free events with complexity bins on word onsets.
        #[arg(long)]
        privacy: bool,
        /// Session log path; labels go next to it as `<stem>.labels.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the reference corpus the bundled model was trained on.
        #[arg(long)]
        corpus_out: Option<PathBuf>,
    },
    /// Build an evidence record from a report and print its commitment, or
    /// check an existing record against a commitment.
    Verify {
        /// Analysis report JSON, or an `.evr.json` record with --commitment.
        input: PathBuf,
        /// 16-byte salt as 32 hex digits.
        #[arg(long)]
        salt_hex: Option<String>,
        #[arg(long, default_value = "unspecified")]
        created_at: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Commitment hex to check `input` against.
        #[arg(long)]
        commitment: Option<String>,
    },
    /// Build a personal baseline from enrollment evidence records.
    Enroll {
        records: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Calibrate population norms for consistency checks by Monte Carlo.
    Norms {
        #[arg(long, default_value_t = NormCalibration::default().writers)]
        writers: usize,
        #[arg(long, default_value_t = NormCalibration::default().max_sessions)]
        max_sessions: usize,
        #[arg(long, default_value_t = NormCalibration::default().seed)]
        seed: u64,
        #[arg(long, default_value_t = 1500)]
        words: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multi-session consistency check against a baseline.
    Consistency {
        records: Vec<PathBuf>,
        #[arg(long)]
        baseline: PathBuf,
        /// Norms file from `cogsig norms`; calibrated with defaults if absent.
        #[arg(long)]
        norms: Option<PathBuf>,
    },
    /// Accuracy and leakage as functions of the quantization resolution.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "1,5,10,20,50")]
        r: Vec<u64>,
        /// Sessions per class (one writer each).
        #[arg(long, default_value_t = 200)]
        sessions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1500)]
        words: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Plain-text reference corpus; defaults to the bundled synthetic corpus.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_ORDER)]
    order: usize,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
}

impl ModelArgs {
    fn model(&self) -> Result<NgramModel> {
        match &self.corpus {
            Some(path) => train_ngram(&read(path)?, self.order, self.alpha),
            None => Ok(Synthesizer::shared().model().clone()),
        }
    }
}

fn parse_kind(s: &str) -> std::result::Result<SessionKind, String> {
    match s {
        "composition" => Ok(SessionKind::Composition),
        "transcription" => Ok(SessionKind::Transcription),
        _ => match s.strip_prefix("forgery:") {
            Some(attack) => match attack.parse::<Attack>() {
                Ok(Attack::None) | Err(_) => Err(format!("unknown attack {attack:?}")),
                Ok(a) => Ok(SessionKind::Forgery(a)),
            },
            None => Err(format!("unknown kind {s:?}")),
        },
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CogsigError {
    CogsigError::Serialization(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read(path)?)?)
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content).map_err(|e| io_err(path, e)),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn evr_path(input: &Path) -> PathBuf {
    let name = input.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let stem = name.strip_suffix(".json").unwrap_or(&name);
    input.with_file_name(format!("{stem}.evr.json"))
}

fn parse_salt(hex_str: &str) -> Result<[u8; SALT_LEN]> {
    let mut salt = [0u8; SALT_LEN];
    hex::decode_to_slice(hex_str.trim(), &mut salt).map_err(|e| {
        CogsigError::InvalidParameters(format!("salt must be {} hex digits: {e}", 2 * SALT_LEN))
    })?;
    Ok(salt)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { log, out } => {
            let session = parse_log(&read(&log)?)?;
            emit(out.as_deref(), &session.to_jsonl())
        }
        Command::Analyze { log, model, planning_ms, burst_break_ms, tau, out } => {
            let session = parse_log(&read(&log)?)?;
            let mut analyzer = Analyzer::new(model.model()?);
            analyzer.thresholds.planning_ms = planning_ms;
            analyzer.thresholds.burst_break_ms = burst_break_ms;
            analyzer.clc.tau = tau;
            emit(out.as_deref(), &pretty(&analyzer.analyze(&session)?)?)
        }
        Command::Synth { kind, words, seed, writer, session, privacy, out, corpus_out } => {
            let synth = Synthesizer::shared();
            let cfg = SynthConfig {
                seed,
                words,
                privacy,
                writer_id: writer,
                session_id: session.unwrap_or_else(|| format!("synth-{seed}")),
                ..SynthConfig::default()
            };
            let generated = synth.generate(kind, &cfg)?;
            if let Some(path) = &corpus_out {
                fs::write(path, synth.reference_corpus()).map_err(|e| io_err(path, e))?;
            }
            emit(out.as_deref(), &generated.session.to_jsonl())?;
            if let Some(path) = out {
                let labels = path.with_extension("labels.json");
                fs::write(&labels, pretty(&generated.labels)?).map_err(|e| io_err(&labels, e))?;
            }
            Ok(())
        }
        Command::Verify { input, salt_hex, created_at, out, commitment } => {
            if let Some(hex_digest) = commitment {
                let record: EvidenceRecord = read_json(&input)?;
                let ok = verify_commitment(&record, &Commitment::from_hex(&hex_digest)?);
                println!("{}", serde_json::json!({ "verified": ok }));
                return if ok {
                    Ok(())
                } else {
                    Err(CogsigError::InvalidParameters("commitment does not match record".into()))
                };
            }
            let salt = salt_hex
                .ok_or_else(|| CogsigError::InvalidParameters("--salt-hex is required to build a record".into()))?;
            let report: AnalysisReport = read_json(&input)?;
            let record = build_evidence(&report, parse_salt(&salt)?, &created_at)?;
            let path = out.unwrap_or_else(|| evr_path(&input));
            fs::write(&path, canonical_json(&record)?).map_err(|e| io_err(&path, e))?;
            println!("{}", commit(&record)?.to_hex());
            Ok(())
        }
        Command::Enroll { records, out } => {
            let records: Vec<EvidenceRecord> = records.iter().map(|p| read_json(p)).collect::<Result<_>>()?;
            emit(out.as_deref(), &pretty(&calibrate_baseline(&records)?)?)
        }
        Command::Norms { writers, max_sessions, seed, words, out } => {
            let cal = NormCalibration { writers, max_sessions, seed, ..NormCalibration::default() };
            let norms = norms_for(&cal, words)?;
            emit(out.as_deref(), &pretty(&norms)?)
        }
        Command::Consistency { records, baseline, norms } => {
            let records: Vec<EvidenceRecord> = records.iter().map(|p| read_json(p)).collect::<Result<_>>()?;
            let baseline: BaselineProfile = read_json(&baseline)?;
            let norms: PopulationNorms = match norms {
                Some(path) => read_json(&path)?,
                None => norms_for(&NormCalibration::default(), 1500)?,
            };
            print!("{}", pretty(&consistency_check(&records, &baseline, &norms)?)?);
            Ok(())
        }
        Command::Sweep { r, sessions, seed, words, out } => {
            let synth = Synthesizer::shared();
            let population = PopulationModel { words, ..PopulationModel::default() };
            let labelled = synthesize_population(synth, &population, sessions, seed, Execution::Parallel)?;
            let analyzer = Analyzer::new(synth.model().clone());
            let rows = sweep(&r, &labelled, &analyzer, Execution::Parallel)?;
            emit(out.as_deref(), &to_csv(&rows))
        }
    }
}

fn norms_for(cal: &NormCalibration, words: usize) -> Result<PopulationNorms> {
    let synth = Synthesizer::shared();
    let analyzer = Analyzer::new(synth.model().clone());
    let population = PopulationModel { words, ..PopulationModel::default() };
    calibrate_norms(synth, &analyzer, &population, cal, Execution::Parallel)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.code(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
