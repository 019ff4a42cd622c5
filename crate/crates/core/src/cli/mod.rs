//! Command-line front end: `ingest`, `run` and `report`.
//!
//! Settings come from an optional TOML file (`--config`) overridden by
//! flags. Relative paths in the file are resolved against the file's
//! directory; paths given as flags are used as-is.
//!
//! ```toml
//! manifest = "manifest.json"
//! nvd_mapping = "nvd_mapping.csv"
//! schemes = ["TF-IDF", "DLM-IDF"]
//! k = [1, 2, 3]
//! lsa = "both"
//! beta = 0.2
//! lsa_threshold = 1.0
//! out = "out"
//! ```

pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::corpus::{load_corpus, Corpus};
use crate::error::{Error, Result};
use crate::groundtruth::{allowed_cwe_set, estimation_subset, load_nvd_mapping, qualify_corpus, LabelMap, Qualification};
use crate::lsa::{ReductionPolicy, DEFAULT_THRESHOLD};
use crate::pipeline::{run_grid, GridResult, GridSpec, LsaMode};
use crate::preprocess::StopWordList;
use crate::weights::{weigh, WeightScheme, DEFAULT_BETA};

use output::*;

#[derive(Debug, Parser)]
#[command(name = "vulnmap", version, about = "Map vulnerability advisories to CWE weaknesses by text similarity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load the corpus and ground truth; write the inventory and qualification tables.
    Ingest(ConfigArgs),
    /// Run the weighting grid and write mappings, summaries and the precision report.
    Run(RunArgs),
    /// Rebuild the precision report from a previous run's output directory.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub nvd_mapping: Option<PathBuf>,
    /// Stop-word list, one word per line. Defaults to the bundled English list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Comma-separated weighting schemes, e.g. `tf-idf,dlm-idf`.
    #[arg(long, value_delimiter = ',')]
    pub schemes: Option<Vec<String>>,
    /// Comma-separated gram orders from 1, 2, 3.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<usize>>,
    /// off, on or both.
    #[arg(long)]
    pub lsa: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lsa_threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Also dump every weight matrix as sparse triplets.
    #[arg(long)]
    pub dump_weights: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// Output directory of a previous `run`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    manifest: Option<PathBuf>,
    nvd_mapping: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    schemes: Option<Vec<String>>,
    k: Option<Vec<usize>>,
    lsa: Option<String>,
    beta: Option<f64>,
    lsa_threshold: Option<f64>,
    out: Option<PathBuf>,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub nvd_mapping: PathBuf,
    pub stopwords: Option<PathBuf>,
    pub schemes: Vec<WeightScheme>,
    pub k: Vec<usize>,
    pub lsa: LsaMode,
    pub beta: f64,
    pub lsa_threshold: f64,
    pub out: PathBuf,
}

impl RunConfig {
    pub fn resolve(args: &ConfigArgs) -> Result<Self> {
        let (file, base) = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::MissingFile {
                    path: path.clone(),
                    source,
                })?;
                let file: ConfigFile = toml::from_str(&text)
                    .map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))?;
                (file, path.parent().unwrap_or(Path::new("")).to_path_buf())
            }
            None => (ConfigFile::default(), PathBuf::new()),
        };
        let from_file = |p: Option<PathBuf>| p.map(|p| base.join(p));
        let required = |flag: &Option<PathBuf>, file: Option<PathBuf>, name: &str| {
            flag.clone()
                .or(from_file(file))
                .ok_or_else(|| Error::Config(format!("--{name} is required")))
        };

        let schemes = match args.schemes.clone().or(file.schemes) {
            Some(names) => names
                .iter()
                .map(|n| n.trim().parse::<WeightScheme>().map_err(|_| Error::Config(format!("unknown scheme {n:?}"))))
                .collect::<Result<Vec<_>>>()?,
            None => WeightScheme::ALL.to_vec(),
        };
        let lsa = match args.lsa.clone().or(file.lsa) {
            Some(s) => LsaMode::parse(&s).ok_or_else(|| Error::Config(format!("--lsa must be off, on or both, got {s:?}")))?,
            None => LsaMode::Off,
        };
        let config = RunConfig {
            manifest: required(&args.manifest, file.manifest, "manifest")?,
            nvd_mapping: required(&args.nvd_mapping, file.nvd_mapping, "nvd-mapping")?,
            stopwords: args.stopwords.clone().or(from_file(file.stopwords)),
            schemes,
            k: args.k.clone().or(file.k).unwrap_or_else(|| vec![1, 2, 3]),
            lsa,
            beta: args.beta.or(file.beta).unwrap_or(DEFAULT_BETA),
            lsa_threshold: args.lsa_threshold.or(file.lsa_threshold).unwrap_or(DEFAULT_THRESHOLD),
            out: required(&args.out, file.out, "out")?,
        };
        config.grid_spec()?.validate()?;
        Ok(config)
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        Ok(GridSpec {
            schemes: self.schemes.clone(),
            ks: self.k.clone(),
            lsa: self.lsa,
            beta: self.beta,
            policy: ReductionPolicy::new(self.lsa_threshold)?,
        })
    }

    pub fn stop_words(&self) -> Result<StopWordList> {
        match &self.stopwords {
            Some(path) => StopWordList::load(path),
            None => Ok(StopWordList::bundled()),
        }
    }
}

/// Corpus and ground truth, as produced by `ingest`.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub corpus: Corpus,
    pub qualifications: Vec<(String, Qualification)>,
    pub labels: LabelMap,
}

pub fn ingest(config: &RunConfig) -> Result<Ingested> {
    let mapping = load_nvd_mapping(&config.nvd_mapping)?;
    let allowed = allowed_cwe_set(&mapping)?;
    let corpus = load_corpus(&config.manifest, &allowed)?;
    let qualifications = qualify_corpus(&corpus, &mapping, &allowed);
    let labels = estimation_subset(&qualifications);
    Ok(Ingested {
        corpus,
        qualifications,
        labels,
    })
}

fn write_ingest(out: &Path, ingested: &Ingested) -> Result<()> {
    write_inventory(&out.join(INVENTORY), &ingested.corpus)?;
    write_qualification(&out.join(QUALIFICATION), &ingested.qualifications)
}

pub fn cmd_ingest(config: &RunConfig) -> Result<Ingested> {
    let ingested = ingest(config)?;
    write_ingest(&config.out, &ingested)?;
    Ok(ingested)
}

/// Run the grid and write every artifact; returns the rendered report.
pub fn cmd_run(config: &RunConfig, dump_weights: bool) -> Result<String> {
    let spec = config.grid_spec()?;
    let stops = config.stop_words()?;
    let ingested = ingest(config)?;
    let result = run_grid(&ingested.corpus, &ingested.labels, &stops, &spec)?;
    write_run(&config.out, &ingested, &result)?;
    if dump_weights {
        for level in &result.levels {
            for &scheme in &spec.schemes {
                let weights = weigh(&level.counts, &level.stats, scheme);
                let name = format!("{}_k{}.csv", scheme.slug(), level.vocabulary.k());
                write_weight_matrix(&config.out.join(WEIGHTS_DIR).join(name), &weights)?;
            }
        }
    }
    std::fs::read_to_string(config.out.join(REPORT)).map_err(|e| Error::io(config.out.join(REPORT), e))
}

/// Write the artifacts of a finished grid run under `out`.
pub fn write_run(out: &Path, ingested: &Ingested, result: &GridResult) -> Result<()> {
    write_ingest(out, ingested)?;
    for level in &result.levels {
        write_vocabulary(&out.join(VOCAB_DIR).join(format!("k{}.csv", level.vocabulary.k())), &level.vocabulary)?;
    }
    let mut descriptive: Vec<_> = result.levels.iter().map(|l| l.descriptive.clone()).collect();
    descriptive.sort_by_key(|d| d.k);
    write_descriptive(&out.join(DESCRIPTIVE), &descriptive)?;

    for cell in &result.cells {
        let file = format!("{}.csv", cell.file_stem());
        write_mappings(&out.join(MAPPINGS_DIR).join(&file), cell, &ingested.labels)?;
        write_distribution(&out.join(DISTRIBUTIONS_DIR).join(&file), cell)?;
        write_weakness_grid(&out.join(GRIDS_DIR).join(&file), cell)?;
        if let Some((spectrum, reduction)) = &cell.spectrum {
            write_spectrum(&out.join(SPECTRA_DIR).join(&file), spectrum, reduction)?;
        }
    }
    let mut lsa_cells: Vec<_> = result.cells.iter().filter(|c| c.lsa).collect();
    if !lsa_cells.is_empty() {
        lsa_cells.sort_by_key(|c| (c.k, WeightScheme::ALL.iter().position(|&s| s == c.scheme)));
        write_lsa_summary(&out.join(LSA_SUMMARY), &lsa_cells)?;
    }

    let mut cells: Vec<_> = result.precision_cells().cloned().collect();
    sort_cells(&mut cells);
    write_precision(&out.join(PRECISION), &cells)?;
    write_atomic(&out.join(REPORT), render_report(&cells).as_bytes())
}

/// The report recomputed from persisted mapping files.
pub fn cmd_report(out: &Path) -> Result<String> {
    Ok(render_report(&precision_from_artifacts(out)?))
}

/// Run a parsed command line, printing summaries to `stdout`.
pub fn execute(cli: Cli, stdout: &mut impl Write) -> Result<()> {
    let print = |stdout: &mut dyn Write, text: &str| {
        stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))
    };
    match cli.command {
        Command::Ingest(args) => {
            let config = RunConfig::resolve(&args)?;
            let ingested = cmd_ingest(&config)?;
            let summary = format!(
                "{} documents ({} weaknesses, {} vulnerabilities), {} qualified\n",
                ingested.corpus.len(),
                ingested.corpus.n_weaknesses(),
                ingested.corpus.n_vulnerabilities(),
                ingested.labels.len()
            );
            print(stdout, &summary)
        }
        Command::Run(args) => {
            let config = RunConfig::resolve(&args.config)?;
            let report = cmd_run(&config, args.dump_weights)?;
            print(stdout, &report)
        }
        Command::Report(args) => print(stdout, &cmd_report(&args.out)?),
    }
}

/// Exit status for a result: 0 on success, 2 for input errors, 1 otherwise.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) if e.is_input_error() => 2,
        Err(_) => 1,
    }
}
