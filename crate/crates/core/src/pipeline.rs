//! The full experiment grid: every weighting scheme and gram order, with
//! and without LSA, over one corpus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::eval::{
    descriptive_stats, per_repository_precision, similarity_distribution, weakness_similarity_grid, DescriptiveStats,
    PrecisionCell,
};
use crate::groundtruth::LabelMap;
use crate::lsa::{lsa_pipeline, Reduction, ReductionPolicy};
use crate::preprocess::{CountMatrix, StemmedCorpus, StopWordList, Vocabulary};
use crate::similarity::{cosine_matrix, extract_vuln_by_weakness, map_vulnerabilities, MappingMatrix, VulnMapping};
use crate::weights::{compute_stats, weigh, CorpusStats, WeightMatrix, WeightScheme, DEFAULT_BETA};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LsaMode {
    #[default]
    Off,
    On,
    Both,
}

impl LsaMode {
    /// The LSA settings this mode runs, plain first.
    pub fn variants(self) -> &'static [bool] {
        match self {
            LsaMode::Off => &[false],
            LsaMode::On => &[true],
            LsaMode::Both => &[false, true],
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "off" => Some(LsaMode::Off),
            "on" => Some(LsaMode::On),
            "both" => Some(LsaMode::Both),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub schemes: Vec<WeightScheme>,
    pub ks: Vec<usize>,
    pub lsa: LsaMode,
    pub beta: f64,
    pub policy: ReductionPolicy,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            schemes: WeightScheme::ALL.to_vec(),
            ks: vec![1, 2, 3],
            lsa: LsaMode::Off,
            beta: DEFAULT_BETA,
            policy: ReductionPolicy::default(),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::Config("no weighting scheme selected".into()));
        }
        if self.ks.is_empty() {
            return Err(Error::Config("no gram order selected".into()));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::Config(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        if let Some(k) = self.ks.iter().find(|k| !(1..=3).contains(*k)) {
            return Err(Error::Config(format!("gram order must be 1, 2 or 3, got {k}")));
        }
        Ok(())
    }
}

/// Everything computed once per gram order.
#[derive(Debug, Clone)]
pub struct GramLevel {
    pub vocabulary: Vocabulary,
    pub counts: CountMatrix,
    pub stats: CorpusStats,
    pub descriptive: DescriptiveStats,
}

/// Results of one (scheme, k, lsa) grid cell.
#[derive(Debug, Clone)]
pub struct CellResult {
    pub scheme: WeightScheme,
    pub k: usize,
    pub lsa: bool,
    pub mapping_matrix: MappingMatrix,
    pub mappings: Vec<VulnMapping>,
    pub distribution: Vec<(String, f64)>,
    /// Singular values before reduction and the reduction applied; LSA cells only.
    pub spectrum: Option<(Vec<f64>, Reduction)>,
    pub weakness_ids: Vec<String>,
    pub weakness_grid: DMatrix<f64>,
    pub precision: Vec<PrecisionCell>,
}

impl CellResult {
    /// File stem used for this cell's artifacts, e.g. `tf-idf_k1_plain`.
    pub fn file_stem(&self) -> String {
        cell_file_stem(self.scheme, self.k, self.lsa)
    }
}

pub fn cell_file_stem(scheme: WeightScheme, k: usize, lsa: bool) -> String {
    format!("{}_k{}_{}", scheme.slug(), k, if lsa { "lsa" } else { "plain" })
}

#[derive(Debug, Clone)]
pub struct GridResult {
    /// One entry per requested k, in request order.
    pub levels: Vec<GramLevel>,
    /// Cells ordered by k, then scheme, then plain before LSA.
    pub cells: Vec<CellResult>,
}

impl GridResult {
    pub fn cell(&self, scheme: WeightScheme, k: usize, lsa: bool) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.scheme == scheme && c.k == k && c.lsa == lsa)
    }

    pub fn precision_cells(&self) -> impl Iterator<Item = &PrecisionCell> {
        self.cells.iter().flat_map(|c| c.precision.iter())
    }
}

pub fn build_level(corpus: &Corpus, stemmed: &StemmedCorpus, k: usize, beta: f64) -> Result<GramLevel> {
    let vocabulary = stemmed.vocabulary(k)?;
    let counts = stemmed.counts(&vocabulary);
    let stats = compute_stats(&counts, beta)?;
    let descriptive = descriptive_stats(corpus, &vocabulary, &counts);
    Ok(GramLevel {
        vocabulary,
        counts,
        stats,
        descriptive,
    })
}

/// Map, summarize and score one weight matrix.
pub fn evaluate_cell(
    corpus: &Corpus,
    labels: &LabelMap,
    weights: &WeightMatrix,
    lsa: bool,
    policy: &ReductionPolicy,
) -> Result<CellResult> {
    let cosine = cosine_matrix(weights);
    let (similarity, spectrum) = if lsa {
        let out = lsa_pipeline(&cosine, policy)?;
        (out.matrix, Some((out.spectrum, out.reduction)))
    } else {
        (cosine, None)
    };
    let mapping_matrix = extract_vuln_by_weakness(&similarity, corpus)?;
    let mappings = map_vulnerabilities(&mapping_matrix, labels);
    let distribution = similarity_distribution(&mapping_matrix);
    let (weakness_ids, weakness_grid) = weakness_similarity_grid(&similarity, corpus);
    let precision = per_repository_precision(&mappings, labels, corpus, weights.scheme, weights.k, lsa);
    Ok(CellResult {
        scheme: weights.scheme,
        k: weights.k,
        lsa,
        mapping_matrix,
        mappings,
        distribution,
        spectrum,
        weakness_ids,
        weakness_grid,
        precision,
    })
}

/// Run every cell of `spec` over `corpus`.
pub fn run_grid(corpus: &Corpus, labels: &LabelMap, stops: &StopWordList, spec: &GridSpec) -> Result<GridResult> {
    spec.validate()?;
    let stemmed = StemmedCorpus::new(corpus, stops);
    let levels = spec
        .ks
        .iter()
        .map(|&k| build_level(corpus, &stemmed, k, spec.beta))
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(&GramLevel, WeightScheme, bool)> = levels
        .iter()
        .flat_map(|level| {
            spec.schemes
                .iter()
                .flat_map(move |&scheme| spec.lsa.variants().iter().map(move |&lsa| (level, scheme, lsa)))
        })
        .collect();
    let cells = jobs
        .into_par_iter()
        .map(|(level, scheme, lsa)| {
            let weights = weigh(&level.counts, &level.stats, scheme);
            evaluate_cell(corpus, labels, &weights, lsa, &spec.policy)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridResult { levels, cells })
}
