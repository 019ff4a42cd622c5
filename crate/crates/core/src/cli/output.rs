//! CSV artifacts and the plain-text precision report.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::corpus::{Corpus, Repository};
use crate::error::{Error, Result};
use crate::eval::{tally_by_repository, DescriptiveStats, PrecisionCell};
use crate::groundtruth::{LabelMap, Qualification};
use crate::lsa::Reduction;
use crate::pipeline::CellResult;
use crate::preprocess::Vocabulary;
use crate::weights::{WeightMatrix, WeightScheme};

pub const INVENTORY: &str = "inventory.csv";
pub const QUALIFICATION: &str = "qualification.csv";
pub const PRECISION: &str = "precision.csv";
pub const DESCRIPTIVE: &str = "descriptive_stats.csv";
pub const LSA_SUMMARY: &str = "lsa_summary.csv";
pub const REPORT: &str = "report.txt";
pub const MAPPINGS_DIR: &str = "mappings";
pub const DISTRIBUTIONS_DIR: &str = "distributions";
pub const SPECTRA_DIR: &str = "spectra";
pub const GRIDS_DIR: &str = "grids";
pub const VOCAB_DIR: &str = "vocab";
pub const WEIGHTS_DIR: &str = "weights";

/// A real with 12 significant digits, positional notation for moderate
/// magnitudes and scientific notation otherwise.
pub fn format_real(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let exponent: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..12).contains(&exponent) {
        format!("{:.*}", (11 - exponent) as usize, x)
    } else {
        sci
    }
}

fn format_precision(p: Option<f64>) -> String {
    p.map_or_else(|| "NA".to_string(), format_real)
}

/// Write `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn csv_bytes<I, R>(header: &[&str], rows: I) -> Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer
        .into_inner()
        .map_err(|e| Error::io(PathBuf::from("<csv buffer>"), e.into_error()))
}

fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    write_atomic(path, &csv_bytes(header, rows)?)
}

pub fn write_inventory(path: &Path, corpus: &Corpus) -> Result<()> {
    write_csv(
        path,
        &["document_id", "kind", "repository", "segments", "references"],
        corpus.documents().iter().map(|d| {
            [
                d.id.clone(),
                d.kind.to_string(),
                d.repository.to_string(),
                d.segments.len().to_string(),
                d.references.len().to_string(),
            ]
        }),
    )
}

/// Vulnerability id → repository from an inventory file.
pub fn read_inventory(path: &Path) -> Result<BTreeMap<String, Repository>> {
    let mut reader = open_csv(path)?;
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let repository = Repository::parse(&record[2])
            .ok_or_else(|| Error::MissingArtifacts(format!("{}: unknown repository {:?}", path.display(), &record[2])))?;
        out.insert(record[0].to_string(), repository);
    }
    Ok(out)
}

pub fn write_qualification(path: &Path, qualifications: &[(String, Qualification)]) -> Result<()> {
    write_csv(
        path,
        &["vulnerability_id", "qualified", "cwe_id", "route", "reason"],
        qualifications.iter().map(|(id, q)| match q {
            Qualification::Qualified(label) => [
                id.clone(),
                "true".into(),
                label.cwe_id.clone(),
                label.route.to_string(),
                String::new(),
            ],
            Qualification::Disqualified(reason) => {
                [id.clone(), "false".into(), String::new(), String::new(), reason.to_string()]
            }
        }),
    )
}

pub fn write_mappings(path: &Path, cell: &CellResult, labels: &LabelMap) -> Result<()> {
    write_csv(
        path,
        &[
            "vulnerability_id",
            "predicted_cwe",
            "score",
            "tied",
            "tie_resolved_by",
            "ground_truth_cwe",
            "agree",
        ],
        cell.mappings.iter().map(|m| {
            let truth = labels.get(&m.vulnerability_id).map(|l| l.cwe_id.clone());
            let agree = truth
                .as_deref()
                .map(|t| (m.predicted_cwe.as_deref() == Some(t)).to_string())
                .unwrap_or_default();
            [
                m.vulnerability_id.clone(),
                m.predicted_cwe.clone().unwrap_or_default(),
                format_real(m.score),
                m.tied.to_string(),
                m.tie_resolved_by.to_string(),
                truth.unwrap_or_default(),
                agree,
            ]
        }),
    )
}

pub fn write_distribution(path: &Path, cell: &CellResult) -> Result<()> {
    write_csv(
        path,
        &["vulnerability_id", "max_similarity"],
        cell.distribution.iter().map(|(id, v)| [id.clone(), format_real(*v)]),
    )
}

pub fn write_spectrum(path: &Path, spectrum: &[f64], reduction: &Reduction) -> Result<()> {
    write_csv(
        path,
        &["index", "singular_value", "zeroed"],
        spectrum
            .iter()
            .zip(&reduction.zeroed)
            .enumerate()
            .map(|(i, (s, z))| [i.to_string(), format_real(*s), z.to_string()]),
    )
}

pub fn write_lsa_summary(path: &Path, cells: &[&CellResult]) -> Result<()> {
    write_csv(
        path,
        &["scheme", "k", "singular_values", "zeroed", "zeroed_fraction"],
        cells.iter().filter_map(|c| {
            let (spectrum, reduction) = c.spectrum.as_ref()?;
            Some([
                c.scheme.name().to_string(),
                c.k.to_string(),
                spectrum.len().to_string(),
                reduction.zeroed_count().to_string(),
                format_real(reduction.zeroed_fraction()),
            ])
        }),
    )
}

pub fn write_weakness_grid(path: &Path, cell: &CellResult) -> Result<()> {
    let mut header = vec!["cwe_id"];
    header.extend(cell.weakness_ids.iter().map(String::as_str));
    write_csv(
        path,
        &header,
        cell.weakness_ids.iter().enumerate().map(|(r, id)| {
            std::iter::once(id.clone())
                .chain(cell.weakness_grid.row(r).iter().map(|&v| format_real(v)))
                .collect::<Vec<_>>()
        }),
    )
}

pub fn write_vocabulary(path: &Path, vocabulary: &Vocabulary) -> Result<()> {
    write_csv(
        path,
        &["gram", "index", "total_count"],
        vocabulary
            .entries()
            .map(|(g, j, total)| [g.to_string(), j.to_string(), total.to_string()]),
    )
}

/// Sparse triplet dump, preceded by a `#` line naming the scheme and shape.
pub fn write_weight_matrix(path: &Path, weights: &WeightMatrix) -> Result<()> {
    let mut bytes = format!(
        "# scheme={} k={} N={} m_k={}\n",
        weights.scheme.name(),
        weights.k,
        weights.n_rows(),
        weights.n_cols
    )
    .into_bytes();
    bytes.extend(csv_bytes(
        &["i", "j", "value"],
        weights.rows.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .map(move |&(j, v)| [i.to_string(), j.to_string(), format_real(v)])
        }),
    )?);
    write_atomic(path, &bytes)
}

pub fn write_precision(path: &Path, cells: &[PrecisionCell]) -> Result<()> {
    write_csv(
        path,
        &["scheme", "k", "lsa", "repository", "same", "different", "precision"],
        cells.iter().map(|c| {
            [
                c.scheme.name().to_string(),
                c.k.to_string(),
                c.lsa.to_string(),
                c.repository.to_string(),
                c.counts.same.to_string(),
                c.counts.different.to_string(),
                format_precision(c.precision()),
            ]
        }),
    )
}

pub fn write_descriptive(path: &Path, stats: &[DescriptiveStats]) -> Result<()> {
    write_csv(
        path,
        &["k", "unique_grams", "avg_length", "avg_weakness_length", "avg_vulnerability_length"],
        stats.iter().map(|s| {
            [
                s.k.to_string(),
                s.unique_grams.to_string(),
                format_real(s.avg_length),
                format_real(s.avg_weakness_length),
                format_real(s.avg_vulnerability_length),
            ]
        }),
    )
}

fn scheme_rank(scheme: WeightScheme) -> usize {
    WeightScheme::ALL.iter().position(|&s| s == scheme).unwrap()
}

/// Report order: k, then scheme, then plain before LSA, then repository.
pub fn sort_cells(cells: &mut [PrecisionCell]) {
    cells.sort_by_key(|c| (c.k, scheme_rank(c.scheme), c.lsa, c.repository));
}

/// Fixed-width table with one row per (scheme, k, lsa, repository).
pub fn render_report(cells: &[PrecisionCell]) -> String {
    let header = ["scheme", "k", "lsa", "repository", "same", "different", "precision"];
    let rows: Vec<[String; 7]> = cells
        .iter()
        .map(|c| {
            [
                c.scheme.name().to_string(),
                c.k.to_string(),
                if c.lsa { "lsa" } else { "plain" }.to_string(),
                c.repository.to_string(),
                c.counts.same.to_string(),
                c.counts.different.to_string(),
                format_precision(c.precision()),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |fields: Vec<&str>| {
        let padded: Vec<String> = fields
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (f, w))| if i < 4 { format!("{f:<w$}") } else { format!("{f:>w$}") })
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in &rows {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}

fn open_csv(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|_| Error::MissingArtifacts(format!("{} not found", path.display())))?;
    Ok(csv::Reader::from_reader(file))
}

/// Parse a mapping file stem such as `tf-idf_k2_lsa`.
pub fn parse_cell_stem(stem: &str) -> Option<(WeightScheme, usize, bool)> {
    let (rest, variant) = stem.rsplit_once('_')?;
    let (slug, k) = rest.rsplit_once("_k")?;
    let lsa = match variant {
        "plain" => false,
        "lsa" => true,
        _ => return None,
    };
    Some((slug.parse().ok()?, k.parse().ok()?, lsa))
}

/// Recount every precision cell from the mapping CSVs and inventory in `out`.
pub fn precision_from_artifacts(out: &Path) -> Result<Vec<PrecisionCell>> {
    let repositories = read_inventory(&out.join(INVENTORY))?;
    let dir = out.join(MAPPINGS_DIR);
    let entries = fs::read_dir(&dir).map_err(|_| Error::MissingArtifacts(format!("{} not found", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(&dir, e))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(Error::MissingArtifacts(format!("no mapping files in {}", dir.display())));
    }

    let mut cells = Vec::new();
    for path in files {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let (scheme, k, lsa) = parse_cell_stem(stem)
            .ok_or_else(|| Error::MissingArtifacts(format!("unrecognized mapping file {}", path.display())))?;
        let mut reader = open_csv(&path)?;
        let mut observations = Vec::new();
        for record in reader.records() {
            let record = record?;
            if record[5].is_empty() {
                continue;
            }
            let repository = repositories.get(&record[0]).copied().ok_or_else(|| {
                Error::MissingArtifacts(format!("{} is not in {}", &record[0], INVENTORY))
            })?;
            observations.push((repository, &record[6] == "true"));
        }
        cells.extend(tally_by_repository(observations).into_iter().map(|(repository, counts)| PrecisionCell {
            scheme,
            k,
            lsa,
            repository,
            counts,
        }));
    }
    sort_cells(&mut cells);
    Ok(cells)
}
