//! Run the whole grid over the bundled fixture corpus and print the report.
//!
//! ```text
//! cargo run --example full_grid [output-dir]
//! ```

use std::path::PathBuf;

use vulnmap::cli::{cmd_run, RunConfig};
use vulnmap::pipeline::LsaMode;
use vulnmap::weights::{WeightScheme, DEFAULT_BETA};

fn main() -> vulnmap::Result<()> {
    let fixtures = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("vulnmap-full-grid"));
    let config = RunConfig {
        manifest: fixtures.join("manifest.json"),
        nvd_mapping: fixtures.join("nvd_mapping.csv"),
        stopwords: None,
        schemes: WeightScheme::ALL.to_vec(),
        k: vec![1, 2, 3],
        lsa: LsaMode::Both,
        beta: DEFAULT_BETA,
        lsa_threshold: 1.0,
        out: out.clone(),
    };
    print!("{}", cmd_run(&config, false)?);
    eprintln!("artifacts written to {}", out.display());
    Ok(())
}
