//! Weigh a small count matrix under every scheme.

use std::collections::BTreeMap;

use vulnmap::preprocess::{CountMatrix, DocumentTermCounts};
use vulnmap::weights::{compute_stats, weigh, WeightScheme, DEFAULT_BETA};

fn main() -> vulnmap::Result<()> {
    let dense: [[u64; 4]; 3] = [[3, 0, 1, 2], [0, 2, 1, 0], [1, 1, 1, 5]];
    let counts = CountMatrix {
        k: 1,
        doc_ids: vec!["d0".into(), "d1".into(), "d2".into()],
        n_cols: 4,
        rows: dense
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let map: BTreeMap<usize, u64> = row.iter().enumerate().filter(|(_, &c)| c > 0).map(|(j, &c)| (j, c)).collect();
                DocumentTermCounts::from_map(i, map)
            })
            .collect(),
    };
    let stats = compute_stats(&counts, DEFAULT_BETA)?;
    println!("N = {}, average length = {:.3}", stats.n_docs, stats.avg_length);
    for scheme in WeightScheme::ALL {
        let w = weigh(&counts, &stats, scheme);
        println!("\n{scheme}");
        for i in 0..w.n_rows() {
            let row: Vec<String> = (0..4).map(|j| format!("{:8.4}", w.get(i, j))).collect();
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
