//! Decompose a similarity matrix and drop the weak latent dimensions.

use nalgebra::DMatrix;
use vulnmap::lsa::{lsa_pipeline, svd, ReductionPolicy};
use vulnmap::similarity::SimilarityMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let values = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.8, 0.1, 0.0, //
            0.8, 1.0, 0.2, 0.0, //
            0.1, 0.2, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    );
    let spectrum = svd(&values)?;
    println!("singular values: {:?}", spectrum.singular_values);

    let ids = (0..4).map(|i| format!("d{i}")).collect();
    let similarity = SimilarityMatrix::new(ids, values)?;
    let threshold = std::env::args().nth(1).map_or(Ok(1.0), |s| s.parse())?;
    let out = lsa_pipeline(&similarity, &ReductionPolicy::new(threshold)?)?;
    println!(
        "threshold {threshold}: zeroed {} of {}",
        out.reduction.zeroed_count(),
        out.spectrum.len()
    );
    println!("reduced similarity:{:.4}", out.matrix.values());
    Ok(())
}
