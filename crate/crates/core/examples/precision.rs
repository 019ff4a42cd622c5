//! Precision per repository for a handful of mappings.

use vulnmap::eval::{tally_by_repository, PrecisionCounts};
use vulnmap::corpus::Repository;

fn main() {
    let outcomes = [
        (Repository::Maven, true),
        (Repository::Maven, true),
        (Repository::Pip, false),
        (Repository::Pip, true),
        (Repository::Npm, true),
    ];
    for (scope, counts) in tally_by_repository(outcomes) {
        let shown = counts.precision().map_or("NA".to_string(), |p| format!("{p:.4}"));
        println!("{:<9} same {} different {} precision {shown}", scope.as_str(), counts.same, counts.different);
    }
    let total = PrecisionCounts { same: 3, different: 1 } + PrecisionCounts { same: 1, different: 0 };
    println!("combined: {:?}", total.precision());
}
