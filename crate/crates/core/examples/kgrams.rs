//! Show each preprocessing step and the k-grams built from one segment.

use vulnmap::preprocess::{kgrams, normalize, porter_stem, stems, tokenize, trim, StopWordList};

fn main() {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "Improper Neutralization of Input During Web Page Generation ('Cross-site Scripting')".into());
    let stops = StopWordList::bundled();

    let normalized = normalize(&text);
    let tokens = tokenize(&normalized);
    let kept = trim(&tokens, &stops);
    let stemmed: Vec<String> = kept.iter().map(|t| porter_stem(t)).collect();
    assert_eq!(stemmed, stems(&text, &stops));

    println!("normalized: {normalized}");
    println!("tokens:     {tokens:?}");
    println!("trimmed:    {kept:?}");
    println!("stems:      {stemmed:?}");
    for k in 1..=3 {
        println!("k={k}: {:?}", kgrams(&stemmed, k));
    }
}
