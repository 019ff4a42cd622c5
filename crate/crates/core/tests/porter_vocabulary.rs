use vulnmap::preprocess::porter_stem;

const VOC: &str = include_str!("data/porter_voc.txt");
const OUTPUT: &str = include_str!("data/porter_output.txt");

#[test]
fn matches_published_vocabulary() {
    let words: Vec<&str> = VOC.lines().collect();
    let stems: Vec<&str> = OUTPUT.lines().collect();
    assert_eq!(words.len(), stems.len());
    let mismatches: Vec<String> = words
        .iter()
        .zip(&stems)
        .filter(|(w, s)| porter_stem(w) != **s)
        .map(|(w, s)| format!("{w}: got {}, want {s}", porter_stem(w)))
        .collect();
    assert!(mismatches.is_empty(), "{} mismatches, first: {:?}", mismatches.len(), &mismatches[..mismatches.len().min(10)]);
}
