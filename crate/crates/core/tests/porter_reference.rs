use stc::preprocess::porter_stem;

#[test]
fn matches_reference_vocabulary() {
    let voc = include_str!("data/porter/voc.txt");
    let out = include_str!("data/porter/output.txt");
    let pairs: Vec<_> = voc.lines().zip(out.lines()).collect();
    assert_eq!(pairs.len(), 23_531);
    let wrong: Vec<_> = pairs
        .iter()
        .filter(|(w, s)| porter_stem(w) != *s)
        .take(20)
        .collect();
    assert!(wrong.is_empty(), "mismatches: {wrong:?}");
}
