//! Every chapter listed in the book summary is compiled as a doctest.

use std::fs;
use std::path::Path;

#[test]
fn summary_chapters_are_doctested() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../book/src");
    let summary = fs::read_to_string(root.join("SUMMARY.md")).unwrap();
    let lib = fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let chapters: Vec<&str> = summary
        .lines()
        .filter_map(|l| l.split_once("](").map(|(_, r)| r.trim_end_matches(')')))
        .collect();
    assert!(chapters.len() >= 7);
    for ch in chapters {
        assert!(root.join(ch).exists(), "{ch} missing");
        assert!(
            lib.contains(&format!("book/src/{ch}")),
            "{ch} not included in lib.rs"
        );
    }
}
