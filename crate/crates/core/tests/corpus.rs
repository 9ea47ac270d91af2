use std::path::PathBuf;

use latspi::corpus::run_corpus;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

#[test]
fn corpus_verdicts_match_expectations() {
    let report = run_corpus(&corpus_dir()).unwrap();
    print!("{}", report.render_text());
    assert!(!report.cases.is_empty());
    assert_eq!(report.failed(), 0);
}
