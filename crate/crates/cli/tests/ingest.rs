use std::path::PathBuf;

use multifuse::ingest::{read_citation_edges, read_count_table, read_distribution_table, IngestError, ReadOptions};
use multifuse_core::counts::filter_vocabulary;
use multifuse_core::similarity::relative_frequencies;
use tempfile::TempDir;

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn opts() -> ReadOptions {
    ReadOptions::default()
}

#[test]
fn citation_pairs_become_incidence() {
    let d = TempDir::new().unwrap();
    let c = read_citation_edges(&file(&d, "e.csv", "a1,r1\na1,r2\na2,r2\n"), &opts()).unwrap();
    let b = c.incidence;
    assert_eq!(b.articles(), ["a1", "a2"]);
    assert_eq!(b.features(), ["r1", "r2"]);
    assert_eq!(b.row(0), [0, 1]);
    assert_eq!(b.row(1), [1]);
}

#[test]
fn duplicate_pairs_collapse() {
    let d = TempDir::new().unwrap();
    let c = read_citation_edges(&file(&d, "e.csv", "a1,r1\na1,r1\n"), &opts()).unwrap();
    assert_eq!(c.incidence.row(0), [0]);
}

#[test]
fn line_order_does_not_matter() {
    let d = TempDir::new().unwrap();
    let lines = ["a1,r1", "a2,r2", "a1,r3", "a3,r1", "a2,r1", "a1,r1"];
    let base = read_citation_edges(&file(&d, "a.csv", &lines.join("\n")), &opts()).unwrap().incidence;
    let mut rev = lines;
    rev.reverse();
    let other = read_citation_edges(&file(&d, "b.csv", &rev.join("\n")), &opts()).unwrap().incidence;
    // Ids follow first appearance, so compare reference sets per article.
    for (i, a) in base.articles().iter().enumerate() {
        let j = other.articles().iter().position(|x| x == a).unwrap();
        let mut x: Vec<&str> = base.row(i).iter().map(|&f| base.features()[f].as_str()).collect();
        let mut y: Vec<&str> = other.row(j).iter().map(|&f| other.features()[f].as_str()).collect();
        x.sort();
        y.sort();
        assert_eq!(x, y);
    }
    assert_eq!(base.n_articles(), other.n_articles());
}

#[test]
fn article_without_references_is_reported() {
    let d = TempDir::new().unwrap();
    let p = file(&d, "e.csv", "a1,r1\na2,\na3\n");
    match read_citation_edges(&p, &opts()) {
        Err(IngestError::Model { source: multifuse_core::Error::EmptyArticle(ids), .. }) => {
            assert_eq!(ids, ["a2", "a3"])
        }
        other => panic!("unexpected {other:?}"),
    }
    let c = read_citation_edges(&p, &ReadOptions { drop_empty: true, ..opts() }).unwrap();
    assert_eq!(c.dropped, ["a2", "a3"]);
    assert_eq!(c.incidence.articles(), ["a1"]);
}

#[test]
fn parse_errors_carry_file_line_and_text() {
    let d = TempDir::new().unwrap();
    let p = file(&d, "e.csv", "a1,r1\na2,r2,extra\n");
    let err = read_citation_edges(&p, &opts()).unwrap_err();
    match &err {
        IngestError::Parse { file, line, text, .. } => {
            assert_eq!(file, &p);
            assert_eq!(*line, 2);
            assert_eq!(text, "a2,r2,extra");
        }
        other => panic!("unexpected {other:?}"),
    }
    let msg = err.to_string();
    assert!(msg.contains("e.csv:2") && msg.contains("a2,r2,extra"), "{msg}");
}

#[test]
fn missing_file_is_an_io_error() {
    let d = TempDir::new().unwrap();
    let err = read_citation_edges(&d.path().join("nope.csv"), &opts()).unwrap_err();
    assert!(matches!(err, IngestError::Io { .. }));
}

#[test]
fn tab_separated_input() {
    let d = TempDir::new().unwrap();
    let p = file(&d, "e.tsv", "article_id\treference_id\na1\tr1, with comma\n");
    let c = read_citation_edges(&p, &opts().tsv(true)).unwrap();
    assert_eq!(c.incidence.features(), ["r1, with comma"]);
}

#[test]
fn comments_blank_lines_and_header_are_skipped() {
    let d = TempDir::new().unwrap();
    let p = file(&d, "c.csv", "article_id,term,count\n# note\n\na1,w1,2\n");
    let t = read_count_table(&p, &opts()).unwrap();
    assert_eq!(t.count(0, 0), 2);
}

#[test]
fn repeated_counts_sum() {
    let d = TempDir::new().unwrap();
    let t = read_count_table(&file(&d, "c.csv", "a1,w1,2\na1,w1,3\n"), &opts()).unwrap();
    assert_eq!(t.count(0, 0), 5);
}

#[test]
fn zero_only_article_fails_normalization() {
    let d = TempDir::new().unwrap();
    let t = read_count_table(&file(&d, "c.csv", "a1,w1,0\n"), &opts()).unwrap();
    assert_eq!(t.empty_rows(), ["a1"]);
    assert!(relative_frequencies(&t).is_err());
}

#[test]
fn negative_count_is_rejected() {
    let d = TempDir::new().unwrap();
    let p = file(&d, "c.csv", "a1,w1,2\na1,w2,-2\n");
    match read_count_table(&p, &opts()) {
        Err(IngestError::NegativeCount { line, text, .. }) => {
            assert_eq!(line, 2);
            assert_eq!(text, "a1,w2,-2");
        }
        other => panic!("unexpected {other:?}"),
    }
    let bad = file(&d, "d.csv", "a1,w1,2.5\n");
    assert!(matches!(read_count_table(&bad, &opts()), Err(IngestError::Parse { .. })));
}

#[test]
fn vocabulary_filter_on_read_counts() {
    let d = TempDir::new().unwrap();
    // w_rare in 2 of 10 docs, w_all in all 10, w_mid in 5.
    let mut text = String::new();
    for i in 0..10 {
        text += &format!("d{i},w_all,1\n");
        if i < 2 {
            text += &format!("d{i},w_rare,1\n");
        }
        if i < 5 {
            text += &format!("d{i},w_mid,1\n");
        }
    }
    let t = read_count_table(&file(&d, "c.csv", &text), &opts()).unwrap();
    let f = filter_vocabulary(&t, 3, 0.95).unwrap();
    assert_eq!(f.table.term_ids(), ["w_mid"]);
    let same = filter_vocabulary(&t, 0, 1.0).unwrap();
    assert_eq!(same.table, t);
}

#[test]
fn distributions_are_renormalized() {
    let d = TempDir::new().unwrap();
    let ok = read_distribution_table(&file(&d, "a.csv", "a1,t1,0.5\na1,t2,0.5\n"), &opts()).unwrap();
    assert_eq!(ok.matrix.row(0), [(0, 0.5), (1, 0.5)]);
    assert!(ok.renormalized.is_empty());
    let scaled = read_distribution_table(&file(&d, "b.csv", "a1,t1,2\na1,t2,2\n"), &opts()).unwrap();
    assert_eq!(scaled.matrix.row(0), [(0, 0.5), (1, 0.5)]);
    assert_eq!(scaled.renormalized, [("a1".to_string(), 4.0)]);
}

#[test]
fn zero_distribution_row_is_rejected() {
    let d = TempDir::new().unwrap();
    match read_distribution_table(&file(&d, "a.csv", "a1,t1,0\n"), &opts()) {
        Err(IngestError::Model { source: multifuse_core::Error::ZeroRow(id), .. }) => assert_eq!(id, "a1"),
        other => panic!("unexpected {other:?}"),
    }
    let neg = file(&d, "b.csv", "a1,t1,-0.5\n");
    assert!(matches!(read_distribution_table(&neg, &opts()), Err(IngestError::Parse { .. })));
}

#[test]
fn distribution_rows_always_sum_to_one() {
    let d = TempDir::new().unwrap();
    let mut text = String::new();
    for i in 0..50 {
        for f in 0..(1 + i % 7) {
            text += &format!("a{i},f{f},{}\n", 0.1 + (i * 31 + f * 17) as f64 % 3.7);
        }
    }
    let m = read_distribution_table(&file(&d, "a.csv", &text), &opts()).unwrap().matrix;
    for i in 0..m.n_rows() {
        let s: f64 = m.row(i).iter().map(|&(_, w)| w).sum();
        assert!((s - 1.0).abs() <= 1e-9);
    }
}
