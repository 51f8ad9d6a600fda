use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_leftcorner"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TRAIN: &str = "\
(S (NP (DT the) (NN dog)) (VP (VBD saw) (NP (DT a) (NN man))))
(S (NP (PRP he)) (VP (VBD saw) (NP (DT the) (NN dog))))
(S (NP (DT a) (NN man)) (VP (VBD slept)))
";

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn induce_counts_rules() {
    let dir = TempDir::new().unwrap();
    let train = write(&dir, "train.mrg", TRAIN);
    let model = dir.path().join("m.lcm");
    let report = ok(&["induce", "-i", s(&train), "-o", s(&model), "--kind", "pcfg"]);
    assert!(report.contains("trees\t3"));
    assert!(report.contains("rules\t6"));
    let text = fs::read_to_string(&model).unwrap();
    assert!(text.starts_with("leftcorner-model\t1\tpcfg\tstart=ROOT\tbinarized=0"));
    for line in [
        "RULE\tROOT\tS\t3",
        "RULE\tS\tNP\tVP\t3",
        "RULE\tNP\tDT\tNN\t4",
        "RULE\tNP\tPRP\t1",
        "RULE\tVP\tVBD\tNP\t2",
        "RULE\tVP\tVBD\t1",
    ] {
        assert!(text.lines().any(|l| l == line), "missing {line}");
    }
    let top = report
        .lines()
        .find(|l| l.starts_with("NP -> DT NN"))
        .unwrap();
    assert!(top.contains(" 4") && top.contains("0.80"));
}

#[test]
fn induce_rejects_empty_corpus() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.mrg", "");
    let out = run(&["induce", "-i", s(&empty), "-o", s(&dir.path().join("m"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty training corpus"));
}

#[test]
fn binarization_follows_unary_folding() {
    let dir = TempDir::new().unwrap();
    let train = write(&dir, "t.mrg", "(S (NP (DT a) (JJ b) (NN c)) (VP (VB d)))\n");
    let model = dir.path().join("m.lcm");
    ok(&[
        "induce",
        "-i",
        s(&train),
        "-o",
        s(&model),
        "--kind",
        "pcfg",
        "--binarize",
        "--unary",
        "fold_up",
    ]);
    let text = fs::read_to_string(&model).unwrap();
    let golden = "leftcorner-model\t1\tpcfg\tstart=ROOT\tbinarized=1
RULE\tNP\tDT\tNP@DT\t1
RULE\tNP@DT\tJJ\tNN\t1
RULE\tROOT\tS\t1
RULE\tS\tNP\tVB\t1
";
    assert_eq!(text, golden);
}

fn trained(dir: &TempDir, kind: &str) -> PathBuf {
    let train = write(dir, "train.mrg", TRAIN);
    let model = dir.path().join(format!("{kind}.lcm"));
    ok(&[
        "induce",
        "-i",
        s(&train),
        "-o",
        s(&model),
        "--kind",
        kind,
        "--top",
        "0",
    ]);
    model
}

#[test]
fn parse_writes_one_block_per_line() {
    let dir = TempDir::new().unwrap();
    let model = trained(&dir, "plcg");
    let input = write(&dir, "in.txt", "DT NN VBD\nDT XX\nPRP VBD DT NN\n");
    let out = ok(&["parse", "-m", s(&model), "-i", s(&input)]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines,
        vec![
            "(ROOT (S (NP (DT DT) (NN NN)) (VP (VBD VBD))))",
            "-NOPARSE-",
            "(ROOT (S (NP (PRP PRP)) (VP (VBD VBD) (NP (DT DT) (NN NN)))))",
        ]
    );
}

#[test]
fn parse_relexicalizes_tagged_input() {
    let dir = TempDir::new().unwrap();
    let model = trained(&dir, "plcg");
    let input = write(&dir, "in.txt", "a/DT cat/NN slept/VBD\n");
    let out = ok(&[
        "parse",
        "-m",
        s(&model),
        "-i",
        s(&input),
        "--format",
        "tagged",
        "--scores",
    ]);
    let (tree, lp) = out.trim_end().split_once('\t').unwrap();
    assert_eq!(tree, "(ROOT (S (NP (DT a) (NN cat)) (VP (VBD slept))))");
    assert!(lp.parse::<f64>().unwrap() < 0.0);
}

#[test]
fn pcfg_and_lc_engines_agree() {
    let dir = TempDir::new().unwrap();
    let pcfg = trained(&dir, "pcfg");
    let plcg = trained(&dir, "plcg");
    let input = write(&dir, "in.txt", "DT NN VBD DT NN\nPRP VBD\nDT NN VBD\n");
    let a = ok(&["parse", "-m", s(&pcfg), "-i", s(&input), "--engine", "pcfg"]);
    let b = ok(&[
        "parse",
        "-m",
        s(&plcg),
        "-i",
        s(&input),
        "--engine",
        "lc",
        "--beam",
        "100000",
    ]);
    assert_eq!(a, b);
    let out = run(&["parse", "-m", s(&pcfg), "-i", s(&input), "--engine", "lc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("c.mrg");
    ok(&["gen-corpus", "--seed", "5", "-n", "200", "-o", s(&corpus)]);
    let model = dir.path().join("m.lcm");
    ok(&[
        "induce",
        "-i",
        s(&corpus),
        "-o",
        s(&model),
        "--kind",
        "plcg",
    ]);
    let test = dir.path().join("t.mrg");
    ok(&["gen-corpus", "--seed", "6", "-n", "40", "-o", s(&test)]);
    let base = [
        "parse",
        "-m",
        s(&model),
        "-i",
        s(&test),
        "--format",
        "trees",
        "--scores",
    ];
    let one = ok(&[&base[..], &["--threads", "1"]].concat());
    let four = ok(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one, four);
    assert_eq!(one.lines().count(), 40);
}

#[test]
fn eval_identical_files_is_perfect() {
    let dir = TempDir::new().unwrap();
    let gold = write(&dir, "g.mrg", TRAIN);
    let r = json(&ok(&["eval", s(&gold), s(&gold), "--json"]));
    for key in [
        "precision",
        "recall",
        "labelled_precision",
        "labelled_recall_plus1",
        "zero_cb_rate",
    ] {
        assert_eq!(r[key], 1.0, "{key}");
    }
    assert_eq!(r["avg_cbs"], 0.0);
    assert_eq!(r["sentence_count"], 3);
    let table = ok(&["eval", s(&gold), s(&gold)]);
    assert!(table.contains("Labelled Precision +1"));
}

#[test]
fn eval_attachment_fixture() {
    let dir = TempDir::new().unwrap();
    let gold = write(
        &dir,
        "g.mrg",
        "(VP saw (NP the (N' man (PP with (NP a (N' telescope))))))\n",
    );
    let test = write(
        &dir,
        "t.mrg",
        "(VP saw (NP the (N' man)) (PP with (NP a (N' telescope))))\n",
    );
    let r = json(&ok(&["eval", s(&gold), s(&test), "--json"]));
    // 4 test and 5 gold brackets, 3 shared, 1 crossing
    assert_eq!(r["labelled_precision"], 0.75);
    assert_eq!(r["labelled_recall"], 0.6);
    assert_eq!(r["avg_cbs"], 1.0);
    assert_eq!(r["labelled_precision_plus1"], 4.0 / 6.0);
}

#[test]
fn eval_length_cutoff() {
    let dir = TempDir::new().unwrap();
    let gold = write(
        &dir,
        "g.mrg",
        "(S (A a) (B b))\n(S (A a) (B b) (C c))\n(S (A a) (B b) (C c) (D d))\n(S (A a) (B b))\n",
    );
    let r = json(&ok(&[
        "eval",
        s(&gold),
        s(&gold),
        "--json",
        "--max-length",
        "3",
    ]));
    assert_eq!(r["retained_fraction"], 0.75);
    assert_eq!(r["sentence_count"], 3);
    let table = ok(&["eval", s(&gold), s(&gold), "--max-length", "2"]);
    assert!(table.lines().next().unwrap().contains("50.0%"));
}

#[test]
fn eval_counts_missing_parses_and_rejects_misalignment() {
    let dir = TempDir::new().unwrap();
    let gold = write(
        &dir,
        "g.mrg",
        "(S (NP (A a) (B b)) (C c))\n(S (A a) (B b))\n",
    );
    let test = write(&dir, "t.mrg", "-NOPARSE-\n(S (A a) (B b))\n");
    let r = json(&ok(&["eval", s(&gold), s(&test), "--json"]));
    assert_eq!(r["no_parse"], 1);
    assert_eq!(r["precision"], 1.0);
    assert_eq!(r["recall"], 1.0 / 3.0);
    let short = write(&dir, "s.mrg", "(S (A a) (B b))\n");
    assert_eq!(run(&["eval", s(&gold), s(&short)]).status.code(), Some(2));
    let other = write(&dir, "o.mrg", "(S (A x) (B b))\n(S (A a) (B b))\n");
    let out = run(&["eval", s(&gold), s(&other)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sentence 0"));
}

#[test]
fn stats_rows_sum_to_one_hundred() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("c.mrg");
    ok(&["gen-corpus", "--seed", "9", "-n", "150", "-o", s(&corpus)]);
    let r = json(&ok(&["stats", "-i", s(&corpus), "--json"]));
    let rows = r["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for row in rows {
        let total = row["total"].as_u64().unwrap();
        let counts = row["counts"].as_object().unwrap();
        assert_eq!(
            counts.values().map(|v| v.as_u64().unwrap()).sum::<u64>(),
            total
        );
        for d in counts.keys() {
            assert!(["-2", "-1", "0", "1"].contains(&d.as_str()));
        }
    }
    let table = ok(&["stats", "-i", s(&corpus)]);
    for line in table.lines().skip(1).filter(|l| !l.starts_with("max")) {
        let pct: f64 = line
            .split('(')
            .skip(1)
            .map(|p| p.split('%').next().unwrap().trim().parse::<f64>().unwrap())
            .sum();
        assert!((pct - 100.0).abs() <= 2.0, "{line}");
    }
}

#[test]
fn stats_of_empty_corpus_is_empty() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "e.mrg", "");
    let out = ok(&["stats", "-i", s(&empty)]);
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn gen_corpus_is_deterministic() {
    let a = ok(&["gen-corpus", "--seed", "3", "-n", "20"]);
    let b = ok(&["gen-corpus", "--seed", "3", "-n", "20"]);
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 20);
    let r = ok(&["gen-corpus", "--seed", "3", "-n", "5", "--kind", "random"]);
    assert_eq!(r.lines().count(), 5);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["parse", "-m", "x"]).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let model = trained(&dir, "plcg");
    let input = write(&dir, "in.txt", "DT NN\n");
    assert_eq!(
        run(&["parse", "-m", s(&model), "-i", s(&input), "--beam", "0"])
            .status
            .code(),
        Some(1)
    );
    let bad = write(&dir, "bad.lcm", "not a model\n");
    assert_eq!(
        run(&["parse", "-m", s(&bad), "-i", s(&input)])
            .status
            .code(),
        Some(2)
    );
    let broken = write(&dir, "broken.mrg", "(S (A a)");
    assert_eq!(run(&["stats", "-i", s(&broken)]).status.code(), Some(2));
}
