use std::fs;
use std::path::{Path, PathBuf};

use epool::bitset::all_subsets;
use epool::entailment::{psi, ScorerFamily};
use epool::epistemic::{state_entails, state_to_kb, EpistemicState, PropertySpace};
use epool::logic::{all_nonempty_clauses, pretty_print, AtomTable, Formula};
use epool::spaces::{Vector, VectorFile};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = epool::cli::run(std::iter::once("epool").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn encode_disjunction_in_average_space() {
    let dir = tempfile::tempdir().unwrap();
    let kb = write(dir.path(), "or.kb", "atoms: a b\na b\n");
    let out = dir.path().join("or.json");
    let (code, _, err) = run(&["encode", "--space", "avg-strict-nonneg", "--kb", path_str(&kb), "-o", path_str(&out)]);
    assert_eq!(code, 0, "{err}");
    let file = VectorFile::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(file.vectors[0].vector(), Vector::from_ints(&[1, 0, 0, 0]));
    assert_eq!(file.atoms.as_deref(), Some(&["a".to_string(), "b".to_string()][..]));
}

#[test]
fn pool_then_query() {
    let dir = tempfile::tempdir().unwrap();
    let space = "max-strict-reals";
    let mut files = Vec::new();
    for (name, text) in [("left", "atoms: a b\na b\n"), ("right", "atoms: a b\n-a b\n")] {
        let kb = write(dir.path(), &format!("{name}.kb"), text);
        let out = dir.path().join(format!("{name}.json"));
        assert_eq!(run(&["encode", "--space", space, "--kb", path_str(&kb), "-o", path_str(&out)]).0, 0);
        files.push(out);
    }
    let pooled = dir.path().join("pooled.json");
    let (code, _, err) = run(&["pool", "--space", space, path_str(&files[0]), path_str(&files[1]), "-o", path_str(&pooled)]);
    assert_eq!(code, 0, "{err}");
    let (code, out, _) = run(&["query", "--space", space, "--scorer", "minOfGammas", "--formula", "b", path_str(&pooled)]);
    assert_eq!((code, out.as_str()), (0, "pooled: ENTAILED\n"));
    let (code, out, _) = run(&["query", "--space", space, "--scorer", "minOfGammas", "--formula", "a", path_str(&pooled)]);
    assert_eq!((code, out.as_str()), (0, "pooled: NOT-ENTAILED\n"));
    let (code, out, _) = run(&["decode", "--space", space, "--logical", path_str(&pooled)]);
    assert_eq!(code, 0);
    assert!(out.contains("a=0 b=1") && out.contains("a=1 b=1"), "{out}");
    assert!(out.contains("implicates: b"), "{out}");
}

/// encode, pool and query through the command line agree with the oracle
/// for every pair of states over two atoms.
#[test]
fn pipeline_matches_oracle_exhaustively() {
    let dir = tempfile::tempdir().unwrap();
    let atoms = AtomTable::new(["a", "b"]).unwrap();
    let space = PropertySpace::logical(atoms.clone()).unwrap();
    let config = epool::spaces::SpaceConfig::named("had-weak-nonneg", space.clone()).unwrap();
    let states: Vec<EpistemicState> = all_subsets(4).map(EpistemicState::from_bitset).collect();
    let mut encoded = Vec::new();
    for (i, s) in states.iter().enumerate() {
        let kb = write(dir.path(), &format!("s{i}.kb"), &state_to_kb(&space, s).unwrap().to_string());
        let out = dir.path().join(format!("s{i}.json"));
        let (code, _, err) = run(&["encode", "--space", "had-weak-nonneg", "--kb", path_str(&kb), "-o", path_str(&out)]);
        assert_eq!(code, 0, "{err}");
        encoded.push(out);
    }
    let mut formulas: Vec<Formula> = all_nonempty_clauses(2).iter().map(|c| c.to_formula()).collect();
    formulas.extend([Formula::Top, Formula::Bottom, Formula::iff(Formula::Atom(0), Formula::Atom(1))]);
    for (i, s) in states.iter().enumerate() {
        for (j, t) in states.iter().enumerate().skip(i) {
            let pooled = dir.path().join("p.json");
            let (code, _, err) = run(&[
                "pool",
                "--space",
                "had-weak-nonneg",
                path_str(&encoded[i]),
                path_str(&encoded[j]),
                "-o",
                path_str(&pooled),
            ]);
            assert_eq!(code, 0, "{err}");
            let union = EpistemicState::from_bitset(s.members().union(t.members()));
            let v = VectorFile::from_json(&fs::read_to_string(&pooled).unwrap()).unwrap().vectors[0].vector();
            for f in &formulas {
                let text = pretty_print(f, &atoms);
                let (code, out, _) = run(&["query", "--space", "had-weak-nonneg", "--scorer", "linearSum", "--formula", &text, path_str(&pooled)]);
                assert_eq!(code, 0);
                let expected = state_entails(&space, &union, f).unwrap();
                assert_eq!(out.contains(": ENTAILED"), expected, "states {i} {j}, `{text}`");
                assert_eq!(psi(&config, &ScorerFamily::LinearSum, f, &v).unwrap(), expected);
            }
        }
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let outside = write(
        dir.path(),
        "neg.json",
        r#"{"space": "avg-strict-nonneg", "n": 2, "vectors": [{"name": "e", "coords": ["-1", "0"]}]}"#,
    );
    assert_eq!(run(&["decode", "--space", "avg-strict-nonneg", path_str(&outside)]).0, 3);
    let fine = write(
        dir.path(),
        "ok.json",
        r#"{"space": "avg-strict-nonneg", "n": 2, "vectors": [{"name": "e", "coords": ["1/2", "0"]}]}"#,
    );
    let (code, out, _) = run(&["decode", "--space", "avg-strict-nonneg", path_str(&fine)]);
    assert_eq!((code, out.as_str()), (0, "e: p0\n"));
    // margin scorers refuse vectors that are not clear-cut
    let blurry = write(
        dir.path(),
        "blurry.json",
        r#"{"space": "avg-margin-nonneg(1)", "n": 4, "atoms": ["a", "b"], "vectors": [{"name": "e", "coords": ["1/2", "0", "0", "0"]}]}"#,
    );
    let q = ["query", "--space", "avg-margin-nonneg(1)", "--scorer", "marginRelu", "--formula", "a | b"];
    assert_eq!(run(&[&q[..], &[path_str(&blurry)]].concat()).0, 3);
    let bad_formula = ["query", "--space", "avg-strict-nonneg", "--scorer", "minOfGammas", "--formula", "a ->"];
    assert_eq!(run(&[&bad_formula[..], &[path_str(&fine)]].concat()).0, 2);
    let bad_kb = write(dir.path(), "bad.kb", "a b\natoms: a b\n");
    assert_eq!(run(&["encode", "--space", "max-strict-reals", "--kb", path_str(&bad_kb)]).0, 2);
    assert_eq!(run(&["decode", "--space", "max-strict-reals", "missing.json"]).0, 2);
    let (code, out, _) = run(&["verify", "--space", "max-weak-reals", "--trials", "100"]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(&["verify", "--space", "example1", "--trials", "100"]);
    assert_eq!(code, 1, "{out}");
    assert_eq!(run(&["falsify", "--candidate", "nope"]).0, 2);
}

#[test]
fn weighted_encode_and_decode() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.json");
    let (code, _, err) = run(&["encode", "--space", "weighted-max-reals(3)", "--levels", "3,0,1", "--K", "3", "-o", path_str(&out)]);
    assert_eq!(code, 0, "{err}");
    let (code, text, _) = run(&["decode", "--space", "weighted-max-reals(3)", "--K", "3", path_str(&out)]);
    assert_eq!((code, text.as_str()), (0, "levels: levels 3,0,1\n"));
}

#[test]
fn plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig.svg");
    let (code, _, err) = run(&["plot", "--space", "example1", "--out", path_str(&out), "--resolution", "80"]);
    assert_eq!(code, 0, "{err}");
    let svg = fs::read_to_string(&out).unwrap();
    assert!(svg.contains("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.matches("<rect").count() > 10);
    let (code, _, _) = run(&["plot", "--space", "max-strict-reals", "--out", path_str(&out), "--resolution", "20"]);
    assert_eq!(code, 0);
    assert_eq!(run(&["plot", "--space", "max-strict-reals", "--out", path_str(&out), "--range", "0"]).0, 2);
}

#[test]
fn verify_and_report_flags() {
    let (code, out, _) = run(&["verify", "--space", "max-weak-nonpos", "--scorer", "linearSum"]);
    assert_eq!(code, 0, "{out}");
    let (code, out, _) = run(&["verify", "--space", "avg-strict-nonneg", "--scorer", "linearSum"]);
    assert_eq!(code, 2, "{out}");
    let (code, out, _) = run(&["report", "--trials", "50", "--max-dim", "2", "--json-stdout"]);
    assert_eq!(code, 0);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(json["cells"].as_array().unwrap().iter().all(|c| c["matches"] == true));
}
