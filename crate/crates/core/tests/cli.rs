use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tropfan::io;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn tropfan(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tropfan"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("TROPFAN_THREADS", t);
    }
    cmd.output().expect("run tropfan")
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = tropfan(args, None);
    let code = out.status.code().expect("exit code");
    let text = String::from_utf8(out.stdout).unwrap();
    let v = if text.is_empty() { Value::Null } else { serde_json::from_str(&text).expect("json report") };
    (code, v)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn chow_of_u33() {
    let (code, v) = run(&["chow", path(&fixture("u33.json"))]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["ranks"], json!([1, 4, 1]));
    assert_eq!(v["results"]["torsion_free"], json!(true));
    assert_eq!(v["status"], json!("ok"));
    assert_eq!(v["exit"], json!(0));
}

#[test]
fn kahler_of_u33() {
    let (code, v) = run(&["kahler", path(&fixture("u33.json")), "--ell", path(&fixture("ones.json"))]);
    assert_eq!(code, 0);
    let hr = &v["results"]["hr"];
    assert_eq!(hr["pass"], json!(true));
    assert_eq!(hr["degrees"][1]["k"], json!(1));
    assert_eq!(hr["degrees"][1]["value"], json!(-2));
    assert_eq!(hr["degrees"][1]["signature"], json!([1, 3, 0]));
}

#[test]
fn cross_fails_pd() {
    let (code, v) = run(&["check", path(&fixture("cross.json")), "--pd"]);
    assert_eq!(code, 1);
    assert_eq!(v["results"]["pd"]["holds"], json!(false));
    assert_eq!(v["status"], json!("fails"));
}

#[test]
fn invalid_input_exits_2() {
    let out = tropfan(&["chow", path(&fixture("min.json"))], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("rays"));
    let out = tropfan(&["chow", "/no/such/file.json"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = tropfan(&["blowup", path(&fixture("lambda2.json")), "--cone", "0,1"], None);
    assert_eq!(out.status.code(), Some(2));
    let out = tropfan(&["frobnicate"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reports_do_not_depend_on_threads() {
    let (u33, ones) = (fixture("u33.json"), fixture("ones.json"));
    let args = ["kahler", path(&u33), "--ell", path(&ones), "--all-stars"];
    let one = tropfan(&args, Some("1"));
    let four = tropfan(&args, Some("4"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, tropfan(&args, None).stdout);
}

#[test]
fn emitted_fans_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.json");
    let (code, v) = run(&["tropmod", path(&fixture("lambda2.json")), path(&fixture("min.json")), "-o", path(&m)]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["summary"]["rays"], json!(5));
    let text = std::fs::read_to_string(&m).unwrap();
    let (fan, w) = io::fan_from_json(&io::parse_json(&text).unwrap()).unwrap();
    assert_eq!(io::canonical(&io::fan_to_json(&fan, w.as_ref())), text);

    let (code, v) = run(&["check", path(&m), "--pd"]);
    assert_eq!((code, &v["results"]["pd"]["holds"]), (0, &json!(true)));
    let (code, v) = run(&["star", path(&m), "--cone", "4"]);
    assert_eq!(code, 0);
    let star = dir.path().join("star.json");
    std::fs::write(&star, io::canonical(&v["results"]["fan"])).unwrap();
    let (code, _) = run(&["check", path(&star), "--pd"]);
    assert_eq!(code, 1);
}

#[test]
fn blowup_then_blowdown() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.json");
    let (code, v) = run(&["blowup", path(&fixture("lambda2.json")), "--cone", "0,2", "-o", path(&b)]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["new_ray"], json!(4));
    let (code, v) = run(&["blowdown", path(&b), "--ray", "4"]);
    assert_eq!(code, 0);
    let original = io::read_json(&fixture("lambda2.json")).unwrap();
    assert_eq!(v["results"]["fan"], original);
}

#[test]
fn product_and_bergman() {
    let (code, v) = run(&["product", path(&fixture("line.json")), path(&fixture("line.json"))]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["fan"], io::read_json(&fixture("lambda2.json")).unwrap());
    let (code, v) = run(&["bergman", "--uniform", "3,3"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["fan"], io::read_json(&fixture("u33.json")).unwrap());
    let (code, v) = run(&["bergman", "--uniform", "2,3", "--augmented"]);
    assert_eq!(code, 0);
    // three rays e_i and one per proper flat (∅, 0, 1, 2)
    assert_eq!(v["results"]["summary"]["rays"], json!(7));
}

#[test]
fn mw_and_div() {
    let (code, v) = run(&["mw", path(&fixture("cross.json")), "-p", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["rank"], json!(2));
    let (code, v) = run(&["div", path(&fixture("lambda2.json")), path(&fixture("min.json"))]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["divisor"]["entries"], json!([[[0], 1], [[1], 1], [[2], 1], [[3], 1]]));
}

#[test]
fn build_scripts() {
    let (code, v) = run(&["build", path(&fixture("u34_tree.json")), "--class", "unimodular+effective", "--quasilinear"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["summary"]["rays"], json!(7));
    assert_eq!(v["results"]["quasilinear"].as_array().unwrap().len(), 7);

    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("point.json");
    std::fs::write(&s, r#"{"op": "point", "weight": 2}"#).unwrap();
    let (code, v) = run(&["build", path(&s), "--class", "reduced"]);
    assert_eq!(code, 1);
    assert!(v["results"]["violation"]["node"].as_str().unwrap().starts_with('0'));
}

#[test]
fn closure_of_the_line() {
    let (code, v) = run(&["closure", "--base", path(&fixture("line.json")), "--max-dim", "2", "--max-rays", "4", "--max-depth", "1"]);
    assert_eq!(code, 0);
    let fans = v["results"]["fans"].as_array().unwrap();
    assert!(fans.contains(&io::read_json(&fixture("line.json")).unwrap().as_object().map(|o| {
        let mut o = o.clone();
        o.insert("weights".into(), json!([1, 1]));
        Value::Object(o)
    }).unwrap()));
    assert!(fans.contains(&io::read_json(&fixture("lambda2.json")).unwrap()));
    assert!(fans.iter().all(|f| f["rank"].as_u64().unwrap() <= 2));
}

#[test]
fn text_format() {
    let out = tropfan(&["--format", "text", "chow", path(&fixture("u33.json"))], None);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("results.ranks: [1,4,1]"));
    assert!(text.contains("status: \"ok\""));
}
