use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tinylinks"))
}

fn sample(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../samples")
        .join(name)
}

fn tl(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_buy_matches_the_listing() {
    let o = tl(&["analyze", sample("buy.tl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert_eq!(
        first,
        "(type - : Function(_#value#var0_, Integer(), _annvar0_, Function(_#dbpass#var1_, _typevar1_, \
         _annvar2_, Xml(_annvar4_), _annvar3_), _annvar1_) No_dval [(_annvar2_,PriceIs)] \
         {PriceIs -> _#value#var0_}, {})"
    );
}

#[test]
fn analyze_full_application_fails() {
    let o = tl(&["analyze", sample("buy_full.tl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with(r#"Exception: No_type "apply_fun: no preconditions""#));
}

#[test]
fn analyze_safe_program() {
    let o = tl(&["analyze", sample("buy_ok.tl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: safe"));
}

#[test]
fn run_hello_goes_wrong() {
    let o = tl(&["run", sample("hello.tl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o).trim(), "Wrong, {}");
}

#[test]
fn run_prints_value_and_events() {
    let o = tl(&["run", sample("buy_ok.tl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).trim(),
        r#"Xml(Text("Hello")), {PriceIs -> (5, EA)}"#
    );
}

#[test]
fn legacy_accepts_the_counterexample() {
    let o = tl(&["legacy", sample("hello.tl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "xml { }");
    let o = tl(&["legacy", sample("buy_full.tl").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("FAIL(T-App"));
}

#[test]
fn reads_standard_input() {
    let mut child = bin()
        .args(["run", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"var _ = event p(1); Text("a")"#)
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), r#"Xml(Text("a")), {p -> (1, E)}"#);
}

#[test]
fn parse_errors_exit_3() {
    let mut child = bin()
        .args(["analyze", "-"])
        .stdin(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(b"get(").unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("1:"));
}

#[test]
fn usage_errors_exit_4() {
    assert_eq!(tl(&["frobnicate"]).status.code(), Some(4));
    assert_eq!(tl(&["run"]).status.code(), Some(4));
    assert_eq!(tl(&["run", "/no/such/file.tl"]).status.code(), Some(4));
    assert_eq!(tl(&["fuzz", "--depth", "9"]).status.code(), Some(4));
    assert_eq!(tl(&["--help"]).status.code(), Some(0));
}

#[test]
fn analyze_json_schema() {
    let path = sample("buy_partial.tl");
    let o = tl(&["--json", "analyze", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "unsafe");
    assert_eq!(v["dval"], "Unknown");
    assert_eq!(
        v["constraints"],
        serde_json::json!([["_annvar2_", "PriceIs"]])
    );
    assert_eq!(v["correspondence"], serde_json::json!({"PriceIs": "5"}));
    assert_eq!(v["events"], serde_json::json!({}));
    // stable under re-run
    let again = tl(&["--json", "analyze", path.to_str().unwrap()]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn run_json_events() {
    let o = tl(&["--json", "run", sample("buy_ok.tl").to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["verdict"], "wrong-free");
    assert_eq!(v["events"], serde_json::json!({"PriceIs": [5, "EA"]}));
}

#[test]
fn fuzz_depth_three() {
    let o = tl(&["fuzz", "--depth", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("analyzer violations 0"));
    assert!(out.contains(r#"legacy-violation #449 legacy=accept analysis=unsafe concrete=wrong : get(Text("Hello!"))"#));
}

#[test]
fn fuzz_json_random() {
    let o = tl(&[
        "--json", "fuzz", "--random", "300", "--typed", "--depth", "5", "--seed", "4", "--preds",
        "p,q,r",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["mode"], "typed");
    assert_eq!(v["counts"]["programs"], 300);
    assert_eq!(v["analyzer_violations"], serde_json::json!([]));
    assert_eq!(v["config"]["preds"], serde_json::json!(["p", "q", "r"]));
}
