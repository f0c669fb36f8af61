use std::path::PathBuf;

use tinylinks_core::analysis::{analyze, Verdict};
use tinylinks_core::concrete::{run, RunVerdict};
use tinylinks_core::legacy::check_program;
use tinylinks_core::parse;

fn sample(name: &str) -> tinylinks_core::Expr {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../samples")
        .join(name);
    let src = std::fs::read_to_string(&path).unwrap();
    parse(&src).unwrap()
}

#[test]
fn verdicts_of_the_sample_programs() {
    use RunVerdict::*;
    use Verdict::*;
    // file, analysis, concrete, legacy
    let table = [
        ("hello.tl", Unsafe, Wrong, true),
        ("nested_link.tl", Unsafe, WrongFree, true),
        ("buy.tl", Unsafe, WrongFree, false),
        ("buy_partial.tl", Unsafe, WrongFree, false),
        ("buy_full.tl", Unsafe, Wrong, false),
        ("buy_ok.tl", Safe, WrongFree, true),
        ("shop.tl", Safe, WrongFree, false),
        ("link_precondition.tl", Safe, WrongFree, false),
        ("switch.tl", Safe, WrongFree, false),
        ("arithmetic.tl", Safe, WrongFree, false),
    ];
    for (file, analysis, concrete, legacy) in table {
        let p = sample(file);
        let a = analyze(&p);
        assert_eq!(a.verdict, analysis, "{file}: {a}");
        assert_eq!(run(&p).verdict, concrete, "{file}");
        assert_eq!(
            check_program(&p).accepted,
            legacy,
            "{file}: {}",
            check_program(&p)
        );
    }
}

#[test]
fn buy_with_its_event_is_safe() {
    let a = analyze(&sample("buy_ok.tl"));
    assert!(a.is_safe());
    let r = run(&sample("buy_ok.tl"));
    assert_eq!(r.to_string(), r#"Xml(Text("Hello")), {PriceIs -> (5, EA)}"#);
}
