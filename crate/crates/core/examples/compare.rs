//! Run the interpreter, the analysis and the legacy checker on one program.
//!
//! cargo run -p tinylinks-core --example compare -- samples/buy_ok.tl

use tinylinks_core::{analysis, concrete, legacy, parse};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "samples/buy_ok.tl".into());
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let program = match parse(&src) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{path}:{e}");
            std::process::exit(3);
        }
    };
    println!("run:      {}", concrete::run(&program));
    println!("analysis: {}", analysis::analyze(&program));
    println!("legacy:   {}", legacy::check_program(&program));
}
