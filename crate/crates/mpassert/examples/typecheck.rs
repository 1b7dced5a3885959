//! Infer the session types of participant implementations and compare them
//! with the projections under refinement — first on the correct file, then
//! on a mutated copy whose first buyer sends an int where a string is
//! promised.
//!
//!     cargo run --example typecheck

use mpassert::parse_protocol_file;
use mpassert::presburger::Solver;
use mpassert::projection::project_all;
use mpassert::typing::{validate_all, TypingMode};

fn main() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/protocols/buyer_seller.gp"
    ))
    .unwrap();
    let solver = Solver::new();

    println!("== the shipped file type-checks ==");
    report(&text, &solver);

    println!("\n== a mutated first buyer does not ==");
    let mutated = text.replace(
        "s!(\"The art of computer programming\")(t:string)[-];",
        "s!(112)(t:int)[-];",
    );
    report(&mutated, &solver);
}

fn report(text: &str, solver: &Solver) {
    let file = parse_protocol_file(text).unwrap();
    let projections = project_all(&file.global).unwrap();
    let outcome = validate_all(&file, &projections, TypingMode::Multiparty, solver);
    for typed in &outcome.typed {
        println!("{}: {}", typed.participant, typed.ty);
    }
    if outcome.mismatches.is_empty() {
        println!("all local types match their projections");
    }
    for m in &outcome.mismatches {
        println!("Local type doesn't match projection for {}!", m.participant);
        println!("Type:       {}", m.inferred);
        println!("Projection: {}", m.projected);
    }
}
