//! Execute the guessing game on FIFO channels with assertion monitoring
//! and print the interleaved trace: the player starts at 11, counts up on
//! every "less" hint and wins on 15 with four retries spent.
//!
//!     cargo run --example simulate_game

use mpassert::parse_protocol_file;
use mpassert::presburger::Solver;
use mpassert::runtime::{simulate, Scheduler, SimOptions};

fn main() {
    let text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/protocols/guessing_game.gp"
    ))
    .unwrap();
    let file = parse_protocol_file(&text).unwrap();
    let solver = Solver::new();
    let options = SimOptions { monitor_assertions: true, scheduler: Scheduler::RoundRobin };
    let trace = simulate(&file, &options, &solver).expect("verified input runs to completion");
    print!("{trace}");
    println!("-- {} events", trace.events.len());
}
