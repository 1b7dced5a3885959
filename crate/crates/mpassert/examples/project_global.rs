//! Check a global description and project it onto its participants,
//! showing how assertions split into guarantees for senders and
//! accumulated, existentially quantified relies for receivers.
//!
//!     cargo run --example project_global

use mpassert::analysis::{check_linearity, check_well_asserted, unfold_once};
use mpassert::parse_global;
use mpassert::presburger::Solver;
use mpassert::projection::project_all;

const NEGOTIATION: &str = "\
Seller -> Buyer : price(p:int)[p > 0];
Buyer -> Seller : offer(o:int)[0 < o && o <= p];
Seller -> Buyer : decision&deal{
  [o >= p - 10] accept: end,
  [-]           reject: end
}";

fn main() {
    let global = parse_global(NEGOTIATION).expect("global parses");
    println!("Global description:\n  {global}\n");

    let solver = Solver::new();
    let unfolded = unfold_once(&global);
    let linearity = check_linearity(&unfolded);
    println!("Linearity: {:?}", linearity.verdict());
    let well_asserted = check_well_asserted(&global, &solver).expect("solver in budget");
    println!("Well-assertedness: {:?}", well_asserted.verdict());
    for violation in &well_asserted.violations {
        println!("  {violation}");
    }

    println!("\nProjections:");
    for (participant, local) in project_all(&global).expect("projectable") {
        println!("  {participant}: {local}");
    }
}
