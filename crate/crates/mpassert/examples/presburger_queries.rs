//! The decision procedure on its own: satisfiability, validity,
//! implication between contracts, quantifier elimination (including the
//! divisibility atoms it can produce) and the step budget.
//!
//!     cargo run --example presburger_queries

use mpassert::parse_formula;
use mpassert::presburger::{QeConfig, Solver};

fn main() {
    let solver = Solver::new();
    let f = |text: &str| parse_formula(text).unwrap();

    println!("== implication between send contracts ==");
    let stronger = f("q > 50");
    let weaker = f("q > 0");
    println!(
        "{} => {} : {}",
        stronger, weaker,
        solver.implies(&stronger, &weaker).unwrap()
    );
    println!(
        "{} => {} : {}",
        weaker, stronger,
        solver.implies(&weaker, &stronger).unwrap()
    );

    println!("\n== satisfiability and validity ==");
    for text in [
        "0 < c && c <= q",
        "x < 0 && x > 0",
        "forall c:int. (0 < c && c <= q) => q > 0",
        "q > 0 => (0 < (q + 1) / 2 && (q + 1) / 2 <= q)",
    ] {
        let formula = f(text);
        println!(
            "{text}\n  satisfiable: {}  valid: {}",
            solver.is_satisfiable(&formula).unwrap(),
            solver.is_valid(&formula).unwrap()
        );
    }

    println!("\n== quantifier elimination ==");
    for text in ["exists x:int. x > c && x < c + 2", "exists x:int. 2 * x = y"] {
        let formula = f(text);
        let out = solver.eliminate_quantifiers(&formula).unwrap();
        println!("{} ~> {}", formula, out.formula);
    }

    println!("\n== the step budget turns blow-ups into errors ==");
    let tiny = Solver::with_config(QeConfig { max_steps: 10_000 });
    let bomb = f("forall a:int. forall b:int. forall c:int. exists d:int. exists e:int. \
                  (5*d + 7*e > 3*a - 2*b + c && 7*d - 5*e < 2*a + 3*b - 4*c) && \
                  (3*d - 11*e > a + b + c || 11*d + 3*e < a - b + 2*c)");
    match tiny.eliminate_quantifiers(&bomb) {
        Ok(_) => println!("unexpectedly finished"),
        Err(e) => println!("aborted as intended: {e}"),
    }
}
