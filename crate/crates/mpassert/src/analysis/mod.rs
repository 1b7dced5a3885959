//! Checks on the global description: one-time unfolding, channel linearity
//! via the dependency relations, and well-assertedness.

mod deps;
mod linearity;
mod unfold;
mod wellassert;

pub use deps::{dependencies, DepKind, Prefix};
pub use linearity::check_linearity;
pub use unfold::unfold_once;
pub use wellassert::{check_well_asserted, KnowledgeMap};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{Verdict, ViolationKind};
    use crate::parse::{parse_global, parse_protocol_file};
    use crate::presburger::Solver;
    use crate::syntax::GlobalAssertion;

    fn buyer_seller_global() -> GlobalAssertion {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/protocols/buyer_seller.gp"
        ))
        .unwrap();
        parse_protocol_file(&text).unwrap().global
    }

    fn guessing_game_global() -> GlobalAssertion {
        let text = std::fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/protocols/guessing_game.gp"
        ))
        .unwrap();
        parse_protocol_file(&text).unwrap().global
    }

    #[test]
    fn unfold_end_and_nonrecursive() {
        assert_eq!(unfold_once(&GlobalAssertion::End), GlobalAssertion::End);
        let g = buyer_seller_global();
        assert_eq!(unfold_once(&g), g);
    }

    #[test]
    fn unfold_duplicates_loop_prefixes() {
        let g = guessing_game_global();
        // Out of the loop: 2 prefixes (c and f). In the loop: the answer
        // branch, the two l-interactions and the verdict branch, so 4.
        assert_eq!(g.prefix_count(), 6);
        // Two call sites each gain one copy of the loop body: 2 + 4 + 2*4.
        let unfolded = unfold_once(&g);
        assert_eq!(unfolded.prefix_count(), 14);
    }

    #[test]
    fn buyer_seller_is_linear() {
        let g = unfold_once(&buyer_seller_global());
        let report = check_linearity(&g);
        assert_eq!(report.verdict(), Verdict::Ok, "{report}");
    }

    #[test]
    fn guessing_game_is_linear() {
        let g = unfold_once(&guessing_game_global());
        let report = check_linearity(&g);
        assert_eq!(report.verdict(), Verdict::Ok, "{report}");
    }

    #[test]
    fn single_interaction_is_linear() {
        let g = parse_global("A -> B : k(x:int)[-]; end").unwrap();
        assert!(check_linearity(&unfold_once(&g)).is_ok());
    }

    #[test]
    fn unrelated_reuse_of_a_channel_races() {
        let g = parse_global("A -> B : k(x:int)[-]; C -> D : k(y:int)[-]; end").unwrap();
        let report = check_linearity(&unfold_once(&g));
        assert_eq!(report.verdict(), Verdict::Failed);
        assert_eq!(report.violations[0].kind, ViolationKind::Linearity);
        assert_eq!(report.violations[0].path, "1");
    }

    #[test]
    fn write_write_race_with_distinct_receivers() {
        // A's outputs on k are ordered, but the two receptions race.
        let g = parse_global("A -> C : k(x:int)[-]; A -> B : k(y:int)[-]; end").unwrap();
        let report = check_linearity(&unfold_once(&g));
        assert_eq!(report.verdict(), Verdict::Failed);
    }

    #[test]
    fn buyer_seller_is_well_asserted() {
        let solver = Solver::new();
        let report = check_well_asserted(&buyer_seller_global(), &solver).unwrap();
        assert_eq!(report.verdict(), Verdict::Ok, "{report}");
    }

    #[test]
    fn guessing_game_is_well_asserted() {
        let solver = Solver::new();
        let report = check_well_asserted(&guessing_game_global(), &solver).unwrap();
        assert_eq!(report.verdict(), Verdict::Ok, "{report}");
    }

    #[test]
    fn unsatisfiable_assertion_is_flagged() {
        let solver = Solver::new();
        let g = parse_global("A -> B : k(x:int)[false]; end").unwrap();
        let report = check_well_asserted(&g, &solver).unwrap();
        assert_eq!(report.verdict(), Verdict::Failed);
        assert_eq!(report.violations[0].kind, ViolationKind::TemporalSatisfiability);
    }

    #[test]
    fn asserting_on_unknown_variable_is_flagged() {
        // B2 selects on a condition about q, which it never received.
        let solver = Solver::new();
        let g = parse_global(
            "B1 -> S : s(t:string)[-];\
             S -> B1 : b1(q:int)[q > 0];\
             B1 -> B2 : b2(c:int)[0 < c && c <= q];\
             B2 -> S : s&br{ [q > c] ok: end, [-] quit: end }",
        )
        .unwrap();
        let report = check_well_asserted(&g, &solver).unwrap();
        assert_eq!(report.verdict(), Verdict::Failed);
        let v = &report.violations[0];
        assert_eq!(v.kind, ViolationKind::HistorySensitivity);
        assert!(v.message.contains("`q`"), "{v}");
    }

    #[test]
    fn assertion_free_descriptions_are_always_well_asserted() {
        let solver = Solver::new();
        let g = parse_global(
            "A -> B : k(x:int)[-]; mu t(x)(r:int)[-]. B -> A : m&id{ [-] go: t(r), [-] stop: end }",
        )
        .unwrap();
        let report = check_well_asserted(&g, &solver).unwrap();
        assert_eq!(report.verdict(), Verdict::Ok, "{report}");
    }

    #[test]
    fn broken_recursion_invariant_is_flagged() {
        let solver = Solver::new();
        // cpt decreases, so cpt >= 0 is not re-established.
        let g = parse_global(
            "A -> B : k(x:int)[x > 0]; mu t(0)(cpt:int)[cpt >= 0]. A -> B : m(y:int)[-]; t(cpt - 1)",
        )
        .unwrap();
        let report = check_well_asserted(&g, &solver).unwrap();
        assert_eq!(report.verdict(), Verdict::Failed);
        assert_eq!(report.violations[0].kind, ViolationKind::InvariantUnsatisfied);
    }
}
