//! Projection suite: the worked examples' projections were derived by hand
//! from the rely/guarantee rules and frozen here as strings in the
//! canonical local-type syntax.

mod common;

use mpassert::projection::{project, project_all, ProjectionError};
use mpassert::syntax::{LocalAssertion, Participant};
use mpassert::{parse_global, parse_protocol_file};

fn buyer_seller_projections() -> Vec<(Participant, LocalAssertion)> {
    let file = parse_protocol_file(&common::buyer_seller_text()).unwrap();
    project_all(&file.global).unwrap()
}

#[test]
fn buyer_seller_has_three_projections_in_name_order() {
    let projections = buyer_seller_projections();
    let names: Vec<&str> = projections.iter().map(|(p, _)| p.name()).collect();
    assert_eq!(names, ["B1", "B2", "S"]);
}

#[test]
fn buyer_seller_projection_of_b1() {
    let projections = buyer_seller_projections();
    assert_eq!(
        projections[0].1.to_string(),
        "s!<t:string> [true];b1?<q:int> [q>0];b2!<c:int> [0<c && c<=q];end"
    );
}

#[test]
fn buyer_seller_projection_of_b2() {
    // The receive carries the accumulated rely with the unknown quote
    // existentially quantified; the selection arms keep their own (trivial)
    // assertions.
    let projections = buyer_seller_projections();
    assert_eq!(
        projections[1].1.to_string(),
        "b2?<c:int> [exists q:int. 0<c && c<=q && q>0];\
         s$br{ [true] ok: s!<a:string> [true];b2?<d:date> [exists q:int. 0<c && c<=q && q>0];end, \
         [true] quit: end }"
    );
}

#[test]
fn buyer_seller_projection_of_s() {
    let projections = buyer_seller_projections();
    assert_eq!(
        projections[2].1.to_string(),
        "s?<t:string> [true];b1!<q:int> [q>0];\
         s&br{ [exists c:int. 0<c && c<=q && q>0] ok: \
         s?<a:string> [exists c:int. 0<c && c<=q && q>0];b2!<d:date> [true];end, \
         [exists c:int. 0<c && c<=q && q>0] quit: end }"
    );
}

#[test]
fn guessing_game_projections() {
    let file = parse_protocol_file(&common::guessing_game_text()).unwrap();
    let projections = project_all(&file.global).unwrap();
    let names: Vec<&str> = projections.iter().map(|(p, _)| p.name()).collect();
    assert_eq!(names, ["G", "P", "S"]);

    // G is not involved in the loop, so its projection has no recursion.
    assert!(!projections[0].1.has_rec());
    assert_eq!(projections[0].1.to_string(), "c!<n:int> [n>0];end");

    assert_eq!(
        projections[1].1.to_string(),
        "f!<x:int> [true];mu t(x,0)(r:int,cpt:int) [cpt>=0]. \
         h&ans{ [exists n:int. r<n && cpt>=0 && n>0] less: l!<y:int> [y=r+1];t(y,cpt+1), \
         [exists n:int. r>n && cpt>=0 && n>0] greater: l!<y:int> [y=r-1];t(y,cpt+1), \
         [exists n:int. r=n && cpt>=0 && n>0] equal: \
         h&res{ [exists n:int. cpt<10 && r=n && cpt>=0 && n>0] win: end, \
         [exists n:int. cpt>=10 && r=n && cpt>=0 && n>0] lose: end } }"
    );

    assert_eq!(
        projections[2].1.to_string(),
        "c?<n:int> [n>0];f?<x:int> [n>0];mu t(x,0)(r:int,cpt:int) [cpt>=0]. \
         h$ans{ [r<n] less: l?<y:int> [y=r+1 && r<n && cpt>=0 && n>0];t(y,cpt+1), \
         [r>n] greater: l?<y:int> [y=r-1 && r>n && cpt>=0 && n>0];t(y,cpt+1), \
         [r=n] equal: h$res{ [cpt<10] win: end, [cpt>=10] lose: end } }"
    );
}

#[test]
fn projecting_end_is_empty() {
    let projections = project_all(&mpassert::syntax::GlobalAssertion::End).unwrap();
    assert!(projections.is_empty());
}

#[test]
fn uninvolved_participant_with_equal_arms_merges() {
    let g = parse_global(
        "A -> B : k(x:int)[-]; B -> C : m&id{ [-] l: C -> B : n(y:int)[-]; end, [-] r: C -> B : n(y:int)[-]; end }",
    )
    .unwrap();
    let t = project(&g, &Participant::new("A")).unwrap();
    assert_eq!(t.to_string(), "k!<x:int> [true];end");
}

#[test]
fn uninvolved_participant_with_differing_arms_fails() {
    let g = parse_global(
        "A -> B : k(x:int)[-]; B -> C : m&id{ [-] l: C -> A : n(y:int)[-]; end, [-] r: end }",
    )
    .unwrap();
    let err = project(&g, &Participant::new("A")).unwrap_err();
    assert!(matches!(err, ProjectionError::UnmergeableBranches { .. }));
}

#[test]
fn every_projected_assertion_is_known_to_the_participant() {
    // History sensitivity is preserved: free variables of projected
    // assertions are variables the participant sent, received or owns as
    // recursion formals.
    for text in [common::buyer_seller_text(), common::guessing_game_text()] {
        let file = parse_protocol_file(&text).unwrap();
        for (participant, local) in project_all(&file.global).unwrap() {
            let mut known = Vec::new();
            check_known(&local, &mut known, participant.name());
        }
    }
}

fn check_known(t: &LocalAssertion, known: &mut Vec<String>, who: &str) {
    match t {
        LocalAssertion::Send { payload_var, assertion, continuation, .. }
        | LocalAssertion::Receive { payload_var, assertion, continuation, .. } => {
            known.push(payload_var.clone());
            for v in assertion.free_variables() {
                assert!(known.contains(&v), "{who}: unknown `{v}` in {assertion}");
            }
            check_known(continuation, known, who);
            known.pop();
        }
        LocalAssertion::Select { arms, .. } | LocalAssertion::Branch { arms, .. } => {
            for arm in arms {
                for v in arm.assertion.free_variables() {
                    assert!(known.contains(&v), "{who}: unknown `{v}` in {}", arm.assertion);
                }
                check_known(&arm.continuation, known, who);
            }
        }
        LocalAssertion::Rec { params, body, .. } => {
            let depth = known.len();
            for p in params {
                known.push(p.formal.clone());
            }
            check_known(body, known, who);
            known.truncate(depth);
        }
        LocalAssertion::Call { .. } | LocalAssertion::End => {}
    }
}

#[test]
fn projected_relies_are_satisfiable() {
    // For a well-asserted global, no projected receive or branch assumes
    // the impossible.
    let solver = mpassert::presburger::Solver::new();
    for text in [common::buyer_seller_text(), common::guessing_game_text()] {
        let file = parse_protocol_file(&text).unwrap();
        for (_, local) in project_all(&file.global).unwrap() {
            check_satisfiable(&local, &solver);
        }
    }
}

fn check_satisfiable(t: &LocalAssertion, solver: &mpassert::presburger::Solver) {
    match t {
        LocalAssertion::Receive { assertion, continuation, .. } => {
            assert!(solver.is_satisfiable(assertion).unwrap(), "unsatisfiable rely {assertion}");
            check_satisfiable(continuation, solver);
        }
        LocalAssertion::Send { continuation, .. } => check_satisfiable(continuation, solver),
        LocalAssertion::Select { arms, .. } => {
            for arm in arms {
                check_satisfiable(&arm.continuation, solver);
            }
        }
        LocalAssertion::Branch { arms, .. } => {
            for arm in arms {
                assert!(
                    solver.is_satisfiable(&arm.assertion).unwrap(),
                    "unsatisfiable rely {}",
                    arm.assertion
                );
                check_satisfiable(&arm.continuation, solver);
            }
        }
        LocalAssertion::Rec { body, .. } => check_satisfiable(body, solver),
        LocalAssertion::Call { .. } | LocalAssertion::End => {}
    }
}
