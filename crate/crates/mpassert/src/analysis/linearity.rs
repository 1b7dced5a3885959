use std::collections::BTreeSet;

use crate::diagnostics::{CheckReport, Violation, ViolationKind};
use crate::syntax::GlobalAssertion;

use super::deps::{dependencies, DepKind, Prefix};

/// Checks that uses of a common channel are temporally ordered: along every
/// branch-consistent path, each ordered pair of prefixes on the same
/// channel must be connected by a chain of dependency edges, and the two
/// receptions must be ordered on the input side as well — either both
/// happen at the same participant, or an input chain (II/IO edges ending
/// in II) connects them.
///
/// Expects the description to be unfolded once already; recursion calls
/// terminate paths.
pub fn check_linearity(g: &GlobalAssertion) -> CheckReport {
    let mut position = 0usize;
    let mut paths = Vec::new();
    collect_paths(g, &mut Vec::new(), &mut paths, &mut position);

    let mut violations = Vec::new();
    let mut seen: BTreeSet<(usize, usize, String)> = BTreeSet::new();
    for path in &paths {
        for i in 0..path.len() {
            for j in (i + 1)..path.len() {
                let (p1, p2) = (&path[i], &path[j]);
                if p1.channel != p2.channel {
                    continue;
                }
                let key = (p1.position, p2.position, p1.channel.name().to_string());
                if seen.contains(&key) {
                    continue;
                }
                seen.insert(key);
                let slice = &path[i..=j];
                if !chained(slice, |a, b| !dependencies(a, b).is_empty()) {
                    violations.push(Violation::new(
                        ViolationKind::Linearity,
                        p2.position.to_string(),
                        format!(
                            "no dependency chain orders {} -> {} : {} (prefix {}) after {} -> {} : {} (prefix {})",
                            p2.sender, p2.receiver, p2.channel, p2.position,
                            p1.sender, p1.receiver, p1.channel, p1.position,
                        ),
                    ));
                    continue;
                }
                if p1.receiver != p2.receiver && !input_chained(slice) {
                    violations.push(Violation::new(
                        ViolationKind::Linearity,
                        p2.position.to_string(),
                        format!(
                            "the receptions of {} -> {} : {} (prefix {}) and {} -> {} : {} (prefix {}) are not input-ordered",
                            p1.sender, p1.receiver, p1.channel, p1.position,
                            p2.sender, p2.receiver, p2.channel, p2.position,
                        ),
                    ));
                }
            }
        }
    }
    CheckReport::from_violations(violations)
}

/// Forward reachability from the first to the last prefix of the slice.
fn chained(slice: &[Prefix], edge: impl Fn(&Prefix, &Prefix) -> bool) -> bool {
    let n = slice.len();
    let mut reach = vec![false; n];
    reach[0] = true;
    for b in 1..n {
        for a in 0..b {
            if reach[a] && edge(&slice[a], &slice[b]) {
                reach[b] = true;
                break;
            }
        }
    }
    reach[n - 1]
}

/// An input dependency: a chain of II/IO edges whose final edge is II.
fn input_chained(slice: &[Prefix]) -> bool {
    let n = slice.len();
    let mut reach = vec![false; n];
    reach[0] = true;
    for b in 1..n - 1 {
        for a in 0..b {
            if reach[a] {
                let deps = dependencies(&slice[a], &slice[b]);
                if deps.contains(&DepKind::II) || deps.contains(&DepKind::IO) {
                    reach[b] = true;
                    break;
                }
            }
        }
    }
    (0..n - 1).any(|a| reach[a] && dependencies(&slice[a], &slice[n - 1]).contains(&DepKind::II))
}

/// Enumerates the prefixes of every branch-consistent path, assigning each
/// prefix a stable preorder position.
fn collect_paths(
    g: &GlobalAssertion,
    current: &mut Vec<Prefix>,
    out: &mut Vec<Vec<Prefix>>,
    position: &mut usize,
) {
    match g {
        GlobalAssertion::Interaction { sender, receiver, channel, continuation, .. } => {
            current.push(Prefix {
                sender: sender.clone(),
                receiver: receiver.clone(),
                channel: channel.clone(),
                position: *position,
            });
            *position += 1;
            collect_paths(continuation, current, out, position);
            current.pop();
        }
        GlobalAssertion::Branch { sender, receiver, channel, arms, .. } => {
            current.push(Prefix {
                sender: sender.clone(),
                receiver: receiver.clone(),
                channel: channel.clone(),
                position: *position,
            });
            *position += 1;
            for arm in arms {
                collect_paths(&arm.continuation, current, out, position);
            }
            current.pop();
        }
        GlobalAssertion::Rec { body, .. } => collect_paths(body, current, out, position),
        GlobalAssertion::Call { .. } | GlobalAssertion::End => {
            out.push(current.clone());
        }
    }
}
