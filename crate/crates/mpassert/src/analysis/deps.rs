use std::collections::BTreeSet;

use crate::syntax::{Channel, Participant};

/// A communication prefix `sender -> receiver : channel` at a fixed
/// position of the (unfolded) global tree; positions induce the strict
/// order between prefixes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prefix {
    pub sender: Participant,
    pub receiver: Participant,
    pub channel: Channel,
    pub position: usize,
}

impl Prefix {
    pub fn new(
        sender: impl Into<String>,
        receiver: impl Into<String>,
        channel: impl Into<String>,
        position: usize,
    ) -> Self {
        Prefix {
            sender: Participant::new(sender),
            receiver: Participant::new(receiver),
            channel: Channel::new(channel),
            position,
        }
    }
}

/// The three dependency relations between prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DepKind {
    /// Input-input: both receptions at the same participant.
    II,
    /// Input-output: the first prefix's receiver sends the second.
    IO,
    /// Output-output: same sender writing the same channel.
    OO,
}

/// Dependency relations holding from `p1` to `p2`, which must be ordered
/// (`p1.position < p2.position`):
///
/// * `II` when both receivers coincide and either the channels differ or
///   the senders coincide too;
/// * `IO` when `p1`'s receiver is `p2`'s sender and the channels differ;
/// * `OO` when the senders and the channels both coincide.
pub fn dependencies(p1: &Prefix, p2: &Prefix) -> BTreeSet<DepKind> {
    debug_assert!(p1.position < p2.position, "dependencies are ordered by position");
    let mut out = BTreeSet::new();
    let same_channel = p1.channel == p2.channel;
    if p1.receiver == p2.receiver && (!same_channel || p1.sender == p2.sender) {
        out.insert(DepKind::II);
    }
    if p1.receiver == p2.sender && !same_channel {
        out.insert(DepKind::IO);
    }
    if p1.sender == p2.sender && same_channel {
        out.insert(DepKind::OO);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn buyer_seller_opening_is_io() {
        // B1 -> S : s followed by S -> B1 : b1.
        let p1 = Prefix::new("B1", "S", "s", 0);
        let p2 = Prefix::new("S", "B1", "b1", 1);
        let deps = dependencies(&p1, &p2);
        assert_eq!(deps.into_iter().collect::<Vec<_>>(), vec![DepKind::IO]);
    }

    #[test]
    fn same_sender_same_channel_is_oo() {
        let p1 = Prefix::new("A", "B", "k", 0);
        let p2 = Prefix::new("A", "C", "k", 1);
        let deps = dependencies(&p1, &p2);
        assert_eq!(deps.into_iter().collect::<Vec<_>>(), vec![DepKind::OO]);
    }

    #[test]
    fn disjoint_prefixes_are_unrelated() {
        let p1 = Prefix::new("A", "B", "k", 0);
        let p2 = Prefix::new("C", "D", "m", 1);
        assert!(dependencies(&p1, &p2).is_empty());
    }

    #[test]
    fn same_receiver_same_channel_needs_same_sender() {
        let p1 = Prefix::new("A", "B", "k", 0);
        let p2 = Prefix::new("C", "B", "k", 1);
        assert!(dependencies(&p1, &p2).is_empty());
        let p2 = Prefix::new("A", "B", "k", 1);
        let deps = dependencies(&p1, &p2);
        assert!(deps.contains(&DepKind::II));
        assert!(deps.contains(&DepKind::OO));
    }
}
