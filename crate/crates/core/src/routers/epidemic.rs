use super::{assemble_plan, EncounterSummary, Gate, HeldMessage, TransferPlan};

/// Flooding baseline: everything the peer lacks, oldest first, no limit.
pub fn epidemic_on_encounter(held: &[HeldMessage], peer: &EncounterSummary) -> TransferPlan {
    assemble_plan(held, peer, None, &|_| false, |_| Gate::Allow(None))
}

#[cfg(test)]
mod tests {
    use super::super::tests::held;
    use super::*;

    #[test]
    fn sends_everything_missing() {
        let peer = EncounterSummary::new(1);
        let h: Vec<_> = (0..6).map(|i| held(i, 9, 10 - i)).collect();
        let plan = epidemic_on_encounter(&h, &peer);
        assert_eq!(plan.transfer_count(), 6);
        assert_eq!(plan.limit, None);
        assert_eq!(plan.spread.first().unwrap().msg, 5, "oldest created first");
    }

    #[test]
    fn identical_buffers_spread_nothing() {
        let mut peer = EncounterSummary::new(1);
        let h: Vec<_> = (0..4).map(|i| held(i, 9, i)).collect();
        peer.messages.extend(0..4);
        assert!(epidemic_on_encounter(&h, &peer).spread.is_empty());
    }
}
