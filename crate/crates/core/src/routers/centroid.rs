use super::{assemble_plan, queue_length, EncounterSummary, Gate, HeldMessage, NodeRouting, TransferPlan};

/// Share of the message list a node may spread to a peer whose centroid is
/// `distance_m` away, relative to the longest such distance seen so far.
///
/// Before any distance has been recorded (`max_distance_m == 0`) the ratio is
/// undefined and the full list is allowed.
pub fn centroid_fraction(distance_m: f64, max_distance_m: f64) -> f64 {
    debug_assert!(distance_m >= 0.0);
    if max_distance_m <= 0.0 {
        return 1.0;
    }
    (distance_m / max_distance_m).clamp(0.0, 1.0)
}

pub fn message_limit(fraction: f64, queue_length: usize) -> usize {
    debug_assert!((0.0..=1.0).contains(&fraction));
    (fraction * queue_length as f64).floor() as usize
}

/// Spread fraction for the host against this peer, updating the host's
/// running maximum. Missing centroids on either side count as a first
/// encounter.
pub(super) fn encounter_fraction(host: &mut NodeRouting, peer: &EncounterSummary) -> f64 {
    let (Some(mine), Some(theirs)) = (host.centroid.centroid(), peer.centroid) else {
        return 1.0;
    };
    let d = mine.distance(&theirs);
    let f = centroid_fraction(d, host.centroid.max_centroid_distance());
    host.centroid.observe_distance(d);
    f
}

pub fn centroid_on_encounter(host: &mut NodeRouting, held: &[HeldMessage], peer: &EncounterSummary) -> TransferPlan {
    let fraction = encounter_fraction(host, peer);
    let limit = message_limit(fraction, queue_length(held, peer));
    assemble_plan(held, peer, Some(limit), &|_| false, |_| Gate::Allow(None))
}

#[cfg(test)]
mod tests {
    use super::super::tests::held;
    use super::*;
    use crate::positioning::Position;

    fn host_at(p: Position, samples: usize) -> NodeRouting {
        let mut h = NodeRouting::new(0);
        for _ in 0..samples {
            h.observe_sample(p, 1.0);
        }
        h
    }

    #[test]
    fn fraction_examples() {
        assert_eq!(centroid_fraction(100.0, 100.0), 1.0);
        assert_eq!(centroid_fraction(50.0, 100.0), 0.5);
        assert_eq!(centroid_fraction(0.0, 100.0), 0.0);
        assert_eq!(centroid_fraction(30.0, 0.0), 1.0);
        assert_eq!(centroid_fraction(300.0, 100.0), 1.0);
    }

    #[test]
    fn limit_examples() {
        assert_eq!(message_limit(0.5, 10), 5);
        assert_eq!(message_limit(1.0, 17), 17);
        assert_eq!(message_limit(0.99, 1), 0);
        assert_eq!(message_limit(0.0, 9), 0);
    }

    #[test]
    fn first_encounter_is_full_exchange_and_sets_max() {
        let mut host = host_at(Position::new(0.0, 0.0), 3);
        let mut peer = EncounterSummary::new(1);
        peer.centroid = Some(Position::new(30.0, 40.0));
        let h = [held(1, 9, 0), held(2, 9, 1)];
        let plan = centroid_on_encounter(&mut host, &h, &peer);
        assert_eq!(plan.limit, Some(2));
        assert_eq!(plan.spread.len(), 2);
        assert_eq!(host.centroid.max_centroid_distance(), 50.0);

        // Half the max distance now allows half the list.
        peer.centroid = Some(Position::new(15.0, 20.0));
        let plan = centroid_on_encounter(&mut host, &h, &peer);
        assert_eq!(plan.limit, Some(1));
        assert_eq!(plan.spread.len(), 1);
        assert_eq!(plan.spread[0].msg, 1, "oldest first");
    }

    #[test]
    fn ack_purged_before_transfer() {
        let mut host = host_at(Position::new(0.0, 0.0), 1);
        let mut peer = EncounterSummary::new(1);
        peer.centroid = Some(Position::new(1.0, 0.0));
        peer.acks.insert(4);
        let plan = centroid_on_encounter(&mut host, &[held(4, 1, 0), held(5, 9, 0)], &peer);
        assert_eq!(plan.purge, vec![4]);
        assert!(!plan.direct.contains(&4));
        assert!(plan.spread.iter().all(|s| s.msg != 4));
    }

    #[test]
    fn direct_delivery_exempt_from_limit() {
        let mut host = host_at(Position::new(0.0, 0.0), 1);
        host.centroid.observe_distance(100.0);
        let mut peer = EncounterSummary::new(1);
        peer.centroid = Some(Position::new(0.0, 0.0));
        peer.neighbors.insert(2);
        let plan = centroid_on_encounter(&mut host, &[held(1, 1, 0), held(2, 2, 0), held(3, 9, 0)], &peer);
        assert_eq!(plan.limit, Some(0));
        assert_eq!(plan.direct, vec![1]);
        assert_eq!(plan.neighbor, vec![2]);
        assert!(plan.spread.is_empty());
    }

    #[test]
    fn identical_centroids_and_nothing_addressed_gives_empty_plan() {
        let mut host = host_at(Position::new(7.0, 7.0), 5);
        host.centroid.observe_distance(10.0);
        let mut peer = EncounterSummary::new(1);
        peer.centroid = Some(Position::new(7.0, 7.0));
        let plan = centroid_on_encounter(&mut host, &[held(1, 4, 0), held(2, 5, 0)], &peer);
        assert!(plan.is_empty());
    }
}
