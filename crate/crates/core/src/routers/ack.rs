use std::collections::{BTreeMap, BTreeSet};

use crate::buffer::{Buffer, BufferEntry};
use crate::time::SimTime;
use crate::MessageId;

/// Delivered message ids a node knows about, each kept until the message's
/// own expiry time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AckSet {
    entries: BTreeMap<MessageId, SimTime>,
}

impl AckSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns true if the id was not known yet.
    pub fn record(&mut self, msg: MessageId, expires_at: SimTime) -> bool {
        self.entries.insert(msg, expires_at).is_none()
    }

    pub fn contains(&self, msg: MessageId) -> bool {
        self.entries.contains_key(&msg)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> BTreeSet<MessageId> {
        self.entries.keys().copied().collect()
    }

    pub fn expiry(&self, msg: MessageId) -> Option<SimTime> {
        self.entries.get(&msg).copied()
    }

    /// Drops entries whose message has expired by `now`.
    pub fn prune(&mut self, now: SimTime) -> usize {
        let before = self.entries.len();
        self.entries.retain(|_, exp| *exp > now);
        before - self.entries.len()
    }
}

/// Records an acknowledgement and purges any buffered copy. Returns the purged
/// copy, if there was one.
pub fn record_delivery_ack(acks: &mut AckSet, buffer: &mut Buffer, msg: MessageId, expires_at: SimTime) -> Option<BufferEntry> {
    acks.record(msg, expires_at);
    buffer.remove(msg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ack_purges_copy() {
        let mut acks = AckSet::new();
        let mut buf = Buffer::new(10);
        buf.admit(3, 4, SimTime::ZERO, |_| false).unwrap();
        let purged = record_delivery_ack(&mut acks, &mut buf, 3, SimTime::from_secs(100));
        assert_eq!(purged.map(|e| e.msg), Some(3));
        assert!(buf.is_empty() && acks.contains(3));
    }

    #[test]
    fn unknown_id_is_stored() {
        let mut acks = AckSet::new();
        let mut buf = Buffer::new(10);
        assert!(record_delivery_ack(&mut acks, &mut buf, 42, SimTime::from_secs(5)).is_none());
        assert!(acks.contains(42));
    }

    #[test]
    fn pruned_after_expiry() {
        // Created at t=0 with a 5 h TTL, checked 5 h after expiry.
        let mut acks = AckSet::new();
        let ttl = SimTime::from_secs(5 * 3600);
        acks.record(1, ttl);
        acks.record(2, ttl + SimTime::from_secs(10 * 3600));
        assert_eq!(acks.prune(ttl + ttl), 1);
        assert!(!acks.contains(1) && acks.contains(2));
    }
}
