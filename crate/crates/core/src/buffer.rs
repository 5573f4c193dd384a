//! Per-node message store with drop-oldest admission.

use crate::time::SimTime;
use crate::MessageId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BufferEntry {
    pub msg: MessageId,
    pub size: u64,
    pub received_at: SimTime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdmitError {
    /// Already buffered or reserved.
    Duplicate,
    /// Cannot fit even after evicting every evictable message.
    NoRoom,
}

/// Bytes held by a node, kept in arrival order, plus space reserved for
/// incoming transfers that have not completed yet.
#[derive(Clone, Debug)]
pub struct Buffer {
    capacity: u64,
    used: u64,
    reserved: u64,
    entries: Vec<BufferEntry>,
    pending: Vec<(MessageId, u64)>,
}

impl Buffer {
    pub fn new(capacity: u64) -> Self {
        Buffer { capacity, used: 0, reserved: 0, entries: Vec::new(), pending: Vec::new() }
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    /// Bytes of messages actually stored.
    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn reserved(&self) -> u64 {
        self.reserved
    }

    pub fn free(&self) -> u64 {
        self.capacity - self.used - self.reserved
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Stored messages, oldest received first.
    pub fn entries(&self) -> &[BufferEntry] {
        &self.entries
    }

    pub fn contains(&self, msg: MessageId) -> bool {
        self.entries.iter().any(|e| e.msg == msg)
    }

    pub fn is_pending(&self, msg: MessageId) -> bool {
        self.pending.iter().any(|&(m, _)| m == msg)
    }

    /// Works out which messages must go for `size` more bytes to fit, evicting
    /// oldest-received first and skipping any for which `pinned` is true.
    /// Nothing is changed; an impossible fit returns `NoRoom`.
    pub fn plan_room(&self, msg: MessageId, size: u64, pinned: impl Fn(MessageId) -> bool) -> Result<Vec<MessageId>, AdmitError> {
        if self.contains(msg) || self.is_pending(msg) {
            return Err(AdmitError::Duplicate);
        }
        if size > self.capacity {
            return Err(AdmitError::NoRoom);
        }
        let mut free = self.free();
        let mut victims = Vec::new();
        for e in &self.entries {
            if free >= size {
                break;
            }
            if pinned(e.msg) {
                continue;
            }
            free += e.size;
            victims.push(e.msg);
        }
        if free >= size {
            Ok(victims)
        } else {
            Err(AdmitError::NoRoom)
        }
    }

    /// Evicts what `plan_room` chose and stores the message immediately.
    /// Returns the evicted ids in eviction order.
    pub fn admit(
        &mut self,
        msg: MessageId,
        size: u64,
        now: SimTime,
        pinned: impl Fn(MessageId) -> bool,
    ) -> Result<Vec<MessageId>, AdmitError> {
        let victims = self.plan_room(msg, size, pinned)?;
        for &v in &victims {
            self.remove(v);
        }
        self.entries.push(BufferEntry { msg, size, received_at: now });
        self.used += size;
        Ok(victims)
    }

    /// Like `admit`, but holds the space until `commit` or `release`.
    pub fn reserve(&mut self, msg: MessageId, size: u64, pinned: impl Fn(MessageId) -> bool) -> Result<Vec<MessageId>, AdmitError> {
        let victims = self.plan_room(msg, size, pinned)?;
        for &v in &victims {
            self.remove(v);
        }
        self.pending.push((msg, size));
        self.reserved += size;
        Ok(victims)
    }

    /// Turns a reservation into a stored message. Returns false if no
    /// reservation existed.
    pub fn commit(&mut self, msg: MessageId, now: SimTime) -> bool {
        let Some(size) = self.take_pending(msg) else {
            return false;
        };
        self.entries.push(BufferEntry { msg, size, received_at: now });
        self.used += size;
        true
    }

    pub fn release(&mut self, msg: MessageId) -> bool {
        self.take_pending(msg).is_some()
    }

    fn take_pending(&mut self, msg: MessageId) -> Option<u64> {
        let i = self.pending.iter().position(|&(m, _)| m == msg)?;
        let (_, size) = self.pending.remove(i);
        self.reserved -= size;
        Some(size)
    }

    pub fn remove(&mut self, msg: MessageId) -> Option<BufferEntry> {
        let i = self.entries.iter().position(|e| e.msg == msg)?;
        let e = self.entries.remove(i);
        self.used -= e.size;
        Some(e)
    }
}
