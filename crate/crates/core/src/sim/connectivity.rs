use std::collections::BTreeSet;

use crate::positioning::Position;
use crate::NodeId;

/// Unordered node pair, stored as `(min, max)`.
pub type LinkKey = (NodeId, NodeId);

pub fn link_key(a: NodeId, b: NodeId) -> LinkKey {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// All pairs within `range` meters, boundary inclusive. Sweeps nodes sorted
/// by x so only pairs within `range` on that axis are measured.
pub fn links_in_range(positions: &[Position], range: f64) -> BTreeSet<LinkKey> {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&i, &j| positions[i].x.total_cmp(&positions[j].x).then(i.cmp(&j)));
    let mut out = BTreeSet::new();
    for (k, &i) in order.iter().enumerate() {
        let pi = positions[i];
        for &j in &order[k + 1..] {
            let pj = positions[j];
            if pj.x - pi.x > range {
                break;
            }
            if pi.distance(&pj) <= range {
                out.insert(link_key(i as NodeId, j as NodeId));
            }
        }
    }
    out
}

/// Links that appeared and disappeared relative to `previous`, both in
/// ascending pair order, plus the new link set.
pub fn update_connectivity(
    previous: &BTreeSet<LinkKey>,
    positions: &[Position],
    range: f64,
) -> (BTreeSet<LinkKey>, Vec<LinkKey>, Vec<LinkKey>) {
    let current = links_in_range(positions, range);
    let up = current.difference(previous).copied().collect();
    let down = previous.difference(&current).copied().collect();
    (current, up, down)
}
