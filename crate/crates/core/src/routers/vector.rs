use super::centroid::message_limit;
use super::{assemble_plan, queue_length, EncounterSummary, Gate, HeldMessage, NodeRouting, TransferPlan};
use crate::positioning::Velocity;

/// Speeds below this are treated as standing still.
pub const MIN_SPEED: f64 = 1e-6;

/// Orthogonality of two headings, `|sin θ|`. A node with no usable heading
/// gets the full exchange.
pub fn vector_fraction(host: Velocity, peer: Velocity) -> f64 {
    let (a, b) = (host.magnitude(), peer.magnitude());
    if a < MIN_SPEED || b < MIN_SPEED {
        return 1.0;
    }
    (host.cross(&peer).abs() / (a * b)).clamp(0.0, 1.0)
}

pub fn vector_on_encounter(host: &mut NodeRouting, held: &[HeldMessage], peer: &EncounterSummary) -> TransferPlan {
    let fraction = vector_fraction(host.velocity.unwrap_or_default(), peer.velocity.unwrap_or_default());
    let limit = message_limit(fraction, queue_length(held, peer));
    assemble_plan(held, peer, Some(limit), &|_| false, |_| Gate::Allow(None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(vector_fraction(Velocity::new(3.0, 0.0), Velocity::new(7.0, 0.0)), 0.0);
        assert_eq!(vector_fraction(Velocity::new(3.0, 0.0), Velocity::new(-7.0, 0.0)), 0.0);
        assert_eq!(vector_fraction(Velocity::new(0.0, 2.0), Velocity::new(5.0, 0.0)), 1.0);
        let deg30 = 30f64.to_radians();
        let f = vector_fraction(Velocity::new(1.0, 0.0), Velocity::new(deg30.cos(), deg30.sin()));
        assert!((f - 0.5).abs() < 1e-12);
    }

    #[test]
    fn standing_still_gets_full_exchange() {
        assert_eq!(vector_fraction(Velocity::default(), Velocity::new(1.0, 1.0)), 1.0);
        assert_eq!(vector_fraction(Velocity::new(1.0, 1.0), Velocity::new(1e-9, 0.0)), 1.0);
    }
}
