//! Simulated time with microsecond resolution.
//!
//! Integer time keeps step boundaries and transfer completions exact, so
//! event logs compare byte-for-byte across runs.

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use thiserror::Error;

const MICROS_PER_SEC: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimTime(u64);

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid timestamp `{0}`")]
pub struct ParseTimeError(pub String);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    pub const fn from_secs(s: u64) -> Self {
        SimTime(s * MICROS_PER_SEC)
    }

    /// Rounds to the nearest microsecond. Negative and NaN inputs map to zero.
    pub fn from_secs_f64(s: f64) -> Self {
        if !(s > 0.0) {
            return SimTime::ZERO;
        }
        let us = (s * MICROS_PER_SEC as f64).round();
        if us >= u64::MAX as f64 {
            SimTime::MAX
        } else {
            SimTime(us as u64)
        }
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / MICROS_PER_SEC as f64
    }

    pub fn saturating_add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(rhs.0))
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:06}", self.0 / MICROS_PER_SEC, self.0 % MICROS_PER_SEC)
    }
}

impl FromStr for SimTime {
    type Err = ParseTimeError;

    /// Parses decimal seconds with at most six fractional digits, exactly.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseTimeError(s.to_string());
        let (whole, frac) = match s.split_once('.') {
            Some((w, f)) => (w, f),
            None => (s, ""),
        };
        if whole.is_empty() || frac.len() > 6 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let secs: u64 = whole.parse().map_err(|_| err())?;
        let mut micros = 0u64;
        for (i, b) in frac.bytes().enumerate() {
            micros += u64::from(b - b'0') * 10u64.pow(5 - i as u32);
        }
        secs.checked_mul(MICROS_PER_SEC)
            .and_then(|us| us.checked_add(micros))
            .map(SimTime)
            .ok_or_else(err)
    }
}

/// Time to push `size_bytes` through a link of `bandwidth_bps`, rounded up to
/// the next microsecond.
pub fn transfer_duration(size_bytes: u64, bandwidth_bps: u64) -> SimTime {
    assert!(bandwidth_bps > 0, "bandwidth must be positive");
    let bits = u128::from(size_bytes) * 8 * u128::from(MICROS_PER_SEC);
    let bw = u128::from(bandwidth_bps);
    SimTime(bits.div_ceil(bw) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse() {
        let t = SimTime::from_micros(12_300_450);
        assert_eq!(t.to_string(), "12.300450");
        assert_eq!("12.300450".parse::<SimTime>().unwrap(), t);
        assert_eq!("7".parse::<SimTime>().unwrap(), SimTime::from_secs(7));
        assert_eq!("0.5".parse::<SimTime>().unwrap(), SimTime::from_micros(500_000));
        assert!("1.2345678".parse::<SimTime>().is_err());
        assert!("-1".parse::<SimTime>().is_err());
        assert!(".5".parse::<SimTime>().is_err());
    }

    #[test]
    fn from_secs_f64_rounds() {
        assert_eq!(SimTime::from_secs_f64(0.1), SimTime::from_micros(100_000));
        assert_eq!(SimTime::from_secs_f64(43_200.0), SimTime::from_secs(43_200));
        assert_eq!(SimTime::from_secs_f64(-3.0), SimTime::ZERO);
        assert_eq!(SimTime::from_secs_f64(f64::NAN), SimTime::ZERO);
    }

    #[test]
    fn transfer_durations() {
        assert_eq!(transfer_duration(1_000_000, 10_000_000), SimTime::from_micros(800_000));
        assert_eq!(transfer_duration(500_000, 125_000), SimTime::from_secs(32));
        // 1 byte at 3 b/s is 2.666..s, rounded up
        assert_eq!(transfer_duration(1, 3), SimTime::from_micros(2_666_667));
    }
}
