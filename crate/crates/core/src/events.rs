//! Event families on spin configurations.
//!
//! Sites outside the evaluation window read as the homogeneous boundary
//! sign, so wells touching the window edge see the boundary as their
//! neighbour.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lattice::{Sign, SpinWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventSpec {
    /// `sigma_i = tau`.
    SpinAt { site: i64, sign: Sign },
    /// `sigma = tau` on every site of the interval.
    RunEquals { interval: Interval, sign: Sign },
    /// The interval is constant (either sign).
    RunAny { interval: Interval },
    /// Some sub-interval of `region` with at least `min_len` sites is constant.
    LongRun { region: Interval, min_len: usize },
    /// `sigma = tau` on the interval and `-tau` on both neighbours.
    Well { interval: Interval, sign: Sign },
    /// Some well of sign `tau` with at most `max_len` sites contains `site`.
    SmallWellAt { site: i64, max_len: usize, sign: Sign },
    /// Some site of `region` lies in a well (either sign) of at most `max_len` sites.
    AnySmallWell { region: Interval, max_len: usize },
}

impl EventSpec {
    /// Checks that every referenced site lies in `window`.
    pub fn validate(&self, window: Interval) -> Result<()> {
        let inside = match *self {
            EventSpec::SpinAt { site, .. } | EventSpec::SmallWellAt { site, .. } => window.contains(site),
            EventSpec::RunEquals { interval, .. }
            | EventSpec::RunAny { interval }
            | EventSpec::Well { interval, .. } => window.contains_interval(&interval),
            EventSpec::LongRun { region, .. } | EventSpec::AnySmallWell { region, .. } => {
                window.contains_interval(&region)
            }
        };
        if !inside {
            return Err(Error::Domain(format!("event {self} reaches outside window {window}")));
        }
        match *self {
            EventSpec::LongRun { min_len: 0, .. } => Err(Error::Domain("long_run needs min_len >= 1".into())),
            EventSpec::SmallWellAt { max_len: 0, .. } | EventSpec::AnySmallWell { max_len: 0, .. } => {
                Err(Error::Domain("well length bound must be >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// The same event with every sign reversed.
    pub fn conjugate(&self) -> EventSpec {
        match *self {
            EventSpec::SpinAt { site, sign } => EventSpec::SpinAt { site, sign: sign.flip() },
            EventSpec::RunEquals { interval, sign } => EventSpec::RunEquals {
                interval,
                sign: sign.flip(),
            },
            EventSpec::Well { interval, sign } => EventSpec::Well {
                interval,
                sign: sign.flip(),
            },
            EventSpec::SmallWellAt { site, max_len, sign } => EventSpec::SmallWellAt {
                site,
                max_len,
                sign: sign.flip(),
            },
            other => other,
        }
    }

    /// Whether the configuration realizes the event.
    pub fn evaluate(&self, spins: &SpinWindow) -> bool {
        evaluate_event(spins, self)
    }
}

pub fn evaluate_event(spins: &SpinWindow, event: &EventSpec) -> bool {
    match *event {
        EventSpec::SpinAt { site, sign } => spins.spin(site) == sign.value(),
        EventSpec::RunEquals { interval, sign } => interval.sites().all(|i| spins.spin(i) == sign.value()),
        EventSpec::RunAny { interval } => {
            let first = spins.spin(interval.lo);
            interval.sites().all(|i| spins.spin(i) == first)
        }
        EventSpec::LongRun { region, min_len } => longest_block(spins, region) >= min_len,
        EventSpec::Well { interval, sign } => {
            let t = sign.value();
            spins.spin(interval.lo - 1) == -t
                && spins.spin(interval.hi + 1) == -t
                && interval.sites().all(|i| spins.spin(i) == t)
        }
        EventSpec::SmallWellAt { site, max_len, sign } => small_well_at(spins, site, max_len, sign),
        EventSpec::AnySmallWell { region, max_len } => region.sites().any(|i| {
            small_well_at(spins, i, max_len, Sign::Plus) || small_well_at(spins, i, max_len, Sign::Minus)
        }),
    }
}

/// Length of the longest constant block of `sigma` restricted to `region`.
fn longest_block(spins: &SpinWindow, region: Interval) -> usize {
    let mut best = 0;
    let mut current = 0;
    let mut prev = 0i8;
    for i in region.sites() {
        let s = spins.spin(i);
        current = if s == prev { current + 1 } else { 1 };
        prev = s;
        best = best.max(current);
    }
    best
}

/// The well containing `site` is the maximal `tau`-block through it; it is
/// bounded on both sides by `-tau` unless it runs into a `tau` boundary, in
/// which case it is infinite.
fn small_well_at(spins: &SpinWindow, site: i64, max_len: usize, sign: Sign) -> bool {
    let t = sign.value();
    if spins.spin(site) != t {
        return false;
    }
    let window = spins.interval();
    let mut left = site;
    while spins.spin(left - 1) == t {
        left -= 1;
        if left < window.lo {
            return false;
        }
    }
    let mut right = site;
    while spins.spin(right + 1) == t {
        right += 1;
        if right > window.hi {
            return false;
        }
    }
    (right - left + 1) as usize <= max_len
}

impl fmt::Display for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventSpec::SpinAt { site, sign } => write!(f, "spin_at:{site}:{sign}"),
            EventSpec::RunEquals { interval, sign } => write!(f, "run_equals:{interval}:{sign}"),
            EventSpec::RunAny { interval } => write!(f, "run_any:{interval}"),
            EventSpec::LongRun { region, min_len } => write!(f, "long_run:{region}:{min_len}"),
            EventSpec::Well { interval, sign } => write!(f, "well:{interval}:{sign}"),
            EventSpec::SmallWellAt { site, max_len, sign } => write!(f, "small_well_at:{site}:{max_len}:{sign}"),
            EventSpec::AnySmallWell { region, max_len } => write!(f, "any_small_well:{region}:{max_len}"),
        }
    }
}

/// Parses the colon-separated form produced by `Display`, e.g.
/// `spin_at:0:+`, `run_equals:-2..2:-`, `long_run:-5..5:4`.
impl FromStr for EventSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Parse(format!("malformed event {s:?}"));
        let int = |t: &str| t.trim().parse::<i64>().map_err(|_| bad());
        let count = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let event = match parts.as_slice() {
            ["spin_at", site, sign] => EventSpec::SpinAt {
                site: int(site)?,
                sign: sign.parse()?,
            },
            ["run_equals", iv, sign] => EventSpec::RunEquals {
                interval: iv.parse()?,
                sign: sign.parse()?,
            },
            ["run_any", iv] => EventSpec::RunAny { interval: iv.parse()? },
            ["long_run", iv, len] => EventSpec::LongRun {
                region: iv.parse()?,
                min_len: count(len)?,
            },
            ["well", iv, sign] => EventSpec::Well {
                interval: iv.parse()?,
                sign: sign.parse()?,
            },
            ["small_well_at", site, len, sign] => EventSpec::SmallWellAt {
                site: int(site)?,
                max_len: count(len)?,
                sign: sign.parse()?,
            },
            ["any_small_well", iv, len] => EventSpec::AnySmallWell {
                region: iv.parse()?,
                max_len: count(len)?,
            },
            _ => return Err(bad()),
        };
        Ok(event)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn constant_window_is_a_long_run() {
        let s = SpinWindow::uniform(iv(-4, 4), Sign::Plus, Sign::Plus);
        for len in 1..=9 {
            assert!(evaluate_event(&s, &EventSpec::LongRun { region: iv(-4, 4), min_len: len }));
        }
        assert!(!evaluate_event(&s, &EventSpec::LongRun { region: iv(-4, 4), min_len: 10 }));
    }

    #[test]
    fn well_definition() {
        let s = SpinWindow::parse(-1, "+-+", Sign::Plus).unwrap();
        assert!(evaluate_event(&s, &EventSpec::Well { interval: iv(0, 0), sign: Sign::Minus }));
        assert!(!evaluate_event(&s, &EventSpec::Well { interval: iv(0, 0), sign: Sign::Plus }));
    }

    #[test]
    fn well_uses_boundary_outside_window() {
        let s = SpinWindow::parse(0, "-+", Sign::Plus).unwrap();
        assert!(evaluate_event(&s, &EventSpec::Well { interval: iv(0, 0), sign: Sign::Minus }));
        let s = SpinWindow::parse(0, "-+", Sign::Minus).unwrap();
        assert!(!evaluate_event(&s, &EventSpec::Well { interval: iv(0, 0), sign: Sign::Minus }));
    }

    #[test]
    fn small_well_walkthrough() {
        let s = SpinWindow::parse(0, "+--+", Sign::Plus).unwrap();
        let at = |len, sign| EventSpec::SmallWellAt { site: 1, max_len: len, sign };
        assert!(!evaluate_event(&s, &at(1, Sign::Minus)));
        assert!(evaluate_event(&s, &at(2, Sign::Minus)));
        assert!(!evaluate_event(&s, &at(2, Sign::Plus)));
        // a plus block running into a plus boundary is unbounded
        let edge = EventSpec::SmallWellAt { site: 0, max_len: 100, sign: Sign::Plus };
        assert!(!evaluate_event(&s, &edge));
        let any = EventSpec::AnySmallWell { region: iv(0, 3), max_len: 2 };
        assert!(evaluate_event(&s, &any));
        let none = SpinWindow::uniform(iv(0, 3), Sign::Plus, Sign::Plus);
        assert!(!evaluate_event(&none, &any));
    }

    #[test]
    fn run_events() {
        let s = SpinWindow::parse(-2, "++-++", Sign::Plus).unwrap();
        assert!(evaluate_event(&s, &EventSpec::RunEquals { interval: iv(-2, -1), sign: Sign::Plus }));
        assert!(!evaluate_event(&s, &EventSpec::RunEquals { interval: iv(-2, 0), sign: Sign::Plus }));
        assert!(evaluate_event(&s, &EventSpec::RunAny { interval: iv(0, 0) }));
        assert!(!evaluate_event(&s, &EventSpec::RunAny { interval: iv(-1, 0) }));
        assert!(evaluate_event(&s, &EventSpec::LongRun { region: iv(-2, 2), min_len: 2 }));
        assert!(!evaluate_event(&s, &EventSpec::LongRun { region: iv(-2, 2), min_len: 3 }));
    }

    #[test]
    fn validation_rejects_escaping_intervals() {
        let w = iv(-3, 3);
        assert!(EventSpec::SpinAt { site: 4, sign: Sign::Plus }.validate(w).is_err());
        assert!(EventSpec::RunAny { interval: iv(-4, 0) }.validate(w).is_err());
        assert!(EventSpec::LongRun { region: w, min_len: 0 }.validate(w).is_err());
        assert!(EventSpec::Well { interval: iv(-3, 3), sign: Sign::Plus }.validate(w).is_ok());
    }

    #[test]
    fn text_roundtrip() {
        let events = [
            EventSpec::SpinAt { site: 0, sign: Sign::Plus },
            EventSpec::RunEquals { interval: iv(-2, 2), sign: Sign::Minus },
            EventSpec::RunAny { interval: iv(1, 3) },
            EventSpec::LongRun { region: iv(-5, 5), min_len: 4 },
            EventSpec::Well { interval: iv(0, 1), sign: Sign::Plus },
            EventSpec::SmallWellAt { site: -1, max_len: 2, sign: Sign::Minus },
            EventSpec::AnySmallWell { region: iv(-3, 3), max_len: 3 },
        ];
        for e in events {
            assert_eq!(e.to_string().parse::<EventSpec>().unwrap(), e);
        }
        assert!("spin_at:0".parse::<EventSpec>().is_err());
    }
}
