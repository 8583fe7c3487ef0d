use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed integer interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Domain(format!("empty interval {lo}..{hi}")));
        }
        Ok(Self { lo, hi })
    }

    /// Interval of `len` sites centred on the origin: `[-len/2, len - len/2 - 1]`.
    pub fn centered(len: usize) -> Self {
        let half = (len / 2) as i64;
        Self {
            lo: -half,
            hi: len as i64 - half - 1,
        }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, site: i64) -> bool {
        self.lo <= site && site <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn sites(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// Parses `a..b` (inclusive) or a single site `a`.
impl FromStr for Interval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| Error::Parse(format!("bad interval bound {t:?}: {e}")))
        };
        match s.find("..") {
            Some(pos) if pos > 0 => {
                let hi = s[pos + 2..].trim_start_matches('=');
                Interval::new(parse(&s[..pos])?, parse(hi)?)
            }
            _ => {
                let site = parse(s)?;
                Interval::new(site, site)
            }
        }
    }
}
