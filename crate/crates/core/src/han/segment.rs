use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

/// How clips are grouped into pseudo-word segments before encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Two halves; the first takes the extra clip.
    TwoSplit,
    /// Runs of two adjacent clips; the last may be a singleton.
    PairSplit,
    /// `k` near-equal runs, longer ones first.
    EvenK(usize),
}

impl Strategy {
    /// Seven is the mean training-sentence length of the original corpus.
    pub const DEFAULT_K: usize = 7;

    pub fn code(self) -> (u32, u32) {
        match self {
            Strategy::TwoSplit => (0, 0),
            Strategy::PairSplit => (1, 0),
            Strategy::EvenK(k) => (2, k as u32),
        }
    }

    pub fn from_code(code: u32, k: u32) -> Result<Self> {
        match (code, k) {
            (0, _) => Ok(Strategy::TwoSplit),
            (1, _) => Ok(Strategy::PairSplit),
            (2, k) if k > 0 => Ok(Strategy::EvenK(k as usize)),
            _ => Err(Error::Config(format!("invalid strategy code ({code}, {k})"))),
        }
    }

    pub fn all() -> [Strategy; 3] {
        [Strategy::TwoSplit, Strategy::PairSplit, Strategy::EvenK(Self::DEFAULT_K)]
    }
}

impl Default for Strategy {
    fn default() -> Self {
        Strategy::EvenK(Self::DEFAULT_K)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::TwoSplit => f.write_str("two_split"),
            Strategy::PairSplit => f.write_str("pair_split"),
            Strategy::EvenK(k) => write!(f, "even_k:{k}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two_split" => Ok(Strategy::TwoSplit),
            "pair_split" => Ok(Strategy::PairSplit),
            "even_k" => Ok(Strategy::default()),
            _ => match s.strip_prefix("even_k:").map(str::parse::<usize>) {
                Some(Ok(k)) if k > 0 => Ok(Strategy::EvenK(k)),
                _ => Err(Error::Config(format!(
                    "unknown strategy {s:?} (expected two_split, pair_split or even_k:<k>)"
                ))),
            },
        }
    }
}

/// Ordered, disjoint, non-empty clip ranges covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation(Vec<Range<usize>>);

impl Segmentation {
    pub fn ranges(&self) -> &[Range<usize>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.0.iter().map(|r| r.len()).collect()
    }

    pub fn covers(&self, n: usize) -> bool {
        let mut at = 0;
        for r in &self.0 {
            if r.start != at || r.is_empty() {
                return false;
            }
            at = r.end;
        }
        at == n && n > 0
    }
}

pub fn segment_clips(n: usize, strategy: Strategy) -> Segmentation {
    assert!(n > 0, "cannot segment an empty clip sequence");
    match strategy {
        Strategy::TwoSplit => even(n, 2),
        Strategy::PairSplit => Segmentation((0..n).step_by(2).map(|s| s..(s + 2).min(n)).collect()),
        Strategy::EvenK(k) => even(n, k.max(1)),
    }
}

fn even(n: usize, k: usize) -> Segmentation {
    let k = k.min(n);
    let (base, extra) = (n / k, n % k);
    let mut at = 0;
    let ranges = (0..k)
        .map(|i| {
            let len = base + usize::from(i < extra);
            at += len;
            at - len..at
        })
        .collect();
    Segmentation(ranges)
}
