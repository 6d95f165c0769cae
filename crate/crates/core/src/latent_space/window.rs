use crate::error::{Error, Result};

/// Banded feasibility region for windowed DTW.
///
/// Clips are covered by overlapping windows; words are spread in order across
/// the windows and each word may only align to clips of its window. The
/// proportional diagonal (clip `i` to word `i * m / n`) is always kept
/// feasible, so at least one monotone path exists. All indices are 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPolicy {
    pub clips: usize,
    pub words: usize,
    pub window_len: usize,
    pub overlap: usize,
    /// First clip of each window.
    pub starts: Vec<usize>,
    /// Window assigned to each word.
    pub word_window: Vec<usize>,
    /// Inclusive feasible clip range of each word.
    pub word_ranges: Vec<(usize, usize)>,
}

impl WindowPolicy {
    /// Window length `ceil(n/2)`, overlap `floor(n/4)`.
    pub fn default_for(clips: usize, words: usize) -> Result<Self> {
        Self::new(clips, words, clips.div_ceil(2), clips / 4)
    }

    pub fn new(clips: usize, words: usize, window_len: usize, overlap: usize) -> Result<Self> {
        if words == 0 || clips < words {
            return Err(Error::TooFewClips { id: String::new(), clips, words });
        }
        let window_len = window_len.clamp(1, clips);
        let overlap = overlap.min(window_len - 1);
        let stride = window_len - overlap;
        let last = clips - window_len;
        let mut starts: Vec<usize> = (0..=last).step_by(stride).collect();
        if *starts.last().unwrap() != last {
            starts.push(last);
        }

        let windows = starts.len();
        let word_window: Vec<usize> = (0..words)
            .map(|j| {
                if words == 1 {
                    0
                } else {
                    // round(j * (W-1) / (m-1)): first word to the first window,
                    // last word to the last
                    (2 * j * (windows - 1) + (words - 1)) / (2 * (words - 1))
                }
            })
            .collect();

        let word_ranges = (0..words)
            .map(|j| {
                if words == 1 {
                    return (0, clips - 1);
                }
                let w = word_window[j];
                let (lo, hi) = (starts[w], starts[w] + window_len - 1);
                // clips whose proportional word index is j
                let diag_lo = (j * clips).div_ceil(words);
                let diag_hi = ((j + 1) * clips).div_ceil(words) - 1;
                (lo.min(diag_lo), hi.max(diag_hi))
            })
            .collect();

        Ok(Self { clips, words, window_len, overlap, starts, word_window, word_ranges })
    }

    pub fn feasible(&self, clip: usize, word: usize) -> bool {
        let (lo, hi) = self.word_ranges[word];
        (lo..=hi).contains(&clip)
    }
}
