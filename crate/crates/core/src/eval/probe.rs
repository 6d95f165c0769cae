//! Agreement between the decoder's ranking of candidate sentences and
//! their latent-space DTW distance to the video.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Dataset, Sentence};
use crate::error::{Error, Result};
use crate::han::kbest_decode;
use crate::latent_space::relevance_loss;
use crate::trainer::Model;

/// Ranks with ties replaced by their average rank (1-based).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + end + 1) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = rank;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation; `None` when either side has no variance or
/// fewer than two points.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len());
    if x.len() < 2 {
        return None;
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbePoint {
    /// 1-based position in the beam output.
    pub rank: usize,
    pub tokens: Vec<usize>,
    pub log_prob: f64,
    pub dtw_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeVideo {
    pub id: String,
    pub points: Vec<ProbePoint>,
    /// `None` when the video was skipped.
    pub correlation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub videos: Vec<ProbeVideo>,
    pub mean_correlation: Option<f64>,
    pub reported: usize,
    pub skipped: usize,
}

impl ProbeReport {
    /// `video_id,rank,log_prob,dtw_distance,tokens`, one row per scored
    /// hypothesis; tokens are space-separated vocabulary indices.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("video_id,rank,log_prob,dtw_distance,tokens\n");
        for v in &self.videos {
            for p in &v.points {
                let tokens: Vec<String> = p.tokens.iter().map(|t| t.to_string()).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    v.id,
                    p.rank,
                    p.log_prob,
                    p.dtw_distance,
                    tokens.join(" ")
                );
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub k: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub windowed: bool,
    /// Decode length cap; the clip count of each video when `None`.
    pub max_len: Option<usize>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { k: 5, sample_count: 10, seed: 1, windowed: true, max_len: None }
    }
}

/// Beam-decodes `k` sentences for each sampled video and correlates beam
/// rank with DTW distance. Hypotheses that cannot be aligned (empty, or
/// longer than the video) are dropped; videos left with fewer than two
/// scored hypotheses, or with tied distances throughout, are skipped.
pub fn consistency_probe(model: &Model, dataset: &Dataset, cfg: &ProbeConfig) -> Result<ProbeReport> {
    if cfg.k < 2 {
        return Err(Error::Config("probe beam width must be at least 2".into()));
    }
    if dataset.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let count = cfg.sample_count.min(dataset.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let picks = sample(&mut rng, dataset.len(), count).into_vec();

    let mut videos = Vec::with_capacity(count);
    for idx in picks {
        let inst = &dataset.instances[idx];
        let n = inst.clips.len();
        let beam = kbest_decode(
            &model.han,
            &model.latent,
            &inst.clips,
            model.strategy,
            cfg.k,
            cfg.max_len.unwrap_or(n),
        )?;
        let mut points: Vec<ProbePoint> = Vec::new();
        for (r, hyp) in beam.into_iter().enumerate() {
            if hyp.tokens.is_empty()
                || hyp.tokens.len() > n
                || points.iter().any(|p| p.tokens == hyp.tokens)
            {
                continue;
            }
            let sentence = Sentence::new(hyp.tokens.clone())?;
            let dtw_distance = relevance_loss(&inst.clips, &sentence, &model.latent, cfg.windowed)?;
            points.push(ProbePoint { rank: r + 1, tokens: hyp.tokens, log_prob: hyp.log_prob, dtw_distance });
        }
        let ranks: Vec<f64> = points.iter().map(|p| p.rank as f64).collect();
        let dists: Vec<f64> = points.iter().map(|p| p.dtw_distance).collect();
        let correlation = spearman(&ranks, &dists);
        videos.push(ProbeVideo { id: inst.id.clone(), points, correlation });
    }
    let scored: Vec<f64> = videos.iter().filter_map(|v| v.correlation).collect();
    let mean_correlation = if scored.is_empty() {
        None
    } else {
        Some(scored.iter().sum::<f64>() / scored.len() as f64)
    };
    Ok(ProbeReport {
        reported: scored.len(),
        skipped: videos.len() - scored.len(),
        videos,
        mean_correlation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_average_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), [3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn monotone_relation_is_perfect() {
        let rank = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(spearman(&rank, &[0.1, 0.5, 0.7, 3.0, 9.0]), Some(1.0));
        assert_eq!(spearman(&rank, &[5.0, 4.0, 3.0, 2.0, 1.0]), Some(-1.0));
    }

    #[test]
    fn tied_distances_are_undefined() {
        assert_eq!(spearman(&[1.0, 2.0], &[0.3, 0.3]), None);
        assert_eq!(spearman(&[1.0], &[0.3]), None);
    }

    #[test]
    fn matches_classic_formula_without_ties() {
        // 1 - 6 Σd² / (n (n² - 1))
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = [2.0, 1.0, 4.0, 3.0, 6.0, 5.0];
        let d2: f64 = 6.0 * 1.0;
        let expect = 1.0 - 6.0 * d2 / (6.0 * 35.0);
        assert!((spearman(&x, &y).unwrap() - expect).abs() < 1e-12);
    }
}
