use ndarray::{Array2, ArrayView2, Axis};

use super::dataset::ClipFeatureSequence;
use crate::error::{Error, Result};

/// Start offsets of the frame windows: stride `clip_len * (1 - overlap)`
/// rounded down (at least 1), plus a final window flush with the end of the
/// sequence when the stride does not land there.
pub fn window_starts(frames: usize, clip_len: usize, overlap_fraction: f64) -> Result<Vec<usize>> {
    if clip_len == 0 {
        return Err(Error::Config("clip length must be positive".into()));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::Config(format!("overlap fraction {overlap_fraction} not in [0, 1)")));
    }
    if frames < clip_len {
        return Err(Error::TooFewFrames { frames, clip_len });
    }
    let stride = ((clip_len as f64 * (1.0 - overlap_fraction)).floor() as usize).max(1);
    let last = frames - clip_len;
    let mut starts: Vec<usize> = (0..=last).step_by(stride).collect();
    if *starts.last().unwrap() != last {
        starts.push(last);
    }
    Ok(starts)
}

/// Mean-pools overlapping windows of frame features into clip features.
pub fn window_clips(
    frames: ArrayView2<'_, f64>,
    clip_len: usize,
    overlap_fraction: f64,
) -> Result<ClipFeatureSequence> {
    let starts = window_starts(frames.nrows(), clip_len, overlap_fraction)?;
    let mut clips = Array2::zeros((starts.len(), frames.ncols()));
    for (row, &s) in clips.rows_mut().into_iter().zip(&starts) {
        let window = frames.slice(ndarray::s![s..s + clip_len, ..]);
        window.mean_axis(Axis(0)).unwrap().assign_to(row);
    }
    ClipFeatureSequence::new(clips)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_clip_setting() {
        assert_eq!(window_starts(32, 16, 0.5).unwrap(), [0, 8, 16]);
        assert_eq!(window_starts(16, 16, 0.5).unwrap(), [0]);
        assert!(matches!(window_starts(10, 16, 0.5), Err(Error::TooFewFrames { .. })));
    }

    #[test]
    fn final_window_is_anchored_to_end() {
        assert_eq!(window_starts(20, 16, 0.5).unwrap(), [0, 4]);
        assert_eq!(window_starts(27, 16, 0.5).unwrap(), [0, 8, 11]);
    }

    #[test]
    fn count_matches_closed_form() {
        for clip_len in 1..=16 {
            for &overlap in &[0.0, 0.25, 0.5, 0.75, 0.9] {
                let stride = ((clip_len as f64 * (1.0 - overlap)).floor() as usize).max(1);
                for frames in clip_len..=10 * clip_len {
                    let span = frames - clip_len;
                    let expected = span / stride + 1 + usize::from(span % stride != 0);
                    let starts = window_starts(frames, clip_len, overlap).unwrap();
                    assert_eq!(starts.len(), expected, "T={frames} L={clip_len} o={overlap}");
                    assert!(starts.windows(2).all(|w| w[0] < w[1]));
                    assert_eq!(*starts.last().unwrap(), span);
                }
            }
        }
    }

    #[test]
    fn mean_pooling() {
        let frames = Array2::from_shape_fn((4, 2), |(i, j)| (i * 2 + j) as f64);
        let clips = window_clips(frames.view(), 2, 0.5).unwrap();
        assert_eq!(clips.len(), 3);
        assert_eq!(clips.clip(0).to_vec(), [1.0, 2.0]);
        assert_eq!(clips.clip(2).to_vec(), [5.0, 6.0]);
    }
}
