use crate::error::{Error, Result};

/// Minimal edit operations turning a hypothesis into its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EditBreakdown {
    pub substitutions: usize,
    /// Reference words missing from the hypothesis.
    pub insertions: usize,
    /// Hypothesis words absent from the reference.
    pub deletions: usize,
    pub reference_len: usize,
}

impl EditBreakdown {
    pub fn errors(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    /// `1 - (S + I + D) / N`; negative when the hypothesis is much longer
    /// than the reference.
    pub fn accuracy(&self) -> f64 {
        1.0 - self.errors() as f64 / self.reference_len as f64
    }
}

/// Unit-cost edit distance from `hyp` to `reference`. Among minimal
/// alignments the backtrace prefers substitution (or match), then deletion,
/// then insertion.
pub fn edit_breakdown<T: PartialEq>(hyp: &[T], reference: &[T]) -> Result<EditBreakdown> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let (h, r) = (hyp.len(), reference.len());
    let mut cost = vec![vec![0usize; r + 1]; h + 1];
    for (i, row) in cost.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=r {
        cost[0][j] = j;
    }
    for i in 1..=h {
        for j in 1..=r {
            let diag = cost[i - 1][j - 1] + usize::from(hyp[i - 1] != reference[j - 1]);
            cost[i][j] = diag.min(cost[i - 1][j] + 1).min(cost[i][j - 1] + 1);
        }
    }

    let mut out = EditBreakdown { reference_len: r, ..EditBreakdown::default() };
    let (mut i, mut j) = (h, r);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let differs = hyp[i - 1] != reference[j - 1];
            if cost[i][j] == cost[i - 1][j - 1] + usize::from(differs) {
                out.substitutions += usize::from(differs);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && cost[i][j] == cost[i - 1][j] + 1 {
            out.deletions += 1;
            i -= 1;
        } else {
            out.insertions += 1;
            j -= 1;
        }
    }
    debug_assert_eq!(out.errors(), cost[h][r]);
    Ok(out)
}

pub fn accuracy<T: PartialEq>(hyp: &[T], reference: &[T]) -> Result<f64> {
    Ok(edit_breakdown(hyp, reference)?.accuracy())
}
