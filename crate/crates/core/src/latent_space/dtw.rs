//! One-clip-per-step dynamic time warping between latent clip and word
//! sequences.
//!
//! `D[i,j] = min(D[i-1,j], D[i-1,j-1]) + d(i,j)`: every step consumes exactly
//! one clip, and the word index either stays or advances by one. There is no
//! `(i, j-1)` predecessor, so a path exists only when `n >= m`.

use ndarray::{Array2, ArrayView2};

use super::params::euclidean;
use super::window::WindowPolicy;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DtwTable {
    /// Accumulated cost, `+inf` where no path reaches the cell.
    pub cost: Array2<f64>,
    /// Local distances `d(i,j)`, `+inf` outside the feasible region.
    pub local: Array2<f64>,
}

/// Alignment of clips (0-based) to sentence positions (0-based), one entry
/// per clip.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentPath(pub Vec<(usize, usize)>);

impl AlignmentPath {
    pub fn cells(&self) -> &[(usize, usize)] {
        &self.0
    }

    /// Checks the monotone one-clip-per-step shape for an `n x m` table.
    pub fn is_valid(&self, n: usize, m: usize) -> bool {
        let p = &self.0;
        p.len() == n
            && p.first() == Some(&(0, 0))
            && p.last() == Some(&(n - 1, m - 1))
            && p.windows(2).all(|w| {
                let ((i0, j0), (i1, j1)) = (w[0], w[1]);
                i1 == i0 + 1 && (j1 == j0 || j1 == j0 + 1)
            })
    }
}

/// Fills the DTW table. `policy`, when given, masks cells outside its band.
pub fn dtw(
    clips: ArrayView2<'_, f64>,
    words: ArrayView2<'_, f64>,
    policy: Option<&WindowPolicy>,
) -> Result<DtwTable> {
    let (n, m) = (clips.nrows(), words.nrows());
    if n == 0 || m == 0 {
        return Err(Error::Shape("empty sequence".into()));
    }
    if clips.ncols() != words.ncols() {
        return Err(Error::Shape(format!(
            "latent dimensions {} and {}",
            clips.ncols(),
            words.ncols()
        )));
    }
    if m > n {
        return Err(Error::Infeasible);
    }
    if let Some(p) = policy {
        if (p.clips, p.words) != (n, m) {
            return Err(Error::Shape("window policy built for a different table".into()));
        }
    }

    let mut local = Array2::from_elem((n, m), f64::INFINITY);
    let mut cost = Array2::from_elem((n, m), f64::INFINITY);
    for i in 0..n {
        for j in 0..m.min(i + 1) {
            if policy.is_some_and(|p| !p.feasible(i, j)) {
                continue;
            }
            let d = euclidean(clips.row(i), words.row(j));
            local[[i, j]] = d;
            cost[[i, j]] = match (i, j) {
                (0, 0) => d,
                (_, 0) => cost[[i - 1, 0]] + d,
                _ => cost[[i - 1, j]].min(cost[[i - 1, j - 1]]) + d,
            };
        }
    }
    if !cost[[n - 1, m - 1]].is_finite() {
        return Err(Error::Infeasible);
    }
    Ok(DtwTable { cost, local })
}

impl DtwTable {
    pub fn clips(&self) -> usize {
        self.cost.nrows()
    }

    pub fn words(&self) -> usize {
        self.cost.ncols()
    }

    /// `D[n,m]`.
    pub fn distance(&self) -> f64 {
        self.cost[[self.clips() - 1, self.words() - 1]]
    }

    /// Recovers the optimal path, preferring the diagonal predecessor on ties.
    pub fn backtrack(&self) -> Result<AlignmentPath> {
        let (n, m) = (self.clips(), self.words());
        if !self.distance().is_finite() {
            return Err(Error::Infeasible);
        }
        let mut path = Vec::with_capacity(n);
        let mut j = m - 1;
        for i in (0..n).rev() {
            path.push((i, j));
            if i == 0 {
                break;
            }
            if j > 0 && self.cost[[i - 1, j - 1]] <= self.cost[[i - 1, j]] {
                j -= 1;
            }
        }
        path.reverse();
        if path[0] != (0, 0) {
            return Err(Error::Infeasible);
        }
        Ok(AlignmentPath(path))
    }

    /// Smallest gap between the two predecessor costs along `path`, over the
    /// steps where both are finite. Small margins mean the optimum is nearly
    /// tied and the loss is close to a kink.
    pub fn tie_margin(&self, path: &AlignmentPath) -> f64 {
        path.cells()
            .iter()
            .filter(|&&(i, j)| i > 0 && j > 0)
            .map(|&(i, j)| (self.cost[[i - 1, j]] - self.cost[[i - 1, j - 1]]).abs())
            .filter(|x| x.is_finite())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_path_distance(&self, path: &AlignmentPath) -> f64 {
        path.cells().iter().map(|&(i, j)| self.local[[i, j]]).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn base_case() {
        let t = dtw(array![[0.0, 0.0]].view(), array![[3.0, 4.0]].view(), None).unwrap();
        assert_eq!(t.distance(), 5.0);
        assert_eq!(t.backtrack().unwrap().0, [(0, 0)]);
    }

    #[test]
    fn forced_diagonal_with_unit_distances() {
        let clips = array![[1.0], [1.0]];
        let words = array![[0.0], [0.0]];
        let t = dtw(clips.view(), words.view(), None).unwrap();
        assert_eq!(t.distance(), 2.0);
        assert_eq!(t.cost[[0, 1]], f64::INFINITY);
    }

    #[test]
    fn square_tables_align_diagonally() {
        let clips = array![[0.0], [5.0], [1.0], [9.0]];
        let words = array![[2.0], [2.0], [7.0], [3.0]];
        let path = dtw(clips.view(), words.view(), None).unwrap().backtrack().unwrap();
        assert_eq!(path.0, [(0, 0), (1, 1), (2, 2), (3, 3)]);
    }

    #[test]
    fn single_word_takes_every_clip() {
        let clips = array![[0.0], [5.0], [1.0]];
        let t = dtw(clips.view(), array![[2.0]].view(), None).unwrap();
        assert_eq!(t.distance(), 2.0 + 3.0 + 1.0);
        assert_eq!(t.backtrack().unwrap().0, [(0, 0), (1, 0), (2, 0)]);
    }

    #[test]
    fn ties_prefer_diagonal() {
        // every cell costs 1: both predecessors of (2,1) tie
        let clips = array![[1.0], [1.0], [1.0]];
        let words = array![[0.0], [0.0]];
        let t = dtw(clips.view(), words.view(), None).unwrap();
        assert_eq!(t.backtrack().unwrap().0, [(0, 0), (1, 0), (2, 1)]);
        assert_eq!(t.tie_margin(&t.backtrack().unwrap()), 0.0);
    }

    #[test]
    fn errors() {
        let a = array![[0.0]];
        let b = array![[0.0], [1.0]];
        assert!(matches!(dtw(a.view(), b.view(), None), Err(Error::Infeasible)));
        assert!(dtw(Array2::zeros((0, 1)).view(), a.view(), None).is_err());
        assert!(dtw(array![[0.0, 1.0]].view(), a.view(), None).is_err());
    }
}
