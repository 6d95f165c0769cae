use lshan::latent_space::{dtw, WindowPolicy};
use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn local(a: &Array2<f64>, b: &Array2<f64>, i: usize, j: usize) -> f64 {
    (&a.row(i) - &b.row(j)).mapv(|x| x * x).sum().sqrt()
}

/// Minimum over every monotone path from (0,0) to (n-1,m-1) that advances
/// one clip per step and at most one word.
fn brute_force(a: &Array2<f64>, b: &Array2<f64>, allowed: &dyn Fn(usize, usize) -> bool) -> f64 {
    fn walk(
        a: &Array2<f64>,
        b: &Array2<f64>,
        allowed: &dyn Fn(usize, usize) -> bool,
        i: usize,
        j: usize,
        acc: f64,
        best: &mut f64,
    ) {
        if !allowed(i, j) {
            return;
        }
        let acc = acc + local(a, b, i, j);
        let (n, m) = (a.nrows(), b.nrows());
        if i == n - 1 {
            if j == m - 1 && acc < *best {
                *best = acc;
            }
            return;
        }
        walk(a, b, allowed, i + 1, j, acc, best);
        if j + 1 < m {
            walk(a, b, allowed, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(a, b, allowed, 0, 0, 0.0, &mut best);
    best
}

fn random_pair(rng: &mut ChaCha8Rng) -> (Array2<f64>, Array2<f64>) {
    let n = rng.random_range(1..=6);
    let m = rng.random_range(1..=n.min(4));
    let d = rng.random_range(1..=5);
    let a = Array2::from_shape_fn((n, d), |_| rng.random_range(-2.0..2.0));
    let b = Array2::from_shape_fn((m, d), |_| rng.random_range(-2.0..2.0));
    (a, b)
}

#[test]
fn unrestricted_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (a, b) = random_pair(&mut rng);
        let table = dtw(a.view(), b.view(), None).unwrap();
        let expect = brute_force(&a, &b, &|_, _| true);
        assert!((table.distance() - expect).abs() <= 1e-9, "{} vs {expect}", table.distance());
    }
}

#[test]
fn windowed_matches_enumeration_over_feasible_cells() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let (a, b) = random_pair(&mut rng);
        let policy = WindowPolicy::default_for(a.nrows(), b.nrows()).unwrap();
        let expect = brute_force(&a, &b, &|i, j| policy.feasible(i, j));
        match dtw(a.view(), b.view(), Some(&policy)) {
            Ok(t) => assert!((t.distance() - expect).abs() <= 1e-9),
            Err(_) => assert!(expect.is_infinite()),
        }
    }
}

#[test]
fn backtracked_path_sums_to_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let (a, b) = random_pair(&mut rng);
        let table = dtw(a.view(), b.view(), None).unwrap();
        let path = table.backtrack().unwrap();
        assert!(path.is_valid(a.nrows(), b.nrows()));
        let sum: f64 = path.cells().iter().map(|&(i, j)| local(&a, &b, i, j)).sum();
        assert!((sum - table.distance()).abs() <= 1e-9);
    }
}

#[test]
fn more_words_than_clips_is_infeasible() {
    let a = Array2::zeros((2, 3));
    let b = Array2::zeros((3, 3));
    assert!(dtw(a.view(), b.view(), None).is_err());
}

fn pair_strategy() -> impl Strategy<Value = (Array2<f64>, Array2<f64>)> {
    (1usize..=7, 1usize..=4).prop_flat_map(|(n, d)| {
        (1..=n.min(5)).prop_flat_map(move |m| {
            (
                prop::collection::vec(-3.0f64..3.0, n * d),
                prop::collection::vec(-3.0f64..3.0, m * d),
            )
                .prop_map(move |(x, y)| {
                    (
                        Array2::from_shape_vec((n, d), x).unwrap(),
                        Array2::from_shape_vec((m, d), y).unwrap(),
                    )
                })
        })
    })
}

proptest! {
    #[test]
    fn distance_is_nonnegative_and_window_never_helps((a, b) in pair_strategy()) {
        let full = dtw(a.view(), b.view(), None).unwrap();
        prop_assert!(full.distance() >= 0.0);
        let policy = WindowPolicy::default_for(a.nrows(), b.nrows()).unwrap();
        if let Ok(w) = dtw(a.view(), b.view(), Some(&policy)) {
            prop_assert!(w.distance() >= full.distance() - 1e-12);
        }
    }

    #[test]
    fn identical_sequences_have_zero_distance((a, _) in pair_strategy()) {
        let t = dtw(a.view(), a.view(), None).unwrap();
        prop_assert_eq!(t.distance(), 0.0);
        let path = t.backtrack().unwrap();
        prop_assert!(path.cells().iter().all(|&(i, j)| i == j));
    }
}
