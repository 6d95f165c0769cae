use lshan::corpus::{END, START};
use lshan::han::{
    coherence_loss, emission_probs, greedy_decode, kbest_decode, Coherence, Decoder, HanDims,
    HanParams, Strategy,
};
use lshan::{ClipFeatureSequence, LatentSpaceParams, Sentence};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FEATURE: usize = 4;
const LATENT: usize = 3;

fn setup(seed: u64, vocab: usize) -> (HanParams, LatentSpaceParams, ClipFeatureSequence) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ls = LatentSpaceParams::init(LATENT, FEATURE, vocab, &mut rng);
    let mut han = HanParams::init(HanDims { latent: LATENT, hidden: 5, attention: 3, vocab }, &mut rng);
    // a larger emission layer spreads the step distributions
    han.emission_w.mapv_inplace(|x| 3.0 * x);
    let clips = Array2::from_shape_fn((5, FEATURE), |_| rng.random_range(-1.0..1.0));
    (han, ls, ClipFeatureSequence::new(clips).unwrap())
}

#[test]
fn emission_is_a_distribution() {
    let (han, _, _) = setup(1, 6);
    let h = ndarray::Array1::from_vec(vec![0.3, -0.2, 0.9, 0.0, -1.0]);
    let p = emission_probs(&han, h.view());
    assert!((p.sum() - 1.0).abs() < 1e-12);
    assert!(p.iter().all(|&x| x > 0.0));
}

#[test]
fn coherence_is_negative_log_likelihood_of_the_step_distributions() {
    let (han, ls, video) = setup(2, 6);
    let sentence = Sentence::new(vec![3, 2, 5]).unwrap();
    let c = Coherence::compute(&han, &ls, &video, &sentence, Strategy::PairSplit).unwrap();
    let targets = [3, 2, 5, END];
    let expect: f64 = c.step_probs().iter().zip(targets).map(|(p, t)| -p[t].ln()).sum();
    assert!((c.loss() - expect).abs() < 1e-10);

    // the same numbers fall out of feeding the words one at a time
    let dec = Decoder::new(&han, &ls).unwrap();
    let mut state = dec.start(&video, Strategy::PairSplit).unwrap();
    let mut total = 0.0;
    for (input, target) in [START, 3, 2, 5].into_iter().zip(targets) {
        let (next, lp) = dec.step(&state, input);
        total -= lp[target];
        state = next;
    }
    assert!((total - expect).abs() < 1e-10);
    let direct = coherence_loss(&han, &ls, &video, &sentence, Strategy::PairSplit).unwrap();
    assert_eq!(direct, c.loss());
}

fn score(dec: &Decoder<'_>, video: &ClipFeatureSequence, tokens: &[usize], ended: bool) -> f64 {
    let mut state = dec.start(video, Strategy::TwoSplit).unwrap();
    let mut input = START;
    let mut total = 0.0;
    for &w in tokens.iter().chain(ended.then_some(&END)) {
        let (next, lp) = dec.step(&state, input);
        total += lp[w];
        state = next;
        input = w;
    }
    total
}

#[test]
fn greedy_takes_the_argmax_at_every_step() {
    for seed in 0..10 {
        let (han, ls, video) = setup(seed, 6);
        let out = greedy_decode(&han, &ls, &video, Strategy::TwoSplit, 5).unwrap();
        assert!(out.len() <= 5 && out.iter().all(|&w| w > END));
        let dec = Decoder::new(&han, &ls).unwrap();
        let mut state = dec.start(&video, Strategy::TwoSplit).unwrap();
        let mut input = START;
        for k in 0..=out.len() {
            let (next, lp) = dec.step(&state, input);
            let best = (END..lp.len()).max_by(|&a, &b| lp[a].total_cmp(&lp[b]).then(b.cmp(&a))).unwrap();
            match out.get(k) {
                Some(&w) => assert_eq!(w, best),
                None if k < 5 => assert_eq!(best, END),
                None => {}
            }
            if k < out.len() {
                input = out[k];
            }
            state = next;
        }
    }
}

#[test]
fn wide_beam_finds_the_exhaustive_optimum() {
    let vocab = 4;
    let max_len = 3;
    for seed in 0..8 {
        let (han, ls, video) = setup(seed, vocab);
        let dec = Decoder::new(&han, &ls).unwrap();
        // every ended sentence up to max_len words, plus truncated ones at max_len
        let mut all: Vec<(Vec<usize>, f64)> = Vec::new();
        let mut frontier = vec![vec![]];
        for len in 0..=max_len {
            for t in &frontier {
                all.push((t.clone(), score(&dec, &video, t, true)));
                if len == max_len {
                    all.push((t.clone(), score(&dec, &video, t, false)));
                }
            }
            frontier = frontier
                .iter()
                .flat_map(|t| (END + 1..vocab).map(move |w| [t.clone(), vec![w]].concat()))
                .collect();
        }
        let best = all.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
        let beam = kbest_decode(&han, &ls, &video, Strategy::TwoSplit, 64, max_len).unwrap();
        assert!((beam[0].log_prob - best).abs() < 1e-10);
        for h in &beam {
            let ended = h.tokens.len() < max_len || all.iter().any(|(t, s)| *t == h.tokens && (s - h.log_prob).abs() < 1e-10);
            assert!(ended);
        }
        assert!(beam.windows(2).all(|w| w[0].log_prob >= w[1].log_prob));
    }
}

#[test]
fn beam_of_one_follows_greedy() {
    for seed in 0..10 {
        let (han, ls, video) = setup(seed, 6);
        let greedy = greedy_decode(&han, &ls, &video, Strategy::TwoSplit, 5).unwrap();
        let beam = kbest_decode(&han, &ls, &video, Strategy::TwoSplit, 1, 5).unwrap();
        assert_eq!(beam.len(), 1);
        assert_eq!(beam[0].tokens, greedy);
    }
}

#[test]
fn start_symbol_is_never_emitted() {
    let (mut han, ls, video) = setup(3, 5);
    han.emission_b[START] = 50.0;
    let out = greedy_decode(&han, &ls, &video, Strategy::TwoSplit, 4).unwrap();
    assert!(!out.contains(&START));
}
