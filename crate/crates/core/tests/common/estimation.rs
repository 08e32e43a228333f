//! Estimation inputs and oracles computed straight from the definitions.

use disarm::estimator::{Category, CategorizedPool, EstimationConfig};
use disarm::reputation::Rating;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rating(id: &str, truster: &str, t: u64, scores: [f64; 6]) -> Rating {
    Rating {
        id: id.into(),
        truster: truster.into(),
        trustee: "X".into(),
        t,
        scores,
        confidence: 0.9,
        transaction_value: 0.8,
    }
}

pub fn pool_of(c: Category, rs: Vec<Rating>) -> CategorizedPool {
    let mut p = CategorizedPool::default();
    match c {
        Category::PR => p.pr = rs,
        Category::WR => p.wr = rs,
        Category::KR => p.kr = rs,
        Category::SR => p.sr = rs,
    }
    p
}

pub fn config(weights: [f64; 6], social: [f64; 4]) -> EstimationConfig {
    EstimationConfig { weights, social_weights: social, ..Default::default() }
}

/// Straight from the definitions: time-weighted log means per coefficient,
/// weighted over coefficients, then over present categories.
pub fn oracle_value(p: &CategorizedPool, w: &[f64; 6], pi: &[f64; 4]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (ci, c) in [Category::PR, Category::WR, Category::KR, Category::SR].into_iter().enumerate() {
        let rs = p.get(c);
        if rs.is_empty() {
            continue;
        }
        let tsum: f64 = rs.iter().map(|r| r.t as f64).sum();
        let mut s = 0.0;
        for (k, wk) in w.iter().enumerate() {
            let tw: f64 = rs.iter().map(|r| r.scores[k].log10() * r.t as f64).sum::<f64>() / tsum;
            s += wk * tw;
        }
        s /= w.iter().sum::<f64>();
        num += pi[ci] * s;
        den += pi[ci];
    }
    num / den
}

pub fn oracle_sigma(p: &CategorizedPool) -> f64 {
    let xs: Vec<f64> = [&p.pr, &p.wr, &p.kr, &p.sr]
        .iter()
        .flat_map(|rs| rs.iter())
        .flat_map(|r| r.scores.iter().map(|s| s.log10()))
        .collect();
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

pub fn random_score(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..10) {
        0 => 0.1,
        1 => 10.0,
        2 => (rng.gen_range(10..=1000) as f64) / 100.0,
        _ => rng.gen_range(0.1..=10.0),
    }
}

pub fn random_pool(rng: &mut ChaCha8Rng, max: usize) -> CategorizedPool {
    let mut p = CategorizedPool::default();
    let n = rng.gen_range(1..=max);
    for i in 0..n {
        let r = rating(&format!("r{i}"), "B", rng.gen_range(1..=500), std::array::from_fn(|_| random_score(rng)));
        match rng.gen_range(0..4) {
            0 => p.pr.push(r),
            1 => p.wr.push(r),
            2 => p.kr.push(r),
            _ => p.sr.push(r),
        }
    }
    p
}

pub fn random_weights<const N: usize>(rng: &mut ChaCha8Rng) -> [f64; N] {
    let mut w: [f64; N] = std::array::from_fn(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..10.0) });
    if w.iter().all(|&x| x == 0.0) {
        w[rng.gen_range(0..N)] = 1.0;
    }
    w
}
