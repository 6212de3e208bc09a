//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use expband::{classify, Dataset64, TaxonomyTag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|x - want| <= tol * max(|want|, 1)`.
pub fn rel_close(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol * want.abs().max(1.0)
}

/// Strictly increasing abscissae: `t_1` in `[0, 1]`, gaps in `gap`.
pub fn increasing_t(rng: &mut ChaCha8Rng, n: usize, gap: (f64, f64)) -> Vec<f64> {
    let mut t = vec![rng.random_range(0.0..1.0)];
    for _ in 1..n {
        let last = *t.last().unwrap();
        t.push(last + rng.random_range(gap.0..gap.1));
    }
    t
}

/// Minimax error over `{exp(k t), 1}` by brute force: for every index
/// triple solve the three alternation equations for `(a, b, h)` in the
/// canonical basis `u = exp(k t)`, and keep the smallest max-residual.
pub fn triple_oracle(t: &[f64], y: &[f64], k: f64) -> f64 {
    let u: Vec<f64> = t.iter().map(|x| (k * x).exp()).collect();
    let n = t.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            for m in j + 1..n {
                // a*u + b + s*h = y with s = +1, -1, +1.
                let rows = [[u[i], 1.0, 1.0, y[i]], [u[j], 1.0, -1.0, y[j]], [u[m], 1.0, 1.0, y[m]]];
                let Some([a, b, _]) = solve3(rows) else { continue };
                let err = (0..n)
                    .map(|l| (y[l] - a * u[l] - b).abs())
                    .fold(0.0, f64::max);
                best = best.min(err);
            }
        }
    }
    best
}

#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 4]; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&a, &b| m[a][c].abs().partial_cmp(&m[b][c].abs()).unwrap())?;
        if m[p][c] == 0.0 {
            return None;
        }
        m.swap(c, p);
        for r in 0..3 {
            if r != c {
                let f = m[r][c] / m[c][c];
                for q in c..4 {
                    m[r][q] -= f * m[c][q];
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// Noisy decaying exponential data that classifies as interior, or `None`.
pub fn random_interior(rng: &mut ChaCha8Rng, max_n: usize) -> Option<Dataset64> {
    let n = rng.random_range(5..=max_n);
    let t = increasing_t(rng, n, (0.05, 1.0));
    let span = t[n - 1] - t[0];
    let k = rng.random_range(-6.0..-0.5) / span;
    let a = rng.random_range(0.5..5.0);
    let b = rng.random_range(-2.0..2.0);
    let sigma = 0.02 * a;
    let y = t
        .iter()
        .map(|x| a * (k * (x - t[0])).exp() + b + rng.random_range(-sigma..sigma))
        .collect();
    let d = Dataset64::new(t, y).ok()?;
    (classify(&d).ok()?.tag == TaxonomyTag::InteriorExponential).then_some(d)
}

/// `count` log-spaced values from `lo` to `hi` (both positive).
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}
