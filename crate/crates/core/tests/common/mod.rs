#![allow(dead_code)]

use num_complex::Complex64;
use orthocode::channel::{noise_variance, transmit, Channel, SnrConvention};
use orthocode::codebook::{verify_gram, CodeSpec};
use orthocode::layout::IntMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Printed correlation-count tables for `P = 3`: `(k, tail, rows)` with rows
/// indexed by `q1 = -k..=k` and columns by `q2 = -k..=k`.
pub fn printed_p3_tables() -> Vec<(usize, [i8; 2], Vec<Vec<u64>>)> {
    vec![
        (
            1,
            [-1, -1],
            vec![vec![1, 0, 0], vec![0, 0, 0], vec![0, 0, 1]],
        ),
        (
            1,
            [-1, 1],
            vec![vec![0, 0, 1], vec![0, 0, 0], vec![1, 0, 0]],
        ),
        (
            2,
            [-1, -1],
            vec![
                vec![0, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0],
                vec![1, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 1],
            ],
        ),
        (
            2,
            [-1, 1],
            vec![
                vec![0, 0, 0, 0, 1],
                vec![0, 0, 0, 0, 0],
                vec![1, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0],
                vec![0, 0, 1, 0, 0],
            ],
        ),
        (
            3,
            [-1, -1],
            vec![
                vec![0, 0, 0, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0],
                vec![1, 0, 1, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 2, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 1],
            ],
        ),
        (
            3,
            [-1, 1],
            vec![
                vec![0, 0, 0, 0, 0, 0, 1],
                vec![0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 2, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0],
                vec![1, 0, 1, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 1, 0, 0],
            ],
        ),
        (
            4,
            [-1, -1],
            vec![
                vec![0, 0, 0, 0, 0, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 2, 0, 1, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![1, 0, 2, 0, 2, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 3, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 1],
            ],
        ),
        (
            4,
            [-1, 1],
            vec![
                vec![0, 0, 0, 0, 0, 0, 0, 0, 1],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 3, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![1, 0, 2, 0, 2, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 2, 0, 1, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 1, 0, 0],
            ],
        ),
        (
            5,
            [-1, -1],
            vec![
                vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 3, 0, 1, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![1, 0, 2, 0, 4, 0, 2, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 3, 0, 3, 0, 3, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 4, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1],
            ],
        ),
        (
            5,
            [-1, 1],
            vec![
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 4, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 3, 0, 3, 0, 3, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![1, 0, 2, 0, 4, 0, 2, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 3, 0, 1, 0, 1, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
                vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 0],
            ],
        ),
    ]
}

/// ±1 sequence of length `n` whose bit `i` is `+1` when bit `i` of `mask` is set.
pub fn symbols(mask: u64, n: usize) -> Vec<i8> {
    (0..n)
        .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
        .collect()
}

/// Every ±1 sequence of length `n` with its exact Gram list.
pub fn all_grams(n: usize, p: usize, q: Option<usize>) -> Vec<(Vec<i8>, Vec<IntMatrix>)> {
    (0..1u64 << n)
        .map(|mask| {
            let bits = symbols(mask, n);
            let g = verify_gram(&bits, p, q).unwrap();
            (bits, g)
        })
        .collect()
}

/// `A_k(q | tail)` by enumerating all `2^k` continuations.
pub fn brute_table(k: usize, q: &[i64], tail: &[i8]) -> u64 {
    let p = tail.len() + 1;
    (0..1u64 << k)
        .filter(|&mask| {
            let mut d: Vec<i64> = tail.iter().map(|&x| x as i64).collect();
            d.extend(symbols(mask, k).into_iter().map(|x| x as i64));
            (1..p).all(|j| {
                let s: i64 = (0..k).map(|i| d[p - 1 + i] * d[p - 1 + i - j]).sum();
                s == q[j - 1]
            })
        })
        .count() as u64
}

pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im)
}

/// Unstructured received vector of length `len`.
pub fn random_y(len: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..len).map(|_| complex_gaussian(rng)).collect()
}

/// One noisy transmission of a uniformly drawn codeword of `spec`.
pub struct Trial {
    pub index: u64,
    pub y: Vec<Complex64>,
}

pub fn noisy_trial(
    spec: &CodeSpec,
    bits_of: impl Fn(u64) -> Vec<i8>,
    snr_db: f64,
    q_chan: Option<usize>,
    rng: &mut ChaCha8Rng,
) -> Trial {
    let index = rng.random_range(0..spec.num_codewords());
    let ch = Channel::draw(spec.p(), spec.layout().output_len(), q_chan, rng);
    let noise = noise_variance(snr_db, spec.n(), spec.p(), SnrConvention::Average);
    let y = transmit(&bits_of(index), &ch, noise, rng);
    Trial { index, y }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `|a - b| <= tol * max(|a|, |b|, 1)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
