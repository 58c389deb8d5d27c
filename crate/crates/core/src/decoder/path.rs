//! Partial paths and their recursive metric.

use super::weights::DecoderWeights;
use crate::layout::PackedBits;
use num_complex::Complex64;

/// A path of the code tree of `tree`.
///
/// `g` after `ℓ` bits is `sum_{m<ℓ} max_alpha(m) - ½ sum_{m,n<ℓ} b_m b_n w_{m,n}`;
/// every increment is nonnegative and at full length `g` differs from the
/// projection residual `||y - P_B y||²` by a factor ½ and a constant shared by
/// all codewords.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    pub tree: usize,
    pub bits: PackedBits,
    pub g: f64,
    /// `[k·P + j]`: `sum_{n<ℓ} b_n y_{n+j}` over the outputs of block `k`.
    pub u: Vec<Complex64>,
    /// `[k·N + m]`: `sum_{n<ℓ} w_{m,n,k} b_n` for block `k`; empty when not tracked.
    pub v: Vec<f64>,
}

impl PathState {
    /// Empty path with zero carries; `track_v` keeps the look-ahead carries.
    pub fn empty(tree: usize, weights: &DecoderWeights, track_v: bool) -> Self {
        Self {
            tree,
            bits: PackedBits::default(),
            g: 0.0,
            u: vec![Complex64::default(); weights.blocks() * weights.p()],
            v: if track_v {
                vec![0.0; weights.blocks() * weights.n()]
            } else {
                Vec::new()
            },
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len
    }

    pub fn is_empty(&self) -> bool {
        self.bits.len == 0
    }
}

/// Metric increment of appending `bit` to `state`.
pub fn g_increment(state: &PathState, bit: i8, weights: &DecoderWeights) -> f64 {
    let m = state.len();
    let b = bit as f64;
    let p = weights.p();
    let mut inc = weights.max_alpha(m);
    for &k in weights.blocks_of_bit(m) {
        let y = weights.y_block(k);
        let d = weights.delta(state.tree, k);
        let u = &state.u[k * p..(k + 1) * p];
        let mut s = 0.0;
        for j in 0..p {
            // Carry including half of the new bit's own contribution.
            let carry = u[j] + y[m + j] * (0.5 * b);
            for i in 0..p {
                s += d[(i, j)] * (y[m + i] * carry.conj()).re;
            }
        }
        inc -= b * s;
    }
    inc
}

/// Appends `bit`, updating `g` and the carries.
pub fn g_extend(state: &PathState, bit: i8, weights: &DecoderWeights) -> PathState {
    let m = state.len();
    let b = bit as f64;
    let p = weights.p();
    let mut next = state.clone();
    next.g += g_increment(state, bit, weights);
    for &k in weights.blocks_of_bit(m) {
        let y = weights.y_block(k);
        for j in 0..p {
            next.u[k * p + j] += y[m + j] * b;
        }
    }
    if !next.v.is_empty() {
        let n = weights.n();
        for &k in weights.blocks_of_bit(m) {
            let row = weights.block_w_row(state.tree, k, m);
            let vk = &mut next.v[k * n..(k + 1) * n];
            for (vn, &wn) in vk.iter_mut().zip(row).skip(m + 1) {
                *vn += b * wn;
            }
        }
    }
    next.bits = state.bits.push(bit);
    next
}

/// Look-ahead lower bound on the remaining increments:
/// `sum_{m>=ℓ} max_alpha(m) - sum_k sum_{m>=ℓ} |v_{m,k}| - β_ℓ`.
pub fn heuristic_h2(state: &PathState, weights: &DecoderWeights) -> f64 {
    let l = state.len();
    let n = weights.n();
    if l == n {
        return 0.0;
    }
    let vsum: f64 = if state.v.is_empty() {
        (0..weights.blocks())
            .flat_map(|k| (l..n).map(move |m| (k, m)))
            .map(|(k, m)| {
                let row = weights.block_w_row(state.tree, k, m);
                (0..l)
                    .map(|i| row[i] * state.bits.symbol(i) as f64)
                    .sum::<f64>()
                    .abs()
            })
            .sum()
    } else {
        (0..weights.blocks())
            .map(|k| {
                state.v[k * n + l..(k + 1) * n]
                    .iter()
                    .map(|x| x.abs())
                    .sum::<f64>()
            })
            .sum()
    };
    weights.max_alpha_tail(l) - vsum - weights.beta(state.tree, l)
}

/// `g` of a full sequence evaluated directly from the weights.
pub fn batch_metric(bits: &[i8], tree: usize, weights: &DecoderWeights) -> f64 {
    let n = bits.len();
    let mut quad = 0.0;
    for m in 0..n {
        let row = weights.w_row(tree, m);
        for (nn, &b) in bits.iter().enumerate() {
            quad += (bits[m] * b) as f64 * row[nn];
        }
    }
    weights.max_alpha_tail(0) - weights.max_alpha_tail(n) - 0.5 * quad
}

/// `g` of `bits` computed through the recursion.
pub fn recursive_metric(bits: &[i8], tree: usize, weights: &DecoderWeights) -> f64 {
    bits.iter()
        .fold(PathState::empty(tree, weights, false), |s, &b| {
            g_extend(&s, b, weights)
        })
        .g
}
