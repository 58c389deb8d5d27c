//! Per-received-vector quantities shared by every path of the search.
//!
//! With `D = G^{-1}` and `z = B^T y`, the projection term is
//! `y^H B D B^T y = sum_{m,n} b_m b_n w_{m,n}`, where
//! `w_{m,n} = sum_{i,j} δ_{i,j} Re{y_{m+i} conj(y_{n+j})}`. With sub-blocks the
//! sum runs per block over that block's outputs only; `w` below is the sum of
//! the per-block matrices, while `α`, `β` and the look-ahead bound keep the
//! blocks apart.

use crate::channel::{check_received, padded_inverse};
use crate::codebook::CodeSpec;
use crate::error::Result;
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct DecoderWeights {
    n: usize,
    p: usize,
    /// `[k]`: `y` with samples outside block `k` zeroed, length `L + P`.
    y_blocks: Vec<Vec<Complex64>>,
    /// `[k]`: bits that reach block `k`.
    bit_blocks: Vec<Vec<usize>>,
    /// `[θ][k]`: `D_{θ,k}`.
    delta: Vec<Vec<DMatrix<f64>>>,
    /// `[θ]`: row-major `N x N`.
    w: Vec<Vec<f64>>,
    /// `[θ][k]`: row-major `N x N`, zero outside the bits of block `k`.
    block_w: Vec<Vec<Vec<f64>>>,
    /// `[θ][m]`: `sum_k (sum_{n<m} |w_{m,n,k}| + |w_{m,m,k}| / 2)`.
    alpha: Vec<Vec<f64>>,
    /// `[m]`: `sum_k max_η α_{m,k}^{(η)}`, the per-bit offset that keeps
    /// increments nonnegative in every tree.
    max_alpha: Vec<f64>,
    /// `[ℓ]`: `sum_{m >= ℓ} max_alpha[m]`, length `N + 1`.
    max_alpha_tail: Vec<f64>,
    /// `[θ][ℓ]`, length `N + 1`.
    beta: Vec<Vec<f64>>,
}

impl DecoderWeights {
    pub fn new(y: &[Complex64], spec: &CodeSpec) -> Result<Self> {
        let layout = spec.layout();
        check_received(y, layout)?;
        let (n, p) = (layout.n(), layout.p());
        let len = layout.output_len();
        let blocks = layout.num_blocks();
        let trees = spec.trees();

        let y_blocks: Vec<Vec<Complex64>> = (0..blocks)
            .map(|k| {
                let outs = layout.block_outputs(k);
                (0..len + p)
                    .map(|t| {
                        if outs.contains(&t) {
                            y[t]
                        } else {
                            Complex64::default()
                        }
                    })
                    .collect()
            })
            .collect();
        let bit_blocks: Vec<Vec<usize>> =
            (0..n).map(|i| layout.blocks_of_bit(i).collect()).collect();
        let delta = spec
            .targets()
            .iter()
            .map(|t| {
                t.matrices()
                    .iter()
                    .map(padded_inverse)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;

        let mut w = vec![vec![0.0; n * n]; trees];
        let mut block_w = vec![vec![vec![0.0; n * n]; blocks]; trees];
        let mut block_alpha = vec![vec![vec![0.0; n]; blocks]; trees];
        for theta in 0..trees {
            for (k, yk) in y_blocks.iter().enumerate() {
                let d = &delta[theta][k];
                let bits = layout.block_bits(k);
                for m in bits.clone() {
                    for nn in bits.start..=m {
                        let mut s = 0.0;
                        for i in 0..p {
                            for j in 0..p {
                                s += d[(i, j)] * (yk[m + i] * yk[nn + j].conj()).re;
                            }
                        }
                        w[theta][m * n + nn] += s;
                        block_w[theta][k][m * n + nn] = s;
                        if nn != m {
                            w[theta][nn * n + m] += s;
                            block_w[theta][k][nn * n + m] = s;
                            block_alpha[theta][k][m] += s.abs();
                        } else {
                            block_alpha[theta][k][m] += 0.5 * s.abs();
                        }
                    }
                }
            }
        }

        let alpha: Vec<Vec<f64>> = block_alpha
            .iter()
            .map(|per_block| {
                (0..n)
                    .map(|m| per_block.iter().map(|a| a[m]).sum())
                    .collect()
            })
            .collect();
        let max_alpha: Vec<f64> = (0..n)
            .map(|m| {
                (0..blocks)
                    .map(|k| (0..trees).map(|t| block_alpha[t][k][m]).fold(0.0, f64::max))
                    .sum()
            })
            .collect();
        let mut max_alpha_tail = vec![0.0; n + 1];
        for m in (0..n).rev() {
            max_alpha_tail[m] = max_alpha_tail[m + 1] + max_alpha[m];
        }
        let beta = block_w
            .iter()
            .zip(&alpha)
            .map(|(bw, at)| {
                let mut b = Vec::with_capacity(n + 1);
                b.push(at.iter().sum::<f64>());
                for l in 1..=n {
                    let m = l - 1;
                    let drop: f64 = bw
                        .iter()
                        .map(|wk| {
                            0.5 * wk[m * n + m].abs()
                                + (m + 1..n).map(|nn| wk[m * n + nn].abs()).sum::<f64>()
                        })
                        .sum();
                    b.push(b[l - 1] - drop);
                }
                b
            })
            .collect();

        Ok(Self {
            n,
            p,
            y_blocks,
            bit_blocks,
            delta,
            w,
            block_w,
            alpha,
            max_alpha,
            max_alpha_tail,
            beta,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn trees(&self) -> usize {
        self.w.len()
    }

    pub fn blocks(&self) -> usize {
        self.y_blocks.len()
    }

    /// `w_{m,n}^{(θ)}`, 0-based bit indices.
    pub fn w(&self, tree: usize, m: usize, n: usize) -> f64 {
        self.w[tree][m * self.n + n]
    }

    pub(crate) fn w_row(&self, tree: usize, m: usize) -> &[f64] {
        &self.w[tree][m * self.n..(m + 1) * self.n]
    }

    /// Row `m` of block `k`'s weights.
    pub(crate) fn block_w_row(&self, tree: usize, k: usize, m: usize) -> &[f64] {
        &self.block_w[tree][k][m * self.n..(m + 1) * self.n]
    }

    /// `α_m^{(θ)}`, summed over the blocks bit `m` reaches.
    pub fn alpha(&self, tree: usize, m: usize) -> f64 {
        self.alpha[tree][m]
    }

    /// Offset added to the increment of bit `m` in every tree.
    pub fn max_alpha(&self, m: usize) -> f64 {
        self.max_alpha[m]
    }

    /// `sum_{m >= ℓ}` of [`Self::max_alpha`].
    pub fn max_alpha_tail(&self, l: usize) -> f64 {
        self.max_alpha_tail[l]
    }

    /// `β_ℓ^{(θ)}` after `ℓ` known bits.
    pub fn beta(&self, tree: usize, l: usize) -> f64 {
        self.beta[tree][l]
    }

    pub fn delta(&self, tree: usize, block: usize) -> &DMatrix<f64> {
        &self.delta[tree][block]
    }

    pub(crate) fn y_block(&self, k: usize) -> &[Complex64] {
        &self.y_blocks[k]
    }

    pub(crate) fn blocks_of_bit(&self, m: usize) -> &[usize] {
        &self.bit_blocks[m]
    }
}

/// Convenience wrapper for [`DecoderWeights::new`].
pub fn compute_weights(y: &[Complex64], spec: &CodeSpec) -> Result<DecoderWeights> {
    DecoderWeights::new(y, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{make_spec, TreeMode};

    fn sample_y(len: usize, seed: u64) -> Vec<Complex64> {
        (0..len)
            .map(|t| {
                let a = ((t as u64 * 7919 + seed * 104_729) % 1000) as f64 / 500.0 - 1.0;
                let b = ((t as u64 * 6151 + seed * 15_485_863) % 1000) as f64 / 500.0 - 1.0;
                Complex64::new(a, b)
            })
            .collect()
    }

    #[test]
    fn symmetric_and_diagonal_case() {
        let spec = make_spec(9, 3, 2, None, TreeMode::Single).unwrap();
        let y = sample_y(10, 1);
        let wt = DecoderWeights::new(&y, &spec).unwrap();
        for m in 0..9 {
            for n in 0..9 {
                assert_eq!(wt.w(0, m, n), wt.w(0, n, m));
                let direct = ((y[m] * y[n].conj()).re + (y[m + 1] * y[n + 1].conj()).re) / 9.0;
                assert!((wt.w(0, m, n) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn beta_ends_at_zero() {
        let spec = make_spec(12, 5, 2, None, TreeMode::Double).unwrap();
        let wt = DecoderWeights::new(&sample_y(13, 4), &spec).unwrap();
        for t in 0..2 {
            assert!(wt.beta(t, 12).abs() < 1e-9);
            assert!(wt.max_alpha_tail(0) + 1e-12 >= (0..12).map(|m| wt.alpha(t, m)).sum::<f64>());
        }
    }

    #[test]
    fn single_tree_offset_equals_beta0() {
        for q in [None, Some(7), Some(5)] {
            let spec = make_spec(13, 4, 2, q, TreeMode::Single).unwrap();
            let wt = DecoderWeights::new(&sample_y(14, 2), &spec).unwrap();
            assert!((wt.max_alpha_tail(0) - wt.beta(0, 0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_wrong_length() {
        let spec = make_spec(9, 3, 2, None, TreeMode::Single).unwrap();
        assert!(DecoderWeights::new(&sample_y(9, 0), &spec).is_err());
    }
}
