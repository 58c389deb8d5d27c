//! Brute-force ML decoding and the equivalent forms of its metric.

use crate::channel::{check_received, padded_inverse};
use crate::codebook::{CodeSpec, Codebook, Codeword};
use crate::error::{Error, Result};
use crate::layout::{block_conv_matrix, Layout};
use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub index: u64,
    pub codeword: Codeword,
    pub metric: f64,
}

fn block_samples(y: &[Complex64], layout: &Layout, k: usize) -> Vec<Complex64> {
    let q = layout.period();
    (k * q..(k + 1) * q)
        .map(|t| {
            if t < layout.output_len() {
                y[t]
            } else {
                Complex64::default()
            }
        })
        .collect()
}

/// `sum_k ||y_k - P_{B_k} y_k||²` with the projection taken by least squares.
pub fn metric_projection(y: &[Complex64], bits: &[i8], layout: &Layout) -> Result<f64> {
    check_received(y, layout)?;
    let mut total = 0.0;
    for k in 0..layout.num_blocks() {
        let b = block_conv_matrix(bits, layout, k).to_f64();
        let yk = block_samples(y, layout, k);
        let rhs = DMatrix::from_fn(yk.len(), 2, |r, c| if c == 0 { yk[r].re } else { yk[r].im });
        let h = b
            .clone()
            .svd(true, true)
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        total += (rhs - &b * h).norm_squared();
    }
    Ok(total)
}

fn projector(bits: &[i8], layout: &Layout, k: usize) -> Result<DMatrix<f64>> {
    let b = block_conv_matrix(bits, layout, k);
    let d = padded_inverse(&b.gram())?;
    let bf = b.to_f64();
    Ok(&bf * d * bf.transpose())
}

/// `sum_k (||y_k||² - tr(P_{B_k} y_k y_k^H))`.
pub fn metric_trace(y: &[Complex64], bits: &[i8], layout: &Layout) -> Result<f64> {
    check_received(y, layout)?;
    let mut total = 0.0;
    for k in 0..layout.num_blocks() {
        let pk = projector(bits, layout, k)?;
        let yk = block_samples(y, layout, k);
        let energy: f64 = yk.iter().map(|s| s.norm_sqr()).sum();
        let mut quad = 0.0;
        for r in 0..yk.len() {
            for c in 0..yk.len() {
                quad += pk[(r, c)] * (yk[c] * yk[r].conj()).re;
            }
        }
        total += energy - quad;
    }
    Ok(total)
}

/// `sum_k ||vec(y_k y_k^H) - vec(P_{B_k})||²`, the outer-product form. It equals
/// `2 · metric_trace` plus a term that depends only on `y` and `rank(P_{B_k})`.
pub fn metric_outer_product(y: &[Complex64], bits: &[i8], layout: &Layout) -> Result<f64> {
    check_received(y, layout)?;
    let mut total = 0.0;
    for k in 0..layout.num_blocks() {
        let pk = projector(bits, layout, k)?;
        let yk = block_samples(y, layout, k);
        for r in 0..yk.len() {
            for c in 0..yk.len() {
                total += (yk[r] * yk[c].conj() - pk[(r, c)]).norm_sqr();
            }
        }
    }
    Ok(total)
}

/// ML codeword by scoring every codeword with [`metric_projection`]; ties go
/// to the smallest index.
pub fn decode_exhaustive(
    y: &[Complex64],
    codebook: &Codebook,
    spec: &CodeSpec,
) -> Result<ExhaustiveResult> {
    let mut best: Option<ExhaustiveResult> = None;
    for (i, w) in codebook.words().iter().enumerate() {
        let metric = metric_projection(y, &w.bits, spec.layout())?;
        if best.as_ref().is_none_or(|b| metric < b.metric) {
            best = Some(ExhaustiveResult {
                index: i as u64,
                codeword: w.clone(),
                metric,
            });
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("empty codebook".into()))
}
