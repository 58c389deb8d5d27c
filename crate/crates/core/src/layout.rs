//! Sample and bit geometry shared by the encoder, the channel and the decoder.
//!
//! Indices are 0-based throughout: code bit `i` is `b_{i+1}` and output sample
//! `t` is `y_{t+1}`. Output `t` sees bits `t, t-1, ..., t-P+1`; bits outside
//! `0..N` are zero.

use crate::error::{Error, Result};
use std::fmt;
use std::ops::Range;

/// Longest supported codeword; packed prefixes and counts live in `u64`.
pub const MAX_N: usize = 64;

/// Block structure of one transmission.
///
/// Quasi-static fading has a single block spanning all `L = N + P - 1`
/// outputs. With a sub-block period `Q` the taps are constant over outputs
/// `kQ..(k+1)Q` and there are `M = ceil(L / Q)` blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    n: usize,
    p: usize,
    q: Option<usize>,
}

impl Layout {
    pub fn new(n: usize, p: usize, q: Option<usize>) -> Result<Self> {
        if !(2..=MAX_N).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "codeword length {n} outside 2..={MAX_N}"
            )));
        }
        if p == 0 || p > n {
            return Err(Error::InvalidParameter(format!(
                "channel span P={p} must satisfy 1 <= P <= N={n}"
            )));
        }
        if let Some(q) = q {
            if q < p {
                return Err(Error::InvalidParameter(format!(
                    "sub-block period Q={q} must be at least P={p}"
                )));
            }
        }
        Ok(Self { n, p, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> Option<usize> {
        self.q
    }

    /// `L = N + P - 1`.
    pub fn output_len(&self) -> usize {
        self.n + self.p - 1
    }

    /// Outputs per block (`L` when quasi-static).
    pub fn period(&self) -> usize {
        self.q.unwrap_or_else(|| self.output_len())
    }

    pub fn num_blocks(&self) -> usize {
        self.output_len().div_ceil(self.period())
    }

    /// `M * Q`: received length once zero-padded to whole blocks.
    pub fn padded_len(&self) -> usize {
        self.num_blocks() * self.period()
    }

    /// Output samples of block `k` that carry signal (padding past `L` excluded).
    pub fn block_outputs(&self, k: usize) -> Range<usize> {
        let q = self.period();
        (k * q).min(self.output_len())..((k + 1) * q).min(self.output_len())
    }

    /// Code bits that reach at least one output of block `k`.
    pub fn block_bits(&self, k: usize) -> Range<usize> {
        let q = self.period();
        let lo = (k * q).saturating_sub(self.p - 1);
        let hi = ((k + 1) * q).min(self.n);
        lo..hi
    }

    /// Lag-one product terms `b_t b_{t-1}` (indexed by `t`, `1 <= t < N`) whose
    /// output falls in block `k`.
    pub fn block_lag1_terms(&self, k: usize) -> Range<usize> {
        let q = self.period();
        let lo = (k * q).max(1);
        let hi = ((k + 1) * q).min(self.n);
        lo..hi.max(lo)
    }

    /// Blocks whose bit window contains bit `i`.
    pub fn blocks_of_bit(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_blocks()).filter(move |&k| self.block_bits(k).contains(&i))
    }
}

/// Dense row-major integer matrix, used for convolution matrices and Gram
/// targets where exact arithmetic matters.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: i64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let s = (0..self.cols)
                    .map(|i| self.get(r, i) * other.get(i, c))
                    .sum();
                out.set(r, c, s);
            }
        }
        out
    }

    /// `A^T A`.
    pub fn gram(&self) -> Self {
        self.transpose().matmul(self)
    }

    /// Copies `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn paste(&mut self, r0: usize, c0: usize, block: &Self) {
        for r in 0..block.rows {
            for c in 0..block.cols {
                self.set(r0 + r, c0 + c, block.get(r, c));
            }
        }
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c) as f64)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[i64]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

fn bit_at(bits: &[i8], i: isize) -> i64 {
    if i < 0 {
        0
    } else {
        bits.get(i as usize).map_or(0, |&b| b as i64)
    }
}

/// Convolution matrix of block `k`: `|outputs| x P`, entry `(t, j) = b_{t-j}`.
///
/// Rows cover the full period including zero padding past `L`, so every
/// sub-block matrix is `Q x P`.
pub fn block_conv_matrix(bits: &[i8], layout: &Layout, k: usize) -> IntMatrix {
    let q = layout.period();
    let mut m = IntMatrix::zeros(q, layout.p());
    for r in 0..q {
        let t = (k * q + r) as isize;
        for j in 0..layout.p() {
            m.set(r, j, bit_at(bits, t - j as isize));
        }
    }
    m
}

/// Full convolution matrix: `L x P` when quasi-static, otherwise the direct
/// sum of the `M` sub-block matrices (`MQ x MP`).
pub fn conv_matrix(bits: &[i8], layout: &Layout) -> IntMatrix {
    let m = layout.num_blocks();
    let q = layout.period();
    let p = layout.p();
    if layout.q().is_none() {
        return block_conv_matrix(bits, layout, 0);
    }
    let mut out = IntMatrix::zeros(m * q, m * p);
    for k in 0..m {
        out.paste(k * q, k * p, &block_conv_matrix(bits, layout, k));
    }
    out
}

/// Packed ±1 prefix: bit `i` of `mask` is set when `b_i = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PackedBits {
    pub mask: u64,
    pub len: usize,
}

impl PackedBits {
    pub fn from_symbols(bits: &[i8]) -> Result<Self> {
        if bits.len() > MAX_N {
            return Err(Error::InvalidParameter(format!(
                "sequence longer than {MAX_N}"
            )));
        }
        let mut mask = 0u64;
        for (i, &b) in bits.iter().enumerate() {
            match b {
                1 => mask |= 1 << i,
                -1 => {}
                other => return Err(Error::InvalidSymbol(other as i64)),
            }
        }
        Ok(Self {
            mask,
            len: bits.len(),
        })
    }

    pub fn symbol(&self, i: usize) -> i8 {
        if self.mask >> i & 1 == 1 {
            1
        } else {
            -1
        }
    }

    pub fn push(self, b: i8) -> Self {
        let mask = if b > 0 {
            self.mask | 1 << self.len
        } else {
            self.mask
        };
        Self {
            mask,
            len: self.len + 1,
        }
    }

    pub fn to_symbols(&self) -> Vec<i8> {
        (0..self.len).map(|i| self.symbol(i)).collect()
    }

    /// `sum_{t in range} b_t b_{t-lag}`; every `t` in `range` must satisfy
    /// `lag <= t < len`.
    pub fn lag_sum(&self, lag: usize, range: Range<usize>) -> i64 {
        if range.is_empty() {
            return 0;
        }
        debug_assert!(range.start >= lag && range.end <= self.len);
        let diff = self.mask ^ (self.mask << lag);
        let width = range.end - range.start;
        let window = if width >= 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        } << range.start;
        let flips = (diff & window).count_ones() as i64;
        width as i64 - 2 * flips
    }
}

/// Renders ±1 symbols as `+`/`-` characters.
pub fn symbols_to_string(bits: &[i8]) -> String {
    bits.iter()
        .map(|&b| if b > 0 { '+' } else { '-' })
        .collect()
}

/// Parses a `+`/`-` string.
pub fn parse_symbols(s: &str) -> Result<Vec<i8>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '+' => Ok(1),
            '-' => Ok(-1),
            other => Err(Error::Parse(format!("unexpected symbol {other:?}"))),
        })
        .collect()
}
