//! Counting ±1 completions of a prefix under Gram-matrix constraints.
//!
//! For `P = 2` every constraint is a sum of lag-one products `b_t b_{t-1}`.
//! Given `b_1`, those products are in bijection with the remaining bits, so
//! the number of completions is a product of binomials, one per constraint.

use super::table::CorrelationTable;
use super::GramTarget;
use crate::error::{Error, Result};
use crate::layout::{Layout, PackedBits, MAX_N};
use std::sync::{Arc, LazyLock};

const PASCAL_ROWS: usize = MAX_N + 1;

static PASCAL: LazyLock<Vec<Vec<u64>>> = LazyLock::new(|| {
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(PASCAL_ROWS);
    for n in 0..PASCAL_ROWS {
        let mut row = vec![1u64; n + 1];
        for k in 1..n {
            row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
        }
        rows.push(row);
    }
    rows
});

/// `binom(n, k)`, zero when `k > n`. Exact for `n <= 64`.
pub fn binomial(n: usize, k: usize) -> u64 {
    assert!(n < PASCAL_ROWS, "binomial table covers n <= {MAX_N}");
    if k > n {
        0
    } else {
        PASCAL[n][k]
    }
}

/// Number of ±1 sequences of length `len` summing to `target`.
pub(crate) fn signed_sum_count(len: usize, target: i64) -> u64 {
    let len_i = len as i64;
    if target.abs() > len_i || (len_i + target) % 2 != 0 {
        return 0;
    }
    binomial(len, ((len_i + target) / 2) as usize)
}

fn check_prefix(prefix: &[i8], n: usize) -> Result<PackedBits> {
    if prefix.is_empty() || prefix.len() > n {
        return Err(Error::PrefixLength {
            len: prefix.len(),
            n,
        });
    }
    PackedBits::from_symbols(prefix)
}

fn lag1_parity_ok(terms: usize, c: i64) -> bool {
    (terms as i64 + c) % 2 == 0 && c.abs() <= terms as i64
}

/// Closed-form count for `P = 2`, quasi-static: completions of `prefix` to length
/// `N` with `b_1 b_2 + ... + b_{N-1} b_N = c`, where `c` is the off-diagonal of
/// `target` (`0` for `N` odd, `∓1` for `G_1`/`G_2` when `N` is even).
pub fn count_suffixes_p2(n: usize, target: &GramTarget, prefix: &[i8]) -> Result<u64> {
    let c = lag1_target(n, target)?;
    let bits = check_prefix(prefix, n)?;
    Ok(lag1_count(n, c, bits))
}

fn lag1_target(n: usize, target: &GramTarget) -> Result<i64> {
    let m = match target.matrices() {
        [m] if m.rows() == 2 && m.cols() == 2 => m,
        _ => {
            return Err(Error::InvalidTarget(
                "expected a single 2x2 quasi-static target".into(),
            ))
        }
    };
    if m.get(0, 0) != n as i64 || m.get(1, 1) != n as i64 || m.get(0, 1) != m.get(1, 0) {
        return Err(Error::InvalidTarget(format!(
            "diagonal must be ({n}, {n}) and the matrix symmetric"
        )));
    }
    let c = m.get(0, 1);
    if !lag1_parity_ok(n - 1, c) {
        return Err(Error::InvalidTarget(format!(
            "off-diagonal {c} has the wrong parity for N={n}"
        )));
    }
    Ok(c)
}

/// `binom(N-l, (N-l+c-m_l)/2) * 1{|c-m_l| <= N-l}`.
pub(crate) fn lag1_count(n: usize, c: i64, bits: PackedBits) -> u64 {
    let l = bits.len;
    let m = bits.lag_sum(1, 1..l);
    signed_sum_count(n - l, c - m)
}

/// Sub-block count for `P = 2` and period `Q`: completions of `prefix` such
/// that every block's lag-one sum equals its `c_k`, i.e. `B_k^T B_k = G_k`.
pub fn count_suffixes_blocks(
    n: usize,
    q: usize,
    target: &GramTarget,
    prefix: &[i8],
) -> Result<u64> {
    let layout = Layout::new(n, 2, Some(q))?;
    let c = block_targets(&layout, target)?;
    let bits = check_prefix(prefix, n)?;
    block_count(&layout, &c, bits)
}

fn block_targets(layout: &Layout, target: &GramTarget) -> Result<Vec<i64>> {
    if layout.p() != 2 {
        return Err(Error::InvalidTarget(
            "sub-block counting is defined for P = 2".into(),
        ));
    }
    let expected = GramTarget::blocks(layout, target.offdiag())?;
    if &expected != target {
        return Err(Error::InvalidTarget(
            "diagonals do not match the sub-block geometry".into(),
        ));
    }
    Ok(target.offdiag().to_vec())
}

/// Walks the blocks in order: finished blocks must already match their `c_k`
/// (a zero-length binomial enforces it), the block holding the prefix end
/// contributes a partial binomial with its running sum `m_l`, and later
/// blocks contribute full binomials.
pub(crate) fn block_count(layout: &Layout, c: &[i64], bits: PackedBits) -> Result<u64> {
    let l = bits.len;
    let mut total = 1u64;
    for (k, &ck) in c.iter().enumerate() {
        let terms = layout.block_lag1_terms(k);
        let known_end = terms.end.min(l).max(terms.start);
        let m = bits.lag_sum(1, terms.start..known_end);
        let remaining = terms.end - known_end;
        let factor = signed_sum_count(remaining, ck - m);
        if factor == 0 {
            return Ok(0);
        }
        total = total.checked_mul(factor).ok_or(Error::CountOverflow)?;
    }
    Ok(total)
}

/// Per-tree counting oracle used by the encoder and the decoder.
#[derive(Debug, Clone)]
pub(crate) enum TreeCounter {
    Lag1 {
        n: usize,
        c: i64,
    },
    Blocks {
        layout: Layout,
        c: Vec<i64>,
    },
    Toeplitz {
        n: usize,
        lags: Vec<i64>,
        table: Arc<CorrelationTable>,
    },
}

impl TreeCounter {
    pub(crate) fn new(layout: &Layout, target: &GramTarget) -> Result<Self> {
        match (layout.q(), layout.p()) {
            (None, 2) => Ok(TreeCounter::Lag1 {
                n: layout.n(),
                c: lag1_target(layout.n(), target)?,
            }),
            (None, p) => Ok(TreeCounter::Toeplitz {
                n: layout.n(),
                lags: target.offdiag().to_vec(),
                table: Arc::new(CorrelationTable::new(p)?),
            }),
            (Some(_), _) => Ok(TreeCounter::Blocks {
                layout: *layout,
                c: block_targets(layout, target)?,
            }),
        }
    }

    /// `|A(prefix | G)|`; `prefix.len` must be in `1..=N`.
    pub(crate) fn count(&self, bits: PackedBits) -> u64 {
        match self {
            TreeCounter::Lag1 { n, c } => lag1_count(*n, *c, bits),
            TreeCounter::Blocks { layout, c } => {
                block_count(layout, c, bits).expect("pool sizes are validated at build time")
            }
            TreeCounter::Toeplitz { n, lags, table } => table.count_prefix(*n, lags, bits),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pascal_edges() {
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(30, 15), 155_117_520);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(binomial(3, 4), 0);
    }

    #[test]
    fn closed_form_examples() {
        let g5 = GramTarget::toeplitz(5, &[0]).unwrap();
        assert_eq!(count_suffixes_p2(5, &g5, &[-1]).unwrap(), 6);
        assert_eq!(count_suffixes_p2(5, &g5, &[-1, -1, -1, -1]).unwrap(), 0);
        let g1 = GramTarget::toeplitz(4, &[-1]).unwrap();
        assert_eq!(count_suffixes_p2(4, &g1, &[-1]).unwrap(), 3);
    }

    #[test]
    fn closed_form_full_length_is_indicator() {
        let g5 = GramTarget::toeplitz(5, &[0]).unwrap();
        assert_eq!(count_suffixes_p2(5, &g5, &[-1, -1, -1, 1, -1]).unwrap(), 1);
        assert_eq!(count_suffixes_p2(5, &g5, &[-1, -1, -1, -1, -1]).unwrap(), 0);
    }

    #[test]
    fn closed_form_rejects_bad_inputs() {
        let g5 = GramTarget::toeplitz(5, &[0]).unwrap();
        assert!(matches!(
            count_suffixes_p2(5, &g5, &[]),
            Err(Error::PrefixLength { .. })
        ));
        assert!(matches!(
            count_suffixes_p2(5, &g5, &[-1; 6]),
            Err(Error::PrefixLength { .. })
        ));
        let wrong = GramTarget::from_matrix(crate::layout::IntMatrix::from_rows(&[
            vec![5, 1],
            vec![1, 5],
        ]));
        assert!(matches!(
            count_suffixes_p2(5, &wrong, &[-1]),
            Err(Error::InvalidTarget(_))
        ));
        assert!(matches!(
            count_suffixes_p2(5, &g5, &[-1, 0]),
            Err(Error::InvalidSymbol(0))
        ));
    }

    #[test]
    fn blocks_example_n12_q7() {
        let layout = Layout::new(12, 2, Some(7)).unwrap();
        let t = GramTarget::blocks(&layout, &[0, 1]).unwrap();
        assert_eq!(count_suffixes_blocks(12, 7, &t, &[-1]).unwrap(), 20 * 10);
        assert!(matches!(
            GramTarget::blocks(&layout, &[1, 1]),
            Err(Error::InvalidTarget(_))
        ));
    }

    #[test]
    fn blocks_reject_short_period() {
        let layout = Layout::new(12, 2, None).unwrap();
        let t = GramTarget::toeplitz(12, &[1]).unwrap();
        assert!(count_suffixes_blocks(12, 1, &t, &[-1]).is_err());
        let _ = layout;
    }

    #[test]
    fn blocks_boundary_resets_running_sum() {
        // At l = Q the first block is finished: a matching prefix leaves the
        // second block's full binomial, a mismatching one leaves nothing.
        let layout = Layout::new(12, 2, Some(7)).unwrap();
        let t = GramTarget::blocks(&layout, &[0, 1]).unwrap();
        let good = [-1, -1, -1, -1, 1, -1, 1]; // products +,+,+,-,-,- : sum 0
        let bad = [-1, -1, -1, -1, -1, -1, -1];
        assert_eq!(
            count_suffixes_blocks(12, 7, &t, &good).unwrap(),
            binomial(5, 3)
        );
        assert_eq!(count_suffixes_blocks(12, 7, &t, &bad).unwrap(), 0);
    }

    #[test]
    fn blocks_indicator_case() {
        // |c_tau - m_l| exceeds the remaining terms of the current block.
        let layout = Layout::new(12, 2, Some(7)).unwrap();
        let t = GramTarget::blocks(&layout, &[0, 1]).unwrap();
        assert_eq!(count_suffixes_blocks(12, 7, &t, &[-1; 6]).unwrap(), 0);
    }
}
