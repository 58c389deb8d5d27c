//! Aperiodic correlation counts `A_k(q | d_{2-P}, ..., d_0)` for general `P`.
//!
//! `A_k` is the number of `d_1..d_k ∈ {±1}` with
//! `q_j = sum_{i=1}^{k} d_{i-j} d_i` for every lag `1 <= j <= P-1`. It gives
//! the suffix count of a prefix under a Toeplitz Gram target when no closed
//! form exists (`P > 2`).

use crate::error::{Error, Result};
use crate::layout::PackedBits;
use std::collections::HashMap;
use std::io::Write;
use std::sync::Mutex;

/// Memoised `A_k` for one channel span `P`.
///
/// Tail entries may be `0` internally, which stands for a bit before the start
/// of the codeword; the public entry point only accepts ±1 tails.
#[derive(Debug)]
pub struct CorrelationTable {
    p: usize,
    memo: Mutex<HashMap<Vec<i64>, u64>>,
}

impl Clone for CorrelationTable {
    fn clone(&self) -> Self {
        Self {
            p: self.p,
            memo: Mutex::new(self.memo.lock().expect("memo poisoned").clone()),
        }
    }
}

impl CorrelationTable {
    pub fn new(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::InvalidParameter(format!(
                "correlation tables need P > 1, got {p}"
            )));
        }
        Ok(Self {
            p,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// `A_k(q | tail)` with `tail = (d_{2-P}, ..., d_0)`.
    pub fn count(&self, k: usize, q: &[i64], tail: &[i8]) -> u64 {
        debug_assert_eq!(q.len(), self.p - 1);
        debug_assert_eq!(tail.len(), self.p - 1);
        if q.iter().any(|qj| qj.unsigned_abs() as usize > k) {
            return 0;
        }
        if k == 0 {
            return 1;
        }
        // A_k(q | -d) = A_k(q | d): keep the first nonzero tail entry at -1.
        let flip = tail.iter().find(|&&d| d != 0).is_some_and(|&d| d > 0);
        let tail: Vec<i8> = if flip {
            tail.iter().map(|&d| -d).collect()
        } else {
            tail.to_vec()
        };
        let key: Vec<i64> = std::iter::once(k as i64)
            .chain(q.iter().copied())
            .chain(tail.iter().map(|&d| d as i64))
            .collect();
        if let Some(&v) = self.memo.lock().expect("memo poisoned").get(&key) {
            return v;
        }
        let lags = self.p - 1;
        let mut total = 0u64;
        for d in [-1i8, 1] {
            // d_1 = d adds d_{1-j} d to q_j; d_{1-j} is tail[lags - j].
            let rest: Vec<i64> = (1..=lags)
                .map(|j| q[j - 1] - (tail[lags - j] as i64) * d as i64)
                .collect();
            let mut next_tail = tail[1..].to_vec();
            next_tail.push(d);
            total += self.count(k - 1, &rest, &next_tail);
        }
        self.memo.lock().expect("memo poisoned").insert(key, total);
        total
    }

    /// Suffix count of a prefix under the Toeplitz target with off-diagonal
    /// lags `c`: `A_{N-l}(c - m_l | b_{l-P+2}, ..., b_l)`, bits before the
    /// start of the codeword entering as 0.
    pub(crate) fn count_prefix(&self, n: usize, c: &[i64], bits: PackedBits) -> u64 {
        let l = bits.len;
        let q: Vec<i64> = (1..self.p)
            .map(|lag| {
                let m = if l > lag {
                    bits.lag_sum(lag, lag..l)
                } else {
                    0
                };
                c[lag - 1] - m
            })
            .collect();
        let tail: Vec<i8> = (0..self.p - 1)
            .map(|back| {
                let idx = l as isize - (self.p as isize - 1) + back as isize;
                if idx < 0 {
                    0
                } else {
                    bits.symbol(idx as usize)
                }
            })
            .collect();
        self.count(n - l, &q, &tail)
    }
}

/// `A_k(q | d_{2-P}, ..., d_0)` for `P > 1`, `k >= 1`, `|q_j| <= k` and a ±1 tail.
pub fn count_table_general(p: usize, k: usize, q: &[i64], tail: &[i8]) -> Result<u64> {
    let table = CorrelationTable::new(p)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if q.len() != p - 1 || tail.len() != p - 1 {
        return Err(Error::InvalidParameter(format!(
            "expected {} lags and {} tail symbols",
            p - 1,
            p - 1
        )));
    }
    if let Some(bad) = q.iter().find(|qj| qj.unsigned_abs() as usize > k) {
        return Err(Error::InvalidParameter(format!(
            "|q_j| = {} exceeds k = {k}",
            bad.abs()
        )));
    }
    if let Some(&bad) = tail.iter().find(|&&d| d != 1 && d != -1) {
        return Err(Error::InvalidSymbol(bad as i64));
    }
    Ok(table.count(k, q, tail))
}

/// The `2^{P-2}` canonical tails (first symbol `-1`) in binary-alphabetical order.
pub fn canonical_tails(p: usize) -> Vec<Vec<i8>> {
    let free = p.saturating_sub(2);
    (0..1usize << free)
        .map(|code| {
            let mut tail = vec![-1i8];
            tail.extend(
                (0..free)
                    .rev()
                    .map(|b| if code >> b & 1 == 1 { 1 } else { -1 }),
            );
            tail
        })
        .collect()
}

/// Writes the `A_k` tables as CSV.
///
/// For `P = 3` the layout is one row per `(tail, q_1)` and one column per
/// `q_2`, mirroring the printed tables:
/// `tail,q1,-k,...,k`. For other `P` the long form
/// `tail,q1,...,q_{P-1},count` lists the nonzero cells.
pub fn write_tables_csv<W: Write>(mut out: W, p: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let table = CorrelationTable::new(p)?;
    let ki = k as i64;
    let tail_label = |t: &[i8]| {
        t.iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    if p == 3 {
        write!(out, "tail,q1")?;
        for q2 in -ki..=ki {
            write!(out, ",{q2}")?;
        }
        writeln!(out)?;
        for tail in canonical_tails(p) {
            for q1 in -ki..=ki {
                write!(out, "{},{q1}", tail_label(&tail))?;
                for q2 in -ki..=ki {
                    write!(out, ",{}", table.count(k, &[q1, q2], &tail))?;
                }
                writeln!(out)?;
            }
        }
        return Ok(());
    }
    write!(out, "tail")?;
    for j in 1..p {
        write!(out, ",q{j}")?;
    }
    writeln!(out, ",count")?;
    let radix = 2 * k + 1;
    let cells = radix.pow((p - 1) as u32);
    for tail in canonical_tails(p) {
        for cell in 0..cells {
            let q: Vec<i64> = (0..p - 1)
                .rev()
                .map(|j| (cell / radix.pow(j as u32) % radix) as i64 - ki)
                .collect();
            let v = table.count(k, &q, &tail);
            if v > 0 {
                write!(out, "{}", tail_label(&tail))?;
                for qj in &q {
                    write!(out, ",{qj}")?;
                }
                writeln!(out, ",{v}")?;
            }
        }
    }
    Ok(())
}
