//! Priority-first search over the code trees.

use super::path::{g_extend, heuristic_h2, PathState};
use super::weights::DecoderWeights;
use crate::codebook::{CodeSpec, Codeword};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::str::FromStr;

pub const DEFAULT_STACK_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// `h = 0`; usable while samples are still arriving.
    H1,
    /// Look-ahead bound over the whole received vector.
    #[default]
    H2,
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "h1" => Ok(Heuristic::H1),
            "h2" => Ok(Heuristic::H2),
            other => Err(Error::Parse(format!("unknown heuristic {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    pub heuristic: Heuristic,
    pub stack_cap: usize,
    pub trace: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            heuristic: Heuristic::H2,
            stack_cap: DEFAULT_STACK_CAP,
            trace: false,
        }
    }
}

/// One expanded path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub ordinal: u64,
    pub level: usize,
    /// Numbered from 1.
    pub tree: usize,
    pub f: f64,
    pub g: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub index: u64,
    pub codeword: Codeword,
    /// Final `g` of the decoded path.
    pub metric: f64,
    /// Paths popped and extended before the first full-length pop.
    pub expansions: u64,
    pub trace: Vec<TraceRow>,
}

struct Entry {
    f: f64,
    h: f64,
    ordinal: u64,
    /// Pool-rank interval of the path's completions.
    lo: u64,
    hi: u64,
    path: PathState,
}

// BinaryHeap pops the greatest entry: smallest f, then deepest, then oldest.
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.path.len().cmp(&other.path.len()))
            .then(other.ordinal.cmp(&self.ordinal))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

/// Quasi-static priority-first decoding.
pub fn decode_priority(y: &[Complex64], spec: &CodeSpec, opts: &SearchOptions) -> Result<Decoded> {
    if spec.q().is_some() {
        return Err(Error::InvalidParameter(
            "sub-block code: use decode_priority_fast".into(),
        ));
    }
    search(y, spec, opts)
}

/// Priority-first decoding of a sub-block (fast-fading) code.
pub fn decode_priority_fast(
    y: &[Complex64],
    spec: &CodeSpec,
    opts: &SearchOptions,
) -> Result<Decoded> {
    if spec.q().is_none() {
        return Err(Error::InvalidParameter(
            "quasi-static code: use decode_priority".into(),
        ));
    }
    search(y, spec, opts)
}

/// Dispatches on whether `spec` has sub-blocks.
pub fn decode(y: &[Complex64], spec: &CodeSpec, opts: &SearchOptions) -> Result<Decoded> {
    search(y, spec, opts)
}

fn search(y: &[Complex64], spec: &CodeSpec, opts: &SearchOptions) -> Result<Decoded> {
    if opts.stack_cap == 0 {
        return Err(Error::InvalidParameter(
            "stack capacity must be positive".into(),
        ));
    }
    let weights = DecoderWeights::new(y, spec)?;
    let n = spec.n();
    let track_v = opts.heuristic == Heuristic::H2;
    let heuristic = |p: &PathState| match opts.heuristic {
        Heuristic::H1 => 0.0,
        Heuristic::H2 => heuristic_h2(p, &weights),
    };

    let mut heap = BinaryHeap::new();
    let mut ordinal = 0u64;
    let mut push = |heap: &mut BinaryHeap<Entry>, path: PathState, lo: u64, hi: u64| {
        let h = heuristic(&path);
        heap.push(Entry {
            f: path.g + h,
            h,
            ordinal,
            lo,
            hi,
            path,
        });
        ordinal += 1;
    };

    for tree in 0..spec.trees() {
        let root = g_extend(&PathState::empty(tree, &weights, track_v), -1, &weights);
        push(&mut heap, root, 0, spec.pool(tree) - 1);
    }

    let mut expansions = 0u64;
    let mut trace = Vec::new();
    while let Some(entry) = heap.pop() {
        let path = entry.path;
        if path.len() == n {
            let index = spec
                .index_of_rank(path.tree, entry.lo)
                .expect("search keeps only selected codewords");
            return Ok(Decoded {
                index,
                codeword: Codeword {
                    bits: path.bits.to_symbols(),
                    tree: path.tree,
                },
                metric: path.g,
                expansions,
                trace,
            });
        }
        expansions += 1;
        if opts.trace {
            trace.push(TraceRow {
                ordinal: expansions,
                level: path.len(),
                tree: path.tree + 1,
                f: entry.f,
                g: path.g,
                h: entry.h,
            });
        }
        let gamma = spec.count_packed(path.tree, path.bits.push(-1));
        let children = [
            (-1i8, entry.lo, entry.lo + gamma),
            (1i8, entry.lo + gamma, entry.hi + 1),
        ];
        for (bit, lo, end) in children {
            if end > lo && spec.interval_has_codeword(path.tree, lo, end - 1) {
                push(&mut heap, g_extend(&path, bit, &weights), lo, end - 1);
            }
        }
        if heap.len() > opts.stack_cap {
            return Err(Error::StackOverflow {
                expansions,
                capacity: opts.stack_cap,
            });
        }
    }
    unreachable!("every code tree holds at least one codeword")
}
