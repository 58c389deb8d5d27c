//! Rule-based self-orthogonal codes.
//!
//! A codeword is a ±1 sequence with `b_1 = -1` whose convolution matrix has a
//! prescribed Gram matrix `B^T B` (its "tree"). For each tree the candidate
//! pool is listed in binary-alphabetical order (`-1` before `+1`) and every
//! `Δ`-th candidate is selected; the encoder walks the code tree using suffix
//! counts, so neither the pool nor the codebook is ever materialised.

mod count;
mod table;

pub use count::{binomial, count_suffixes_blocks, count_suffixes_p2};
pub use table::{canonical_tails, count_table_general, write_tables_csv, CorrelationTable};

pub(crate) use count::TreeCounter;

use crate::error::{Error, Result};
use crate::layout::{block_conv_matrix, symbols_to_string, IntMatrix, Layout, PackedBits};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

/// Gram matrix a codeword must reproduce exactly.
///
/// Quasi-static codes carry one `P x P` Toeplitz matrix with diagonal `N` and
/// off-diagonal lags `c_1..c_{P-1}`. Sub-block codes (`P = 2`) carry one
/// `2 x 2` matrix per block, with `c_k` the off-diagonal of block `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GramTarget {
    matrices: Vec<IntMatrix>,
    offdiag: Vec<i64>,
}

fn lag_choices(terms: usize) -> &'static [i64] {
    if terms.is_multiple_of(2) {
        &[0]
    } else {
        &[-1, 1]
    }
}

fn check_lag(terms: usize, c: i64, what: &str) -> Result<()> {
    if c.abs() > terms as i64 || (terms as i64 + c) % 2 != 0 {
        return Err(Error::InvalidTarget(format!(
            "{what} = {c} is not reachable by a sum of {terms} ±1 products (parity or range)"
        )));
    }
    Ok(())
}

impl GramTarget {
    /// Toeplitz target `G(c)` for a quasi-static code of length `n`; `P = lags.len() + 1`.
    pub fn toeplitz(n: usize, lags: &[i64]) -> Result<Self> {
        let p = lags.len() + 1;
        if p > n {
            return Err(Error::InvalidTarget(format!("P={p} exceeds N={n}")));
        }
        for (j, &c) in lags.iter().enumerate() {
            check_lag(n - (j + 1), c, &format!("c_{}", j + 1))?;
        }
        let mut m = IntMatrix::zeros(p, p);
        for r in 0..p {
            for col in 0..p {
                let v = if r == col {
                    n as i64
                } else {
                    lags[r.abs_diff(col) - 1]
                };
                m.set(r, col, v);
            }
        }
        Ok(Self {
            matrices: vec![m],
            offdiag: lags.to_vec(),
        })
    }

    /// Per-block targets for a `P = 2` sub-block layout: the diagonals follow
    /// from the geometry, the off-diagonals are `c_1..c_M`.
    pub fn blocks(layout: &Layout, c: &[i64]) -> Result<Self> {
        if layout.p() != 2 {
            return Err(Error::InvalidTarget(
                "sub-block targets are defined for P = 2".into(),
            ));
        }
        if c.len() != layout.num_blocks() {
            return Err(Error::InvalidTarget(format!(
                "{} blocks need {} off-diagonals, got {}",
                layout.num_blocks(),
                layout.num_blocks(),
                c.len()
            )));
        }
        let n = layout.n();
        let mut matrices = Vec::with_capacity(c.len());
        for (k, &ck) in c.iter().enumerate() {
            check_lag(
                layout.block_lag1_terms(k).len(),
                ck,
                &format!("c_{}", k + 1),
            )?;
            let outs = layout.block_outputs(k);
            let d0 = outs.clone().filter(|&t| t < n).count() as i64;
            let d1 = outs.filter(|&t| t >= 1 && t <= n).count() as i64;
            matrices.push(IntMatrix::from_rows(&[vec![d0, ck], vec![ck, d1]]));
        }
        Ok(Self {
            matrices,
            offdiag: c.to_vec(),
        })
    }

    /// Wraps an arbitrary single matrix; off-diagonals are read from row 0.
    pub fn from_matrix(m: IntMatrix) -> Self {
        let offdiag = (1..m.cols()).map(|c| m.get(0, c)).collect();
        Self {
            matrices: vec![m],
            offdiag,
        }
    }

    pub fn matrices(&self) -> &[IntMatrix] {
        &self.matrices
    }

    pub fn offdiag(&self) -> &[i64] {
        &self.offdiag
    }
}

/// Gram targets admissible for `layout`, in lexicographic order of their
/// off-diagonal vectors with `-1 < 0 < +1`.
///
/// Each off-diagonal is the sum of a fixed number of ±1 products, so it is
/// `0` when that number is even and `±1` when it is odd.
pub fn admissible_targets(layout: &Layout) -> Result<Vec<GramTarget>> {
    let slots: Vec<usize> = match layout.q() {
        None => (1..layout.p()).map(|j| layout.n() - j).collect(),
        Some(_) => {
            if layout.p() != 2 {
                return Err(Error::InvalidParameter(
                    "sub-block codes are defined for P = 2".into(),
                ));
            }
            (0..layout.num_blocks())
                .map(|k| layout.block_lag1_terms(k).len())
                .collect()
        }
    };
    let mut vectors: Vec<Vec<i64>> = vec![Vec::new()];
    for &terms in &slots {
        vectors = vectors
            .into_iter()
            .flat_map(|v| {
                lag_choices(terms).iter().map(move |&c| {
                    let mut next = v.clone();
                    next.push(c);
                    next
                })
            })
            .collect();
    }
    vectors
        .iter()
        .map(|c| match layout.q() {
            None => GramTarget::toeplitz(layout.n(), c),
            Some(_) => GramTarget::blocks(layout, c),
        })
        .collect()
}

/// `|A(prefix | target)|` for any supported layout: the closed forms for
/// `P = 2`, the correlation-table recursion otherwise.
pub fn count_suffixes(layout: &Layout, target: &GramTarget, prefix: &[i8]) -> Result<u64> {
    if prefix.is_empty() || prefix.len() > layout.n() {
        return Err(Error::PrefixLength {
            len: prefix.len(),
            n: layout.n(),
        });
    }
    let counter = TreeCounter::new(layout, target)?;
    Ok(counter.count(PackedBits::from_symbols(prefix)?))
}

/// Number of code trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TreeMode {
    Single,
    Double,
}

impl TreeMode {
    pub fn trees(self) -> usize {
        match self {
            TreeMode::Single => 1,
            TreeMode::Double => 2,
        }
    }

    /// Double when the layout admits two targets (e.g. `N` even for `P = 2`),
    /// single otherwise.
    pub fn auto(layout: &Layout) -> Result<Self> {
        Ok(if admissible_targets(layout)?.len() >= 2 {
            TreeMode::Double
        } else {
            TreeMode::Single
        })
    }
}

impl FromStr for TreeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(TreeMode::Single),
            "double" => Ok(TreeMode::Double),
            other => Err(Error::Parse(format!("unknown tree mode {other:?}"))),
        }
    }
}

impl fmt::Display for TreeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeMode::Single => "single",
            TreeMode::Double => "double",
        })
    }
}

/// A codeword together with the (0-based) tree whose Gram target it meets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Codeword {
    pub bits: Vec<i8>,
    pub tree: usize,
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&symbols_to_string(&self.bits))
    }
}

/// A fully resolved `(N, K)` code: layout, trees, candidate pools and strides.
#[derive(Debug, Clone)]
pub struct CodeSpec {
    layout: Layout,
    k: usize,
    mode: TreeMode,
    targets: Vec<GramTarget>,
    pools: Vec<u64>,
    deltas: Vec<u64>,
    counters: Vec<TreeCounter>,
}

/// Builds the code for `(N, K, P)`, optional sub-block period `Q`, and tree mode.
pub fn make_spec(
    n: usize,
    k: usize,
    p: usize,
    q: Option<usize>,
    mode: TreeMode,
) -> Result<CodeSpec> {
    CodeSpec::new(n, k, p, q, mode)
}

impl CodeSpec {
    pub fn new(n: usize, k: usize, p: usize, q: Option<usize>, mode: TreeMode) -> Result<Self> {
        let layout = Layout::new(n, p, q)?;
        let trees = mode.trees();
        if k >= 63 || (1u64 << k) / (trees as u64) < 2 {
            return Err(Error::DegenerateRate {
                per_tree: if k >= 63 {
                    0
                } else {
                    (1u64 << k) / trees as u64
                },
            });
        }
        let per_tree = (1u64 << k) / trees as u64;
        let admissible = admissible_targets(&layout)?;
        if admissible.len() < trees {
            return Err(Error::InvalidParameter(format!(
                "{mode}-tree code needs {trees} admissible Gram targets, layout offers {}",
                admissible.len()
            )));
        }
        let targets: Vec<GramTarget> = admissible.into_iter().take(trees).collect();
        let counters = targets
            .iter()
            .map(|t| TreeCounter::new(&layout, t))
            .collect::<Result<Vec<_>>>()?;
        let root = PackedBits::default().push(-1);
        let mut pools = Vec::with_capacity(trees);
        let mut deltas = Vec::with_capacity(trees);
        for (tree, counter) in counters.iter().enumerate() {
            let pool = counter.count(root);
            if pool < per_tree {
                return Err(Error::CodeTooLarge {
                    tree,
                    pool,
                    requested: per_tree,
                });
            }
            pools.push(pool);
            deltas.push((pool - 1) / (per_tree - 1));
        }
        Ok(Self {
            layout,
            k,
            mode,
            targets,
            pools,
            deltas,
            counters,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n(&self) -> usize {
        self.layout.n()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.layout.p()
    }

    pub fn q(&self) -> Option<usize> {
        self.layout.q()
    }

    pub fn mode(&self) -> TreeMode {
        self.mode
    }

    /// `Θ`.
    pub fn trees(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[GramTarget] {
        &self.targets
    }

    /// `2^K`.
    pub fn num_codewords(&self) -> u64 {
        1 << self.k
    }

    /// `2^K / Θ`.
    pub fn per_tree(&self) -> u64 {
        self.num_codewords() / self.trees() as u64
    }

    /// `|A(b_1 = -1 | G_θ)|`.
    pub fn pool(&self, tree: usize) -> u64 {
        self.pools[tree]
    }

    /// Selection stride `Δ` of a tree.
    pub fn delta(&self, tree: usize) -> u64 {
        self.deltas[tree]
    }

    /// `|A(prefix | G_θ)|` for a prefix of length `1..=N`.
    pub fn count(&self, tree: usize, prefix: &[i8]) -> Result<u64> {
        if prefix.is_empty() || prefix.len() > self.n() {
            return Err(Error::PrefixLength {
                len: prefix.len(),
                n: self.n(),
            });
        }
        Ok(self.counters[tree].count(PackedBits::from_symbols(prefix)?))
    }

    pub(crate) fn count_packed(&self, tree: usize, bits: PackedBits) -> u64 {
        self.counters[tree].count(bits)
    }

    /// Whether the pool-rank interval `[lo, hi]` of `tree` holds a selected rank.
    pub(crate) fn interval_has_codeword(&self, tree: usize, lo: u64, hi: u64) -> bool {
        if lo > hi {
            return false;
        }
        let delta = self.deltas[tree];
        let first = lo.div_ceil(delta);
        first < self.per_tree() && first * delta <= hi
    }

    /// Codeword index of the selected candidate with pool rank `rank`.
    pub(crate) fn index_of_rank(&self, tree: usize, rank: u64) -> Option<u64> {
        let delta = self.deltas[tree];
        (rank.is_multiple_of(delta) && rank / delta < self.per_tree())
            .then(|| tree as u64 * self.per_tree() + rank / delta)
    }

    fn check_index(&self, index: u64) -> Result<()> {
        if index >= self.num_codewords() {
            return Err(Error::IndexOutOfRange {
                index,
                size: self.num_codewords(),
            });
        }
        Ok(())
    }

    fn tree_of_index(&self, index: u64) -> (usize, u64) {
        let tree = (index / self.per_tree()) as usize;
        (tree, index % self.per_tree())
    }
}

/// Maps an information index to its codeword.
///
/// Tree `θ = index / (2^K/Θ)`; within the tree the candidate of pool rank
/// `(index mod 2^K/Θ) * Δ` is generated bit by bit: with `γ` the count of the
/// `-1` branch, the next bit is `-1` iff the rank falls below `ρ_min + γ`.
pub fn encode(spec: &CodeSpec, index: u64) -> Result<Codeword> {
    spec.check_index(index)?;
    let (tree, local) = spec.tree_of_index(index);
    let rho = local * spec.delta(tree);
    let mut bits = PackedBits::default().push(-1);
    let mut rho_min = 0u64;
    while bits.len < spec.n() {
        let gamma = spec.count_packed(tree, bits.push(-1));
        if rho < rho_min + gamma {
            bits = bits.push(-1);
        } else {
            rho_min += gamma;
            bits = bits.push(1);
        }
    }
    Ok(Codeword {
        bits: bits.to_symbols(),
        tree,
    })
}

/// Rank of `bits` in the binary-alphabetical candidate pool of `tree`, or
/// `None` when the sequence is not a candidate of that tree.
pub fn pool_rank(spec: &CodeSpec, tree: usize, bits: &[i8]) -> Result<Option<u64>> {
    if bits.len() != spec.n() {
        return Err(Error::PrefixLength {
            len: bits.len(),
            n: spec.n(),
        });
    }
    let packed = PackedBits::from_symbols(bits)?;
    if packed.symbol(0) != -1 {
        return Ok(None);
    }
    let mut prefix = PackedBits::default().push(-1);
    let mut rank = 0u64;
    for i in 1..spec.n() {
        let b = packed.symbol(i);
        if b > 0 {
            rank += spec.count_packed(tree, prefix.push(-1));
        }
        prefix = prefix.push(b);
        if spec.count_packed(tree, prefix) == 0 {
            return Ok(None);
        }
    }
    Ok(Some(rank))
}

/// Inverse of [`encode`].
pub fn codeword_index(spec: &CodeSpec, bits: &[i8]) -> Result<u64> {
    for tree in 0..spec.trees() {
        if let Some(rank) = pool_rank(spec, tree, bits)? {
            return spec.index_of_rank(tree, rank).ok_or(Error::NotACodeword);
        }
    }
    Err(Error::NotACodeword)
}

/// `B^T B` (quasi-static) or the per-block list `B_k^T B_k`, exactly.
pub fn verify_gram(bits: &[i8], p: usize, q: Option<usize>) -> Result<Vec<IntMatrix>> {
    PackedBits::from_symbols(bits)?;
    let layout = Layout::new(bits.len(), p, q)?;
    Ok((0..layout.num_blocks())
        .map(|k| block_conv_matrix(bits, &layout, k).gram())
        .collect())
}

/// All `2^K` codewords in index order.
#[derive(Debug, Clone)]
pub struct Codebook {
    words: Vec<Codeword>,
}

impl Codebook {
    pub fn enumerate(spec: &CodeSpec) -> Result<Self> {
        let words = (0..spec.num_codewords())
            .map(|i| encode(spec, i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { words })
    }

    pub fn words(&self) -> &[Codeword] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, index: usize) -> &Codeword {
        &self.words[index]
    }

    /// Internal nodes of the code trees (distinct prefixes of length
    /// `1..N-1`), i.e. what a full traversal would expand.
    pub fn internal_nodes(&self) -> u64 {
        let n = self.words.first().map_or(0, |w| w.bits.len());
        let mut seen = std::collections::HashSet::new();
        for w in &self.words {
            let packed = PackedBits::from_symbols(&w.bits).expect("codeword symbols");
            for len in 1..n {
                let mask = if len == 64 {
                    u64::MAX
                } else {
                    (1u64 << len) - 1
                };
                seen.insert((w.tree, len, packed.mask & mask));
            }
        }
        seen.len() as u64
    }

    /// One line per codeword: `index<TAB>tree<TAB>bits`, tree numbered from 1
    /// and bits written as `+`/`-`.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        for (i, w) in self.words.iter().enumerate() {
            writeln!(out, "{i}\t{}\t{w}", w.tree + 1)?;
        }
        Ok(())
    }
}
