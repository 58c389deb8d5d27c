//! Monte-Carlo word/bit error and search-effort measurements.

use crate::channel::{ebn0_db, noise_variance, transmit, Channel, SnrConvention};
use crate::codebook::{
    codeword_index, encode, make_spec, verify_gram, CodeSpec, Codebook, TreeMode,
};
use crate::decoder::{decode_exhaustive, Heuristic, SearchOptions, DEFAULT_STACK_CAP};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Exhaustive,
    Priority(Heuristic),
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(DecoderKind::Exhaustive),
            other => other.parse().map(DecoderKind::Priority),
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Exhaustive => "exhaustive",
            DecoderKind::Priority(Heuristic::H1) => "h1",
            DecoderKind::Priority(Heuristic::H2) => "h2",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    /// Sub-block period the code is designed for.
    pub q: Option<usize>,
    pub mode: TreeMode,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub convention: SnrConvention,
    /// Period of the channel taps; defaults to `q`.
    pub q_chan: Option<usize>,
    pub stack_cap: usize,
}

impl ExperimentConfig {
    /// Defaults for a `(n, k)` double-tree code on a two-tap channel.
    pub fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            k,
            p: 2,
            q: None,
            mode: TreeMode::Double,
            snr_db: Vec::new(),
            trials: 1000,
            seed: 0,
            decoder: DecoderKind::Priority(Heuristic::H2),
            convention: SnrConvention::Average,
            q_chan: None,
            stack_cap: DEFAULT_STACK_CAP,
        }
    }

    pub fn spec(&self) -> Result<CodeSpec> {
        make_spec(self.n, self.k, self.p, self.q, self.mode)
    }

    fn channel_period(&self) -> Option<usize> {
        self.q_chan.or(self.q)
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.channel_period() == Some(0) {
            return Err(Error::InvalidParameter(
                "channel period must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Parses `a,b,c` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("SNR {t:?}: {e}")))
    };
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    if let [start, stop, step] = s.split(':').collect::<Vec<_>>()[..] {
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if step <= 0.0 || stop < start {
            return Err(Error::Parse(format!("empty SNR range {s:?}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        return Ok((0..count).map(|i| start + i as f64 * step).collect());
    }
    s.split(',').map(num).collect()
}

/// Outcome of one transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOutcome {
    pub word_error: bool,
    pub bit_errors: u32,
    pub expansions: u64,
    pub erasure: bool,
}

/// Aggregated results at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub k: usize,
    pub trials: u64,
    pub word_errors: u64,
    pub bit_errors: u64,
    pub total_expansions: u64,
    pub max_expansions: u64,
    pub erasures: u64,
}

impl TrialSummary {
    fn empty(snr_db: f64, ebn0_db: f64, k: usize) -> Self {
        Self {
            snr_db,
            ebn0_db,
            k,
            trials: 0,
            word_errors: 0,
            bit_errors: 0,
            total_expansions: 0,
            max_expansions: 0,
            erasures: 0,
        }
    }

    fn add(mut self, t: &TrialOutcome) -> Self {
        self.trials += 1;
        self.word_errors += t.word_error as u64;
        self.bit_errors += t.bit_errors as u64;
        self.total_expansions += t.expansions;
        self.max_expansions = self.max_expansions.max(t.expansions);
        self.erasures += t.erasure as u64;
        self
    }

    fn merge(mut self, o: Self) -> Self {
        self.trials += o.trials;
        self.word_errors += o.word_errors;
        self.bit_errors += o.bit_errors;
        self.total_expansions += o.total_expansions;
        self.max_expansions = self.max_expansions.max(o.max_expansions);
        self.erasures += o.erasures;
        self
    }

    pub fn wer(&self) -> f64 {
        self.word_errors as f64 / self.trials as f64
    }

    /// Binomial standard error of [`Self::wer`].
    pub fn wer_std_error(&self) -> f64 {
        let p = self.wer();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }

    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / (self.trials as f64 * self.k as f64)
    }

    pub fn mean_expansions_per_info_bit(&self) -> f64 {
        self.total_expansions as f64 / (self.trials as f64 * self.k as f64)
    }
}

/// Everything a worker needs, built once per experiment.
pub struct Experiment {
    config: ExperimentConfig,
    spec: CodeSpec,
    codebook: Option<Codebook>,
    /// Code-tree internal nodes, reported as the exhaustive decoder's effort.
    full_tree: u64,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let spec = config.spec()?;
        let (codebook, full_tree) = match config.decoder {
            DecoderKind::Exhaustive => {
                let book = Codebook::enumerate(&spec)?;
                let nodes = book.internal_nodes();
                (Some(book), nodes)
            }
            DecoderKind::Priority(_) => (None, 0),
        };
        Ok(Self {
            config,
            spec,
            codebook,
            full_tree,
        })
    }

    pub fn spec(&self) -> &CodeSpec {
        &self.spec
    }

    /// Trial `trial` at noise variance `noise_var`; reproducible on its own.
    ///
    /// The substream depends on the seed and the trial number only, so every
    /// grid point sees the same codewords, channels and unit-power noise
    /// (common random numbers across SNR).
    pub fn run_trial(&self, trial: u64, noise_var: f64) -> Result<TrialOutcome> {
        let cfg = &self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial);
        let index = rng.random_range(0..self.spec.num_codewords());
        let cw = encode(&self.spec, index)?;
        let channel = Channel::draw(
            cfg.p,
            self.spec.layout().output_len(),
            cfg.channel_period(),
            &mut rng,
        );
        let y = transmit(&cw.bits, &channel, noise_var, &mut rng);
        let decoded = match (cfg.decoder, &self.codebook) {
            (DecoderKind::Exhaustive, Some(book)) => {
                decode_exhaustive(&y, book, &self.spec).map(|r| (r.index, self.full_tree))
            }
            (DecoderKind::Priority(heuristic), _) => {
                let opts = SearchOptions {
                    heuristic,
                    stack_cap: cfg.stack_cap,
                    trace: false,
                };
                crate::decoder::decode(&y, &self.spec, &opts).map(|d| (d.index, d.expansions))
            }
            (DecoderKind::Exhaustive, None) => unreachable!("codebook built in new()"),
        };
        Ok(match decoded {
            Ok((got, expansions)) => TrialOutcome {
                word_error: got != index,
                bit_errors: (got ^ index).count_ones(),
                expansions,
                erasure: false,
            },
            Err(Error::StackOverflow { expansions, .. }) => TrialOutcome {
                word_error: true,
                bit_errors: self.spec.k() as u32,
                expansions,
                erasure: true,
            },
            Err(e) => return Err(e),
        })
    }

    /// Runs every grid point, calling `progress` after each one.
    pub fn run(&self, mut progress: impl FnMut(&TrialSummary)) -> Result<Vec<TrialSummary>> {
        let cfg = &self.config;
        let mut out = Vec::with_capacity(cfg.snr_db.len());
        for &snr in &cfg.snr_db {
            let noise_var = noise_variance(snr, cfg.n, cfg.p, cfg.convention);
            let empty = TrialSummary::empty(snr, ebn0_db(snr, cfg.n, cfg.k), cfg.k);
            let summary = (0..cfg.trials)
                .into_par_iter()
                .map(|t| self.run_trial(t, noise_var))
                .try_fold(|| empty.clone(), |acc, t| t.map(|t| acc.add(&t)))
                .try_reduce(|| empty.clone(), |a, b| Ok(a.merge(b)))?;
            progress(&summary);
            out.push(summary);
        }
        Ok(out)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialSummary>> {
    Experiment::new(config.clone())?.run(|_| {})
}

pub const CSV_HEADER: &str =
    "snr_db,ebn0_db,trials,wer,ber,mean_expansions_per_info_bit,max_expansions,erasures";

/// One parsed CSV line.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub ebn0_db: f64,
    pub trials: u64,
    pub wer: f64,
    pub ber: f64,
    pub mean_expansions_per_info_bit: f64,
    pub max_expansions: u64,
    pub erasures: u64,
}

impl From<&TrialSummary> for CsvRow {
    fn from(s: &TrialSummary) -> Self {
        Self {
            snr_db: s.snr_db,
            ebn0_db: s.ebn0_db,
            trials: s.trials,
            wer: s.wer(),
            ber: s.ber(),
            mean_expansions_per_info_bit: s.mean_expansions_per_info_bit(),
            max_expansions: s.max_expansions,
            erasures: s.erasures,
        }
    }
}

impl fmt::Display for CsvRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.4},{:.4},{},{:.8},{:.8},{:.4},{},{}",
            self.snr_db,
            self.ebn0_db,
            self.trials,
            self.wer,
            self.ber,
            self.mean_expansions_per_info_bit,
            self.max_expansions,
            self.erasures
        )
    }
}

pub fn emit_csv<W: Write>(mut out: W, rows: &[TrialSummary]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", CsvRow::from(r))?;
    }
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse("missing or unexpected CSV header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != 8 {
                return Err(Error::Parse(format!("expected 8 columns: {line:?}")));
            }
            let f = |i: usize| {
                cells[i]
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{:?}: {e}", cells[i])))
            };
            let u = |i: usize| {
                cells[i]
                    .parse::<u64>()
                    .map_err(|e| Error::Parse(format!("{:?}: {e}", cells[i])))
            };
            Ok(CsvRow {
                snr_db: f(0)?,
                ebn0_db: f(1)?,
                trials: u(2)?,
                wer: f(3)?,
                ber: f(4)?,
                mean_expansions_per_info_bit: f(5)?,
                max_expansions: u(6)?,
                erasures: u(7)?,
            })
        })
        .collect()
}

/// One named consistency check: `(name, passed, detail)`.
pub type CheckResult = (String, bool, String);

/// Self-checks on a code: the encoder against its own definition, the
/// candidate count against brute force (small `N`), and the search decoder
/// against the exhaustive one on noisy trials (small `K`).
pub fn verify(spec: &CodeSpec, trials: u64, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();
    let sample: Vec<u64> = if spec.k() <= 14 {
        (0..spec.num_codewords()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..4096)
            .map(|_| rng.random_range(0..spec.num_codewords()))
            .collect()
    };
    let mut bad = 0usize;
    let mut seen = std::collections::HashSet::new();
    for &i in &sample {
        let w = encode(spec, i)?;
        let grams = verify_gram(&w.bits, spec.p(), spec.q())?;
        let ok = w.bits[0] == -1
            && grams == spec.targets()[w.tree].matrices()
            && codeword_index(spec, &w.bits)? == i;
        bad += !ok as usize;
        seen.insert(w.bits);
    }
    let distinct = seen.len() == {
        let mut s = sample.clone();
        s.sort_unstable();
        s.dedup();
        s.len()
    };
    out.push((
        "encoder".into(),
        bad == 0 && distinct,
        format!(
            "{} codewords checked, {bad} inconsistent, distinct: {distinct}",
            sample.len()
        ),
    ));

    if spec.n() <= 20 {
        let mut mismatches = 0;
        for tree in 0..spec.trees() {
            let target = spec.targets()[tree].matrices();
            let brute = (0..1u64 << (spec.n() - 1))
                .filter(|mask| {
                    let bits: Vec<i8> = std::iter::once(-1)
                        .chain((0..spec.n() - 1).map(|i| if mask >> i & 1 == 1 { 1 } else { -1 }))
                        .collect();
                    verify_gram(&bits, spec.p(), spec.q()).is_ok_and(|g| g == target)
                })
                .count() as u64;
            mismatches += (brute != spec.pool(tree)) as usize;
        }
        out.push((
            "pool counts".into(),
            mismatches == 0,
            format!(
                "{} trees against brute force, {mismatches} mismatches",
                spec.trees()
            ),
        ));
    }

    if spec.k() <= 12 {
        let book = Codebook::enumerate(spec)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = noise_variance(5.0, spec.n(), spec.p(), SnrConvention::Average);
        let mut disagreements = 0;
        for _ in 0..trials {
            let index = rng.random_range(0..spec.num_codewords());
            let ch = Channel::draw(spec.p(), spec.layout().output_len(), spec.q(), &mut rng);
            let y = transmit(&book.get(index as usize).bits, &ch, noise, &mut rng);
            let ml = decode_exhaustive(&y, &book, spec)?.index;
            for heuristic in [Heuristic::H1, Heuristic::H2] {
                let opts = SearchOptions {
                    heuristic,
                    ..Default::default()
                };
                disagreements += (crate::decoder::decode(&y, spec, &opts)?.index != ml) as usize;
            }
        }
        out.push((
            "search vs exhaustive".into(),
            disagreements == 0,
            format!("{trials} trials at 5 dB, {disagreements} disagreements"),
        ));
    }
    Ok(out)
}
