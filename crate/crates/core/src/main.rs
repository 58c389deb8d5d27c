use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use orthocode::channel::{parse_samples, transmit, write_samples, Channel, SnrConvention};
use orthocode::codebook::{
    admissible_targets, codeword_index, count_suffixes, count_table_general, encode, make_spec,
    write_tables_csv, CodeSpec, Codebook, GramTarget, TreeMode,
};
use orthocode::decoder::{decode, decode_exhaustive, Heuristic, SearchOptions, DEFAULT_STACK_CAP};
use orthocode::harness::{emit_csv, parse_snr_grid, DecoderKind, Experiment, ExperimentConfig};
use orthocode::layout::{parse_symbols, Layout};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "orthocode",
    version,
    about = "Self-orthogonal codes and joint channel-estimation/decoding for ISI channels",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CodeArgs {
    /// Codeword length N.
    #[arg(long)]
    n: usize,
    /// Information bits K.
    #[arg(long)]
    k: usize,
    /// Channel span P.
    #[arg(long, default_value_t = 2)]
    p: usize,
    /// Sub-block period Q for fast-fading codes.
    #[arg(long)]
    q: Option<usize>,
    /// `single`, `double`, or `auto` (double when two targets exist).
    #[arg(long, default_value = "auto")]
    mode: String,
}

impl CodeArgs {
    fn mode(&self) -> Result<TreeMode> {
        Ok(match self.mode.as_str() {
            "auto" => TreeMode::auto(&Layout::new(self.n, self.p, self.q)?)?,
            other => other.parse()?,
        })
    }

    fn spec(&self) -> Result<CodeSpec> {
        Ok(make_spec(self.n, self.k, self.p, self.q, self.mode()?)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the codeword of an information index.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        index: u64,
    },
    /// Print the index of a codeword given as a `+`/`-` string.
    Index {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, allow_hyphen_values = true)]
        bits: String,
    },
    /// Dump every codeword as `index<TAB>tree<TAB>bits`.
    Codebook {
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Count completions of a prefix, or query one correlation-table cell.
    Count {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 2)]
        p: usize,
        #[arg(long)]
        q: Option<usize>,
        /// Prefix as a `+`/`-` string.
        #[arg(long, allow_hyphen_values = true)]
        prefix: Option<String>,
        /// Off-diagonal targets (lags, or one per sub-block); default: the
        /// first admissible target.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        c: Vec<i64>,
        /// Table query: sequence length k.
        #[arg(long)]
        k: Option<usize>,
        /// Table query: correlation values q_1..q_{P-1}.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        lags: Vec<i64>,
        /// Table query: tail d_{2-P}..d_0 as a `+`/`-` string.
        #[arg(long, allow_hyphen_values = true)]
        tail: Option<String>,
    },
    /// Emit the correlation-count tables as CSV.
    Tables {
        #[arg(long, default_value_t = 3)]
        p: usize,
        #[arg(long)]
        k: usize,
    },
    /// Generate one received vector as `re,im` lines.
    Transmit {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        index: u64,
        #[arg(long, allow_hyphen_values = true)]
        snr: f64,
        #[arg(long, env = "ORTHOCODE_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        q_chan: Option<usize>,
        #[arg(long, default_value = "average")]
        snr_convention: String,
    },
    /// Decode a received vector read from a file (`-` for stdin).
    Decode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value = "-")]
        input: String,
        /// `h1`, `h2`, or `exhaustive`.
        #[arg(long, default_value = "h2")]
        heuristic: String,
        #[arg(long, default_value_t = DEFAULT_STACK_CAP)]
        stack_cap: usize,
        /// Write the expansion trace as CSV to this file (`-` for stderr).
        #[arg(long, num_args = 0..=1, default_missing_value = "-")]
        trace: Option<String>,
    },
    /// Monte-Carlo WER/BER/effort sweep, written as CSV.
    Simulate(SimulateArgs),
    /// Run the built-in consistency checks on a code.
    Verify {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, env = "ORTHOCODE_SEED", default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// `key=value` lines using the long flag names; flags given on the
    /// command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 2)]
    p: usize,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value = "auto")]
    mode: String,
    /// `a,b,c` or `start:stop:step` in dB.
    #[arg(long, allow_hyphen_values = true, default_value = "")]
    snr: String,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, env = "ORTHOCODE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "h2")]
    heuristic: String,
    /// `priority` (uses --heuristic) or `exhaustive`.
    #[arg(long, default_value = "priority")]
    decoder: String,
    #[arg(long)]
    q_chan: Option<usize>,
    /// `average` or `asymptotic`.
    #[arg(long, default_value = "average")]
    snr_convention: String,
    #[arg(long, default_value_t = DEFAULT_STACK_CAP)]
    stack_cap: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let args = match expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    };
    if let Err(e) = run(Cli::parse_from(args)) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

/// Splices `--config FILE` entries in as flags ahead of the command-line ones.
fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = args
        .iter()
        .position(|a| a == "--config" || a.starts_with("--config="))
    else {
        return Ok(args);
    };
    let (path, consumed) = match args[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => (
            args.get(pos + 1)
                .cloned()
                .context("--config needs a path")?,
            2,
        ),
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading {path}"))?;
    let mut from_file = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("expected key=value in {path}: {line:?}"))?;
        from_file.push(format!(
            "--{}={}",
            key.trim().replace('_', "-"),
            value.trim()
        ));
    }
    let mut out: Vec<String> = args[..pos].to_vec();
    out.extend(from_file);
    out.extend(args[pos + consumed..].iter().cloned());
    Ok(out)
}

fn open_input(path: &str) -> Result<String> {
    let mut text = String::new();
    if path == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    }
    Ok(text)
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Encode { code, index } => {
            let spec = code.spec()?;
            let w = encode(&spec, index)?;
            writeln!(out, "{}\t{}", w.tree + 1, w)?;
        }
        Command::Index { code, bits } => {
            let spec = code.spec()?;
            writeln!(out, "{}", codeword_index(&spec, &parse_symbols(&bits)?)?)?;
        }
        Command::Codebook { code } => {
            let spec = code.spec()?;
            Codebook::enumerate(&spec)?.write_to(&mut out)?;
        }
        Command::Count {
            n,
            p,
            q,
            prefix,
            c,
            k,
            lags,
            tail,
        } => {
            if let Some(k) = k {
                let tail = parse_symbols(tail.as_deref().context("--tail is required with --k")?)?;
                writeln!(out, "{}", count_table_general(p, k, &lags, &tail)?)?;
                return Ok(());
            }
            let n = n.context("--n is required (or --k/--lags/--tail for a table cell)")?;
            let prefix = parse_symbols(prefix.as_deref().context("--prefix is required")?)?;
            let layout = Layout::new(n, p, q)?;
            let target = if c.is_empty() {
                admissible_targets(&layout)?
                    .into_iter()
                    .next()
                    .context("no admissible target")?
            } else if q.is_some() {
                GramTarget::blocks(&layout, &c)?
            } else {
                GramTarget::toeplitz(n, &c)?
            };
            writeln!(out, "{}", count_suffixes(&layout, &target, &prefix)?)?;
        }
        Command::Tables { p, k } => write_tables_csv(&mut out, p, k)?,
        Command::Transmit {
            code,
            index,
            snr,
            seed,
            q_chan,
            snr_convention,
        } => {
            let spec = code.spec()?;
            let cw = encode(&spec, index)?;
            let convention: SnrConvention = snr_convention.parse()?;
            let noise = orthocode::channel::noise_variance(snr, spec.n(), spec.p(), convention);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let layout = spec.layout();
            let ch = Channel::draw(spec.p(), layout.output_len(), q_chan.or(spec.q()), &mut rng);
            write_samples(&mut out, &transmit(&cw.bits, &ch, noise, &mut rng))?;
        }
        Command::Decode {
            code,
            input,
            heuristic,
            stack_cap,
            trace,
        } => {
            let spec = code.spec()?;
            let y = parse_samples(&open_input(&input)?)?;
            if heuristic == "exhaustive" {
                let r = decode_exhaustive(&y, &Codebook::enumerate(&spec)?, &spec)?;
                writeln!(
                    out,
                    "index={}\ttree={}\tcodeword={}\tmetric={:.12e}",
                    r.index,
                    r.codeword.tree + 1,
                    r.codeword,
                    r.metric
                )?;
                return Ok(());
            }
            let heuristic: Heuristic = heuristic.parse()?;
            let opts = SearchOptions {
                heuristic,
                stack_cap,
                trace: trace.is_some(),
            };
            let d = decode(&y, &spec, &opts)?;
            writeln!(
                out,
                "index={}\ttree={}\tcodeword={}\texpansions={}",
                d.index,
                d.codeword.tree + 1,
                d.codeword,
                d.expansions
            )?;
            if let Some(path) = trace {
                let mut sink: Box<dyn Write> = if path == "-" {
                    Box::new(io::stderr())
                } else {
                    Box::new(fs::File::create(&path).with_context(|| format!("creating {path}"))?)
                };
                writeln!(sink, "ordinal,level,tree,f,g,h")?;
                for r in &d.trace {
                    writeln!(
                        sink,
                        "{},{},{},{:.12e},{:.12e},{:.12e}",
                        r.ordinal, r.level, r.tree, r.f, r.g, r.h
                    )?;
                }
            }
        }
        Command::Simulate(args) => simulate(args, &mut out)?,
        Command::Verify { code, trials, seed } => {
            let spec = code.spec()?;
            let report = orthocode::harness::verify(&spec, trials, seed)?;
            let mut failed = false;
            for (name, ok, detail) in &report {
                failed |= !ok;
                writeln!(
                    out,
                    "{} {name}: {detail}",
                    if *ok { "PASS" } else { "FAIL" }
                )?;
            }
            if failed {
                bail!("verification failed");
            }
        }
    }
    Ok(())
}

fn simulate(args: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let n = args.n.context("--n is required")?;
    let k = args.k.context("--k is required")?;
    let code = CodeArgs {
        n,
        k,
        p: args.p,
        q: args.q,
        mode: args.mode.clone(),
    };
    let decoder = match args.decoder.as_str() {
        "priority" => DecoderKind::Priority(args.heuristic.parse()?),
        "exhaustive" => DecoderKind::Exhaustive,
        other => bail!("unknown decoder {other:?}"),
    };
    let config = ExperimentConfig {
        n,
        k,
        p: args.p,
        q: args.q,
        mode: code.mode()?,
        snr_db: parse_snr_grid(&args.snr)?,
        trials: args.trials,
        seed: args.seed,
        decoder,
        convention: args.snr_convention.parse()?,
        q_chan: args.q_chan,
        stack_cap: args.stack_cap,
    };
    let experiment = Experiment::new(config)?;
    let rows = experiment.run(|s| {
        eprintln!(
            "snr {:.2} dB: wer {:.3e} (± {:.1e}), ber {:.3e}, expansions/bit {:.2}, erasures {}",
            s.snr_db,
            s.wer(),
            s.wer_std_error(),
            s.ber(),
            s.mean_expansions_per_info_bit(),
            s.erasures
        );
    })?;
    match args.out {
        Some(path) => {
            let file =
                fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            emit_csv(io::BufWriter::new(file), &rows)?;
        }
        None => emit_csv(out, &rows)?,
    }
    Ok(())
}
