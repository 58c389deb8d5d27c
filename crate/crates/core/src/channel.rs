//! Rayleigh ISI channel with unknown taps and AWGN.

use crate::error::{Error, Result};
use crate::layout::{block_conv_matrix, IntMatrix, Layout};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::io::Write;
use std::str::FromStr;

/// How the SNR in dB maps to the noise variance per complex sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrConvention {
    /// Average received SNR over the `L = N + P - 1` outputs:
    /// `σ² = N / ((N + P - 1) · SNR)`.
    #[default]
    Average,
    /// Large-`N` limit `σ² = 1 / SNR`.
    Asymptotic,
}

impl FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "average" | "ave" => Ok(SnrConvention::Average),
            "asymptotic" => Ok(SnrConvention::Asymptotic),
            other => Err(Error::Parse(format!("unknown SNR convention {other:?}"))),
        }
    }
}

/// Noise variance per complex sample for `snr_db`.
pub fn noise_variance(snr_db: f64, n: usize, p: usize, convention: SnrConvention) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    match convention {
        SnrConvention::Average => n as f64 / ((n + p - 1) as f64 * snr),
        SnrConvention::Asymptotic => 1.0 / snr,
    }
}

/// Inverse of [`noise_variance`] under the average convention.
pub fn average_snr_db(noise_var: f64, n: usize, p: usize) -> f64 {
    10.0 * (n as f64 / ((n + p - 1) as f64 * noise_var)).log10()
}

/// `E_b/N_0` in dB for rate `K/N`: `SNR · N / K`.
pub fn ebn0_db(snr_db: f64, n: usize, k: usize) -> f64 {
    snr_db + 10.0 * (n as f64 / k as f64).log10()
}

/// Channel taps, constant over runs of `period` output samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    taps: Vec<Vec<Complex64>>,
    period: Option<usize>,
}

impl Channel {
    /// `taps[k]` applies to outputs `k·period..(k+1)·period`; with no period a
    /// single tap vector covers the whole transmission.
    pub fn new(taps: Vec<Vec<Complex64>>, period: Option<usize>) -> Result<Self> {
        let p = taps.first().map_or(0, Vec::len);
        if p == 0 || taps.iter().any(|t| t.len() != p) {
            return Err(Error::InvalidParameter(
                "tap vectors must be nonempty and of equal length".into(),
            ));
        }
        if period == Some(0) {
            return Err(Error::InvalidParameter(
                "channel period must be positive".into(),
            ));
        }
        if period.is_none() && taps.len() != 1 {
            return Err(Error::InvalidParameter(
                "a quasi-static channel has one tap vector".into(),
            ));
        }
        Ok(Self { taps, period })
    }

    pub fn quasi_static(taps: Vec<Complex64>) -> Result<Self> {
        Self::new(vec![taps], None)
    }

    /// Independent taps `h_j ~ CN(0, 1/P)` for each period covering `len` outputs.
    pub fn draw<R: Rng + ?Sized>(p: usize, len: usize, period: Option<usize>, rng: &mut R) -> Self {
        let sets = period.map_or(1, |q| len.div_ceil(q).max(1));
        let scale = (0.5 / p as f64).sqrt();
        let taps = (0..sets)
            .map(|_| (0..p).map(|_| complex_gaussian(rng, scale)).collect())
            .collect();
        Self { taps, period }
    }

    pub fn p(&self) -> usize {
        self.taps[0].len()
    }

    pub fn period(&self) -> Option<usize> {
        self.period
    }

    pub fn tap_sets(&self) -> &[Vec<Complex64>] {
        &self.taps
    }

    /// Taps in force at output `t`.
    pub fn taps_at(&self, t: usize) -> &[Complex64] {
        let k = self.period.map_or(0, |q| t / q);
        &self.taps[k.min(self.taps.len() - 1)]
    }

    /// Noiseless outputs `x_t = sum_j h_j b_{t-j}`, `t = 0..N+P-1`.
    pub fn apply(&self, bits: &[i8]) -> Vec<Complex64> {
        let p = self.p();
        (0..bits.len() + p - 1)
            .map(|t| {
                let h = self.taps_at(t);
                (0..p)
                    .filter(|&j| j <= t && t - j < bits.len())
                    .map(|j| h[j] * bits[t - j] as f64)
                    .sum()
            })
            .collect()
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * scale, im * scale)
}

/// Received vector: channel output plus `CN(0, noise_var)` noise on every sample.
pub fn transmit<R: Rng + ?Sized>(
    bits: &[i8],
    channel: &Channel,
    noise_var: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let scale = (noise_var / 2.0).sqrt();
    channel
        .apply(bits)
        .into_iter()
        .map(|x| x + complex_gaussian(rng, scale))
        .collect()
}

/// Inverse of a Gram matrix whose leading diagonal entries may be zero
/// (a trailing sub-block that some taps never reach): those rows and columns
/// stay zero and the remaining principal submatrix is inverted.
pub fn padded_inverse(g: &IntMatrix) -> Result<DMatrix<f64>> {
    let p = g.rows();
    let skip = (0..p).take_while(|&i| g.get(i, i) == 0).count();
    let mut out = DMatrix::zeros(p, p);
    if skip == p {
        return Ok(out);
    }
    let sub = g
        .to_f64()
        .view((skip, skip), (p - skip, p - skip))
        .into_owned();
    let inv = sub.try_inverse().ok_or(Error::SingularGram)?;
    out.view_mut((skip, skip), (p - skip, p - skip))
        .copy_from(&inv);
    Ok(out)
}

/// Least-squares taps `ĥ_k = (B_k^T B_k)^+ B_k^T y_k` for every block of `layout`.
pub fn ls_estimate(y: &[Complex64], bits: &[i8], layout: &Layout) -> Result<Vec<Vec<Complex64>>> {
    check_received(y, layout)?;
    let q = layout.period();
    (0..layout.num_blocks())
        .map(|k| {
            let b = block_conv_matrix(bits, layout, k);
            let d = padded_inverse(&b.gram())?;
            let z: Vec<Complex64> = (0..layout.p())
                .map(|j| {
                    (0..q)
                        .map(|r| y.get(k * q + r).copied().unwrap_or_default() * b.get(r, j) as f64)
                        .sum()
                })
                .collect();
            Ok((0..layout.p())
                .map(|i| (0..layout.p()).map(|j| z[j] * d[(i, j)]).sum())
                .collect())
        })
        .collect()
}

/// Accepts `L` samples, or `M·Q` when zero-padded to whole sub-blocks.
pub(crate) fn check_received(y: &[Complex64], layout: &Layout) -> Result<()> {
    if y.len() != layout.output_len() && y.len() != layout.padded_len() {
        return Err(Error::ReceivedLength {
            got: y.len(),
            expected: layout.output_len(),
        });
    }
    Ok(())
}

/// Writes samples as `re,im` lines.
pub fn write_samples<W: Write>(mut out: W, y: &[Complex64]) -> Result<()> {
    for s in y {
        writeln!(out, "{:.17e},{:.17e}", s.re, s.im)?;
    }
    Ok(())
}

/// Parses `re,im` lines; blank lines and `#` comments are skipped.
pub fn parse_samples(text: &str) -> Result<Vec<Complex64>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|line| {
            let (re, im) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("expected `re,im`, got {line:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
            };
            Ok(Complex64::new(parse(re)?, parse(im)?))
        })
        .collect()
}
