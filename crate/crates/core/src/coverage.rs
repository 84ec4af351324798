//! Discovery (saturation) curves, coverage estimates and saturation fits.
//!
//! A discovery curve records, for a grid of sample sizes `n`, the mean and
//! standard deviation of the number of distinct labels in uniform random
//! subsamples of `n` labels drawn without replacement. Labels are sorted
//! before sampling, so the curve depends only on the label multiset.

use std::collections::BTreeMap;
use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::Execution;

pub const DEFAULT_REPETITIONS: usize = 200;
pub const DEFAULT_GRID_POINTS: usize = 20;
pub const DEFAULT_MIN_SIZE: usize = 10;
pub const GOOD_TURING: &str = "good_turing";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverageError {
    #[error("no observations")]
    Empty,
    #[error("observation {0} has an empty label")]
    EmptyLabel(usize),
    #[error("no sample sizes given")]
    NoSizes,
    #[error("sample size {size} outside [1, {total}]")]
    SizeOutOfRange { size: usize, total: usize },
    #[error("sample sizes must be strictly increasing")]
    UnsortedSizes,
    #[error("repetitions must be at least 1")]
    ZeroRepetitions,
    #[error("fit needs at least 3 curve points, got {0}")]
    TooFewPoints(usize),
    #[error("curve is malformed: {0}")]
    MalformedCurve(String),
    #[error("value {index} is not finite")]
    NonFiniteValue { index: usize },
    #[error("bin width must be positive and finite, got {0}")]
    BadBinWidth(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaturationCurve {
    pub sample_sizes: Vec<usize>,
    pub mean_distinct: Vec<f64>,
    /// Population standard deviation over the repetitions.
    pub stddev: Vec<f64>,
    pub repetitions: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageEstimate {
    pub estimate: f64,
    pub method: &'static str,
    pub singletons: usize,
    pub total: usize,
}

/// Parameters of `c(n) = K·(1 − exp(−n/τ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationFit {
    pub k_hat: f64,
    pub tau_hat: f64,
    pub rmse: f64,
}

/// Sorted labels mapped to dense category indices.
fn canonical<S: AsRef<str>>(labels: &[S]) -> Result<(Vec<u32>, usize), CoverageError> {
    if labels.is_empty() {
        return Err(CoverageError::Empty);
    }
    if let Some(i) = labels.iter().position(|l| l.as_ref().is_empty()) {
        return Err(CoverageError::EmptyLabel(i));
    }
    let mut sorted: Vec<&str> = labels.iter().map(AsRef::as_ref).collect();
    sorted.sort_unstable();
    let mut cats = Vec::with_capacity(sorted.len());
    let mut k = 0u32;
    for (i, l) in sorted.iter().enumerate() {
        if i > 0 && sorted[i - 1] != *l {
            k += 1;
        }
        cats.push(k);
    }
    Ok((cats, k as usize + 1))
}

fn check_sizes(sizes: &[usize], total: usize) -> Result<(), CoverageError> {
    if sizes.is_empty() {
        return Err(CoverageError::NoSizes);
    }
    if let Some(&size) = sizes.iter().find(|&&n| n == 0 || n > total) {
        return Err(CoverageError::SizeOutOfRange { size, total });
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CoverageError::UnsortedSizes);
    }
    Ok(())
}

/// Distinct count of one subsample. The generator stream is derived from the
/// sample size and repetition index alone, so the result does not depend on
/// scheduling or on the other sizes in the grid.
fn draw(cats: &[u32], categories: usize, n: usize, rep: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 32) | rep as u64);
    let mut seen = vec![false; categories];
    let mut distinct = 0;
    for i in index::sample(&mut rng, cats.len(), n) {
        let c = cats[i] as usize;
        if !seen[c] {
            seen[c] = true;
            distinct += 1;
        }
    }
    distinct
}

pub fn discovery_curve<S: AsRef<str> + Sync>(
    labels: &[S],
    sizes: &[usize],
    repetitions: usize,
    seed: u64,
    execution: Execution,
) -> Result<SaturationCurve, CoverageError> {
    let (cats, categories) = canonical(labels)?;
    check_sizes(sizes, cats.len())?;
    if repetitions == 0 {
        return Err(CoverageError::ZeroRepetitions);
    }
    if repetitions > u32::MAX as usize {
        return Err(CoverageError::MalformedCurve("too many repetitions".into()));
    }
    let mut mean_distinct = Vec::with_capacity(sizes.len());
    let mut stddev = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let counts: Vec<usize> = match execution {
            Execution::Serial => (0..repetitions).map(|r| draw(&cats, categories, n, r, seed)).collect(),
            Execution::Parallel => (0..repetitions)
                .into_par_iter()
                .map(|r| draw(&cats, categories, n, r, seed))
                .collect(),
        };
        let reps = repetitions as f64;
        let mean = counts.iter().sum::<usize>() as f64 / reps;
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / reps;
        mean_distinct.push(mean);
        stddev.push(var.sqrt());
    }
    Ok(SaturationCurve {
        sample_sizes: sizes.to_vec(),
        mean_distinct,
        stddev,
        repetitions,
        seed,
    })
}

/// `1 − f1/N`, with `f1` the number of labels seen exactly once.
pub fn good_turing_coverage<S: AsRef<str>>(labels: &[S]) -> Result<CoverageEstimate, CoverageError> {
    if labels.is_empty() {
        return Err(CoverageError::Empty);
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        if l.as_ref().is_empty() {
            return Err(CoverageError::EmptyLabel(i));
        }
        *counts.entry(l.as_ref()).or_default() += 1;
    }
    let singletons = counts.values().filter(|&&c| c == 1).count();
    let total = labels.len();
    Ok(CoverageEstimate {
        estimate: 1.0 - singletons as f64 / total as f64,
        method: GOOD_TURING,
        singletons,
        total,
    })
}

fn category_sizes<S: AsRef<str>>(labels: &[S]) -> Result<Vec<usize>, CoverageError> {
    let (cats, categories) = canonical(labels)?;
    let mut m = vec![0usize; categories];
    for c in cats {
        m[c as usize] += 1;
    }
    Ok(m)
}

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Expected distinct count of a uniform size-`n` subsample without
/// replacement: `Σ_c 1 − C(N − m_c, n) / C(N, n)`, as an exact fraction.
pub fn expected_distinct_exact<S: AsRef<str>>(labels: &[S], n: usize) -> Result<BigRational, CoverageError> {
    let m = category_sizes(labels)?;
    check_sizes(&[n], labels.len())?;
    let total = labels.len();
    let all = binomial(total, n);
    let mut sum = BigRational::zero();
    for mc in m {
        sum += BigRational::one() - BigRational::new(binomial(total - mc, n), all.clone());
    }
    Ok(sum)
}

/// Floating-point form of [`expected_distinct_exact`], usable for large N.
pub fn expected_distinct<S: AsRef<str>>(labels: &[S], n: usize) -> Result<f64, CoverageError> {
    let m = category_sizes(labels)?;
    check_sizes(&[n], labels.len())?;
    let total = labels.len();
    Ok(m.into_iter()
        .map(|mc| {
            // C(N−m, n)/C(N, n) = Π_{i<n} (N−m−i)/(N−i)
            let mut miss = 1.0;
            for i in 0..n {
                if total - i <= mc {
                    miss = 0.0;
                    break;
                }
                miss *= (total - mc - i) as f64 / (total - i) as f64;
                if miss == 0.0 {
                    break;
                }
            }
            1.0 - miss
        })
        .sum())
}

/// Up to `DEFAULT_GRID_POINTS` log-spaced sizes from 10 to `total`,
/// deduplicated. Small totals get every size from 1.
pub fn default_sizes(total: usize) -> Vec<usize> {
    if total <= DEFAULT_MIN_SIZE {
        return (1..=total).collect();
    }
    let lo = (DEFAULT_MIN_SIZE as f64).ln();
    let hi = (total as f64).ln();
    let steps = (DEFAULT_GRID_POINTS - 1) as f64;
    let mut out: Vec<usize> = (0..DEFAULT_GRID_POINTS)
        .map(|i| ((lo + (hi - lo) * i as f64 / steps).exp().round() as usize).clamp(DEFAULT_MIN_SIZE, total))
        .collect();
    out.dedup();
    *out.last_mut().expect("non-empty") = total;
    out
}

fn sse_for_tau(n: &[f64], y: &[f64], tau: f64) -> (f64, f64) {
    let g: Vec<f64> = n.iter().map(|&x| -(-x / tau).exp_m1()).collect();
    let gg: f64 = g.iter().map(|v| v * v).sum();
    let gy: f64 = g.iter().zip(y).map(|(a, b)| a * b).sum();
    let k = if gg > 0.0 { gy / gg } else { 0.0 };
    let sse = g.iter().zip(y).map(|(a, b)| (k * a - b).powi(2)).sum();
    (k, sse)
}

const FIT_GRID: usize = 400;
const GOLDEN_ITERS: usize = 200;

/// Least-squares fit of `K·(1 − exp(−n/τ))`. For a fixed τ the optimal K is
/// linear, so only τ is searched: a log-spaced grid from `n_min/100` to
/// `100·n_max`, then golden-section refinement in `ln τ` around the best grid
/// point. Ties go to the smaller τ; when the best point is at the grid edge
/// (e.g. a flat curve) it is returned unrefined.
pub fn fit_saturation(curve: &SaturationCurve) -> Result<SaturationFit, CoverageError> {
    let m = curve.sample_sizes.len();
    if m != curve.mean_distinct.len() || m != curve.stddev.len() {
        return Err(CoverageError::MalformedCurve("column lengths differ".into()));
    }
    if m < 3 {
        return Err(CoverageError::TooFewPoints(m));
    }
    if curve.sample_sizes.windows(2).any(|w| w[0] >= w[1]) || curve.sample_sizes[0] == 0 {
        return Err(CoverageError::UnsortedSizes);
    }
    if curve.mean_distinct.iter().any(|v| !v.is_finite()) {
        return Err(CoverageError::MalformedCurve("non-finite mean".into()));
    }
    let n: Vec<f64> = curve.sample_sizes.iter().map(|&x| x as f64).collect();
    let y = &curve.mean_distinct;
    let lo = (n[0] / 100.0).ln();
    let hi = (n[m - 1] * 100.0).ln();
    let at = |i: usize| lo + (hi - lo) * i as f64 / (FIT_GRID - 1) as f64;

    let mut best = (0, f64::INFINITY);
    for i in 0..FIT_GRID {
        let (_, sse) = sse_for_tau(&n, y, at(i).exp());
        if sse < best.1 {
            best = (i, sse);
        }
    }
    let mut log_tau = at(best.0);
    if best.0 > 0 && best.0 < FIT_GRID - 1 {
        let f = |lt: f64| sse_for_tau(&n, y, lt.exp()).1;
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (at(best.0 - 1), at(best.0 + 1));
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..GOLDEN_ITERS {
            if (b - a).abs() < 1e-12 {
                break;
            }
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = f(d);
            }
        }
        let mid = (a + b) / 2.0;
        if f(mid) <= best.1 {
            log_tau = mid;
        }
    }
    let tau = log_tau.exp();
    let (k, sse) = sse_for_tau(&n, y, tau);
    if !(k > 0.0 && k.is_finite()) {
        return Err(CoverageError::MalformedCurve("no positive asymptote fits the curve".into()));
    }
    Ok(SaturationFit {
        k_hat: k,
        tau_hat: tau,
        rmse: (sse / m as f64).sqrt(),
    })
}

/// Label for the bin containing `value`: `bin:<floor(value / width)>`.
pub fn bin_label(value: f64, bin_width: f64) -> String {
    format!("bin:{}", (value / bin_width).floor() as i64)
}

pub fn bin_labels(values: &[f64], bin_width: f64) -> Result<Vec<String>, CoverageError> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(CoverageError::BadBinWidth(bin_width));
    }
    if values.is_empty() {
        return Err(CoverageError::Empty);
    }
    values
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            if v.is_finite() {
                Ok(bin_label(v, bin_width))
            } else {
                Err(CoverageError::NonFiniteValue { index })
            }
        })
        .collect()
}

pub fn parameter_saturation(
    values: &[f64],
    bin_width: f64,
    sizes: &[usize],
    repetitions: usize,
    seed: u64,
    execution: Execution,
) -> Result<SaturationCurve, CoverageError> {
    discovery_curve(&bin_labels(values, bin_width)?, sizes, repetitions, seed, execution)
}

pub fn write_curve_csv<W: Write>(mut w: W, curve: &SaturationCurve) -> std::io::Result<()> {
    writeln!(w, "# seed={} repetitions={}", curve.seed, curve.repetitions)?;
    writeln!(w, "n,mean_distinct,stddev")?;
    for ((n, m), s) in curve.sample_sizes.iter().zip(&curve.mean_distinct).zip(&curve.stddev) {
        writeln!(w, "{n},{m},{s}")?;
    }
    Ok(())
}

pub fn write_fit_csv<W: Write>(mut w: W, fit: &SaturationFit) -> std::io::Result<()> {
    writeln!(w, "k_hat,tau_hat,rmse")?;
    writeln!(w, "{},{},{}", fit.k_hat, fit.tau_hat, fit.rmse)
}
