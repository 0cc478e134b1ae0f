//! Samplers for random involutions and the symmetric geometric lattice
//! model, with empirical statistics of the scaled rows `λ_1, λ_2, …`.
//!
//! Sampling is split into fixed-size chunks; chunk `c` draws from its own
//! segment of the ChaCha8 keystream of `(seed, stream)`, so results do not
//! depend on the number of worker threads.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel_kernel::PoissonParams;
use crate::combinat::{rsk_shape_weak, rsk_top_rows, Involution, Partition};
use crate::error::{invalid, Result};
use crate::finite_kernel::FiniteModelParams;

/// Samples drawn per chunk.
pub const CHUNK: usize = 64;
/// Largest grid for [`sample_geometric_shape`].
pub const MAX_GRID: usize = 200;

/// A reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        self.chunk_rng(0)
    }

    /// Generator for chunk `c`: keystream offset `c · 2^48` words.
    pub fn chunk_rng(&self, chunk: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng.set_word_pos((chunk as u128) << 48);
        rng
    }
}

/// Uniform involution of `2n + m` symbols with `m` fixed points: a uniform
/// `m`-subset of fixed symbols and a uniform perfect matching of the rest.
pub fn sample_involution<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Involution {
    let size = 2 * n + m;
    let mut symbols: Vec<usize> = (0..size).collect();
    symbols.shuffle(rng);
    let mut mapping = vec![0usize; size];
    for &s in &symbols[..m] {
        mapping[s] = s + 1;
    }
    for pair in symbols[m..].chunks_exact(2) {
        mapping[pair[0]] = pair[1] + 1;
        mapping[pair[1]] = pair[0] + 1;
    }
    Involution::new(mapping).expect("construction yields an involution")
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive finite mean").sample(rng) as usize
}

/// `(n, m)` drawn from independent Poisson laws with means `Q/2` and `√(αQ)`.
pub fn sample_poissonized_counts<R: Rng + ?Sized>(p: PoissonParams, rng: &mut R) -> (usize, usize) {
    let n = poisson(p.q_param() / 2.0, rng);
    let m = poisson((p.alpha() * p.q_param()).sqrt(), rng);
    (n, m)
}

pub fn sample_poissonized<R: Rng + ?Sized>(p: PoissonParams, rng: &mut R) -> Involution {
    let (n, m) = sample_poissonized_counts(p, rng);
    sample_involution(n, m, rng)
}

/// Symmetric weight matrix: geometric entries with ratio `q` off the
/// diagonal and `√(αq)` on it.
pub fn sample_geometric_matrix<R: Rng + ?Sized>(p: FiniteModelParams, rng: &mut R) -> Result<Vec<Vec<u64>>> {
    let m = p.m();
    if m > MAX_GRID {
        return invalid(format!("grid size must be ≤ {MAX_GRID}, got {m}"));
    }
    let off = geometric(p.q())?;
    let diag = geometric((p.alpha() * p.q()).sqrt())?;
    let mut x = vec![vec![0u64; m]; m];
    for i in 0..m {
        x[i][i] = diag.as_ref().map_or(0, |g| g.sample(rng));
        for j in 0..i {
            let v = off.as_ref().map_or(0, |g| g.sample(rng));
            x[i][j] = v;
            x[j][i] = v;
        }
    }
    Ok(x)
}

fn geometric(ratio: f64) -> Result<Option<Geometric>> {
    if ratio == 0.0 {
        return Ok(None);
    }
    match Geometric::new(1.0 - ratio) {
        Ok(g) => Ok(Some(g)),
        Err(e) => invalid(format!("geometric ratio {ratio}: {e}")),
    }
}

/// RSK shape of the generalized permutation with multiplicities `x[i][j]`,
/// pairs taken in lexicographic order.
pub fn shape_of_matrix(x: &[Vec<u64>]) -> Partition {
    let mut word = Vec::new();
    for row in x {
        for (j, &k) in row.iter().enumerate() {
            word.extend(std::iter::repeat_n(j, k as usize));
        }
    }
    rsk_shape_weak(&word)
}

pub fn sample_geometric_shape<R: Rng + ?Sized>(p: FiniteModelParams, rng: &mut R) -> Result<Partition> {
    Ok(shape_of_matrix(&sample_geometric_matrix(p, rng)?))
}

/// Fixed-size scaling: `m = ⌊√(2n) − 2w(2n)^{1/3}⌋`, rows centred at `2√N`
/// and scaled by `N^{1/6}` with `N = 2n + m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec {
    pub n: usize,
    pub w: f64,
    pub m: usize,
}

impl ScalingSpec {
    pub fn new(n: usize, w: f64) -> Result<Self> {
        let two_n = 2.0 * n as f64;
        let m = (two_n.sqrt() - 2.0 * w * two_n.cbrt()).floor();
        if !w.is_finite() || m < 0.0 {
            return invalid(format!("w = {w} gives a negative fixed-point count at n = {n}"));
        }
        Ok(ScalingSpec { n, w, m: m as usize })
    }

    pub fn size(&self) -> usize {
        2 * self.n + self.m
    }

    pub fn lattice(&self) -> Lattice {
        let size = self.size() as f64;
        Lattice { centre: 2.0 * size.sqrt(), scale: size.powf(1.0 / 6.0) }
    }
}

/// Affine map between row lengths and scaled coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub centre: f64,
    pub scale: f64,
}

impl Lattice {
    /// Poissonized centring `2√Q`, scale `Q^{1/6}`.
    pub fn poisson(q_param: f64) -> Self {
        Lattice { centre: 2.0 * q_param.sqrt(), scale: q_param.powf(1.0 / 6.0) }
    }

    pub fn scaled(&self, length: u32) -> f64 {
        (length as f64 - self.centre) / self.scale
    }

    /// Largest integer length at or below the scaled threshold `s`.
    pub fn threshold(&self, s: f64) -> i64 {
        (self.centre + self.scale * s).floor() as i64
    }

    /// Scaled position of the midpoint between `a` and `a + 1`.
    pub fn corrected(&self, a: i64) -> f64 {
        (a as f64 + 0.5 - self.centre) / self.scale
    }
}

/// The top `k_max` rows of each sample, in sample order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSample {
    pub lattice: Lattice,
    pub rows: Vec<Vec<u32>>,
}

fn chunked<F>(samples: usize, rng: RngStream, draw: F) -> Vec<Vec<u32>>
where
    F: Fn(&mut ChaCha8Rng) -> Vec<u32> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<Vec<u32>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.chunk_rng(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            (0..count).map(|_| draw(&mut r)).collect()
        })
        .collect();
    per_chunk.into_iter().flatten().collect()
}

/// Rows of RSK shapes of uniform involutions with fixed `(n, m)`.
pub fn sample_rows(n: usize, m: usize, k_max: usize, samples: usize, rng: RngStream) -> Vec<Vec<u32>> {
    chunked(samples, rng, |r| rsk_top_rows(sample_involution(n, m, r).word(), k_max))
}

/// Rows of RSK shapes of Poissonized involutions.
pub fn sample_poissonized_rows(p: PoissonParams, k_max: usize, samples: usize, rng: RngStream) -> Vec<Vec<u32>> {
    chunked(samples, rng, |r| rsk_top_rows(sample_poissonized(p, r).word(), k_max))
}

pub fn empirical_scaled_cdf(spec: ScalingSpec, k_max: usize, samples: usize, rng: RngStream) -> Result<RowSample> {
    if samples < 100 {
        return invalid(format!("need at least 100 samples, got {samples}"));
    }
    if k_max == 0 {
        return invalid("k_max must be positive");
    }
    Ok(RowSample { lattice: spec.lattice(), rows: sample_rows(spec.n, spec.m, k_max, samples, rng) })
}

impl RowSample {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Sorted scaled values of row `k` (0-based).
    pub fn scaled(&self, k: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.iter().map(|r| self.lattice.scaled(r[k])).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Fraction of samples with row `k` at most the integer length `a`.
    pub fn ecdf_at_length(&self, k: usize, a: i64) -> f64 {
        self.rows.iter().filter(|r| r[k] as i64 <= a).count() as f64 / self.len() as f64
    }

    /// Empirical `Pr(scaled λ_{k+1} ≤ s)`.
    pub fn ecdf(&self, k: usize, s: f64) -> f64 {
        self.ecdf_at_length(k, self.lattice.threshold(s))
    }

    /// Empirical `Pr(scaled λ_j ≤ s_j for all j)`.
    pub fn joint_frequency(&self, thresholds: &[f64]) -> f64 {
        let a: Vec<i64> = thresholds.iter().map(|&s| self.lattice.threshold(s)).collect();
        self.rows.iter().filter(|r| a.iter().enumerate().all(|(j, &t)| r[j] as i64 <= t)).count() as f64 / self.len() as f64
    }

    pub fn mean_scaled(&self, k: usize) -> f64 {
        self.rows.iter().map(|r| self.lattice.scaled(r[k])).sum::<f64>() / self.len() as f64
    }

    /// Kolmogorov–Smirnov distance between row `k` and a continuous CDF,
    /// with the lattice continuity correction: the empirical value at
    /// integer `a` is compared with `cdf` at the midpoint `a + ½`.
    pub fn ks_distance<F>(&self, k: usize, mut cdf: F) -> Result<KsReport>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let lengths: Vec<i64> = self.rows.iter().map(|r| r[k] as i64).collect();
        let lo = *lengths.iter().min().unwrap_or(&0) - 1;
        let hi = *lengths.iter().max().unwrap_or(&0);
        let mut report = KsReport { statistic: 0.0, at: 0.0, points: Vec::new() };
        for a in lo..=hi {
            let s = self.lattice.corrected(a);
            let model = cdf(s)?;
            let empirical = self.ecdf_at_length(k, a);
            let d = (empirical - model).abs();
            if d > report.statistic {
                report.statistic = d;
                report.at = s;
            }
            report.points.push((s, empirical, model));
        }
        Ok(report)
    }
}

/// KS statistic, where it is attained, and every compared point
/// `(s, empirical, model)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    pub at: f64,
    pub points: Vec<(f64, f64, f64)>,
}

/// Fixed-size versus Poissonized `λ_1` at matched means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepoissonizationReport {
    pub q_param: f64,
    pub w: f64,
    pub fixed_n: usize,
    pub fixed_m: usize,
    /// Sup over integer thresholds of the difference of the two ECDFs.
    pub max_discrepancy: f64,
    /// `(s, fixed, poissonized)` on the scaled grid.
    pub grid: Vec<(f64, f64, f64)>,
}

/// Compares `Pr(λ_1 ≤ 2√Q + Q^{1/6}s)` for involutions with
/// `n = ⌊Q/2⌋`, `m = ⌊√Q − 2wQ^{1/3}⌋` against the Poissonized ensemble
/// with `√α = 1 − 2w/Q^{1/6}`.
pub fn depoissonization_compare(q_param: f64, w: f64, samples: usize, rng: RngStream) -> Result<DepoissonizationReport> {
    let p = PoissonParams::from_scaling(q_param, w)?;
    let m = (q_param.sqrt() - 2.0 * w * q_param.cbrt()).floor();
    if m < 0.0 {
        return invalid(format!("w = {w} gives a negative fixed-point count at Q = {q_param}"));
    }
    let (n, m) = ((q_param / 2.0).floor() as usize, m as usize);
    let lattice = Lattice::poisson(q_param);
    let fixed = RowSample { lattice, rows: sample_rows(n, m, 1, samples, rng) };
    let other = RngStream::new(rng.seed, rng.stream.wrapping_add(1));
    let pois = RowSample { lattice, rows: sample_poissonized_rows(p, 1, samples, other) };
    let max_len = fixed.rows.iter().chain(&pois.rows).map(|r| r[0] as i64).max().unwrap_or(0);
    let max_discrepancy = (0..=max_len).map(|a| (fixed.ecdf_at_length(0, a) - pois.ecdf_at_length(0, a)).abs()).fold(0.0, f64::max);
    let grid = (0..=16)
        .map(|i| {
            let s = -5.0 + 0.5 * i as f64;
            (s, fixed.ecdf(0, s), pois.ecdf(0, s))
        })
        .collect();
    Ok(DepoissonizationReport { q_param, w, fixed_n: n, fixed_m: m, max_discrepancy, grid })
}
