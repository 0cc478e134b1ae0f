//! The finite-`M` model: joint law of `h_j = λ_j + M − j`, its matrix kernel
//! and windowed distribution functions.

use crate::combinat::Partition;
use crate::error::{invalid, Error, Result};
use crate::fredholm::{counting_series, Discretization};
use crate::kernel::KernelBlock;
use crate::pfaffian::{pfaffian, qdet, SelfDualKernelMatrix, SkewMatrix};
use crate::skewpoly::{epsilon, SkewParams, SkewTables};
use crate::specfun::{ln_factorial, SeriesTolerance};

/// Largest correlation order assembled as a quaternion determinant.
pub const MAX_POINTS: usize = 6;
/// Largest Fredholm series order for windows.
pub const MAX_SERIES_ORDER: usize = 10;
/// Bound on the last retained series term of a window probability.
pub const WINDOW_TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteModelParams {
    m: usize,
    skew: SkewParams,
}

impl FiniteModelParams {
    pub fn new(m: usize, q: f64, alpha: f64) -> Result<Self> {
        if m == 0 || m % 2 == 1 {
            return invalid(format!("M must be even and positive, got {m}"));
        }
        Ok(FiniteModelParams { m, skew: SkewParams::new(q, alpha)? })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn q(&self) -> f64 {
        self.skew.q()
    }

    pub fn alpha(&self) -> f64 {
        self.skew.alpha()
    }

    pub fn skew(&self) -> SkewParams {
        self.skew
    }

    /// First `h ≥ M` with `q^{h/2} h^M < 1e-16`.
    pub fn h_cut(&self) -> usize {
        let (lq, m) = (self.q().ln(), self.m as f64);
        let mut h = self.m.max(1);
        while 0.5 * h as f64 * lq + m * (h as f64).ln() > (1e-16f64).ln() {
            h += 1;
        }
        h
    }

    /// `ln C_M` without the `α^{−M/4}` factor, which [`pdf_h`] combines with
    /// the alternating sum.
    fn ln_c_m_without_alpha(&self) -> f64 {
        let (q, a, m) = (self.q(), self.alpha(), self.m as f64);
        let pairs = m * (m - 1.0) / 2.0;
        let mut s = m * (1.0 - (a * q).sqrt()).ln() + pairs * (1.0 - q).ln() - 0.5 * pairs * q.ln();
        for j in 1..self.m {
            s -= ln_factorial(j as u64);
        }
        s
    }

    /// `ln C_M(q, α)`, the normalisation of the `h`-coordinate density with
    /// `q^{Σh_j/2} α^{Σ(−1)^{j−1}h_j/2}`. Requires `α > 0`.
    pub fn ln_c_m(&self) -> Result<f64> {
        if self.alpha() == 0.0 {
            return Err(Error::Degenerate("C_M contains α^{−M/4}".into()));
        }
        Ok(self.ln_c_m_without_alpha() - 0.25 * self.m as f64 * self.alpha().ln())
    }
}

/// Thresholds `a_1 > a_2 > … > a_l`, intervals `I_r = (a_r, a_{r−1}]`,
/// `a_0 = ∞`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowSpec {
    thresholds: Vec<i64>,
}

impl WindowSpec {
    pub fn new(thresholds: Vec<i64>) -> Result<Self> {
        if thresholds.is_empty() {
            return invalid("need at least one threshold");
        }
        if thresholds.windows(2).any(|w| w[0] <= w[1]) {
            return invalid(format!("thresholds must strictly decrease: {thresholds:?}"));
        }
        Ok(WindowSpec { thresholds })
    }

    pub fn thresholds(&self) -> &[i64] {
        &self.thresholds
    }

    /// Interval index of `h`, if any.
    pub fn interval_of(&self, h: i64) -> Option<usize> {
        self.thresholds.iter().position(|&a| h > a).filter(|&r| r == 0 || h <= self.thresholds[r - 1])
    }
}

fn alternating(values: impl Iterator<Item = f64>) -> f64 {
    values.enumerate().map(|(j, v)| if j % 2 == 0 { v } else { -v }).sum()
}

/// Probability of the shape `λ` in the finite model.
pub fn pdf_pm(lambda: &Partition, p: FiniteModelParams) -> Result<f64> {
    let m = p.m;
    if lambda.len() > m {
        return invalid(format!("ℓ(λ) = {} exceeds M = {m}", lambda.len()));
    }
    let (q, a) = (p.q(), p.alpha());
    let parts: Vec<f64> = (0..m).map(|j| lambda.part(j) as f64).collect();
    let alt = alternating(parts.iter().copied());
    let mut ln = m as f64 * (1.0 - (a * q).sqrt()).ln()
        + (m * (m - 1) / 2) as f64 * (1.0 - q).ln()
        + 0.5 * parts.iter().sum::<f64>() * q.ln();
    if alt > 0.0 {
        if a == 0.0 {
            return Ok(0.0);
        }
        ln += 0.5 * alt * a.ln();
    }
    for j in 0..m {
        for l in j + 1..m {
            ln += ((parts[j] - parts[l] + (l - j) as f64) / (l - j) as f64).ln();
        }
    }
    Ok(ln.exp())
}

/// Density in `h` coordinates, `C_M q^{Σh/2} α^{Σ(−1)^{j−1}h_j/2} Π(h_j − h_l)`,
/// zero unless `h_1 > … > h_M ≥ 0`.
pub fn pdf_h(h: &[i64], p: FiniteModelParams) -> Result<f64> {
    if h.len() != p.m {
        return invalid(format!("expected {} coordinates, got {}", p.m, h.len()));
    }
    if h.windows(2).any(|w| w[0] <= w[1]) || h[p.m - 1] < 0 {
        return Ok(0.0);
    }
    let hs: Vec<f64> = h.iter().map(|&v| v as f64).collect();
    // α^{Σ(−1)^{j−1}h_j/2} · α^{−M/4} = α^{m(λ)/2}
    let alt = alternating(hs.iter().copied()) - 0.5 * p.m as f64;
    let mut ln = p.ln_c_m_without_alpha() + 0.5 * hs.iter().sum::<f64>() * p.q().ln();
    if alt > 0.0 {
        if p.alpha() == 0.0 {
            return Ok(0.0);
        }
        ln += 0.5 * alt * p.alpha().ln();
    }
    for j in 0..p.m {
        for l in j + 1..p.m {
            ln += (hs[j] - hs[l]).ln();
        }
    }
    Ok(ln.exp())
}

/// Symmetrised density: [`pdf_h`] of the decreasing rearrangement.
pub fn pdf_sym(h: &[i64], p: FiniteModelParams) -> Result<f64> {
    let mut s = h.to_vec();
    s.sort_unstable_by(|a, b| b.cmp(a));
    pdf_h(&s, p)
}

/// `C_M q^{Σh/2} Π_{j>l}(h_j − h_l) Pf[ε(h_j, h_l)]`.
pub fn pdf_sym_pfaffian(h: &[i64], p: FiniteModelParams) -> Result<f64> {
    let m = p.m;
    if h.len() != m {
        return invalid(format!("expected {m} coordinates, got {}", h.len()));
    }
    if h.iter().any(|&v| v < 0) {
        return Ok(0.0);
    }
    let mut data = vec![0.0; m * m];
    let mut vandermonde = 1.0;
    for j in 0..m {
        for l in 0..m {
            data[j * m + l] = epsilon(h[j], h[l], p.alpha());
            if j > l {
                vandermonde *= (h[j] - h[l]) as f64;
            }
        }
    }
    let pf = pfaffian(&SkewMatrix::new(m, data)?)?;
    let weight = (p.ln_c_m()? + 0.5 * h.iter().sum::<i64>() as f64 * p.q().ln()).exp();
    Ok(weight * vandermonde * pf)
}

/// Matrix kernel of the finite model on `x = 0..=xmax`.
#[derive(Debug, Clone)]
pub struct FiniteKernel {
    pub params: FiniteModelParams,
    tables: SkewTables,
}

impl FiniteKernel {
    /// Tables cover `h_cut` and the support of the polynomials.
    pub fn new(p: FiniteModelParams) -> Result<Self> {
        Self::with_extent(p, 0)
    }

    /// As [`FiniteKernel::new`], also covering `0..=xmax`.
    pub fn with_extent(p: FiniteModelParams, xmax: usize) -> Result<Self> {
        if p.alpha() == 0.0 {
            return Err(Error::Degenerate("the skew norms vanish at α = 0".into()));
        }
        let tol = SeriesTolerance::default();
        let extent = xmax.max(p.h_cut()).max(SkewTables::auto_xmax(p.skew, p.m, &tol));
        Ok(FiniteKernel { params: p, tables: SkewTables::new(p.skew, p.m, extent) })
    }

    pub fn xmax(&self) -> usize {
        self.tables.xmax()
    }

    fn check(&self, x: i64) -> Result<()> {
        if x < 0 || x as usize > self.xmax() {
            return invalid(format!("point {x} outside 0..={}", self.xmax()));
        }
        Ok(())
    }

    fn s_raw(&self, x: i64, y: i64) -> f64 {
        let t = &self.tables;
        let s: f64 = (0..self.params.m / 2)
            .map(|j| t.phi(2 * j, x) * t.rho(2 * j + 1, y) - t.phi(2 * j + 1, x) * t.rho(2 * j, y))
            .sum();
        s / self.params.skew.r_hat()
    }

    pub fn kernel_block(&self, x: i64, y: i64) -> Result<KernelBlock> {
        self.check(x)?;
        self.check(y)?;
        let t = &self.tables;
        let rh = self.params.skew.r_hat();
        let (mut i_sum, mut d_sum) = (0.0, 0.0);
        for j in 0..self.params.m / 2 {
            let (e, o) = (2 * j, 2 * j + 1);
            i_sum += t.phi(e, x) * t.phi(o, y) - t.phi(o, x) * t.phi(e, y);
            d_sum += t.rho(e, x) * t.rho(o, y) - t.rho(o, x) * t.rho(e, y);
        }
        Ok(KernelBlock {
            s_xy: self.s_raw(x, y),
            i_xy: -i_sum / rh + epsilon(x, y, self.params.alpha()),
            d_xy: d_sum / rh,
            s_yx: self.s_raw(y, x),
        })
    }

    /// `S(x, y)` from the summed form: a Christoffel–Darboux part plus one
    /// rank-one correction. Requires `α ≠ q`.
    pub fn s_summed(&self, x: i64, y: i64) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let p = self.params.skew;
        let g = p.gamma();
        if g == 0.0 {
            return Err(Error::Degenerate("summed form needs α ≠ q".into()));
        }
        let t = &self.tables;
        let m = self.params.m;
        let cd = if x == y {
            (0..m).map(|n| t.c(n, x) * t.c(n, x)).sum()
        } else {
            let ratio = m as f64 * p.q().sqrt() / (1.0 - p.q());
            ratio * (t.c(m, x) * t.c(m - 1, y) - t.c(m - 1, x) * t.c(m, y)) / (x - y) as f64
        };
        let left = t.phi(m - 2, x) / p.r_hat() - t.c(m - 1, x);
        let right = t.c(m, y) - t.rho(m, y);
        Ok(cd + left * right / g)
    }

    pub fn rho_k(&self, points: &[i64]) -> Result<f64> {
        let k = points.len();
        if k > MAX_POINTS {
            return Err(Error::SizeGuard(format!("k ≤ {MAX_POINTS}, got {k}")));
        }
        if k == 0 {
            return Ok(1.0);
        }
        let mut blocks = Vec::with_capacity(k * k);
        for &x in points {
            for &y in points {
                blocks.push(self.kernel_block(x, y)?);
            }
        }
        qdet(&SelfDualKernelMatrix::with_tolerance(k, blocks, 1e-8)?)
    }

    /// Sampled kernel on the window's intervals, truncated at the table edge.
    pub fn discretize(&self, w: &WindowSpec) -> Result<Discretization> {
        let top = self.xmax() as i64;
        let low = (*w.thresholds.last().unwrap() + 1).max(0);
        let pts: Vec<i64> = (low..=top).filter(|&h| w.interval_of(h).is_some()).collect();
        let n = pts.len();
        let mut blocks = Vec::with_capacity(n * n);
        for &x in &pts {
            for &y in &pts {
                blocks.push(self.kernel_block(x, y)?);
            }
        }
        Ok(Discretization {
            blocks,
            weights: vec![1.0; n],
            labels: pts.iter().map(|&h| w.interval_of(h).unwrap()).collect(),
            intervals: w.thresholds.len(),
        })
    }

    /// `Pr(h_1 ≤ a_1, …, h_l ≤ a_l)`.
    pub fn window_probability(&self, w: &WindowSpec, p_max: usize) -> Result<f64> {
        if p_max > MAX_SERIES_ORDER {
            return Err(Error::SizeGuard(format!("p_max ≤ {MAX_SERIES_ORDER}, got {p_max}")));
        }
        if *w.thresholds.first().unwrap() >= self.xmax() as i64 {
            // every interval lies past the support
            let all_high = w.thresholds.iter().all(|&a| a >= self.xmax() as i64);
            if all_high {
                return Ok(1.0);
            }
        }
        let disc = self.discretize(w)?;
        let series = counting_series(&disc, p_max, w.thresholds.len() - 1)?;
        let last = series.last_term();
        if last > WINDOW_TAIL_TOL {
            return Err(Error::TailNotConverged { last_term: last, tol: WINDOW_TAIL_TOL });
        }
        Ok(series.ordered_window())
    }
}

pub fn kernel_block(x: i64, y: i64, p: FiniteModelParams) -> Result<KernelBlock> {
    FiniteKernel::with_extent(p, x.max(y).max(0) as usize)?.kernel_block(x, y)
}

pub fn rho_k(points: &[i64], p: FiniteModelParams) -> Result<f64> {
    let top = points.iter().copied().max().unwrap_or(0).max(0) as usize;
    FiniteKernel::with_extent(p, top)?.rho_k(points)
}

pub fn window_probability(w: &WindowSpec, p: FiniteModelParams, p_max: usize) -> Result<f64> {
    FiniteKernel::new(p)?.window_probability(w, p_max)
}
