//! Meixner polynomials with `c = 1`.
//!
//! `C_n` is the monic normalisation and `h_n = Σ_x q^x C_n(x)²`. Kernels work
//! with the orthonormal functions `c_n(x) = q^{x/2} C_n(x) / √h_n`, which are
//! bounded by 1 and satisfy `Σ_n c_n(x)² = 1` at integer `x ≥ 0`.

use crate::error::{invalid, Result};
use crate::specfun::{bessel_j_ln, ln_factorial};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeixnerParams {
    q: f64,
}

impl MeixnerParams {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return invalid(format!("q must lie in (0,1), got {q}"));
        }
        Ok(MeixnerParams { q })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Diagonal recurrence coefficient `b_n = (n(1+q)+q)/(1−q)`.
    pub fn diag(&self, n: usize) -> f64 {
        let q = self.q;
        (n as f64 * (1.0 + q) + q) / (1.0 - q)
    }

    /// Off-diagonal orthonormal coefficient `√g_n = n√q/(1−q)`.
    pub fn offdiag(&self, n: usize) -> f64 {
        n as f64 * self.q.sqrt() / (1.0 - self.q)
    }
}

/// `M_n(x; 1, q) = ₂F₁(−n, −x; 1; 1 − 1/q)`.
pub fn meixner(n: usize, x: f64, p: MeixnerParams) -> f64 {
    let z = 1.0 - 1.0 / p.q;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..n {
        let kf = k as f64;
        term *= (kf - n as f64) * (kf - x) / ((kf + 1.0) * (kf + 1.0)) * z;
        sum += term;
    }
    sum
}

/// Monic `C_n(x)` by the three-term recurrence.
pub fn monic_c(n: usize, x: f64, p: MeixnerParams) -> f64 {
    let (s, l) = monic_c_ln(n, x, p);
    s * l.exp()
}

/// `(sign, ln |C_n(x)|)`, free of overflow for large `n`. Past `n = 20` at
/// integer `x ≥ 0` the value comes from [`orthonormal_row`], since the
/// forward recurrence loses relative accuracy where `C_n(x)` is recessive.
pub fn monic_c_ln(n: usize, x: f64, p: MeixnerParams) -> (f64, f64) {
    if n > 20 && x >= 0.0 && x.fract() == 0.0 {
        let c = orthonormal_row(x as i64, n, p)[n];
        if c != 0.0 {
            return (c.signum(), c.abs().ln() + 0.5 * ln_norm_h(n, p) - 0.5 * x * p.q.ln());
        }
    }
    monic_c_ln_forward(n, x, p)
}

fn monic_c_ln_forward(n: usize, x: f64, p: MeixnerParams) -> (f64, f64) {
    let q = p.q;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut ln_scale = 0.0;
    for k in 0..n {
        let g = (k * k) as f64 * q / ((1.0 - q) * (1.0 - q));
        let next = (x - p.diag(k)) * cur - g * prev;
        prev = cur;
        cur = next;
        let mag = cur.abs().max(prev.abs());
        if mag > 1e100 || (mag < 1e-100 && mag > 0.0) {
            cur /= mag;
            prev /= mag;
            ln_scale += mag.ln();
        }
    }
    if cur == 0.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    (cur.signum(), cur.abs().ln() + ln_scale)
}

/// `h_n = (n!)² qⁿ / (1−q)^{2n+1}`.
pub fn norm_h(n: usize, p: MeixnerParams) -> f64 {
    ln_norm_h(n, p).exp()
}

pub fn ln_norm_h(n: usize, p: MeixnerParams) -> f64 {
    let q = p.q;
    2.0 * ln_factorial(n as u64) + n as f64 * q.ln() - (2 * n + 1) as f64 * (1.0 - q).ln()
}

/// Orthonormal `c_n(x)` at real `x` by forward recurrence from
/// `c_0 = √(1−q) q^{x/2}`. Accurate while `n` stays below the upper turning
/// point; use [`orthonormal_row`] at integer points.
pub fn orthonormal_forward(n: usize, x: f64, p: MeixnerParams) -> f64 {
    let (s, l) = monic_c_ln_forward(n, x, p);
    s * (l + 0.5 * x * p.q.ln() - 0.5 * ln_norm_h(n, p)).exp()
}

/// `c_0(x), …, c_nmax(x)` at an integer point, normalised with
/// `Σ_n c_n(x)² = 1`. In `n`, `c_n(x)` oscillates on a band around `n ≈ x`
/// and decays on both sides, so the values above the band come from a
/// backward recurrence and those below from a forward one, matched inside
/// the band. Negative `x` lies outside the lattice and returns zeros.
pub fn orthonormal_row(x: i64, nmax: usize, p: MeixnerParams) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x < 0 {
        return out;
    }
    let q = p.q;
    let xf = x as f64;
    let sq = q.sqrt();
    let excess = (xf * (1.0 - q) - q).max(0.0);
    let upper = excess / ((1.0 - sq) * (1.0 - sq));
    let start = nmax.max(upper.ceil() as usize) + 60 + (80.0 / (1.0 / q).ln()).ceil() as usize;
    let mid = ((excess / (1.0 + q)).round() as usize).min(start - 1);

    // backward from the top; past the band c_n(x) has sign (−1)^{n+x}
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = if (start as i64 + x) % 2 == 0 { 1e-100 } else { -1e-100 };
    for k in (mid + 1..=start).rev() {
        // x c_k = s_{k+1} c_{k+1} + b_k c_k + s_k c_{k−1}
        let next = ((xf - p.diag(k)) * vals[k] - p.offdiag(k + 1) * vals[k + 1]) / p.offdiag(k);
        vals[k - 1] = next;
        if next.abs() > 1e100 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-100;
            }
        }
    }

    // forward from n = 0 up to mid + 1, c_0 > 0
    let mut fwd = vec![0.0f64; mid + 2];
    fwd[0] = 1.0;
    for k in 0..=mid {
        let prev = if k == 0 { 0.0 } else { p.offdiag(k) * fwd[k - 1] };
        let next = ((xf - p.diag(k)) * fwd[k] - prev) / p.offdiag(k + 1);
        fwd[k + 1] = next;
        if next.abs() > 1e100 {
            for v in fwd[..=k + 1].iter_mut() {
                *v *= 1e-100;
            }
        }
    }
    let dot = fwd[mid] * vals[mid] + fwd[mid + 1] * vals[mid + 1];
    let nrm = fwd[mid] * fwd[mid] + fwd[mid + 1] * fwd[mid + 1];
    let scale = dot / nrm;
    for k in 0..mid {
        vals[k] = fwd[k] * scale;
    }

    let mut sum = 0.0;
    for v in vals[..=start].iter().rev() {
        sum += v * v;
    }
    let norm = sum.sqrt();
    for (o, v) in out.iter_mut().zip(vals.iter()) {
        *o = v / norm;
    }
    out
}

/// Orthonormal functions on the lattice `x = 0..=xmax`, orders `0..=nmax`.
#[derive(Debug, Clone)]
pub struct OrthonormalTable {
    pub params: MeixnerParams,
    rows: Vec<Vec<f64>>,
    nmax: usize,
}

impl OrthonormalTable {
    pub fn new(p: MeixnerParams, nmax: usize, xmax: usize) -> Self {
        let rows = (0..=xmax).map(|x| orthonormal_row(x as i64, nmax, p)).collect();
        OrthonormalTable { params: p, rows, nmax }
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    pub fn xmax(&self) -> usize {
        self.rows.len() - 1
    }

    /// `c_n(x)`; zero off the lattice or past the stored range.
    pub fn get(&self, n: usize, x: i64) -> f64 {
        if x < 0 || n > self.nmax {
            return 0.0;
        }
        self.rows.get(x as usize).map_or(0.0, |r| r[n])
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }
}

/// Large-`M` comparator for `C_n(x + M)` with `q = Q/M²`:
/// `n! q^{(n−M−x)/2} (1−q)^{−n} J_{M+x−n}(2√Q)`, as `(sign, ln |·|)`.
pub fn monic_c_shifted_asymptotic_ln(n: usize, x: i64, m_size: usize, q_param: f64) -> Result<(f64, f64)> {
    if !(q_param > 0.0) || m_size == 0 {
        return invalid("need Q > 0 and M ≥ 1");
    }
    let q = q_param / (m_size as f64 * m_size as f64);
    if q >= 1.0 {
        return invalid(format!("Q/M² = {q} must be below 1"));
    }
    let order = m_size as i64 + x - n as i64;
    let (s, lj) = bessel_j_ln(order, 2.0 * q_param.sqrt());
    let ln = ln_factorial(n as u64) + 0.5 * (n as f64 - m_size as f64 - x as f64) * q.ln() - n as f64 * (1.0 - q).ln() + lj;
    Ok((s, ln))
}

pub fn monic_c_shifted_asymptotic(n: usize, x: i64, m_size: usize, q_param: f64) -> Result<f64> {
    let (s, l) = monic_c_shifted_asymptotic_ln(n, x, m_size, q_param)?;
    Ok(s * l.exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(q: f64) -> MeixnerParams {
        MeixnerParams::new(q).unwrap()
    }

    #[test]
    fn low_order_values() {
        let q = 0.37;
        assert_eq!(meixner(0, 4.2, p(q)), 1.0);
        for &x in &[0.0, 1.0, 2.5, 7.0] {
            assert!((meixner(1, x, p(q)) - (1.0 + x * (1.0 - 1.0 / q))).abs() < 1e-13);
        }
        assert!((meixner(2, 3.0, p(0.3)) - meixner(3, 2.0, p(0.3))).abs() < 1e-12);
        assert_eq!(monic_c(0, 5.0, p(0.5)), 1.0);
        assert!((monic_c(1, 3.0, p(0.5)) - 2.0).abs() < 1e-15);
        assert!((norm_h(0, p(0.5)) - 2.0).abs() < 1e-14);
        assert!((norm_h(1, p(0.5)) - 4.0).abs() < 1e-14);
        assert!(MeixnerParams::new(1.0).is_err());
    }

    #[test]
    fn monic_matches_hypergeometric() {
        let pp = p(0.3);
        for n in 0..8 {
            for x in 0..10 {
                let xf = x as f64;
                let fact: f64 = (1..=n).map(|k| k as f64).product();
                let direct = fact * (0.3f64 / (0.3 - 1.0)).powi(n as i32) * meixner(n, xf, pp);
                let rec = monic_c(n, xf, pp);
                assert!((direct - rec).abs() <= 1e-10 * rec.abs().max(1.0), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn leading_coefficient_is_one() {
        let pp = p(0.45);
        for n in 0..=6usize {
            // n-th forward difference of a monic degree-n polynomial is n!
            let mut d = 0.0;
            for k in 0..=n {
                let binom: f64 = (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product();
                let sign = if (n - k) % 2 == 0 { 1.0 } else { -1.0 };
                d += sign * binom * monic_c(n, k as f64, pp);
            }
            let fact: f64 = (1..=n).map(|k| k as f64).product();
            assert!((d - fact).abs() < 1e-8 * fact, "n={n}");
        }
    }

    #[test]
    fn recurrences_hold() {
        for &q in &[0.2, 0.7] {
            let pp = p(q);
            for n in 1..=8usize {
                let nf = n as f64;
                for x in 0..=10 {
                    let xf = x as f64;
                    let c = |k: usize, y: f64| monic_c(k, y, pp);
                    // tolerance relative to the largest term, since the terms cancel
                    let check = |terms: [f64; 4]| {
                        let scale = terms.iter().fold(1.0f64, |a, t| a.max(t.abs()));
                        let resid = terms[0] - terms[1] - terms[2] - terms[3];
                        assert!(resid.abs() <= 1e-10 * scale, "q={q} n={n} x={x}: {resid}");
                    };
                    check([
                        xf * c(n, xf - 1.0),
                        c(n + 1, xf),
                        -q / (q - 1.0) * (2.0 * nf + 1.0) * c(n, xf),
                        nf * nf * q * q / ((q - 1.0) * (q - 1.0)) * c(n - 1, xf),
                    ]);
                    check([
                        xf * c(n, xf),
                        c(n + 1, xf),
                        -(nf * q + nf + q) / (q - 1.0) * c(n, xf),
                        nf * nf * q / ((q - 1.0) * (q - 1.0)) * c(n - 1, xf),
                    ]);
                }
            }
        }
    }

    #[test]
    fn orthogonality_and_completeness() {
        let pp = p(0.3);
        let s: f64 = (0..=200).map(|x| 0.3f64.powi(x) * monic_c(1, x as f64, pp) * monic_c(2, x as f64, pp)).sum();
        assert!(s.abs() < 1e-9);
        for x in 0..=5 {
            for y in 0..=5 {
                // C_n(x) C_n(y) / h_n in log form; h_120 overflows
                let sum: f64 = (0..=120)
                    .map(|n| {
                        let (sx, lx) = monic_c_ln(n, x as f64, pp);
                        let (sy, ly) = monic_c_ln(n, y as f64, pp);
                        sx * sy * (lx + ly - ln_norm_h(n, pp)).exp()
                    })
                    .sum();
                if x == y {
                    let target = 0.3f64.powi(-x);
                    assert!((sum - target).abs() < 1e-3 * target);
                } else {
                    assert!(sum.abs() < 1e-6, "x={x} y={y} {sum}");
                }
            }
        }
    }

    #[test]
    fn backward_row_matches_forward_and_symmetry() {
        for &q in &[0.05, 0.3, 0.8] {
            let pp = p(q);
            for x in 0..12i64 {
                let row = orthonormal_row(x, 15, pp);
                for n in 0..=15 {
                    // c_n(x) = √(1−q) q^{(x+n)/2} (−1)^n M_n(x)
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    let exact = (1.0 - q).sqrt() * q.powf(0.5 * (x as f64 + n as f64)) * sign * meixner(n, x as f64, pp);
                    assert!((row[n] - exact).abs() < 1e-13, "q={q} x={x} n={n}: {} vs {exact}", row[n]);
                }
            }
            for x in [0.0, 1.0, 2.0] {
                assert!((orthonormal_forward(3, x, pp) - orthonormal_row(x as i64, 3, pp)[3]).abs() < 1e-12);
            }
            for x in 0..10i64 {
                let row = orthonormal_row(x, 10, pp);
                for n in 0..10usize {
                    let other = orthonormal_row(n as i64, 10, pp)[x as usize];
                    let sign = if (n as i64 + x) % 2 == 0 { 1.0 } else { -1.0 };
                    assert!((row[n] - sign * other).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn rows_are_orthonormal() {
        let pp = p(0.01);
        let table = OrthonormalTable::new(pp, 60, 400);
        for n in [0usize, 3, 20, 59] {
            for m in [0usize, 3, 20, 59] {
                let s: f64 = (0..=400).map(|x| table.get(n, x) * table.get(m, x)).sum();
                let target = if n == m { 1.0 } else { 0.0 };
                assert!((s - target).abs() < 1e-12, "n={n} m={m} {s}");
            }
        }
    }

    #[test]
    fn bessel_limit_at_fixed_order() {
        // the comparator is asymptotic when the Bessel order M + x − n stays bounded
        for &(x, q_param) in &[(0i64, 1.0), (1, 4.0)] {
            for k in [-3i64, 0, 3, 5] {
                let mut last = f64::INFINITY;
                for &m in &[100usize, 200, 400, 800] {
                    let pp = p(q_param / (m * m) as f64);
                    let n = (m as i64 + x - k) as usize;
                    let (s1, l1) = monic_c_ln(n, (m as i64 + x) as f64, pp);
                    let (s2, l2) = monic_c_shifted_asymptotic_ln(n, x, m, q_param).unwrap();
                    assert_eq!(s1, s2);
                    let err = (l1 - l2).abs();
                    assert!(err < last && err < 12.0 / m as f64, "x={x} k={k} M={m}: {err}");
                    last = err;
                }
            }
        }
        // far from that regime the two sides separate like e^M
        let pp = p(1.0 / 1e4);
        let (_, l1) = monic_c_ln(0, 100.0, pp);
        let (_, l2) = monic_c_shifted_asymptotic_ln(0, 0, 100, 1.0).unwrap();
        assert!(l2 - l1 > 50.0);
        // J-index bookkeeping: n = M + x uses J_0
        let (_, l) = monic_c_shifted_asymptotic_ln(101, 1, 100, 1.0).unwrap();
        let q = 1.0 / 1e4f64;
        let expected = ln_factorial(101) - 101.0 * (1.0 - q).ln() + crate::specfun::bessel_j(0, 2.0).abs().ln();
        assert!((l - expected).abs() < 1e-10);
    }

    #[test]
    fn orthonormal_rows_approach_bessel() {
        // c_n(M + x) → J_{M+x−n}(2√Q) with an O(1/M) error
        for &q_param in &[1.0f64, 9.0] {
            let mut last = f64::INFINITY;
            for &m in &[300usize, 1200, 4800] {
                let pp = p(q_param / (m * m) as f64);
                let point = m as i64 - 5;
                let row = orthonormal_row(point, m + 40, pp);
                let err = (m - 20..m + 20)
                    .map(|n| (row[n] - crate::specfun::bessel_j(point - n as i64, 2.0 * q_param.sqrt())).abs())
                    .fold(0.0, f64::max);
                assert!(err < 0.3 * last && err * (m as f64) < 12.0, "Q={q_param} M={m}: {err}");
                last = err;
            }
        }
    }
}
