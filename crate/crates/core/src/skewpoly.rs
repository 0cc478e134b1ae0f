//! Skew orthogonal polynomials for the weight `q^{x/2}` and the skew product
//!
//! `⟨f, g⟩ = Σ_{y<x} q^{(x+y)/2} α^{(x−y)/2} (f(y)g(x) − g(y)f(x))`.
//!
//! The production path works with normalised quantities: with
//! `c_n(x) = q^{x/2}C_n(x)/√h_n` and `γ = (√α−√q)/(1−√(αq))`,
//!
//! * `ρ_{2n} = q^{x/2}R_{2n}/√h_{2n} = c_{2n} + Σ_{k<n} (c_{2k} − γ c_{2k+1})`,
//! * `ρ_{2n+1} = q^{x/2}R_{2n+1}/√h_{2n+1} = c_{2n+1} − γ c_{2n}`,
//! * `r_n / (√h_{2n} √h_{2n+1}) = √α(1−q)/(1−√(αq))²`, independent of `n`,
//! * `Φ_j/√h_j = Σ_y ε(y,x) ρ_j(y)` with `ε(y,x) = α^{|x−y|/2} sgn(x−y)`.
//!
//! The raw polynomial forms are kept for moderate degrees as oracles.

use crate::error::{invalid, Error, Result};
use crate::meixner::{ln_norm_h, monic_c, orthonormal_row, MeixnerParams, OrthonormalTable};
use crate::pfaffian::determinant;
use crate::specfun::{ln_factorial, SeriesTolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkewParams {
    q: f64,
    alpha: f64,
}

impl SkewParams {
    pub fn new(q: f64, alpha: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return invalid(format!("q must lie in (0,1), got {q}"));
        }
        if !(alpha >= 0.0) || !(alpha * q < 1.0) {
            return invalid(format!("need α ≥ 0 and αq < 1, got α={alpha}, q={q}"));
        }
        Ok(SkewParams { q, alpha })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn meixner(&self) -> MeixnerParams {
        MeixnerParams::new(self.q).expect("validated")
    }

    /// `(√α − √q)/(1 − √(αq))`.
    pub fn gamma(&self) -> f64 {
        let (sa, sq) = (self.alpha.sqrt(), self.q.sqrt());
        (sa - sq) / (1.0 - sa * sq)
    }

    /// Normalised skew norm `r_n/(√h_{2n}√h_{2n+1})`.
    pub fn r_hat(&self) -> f64 {
        let sa = self.alpha.sqrt();
        let d = 1.0 - (self.alpha * self.q).sqrt();
        sa * (1.0 - self.q) / (d * d)
    }

    /// Whether the factorised Gram form is usable (`|√α − √q| > 1e-8`).
    pub fn is_factorizable(&self) -> bool {
        (self.alpha.sqrt() - self.q.sqrt()).abs() > 1e-8
    }
}

/// `ε(y, x) = α^{|x−y|/2} sgn(x − y)`, with `0⁰ = 1`.
pub fn epsilon(y: i64, x: i64, alpha: f64) -> f64 {
    let d = x - y;
    if d == 0 {
        return 0.0;
    }
    let w = alpha.sqrt().powi(d.unsigned_abs() as i32);
    if d > 0 {
        w
    } else {
        -w
    }
}

/// Skew product of two functions on `ℤ_{≥0}`, truncated once the weighted
/// terms stay below `abs_tol/10` well past the bulk.
pub fn skew_product(
    f: impl Fn(i64) -> f64,
    g: impl Fn(i64) -> f64,
    p: SkewParams,
    tol: &SeriesTolerance,
) -> Result<f64> {
    let decay = p.q.sqrt().max((p.alpha * p.q).sqrt());
    let mut fv = Vec::new();
    let mut gv = Vec::new();
    let mut quiet = 0;
    let mut y = 0i64;
    loop {
        let w = p.q.sqrt().powi(y as i32);
        let (a, b) = (f(y), g(y));
        fv.push(a);
        gv.push(b);
        let tail = w.max(decay.powi(y as i32)) * a.abs().max(b.abs()) / (1.0 - decay);
        quiet = if tail < 0.1 * tol.abs_tol { quiet + 1 } else { 0 };
        if quiet >= 10 && y > 20 {
            break;
        }
        y += 1;
        if y as usize >= tol.max_terms {
            return Err(Error::TruncationFailure(format!(
                "skew product tail still {tail:e} after {} terms",
                tol.max_terms
            )));
        }
    }
    // U_g(y) = Σ_{x>y} α^{(x−y)/2} q^{x/2} g(x), built from the top down
    let sa = p.alpha.sqrt();
    let sq = p.q.sqrt();
    let (mut uf, mut ug) = (0.0, 0.0);
    let mut total = 0.0;
    for y in (0..fv.len()).rev() {
        let w = sq.powi(y as i32);
        total += w * (fv[y] * ug - gv[y] * uf);
        uf = sa * (uf + w * fv[y]);
        ug = sa * (ug + w * gv[y]);
    }
    Ok(total)
}

/// `J^{mn} = a_m b_n` for `m < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramFactor {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl GramFactor {
    pub fn j(&self, m: usize, n: usize) -> f64 {
        match m.cmp(&n) {
            std::cmp::Ordering::Less => self.a[m] * self.b[n],
            std::cmp::Ordering::Greater => -self.a[n] * self.b[m],
            std::cmp::Ordering::Equal => 0.0,
        }
    }
}

pub fn gram_factor(n_max: usize, p: SkewParams) -> Result<GramFactor> {
    if !p.is_factorizable() {
        return Err(Error::Degenerate(format!(
            "|√α − √q| ≤ 1e-8 (α={}, q={}); use skew_product instead",
            p.alpha, p.q
        )));
    }
    let (sa, sq) = (p.alpha.sqrt(), p.q.sqrt());
    let d = 1.0 - sa * sq;
    let ratio_a = sq * d / ((1.0 - p.q) * (sa - sq));
    let ratio_b = sq * (sa - sq) / ((1.0 - p.q) * d);
    let mut a = Vec::with_capacity(n_max + 1);
    let mut b = Vec::with_capacity(n_max + 1);
    let (mut an, mut bn) = (sa / (sa - sq), 1.0 / d);
    for n in 0..=n_max {
        if n > 0 {
            an *= n as f64 * ratio_a;
            bn *= n as f64 * ratio_b;
        }
        a.push(an);
        b.push(bn);
    }
    Ok(GramFactor { a, b })
}

/// Monic skew orthogonal polynomial `R_j(x)` as a combination of `C_k`.
pub fn skew_r(j: usize, x: f64, p: SkewParams) -> f64 {
    let m = p.meixner();
    let (q, g) = (p.q, p.gamma());
    let n = j / 2;
    if j % 2 == 1 {
        return monic_c(j, x, m) - g * q.sqrt() / (1.0 - q) * (2 * n + 1) as f64 * monic_c(2 * n, x, m);
    }
    let mut total = monic_c(2 * n, x, m);
    let lf = ln_factorial(2 * n as u64);
    for k in 0..n {
        let d = (n - k) as f64;
        let even = (lf - ln_factorial(2 * k as u64) + d * q.ln() - 2.0 * d * (1.0 - q).ln()).exp();
        let odd = (lf - ln_factorial(2 * k as u64 + 1) + (d - 0.5) * q.ln() - (2.0 * d - 1.0) * (1.0 - q).ln()).exp();
        total += even * monic_c(2 * k, x, m) - g * odd * monic_c(2 * k + 1, x, m);
    }
    total
}

/// `r_n = (2n)!(2n+1)! √α q^{2n+1/2} / ((1−q)^{4n+1}(1−√(αq))²)`.
pub fn skew_norm_r(n: usize, p: SkewParams) -> f64 {
    let q = p.q;
    let d = 1.0 - (p.alpha * q).sqrt();
    let ln = ln_factorial(2 * n as u64) + ln_factorial(2 * n as u64 + 1) + (2 * n) as f64 * q.ln() + 0.5 * q.ln()
        - (4 * n + 1) as f64 * (1.0 - q).ln();
    p.alpha.sqrt() * ln.exp() / (d * d)
}

/// Constant multiple of `R_{2n}` added to the bordered determinant for
/// `R_{2n+1}` that gives the two-term form of [`skew_r`].
pub fn odd_shift_constant(n: usize, p: SkewParams) -> f64 {
    -p.gamma() * p.q.sqrt() / (1.0 - p.q) * (2 * n + 1) as f64
}

/// `R_j(x)` from the bordered determinants over the Gram matrix, with the
/// constant of [`odd_shift_constant`] for odd `j`.
pub fn skew_r_det_oracle(j: usize, x: f64, p: SkewParams) -> Result<f64> {
    skew_r_det_oracle_with_shift(j, x, p, odd_shift_constant(j / 2, p))
}

/// As [`skew_r_det_oracle`] with an arbitrary multiple `shift` of `R_{2n}`
/// added for odd `j`.
pub fn skew_r_det_oracle_with_shift(j: usize, x: f64, p: SkewParams, shift: f64) -> Result<f64> {
    if j > 8 {
        return Err(Error::SizeGuard(format!("determinant oracle limited to j ≤ 8, got {j}")));
    }
    let gram = gram_factor(j + 1, p)?;
    let m = p.meixner();
    let n = j / 2;
    let even = {
        let size = 2 * n + 1;
        let mut full = vec![0.0; size * size];
        let mut minor = vec![0.0; (size - 1) * (size - 1)];
        for r in 0..size {
            let i = 2 * n - r;
            full[r * size] = monic_c(i, x, m);
            for c in 1..size {
                full[r * size + c] = gram.j(i, 2 * n - c);
                if r >= 1 {
                    minor[(r - 1) * (size - 1) + c - 1] = gram.j(i, 2 * n - c);
                }
            }
        }
        let dn = determinant(size - 1, &minor);
        check_nonzero(dn, &minor, "D_n")?;
        determinant(size, &full) / dn
    };
    if j.is_multiple_of(2) {
        return Ok(even);
    }
    let size = 2 * n + 2;
    let cols: Vec<usize> = std::iter::once(2 * n + 1).chain((0..2 * n).rev()).collect();
    let mut full = vec![0.0; size * size];
    let mut minor = vec![0.0; (size - 1) * (size - 1)];
    for r in 0..size {
        let i = 2 * n + 1 - r;
        full[r * size] = gram.j(i, 2 * n + 1);
        full[r * size + 1] = monic_c(i, x, m);
        for (c, &col) in cols.iter().enumerate().skip(1) {
            full[r * size + c + 1] = gram.j(i, col);
        }
        if r >= 1 {
            for (c, &col) in cols.iter().enumerate() {
                minor[(r - 1) * (size - 1) + c] = gram.j(i, col);
            }
        }
    }
    let en = -determinant(size - 1, &minor);
    check_nonzero(en, &minor, "E_n")?;
    Ok(determinant(size, &full) / en + shift * even)
}

fn check_nonzero(det: f64, m: &[f64], name: &str) -> Result<()> {
    if m.is_empty() {
        return Ok(());
    }
    // judged on the row- and column-equilibrated matrix
    let n = (m.len() as f64).sqrt().round() as usize;
    let mut e = m.to_vec();
    for r in e.chunks_mut(n) {
        let s = r.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        r.iter_mut().for_each(|v| *v /= s);
    }
    for c in 0..n {
        let s = (0..n).fold(0.0f64, |a, r| a.max(e[r * n + c].abs()));
        (0..n).for_each(|r| e[r * n + c] /= s);
    }
    let scaled = determinant(n, &e);
    if det == 0.0 || !scaled.is_finite() || scaled.abs() < 1e-12 {
        return Err(Error::Singular(format!("{name} vanishes (equilibrated determinant {scaled:e})")));
    }
    Ok(())
}

/// Coefficients `β_{n,j}` with `C_n = Σ_{j≤n} β_{n,j} R_j`.
pub fn c_in_r_basis(n: usize, p: SkewParams) -> Result<Vec<f64>> {
    let g = p.gamma();
    if g == 0.0 {
        return Err(Error::Degenerate("γ = 0 (α = q): inversion coefficients undefined".into()));
    }
    let q = p.q;
    let even_w = |k: usize| ((1.0 - q).ln() * (2 * k) as f64 - ln_factorial(2 * k as u64) - k as f64 * q.ln()).exp() / g.powi(2 * k as i32);
    let odd_w = |k: usize| {
        ((1.0 - q).ln() * (2 * k + 1) as f64 - ln_factorial(2 * k as u64 + 1) - (k as f64 + 0.5) * q.ln()).exp()
            / g.powi(2 * k as i32 + 1)
    };
    let head = |m: usize| g.powi(m as i32) * (ln_factorial(m as u64) + 0.5 * m as f64 * q.ln() - m as f64 * (1.0 - q).ln()).exp();
    let mut beta = vec![0.0; n + 1];
    let half = n / 2;
    let big = head(n);
    for k in 0..half {
        beta[2 * k] = big * (1.0 - 1.0 / (g * g)) * even_w(k);
        beta[2 * k + 1] = big * odd_w(k);
    }
    if n.is_multiple_of(2) {
        beta[n] = 1.0;
    } else {
        beta[n - 1] = g * q.sqrt() / (1.0 - q) * n as f64;
        beta[n] = big * odd_w(half);
    }
    Ok(beta)
}

fn rho_at(j: usize, c: &[f64], g: f64) -> f64 {
    if j % 2 == 1 {
        return c[j] - g * c[j - 1];
    }
    let n = j / 2;
    c[2 * n] + (0..n).map(|k| c[2 * k] - g * c[2 * k + 1]).sum::<f64>()
}

/// `y` beyond which `c_k(y)`, `k ≤ j`, has left its oscillatory band.
fn band_top(j: usize, q: f64) -> f64 {
    let sq = q.sqrt();
    (j as f64 + 1.0) * (1.0 + sq) * (1.0 + sq) / (1.0 - q) + q
}

/// `Φ_j(x) = Σ_y ε(y,x) q^{y/2} R_j(y)` by direct summation over `y`.
pub fn phi(j: usize, x: i64, p: SkewParams, tol: &SeriesTolerance) -> Result<f64> {
    Ok(phi_normalized(j, x, p, tol)? * (0.5 * ln_norm_h(j, p.meixner())).exp())
}

/// `Φ_j(x)/√h_j` by direct summation over `y`.
pub fn phi_normalized(j: usize, x: i64, p: SkewParams, tol: &SeriesTolerance) -> Result<f64> {
    let m = p.meixner();
    let g = p.gamma();
    let start = band_top(j, p.q).max(x as f64) as i64;
    let mut total = 0.0;
    let mut quiet = 0;
    let mut y = 0i64;
    loop {
        let row = orthonormal_row(y, j + 1, m);
        let term = epsilon(y, x, p.alpha) * rho_at(j, &row, g);
        total += term;
        if y > start {
            quiet = if term.abs() < 0.1 * tol.abs_tol { quiet + 1 } else { 0 };
            if quiet >= 10 {
                return Ok(total);
            }
        }
        y += 1;
        if y as usize > tol.max_terms {
            return Err(Error::TruncationFailure(format!("Φ_{j}({x}) not converged in {} terms", tol.max_terms)));
        }
    }
}

/// `Φ_j(x)/√h_j` from the expansion in the orthonormal functions:
/// `Φ_{2n} = r̂ Σ_{ν>2n} γ^{ν−2n−1} c_ν` and
/// `Φ_{2n+1} = r̂ Σ_{ν≥2n} γ^{ν−2n} (c_{ν+2} − c_ν)`. Requires `|γ| < 1`.
pub fn phi_expansion_normalized(j: usize, x: i64, p: SkewParams, tol: &SeriesTolerance) -> Result<f64> {
    let g = p.gamma();
    if g.abs() >= 1.0 {
        return invalid(format!("expansion needs |γ| < 1, got γ = {g}"));
    }
    let q = p.q;
    let sq = q.sqrt();
    let upper = ((x.max(0) as f64) * (1.0 - q) / ((1.0 - sq) * (1.0 - sq))).ceil() as usize;
    let geometric = if g == 0.0 { 0 } else { ((0.01 * tol.abs_tol).ln() / g.abs().ln()).ceil() as usize };
    let nu_max = (j + geometric).max(upper + 60 + (80.0 / (1.0 / q).ln()).ceil() as usize);
    if nu_max > tol.max_terms {
        return Err(Error::TruncationFailure(format!("expansion needs {nu_max} terms")));
    }
    let c = orthonormal_row(x, nu_max + 2, p.meixner());
    let n = j / 2;
    let mut total = 0.0;
    let mut w = 1.0;
    if j.is_multiple_of(2) {
        for nu in 2 * n + 1..=nu_max {
            total += w * c[nu];
            w *= g;
        }
    } else {
        for nu in 2 * n..=nu_max {
            total += w * (c[nu + 2] - c[nu]);
            w *= g;
        }
    }
    Ok(p.r_hat() * total)
}

pub fn phi_expansion(j: usize, x: i64, p: SkewParams, tol: &SeriesTolerance) -> Result<f64> {
    Ok(phi_expansion_normalized(j, x, p, tol)? * (0.5 * ln_norm_h(j, p.meixner())).exp())
}

/// Normalised `c_ν(x)`, `ρ_j(x)` and `Φ_j(x)/√h_j` on `x = 0..=xmax` for
/// `j = 0..=jmax`. `xmax` must reach past the support of `ρ_j`; see
/// [`SkewTables::auto_xmax`].
#[derive(Debug, Clone)]
pub struct SkewTables {
    pub params: SkewParams,
    c: OrthonormalTable,
    rho: Vec<Vec<f64>>,
    phi: Vec<Vec<f64>>,
}

impl SkewTables {
    /// Lattice extent past which every `ρ_j`, `j ≤ jmax`, is below `tol`.
    pub fn auto_xmax(p: SkewParams, jmax: usize, tol: &SeriesTolerance) -> usize {
        let rate = (1.0 / p.q.max(p.alpha * p.q)).ln() * 0.5;
        let extra = ((1.0 / tol.abs_tol).ln() / rate).ceil();
        (band_top(jmax, p.q) + 30.0 + extra) as usize
    }

    pub fn new(p: SkewParams, jmax: usize, xmax: usize) -> Self {
        let c = OrthonormalTable::new(p.meixner(), jmax + 1, xmax);
        let g = p.gamma();
        let mut rho = vec![vec![0.0; xmax + 1]; jmax + 1];
        for x in 0..=xmax {
            let row = c.row(x);
            let mut prefix = 0.0;
            for n in 0..=jmax / 2 {
                if 2 * n <= jmax {
                    rho[2 * n][x] = row[2 * n] + prefix;
                }
                if 2 * n < jmax {
                    rho[2 * n + 1][x] = row[2 * n + 1] - g * row[2 * n];
                }
                prefix += row[2 * n] - g * row[2 * n + 1];
            }
        }
        let sa = p.alpha.sqrt();
        let phi = rho
            .iter()
            .map(|r| {
                // Φ(x) = L(x) − U(x); L(x+1) = √α(L(x) + ρ(x)), U(x−1) = √α(U(x) + ρ(x))
                let mut lower = vec![0.0; xmax + 1];
                for x in 0..xmax {
                    lower[x + 1] = sa * (lower[x] + r[x]);
                }
                let mut out = vec![0.0; xmax + 1];
                let mut upper = 0.0;
                for x in (0..=xmax).rev() {
                    out[x] = lower[x] - upper;
                    upper = sa * (upper + r[x]);
                }
                out
            })
            .collect();
        SkewTables { params: p, c, rho, phi }
    }

    pub fn jmax(&self) -> usize {
        self.rho.len() - 1
    }

    pub fn xmax(&self) -> usize {
        self.c.xmax()
    }

    /// `c_ν(x)`, zero off the table.
    pub fn c(&self, nu: usize, x: i64) -> f64 {
        self.c.get(nu, x)
    }

    /// `ρ_j(x)`, zero off the table.
    pub fn rho(&self, j: usize, x: i64) -> f64 {
        if x < 0 || x as usize > self.xmax() {
            return 0.0;
        }
        self.rho[j][x as usize]
    }

    /// `Φ_j(x)/√h_j` for `0 ≤ x ≤ xmax`.
    pub fn phi(&self, j: usize, x: i64) -> f64 {
        self.phi[j][x as usize]
    }
}
