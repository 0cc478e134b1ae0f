//! Soft-edge limit: the 2×2 kernel `f` built from Airy functions, its scaled
//! correlations, and the interpolating joint distribution of the largest
//! scaled points.
//!
//! All entries of `f` reduce to integrals over `r ≥ 0` of products of
//! `Ai`, `Ai'`, the tail `T(z) = ∫_z^∞ Ai` and the exponential convolution
//!
//! `E(z) = ∫_{−∞}^z e^{u(z−t)/2} Ai(t) dt = e^{uz/2}(e^{−u³/24} − ∫_z^∞ e^{−ut/2} Ai(t) dt)`,
//!
//! sampled at `X + r` on a shared rule. The second form of `E` is the
//! continuation used for `u > 0`.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fredholm::{self, Discretization};
use crate::kernel::KernelBlock;
use crate::pfaffian::{qdet, SelfDualKernelMatrix};
use crate::quad::{self, GaussLegendre};
use crate::specfun::{airy_ai, airy_all};

/// Smallest argument accepted by the kernel routines.
pub const MIN_ARGUMENT: f64 = -10.0;
/// Largest `k` for [`AiryKernel::rho_k`].
pub const MAX_POINTS: usize = 6;
/// Largest series order for [`joint_distribution`].
pub const MAX_SERIES_ORDER: usize = 12;
/// Largest number of window intervals.
pub const MAX_INTERVALS: usize = 3;
/// Bound on the last retained series term.
pub const SERIES_TAIL_TOL: f64 = 1e-6;
/// Bound on the change under node doubling.
pub const QUADRATURE_TOL: f64 = 1e-6;

const U_MIN: f64 = -64.0;
const U_MAX: f64 = 16.0;
// exponential-convolution table
const E_LO: f64 = -12.0;
const E_HI: f64 = 44.0;
const E_STEPS_PER_UNIT: f64 = 16.0;
const E_LOCAL_ORDER: usize = 8;
// r-rule shared by all nodes: X + r covers [X, X + R_MAX]
const R_MAX: f64 = 26.0;
const R_PANEL: f64 = 0.5;
const R_ORDER: usize = 12;
// past this Ai and its tail are below 1e-27
const AIRY_NEGLIGIBLE: f64 = 20.0;

/// The kernel parameter `u`, tied to the scaling parameter by `w = −u/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftEdgeParams {
    u: f64,
}

impl SoftEdgeParams {
    /// Requires `−64 ≤ u ≤ 16`; larger `|u|` overflows the exponential factors.
    pub fn new(u: f64) -> Result<Self> {
        if !u.is_finite() || !(U_MIN..=U_MAX).contains(&u) {
            return invalid(format!("u must lie in [{U_MIN}, {U_MAX}], got {u}"));
        }
        Ok(SoftEdgeParams { u })
    }

    pub fn from_w(w: f64) -> Result<Self> {
        Self::new(-4.0 * w)
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn w(&self) -> f64 {
        -self.u / 4.0
    }

    pub fn sgn_u(&self) -> i32 {
        if self.u > 0.0 {
            1
        } else if self.u < 0.0 {
            -1
        } else {
            0
        }
    }
}

/// `(Ai, Ai', T)` with the tail dropped where it is negligible.
fn airy_triplet(z: f64) -> (f64, f64, f64) {
    if z >= AIRY_NEGLIGIBLE {
        let (a, ap) = airy_ai(z);
        return (a, ap, 0.0);
    }
    let v = airy_all(z);
    (v.ai, v.aip, v.tail)
}

fn upper_cut(x: f64, y: f64) -> f64 {
    (16.0 - x.min(y)).max(2.0)
}

/// `K(x, y) = ∫_0^∞ Ai(x+t) Ai(y+t) dt` by quadrature; `x, y ≥ −10`.
pub fn k_soft(x: f64, y: f64) -> f64 {
    quad::composite(0.0, upper_cut(x, y), R_PANEL, 16, |t| airy_ai(x + t).0 * airy_ai(y + t).0)
}

/// `(Ai(x)Ai'(y) − Ai(y)Ai'(x))/(x − y)`, with the limit `Ai'(x)² − x Ai(x)²`
/// on the diagonal. Loses accuracy like `ε/|x − y|` near the diagonal.
pub fn k_soft_divided(x: f64, y: f64) -> f64 {
    let (ax, apx) = airy_ai(x);
    if x == y {
        return apx * apx - x * ax * ax;
    }
    let (ay, apy) = airy_ai(y);
    (ax * apy - ay * apx) / (x - y)
}

/// `E(z)` on a uniform grid, propagated in the stable direction.
#[derive(Debug, Clone)]
struct ExpConvolution {
    u: f64,
    values: Vec<f64>,
}

impl ExpConvolution {
    fn new(u: f64) -> Self {
        let h = 1.0 / E_STEPS_PER_UNIT;
        let n = ((E_HI - E_LO) * E_STEPS_PER_UNIT).round() as usize;
        let mut values = vec![0.0; n + 1];
        let local = |a: f64| Self::local(u, a, a + h);
        let decay = (u * h / 2.0).exp();
        // backward propagation amplifies rounding by e^{−u(z_top − z)/2}; for
        // small |u| the amplified error stays below 1e-11 on the whole grid
        let backward = u >= 0.0 || -u * (-E_LO) / 2.0 - u.powi(3) / 24.0 < 11.0;
        if backward {
            // for z = E_HI the tail integral is below 1e-70
            values[n] = (u * E_HI / 2.0 - u.powi(3) / 24.0).exp();
            if u == 0.0 {
                values[n] = 1.0;
            }
            for i in (0..n).rev() {
                let z = E_LO + i as f64 * h;
                values[i] = (values[i + 1] - local(z)) / decay;
            }
        } else {
            // direct convolution ∫_0^S e^{us/2} Ai(z − s) ds at the bottom
            let span = 80.0 / -u;
            values[0] = quad::composite(0.0, span, 0.25, 16, |s| (u * s / 2.0).exp() * airy_ai(E_LO - s).0);
            for i in 0..n {
                let z = E_LO + i as f64 * h;
                values[i + 1] = decay * values[i] + local(z);
            }
        }
        ExpConvolution { u, values }
    }

    /// `∫_a^b e^{u(b−t)/2} Ai(t) dt`.
    fn local(u: f64, a: f64, b: f64) -> f64 {
        GaussLegendre::cached(E_LOCAL_ORDER).integrate(a, b, |t| (u * (b - t) / 2.0).exp() * airy_ai(t).0)
    }

    fn eval(&self, z: f64) -> f64 {
        let h = 1.0 / E_STEPS_PER_UNIT;
        let top = self.values.len() - 1;
        if z >= E_HI {
            return (self.u * (z - E_HI) / 2.0).exp() * self.values[top];
        }
        let pos = ((z - E_LO) * E_STEPS_PER_UNIT).floor().max(0.0) as usize;
        let i = pos.min(top);
        let z0 = E_LO + i as f64 * h;
        if z < z0 {
            // below the table: step back from its first node
            return (self.values[0] - Self::local(self.u, z, z0)) / (self.u * (z0 - z) / 2.0).exp();
        }
        (self.u * (z - z0) / 2.0).exp() * self.values[i] + Self::local(self.u, z0, z)
    }
}

/// Airy data at a point `X` and along `X + r_k` on the shared rule.
#[derive(Debug, Clone)]
struct NodeSamples {
    x: f64,
    ai: f64,
    tail: f64,
    e: f64,
    r_ai: Vec<f64>,
    r_aip: Vec<f64>,
    r_tail: Vec<f64>,
    r_e: Vec<f64>,
}

/// The kernel `f` at a fixed `u`, with the `E` table and the shared rule.
#[derive(Debug, Clone)]
pub struct AiryKernel {
    params: SoftEdgeParams,
    conv: ExpConvolution,
    r_nodes: Vec<f64>,
    r_weights: Vec<f64>,
}

impl AiryKernel {
    pub fn new(params: SoftEdgeParams) -> Self {
        let rule = GaussLegendre::cached(R_ORDER);
        let panels = (R_MAX / R_PANEL).round() as usize;
        let (mut r_nodes, mut r_weights) = (Vec::new(), Vec::new());
        for k in 0..panels {
            let a = k as f64 * R_PANEL;
            let (xs, ws) = rule.mapped(a, a + R_PANEL);
            r_nodes.extend(xs);
            r_weights.extend(ws);
        }
        AiryKernel { params, conv: ExpConvolution::new(params.u), r_nodes, r_weights }
    }

    pub fn params(&self) -> SoftEdgeParams {
        self.params
    }

    /// `∫_{−∞}^z e^{u(z−t)/2} Ai(t) dt`, continued to `u > 0`.
    pub fn exp_convolution(&self, z: f64) -> f64 {
        self.conv.eval(z)
    }

    fn check(x: f64) -> Result<()> {
        if !x.is_finite() || x < MIN_ARGUMENT {
            return invalid(format!("argument must be ≥ {MIN_ARGUMENT}, got {x}"));
        }
        Ok(())
    }

    fn samples(&self, x: f64) -> NodeSamples {
        let n = self.r_nodes.len();
        let (mut r_ai, mut r_aip, mut r_tail, mut r_e) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for &r in &self.r_nodes {
            let (a, ap, t) = airy_triplet(x + r);
            r_ai.push(a);
            r_aip.push(ap);
            r_tail.push(t);
            r_e.push(self.conv.eval(x + r));
        }
        let (ai, _, tail) = airy_triplet(x);
        NodeSamples { x, ai, tail, e: self.conv.eval(x), r_ai, r_aip, r_tail, r_e }
    }

    fn dot(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.r_weights.iter().enumerate().map(|(k, w)| w * f(k)).sum()
    }

    /// `f22(X, Y)` in the form with the `e^{−u³/24}` factor folded into `E`.
    fn f22(&self, a: &NodeSamples, b: &NodeSamples) -> f64 {
        let u = self.params.u;
        let k = self.dot(|i| a.r_ai[i] * b.r_ai[i]);
        k + 0.5 * (b.ai + 0.5 * u * b.tail) * a.e
    }

    fn block(&self, a: &NodeSamples, b: &NodeSamples) -> KernelBlock {
        let u = self.params.u;
        let d = a.x - b.x;
        let jump = if d == 0.0 { 0.0 } else { (u * d.abs() / 2.0).exp() * d.signum() };
        let i_xy = -jump - self.dot(|i| a.r_ai[i] * b.r_e[i] - b.r_ai[i] * a.r_e[i]);
        let g = self.dot(|i| b.r_ai[i] * a.r_tail[i] - a.r_ai[i] * b.r_tail[i]);
        let mixed = self.dot(|i| a.r_aip[i] * b.r_ai[i] - a.r_ai[i] * b.r_aip[i]);
        let d_xy = 0.25 * (0.25 * u * u * g + 0.5 * u * (a.ai * b.tail - b.ai * a.tail) + mixed);
        KernelBlock { s_xy: self.f22(a, b), i_xy, d_xy, s_yx: self.f22(b, a) }
    }

    /// `(f22(X,Y), f21(X,Y); f12(X,Y), f11(X,Y))`, with `f11(X,Y) = f22(Y,X)`.
    pub fn f_block(&self, x: f64, y: f64) -> Result<KernelBlock> {
        Self::check(x)?;
        Self::check(y)?;
        let a = self.samples(x);
        let b = if x == y { a.clone() } else { self.samples(y) };
        Ok(self.block(&a, &b))
    }

    /// `f22(X, Y)` from the printed double-integral form, by nested
    /// quadrature over `t ∈ (−∞, X]`. Needs `u < 0`.
    pub fn f22_direct(&self, x: f64, y: f64) -> Result<f64> {
        Self::check(x)?;
        Self::check(y)?;
        let u = self.params.u;
        if u >= 0.0 {
            return invalid(format!("the printed form of f22 diverges for u ≥ 0 (u = {u})"));
        }
        let r_top = (16.0 - y).max(2.0);
        // ∂_Y K(t, Y) and ∫_Y^∞ ∂_t K(s, t) ds, both as integrals over r
        let inner = |t: f64| {
            let (mut g, mut h) = (0.0, 0.0);
            let rule = GaussLegendre::cached(16);
            let panels = (r_top / R_PANEL).ceil() as usize;
            let step = r_top / panels as f64;
            for p in 0..panels {
                let (rs, ws) = rule.mapped(p as f64 * step, (p + 1) as f64 * step);
                for (r, w) in rs.iter().zip(&ws) {
                    let (at, apt) = airy_ai(t + r);
                    let (_, apy, ty) = airy_triplet(y + r);
                    g += w * at * apy;
                    h += w * apt * ty;
                }
            }
            (g, h)
        };
        let span = 40.0 / -u;
        let panel = (1.0 / (span - x).max(1.0).sqrt()).min(0.5);
        let rule = GaussLegendre::cached(16);
        let panels = (span / panel).ceil() as usize;
        let step = span / panels as f64;
        let (mut g_int, mut h_int) = (0.0, 0.0);
        for p in 0..panels {
            let (ts, ws) = rule.mapped(x - (p + 1) as f64 * step, x - p as f64 * step);
            for (t, w) in ts.iter().zip(&ws) {
                let damp = (u * (x - t) / 2.0).exp();
                let (g, h) = inner(*t);
                g_int += w * damp * g;
                h_int += w * damp * h;
            }
        }
        Ok(0.5 * k_soft(x, y) - 0.5 * g_int - 0.25 * u * h_int)
    }

    /// `f22(X, Y)` through its rewritten form with an independently computed
    /// `K` and `E`; used to cross-check [`AiryKernel::f_block`].
    pub fn f22_rewritten(&self, x: f64, y: f64) -> Result<f64> {
        Self::check(x)?;
        Self::check(y)?;
        let u = self.params.u;
        let (ay, _, ty) = airy_triplet(y);
        Ok(k_soft(x, y) + 0.5 * (ay + 0.5 * u * ty) * self.conv.eval(x))
    }

    /// Scaled `k`-point correlation `qdet[f(X_i, X_j)]`.
    pub fn rho_k(&self, points: &[f64]) -> Result<f64> {
        let k = points.len();
        if k > MAX_POINTS {
            return Err(Error::SizeGuard(format!("k ≤ {MAX_POINTS}, got {k}")));
        }
        if k == 0 {
            return Ok(1.0);
        }
        for &x in points {
            Self::check(x)?;
        }
        let samples: Vec<NodeSamples> = points.iter().map(|&x| self.samples(x)).collect();
        let blocks = samples.iter().flat_map(|a| samples.iter().map(move |b| (a, b))).map(|(a, b)| self.block(a, b)).collect();
        qdet(&SelfDualKernelMatrix::with_tolerance(k, blocks, 1e-8)?)
    }

    /// The kernel sampled on Gauss–Legendre nodes, `nodes` per interval.
    pub fn discretize(&self, window: &ScaledWindow, nodes: usize) -> Result<Discretization> {
        let rule = GaussLegendre::cached(nodes);
        let (mut xs, mut weights, mut labels) = (Vec::new(), Vec::new(), Vec::new());
        for (r, (lo, hi)) in window.intervals().into_iter().enumerate() {
            let (x, w) = rule.mapped(lo, hi);
            xs.extend(x);
            weights.extend(w);
            labels.extend(std::iter::repeat_n(r, nodes));
        }
        for &x in &xs {
            Self::check(x)?;
        }
        let samples: Vec<NodeSamples> = xs.par_iter().map(|&x| self.samples(x)).collect();
        let n = xs.len();
        let mut blocks: Vec<KernelBlock> =
            (0..n * n).into_par_iter().map(|idx| self.block(&samples[idx / n], &samples[idx % n])).collect();
        // within an interval the jump of sgn(X − Y) is integrated exactly
        // against the Lagrange basis of the nodes (product integration);
        // plain Gauss weights would converge only like nodes^{-2}
        let u = self.params.u;
        for (r, (lo, hi)) in window.intervals().into_iter().enumerate() {
            let omega = sgn_product_weights(lo, hi, &rule, u);
            let base = r * nodes;
            for i in 0..nodes {
                for j in 0..nodes {
                    let (a, b) = (base + i, base + j);
                    let d = xs[a] - xs[b];
                    let jump = if i == j { 0.0 } else { (u * d.abs() / 2.0).exp() * d.signum() };
                    blocks[a * n + b].i_xy += jump - omega[i * nodes + j] / weights[b];
                }
            }
        }
        Ok(Discretization { blocks, weights, labels, intervals: window.thresholds().len() })
    }

    /// `F(s_1, …, s_l; w)` at the given node count, without the doubling check.
    pub fn joint_distribution_at(&self, window: &ScaledWindow, p_max: usize, nodes: usize) -> Result<f64> {
        if p_max > MAX_SERIES_ORDER {
            return Err(Error::SizeGuard(format!("p_max ≤ {MAX_SERIES_ORDER}, got {p_max}")));
        }
        let disc = self.discretize(window, nodes)?;
        fredholm::window_probability(&disc, p_max, SERIES_TAIL_TOL)
    }

    /// `F(s_1, …, s_l; w)`: the probability that the `r`-th largest scaled
    /// point is at most `s_r` for every `r`. Evaluated at `window.nodes` and
    /// twice that per interval; the finer value is returned.
    pub fn joint_distribution(&self, window: &ScaledWindow, p_max: usize) -> Result<f64> {
        let coarse = self.joint_distribution_at(window, p_max, window.nodes)?;
        let fine = self.joint_distribution_at(window, p_max, 2 * window.nodes)?;
        let change = (fine - coarse).abs();
        if change > QUADRATURE_TOL {
            return Err(Error::QuadratureNotConverged { change, tol: QUADRATURE_TOL });
        }
        if !(-QUADRATURE_TOL..=1.0 + QUADRATURE_TOL).contains(&fine) {
            return Err(Error::TruncationFailure(format!("probability {fine} outside [0, 1]")));
        }
        Ok(fine)
    }
}

/// One evaluation of `ρ_k(x) ≤ e^{−Σx} k^{k/2} M^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBound {
    pub rho: f64,
    pub bound: f64,
    pub holds: bool,
}

impl AiryKernel {
    /// Smallest `M` with `ρ_k(x) ≤ e^{−Σx} k^{k/2} M^k` for `k = 1, 2` on the
    /// grid `s0 + i·step`, `i < points`.
    pub fn fit_tail_constant(&self, s0: f64, step: f64, points: usize) -> Result<f64> {
        let grid: Vec<f64> = (0..points).map(|i| s0 + i as f64 * step).collect();
        let mut m = 0.0f64;
        for (a, &x) in grid.iter().enumerate() {
            m = m.max(self.rho_k(&[x])?.max(0.0) * x.exp());
            for &y in &grid[a + 1..] {
                m = m.max((self.rho_k(&[x, y])?.max(0.0) * (x + y).exp() / 2.0).sqrt());
            }
        }
        Ok(m)
    }

    /// Checks the bound at `points` (`k ≤ 4`) for a given constant.
    pub fn tail_bound(&self, points: &[f64], constant: f64) -> Result<TailBound> {
        let k = points.len();
        if k > 4 {
            return Err(Error::SizeGuard(format!("k ≤ 4, got {k}")));
        }
        let rho = self.rho_k(points)?;
        let kf = k as f64;
        let bound = (-points.iter().sum::<f64>()).exp() * kf.powf(kf / 2.0) * constant.powi(k as i32);
        Ok(TailBound { rho, bound, holds: rho <= bound * (1.0 + 1e-12) })
    }
}

pub fn tail_bound_check(points: &[f64], p: SoftEdgeParams, constant: f64) -> Result<TailBound> {
    AiryKernel::new(p).tail_bound(points, constant)
}

/// `ω_ij = ∫_lo^hi sgn(x_i − y) e^{u|x_i − y|/2} ℓ_j(y) dy` for the Lagrange
/// basis `ℓ_j` of the Gauss–Legendre nodes mapped to `[lo, hi]`.
fn sgn_product_weights(lo: f64, hi: f64, rule: &GaussLegendre, u: f64) -> Vec<f64> {
    let n = rule.nodes.len();
    // barycentric weights of the Gauss–Legendre nodes
    let bary: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .enumerate()
        .map(|(j, (t, w))| if j % 2 == 0 { 1.0 } else { -1.0 } * ((1.0 - t * t) * w).sqrt())
        .collect();
    let (xs, _) = rule.mapped(lo, hi);
    let inner = GaussLegendre::cached(n + 24);
    let mut out = vec![0.0; n * n];
    let mut basis = vec![0.0; n];
    for i in 0..n {
        let xi = xs[i];
        for (a, b, sign) in [(lo, xi, 1.0), (xi, hi, -1.0)] {
            let panels = ((u.abs() * (b - a) / 8.0).ceil() as usize).max(1);
            let step = (b - a) / panels as f64;
            for p in 0..panels {
                let (ys, ws) = inner.mapped(a + p as f64 * step, a + (p + 1) as f64 * step);
                for (y, wy) in ys.iter().zip(&ws) {
                    lagrange_basis(*y, &xs, &bary, &mut basis);
                    let g = sign * wy * (u * (xi - y).abs() / 2.0).exp();
                    for (o, l) in out[i * n..(i + 1) * n].iter_mut().zip(&basis) {
                        *o += g * l;
                    }
                }
            }
        }
    }
    out
}

fn lagrange_basis(y: f64, xs: &[f64], bary: &[f64], out: &mut [f64]) {
    if let Some(k) = xs.iter().position(|&x| x == y) {
        out.iter_mut().for_each(|o| *o = 0.0);
        out[k] = 1.0;
        return;
    }
    let mut total = 0.0;
    for ((o, x), b) in out.iter_mut().zip(xs).zip(bary) {
        *o = b / (y - x);
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

/// Thresholds `s_1 > … > s_l` with an upper cutoff `L` for the first interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledWindow {
    thresholds: Vec<f64>,
    pub cutoff: f64,
    /// Gauss–Legendre nodes per interval for the coarse pass.
    pub nodes: usize,
}

impl ScaledWindow {
    /// Cutoff `s_1 + 12`, 32 nodes per interval.
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        let top = *thresholds.first().ok_or(Error::InvalidParameter("empty window".into()))?;
        Self::with_cutoff(thresholds, top + 12.0, 32)
    }

    pub fn with_cutoff(thresholds: Vec<f64>, cutoff: f64, nodes: usize) -> Result<Self> {
        if thresholds.is_empty() || thresholds.len() > MAX_INTERVALS {
            return Err(Error::SizeGuard(format!("1 ≤ l ≤ {MAX_INTERVALS}, got {}", thresholds.len())));
        }
        if thresholds.windows(2).any(|w| w[0] <= w[1]) || thresholds.iter().any(|s| !s.is_finite()) {
            return invalid("thresholds must be finite and strictly decreasing");
        }
        if !(cutoff > thresholds[0] + 5.0) {
            return invalid(format!("cutoff must exceed s_1 + 5, got {cutoff}"));
        }
        if *thresholds.last().unwrap() < MIN_ARGUMENT {
            return invalid(format!("thresholds must be ≥ {MIN_ARGUMENT}"));
        }
        if nodes == 0 {
            return invalid("need at least one node per interval");
        }
        Ok(ScaledWindow { thresholds, cutoff, nodes })
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// `(s_1, L), (s_2, s_1), …`.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        let mut upper = self.cutoff;
        self.thresholds
            .iter()
            .map(|&s| {
                let iv = (s, upper);
                upper = s;
                iv
            })
            .collect()
    }
}

pub fn f_block(x: f64, y: f64, p: SoftEdgeParams) -> Result<KernelBlock> {
    AiryKernel::new(p).f_block(x, y)
}

pub fn rho_k_scaled(points: &[f64], p: SoftEdgeParams) -> Result<f64> {
    AiryKernel::new(p).rho_k(points)
}

pub fn joint_distribution(window: &ScaledWindow, p: SoftEdgeParams, p_max: usize) -> Result<f64> {
    AiryKernel::new(p).joint_distribution(window, p_max)
}
