//! The Poissonized limit: points `λ_l − l` under the measure with parameters
//! `(Q, α)`, whose matrix kernel is built from `J_k(2√Q)`.

use crate::error::{invalid, Error, Result};
use crate::finite_kernel::{FiniteKernel, FiniteModelParams, MAX_POINTS};
use crate::kernel::KernelBlock;
use crate::pfaffian::{qdet, SelfDualKernelMatrix};
use crate::specfun::{BesselTable, SeriesTolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonParams {
    q_param: f64,
    alpha: f64,
}

impl PoissonParams {
    pub fn new(q_param: f64, alpha: f64) -> Result<Self> {
        if !(q_param > 0.0) || !q_param.is_finite() {
            return invalid(format!("Q must be positive, got {q_param}"));
        }
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return invalid(format!("α must be nonnegative, got {alpha}"));
        }
        Ok(PoissonParams { q_param, alpha })
    }

    /// Soft-edge scaling `√α = 1 − 2w/Q^{1/6}`.
    pub fn from_scaling(q_param: f64, w: f64) -> Result<Self> {
        let sa = 1.0 - 2.0 * w / q_param.powf(1.0 / 6.0);
        if sa < 0.0 {
            return invalid(format!("w = {w} too large for Q = {q_param}: √α would be {sa}"));
        }
        Self::new(q_param, sa * sa)
    }

    pub fn q_param(&self) -> f64 {
        self.q_param
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sqrt_alpha(&self) -> f64 {
        self.alpha.sqrt()
    }

    /// Bessel argument `2√Q`.
    pub fn argument(&self) -> f64 {
        2.0 * self.q_param.sqrt()
    }
}

/// Evaluation of `B(z) = Σ_{j≥0} α^{j/2} J_{z−j}(2√Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaSum {
    /// Direct sum for `α < 1`, resummation for `α ≥ 1`.
    Auto,
    /// Direct sum; rejected for `α ≥ 1`, where it cancels catastrophically.
    Direct,
    /// `α^{z/2}(e^{√Q(1/√α − √α)} − Σ_{k>z} α^{−k/2} J_k)`; needs `α > 0`.
    Resummed,
}

/// Bessel values and `B(z)` tabulated for one parameter point.
#[derive(Debug, Clone)]
pub struct BesselKernel {
    pub params: PoissonParams,
    table: BesselTable,
    cut: i64,
    b_vals: Vec<f64>,
}

impl BesselKernel {
    pub fn new(p: PoissonParams, tol: &SeriesTolerance) -> Result<Self> {
        Self::with_mode(p, tol, AlphaSum::Auto)
    }

    pub fn with_mode(p: PoissonParams, tol: &SeriesTolerance, mode: AlphaSum) -> Result<Self> {
        let table = BesselTable::for_tolerance(p.argument(), tol);
        let cut = table.max_order();
        if (2 * cut + 3) as usize > tol.max_terms {
            return Err(Error::TruncationFailure(format!("{} Bessel orders exceed max_terms", 2 * cut + 3)));
        }
        let sa = p.sqrt_alpha();
        let resum = match mode {
            AlphaSum::Auto => p.alpha >= 1.0,
            AlphaSum::Direct if p.alpha >= 1.0 => {
                return invalid("direct α-sum diverges numerically for α ≥ 1; use the resummed form")
            }
            AlphaSum::Direct => false,
            AlphaSum::Resummed if p.alpha == 0.0 => return invalid("resummation needs α > 0"),
            AlphaSum::Resummed => true,
        };
        // b_vals[i] = B(i − cut − 1) for i = 0..=2cut+2
        let len = (2 * cut + 3) as usize;
        let mut b_vals = vec![0.0; len];
        if resum {
            let e = (p.q_param.sqrt() * (1.0 / sa - sa)).exp();
            let mut tail = 0.0;
            for i in (0..len).rev() {
                let z = i as i64 - cut - 1;
                b_vals[i] = sa.powf(z as f64) * (e - tail);
                tail += sa.powf(-(z as f64)) * table.get(z);
            }
        } else {
            let mut acc = 0.0;
            for (i, v) in b_vals.iter_mut().enumerate() {
                let z = i as i64 - cut - 1;
                acc = table.get(z) + sa * acc;
                *v = acc;
            }
        }
        Ok(BesselKernel { params: p, table, cut, b_vals })
    }

    /// Orders beyond `±cut` are below the tolerance.
    pub fn order_cut(&self) -> i64 {
        self.cut
    }

    pub fn j(&self, k: i64) -> f64 {
        self.table.get(k)
    }

    /// `B(z) = Σ_{j≥0} α^{j/2} J_{z−j}(2√Q)`.
    pub fn alpha_sum(&self, z: i64) -> f64 {
        let lo = -self.cut - 1;
        let hi = self.cut + 1;
        if z < lo {
            if self.params.alpha < 1.0 {
                return 0.0;
            }
            return self.params.sqrt_alpha().powf((z - lo) as f64) * self.b_vals[0];
        }
        if z > hi {
            return self.params.sqrt_alpha().powf((z - hi) as f64) * self.b_vals[(hi - lo) as usize];
        }
        self.b_vals[(z - lo) as usize]
    }

    /// `Σ_{n≥1} J_{n+x} J_{n+y}`.
    fn overlap(&self, x: i64, y: i64) -> f64 {
        let top = self.cut - x.min(y);
        (1..=top.max(0)).map(|n| self.j(n + x) * self.j(n + y)).sum()
    }

    /// `Σ_{l≥0} (J_{2l+2+y} − √α J_{2l+1+y})`.
    fn alternating_tail(&self, y: i64) -> f64 {
        let sa = self.params.sqrt_alpha();
        let top = ((self.cut - y) / 2 + 1).max(0);
        (0..=top).map(|l| self.j(2 * l + 2 + y) - sa * self.j(2 * l + 1 + y)).sum()
    }

    /// `S̄(x, y)` in denominator-free form.
    pub fn s_bar(&self, x: i64, y: i64) -> f64 {
        self.overlap(x, y) - self.alpha_sum(x) * self.alternating_tail(y)
    }

    /// `S̄(x, y)` with the divided-difference first term, `x ≠ y`.
    pub fn s_bar_divided(&self, x: i64, y: i64) -> Result<f64> {
        if x == y {
            return invalid("divided form needs x ≠ y");
        }
        let sq = self.params.q_param.sqrt();
        let first = sq / (x - y) as f64 * (self.j(x) * self.j(y + 1) - self.j(y) * self.j(x + 1));
        Ok(first - self.alpha_sum(x) * self.alternating_tail(y))
    }

    /// `Ī(x,y)/√α`, finite at `α = 0`.
    fn i_scaled(&self, x: i64, y: i64) -> f64 {
        let top = (self.cut - x.min(y)).max(0);
        let mut s = 0.0;
        for n in 1..=top {
            s += self.j(n + x) * self.alpha_sum(n + y - 1) - self.j(n + y) * self.alpha_sum(n + x - 1);
        }
        // ε(x,y)/√α = sgn(y−x) α^{(|y−x|−1)/2}
        let d = y - x;
        let eps = if d == 0 {
            0.0
        } else {
            let w = self.params.sqrt_alpha().powi(d.unsigned_abs() as i32 - 1);
            if d > 0 {
                w
            } else {
                -w
            }
        };
        eps - s
    }

    /// `√α D̄(x,y)`, finite at `α = 0`.
    fn d_scaled(&self, x: i64, y: i64) -> f64 {
        let sa = self.params.sqrt_alpha();
        let half = |x: i64, y: i64| {
            let top = ((self.cut - x.min(y)) / 2 + 1).max(1);
            let mut partial = 0.0;
            let mut s = 0.0;
            for l in 1..=top {
                partial += self.j(2 * l + y - 1) - sa * self.j(2 * l + y);
                s += (self.j(2 * l + x) - sa * self.j(2 * l + x + 1)) * partial;
            }
            s
        };
        half(x, y) - half(y, x)
    }

    /// The kernel block as printed; requires `α > 0`.
    pub fn kernel_block(&self, x: i64, y: i64) -> Result<KernelBlock> {
        let sa = self.params.sqrt_alpha();
        if sa == 0.0 {
            return Err(Error::Degenerate("D̄ carries 1/√α; use gauged_block at α = 0".into()));
        }
        Ok(KernelBlock {
            s_xy: self.s_bar(x, y),
            i_xy: sa * self.i_scaled(x, y),
            d_xy: self.d_scaled(x, y) / sa,
            s_yx: self.s_bar(y, x),
        })
    }

    /// `(S̄, Ī/√α; √α D̄, S̄ᵀ)`: the same quaternion determinants as
    /// [`BesselKernel::kernel_block`] and finite at `α = 0`.
    pub fn gauged_block(&self, x: i64, y: i64) -> KernelBlock {
        KernelBlock {
            s_xy: self.s_bar(x, y),
            i_xy: self.i_scaled(x, y),
            d_xy: self.d_scaled(x, y),
            s_yx: self.s_bar(y, x),
        }
    }

    pub fn rho_k(&self, points: &[i64]) -> Result<f64> {
        let k = points.len();
        if k > MAX_POINTS {
            return Err(Error::SizeGuard(format!("k ≤ {MAX_POINTS}, got {k}")));
        }
        if k == 0 {
            return Ok(1.0);
        }
        let blocks = points.iter().flat_map(|&x| points.iter().map(move |&y| (x, y))).map(|(x, y)| self.gauged_block(x, y)).collect();
        qdet(&SelfDualKernelMatrix::with_tolerance(k, blocks, 1e-8)?)
    }
}

pub fn kernel_block_poisson(x: i64, y: i64, p: PoissonParams, tol: &SeriesTolerance) -> Result<KernelBlock> {
    BesselKernel::new(p, tol)?.kernel_block(x, y)
}

pub fn rho_k_poisson(points: &[i64], p: PoissonParams) -> Result<f64> {
    BesselKernel::new(p, &SeriesTolerance::default())?.rho_k(points)
}

/// `Σ_{n≥1} J_{n+x}(2√Q)² − J_x(2√Q) Σ_{m≥1} J_{x+2m}(2√Q)`.
pub fn density_alpha0(x: i64, q_param: f64) -> Result<f64> {
    let p = PoissonParams::new(q_param, 0.0)?;
    let k = BesselKernel::new(p, &SeriesTolerance::default())?;
    let top = (k.order_cut() - x).max(0);
    let squares: f64 = (1..=top).map(|n| k.j(n + x).powi(2)).sum();
    let alternating: f64 = (1..=top / 2 + 1).map(|m| k.j(x + 2 * m)).sum();
    Ok(squares - k.j(x) * alternating)
}

/// Mean of `λ_1 − λ_2 + λ_3 − …`, i.e. of the fixed-point count: `√(αQ)`.
pub fn mean_fixed_points(p: PoissonParams) -> f64 {
    (p.alpha * p.q_param).sqrt()
}

/// Finite kernel at `q = Q/M²` with both arguments shifted by `M`.
#[derive(Debug, Clone)]
pub struct ShiftedFiniteKernel {
    pub m: usize,
    kernel: FiniteKernel,
}

impl ShiftedFiniteKernel {
    /// Covers shifted points `x ≥ −M` up to `x ≤ x_top`.
    pub fn new(m: usize, p: PoissonParams, x_top: i64) -> Result<Self> {
        let q = p.q_param / (m * m) as f64;
        let fp = FiniteModelParams::new(m, q, p.alpha)?;
        let extent = (m as i64 + x_top.max(0)) as usize;
        Ok(ShiftedFiniteKernel { m, kernel: FiniteKernel::with_extent(fp, extent)? })
    }

    pub fn kernel_block(&self, x: i64, y: i64) -> Result<KernelBlock> {
        let s = self.m as i64;
        self.kernel.kernel_block(x + s, y + s)
    }

    pub fn rho_k(&self, points: &[i64]) -> Result<f64> {
        let s = self.m as i64;
        let shifted: Vec<i64> = points.iter().map(|&x| x + s).collect();
        self.kernel.rho_k(&shifted)
    }
}
