//! Special functions: integer-order Bessel `J_n`, Airy `Ai`, `Ai'` and the
//! Airy tail integral `∫_x^∞ Ai`.
//!
//! Bessel values come from Miller's backward recurrence normalised by the
//! Neumann identity `J_0² + 2 Σ J_k² = 1`, so a whole order sequence
//! `J_0(x), …, J_n(x)` costs one pass. Airy values in `[-10, 20]` come from a
//! table of Taylor expansions built by integrating `y'' = x y` leftwards from
//! the recessive end, where the asymptotic series is exact to working
//! precision; outside that window the asymptotic expansions are used directly.

use crate::error::{invalid, Result};
use crate::quad;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Controls truncation of every infinite sum in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTolerance {
    pub abs_tol: f64,
    pub max_terms: usize,
}

impl SeriesTolerance {
    pub fn new(abs_tol: f64, max_terms: usize) -> Result<Self> {
        if !(abs_tol > 0.0) {
            return invalid(format!("abs_tol must be positive, got {abs_tol}"));
        }
        if max_terms < 8 {
            return invalid(format!("max_terms must be at least 8, got {max_terms}"));
        }
        Ok(SeriesTolerance { abs_tol, max_terms })
    }

    /// Extra Bessel orders kept beyond the argument: `40 + 10 log10(1/tol)`.
    pub fn bessel_margin(&self) -> usize {
        (40.0 + 10.0 * (1.0 / self.abs_tol).log10().max(0.0)).ceil() as usize
    }
}

impl Default for SeriesTolerance {
    fn default() -> Self {
        SeriesTolerance { abs_tol: 1e-15, max_terms: 100_000 }
    }
}

/// `ln n!`, exact summation below 256 and Stirling beyond.
pub fn ln_factorial(n: u64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; 256];
        for k in 1..256 {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    });
    if (n as usize) < table.len() {
        return table[n as usize];
    }
    let x = n as f64 + 1.0;
    // ln Γ(x) Stirling series
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * x) - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
        - 1.0 / (1680.0 * x.powi(7))
}

// ---------------------------------------------------------------------------
// Bessel
// ---------------------------------------------------------------------------

/// `J_0(x), …, J_nmax(x)` for `x ≥ 0`.
pub fn bessel_j_sequence(x: f64, nmax: usize) -> Vec<f64> {
    assert!(x >= 0.0, "bessel argument must be nonnegative");
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let start = nmax.max(x.ceil() as usize) + 60 + (20.0 * x.cbrt()).ceil() as usize;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-100;
    let mut k = start;
    while k > 0 {
        let next = (2.0 * k as f64 / x) * vals[k] - vals[k + 1];
        vals[k - 1] = next;
        if next.abs() > 1e100 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-100;
            }
        }
        k -= 1;
    }
    // Neumann normalisation, summed from small magnitudes upward.
    let mut sum = 0.0;
    for v in vals[1..=start].iter().rev() {
        sum += v * v;
    }
    let norm = (vals[0] * vals[0] + 2.0 * sum).sqrt();
    for (o, v) in out.iter_mut().zip(vals.iter()) {
        *o = v / norm;
    }
    out
}

/// `J_order(x)` for integer order and `x ≥ 0`.
pub fn bessel_j(order: i64, x: f64) -> f64 {
    let n = order.unsigned_abs() as usize;
    let v = bessel_j_sequence(x, n)[n];
    if order < 0 && n % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `(sign, ln |J_order(x)|)`, usable where `J_order(x)` underflows.
pub fn bessel_j_ln(order: i64, x: f64) -> (f64, f64) {
    let n = order.unsigned_abs();
    let parity = if order < 0 && n % 2 == 1 { -1.0 } else { 1.0 };
    let v = bessel_j(n as i64, x);
    if v.abs() > 1e-250 || x == 0.0 {
        return (parity * v.signum(), v.abs().ln());
    }
    // Deep in the decaying region: power series in log form.
    let z = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200u64 {
        term *= -z / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    let ln = n as f64 * (0.5 * x).ln() - ln_factorial(n) + sum.abs().ln();
    (parity * sum.signum(), ln)
}

/// Bessel values `J_n(x)` for a fixed argument over a range of integer
/// orders, including negative ones. Orders beyond the stored range are zero.
#[derive(Debug, Clone)]
pub struct BesselTable {
    pub x: f64,
    vals: Vec<f64>,
}

impl BesselTable {
    /// Stores orders `0..=max_order`; orders past `x + margin` are treated as 0.
    pub fn new(x: f64, max_order: usize) -> Self {
        BesselTable { x, vals: bessel_j_sequence(x, max_order) }
    }

    /// Table covering every order where `|J_n(x)|` can exceed `tol`.
    pub fn for_tolerance(x: f64, tol: &SeriesTolerance) -> Self {
        let nmax = x.ceil() as usize + tol.bessel_margin() + (10.0 * x.cbrt()).ceil() as usize;
        Self::new(x, nmax)
    }

    pub fn max_order(&self) -> i64 {
        self.vals.len() as i64 - 1
    }

    pub fn get(&self, order: i64) -> f64 {
        let n = order.unsigned_abs() as usize;
        match self.vals.get(n) {
            Some(&v) if order < 0 && n % 2 == 1 => -v,
            Some(&v) => v,
            None => 0.0,
        }
    }
}

// ---------------------------------------------------------------------------
// Airy
// ---------------------------------------------------------------------------

pub const AI0: f64 = 0.355_028_053_887_817_2;
pub const AIP0: f64 = -0.258_819_403_792_806_8;

const TABLE_LO: f64 = -10.0;
const TABLE_HI: f64 = 20.0;
const TABLE_STEPS_PER_UNIT: f64 = 16.0;
const TAYLOR_TERMS: usize = 22;

/// `Ai(x)`, `Ai'(x)` and `∫_x^∞ Ai(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryValues {
    pub ai: f64,
    pub aip: f64,
    pub tail: f64,
}

fn asymptotic_coeffs() -> &'static [(f64, f64)] {
    static C: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    C.get_or_init(|| {
        let mut v = Vec::with_capacity(80);
        let mut u = 1.0;
        v.push((1.0, 1.0));
        for k in 1..80 {
            let kf = k as f64;
            u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / (216.0 * kf * (2.0 * kf - 1.0));
            let vk = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
            v.push((u, vk));
        }
        v
    })
}

/// Sums `Σ (-1)^k c_k ζ^{-k}` over the selected parity, truncated at the
/// smallest term.
fn asym_sum(zeta: f64, use_v: bool, parity: Option<usize>) -> f64 {
    let coeffs = asymptotic_coeffs();
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    for (k, &(u, v)) in coeffs.iter().enumerate() {
        let c = if use_v { v } else { u };
        let term = c / zeta.powi(k as i32);
        let include = match parity {
            None => true,
            Some(p) => k % 2 == p,
        };
        if term.abs() > last && k > 2 {
            break;
        }
        last = term.abs();
        if include {
            match parity {
                None => sum += if k % 2 == 0 { term } else { -term },
                Some(_) => {
                    sum += sign * term;
                    sign = -sign;
                }
            }
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    sum
}

fn airy_asymptotic(x: f64) -> (f64, f64) {
    let sqrt_pi = PI.sqrt();
    if x > 0.0 {
        let zeta = 2.0 / 3.0 * x * x.sqrt();
        let e = (-zeta).exp();
        let q = x.powf(0.25);
        let ai = e / (2.0 * sqrt_pi * q) * asym_sum(zeta, false, None);
        let aip = -q * e / (2.0 * sqrt_pi) * asym_sum(zeta, true, None);
        (ai, aip)
    } else {
        let z = -x;
        let zeta = 2.0 / 3.0 * z * z.sqrt();
        let q = z.powf(0.25);
        let (s, c) = (zeta - PI / 4.0).sin_cos();
        let ai = (c * asym_sum(zeta, false, Some(0)) + s * asym_sum(zeta, false, Some(1))) / (sqrt_pi * q);
        let aip = q / sqrt_pi * (s * asym_sum(zeta, true, Some(0)) - c * asym_sum(zeta, true, Some(1)));
        (ai, aip)
    }
}

/// Taylor coefficients of (Ai, tail) about `x0` given `Ai(x0)`, `Ai'(x0)`.
fn taylor_coeffs(x0: f64, ai: f64, aip: f64) -> [f64; TAYLOR_TERMS] {
    let mut c = [0.0; TAYLOR_TERMS];
    c[0] = ai;
    c[1] = aip;
    for k in 0..TAYLOR_TERMS - 2 {
        let prev = if k == 0 { 0.0 } else { c[k - 1] };
        c[k + 2] = (x0 * c[k] + prev) / ((k + 1) as f64 * (k + 2) as f64);
    }
    c
}

fn taylor_eval(c: &[f64; TAYLOR_TERMS], tail0: f64, h: f64) -> AiryValues {
    let mut ai = 0.0;
    let mut aip = 0.0;
    let mut integral = 0.0; // ∫_0^h Ai(x0 + t) dt
    for k in (0..TAYLOR_TERMS).rev() {
        ai = ai * h + c[k];
        integral = integral * h + c[k] / (k + 1) as f64;
        if k >= 1 {
            aip = aip * h + k as f64 * c[k];
        }
    }
    integral *= h;
    AiryValues { ai, aip, tail: tail0 - integral }
}

struct AiryTable {
    nodes: Vec<(f64, f64, f64)>, // (Ai, Ai', tail) at TABLE_LO + i/16
}

fn airy_table() -> &'static AiryTable {
    static T: OnceLock<AiryTable> = OnceLock::new();
    T.get_or_init(|| {
        let n = ((TABLE_HI - TABLE_LO) * TABLE_STEPS_PER_UNIT).round() as usize;
        let h = 1.0 / TABLE_STEPS_PER_UNIT;
        let mut nodes = vec![(0.0, 0.0, 0.0); n + 1];
        let (ai, aip) = airy_asymptotic(TABLE_HI);
        let tail = quad::composite(TABLE_HI, TABLE_HI + 20.0, 0.5, 20, |t| airy_asymptotic(t).0);
        nodes[n] = (ai, aip, tail);
        for i in (0..n).rev() {
            let x0 = TABLE_LO + (i + 1) as f64 * h;
            let (a, ap, t) = nodes[i + 1];
            let c = taylor_coeffs(x0, a, ap);
            let v = taylor_eval(&c, t, -h);
            nodes[i] = (v.ai, v.aip, v.tail);
        }
        AiryTable { nodes }
    })
}

/// `Ai(x)`, `Ai'(x)` and the tail `∫_x^∞ Ai`.
pub fn airy_all(x: f64) -> AiryValues {
    if x >= TABLE_HI {
        let (ai, aip) = airy_asymptotic(x);
        let tail = if x > 60.0 {
            0.0
        } else {
            quad::composite(x, x + 20.0, 0.5, 20, |t| airy_asymptotic(t).0)
        };
        return AiryValues { ai, aip, tail };
    }
    let table = airy_table();
    if x < TABLE_LO {
        let (ai, aip) = airy_asymptotic(x);
        let t_lo = table.nodes[0].2;
        // ∫_x^{-10} Ai, oscillatory with local period ~ 2π/√|t|
        let panel = (1.0 / (-x).sqrt()).min(0.5);
        let extra = quad::composite(x, TABLE_LO, panel, 16, |t| airy_asymptotic(t).0);
        return AiryValues { ai, aip, tail: t_lo + extra };
    }
    let pos = (x - TABLE_LO) * TABLE_STEPS_PER_UNIT;
    let i = (pos.round() as usize).min(table.nodes.len() - 1);
    let x0 = TABLE_LO + i as f64 / TABLE_STEPS_PER_UNIT;
    let (a, ap, t) = table.nodes[i];
    let c = taylor_coeffs(x0, a, ap);
    taylor_eval(&c, t, x - x0)
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_ai(x: f64) -> (f64, f64) {
    if !(TABLE_LO..TABLE_HI).contains(&x) {
        return airy_asymptotic(x);
    }
    let v = airy_all(x);
    (v.ai, v.aip)
}

/// `∫_s^∞ Ai(t) dt`.
pub fn airy_tail(s: f64) -> f64 {
    airy_all(s).tail
}

/// Leading uniform approximation `J_ν(ν − x (ν/2)^{1/3}) ≈ (2/ν)^{1/3} Ai(x)`;
/// `shift = ±1` adds the `± (2/ν)^{2/3} Ai'(x)` correction for `J_{ν±1}`.
/// Diagnostic only.
pub fn bessel_airy_uniform(nu: f64, x: f64, shift: i32) -> f64 {
    let (ai, aip) = airy_ai(x);
    let c = (2.0 / nu).cbrt();
    c * ai + shift.signum() as f64 * c * c * aip
}
