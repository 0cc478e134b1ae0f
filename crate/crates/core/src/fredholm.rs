//! Truncated Fredholm–Pfaffian series for counting probabilities.
//!
//! For a self-dual kernel `f` sampled on nodes `x_i` with weights `w_i`, each
//! node labelled by the interval it belongs to, the generating function
//!
//! `G(ξ) = 1 + Σ_p (−1)^p/p! Σ_{x_1..x_p} Π ξ(x_i) qdet[f(x_i,x_j)]`
//!
//! has homogeneous parts `G_p = [t^p] exp(−½ Σ_k t^k Tr((KΞ)^k)/k)` with
//! `K = [f(x_i,x_j) w_j]`. Writing `ξ_r = 1 − z_r`, the coefficient of
//! `Π z_r^{n_r}` in `G` is the probability of exactly `n_r` points in
//! interval `r`. Everything is tracked as exact polynomials in `z`, truncated
//! at the total degree the caller needs; no numerical differentiation.

use crate::error::{invalid, Error, Result};
use crate::kernel::KernelBlock;

/// Monomials in `l` variables up to total degree `d`, with a product table.
#[derive(Debug, Clone)]
struct MonomialBasis {
    exps: Vec<Vec<u8>>,
    product: Vec<Vec<Option<usize>>>,
    raise: Vec<Vec<Option<usize>>>,
}

impl MonomialBasis {
    fn new(l: usize, d: usize) -> Self {
        let mut exps = vec![vec![0u8; l]];
        let mut frontier = exps.clone();
        for _ in 0..d {
            let mut next = Vec::new();
            for e in &frontier {
                for r in 0..l {
                    let mut f = e.clone();
                    f[r] += 1;
                    if !next.contains(&f) {
                        next.push(f);
                    }
                }
            }
            exps.extend(next.iter().cloned());
            frontier = next;
        }
        let find = |e: &Vec<u8>| exps.iter().position(|x| x == e);
        let product = exps
            .iter()
            .map(|a| {
                exps.iter()
                    .map(|b| {
                        let s: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                        find(&s)
                    })
                    .collect()
            })
            .collect();
        let raise = exps
            .iter()
            .map(|a| {
                (0..l)
                    .map(|r| {
                        let mut s = a.clone();
                        s[r] += 1;
                        find(&s)
                    })
                    .collect()
            })
            .collect();
        MonomialBasis { exps, product, raise }
    }

    fn len(&self) -> usize {
        self.exps.len()
    }

    fn mul(&self, a: &[f64], b: &[f64], out: &mut [f64]) {
        for (i, &x) in a.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if let Some(k) = self.product[i][j] {
                    out[k] += x * y;
                }
            }
        }
    }
}

/// Kernel sampled on labelled quadrature nodes.
#[derive(Debug, Clone)]
pub struct Discretization {
    /// `n × n` blocks `f(x_i, x_j)`, row-major in `(i, j)`.
    pub blocks: Vec<KernelBlock>,
    pub weights: Vec<f64>,
    /// Interval index of each node, `0..intervals`.
    pub labels: Vec<usize>,
    pub intervals: usize,
}

impl Discretization {
    pub fn nodes(&self) -> usize {
        self.weights.len()
    }

    fn matrix(&self) -> Vec<f64> {
        let n = self.nodes();
        let m = 2 * n;
        let mut k = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                let b = self.blocks[i * n + j];
                let w = self.weights[j];
                k[2 * i * m + 2 * j] = b.s_xy * w;
                k[2 * i * m + 2 * j + 1] = b.i_xy * w;
                k[(2 * i + 1) * m + 2 * j] = b.d_xy * w;
                k[(2 * i + 1) * m + 2 * j + 1] = b.s_yx * w;
            }
        }
        k
    }
}

/// Counting probabilities `E(n_1, …, n_l)` for all `|n| ≤ max_count`, and
/// the size of the last retained series term.
#[derive(Debug, Clone)]
pub struct CountingSeries {
    pub counts: Vec<(Vec<u8>, f64)>,
    /// `max |G_p|` over the retained coefficients, per order `p = 0..=p_max`.
    pub term_sizes: Vec<f64>,
}

impl CountingSeries {
    pub fn count(&self, n: &[u8]) -> f64 {
        self.counts.iter().find(|(e, _)| e.as_slice() == n).map_or(0.0, |c| c.1)
    }

    pub fn last_term(&self) -> f64 {
        *self.term_sizes.last().unwrap_or(&0.0)
    }

    /// `Pr(at most r−1 points in I_1 ∪ … ∪ I_r for every r)`, the sum of
    /// `E(n)` over `n` with `n_1 + … + n_r ≤ r − 1`.
    pub fn ordered_window(&self) -> f64 {
        self.counts
            .iter()
            .filter(|(e, _)| {
                let mut s = 0usize;
                e.iter().enumerate().all(|(r, &n)| {
                    s += n as usize;
                    s <= r
                })
            })
            .map(|c| c.1)
            .sum()
    }
}

fn gemm(n: usize, a: &[f64], b: &[f64], c: &mut [f64]) {
    // SAFETY: all three slices hold n×n row-major matrices
    unsafe {
        matrixmultiply::dgemm(
            n, n, n, 1.0,
            a.as_ptr(), n as isize, 1,
            b.as_ptr(), n as isize, 1,
            0.0,
            c.as_mut_ptr(), n as isize, 1,
        );
    }
}

/// Expands the generating function to order `p_max` in the series and to
/// total degree `max_count` in `z`.
pub fn counting_series(disc: &Discretization, p_max: usize, max_count: usize) -> Result<CountingSeries> {
    let n = disc.nodes();
    if disc.blocks.len() != n * n || disc.labels.len() != n {
        return invalid("discretisation sizes disagree");
    }
    if disc.labels.iter().any(|&r| r >= disc.intervals) {
        return invalid("node label out of range");
    }
    let basis = MonomialBasis::new(disc.intervals, max_count);
    let nm = basis.len();
    let m = 2 * n;
    let k = disc.matrix();
    let col_label: Vec<usize> = (0..m).map(|c| disc.labels[c / 2]).collect();

    // T_k = (K(1 − Z))^k as matrix coefficients of each z-monomial
    let mut power: Vec<Option<Vec<f64>>> = vec![None; nm];
    power[0] = Some(k.clone());
    let mut traces = vec![vec![0.0; nm]; p_max + 1];
    let mut scratch = vec![0.0; m * m];
    for order in 1..=p_max {
        if order > 1 {
            let mut next: Vec<Option<Vec<f64>>> = vec![None; nm];
            for (idx, coeff) in power.iter().enumerate() {
                let Some(t) = coeff else { continue };
                gemm(m, t, &k, &mut scratch);
                add_into(&mut next[idx], &scratch, None, &col_label, 1.0);
                for r in 0..disc.intervals {
                    if let Some(up) = basis.raise[idx][r] {
                        add_into(&mut next[up], &scratch, Some(r), &col_label, -1.0);
                    }
                }
            }
            power = next;
        } else {
            // T_1 = K − Σ_r K P_r z_r
            for r in 0..disc.intervals {
                if let Some(up) = basis.raise[0][r] {
                    add_into(&mut power[up], &k, Some(r), &col_label, -1.0);
                }
            }
        }
        for (idx, coeff) in power.iter().enumerate() {
            if let Some(t) = coeff {
                traces[order][idx] = (0..m).map(|i| t[i * m + i]).sum();
            }
        }
    }

    // log G = −½ Σ_k t^k Tr(T_k)/k;  G_p = (1/p) Σ_{k=1}^p k L_k G_{p−k}
    let mut g = vec![vec![0.0; nm]; p_max + 1];
    g[0][0] = 1.0;
    for p in 1..=p_max {
        let mut acc = vec![0.0; nm];
        for kk in 1..=p {
            let lk: Vec<f64> = traces[kk].iter().map(|v| -0.5 * v).collect();
            let mut prod = vec![0.0; nm];
            basis.mul(&lk, &g[p - kk], &mut prod);
            for (a, v) in acc.iter_mut().zip(prod) {
                *a += v;
            }
        }
        g[p] = acc.into_iter().map(|v| v / p as f64).collect();
    }
    let term_sizes = g.iter().map(|c| c.iter().fold(0.0f64, |a, v| a.max(v.abs()))).collect();
    let counts = basis
        .exps
        .iter()
        .enumerate()
        .map(|(i, e)| (e.clone(), g.iter().map(|c| c[i]).sum()))
        .collect();
    Ok(CountingSeries { counts, term_sizes })
}

fn add_into(target: &mut Option<Vec<f64>>, src: &[f64], column: Option<usize>, col_label: &[usize], sign: f64) {
    let m = col_label.len();
    let t = target.get_or_insert_with(|| vec![0.0; m * m]);
    for i in 0..m {
        let row = &src[i * m..(i + 1) * m];
        let out = &mut t[i * m..(i + 1) * m];
        for c in 0..m {
            if column.is_none_or(|r| col_label[c] == r) {
                out[c] += sign * row[c];
            }
        }
    }
}

/// Ordered-window probability with the tail check `|G_{p_max}| < tail_tol`.
pub fn window_probability(disc: &Discretization, p_max: usize, tail_tol: f64) -> Result<f64> {
    let series = counting_series(disc, p_max, disc.intervals.saturating_sub(1))?;
    let last = series.last_term();
    if last > tail_tol {
        return Err(Error::TailNotConverged { last_term: last, tol: tail_tol });
    }
    Ok(series.ordered_window())
}
