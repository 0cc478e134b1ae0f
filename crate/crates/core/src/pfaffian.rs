//! Pfaffians and quaternion determinants.
//!
//! `qdet A = Pf(A Z⁻¹)` with `Z⁻¹ = 1 ⊗ [[0, 1], [−1, 0]]`, valid for self-dual
//! `A`. The Pfaffian uses Parlett–Reid elimination with pivoting.

use crate::error::{Error, Result};
use crate::kernel::KernelBlock;

/// Dense row-major skew-symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SkewMatrix {
    /// Accepts antisymmetry violations up to `1e-12 · max|A|` and
    /// antisymmetrises; larger violations are rejected.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidParameter(format!("expected {} entries, got {}", n * n, data.len())));
        }
        let scale = data.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut data = data;
        for i in 0..n {
            for j in i..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a + b).abs() > 1e-12 * scale {
                    return Err(Error::InvalidParameter(format!("not skew-symmetric at ({i},{j}): {a} vs {b}")));
                }
                let v = 0.5 * (a - b);
                data[i * n + j] = v;
                data[j * n + i] = -v;
            }
        }
        Ok(SkewMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

pub fn pfaffian(a: &SkewMatrix) -> Result<f64> {
    pfaffian_in_place(a.n, &mut a.data.clone())
}

/// Pfaffian of a row-major skew-symmetric `n × n` buffer, destroyed on exit.
pub fn pfaffian_in_place(n: usize, a: &mut [f64]) -> Result<f64> {
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let mut pf = 1.0;
    let mut k = 0;
    while k < n {
        let (mut piv, mut best) = (k + 1, a[k * n + k + 1].abs());
        for i in k + 2..n {
            if a[k * n + i].abs() > best {
                best = a[k * n + i].abs();
                piv = i;
            }
        }
        if best == 0.0 {
            return Ok(0.0);
        }
        if piv != k + 1 {
            swap_index(n, a, k + 1, piv);
            pf = -pf;
        }
        let head = a[k * n + k + 1];
        pf *= head;
        let k1 = k + 1;
        for i in k + 2..n {
            let ti = a[k * n + i] / head;
            for j in k + 2..n {
                let tj = a[k * n + j] / head;
                a[i * n + j] += -ti * a[k1 * n + j] + tj * a[k1 * n + i];
            }
        }
        k += 2;
    }
    Ok(pf)
}

fn swap_index(n: usize, a: &mut [f64], p: usize, r: usize) {
    for j in 0..n {
        a.swap(p * n + j, r * n + j);
    }
    for i in 0..n {
        a.swap(i * n + p, i * n + r);
    }
}

/// Determinant by LU with partial pivoting.
pub fn determinant(n: usize, data: &[f64]) -> f64 {
    let mut a = data.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i * n + c].abs().total_cmp(&a[j * n + c].abs())).unwrap();
        if a[p * n + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..n {
                a.swap(p * n + j, c * n + j);
            }
            det = -det;
        }
        let d = a[c * n + c];
        det *= d;
        for i in c + 1..n {
            let f = a[i * n + c] / d;
            if f != 0.0 {
                for j in c + 1..n {
                    a[i * n + j] -= f * a[c * n + j];
                }
            }
        }
    }
    det
}

/// `k × k` array of `2 × 2` kernel blocks `f(x_i, x_j)` with the self-dual
/// property `S(x_i,x_j)` shared by blocks `(i,j)` and `(j,i)`, `I` and `D`
/// antisymmetric.
#[derive(Debug, Clone)]
pub struct SelfDualKernelMatrix {
    k: usize,
    blocks: Vec<KernelBlock>,
}

impl SelfDualKernelMatrix {
    /// Symmetrises small violations (truncated series give ~1e-8 relative)
    /// and rejects anything beyond `1e-5` relative to the entry scale.
    pub fn new(k: usize, blocks: Vec<KernelBlock>) -> Result<Self> {
        Self::with_tolerance(k, blocks, 1e-5)
    }

    pub fn with_tolerance(k: usize, mut blocks: Vec<KernelBlock>, hard: f64) -> Result<Self> {
        if blocks.len() != k * k {
            return Err(Error::InvalidParameter(format!("expected {} blocks, got {}", k * k, blocks.len())));
        }
        let scale = blocks
            .iter()
            .flat_map(|b| b.as_array().into_iter().flatten())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for i in 0..k {
            for j in i..k {
                let (a, b) = (blocks[i * k + j], blocks[j * k + i]);
                let dev = [
                    a.s_xy - b.s_yx,
                    a.s_yx - b.s_xy,
                    a.i_xy + b.i_xy,
                    a.d_xy + b.d_xy,
                ]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
                worst = worst.max(dev / scale);
            }
        }
        if worst > hard {
            return Err(Error::SelfDualityViolation(worst));
        }
        for i in 0..k {
            for j in i..k {
                let (a, b) = (blocks[i * k + j], blocks[j * k + i]);
                let s = 0.5 * (a.s_xy + b.s_yx);
                let s_rev = 0.5 * (a.s_yx + b.s_xy);
                let iv = 0.5 * (a.i_xy - b.i_xy);
                let dv = 0.5 * (a.d_xy - b.d_xy);
                blocks[i * k + j] = KernelBlock { s_xy: s, i_xy: iv, d_xy: dv, s_yx: s_rev };
                blocks[j * k + i] = KernelBlock { s_xy: s_rev, i_xy: -iv, d_xy: -dv, s_yx: s };
            }
        }
        Ok(SelfDualKernelMatrix { k, blocks })
    }

    pub fn size(&self) -> usize {
        self.k
    }

    pub fn block(&self, i: usize, j: usize) -> KernelBlock {
        self.blocks[i * self.k + j]
    }

    /// The `2k × 2k` matrix `A Z⁻¹`, skew-symmetric for self-dual `A`.
    pub fn skew_assembly(&self) -> Vec<f64> {
        let n = 2 * self.k;
        let mut out = vec![0.0; n * n];
        for i in 0..self.k {
            for j in 0..self.k {
                let b = self.block(i, j);
                out[2 * i * n + 2 * j] = -b.i_xy;
                out[2 * i * n + 2 * j + 1] = b.s_xy;
                out[(2 * i + 1) * n + 2 * j] = -b.s_yx;
                out[(2 * i + 1) * n + 2 * j + 1] = b.d_xy;
            }
        }
        out
    }
}

/// `qdet A = Pf(A Z⁻¹)`.
pub fn qdet(m: &SelfDualKernelMatrix) -> Result<f64> {
    let mut a = m.skew_assembly();
    pfaffian_in_place(2 * m.k, &mut a)
}

type Mat2 = [[f64; 2]; 2];

fn mat2(b: KernelBlock) -> Mat2 {
    [[b.s_xy, b.i_xy], [b.d_xy, b.s_yx]]
}

fn mul2(a: Mat2, b: Mat2) -> Mat2 {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    c
}

/// Sum over permutations of `(−1)^{k−l} Π_cycles ½ Tr(f(a,b) f(b,c) ⋯ f(d,a))`.
/// Limited to `k ≤ 4`.
pub fn qdet_cycle_expansion(m: &SelfDualKernelMatrix) -> Result<f64> {
    let k = m.k;
    if k > 4 {
        return Err(Error::SizeGuard(format!("cycle expansion limited to k ≤ 4, got {k}")));
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut total = 0.0;
    permute(&mut perm, 0, &mut |p| {
        let mut seen = vec![false; k];
        let mut term = 1.0;
        let mut cycles = 0;
        for start in 0..k {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut prod = [[1.0, 0.0], [0.0, 1.0]];
            let mut a = start;
            loop {
                seen[a] = true;
                prod = mul2(prod, mat2(m.block(a, p[a])));
                a = p[a];
                if a == start {
                    break;
                }
            }
            term *= 0.5 * (prod[0][0] + prod[1][1]);
        }
        let sign = if (k - cycles).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * term;
    });
    Ok(total)
}

fn permute(p: &mut Vec<usize>, i: usize, f: &mut impl FnMut(&[usize])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}
