//! Partitions, involutions, RSK shapes and Greene's theorem.

use crate::error::{invalid, Result};
use crate::specfun::ln_factorial;
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

/// Weakly decreasing positive parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Trailing zeros are dropped; any other violation is rejected.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return invalid(format!("parts must be weakly decreasing and positive: {parts:?}"));
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `|λ|`.
    pub fn size(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// `λ_1 − λ_2 + λ_3 − …`, the fixed-point count of any involution of this shape.
    pub fn alternating_sum(&self) -> u64 {
        let mut s: i64 = 0;
        for (j, &p) in self.parts.iter().enumerate() {
            if j % 2 == 0 {
                s += p as i64;
            } else {
                s -= p as i64;
            }
        }
        s as u64
    }

    /// Part `j` (0-based), zero past the length.
    pub fn part(&self, j: usize) -> u32 {
        self.parts.get(j).copied().unwrap_or(0)
    }
}

/// Involution of `{1,…,N}` stored as the 1-based image of each symbol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Involution {
    mapping: Vec<usize>,
}

impl Involution {
    /// `mapping[i-1] = π(i)` with 1-based values.
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        for (i, &v) in mapping.iter().enumerate() {
            if v == 0 || v > n {
                return invalid(format!("image {v} of {} out of range 1..={n}", i + 1));
            }
            if mapping[v - 1] != i + 1 {
                return invalid(format!("not an involution at symbol {}", i + 1));
            }
        }
        Ok(Involution { mapping })
    }

    pub fn identity(n: usize) -> Self {
        Involution { mapping: (1..=n).collect() }
    }

    /// Builds from disjoint 2-cycles on `{1,…,n}`; unlisted symbols are fixed.
    pub fn from_cycles(n: usize, cycles: &[(usize, usize)]) -> Result<Self> {
        let mut mapping: Vec<usize> = (1..=n).collect();
        for &(a, b) in cycles {
            if a == 0 || b == 0 || a > n || b > n || a == b {
                return invalid(format!("bad 2-cycle ({a} {b})"));
            }
            if mapping[a - 1] != a || mapping[b - 1] != b {
                return invalid(format!("2-cycle ({a} {b}) overlaps another"));
            }
            mapping[a - 1] = b;
            mapping[b - 1] = a;
        }
        Ok(Involution { mapping })
    }

    /// The word `π(1), …, π(N)`.
    pub fn word(&self) -> &[usize] {
        &self.mapping
    }

    pub fn size(&self) -> usize {
        self.mapping.len()
    }

    pub fn fixed_points(&self) -> usize {
        self.mapping.iter().enumerate().filter(|&(i, &v)| v == i + 1).count()
    }

    pub fn two_cycles(&self) -> usize {
        (self.size() - self.fixed_points()) / 2
    }
}

/// `λ^{(k)}` and cumulative lengths `L^{(k)}` for `k = 1..=k_max`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LambdaProfile {
    pub lambda_k: Vec<u32>,
    pub lengths: Vec<u32>,
}

/// RSK row-insertion shape of an arbitrary word of distinct values.
pub fn rsk_shape_word(word: &[usize]) -> Partition {
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for &w in word {
        let mut x = w;
        let mut r = 0;
        loop {
            if r == rows.len() {
                rows.push(vec![x]);
                break;
            }
            let row = &mut rows[r];
            let pos = row.partition_point(|&y| y < x);
            if pos == row.len() {
                row.push(x);
                break;
            }
            std::mem::swap(&mut row[pos], &mut x);
            r += 1;
        }
    }
    Partition { parts: rows.iter().map(|r| r.len() as u32).collect() }
}

/// Lengths of the first `k` rows of the RSK shape of a word with distinct
/// letters. Insertion only bumps downward, so rows below `k` are dropped.
pub fn rsk_top_rows(word: &[usize], k: usize) -> Vec<u32> {
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &w in word {
        let mut x = w;
        for row in rows.iter_mut() {
            let pos = row.partition_point(|&y| y < x);
            if pos == row.len() {
                row.push(x);
                break;
            }
            std::mem::swap(&mut row[pos], &mut x);
        }
    }
    rows.iter().map(|r| r.len() as u32).collect()
}

/// RSK shape of a word with repeated letters: rows weakly increase, so
/// `λ_1` is the longest weakly increasing subsequence.
pub fn rsk_shape_weak(word: &[usize]) -> Partition {
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for &w in word {
        let mut x = w;
        let mut r = 0;
        loop {
            if r == rows.len() {
                rows.push(vec![x]);
                break;
            }
            let row = &mut rows[r];
            let pos = row.partition_point(|&y| y <= x);
            if pos == row.len() {
                row.push(x);
                break;
            }
            std::mem::swap(&mut row[pos], &mut x);
            r += 1;
        }
    }
    Partition { parts: rows.iter().map(|r| r.len() as u32).collect() }
}

pub fn rsk_shape(inv: &Involution) -> Partition {
    rsk_shape_word(inv.word())
}

/// Greene lengths `L^{(k)} = λ_1 + … + λ_k` of the RSK shape.
pub fn greene_lengths(inv: &Involution, k_max: usize) -> Result<LambdaProfile> {
    if k_max == 0 || k_max > inv.size().max(1) {
        return invalid(format!("k_max must lie in 1..={}, got {k_max}", inv.size()));
    }
    let shape = rsk_shape(inv);
    let lambda_k: Vec<u32> = (0..k_max).map(|j| shape.part(j)).collect();
    let lengths = lambda_k
        .iter()
        .scan(0u32, |acc, &l| {
            *acc += l;
            Some(*acc)
        })
        .collect();
    Ok(LambdaProfile { lambda_k, lengths })
}

fn longest_decreasing(values: &[usize]) -> usize {
    let mut best = vec![1usize; values.len()];
    for i in 0..values.len() {
        for j in 0..i {
            if values[j] > values[i] {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

/// Largest union of `k` disjoint increasing subsequences, by exhaustive search
/// over subsets. A subset splits into `k` increasing runs exactly when its
/// longest decreasing subsequence has length at most `k`.
pub fn k_increasing_oracle(word: &[usize], k: usize) -> Result<usize> {
    if word.len() > 10 {
        return invalid(format!("exhaustive search limited to N ≤ 10, got {}", word.len()));
    }
    if k == 0 {
        return invalid("k must be positive");
    }
    let n = word.len();
    let mut best = 0;
    let mut sub = Vec::with_capacity(n);
    for mask in 0u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        sub.clear();
        sub.extend((0..n).filter(|i| mask >> i & 1 == 1).map(|i| word[i]));
        if longest_decreasing(&sub) <= k {
            best = size;
        }
    }
    Ok(best)
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `t_{n,m} = (2n+m)! / (2^n n! m!)`.
pub fn count_involutions(n: u64, m: u64) -> BigUint {
    factorial(2 * n + m) / ((BigUint::one() << n) * factorial(n) * factorial(m))
}

/// `Σ_{2n+m=N} t_{n,m} α^{m/2}`.
pub fn t_alpha(size: u64, alpha: f64) -> f64 {
    let mut total = 0.0;
    for n in 0..=size / 2 {
        let m = size - 2 * n;
        let weight = if m == 0 { 1.0 } else { alpha.powf(m as f64 / 2.0) };
        if weight == 0.0 {
            continue;
        }
        total += count_involutions(n, m).to_f64().unwrap_or(f64::INFINITY) * weight;
    }
    total
}

/// Number of standard tableaux, exact, from `N! V_ℓ(λ) W_ℓ(λ)`.
pub fn f_lambda(lambda: &Partition) -> BigUint {
    let p = lambda.len();
    let mut num = factorial(lambda.size());
    for j in 0..p {
        for l in j + 1..p {
            num *= (lambda.part(j) as u64 + l as u64) - (lambda.part(l) as u64 + j as u64);
        }
    }
    let mut den = BigUint::one();
    for j in 0..p {
        den *= factorial(lambda.part(j) as u64 + (p - 1 - j) as u64);
    }
    num / den
}

/// `ln (f_λ / N!) = ln V_ℓ(λ) + ln W_ℓ(λ)`.
pub fn ln_f_over_factorial(lambda: &Partition) -> f64 {
    let p = lambda.len();
    let mut s = 0.0;
    for j in 0..p {
        for l in j + 1..p {
            s += ((lambda.part(j) as f64 - lambda.part(l) as f64) + (l - j) as f64).ln();
        }
        s -= ln_factorial(lambda.part(j) as u64 + (p - 1 - j) as u64);
    }
    s
}

/// Poissonized shape probability `e^{−√(αQ)−Q/2} α^{m/2} Q^{N/2} f_λ/N!`.
pub fn pdf_q(lambda: &Partition, q_param: f64, alpha: f64) -> Result<f64> {
    if !(q_param > 0.0) || !(alpha >= 0.0) {
        return invalid(format!("need Q > 0 and α ≥ 0, got Q={q_param}, α={alpha}"));
    }
    let size = lambda.size() as f64;
    let m = lambda.alternating_sum();
    let ratio = if lambda.size() <= 30 {
        let f = f_lambda(lambda).to_f64().unwrap_or(f64::INFINITY);
        f.ln() - ln_factorial(lambda.size())
    } else {
        ln_f_over_factorial(lambda)
    };
    let alpha_term = if m == 0 {
        0.0
    } else if alpha == 0.0 {
        return Ok(0.0);
    } else {
        0.5 * m as f64 * alpha.ln()
    };
    let ln = -(alpha * q_param).sqrt() - 0.5 * q_param + alpha_term + 0.5 * size * q_param.ln() + ratio;
    Ok(ln.exp())
}

/// All partitions of `n`, parts in decreasing order.
pub fn partitions_of(n: u32) -> Vec<Partition> {
    fn rec(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        for p in (1..=rem.min(max)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Every involution of `{1,…,n}`.
pub fn all_involutions(n: usize) -> Vec<Involution> {
    fn rec(mapping: &mut Vec<usize>, out: &mut Vec<Involution>) {
        let Some(first) = mapping.iter().position(|&v| v == 0) else {
            out.push(Involution { mapping: mapping.clone() });
            return;
        };
        mapping[first] = first + 1;
        rec(mapping, out);
        for other in first + 1..mapping.len() {
            if mapping[other] == 0 {
                mapping[first] = other + 1;
                mapping[other] = first + 1;
                rec(mapping, out);
                mapping[other] = 0;
            }
        }
        mapping[first] = 0;
    }
    let mut out = Vec::new();
    rec(&mut vec![0; n], &mut out);
    out
}

