use invcorr::airy_kernel::*;
use invcorr::bessel_kernel::{BesselKernel, PoissonParams};
use invcorr::quad;
use invcorr::specfun::{airy_ai, airy_tail};
use invcorr::{Error, KernelBlock, SeriesTolerance};

const AI0: f64 = 0.355_028_053_887_817_2;
const AIP0: f64 = -0.258_819_403_792_806_8;

fn kernel(u: f64) -> AiryKernel {
    AiryKernel::new(SoftEdgeParams::new(u).unwrap())
}

#[test]
fn soft_kernel_values() {
    assert!((k_soft(0.0, 0.0) - AIP0 * AIP0).abs() < 1e-12);
    // the quoted 0.066986 is Ai'(0)² = 0.0669875 rounded down
    assert!((k_soft(0.0, 0.0) - 0.066986).abs() < 1.5e-6);
    assert!((k_soft(1.0, 2.5) - k_soft(2.5, 1.0)).abs() < 1e-12);
    assert!(k_soft(8.0, 0.0).abs() < 1e-6);
    for &(x, y) in &[(-3.0, 1.0), (0.5, 2.0), (-1.2, -0.7), (1.5, 1.5), (-4.0, -4.0)] {
        assert!((k_soft(x, y) - k_soft_divided(x, y)).abs() < 1e-11, "({x},{y})");
    }
}

#[test]
fn parameters() {
    let p = SoftEdgeParams::from_w(0.5).unwrap();
    assert_eq!(p.u(), -2.0);
    assert_eq!(p.w(), 0.5);
    assert_eq!(p.sgn_u(), -1);
    assert_eq!(SoftEdgeParams::new(0.0).unwrap().sgn_u(), 0);
    assert!(SoftEdgeParams::new(20.0).is_err());
    assert!(SoftEdgeParams::new(f64::NAN).is_err());
    assert!(kernel(0.0).f_block(-11.0, 0.0).is_err());
}

#[test]
fn exponential_convolution_oracle() {
    let k = kernel(0.0);
    for z in [-8.0, -1.0, 0.0, 3.0] {
        assert!((k.exp_convolution(z) - (1.0 - airy_tail(z))).abs() < 1e-12);
    }
    for u in [-0.5, -3.0, -24.0] {
        let k = kernel(u);
        for z in [-9.5f64, -2.0, 0.7, 6.0] {
            let direct = quad::composite(0.0, 120.0 / -u, 0.1, 16, |s| (u * s / 2.0).exp() * airy_ai(z - s).0);
            assert!((k.exp_convolution(z) - direct).abs() < 1e-10, "u={u} z={z}");
        }
    }
    // continued form for u > 0
    let u = 2.5f64;
    let k = kernel(u);
    for z in [-4.0f64, 0.0, 3.0] {
        let tail = quad::composite(z, z + 30.0, 0.25, 16, |t| (u * (z - t) / 2.0).exp() * airy_ai(t).0);
        let v = (u * z / 2.0 - u.powi(3) / 24.0).exp() - tail;
        assert!((k.exp_convolution(z) - v).abs() < 1e-10 * v.abs().max(1.0));
    }
}

#[test]
fn entries_at_u_zero() {
    let k = kernel(0.0);
    let b = k.f_block(0.0, 0.0).unwrap();
    let oracle = AIP0 * AIP0 + 0.5 * AI0 * (1.0 - 1.0 / 3.0);
    assert!((b.s_xy - oracle).abs() < 1e-10);
    assert!((b.s_xy - 0.185329).abs() < 2e-6);
    for x in [-2.0, 0.0, 1.3] {
        assert_eq!(k.f_block(x, x).unwrap().i_xy, 0.0);
    }
}

#[test]
fn antisymmetry_and_self_duality() {
    let grid = [-2.0, -0.5, 0.0, 1.0, 2.0];
    for u in [0.0, -2.0, -6.0, 1.5] {
        let k = kernel(u);
        for &x in &grid {
            for &y in &grid {
                let (a, b) = (k.f_block(x, y).unwrap(), k.f_block(y, x).unwrap());
                assert!((a.s_yx - b.s_xy).abs() < 1e-10);
                assert!((a.i_xy + b.i_xy).abs() < 1e-10);
                assert!((a.d_xy + b.d_xy).abs() < 1e-10);
            }
        }
    }
    let k = kernel(-2.0);
    let (a, b) = (k.f_block(0.0, 1.0).unwrap(), k.f_block(1.0, 0.0).unwrap());
    assert!((a.d_xy + b.d_xy).abs() < 1e-9);
}

#[test]
fn printed_and_rewritten_f22_agree() {
    let grid = [-2.0, 0.0, 2.0];
    for u in [-1.0, -4.0] {
        let k = kernel(u);
        for &x in &grid {
            for &y in &grid {
                let direct = k.f22_direct(x, y).unwrap();
                let block = k.f_block(x, y).unwrap().s_xy;
                let rewritten = k.f22_rewritten(x, y).unwrap();
                assert!((direct - block).abs() < 1e-7, "u={u} ({x},{y}): {direct} vs {block}");
                assert!((rewritten - block).abs() < 1e-10);
            }
        }
    }
    assert!(matches!(kernel(0.0).f22_direct(0.0, 0.0), Err(Error::InvalidParameter(_))));
    assert!(kernel(2.0).f22_direct(0.0, 0.0).is_err());
}

#[test]
fn continuous_in_u_through_zero() {
    let (lo, hi) = (kernel(-1e-9), kernel(1e-9));
    for &(x, y) in &[(0.0, 1.0), (-2.0, 0.5)] {
        let (a, b) = (lo.f_block(x, y).unwrap(), hi.f_block(x, y).unwrap());
        assert!((a.s_xy - b.s_xy).abs() < 1e-8);
        assert!((a.i_xy - b.i_xy).abs() < 1e-8);
        assert!((a.d_xy - b.d_xy).abs() < 1e-8);
    }
}

#[test]
fn scaled_correlations() {
    for u in [0.0, -2.0] {
        let k = kernel(u);
        for x in [-2.0, 0.0, 1.5] {
            let b = k.f_block(x, x).unwrap();
            assert!((k.rho_k(&[x]).unwrap() - b.s_xy).abs() < 1e-12);
            assert!(k.rho_k(&[x, x]).unwrap().abs() < 1e-10);
            for y in [-1.0, 0.5, 2.5] {
                let (bx, by, b) = (k.f_block(x, x).unwrap(), k.f_block(y, y).unwrap(), k.f_block(x, y).unwrap());
                let expanded = bx.s_xy * by.s_xy - b.s_xy * b.s_yx + b.i_xy * b.d_xy;
                let v = k.rho_k(&[x, y]).unwrap();
                assert!((v - expanded).abs() < 1e-12);
                assert!(v >= -1e-12, "ρ2({x},{y}) = {v}");
            }
        }
    }
    assert!(matches!(kernel(0.0).rho_k(&[0.0; 7]), Err(Error::SizeGuard(_))));
}

fn scaled_bessel(q: f64, w: f64, x: f64, y: f64) -> (KernelBlock, f64, f64) {
    let scale = q.powf(1.0 / 6.0);
    let sa = 1.0 - 2.0 * w / scale;
    let bk = BesselKernel::new(PoissonParams::new(q, sa * sa).unwrap(), &SeriesTolerance::default()).unwrap();
    let centre = 2.0 * q.sqrt();
    let (i, j) = ((centre + scale * x).round() as i64, (centre + scale * y).round() as i64);
    let b = bk.kernel_block(i, j).unwrap();
    let scaled = KernelBlock { s_xy: scale * b.s_xy, i_xy: b.i_xy, d_xy: scale * scale * b.d_xy, s_yx: scale * b.s_yx };
    (scaled, (i as f64 - centre) / scale, (j as f64 - centre) / scale)
}

#[test]
fn bessel_blocks_approach_airy_blocks() {
    let w = 0.5;
    let k = AiryKernel::new(SoftEdgeParams::from_w(w).unwrap());
    let mut errs = Vec::new();
    for q in [1e3, 1e4, 1e5] {
        let (b, xs, ys) = scaled_bessel(q, w, 0.0, 1.0);
        let a = k.f_block(xs, ys).unwrap();
        errs.push([(b.s_xy - a.s_xy).abs(), (b.i_xy - a.i_xy).abs(), (b.d_xy - a.d_xy).abs(), (b.s_yx - a.s_yx).abs()]);
    }
    for e in 0..4 {
        assert!(errs[0][e] > errs[1][e] && errs[1][e] > errs[2][e], "entry {e}: {errs:?}");
    }
    assert!(errs[2].iter().all(|&e| e < 0.03), "{errs:?}");
}

#[test]
fn distribution_limits_and_monotonicity() {
    let k = kernel(0.0);
    assert!((k.joint_distribution(&ScaledWindow::new(vec![12.0]).unwrap(), 12).unwrap() - 1.0).abs() < 1e-12);
    let mut last = 0.0;
    for i in 0..7 {
        let s = -4.0 + i as f64;
        let v = k.joint_distribution(&ScaledWindow::new(vec![s]).unwrap(), 12).unwrap();
        assert!((0.0..=1.0).contains(&v) && v >= last, "F({s}) = {v}");
        last = v;
    }
    let single = k.joint_distribution(&ScaledWindow::new(vec![-0.5]).unwrap(), 12).unwrap();
    let mut prev = 0.0;
    for s2 in [-4.0, -3.0, -2.0, -1.0, -0.6] {
        let v = k.joint_distribution(&ScaledWindow::new(vec![-0.5, s2]).unwrap(), 12).unwrap();
        assert!(v >= prev && v <= single + 1e-9, "F(-0.5, {s2}) = {v}");
        prev = v;
    }
    let near = k.joint_distribution(&ScaledWindow::new(vec![-0.5, -0.5001]).unwrap(), 12).unwrap();
    assert!((near - single).abs() < 1e-3);
    let three = k.joint_distribution(&ScaledWindow::new(vec![0.0, -1.0, -2.0]).unwrap(), 12).unwrap();
    let two = k.joint_distribution(&ScaledWindow::new(vec![0.0, -1.0]).unwrap(), 12).unwrap();
    assert!(three <= two + 1e-9 && three > 0.0);
}

/// Second-order inclusion–exclusion from independently integrated
/// correlations; far in the tail the third-order term is negligible.
#[test]
fn distribution_matches_low_order_expansion() {
    let k = kernel(-2.0);
    let s = 2.5;
    let top = s + 12.0;
    let rho1 = quad::composite(s, top, 0.5, 20, |x| k.rho_k(&[x]).unwrap());
    let rho2 = quad::composite(s, top, 1.0, 12, |x| quad::composite(s, top, 1.0, 12, |y| k.rho_k(&[x, y]).unwrap()));
    let expansion = 1.0 - rho1 + 0.5 * rho2;
    let v = k.joint_distribution(&ScaledWindow::new(vec![s]).unwrap(), 12).unwrap();
    assert!((v - expansion).abs() < 1e-7, "{v} vs {expansion}");
}

#[test]
fn node_doubling_is_converged() {
    for u in [0.0, -2.0, -16.0] {
        let k = kernel(u);
        for window in [vec![-3.0], vec![0.0, -1.5]] {
            let w = ScaledWindow::new(window).unwrap();
            let coarse = k.joint_distribution_at(&w, 12, 32).unwrap();
            let fine = k.joint_distribution_at(&w, 12, 64).unwrap();
            assert!((coarse - fine).abs() < 1e-6, "u={u}: {coarse} vs {fine}");
        }
    }
}

/// The approach to the large-`w` limit is first order in `1/w`: the sup-norm
/// gap halves with each doubling of `w`, so the gap between `w = 4` and
/// `w = 8` stays near 0.047 rather than below 0.01.
#[test]
fn large_w_self_convergence() {
    let ks: Vec<AiryKernel> = [4.0, 8.0, 16.0].iter().map(|&w| AiryKernel::new(SoftEdgeParams::from_w(w).unwrap())).collect();
    let (mut gap_4_8, mut gap_8_16) = (0.0f64, 0.0f64);
    for i in 0..=12 {
        let w = ScaledWindow::new(vec![-4.0 + 0.5 * i as f64]).unwrap();
        let v: Vec<f64> = ks.iter().map(|k| k.joint_distribution_at(&w, 12, 64).unwrap()).collect();
        gap_4_8 = gap_4_8.max((v[0] - v[1]).abs());
        gap_8_16 = gap_8_16.max((v[1] - v[2]).abs());
    }
    let ratio = gap_8_16 / gap_4_8;
    assert!((0.4..0.6).contains(&ratio), "{gap_4_8} {gap_8_16}");
    assert!(gap_4_8 < 0.05);
}

fn moments(k: &AiryKernel) -> (f64, f64) {
    let (lo, hi) = (-9.5, 5.0);
    let (xs, ws) = quad::GaussLegendre::new(64).mapped(lo, hi);
    let (mut i1, mut i2) = (0.0, 0.0);
    for (s, w) in xs.iter().zip(&ws) {
        let f = k.joint_distribution_at(&ScaledWindow::new(vec![*s]).unwrap(), 12, 32).unwrap();
        i1 += w * f;
        i2 += w * 2.0 * s * f;
    }
    let mean = hi - i1;
    (mean, hi * hi - i2 - mean * mean)
}

/// At `w = 0` the largest point follows the GOE Tracy–Widom law; its
/// published mean and variance serve as an external oracle.
#[test]
fn no_fixed_point_bias_gives_goe_moments() {
    let (mean, var) = moments(&kernel(0.0));
    assert!((mean - -1.206_533_574_582).abs() < 1e-4, "{mean}");
    assert!((var - 1.607_781_034_581).abs() < 5e-4, "{var}");
}

#[test]
fn window_guards() {
    assert!(ScaledWindow::new(vec![0.0, 0.0]).is_err());
    assert!(ScaledWindow::new(vec![0.0, -1.0, -2.0, -3.0]).is_err());
    assert!(ScaledWindow::with_cutoff(vec![1.0], 5.0, 32).is_err());
    let w = ScaledWindow::new(vec![0.0]).unwrap();
    assert_eq!(w.intervals(), vec![(0.0, 12.0)]);
    assert!(matches!(kernel(0.0).joint_distribution(&w, 13), Err(Error::SizeGuard(_))));
}

#[test]
fn correlation_tail_bound() {
    let k = kernel(0.0);
    let m = k.fit_tail_constant(0.0, 0.5, 11).unwrap();
    assert!(m > 0.0);
    let one = k.tail_bound(&[5.0], m).unwrap();
    assert!(one.holds && one.rho * 5f64.exp() <= m);
    for x in [0.25, 1.75, 3.25] {
        for y in [0.75, 2.25, 4.5] {
            let b = k.tail_bound(&[x, y], m).unwrap();
            assert!(b.rho / b.bound <= 1.0, "({x},{y})");
        }
    }
    let empty = tail_bound_check(&[], SoftEdgeParams::new(0.0).unwrap(), m).unwrap();
    assert!(empty.holds && empty.bound == 1.0);
    assert!(k.tail_bound(&[0.0; 5], m).is_err());
}
