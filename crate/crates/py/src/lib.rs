//! Python bindings for the `invcorr` library.

use num_bigint::BigUint;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use invcorr::airy_kernel::{self, ScaledWindow, SoftEdgeParams};
use invcorr::bessel_kernel::{self, PoissonParams};
use invcorr::combinat::{self, Involution, Partition};
use invcorr::finite_kernel::{self, FiniteModelParams, WindowSpec};
use invcorr::montecarlo::{self, RngStream, ScalingSpec};
use invcorr::{KernelBlock, SeriesTolerance};

create_exception!(invcorr, InvcorrError, PyValueError);

fn err(e: invcorr::Error) -> PyErr {
    InvcorrError::new_err(format!("{}: {e}", e.kind()))
}

type Block = (f64, f64, f64, f64);

fn block(b: KernelBlock) -> Block {
    (b.s_xy, b.i_xy, b.d_xy, b.s_yx)
}

fn partition(parts: Vec<u32>) -> PyResult<Partition> {
    Partition::new(parts).map_err(err)
}

/// RSK shape of an involution given by its 1-based images.
#[pyfunction]
fn rsk_shape(word: Vec<usize>) -> PyResult<Vec<u32>> {
    let inv = Involution::new(word).map_err(err)?;
    Ok(combinat::rsk_shape(&inv).parts().to_vec())
}

/// Maximal total lengths of k disjoint increasing subsequences, k = 1..=k_max.
#[pyfunction]
fn greene_lengths(word: Vec<usize>, k_max: usize) -> PyResult<Vec<u32>> {
    let inv = Involution::new(word).map_err(err)?;
    Ok(combinat::greene_lengths(&inv, k_max).map_err(err)?.lengths)
}

/// Number of involutions with n two-cycles and m fixed points.
#[pyfunction]
fn count_involutions(n: u64, m: u64) -> BigUint {
    combinat::count_involutions(n, m)
}

/// Poissonized shape probability.
#[pyfunction]
fn pdf_q(parts: Vec<u32>, q_param: f64, alpha: f64) -> PyResult<f64> {
    combinat::pdf_q(&partition(parts)?, q_param, alpha).map_err(err)
}

/// Finite geometric-model shape probability.
#[pyfunction]
fn pdf_pm(parts: Vec<u32>, m: usize, q: f64, alpha: f64) -> PyResult<f64> {
    let p = FiniteModelParams::new(m, q, alpha).map_err(err)?;
    finite_kernel::pdf_pm(&partition(parts)?, p).map_err(err)
}

/// Kernel of the finite geometric model on an even grid of size `m`.
#[pyclass(frozen)]
struct FiniteKernel(finite_kernel::FiniteKernel);

#[pymethods]
impl FiniteKernel {
    #[new]
    fn new(m: usize, q: f64, alpha: f64) -> PyResult<Self> {
        let p = FiniteModelParams::new(m, q, alpha).map_err(err)?;
        Ok(FiniteKernel(finite_kernel::FiniteKernel::new(p).map_err(err)?))
    }

    /// `(S(x,y), I(x,y), D(x,y), S(y,x))`.
    fn block(&self, x: i64, y: i64) -> PyResult<Block> {
        self.0.kernel_block(x, y).map(block).map_err(err)
    }

    fn rho(&self, points: Vec<i64>) -> PyResult<f64> {
        self.0.rho_k(&points).map_err(err)
    }

    #[pyo3(signature = (thresholds, p_max = 10))]
    fn window_probability(&self, thresholds: Vec<i64>, p_max: usize) -> PyResult<f64> {
        let w = WindowSpec::new(thresholds).map_err(err)?;
        self.0.window_probability(&w, p_max).map_err(err)
    }
}

/// Poissonized Bessel kernel.
#[pyclass(frozen)]
struct BesselKernel(bessel_kernel::BesselKernel);

#[pymethods]
impl BesselKernel {
    #[new]
    fn new(q_param: f64, alpha: f64) -> PyResult<Self> {
        let p = PoissonParams::new(q_param, alpha).map_err(err)?;
        Ok(BesselKernel(bessel_kernel::BesselKernel::new(p, &SeriesTolerance::default()).map_err(err)?))
    }

    fn block(&self, x: i64, y: i64) -> PyResult<Block> {
        self.0.kernel_block(x, y).map(block).map_err(err)
    }

    fn rho(&self, points: Vec<i64>) -> PyResult<f64> {
        self.0.rho_k(&points).map_err(err)
    }
}

/// Soft-edge kernel, parametrised by `u` or by `w = −u/4`.
#[pyclass(frozen)]
struct AiryKernel(airy_kernel::AiryKernel);

#[pymethods]
impl AiryKernel {
    #[new]
    #[pyo3(signature = (*, u = None, w = None))]
    fn new(u: Option<f64>, w: Option<f64>) -> PyResult<Self> {
        let p = match (u, w) {
            (Some(u), None) => SoftEdgeParams::new(u),
            (None, Some(w)) => SoftEdgeParams::from_w(w),
            _ => return Err(PyValueError::new_err("give exactly one of u or w")),
        }
        .map_err(err)?;
        Ok(AiryKernel(airy_kernel::AiryKernel::new(p)))
    }

    #[getter]
    fn u(&self) -> f64 {
        self.0.params().u()
    }

    #[getter]
    fn w(&self) -> f64 {
        self.0.params().w()
    }

    fn block(&self, x: f64, y: f64) -> PyResult<Block> {
        self.0.f_block(x, y).map(block).map_err(err)
    }

    fn rho(&self, points: Vec<f64>) -> PyResult<f64> {
        self.0.rho_k(&points).map_err(err)
    }

    /// Probability that the r-th largest scaled point is at most `s_r` for every r.
    #[pyo3(signature = (thresholds, p_max = 12))]
    fn distribution(&self, py: Python<'_>, thresholds: Vec<f64>, p_max: usize) -> PyResult<f64> {
        let w = ScaledWindow::new(thresholds).map_err(err)?;
        py.detach(|| self.0.joint_distribution(&w, p_max)).map_err(err)
    }
}

/// A uniform involution with `n` two-cycles and `m` fixed points, as 1-based images.
#[pyfunction]
#[pyo3(signature = (n, m, seed = 0, stream = 0))]
fn sample_involution(n: usize, m: usize, seed: u64, stream: u64) -> Vec<usize> {
    let mut rng = RngStream::new(seed, stream).rng();
    montecarlo::sample_involution(n, m, &mut rng).word().to_vec()
}

/// Top `k_max` RSK rows of `samples` involutions at the scaling of `(n, w)`,
/// with the centre and scale of that scaling.
#[pyfunction]
#[pyo3(signature = (n, w, k_max, samples, seed = 0, stream = 0))]
fn sample_scaled_rows(py: Python<'_>, n: usize, w: f64, k_max: usize, samples: usize, seed: u64, stream: u64) -> PyResult<(Vec<Vec<u32>>, f64, f64, usize)> {
    let spec = ScalingSpec::new(n, w).map_err(err)?;
    let s = py.detach(|| montecarlo::empirical_scaled_cdf(spec, k_max, samples, RngStream::new(seed, stream))).map_err(err)?;
    Ok((s.rows, s.lattice.centre, s.lattice.scale, spec.m))
}

/// Fixed-size against Poissonized λ_1 at matched means.
#[pyfunction]
#[pyo3(signature = (q_param, w, samples, seed = 0, stream = 0))]
fn depoissonization_compare<'py>(py: Python<'py>, q_param: f64, w: f64, samples: usize, seed: u64, stream: u64) -> PyResult<Bound<'py, PyDict>> {
    let r = py.detach(|| montecarlo::depoissonization_compare(q_param, w, samples, RngStream::new(seed, stream))).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("fixed_n", r.fixed_n)?;
    d.set_item("fixed_m", r.fixed_m)?;
    d.set_item("max_discrepancy", r.max_discrepancy)?;
    d.set_item("grid", r.grid)?;
    Ok(d)
}

#[pymodule(name = "invcorr")]
fn invcorr_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", invcorr::VERSION)?;
    m.add("InvcorrError", m.py().get_type::<InvcorrError>())?;
    m.add_class::<FiniteKernel>()?;
    m.add_class::<BesselKernel>()?;
    m.add_class::<AiryKernel>()?;
    m.add_function(wrap_pyfunction!(rsk_shape, m)?)?;
    m.add_function(wrap_pyfunction!(greene_lengths, m)?)?;
    m.add_function(wrap_pyfunction!(count_involutions, m)?)?;
    m.add_function(wrap_pyfunction!(pdf_q, m)?)?;
    m.add_function(wrap_pyfunction!(pdf_pm, m)?)?;
    m.add_function(wrap_pyfunction!(sample_involution, m)?)?;
    m.add_function(wrap_pyfunction!(sample_scaled_rows, m)?)?;
    m.add_function(wrap_pyfunction!(depoissonization_compare, m)?)?;
    Ok(())
}
