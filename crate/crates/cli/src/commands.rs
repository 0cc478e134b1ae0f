use invcorr::airy_kernel::{self, AiryKernel, ScaledWindow, SoftEdgeParams};
use invcorr::bessel_kernel::{BesselKernel, PoissonParams};
use invcorr::combinat::rsk_shape;
use invcorr::finite_kernel::{FiniteKernel, FiniteModelParams};
use invcorr::montecarlo::{self, depoissonization_compare, empirical_scaled_cdf, Lattice, RngStream, ScalingSpec};
use invcorr::{Error, KernelBlock, SeriesTolerance};

use crate::table::{Cell, Table};
use crate::{Centring, Cli, Command, Model, Regime, SoftEdge};

/// Below this many samples `compare` reports without a verdict.
pub const REPORT_ONLY_SAMPLES: usize = 1000;

pub enum CliError {
    Config(String),
    Module(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Module(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(CliError::Config(msg.into()))
}

fn required<T>(v: Option<T>, flag: &str, what: &str) -> Result<T> {
    v.map_or_else(|| config(format!("--{flag} is required for {what}")), Ok)
}

fn soft_edge(e: &SoftEdge) -> Result<SoftEdgeParams> {
    Ok(match (e.u, e.w) {
        (Some(u), _) => SoftEdgeParams::new(u)?,
        (None, Some(w)) => SoftEdgeParams::from_w(w)?,
        (None, None) => return config("one of --u or --w is required"),
    })
}

fn join(parts: impl IntoIterator<Item = impl ToString>) -> String {
    parts.into_iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" ")
}

fn join_reals(v: &[f64]) -> String {
    v.iter().map(|&x| crate::table::real17(x)).collect::<Vec<_>>().join(" ")
}

fn header(cli: &Cli, columns: &[&str]) -> Table {
    let mut t = Table::new(columns);
    t.meta("command", cli.command.name()).meta("library_version", invcorr::VERSION).meta("invocation", invocation());
    t
}

/// The arguments after the program name, without the output path.
fn invocation() -> String {
    let mut out = Vec::new();
    let mut args = std::env::args().skip(1);
    while let Some(a) = args.next() {
        if a == "--output" || a == "-o" {
            args.next();
        } else if !a.starts_with("--output=") {
            out.push(a);
        }
    }
    out.join(" ")
}

fn block_cells(b: KernelBlock) -> [Cell; 4] {
    [b.s_xy.into(), b.i_xy.into(), b.d_xy.into(), b.s_yx.into()]
}

const BLOCK_COLUMNS: [&str; 6] = ["x", "y", "s_xy", "i_xy", "d_xy", "s_yx"];

pub fn run(cli: &Cli) -> Result<Table> {
    let stream = RngStream::new(cli.seed, cli.stream);
    match &cli.command {
        Command::Sample { model, n, m, poisson_q, alpha, grid, q, samples, shape_only } => {
            let mut t = header(cli, &["index", "size", "two_cycles", "fixed_points", "shape", "word"]);
            t.meta("seed", cli.seed).meta("stream", cli.stream).meta("samples", *samples);
            let mut rng = stream.rng();
            match model {
                Model::Fixed => {
                    t.meta("model", "fixed").meta("n", *n).meta("m", *m);
                    for i in 0..*samples {
                        let inv = montecarlo::sample_involution(*n, *m, &mut rng);
                        let word = if *shape_only { String::new() } else { join(inv.word()) };
                        t.row(vec![i.into(), inv.size().into(), inv.two_cycles().into(), inv.fixed_points().into(), join(rsk_shape(&inv).parts()).into(), word.into()]);
                    }
                }
                Model::Poisson => {
                    let qp = required(*poisson_q, "poisson-q", "the poisson model")?;
                    let p = PoissonParams::new(qp, *alpha)?;
                    t.meta("model", "poisson").meta("poisson_q", qp).meta("alpha", *alpha);
                    for i in 0..*samples {
                        let inv = montecarlo::sample_poissonized(p, &mut rng);
                        let word = if *shape_only { String::new() } else { join(inv.word()) };
                        t.row(vec![i.into(), inv.size().into(), inv.two_cycles().into(), inv.fixed_points().into(), join(rsk_shape(&inv).parts()).into(), word.into()]);
                    }
                }
                Model::Geometric => {
                    let size = required(*grid, "grid", "the geometric model")?;
                    let qq = required(*q, "q", "the geometric model")?;
                    let p = FiniteModelParams::new(size, qq, *alpha)?;
                    t.meta("model", "geometric").meta("grid", size).meta("q", qq).meta("alpha", *alpha);
                    for i in 0..*samples {
                        let shape = montecarlo::sample_geometric_shape(p, &mut rng)?;
                        t.row(vec![i.into(), shape.size().into(), "".into(), shape.alternating_sum().into(), join(shape.parts()).into(), "".into()]);
                    }
                }
            }
            Ok(t)
        }
        Command::KernelFinite { m, q, alpha, x, y } => {
            let k = FiniteKernel::new(FiniteModelParams::new(*m, *q, *alpha)?)?;
            let mut t = header(cli, &BLOCK_COLUMNS);
            t.meta("grid", *m).meta("q", *q).meta("alpha", *alpha).meta("extent", k.xmax());
            for &a in x {
                for &b in y {
                    let mut row: Vec<Cell> = vec![a.into(), b.into()];
                    row.extend(block_cells(k.kernel_block(a, b)?));
                    t.row(row);
                }
            }
            Ok(t)
        }
        Command::KernelPoisson { poisson_q, alpha, x, y } => {
            let tol = SeriesTolerance::default();
            let k = BesselKernel::new(PoissonParams::new(*poisson_q, *alpha)?, &tol)?;
            let mut t = header(cli, &BLOCK_COLUMNS);
            t.meta("poisson_q", *poisson_q).meta("alpha", *alpha).meta("series_abs_tol", tol.abs_tol).meta("bessel_order_cut", k.order_cut());
            for &a in x {
                for &b in y {
                    let mut row: Vec<Cell> = vec![a.into(), b.into()];
                    row.extend(block_cells(k.kernel_block(a, b)?));
                    t.row(row);
                }
            }
            Ok(t)
        }
        Command::KernelAiry { edge, x, y } => {
            let p = soft_edge(edge)?;
            let k = AiryKernel::new(p);
            let mut t = header(cli, &BLOCK_COLUMNS);
            t.meta("u", p.u()).meta("w", p.w());
            for &a in x {
                for &b in y {
                    let mut row: Vec<Cell> = vec![a.into(), b.into()];
                    row.extend(block_cells(k.f_block(a, b)?));
                    t.row(row);
                }
            }
            Ok(t)
        }
        Command::Gap { edge, s, terms, nodes, cutoff } => {
            let p = soft_edge(edge)?;
            let window = ScaledWindow::with_cutoff(s.clone(), cutoff.unwrap_or(s[0] + 12.0), nodes.unwrap_or(32))?;
            let k = AiryKernel::new(p);
            let coarse = k.joint_distribution_at(&window, *terms, window.nodes)?;
            let fine = k.joint_distribution(&window, *terms)?;
            let mut t = header(cli, &["thresholds", "probability", "coarse", "change"]);
            t.meta("u", p.u())
                .meta("w", p.w())
                .meta("thresholds", join_reals(s))
                .meta("terms", *terms)
                .meta("nodes", window.nodes)
                .meta("fine_nodes", 2 * window.nodes)
                .meta("cutoff", window.cutoff)
                .meta("series_tail_tol", airy_kernel::SERIES_TAIL_TOL)
                .meta("quadrature_tol", airy_kernel::QUADRATURE_TOL);
            t.row(vec![join_reals(s).into(), fine.into(), coarse.into(), (fine - coarse).abs().into()]);
            Ok(t)
        }
        Command::Density { regime, m, q, poisson_q, alpha, w, from, to, step } => {
            if to.is_nan() || from.is_nan() || to < from {
                return config("--to must be at least --from");
            }
            let mut t = header(cli, &["x", "density"]);
            match regime {
                Regime::Finite => {
                    let (size, qq, a) = (required(*m, "m", "the finite regime")?, required(*q, "q", "the finite regime")?, required(*alpha, "alpha", "the finite regime")?);
                    let k = FiniteKernel::new(FiniteModelParams::new(size, qq, a)?)?;
                    t.meta("regime", "finite").meta("grid", size).meta("q", qq).meta("alpha", a);
                    for x in from.ceil() as i64..=to.floor() as i64 {
                        t.row(vec![x.into(), k.rho_k(&[x])?.into()]);
                    }
                }
                Regime::Poisson => {
                    let (qp, a) = (required(*poisson_q, "poisson-q", "the poisson regime")?, required(*alpha, "alpha", "the poisson regime")?);
                    let tol = SeriesTolerance::default();
                    let k = BesselKernel::new(PoissonParams::new(qp, a)?, &tol)?;
                    t.meta("regime", "poisson").meta("poisson_q", qp).meta("alpha", a).meta("series_abs_tol", tol.abs_tol);
                    for x in from.ceil() as i64..=to.floor() as i64 {
                        t.row(vec![x.into(), k.rho_k(&[x])?.into()]);
                    }
                }
                Regime::Airy => {
                    let p = SoftEdgeParams::from_w(required(*w, "w", "the airy regime")?)?;
                    if step.is_nan() || *step <= 0.0 {
                        return config("--step must be positive");
                    }
                    let k = AiryKernel::new(p);
                    t.meta("regime", "airy").meta("u", p.u()).meta("w", p.w()).meta("step", *step);
                    let count = ((to - from) / step + 1e-9).floor() as usize;
                    for i in 0..=count {
                        let x = from + i as f64 * step;
                        t.row(vec![x.into(), k.rho_k(&[x])?.into()]);
                    }
                }
            }
            t.meta("from", *from).meta("to", *to);
            Ok(t)
        }
        Command::Compare { n, w, samples, s, tol, centring, terms } => {
            let spec = ScalingSpec::new(*n, *w)?;
            let kernel = AiryKernel::new(SoftEdgeParams::from_w(*w)?);
            let mut sample = empirical_scaled_cdf(spec, s.len().max(1), *samples, stream)?;
            if *centring == Centring::Pairs {
                sample.lattice = Lattice::poisson(2.0 * *n as f64);
            }
            let lo = airy_kernel::MIN_ARGUMENT + 0.5;
            let ks = sample.ks_distance(0, |x| {
                if x < lo {
                    Ok(0.0)
                } else if x > 8.0 {
                    Ok(1.0)
                } else {
                    kernel.joint_distribution(&ScaledWindow::new(vec![x])?, *terms)
                }
            })?;
            let model = kernel.joint_distribution(&ScaledWindow::new(s.clone())?, *terms)?;
            let freq = sample.joint_frequency(s);
            let sigma = (model * (1.0 - model) / *samples as f64).sqrt();
            let joint_ok = (freq - model).abs() <= 3.0 * sigma;
            let verdict = if *samples < REPORT_ONLY_SAMPLES {
                "report-only"
            } else if ks.statistic < *tol && joint_ok {
                "pass"
            } else {
                "fail"
            };
            let mut t = header(cli, &["s", "empirical", "model"]);
            t.meta("seed", cli.seed)
                .meta("stream", cli.stream)
                .meta("n", *n)
                .meta("w", *w)
                .meta("m", spec.m)
                .meta("samples", *samples)
                .meta("centring", if *centring == Centring::Size { "size" } else { "pairs" })
                .meta("centre", sample.lattice.centre)
                .meta("scale", sample.lattice.scale)
                .meta("terms", *terms)
                .meta("ks", ks.statistic)
                .meta("ks_at", ks.at)
                .meta("ks_tol", *tol)
                .meta("joint_thresholds", join_reals(s))
                .meta("joint_empirical", freq)
                .meta("joint_model", model)
                .meta("joint_sigma", sigma)
                .meta("verdict", verdict);
            for (x, e, f) in ks.points {
                t.row(vec![x.into(), e.into(), f.into()]);
            }
            Ok(t)
        }
        Command::Depoissonize { poisson_q, w, samples } => {
            let r = depoissonization_compare(*poisson_q, *w, *samples, stream)?;
            let mut t = header(cli, &["s", "fixed", "poissonized"]);
            t.meta("seed", cli.seed)
                .meta("stream", cli.stream)
                .meta("poisson_q", *poisson_q)
                .meta("w", *w)
                .meta("samples", *samples)
                .meta("fixed_n", r.fixed_n)
                .meta("fixed_m", r.fixed_m)
                .meta("max_discrepancy", r.max_discrepancy);
            for (x, a, b) in r.grid {
                t.row(vec![x.into(), a.into(), b.into()]);
            }
            Ok(t)
        }
    }
}
