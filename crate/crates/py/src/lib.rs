//! Python bindings: weights, the walk, stopped profiles, the auxiliary
//! chains and the limit formulas. Long computations release the GIL.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use selfrepel_core::aux_chain::{self, EtaKernel, DEFAULT_TRUNCATION};
use selfrepel_core::limit_lab;
use selfrepel_core::ray_knight::{self, InverseLocalTimeQuery};
use selfrepel_core::{Error, Sign, WalkState, WeightFunction};
use selfrepel_suite as suite;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidWeight(_) | Error::InvalidParameter { .. } | Error::EnumerationTooLarge { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_sign(s: &str) -> PyResult<Sign> {
    s.parse().map_err(to_py)
}

/// Monotone weight `w`, either `base^k` or a table with geometric tails.
#[pyclass(name = "Weight", module = "selfrepel", frozen)]
struct PyWeight {
    inner: WeightFunction,
}

#[pymethods]
impl PyWeight {
    #[staticmethod]
    fn exponential(base: f64) -> PyResult<Self> {
        let inner = WeightFunction::exponential(base).map_err(to_py)?;
        inner.ensure_valid(WeightFunction::DEFAULT_RANGE).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Values `w(min_arg), w(min_arg + 1), ...` extended by `tail_ratio`.
    #[staticmethod]
    fn table(min_arg: i64, values: Vec<f64>, tail_ratio: f64) -> PyResult<Self> {
        let inner = WeightFunction::table(min_arg, &values, tail_ratio).map_err(to_py)?;
        inner.ensure_valid(WeightFunction::DEFAULT_RANGE).map_err(to_py)?;
        Ok(Self { inner })
    }

    fn __call__(&self, z: i64) -> f64 {
        self.inner.w(z)
    }

    fn log_w(&self, z: i64) -> f64 {
        self.inner.log_w(z)
    }

    /// Probability of a right step when `ℓ⁺ - ℓ⁻ = delta` at the current site.
    fn step_probability_right(&self, delta: i64) -> f64 {
        self.inner.step_probability_right(delta)
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    fn __repr__(&self) -> String {
        format!("Weight({})", self.inner.label())
    }
}

/// One walk with its oriented local-time field.
#[pyclass(name = "Walk", module = "selfrepel")]
struct PyWalk {
    state: WalkState,
}

#[pymethods]
impl PyWalk {
    #[new]
    #[pyo3(signature = (seed, replicate = 0))]
    fn new(seed: u64, replicate: u64) -> Self {
        Self {
            state: WalkState::new(seed, replicate),
        }
    }

    fn step(&mut self, weight: &PyWeight) -> i64 {
        self.state.advance(&weight.inner)
    }

    /// Advances `steps` steps and returns the visited positions.
    fn run(&mut self, py: Python<'_>, weight: &PyWeight, steps: u64) -> Vec<i64> {
        let state = &mut self.state;
        py.detach(|| {
            let mut path = Vec::with_capacity(steps as usize);
            state.run_with(&weight.inner, steps, |_, x| path.push(x));
            path
        })
    }

    #[getter]
    fn position(&self) -> i64 {
        self.state.position()
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.state.steps()
    }

    fn ell_plus(&self, k: i64) -> u64 {
        self.state.field().ell_plus(k)
    }

    fn ell_minus(&self, k: i64) -> u64 {
        self.state.field().ell_minus(k)
    }

    /// Crossings of the edge `<k, k+1>`.
    fn local_time(&self, k: i64) -> u64 {
        self.state.field().unoriented_local_time(k)
    }

    /// `[(k, ℓ⁺(k), ℓ⁻(k)), ...]` over the visited sites.
    fn field(&self) -> Vec<(i64, u64, u64)> {
        self.state.field().rows()
    }

    /// Raises if `ℓ⁺(k) - ℓ⁻(k+1)` differs from the gradient sign anywhere.
    fn check_identity(&self) -> PyResult<()> {
        self.state
            .check_gradient_identity()
            .map_err(|v| PyRuntimeError::new_err(format!("{v:?}")))
    }
}

/// Local-time profile `Λ` stopped at an inverse local time.
#[pyclass(name = "Profile", module = "selfrepel", frozen)]
struct PyProfile {
    j: i64,
    r: u64,
    sign: Sign,
    lambda: ray_knight::LocalTimeProfile,
    oriented: ray_knight::OrientedProfile,
}

#[pymethods]
impl PyProfile {
    #[getter]
    fn stopping_time(&self) -> u64 {
        self.lambda.stopping_time
    }

    #[getter]
    fn edges(&self) -> (i64, i64) {
        (self.lambda.lambda_edge, self.lambda.rho_edge)
    }

    #[getter]
    fn peak(&self) -> u64 {
        self.lambda.peak()
    }

    /// `Λ(k)`: crossings of `<k, k+1>`.
    fn value(&self, k: i64) -> u64 {
        self.lambda.get(k)
    }

    /// Oriented local time `L(k)`.
    fn oriented(&self, k: i64) -> u64 {
        self.oriented.get(k)
    }

    fn values(&self) -> BTreeMap<i64, u64> {
        self.lambda.iter().collect()
    }

    /// `sup_y |A⁻¹Λ(Ay) - (|x| - |y| + 2h)₊|`.
    fn deviation(&self, a: f64, x: f64, h: f64) -> f64 {
        ray_knight::rescaled_deviation(&self.lambda, a, x, h)
    }

    fn __repr__(&self) -> String {
        format!(
            "Profile(j={}, r={}, sign='{}', T={})",
            self.j, self.r, self.sign, self.lambda.stopping_time
        )
    }
}

/// Runs until the `r`-th jump from `j` in direction `sign`. With
/// `route="eta"` the profile is built from the auxiliary chains instead.
#[pyfunction]
#[pyo3(signature = (weight, j, r, sign = "+", seed = 0, replicate = 0, route = "direct", cap = None))]
#[allow(clippy::too_many_arguments)]
fn stopped_profile(
    py: Python<'_>,
    weight: &PyWeight,
    j: i64,
    r: u64,
    sign: &str,
    seed: u64,
    replicate: u64,
    route: &str,
    cap: Option<u64>,
) -> PyResult<PyProfile> {
    let sign = parse_sign(sign)?;
    let q = InverseLocalTimeQuery::new(j, r, sign).map_err(to_py)?;
    let w = &weight.inner;
    let (lambda, oriented) = match route {
        "direct" => py
            .detach(|| ray_knight::run_to_inverse_local_time(w, q, seed, replicate, cap.unwrap_or(q.default_cap())))
            .map(|run| (run.profile, run.oriented))
            .map_err(to_py)?,
        "eta" => py
            .detach(|| ray_knight::eta_driven_profile(w, q, seed, replicate, cap.unwrap_or(1 << 32)))
            .map_err(to_py)?,
        other => return Err(PyValueError::new_err(format!("route must be 'direct' or 'eta', got '{other}'"))),
    };
    Ok(PyProfile {
        j,
        r,
        sign,
        lambda,
        oriented,
    })
}

/// Stationary law `ρ` of the η chain as `{x: ρ(x)}`.
#[pyfunction]
#[pyo3(signature = (weight, tolerance = 1e-300))]
fn stationary_rho(weight: &PyWeight, tolerance: f64) -> PyResult<BTreeMap<i64, f64>> {
    let rho = aux_chain::stationary_rho(&weight.inner, tolerance).map_err(to_py)?;
    Ok(rho.iter().collect())
}

/// Row `P(x, ·)` of the η kernel as `{y: P(x, y)}`.
#[pyfunction]
fn eta_kernel_row(weight: &PyWeight, x: i64) -> PyResult<BTreeMap<i64, f64>> {
    let k = EtaKernel::build_covering(&weight.inner, x, x, DEFAULT_TRUNCATION).map_err(to_py)?;
    let (lo, _) = k.window();
    let row = k.row(x).ok_or_else(|| PyValueError::new_err("x outside the kernel window"))?;
    Ok(row
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| (lo + i as i64, p))
        .collect())
}

/// Exact `[TV(P^m(0,·), ρ) for m in 0..=m_max]`.
#[pyfunction]
fn tv_decay(weight: &PyWeight, m_max: usize) -> PyResult<Vec<f64>> {
    let w = &weight.inner;
    let rho = aux_chain::stationary_rho(w, 1e-300).map_err(to_py)?;
    let (lo, hi) = rho.support();
    let k = EtaKernel::build_covering(w, lo, hi, DEFAULT_TRUNCATION).map_err(to_py)?;
    let curve = aux_chain::tv_decay_curve(&k, &rho, m_max).map_err(to_py)?;
    Ok(curve.into_iter().map(|p| p.tv).collect())
}

/// Coalescence times of coupled η chains started from `ρ`; `None` if the
/// pair had not met after `cap` steps.
#[pyfunction]
#[pyo3(signature = (weight, pairs, seed = 0, cap = 100_000))]
fn coalescence_times(py: Python<'_>, weight: &PyWeight, pairs: u64, seed: u64, cap: u64) -> PyResult<Vec<Option<u64>>> {
    let w = &weight.inner;
    py.detach(|| {
        let rho = aux_chain::stationary_rho(w, 1e-300)?;
        aux_chain::coalescence_times(w, &rho, seed, pairs, cap)
    })
    .map_err(to_py)
}

/// Mean hitting time of zero from `L(0) = r`, one entry per `r`.
#[pyfunction]
#[pyo3(signature = (weight, r_values, replicates = 1000, seed = 0, cap = 1 << 24))]
fn mean_hitting_times(
    py: Python<'_>,
    weight: &PyWeight,
    r_values: Vec<u64>,
    replicates: u64,
    seed: u64,
    cap: u64,
) -> PyResult<Vec<f64>> {
    let w = &weight.inner;
    let rows = py
        .detach(|| aux_chain::hitting_time_experiment(w, &r_values, replicates, seed, cap))
        .map_err(to_py)?;
    Ok(rows.into_iter().map(|r| r.mean_tau).collect())
}

/// Exact law of `X(n)` by path enumeration, `{k: P(X(n) = k)}`.
#[pyfunction]
fn position_law(py: Python<'_>, weight: &PyWeight, n: u64) -> PyResult<BTreeMap<i64, f64>> {
    let w = &weight.inner;
    py.detach(|| limit_lab::brute_force_distribution(w, n)).map_err(to_py)
}

/// Largest error of the first-passage decomposition of the position law
/// over `1 <= n <= n_max`.
#[pyfunction]
fn starteq_error(py: Python<'_>, weight: &PyWeight, n_max: u64) -> PyResult<f64> {
    let w = &weight.inner;
    py.detach(|| limit_lab::identity_starteq_check(w, n_max))
        .map(|r| r.max_error)
        .map_err(to_py)
}

#[pyfunction]
fn tent(x: f64, y: f64, h: f64) -> f64 {
    ray_knight::tent(x, y, h)
}

#[pyfunction]
fn t_limit(x: f64, h: f64) -> f64 {
    limit_lab::t_limit(x, h)
}

#[pyfunction]
fn phi_hat(s: f64, x: f64) -> f64 {
    limit_lab::phi_hat(s, x)
}

#[pyfunction]
fn phi_hat_cdf(s: f64, x: f64) -> f64 {
    limit_lab::phi_hat_cdf(s, x)
}

/// Runs one acceptance criterion; returns `{id, title, pass, summary, statistics}`.
#[pyfunction]
#[pyo3(signature = (id, seed = suite::DEFAULT_SEED))]
fn run_criterion<'py>(py: Python<'py>, id: u8, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let o = py.detach(|| suite::run_criterion(id, seed)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("id", o.id)?;
    d.set_item("title", o.title)?;
    d.set_item("pass", o.pass)?;
    d.set_item("summary", o.summary)?;
    d.set_item("statistics", o.statistics)?;
    Ok(d)
}

#[pymodule]
fn selfrepel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", selfrepel_core::VERSION)?;
    m.add_class::<PyWeight>()?;
    m.add_class::<PyWalk>()?;
    m.add_class::<PyProfile>()?;
    m.add_function(wrap_pyfunction!(stopped_profile, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_rho, m)?)?;
    m.add_function(wrap_pyfunction!(eta_kernel_row, m)?)?;
    m.add_function(wrap_pyfunction!(tv_decay, m)?)?;
    m.add_function(wrap_pyfunction!(coalescence_times, m)?)?;
    m.add_function(wrap_pyfunction!(mean_hitting_times, m)?)?;
    m.add_function(wrap_pyfunction!(position_law, m)?)?;
    m.add_function(wrap_pyfunction!(starteq_error, m)?)?;
    m.add_function(wrap_pyfunction!(tent, m)?)?;
    m.add_function(wrap_pyfunction!(t_limit, m)?)?;
    m.add_function(wrap_pyfunction!(phi_hat, m)?)?;
    m.add_function(wrap_pyfunction!(phi_hat_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
