//! Python bindings: `Shape` plus the kernel constants, limit extrapolation
//! and the acceptance suite.

use poisson_heat::acceptance::{run_acceptance, Target};
use poisson_heat::asymptotics::{self, dyadic_t_grid};
use poisson_heat::quadrature::extrapolate_limit as fit_limit;
use poisson_heat::{kernel, mc, shapes, Dim, Error, QuadSpec, ShapeSpec};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn dim(d: usize) -> PyResult<Dim> {
    Dim::new(d).map_err(to_py)
}

fn quad(tol: f64) -> PyResult<QuadSpec> {
    let q = QuadSpec::with_tol(tol);
    q.validate().map_err(to_py)?;
    Ok(q)
}

/// A bounded convex set: unit ball, rectangle, convex polygon or interval.
#[pyclass(module = "poisson_heat", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct Shape {
    inner: ShapeSpec,
}

#[pymethods]
impl Shape {
    #[staticmethod]
    fn ball(d: usize) -> PyResult<Shape> {
        Ok(Shape {
            inner: ShapeSpec::unit_ball(d).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn square() -> Shape {
        Shape {
            inner: ShapeSpec::square(),
        }
    }

    #[staticmethod]
    fn rectangle(h1: f64, h2: f64) -> PyResult<Shape> {
        Ok(Shape {
            inner: ShapeSpec::rectangle(h1, h2).map_err(to_py)?,
        })
    }

    /// Counterclockwise vertices of a convex polygon.
    #[staticmethod]
    fn polygon(vertices: Vec<(f64, f64)>) -> PyResult<Shape> {
        let pts = vertices.into_iter().map(|(x, y)| [x, y]).collect();
        Ok(Shape {
            inner: ShapeSpec::polygon(pts).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn interval(a: f64, b: f64) -> PyResult<Shape> {
        Ok(Shape {
            inner: ShapeSpec::interval(a, b).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Shape> {
        Ok(Shape {
            inner: ShapeSpec::from_json(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim().get()
    }

    fn __repr__(&self) -> String {
        format!("Shape({})", self.inner.label())
    }

    /// volume, perimeter and support radius.
    fn geometry<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let g = self.inner.geometry();
        let d = PyDict::new(py);
        d.set_item("volume", g.volume)?;
        d.set_item("perimeter", g.perimeter)?;
        d.set_item("support_radius", g.support_radius)?;
        d.set_item("dim", g.dim.get())?;
        Ok(d)
    }

    fn covariance(&self, y: Vec<f64>) -> PyResult<f64> {
        shapes::covariance(&self.inner, &y).map_err(to_py)
    }

    #[pyo3(signature = (s, tol = 1e-10))]
    fn gamma(&self, s: f64, tol: f64) -> PyResult<f64> {
        shapes::gamma(&self.inner, s, &quad(tol)?).map_err(to_py)
    }

    /// ∫_0^1 s⁻¹ γ(ℓs) ds with the integrability diagnostic.
    #[pyo3(signature = (tol = 1e-10))]
    fn gamma_integral<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let gi = shapes::gamma_weighted_integral(&self.inner, &quad(tol)?).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("value", gi.value)?;
        d.set_item("err", gi.err)?;
        d.set_item("integrable", gi.integrable)?;
        d.set_item("closed_form", gi.closed_form)?;
        Ok(d)
    }

    #[pyo3(signature = (t, tol = 1e-10))]
    fn heat_content(&self, t: f64, tol: f64) -> PyResult<f64> {
        asymptotics::heat_content(&self.inner, t, &quad(tol)?).map_err(to_py)
    }

    /// H, phi, psi, F, R, residual and D at one t.
    #[pyo3(signature = (t, tol = 1e-10))]
    fn decomposition<'py>(&self, py: Python<'py>, t: f64, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let b = asymptotics::decomposition(&self.inner, t, &quad(tol)?).map_err(to_py)?;
        let d = PyDict::new(py);
        for (k, v) in [
            ("t", b.t),
            ("H", b.h),
            ("phi", b.phi),
            ("psi", b.psi),
            ("F", b.f),
            ("R", b.r),
            ("residual", b.residual),
            ("D", b.d),
        ] {
            d.set_item(k, v)?;
        }
        Ok(d)
    }

    /// Closed-form and extrapolated third-order constant on t = 2^-k.
    #[pyo3(signature = (k_min = 4, k_max = 16, tol = 1e-10))]
    fn third_term<'py>(
        &self,
        py: Python<'py>,
        k_min: i32,
        k_max: i32,
        tol: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let grid = dyadic_t_grid(k_min, k_max);
        let rep = asymptotics::third_term(&self.inner, &quad(tol)?, &grid).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("C_formula", rep.c_formula)?;
        d.set_item("C_closed", rep.c_closed)?;
        d.set_item("C_extrapolated", rep.c_extrapolated)?;
        d.set_item("extrapolation_err", rep.extrapolation_err)?;
        d.set_item("observed_order", rep.fit.observed_order)?;
        d.set_item("gamma_integral", rep.pieces.gamma_integral)?;
        d.set_item("F_limit", rep.pieces.f_limit)?;
        d.set_item("phi_slope", rep.pieces.phi_slope)?;
        d.set_item("samples", rep.samples)?;
        Ok(d)
    }

    /// (mean, stderr) of the Monte Carlo heat content.
    fn mc_heat_content(&self, t: f64, n: u64, seed: u64) -> PyResult<(f64, f64)> {
        let e = mc::mc_heat_content(&self.inner, t, n, seed).map_err(to_py)?;
        Ok((e.mean, e.stderr))
    }

    /// (mean, stderr) of the Monte Carlo covariance.
    fn mc_covariance(&self, y: Vec<f64>, n: u64, seed: u64) -> PyResult<(f64, f64)> {
        let e = mc::mc_covariance(&self.inner, &y, n, seed).map_err(to_py)?;
        Ok((e.mean, e.stderr))
    }
}

#[pyfunction]
fn kappa(d: usize) -> PyResult<f64> {
    Ok(kernel::kappa(dim(d)?))
}

#[pyfunction]
fn unit_ball_volume(d: usize) -> PyResult<f64> {
    Ok(kernel::unit_ball_volume(dim(d)?))
}

#[pyfunction]
fn unit_sphere_area(d: usize) -> PyResult<f64> {
    Ok(kernel::unit_sphere_area(dim(d)?))
}

#[pyfunction]
#[pyo3(signature = (d, tol = 1e-12))]
fn tanh_deficit(d: usize, tol: f64) -> PyResult<f64> {
    kernel::tanh_deficit(dim(d)?, tol).map_err(to_py)
}

#[pyfunction]
fn poisson_kernel(d: usize, t: f64, x: Vec<f64>) -> PyResult<f64> {
    kernel::poisson_kernel(dim(d)?, t, &x).map_err(to_py)
}

/// Fit D(t) = C + a t ln(1/t) + b t; returns (C, a, b, err_estimate).
#[pyfunction]
fn extrapolate_limit(samples: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64, f64)> {
    let fit = fit_limit(&samples).map_err(to_py)?;
    Ok((fit.c, fit.coeff_tlogt, fit.coeff_t, fit.err_estimate))
}

/// Run acceptance criteria; returns [(id, name, passed)].
#[pyfunction]
#[pyo3(signature = (target = "all"))]
fn verify(target: &str) -> PyResult<Vec<(u8, String, bool)>> {
    let target: Target = target.parse().map_err(to_py)?;
    Ok(run_acceptance(target, &QuadSpec::default())
        .into_iter()
        .map(|r| (r.id, r.name, r.passed))
        .collect())
}

#[pymodule]
#[pyo3(name = "poisson_heat")]
fn poisson_heat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Shape>()?;
    m.add_function(wrap_pyfunction!(kappa, m)?)?;
    m.add_function(wrap_pyfunction!(unit_ball_volume, m)?)?;
    m.add_function(wrap_pyfunction!(unit_sphere_area, m)?)?;
    m.add_function(wrap_pyfunction!(tanh_deficit, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(extrapolate_limit, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
