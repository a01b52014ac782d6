use pyo3::prelude::*;
use pyo3::types::PyModule;

fn with_module<F: FnOnce(&Bound<'_, PyModule>) -> PyResult<()>>(f: F) {
    Python::attach(|py| {
        let m = PyModule::new(py, "pyusadi").unwrap();
        pyusadi::pyusadi(&m).unwrap();
        f(&m).unwrap();
    });
}

#[test]
fn solves_mixed_problem() {
    with_module(|m| {
        let kw = pyo3::types::PyDict::new(m.py());
        kw.set_item("left", ("dirichlet", "10*exp(-2)*cos(2*y)", None::<f64>))?;
        kw.set_item("right", ("neumann", "20*exp(2)*cos(2*y)", None::<f64>))?;
        kw.set_item("bottom", ("dirichlet", "10*cos(-2)*exp(2*x)", None::<f64>))?;
        kw.set_item("top", ("robin", "(10*cos(2) - 20*sin(2))*exp(2*x)", Some(1.0)))?;
        let sol = m.getattr("solve")?.call(("0",), Some(&kw))?;
        let v: f64 = sol.call1((0.3, -0.4))?.extract()?;
        let exact = 10.0 * (0.6f64).exp() * (-0.8f64).cos();
        assert!((v - exact).abs() < 1e-10);
        let json: String = sol.call_method0("report_json")?.extract()?;
        assert!(json.contains("\"final_n\""));
        Ok(())
    });
}

#[test]
fn errors_map_to_python_exceptions() {
    with_module(|m| {
        let err = m.getattr("solve")?.call1(("1 +",)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(m.py()));
        let err = m.getattr("dirichlet2_bounds")?.call1((5,)).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(m.py()));
        let (lo, hi): (f64, f64) = m.getattr("dirichlet2_bounds")?.call1((16,))?.extract()?;
        assert!(lo < hi && hi < 0.0);
        Ok(())
    });
}
