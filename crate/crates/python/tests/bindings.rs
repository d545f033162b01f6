use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: FnOnce(Python<'_>, &Bound<'_, PyDict>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let module = pyo3::wrap_pymodule!(ham_eigen_py::ham_eigen_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("he", module).unwrap();
        f(py, &globals);
    });
}

fn eval(py: Python<'_>, globals: &Bound<'_, PyDict>, code: &str) -> String {
    let code = std::ffi::CString::new(code).unwrap();
    py.eval(&code, Some(globals), None).unwrap().extract().unwrap()
}

#[test]
fn solve_from_python() {
    with_module(|py, g| {
        let e = eval(py, g, "he.Solver(40).solve('0.01', '-3/4', 8, 40).e_partial[1]");
        assert!(e.starts_with("0.507303125"), "{e}");
    });
}

#[test]
fn oracle_from_python() {
    with_module(|py, g| {
        let e = eval(py, g, "he.Solver(50).oracle('0.05', 40)[0]");
        assert!(e.starts_with("0.53264275477185884443"), "{e}");
    });
}

#[test]
fn bad_configuration_raises_value_error() {
    with_module(|py, g| {
        let code = c"
try:
    he.Solver(40).solve('0.01', '0', 4, 40)
    kind = 'none'
except ValueError:
    kind = 'value'
";
        py.run(code, Some(g), None).unwrap();
        let kind: String = g.get_item("kind").unwrap().unwrap().extract().unwrap();
        assert_eq!(kind, "value");
    });
}

#[test]
fn low_precision_is_rejected() {
    with_module(|py, g| {
        let err = py.eval(c"he.Solver(10)", Some(g), None).unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}
