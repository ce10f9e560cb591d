//! Runs python/smoke_test.py in an embedded interpreter with the module
//! registered in-process, so no wheel build is needed.

use std::ffi::CString;

use nncert_py::nncert_py;
use pyo3::prelude::*;
use pyo3::types::PyDict;

#[test]
fn python_smoke_script() {
    pyo3::append_to_inittab!(nncert_py);
    Python::initialize();
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../python/smoke_test.py");
    let source = std::fs::read_to_string(path).unwrap();
    Python::attach(|py| {
        let globals = PyDict::new(py);
        globals.set_item("__name__", "__main__").unwrap();
        let code = CString::new(source).unwrap();
        if let Err(e) = py.run(&code, Some(&globals), None) {
            e.print(py);
            panic!("smoke script failed");
        }
        py.run(c"import sys; sys.stdout.flush()", None, None).unwrap();
    });
}
