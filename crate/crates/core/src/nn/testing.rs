//! Assertion wrappers around the finite-difference oracle.

use super::gradcheck::check_tensor;
pub use super::gradcheck::random_tensor;
use super::tensor::Tensor;

pub fn check_gradients(x: &Tensor, analytic: &Tensor, f: impl Fn(&Tensor) -> f64) {
    check_gradients_tol(x, analytic, f, super::gradcheck::TOLERANCE)
}

pub fn check_gradients_tol(x: &Tensor, analytic: &Tensor, f: impl Fn(&Tensor) -> f64, tol: f64) {
    let m = check_tensor(x, analytic, f);
    assert!(
        m.relative_error <= tol,
        "element {}: analytic {}, numeric {}, rel {:.3e}",
        m.index,
        m.analytic,
        m.numeric,
        m.relative_error
    );
}
