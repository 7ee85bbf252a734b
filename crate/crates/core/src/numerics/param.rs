use std::cell::RefCell;
use std::rc::Rc;

use crate::numerics::Tensor;
use crate::{Error, Result};

struct ParamInner {
    name: String,
    value: Tensor,
    grad: Tensor,
    adam_m: Tensor,
    adam_v: Tensor,
    step_count: u64,
}

/// Trainable tensor with its gradient accumulator and Adam state.
///
/// Cheap to clone: clones share the same underlying storage. One training
/// worker owns a parameter set at a time; tapes record parameter values by
/// copy so concurrent read-only forward passes over a snapshot stay valid.
#[derive(Clone)]
pub struct Parameter {
    inner: Rc<RefCell<ParamInner>>,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Tensor) -> Self {
        let name = name.into();
        debug_assert!(
            !name.chars().any(char::is_whitespace),
            "parameter names must not contain whitespace (checkpoint manifest)"
        );
        let (r, c) = value.shape();
        Parameter {
            inner: Rc::new(RefCell::new(ParamInner {
                name,
                value,
                grad: Tensor::zeros(r, c),
                adam_m: Tensor::zeros(r, c),
                adam_v: Tensor::zeros(r, c),
                step_count: 0,
            })),
        }
    }

    pub fn name(&self) -> String {
        self.inner.borrow().name.clone()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.borrow().value.shape()
    }

    /// Snapshot of the current value.
    pub fn value(&self) -> Tensor {
        self.inner.borrow().value.clone()
    }

    pub fn set_value(&self, value: Tensor) -> Result<()> {
        let mut inner = self.inner.borrow_mut();
        if value.shape() != inner.value.shape() {
            return Err(Error::ShapeMismatch {
                op: "set_value",
                lhs: inner.value.shape_str(),
                rhs: value.shape_str(),
            });
        }
        inner.value = value;
        Ok(())
    }

    /// Snapshot of the accumulated gradient.
    pub fn grad(&self) -> Tensor {
        self.inner.borrow().grad.clone()
    }

    pub fn zero_grad(&self) {
        self.inner.borrow_mut().grad.fill(0.0);
    }

    pub fn add_to_grad(&self, delta: &Tensor) {
        let mut inner = self.inner.borrow_mut();
        debug_assert_eq!(inner.grad.shape(), delta.shape());
        for (g, d) in inner.grad.data_mut().iter_mut().zip(delta.data()) {
            *g += *d;
        }
    }

    pub fn step_count(&self) -> u64 {
        self.inner.borrow().step_count
    }

    pub fn get_flat(&self, i: usize) -> f64 {
        self.inner.borrow().value.data()[i]
    }

    pub fn set_flat(&self, i: usize, v: f64) {
        self.inner.borrow_mut().value.data_mut()[i] = v;
    }

    pub fn same_storage(&self, other: &Parameter) -> bool {
        Rc::ptr_eq(&self.inner, &other.inner)
    }

    /// One Adam update with bias correction. Gradients are left untouched;
    /// the caller zeroes them.
    pub(crate) fn adam_update(&self, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Result<()> {
        let mut inner = self.inner.borrow_mut();
        if !inner.grad.is_finite() {
            return Err(Error::NonFiniteGrad { param: inner.name.clone() });
        }
        inner.step_count += 1;
        let t = inner.step_count as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        let ParamInner { value, grad, adam_m, adam_v, .. } = &mut *inner;
        for i in 0..grad.len() {
            let g = grad.data()[i];
            let m = beta1 * adam_m.data()[i] + (1.0 - beta1) * g;
            let v = beta2 * adam_v.data()[i] + (1.0 - beta2) * g * g;
            adam_m.data_mut()[i] = m;
            adam_v.data_mut()[i] = v;
            let m_hat = m / bc1;
            let v_hat = v / bc2;
            value.data_mut()[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

impl std::fmt::Debug for Parameter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let inner = self.inner.borrow();
        write!(f, "Parameter({}, {})", inner.name, inner.value.shape_str())
    }
}
