use crate::numerics::Parameter;
use crate::{Error, Result};

/// Adam defaults; the configuration only exposes the learning rate.
pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// One Adam update over a parameter group. Each parameter uses its own
/// step count for bias correction, so groups can be stepped at different
/// cadences. Gradients are not zeroed here.
pub fn adam_step(params: &[Parameter], lr: f64, beta1: f64, beta2: f64, eps: f64) -> Result<()> {
    if lr <= 0.0 {
        return Err(Error::invalid("adam_step", format!("learning rate must be positive, got {lr}")));
    }
    for p in params {
        p.adam_update(lr, beta1, beta2, eps)?;
    }
    Ok(())
}

pub fn zero_grads(params: &[Parameter]) {
    for p in params {
        p.zero_grad();
    }
}
