use crate::numerics::{NodeId, Parameter, Tape};
use crate::{Error, Result};

/// Compares the taped gradient of `f` with central finite differences,
/// coordinate by coordinate, and returns the worst relative error
/// `|analytic - numeric| / max(1e-8, |analytic| + |numeric|)`.
///
/// `f` must be deterministic: it is re-evaluated `2 * len + 1` times under
/// coordinate perturbations of `param`. The parameter is restored before
/// returning.
pub fn finite_difference_check<F>(mut f: F, param: &Parameter, h: f64) -> Result<f64>
where
    F: FnMut(&mut Tape) -> Result<NodeId>,
{
    if h <= 0.0 {
        return Err(Error::invalid("finite_difference_check", format!("step must be positive, got {h}")));
    }

    param.zero_grad();
    let mut tape = Tape::new();
    let loss = f(&mut tape)?;
    tape.backward(loss)?;
    let analytic = param.grad();

    let eval = |f: &mut F| -> Result<f64> {
        let mut tape = Tape::new();
        let loss = f(&mut tape)?;
        tape.value(loss).scalar_value()
    };

    let mut max_err = 0.0f64;
    for i in 0..analytic.len() {
        let orig = param.get_flat(i);
        param.set_flat(i, orig + h);
        let plus = eval(&mut f);
        param.set_flat(i, orig - h);
        let minus = eval(&mut f);
        param.set_flat(i, orig);
        let numeric = (plus? - minus?) / (2.0 * h);
        let a = analytic.data()[i];
        let err = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
        max_err = max_err.max(err);
    }
    param.zero_grad();
    Ok(max_err)
}
