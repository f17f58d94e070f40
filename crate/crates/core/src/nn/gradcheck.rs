use super::model::{Mode, Model};
use crate::error::Result;
use crate::label::Label;

const STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// max |a - n| / max(|a| + |n|, 1e-8) over all parameters.
    pub max_rel_error: f64,
    /// max |a - n| over all parameters.
    pub max_abs_error: f64,
    pub parameters: usize,
}

/// Compares backpropagated gradients of the weighted loss against central
/// finite differences on every parameter. Dropout is not applied.
pub fn grad_check(model: &Model, x: &[f64], labels: &[Label], weights: [f64; 2]) -> Result<GradCheckReport> {
    let (_, analytic) = model.loss_and_grad(x, labels, weights, Mode::Infer)?;
    let analytic = analytic.flat();

    let mut probe = model.clone();
    let eval = |m: &Model| -> Result<f64> { Ok(m.loss_and_grad(x, labels, weights, Mode::Infer)?.0) };
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        parameters: analytic.len(),
    };
    for (i, a) in analytic.iter().enumerate() {
        let original = *probe.param_mut(i);
        *probe.param_mut(i) = original + STEP;
        let plus = eval(&probe)?;
        *probe.param_mut(i) = original - STEP;
        let minus = eval(&probe)?;
        *probe.param_mut(i) = original;

        let numeric = (plus - minus) / (2.0 * STEP);
        let abs = (a - numeric).abs();
        let rel = abs / (a.abs() + numeric.abs()).max(1e-8);
        report.max_abs_error = report.max_abs_error.max(abs);
        report.max_rel_error = report.max_rel_error.max(rel);
    }
    Ok(report)
}
