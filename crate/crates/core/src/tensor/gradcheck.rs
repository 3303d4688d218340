//! Central finite-difference oracle for tape gradients.

use super::{Tape, Tensor, Var};
use crate::error::Result;

/// Outcome of comparing analytic gradients with central differences.
#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    /// Largest relative error over all checked entries.
    pub max_rel_error: f64,
    pub entries: usize,
}

impl GradCheck {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }

    pub fn merge(self, other: GradCheck) -> GradCheck {
        GradCheck {
            max_rel_error: self.max_rel_error.max(other.max_rel_error),
            entries: self.entries + other.entries,
        }
    }
}

/// `|a - n| / max(|a|, |n|, floor)`; the floor keeps near-zero gradients from
/// turning round-off into large relative errors.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    const FLOOR: f64 = 1e-3;
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR)
}

/// Checks every entry of every input of the scalar function `f`.
///
/// `f` receives a fresh tape and one variable per input; it must return a
/// scalar node. Analytic gradients come from one backward pass, numeric ones
/// from `(f(x+h) - f(x-h)) / 2h` evaluated on constant-only tapes.
pub fn check<F>(inputs: &[Tensor], step: f64, f: F) -> Result<GradCheck>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.param(t.clone())).collect();
    let out = f(&mut tape, &vars)?;
    tape.backward(out)?;
    let analytic: Vec<Tensor> = vars
        .iter()
        .zip(inputs)
        .map(|(v, t)| tape.grad(*v).cloned().unwrap_or_else(|| Tensor::zeros(t.shape())))
        .collect();

    let eval = |values: &[Tensor]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values.iter().map(|t| tape.constant(t.clone())).collect();
        let out = f(&mut tape, &vars)?;
        Ok(tape.value(out).item())
    };

    let mut worst = 0.0f64;
    let mut entries = 0;
    let mut probe = inputs.to_vec();
    for (k, input) in inputs.iter().enumerate() {
        for idx in 0..input.len() {
            let base = input.data()[idx];
            probe[k].data_mut()[idx] = base + step;
            let plus = eval(&probe)?;
            probe[k].data_mut()[idx] = base - step;
            let minus = eval(&probe)?;
            probe[k].data_mut()[idx] = base;
            let numeric = (plus - minus) / (2.0 * step);
            worst = worst.max(relative_error(analytic[k].data()[idx], numeric));
            entries += 1;
        }
    }
    Ok(GradCheck {
        max_rel_error: worst,
        entries,
    })
}
