//! Rank-factored second-order attention.
//!
//! A degree-3 weight tensor `T = Σ_r W[:,r] ⊗ U[r,:] ⊗ V[r,:]` maps a token
//! `x` and a context `c` to one weight per component,
//! `α̃ = W (U x ∗ V c)`. Weights are then normalized over the tokens of the
//! document separately for every component and used to average the tokens.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tensor::{Tape, Tensor, Var};

/// One `(U, V, W)` triple: `U, V ∈ ℝ^{u×m}`, `W ∈ ℝ^{m×u}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionStep {
    pub u: Tensor,
    pub v: Tensor,
    pub w: Tensor,
}

impl AttentionStep {
    pub fn new(u: Tensor, v: Tensor, w: Tensor) -> Result<Self> {
        let ok = u.rank() == 2
            && v.shape() == u.shape()
            && w.rank() == 2
            && w.rows() == u.cols()
            && w.cols() == u.rows();
        if !ok {
            return Err(Error::shape("AttentionStep", u.shape(), w.shape()));
        }
        Ok(Self { u, v, w })
    }

    /// Glorot-uniform initialization.
    pub fn glorot<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (dim + rank) as f64).sqrt();
        Self {
            u: Tensor::uniform(&[rank, dim], -limit, limit, rng),
            v: Tensor::uniform(&[rank, dim], -limit, limit, rng),
            w: Tensor::uniform(&[dim, rank], -limit, limit, rng),
        }
    }

    pub fn rank(&self) -> usize {
        self.u.rows()
    }

    pub fn dim(&self) -> usize {
        self.u.cols()
    }

    pub fn parameter_count(&self) -> usize {
        3 * self.rank() * self.dim()
    }

    pub fn record(&self, tape: &mut Tape, trainable: bool) -> StepVars {
        let mut put = |t: &Tensor| {
            if trainable {
                tape.param(t.clone())
            } else {
                tape.constant(t.clone())
            }
        };
        StepVars {
            u: put(&self.u),
            v: put(&self.v),
            w: put(&self.w),
        }
    }
}

/// An [`AttentionStep`] placed on a tape.
#[derive(Clone, Copy, Debug)]
pub struct StepVars {
    pub u: Var,
    pub v: Var,
    pub w: Var,
}

/// `W (U x ∗ V c)` for a single token vector `x`.
pub fn candidate_weights(step: &AttentionStep, x: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    let mut tape = Tape::new();
    let vars = step.record(&mut tape, false);
    let x = tape.constant(Tensor::matrix(1, x.len(), x.to_vec())?);
    let c = tape.constant(Tensor::vector(c.to_vec()));
    let out = candidate_weights_on(&mut tape, vars, x, c)?;
    Ok(tape.value(out).data().to_vec())
}

/// Candidate weights for all tokens at once: rows of `[n × m]` `tokens`
/// against context `c [m]`, giving `[n × m]`.
pub fn candidate_weights_on(tape: &mut Tape, step: StepVars, tokens: Var, c: Var) -> Result<Var> {
    let projected = tape.matmul_nt(tokens, step.u)?;
    let query = tape.matvec(step.v, c)?;
    candidate_weights_from_projection(tape, step, projected, query)
}

/// Shared tail of the candidate-weight computation once `U x_i` (rows of
/// `projected`) and `V c` (`query`) are known.
fn candidate_weights_from_projection(
    tape: &mut Tape,
    step: StepVars,
    projected: Var,
    query: Var,
) -> Result<Var> {
    let z = tape.mul_rows(projected, query)?;
    tape.matmul_nt(z, step.w)
}

/// Output of one contextualization step.
#[derive(Clone, Copy, Debug)]
pub struct StepOutput {
    pub context: Var,
    pub weights: Var,
}

/// `c' = Σ_i softmax_i(α̃)_i ∗ x_i`.
pub fn contextualize_step_on(tape: &mut Tape, step: StepVars, tokens: Var, c: Var) -> Result<StepOutput> {
    let raw = candidate_weights_on(tape, step, tokens, c)?;
    aggregate(tape, raw, tokens)
}

fn aggregate(tape: &mut Tape, raw: Var, tokens: Var) -> Result<StepOutput> {
    let weights = tape.softmax_over_tokens(raw)?;
    let weighted = tape.hadamard(weights, tokens)?;
    let context = tape.sum_rows(weighted)?;
    Ok(StepOutput { context, weights })
}

/// One token-wise step: each token becomes the attender over all tokens
/// (itself included) and is replaced by its aggregate. `[n × m]` in and out.
pub fn token_wise_step_on(tape: &mut Tape, step: StepVars, tokens: Var) -> Result<Var> {
    let n = tape.value(tokens).rows();
    let projected = tape.matmul_nt(tokens, step.u)?;
    let queries = tape.matmul_nt(tokens, step.v)?;
    let mut rows = Vec::with_capacity(n);
    for t in 0..n {
        let query = tape.row(queries, t)?;
        let raw = candidate_weights_from_projection(tape, step, projected, query)?;
        rows.push(aggregate(tape, raw, tokens)?.context);
    }
    tape.stack_rows(&rows)
}

/// Value-level convenience: one step applied to a token matrix.
pub fn contextualize_step(step: &AttentionStep, tokens: &Tensor, c: &[f64]) -> Result<(Vec<f64>, Tensor)> {
    if tokens.rank() != 2 || tokens.cols() != step.dim() || c.len() != step.dim() {
        return Err(Error::shape("contextualize_step", tokens.shape(), &[c.len()]));
    }
    let mut tape = Tape::new();
    let vars = step.record(&mut tape, false);
    let x = tape.constant(tokens.clone());
    let c = tape.constant(Tensor::vector(c.to_vec()));
    let out = contextualize_step_on(&mut tape, vars, x, c)?;
    Ok((
        tape.value(out.context).data().to_vec(),
        tape.value(out.weights).clone(),
    ))
}
