//! Self-checks shared by the CLI, the examples and the acceptance suite:
//! finite-difference gradient checks of every tape op and of a whole tiny
//! model, and the factored-attention oracle comparison.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::model::{candidate_weights, oracle, AttentionStep, ContextualizerModel, DefaultContext, ModelConfig, ModelVars, StepVars};
use crate::tensor::{gradient_check, GradCheck, Tape, Tensor, Var};

/// Central-difference step used by the suites.
pub const FD_STEP: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NamedCheck {
    pub name: String,
    pub max_rel_error: f64,
    pub entries: usize,
}

fn named(name: &str, c: GradCheck) -> NamedCheck {
    NamedCheck {
        name: name.to_string(),
        max_rel_error: c.max_rel_error,
        entries: c.entries,
    }
}

/// Reduces any tensor to a scalar with fixed random weights so every entry
/// of the op's output reaches the loss with a distinct coefficient.
fn project(tape: &mut Tape, x: Var, rng_seed: u64) -> Result<Var> {
    let shape = tape.value(x).shape().to_vec();
    if shape.is_empty() {
        return Ok(x);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let r = tape.constant(Tensor::uniform(&shape, -1.0, 1.0, &mut rng));
    let h = tape.hadamard(x, r)?;
    Ok(tape.sum(h))
}

fn rand_t(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::uniform(shape, -1.0, 1.0, rng)
}

/// One check per differentiable tape op.
pub fn op_gradient_checks(seed: u64) -> Result<Vec<NamedCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let h = FD_STEP;

    let c = gradient_check(&[rand_t(&[3, 4], &mut rng), rand_t(&[4], &mut rng)], h, |t, v| {
        let y = t.matvec(v[0], v[1])?;
        project(t, y, 1)
    })?;
    out.push(named("matvec", c));

    let c = gradient_check(&[rand_t(&[3, 4], &mut rng), rand_t(&[4, 2], &mut rng)], h, |t, v| {
        let y = t.matmul(v[0], v[1])?;
        project(t, y, 2)
    })?;
    out.push(named("matmul", c));

    let c = gradient_check(&[rand_t(&[3, 4], &mut rng), rand_t(&[5, 4], &mut rng)], h, |t, v| {
        let y = t.matmul_nt(v[0], v[1])?;
        project(t, y, 3)
    })?;
    out.push(named("matmul_nt", c));

    let c = gradient_check(&[rand_t(&[3, 4], &mut rng), rand_t(&[3, 4], &mut rng)], h, |t, v| {
        let y = t.hadamard(v[0], v[1])?;
        project(t, y, 4)
    })?;
    out.push(named("hadamard", c));

    let c = gradient_check(&[rand_t(&[3, 4], &mut rng), rand_t(&[4], &mut rng)], h, |t, v| {
        let y = t.mul_rows(v[0], v[1])?;
        project(t, y, 5)
    })?;
    out.push(named("mul_rows", c));

    let c = gradient_check(&[rand_t(&[2, 3], &mut rng), rand_t(&[2, 3], &mut rng)], h, |t, v| {
        let y = t.add(v[0], v[1])?;
        project(t, y, 6)
    })?;
    out.push(named("add", c));

    let c = gradient_check(&[rand_t(&[2, 3], &mut rng)], h, |t, v| {
        let y = t.scale(v[0], -1.7);
        project(t, y, 7)
    })?;
    out.push(named("scale", c));

    let c = gradient_check(&[rand_t(&[5], &mut rng), rand_t(&[5], &mut rng)], h, |t, v| t.dot(v[0], v[1]))?;
    out.push(named("dot", c));

    let c = gradient_check(&[rand_t(&[2, 3], &mut rng)], h, |t, v| {
        let s = t.sum(v[0]);
        let sq = t.hadamard(s, s)?;
        Ok(sq)
    })?;
    out.push(named("sum", c));

    let c = gradient_check(&[rand_t(&[4, 3], &mut rng)], h, |t, v| {
        let y = t.sum_rows(v[0])?;
        project(t, y, 8)
    })?;
    out.push(named("sum_rows", c));

    let c = gradient_check(&[Tensor::uniform(&[4, 3], -2.0, 2.0, &mut rng)], h, |t, v| {
        let y = t.softmax_over_tokens(v[0])?;
        project(t, y, 9)
    })?;
    out.push(named("softmax_over_tokens", c));

    let c = gradient_check(&[rand_t(&[3], &mut rng), rand_t(&[3], &mut rng)], h, |t, v| {
        let y = t.stack_rows(&[v[0], v[1], v[0]])?;
        project(t, y, 10)
    })?;
    out.push(named("stack_rows", c));

    let c = gradient_check(&[rand_t(&[3, 2], &mut rng), rand_t(&[3, 4], &mut rng)], h, |t, v| {
        let y = t.concat_cols(v[0], v[1])?;
        project(t, y, 11)
    })?;
    out.push(named("concat_cols", c));

    let c = gradient_check(&[rand_t(&[3, 4], &mut rng)], h, |t, v| {
        let y = t.row(v[0], 1)?;
        project(t, y, 12)
    })?;
    out.push(named("row", c));

    for (name, target) in [("bce_with_logits(y=1)", 1.0), ("bce_with_logits(y=0)", 0.0)] {
        let c = gradient_check(&[Tensor::scalar(rng.gen_range(-3.0..3.0))], h, |t, v| t.bce_with_logits(v[0], target))?;
        out.push(named(name, c));
    }
    Ok(out)
}

/// Gradient check of the full loss of a tiny model with respect to every
/// parameter and every token vector: `n` tokens of size `dim`, rank
/// `rank`, `steps` steps.
pub fn end_to_end_gradient_check(
    n: usize,
    dim: usize,
    rank: usize,
    steps: usize,
    recurrent: bool,
    default_context: DefaultContext,
    seed: u64,
) -> Result<GradCheck> {
    let config = ModelConfig {
        dim,
        rank,
        steps,
        recurrent,
        default_context,
    };
    let mut model = ContextualizerModel::new(config, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    // Move off the initialization so c_d and the bias are not at special values.
    for p in model.parameters_mut() {
        for x in p.data_mut() {
            *x += rng.gen_range(-0.3..0.3);
        }
    }
    let tokens = rand_t(&[n, dim], &mut rng);
    let context = rand_t(&[dim], &mut rng);
    let mut inputs: Vec<Tensor> = model.parameters().into_iter().cloned().collect();
    inputs.push(tokens);
    let triples = model.steps().len();
    let learned = default_context == DefaultContext::Learned;

    gradient_check(&inputs, FD_STEP, |tape, v| {
        let steps = (0..triples)
            .map(|k| StepVars {
                u: v[3 * k],
                v: v[3 * k + 1],
                w: v[3 * k + 2],
            })
            .collect();
        let mut i = 3 * triples;
        let learned_context = learned.then(|| {
            i += 1;
            v[i - 1]
        });
        let vars = ModelVars {
            steps,
            learned_context,
            classifier_weight: v[i],
            classifier_bias: v[i + 1],
        };
        let tokens = v[i + 2];
        let c0 = match default_context {
            DefaultContext::Learned => vars.learned_context.unwrap(),
            DefaultContext::Ones => tape.constant(Tensor::ones(&[dim])),
            DefaultContext::Random => tape.constant(context.clone()),
        };
        let out = model.record_forward(tape, &vars, tokens, c0)?;
        tape.bce_with_logits(out.logit, 1.0)
    })
}

/// Largest absolute difference between the factored candidate weights and
/// an explicit degree-3 tensor contraction over `instances` random draws
/// with `u, m` in `1..=max_dim`.
pub fn factored_oracle_max_error(instances: usize, max_dim: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..instances {
        let m = rng.gen_range(1..=max_dim);
        let u = rng.gen_range(1..=max_dim);
        let step = AttentionStep::glorot(m, u, &mut rng);
        let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let fast = candidate_weights(&step, &x, &c)?;
        let slow = oracle::contract(&oracle::dense_tensor(&step), m, &x, &c);
        for (a, b) in fast.iter().zip(&slow) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}
