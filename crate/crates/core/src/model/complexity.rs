//! Multiply-accumulate accounting for one contextualization step.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::AttentionStep;
use crate::error::{Error, Result};
use crate::tensor::{Tape, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// One context attends over all tokens.
    Contextualizer,
    /// Every token attends over all tokens.
    TokenWise,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Contextualizer => "contextualizer",
            Variant::TokenWise => "token-wise",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contextualizer" => Ok(Variant::Contextualizer),
            "token-wise" | "tokenwise" => Ok(Variant::TokenWise),
            _ => Err(Error::Input(format!("unknown variant {s:?}"))),
        }
    }
}

/// Exact MACs of one step over `n` tokens of dimension `m` with rank `u`.
///
/// Contextualizer: `U x_i` for all tokens (`n·u·m`), `V c` once (`u·m`), the
/// Hadamard product (`n·u`), `W z_i` (`n·m·u`) and the weighted sum (`n·m`).
/// Token-wise: `U x` and `V x` for all tokens (`2·n·u·m`) plus the pairwise
/// part of [`pairwise_macs`].
pub fn count_macs(dim: usize, rank: usize, n: usize, variant: Variant) -> u64 {
    let (m, u, n) = (dim as u64, rank as u64, n as u64);
    match variant {
        Variant::Contextualizer => n * (2 * u * m + u + m) + u * m,
        Variant::TokenWise => 2 * n * u * m + pairwise_macs(dim, rank, n as usize),
    }
}

/// The token-pair part of a token-wise step: `n²·(u + u·m + m)`.
pub fn pairwise_macs(dim: usize, rank: usize, n: usize) -> u64 {
    let (m, u, n) = (dim as u64, rank as u64, n as u64);
    n * n * (u + u * m + m)
}

/// Counts MACs by running one step on a tape and reading its counter.
pub fn measure_step_macs(step: &AttentionStep, tokens: &Tensor, variant: Variant) -> Result<u64> {
    let mut tape = Tape::new();
    let vars = step.record(&mut tape, false);
    let x = tape.constant(tokens.clone());
    let before = tape.mac_count();
    match variant {
        Variant::Contextualizer => {
            let c = tape.constant(Tensor::ones(&[step.dim()]));
            super::contextualize_step_on(&mut tape, vars, x, c)?;
        }
        Variant::TokenWise => {
            super::token_wise_step_on(&mut tape, vars, x)?;
        }
    }
    Ok(tape.mac_count() - before)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub n: usize,
    pub contextualizer: u64,
    pub token_wise: u64,
    pub token_wise_pairwise: u64,
}

/// Instrumented counts for each length in `lengths`; fails if a measured
/// count disagrees with [`count_macs`].
pub fn probe(dim: usize, rank: usize, lengths: &[usize], seed: u64) -> Result<Vec<ProbeRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = AttentionStep::glorot(dim, rank, &mut rng);
    lengths
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::Input("probe length must be positive".into()));
            }
            let tokens = Tensor::uniform(&[n, dim], -1.0, 1.0, &mut rng);
            let ctx = measure_step_macs(&step, &tokens, Variant::Contextualizer)?;
            let tw = measure_step_macs(&step, &tokens, Variant::TokenWise)?;
            for (measured, variant) in [(ctx, Variant::Contextualizer), (tw, Variant::TokenWise)] {
                let expected = count_macs(dim, rank, n, variant);
                if measured != expected {
                    return Err(Error::Contract(format!(
                        "{variant} at n={n}: counter {measured} vs closed form {expected}"
                    )));
                }
            }
            Ok(ProbeRow {
                n,
                contextualizer: ctx,
                token_wise: tw,
                token_wise_pairwise: tw - 2 * (n * rank * dim) as u64,
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
