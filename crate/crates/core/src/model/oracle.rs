//! Brute-force reference for the factored attention weights.
//!
//! Builds the full `m × m × m` tensor from a factored step and contracts it
//! with plain loops. Kept free of tape and GEMM code so it can check them.

use super::AttentionStep;

/// `T[j][a][b] = Σ_r W[j][r] · U[r][a] · V[r][b]`, flattened row-major.
pub fn dense_tensor(step: &AttentionStep) -> Vec<f64> {
    let (m, rank) = (step.dim(), step.rank());
    let (u, v, w) = (step.u.data(), step.v.data(), step.w.data());
    let mut t = vec![0.0; m * m * m];
    for j in 0..m {
        for a in 0..m {
            for b in 0..m {
                let mut acc = 0.0;
                for r in 0..rank {
                    acc += w[j * rank + r] * u[r * m + a] * v[r * m + b];
                }
                t[(j * m + a) * m + b] = acc;
            }
        }
    }
    t
}

/// `out[j] = Σ_{a,b} T[j][a][b] · x[a] · c[b]`.
pub fn contract(tensor: &[f64], m: usize, x: &[f64], c: &[f64]) -> Vec<f64> {
    assert_eq!(tensor.len(), m * m * m);
    (0..m)
        .map(|j| {
            let mut acc = 0.0;
            for a in 0..m {
                for b in 0..m {
                    acc += tensor[(j * m + a) * m + b] * x[a] * c[b];
                }
            }
            acc
        })
        .collect()
}
