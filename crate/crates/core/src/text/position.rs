/// Sinusoidal position vectors: component `2k` is `sin(pos / 10000^(2k/p))`
/// and component `2k+1` the matching cosine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PositionEncoder {
    dim: usize,
}

impl PositionEncoder {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn encode(&self, position: usize) -> Vec<f64> {
        let p = self.dim as f64;
        (0..self.dim)
            .map(|i| {
                let pair = (i / 2) as f64;
                let angle = position as f64 / 10000f64.powf(2.0 * pair / p);
                if i % 2 == 0 {
                    angle.sin()
                } else {
                    angle.cos()
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn position_zero_alternates_zero_and_one() {
        let v = PositionEncoder::new(6).encode(0);
        assert_eq!(v, vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn first_pair_has_unit_frequency() {
        let v = PositionEncoder::new(20).encode(3);
        assert!((v[0] - 3f64.sin()).abs() < 1e-15);
        assert!((v[1] - 3f64.cos()).abs() < 1e-15);
        let slow = 3.0 / 10000f64.powf(18.0 / 20.0);
        assert!((v[18] - slow.sin()).abs() < 1e-15);
    }

    #[test]
    fn positions_are_distinct_over_long_documents() {
        let enc = PositionEncoder::new(20);
        let vecs: Vec<Vec<f64>> = (0..1000).map(|i| enc.encode(i)).collect();
        for i in 0..vecs.len() {
            for j in (i + 1)..vecs.len() {
                let d: f64 = vecs[i].iter().zip(&vecs[j]).map(|(a, b)| (a - b).abs()).sum();
                assert!(d > 1e-6, "pos {i} vs {j}");
            }
        }
    }

    #[test]
    fn zero_dimension_is_empty() {
        assert!(PositionEncoder::new(0).encode(17).is_empty());
    }
}
