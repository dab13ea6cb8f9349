use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Per-feature standardization fitted on a training window. Features that
/// are constant (or never observed) in that window are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerStats<T> {
    /// Width of the raw feature vector.
    pub n_features: usize,
    /// Raw indices of the retained features.
    pub retained: Vec<usize>,
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

impl<T: Scalar> ScalerStats<T> {
    /// NaN entries are treated as missing and ignored.
    pub fn fit(raw: &[Vec<f64>]) -> Self {
        let n_features = raw.first().map_or(0, Vec::len);
        let mut retained = Vec::new();
        let mut mean = Vec::new();
        let mut std = Vec::new();
        for f in 0..n_features {
            let col: Vec<T> = raw.iter().map(|r| r[f]).filter(|v| !v.is_nan()).map(T::lit).collect();
            if let (Some(m), Some(s)) = (crate::scalar::mean(&col), crate::scalar::std_dev(&col)) {
                if s > T::zero() {
                    retained.push(f);
                    mean.push(m);
                    std.push(s);
                }
            }
        }
        Self {
            n_features,
            retained,
            mean,
            std,
        }
    }

    /// Missing values map to 0, the training mean.
    pub fn transform(&self, raw: &[f64]) -> Vec<T> {
        self.retained
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&f, (&m, &s))| {
                let v = raw[f];
                if v.is_nan() {
                    T::zero()
                } else {
                    (T::lit(v) - m) / s
                }
            })
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.retained.is_empty()
    }
}
