//! k-prototypes style clustering of mixed data: learned tree distances on the
//! categorical attributes plus weighted squared Euclidean distance on the
//! normalized numeric attributes.

use serde::{Deserialize, Serialize};

use crate::cluster::{
    self, categorical_distance, numeric_distance, Centers, DiscModel, FitConfig, Metric,
};
use crate::data::Dataset;
use crate::error::{DiscError, Result};
use crate::relation::RelationModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedConfig {
    pub base: FitConfig,
    pub gamma: f64,
}

impl MixedConfig {
    pub fn new(base: FitConfig) -> Self {
        let gamma = base.gamma;
        Self { base, gamma }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

/// `Σ_r D_{j,r}(x_r, m_{j,r}) + gamma · Σ_q (x_q − mean_{j,q})²`.
pub fn mixed_distance(
    x_cat: &[usize],
    x_num: &[f64],
    j: usize,
    centers: &Centers,
    relations: &RelationModel,
    gamma: f64,
) -> f64 {
    let cat = categorical_distance(x_cat, j, centers, Metric::Learned(relations));
    if gamma == 0.0 || x_num.is_empty() {
        return cat;
    }
    cat + gamma * numeric_distance(x_num, centers.means(j))
}

pub fn fit_mixed(dataset: &Dataset, config: &MixedConfig) -> Result<DiscModel> {
    if !(config.gamma >= 0.0 && config.gamma.is_finite()) {
        return Err(DiscError::InvalidConfig(
            "gamma must be finite and non-negative".into(),
        ));
    }
    let mut base = config.base.clone();
    base.gamma = config.gamma;
    cluster::run(dataset, &base, Some(config.gamma), None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cluster::{fit, sample_cluster_distance};
    use crate::relation::{infer_tree, Cpd};

    fn toy_model() -> (RelationModel, Centers) {
        let cpd = Cpd {
            probs: vec![0.5, 0.25, 0.25],
            support: 4,
        };
        let rel = RelationModel::from_trees(1, 1, vec![infer_tree(&cpd)]).unwrap();
        let centers = Centers::new(1, vec![vec![0]], vec![vec![0.5, 0.5]]).unwrap();
        (rel, centers)
    }

    #[test]
    fn formula_example() {
        let (rel, c) = toy_model();
        let d = mixed_distance(&[1], &[0.6, 0.7], 0, &c, &rel, 1.0);
        assert!((d - 0.30).abs() < 1e-12);
    }

    #[test]
    fn zero_gamma_is_categorical_only() {
        let (rel, c) = toy_model();
        let d = mixed_distance(&[2], &[0.0, 1.0], 0, &c, &rel, 0.0);
        assert_eq!(d, sample_cluster_distance(&[2], 0, &c, &rel));
    }

    #[test]
    fn center_has_zero_distance() {
        let (rel, c) = toy_model();
        assert_eq!(mixed_distance(&[0], &[0.5, 0.5], 0, &c, &rel, 3.0), 0.0);
    }

    #[test]
    fn negative_gamma_is_rejected() {
        let ds = crate::data::synth_generate(20, 2, 3, 2, 0).unwrap();
        let cfg = MixedConfig::new(FitConfig::new(2, 0)).with_gamma(-1.0);
        assert!(fit_mixed(&ds, &cfg).is_err());
    }

    #[test]
    fn categorical_data_reduces_to_fit() {
        let ds = crate::data::synth_generate(90, 5, 4, 3, 2).unwrap();
        let base = FitConfig::new(3, 7);
        let a = fit(&ds, &base).unwrap();
        let mut b = fit_mixed(&ds, &MixedConfig::new(base)).unwrap();
        assert_eq!(b.numeric_weight, None);
        b.config.gamma = a.config.gamma;
        assert_eq!(a, b);
    }
}
