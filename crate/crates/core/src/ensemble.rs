//! Bagging and AdaBoost.M1 over the Gini decision tree.

use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train_tree, DecisionTree, TreeParams};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

/// Error substituted for a perfect round so that `alpha` stays finite.
const PERFECT_ROUND_ERROR: f64 = 1e-12;
const BOOTSTRAP_RETRIES: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Bagging,
    Boosting,
}

impl EnsembleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleKind::Bagging => "bagging",
            EnsembleKind::Boosting => "boosting",
        }
    }
}

/// One AdaBoost round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostRound {
    /// Weighted training error under the weights the member was trained on.
    pub error: f64,
    pub alpha: f64,
    pub retained: bool,
    /// Weighted error of the same member under the updated weights.
    pub post_update_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub kind: EnsembleKind,
    pub members: Vec<DecisionTree>,
    pub member_weights: Vec<f64>,
    pub n_estimators: usize,
    pub base_params: TreeParams,
    #[serde(default)]
    pub rounds: Vec<BoostRound>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// How bagging draws each member's training rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BootstrapMode {
    /// `n` rows uniformly with replacement.
    Resample,
    /// Every row exactly once; makes each member the plain base tree.
    Identity,
}

/// Bootstrap row indices for bagging member `member`.
pub fn bootstrap_indices(n: usize, seed: u64, member: usize, attempt: u64) -> Vec<usize> {
    let mut rng = rng_from_seed(derive_seed(seed, &[member as u64, attempt]));
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

fn check_ensemble_input(ds: &Dataset, n_estimators: usize) -> Result<()> {
    if n_estimators == 0 {
        return Err(Error::param("n_estimators", "must be at least 1"));
    }
    ds.require_both_classes("ensemble training")
}

pub fn bagging_train(ds: &Dataset, n_estimators: usize, base_params: &TreeParams, seed: u64) -> Result<Ensemble> {
    bagging_train_with(ds, n_estimators, base_params, seed, BootstrapMode::Resample)
}

/// Bagging with an explicit bootstrap mode. Members are trained in parallel;
/// each depends only on its own derived seed.
pub fn bagging_train_with(
    ds: &Dataset,
    n_estimators: usize,
    base_params: &TreeParams,
    seed: u64,
    mode: BootstrapMode,
) -> Result<Ensemble> {
    check_ensemble_input(ds, n_estimators)?;
    let n = ds.n_rows();
    let members = (0..n_estimators)
        .into_par_iter()
        .map(|m| {
            let rows = match mode {
                BootstrapMode::Identity => (0..n).collect(),
                BootstrapMode::Resample => {
                    let mut attempt = 0;
                    loop {
                        let rows = bootstrap_indices(n, seed, m, attempt);
                        let pos = rows.iter().filter(|&&i| ds.label(i) == 1).count();
                        attempt += 1;
                        if (pos > 0 && pos < n) || attempt > BOOTSTRAP_RETRIES {
                            break rows;
                        }
                    }
                }
            };
            train_tree(&ds.select_rows(&rows), None, base_params)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Ensemble {
        kind: EnsembleKind::Bagging,
        member_weights: vec![1.0; members.len()],
        members,
        n_estimators,
        base_params: *base_params,
        rounds: Vec::new(),
        warnings: Vec::new(),
    })
}

fn alpha_for(error: f64) -> f64 {
    0.5 * ((1.0 - error) / error).ln()
}

/// AdaBoost.M1 with weighted trees. Rounds run strictly in sequence.
///
/// A round with weighted error `>= 0.5` is discarded and stops training; a
/// perfect round is kept with a capped `alpha` and also stops training. If the
/// very first round already fails, that member is kept with weight 1.
pub fn boosting_train(ds: &Dataset, n_estimators: usize, base_params: &TreeParams, _seed: u64) -> Result<Ensemble> {
    check_ensemble_input(ds, n_estimators)?;
    let n = ds.n_rows();
    let mut weights = vec![1.0 / n as f64; n];
    let mut members = Vec::new();
    let mut member_weights = Vec::new();
    let mut rounds = Vec::new();
    let mut warnings = Vec::new();

    for round in 0..n_estimators {
        let tree = train_tree(ds, Some(&weights), base_params)?;
        let wrong: Vec<bool> = ds
            .rows()
            .zip(ds.labels())
            .map(|(x, &y)| u8::from(tree.leaf_prob(x) >= 0.5) != y)
            .collect();
        let error: f64 = weights.iter().zip(&wrong).filter(|(_, &w)| w).map(|(v, _)| v).sum();

        if error >= 0.5 {
            if round == 0 {
                warnings.push(format!(
                    "first boosting round has weighted error {error:.6} >= 0.5; falling back to a single member"
                ));
                members.push(tree);
                member_weights.push(1.0);
                rounds.push(BoostRound {
                    error,
                    alpha: 1.0,
                    retained: true,
                    post_update_error: None,
                });
            } else {
                rounds.push(BoostRound {
                    error,
                    alpha: alpha_for(error).max(0.0),
                    retained: false,
                    post_update_error: None,
                });
            }
            break;
        }
        if error <= 0.0 {
            members.push(tree);
            member_weights.push(alpha_for(PERFECT_ROUND_ERROR));
            rounds.push(BoostRound {
                error,
                alpha: alpha_for(PERFECT_ROUND_ERROR),
                retained: true,
                post_update_error: None,
            });
            break;
        }

        let alpha = alpha_for(error);
        let up = alpha.exp();
        let down = (-alpha).exp();
        for (w, &bad) in weights.iter_mut().zip(&wrong) {
            *w *= if bad { up } else { down };
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let post: f64 = weights.iter().zip(&wrong).filter(|(_, &w)| w).map(|(v, _)| v).sum();
        members.push(tree);
        member_weights.push(alpha);
        rounds.push(BoostRound {
            error,
            alpha,
            retained: true,
            post_update_error: Some(post),
        });
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Ensemble {
        kind: EnsembleKind::Boosting,
        members,
        member_weights,
        n_estimators,
        base_params: *base_params,
        rounds,
        warnings,
    })
}

/// Score in `[0, 1]` and hard class.
///
/// Bagging averages member leaf probabilities. Boosting maps the normalized
/// alpha-weighted vote `s` of `+-1` member votes to `(s + 1) / 2`. Ties go
/// to class 1.
pub fn ensemble_predict(ens: &Ensemble, x: &[f64]) -> Result<(f64, u8)> {
    let Some(first) = ens.members.first() else {
        return Err(Error::Model("empty ensemble".into()));
    };
    if x.len() != first.n_features {
        return Err(Error::DimensionMismatch {
            expected: first.n_features,
            got: x.len(),
        });
    }
    match ens.kind {
        EnsembleKind::Bagging => {
            let total: f64 = ens.member_weights.iter().sum();
            let score = ens
                .members
                .iter()
                .zip(&ens.member_weights)
                .map(|(t, w)| w * t.leaf_prob(x))
                .sum::<f64>()
                / total;
            Ok((score, u8::from(score >= 0.5)))
        }
        EnsembleKind::Boosting => {
            let total: f64 = ens.member_weights.iter().sum();
            let vote = ens
                .members
                .iter()
                .zip(&ens.member_weights)
                .map(|(t, a)| if t.leaf_prob(x) >= 0.5 { *a } else { -*a })
                .sum::<f64>();
            let s = (vote / total).clamp(-1.0, 1.0);
            Ok(((s + 1.0) / 2.0, u8::from(vote >= 0.0)))
        }
    }
}

/// Member-weighted mean of per-tree Gini reductions, normalized to sum 1
/// (all zeros when no member ever split).
pub fn ensemble_importance(ens: &Ensemble) -> Vec<f64> {
    let d = ens.members.first().map_or(0, |t| t.n_features);
    let mut acc = vec![0.0; d];
    let total_weight: f64 = ens.member_weights.iter().sum();
    for (tree, w) in ens.members.iter().zip(&ens.member_weights) {
        for (a, g) in acc.iter_mut().zip(&tree.gini_reduction_per_feature) {
            *a += w * g / total_weight;
        }
    }
    normalize(acc)
}

pub(crate) fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let sum: f64 = v.iter().sum();
    if sum > 0.0 {
        v.iter_mut().for_each(|x| *x /= sum);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifiers::tree_predict;
    use crate::data::generate_synthetic;

    fn stump(prob: f64) -> DecisionTree {
        DecisionTree {
            n_features: 1,
            params: TreeParams::default(),
            nodes: vec![crate::classifiers::TreeNode::Leaf {
                neg_weight: 1.0 - prob,
                pos_weight: prob,
                prob,
            }],
            gini_reduction_per_feature: vec![0.0],
        }
    }

    fn ensemble(kind: EnsembleKind, probs: &[f64], weights: &[f64]) -> Ensemble {
        Ensemble {
            kind,
            members: probs.iter().map(|&p| stump(p)).collect(),
            member_weights: weights.to_vec(),
            n_estimators: probs.len(),
            base_params: TreeParams::default(),
            rounds: vec![],
            warnings: vec![],
        }
    }

    #[test]
    fn unanimous_members() {
        for kind in [EnsembleKind::Bagging, EnsembleKind::Boosting] {
            let e = ensemble(kind, &[0.9, 0.8, 0.7], &[1.0, 0.5, 2.0]);
            assert_eq!(ensemble_predict(&e, &[0.0]).unwrap().1, 1);
        }
    }

    #[test]
    fn bagging_mean_of_two() {
        let e = ensemble(EnsembleKind::Bagging, &[0.2, 0.8], &[1.0, 1.0]);
        assert_eq!(ensemble_predict(&e, &[0.0]).unwrap(), (0.5, 1));
    }

    #[test]
    fn boosting_tie_goes_positive() {
        let e = ensemble(EnsembleKind::Boosting, &[0.9, 0.1, 0.1], &[2.0, 1.0, 1.0]);
        let (score, class) = ensemble_predict(&e, &[0.0]).unwrap();
        assert_eq!(score, 0.5);
        assert_eq!(class, 1);
    }

    #[test]
    fn empty_and_mismatched() {
        let e = ensemble(EnsembleKind::Bagging, &[], &[]);
        assert!(ensemble_predict(&e, &[0.0]).is_err());
        let e = ensemble(EnsembleKind::Bagging, &[0.5], &[1.0]);
        assert!(ensemble_predict(&e, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn identity_bagging_equals_base_tree() {
        let ds = generate_synthetic(150, 3, 0.3, 1.5, 2).unwrap();
        let params = TreeParams::default();
        let e = bagging_train_with(&ds, 1, &params, 9, BootstrapMode::Identity).unwrap();
        let t = train_tree(&ds, None, &params).unwrap();
        for x in ds.rows() {
            assert_eq!(ensemble_predict(&e, x).unwrap().0, tree_predict(&t, x).unwrap());
        }
    }

    #[test]
    fn bagging_deterministic_and_seed_separated() {
        let ds = generate_synthetic(120, 3, 0.3, 1.5, 2).unwrap();
        let params = TreeParams::default();
        let a = bagging_train(&ds, 5, &params, 4).unwrap();
        let b = bagging_train(&ds, 5, &params, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(bootstrap_indices(120, 4, 0, 0), bootstrap_indices(120, 4, 1, 0));
    }

    #[test]
    fn bagging_member_order_irrelevant() {
        let ds = generate_synthetic(120, 3, 0.3, 1.5, 6).unwrap();
        let e = bagging_train(&ds, 6, &TreeParams::default(), 1).unwrap();
        let mut shuffled = e.clone();
        shuffled.members.reverse();
        for x in ds.rows().take(30) {
            let a = ensemble_predict(&e, x).unwrap().0;
            let b = ensemble_predict(&shuffled, x).unwrap().0;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn boosting_weight_update_identity() {
        let ds = generate_synthetic(200, 3, 0.3, 1.0, 8).unwrap();
        let e = boosting_train(&ds, 20, &TreeParams { max_depth: 2, min_samples_leaf: 5 }, 0).unwrap();
        assert!(!e.rounds.is_empty());
        for r in e.rounds.iter().filter(|r| r.retained) {
            assert!(r.error < 0.5 && r.alpha > 0.0);
            if let Some(post) = r.post_update_error {
                assert!((post - 0.5).abs() < 1e-12, "{post}");
            }
        }
        assert_eq!(e.members.len(), e.member_weights.len());
    }

    #[test]
    fn half_error_gives_zero_alpha() {
        assert_eq!(alpha_for(0.5), 0.0);
    }

    #[test]
    fn perfect_first_round_stops() {
        let ds = generate_synthetic(100, 2, 0.3, 20.0, 1).unwrap();
        let e = boosting_train(&ds, 10, &TreeParams { max_depth: 3, min_samples_leaf: 1 }, 0).unwrap();
        assert_eq!(e.members.len(), 1);
        assert!(e.member_weights[0].is_finite() && e.member_weights[0] > 0.0);
    }

    #[test]
    fn importance_properties() {
        // Labels depend on feature 0 only.
        let raw = generate_synthetic(300, 4, 0.5, 0.0, 3).unwrap();
        let rows: Vec<Vec<f64>> = raw.rows().map(<[f64]>::to_vec).collect();
        let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[0] > 0.2)).collect();
        let ds = Dataset::from_rows(&rows, &labels).unwrap();
        let e = boosting_train(&ds, 10, &TreeParams { max_depth: 3, min_samples_leaf: 5 }, 0).unwrap();
        let imp = ensemble_importance(&e);
        assert!(imp[0] > 0.9, "{imp:?}");
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-12);

        let single = ensemble(EnsembleKind::Bagging, &[0.3], &[1.0]);
        assert_eq!(ensemble_importance(&single), vec![0.0]);

        let t = train_tree(&ds, None, &TreeParams { max_depth: 1, min_samples_leaf: 1 }).unwrap();
        let one = Ensemble {
            kind: EnsembleKind::Bagging,
            members: vec![t.clone()],
            member_weights: vec![1.0],
            n_estimators: 1,
            base_params: t.params,
            rounds: vec![],
            warnings: vec![],
        };
        let imp = ensemble_importance(&one);
        assert_eq!(imp[0], 1.0);
        assert_eq!(&imp[1..], &[0.0, 0.0, 0.0]);
    }
}
