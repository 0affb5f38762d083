use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::rank_order;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub feature: String,
    pub value: f64,
    /// 1-based rank.
    pub rank: usize,
}

/// Scores of every feature under one selector, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub method: String,
    #[serde(rename = "L")]
    pub group_size: Option<usize>,
    pub rounds: Option<usize>,
    pub seed: Option<u64>,
    pub scores: Vec<ScoreEntry>,
    pub evaluations: u64,
}

impl RankingReport {
    /// Ranks `values` (one per name) descending, ties to the lower index.
    pub fn from_scores(method: impl Into<String>, names: &[String], values: &[f64]) -> Result<Self> {
        if names.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} feature names for {} scores",
                names.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite score for {}", names[i])));
        }
        let scores = rank_order(values)
            .into_iter()
            .enumerate()
            .map(|(r, i)| ScoreEntry {
                feature: names[i].clone(),
                value: values[i],
                rank: r + 1,
            })
            .collect();
        Ok(RankingReport {
            method: method.into(),
            group_size: None,
            rounds: None,
            seed: None,
            scores,
            evaluations: 0,
        })
    }

    /// Names of the `k` best features.
    pub fn top(&self, k: usize) -> Vec<&str> {
        self.scores.iter().take(k).map(|s| s.feature.as_str()).collect()
    }

    /// Column indices of the `k` best features in `names`.
    pub fn top_indices(&self, k: usize, names: &[String]) -> Result<Vec<usize>> {
        self.top(k)
            .into_iter()
            .map(|f| {
                names
                    .iter()
                    .position(|n| n == f)
                    .ok_or_else(|| Error::InvalidArgument(format!("report names unknown feature {f}")))
            })
            .collect()
    }

    /// 1-based rank of `feature`.
    pub fn rank_of(&self, feature: &str) -> Option<usize> {
        self.scores.iter().find(|s| s.feature == feature).map(|s| s.rank)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_schema_fields() {
        let names = vec!["a".to_string(), "b".to_string()];
        let mut r = RankingReport::from_scores("shapley-mpe", &names, &[0.1, 0.4]).unwrap();
        r.group_size = Some(4);
        r.rounds = Some(10);
        r.seed = Some(3);
        r.evaluations = 7;
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["method"], "shapley-mpe");
        assert_eq!(v["L"], 4);
        assert_eq!(v["scores"][0]["feature"], "b");
        assert_eq!(v["scores"][0]["rank"], 1);
        assert_eq!(v["evaluations"], 7);
        let back: RankingReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn non_finite_scores_rejected() {
        let names = vec!["a".to_string()];
        assert!(RankingReport::from_scores("chi2", &names, &[f64::NAN]).is_err());
    }
}
