use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::parse::ParsedApi;
use crate::evaluation::normalize_api;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub query_id: String,
    pub ranked_apis: Vec<String>,
    /// Explanation for each ranked API, from its earliest mention.
    pub reasons: BTreeMap<String, String>,
    pub raw_samples: Vec<String>,
}

/// Ranks APIs by the number of samples naming them; ties go to the API seen
/// first, by (sample index, position). Names are compared normalized and
/// reported in their first-seen spelling.
pub fn aggregate<S: AsRef<str>>(samples: &[Vec<S>]) -> Vec<String> {
    struct Tally {
        name: String,
        count: usize,
        first_seen: (usize, usize),
    }
    let mut tallies: HashMap<String, Tally> = HashMap::new();
    for (s, sample) in samples.iter().enumerate() {
        let mut in_sample = std::collections::HashSet::new();
        for (p, api) in sample.iter().enumerate() {
            let Ok(key) = normalize_api(api.as_ref()) else {
                continue;
            };
            if !in_sample.insert(key.clone()) {
                continue;
            }
            tallies
                .entry(key)
                .and_modify(|t| t.count += 1)
                .or_insert_with(|| Tally {
                    name: api.as_ref().to_string(),
                    count: 1,
                    first_seen: (s, p),
                });
        }
    }
    let mut ranked: Vec<Tally> = tallies.into_values().collect();
    ranked.sort_by(|a, b| b.count.cmp(&a.count).then(a.first_seen.cmp(&b.first_seen)));
    ranked.into_iter().map(|t| t.name).collect()
}

/// A bare `Answer: a, b` line lists names without saying anything about them.
fn is_answer_line(sentence: &str) -> bool {
    sentence.trim_start().starts_with("Answer:")
}

/// Aggregates parsed samples into a recommendation with per-API reasons.
/// Each reason is the first prose sentence mentioning the API, else its first mention.
pub fn recommend_from_samples(
    query_id: &str,
    raw_samples: Vec<String>,
    parsed: &[Vec<ParsedApi>],
) -> Recommendation {
    let names: Vec<Vec<&str>> = parsed
        .iter()
        .map(|s| s.iter().map(|p| p.api.as_str()).collect())
        .collect();
    let ranked_apis = aggregate(&names);
    let mut reasons = BTreeMap::new();
    for api in &ranked_apis {
        let key = normalize_api(api).ok();
        let mut mentions = parsed
            .iter()
            .flatten()
            .filter(|p| normalize_api(&p.api).ok() == key);
        let first = mentions.clone().next();
        let reason = mentions
            .find(|p| !is_answer_line(&p.reason))
            .or(first)
            .map(|p| p.reason.clone())
            .unwrap_or_default();
        reasons.insert(api.clone(), reason);
    }
    Recommendation {
        query_id: query_id.to_string(),
        ranked_apis,
        reasons,
        raw_samples,
    }
}
