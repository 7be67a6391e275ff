//! Distribution fixtures: `{"n": 4, "weights": ["1/8", "0", "3/4", 0.125, "0"]}`.
//!
//! Weights are rational strings or JSON numbers; numbers are read from their
//! decimal text, so `0.1` means exactly `1/10`.

use hahnbound_core::arith::{format_rational, parse_rational};
use hahnbound_core::SymmetricDistribution;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub n: usize,
    pub weights: Vec<Value>,
}

pub fn parse_distribution(text: &str) -> Result<SymmetricDistribution, String> {
    let fixture: Fixture = serde_json::from_str(text).map_err(|e| format!("malformed distribution fixture: {e}"))?;
    fixture.to_distribution()
}

impl Fixture {
    pub fn to_distribution(&self) -> Result<SymmetricDistribution, String> {
        if self.weights.len() != self.n + 1 {
            return Err(format!("fixture has {} weights for n = {} (expected n + 1)", self.weights.len(), self.n));
        }
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let text = match v {
                    Value::String(s) => s.clone(),
                    Value::Number(num) => num.to_string(),
                    other => return Err(format!("weight {j} is neither a string nor a number: {other}")),
                };
                parse_rational(&text).map_err(|e| format!("weight {j}: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        SymmetricDistribution::new(weights).map_err(|e| e.to_string())
    }

    pub fn from_distribution(d: &SymmetricDistribution) -> Self {
        Fixture { n: d.n(), weights: d.weights().iter().map(|w| Value::String(format_rational(w))).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hahnbound_core::arith::rat;

    #[test]
    fn round_trip_and_mixed_weights() {
        let d = parse_distribution(r#"{"n": 3, "weights": ["1/4", 0, 0.5, "1/4"]}"#).unwrap();
        assert_eq!(d.weights(), &[rat(1, 4), rat(0, 1), rat(1, 2), rat(1, 4)]);
        let json = serde_json::to_string(&Fixture::from_distribution(&d)).unwrap();
        assert_eq!(json, r#"{"n":3,"weights":["1/4","0","1/2","1/4"]}"#);
        assert_eq!(parse_distribution(&json).unwrap(), d);
    }

    #[test]
    fn rejects_bad_fixtures() {
        assert!(parse_distribution(r#"{"n": 2, "weights": ["1/2", "1/2"]}"#).is_err());
        assert!(parse_distribution(r#"{"n": 1, "weights": ["1/2", "1/3"]}"#).is_err());
        assert!(parse_distribution(r#"{"n": 1, "weights": [true, "1"]}"#).is_err());
        assert!(parse_distribution("not json").is_err());
    }
}
