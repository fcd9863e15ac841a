use serde::{Deserialize, Serialize};

/// Why two outputs differ at a given token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum MismatchReason {
    TokenCount { actual: usize, expected: usize },
    Numeric { actual: String, expected: String, difference: f64 },
    Text { actual: String, expected: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    /// Zero-based token position of the first difference.
    pub token_index: usize,
    #[serde(flatten)]
    pub reason: MismatchReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub matched: bool,
    pub actual_tokens: usize,
    pub expected_tokens: usize,
    pub tolerance: f64,
    pub first_mismatch: Option<Mismatch>,
}

impl ComparisonReport {
    pub fn describe(&self) -> String {
        match &self.first_mismatch {
            None => "outputs match".to_string(),
            Some(m) => match &m.reason {
                MismatchReason::TokenCount { actual, expected } => {
                    format!("token count differs: got {actual}, expected {expected}")
                }
                MismatchReason::Numeric { actual, expected, difference } => format!(
                    "token {} differs: got {actual}, expected {expected} (|diff| = {difference:e} > {:e})",
                    m.token_index, self.tolerance
                ),
                MismatchReason::Text { actual, expected } => {
                    format!("token {} differs: got `{actual}`, expected `{expected}`", m.token_index)
                }
            },
        }
    }
}

fn numeric(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Token-wise comparison of program outputs.
///
/// Both texts are split on whitespace. Token counts must agree. Byte-equal
/// tokens always match; otherwise two numeric tokens match when their
/// absolute difference is at most `tolerance`, and anything else mismatches.
/// `inf` and `nan` are compared as text.
pub fn compare_outputs(actual: &str, expected: &str, tolerance: f64) -> ComparisonReport {
    let a: Vec<&str> = actual.split_whitespace().collect();
    let e: Vec<&str> = expected.split_whitespace().collect();
    let mut report = ComparisonReport {
        matched: true,
        actual_tokens: a.len(),
        expected_tokens: e.len(),
        tolerance,
        first_mismatch: None,
    };

    if a.len() != e.len() {
        report.matched = false;
        report.first_mismatch = Some(Mismatch {
            token_index: a.len().min(e.len()),
            reason: MismatchReason::TokenCount { actual: a.len(), expected: e.len() },
        });
        return report;
    }

    for (idx, (x, y)) in a.iter().zip(&e).enumerate() {
        if x == y {
            continue;
        }
        let reason = match (numeric(x), numeric(y)) {
            (Some(p), Some(q)) => {
                let difference = (p - q).abs();
                if difference <= tolerance {
                    continue;
                }
                if !difference.is_finite() {
                    MismatchReason::Text { actual: x.to_string(), expected: y.to_string() }
                } else {
                    MismatchReason::Numeric { actual: x.to_string(), expected: y.to_string(), difference }
                }
            }
            _ => MismatchReason::Text { actual: x.to_string(), expected: y.to_string() },
        };
        report.matched = false;
        report.first_mismatch = Some(Mismatch { token_index: idx, reason });
        break;
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_tokens_match() {
        assert!(compare_outputs("1.000000", "1.000000", 1e-4).matched);
    }

    #[test]
    fn tolerance_arithmetic() {
        assert!(compare_outputs("1.00003", "1.00001", 1e-4).matched);
        let r = compare_outputs("1.1", "1.0", 1e-4);
        assert!(!r.matched);
        assert_eq!(r.first_mismatch.unwrap().token_index, 0);
    }

    #[test]
    fn token_count_must_agree() {
        let r = compare_outputs("1.0 2.0", "1.0", 10.0);
        assert!(!r.matched);
        assert!(matches!(
            r.first_mismatch.unwrap().reason,
            MismatchReason::TokenCount { actual: 2, expected: 1 }
        ));
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert!(compare_outputs("1\n2\n3\n", "1 2   3", 0.0).matched);
    }

    #[test]
    fn text_tokens_compare_exactly() {
        assert!(!compare_outputs("nan", "0.5", 1.0).matched);
        assert!(compare_outputs("-nan", "-nan", 0.0).matched);
        assert!(!compare_outputs("abc", "abd", 1.0).matched);
    }

    #[test]
    fn reports_first_of_several_mismatches() {
        let r = compare_outputs("0 1 2 9 9", "0 1 2 3 4", 1e-4);
        assert_eq!(r.first_mismatch.unwrap().token_index, 3);
    }

    proptest! {
        #[test]
        fn reflexive(tokens in proptest::collection::vec(any::<f32>(), 0..20), tol in 0.0f64..1.0) {
            let text: String = tokens.iter().map(|t| format!("{t:.6}\n")).collect();
            prop_assert!(compare_outputs(&text, &text, tol).matched);
        }

        #[test]
        fn symmetric(a in proptest::collection::vec(-10.0f64..10.0, 1..8),
                     b in proptest::collection::vec(-10.0f64..10.0, 1..8),
                     tol in 0.0f64..2.0) {
            let ta: String = a.iter().map(|t| format!("{t:.6} ")).collect();
            let tb: String = b.iter().map(|t| format!("{t:.6} ")).collect();
            prop_assert_eq!(compare_outputs(&ta, &tb, tol).matched, compare_outputs(&tb, &ta, tol).matched);
        }
    }
}
