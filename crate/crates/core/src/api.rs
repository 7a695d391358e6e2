//! Request and response bodies shared by the HTTP service, its client and
//! the CLI. Field names are part of the wire contract.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::registry::Registry;
use crate::text::KeywordPolicy;
use crate::watermark::{extract_and_verify, CompareMode, VerificationResult, Watermark, WatermarkInput};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterRequest {
    pub author: String,
    pub text: String,
    /// Explicit keyword; the most frequent word is used when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyword: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_count: Option<usize>,
}

impl RegisterRequest {
    pub fn policy(&self) -> KeywordPolicy {
        let policy = match &self.keyword {
            Some(k) => KeywordPolicy::explicit(k.clone()),
            None => KeywordPolicy::auto(),
        };
        policy.with_min_count(self.min_count.unwrap_or(1))
    }
}

/// What to verify a text against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VerifyTarget {
    Record { record_id: String },
    Watermark { keyword: String, watermark: WatermarkInput },
}

impl VerifyTarget {
    pub fn resolve(self, registry: Option<&Registry>) -> Result<Watermark> {
        match self {
            VerifyTarget::Record { record_id } => registry
                .and_then(|r| r.get(&record_id))
                .map(|r| r.watermark)
                .ok_or(Error::UnknownRecord { id: record_id }),
            VerifyTarget::Watermark { keyword, watermark } => watermark.into_watermark(&keyword),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyRequest {
    pub text: String,
    #[serde(flatten)]
    pub target: VerifyTarget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<CompareMode>,
}

/// The single verification path behind both the CLI and the service.
pub fn verify(request: VerifyRequest, registry: Option<&Registry>) -> Result<VerificationResult> {
    let original = request.target.resolve(registry)?;
    extract_and_verify(&request.text, &original, request.mode.unwrap_or_default())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub error: String,
    pub message: String,
}

impl From<&Error> for ErrorBody {
    fn from(e: &Error) -> Self {
        ErrorBody {
            error: e.kind().to_owned(),
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{ManualClock, Timestamp};

    const SAMPLE: &str = "this is a test and this is fun";

    #[test]
    fn verify_request_json_forms() {
        let by_id: VerifyRequest = serde_json::from_str(r#"{"text":"x","record_id":"abc"}"#).unwrap();
        assert_eq!(by_id.target, VerifyTarget::Record { record_id: "abc".into() });
        let by_wm: VerifyRequest = serde_json::from_str(r#"{"text":"x","keyword":"is","watermark":[[4,1]],"mode":"lcs_symbol"}"#).unwrap();
        assert!(matches!(by_wm.target, VerifyTarget::Watermark { .. }));
        assert_eq!(by_wm.mode, Some(CompareMode::LcsSymbol));
        assert!(serde_json::from_str::<VerifyRequest>(r#"{"text":"x"}"#).is_err());
    }

    #[test]
    fn verify_against_record_and_inline() {
        let dir = tempfile::tempdir().unwrap();
        let reg = Registry::open(dir.path().join("ca.jsonl")).unwrap();
        let clock = ManualClock::new(Timestamp::from_millis(0));
        let rec = reg.register(SAMPLE, "alice", &KeywordPolicy::auto(), &clock).unwrap();

        let by_id = verify(
            VerifyRequest {
                text: SAMPLE.into(),
                target: VerifyTarget::Record { record_id: rec.id.clone() },
                mode: None,
            },
            Some(&reg),
        )
        .unwrap();
        assert!(!by_id.tampered);

        let inline = verify(
            VerifyRequest {
                text: SAMPLE.into(),
                target: VerifyTarget::Watermark {
                    keyword: "is".into(),
                    watermark: WatermarkInput::Pairs(rec.watermark.pairs().to_vec()),
                },
                mode: None,
            },
            None,
        )
        .unwrap();
        assert_eq!(inline, by_id);

        let missing = verify(
            VerifyRequest {
                text: SAMPLE.into(),
                target: VerifyTarget::Record { record_id: "nope".into() },
                mode: None,
            },
            Some(&reg),
        );
        assert!(matches!(missing, Err(Error::UnknownRecord { .. })));
    }

    #[test]
    fn register_request_policy() {
        let req = RegisterRequest {
            author: "a".into(),
            text: "t".into(),
            keyword: Some("and".into()),
            min_count: Some(3),
        };
        assert_eq!(req.policy(), KeywordPolicy::explicit("and").with_min_count(3));
        let auto: RegisterRequest = serde_json::from_str(r#"{"author":"a","text":"t"}"#).unwrap();
        assert_eq!(auto.policy(), KeywordPolicy::auto());
    }
}
