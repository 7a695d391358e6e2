//! Async client for the certifying-authority service.

use reqwest::{Response, StatusCode};
use serde::de::DeserializeOwned;
use thiserror::Error;

use zwm_core::api::{ErrorBody, RegisterRequest, VerifyRequest, VerifyTarget};
use zwm_core::{CompareMode, Query, VerificationResult, WatermarkRecord};

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("request failed: {0}")]
    Transport(#[from] reqwest::Error),

    #[error("server returned {status}: {} ({})", body.message, body.error)]
    Api { status: StatusCode, body: ErrorBody },
}

impl ClientError {
    pub fn status(&self) -> Option<StatusCode> {
        match self {
            ClientError::Transport(e) => e.status(),
            ClientError::Api { status, .. } => Some(*status),
        }
    }
}

pub type Result<T> = std::result::Result<T, ClientError>;

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    pub fn new(base_url: impl Into<String>) -> Self {
        let base = base_url.into().trim_end_matches('/').to_owned();
        Client {
            base,
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }

    pub async fn health(&self) -> Result<serde_json::Value> {
        decode(self.http.get(self.url("/health")).send().await?).await
    }

    pub async fn register(&self, req: &RegisterRequest) -> Result<WatermarkRecord> {
        decode(self.http.post(self.url("/records")).json(req).send().await?).await
    }

    pub async fn verify(&self, req: &VerifyRequest) -> Result<VerificationResult> {
        decode(self.http.post(self.url("/verify")).json(req).send().await?).await
    }

    pub async fn verify_record(&self, text: &str, record_id: &str, mode: Option<CompareMode>) -> Result<VerificationResult> {
        self.verify(&VerifyRequest {
            text: text.to_owned(),
            target: VerifyTarget::Record {
                record_id: record_id.to_owned(),
            },
            mode,
        })
        .await
    }

    pub async fn find(&self, query: &Query) -> Result<Vec<WatermarkRecord>> {
        decode(self.http.get(self.url("/records")).query(query).send().await?).await
    }
}

async fn decode<T: DeserializeOwned>(resp: Response) -> Result<T> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp.json().await?);
    }
    let text = resp.text().await?;
    let body = serde_json::from_str(&text).unwrap_or(ErrorBody {
        error: status.canonical_reason().unwrap_or("error").to_owned(),
        message: text,
    });
    Err(ClientError::Api { status, body })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_slash_is_dropped() {
        assert_eq!(Client::new("http://x:1/").url("/health"), "http://x:1/health");
    }
}
