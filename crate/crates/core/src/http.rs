//! Blocking JSON POST with bounded exponential-backoff retries.

use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Total attempts, including the first.
    pub max_attempts: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 4,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    pub fn delay_for(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt.saturating_sub(1)).unwrap_or(u32::MAX);
        self.base_delay.saturating_mul(factor).min(self.max_delay)
    }
}

pub(crate) fn build_client(timeout: Duration) -> Result<Client> {
    Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| Error::Service {
            endpoint: "<client>".into(),
            attempts: 0,
            message: e.to_string(),
        })
}

/// POSTs `body` as JSON and returns the raw response bytes of the first 2xx reply.
///
/// Connection errors, timeouts, 429 and 5xx are retried; other statuses fail at once.
pub(crate) fn post_json<B: Serialize>(
    client: &Client,
    url: &str,
    bearer: Option<&str>,
    body: &B,
    policy: RetryPolicy,
) -> Result<Vec<u8>> {
    let attempts = policy.max_attempts.max(1);
    let mut last = String::new();
    for attempt in 1..=attempts {
        let mut req = client.post(url).json(body);
        if let Some(token) = bearer {
            req = req.bearer_auth(token);
        }
        match req.send() {
            Ok(resp) => {
                let status = resp.status();
                let bytes = resp.bytes().map(|b| b.to_vec());
                match bytes {
                    Ok(b) if status.is_success() => return Ok(b),
                    Ok(b) => {
                        last = format!("HTTP {status}: {}", String::from_utf8_lossy(&b));
                        if !retryable(status) {
                            return Err(Error::Service {
                                endpoint: url.to_string(),
                                attempts: attempt,
                                message: last,
                            });
                        }
                    }
                    Err(e) => last = e.to_string(),
                }
            }
            Err(e) => last = e.to_string(),
        }
        if attempt < attempts {
            let delay = policy.delay_for(attempt);
            log::warn!("{url}: attempt {attempt} failed ({last}); retrying in {delay:?}");
            std::thread::sleep(delay);
        }
    }
    Err(Error::Service {
        endpoint: url.to_string(),
        attempts,
        message: last,
    })
}

fn retryable(status: StatusCode) -> bool {
    status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error()
}
