use std::time::Duration;

use crate::error::ProviderError;

/// Bounded retries with exponential backoff for retryable provider errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    pub attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

impl RetryPolicy {
    /// Same attempt count, no sleeping. For mocks and tests.
    pub fn immediate() -> Self {
        Self {
            attempts: 3,
            base_delay: Duration::ZERO,
        }
    }

    pub fn run<T>(&self, mut op: impl FnMut() -> Result<T, ProviderError>) -> Result<T, ProviderError> {
        let attempts = self.attempts.max(1);
        let mut attempt = 0;
        loop {
            attempt += 1;
            match op() {
                Ok(v) => return Ok(v),
                Err(e) if e.is_retryable() && attempt < attempts => {
                    log::debug!("retryable provider error (attempt {attempt}/{attempts}): {e}");
                    if !self.base_delay.is_zero() {
                        std::thread::sleep(self.base_delay * 2u32.pow(attempt - 1));
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn retries_then_surfaces() {
        let mut calls = 0;
        let r: Result<(), _> = RetryPolicy::immediate().run(|| {
            calls += 1;
            Err(ProviderError::Unavailable("down".into()))
        });
        assert!(r.is_err());
        assert_eq!(calls, 3);
    }

    #[test]
    fn non_retryable_fails_fast() {
        let mut calls = 0;
        let r: Result<(), _> = RetryPolicy::immediate().run(|| {
            calls += 1;
            Err(ProviderError::InvalidRequest("bad".into()))
        });
        assert!(r.is_err());
        assert_eq!(calls, 1);
    }

    #[test]
    fn recovers_on_second_attempt() {
        let mut calls = 0;
        let r = RetryPolicy::immediate().run(|| {
            calls += 1;
            if calls < 2 {
                Err(ProviderError::EmptyCompletion)
            } else {
                Ok(7)
            }
        });
        assert_eq!(r, Ok(7));
    }
}
