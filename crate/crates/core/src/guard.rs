use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// Caps on enumeration work. Exceeding a cap is an error, never a truncation.
#[derive(Clone, Copy, Debug)]
pub struct ResourceGuard {
    pub max_count: u64,
    pub max_time: Option<Duration>,
    started: Instant,
}

impl ResourceGuard {
    pub fn new(max_count: u64, max_time: Option<Duration>) -> Self {
        ResourceGuard {
            max_count,
            max_time,
            started: Instant::now(),
        }
    }

    pub fn unlimited() -> Self {
        ResourceGuard::new(u64::MAX, None)
    }

    pub fn with_count(max_count: u64) -> Self {
        ResourceGuard::new(max_count, None)
    }

    pub fn check_count(&self, what: &str, count: u64) -> Result<()> {
        if count > self.max_count {
            return Err(Error::GuardExceeded {
                what: what.to_string(),
                cap: self.max_count,
            });
        }
        Ok(())
    }

    pub fn check_time(&self, what: &str) -> Result<()> {
        if let Some(limit) = self.max_time {
            if self.started.elapsed() > limit {
                return Err(Error::GuardExceeded {
                    what: format!("{what} (time)"),
                    cap: limit.as_secs(),
                });
            }
        }
        Ok(())
    }
}

impl Default for ResourceGuard {
    fn default() -> Self {
        ResourceGuard::new(2_000_000_000, None)
    }
}
