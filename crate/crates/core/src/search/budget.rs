use std::time::{Duration, Instant};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_time: Option<Duration>,
    /// Resident set limit in MiB.
    pub max_memory_mb: Option<u64>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_time: Some(Duration::from_secs(1800)),
            max_memory_mb: Some(1024),
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget {
            max_time: None,
            max_memory_mb: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum BudgetExceeded {
    #[error("time limit exceeded")]
    Time,
    #[error("memory limit exceeded")]
    Memory,
}

const MEMORY_CHECK_INTERVAL: u64 = 512;

#[derive(Debug)]
pub struct Clock {
    budget: Budget,
    start: Instant,
    ticks: u64,
}

impl Clock {
    pub fn start(budget: Budget) -> Self {
        Clock {
            budget,
            start: Instant::now(),
            ticks: 0,
        }
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn check(&mut self) -> Result<(), BudgetExceeded> {
        self.ticks += 1;
        if let Some(t) = self.budget.max_time {
            if self.start.elapsed() > t {
                return Err(BudgetExceeded::Time);
            }
        }
        if let Some(mb) = self.budget.max_memory_mb {
            if self.ticks.is_multiple_of(MEMORY_CHECK_INTERVAL) {
                if let Some(kb) = resident_kb() {
                    if kb > mb * 1024 {
                        return Err(BudgetExceeded::Memory);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Resident set size from `/proc/self/status`, where available.
pub fn resident_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmRSS:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}
