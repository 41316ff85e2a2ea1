//! Time sources for the hub's tick loop.

use std::time::Instant;

/// Seconds since the hub started. Readings never decrease.
pub trait Clock: Send {
    /// Called once per tick; returns the time to tick to.
    fn advance(&mut self) -> f64;
    fn now(&self) -> f64;
}

/// Advances exactly one step per tick, regardless of wall time.
#[derive(Debug, Clone)]
pub struct VirtualClock {
    ticks: u64,
    tick_hz: u32,
}

impl VirtualClock {
    pub fn new(tick_hz: u32) -> Self {
        assert!(tick_hz > 0, "tick rate must be positive");
        Self { ticks: 0, tick_hz }
    }

    pub fn ticks(&self) -> u64 {
        self.ticks
    }
}

impl Clock for VirtualClock {
    fn advance(&mut self) -> f64 {
        self.ticks += 1;
        self.now()
    }

    // Integer tick count over the rate, so tick k always reads the same value.
    fn now(&self) -> f64 {
        self.ticks as f64 / self.tick_hz as f64
    }
}

#[derive(Debug, Clone)]
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        Self { start: Instant::now() }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn advance(&mut self) -> f64 {
        self.now()
    }

    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}
