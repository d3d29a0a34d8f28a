//! Phase-scoped wall-clock timers on the monotonic clock.

use std::time::{Duration, Instant};

/// Adds the time between construction and drop to `slot`.
pub struct PhaseTimer<'a> {
    start: Instant,
    slot: &'a mut Duration,
}

impl<'a> PhaseTimer<'a> {
    pub fn new(slot: &'a mut Duration) -> Self {
        Self {
            start: Instant::now(),
            slot,
        }
    }
}

impl Drop for PhaseTimer<'_> {
    fn drop(&mut self) {
        *self.slot += self.start.elapsed();
    }
}

/// Runs `f`, adding its wall time to `slot`.
pub fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let _timer = PhaseTimer::new(slot);
    f()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::thread;

    #[test]
    fn records_elapsed() {
        let mut d = Duration::ZERO;
        {
            let _t = PhaseTimer::new(&mut d);
            thread::sleep(Duration::from_millis(5));
        }
        assert!(d >= Duration::from_millis(5));
    }

    #[test]
    fn accumulates() {
        let mut d = Duration::ZERO;
        for _ in 0..3 {
            timed(&mut d, || thread::sleep(Duration::from_millis(2)));
        }
        assert!(d >= Duration::from_millis(6));
    }
}
