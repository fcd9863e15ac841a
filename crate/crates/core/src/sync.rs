//! Small blocking concurrency primitives shared by the provider and pipeline.

use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

/// Counting semaphore with an adjustable capacity.
#[derive(Debug)]
pub struct Semaphore {
    state: Mutex<SemState>,
    cond: Condvar,
}

#[derive(Debug)]
struct SemState {
    in_use: usize,
    capacity: usize,
}

impl Semaphore {
    pub fn new(capacity: usize) -> Self {
        Semaphore {
            state: Mutex::new(SemState { in_use: 0, capacity: capacity.max(1) }),
            cond: Condvar::new(),
        }
    }

    pub fn set_capacity(&self, capacity: usize) {
        let mut st = self.state.lock().unwrap();
        st.capacity = capacity.max(1);
        self.cond.notify_all();
    }

    pub fn capacity(&self) -> usize {
        self.state.lock().unwrap().capacity
    }

    pub fn acquire(&self) -> SemaphorePermit<'_> {
        let mut st = self.state.lock().unwrap();
        while st.in_use >= st.capacity {
            st = self.cond.wait(st).unwrap();
        }
        st.in_use += 1;
        SemaphorePermit { sem: self }
    }

    fn release(&self) {
        let mut st = self.state.lock().unwrap();
        st.in_use -= 1;
        self.cond.notify_one();
    }
}

pub struct SemaphorePermit<'a> {
    sem: &'a Semaphore,
}

impl Drop for SemaphorePermit<'_> {
    fn drop(&mut self) {
        self.sem.release();
    }
}

/// Token bucket refilled continuously at `per_minute / 60` tokens per second.
#[derive(Debug)]
pub struct TokenBucket {
    capacity: f64,
    refill_per_sec: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn per_minute(per_minute: u32) -> Self {
        let capacity = f64::from(per_minute.max(1));
        TokenBucket {
            capacity,
            refill_per_sec: capacity / 60.0,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    /// Blocks until a token is available and takes it.
    pub fn take(&self) {
        loop {
            let wait = {
                let mut st = self.state.lock().unwrap();
                let now = Instant::now();
                let elapsed = now.duration_since(st.1).as_secs_f64();
                st.0 = (st.0 + elapsed * self.refill_per_sec).min(self.capacity);
                st.1 = now;
                if st.0 >= 1.0 {
                    st.0 -= 1.0;
                    return;
                }
                (1.0 - st.0) / self.refill_per_sec
            };
            std::thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}
