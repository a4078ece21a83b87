//! Non-blocking hand-off between the physics loop and network tasks.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, MutexGuard};

use tokio::sync::Notify;

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

/// Single-value mailbox: a newer value replaces an unread older one.
#[derive(Debug)]
pub struct LatestSlot<T> {
    inner: Mutex<(Option<T>, u64)>,
}

impl<T> Default for LatestSlot<T> {
    fn default() -> Self {
        Self {
            inner: Mutex::new((None, 0)),
        }
    }
}

impl<T> LatestSlot<T> {
    pub fn put(&self, value: T) {
        let mut g = lock(&self.inner);
        g.0 = Some(value);
        g.1 += 1;
    }

    /// Stores `merge(pending, value)` when a value is still unread.
    pub fn put_merged(&self, value: T, merge: impl FnOnce(T, T) -> T) {
        let mut g = lock(&self.inner);
        g.0 = Some(match g.0.take() {
            Some(prev) => merge(prev, value),
            None => value,
        });
        g.1 += 1;
    }

    /// Removes the pending value together with the number of puts since the
    /// previous take.
    pub fn take(&self) -> Option<(T, u64)> {
        let mut g = lock(&self.inner);
        let count = std::mem::take(&mut g.1);
        g.0.take().map(|v| (v, count))
    }

    pub fn is_empty(&self) -> bool {
        lock(&self.inner).0.is_none()
    }
}

/// Bounded FIFO that evicts its oldest entry instead of blocking the producer.
#[derive(Debug)]
pub struct DropOldest<T> {
    inner: Mutex<VecDeque<T>>,
    capacity: usize,
    dropped: AtomicU64,
    notify: Notify,
}

impl<T> DropOldest<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            inner: Mutex::new(VecDeque::with_capacity(capacity)),
            capacity,
            dropped: AtomicU64::new(0),
            notify: Notify::new(),
        }
    }

    pub fn push(&self, value: T) {
        {
            let mut q = lock(&self.inner);
            if q.len() == self.capacity {
                q.pop_front();
                self.dropped.fetch_add(1, Ordering::Relaxed);
            }
            q.push_back(value);
        }
        self.notify.notify_one();
    }

    pub fn try_pop(&self) -> Option<T> {
        lock(&self.inner).pop_front()
    }

    /// Waits for the next entry. Cancel-safe.
    pub async fn pop(&self) -> T {
        loop {
            if let Some(v) = self.try_pop() {
                return v;
            }
            self.notify.notified().await;
        }
    }

    pub fn clear(&self) {
        lock(&self.inner).clear();
    }

    pub fn len(&self) -> usize {
        lock(&self.inner).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dropped(&self) -> u64 {
        self.dropped.load(Ordering::Relaxed)
    }
}
