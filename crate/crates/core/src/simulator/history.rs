//! Uniform-grid history of the drive trajectory for delayed lookups.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::models::State;
use crate::scalar::Real;

/// Stored drive samples at uniform spacing, serving `x(t − i·δ)` lookups.
///
/// Sample `j` lives at `t0 + j·step`; sample 0 is the initial state, which
/// also acts as constant pre-history for every lookup at or before `t0`.
/// Delays must land on the grid — the buffer never interpolates. Old samples
/// beyond `capacity` are discarded; looking one of them up is an error, so a
/// too-small capacity fails loudly instead of silently extrapolating.
#[derive(Debug, Clone)]
pub struct DelayHistory<T: Real> {
    step: T,
    t0: T,
    initial_state: State<T>,
    /// Retained samples; `samples[0]` has absolute index `base`.
    samples: VecDeque<State<T>>,
    base: usize,
    capacity: usize,
}

impl<T: Real> DelayHistory<T> {
    /// Empty history starting at `t0` with the given grid spacing.
    ///
    /// `capacity` bounds the number of retained samples (including the
    /// initial one) and must cover the largest delay in use.
    pub fn new(step: T, t0: T, initial_state: State<T>, capacity: usize) -> Result<Self> {
        if !(step > T::zero() && step.is_finite()) {
            return Err(Error::InvalidSetup(format!(
                "history grid spacing must be positive and finite, got {step}"
            )));
        }
        if capacity < 1 {
            return Err(Error::InvalidSetup(
                "history capacity must be at least 1".into(),
            ));
        }
        let mut samples = VecDeque::with_capacity(capacity.min(1 << 16));
        samples.push_back(initial_state.clone());
        Ok(Self {
            step,
            t0,
            initial_state,
            samples,
            base: 0,
            capacity,
        })
    }

    /// Appends the sample for the next grid time, evicting the oldest
    /// retained sample if the buffer is full.
    pub fn push(&mut self, state: State<T>) {
        if self.samples.len() == self.capacity {
            self.samples.pop_front();
            self.base += 1;
        }
        self.samples.push_back(state);
    }

    /// Absolute index of the newest stored sample.
    pub fn newest_index(&self) -> usize {
        self.base + self.samples.len() - 1
    }

    /// Time of the newest stored sample.
    pub fn newest_time(&self) -> T {
        self.t0 + self.step * T::from_config(self.newest_index() as f64)
    }

    /// The delayed state `x(t − i·delta)`.
    ///
    /// Times at or before `t0` resolve to the initial state (constant
    /// pre-history). The target time must sit on the sample grid and must
    /// not lie beyond the newest stored sample.
    pub fn delayed_state(&self, t: T, i: usize, delta: T) -> Result<&State<T>> {
        let target = t - delta * T::from_config(i as f64);
        let offset = (target - self.t0) / self.step;
        let offset_f = offset
            .to_f64()
            .ok_or(Error::NonFinite("history lookup time"))?;
        let j = offset_f.round();
        if (offset_f - j).abs() > 0.25 {
            return Err(Error::Query(format!(
                "delayed lookup at t = {target} is off the history grid (step {})",
                self.step
            )));
        }
        if j <= 0.0 {
            return Ok(&self.initial_state);
        }
        let j = j as usize;
        if j > self.newest_index() {
            return Err(Error::Query(format!(
                "delayed lookup at t = {target} is beyond the newest stored sample"
            )));
        }
        if j < self.base {
            return Err(Error::Query(format!(
                "delayed lookup at t = {target} was evicted (capacity {})",
                self.capacity
            )));
        }
        Ok(&self.samples[j - self.base])
    }
}
