//! Rolling storage of past fields for delayed-term evaluation.

use std::borrow::Cow;

use crate::error::{Error, Result};
use crate::model::DomainGrid;

/// Initial history `U₀(x, t)` on `t ∈ [-τ_max, 0]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialHistory {
    Zero,
    /// Spatially and temporally constant.
    Uniform(f64),
    /// A fixed field (e.g. a loaded snapshot), constant in time.
    Field(Vec<f64>),
    /// `U₀(x, t) = t` at every point; a diagnostic profile that makes the
    /// lag actually used by a delayed read directly observable.
    TimeRamp,
}

impl InitialHistory {
    /// Evaluate the history on the grid at time `t ≤ 0`.
    pub fn eval(&self, grid: &DomainGrid, t: f64) -> Vec<f64> {
        let n = grid.len();
        match self {
            InitialHistory::Zero => vec![0.0; n],
            InitialHistory::Uniform(c) => vec![*c; n],
            InitialHistory::Field(f) => f.clone(),
            InitialHistory::TimeRamp => vec![t; n],
        }
    }

    fn is_time_dependent(&self) -> bool {
        matches!(self, InitialHistory::TimeRamp)
    }
}

/// Ring buffer of the last `d_max + 1` fields, backed by the initial
/// history for times before the start of the simulation.
///
/// After `k` pushes the current step index is `j = k - 1` and `lookup(d)`
/// returns the field at `t_{j-d}`: a stored slot when the step was
/// simulated, the initial history evaluated at `(j - d) h_t` otherwise.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    grid: DomainGrid,
    h_t: f64,
    capacity: usize,
    slots: Vec<Vec<f64>>,
    pushed: usize,
    u0: InitialHistory,
    /// Pre-evaluated `U₀` for time-independent histories.
    u0_field: Option<Vec<f64>>,
}

impl HistoryBuffer {
    /// Create the buffer and push `U₀(·, 0)` as the step-0 field.
    pub fn new(grid: DomainGrid, d_max: usize, h_t: f64, u0: InitialHistory) -> Result<Self> {
        if let InitialHistory::Field(f) = &u0 {
            if f.len() != grid.len() {
                return Err(Error::config(
                    "initial",
                    format!("initial field has {} points but the grid has {}", f.len(), grid.len()),
                ));
            }
        }
        let u0_field = if u0.is_time_dependent() {
            None
        } else {
            Some(u0.eval(&grid, 0.0))
        };
        let mut buf = HistoryBuffer {
            grid,
            h_t,
            capacity: d_max + 1,
            slots: Vec::with_capacity(d_max + 1),
            pushed: 0,
            u0,
            u0_field,
        };
        let initial = buf.u0.eval(&buf.grid, 0.0);
        buf.push(initial);
        Ok(buf)
    }

    /// Index of the most recent step.
    pub fn step_index(&self) -> usize {
        self.pushed - 1
    }

    pub fn grid(&self) -> &DomainGrid {
        &self.grid
    }

    /// The most recent field (`lookup(0)`).
    pub fn current(&self) -> &[f64] {
        let idx = (self.pushed - 1) % self.capacity;
        &self.slots[idx]
    }

    /// Field at `d` steps in the past. `d` must not exceed the buffer depth.
    pub fn lookup(&self, d: usize) -> Cow<'_, [f64]> {
        assert!(d < self.capacity, "lag {d} exceeds buffer capacity {}", self.capacity);
        if d < self.pushed {
            let idx = (self.pushed - 1 - d) % self.capacity;
            Cow::Borrowed(&self.slots[idx])
        } else if let Some(f) = &self.u0_field {
            Cow::Borrowed(f)
        } else {
            let t = (self.pushed as f64 - 1.0 - d as f64) * self.h_t;
            Cow::Owned(self.u0.eval(&self.grid, t))
        }
    }

    pub fn push(&mut self, field: Vec<f64>) {
        debug_assert_eq!(field.len(), self.grid.len());
        if self.slots.len() < self.capacity {
            self.slots.push(field);
        } else {
            let idx = self.pushed % self.capacity;
            self.slots[idx] = field;
        }
        self.pushed += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid4() -> DomainGrid {
        DomainGrid::new(1.0, 4).unwrap()
    }

    #[test]
    fn zero_history_all_lags() {
        let buf = HistoryBuffer::new(grid4(), 3, 0.25, InitialHistory::Zero).unwrap();
        for d in 0..4 {
            assert_eq!(buf.lookup(d).as_ref(), &[0.0; 4]);
        }
    }

    #[test]
    fn constant_field_extends_backwards() {
        let f = vec![1.0, 2.0, 3.0, 4.0];
        let buf = HistoryBuffer::new(grid4(), 2, 0.1, InitialHistory::Field(f.clone())).unwrap();
        for d in 0..3 {
            assert_eq!(buf.lookup(d).as_ref(), f.as_slice());
        }
    }

    #[test]
    fn no_delay_single_slot() {
        let mut buf = HistoryBuffer::new(grid4(), 0, 0.1, InitialHistory::Zero).unwrap();
        buf.push(vec![5.0; 4]);
        buf.push(vec![6.0; 4]);
        assert_eq!(buf.slots.len(), 1);
        assert_eq!(buf.current(), &[6.0; 4]);
    }

    #[test]
    fn push_then_lookup_rolls() {
        let mut buf = HistoryBuffer::new(grid4(), 2, 0.5, InitialHistory::Uniform(9.0)).unwrap();
        buf.push(vec![1.0; 4]);
        buf.push(vec![2.0; 4]);
        assert_eq!(buf.step_index(), 2);
        assert_eq!(buf.lookup(0).as_ref(), &[2.0; 4]);
        assert_eq!(buf.lookup(1).as_ref(), &[1.0; 4]);
        assert_eq!(buf.lookup(2).as_ref(), &[9.0; 4]);
        buf.push(vec![3.0; 4]);
        assert_eq!(buf.lookup(0).as_ref(), &[3.0; 4]);
        assert_eq!(buf.lookup(2).as_ref(), &[1.0; 4]);
    }

    #[test]
    fn time_ramp_evaluates_past_times() {
        let mut buf = HistoryBuffer::new(grid4(), 3, 0.5, InitialHistory::TimeRamp).unwrap();
        // at j = 0: lookup(d) = U0 at t = -d h_t
        assert_eq!(buf.lookup(0).as_ref(), &[0.0; 4]);
        assert_eq!(buf.lookup(2).as_ref(), &[-1.0; 4]);
        buf.push(vec![7.0; 4]);
        // at j = 1: lookup(3) = U0 at t = -2 h_t
        assert_eq!(buf.lookup(3).as_ref(), &[-1.0; 4]);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let err = HistoryBuffer::new(grid4(), 1, 0.1, InitialHistory::Field(vec![0.0; 5]));
        assert!(err.is_err());
    }
}
