//! Finite time grids, contiguous windows, and paths over windows.
//!
//! A grid is a strictly increasing finite set of nonnegative times. A window
//! is the slice of a grid between two member times (inclusive), and a path
//! assigns one state value to each window point. Grid membership is decided
//! by exact equality on the stored representation, never by tolerance, so
//! window algebra is exact.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing, nonempty, nonnegative times.
#[derive(Clone, Debug)]
pub struct TimeGrid {
    times: Arc<Vec<f64>>,
}

impl PartialEq for TimeGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.times, &other.times) || self.times == other.times
    }
}

/// Builds a grid, validating ordering and sign.
pub fn make_grid(times: &[f64]) -> Result<TimeGrid> {
    if times.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for (i, &t) in times.iter().enumerate() {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::NegativeTime { value: t });
        }
        if i > 0 && times[i - 1] >= t {
            return Err(Error::NonIncreasingTimes { index: i });
        }
    }
    Ok(TimeGrid {
        times: Arc::new(times.to_vec()),
    })
}

impl TimeGrid {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // nonempty by construction
    }

    /// First grid time.
    pub fn inf(&self) -> f64 {
        self.times[0]
    }

    /// Last grid time.
    pub fn sup(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Index of an exact grid member.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        self.times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
            .map_err(|_| Error::TimeNotOnGrid { value: t })
    }

    /// Window spanning `[r, t]`; both bounds must be grid members.
    pub fn window(&self, r: f64, t: f64) -> Result<Window> {
        if r > t {
            return Err(Error::WindowBounds { r, t });
        }
        let start = self.index_of(r)?;
        let end = self.index_of(t)?;
        Ok(Window {
            grid: self.clone(),
            start,
            end,
        })
    }

    /// Window spanning the whole grid.
    pub fn full_window(&self) -> Window {
        Window {
            grid: self.clone(),
            start: 0,
            end: self.times.len() - 1,
        }
    }

    /// Window from inclusive grid indices.
    pub fn window_by_index(&self, start: usize, end: usize) -> Result<Window> {
        if start > end || end >= self.times.len() {
            return Err(Error::WindowBounds {
                r: self.times.get(start).copied().unwrap_or(f64::NAN),
                t: self.times.get(end).copied().unwrap_or(f64::NAN),
            });
        }
        Ok(Window {
            grid: self.clone(),
            start,
            end,
        })
    }
}

/// Contiguous, nonempty slice of a grid (inclusive index range).
#[derive(Clone, Debug)]
pub struct Window {
    grid: TimeGrid,
    start: usize,
    end: usize,
}

impl PartialEq for Window {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start && self.end == other.end && self.grid == other.grid
    }
}

impl Window {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn start_index(&self) -> usize {
        self.start
    }

    pub fn end_index(&self) -> usize {
        self.end
    }

    pub fn start_time(&self) -> f64 {
        self.grid.times()[self.start]
    }

    pub fn end_time(&self) -> f64 {
        self.grid.times()[self.end]
    }

    /// Number of grid points in the window (always >= 1).
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_singleton(&self) -> bool {
        self.start == self.end
    }

    /// The window's grid times.
    pub fn times(&self) -> &[f64] {
        &self.grid.times()[self.start..=self.end]
    }

    pub fn time_at(&self, offset: usize) -> f64 {
        self.grid.times()[self.start + offset]
    }

    /// True when `other` is a sub-window of `self` on the same grid.
    pub fn contains(&self, other: &Window) -> bool {
        self.grid == other.grid && self.start <= other.start && other.end <= self.end
    }
}

/// One state sample: a real scalar or a nonnegative weight vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateValue {
    Scalar(f64),
    Weights(Vec<f64>),
}

/// Shape of a path's state values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Scalar,
    Weights(usize),
}

impl StateKind {
    pub fn name(&self) -> &'static str {
        match self {
            StateKind::Scalar => "scalar",
            StateKind::Weights(_) => "weight-vector",
        }
    }
}

/// A finite map from a window's grid points to state values.
#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    window: Window,
    values: Vec<StateValue>,
}

/// Builds a path, validating length, homogeneity, and weight signs.
pub fn make_path(window: Window, values: Vec<StateValue>) -> Result<Path> {
    if values.len() != window.len() {
        return Err(Error::ValueCountMismatch {
            expected: window.len(),
            actual: values.len(),
        });
    }
    let kind = state_kind(&values[0])?;
    for v in &values[1..] {
        if state_kind(v)? != kind {
            return Err(Error::InconsistentStateKind);
        }
    }
    Ok(Path { window, values })
}

fn state_kind(v: &StateValue) -> Result<StateKind> {
    match v {
        StateValue::Scalar(_) => Ok(StateKind::Scalar),
        StateValue::Weights(w) => {
            check_weights(w)?;
            Ok(StateKind::Weights(w.len()))
        }
    }
}

/// Rejects negative or non-finite weight components.
pub fn check_weights(w: &[f64]) -> Result<()> {
    for (index, &value) in w.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::NegativeWeight { index, value });
        }
    }
    Ok(())
}

/// Convenience constructor for scalar paths.
pub fn scalar_path(window: Window, values: &[f64]) -> Result<Path> {
    make_path(window, values.iter().map(|&v| StateValue::Scalar(v)).collect())
}

impl Path {
    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn values(&self) -> &[StateValue] {
        &self.values
    }

    pub fn kind(&self) -> StateKind {
        state_kind(&self.values[0]).expect("validated at construction")
    }

    pub fn value_at(&self, offset: usize) -> &StateValue {
        &self.values[offset]
    }

    /// Value at the window's last grid point.
    pub fn terminal(&self) -> &StateValue {
        self.values.last().unwrap()
    }

    /// Terminal value of a scalar path.
    pub fn terminal_scalar(&self) -> Result<f64> {
        match self.terminal() {
            StateValue::Scalar(x) => Ok(*x),
            StateValue::Weights(_) => Err(Error::UnsupportedState {
                kind: "scalar accessor",
                state: "weight-vector",
            }),
        }
    }

    /// Terminal value of a weight-vector path.
    pub fn terminal_weights(&self) -> Result<&[f64]> {
        match self.terminal() {
            StateValue::Weights(w) => Ok(w),
            StateValue::Scalar(_) => Err(Error::UnsupportedState {
                kind: "weight accessor",
                state: "scalar",
            }),
        }
    }

    /// Restriction to a sub-window; values at kept points are preserved exactly.
    pub fn restrict(&self, sub: &Window) -> Result<Path> {
        if !self.window.contains(sub) {
            return Err(Error::WindowNotContained);
        }
        let offset = sub.start_index() - self.window.start_index();
        let values = self.values[offset..offset + sub.len()].to_vec();
        Ok(Path {
            window: sub.clone(),
            values,
        })
    }

    /// Max pointwise absolute difference between two paths on one window.
    pub fn sup_distance(&self, other: &Path) -> Result<f64> {
        if self.window != other.window {
            return Err(Error::SourceWindowMismatch);
        }
        if self.kind() != other.kind() {
            return Err(Error::InconsistentStateKind);
        }
        let mut d: f64 = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            match (a, b) {
                (StateValue::Scalar(x), StateValue::Scalar(y)) => d = d.max((x - y).abs()),
                (StateValue::Weights(x), StateValue::Weights(y)) => {
                    for (xi, yi) in x.iter().zip(y) {
                        d = d.max((xi - yi).abs());
                    }
                }
                _ => return Err(Error::InconsistentStateKind),
            }
        }
        Ok(d)
    }

    /// CSV rendering: `time,value` for scalar paths, `time,value_1,...,value_Q`
    /// for weight paths. Numbers print as shortest round-trip decimal text.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.kind() {
            StateKind::Scalar => out.push_str("time,value\n"),
            StateKind::Weights(q) => {
                out.push_str("time");
                for i in 1..=q {
                    let _ = write!(out, ",value_{i}");
                }
                out.push('\n');
            }
        }
        for (offset, v) in self.values.iter().enumerate() {
            let _ = write!(out, "{}", self.window.time_at(offset));
            match v {
                StateValue::Scalar(x) => {
                    let _ = write!(out, ",{x}");
                }
                StateValue::Weights(w) => {
                    for x in w {
                        let _ = write!(out, ",{x}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// JSON rendering: window descriptor plus value array.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "grid": self.window.grid().times(),
            "r": self.window.start_time(),
            "t": self.window.end_time(),
            "values": self.values,
        })
    }

    /// Rebuilds a path from the [`Path::to_json`] representation.
    pub fn from_json(value: &serde_json::Value) -> Result<Path> {
        #[derive(Deserialize)]
        struct Repr {
            grid: Vec<f64>,
            r: f64,
            t: f64,
            values: Vec<StateValue>,
        }
        let repr: Repr = serde_json::from_value(value.clone())?;
        let grid = make_grid(&repr.grid)?;
        let window = grid.window(repr.r, repr.t)?;
        make_path(window, repr.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid_0123() -> TimeGrid {
        make_grid(&[0.0, 1.0, 2.0, 3.0]).unwrap()
    }

    #[test]
    fn values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<TimeGrid>();
        assert_send_sync::<Window>();
        assert_send_sync::<Path>();
    }

    #[test]
    fn make_grid_basic() {
        let g = grid_0123();
        assert_eq!(g.inf(), 0.0);
        assert_eq!(g.sup(), 3.0);
        assert_eq!(g.len(), 4);
        assert_eq!(make_grid(&[0.0]).unwrap().len(), 1);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(matches!(make_grid(&[]), Err(Error::EmptyGrid)));
        assert!(matches!(
            make_grid(&[1.0, 1.0, 2.0]),
            Err(Error::NonIncreasingTimes { index: 1 })
        ));
        assert!(matches!(
            make_grid(&[0.0, 2.0, 1.0]),
            Err(Error::NonIncreasingTimes { index: 2 })
        ));
        assert!(matches!(
            make_grid(&[-1.0, 0.0]),
            Err(Error::NegativeTime { .. })
        ));
    }

    #[test]
    fn window_membership() {
        let g = grid_0123();
        let w = g.window(2.0, 2.0).unwrap();
        assert!(w.is_singleton());
        assert_eq!(w.times(), &[2.0]);

        let full = g.window(g.inf(), g.sup()).unwrap();
        assert_eq!(full, g.full_window());
        assert_eq!(full.times(), g.times());

        let g2 = make_grid(&[0.0, 1.0, 2.0, 4.0]).unwrap();
        let w2 = g2.window(0.0, 2.0).unwrap();
        assert_eq!(w2.times(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn window_rejects_bad_bounds() {
        let g = grid_0123();
        assert!(matches!(
            g.window(2.0, 1.0),
            Err(Error::WindowBounds { .. })
        ));
        assert!(matches!(
            g.window(0.0, 2.5),
            Err(Error::TimeNotOnGrid { .. })
        ));
    }

    #[test]
    fn make_path_validation() {
        let g = grid_0123();
        let w = g.window(0.0, 2.0).unwrap();
        assert!(scalar_path(w.clone(), &[1.0, 2.0, 3.0]).is_ok());
        assert!(matches!(
            scalar_path(w.clone(), &[1.0, 2.0]),
            Err(Error::ValueCountMismatch {
                expected: 3,
                actual: 2
            })
        ));
        let bad = make_path(
            w.clone(),
            vec![
                StateValue::Weights(vec![0.5, 0.5]),
                StateValue::Weights(vec![0.5, -0.1]),
                StateValue::Weights(vec![0.5, 0.5]),
            ],
        );
        assert!(matches!(bad, Err(Error::NegativeWeight { index: 1, .. })));
        let mixed = make_path(
            w,
            vec![
                StateValue::Scalar(1.0),
                StateValue::Weights(vec![0.5]),
                StateValue::Scalar(2.0),
            ],
        );
        assert!(matches!(mixed, Err(Error::InconsistentStateKind)));
    }

    #[test]
    fn restrict_behaviour() {
        let g = grid_0123();
        let w = g.window(0.0, 2.0).unwrap();
        let p = scalar_path(w.clone(), &[10.0, 11.0, 12.0]).unwrap();

        assert_eq!(p.restrict(&w).unwrap(), p);

        let sub = g.window(1.0, 2.0).unwrap();
        let q = p.restrict(&sub).unwrap();
        assert_eq!(q.values(), &[StateValue::Scalar(11.0), StateValue::Scalar(12.0)]);

        let disjoint = g.window(3.0, 3.0).unwrap();
        assert!(matches!(
            p.restrict(&disjoint),
            Err(Error::WindowNotContained)
        ));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let g = make_grid(&[0.0, 0.1, 0.2]).unwrap();
        let p = scalar_path(g.full_window(), &[0.1, -2.5, 1e-12]).unwrap();
        let csv = p.to_csv();
        assert_eq!(csv, "time,value\n0,0.1\n0.1,-2.5\n0.2,0.000000000001\n");
        // Shortest round-trip text parses back to identical bits.
        for line in csv.lines().skip(1) {
            for field in line.split(',') {
                let x: f64 = field.parse().unwrap();
                assert_eq!(format!("{x}"), field);
            }
        }
        let back = Path::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);

        let wp = make_path(
            g.full_window(),
            vec![
                StateValue::Weights(vec![0.25, 0.75]),
                StateValue::Weights(vec![0.5, 0.5]),
                StateValue::Weights(vec![1.0, 0.0]),
            ],
        )
        .unwrap();
        assert!(wp.to_csv().starts_with("time,value_1,value_2\n"));
        assert_eq!(Path::from_json(&wp.to_json()).unwrap(), wp);
    }

    proptest! {
        // Nested windows: [r,s] subset of [r,t] for s <= t.
        #[test]
        fn window_nesting(len in 2usize..12, a in 0usize..12, b in 0usize..12, c in 0usize..12) {
            let times: Vec<f64> = (0..len).map(|i| i as f64 * 0.5).collect();
            let g = make_grid(&times).unwrap();
            let mut idx = [a % len, b % len, c % len];
            idx.sort_unstable();
            let [r, s, t] = idx;
            let ws = g.window_by_index(r, s).unwrap();
            let wt = g.window_by_index(r, t).unwrap();
            prop_assert!(wt.contains(&ws));
            prop_assert!(ws.times().iter().all(|x| wt.times().contains(x)));
        }

        // restrict(restrict(p, w1), w2) == restrict(p, w2) for w2 ⊆ w1 ⊆ p.window.
        #[test]
        fn restrict_composes(len in 3usize..10, seed in 0u64..1000) {
            let times: Vec<f64> = (0..len).map(|i| i as f64).collect();
            let g = make_grid(&times).unwrap();
            let vals: Vec<f64> = (0..len).map(|i| (seed as f64) + i as f64).collect();
            let p = scalar_path(g.full_window(), &vals).unwrap();
            let w1 = g.window_by_index(1, len - 1).unwrap();
            let w2 = g.window_by_index(1, len - 2).unwrap();
            let lhs = p.restrict(&w1).unwrap().restrict(&w2).unwrap();
            let rhs = p.restrict(&w2).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn singleton_windows(t_idx in 0usize..8) {
            let times: Vec<f64> = (0..8).map(|i| i as f64 * 0.25).collect();
            let g = make_grid(&times).unwrap();
            let t = times[t_idx];
            let w = g.window(t, t).unwrap();
            prop_assert_eq!(w.len(), 1);
            prop_assert!(w.is_singleton());
        }
    }
}
