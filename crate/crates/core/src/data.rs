//! Snapshot containers: per-time observation lists for regression (with
//! targets) and density estimation (positions only).

use crate::error::{Error, Result};

/// Observations `(x, y)` taken at one fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    /// `(position, target)` pairs.
    pub points: Vec<(f64, f64)>,
}

impl Snapshot {
    pub fn new(t: f64, points: Vec<(f64, f64)>) -> Self {
        Snapshot { t, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// The full regression sample `S = ∪_k S^(k)`, ordered by strictly
/// increasing snapshot time. Snapshot sizes may differ.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    snapshots: Vec<Snapshot>,
}

impl SnapshotSet {
    pub fn new(snapshots: Vec<Snapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::EmptyInput("snapshot set"));
        }
        for (i, s) in snapshots.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::EmptyInput("snapshot"));
            }
            if !s.t.is_finite() {
                return Err(Error::NonFinite("snapshot time"));
            }
            if i > 0 && s.t <= snapshots[i - 1].t {
                return Err(Error::NonIncreasingTimes {
                    index: i,
                    t: s.t,
                    previous: snapshots[i - 1].t,
                });
            }
        }
        Ok(SnapshotSet { snapshots })
    }

    pub fn snapshots(&self) -> &[Snapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Total number of observations over all snapshots.
    pub fn total_points(&self) -> usize {
        self.snapshots.iter().map(Snapshot::len).sum()
    }

    /// Flat `(x, t)` rows in snapshot-grouped order, matching the assembly
    /// convention of the regression system.
    pub fn flat_rows(&self) -> Vec<(f64, f64)> {
        self.snapshots
            .iter()
            .flat_map(|s| s.points.iter().map(move |&(x, _)| (x, s.t)))
            .collect()
    }

    /// Flat targets in the same order as [`SnapshotSet::flat_rows`].
    pub fn flat_targets(&self) -> Vec<f64> {
        self.snapshots
            .iter()
            .flat_map(|s| s.points.iter().map(|&(_, y)| y))
            .collect()
    }

    /// Flat `(snapshot index, point index)` pairs in assembly order.
    pub fn flat_index(&self) -> Vec<(usize, usize)> {
        self.snapshots
            .iter()
            .enumerate()
            .flat_map(|(k, s)| (0..s.len()).map(move |i| (k, i)))
            .collect()
    }
}

/// Sample positions taken from a density at one fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySnapshot {
    pub t: f64,
    pub positions: Vec<f64>,
}

impl DensitySnapshot {
    pub fn new(t: f64, positions: Vec<f64>) -> Self {
        DensitySnapshot { t, positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Density samples over strictly increasing times.
#[derive(Debug, Clone, PartialEq)]
pub struct DensitySampleSet {
    snapshots: Vec<DensitySnapshot>,
}

impl DensitySampleSet {
    pub fn new(snapshots: Vec<DensitySnapshot>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::EmptyInput("density sample set"));
        }
        for (i, s) in snapshots.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::EmptyInput("density snapshot"));
            }
            if !s.t.is_finite() {
                return Err(Error::NonFinite("snapshot time"));
            }
            if i > 0 && s.t <= snapshots[i - 1].t {
                return Err(Error::NonIncreasingTimes {
                    index: i,
                    t: s.t,
                    previous: snapshots[i - 1].t,
                });
            }
        }
        Ok(DensitySampleSet { snapshots })
    }

    pub fn snapshots(&self) -> &[DensitySnapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn total_points(&self) -> usize {
        self.snapshots.iter().map(DensitySnapshot::len).sum()
    }

    /// Union of all sample positions in snapshot-grouped order: the shared
    /// center set of the combined estimator.
    pub fn all_centers(&self) -> Vec<f64> {
        self.snapshots
            .iter()
            .flat_map(|s| s.positions.iter().copied())
            .collect()
    }

    pub fn flat_index(&self) -> Vec<(usize, usize)> {
        self.snapshots
            .iter()
            .enumerate()
            .flat_map(|(k, s)| (0..s.len()).map(move |i| (k, i)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_unordered() {
        assert!(SnapshotSet::new(vec![]).is_err());
        assert!(SnapshotSet::new(vec![Snapshot::new(0.1, vec![])]).is_err());
        let s = SnapshotSet::new(vec![
            Snapshot::new(0.2, vec![(0.1, 1.0)]),
            Snapshot::new(0.1, vec![(0.2, 1.0)]),
        ]);
        assert!(matches!(s, Err(Error::NonIncreasingTimes { index: 1, .. })));
    }

    #[test]
    fn flat_order_groups_by_snapshot() {
        let set = SnapshotSet::new(vec![
            Snapshot::new(1.0, vec![(1.0, 1.0), (2.0, 1.0)]),
            Snapshot::new(2.0, vec![(1.0, 1.0), (2.0, 2.0)]),
        ])
        .unwrap();
        assert_eq!(
            set.flat_rows(),
            vec![(1.0, 1.0), (2.0, 1.0), (1.0, 2.0), (2.0, 2.0)]
        );
        assert_eq!(set.flat_targets(), vec![1.0, 1.0, 1.0, 2.0]);
        assert_eq!(set.flat_index(), vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert_eq!(set.total_points(), 4);
    }

    #[test]
    fn density_centers_union() {
        let set = DensitySampleSet::new(vec![
            DensitySnapshot::new(0.01, vec![0.1, 0.4]),
            DensitySnapshot::new(0.05, vec![0.7]),
        ])
        .unwrap();
        assert_eq!(set.all_centers(), vec![0.1, 0.4, 0.7]);
        assert_eq!(set.flat_index(), vec![(0, 0), (0, 1), (1, 0)]);
    }
}
