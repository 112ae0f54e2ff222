use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::error::{Error, Result};
use crate::features::SegmentGrid;
use crate::ingest::{AnnotationTrack, TIME_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start_s: f64,
    pub end_s: f64,
}

impl Interval {
    pub fn new(start_s: f64, end_s: f64) -> Self {
        Self { start_s, end_s }
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    fn contains_span(&self, start_s: f64, end_s: f64) -> bool {
        self.start_s <= start_s + TIME_EPS && end_s <= self.end_s + TIME_EPS
    }
}

/// Labeled time periods used to train the classifier. The standard protocol
/// is four periods per class, each lasting 5 to 10 s; see
/// [`TrainingSelection::check_protocol`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainingSelection {
    pub major_periods: Vec<Interval>,
    pub minor_periods: Vec<Interval>,
}

impl TrainingSelection {
    fn labeled(&self) -> Vec<(Interval, Activity)> {
        let mut all: Vec<(Interval, Activity)> = self
            .major_periods
            .iter()
            .map(|&i| (i, Activity::Major))
            .chain(self.minor_periods.iter().map(|&i| (i, Activity::Minor)))
            .collect();
        all.sort_by(|a, b| a.0.start_s.total_cmp(&b.0.start_s));
        all
    }

    /// Intervals must be well formed, inside `[0, recording_s]`, and disjoint.
    pub fn validate(&self, recording_s: f64) -> Result<()> {
        let all = self.labeled();
        for (iv, label) in &all {
            if !(iv.start_s.is_finite() && iv.end_s.is_finite()) || iv.start_s < 0.0 || iv.start_s >= iv.end_s {
                return Err(Error::invalid(format!(
                    "{label} training period [{}, {}) must satisfy 0 <= start < end",
                    iv.start_s, iv.end_s
                )));
            }
            if iv.end_s > recording_s + TIME_EPS {
                return Err(Error::invalid(format!(
                    "{label} training period [{}, {}) extends past the {recording_s} s recording",
                    iv.start_s, iv.end_s
                )));
            }
        }
        for w in all.windows(2) {
            if w[1].0.start_s < w[0].0.end_s {
                return Err(Error::invalid(format!(
                    "training periods [{}, {}) and [{}, {}) overlap",
                    w[0].0.start_s, w[0].0.end_s, w[1].0.start_s, w[1].0.end_s
                )));
            }
        }
        Ok(())
    }

    /// Checks the period count per class and the allowed duration range.
    pub fn check_protocol(&self, per_class: usize, min_s: f64, max_s: f64) -> Result<()> {
        for (label, periods) in [(Activity::Major, &self.major_periods), (Activity::Minor, &self.minor_periods)] {
            if periods.len() != per_class {
                return Err(Error::invalid(format!(
                    "expected {per_class} {label} training periods, found {}",
                    periods.len()
                )));
            }
            if let Some(p) = periods
                .iter()
                .find(|p| p.duration_s() < min_s - TIME_EPS || p.duration_s() > max_s + TIME_EPS)
            {
                return Err(Error::invalid(format!(
                    "{label} training period [{}, {}) lasts {} s, outside [{min_s}, {max_s}] s",
                    p.start_s,
                    p.end_s,
                    p.duration_s()
                )));
            }
        }
        Ok(())
    }

    /// The first `per_class` annotated intervals of each class, each cut to
    /// at most `max_len_s` from its start.
    pub fn from_annotations(track: &AnnotationTrack, per_class: usize, max_len_s: f64) -> Result<Self> {
        let mut sel = Self::default();
        for a in track.intervals() {
            let periods = match a.label {
                Activity::Major => &mut sel.major_periods,
                Activity::Minor => &mut sel.minor_periods,
            };
            if periods.len() < per_class {
                periods.push(Interval::new(a.start_s, a.end_s.min(a.start_s + max_len_s)));
            }
        }
        for (label, periods) in [(Activity::Major, &sel.major_periods), (Activity::Minor, &sel.minor_periods)] {
            if periods.len() < per_class {
                return Err(Error::invalid(format!(
                    "annotations contain {} {label} intervals, {per_class} needed for training",
                    periods.len()
                )));
            }
        }
        Ok(sel)
    }
}

/// Segments whose whole `[start, end)` span lies inside a training period,
/// in ascending order, with the period's label.
pub fn select_training_rows(grid: &SegmentGrid, sel: &TrainingSelection) -> Result<(Vec<usize>, Vec<Activity>)> {
    sel.validate(grid.duration_s())?;
    let all = sel.labeled();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for k in 0..grid.n_segments() {
        let (s, e) = (grid.start_s(k), grid.end_s(k));
        if let Some((_, label)) = all.iter().find(|(iv, _)| iv.contains_span(s, e)) {
            rows.push(k);
            labels.push(*label);
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyTraining);
    }
    Ok((rows, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Annotation;

    fn major_only(iv: Interval) -> TrainingSelection {
        TrainingSelection {
            major_periods: vec![iv],
            minor_periods: vec![],
        }
    }

    #[test]
    fn whole_segments_only() {
        let grid = SegmentGrid::new(100);
        let (rows, labels) = select_training_rows(&grid, &major_only(Interval::new(0.0, 0.36))).unwrap();
        assert_eq!(rows, vec![0, 1, 2]);
        assert!(labels.iter().all(|&l| l == Activity::Major));
        let (rows, _) = select_training_rows(&grid, &major_only(Interval::new(0.06, 0.30))).unwrap();
        assert_eq!(rows, vec![1]);
        assert!(matches!(
            select_training_rows(&grid, &major_only(Interval::new(0.13, 0.2))),
            Err(Error::EmptyTraining)
        ));
    }

    #[test]
    fn four_by_six_seconds_per_class() {
        let grid = SegmentGrid::new(1000); // 120 s
        let sel = TrainingSelection {
            major_periods: (0..4).map(|i| Interval::new(i as f64 * 24.0, i as f64 * 24.0 + 6.0)).collect(),
            minor_periods: (0..4).map(|i| Interval::new(i as f64 * 24.0 + 12.0, i as f64 * 24.0 + 18.0)).collect(),
        };
        sel.check_protocol(4, 5.0, 10.0).unwrap();
        let (rows, labels) = select_training_rows(&grid, &sel).unwrap();
        assert_eq!(rows.len(), 400);
        assert_eq!(labels.iter().filter(|&&l| l == Activity::Major).count(), 200);
    }

    #[test]
    fn validation_errors() {
        let grid = SegmentGrid::new(10);
        let overlapping = TrainingSelection {
            major_periods: vec![Interval::new(0.0, 0.6)],
            minor_periods: vec![Interval::new(0.5, 1.0)],
        };
        assert!(select_training_rows(&grid, &overlapping).is_err());
        assert!(select_training_rows(&grid, &major_only(Interval::new(0.0, 1.3))).is_err());
        assert!(select_training_rows(&grid, &major_only(Interval::new(0.5, 0.5))).is_err());
        assert!(major_only(Interval::new(0.0, 4.0)).check_protocol(1, 5.0, 10.0).is_err());
    }

    #[test]
    fn from_annotations_truncates() {
        let labels = [Activity::Major, Activity::Minor, Activity::Major, Activity::Minor];
        let mut t = 0.0;
        let mut intervals = Vec::new();
        for (i, l) in labels.iter().enumerate() {
            let d = 5.0 + i as f64;
            intervals.push(Annotation { start_s: t, end_s: t + d, label: *l });
            t += d;
        }
        let track = AnnotationTrack::new(intervals).unwrap();
        let sel = TrainingSelection::from_annotations(&track, 2, 6.0).unwrap();
        assert_eq!(sel.major_periods, vec![Interval::new(0.0, 5.0), Interval::new(11.0, 17.0)]);
        assert_eq!(sel.minor_periods, vec![Interval::new(5.0, 11.0), Interval::new(18.0, 24.0)]);
        assert!(TrainingSelection::from_annotations(&track, 3, 6.0).is_err());
    }
}
