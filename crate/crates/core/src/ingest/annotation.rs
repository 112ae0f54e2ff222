use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::activity::Activity;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub start_s: f64,
    pub end_s: f64,
    pub label: Activity,
}

/// Sorted, non-overlapping ground-truth intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnnotationTrack {
    intervals: Vec<Annotation>,
}

/// Slack for comparing segment edges (multiples of 0.12 s) against interval bounds.
pub(crate) const TIME_EPS: f64 = 1e-9;

impl AnnotationTrack {
    pub fn new(intervals: Vec<Annotation>) -> Result<Self> {
        for (i, a) in intervals.iter().enumerate() {
            if !(a.start_s.is_finite() && a.end_s.is_finite()) || a.start_s < 0.0 || a.start_s >= a.end_s {
                return Err(Error::Format {
                    row: i + 1,
                    msg: format!("interval [{}, {}) must satisfy 0 <= start < end", a.start_s, a.end_s),
                });
            }
            if i > 0 && a.start_s < intervals[i - 1].end_s {
                return Err(Error::Format {
                    row: i + 1,
                    msg: format!(
                        "interval starting at {} overlaps or precedes the previous one ending at {}",
                        a.start_s,
                        intervals[i - 1].end_s
                    ),
                });
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[Annotation] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Label of the interval that fully contains `[start_s, end_s)`, if any.
    pub fn label_covering(&self, start_s: f64, end_s: f64) -> Option<Activity> {
        let idx = self.intervals.partition_point(|a| a.end_s < end_s - TIME_EPS);
        self.intervals
            .get(idx)
            .filter(|a| a.start_s <= start_s + TIME_EPS && end_s <= a.end_s + TIME_EPS)
            .map(|a| a.label)
    }

    /// Label at instant `t`, if it falls inside an interval.
    pub fn label_at(&self, t: f64) -> Option<Activity> {
        let idx = self.intervals.partition_point(|a| a.end_s <= t);
        self.intervals
            .get(idx)
            .filter(|a| a.start_s <= t)
            .map(|a| a.label)
    }
}

pub fn decode_annotations(path: impl AsRef<Path>) -> Result<AnnotationTrack> {
    parse_annotations(std::fs::File::open(path)?)
}

/// Parses `start_s,end_s,label` rows; labels are case-insensitive.
pub fn parse_annotations(reader: impl Read) -> Result<AnnotationTrack> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h.eq_ignore_ascii_case(name)).ok_or_else(|| Error::Format {
            row: 0,
            msg: format!("missing column {name:?}"),
        })
    };
    let (cs, ce, cl) = (col("start_s")?, col("end_s")?, col("label")?);
    let mut intervals = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let num = |c: usize| -> Result<f64> {
            rec.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Format {
                    row,
                    msg: "cannot parse interval bound".into(),
                })
        };
        let label = rec
            .get(cl)
            .unwrap_or("")
            .parse::<Activity>()
            .map_err(|e| Error::Format {
                row,
                msg: e.to_string(),
            })?;
        intervals.push(Annotation {
            start_s: num(cs)?,
            end_s: num(ce)?,
            label,
        });
    }
    AnnotationTrack::new(intervals)
}

pub fn encode_annotations(track: &AnnotationTrack, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["start_s", "end_s", "label"])?;
    for a in track.intervals() {
        wtr.write_record([a.start_s.to_string(), a.end_s.to_string(), a.label.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_lookup() {
        let t = parse_annotations("start_s,end_s,label\n0,5.5,Major\n5.5,9,minor\n12,14,MAJOR\n".as_bytes())
            .unwrap();
        assert_eq!(t.intervals().len(), 3);
        assert_eq!(t.label_covering(0.0, 0.12), Some(Activity::Major));
        assert_eq!(t.label_covering(5.4, 5.52), None);
        assert_eq!(t.label_covering(5.52, 5.64), Some(Activity::Minor));
        assert_eq!(t.label_covering(9.0, 9.12), None);
        assert_eq!(t.label_covering(13.88, 14.0), Some(Activity::Major));
        assert_eq!(t.label_at(10.0), None);
        assert_eq!(t.label_at(5.5), Some(Activity::Minor));
    }

    #[test]
    fn rejects_overlap_and_bad_labels() {
        assert!(matches!(
            parse_annotations("start_s,end_s,label\n0,5,major\n4,6,minor\n".as_bytes()),
            Err(Error::Format { row: 2, .. })
        ));
        assert!(matches!(
            parse_annotations("start_s,end_s,label\n0,5,idle\n".as_bytes()),
            Err(Error::Format { row: 1, .. })
        ));
        assert!(AnnotationTrack::new(vec![Annotation { start_s: 2.0, end_s: 2.0, label: Activity::Major }]).is_err());
    }

    #[test]
    fn roundtrip() {
        let t = AnnotationTrack::new(vec![
            Annotation { start_s: 0.0, end_s: 6.283, label: Activity::Minor },
            Annotation { start_s: 6.283, end_s: 13.1, label: Activity::Major },
        ])
        .unwrap();
        let mut buf = Vec::new();
        encode_annotations(&t, &mut buf).unwrap();
        assert_eq!(parse_annotations(buf.as_slice()).unwrap(), t);
    }
}
