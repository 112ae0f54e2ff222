//! Per-segment timeline export with every smoothing stage side by side:
//! `segment_index,t_center_s,raw,swf,bwf,mcf[,truth]`.

use std::io::{Read, Write};

use crate::activity::Activity;
use crate::error::{Error, Result};
use crate::features::SegmentGrid;
use crate::ingest::AnnotationTrack;
use crate::smoothing::{SmoothedStages, Stage};

/// Labels per stage as read back from a timeline CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub stages: Vec<(Stage, Vec<Activity>)>,
}

impl Timeline {
    pub fn n_segments(&self) -> usize {
        self.stages.first().map_or(0, |s| s.1.len())
    }

    pub fn stage(&self, s: Stage) -> Option<&[Activity]> {
        self.stages.iter().find(|(k, _)| *k == s).map(|(_, v)| v.as_slice())
    }
}

/// The `truth` column is written only when `truth` is given; segments not
/// fully covered by an annotation leave it empty.
pub fn write_timeline(
    grid: &SegmentGrid,
    stages: &SmoothedStages,
    truth: Option<&AnnotationTrack>,
    w: impl Write,
) -> Result<()> {
    if stages.raw.len() != grid.n_segments() {
        return Err(Error::Alignment {
            left: grid.n_segments(),
            right: stages.raw.len(),
        });
    }
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["segment_index", "t_center_s", "raw", "swf", "bwf", "mcf"];
    if truth.is_some() {
        header.push("truth");
    }
    wtr.write_record(&header)?;
    for k in 0..grid.n_segments() {
        let mut rec = vec![k.to_string(), format!("{:.3}", grid.center_s(k))];
        for s in Stage::ALL {
            rec.push(stages.stage(s).labels[k].to_string());
        }
        if let Some(t) = truth {
            rec.push(
                t.label_covering(grid.start_s(k), grid.end_s(k))
                    .map_or(String::new(), |l| l.to_string()),
            );
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_timeline(r: impl Read) -> Result<Timeline> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let cols: Vec<(Stage, usize)> = Stage::ALL
        .iter()
        .map(|&s| {
            headers
                .iter()
                .position(|h| h == s.as_str())
                .map(|c| (s, c))
                .ok_or_else(|| Error::Format {
                    row: 0,
                    msg: format!("timeline lacks a {s} column"),
                })
        })
        .collect::<Result<_>>()?;
    let idx_col = headers.iter().position(|h| h == "segment_index").ok_or_else(|| Error::Format {
        row: 0,
        msg: "timeline lacks a segment_index column".into(),
    })?;
    let mut stages: Vec<(Stage, Vec<Activity>)> = cols.iter().map(|&(s, _)| (s, Vec::new())).collect();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        if rec.get(idx_col) != Some(i.to_string().as_str()) {
            return Err(Error::Format {
                row,
                msg: format!("segment_index should be {i}"),
            });
        }
        for (slot, &(_, c)) in stages.iter_mut().zip(&cols) {
            let label = rec.get(c).unwrap_or("").parse().map_err(|e: Error| Error::Format {
                row,
                msg: e.to_string(),
            })?;
            slot.1.push(label);
        }
    }
    Ok(Timeline { stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::LabelSequence;
    use crate::ingest::Annotation;
    use crate::smoothing::{smooth, SmoothingConfig, TransitionModel};

    #[test]
    fn write_then_read() {
        let grid = SegmentGrid::new(6);
        let raw = LabelSequence::new(
            vec![Activity::Major, Activity::Minor, Activity::Major, Activity::Major, Activity::Minor, Activity::Minor],
            vec![0.0; 6],
            vec![0.9, 0.2, 0.8, 0.7, 0.1, 0.3],
        )
        .unwrap();
        let tm = TransitionModel {
            matrix: [[0.9, 0.1], [0.1, 0.9]],
            initial: [0.5, 0.5],
        };
        let stages = smooth(&raw, &SmoothingConfig::default(), &tm).unwrap();
        let truth = AnnotationTrack::new(vec![Annotation { start_s: 0.0, end_s: 0.3, label: Activity::Major }]).unwrap();
        let mut buf = Vec::new();
        write_timeline(&grid, &stages, Some(&truth), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("segment_index,t_center_s,raw,swf,bwf,mcf,truth\n0,0.060,major,"));
        assert!(text.lines().nth(3).unwrap().ends_with(','), "segment 2 straddles 0.3 s");
        let back = read_timeline(buf.as_slice()).unwrap();
        assert_eq!(back.n_segments(), 6);
        assert_eq!(back.stage(Stage::Raw).unwrap(), raw.labels.as_slice());
        assert_eq!(back.stage(Stage::Mcf).unwrap(), stages.mcf.labels.as_slice());
    }
}
