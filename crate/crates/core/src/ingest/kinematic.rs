use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const DEFAULT_KINEMATIC_RATE_HZ: u32 = 100;

pub const ACC_X: usize = 0;
pub const ACC_Y: usize = 1;
pub const ACC_Z: usize = 2;
pub const GYR_X: usize = 3;
pub const GYR_Y: usize = 4;
pub const GYR_Z: usize = 5;

/// CSV column names, in channel order.
pub const CHANNEL_NAMES: [&str; 6] = ["ax", "ay", "az", "gx", "gy", "gz"];

/// Six synchronized, uniformly sampled IMU channels: acceleration (m/s²)
/// then angular velocity (rad/s), each along x, y, z.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicStream {
    channels: [Vec<f64>; 6],
    sample_rate_hz: u32,
}

impl KinematicStream {
    pub fn new(channels: [Vec<f64>; 6], sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("kinematic sample rate must be positive"));
        }
        let n = channels[0].len();
        if let Some(c) = channels.iter().position(|c| c.len() != n) {
            return Err(Error::invalid(format!(
                "kinematic channel {} has {} samples, expected {n}",
                CHANNEL_NAMES[c],
                channels[c].len()
            )));
        }
        for (c, ch) in channels.iter().enumerate() {
            if let Some(i) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::invalid(format!(
                    "kinematic channel {} sample {i} is not finite",
                    CHANNEL_NAMES[c]
                )));
            }
        }
        Ok(Self {
            channels,
            sample_rate_hz,
        })
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<f64>; 6] {
        &self.channels
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz as f64
    }
}

pub fn decode_kinematic(path: impl AsRef<Path>) -> Result<KinematicStream> {
    parse_kinematic_csv(std::fs::File::open(path)?)
}

/// Parses `t,ax,ay,az,gx,gy,gz` rows (any column order) and linearly
/// resamples them onto a uniform 100 Hz grid starting at the first
/// timestamp. Output length is `round((t_last - t_first) * 100) + 1`.
pub fn parse_kinematic_csv(reader: impl Read) -> Result<KinematicStream> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Format {
                row: 0,
                msg: format!("missing column {name:?}"),
            })
    };
    let t_col = col("t")?;
    let value_cols: Vec<usize> = CHANNEL_NAMES.iter().map(|n| col(n)).collect::<Result<_>>()?;

    let mut times: Vec<f64> = Vec::new();
    let mut values: [Vec<f64>; 6] = Default::default();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let field = |c: usize, name: &str| -> Result<f64> {
            let s = rec.get(c).ok_or_else(|| Error::Format {
                row,
                msg: format!("missing value for {name}"),
            })?;
            let v: f64 = s.parse().map_err(|_| Error::Format {
                row,
                msg: format!("cannot parse {name} value {s:?}"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Format {
                    row,
                    msg: format!("{name} value is not finite"),
                })
            }
        };
        let t = field(t_col, "t")?;
        if let Some(&prev) = times.last() {
            if t <= prev {
                return Err(Error::Format {
                    row,
                    msg: format!("timestamp {t} does not increase (previous {prev})"),
                });
            }
        }
        times.push(t);
        for (c, &vc) in value_cols.iter().enumerate() {
            values[c].push(field(vc, CHANNEL_NAMES[c])?);
        }
    }
    if times.is_empty() {
        return Err(Error::Format {
            row: 1,
            msg: "no data rows".into(),
        });
    }

    let rate = DEFAULT_KINEMATIC_RATE_HZ;
    let t0 = times[0];
    let span = times[times.len() - 1] - t0;
    let n_out = (span * rate as f64).round() as usize + 1;
    let mut out: [Vec<f64>; 6] = Default::default();
    for ch in out.iter_mut() {
        ch.reserve(n_out);
    }
    let mut k = 0;
    for i in 0..n_out {
        let t = t0 + i as f64 / rate as f64;
        while k + 1 < times.len() && times[k + 1] <= t {
            k += 1;
        }
        let exact = (t - times[k]).abs() < 1e-9;
        for c in 0..6 {
            let v = if exact || k + 1 == times.len() {
                values[c][k]
            } else if (times[k + 1] - t).abs() < 1e-9 {
                values[c][k + 1]
            } else {
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[c][k] + (values[c][k + 1] - values[c][k]) * w
            };
            out[c].push(v);
        }
    }
    KinematicStream::new(out, rate)
}

/// Writes the stream back out as `t,ax,ay,az,gx,gy,gz` with `t = i / rate`.
pub fn encode_kinematic_csv(kin: &KinematicStream, w: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(std::iter::once("t").chain(CHANNEL_NAMES))?;
    let rate = kin.sample_rate_hz() as f64;
    for i in 0..kin.len() {
        let mut rec = Vec::with_capacity(7);
        rec.push((i as f64 / rate).to_string());
        rec.extend(kin.channels().iter().map(|c| c[i].to_string()));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
