use std::path::Path;

use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 0x0001;
const FORMAT_IEEE_FLOAT: u16 = 0x0003;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

/// Mono audio with samples normalized to `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioStream {
    samples: Vec<f64>,
    sample_rate_hz: u32,
}

impl AudioStream {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::invalid("audio sample rate must be positive"));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite() || s.abs() > 1.0) {
            return Err(Error::invalid(format!(
                "audio sample {i} is {} (must be finite and within [-1, 1])",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WavEncoding {
    Pcm16,
    Pcm24,
    Float32,
}

impl WavEncoding {
    fn bits(self) -> u16 {
        match self {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Pcm24 => 24,
            WavEncoding::Float32 => 32,
        }
    }

    fn format_tag(self) -> u16 {
        match self {
            WavEncoding::Float32 => FORMAT_IEEE_FLOAT,
            _ => FORMAT_PCM,
        }
    }
}

pub fn decode_audio(path: impl AsRef<Path>) -> Result<AudioStream> {
    let bytes = std::fs::read(path)?;
    decode_wav_bytes(&bytes)
}

struct Fmt {
    encoding: WavEncoding,
    channels: u16,
    sample_rate: u32,
    block_align: u16,
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn decode_err(offset: usize, msg: impl Into<String>) -> Error {
    Error::Decode {
        offset: offset as u64,
        msg: msg.into(),
    }
}

fn parse_fmt(b: &[u8], start: usize, size: usize) -> Result<Fmt> {
    if size < 16 {
        return Err(decode_err(start, format!("fmt chunk too short ({size} bytes)")));
    }
    let mut tag = u16_at(b, start);
    let channels = u16_at(b, start + 2);
    let sample_rate = u32_at(b, start + 4);
    let block_align = u16_at(b, start + 12);
    let bits = u16_at(b, start + 14);
    if tag == FORMAT_EXTENSIBLE {
        if size < 40 {
            return Err(decode_err(
                start,
                "WAVE_FORMAT_EXTENSIBLE fmt chunk shorter than 40 bytes",
            ));
        }
        // First two bytes of the sub-format GUID carry the plain format tag.
        tag = u16_at(b, start + 24);
    }
    if channels == 0 {
        return Err(decode_err(start + 2, "channel count is zero"));
    }
    if sample_rate == 0 {
        return Err(decode_err(start + 4, "sample rate is zero"));
    }
    let encoding = match (tag, bits) {
        (FORMAT_PCM, 16) => WavEncoding::Pcm16,
        (FORMAT_PCM, 24) => WavEncoding::Pcm24,
        (FORMAT_IEEE_FLOAT, 32) => WavEncoding::Float32,
        (FORMAT_PCM, b) => {
            return Err(Error::UnsupportedFormat(format!("{b}-bit integer PCM")))
        }
        (FORMAT_IEEE_FLOAT, b) => {
            return Err(Error::UnsupportedFormat(format!("{b}-bit IEEE float")))
        }
        (t, _) => return Err(Error::UnsupportedFormat(format!("format tag 0x{t:04x}"))),
    };
    let expected_align = channels as usize * (bits as usize / 8);
    if block_align as usize != expected_align {
        return Err(decode_err(
            start + 12,
            format!("block align {block_align} inconsistent with {channels} channels of {bits} bits"),
        ));
    }
    Ok(Fmt {
        encoding,
        channels,
        sample_rate,
        block_align,
    })
}

/// Decodes an in-memory RIFF/WAVE file, averaging all channels to mono.
pub fn decode_wav_bytes(b: &[u8]) -> Result<AudioStream> {
    if b.len() < 12 {
        return Err(decode_err(b.len(), "file shorter than the 12-byte RIFF header"));
    }
    if &b[0..4] != b"RIFF" {
        return Err(decode_err(0, "missing RIFF tag"));
    }
    if &b[8..12] != b"WAVE" {
        return Err(decode_err(8, "missing WAVE tag"));
    }

    let mut pos = 12;
    let mut fmt: Option<Fmt> = None;
    while pos < b.len() {
        if b.len() - pos < 8 {
            return Err(decode_err(pos, "truncated chunk header"));
        }
        let id = &b[pos..pos + 4];
        let size = u32_at(b, pos + 4) as usize;
        let body = pos + 8;
        let available = b.len() - body;
        if id == b"data" {
            let fmt = fmt.ok_or_else(|| decode_err(pos, "data chunk before fmt chunk"))?;
            if size > available {
                return Err(decode_err(
                    b.len(),
                    format!("data chunk declares {size} bytes but only {available} remain"),
                ));
            }
            let align = fmt.block_align as usize;
            if size % align != 0 {
                return Err(decode_err(
                    body + size - size % align,
                    format!("data chunk size {size} is not a multiple of the {align}-byte frame"),
                ));
            }
            let samples = decode_frames(&b[body..body + size], &fmt);
            return AudioStream::new(samples, fmt.sample_rate);
        }
        if size > available {
            return Err(decode_err(
                b.len(),
                format!(
                    "chunk {:?} declares {size} bytes but only {available} remain",
                    String::from_utf8_lossy(id)
                ),
            ));
        }
        if id == b"fmt " {
            fmt = Some(parse_fmt(b, body, size)?);
        }
        pos = body + size + (size & 1);
    }
    Err(decode_err(b.len(), "no data chunk"))
}

fn decode_frames(data: &[u8], fmt: &Fmt) -> Vec<f64> {
    let channels = fmt.channels as usize;
    let width = fmt.encoding.bits() as usize / 8;
    let sample = |at: usize| -> f64 {
        match fmt.encoding {
            WavEncoding::Pcm16 => i16::from_le_bytes([data[at], data[at + 1]]) as f64 / 32768.0,
            WavEncoding::Pcm24 => {
                let v = i32::from_le_bytes([0, data[at], data[at + 1], data[at + 2]]) >> 8;
                v as f64 / 8_388_608.0
            }
            WavEncoding::Float32 => {
                let v = f32::from_le_bytes([data[at], data[at + 1], data[at + 2], data[at + 3]]);
                if v.is_finite() {
                    (v as f64).clamp(-1.0, 1.0)
                } else {
                    0.0
                }
            }
        }
    };
    data.chunks_exact(fmt.block_align as usize)
        .enumerate()
        .map(|(frame, _)| {
            let base = frame * fmt.block_align as usize;
            let sum: f64 = (0..channels).map(|c| sample(base + c * width)).sum();
            sum / channels as f64
        })
        .collect()
}

/// Encodes interleaved samples (`channels` per frame) as a canonical
/// 44-byte-header WAV file. Integer encodings round to nearest and clip.
pub fn encode_wav(samples: &[f64], channels: u16, sample_rate: u32, enc: WavEncoding) -> Vec<u8> {
    assert!(channels > 0, "channel count must be positive");
    let width = enc.bits() as usize / 8;
    let data_len = samples.len() * width;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&enc.format_tag().to_le_bytes());
    out.extend_from_slice(&channels.to_le_bytes());
    out.extend_from_slice(&sample_rate.to_le_bytes());
    let block_align = channels as u32 * width as u32;
    out.extend_from_slice(&(sample_rate * block_align).to_le_bytes());
    out.extend_from_slice(&(block_align as u16).to_le_bytes());
    out.extend_from_slice(&enc.bits().to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in samples {
        match enc {
            WavEncoding::Pcm16 => {
                let v = (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                out.extend_from_slice(&v.to_le_bytes());
            }
            WavEncoding::Pcm24 => {
                let v = (s * 8_388_608.0).round().clamp(-8_388_608.0, 8_388_607.0) as i32;
                out.extend_from_slice(&v.to_le_bytes()[..3]);
            }
            WavEncoding::Float32 => out.extend_from_slice(&(s as f32).to_le_bytes()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_scale_16bit_mono() {
        let raw: Vec<u8> = std::iter::repeat(16384i16.to_le_bytes())
            .take(44_100)
            .flatten()
            .collect();
        let mut bytes = encode_wav(&[], 1, 44_100, WavEncoding::Pcm16);
        bytes[40..44].copy_from_slice(&(raw.len() as u32).to_le_bytes());
        bytes.extend_from_slice(&raw);
        let a = decode_wav_bytes(&bytes).unwrap();
        assert_eq!(a.sample_rate_hz(), 44_100);
        assert_eq!(a.len(), 44_100);
        assert!(a.samples().iter().all(|&s| s == 0.5));
    }

    #[test]
    fn antiphase_stereo_downmixes_to_silence() {
        let inter: Vec<f64> = (0..200)
            .flat_map(|i| {
                let v = ((i as f64) * 0.1).sin() * 0.7;
                [v, -v]
            })
            .collect();
        for enc in [WavEncoding::Pcm16, WavEncoding::Pcm24, WavEncoding::Float32] {
            let a = decode_wav_bytes(&encode_wav(&inter, 2, 8000, enc)).unwrap();
            assert_eq!(a.len(), 200);
            assert!(a.samples().iter().all(|&s| s == 0.0), "{enc:?}");
        }
    }

    #[test]
    fn truncated_data_chunk_reports_offset() {
        let mut bytes = encode_wav(&[0.1; 100], 1, 44_100, WavEncoding::Pcm16);
        bytes.truncate(bytes.len() - 2);
        match decode_wav_bytes(&bytes) {
            Err(Error::Decode { offset, .. }) => assert_eq!(offset, bytes.len() as u64),
            other => panic!("expected decode error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_headers() {
        assert!(matches!(
            decode_wav_bytes(b"RIFX\0\0\0\0WAVE"),
            Err(Error::Decode { offset: 0, .. })
        ));
        assert!(matches!(
            decode_wav_bytes(b"RIFF\0\0\0\0WAVX"),
            Err(Error::Decode { offset: 8, .. })
        ));
        assert!(matches!(decode_wav_bytes(b"RIFF"), Err(Error::Decode { .. })));
    }

    #[test]
    fn unsupported_encodings() {
        let mut bytes = encode_wav(&[0.0; 4], 1, 8000, WavEncoding::Pcm16);
        bytes[34..36].copy_from_slice(&8u16.to_le_bytes());
        bytes[32..34].copy_from_slice(&1u16.to_le_bytes());
        assert!(matches!(decode_wav_bytes(&bytes), Err(Error::UnsupportedFormat(_))));

        let mut bytes = encode_wav(&[0.0; 4], 1, 8000, WavEncoding::Pcm16);
        bytes[20..22].copy_from_slice(&0x0055u16.to_le_bytes()); // MP3
        assert!(matches!(decode_wav_bytes(&bytes), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn skips_unknown_chunks_and_reads_extensible() {
        let base = encode_wav(&[0.25, -0.25], 1, 16_000, WavEncoding::Pcm24);
        let mut bytes = base[..12].to_vec();
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[1, 2, 3, 0]); // odd size + pad byte
        // Extensible fmt chunk.
        bytes.extend_from_slice(b"fmt ");
        bytes.extend_from_slice(&40u32.to_le_bytes());
        bytes.extend_from_slice(&FORMAT_EXTENSIBLE.to_le_bytes());
        bytes.extend_from_slice(&base[22..36]);
        bytes.extend_from_slice(&22u16.to_le_bytes());
        bytes.extend_from_slice(&24u16.to_le_bytes());
        bytes.extend_from_slice(&4u32.to_le_bytes());
        bytes.extend_from_slice(&FORMAT_PCM.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 14]);
        bytes.extend_from_slice(&base[36..]);
        let a = decode_wav_bytes(&bytes).unwrap();
        assert_eq!(a.samples(), &[0.25, -0.25]);
        assert_eq!(a.sample_rate_hz(), 16_000);
    }

    proptest! {
        #[test]
        fn roundtrip_within_one_lsb(xs in prop::collection::vec(-1.0f64..=1.0, 1..300)) {
            for (enc, bits) in [(WavEncoding::Pcm16, 16), (WavEncoding::Pcm24, 24)] {
                let a = decode_wav_bytes(&encode_wav(&xs, 1, 44_100, enc)).unwrap();
                let lsb = 1.0 / f64::powi(2.0, bits - 1);
                for (x, y) in xs.iter().zip(a.samples()) {
                    prop_assert!((x - y).abs() <= lsb);
                }
            }
            let a = decode_wav_bytes(&encode_wav(&xs, 1, 44_100, WavEncoding::Float32)).unwrap();
            for (x, y) in xs.iter().zip(a.samples()) {
                prop_assert_eq!(*x as f32 as f64, *y);
            }
        }
    }
}
