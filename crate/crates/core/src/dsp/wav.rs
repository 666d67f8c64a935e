//! RIFF/WAVE reader and writer, PCM 16-bit little-endian mono at 16 kHz.

use std::path::Path;

use super::SAMPLE_RATE_HZ;
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct AudioClip<T> {
    pub samples: Vec<T>,
    pub sample_rate_hz: u32,
}

impl<T: Scalar> AudioClip<T> {
    pub fn new(samples: Vec<T>) -> Self {
        Self { samples, sample_rate_hz: SAMPLE_RATE_HZ }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn unsupported(field: &'static str, value: impl ToString, expected: impl ToString) -> Error {
    Error::UnsupportedFormat { field, value: value.to_string(), expected: expected.to_string() }
}

/// Decodes WAV bytes; integer samples are divided by 32768.
pub fn decode_wav<T: Scalar>(bytes: &[u8]) -> Result<AudioClip<T>> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(Error::Format("missing RIFF/WAVE header".into()));
    }
    let mut fmt_seen = false;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        let end = body
            .checked_add(size)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| Error::Format(format!("chunk {:?} truncated", String::from_utf8_lossy(id))))?;
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(Error::Format(format!("fmt chunk of {size} bytes")));
                }
                let audio_format = u16_at(bytes, body);
                let channels = u16_at(bytes, body + 2);
                let rate = u32_at(bytes, body + 4);
                let bits = u16_at(bytes, body + 14);
                if audio_format != 1 {
                    return Err(unsupported("audio_format", audio_format, "1 (PCM)"));
                }
                if channels != 1 {
                    return Err(unsupported("channels", channels, 1));
                }
                if rate != SAMPLE_RATE_HZ {
                    return Err(unsupported("sample_rate", rate, SAMPLE_RATE_HZ));
                }
                if bits != 16 {
                    return Err(unsupported("bits_per_sample", bits, 16));
                }
                fmt_seen = true;
            }
            b"data" => {
                if !fmt_seen {
                    return Err(Error::Format("data chunk before fmt chunk".into()));
                }
                if !size.is_multiple_of(2) {
                    return Err(Error::Format(format!("data chunk of odd length {size}")));
                }
                let inv = T::lit(1.0 / 32768.0);
                let samples = bytes[body..end]
                    .chunks_exact(2)
                    .map(|b| T::lit(f64::from(i16::from_le_bytes([b[0], b[1]]))) * inv)
                    .collect();
                return Ok(AudioClip::new(samples));
            }
            _ => {}
        }
        // chunks are word aligned
        pos = end + (size & 1);
    }
    Err(Error::Format("no data chunk".into()))
}

pub fn load_wav<T: Scalar>(path: impl AsRef<Path>) -> Result<AudioClip<T>> {
    decode_wav(&std::fs::read(path)?)
}

/// Encodes as PCM s16le mono; samples are scaled by 32768, rounded and
/// clipped to the i16 range.
pub fn encode_wav<T: Scalar>(clip: &AudioClip<T>) -> Vec<u8> {
    let data_len = clip.samples.len() * 2;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&clip.sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(clip.sample_rate_hz * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &s in &clip.samples {
        let q = (s.as_f64() * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        out.extend_from_slice(&q.to_le_bytes());
    }
    out
}

pub fn save_wav<T: Scalar>(path: impl AsRef<Path>, clip: &AudioClip<T>) -> Result<()> {
    std::fs::write(path, encode_wav(clip))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Canonical 44-byte header followed by the given samples.
    fn fixture(channels: u16, rate: u32, format: u16, samples: &[i16]) -> Vec<u8> {
        let mut b = Vec::new();
        let data_len = (samples.len() * 2) as u32;
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&(36 + data_len).to_le_bytes());
        b.extend_from_slice(b"WAVE");
        b.extend_from_slice(b"fmt ");
        b.extend_from_slice(&16u32.to_le_bytes());
        b.extend_from_slice(&format.to_le_bytes());
        b.extend_from_slice(&channels.to_le_bytes());
        b.extend_from_slice(&rate.to_le_bytes());
        b.extend_from_slice(&(rate * 2 * channels as u32).to_le_bytes());
        b.extend_from_slice(&(2 * channels).to_le_bytes());
        b.extend_from_slice(&16u16.to_le_bytes());
        b.extend_from_slice(b"data");
        b.extend_from_slice(&data_len.to_le_bytes());
        for s in samples {
            b.extend_from_slice(&s.to_le_bytes());
        }
        b
    }

    #[test]
    fn four_sample_fixture() {
        let clip: AudioClip<f64> = decode_wav(&fixture(1, 16000, 1, &[0, 16384, -16384, 32767])).unwrap();
        assert_eq!(clip.samples[..3], [0.0, 0.5, -0.5]);
        assert_eq!(clip.samples[3], 32767.0 / 32768.0);
        assert!((clip.samples[3] - 0.99997).abs() < 1e-5);
    }

    #[test]
    fn empty_data_chunk() {
        let clip: AudioClip<f64> = decode_wav(&fixture(1, 16000, 1, &[])).unwrap();
        assert!(clip.is_empty());
    }

    #[test]
    fn unsupported_fields_are_named() {
        let field = |bytes: Vec<u8>| match decode_wav::<f64>(&bytes) {
            Err(Error::UnsupportedFormat { field, .. }) => field,
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(field(fixture(2, 16000, 1, &[0, 0])), "channels");
        assert_eq!(field(fixture(1, 44100, 1, &[0])), "sample_rate");
        assert_eq!(field(fixture(1, 16000, 3, &[0])), "audio_format");
    }

    #[test]
    fn skips_unknown_chunks() {
        let mut b = fixture(1, 16000, 1, &[100]);
        // splice a LIST chunk with odd size (plus pad byte) after fmt
        let list = [b"LIST".as_slice(), &3u32.to_le_bytes(), b"abc", &[0u8]].concat();
        b.splice(36..36, list);
        let clip: AudioClip<f64> = decode_wav(&b).unwrap();
        assert_eq!(clip.samples, vec![100.0 / 32768.0]);
    }

    #[test]
    fn truncated_and_garbage_inputs() {
        let mut b = fixture(1, 16000, 1, &[1, 2, 3]);
        b.truncate(b.len() - 1);
        assert!(matches!(decode_wav::<f64>(&b), Err(Error::Format(_))));
        assert!(matches!(decode_wav::<f64>(b"not a wav file"), Err(Error::Format(_))));
    }

    #[test]
    fn encode_decode_round_trip_on_grid() {
        let samples: Vec<f64> = [-32768i32, -1, 0, 1, 12345, 32767].iter().map(|&v| v as f64 / 32768.0).collect();
        let clip = AudioClip::new(samples.clone());
        let back: AudioClip<f64> = decode_wav(&encode_wav(&clip)).unwrap();
        assert_eq!(back.samples, samples);
    }
}
