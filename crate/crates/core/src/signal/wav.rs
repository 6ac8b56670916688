//! RIFF/WAVE decode and encode.
//!
//! Read side accepts PCM 16-bit and IEEE float 32-bit, any channel count
//! (channels are averaged to mono). Write side always emits 16-bit PCM mono
//! little-endian. Integer samples are scaled by 1/32768 on read; on write,
//! samples are scaled by 32768, rounded, and clamped to the 16-bit code
//! range, so a read/write round trip is identity up to one LSB.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::{SignalError, Waveform};

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

fn u16_le(b: &[u8], off: usize) -> u16 {
    u16::from_le_bytes([b[off], b[off + 1]])
}

fn u32_le(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes([b[off], b[off + 1], b[off + 2], b[off + 3]])
}

struct Fmt {
    format: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

/// Reads a WAV file and averages its channels into a mono [`Waveform`].
pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform, SignalError> {
    let bytes = fs::read(path.as_ref())?;
    decode_wav(&bytes)
}

pub(crate) fn decode_wav(bytes: &[u8]) -> Result<Waveform, SignalError> {
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(SignalError::Format("missing RIFF/WAVE header".into()));
    }

    let mut fmt: Option<Fmt> = None;
    let mut data: Option<&[u8]> = None;
    let mut off = 12;
    while off + 8 <= bytes.len() {
        let id = &bytes[off..off + 4];
        let size = u32_le(bytes, off + 4) as usize;
        let body_start = off + 8;
        let body_end = body_start + size;
        if body_end > bytes.len() {
            return Err(SignalError::Format(format!(
                "chunk {:?} overruns file",
                String::from_utf8_lossy(id)
            )));
        }
        let body = &bytes[body_start..body_end];
        match id {
            b"fmt " => {
                if size < 16 {
                    return Err(SignalError::Format("fmt chunk too small".into()));
                }
                let mut format = u16_le(body, 0);
                if format == FORMAT_EXTENSIBLE {
                    // Resolve via the SubFormat GUID's leading format tag.
                    if size < 40 {
                        return Err(SignalError::Format("extensible fmt chunk too small".into()));
                    }
                    format = u16_le(body, 24);
                }
                fmt = Some(Fmt {
                    format,
                    channels: u16_le(body, 2),
                    sample_rate: u32_le(body, 4),
                    bits: u16_le(body, 14),
                });
            }
            b"data" => data = Some(body),
            _ => {} // LIST, fact, cue, ... are skipped
        }
        // Chunk bodies are word-aligned: odd sizes carry one pad byte.
        off = body_end + (size & 1);
    }

    let fmt = fmt.ok_or_else(|| SignalError::Format("no fmt chunk".into()))?;
    let data = data.ok_or_else(|| SignalError::Format("no data chunk".into()))?;
    if fmt.channels == 0 {
        return Err(SignalError::Format("zero channels".into()));
    }
    if fmt.sample_rate == 0 {
        return Err(SignalError::Format("zero sample rate".into()));
    }

    let interleaved: Vec<f64> = match (fmt.format, fmt.bits) {
        (FORMAT_PCM, 16) => data
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0)
            .collect(),
        (FORMAT_IEEE_FLOAT, 32) => data
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        (format, bits) => {
            return Err(SignalError::UnsupportedCodec(format!(
                "format tag {format} with {bits} bits per sample"
            )))
        }
    };

    if interleaved.is_empty() {
        return Err(SignalError::EmptySignal);
    }
    if let Some(i) = interleaved.iter().position(|s| !s.is_finite()) {
        return Err(SignalError::NonFinite(i));
    }

    let ch = fmt.channels as usize;
    let mono: Vec<f64> = if ch == 1 {
        interleaved
    } else {
        interleaved
            .chunks_exact(ch)
            .map(|frame| frame.iter().sum::<f64>() / ch as f64)
            .collect()
    };
    if mono.is_empty() {
        return Err(SignalError::EmptySignal);
    }
    Ok(Waveform::from_validated(mono, fmt.sample_rate))
}

/// Encodes a waveform as 16-bit PCM mono. Samples outside `[-1, 1]` are
/// hard-clipped; the number of clipped samples is returned so callers can log
/// it.
pub fn write_wav(w: &Waveform, path: impl AsRef<Path>) -> Result<usize, SignalError> {
    let (bytes, clipped) = encode_wav(w);
    let mut f = fs::File::create(path.as_ref())?;
    f.write_all(&bytes)?;
    Ok(clipped)
}

pub(crate) fn encode_wav(w: &Waveform) -> (Vec<u8>, usize) {
    let n = w.len();
    let data_len = (n * 2) as u32;
    let mut out = Vec::with_capacity(44 + n * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&w.sample_rate().to_le_bytes());
    let byte_rate = w.sample_rate() * 2;
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes()); // block align
    out.extend_from_slice(&16u16.to_le_bytes()); // bits per sample
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());

    let mut clipped = 0usize;
    for &s in w.samples() {
        if s.abs() > 1.0 {
            clipped += 1;
        }
        let code = (s * 32768.0).round().clamp(i16::MIN as f64, i16::MAX as f64) as i16;
        out.extend_from_slice(&code.to_le_bytes());
    }
    (out, clipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    /// Hand-built RIFF bytes, independent of `encode_wav`.
    fn raw_wav(format: u16, bits: u16, channels: u16, rate: u32, payload: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(b"RIFF");
        b.extend_from_slice(&(36 + payload.len() as u32).to_le_bytes());
        b.extend_from_slice(b"WAVE");
        b.extend_from_slice(b"fmt ");
        b.extend_from_slice(&16u32.to_le_bytes());
        b.extend_from_slice(&format.to_le_bytes());
        b.extend_from_slice(&channels.to_le_bytes());
        b.extend_from_slice(&rate.to_le_bytes());
        let block = channels * bits / 8;
        b.extend_from_slice(&(rate * block as u32).to_le_bytes());
        b.extend_from_slice(&block.to_le_bytes());
        b.extend_from_slice(&bits.to_le_bytes());
        b.extend_from_slice(b"data");
        b.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        b.extend_from_slice(payload);
        b
    }

    #[test]
    fn decodes_constant_pcm16() {
        let payload: Vec<u8> = (0..2000).flat_map(|_| 16384i16.to_le_bytes()).collect();
        let w = decode_wav(&raw_wav(1, 16, 1, 2000, &payload)).unwrap();
        assert_eq!(w.len(), 2000);
        assert_eq!(w.sample_rate(), 2000);
        assert!(w.samples().iter().all(|&s| s == 0.5));
    }

    #[test]
    fn averages_stereo_to_mono() {
        // +6554 / -6554 cancel exactly in f64.
        let mut payload = Vec::new();
        for _ in 0..100 {
            payload.extend_from_slice(&6554i16.to_le_bytes());
            payload.extend_from_slice(&(-6554i16).to_le_bytes());
        }
        let w = decode_wav(&raw_wav(1, 16, 2, 8000, &payload)).unwrap();
        assert_eq!(w.len(), 100);
        assert!(w.samples().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn decodes_float32() {
        let payload: Vec<u8> = [0.25f32, -0.5, 1.0]
            .iter()
            .flat_map(|v| v.to_le_bytes())
            .collect();
        let w = decode_wav(&raw_wav(3, 32, 1, 4000, &payload)).unwrap();
        assert_eq!(w.samples(), &[0.25, -0.5, 1.0]);
    }

    #[test]
    fn rejects_malformed_header() {
        assert!(matches!(
            decode_wav(b"RIFX....WAVE"),
            Err(SignalError::Format(_))
        ));
        assert!(matches!(decode_wav(b"RI"), Err(SignalError::Format(_))));
    }

    #[test]
    fn rejects_unsupported_codec() {
        let payload = vec![0u8; 8];
        // 8-bit PCM is not supported.
        assert!(matches!(
            decode_wav(&raw_wav(1, 8, 1, 8000, &payload)),
            Err(SignalError::UnsupportedCodec(_))
        ));
    }

    #[test]
    fn rejects_empty_payload() {
        assert!(matches!(
            decode_wav(&raw_wav(1, 16, 1, 8000, &[])),
            Err(SignalError::EmptySignal)
        ));
    }

    #[test]
    fn skips_unknown_chunks() {
        let mut b = raw_wav(1, 16, 1, 2000, &42i16.to_le_bytes());
        // Splice a LIST chunk between fmt and data.
        let list: &[u8] = b"LIST\x04\x00\x00\x00INFO";
        let data_pos = 36;
        let mut spliced = b[..data_pos].to_vec();
        spliced.extend_from_slice(list);
        spliced.extend_from_slice(&b[data_pos..]);
        let riff_len = (spliced.len() - 8) as u32;
        spliced[4..8].copy_from_slice(&riff_len.to_le_bytes());
        b = spliced;
        let w = decode_wav(&b).unwrap();
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn encodes_zero_payload_as_zero_words() {
        let w = Waveform::new(vec![0.0; 16], 2000).unwrap();
        let (bytes, clipped) = encode_wav(&w);
        assert_eq!(clipped, 0);
        assert!(bytes[44..].iter().all(|&b| b == 0));
    }

    #[test]
    fn encodes_full_scale_as_max_code() {
        let w = Waveform::new(vec![1.0], 2000).unwrap();
        let (bytes, clipped) = encode_wav(&w);
        assert_eq!(clipped, 0); // 1.0 is in range; it saturates the code space
        assert_eq!(i16::from_le_bytes([bytes[44], bytes[45]]), 32767);
    }

    #[test]
    fn counts_clipped_samples() {
        let w = Waveform::new(vec![1.5, -2.0, 0.0], 2000).unwrap();
        let (bytes, clipped) = encode_wav(&w);
        assert_eq!(clipped, 2);
        assert_eq!(i16::from_le_bytes([bytes[44], bytes[45]]), 32767);
        assert_eq!(i16::from_le_bytes([bytes[46], bytes[47]]), -32768);
    }

    #[test]
    fn round_trip_error_within_one_lsb() {
        let mut g = rng::Gaussian::new(5);
        let samples: Vec<f64> = g.fill(4000).iter().map(|s| (s / 4.0).clamp(-1.0, 1.0)).collect();
        let w = Waveform::new(samples, 2000).unwrap();
        let (bytes, _) = encode_wav(&w);
        let back = decode_wav(&bytes).unwrap();
        let max_err = w
            .samples()
            .iter()
            .zip(back.samples())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(max_err <= 1.0 / 32768.0, "max err {max_err}");
    }

    #[test]
    fn second_round_trip_is_bit_identical() {
        // Random 16-bit payloads: decode -> encode must reproduce the codes.
        let mut r = rng::from_seed(9);
        for _ in 0..20 {
            let payload: Vec<u8> = (0..512)
                .flat_map(|_| {
                    let v = (rng::uniform_index(&mut r, 65536) as i64 - 32768) as i16;
                    v.to_le_bytes()
                })
                .collect();
            let bytes = raw_wav(1, 16, 1, 2000, &payload);
            let w = decode_wav(&bytes).unwrap();
            let (re, clipped) = encode_wav(&w);
            assert_eq!(clipped, 0);
            assert_eq!(&re[44..], &payload[..]);
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.wav");
        let w = Waveform::new(vec![0.1, -0.2, 0.3], 2000).unwrap();
        write_wav(&w, &path).unwrap();
        let back = read_wav(&path).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back.sample_rate(), 2000);
    }
}
