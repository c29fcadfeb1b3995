use std::path::Path;

use hound::{SampleFormat, WavSpec};
use windpr::spectral::TwoChannel;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    Pcm16,
    Float32,
}

/// Decoded audio, one vector per channel, in `[-1, 1]` for PCM input.
pub struct Audio {
    pub sample_rate: u32,
    pub channels: Vec<Vec<f64>>,
}

pub fn read(path: &Path) -> CliResult<Audio> {
    let mut reader = hound::WavReader::open(path).map_err(|e| CliError::io(path, e))?;
    let spec = reader.spec();
    let n = spec.channels as usize;
    if n == 0 {
        return Err(CliError::Encoding {
            path: path.into(),
            detail: "zero channels".into(),
        });
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / 32768.0))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::io(path, e))?,
        (SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::io(path, e))?,
        (fmt, bits) => {
            return Err(CliError::Encoding {
                path: path.into(),
                detail: format!("{bits}-bit {fmt:?}; expected 16-bit PCM or 32-bit float"),
            })
        }
    };
    let mut channels = vec![Vec::with_capacity(interleaved.len() / n); n];
    for frame in interleaved.chunks_exact(n) {
        for (ch, v) in channels.iter_mut().zip(frame) {
            ch.push(*v);
        }
    }
    Ok(Audio {
        sample_rate: spec.sample_rate,
        channels,
    })
}

pub fn read_stereo(path: &Path) -> CliResult<(u32, TwoChannel)> {
    let audio = read(path)?;
    if audio.channels.len() != 2 {
        return Err(CliError::Usage(format!(
            "{}: expected a two-channel recording, found {} channel(s)",
            path.display(),
            audio.channels.len()
        )));
    }
    let mut it = audio.channels.into_iter();
    let (a, b) = (it.next().unwrap_or_default(), it.next().unwrap_or_default());
    Ok((audio.sample_rate, TwoChannel::new(a, b)?))
}

/// Writes a stereo file peak-normalized to 0.9 of full scale.
pub fn write_stereo(path: &Path, signal: &TwoChannel, sample_rate: u32, encoding: Encoding) -> CliResult<()> {
    let peak = signal
        .ch1
        .iter()
        .chain(&signal.ch2)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let gain = if peak > 0.0 { 0.9 / peak } else { 1.0 };
    let spec = WavSpec {
        channels: 2,
        sample_rate,
        bits_per_sample: match encoding {
            Encoding::Pcm16 => 16,
            Encoding::Float32 => 32,
        },
        sample_format: match encoding {
            Encoding::Pcm16 => SampleFormat::Int,
            Encoding::Float32 => SampleFormat::Float,
        },
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(|e| CliError::io(path, e))?;
    for (a, b) in signal.ch1.iter().zip(&signal.ch2) {
        for v in [a * gain, b * gain] {
            match encoding {
                Encoding::Pcm16 => w.write_sample((v * 32767.0).round() as i16),
                Encoding::Float32 => w.write_sample(v as f32),
            }
            .map_err(|e| CliError::io(path, e))?;
        }
    }
    w.finalize().map_err(|e| CliError::io(path, e))
}
