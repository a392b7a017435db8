//! Synthetic sensor readings and the stream-level denoising stage.
//!
//! The reading pipeline mirrors a 3-axis Hall-effect magnetometer: the true
//! flux from the forward model, plus i.i.d. Gaussian noise per axis, rounded
//! to the ADC resolution grid and clipped at the full-scale range. Streams of
//! frames support the warmup trim and causal moving-average filter used by
//! the acquisition comparison.
//!
//! All randomness flows through a seeded ChaCha8 generator; for a fixed seed
//! the simulated readings are bitwise reproducible. Samples are drawn in
//! sensor-major order (sensor 0 x, y, z; sensor 1 x, y, z; ...), one frame
//! after another.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::field_model::{flux_at, FluxVector, MagnetPose, MagnetSpec};
use crate::scalar::Real;
use crate::sensor_array::SensorArray;
use crate::vec3::Vec3;

/// MLX90393-like defaults: resolution per LSB, tesla.
pub const DEFAULT_RESOLUTION_T: f64 = 0.161e-6;

/// MLX90393-like defaults: full-scale range, tesla.
pub const DEFAULT_FULL_SCALE_T: f64 = 44_000e-6;

/// Per-axis quantization / saturation / noise model of one 3-axis sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorModel<T> {
    resolution: T,
    full_scale: T,
    noise_sigma: [T; 3],
    quantize: bool,
}

impl<T: Real> Default for SensorModel<T> {
    fn default() -> Self {
        Self {
            resolution: T::lit(DEFAULT_RESOLUTION_T),
            full_scale: T::lit(DEFAULT_FULL_SCALE_T),
            noise_sigma: [T::zero(); 3],
            quantize: true,
        }
    }
}

impl<T: Real> SensorModel<T> {
    pub fn new(resolution_t: T, full_scale_t: T) -> Result<Self> {
        if !(resolution_t.is_finite() && resolution_t > T::zero()) {
            return Err(Error::InvalidSensorModel(format!(
                "resolution must be positive, got {resolution_t}"
            )));
        }
        if !(full_scale_t.is_finite() && full_scale_t > resolution_t) {
            return Err(Error::InvalidSensorModel(format!(
                "full scale must exceed the resolution, got {full_scale_t}"
            )));
        }
        Ok(Self {
            resolution: resolution_t,
            full_scale: full_scale_t,
            noise_sigma: [T::zero(); 3],
            quantize: true,
        })
    }

    /// Isotropic per-axis noise standard deviation, tesla.
    pub fn with_noise_sigma(self, sigma_t: T) -> Result<Self> {
        self.with_noise_sigma_axes([sigma_t; 3])
    }

    /// Independent per-axis noise standard deviations, tesla.
    pub fn with_noise_sigma_axes(mut self, sigma_t: [T; 3]) -> Result<Self> {
        for s in sigma_t {
            if !(s.is_finite() && s >= T::zero()) {
                return Err(Error::InvalidSensorModel(format!(
                    "noise sigma must be non-negative, got {s}"
                )));
            }
        }
        self.noise_sigma = sigma_t;
        Ok(self)
    }

    /// Enable or disable resolution quantization (saturation always applies).
    pub fn with_quantization(mut self, quantize: bool) -> Self {
        self.quantize = quantize;
        self
    }

    pub fn resolution_t(&self) -> T {
        self.resolution
    }

    pub fn full_scale_t(&self) -> T {
        self.full_scale
    }

    pub fn noise_sigma_t(&self) -> [T; 3] {
        self.noise_sigma
    }

    pub fn quantize_enabled(&self) -> bool {
        self.quantize
    }

    fn digitize_component(&self, value: T) -> (T, bool) {
        let quantized = if self.quantize {
            (value / self.resolution).round() * self.resolution
        } else {
            value
        };
        if quantized > self.full_scale {
            (self.full_scale, true)
        } else if quantized < -self.full_scale {
            (-self.full_scale, true)
        } else {
            (quantized, false)
        }
    }

    /// Apply quantization and saturation to one flux triple; the flag is set
    /// when any component clips.
    pub fn digitize(&self, value: FluxVector<T>) -> (FluxVector<T>, bool) {
        let (x, sx) = self.digitize_component(value.x);
        let (y, sy) = self.digitize_component(value.y);
        let (z, sz) = self.digitize_component(value.z);
        (Vec3::new(x, y, z), sx || sy || sz)
    }
}

/// One frame of measured flux triples, in array order.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadingSet<T> {
    readings: Vec<FluxVector<T>>,
    saturated: Vec<bool>,
}

impl<T: Real> ReadingSet<T> {
    pub fn new(readings: Vec<FluxVector<T>>, saturated: Vec<bool>) -> Result<Self> {
        if readings.len() != saturated.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} readings but {} saturation flags",
                readings.len(),
                saturated.len()
            )));
        }
        Ok(Self {
            readings,
            saturated,
        })
    }

    /// A frame with no saturation flags set.
    pub fn from_readings(readings: Vec<FluxVector<T>>) -> Self {
        let saturated = vec![false; readings.len()];
        Self {
            readings,
            saturated,
        }
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    pub fn readings(&self) -> &[FluxVector<T>] {
        &self.readings
    }

    pub fn reading(&self, sensor: usize) -> FluxVector<T> {
        self.readings[sensor]
    }

    pub fn saturated(&self) -> &[bool] {
        &self.saturated
    }

    pub fn any_saturated(&self) -> bool {
        self.saturated.iter().any(|&s| s)
    }

    pub fn all_saturated(&self) -> bool {
        self.saturated.iter().all(|&s| s)
    }
}

/// A time-ordered sequence of frames from one array.
///
/// `sample_indices` carries each frame's original acquisition index so that
/// trimming keeps provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadingStream<T> {
    frames: Vec<ReadingSet<T>>,
    sample_indices: Vec<u64>,
}

impl<T: Real> ReadingStream<T> {
    pub fn new(frames: Vec<ReadingSet<T>>, sample_indices: Vec<u64>) -> Result<Self> {
        if frames.len() != sample_indices.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} frames but {} sample indices",
                frames.len(),
                sample_indices.len()
            )));
        }
        if let Some(first) = frames.first() {
            for (i, f) in frames.iter().enumerate() {
                if f.len() != first.len() {
                    return Err(Error::ShapeMismatch(format!(
                        "frame {i} has {} sensors, frame 0 has {}",
                        f.len(),
                        first.len()
                    )));
                }
            }
        }
        Ok(Self {
            frames,
            sample_indices,
        })
    }

    pub fn from_frames(frames: Vec<ReadingSet<T>>) -> Result<Self> {
        let indices = (0..frames.len() as u64).collect();
        Self::new(frames, indices)
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn sensor_count(&self) -> usize {
        self.frames.first().map_or(0, ReadingSet::len)
    }

    pub fn frames(&self) -> &[ReadingSet<T>] {
        &self.frames
    }

    pub fn frame(&self, index: usize) -> &ReadingSet<T> {
        &self.frames[index]
    }

    pub fn last_frame(&self) -> Option<&ReadingSet<T>> {
        self.frames.last()
    }

    pub fn sample_indices(&self) -> &[u64] {
        &self.sample_indices
    }
}

/// Simulate one frame of sensor readings for a fixed magnet pose.
///
/// Deterministic for a fixed seed; see the module docs for the sampling
/// order. Noise is added per axis before quantization and saturation.
pub fn simulate_readings<T: Real>(
    array: &SensorArray<T>,
    pose: &MagnetPose<T>,
    spec: &MagnetSpec<T>,
    model: &SensorModel<T>,
    seed: u64,
) -> Result<ReadingSet<T>>
where
    StandardNormal: Distribution<T>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed) ;
    simulate_frame(array, pose, spec, model, &mut rng)
}

/// Simulate a stream of `frames` frames with independent per-frame noise,
/// all from one seed.
pub fn simulate_stream<T: Real>(
    array: &SensorArray<T>,
    pose: &MagnetPose<T>,
    spec: &MagnetSpec<T>,
    model: &SensorModel<T>,
    frames: usize,
    seed: u64,
) -> Result<ReadingStream<T>>
where
    StandardNormal: Distribution<T>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(frames);
    for _ in 0..frames {
        out.push(simulate_frame(array, pose, spec, model, &mut rng)?);
    }
    ReadingStream::from_frames(out)
}

fn simulate_frame<T: Real>(
    array: &SensorArray<T>,
    pose: &MagnetPose<T>,
    spec: &MagnetSpec<T>,
    model: &SensorModel<T>,
    rng: &mut ChaCha8Rng,
) -> Result<ReadingSet<T>>
where
    StandardNormal: Distribution<T>,
{
    let sigma = model.noise_sigma_t();
    let mut readings = Vec::with_capacity(array.len());
    let mut saturated = Vec::with_capacity(array.len());
    for &sensor in array.positions() {
        let truth = flux_at(pose, spec, sensor)?;
        let noise = Vec3::new(
            StandardNormal.sample(rng) * sigma[0],
            StandardNormal.sample(rng) * sigma[1],
            StandardNormal.sample(rng) * sigma[2],
        );
        let (value, clipped) = model.digitize(truth + noise);
        readings.push(value);
        saturated.push(clipped);
    }
    Ok(ReadingSet {
        readings,
        saturated,
    })
}

/// Causal moving average over the last `window` frames, per sensor and axis.
///
/// Early frames average over however many frames exist so far; the output
/// has the same frame count as the input. Saturation flags are propagated
/// as the OR over each averaging window.
///
/// The mean is computed shifted against the window's first frame
/// (`base + sum(v - base) / n`), which keeps constant windows bitwise exact.
pub fn moving_average_filter<T: Real>(
    stream: &ReadingStream<T>,
    window: usize,
) -> Result<ReadingStream<T>> {
    if window == 0 {
        return Err(Error::ZeroWindow);
    }
    let sensor_count = stream.sensor_count();
    let mut frames = Vec::with_capacity(stream.len());
    for k in 0..stream.len() {
        let span = window.min(k + 1);
        let start = k + 1 - span;
        let scale = T::one() / T::from_usize(span).unwrap();
        let mut readings = Vec::with_capacity(sensor_count);
        let mut saturated = vec![false; sensor_count];
        for (s, flag) in saturated.iter_mut().enumerate() {
            let base = stream.frames[start].readings[s];
            let mut sum = Vec3::zero();
            for frame in &stream.frames[start..=k] {
                sum = sum + (frame.readings[s] - base);
                *flag |= frame.saturated[s];
            }
            readings.push(base + sum * scale);
        }
        frames.push(ReadingSet {
            readings,
            saturated,
        });
    }
    ReadingStream::new(frames, stream.sample_indices.clone())
}

/// Drop the first `cycles` frames (acquisition warmup).
pub fn warmup_trim<T: Real>(stream: &ReadingStream<T>, cycles: usize) -> Result<ReadingStream<T>> {
    if cycles >= stream.len() {
        return Err(Error::TrimExhaustsStream {
            cycles,
            frames: stream.len(),
        });
    }
    Ok(ReadingStream {
        frames: stream.frames[cycles..].to_vec(),
        sample_indices: stream.sample_indices[cycles..].to_vec(),
    })
}

/// Mean absolute difference between two equal-shape streams, per axis, tesla.
pub fn noise_residual_stats<T: Real>(
    raw: &ReadingStream<T>,
    filtered: &ReadingStream<T>,
) -> Result<[T; 3]> {
    if raw.len() != filtered.len() || raw.sensor_count() != filtered.sensor_count() {
        return Err(Error::ShapeMismatch(format!(
            "raw stream is {}x{}, filtered stream is {}x{}",
            raw.len(),
            raw.sensor_count(),
            filtered.len(),
            filtered.sensor_count()
        )));
    }
    let mut sums = [T::zero(); 3];
    let mut count = 0usize;
    for (rf, ff) in raw.frames.iter().zip(&filtered.frames) {
        for (r, f) in rf.readings.iter().zip(&ff.readings) {
            let d = *r - *f;
            sums[0] += d.x.abs();
            sums[1] += d.y.abs();
            sums[2] += d.z.abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::ShapeMismatch("streams contain no frames".to_string()));
    }
    let n = T::from_usize(count).unwrap();
    Ok([sums[0] / n, sums[1] / n, sums[2] / n])
}

/// Serialize a stream as `frame,sensor,bx,by,bz,saturated` CSV (tesla).
pub fn stream_to_csv<T: Real>(stream: &ReadingStream<T>) -> String {
    let mut out = String::from("frame,sensor,bx,by,bz,saturated\n");
    for (frame, index) in stream.frames.iter().zip(&stream.sample_indices) {
        for (sensor, (reading, saturated)) in
            frame.readings.iter().zip(&frame.saturated).enumerate()
        {
            let _ = writeln!(
                out,
                "{index},{sensor},{:e},{:e},{:e},{saturated}",
                reading.x, reading.y, reading.z
            );
        }
    }
    out
}

/// Write the stream CSV format to disk.
pub fn save_stream<T: Real>(stream: &ReadingStream<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, stream_to_csv(stream)).map_err(|source| Error::FileIo {
        path: path.to_path_buf(),
        source,
    })
}

/// Read the stream CSV format. Rows must be grouped by frame, with sensors
/// 0..N-1 in order within each frame.
pub fn load_stream<T: Real>(path: impl AsRef<Path>) -> Result<ReadingStream<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::FileIo {
        path: path.to_path_buf(),
        source,
    })?;
    parse_stream_csv(&text, path)
}

fn parse_stream_csv<T: Real>(text: &str, path: &Path) -> Result<ReadingStream<T>> {
    let parse_error = |line: usize, message: String| Error::FileParse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_error(1, "missing header".to_string()))?;
    if header.trim() != "frame,sensor,bx,by,bz,saturated" {
        return Err(parse_error(1, format!("unexpected header {header:?}")));
    }

    let mut frames: Vec<ReadingSet<T>> = Vec::new();
    let mut indices: Vec<u64> = Vec::new();
    let mut current: Option<(u64, ReadingSet<T>)> = None;
    for (line_index, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(parse_error(
                line_index + 1,
                format!("expected 6 fields, found {}", fields.len()),
            ));
        }
        let frame: u64 = fields[0]
            .parse()
            .map_err(|_| parse_error(line_index + 1, format!("bad frame {:?}", fields[0])))?;
        let sensor: usize = fields[1]
            .parse()
            .map_err(|_| parse_error(line_index + 1, format!("bad sensor {:?}", fields[1])))?;
        let mut triple = [T::zero(); 3];
        for (slot, field) in triple.iter_mut().zip(&fields[2..5]) {
            let value: f64 = field
                .parse()
                .map_err(|_| parse_error(line_index + 1, format!("bad flux value {field:?}")))?;
            *slot = T::lit(value);
        }
        let saturated: bool = fields[5]
            .parse()
            .map_err(|_| parse_error(line_index + 1, format!("bad flag {:?}", fields[5])))?;

        match &mut current {
            Some((index, set)) if *index == frame => {
                if sensor != set.len() {
                    return Err(parse_error(
                        line_index + 1,
                        format!("expected sensor {}, found {sensor}", set.len()),
                    ));
                }
                set.readings.push(Vec3::from_array(triple));
                set.saturated.push(saturated);
            }
            _ => {
                if let Some((index, set)) = current.take() {
                    indices.push(index);
                    frames.push(set);
                }
                if sensor != 0 {
                    return Err(parse_error(
                        line_index + 1,
                        format!("frame {frame} must start at sensor 0, found {sensor}"),
                    ));
                }
                current = Some((
                    frame,
                    ReadingSet {
                        readings: vec![Vec3::from_array(triple)],
                        saturated: vec![saturated],
                    },
                ));
            }
        }
    }
    if let Some((index, set)) = current.take() {
        indices.push(index);
        frames.push(set);
    }
    if frames.is_empty() {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    ReadingStream::new(frames, indices)
}
