//! Planar sensor array construction, validation, and the plain-text array
//! file format.
//!
//! The two layout families used by the experiment presets are regular grids
//! in the z = 0 plane: a tight 2 x n grid with 2 mm pitch and a wide 4 x m
//! grid with 30 mm pitch. Arbitrary (including non-planar) arrays can be
//! loaded from a text file with one `x y z` triple per line.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::vec3::Vec3;

/// Minimum separation between two sensors, meters.
pub const MIN_SENSOR_SEPARATION_M: f64 = 1e-9;

/// Pitch of the 2 x n layout family, meters.
pub const TWO_BY_N_PITCH_M: f64 = 2e-3;

/// Pitch of the 4 x m layout family, meters.
pub const FOUR_BY_M_PITCH_M: f64 = 30e-3;

/// An ordered, immutable set of sensor positions.
///
/// Sensor index `l` (0-based) maps to exactly one position for the lifetime
/// of the array; readings are always stored in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorArray<T> {
    sensors: Vec<Vec3<T>>,
    name: String,
}

impl<T: Real> SensorArray<T> {
    pub fn new(sensors: Vec<Vec3<T>>, name: impl Into<String>) -> Result<Self> {
        if sensors.is_empty() {
            return Err(Error::EmptyArray);
        }
        for (index, s) in sensors.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::NonFiniteSensor { index });
            }
        }
        let min_sep = T::lit(MIN_SENSOR_SEPARATION_M);
        for i in 0..sensors.len() {
            for j in (i + 1)..sensors.len() {
                if (sensors[i] - sensors[j]).norm() < min_sep {
                    return Err(Error::SensorsTooClose {
                        first: i,
                        second: j,
                        min_separation_m: MIN_SENSOR_SEPARATION_M,
                    });
                }
            }
        }
        Ok(Self {
            sensors,
            name: name.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.sensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty()
    }

    pub fn positions(&self) -> &[Vec3<T>] {
        &self.sensors
    }

    pub fn position(&self, index: usize) -> Vec3<T> {
        self.sensors[index]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn centroid(&self) -> Vec3<T> {
        let sum = self
            .sensors
            .iter()
            .fold(Vec3::zero(), |acc, &s| acc + s);
        sum / T::from_usize(self.sensors.len()).unwrap()
    }

    /// Axis-aligned bounding box as (min, max) corners.
    pub fn bounding_box(&self) -> (Vec3<T>, Vec3<T>) {
        let mut min = self.sensors[0];
        let mut max = self.sensors[0];
        for s in &self.sensors[1..] {
            min.x = min.x.min(s.x);
            min.y = min.y.min(s.y);
            min.z = min.z.min(s.z);
            max.x = max.x.max(s.x);
            max.y = max.y.max(s.y);
            max.z = max.z.max(s.z);
        }
        (min, max)
    }
}

/// Parameters for a regular rows x cols grid in a horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridLayoutSpec<T> {
    pub rows: usize,
    pub cols: usize,
    /// Spacing between adjacent rows (along x), meters.
    pub pitch_x: T,
    /// Spacing between adjacent columns (along y), meters.
    pub pitch_y: T,
    /// Reference point of the grid; the first sensor when uncentered, the
    /// grid centroid when centered.
    pub origin: Vec3<T>,
    /// Height of the sensing plane above `origin.z`, meters.
    pub plane_z: T,
    /// Center the grid on `origin` instead of starting at it.
    pub centered: bool,
}

impl<T: Real> GridLayoutSpec<T> {
    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidGridLayout(format!(
                "rows and cols must be at least 1, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.pitch_x > T::zero() && self.pitch_y > T::zero()) {
            return Err(Error::InvalidGridLayout(
                "pitches must be positive".to_string(),
            ));
        }
        if !self.origin.is_finite() || !self.plane_z.is_finite() {
            return Err(Error::InvalidGridLayout(
                "origin and plane_z must be finite".to_string(),
            ));
        }
        Ok(())
    }
}

/// Build a rows x cols grid, row-major ordering (all columns of row 0 first).
pub fn make_grid<T: Real>(spec: &GridLayoutSpec<T>) -> Result<SensorArray<T>> {
    spec.validate()?;
    let two = T::lit(2.0);
    let offset = if spec.centered {
        Vec3::new(
            T::from_usize(spec.rows - 1).unwrap() * spec.pitch_x / two,
            T::from_usize(spec.cols - 1).unwrap() * spec.pitch_y / two,
            T::zero(),
        )
    } else {
        Vec3::zero()
    };
    let base = spec.origin + Vec3::new(T::zero(), T::zero(), spec.plane_z) - offset;
    let mut sensors = Vec::with_capacity(spec.rows * spec.cols);
    for i in 0..spec.rows {
        for j in 0..spec.cols {
            sensors.push(
                base + Vec3::new(
                    T::from_usize(i).unwrap() * spec.pitch_x,
                    T::from_usize(j).unwrap() * spec.pitch_y,
                    T::zero(),
                ),
            );
        }
    }
    SensorArray::new(sensors, format!("grid-{}x{}", spec.rows, spec.cols))
}

/// The two grid families used in the comparison experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutFamily {
    /// 2 rows of n sensors, 2 mm pitch; n in {3, 4, 6, 8}.
    TwoByN,
    /// 4 rows of m sensors, 30 mm pitch; m in {2, 3, 4, 5}.
    FourByM,
}

impl LayoutFamily {
    pub fn label(&self) -> &'static str {
        match self {
            LayoutFamily::TwoByN => "2xn",
            LayoutFamily::FourByM => "4xm",
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            LayoutFamily::TwoByN => 2,
            LayoutFamily::FourByM => 4,
        }
    }

    pub fn default_pitch_m(&self) -> f64 {
        match self {
            LayoutFamily::TwoByN => TWO_BY_N_PITCH_M,
            LayoutFamily::FourByM => FOUR_BY_M_PITCH_M,
        }
    }

    pub fn allowed_counts(&self) -> &'static [usize] {
        match self {
            LayoutFamily::TwoByN => &[3, 4, 6, 8],
            LayoutFamily::FourByM => &[2, 3, 4, 5],
        }
    }

    fn allowed_counts_label(&self) -> &'static str {
        match self {
            LayoutFamily::TwoByN => "3, 4, 6, 8",
            LayoutFamily::FourByM => "2, 3, 4, 5",
        }
    }
}

/// Options for [`paper_layouts`].
#[derive(Debug, Clone, Copy)]
pub struct PaperLayoutOptions<T> {
    /// Center of the grid (the sensing plane sits at `origin.z`).
    pub origin: Vec3<T>,
    /// Allow per-family counts outside the studied sets.
    pub permissive: bool,
    /// Override the family's default pitch (both axes), meters.
    pub pitch_override: Option<T>,
}

impl<T: Real> Default for PaperLayoutOptions<T> {
    fn default() -> Self {
        Self {
            origin: Vec3::zero(),
            permissive: false,
            pitch_override: None,
        }
    }
}

/// Build one of the studied grid layouts, centered on the configured origin.
pub fn paper_layouts<T: Real>(
    family: LayoutFamily,
    count: usize,
    options: PaperLayoutOptions<T>,
) -> Result<SensorArray<T>> {
    if !options.permissive && !family.allowed_counts().contains(&count) {
        return Err(Error::UnsupportedLayoutCount {
            family: family.label(),
            count,
            allowed: family.allowed_counts_label(),
        });
    }
    if count == 0 {
        return Err(Error::InvalidGridLayout(
            "layout count must be at least 1".to_string(),
        ));
    }
    let pitch = options
        .pitch_override
        .unwrap_or_else(|| T::lit(family.default_pitch_m()));
    let mut array = make_grid(&GridLayoutSpec {
        rows: family.rows(),
        cols: count,
        pitch_x: pitch,
        pitch_y: pitch,
        origin: options.origin,
        plane_z: T::zero(),
        centered: true,
    })?;
    array.name = format!("{}-{}", family.label(), count);
    Ok(array)
}

/// Load an array from the plain-text format: one `x y z` triple in meters per
/// line, whitespace-separated, `#` starts a comment.
pub fn load_array<T: Real>(path: impl AsRef<Path>) -> Result<SensorArray<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::FileIo {
        path: path.to_path_buf(),
        source,
    })?;
    let mut sensors = Vec::new();
    for (line_index, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::FileParse {
                path: path.to_path_buf(),
                line: line_index + 1,
                message: format!("expected 3 coordinates, found {}", fields.len()),
            });
        }
        let mut coords = [T::zero(); 3];
        for (slot, field) in coords.iter_mut().zip(&fields) {
            let value: f64 = field.parse().map_err(|_| Error::FileParse {
                path: path.to_path_buf(),
                line: line_index + 1,
                message: format!("cannot parse {field:?} as a number"),
            })?;
            *slot = T::lit(value);
        }
        sensors.push(Vec3::from_array(coords));
    }
    if sensors.is_empty() {
        return Err(Error::EmptyFile {
            path: path.to_path_buf(),
        });
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "array".to_string());
    SensorArray::new(sensors, name)
}

/// Serialize the array in the same format [`load_array`] reads, with a header
/// comment naming the layout.
pub fn array_to_string<T: Real>(array: &SensorArray<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# sensor array: {}", array.name());
    let _ = writeln!(out, "# columns: x y z (meters)");
    for s in array.positions() {
        let _ = writeln!(out, "{:e} {:e} {:e}", s.x, s.y, s.z);
    }
    out
}

/// Write the array file format to disk.
pub fn save_array<T: Real>(array: &SensorArray<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, array_to_string(array)).map_err(|source| Error::FileIo {
        path: path.to_path_buf(),
        source,
    })
}
