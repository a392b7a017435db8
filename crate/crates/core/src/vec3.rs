//! Minimal 3-vector / 3x3 matrix arithmetic.
//!
//! The problem only ever needs fixed-size 3D algebra, so this stays
//! dependency-free and generic over [`Real`](crate::scalar::Real).

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Real;

/// Cartesian 3-vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm_squared(self) -> T {
        self.dot(self)
    }

    pub fn norm(self) -> T {
        self.norm_squared().sqrt()
    }

    /// Unit vector along `self`, or `None` for (near-)zero input.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n.is_finite() && n > T::zero() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component-wise absolute maximum.
    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// Outer product `self * otherᵀ`.
    pub fn outer(self, other: Self) -> Mat3<T> {
        Mat3::from_rows([
            (other * self.x).to_array(),
            (other * self.y).to_array(),
            (other * self.z).to_array(),
        ])
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    fn div(self, rhs: T) -> Self {
        Self::new(self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T> {
    rows: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn from_rows(rows: [[T; 3]; 3]) -> Self {
        Self { rows }
    }

    pub fn zero() -> Self {
        Self::from_rows([[T::zero(); 3]; 3])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..3 {
            m.rows[i][i] = T::one();
        }
        m
    }

    pub fn entry(&self, row: usize, col: usize) -> T {
        self.rows[row][col]
    }

    pub fn row(&self, row: usize) -> Vec3<T> {
        Vec3::from_array(self.rows[row])
    }

    pub fn col(&self, col: usize) -> Vec3<T> {
        Vec3::new(self.rows[0][col], self.rows[1][col], self.rows[2][col])
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.rows[i][j] = self.rows[j][i];
            }
        }
        out
    }

    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..3 {
            for j in 0..3 {
                out.rows[i][j] = self.row(i).dot(other.col(j));
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        for row in &mut out.rows {
            for v in row {
                *v = *v * s;
            }
        }
        out
    }

    pub fn add_mat(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..3 {
            for j in 0..3 {
                out.rows[i][j] = out.rows[i][j] + other.rows[i][j];
            }
        }
        out
    }

    /// Rotation by `angle` about the given (unit) axis.
    pub fn rotation(axis: Vec3<T>, angle: T) -> Self {
        let c = angle.cos();
        let s = angle.sin();
        let t = T::one() - c;
        let (x, y, z) = (axis.x, axis.y, axis.z);
        Self::from_rows([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }
}
