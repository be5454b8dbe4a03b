//! 2×2 complex quadrature transfer matrices and two-component columns.
//!
//! Quadrature vectors are ordered `(X, P)`, amplitude first. Every scattering
//! element in the model (cavity, spin, interstage rotation, detection frame)
//! is one of these matrices evaluated at a single sideband frequency.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::scalar::{finite, Real};

/// 2×2 complex matrix acting on `(X, P)` quadrature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexMat2<T> {
    pub a11: Complex<T>,
    pub a12: Complex<T>,
    pub a21: Complex<T>,
    pub a22: Complex<T>,
}

/// Two-component complex column, e.g. the response to a scalar force `(0, f)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Column2<T> {
    pub x: Complex<T>,
    pub p: Complex<T>,
}

impl<T: Real> Column2<T> {
    pub fn new(x: Complex<T>, p: Complex<T>) -> Self {
        Self { x, p }
    }

    pub fn zero() -> Self {
        Self::new(Complex::new(T::zero(), T::zero()), Complex::new(T::zero(), T::zero()))
    }

    pub fn scale(self, s: Complex<T>) -> Self {
        Self::new(self.x * s, self.p * s)
    }

    pub fn scale_re(self, s: T) -> Self {
        Self::new(self.x * s, self.p * s)
    }

    /// Projection `cos θ · x + sin θ · p` onto the quadrature at angle `θ`.
    pub fn project(&self, angle: T) -> Complex<T> {
        self.x * angle.cos() + self.p * angle.sin()
    }

    pub fn is_finite(&self) -> bool {
        finite(self.x) && finite(self.p)
    }
}

impl<T: Real> ComplexMat2<T> {
    pub fn new(a11: Complex<T>, a12: Complex<T>, a21: Complex<T>, a22: Complex<T>) -> Self {
        Self { a11, a12, a21, a22 }
    }

    /// Matrix with real entries.
    pub fn from_real(a11: T, a12: T, a21: T, a22: T) -> Self {
        let c = |v: T| Complex::new(v, T::zero());
        Self::new(c(a11), c(a12), c(a21), c(a22))
    }

    pub fn zero() -> Self {
        Self::from_real(T::zero(), T::zero(), T::zero(), T::zero())
    }

    pub fn identity() -> Self {
        Self::from_real(T::one(), T::zero(), T::zero(), T::one())
    }

    /// `s · 1`.
    pub fn diagonal(s: Complex<T>) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Self::new(s, z, z, s)
    }

    /// Rotation `[[cos, −sin], [sin, cos]]` of the quadrature plane.
    pub fn rotation(angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        Self::from_real(c, -s, s, c)
    }

    /// Lower-left shear `[[1, 0], [k, 1]]`: the QND readout form.
    pub fn shear(k: Complex<T>) -> Self {
        let one = Complex::new(T::one(), T::zero());
        let z = Complex::new(T::zero(), T::zero());
        Self::new(one, z, k, one)
    }

    pub fn det(&self) -> Complex<T> {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> Complex<T> {
        self.a11 + self.a22
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::new(self.a11.conj(), self.a21.conj(), self.a12.conj(), self.a22.conj())
    }

    /// Adjugate, so that `m · adj(m) = det(m) · 1`.
    pub fn adjugate(&self) -> Self {
        Self::new(self.a22, -self.a12, -self.a21, self.a11)
    }

    /// Inverse, or `None` when the determinant vanishes or is not finite.
    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm_sqr() == T::zero() || !finite(d) {
            return None;
        }
        Some(self.adjugate().scale(d.inv()))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn scale_re(&self, s: T) -> Self {
        Self::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }

    pub fn apply(&self, v: Column2<T>) -> Column2<T> {
        Column2::new(self.a11 * v.x + self.a12 * v.p, self.a21 * v.x + self.a22 * v.p)
    }

    pub fn col(&self, j: usize) -> Column2<T> {
        match j {
            0 => Column2::new(self.a11, self.a21),
            1 => Column2::new(self.a12, self.a22),
            _ => panic!("column index {j} out of range for a 2x2 matrix"),
        }
    }

    /// Row vector `(cos θ, sin θ) · M`: the measured quadrature's weights on the two inputs.
    pub fn project_row(&self, angle: T) -> (Complex<T>, Complex<T>) {
        let (s, c) = angle.sin_cos();
        (self.a11 * c + self.a21 * s, self.a12 * c + self.a22 * s)
    }

    pub fn entries(&self) -> [Complex<T>; 4] {
        [self.a11, self.a12, self.a21, self.a22]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.entries().iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|&z| finite(z))
    }
}

impl<T: Real> Mul for ComplexMat2<T> {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl<T: Real> Mul<Column2<T>> for ComplexMat2<T> {
    type Output = Column2<T>;

    fn mul(self, v: Column2<T>) -> Column2<T> {
        self.apply(v)
    }
}

impl<T: Real> Add for ComplexMat2<T> {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl<T: Real> Sub for ComplexMat2<T> {
    type Output = Self;

    fn sub(self, o: Self) -> Self {
        Self::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl<T: Real> Neg for ComplexMat2<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.scale_re(-T::one())
    }
}
