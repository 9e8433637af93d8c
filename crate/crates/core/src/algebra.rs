//! The coefficient algebra: 2×2 complex matrices, with su(2) as a distinguished
//! real subspace.
//!
//! Every cochain coefficient in this crate is a [`Mat2C`]. Products of su(2)
//! elements generally leave su(2), so nothing here assumes closure; membership
//! is measured with [`su2_deviation`] and enforced only where a caller asks.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default absolute tolerance for su(2) membership checks.
pub const SU2_TOL: f64 = 1e-9;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A 2×2 complex matrix stored row-major as `[m00, m01, m10, m11]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2C(pub [Complex64; 4]);

impl Mat2C {
    pub const ZERO: Mat2C = Mat2C([ZERO; 4]);
    pub const IDENTITY: Mat2C = Mat2C([ONE, ZERO, ZERO, ONE]);

    /// Basis element `E₁ = [[i, 0], [0, -i]]`.
    pub const E1: Mat2C = Mat2C([I, ZERO, ZERO, Complex64::new(0.0, -1.0)]);
    /// Basis element `E₂ = [[0, 1], [-1, 0]]`.
    pub const E2: Mat2C = Mat2C([ZERO, ONE, Complex64::new(-1.0, 0.0), ZERO]);
    /// Basis element `E₃ = [[0, i], [i, 0]]`.
    pub const E3: Mat2C = Mat2C([ZERO, I, I, ZERO]);

    pub fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        Mat2C([m00, m01, m10, m11])
    }

    /// Builds a matrix from `(re, im)` pairs in row-major order.
    pub fn from_parts(parts: [[f64; 2]; 4]) -> Self {
        Mat2C(parts.map(|[re, im]| Complex64::new(re, im)))
    }

    pub fn entries(&self) -> &[Complex64; 4] {
        &self.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2C(self.0.map(|z| z * s))
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        Mat2C(self.0.map(|z| z * s))
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let [a, b, c, d] = self.0;
        Mat2C([a.conj(), c.conj(), b.conj(), d.conj()])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0] + self.0[3]
    }

    /// Frobenius norm squared, `Σ |m_ij|²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for Mat2C {
    type Output = Mat2C;
    fn add(self, rhs: Mat2C) -> Mat2C {
        let (a, b) = (self.0, rhs.0);
        Mat2C([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl Sub for Mat2C {
    type Output = Mat2C;
    fn sub(self, rhs: Mat2C) -> Mat2C {
        let (a, b) = (self.0, rhs.0);
        Mat2C([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    }
}

impl Neg for Mat2C {
    type Output = Mat2C;
    fn neg(self) -> Mat2C {
        Mat2C(self.0.map(|z| -z))
    }
}

impl Mul for Mat2C {
    type Output = Mat2C;
    fn mul(self, rhs: Mat2C) -> Mat2C {
        let [a, b, c, d] = self.0;
        let [e, f, g, h] = rhs.0;
        Mat2C([a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h])
    }
}

impl AddAssign for Mat2C {
    fn add_assign(&mut self, rhs: Mat2C) {
        *self = *self + rhs;
    }
}

impl SubAssign for Mat2C {
    fn sub_assign(&mut self, rhs: Mat2C) {
        *self = *self - rhs;
    }
}

impl fmt::Display for Mat2C {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

// Serialized as a row-major length-4 array of `[re, im]` pairs.
impl Serialize for Mat2C {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: [[f64; 2]; 4] = self.0.map(|z| [z.re, z.im]);
        parts.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Mat2C {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let parts = <[[f64; 2]; 4]>::deserialize(deserializer)?;
        Ok(Mat2C::from_parts(parts))
    }
}

/// Real coordinates of an su(2) element in the basis `E₁, E₂, E₃`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Su2Coords {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl Su2Coords {
    pub fn new(a1: f64, a2: f64, a3: f64) -> Self {
        Su2Coords { a1, a2, a3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a1, self.a2, self.a3]
    }

    pub fn from_array([a1, a2, a3]: [f64; 3]) -> Self {
        Su2Coords { a1, a2, a3 }
    }

    pub fn dot(&self, other: &Su2Coords) -> f64 {
        self.a1 * other.a1 + self.a2 * other.a2 + self.a3 * other.a3
    }
}

/// `a₁E₁ + a₂E₂ + a₃E₃ = [[a₁i, a₂ + a₃i], [-a₂ + a₃i, -a₁i]]`.
pub fn su2_from_coords(c: Su2Coords) -> Mat2C {
    Mat2C([
        Complex64::new(0.0, c.a1),
        Complex64::new(c.a2, c.a3),
        Complex64::new(-c.a2, c.a3),
        Complex64::new(0.0, -c.a1),
    ])
}

/// Inverse of [`su2_from_coords`]; rejects matrices farther than `tol` from su(2).
pub fn coords_from_su2(m: &Mat2C, tol: f64) -> Result<Su2Coords> {
    let deviation = su2_deviation(m);
    if deviation > tol || !deviation.is_finite() {
        return Err(Error::NotInSu2 { deviation, tol });
    }
    Ok(Su2Coords::new(m.0[0].im, m.0[1].re, m.0[1].im))
}

/// `-½ tr(ab)`. Real, and equal to the coordinate dot product, when both
/// arguments lie in su(2).
pub fn trace_pairing(a: &Mat2C, b: &Mat2C) -> Complex64 {
    let [a0, a1, a2, a3] = a.0;
    let [b0, b1, b2, b3] = b.0;
    -0.5 * ((a0 * b0 + a3 * b3) + (a1 * b2 + a2 * b1))
}

/// `‖m + m†‖_F + |tr m|`, zero exactly on su(2).
pub fn su2_deviation(m: &Mat2C) -> f64 {
    (*m + m.dagger()).frobenius() + m.trace().norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Plain multiply-and-trace, written independently of `trace_pairing`.
    fn pairing_oracle(a: &Mat2C, b: &Mat2C) -> Complex64 {
        let p = *a * *b;
        -(p.0[0] + p.0[3]) / 2.0
    }

    #[test]
    fn basis_e1_from_coords() {
        let m = su2_from_coords(Su2Coords::new(1.0, 0.0, 0.0));
        assert_eq!(m, Mat2C::new(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)));
        assert_eq!(m, Mat2C::E1);
        assert_eq!(su2_from_coords(Su2Coords::default()), Mat2C::ZERO);
    }

    #[test]
    fn displayed_matrix_layout() {
        let (a1, a2, a3) = (0.3, -1.7, 2.25);
        let m = su2_from_coords(Su2Coords::new(a1, a2, a3));
        assert_eq!(m, Mat2C::new(c(0.0, a1), c(a2, a3), c(-a2, a3), c(0.0, -a1)));
        let sum = Mat2C::E1.scale(a1) + Mat2C::E2.scale(a2) + Mat2C::E3.scale(a3);
        assert_eq!(m, sum);
    }

    #[test]
    fn coords_inverse_and_rejection() {
        assert_eq!(coords_from_su2(&Mat2C::E1, SU2_TOL).unwrap(), Su2Coords::new(1.0, 0.0, 0.0));
        assert_eq!(coords_from_su2(&Mat2C::ZERO, SU2_TOL).unwrap(), Su2Coords::default());
        assert!(matches!(
            coords_from_su2(&Mat2C::IDENTITY, 1e-9),
            Err(Error::NotInSu2 { .. })
        ));
    }

    #[test]
    fn basis_pairings() {
        assert_eq!(trace_pairing(&Mat2C::E1, &Mat2C::E1), c(1.0, 0.0));
        assert_eq!(trace_pairing(&Mat2C::E1, &Mat2C::E2), c(0.0, 0.0));
        assert_eq!(pairing_oracle(&Mat2C::E1, &Mat2C::E1), c(1.0, 0.0));
        assert_eq!(pairing_oracle(&Mat2C::E1, &Mat2C::E2), c(0.0, 0.0));
        let b = Mat2C::from_parts([[1.0, 2.0], [3.0, -4.0], [0.5, 0.0], [7.0, 1.0]]);
        assert_eq!(trace_pairing(&Mat2C::ZERO, &b), c(0.0, 0.0));
    }

    #[test]
    fn deviation_values() {
        assert_eq!(su2_deviation(&Mat2C::E2), 0.0);
        // I + I† = 2I has Frobenius norm 2√2; |tr I| = 2.
        assert_abs_diff_eq!(su2_deviation(&Mat2C::IDENTITY), 2.0 * 2f64.sqrt() + 2.0, epsilon = 1e-15);
        // E₁E₁ = -I, same magnitudes.
        let sq = Mat2C::E1 * Mat2C::E1;
        assert_eq!(sq, -Mat2C::IDENTITY);
        assert_abs_diff_eq!(su2_deviation(&sq), 2.0 * 2f64.sqrt() + 2.0, epsilon = 1e-15);
    }

    #[test]
    fn serde_layout() {
        let m = Mat2C::from_parts([[1.0, 2.0], [3.0, -4.0], [0.1, 0.0], [7.0, 1e-300]]);
        let text = serde_json::to_string(&m).unwrap();
        assert_eq!(text, "[[1.0,2.0],[3.0,-4.0],[0.1,0.0],[7.0,1e-300]]");
        let back: Mat2C = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }

    fn coord() -> impl Strategy<Value = f64> {
        -10.0..10.0f64
    }

    fn coords() -> impl Strategy<Value = Su2Coords> {
        (coord(), coord(), coord()).prop_map(|(a, b, c)| Su2Coords::new(a, b, c))
    }

    fn mat() -> impl Strategy<Value = Mat2C> {
        proptest::array::uniform4((coord(), coord())).prop_map(|e| Mat2C(e.map(|(re, im)| Complex64::new(re, im))))
    }

    proptest! {
        #[test]
        fn pairing_matches_coordinate_dot(u in coords(), v in coords()) {
            let p = trace_pairing(&su2_from_coords(u), &su2_from_coords(v));
            let scale = 1.0 + u.dot(&u).sqrt() * v.dot(&v).sqrt();
            prop_assert!((p.re - u.dot(&v)).abs() <= 1e-14 * scale);
            prop_assert!(p.im.abs() <= 1e-14 * scale);
        }

        #[test]
        fn pairing_symmetric_and_matches_oracle(a in mat(), b in mat()) {
            prop_assert_eq!(trace_pairing(&a, &b), trace_pairing(&b, &a));
            prop_assert!((trace_pairing(&a, &b) - pairing_oracle(&a, &b)).norm() <= 1e-12);
        }

        #[test]
        fn su2_roundtrip(u in coords()) {
            let m = su2_from_coords(u);
            prop_assert_eq!(su2_deviation(&m), 0.0);
            prop_assert_eq!(coords_from_su2(&m, SU2_TOL).unwrap(), u);
        }
    }
}
