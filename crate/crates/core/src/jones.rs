//! Jones calculus for fully polarized beams.
//!
//! A [`PolarizationState`] carries both the polarization and the scalar
//! amplitude of one beam, so intensities and interference fall out of plain
//! complex arithmetic. Lossless elements are [`JonesMatrix`] values in SU(2)
//! (waveplates) or U(1)·I (phase shifters, mirrors).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for exact algebraic identities.
pub const EXACT_TOL: f64 = 1e-12;
/// Tolerance for synthesized or optimized quantities.
pub const SYNTH_TOL: f64 = 1e-10;
/// Distance from a logical basis state accepted by [`decode_bit`].
pub const DECODE_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `e^{iθ}`, exact at integer multiples of π/2.
///
/// Interferometer arms built from π and π/2 shifts then cancel to an exact
/// zero instead of leaving ~1e-16 residue at dark ports.
pub fn cis(theta: f64) -> Complex64 {
    let quarter = theta / FRAC_PI_2;
    if quarter.fract() == 0.0 && quarter.abs() < 1e15 && quarter * FRAC_PI_2 == theta {
        match (quarter as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::from_polar(1.0, theta)
    }
}

/// Jones vector `(amp_x, amp_y)` of one beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    pub amp_x: Complex64,
    pub amp_y: Complex64,
}

impl PolarizationState {
    pub const fn new(amp_x: Complex64, amp_y: Complex64) -> Self {
        PolarizationState { amp_x, amp_y }
    }

    /// No light.
    pub const fn vacuum() -> Self {
        Self::new(ZERO, ZERO)
    }

    /// Unit-intensity x polarization (logical 1).
    pub const fn horizontal() -> Self {
        Self::new(ONE, ZERO)
    }

    /// Unit-intensity y polarization (logical 0).
    pub const fn vertical() -> Self {
        Self::new(ZERO, ONE)
    }

    pub fn intensity(&self) -> f64 {
        self.amp_x.norm_sqr() + self.amp_y.norm_sqr()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.amp_x * c, self.amp_y * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.amp_x + other.amp_x, self.amp_y + other.amp_y)
    }

    pub fn is_finite(&self) -> bool {
        self.amp_x.is_finite() && self.amp_y.is_finite()
    }

    /// Largest componentwise deviation from `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.amp_x - other.amp_x)
            .norm()
            .max((self.amp_y - other.amp_y).norm())
    }
}

impl fmt::Display for PolarizationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.amp_x, self.amp_y)
    }
}

/// Intensity `|amp_x|² + |amp_y|²` of a beam.
pub fn intensity(s: &PolarizationState) -> f64 {
    s.intensity()
}

/// Logical encoding: 1 is x-polarized, 0 is y-polarized, both at unit intensity.
pub fn encode_bit(b: bool) -> PolarizationState {
    if b {
        PolarizationState::horizontal()
    } else {
        PolarizationState::vertical()
    }
}

/// Inverse of [`encode_bit`], ignoring global phase.
pub fn decode_bit(s: &PolarizationState) -> Result<bool> {
    let (mx, my) = (s.amp_x.norm(), s.amp_y.norm());
    if (mx - 1.0).abs() <= DECODE_TOL && my <= DECODE_TOL {
        Ok(true)
    } else if (my - 1.0).abs() <= DECODE_TOL && mx <= DECODE_TOL {
        Ok(false)
    } else {
        Err(Error::Decoding(format!("{s} is not a logical basis state")))
    }
}

/// 2×2 complex transfer matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JonesMatrix(pub [[Complex64; 2]; 2]);

impl JonesMatrix {
    pub const IDENTITY: JonesMatrix = JonesMatrix([[ONE, ZERO], [ZERO, ONE]]);

    pub const fn new(m00: Complex64, m01: Complex64, m10: Complex64, m11: Complex64) -> Self {
        JonesMatrix([[m00, m01], [m10, m11]])
    }

    pub fn diag(d0: Complex64, d1: Complex64) -> Self {
        Self::new(d0, ZERO, ZERO, d1)
    }

    /// Real rotation `[[cos, -sin], [sin, cos]]`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c.into(), (-s).into(), s.into(), c.into())
    }

    pub fn scalar(c: Complex64) -> Self {
        Self::diag(c, c)
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let m = &self.0;
        Self::new(m[0][0] * c, m[0][1] * c, m[1][0] * c, m[1][1] * c)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M†M − I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::IDENTITY)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_finite() && self.unitarity_defect() <= tol
    }

    /// Entrywise distance to `other` after removing the best global phase.
    pub fn phase_aligned_distance(&self, other: &Self) -> f64 {
        let overlap = (self.adjoint() * *other).trace();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.scale(phase).max_abs_diff(other)
    }
}

impl Mul for JonesMatrix {
    type Output = JonesMatrix;

    fn mul(self, rhs: JonesMatrix) -> JonesMatrix {
        let (a, b) = (&self.0, &rhs.0);
        let cell = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        JonesMatrix::new(cell(0, 0), cell(0, 1), cell(1, 0), cell(1, 1))
    }
}

impl Mul<PolarizationState> for JonesMatrix {
    type Output = PolarizationState;

    fn mul(self, s: PolarizationState) -> PolarizationState {
        let m = &self.0;
        PolarizationState::new(
            m[0][0] * s.amp_x + m[0][1] * s.amp_y,
            m[1][0] * s.amp_x + m[1][1] * s.amp_y,
        )
    }
}

/// `M·s`.
pub fn apply_jones(m: &JonesMatrix, s: &PolarizationState) -> PolarizationState {
    *m * *s
}

/// A birefringent plate: retardance `eta` between the x and y field
/// components, slow axis at angle `phi` from the x axis. Radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveplateSpec {
    pub eta: f64,
    pub phi: f64,
}

impl WaveplateSpec {
    pub fn new(eta: f64, phi: f64) -> Result<Self> {
        let spec = WaveplateSpec { eta, phi };
        spec.check()?;
        Ok(spec)
    }

    pub fn half_wave(phi: f64) -> Self {
        WaveplateSpec { eta: PI, phi }
    }

    pub fn quarter_wave(phi: f64) -> Self {
        WaveplateSpec { eta: FRAC_PI_2, phi }
    }

    pub fn check(&self) -> Result<()> {
        if self.eta.is_finite() && self.phi.is_finite() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "waveplate parameters must be finite (eta={}, phi={})",
                self.eta, self.phi
            )))
        }
    }

}

/// Slow-axis angle reduced to `[0, π)`.
///
/// A plate is unchanged by turning its axis through π, so this is safe
/// anywhere. Retardance is not reduced: `η + 2π` negates the matrix, which
/// matters inside an interferometer.
pub fn reduce_axis_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(PI);
    // rem_euclid can round up to exactly π for tiny negative inputs
    if r >= PI {
        0.0
    } else {
        r
    }
}

/// `R(φ)·diag(e^{iη/2}, e^{−iη/2})·R(−φ)`.
pub fn waveplate_unitary(spec: &WaveplateSpec) -> Result<JonesMatrix> {
    spec.check()?;
    let retarder = JonesMatrix::diag(cis(spec.eta / 2.0), cis(-spec.eta / 2.0));
    Ok(JonesMatrix::rotation(spec.phi) * retarder * JonesMatrix::rotation(-spec.phi))
}

/// Slow-axis angles of a quarter-, half-, quarter-wave plate sequence.
///
/// The beam meets `phi_q2` first; the composed matrix is
/// `Q(phi_q1)·H(phi_h)·Q(phi_q2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QhqAngles {
    pub phi_q1: f64,
    pub phi_h: f64,
    pub phi_q2: f64,
}

pub fn qhq_compose(angles: &QhqAngles) -> JonesMatrix {
    let plate = |spec: WaveplateSpec| waveplate_unitary(&spec).unwrap_or(JonesMatrix::IDENTITY);
    plate(WaveplateSpec::quarter_wave(angles.phi_q1))
        * plate(WaveplateSpec::half_wave(angles.phi_h))
        * plate(WaveplateSpec::quarter_wave(angles.phi_q2))
}

/// Find Q-H-Q angles realizing `target ∈ SU(2)` up to global phase.
///
/// A plate `U(η, φ)` is a rotation by `−η` about the Bloch axis
/// `(sin 2φ, 0, cos 2φ)`. Conjugating through the quarter-wave rotations
/// turns `Q(α)·H(β)·Q(γ)` into `−R_y(2α)·R_x(4β − 2α − 2γ)·R_y(−2γ)`, so the
/// angles follow from the Y-X-Y Euler angles of the target.
pub fn qhq_synthesize(target: &JonesMatrix) -> Result<QhqAngles> {
    if !target.is_unitary(SYNTH_TOL) {
        return Err(Error::invalid(format!(
            "target is not unitary (defect {:e})",
            target.unitarity_defect()
        )));
    }
    let det = target.det();
    if (det - ONE).norm() > SYNTH_TOL {
        return Err(Error::invalid(format!("target determinant is {det}, expected 1")));
    }

    // target = w·I − i(v_x σ_x + v_y σ_y + v_z σ_z)
    let m = &target.0;
    let w = 0.5 * (m[0][0] + m[1][1]).re;
    let vz = 0.5 * (m[1][1] - m[0][0]).im;
    let vy = 0.5 * (m[1][0] - m[0][1]).re;
    let vx = -0.5 * (m[1][0] + m[0][1]).im;

    // R_y(a)·R_x(b)·R_y(c) has w + i v_y = cos(b/2)·e^{i(a+c)/2}
    // and v_x − i v_z = sin(b/2)·e^{i(a−c)/2}.
    let sum_arm = Complex64::new(w, vy);
    let diff_arm = Complex64::new(vx, -vz);
    let b = 2.0 * diff_arm.norm().atan2(sum_arm.norm());
    let half_sum = if sum_arm.norm() > 0.0 { sum_arm.arg() } else { 0.0 };
    let half_diff = if diff_arm.norm() > 0.0 { diff_arm.arg() } else { 0.0 };
    let a = half_sum + half_diff;
    let c = half_sum - half_diff;

    let angles = QhqAngles {
        phi_q1: a / 2.0,
        phi_h: (b + a - c) / 4.0,
        phi_q2: -c / 2.0,
    };
    let residual = qhq_compose(&angles).phase_aligned_distance(target);
    if residual > SYNTH_TOL {
        return Err(Error::invalid(format!(
            "synthesis residual {residual:e} exceeds {SYNTH_TOL:e}"
        )));
    }
    Ok(angles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_4, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn i_sigma_x() -> JonesMatrix {
        JonesMatrix::new(ZERO, c(0.0, 1.0), c(0.0, 1.0), ZERO)
    }

    #[test]
    fn half_wave_at_zero_is_diag_i_minus_i() {
        let m = waveplate_unitary(&WaveplateSpec::new(PI, 0.0).unwrap()).unwrap();
        assert_eq!(m, JonesMatrix::diag(c(0.0, 1.0), c(0.0, -1.0)));
    }

    #[test]
    fn zero_retardance_is_identity() {
        for phi in [0.0, 0.3, 1.7, -4.0, 100.0] {
            let m = waveplate_unitary(&WaveplateSpec::new(0.0, phi).unwrap()).unwrap();
            assert!(m.max_abs_diff(&JonesMatrix::IDENTITY) < EXACT_TOL, "phi={phi}");
        }
    }

    #[test]
    fn half_wave_at_45_degrees_is_i_sigma_x() {
        let m = waveplate_unitary(&WaveplateSpec::new(PI, FRAC_PI_4).unwrap()).unwrap();
        assert!(m.max_abs_diff(&i_sigma_x()) < EXACT_TOL);
    }

    #[test]
    fn non_finite_waveplate_rejected() {
        assert!(WaveplateSpec::new(f64::NAN, 0.0).is_err());
        let spec = WaveplateSpec { eta: 1.0, phi: f64::INFINITY };
        assert!(matches!(waveplate_unitary(&spec), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn compensated_half_wave_is_sigma_z_up_to_sign() {
        let m = waveplate_unitary(&WaveplateSpec::half_wave(0.0)).unwrap().scale(cis(FRAC_PI_2));
        assert_eq!(m, JonesMatrix::diag(c(-1.0, 0.0), c(1.0, 0.0)));
        for x in [false, true] {
            let out = m * encode_bit(x);
            let sign = if x { -1.0 } else { 1.0 };
            assert_eq!(out, encode_bit(x).scale(sign.into()));
        }
    }

    #[test]
    fn apply_examples() {
        let s = PolarizationState::horizontal();
        assert_eq!(apply_jones(&JonesMatrix::IDENTITY, &s), s);
        let d = JonesMatrix::diag(c(0.0, 1.0), c(0.0, -1.0));
        assert_eq!(apply_jones(&d, &s), PolarizationState::new(c(0.0, 1.0), ZERO));
        let (a, b) = (c(0.3, -0.2), c(-1.1, 0.5));
        let out = apply_jones(&i_sigma_x(), &PolarizationState::new(a, b));
        assert_eq!(out, PolarizationState::new(c(0.0, 1.0) * b, c(0.0, 1.0) * a));
    }

    #[test]
    fn intensity_examples() {
        assert_eq!(intensity(&PolarizationState::horizontal()), 1.0);
        assert_eq!(intensity(&PolarizationState::vacuum()), 0.0);
        let half = PolarizationState::new(c(-0.5, 0.0), ZERO);
        assert_eq!(intensity(&half), 0.25);
    }

    #[test]
    fn bit_encoding_round_trip() {
        assert_eq!(encode_bit(true), PolarizationState::new(ONE, ZERO));
        assert_eq!(encode_bit(false), PolarizationState::new(ZERO, ONE));
        for b in [false, true] {
            assert_eq!(decode_bit(&encode_bit(b)).unwrap(), b);
        }
        for theta in [0.0, 0.7, 2.0, -3.0] {
            let s = PolarizationState::new(Complex64::from_polar(1.0, theta), ZERO);
            assert!(decode_bit(&s).unwrap());
        }
        let diag = PolarizationState::new(c(0.5f64.sqrt(), 0.0), c(0.5f64.sqrt(), 0.0));
        assert!(matches!(decode_bit(&diag), Err(Error::Decoding(_))));
        assert!(decode_bit(&PolarizationState::vacuum()).is_err());
    }

    #[test]
    fn compose_all_zero_is_minus_identity() {
        let m = qhq_compose(&QhqAngles { phi_q1: 0.0, phi_h: 0.0, phi_q2: 0.0 });
        // diag(e^{iπ/4}, e^{-iπ/4}) · diag(i, -i) · diag(e^{iπ/4}, e^{-iπ/4})
        assert!(m.max_abs_diff(&JonesMatrix::scalar(c(-1.0, 0.0))) < EXACT_TOL);
    }

    #[test]
    fn synthesize_identity() {
        let angles = qhq_synthesize(&JonesMatrix::IDENTITY).unwrap();
        assert!(qhq_compose(&angles).phase_aligned_distance(&JonesMatrix::IDENTITY) <= SYNTH_TOL);
    }

    /// Brute-force grid search over π/8 steps: an independent witness that
    /// iσ_x has an exact Q-H-Q realization with φ_h = π/4.
    #[test]
    fn synthesize_i_sigma_x_matches_grid_search_witness() {
        let target = i_sigma_x();
        let step = PI / 8.0;
        let mut witnesses = Vec::new();
        for i in 0..8 {
            for j in 0..8 {
                for k in 0..8 {
                    let angles = QhqAngles {
                        phi_q1: i as f64 * step,
                        phi_h: j as f64 * step,
                        phi_q2: k as f64 * step,
                    };
                    if qhq_compose(&angles).phase_aligned_distance(&target) < 1e-12 {
                        witnesses.push((i, j, k));
                    }
                }
            }
        }
        assert!(witnesses.contains(&(0, 2, 0)), "{witnesses:?}");

        let angles = qhq_synthesize(&target).unwrap();
        assert!(qhq_compose(&angles).phase_aligned_distance(&target) <= SYNTH_TOL);
    }

    #[test]
    fn synthesize_rejects_bad_targets() {
        let lossy = JonesMatrix::scalar(c(0.5, 0.0));
        assert!(qhq_synthesize(&lossy).is_err());
        let u1 = JonesMatrix::diag(c(0.0, 1.0), ONE); // unitary, det = i
        assert!(qhq_synthesize(&u1).is_err());
    }

    #[test]
    fn axis_reduction() {
        assert_eq!(reduce_axis_angle(-FRAC_PI_2), FRAC_PI_2);
        assert_eq!(reduce_axis_angle(PI), 0.0);
        assert_eq!(reduce_axis_angle(-1e-300), 0.0);
        for phi in [-5.0, -0.3, 2.0, 9.0] {
            let a = waveplate_unitary(&WaveplateSpec::new(1.1, phi).unwrap()).unwrap();
            let b = waveplate_unitary(&WaveplateSpec::new(1.1, reduce_axis_angle(phi)).unwrap()).unwrap();
            assert!(a.max_abs_diff(&b) < EXACT_TOL);
        }
        let a = waveplate_unitary(&WaveplateSpec::new(0.4, 0.2).unwrap()).unwrap();
        let b = waveplate_unitary(&WaveplateSpec::new(0.4 + TAU, 0.2).unwrap()).unwrap();
        assert!(a.scale(c(-1.0, 0.0)).max_abs_diff(&b) < EXACT_TOL);
    }

    fn su2_from_quaternion(q: [f64; 4]) -> JonesMatrix {
        let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
        let [w, x, y, z] = q.map(|v| v / norm);
        JonesMatrix::new(c(w, -z), c(-y, -x), c(y, -x), c(w, z))
    }

    proptest! {
        #[test]
        fn waveplates_are_special_unitary(eta in -20.0f64..20.0, phi in -20.0f64..20.0) {
            let m = waveplate_unitary(&WaveplateSpec::new(eta, phi).unwrap()).unwrap();
            prop_assert!(m.unitarity_defect() <= EXACT_TOL);
            prop_assert!((m.det() - ONE).norm() <= EXACT_TOL);
        }

        #[test]
        fn unitary_preserves_intensity(
            eta in -7.0f64..7.0, phi in -7.0f64..7.0,
            ax in -2.0f64..2.0, bx in -2.0f64..2.0, ay in -2.0f64..2.0, by in -2.0f64..2.0,
        ) {
            let m = waveplate_unitary(&WaveplateSpec::new(eta, phi).unwrap()).unwrap();
            let s = PolarizationState::new(c(ax, bx), c(ay, by));
            prop_assert!((intensity(&apply_jones(&m, &s)) - intensity(&s)).abs() <= EXACT_TOL);
        }

        #[test]
        fn synthesis_round_trip(q in prop::array::uniform4(-1.0f64..1.0)) {
            prop_assume!(q.iter().map(|v| v * v).sum::<f64>() > 1e-6);
            let target = su2_from_quaternion(q);
            let angles = qhq_synthesize(&target).unwrap();
            prop_assert!(qhq_compose(&angles).phase_aligned_distance(&target) <= SYNTH_TOL);
        }

        #[test]
        fn synthesis_of_composed_angles(a in -4.0f64..4.0, b in -4.0f64..4.0, g in -4.0f64..4.0) {
            let target = qhq_compose(&QhqAngles { phi_q1: a, phi_h: b, phi_q2: g }).scale(c(-1.0, 0.0));
            let angles = qhq_synthesize(&target).unwrap();
            prop_assert!(qhq_compose(&angles).phase_aligned_distance(&target) <= SYNTH_TOL);
        }
    }
}
