//! Fundamental solution of the essential 4x4 linearized system along the
//! elliptic collinear orbit.
//!
//! The path gamma(t) solves gamma' = J B(t) gamma, gamma(0) = I, over one
//! period 2 pi of the true anomaly, with B(t) the symmetric coefficient
//! matrix depending on the mass parameter beta and the eccentricity e.
//! Its end matrix (the monodromy matrix) decides linear stability.

use nalgebra::{Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::tolerances as tol;

/// Standard symplectic structure on R^4: J = [[0, -I2], [I2, 0]].
#[must_use]
pub fn j4() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, -1.0, 0.0, //
        0.0, 0.0, 0.0, -1.0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0,
    )
}

/// The essential linearized system at parameters (beta, e).
///
/// beta may exceed the mass-realizable range [0, 7]; the coefficient matrix
/// stays well defined for every beta >= 0 and the stability analysis
/// extends to it unchanged.
#[derive(Debug, Clone, Copy)]
pub struct EssentialSystem {
    beta: f64,
    ecc: f64,
}

impl EssentialSystem {
    pub fn new(beta: f64, ecc: f64) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "beta = {beta} must be finite and nonnegative"
            )));
        }
        if !(ecc.is_finite() && (0.0..1.0).contains(&ecc)) {
            return Err(Error::InvalidInput(format!(
                "eccentricity {ecc} outside [0, 1)"
            )));
        }
        Ok(Self { beta, ecc })
    }

    #[must_use]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[must_use]
    pub fn ecc(&self) -> f64 {
        self.ecc
    }
}

/// Symmetric coefficient matrix B(t) of the essential system.
///
/// Block form [[I2, C], [C^T, D(t)]] with C = [[0,1],[-1,0]] and
/// D(t) = diag((-2 beta - 2 + e cos t) / (1 + e cos t),
///             (beta + 1 + e cos t) / (1 + e cos t)).
#[must_use]
pub fn coefficient_matrix(sys: &EssentialSystem, t: f64) -> Matrix4<f64> {
    let den = 1.0 + sys.ecc * t.cos();
    let d1 = (-2.0 * sys.beta - 2.0 + sys.ecc * t.cos()) / den;
    let d2 = (sys.beta + 1.0 + sys.ecc * t.cos()) / den;
    Matrix4::new(
        1.0, 0.0, 0.0, 1.0, //
        0.0, 1.0, -1.0, 0.0, //
        0.0, -1.0, d1, 0.0, //
        1.0, 0.0, 0.0, d2,
    )
}

/// A real 4x4 matrix tagged with its symplectic defect.
///
/// The defect is max |M^T J M - J| divided by max(1, max |M|^2): monodromy
/// norms reach 1e10 and beyond at large beta, where an absolute defect is
/// dominated by unavoidable roundoff, so the defect is reported relative
/// to the squared matrix scale. For norms of order one the two readings
/// coincide.
#[derive(Debug, Clone, Copy)]
pub struct SymplecticMatrix {
    entries: Matrix4<f64>,
    symplectic_defect: f64,
}

impl SymplecticMatrix {
    #[must_use]
    pub fn from_matrix(m: Matrix4<f64>) -> Self {
        let defect_raw = (m.transpose() * j4() * m - j4()).abs().max();
        let scale = m.abs().max().max(1.0);
        Self {
            entries: m,
            symplectic_defect: defect_raw / (scale * scale),
        }
    }

    #[must_use]
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.entries
    }

    #[must_use]
    pub fn symplectic_defect(&self) -> f64 {
        self.symplectic_defect
    }

    /// |det M - 1| relative to max(1, max|M|^4), the scale at which a
    /// 4x4 determinant is computable in double precision.
    #[must_use]
    pub fn det_deviation(&self) -> f64 {
        let scale = self.entries.abs().max().max(1.0);
        (self.entries.determinant() - 1.0).abs() / scale.powi(4)
    }
}

// Verner's 16-stage 9(8) pair. The first weight row propagates the
// 9th-order solution, the second is the embedded 8th-order estimate.
const STAGES: usize = 16;

#[rustfmt::skip]
const RK_A: [[f64; STAGES]; STAGES] = [
    [0.0; STAGES],
    [0.3571e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-3.833_735_636_677_017e-2, 0.137_397_637_279_444_32, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.714_760_534_225_28e-2, 0.0, 0.111_442_816_026_758_42, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.674_764_429_871_505, 0.0, -9.982_382_134_885_293, 7.921_017_705_013_789, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.242_104_050_577_351e-2, 0.0, 0.0, 0.179_691_118_917_595_32, 6.237_879_371_938_568e-4, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.159_249_222_364_763_22, 0.0, 0.0, -0.429_842_987_724_108_7, 6.665_266_542_726_088e-2, 0.757_805_152_571_522, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [7.283_333_333_333_333e-2, 0.0, 0.0, 0.0, 0.0, 0.335_934_459_066_510_37, 0.246_732_207_600_156_3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [0.729755859375e-1, 0.0, 0.0, 0.0, 0.0, 0.334_800_972_969_933_33, 0.118_415_823_905_066_65, -0.345673828125e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [4.911_213_663_452_096_4e-2, 0.0, 0.0, 0.0, 0.0, 3.983_857_361_308_652e-2, 0.106_967_528_893_935_49, -2.174_259_165_458_647_7e-2, -0.105_595_647_486_956_49, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-2.707_988_818_641_280_5e-2, 0.0, 0.0, 0.0, 0.0, 0.333e-1, -0.164_552_607_003_605_72, 3.428_266_306_497_39e-2, 0.158_526_406_443_922_1, 0.218_523_425_681_122_5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.584_657_769_108_862_5e-2, 0.0, 0.0, 0.0, 0.0, 9.166_533_166_672_539e-2, 0.239_239_965_552_362_7, 1.023_834_712_248_415e-2, -2.679_331_322_859_542_6e-3, 4.235_624_181_474_284_5e-2, 0.225_397_047_016_660_4, 0.0, 0.0, 0.0, 0.0, 0.0],
    [-0.480_251_051_272_519_6, 0.0, 0.0, 0.0, 0.0, -6.359_610_162_555_930_5, -0.276_231_389_804_084_1, -6.500_796_633_979_847, 0.573_476_587_704_095_7, 1.347_125_994_868_138_9, 5.936_840_409_706_221, 6.590_346_245_333_925, 0.0, 0.0, 0.0, 0.0],
    [0.330_753_306_767_140_1, 0.0, 0.0, 0.0, 0.0, 5.956_207_776_829_962, -0.486_831_640_048_152_77, 4.462_055_288_206_771, 0.741_025_823_144_207_2, -0.711_819_203_457_591_3, -5.454_619_594_516_665, -4.140_803_729_244_71, 0.203_831_972_319_038_66, 0.0, 0.0, 0.0],
    [-0.584_711_112_299_894_5, 0.0, 0.0, 0.0, 0.0, -12.412_684_171_162_67, 1.360_245_445_660_928, -22.426_105_311_118_683, -0.882_885_705_586_545_8, 1.770_155_128_538_230_4, 12.158_096_519_185_339, 22.230_375_204_077_607, -0.663_448_376_020_124_9, 0.450_962_378_725_813_74, 0.0, 0.0],
    [1.940_575_549_810_648_7, 0.0, 0.0, 0.0, 0.0, 21.977_984_081_145_564, 0.823_074_732_698_472_9, 68.164_416_836_263_54, -3.117_097_463_620_267, -4.568_841_021_822_44, -18.741_909_871_262_65, -66.577_118_396_378_32, 1.098_915_553_165_441_8, 0.0, 0.0, 0.0],
];

#[rustfmt::skip]
const RK_B9: [f64; STAGES] = [
    1.500_669_014_979_724_7e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.055_180_992_746_381_3, 0.238_494_726_378_218_3, 0.128_815_177_428_299_15, 0.227_662_311_104_621_57, 1.229_532_587_437_517_4, 4.624_976_662_810_384e-2, 0.138_619_631_936_629_38, 3.080_010_168_319_435_5e-2, 0.0,
];

#[rustfmt::skip]
const RK_B8: [f64; STAGES] = [
    1.897_210_532_481_101_4e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 3.408_110_314_549_493_8, 0.126_032_388_382_092_1, 0.118_837_506_345_114_97, 0.249_104_199_783_868_75, -3.269_966_219_928_978_3, 0.302_379_810_022_888_3, 0.0, 0.0, 4.652_989_552_070_924e-2,
];

#[rustfmt::skip]
const RK_C: [f64; STAGES] = [
    0.0, 0.3571e-1, 9.906_028_091_267_415e-2, 0.148_590_421_369_011_2, 0.6134,
    0.232_735_947_360_562_7, 0.553_864_052_639_437_3, 0.6555, 0.491625, 0.6858e-1,
    0.253, 0.662_064_179_541_204_6, 0.8309, 0.8998, 1.0, 1.0,
];

/// Integrate gamma' = J B(t) gamma from (t0, y0) to t1 with the embedded
/// 9(8) pair; supports both time directions. Step acceptance uses a
/// root-mean-square of entrywise errors scaled by atol + rtol max(|y|).
pub fn integrate_segment(
    sys: &EssentialSystem,
    t0: f64,
    t1: f64,
    y0: &Matrix4<f64>,
) -> Result<Matrix4<f64>> {
    integrate_with_tolerance(sys, t0, t1, y0, tol::INTEGRATOR_RTOL, tol::INTEGRATOR_ATOL)
}

/// Same as [`integrate_segment`] with caller-chosen local tolerances. The
/// validation suite uses a deliberately loosened rtol to demonstrate that
/// the symplectic-defect gate actually rejects sloppy integrations.
pub fn integrate_with_tolerance(
    sys: &EssentialSystem,
    t0: f64,
    t1: f64,
    y0: &Matrix4<f64>,
    rtol: f64,
    atol: f64,
) -> Result<Matrix4<f64>> {
    if t0 == t1 {
        return Ok(*y0);
    }
    let j = j4();
    let rhs = |t: f64, y: &Matrix4<f64>| -> Matrix4<f64> { j * coefficient_matrix(sys, t) * y };

    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = *y0;
    let mut h: f64 = dir * (span.abs() / 64.0).min(0.1);
    let mut k = [Matrix4::<f64>::zeros(); STAGES];

    // Generous cap: at rtol 1e-12 the solver needs a few hundred steps even
    // at e = 0.99, so hitting this means the step size has degenerated.
    for _ in 0..2_000_000 {
        if (t - t1) * dir >= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        if h.abs() < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { achieved_t: t });
        }

        for i in 0..STAGES {
            let mut yi = y;
            for (j_idx, kj) in k.iter().enumerate().take(i) {
                let a = RK_A[i][j_idx];
                if a != 0.0 {
                    yi += kj * (h * a);
                }
            }
            k[i] = rhs(t + RK_C[i] * h, &yi);
        }

        let mut y_high = y;
        let mut y_low = y;
        for i in 0..STAGES {
            if RK_B9[i] != 0.0 {
                y_high += k[i] * (h * RK_B9[i]);
            }
            if RK_B8[i] != 0.0 {
                y_low += k[i] * (h * RK_B8[i]);
            }
        }

        let mut err_sq = 0.0;
        for idx in 0..16 {
            let scale = atol + rtol * y[idx].abs().max(y_high[idx].abs());
            let e = (y_high[idx] - y_low[idx]) / scale;
            err_sq += e * e;
        }
        let err_norm = (err_sq / 16.0).sqrt();

        if err_norm <= 1.0 {
            t += h;
            y = y_high;
        }
        let scale = if err_norm > 0.0 {
            (0.9 * err_norm.powf(-1.0 / 9.0)).clamp(0.2, 10.0)
        } else {
            10.0
        };
        h *= scale;
    }
    Err(Error::StepUnderflow { achieved_t: t })
}

/// End matrix gamma(2 pi) of the essential system, by adaptive integration
/// targeting local error 1e-12.
pub fn monodromy(sys: &EssentialSystem) -> Result<SymplecticMatrix> {
    let m = integrate_segment(sys, 0.0, 2.0 * std::f64::consts::PI, &Matrix4::identity())?;
    Ok(SymplecticMatrix::from_matrix(m))
}

/// Residual of the backward integration: starting from m at t = 2 pi and
/// integrating to t = 0 must recover the identity.
///
/// Reported relative to max(1, max|m|^2): a forward error of size
/// eps |m| (the floating-point floor of the end matrix itself) is
/// re-amplified by the expanding directions of the reversed flow, so the
/// round trip conditions like |m|^2. Under this scale the residual
/// measures integrator quality all the way down to roundoff; for
/// small-norm monodromies it coincides with the absolute reading.
pub fn backward_residual(sys: &EssentialSystem, m: &SymplecticMatrix) -> Result<f64> {
    let back = integrate_segment(sys, 2.0 * std::f64::consts::PI, 0.0, m.matrix())?;
    let raw = (back - Matrix4::identity()).abs().max();
    let scale = m.matrix().abs().max().max(1.0);
    Ok(raw / (scale * scale))
}

/// Closed-form monodromy for the circular case: at e = 0 the system is
/// autonomous, so gamma(2 pi) = exp(2 pi J B). Serves as the oracle the
/// integrator is checked against.
#[must_use]
pub fn monodromy_e0_exact(beta: f64) -> SymplecticMatrix {
    let sys = EssentialSystem { beta, ecc: 0.0 };
    let jb = j4() * coefficient_matrix(&sys, 0.0);
    SymplecticMatrix::from_matrix(expm4(&(jb * (2.0 * std::f64::consts::PI))))
}

/// Matrix exponential by scaling and squaring with a diagonal Pade(13)
/// approximant. The Pade coefficients come from the recurrence
/// c_0 = 1, c_{k+1} = c_k (13 - k) / ((26 - k)(k + 1)); the scaling power
/// keeps the argument below norm 1, which wastes a few squarings on small
/// inputs but holds the approximant comfortably inside its accuracy region.
fn expm4(m: &Matrix4<f64>) -> Matrix4<f64> {
    let norm = (0..4)
        .map(|c| m.column(c).abs().sum())
        .fold(0.0f64, f64::max);
    let s = if norm > 1.0 {
        (norm.log2().ceil() as i32).max(0)
    } else {
        0
    };
    let a = m / 2f64.powi(s);

    let mut c = 1.0;
    let mut term = Matrix4::<f64>::identity();
    let mut num = term;
    let mut den = term;
    for k in 0..13 {
        c *= (13.0 - k as f64) / ((26.0 - k as f64) * (k as f64 + 1.0));
        term *= a;
        num += term * c;
        if k % 2 == 0 {
            den -= term * c;
        } else {
            den += term * c;
        }
    }
    let mut r = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is nonsingular for scaled arguments");
    for _ in 0..s {
        r = r * r;
    }
    r
}

/// Plane rotation by angle t.
#[must_use]
pub fn rotation2(t: f64) -> Matrix2<f64> {
    let (s, c) = t.sin_cos();
    Matrix2::new(c, -s, s, c)
}

fn rotation4(t: f64) -> Matrix4<f64> {
    let r = rotation2(t);
    let mut out = Matrix4::zeros();
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(&r);
    out.fixed_view_mut::<2, 2>(2, 2).copy_from(&r);
    out
}

/// The rotated path xi(t) = diag(R(t), R(t)) gamma(t) sampled on a uniform
/// grid of `samples` points spanning [0, 2 pi] inclusive.
///
/// xi shares the end matrix with gamma because R(2 pi) = I (the final
/// sample uses the full-turn rotation exactly, not its roundoff image).
pub fn modified_path(
    sys: &EssentialSystem,
    samples: usize,
) -> Result<Vec<(f64, SymplecticMatrix)>> {
    if samples < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut out = Vec::with_capacity(samples);
    let mut gamma = Matrix4::identity();
    let mut t_prev = 0.0;
    for k in 0..samples {
        let t = two_pi * k as f64 / (samples - 1) as f64;
        gamma = integrate_segment(sys, t_prev, t, &gamma)?;
        t_prev = t;
        let rot = if k + 1 == samples {
            Matrix4::identity()
        } else {
            rotation4(t)
        };
        out.push((t, SymplecticMatrix::from_matrix(rot * gamma)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn coefficient_matrix_at_origin_parameters() {
        let sys = EssentialSystem::new(0.0, 0.0).unwrap();
        let expect = Matrix4::new(
            1.0, 0.0, 0.0, 1.0, //
            0.0, 1.0, -1.0, 0.0, //
            0.0, -1.0, -2.0, 0.0, //
            1.0, 0.0, 0.0, 1.0,
        );
        assert_eq!(coefficient_matrix(&sys, 0.7), expect);
        assert_eq!(coefficient_matrix(&sys, 3.1), expect);
    }

    #[test]
    fn coefficient_matrix_is_symmetric_and_periodic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let beta = rng.random_range(0.0..12.0);
            let ecc = rng.random_range(0.0..0.95);
            let t = rng.random_range(-10.0..10.0);
            let sys = EssentialSystem::new(beta, ecc).unwrap();
            let b = coefficient_matrix(&sys, t);
            assert_eq!(b, b.transpose(), "B must be symmetric by construction");
            // The entries amplify the roundoff of cos(t + 2 pi) by up to
            // e (2 beta + 3) / (1 + e cos t)^2, which approaches 1e4 for
            // high eccentricity; hence the scaled tolerance.
            let wrap = coefficient_matrix(&sys, t + TWO_PI);
            let amp = ecc * (2.0 * beta + 3.0) / (1.0 + ecc * t.cos()).powi(2);
            assert!(
                (b - wrap).abs().max() < 1e-13 * amp.max(1.0),
                "B must be 2 pi periodic"
            );
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(EssentialSystem::new(-0.1, 0.0).is_err());
        assert!(EssentialSystem::new(1.0, 1.0).is_err());
        assert!(EssentialSystem::new(1.0, -0.2).is_err());
        assert!(EssentialSystem::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn circular_keplerian_monodromy_is_unipotent() {
        let sys = EssentialSystem::new(0.0, 0.0).unwrap();
        let m = monodromy(&sys).unwrap();
        // All four eigenvalues equal 1; the quadruple eigenvalue is
        // defective, so the attainable eigenvalue accuracy is only about
        // the square root of the matrix perturbation.
        for ev in m.matrix().complex_eigenvalues().iter() {
            assert!(
                (ev - Complex::new(1.0, 0.0)).norm() < 1e-5,
                "eigenvalue {ev} should be 1"
            );
        }
        let exact = monodromy_e0_exact(0.0);
        assert!(
            (m.matrix() - exact.matrix()).abs().max() < 1e-10,
            "integrated and exact circular monodromy differ"
        );
    }

    #[test]
    fn circular_beta_one_hyperbolic_multiplier() {
        let m = monodromy_e0_exact(1.0);
        let alpha1 = 20.0f64.sqrt() / 2.0;
        let expect = (TWO_PI * alpha1.sqrt()).exp();
        let max_ev = m
            .matrix()
            .complex_eigenvalues()
            .iter()
            .map(|ev| ev.norm())
            .fold(0.0f64, f64::max);
        assert!(
            (max_ev - expect).abs() / expect < 1e-9,
            "largest multiplier {max_ev:.6e} vs expected {expect:.6e}"
        );
        assert!(
            (expect - 1.2034748965286117e4).abs() < 1e-6,
            "closed-form multiplier moved: {expect:.12e}"
        );
    }

    #[test]
    fn integrator_matches_exponential_on_circular_cases() {
        for beta in [0.0, 0.5, 1.4, 3.0, 7.0] {
            let sys = EssentialSystem::new(beta, 0.0).unwrap();
            let m = monodromy(&sys).unwrap();
            let exact = monodromy_e0_exact(beta);
            let scale = exact.matrix().abs().max().max(1.0);
            let diff = (m.matrix() - exact.matrix()).abs().max() / scale;
            assert!(diff < 1e-8, "beta = {beta}: relative deviation {diff:e}");
        }
    }

    #[test]
    fn characteristic_polynomial_of_constant_part() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let beta: f64 = rng.random_range(0.0..7.0);
            let sys = EssentialSystem::new(beta, 0.0).unwrap();
            let jb = j4() * coefficient_matrix(&sys, 0.0);
            // det(JB - lambda I) should equal
            // lambda^4 + (1 - beta) lambda^2 - beta (2 beta + 3).
            for lam in [0.3, -1.1, 2.4] {
                let direct = (jb - Matrix4::identity() * lam).determinant();
                let closed = lam.powi(4) + (1.0 - beta) * lam * lam - beta * (2.0 * beta + 3.0);
                assert!(
                    (direct - closed).abs() < 1e-10 * closed.abs().max(1.0),
                    "beta = {beta}, lambda = {lam}: {direct} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn monodromy_is_symplectic_for_random_parameters() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..12 {
            let beta = rng.random_range(0.0..7.0);
            let ecc = rng.random_range(0.0..0.9);
            let sys = EssentialSystem::new(beta, ecc).unwrap();
            let m = monodromy(&sys).unwrap();
            assert!(
                m.symplectic_defect() < 1e-9,
                "beta = {beta}, e = {ecc}: defect {:e}",
                m.symplectic_defect()
            );
            assert!(
                m.det_deviation() < 1e-9,
                "beta = {beta}, e = {ecc}: det deviation {:e}",
                m.det_deviation()
            );
        }
    }

    #[test]
    fn backward_integration_recovers_identity() {
        for (beta, ecc) in [(0.7, 0.2), (3.4, 0.55), (6.8, 0.85)] {
            let sys = EssentialSystem::new(beta, ecc).unwrap();
            let m = monodromy(&sys).unwrap();
            let residual = backward_residual(&sys, &m).unwrap();
            assert!(
                residual < 1e-8,
                "beta = {beta}, e = {ecc}: backward residual {residual:e}"
            );
        }
    }

    #[test]
    fn spectrum_is_reciprocal_and_conjugation_closed() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            let beta = rng.random_range(0.0..0.85);
            let ecc = rng.random_range(0.0..0.9);
            let sys = EssentialSystem::new(beta, ecc).unwrap();
            let m = monodromy(&sys).unwrap();
            let evs: Vec<Complex<f64>> = m.matrix().complex_eigenvalues().iter().copied().collect();
            // Tolerances sit at the floating-point floor: eigenvalues carry
            // absolute error of order eps * |M|, so the product lambda * mu
            // cannot test cleaner than eps * |M|^2.
            let scale = m.matrix().abs().max().max(1.0);
            let recip_tol = 1e-8f64.max(100.0 * f64::EPSILON * scale * scale);
            let conj_tol = 1e-8f64.max(100.0 * f64::EPSILON * scale);
            for ev in &evs {
                let best_recip = evs
                    .iter()
                    .map(|mu| (ev * mu - Complex::new(1.0, 0.0)).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    best_recip < recip_tol,
                    "beta = {beta}, e = {ecc}: no reciprocal partner for {ev}"
                );
                let best_conj = evs
                    .iter()
                    .map(|mu| (mu - ev.conj()).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(
                    best_conj < conj_tol,
                    "beta = {beta}, e = {ecc}: no conjugate partner for {ev}"
                );
            }
        }
    }

    #[test]
    fn modified_path_endpoints_and_symplecticity() {
        let sys = EssentialSystem::new(1.4, 0.3).unwrap();
        let path = modified_path(&sys, 50).unwrap();
        assert_eq!(path.len(), 50);
        assert!(
            (path[0].1.matrix() - Matrix4::identity()).abs().max() == 0.0,
            "path must start at the identity"
        );
        let end = monodromy(&sys).unwrap();
        let scale = end.matrix().abs().max().max(1.0);
        let diff = (path.last().unwrap().1.matrix() - end.matrix()).abs().max() / scale;
        assert!(diff < 1e-10, "endpoint deviates by {diff:e}");
        for (t, sample) in &path {
            assert!(
                sample.symplectic_defect() < 1e-9,
                "sample at t = {t} has defect {:e}",
                sample.symplectic_defect()
            );
        }
    }

    #[test]
    fn high_eccentricity_still_integrates() {
        let sys = EssentialSystem::new(2.0, 0.99).unwrap();
        let m = monodromy(&sys).unwrap();
        assert!(m.symplectic_defect() < 1e-9, "defect {:e}", m.symplectic_defect());
    }
}
