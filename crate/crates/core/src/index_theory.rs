//! Symplectic end-matrix analysis: nullity at a unit-circle point, basic
//! normal-form classification, splitting numbers, and propagation of the
//! index counterclockwise around the circle.
//!
//! The classifier works from the stability parameters s = lambda + 1/lambda
//! of the two eigenvalue pairs, obtained from the palindromic characteristic
//! polynomial, and resolves rotation directions by Krein signs.  Tolerance
//! windows grow with the matrix norm: at large beta the monodromy entries
//! reach 1e13 and the elliptic pair is only determined up to the resulting
//! cancellation error, so a fixed tolerance would either misclassify or lie
//! about the attainable precision.

use crate::error::{Error, Result};
use crate::monodromy::{j4, SymplecticMatrix};
use crate::tolerances as tol;
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Threshold sequence on the half-integer grid: the circular-case operator
/// is degenerate at omega = 1 exactly at integer orders and at omega = -1
/// at half-integer orders.  Strictly increasing in `order` for order >= 1.
pub fn beta_hat(order: f64) -> f64 {
    let n2 = order * order;
    (n2 - 3.0 + (9.0 * n2 * n2 - 14.0 * n2 + 9.0).sqrt()) / 4.0
}

/// Growth exponent of the real pair of the circular-case monodromy: the
/// hyperbolic eigenvalues at e = 0 are exp(+-2 pi sqrt(alpha)).
pub fn alpha_of_beta(beta: f64) -> f64 {
    (beta - 1.0 + (9.0 * beta * beta + 10.0 * beta + 1.0).sqrt()) / 2.0
}

/// Rotation order of the elliptic pair of the circular-case monodromy:
/// theta(0) = 1 and theta is strictly increasing, reaching n at the n-th
/// threshold.
pub fn theta_of_beta(beta: f64) -> f64 {
    ((1.0 - beta + (9.0 * beta * beta + 10.0 * beta + 1.0).sqrt()) / 2.0).sqrt()
}

/// Closed-form index data for the circular case e = 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircularTables {
    pub beta: f64,
    /// Rotation order theta(beta) of the elliptic pair.
    pub theta: f64,
    /// End-matrix rotation angle 2 pi theta reduced to [0, 2 pi); the
    /// positive-rotation branch, fixed by index monotonicity.
    pub angle: f64,
    pub i1: usize,
    pub nu1: usize,
    pub i_minus1: usize,
    pub nu_minus1: usize,
    /// Nearest half-integer-grid thresholds enclosing beta: largest at or
    /// below, smallest strictly above.
    pub lower: f64,
    pub upper: f64,
}

/// Equality window for recognizing that beta sits exactly on a threshold;
/// the tables are step functions, so this only matters for inputs produced
/// by `beta_hat` itself.
fn on_threshold(beta: f64, hat: f64) -> bool {
    (beta - hat).abs() <= 1e-12 * hat.max(1.0)
}

/// Exact index/nullity tables of the circular case at omega = 1 and -1,
/// with the bracketing thresholds and the end-matrix rotation angle.
pub fn circular_tables(beta: f64) -> Result<CircularTables> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidInput(format!(
            "circular tables need beta >= 0, got {beta}"
        )));
    }
    let theta = theta_of_beta(beta);
    let angle = (TAU * theta).rem_euclid(TAU);

    // integer-grid table, left-continuous
    let (i1, nu1) = if on_threshold(beta, 0.0) || beta == 0.0 {
        (0, 3)
    } else {
        let mut n = 2.0;
        while beta > beta_hat(n) && !on_threshold(beta, beta_hat(n)) {
            n += 1.0;
        }
        let i1 = 2 * (n as usize) - 1;
        let nu1 = if on_threshold(beta, beta_hat(n)) { 2 } else { 0 };
        (i1, nu1)
    };

    // half-integer-grid table
    let mut m = 1.0;
    while beta > beta_hat(m + 0.5) && !on_threshold(beta, beta_hat(m + 0.5)) {
        m += 1.0;
    }
    let i_minus1 = 2 * (m as usize);
    let nu_minus1 = if on_threshold(beta, beta_hat(m + 0.5)) {
        2
    } else {
        0
    };

    // bracketing thresholds on the half-step grid
    let mut lower = 0.0;
    let mut upper = beta_hat(1.5);
    let mut k = 1.5;
    while beta >= upper && !on_threshold(beta, upper) {
        lower = upper;
        k += 0.5;
        upper = beta_hat(k);
    }
    if on_threshold(beta, upper) {
        lower = upper;
        k += 0.5;
        upper = beta_hat(k);
    }

    Ok(CircularTables {
        beta,
        theta,
        angle,
        i1,
        nu1,
        i_minus1,
        nu_minus1,
        lower,
        upper,
    })
}

fn complexify(m: &Matrix4<f64>) -> Matrix4<Complex64> {
    m.map(Complex64::from)
}

/// dim ker(M - omega I) by singular-value thresholding.
///
/// The gate models the resolution of the matrix entries: roundoff and the
/// recorded symplectic defect, floored near the integrator tolerance scale.
/// A fixed fraction of the largest singular value would not do: once the
/// expanding direction reaches 1e5 the O(1) contracting directions would
/// fall below it and a regular matrix would read as degenerate.
pub fn nullity(m: &SymplecticMatrix, omega: Complex64) -> usize {
    let mut a = complexify(m.matrix());
    for k in 0..4 {
        a[(k, k)] -= omega;
    }
    let sv = a.svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0f64, f64::max);
    let rel = (1e4 * f64::EPSILON).max(10.0 * m.symplectic_defect());
    let gate = rel * (1.0 + top);
    sv.iter().filter(|&&s| s < gate).count()
}

/// Dimension of ker(M - omega I) for unit-circle omega, with the answer
/// certified against the double-precision resolution of the stored matrix.
///
/// An eigenvalue pair can only touch omega when its stability parameter
/// lambda + 1/lambda equals 2 Re(omega), and the parameters recovered from
/// the traces carry an absolute uncertainty of order eps * scale.  A pair
/// sitting clear of the target by more than that contributes nothing, which
/// certifies zero without ever forming a singular value; this keeps the
/// answer meaningful at matrix scales where the raw singular-value gate of
/// [`nullity`] swallows whole eigendirections.  Only when a pair lands
/// inside the resolution band does the singular-value probe run, and only
/// below the scale cap where its absolute gate still separates kernel from
/// roundoff; past the cap the stored matrix no longer determines the answer
/// and the call refuses.
pub fn kernel_dimension(m: &SymplecticMatrix, omega: Complex64) -> Result<usize> {
    let a = m.matrix();
    let scale = a.abs().max().max(1.0);
    let rel = (64.0 * f64::EPSILON).max(10.0 * m.symplectic_defect());
    let target = 2.0 * omega.re;
    let res = tol::CLASSIFY_BOUNDARY_TOL.max(tol::KERNEL_S_RESOLUTION * f64::EPSILON * scale);

    let c1 = a.trace();
    let c2 = 0.5 * (c1 * c1 - (a * a).trace());
    let disc = c1 * c1 - 4.0 * (c2 - 2.0);
    let sq = disc.abs().sqrt();
    let sq_tol = tol::CLASSIFY_BOUNDARY_TOL.max(32.0 * rel.sqrt() * scale);

    if disc < 0.0 && sq > sq_tol {
        // complex quadruple: the spectrum avoids the unit circle entirely
        return Ok(0);
    }
    // near-coincident parameters sit anywhere within sq_tol of c1/2 (the
    // cancelled discriminant's own error dwarfs res there), so the
    // clearance margin widens accordingly
    let (s_lo, s_hi, margin) = if sq <= sq_tol {
        (0.5 * c1, 0.5 * c1, res + sq_tol)
    } else {
        let half = 0.5 * sq;
        let s1 = if c1 >= 0.0 {
            0.5 * c1 + half
        } else {
            0.5 * c1 - half
        };
        let s2 = (c2 - 2.0) / s1;
        (s1.min(s2), s1.max(s2), res)
    };
    if (s_lo - target).abs() > margin && (s_hi - target).abs() > margin {
        return Ok(0);
    }
    if scale <= tol::KERNEL_SVD_SCALE_CAP {
        return Ok(nullity(m, omega));
    }
    Err(Error::Ambiguous(format!(
        "kernel dimension at omega = {:.4}{:+.4}i is beyond double-precision \
         resolution at matrix scale {scale:.2e}",
        omega.re, omega.im
    )))
}

/// Basic normal forms of 2x2 symplectic blocks, plus the two genuinely
/// four-dimensional spectra.
#[derive(Clone, Debug, PartialEq)]
pub enum BasicForm {
    /// The 2x2 identity.
    Identity,
    /// Minus the 2x2 identity (the half-turn rotation).
    MinusIdentity,
    /// Real pair lambda, 1/lambda with |lambda| > 1; lambda > 0 is the
    /// D(2) class, lambda < 0 the D(-2) class.
    Hyperbolic { lambda: f64 },
    /// Elliptic pair e^{+-i theta} tagged with the rotation angle
    /// theta in (0,pi) u (pi,2pi).
    Rotation { theta: f64 },
    /// Jordan block at lambda = +-1 with sign invariant a = +-1.
    Unipotent { lambda: f64, a: f64 },
    /// Coincident elliptic pairs joined by a Jordan block; `trivial`
    /// follows the sign of (b2 - b3) sin theta in the reduced form.
    CoincidentRotations { theta: f64, trivial: bool },
    /// Eigenvalue quadruple off both the unit circle and the real axis.
    ComplexSaddle { lambda: Complex64 },
}

impl BasicForm {
    pub fn dim(&self) -> usize {
        match self {
            BasicForm::CoincidentRotations { .. } | BasicForm::ComplexSaddle { .. } => 4,
            _ => 2,
        }
    }

    /// Eigenvalues carried by this factor, multiplicity included.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        match *self {
            BasicForm::Identity => vec![Complex64::from(1.0); 2],
            BasicForm::MinusIdentity => vec![Complex64::from(-1.0); 2],
            BasicForm::Hyperbolic { lambda } => {
                vec![Complex64::from(lambda), Complex64::from(1.0 / lambda)]
            }
            BasicForm::Rotation { theta } => vec![
                Complex64::from_polar(1.0, theta),
                Complex64::from_polar(1.0, -theta),
            ],
            BasicForm::Unipotent { lambda, .. } => vec![Complex64::from(lambda); 2],
            BasicForm::CoincidentRotations { theta, .. } => vec![
                Complex64::from_polar(1.0, theta),
                Complex64::from_polar(1.0, theta),
                Complex64::from_polar(1.0, -theta),
                Complex64::from_polar(1.0, -theta),
            ],
            BasicForm::ComplexSaddle { lambda } => {
                vec![lambda, lambda.conj(), 1.0 / lambda, 1.0 / lambda.conj()]
            }
        }
    }

    pub fn label(&self) -> String {
        match *self {
            BasicForm::Identity => "I2".into(),
            BasicForm::MinusIdentity => "-I2".into(),
            BasicForm::Hyperbolic { lambda } => {
                if lambda > 0.0 {
                    "D(2)".into()
                } else {
                    "D(-2)".into()
                }
            }
            BasicForm::Rotation { theta } => format!("R({theta:.4})"),
            BasicForm::Unipotent { lambda, a } => {
                format!("N1({},{})", lambda as i32, a as i32)
            }
            BasicForm::CoincidentRotations { theta, trivial } => {
                let kind = if trivial { "trivial" } else { "nontrivial" };
                format!("N2({theta:.4},{kind})")
            }
            BasicForm::ComplexSaddle { lambda } => {
                format!("complex-saddle({:.4}{:+.4}i)", lambda.re, lambda.im)
            }
        }
    }

    /// Angles in (0, 2 pi], as multiples of 1 = angle 0, at which this
    /// factor touches the unit circle.
    fn circle_angles(&self) -> Vec<f64> {
        match *self {
            BasicForm::Identity => vec![0.0],
            BasicForm::MinusIdentity => vec![PI],
            BasicForm::Hyperbolic { .. } | BasicForm::ComplexSaddle { .. } => vec![],
            BasicForm::Rotation { theta } | BasicForm::CoincidentRotations { theta, .. } => {
                vec![theta.rem_euclid(TAU), (TAU - theta).rem_euclid(TAU)]
            }
            BasicForm::Unipotent { lambda, .. } => {
                vec![if lambda > 0.0 { 0.0 } else { PI }]
            }
        }
    }
}

/// A decomposition of a 4x4 symplectic matrix into basic normal forms.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFormTag {
    pub factors: Vec<BasicForm>,
}

impl NormalFormTag {
    pub fn new(factors: Vec<BasicForm>) -> Self {
        let mut tag = NormalFormTag { factors };
        tag.normalize_order();
        tag
    }

    fn normalize_order(&mut self) {
        // unit-circle content first, then negative hyperbolic, then positive
        let rank = |f: &BasicForm| match f {
            BasicForm::Identity => 0,
            BasicForm::MinusIdentity => 1,
            BasicForm::Unipotent { .. } => 2,
            BasicForm::Rotation { .. } => 3,
            BasicForm::CoincidentRotations { .. } => 4,
            BasicForm::Hyperbolic { lambda } if *lambda < 0.0 => 5,
            BasicForm::Hyperbolic { .. } => 6,
            BasicForm::ComplexSaddle { .. } => 7,
        };
        self.factors.sort_by_key(rank);
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(BasicForm::dim).sum()
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.factors
            .iter()
            .flat_map(BasicForm::eigenvalues)
            .collect()
    }

    pub fn label(&self) -> String {
        self.factors
            .iter()
            .map(BasicForm::label)
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Splitting numbers (s_plus, s_minus) of a symplectic matrix at a
/// unit-circle point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplittingPair {
    pub s_plus: i64,
    pub s_minus: i64,
}

impl SplittingPair {
    const ZERO: SplittingPair = SplittingPair {
        s_plus: 0,
        s_minus: 0,
    };
}

fn same_circle_point(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() < tol::ANGLE_ORDER_TOL
}

fn basic_splitting(form: &BasicForm, omega: Complex64) -> SplittingPair {
    let one = Complex64::from(1.0);
    let minus_one = Complex64::from(-1.0);
    match *form {
        BasicForm::Identity => {
            if same_circle_point(omega, one) {
                SplittingPair { s_plus: 1, s_minus: 1 }
            } else {
                SplittingPair::ZERO
            }
        }
        BasicForm::MinusIdentity => {
            if same_circle_point(omega, minus_one) {
                SplittingPair { s_plus: 1, s_minus: 1 }
            } else {
                SplittingPair::ZERO
            }
        }
        BasicForm::Hyperbolic { .. } | BasicForm::ComplexSaddle { .. } => SplittingPair::ZERO,
        BasicForm::Rotation { theta } => {
            if same_circle_point(omega, Complex64::from_polar(1.0, theta)) {
                SplittingPair { s_plus: 0, s_minus: 1 }
            } else if same_circle_point(omega, Complex64::from_polar(1.0, -theta)) {
                // conjugate point: (s+, s-) swap
                SplittingPair { s_plus: 1, s_minus: 0 }
            } else {
                SplittingPair::ZERO
            }
        }
        BasicForm::Unipotent { lambda, a } => {
            let at = if lambda > 0.0 { one } else { minus_one };
            if !same_circle_point(omega, at) {
                return SplittingPair::ZERO;
            }
            // the jump survives exactly when the sign invariant matches the
            // eigenvalue: a = lambda gives (1,1), a = -lambda gives (0,0)
            if a * lambda > 0.0 {
                SplittingPair { s_plus: 1, s_minus: 1 }
            } else {
                SplittingPair::ZERO
            }
        }
        BasicForm::CoincidentRotations { theta, trivial } => {
            let hit = same_circle_point(omega, Complex64::from_polar(1.0, theta))
                || same_circle_point(omega, Complex64::from_polar(1.0, -theta));
            if hit && !trivial {
                SplittingPair { s_plus: 1, s_minus: 1 }
            } else {
                SplittingPair::ZERO
            }
        }
    }
}

/// Splitting numbers of the tag at omega: additive over the factors, zero
/// off the spectrum.
pub fn splitting_numbers(tag: &NormalFormTag, omega: Complex64) -> SplittingPair {
    tag.factors.iter().fold(SplittingPair::ZERO, |acc, f| {
        let p = basic_splitting(f, omega);
        SplittingPair {
            s_plus: acc.s_plus + p.s_plus,
            s_minus: acc.s_minus + p.s_minus,
        }
    })
}

/// Index at omega0 from the index at 1, summing the splitting jumps over
/// the unit-circle eigenvalues crossed counterclockwise strictly between
/// 1 and omega0.
pub fn propagate_index(i_1: i64, tag: &NormalFormTag, omega0: Complex64) -> Result<i64> {
    if (omega0.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "propagation target must lie on the unit circle, got |omega| = {}",
            omega0.norm()
        )));
    }
    let phi0 = omega0.arg().rem_euclid(TAU);

    let mut angles: Vec<f64> = tag
        .factors
        .iter()
        .flat_map(BasicForm::circle_angles)
        .collect();
    angles.sort_by(f64::total_cmp);
    // merge equal points; refuse orderings that are within the ambiguity
    // window without being equal
    let mut merged: Vec<f64> = Vec::new();
    for a in angles {
        match merged.last() {
            Some(&p) if (a - p).abs() < 1e-12 => {}
            Some(&p) if (a - p).abs() < tol::ANGLE_ORDER_TOL => {
                return Err(Error::Ambiguous(format!(
                    "two unit-circle eigenvalues are {:.3e} apart in angle; \
                     their order around the circle is unresolved",
                    a - p
                )));
            }
            _ => merged.push(a),
        }
    }
    for &a in &merged {
        for anchor in [0.0, TAU, phi0] {
            let d = (a - anchor).abs();
            if d > 1e-12 && d < tol::ANGLE_ORDER_TOL {
                return Err(Error::Ambiguous(format!(
                    "a unit-circle eigenvalue lies {d:.3e} in angle from the \
                     propagation anchor; on/strictly-before is unresolved"
                )));
            }
        }
    }

    let one = Complex64::from(1.0);
    let mut acc = i_1 + splitting_numbers(tag, one).s_plus;
    for &a in &merged {
        if a > 1e-12 && a < phi0 - 1e-12 {
            let p = splitting_numbers(tag, Complex64::from_polar(1.0, a));
            acc += p.s_plus - p.s_minus;
        }
    }
    acc -= splitting_numbers(tag, omega0).s_minus;
    Ok(acc)
}

/// Classification outcome: the recognized decomposition, plus a second
/// admissible reading when the spectrum sits inside the boundary window
/// between two classes.
#[derive(Clone, Debug)]
pub struct Classification {
    pub tag: NormalFormTag,
    pub alternate: Option<NormalFormTag>,
}

/// Krein form value Im(x^H J x) of the eigenvector at the upper-half-plane
/// eigenvalue e^{i phi}; positive means the rotation angle is phi itself,
/// negative means 2 pi - phi.
fn krein_form_at(m: &Matrix4<f64>, phi: f64) -> f64 {
    let mut a = complexify(m);
    let mu = Complex64::from_polar(1.0, phi);
    for k in 0..4 {
        a[(k, k)] -= mu;
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut imin = 0;
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s < svd.singular_values[imin] {
            imin = i;
        }
    }
    let x: Vector4<Complex64> = vt.row(imin).transpose().map(|z| z.conj());
    let jx = complexify(&j4()) * x;
    let form: Complex64 = x.dotc(&jx);
    form.im
}

/// Sign invariant of the Jordan block at lambda = +-1: the quadratic form
/// w^T J (M - lambda I) w evaluated on the generalized direction.
fn unipotent_sign(m: &Matrix4<f64>, lambda: f64) -> Result<f64> {
    let a = m - Matrix4::identity() * lambda;
    let a2 = a * a;
    let svd = a2.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let top = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let gate = 1e-7 * (1.0 + top);
    // among the generalized kernel directions, pick the one the operator
    // moves the most: that is the top of the Jordan chain
    let mut best: Option<(f64, Vector4<f64>)> = None;
    for i in 0..4 {
        if svd.singular_values[i] < gate {
            let v: Vector4<f64> = vt.row(i).transpose();
            let moved = (a * v).norm();
            if best.as_ref().is_none_or(|(b, _)| moved > *b) {
                best = Some((moved, v));
            }
        }
    }
    let (_, w) = best.ok_or_else(|| {
        Error::Ambiguous("no generalized kernel direction at the unit eigenvalue".into())
    })?;
    let q = w.dot(&(j4() * (a * w)));
    let floor = 1e-9 * (1.0 + a.norm());
    if q.abs() < floor {
        return Err(Error::Ambiguous(format!(
            "Jordan sign invariant {q:.3e} is below the resolution floor"
        )));
    }
    Ok(q.signum())
}

/// Triviality of coincident elliptic pairs joined by a Jordan block.
///
/// With the chain normalization (M - mu I) y = x the symplectic pairing
/// x^H J y equals -2/p, where p is the coefficient that the (b2 - b3)
/// criterion of the block normal form [[R, b], [0, R]] reads off; the
/// resulting test, trivial iff Im(x^H J y) sin(phi) < 0, is exactly
/// invariant under symplectic conjugation, eigenvector phase and scale,
/// and kernel shifts of y, so no reduced matrix is ever formed.
fn coincident_triviality(m: &Matrix4<f64>, phi: f64) -> Result<bool> {
    let mu = Complex64::from_polar(1.0, phi);
    let mut a = complexify(m);
    for k in 0..4 {
        a[(k, k)] -= mu;
    }
    let svd = a.svd(true, true);
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let x: Vector4<Complex64> = vt.row(order[0]).transpose().map(|z| z.conj());
    // minimal-norm least-squares solution of (M - mu I) y = x over the
    // regular singular triplets
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let mut y = Vector4::<Complex64>::zeros();
    for &i in &order[1..] {
        let s = svd.singular_values[i];
        let ui = u.column(i);
        let coef = ui.dotc(&x) / Complex64::from(s);
        let vi: Vector4<Complex64> = vt.row(i).transpose().map(|z| z.conj());
        y += vi * coef;
    }
    let residual = (a * y - x).norm();
    if residual > 1e-6 * (1.0 + y.norm()) {
        return Err(Error::Ambiguous(format!(
            "Jordan chain at the coincident pair does not close: residual {residual:.3e}"
        )));
    }

    // conditioning of the real basis the chain spans; past the cap the
    // matrix is too close to diagonalizable to call
    let col = |v: &Vector4<Complex64>, im: bool| -> Vector4<f64> {
        v.map(|z| if im { -z.im } else { z.re })
    };
    let mut t = Matrix4::<f64>::zeros();
    t.set_column(0, &col(&x, false));
    t.set_column(1, &col(&x, true));
    t.set_column(2, &col(&y, false));
    t.set_column(3, &col(&y, true));
    let svt = t.svd(false, false).singular_values;
    let smax = svt.iter().cloned().fold(0.0f64, f64::max);
    let smin = svt.iter().cloned().fold(f64::INFINITY, f64::min);
    if smin <= 0.0 || smax / smin > tol::REDUCTION_COND_CAP {
        return Err(Error::Ambiguous(format!(
            "coincident-pair reduction condition {:.3e} exceeds the cap",
            smax / smin
        )));
    }

    let jc = complexify(&j4());
    let g = x.dotc(&(jc * y)).im;
    if g.abs() < 1e-9 * (1.0 + y.norm()) {
        return Err(Error::Ambiguous(format!(
            "coincident-pair sign invariant {g:.3e} is below the resolution floor"
        )));
    }
    Ok(g * phi.sin() < 0.0)
}

/// One pair's class from its stability parameter, in the branch where the
/// two pairs are separated.  Returns the primary reading and, inside the
/// boundary window with no actual kernel, the alternate one.
fn classify_pair(
    m: &SymplecticMatrix,
    s: f64,
    window: f64,
) -> Result<(BasicForm, Option<BasicForm>)> {
    // a window this wide covers the whole elliptic range, so the factor's
    // position against the circle is not determined by the data at all
    if window > tol::WINDOW_RESOLUTION_CAP && s.abs() < 2.0 + window {
        return Err(Error::Ambiguous(format!(
            "stability parameter {s:.4} cannot be placed against the unit \
             circle: the boundary window {window:.3e} exceeds the resolution cap"
        )));
    }
    let ell = |s: f64| -> f64 {
        let phi = (0.5 * s).clamp(-1.0, 1.0).acos();
        if krein_form_at(m.matrix(), phi) >= 0.0 {
            phi
        } else {
            TAU - phi
        }
    };
    let hyp = |s: f64| -> f64 {
        let root = (s * s - 4.0).max(0.0).sqrt();
        if s > 0.0 {
            (s + root) / 2.0
        } else {
            (s - root) / 2.0
        }
    };

    for sign in [1.0f64, -1.0] {
        if (s - 2.0 * sign).abs() <= window {
            let nu = nullity(m, Complex64::from(sign));
            return Ok(match nu {
                n if n >= 2 => (
                    if sign > 0.0 {
                        BasicForm::Identity
                    } else {
                        BasicForm::MinusIdentity
                    },
                    None,
                ),
                1 => (
                    BasicForm::Unipotent {
                        lambda: sign,
                        a: unipotent_sign(m.matrix(), sign)?,
                    },
                    None,
                ),
                _ => {
                    // no kernel: the pair is marginally elliptic or
                    // marginally hyperbolic and the window cannot tell
                    let r = BasicForm::Rotation { theta: ell(s) };
                    let d = BasicForm::Hyperbolic { lambda: hyp(s) };
                    if (s - 2.0 * sign) * sign < 0.0 {
                        (r, Some(d))
                    } else {
                        (d, Some(r))
                    }
                }
            });
        }
    }
    if s.abs() < 2.0 {
        Ok((BasicForm::Rotation { theta: ell(s) }, None))
    } else {
        Ok((BasicForm::Hyperbolic { lambda: hyp(s) }, None))
    }
}

/// Decompose a 4x4 symplectic matrix into basic normal forms.
///
/// The boundary window scales with the conditioning of the stability
/// parameters: `max(CLASSIFY_BOUNDARY_TOL, 256 rel scale^2 / pair_gap)`
/// with rel the larger of roundoff and the recorded symplectic defect.
/// Inside the window the result carries both admissible readings; cases
/// whose recognition is genuinely outside this routine's scope (coincident
/// eigenvalue-one quadruples with small kernel, ill-conditioned coincident
/// reductions) come back as ambiguity errors.
pub fn classify(m: &SymplecticMatrix) -> Result<Classification> {
    let a = m.matrix();
    let scale = a.abs().max().max(1.0);
    let rel = (64.0 * f64::EPSILON).max(10.0 * m.symplectic_defect());

    let c1 = a.trace();
    let c2 = 0.5 * (c1 * c1 - (a * a).trace());
    let disc = c1 * c1 - 4.0 * (c2 - 2.0);
    let sq = disc.abs().sqrt();
    let sq_tol = tol::CLASSIFY_BOUNDARY_TOL.max(32.0 * rel.sqrt() * scale);

    if disc < 0.0 && sq > sq_tol {
        // genuine complex quadruple: s = (c1 +- i sq)/2, lambda solves
        // lambda + 1/lambda = s
        let s = Complex64::new(0.5 * c1, 0.5 * sq);
        let root = (s * s - Complex64::from(4.0)).sqrt();
        let mut lambda = (s + root) / 2.0;
        if lambda.norm() < 1.0 {
            lambda = (s - root) / 2.0;
        }
        if lambda.im < 0.0 {
            lambda = lambda.conj();
        }
        return Ok(Classification {
            tag: NormalFormTag::new(vec![BasicForm::ComplexSaddle { lambda }]),
            alternate: None,
        });
    }

    if sq <= sq_tol {
        return classify_coincident(m, 0.5 * c1, scale, rel);
    }

    let window = tol::CLASSIFY_BOUNDARY_TOL.max(256.0 * rel * scale * scale / sq.max(1.0));
    let half = 0.5 * sq;
    let s1 = if c1 >= 0.0 {
        0.5 * c1 + half
    } else {
        0.5 * c1 - half
    };
    let s2 = (c2 - 2.0) / s1;

    let (f1, alt1) = classify_pair(m, s1, window)?;
    let (f2, alt2) = classify_pair(m, s2, window)?;
    let tag = NormalFormTag::new(vec![f1.clone(), f2.clone()]);
    let alternate = match (alt1, alt2) {
        (None, None) => None,
        (Some(a1), None) => Some(NormalFormTag::new(vec![a1, f2])),
        (None, Some(a2)) => Some(NormalFormTag::new(vec![f1, a2])),
        (Some(a1), Some(a2)) => Some(NormalFormTag::new(vec![a1, a2])),
    };
    Ok(Classification { tag, alternate })
}

/// The branch where both stability parameters coincide within resolution.
fn classify_coincident(
    m: &SymplecticMatrix,
    s0: f64,
    scale: f64,
    rel: f64,
) -> Result<Classification> {
    let window = tol::CLASSIFY_BOUNDARY_TOL.max(256.0 * rel * scale * scale);
    if window > tol::WINDOW_RESOLUTION_CAP && s0.abs() < 2.0 + window {
        return Err(Error::Ambiguous(format!(
            "coincident stability parameter {s0:.4} cannot be placed against \
             the unit circle: the boundary window {window:.3e} exceeds the \
             resolution cap"
        )));
    }

    for sign in [1.0f64, -1.0] {
        if (s0 - 2.0 * sign).abs() <= window {
            let nu = nullity(m, Complex64::from(sign));
            let eye = if sign > 0.0 {
                BasicForm::Identity
            } else {
                BasicForm::MinusIdentity
            };
            return match nu {
                4 => Ok(Classification {
                    tag: NormalFormTag::new(vec![eye.clone(), eye]),
                    alternate: None,
                }),
                3 => Ok(Classification {
                    tag: NormalFormTag::new(vec![
                        eye,
                        BasicForm::Unipotent {
                            lambda: sign,
                            a: unipotent_sign(m.matrix(), sign)?,
                        },
                    ]),
                    alternate: None,
                }),
                _ => Err(Error::Ambiguous(format!(
                    "coincident eigenvalue pairs at {sign} with kernel dimension \
                     {nu}: normal form beyond this classifier"
                ))),
            };
        }
    }

    if s0.abs() < 2.0 - window {
        let phi = (0.5 * s0).clamp(-1.0, 1.0).acos();
        let nu = nullity(m, Complex64::from_polar(1.0, phi));
        if nu >= 2 {
            // diagonalizable: two rotations, directions from the Krein
            // signature of the eigenspace
            let (pos, neg) = krein_signature(m.matrix(), phi)?;
            let theta_pos = phi;
            let theta_neg = TAU - phi;
            let factors = match (pos, neg) {
                (2, 0) => vec![
                    BasicForm::Rotation { theta: theta_pos },
                    BasicForm::Rotation { theta: theta_pos },
                ],
                (0, 2) => vec![
                    BasicForm::Rotation { theta: theta_neg },
                    BasicForm::Rotation { theta: theta_neg },
                ],
                _ => vec![
                    BasicForm::Rotation { theta: theta_pos },
                    BasicForm::Rotation { theta: theta_neg },
                ],
            };
            return Ok(Classification {
                tag: NormalFormTag::new(factors),
                alternate: None,
            });
        }
        let trivial = coincident_triviality(m.matrix(), phi)?;
        return Ok(Classification {
            tag: NormalFormTag::new(vec![BasicForm::CoincidentRotations {
                theta: phi,
                trivial,
            }]),
            alternate: None,
        });
    }

    if s0.abs() >= 2.0 - window && s0.abs() <= 2.0 + window {
        return Err(Error::Ambiguous(format!(
            "coincident stability parameters {s0:.6} at the elliptic boundary"
        )));
    }

    // coincident hyperbolic pairs; a possible Jordan coupling does not
    // change the splitting data, so the tag keeps the two plain pairs
    let root = (s0 * s0 - 4.0).sqrt();
    let lambda = if s0 > 0.0 {
        (s0 + root) / 2.0
    } else {
        (s0 - root) / 2.0
    };
    Ok(Classification {
        tag: NormalFormTag::new(vec![
            BasicForm::Hyperbolic { lambda },
            BasicForm::Hyperbolic { lambda },
        ]),
        alternate: None,
    })
}

/// Krein signature (positive, negative counts) of the 2-dimensional
/// eigenspace at e^{i phi}.
fn krein_signature(m: &Matrix4<f64>, phi: f64) -> Result<(usize, usize)> {
    let mut a = complexify(m);
    let mu = Complex64::from_polar(1.0, phi);
    for k in 0..4 {
        a[(k, k)] -= mu;
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let jc = complexify(&j4());
    let x1: Vector4<Complex64> = vt.row(order[0]).transpose().map(|z| z.conj());
    let x2: Vector4<Complex64> = vt.row(order[1]).transpose().map(|z| z.conj());
    // Hermitian 2x2 Gram of the Krein form -i x^H J y on the eigenspace
    let g = |u: &Vector4<Complex64>, v: &Vector4<Complex64>| -> Complex64 {
        -Complex64::i() * u.dotc(&(jc * v))
    };
    let g11 = g(&x1, &x1).re;
    let g22 = g(&x2, &x2).re;
    let g12 = g(&x1, &x2);
    let tr = g11 + g22;
    let det = g11 * g22 - g12.norm_sqr();
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let e1 = (tr + disc) / 2.0;
    let e2 = (tr - disc) / 2.0;
    let floor = 1e-7;
    if e1.abs() < floor || e2.abs() < floor {
        return Err(Error::Ambiguous(
            "Krein form on the coincident eigenspace is near-degenerate".into(),
        ));
    }
    let pos = [e1, e2].iter().filter(|&&e| e > 0.0).count();
    Ok((pos, 2 - pos))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monodromy::{monodromy, monodromy_e0_exact, EssentialSystem};
    use crate::spectral::{index_and_nullity, BoundaryTwist};
    use nalgebra::Matrix2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn diamond(a: &Matrix2<f64>, b: &Matrix2<f64>) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = a[(0, 0)];
        m[(0, 2)] = a[(0, 1)];
        m[(2, 0)] = a[(1, 0)];
        m[(2, 2)] = a[(1, 1)];
        m[(1, 1)] = b[(0, 0)];
        m[(1, 3)] = b[(0, 1)];
        m[(3, 1)] = b[(1, 0)];
        m[(3, 3)] = b[(1, 1)];
        m
    }

    fn rot2(theta: f64) -> Matrix2<f64> {
        let (s, c) = theta.sin_cos();
        Matrix2::new(c, -s, s, c)
    }

    fn random_symplectic(rng: &mut ChaCha8Rng) -> Matrix4<f64> {
        let sym = |rng: &mut ChaCha8Rng| -> Matrix2<f64> {
            let a = rng.random_range(-0.8..0.8);
            let b = rng.random_range(-0.8..0.8);
            let c = rng.random_range(-0.8..0.8);
            Matrix2::new(a, b, b, c)
        };
        let b = sym(rng);
        let c = sym(rng);
        let p = loop {
            let cand = Matrix2::new(
                rng.random_range(-1.0..1.0f64) + 1.2,
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-1.0..1.0f64) + 1.2,
            );
            if cand.determinant().abs() > 0.3 {
                break cand;
            }
        };
        let mut upper = Matrix4::identity();
        upper.fixed_view_mut::<2, 2>(0, 2).copy_from(&b);
        let mut lower = Matrix4::identity();
        lower.fixed_view_mut::<2, 2>(2, 0).copy_from(&c);
        let mut diag = Matrix4::zeros();
        diag.fixed_view_mut::<2, 2>(0, 0).copy_from(&p);
        let pinv_t = p.try_inverse().unwrap().transpose();
        diag.fixed_view_mut::<2, 2>(2, 2).copy_from(&pinv_t);
        upper * lower * diag
    }

    fn conjugated(m: Matrix4<f64>, rng: &mut ChaCha8Rng) -> SymplecticMatrix {
        let s = random_symplectic(rng);
        SymplecticMatrix::from_matrix(s * m * s.try_inverse().unwrap())
    }

    #[test]
    fn nullity_matches_known_kernels() {
        let id = SymplecticMatrix::from_matrix(Matrix4::identity());
        assert_eq!(nullity(&id, Complex64::from(1.0)), 4);
        assert_eq!(nullity(&id, Complex64::from(-1.0)), 0);

        let flat = monodromy_e0_exact(0.0);
        assert_eq!(nullity(&flat, Complex64::from(1.0)), 3);

        let at_half = monodromy_e0_exact(beta_hat(1.5));
        assert_eq!(nullity(&at_half, Complex64::from(-1.0)), 2);
        assert_eq!(nullity(&at_half, Complex64::from(1.0)), 0);
    }

    #[test]
    fn kernel_dimension_stays_honest_at_scale() {
        // thresholds: the kernel is real and the scale still modest
        let at_two = monodromy_e0_exact(beta_hat(2.0));
        assert_eq!(kernel_dimension(&at_two, Complex64::from(1.0)).unwrap(), 2);
        assert_eq!(kernel_dimension(&at_two, Complex64::from(-1.0)).unwrap(), 0);
        let at_half = monodromy_e0_exact(beta_hat(1.5));
        assert_eq!(kernel_dimension(&at_half, Complex64::from(-1.0)).unwrap(), 2);

        // a nondegenerate point whose matrix scale defeats the raw
        // singular-value gate: the invariant route still certifies zero
        let sys = EssentialSystem::new(7.0, 0.8).unwrap();
        let m = monodromy(&sys).unwrap();
        assert!(m.matrix().abs().max() > 1e11);
        assert_eq!(kernel_dimension(&m, Complex64::from(1.0)).unwrap(), 0);
        assert_eq!(kernel_dimension(&m, Complex64::from(-1.0)).unwrap(), 0);

        // on a degenerate locus at a scale past the cap the stored matrix
        // no longer determines the kernel, and the call says so
        let far = monodromy_e0_exact(beta_hat(4.0));
        assert!(far.matrix().abs().max() > tol::KERNEL_SVD_SCALE_CAP);
        assert!(kernel_dimension(&far, Complex64::from(1.0)).is_err());
    }

    #[test]
    fn threshold_values_and_table_pattern() {
        assert!(beta_hat(1.0).abs() < 1e-12);
        assert!((beta_hat(2.0) - (1.0 + 97.0f64.sqrt()) / 4.0).abs() < 1e-12);
        assert!((theta_of_beta(0.0) - 1.0).abs() < 1e-12);
        assert!((theta_of_beta(beta_hat(2.0)) - 2.0).abs() < 1e-12);
        assert!((theta_of_beta(beta_hat(2.5)) - 2.5).abs() < 1e-12);

        let t = circular_tables(0.0).unwrap();
        assert_eq!((t.i1, t.nu1, t.i_minus1, t.nu_minus1), (0, 3, 2, 0));
        let t = circular_tables(0.5).unwrap();
        assert_eq!((t.i1, t.nu1, t.i_minus1, t.nu_minus1), (3, 0, 2, 0));
        let t = circular_tables(1.4).unwrap();
        assert_eq!((t.i1, t.nu1, t.i_minus1, t.nu_minus1), (3, 0, 4, 0));
        let t = circular_tables(beta_hat(2.0)).unwrap();
        assert_eq!((t.i1, t.nu1), (3, 2));
        let t = circular_tables(beta_hat(2.5)).unwrap();
        assert_eq!((t.i_minus1, t.nu_minus1), (4, 2));
        let t = circular_tables(5.0).unwrap();
        assert_eq!((t.i1, t.nu1, t.i_minus1, t.nu_minus1), (5, 0, 6, 0));
        let t = circular_tables(beta_hat(3.0) + 0.01).unwrap();
        assert_eq!(t.i1, 7);
    }

    #[test]
    fn tables_bracket_beta_between_thresholds() {
        let t = circular_tables(1.4).unwrap();
        assert!((t.lower - beta_hat(1.5)).abs() < 1e-12);
        assert!((t.upper - beta_hat(2.0)).abs() < 1e-12);
        let t = circular_tables(beta_hat(2.0)).unwrap();
        assert!((t.lower - beta_hat(2.0)).abs() < 1e-12);
        assert!((t.upper - beta_hat(2.5)).abs() < 1e-12);
    }

    #[test]
    fn classify_recovers_synthetic_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d2 = Matrix2::new(3.0, 0.0, 0.0, 1.0 / 3.0);

        let m = conjugated(diamond(&rot2(2.0), &d2), &mut rng);
        let c = classify(&m).unwrap();
        assert!(c.alternate.is_none());
        match &c.tag.factors[..] {
            [BasicForm::Rotation { theta }, BasicForm::Hyperbolic { lambda }] => {
                assert!((theta - 2.0).abs() < 1e-7, "theta {theta}");
                assert!((lambda - 3.0).abs() < 1e-7, "lambda {lambda}");
            }
            other => panic!("unexpected tag {other:?}"),
        }

        // reversed rotation direction must be detected through the Krein sign
        let m = conjugated(diamond(&rot2(-2.0), &d2), &mut rng);
        let c = classify(&m).unwrap();
        match &c.tag.factors[..] {
            [BasicForm::Rotation { theta }, BasicForm::Hyperbolic { .. }] => {
                assert!((theta - (TAU - 2.0)).abs() < 1e-7, "theta {theta}");
            }
            other => panic!("unexpected tag {other:?}"),
        }

        let dm = Matrix2::new(-2.0, 0.0, 0.0, -0.5);
        let m = conjugated(diamond(&dm, &d2), &mut rng);
        let c = classify(&m).unwrap();
        match &c.tag.factors[..] {
            [BasicForm::Hyperbolic { lambda: l1 }, BasicForm::Hyperbolic { lambda: l2 }] => {
                assert!((l1 + 2.0).abs() < 1e-7 && (l2 - 3.0).abs() < 1e-7);
            }
            other => panic!("unexpected tag {other:?}"),
        }

        let m = conjugated(diamond(&Matrix2::identity(), &d2), &mut rng);
        let c = classify(&m).unwrap();
        assert!(matches!(
            &c.tag.factors[..],
            [BasicForm::Identity, BasicForm::Hyperbolic { .. }]
        ));

        for a in [1.0f64, -1.0] {
            let n1 = Matrix2::new(-1.0, a, 0.0, -1.0);
            let m = conjugated(diamond(&n1, &d2), &mut rng);
            let c = classify(&m).unwrap();
            match &c.tag.factors[..] {
                [BasicForm::Unipotent { lambda, a: got }, BasicForm::Hyperbolic { .. }] => {
                    assert_eq!(*lambda, -1.0);
                    assert_eq!(*got, a, "sign invariant for a = {a}");
                }
                other => panic!("unexpected tag {other:?}"),
            }
        }
    }

    #[test]
    fn classify_tags_coincident_elliptic_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let theta = 1.1f64;

        // symplectic coincident pair with Jordan coupling: b = R(theta) S
        // with S symmetric; trace of S sets the triviality sign
        for (trace_sign, want_trivial) in [(-1.0f64, true), (1.0, false)] {
            let sig = Matrix2::new(0.4 * trace_sign, 0.1, 0.1, 0.6 * trace_sign);
            let b = rot2(theta) * sig;
            let mut n2 = Matrix4::zeros();
            n2.fixed_view_mut::<2, 2>(0, 0).copy_from(&rot2(theta));
            n2.fixed_view_mut::<2, 2>(2, 2).copy_from(&rot2(theta));
            n2.fixed_view_mut::<2, 2>(0, 2).copy_from(&b);
            let m = conjugated(n2, &mut rng);
            let c = classify(&m).unwrap();
            match &c.tag.factors[..] {
                [BasicForm::CoincidentRotations { theta: t, trivial }] => {
                    assert!((t - theta).abs() < 1e-6, "theta {t}");
                    assert_eq!(*trivial, want_trivial, "trace sign {trace_sign}");
                }
                other => panic!("unexpected tag {other:?}"),
            }
            let p = splitting_numbers(&c.tag, Complex64::from_polar(1.0, theta));
            let want = if want_trivial { (0, 0) } else { (1, 1) };
            assert_eq!((p.s_plus, p.s_minus), want);
        }

        // diagonalizable coincident pair with opposite Krein signs
        let m = conjugated(diamond(&rot2(theta), &rot2(-theta)), &mut rng);
        let c = classify(&m).unwrap();
        match &c.tag.factors[..] {
            [BasicForm::Rotation { theta: t1 }, BasicForm::Rotation { theta: t2 }] => {
                let mut pair = [*t1, *t2];
                pair.sort_by(f64::total_cmp);
                assert!((pair[0] - theta).abs() < 1e-6);
                assert!((pair[1] - (TAU - theta)).abs() < 1e-6);
            }
            other => panic!("unexpected tag {other:?}"),
        }
    }

    #[test]
    fn classify_flags_boundary_windows() {
        // a rotation by 1e-5: its stability parameter sits 1e-10 from 2,
        // inside the boundary window, yet the matrix has no kernel at 1
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d2 = Matrix2::new(4.0, 0.0, 0.0, 0.25);
        let m = conjugated(diamond(&rot2(1e-5), &d2), &mut rng);
        let c = classify(&m).unwrap();
        assert!(
            c.alternate.is_some(),
            "expected both readings near the boundary, got {:?}",
            c.tag
        );
    }

    #[test]
    fn splitting_numbers_follow_the_table() {
        let one = Complex64::from(1.0);
        let minus = Complex64::from(-1.0);
        let cases: Vec<(BasicForm, Complex64, (i64, i64))> = vec![
            (BasicForm::Identity, one, (1, 1)),
            (BasicForm::Identity, minus, (0, 0)),
            (BasicForm::MinusIdentity, minus, (1, 1)),
            (BasicForm::Unipotent { lambda: 1.0, a: 1.0 }, one, (1, 1)),
            (BasicForm::Unipotent { lambda: 1.0, a: -1.0 }, one, (0, 0)),
            (BasicForm::Unipotent { lambda: -1.0, a: -1.0 }, minus, (1, 1)),
            (BasicForm::Unipotent { lambda: -1.0, a: 1.0 }, minus, (0, 0)),
            (
                BasicForm::Rotation { theta: 0.9 },
                Complex64::from_polar(1.0, 0.9),
                (0, 1),
            ),
            (
                BasicForm::Rotation { theta: 0.9 },
                Complex64::from_polar(1.0, -0.9),
                (1, 0),
            ),
            (BasicForm::Rotation { theta: 0.9 }, one, (0, 0)),
            (BasicForm::Hyperbolic { lambda: 2.5 }, one, (0, 0)),
            (BasicForm::Hyperbolic { lambda: -2.5 }, minus, (0, 0)),
        ];
        for (form, omega, want) in cases {
            let tag = NormalFormTag::new(vec![form.clone()]);
            let p = splitting_numbers(&tag, omega);
            assert_eq!((p.s_plus, p.s_minus), want, "{form:?} at {omega}");
        }
    }

    #[test]
    fn splitting_is_additive_and_conjugate_symmetric() {
        let forms = [
            BasicForm::Identity,
            BasicForm::MinusIdentity,
            BasicForm::Rotation { theta: 0.7 },
            BasicForm::Rotation { theta: TAU - 0.7 },
            BasicForm::Unipotent { lambda: 1.0, a: 1.0 },
            BasicForm::Unipotent { lambda: -1.0, a: -1.0 },
            BasicForm::Hyperbolic { lambda: 3.0 },
        ];
        let omegas: Vec<Complex64> = vec![
            Complex64::from(1.0),
            Complex64::from(-1.0),
            Complex64::from_polar(1.0, 0.7),
            Complex64::from_polar(1.0, -0.7),
            Complex64::from_polar(1.0, 2.0),
        ];
        for f1 in &forms {
            for f2 in &forms {
                let combined = NormalFormTag::new(vec![f1.clone(), f2.clone()]);
                for &w in &omegas {
                    let p = splitting_numbers(&combined, w);
                    let p1 = splitting_numbers(&NormalFormTag::new(vec![f1.clone()]), w);
                    let p2 = splitting_numbers(&NormalFormTag::new(vec![f2.clone()]), w);
                    assert_eq!(p.s_plus, p1.s_plus + p2.s_plus);
                    assert_eq!(p.s_minus, p1.s_minus + p2.s_minus);
                    // s_plus at omega equals s_minus at the conjugate
                    let q = splitting_numbers(&combined, w.conj());
                    assert_eq!(p.s_plus, q.s_minus, "{f1:?} {f2:?} at {w}");
                }
            }
        }
    }

    #[test]
    fn circular_end_matrices_classify_along_the_tables() {
        for beta in [0.3, 1.0, 1.4, 2.0, 2.5, 3.2, 4.0, 5.5, 6.8] {
            let m = monodromy_e0_exact(beta);
            let c = classify(&m).unwrap();
            let t = circular_tables(beta).unwrap();
            // the angle comes out of trace invariants, so its resolution
            // degrades with the norm of the expanding pair
            let angle_tol = 1e-8 + 1e-14 * m.matrix().abs().max();
            let alpha1 =
                (beta - 1.0 + (9.0 * beta * beta + 10.0 * beta + 1.0).sqrt()) / 2.0;
            let lambda_ref = (TAU * alpha1.sqrt() / 2.0).exp().powi(2);
            match &c.tag.factors[..] {
                [BasicForm::Rotation { theta }, BasicForm::Hyperbolic { lambda }] => {
                    assert!(
                        (theta - t.angle).abs() < angle_tol,
                        "beta {beta}: angle {theta} vs {}",
                        t.angle
                    );
                    assert!(
                        (lambda / lambda_ref - 1.0).abs() < 1e-5,
                        "beta {beta}: lambda {lambda} vs {lambda_ref}"
                    );
                }
                other => panic!("beta {beta}: unexpected tag {other:?}"),
            }
            let i_m1 = propagate_index(t.i1 as i64, &c.tag, Complex64::from(-1.0)).unwrap();
            assert_eq!(i_m1, t.i_minus1 as i64, "beta {beta}");
        }
    }

    #[test]
    fn propagation_handles_empty_arcs_and_rejects_near_ties() {
        // no eigenvalue strictly between 1 and omega0, omega0 off sigma
        let tag = NormalFormTag::new(vec![
            BasicForm::Rotation { theta: 3.0 },
            BasicForm::Hyperbolic { lambda: 2.0 },
        ]);
        let w = Complex64::from_polar(1.0, 0.5);
        assert_eq!(propagate_index(3, &tag, w).unwrap(), 3);

        let near = NormalFormTag::new(vec![
            BasicForm::Rotation { theta: 1.0 },
            BasicForm::Rotation { theta: 1.0 + 3e-10 },
        ]);
        assert!(matches!(
            propagate_index(3, &near, Complex64::from(-1.0)),
            Err(Error::Ambiguous(_))
        ));
    }

    #[test]
    fn operator_and_matrix_nullities_agree() {
        let cases = [
            (1.4, 0.2),
            (3.0, 0.5),
            (0.7, 0.35),
        ];
        let omegas = [
            Complex64::from(1.0),
            Complex64::from(-1.0),
            Complex64::from_polar(1.0, PI / 3.0),
        ];
        for (beta, ecc) in cases {
            let sys = EssentialSystem::new(beta, ecc).unwrap();
            let m = monodromy(&sys).unwrap();
            for w in omegas {
                let from_matrix = nullity(&m, w);
                let twist = BoundaryTwist::new(w).unwrap();
                let from_operator = index_and_nullity(beta, ecc, twist).unwrap().nullity;
                assert_eq!(
                    from_matrix, from_operator,
                    "beta {beta}, e {ecc}, omega {w}"
                );
            }
        }
        // a degenerate point: the circular threshold, checked in closed form
        let m = monodromy_e0_exact(beta_hat(2.0));
        assert_eq!(nullity(&m, Complex64::from(1.0)), 2);
    }
}
