//! Fourier-Galerkin discretization of the stability operator.
//!
//! The essential part of the linearized problem is governed by the operator
//!
//! ```text
//! A(beta, e) = -d^2/dt^2 I2 - I2 + ((3+beta) I2 + 3(1+beta) S(t)) / (2(1+e cos t)),
//! S(t) = [[cos 2t, sin 2t], [sin 2t, -cos 2t]],
//! ```
//!
//! acting on 2-vector functions with twisted boundary conditions
//! z(2pi) = omega z(0), z'(2pi) = omega z'(0) for a unit-modulus omega.  Its
//! Morse index and nullity equal the omega-index and omega-nullity of the
//! monodromy path, which is what makes this module the workhorse of the
//! crate: indices come from eigenvalue counts here, and degeneracy curves
//! are the zero set of the smallest eigenvalue in the (beta, e) plane.
//!
//! Discretization happens in the rotated coordinates z = R(t) u with R the
//! rotation by t, where the quadratic form becomes
//!
//! ```text
//! A~(beta, e) = -d^2/dt^2 I2 - 2 K d/dt + diag(2 beta + 3, -beta) / (1+e cos t),
//! K = [[0, -1], [1, 0]].
//! ```
//!
//! R is 2pi-periodic, so the boundary twist carries over unchanged and the
//! two forms are unitarily equivalent; the rotated one is preferred because
//! its circular limit splits exactly into the classical 2x2 frequency
//! blocks, so truncation commutes with the e = 0 closed forms.
//!
//! The basis is u e^{i(k+ς)t}/sqrt(2pi) with ς = arg(omega)/2pi, |k| <= N
//! and u ranging over the unit 2-vectors, which turns the twisted boundary
//! condition into plain periodicity and keeps the matrix Hermitian for every
//! omega.  Eigenvalue counts run on the banded form; dense realizations are
//! only for diagnostics.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::BandedHermitian;
use crate::tolerances as tol;

/// Unit-circle boundary twist omega together with its basis offset
/// ς = arg(omega)/2pi ∈ [0, 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryTwist {
    omega: Complex64,
    varsigma: f64,
}

impl BoundaryTwist {
    /// Periodic boundary conditions, omega = 1.
    pub fn periodic() -> Self {
        Self {
            omega: Complex64::new(1.0, 0.0),
            varsigma: 0.0,
        }
    }

    /// Antiperiodic boundary conditions, omega = -1.
    pub fn antiperiodic() -> Self {
        Self {
            omega: Complex64::new(-1.0, 0.0),
            varsigma: 0.5,
        }
    }

    /// Twist by omega = e^{i phi}.
    pub fn from_angle(phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::InvalidInput(format!("twist angle {phi} not finite")));
        }
        Self::new(Complex64::from_polar(1.0, phi))
    }

    /// Validates |omega| = 1 and snaps the stored value onto the circle.
    pub fn new(omega: Complex64) -> Result<Self> {
        if !omega.re.is_finite() || !omega.im.is_finite() {
            return Err(Error::InvalidInput("twist omega not finite".into()));
        }
        if (omega.norm() - 1.0).abs() > tol::UNIT_CIRCLE_TOL {
            return Err(Error::InvalidInput(format!(
                "twist omega = {omega} is off the unit circle"
            )));
        }
        if omega.im == 0.0 {
            return Ok(if omega.re > 0.0 {
                Self::periodic()
            } else {
                Self::antiperiodic()
            });
        }
        let mut varsigma = omega.arg() / TAU;
        if varsigma < 0.0 {
            varsigma += 1.0;
        }
        Ok(Self {
            omega: Complex64::from_polar(1.0, TAU * varsigma),
            varsigma,
        })
    }

    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    pub fn varsigma(&self) -> f64 {
        self.varsigma
    }

    pub fn is_periodic(&self) -> bool {
        self.varsigma == 0.0
    }
}

/// Real Fourier coefficients g_m of 1/(1 + e cos t), m = 0..=m_max, by
/// trapezoid sums over `samples` equispaced points.  The cosines are read
/// from an exact table via index arithmetic (m t_i is a multiple of
/// 2pi/samples), so the only error is aliasing, which the sample count keeps
/// far below the band cutoff, plus summation roundoff.
pub(crate) fn density_coefficients(ecc: f64, m_max: usize, samples: usize) -> Vec<f64> {
    debug_assert!(samples > m_max);
    if ecc == 0.0 {
        // the density is identically 1; bypassing the sums keeps the
        // coefficients exactly Kronecker and the block band minimal
        let mut out = vec![0.0f64; m_max + 1];
        out[0] = 1.0;
        return out;
    }
    let table: Vec<f64> = (0..samples)
        .map(|i| (TAU * i as f64 / samples as f64).cos())
        .collect();
    let g: Vec<f64> = table.iter().map(|c| 1.0 / (1.0 + ecc * c)).collect();
    let mut out = vec![0.0f64; m_max + 1];
    for (m, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let mut idx = 0usize;
        for gi in &g {
            acc += gi * table[idx];
            idx += m;
            if idx >= samples {
                idx -= samples;
            }
        }
        *o = acc / samples as f64;
    }
    out
}

/// Assembled Galerkin matrix of A(beta, e) under a boundary twist, stored in
/// banded Hermitian form.  Dimension is 2(2N+1) for truncation N.
pub struct GalerkinProblem {
    beta: f64,
    ecc: f64,
    twist: BoundaryTwist,
    n_trunc: usize,
    band: BandedHermitian,
    hermitian_defect: f64,
}

/// Outcome of a converged Morse-index computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IndexPair {
    /// Number of negative eigenvalues: the omega-index.
    pub index: usize,
    /// Dimension of the near-null cluster: the omega-nullity, at most 4.
    pub nullity: usize,
    /// Truncation at which the pair stabilized.
    pub n_used: usize,
}

/// Builds the Galerkin matrix at truncation `n_trunc` >= 8.
///
/// `beta` may be any finite real: the operator itself is defined beyond the
/// range realized by mass triples, and both the degeneracy atlas and the
/// comparison operator at beta = -1 need values outside [0, 7].
pub fn assemble(
    beta: f64,
    ecc: f64,
    twist: BoundaryTwist,
    n_trunc: usize,
) -> Result<GalerkinProblem> {
    if !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta = {beta} not finite")));
    }
    if !ecc.is_finite() || !(0.0..1.0).contains(&ecc) {
        return Err(Error::InvalidInput(format!(
            "eccentricity {ecc} outside [0, 1)"
        )));
    }
    if n_trunc < tol::GALERKIN_N_MIN {
        return Err(Error::InvalidInput(format!(
            "truncation N = {n_trunc} below the minimum {}",
            tol::GALERKIN_N_MIN
        )));
    }

    // rotated-coordinate potential diag(p_x, p_y) / (1 + e cos t)
    let px = 2.0 * beta + 3.0;
    let py = -beta;
    let m_max = 2 * n_trunc + 2;
    let samples = 8 * n_trunc.max(32);
    let g = density_coefficients(ecc, m_max, samples);

    // The potential couples mode blocks at offset d through g_d alone; keep
    // offsets until every dropped contribution is far below the
    // low-eigenvalue scale.  The floor is clamped above summation roundoff
    // so that e = 0 keeps the minimal band.
    let coeff = px.abs().max(py.abs()).max(1.0);
    let floor = (1e-16 * (1.0 + coeff * g[0]) / coeff).max(16.0 * f64::EPSILON);
    let mut m_cut = 0usize;
    for (m, gm) in g.iter().enumerate() {
        if gm.abs() >= floor {
            m_cut = m;
        }
    }
    let d_max = m_cut.min(2 * n_trunc);

    let blocks = 2 * n_trunc + 1;
    let dim = 2 * blocks;
    let w = (2 * d_max).max(1);
    let mut band = BandedHermitian::zeros(dim, w);
    let mut defect = 0.0f64;

    let g_at = |m: i64| -> f64 {
        let m = m.unsigned_abs() as usize;
        if m < g.len() {
            g[m]
        } else {
            0.0
        }
    };

    // block(j, k) = g_{j-k} diag(p_x, p_y) + delta_{jk} [[f^2, 2if], [-2if, f^2]]
    // with f = k + varsigma; the skew off-diagonal pair comes from -2K d/dt
    let block_at = |kb_freq: Option<f64>, d: i64| -> [[Complex64; 2]; 2] {
        let gd = g_at(d);
        let mut blk = [
            [Complex64::from(px * gd), Complex64::ZERO],
            [Complex64::ZERO, Complex64::from(py * gd)],
        ];
        if let Some(f) = kb_freq {
            blk[0][0] += Complex64::from(f * f);
            blk[1][1] += Complex64::from(f * f);
            blk[0][1] += Complex64::new(0.0, 2.0 * f);
            blk[1][0] += Complex64::new(0.0, -2.0 * f);
        }
        blk
    };

    for kb in 0..blocks {
        let k = kb as i64 - n_trunc as i64;
        let freq = k as f64 + twist.varsigma;
        let jb_hi = (kb + d_max).min(blocks - 1);
        for jb in kb..=jb_hi {
            let d = (jb - kb) as i64;
            let blk = block_at(if d == 0 { Some(freq) } else { None }, d);
            // mirror block recomputed from the formula at offset -d; its
            // conjugate transpose must reproduce blk
            let mirror = block_at(if d == 0 { Some(freq) } else { None }, -d);
            for q in 0..2 {
                for v in 0..2 {
                    let dev = (blk[q][v] - mirror[v][q].conj()).norm();
                    defect = defect.max(dev);
                }
            }
            for q in 0..2 {
                for v in 0..2 {
                    // across distinct blocks only the component-diagonal
                    // density entries are nonzero and they sit within w
                    if d > 0 && q != v {
                        continue;
                    }
                    let r = 2 * jb + q;
                    let c = 2 * kb + v;
                    if r >= c {
                        band.set_lower(r, c, blk[q][v]);
                    }
                }
            }
        }
    }

    Ok(GalerkinProblem {
        beta,
        ecc,
        twist,
        n_trunc,
        band,
        hermitian_defect: defect,
    })
}

impl GalerkinProblem {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn ecc(&self) -> f64 {
        self.ecc
    }

    pub fn twist(&self) -> BoundaryTwist {
        self.twist
    }

    /// Truncation N; the matrix dimension is 2(2N+1).
    pub fn truncation(&self) -> usize {
        self.n_trunc
    }

    pub fn dim(&self) -> usize {
        self.band.n()
    }

    /// Largest deviation found between assembled blocks and their mirrored
    /// conjugate transposes; recorded as a regression guard.
    pub fn hermitian_defect(&self) -> f64 {
        self.hermitian_defect
    }

    /// Number of eigenvalues strictly below `shift` at this truncation.
    pub fn count_below(&self, shift: f64) -> usize {
        self.band.count_below(shift)
    }

    /// Dense realization; meant for diagnostics at moderate truncations.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        self.band.to_dense()
    }

    pub(crate) fn band(&self) -> &BandedHermitian {
        &self.band
    }
}

/// Near-zero threshold for nullity counting.  Scaled by the coefficient
/// magnitude of the potential term, (3 + 2|beta|)/(1 - e), which bounds the
/// perturbation of the low modes; deliberately independent of N so the
/// counting window does not drift as the truncation grows.
pub(crate) fn null_tolerance(beta: f64, ecc: f64) -> f64 {
    tol::NULL_TOL_FACTOR * 1.0f64.max((3.0 + 2.0 * beta.abs()) / (1.0 - ecc))
}

fn four_counts(p: &GalerkinProblem, nt: f64) -> (usize, usize, usize, usize) {
    let far_lo = p.band().count_below(-tol::NULL_GAP_FACTOR * nt);
    let lo = p.band().count_below(-nt);
    let hi = p.band().count_below(nt);
    let far_hi = p.band().count_below(tol::NULL_GAP_FACTOR * nt);
    (far_lo, lo, hi, far_hi)
}

/// Gap-guarded counts at the problem's own truncation: `Some((index,
/// nullity))` when no eigenvalue falls inside the guard annulus
/// [null_tol, 10 null_tol) on either side of zero, `None` otherwise.
pub fn counts_at(prob: &GalerkinProblem) -> Option<(usize, usize)> {
    let nt = null_tolerance(prob.beta, prob.ecc);
    let (far_lo, lo, hi, far_hi) = four_counts(prob, nt);
    if far_lo == lo && hi == far_hi {
        Some((lo, hi - lo))
    } else {
        None
    }
}

/// Morse index and nullity of the operator behind `prob`, driving the
/// truncation to convergence.
///
/// Starting from the problem's own N, the truncation doubles until the
/// gap-guarded (index, nullity) pair is unchanged across two consecutive
/// doublings; an eigenvalue inside the guard annulus resets the streak.  No
/// stabilization by N = 1024 is a convergence error carrying the last two
/// raw readings.
pub fn morse_index(prob: &GalerkinProblem) -> Result<IndexPair> {
    let mut readings: Vec<(usize, usize, usize)> = Vec::new();
    let mut streak: Option<(usize, usize, u32)> = None;
    let mut n = prob.n_trunc;
    let mut storage: Option<GalerkinProblem> = None;

    loop {
        let cur = storage.as_ref().unwrap_or(prob);
        let nt = null_tolerance(cur.beta, cur.ecc);
        let (far_lo, lo, hi, far_hi) = four_counts(cur, nt);
        readings.push((n, lo, hi - lo));
        if far_lo == lo && hi == far_hi {
            let (i, nu) = (lo, hi - lo);
            streak = match streak {
                Some((pi, pnu, hits)) if pi == i && pnu == nu => Some((i, nu, hits + 1)),
                _ => Some((i, nu, 1)),
            };
            if streak.is_some_and(|(_, _, hits)| hits >= 3) {
                if nu > 4 {
                    return Err(Error::Ambiguous(format!(
                        "computed nullity {nu} exceeds the phase-space bound 4 \
                         at beta = {}, e = {}",
                        cur.beta, cur.ecc
                    )));
                }
                return Ok(IndexPair {
                    index: i,
                    nullity: nu,
                    n_used: n,
                });
            }
        } else {
            streak = None;
        }

        if n >= tol::GALERKIN_N_MAX {
            let last = *readings.last().expect("at least one reading");
            let prev = if readings.len() >= 2 {
                readings[readings.len() - 2]
            } else {
                last
            };
            return Err(Error::Unconverged {
                n_cap: tol::GALERKIN_N_MAX,
                n_prev: prev.0,
                i_prev: prev.1 as i64,
                nu_prev: prev.2,
                n_last: last.0,
                i_last: last.1 as i64,
                nu_last: last.2,
            });
        }
        n *= 2;
        storage = Some(assemble(prob.beta, prob.ecc, prob.twist, n)?);
    }
}

/// Convenience wrapper: assemble at the minimum truncation and converge.
pub fn index_and_nullity(beta: f64, ecc: f64, twist: BoundaryTwist) -> Result<IndexPair> {
    let prob = assemble(beta, ecc, twist, tol::GALERKIN_N_MIN)?;
    morse_index(&prob)
}

/// The `count` smallest eigenvalues of the assembled matrix, ascending, at
/// the problem's own truncation (no convergence loop).
pub fn smallest_eigenvalues(prob: &GalerkinProblem, count: usize) -> Vec<f64> {
    prob.band().smallest_eigenvalues(count)
}

/// Parity family of a candidate 2pi-periodic kernel function
/// z(t) = R(t)(x(t), y(t))^T of the periodic-boundary operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelParity {
    /// x even, y odd: coefficients (a_n, d_n).
    XEven,
    /// x odd, y even: coefficients (b_n, c_n).
    XOdd,
}

/// Trigonometric-polynomial pair (x(t), y(t)); the planar kernel function is
/// z(t) = R(t) (x, y)^T with R the rotation by t.  `cos_x[n]` multiplies
/// cos nt and so on; slot 0 of the sin arrays is unused.
#[derive(Clone, Debug)]
pub struct PeriodicSolution {
    pub cos_x: Vec<f64>,
    pub sin_x: Vec<f64>,
    pub cos_y: Vec<f64>,
    pub sin_y: Vec<f64>,
}

impl PeriodicSolution {
    fn zero(len: usize) -> Self {
        Self {
            cos_x: vec![0.0; len],
            sin_x: vec![0.0; len],
            cos_y: vec![0.0; len],
            sin_y: vec![0.0; len],
        }
    }

    /// (x(t), y(t)).
    pub fn components(&self, t: f64) -> (f64, f64) {
        let mut x = 0.0;
        let mut y = 0.0;
        for n in 0..self.cos_x.len() {
            let (s, c) = (n as f64 * t).sin_cos();
            x += self.cos_x[n] * c + self.sin_x[n] * s;
            y += self.cos_y[n] * c + self.sin_y[n] * s;
        }
        (x, y)
    }

    /// z(t) = R(t)(x, y)^T in the plane.
    pub fn plane(&self, t: f64) -> [f64; 2] {
        let (x, y) = self.components(t);
        let (s, c) = t.sin_cos();
        [c * x - s * y, s * x + c * y]
    }

    /// Residual of the second-order kernel system at time t:
    ///
    /// ```text
    /// (1+e cos t) x'' - (2 beta + 3) x - 2 y' (1+e cos t)
    /// (1+e cos t) y'' + beta y + 2 x' (1+e cos t)
    /// ```
    ///
    /// Both components vanish identically on a true kernel function.
    pub fn second_order_residual(&self, beta: f64, ecc: f64, t: f64) -> [f64; 2] {
        let mut x = 0.0;
        let mut dx = 0.0;
        let mut ddx = 0.0;
        let mut y = 0.0;
        let mut dy = 0.0;
        let mut ddy = 0.0;
        for n in 0..self.cos_x.len() {
            let nf = n as f64;
            let (s, c) = (nf * t).sin_cos();
            x += self.cos_x[n] * c + self.sin_x[n] * s;
            dx += nf * (self.sin_x[n] * c - self.cos_x[n] * s);
            ddx -= nf * nf * (self.cos_x[n] * c + self.sin_x[n] * s);
            y += self.cos_y[n] * c + self.sin_y[n] * s;
            dy += nf * (self.sin_y[n] * c - self.cos_y[n] * s);
            ddy -= nf * nf * (self.cos_y[n] * c + self.sin_y[n] * s);
        }
        let rho = 1.0 + ecc * t.cos();
        [
            rho * ddx - (2.0 * beta + 3.0) * x - 2.0 * dy * rho,
            rho * ddy + beta * y + 2.0 * dx * rho,
        ]
    }
}

/// Result of probing the periodic-boundary kernel through the coefficient
/// recurrence at a point (beta, e).
#[derive(Clone, Debug)]
pub struct KernelProbe {
    pub beta: f64,
    pub ecc: f64,
    pub parity: KernelParity,
    /// Harmonics kept in the truncated recurrence.
    pub harmonics: usize,
    /// sigma_min / sigma_max of the truncated coefficient map.
    pub singular_value_ratio: f64,
    /// Trailing-harmonic fraction of the candidate kernel vector; only
    /// meaningful when `degenerate`.
    pub tail_fraction: f64,
    pub degenerate: bool,
    /// The paired kernel functions, primary one in the probed parity first,
    /// built when the candidate vector's tail converged.
    pub pair: Option<[PeriodicSolution; 2]>,
}

fn recurrence_a(n: f64) -> [[f64; 2]; 2] {
    [[-0.5 * n * n, -n], [-n, -0.5 * n * n]]
}

fn recurrence_b(beta: f64, n: f64) -> [[f64; 2]; 2] {
    [
        [n * n + 2.0 * beta + 3.0, 2.0 * n],
        [2.0 * n, n * n - beta],
    ]
}

/// Truncated coefficient map of the kernel recurrence on the stacked
/// unknowns v_n = (a_n, d_n), n = 1..=k (equivalently (b_n, -c_n): the two
/// parity families share the same rows and differ only in the slaved
/// zeroth coefficient).
fn recurrence_matrix(beta: f64, ecc: f64, k: usize) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::zeros(2 * k, 2 * k);
    let mut put = |row: usize, col: usize, blk: [[f64; 2]; 2], sign: f64| {
        for q in 0..2 {
            for v in 0..2 {
                m[(2 * row + q, 2 * col + v)] += sign * blk[q][v];
            }
        }
    };
    for n in 1..=k {
        let row = n - 1;
        put(row, n - 1, recurrence_b(beta, n as f64), -1.0);
        if n >= 2 {
            let blk = recurrence_a((n - 1) as f64);
            let scaled = [
                [ecc * blk[0][0], ecc * blk[0][1]],
                [ecc * blk[1][0], ecc * blk[1][1]],
            ];
            put(row, n - 2, scaled, 1.0);
        }
        if n + 1 <= k {
            let blk = recurrence_a((n + 1) as f64);
            let scaled = [
                [ecc * blk[0][0], ecc * blk[0][1]],
                [ecc * blk[1][0], ecc * blk[1][1]],
            ];
            put(row, n, scaled, 1.0);
        }
    }
    m
}

/// Probes for a 2pi-periodic kernel function of the periodic-boundary
/// operator at (beta, e) through the Fourier-coefficient recurrence.
///
/// The three-term block recurrence couples consecutive harmonics through
/// e A_n blocks; since A_2 is singular, the truncated map is analyzed as a
/// whole by its singular values instead of forward substitution.  A kernel
/// exists when the smallest singular value drops below 1e-8 of the largest;
/// the paired solutions are then rebuilt from the minimal singular vector,
/// the partner through the coefficient mirror (b_n, c_n) = (a_n, -d_n) with
/// its own slaved zeroth coefficient.
///
/// Requires beta > 0 (the mirror slaving divides by beta) and 0 <= e < 1.
pub fn kernel_by_recurrence(beta: f64, ecc: f64, parity: KernelParity) -> Result<KernelProbe> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "kernel recurrence needs beta > 0, got {beta}"
        )));
    }
    if !ecc.is_finite() || !(0.0..1.0).contains(&ecc) {
        return Err(Error::InvalidInput(format!(
            "eccentricity {ecc} outside [0, 1)"
        )));
    }

    // coefficients decay like q^n with q = e/(1+sqrt(1-e^2))
    let q = if ecc > 0.0 {
        ecc / (1.0 + (1.0 - ecc * ecc).sqrt())
    } else {
        0.0
    };
    let k_est = if q > 0.0 {
        ((1e-15f64.ln() / q.ln()).ceil() as usize + 16).max(32)
    } else {
        32
    };
    let mut k = k_est.min(tol::RECURRENCE_K_MAX);

    loop {
        let m = recurrence_matrix(beta, ecc, k);
        let svd = m.svd(false, true);
        let sv = &svd.singular_values;
        let mut min_i = 0usize;
        let mut smax = 0.0f64;
        for (i, &s) in sv.iter().enumerate() {
            if s < sv[min_i] {
                min_i = i;
            }
            smax = smax.max(s);
        }
        let ratio = sv[min_i] / smax.max(f64::MIN_POSITIVE);
        let degenerate = ratio < tol::RECURRENCE_SV_REL;

        let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
        let vec: Vec<f64> = v_t.row(min_i).iter().copied().collect();
        let norm: f64 = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
        let tail = (vec[2 * k - 2].powi(2) + vec[2 * k - 1].powi(2)).sqrt() / norm.max(1e-300);

        if degenerate && tail > tol::RECURRENCE_TAIL_TOL && k < tol::RECURRENCE_K_MAX {
            k = (2 * k).min(tol::RECURRENCE_K_MAX);
            continue;
        }

        let pair = if degenerate && tail <= tol::RECURRENCE_TAIL_TOL {
            Some(build_pair(beta, ecc, &vec, k))
        } else {
            None
        };
        return Ok(KernelProbe {
            beta,
            ecc,
            parity,
            harmonics: k,
            singular_value_ratio: ratio,
            tail_fraction: tail,
            degenerate,
            pair,
        });
    }
}

/// Rebuilds the paired kernel functions from the shared-recurrence vector
/// (p_n, q_n) = (a_n, d_n) = (b_n, -c_n).
fn build_pair(beta: f64, ecc: f64, vec: &[f64], k: usize) -> [PeriodicSolution; 2] {
    let p1 = vec[0];
    let q1 = vec[1];

    let mut even = PeriodicSolution::zero(k + 1);
    let mut odd = PeriodicSolution::zero(k + 1);
    // x even, y odd: a_0 slaved through the constant mode
    even.cos_x[0] = -ecc * (q1 + 0.5 * p1) / (2.0 * beta + 3.0);
    // x odd, y even: c_0 slaved, dividing by beta
    odd.cos_y[0] = -ecc * (p1 + 0.5 * q1) / beta;
    for n in 1..=k {
        let p = vec[2 * (n - 1)];
        let q = vec[2 * (n - 1) + 1];
        even.cos_x[n] = p;
        even.sin_y[n] = q;
        odd.sin_x[n] = p;
        odd.cos_y[n] = -q;
    }
    [even, odd]
}

/// Positivity probe of the comparison operator at beta = -1,
///
/// ```text
/// A(-1, e) = -d^2/dt^2 I2 - I2 + I2 / (1 + e cos t),
/// ```
///
/// whose S-term coefficient vanishes.  Under periodic boundary conditions it
/// is nonnegative with the two-dimensional kernel (1 + e cos t) u over unit
/// 2-vectors u; under any other twist it is positive definite.
#[derive(Clone, Debug)]
pub struct PositivityReport {
    pub ecc: f64,
    pub omega: Complex64,
    pub n_used: usize,
    pub index: usize,
    pub near_null_dim: usize,
    /// Four smallest eigenvalues, ascending.
    pub smallest: Vec<f64>,
    /// Relative residuals ||H v|| / ||v|| of the two analytic kernel
    /// coefficient vectors; only under periodic boundary conditions.
    pub kernel_residuals: Option<[f64; 2]>,
    pub nonnegative: bool,
}

pub fn positivity_check_a_minus1(ecc: f64, twist: BoundaryTwist) -> Result<PositivityReport> {
    let base = assemble(-1.0, ecc, twist, tol::GALERKIN_N_MIN)?;
    let pair = morse_index(&base)?;
    let prob = assemble(-1.0, ecc, twist, pair.n_used)?;
    let smallest = smallest_eigenvalues(&prob, 4);

    let kernel_residuals = if twist.is_periodic() {
        Some([
            density_mode_residual(&prob, 0),
            density_mode_residual(&prob, 1),
        ])
    } else {
        None
    };

    let nonnegative = if twist.is_periodic() {
        pair.index == 0 && pair.nullity == 2 && smallest[0] >= -1e-9
    } else {
        pair.index == 0 && pair.nullity == 0 && smallest[0] > 0.0
    };

    Ok(PositivityReport {
        ecc,
        omega: twist.omega(),
        n_used: pair.n_used,
        index: pair.index,
        near_null_dim: pair.nullity,
        smallest,
        kernel_residuals,
        nonnegative,
    })
}

/// Residual of the analytic kernel function (1 + e cos t) e_comp against the
/// assembled periodic-boundary matrix.  In the rotated coordinates the
/// function becomes (1 + e cos t) R(-t) e_comp, which occupies modes
/// |k| <= 2 only, so the matrix should annihilate its coefficient vector up
/// to quadrature error.
fn density_mode_residual(prob: &GalerkinProblem, comp: usize) -> f64 {
    let nn = prob.n_trunc;
    let dim = prob.band().n();
    let e = prob.ecc;
    let i = Complex64::new(0.0, 1.0);
    let mut v = vec![Complex64::ZERO; dim];
    let mut put = |k: i64, c: usize, val: Complex64| {
        let kb = (k + nn as i64) as usize;
        v[2 * kb + c] = val;
    };
    if comp == 0 {
        // (1+e cos t)(cos t, -sin t)
        put(0, 0, Complex64::from(0.5 * e));
        put(1, 0, Complex64::from(0.5));
        put(-1, 0, Complex64::from(0.5));
        put(2, 0, Complex64::from(0.25 * e));
        put(-2, 0, Complex64::from(0.25 * e));
        put(1, 1, 0.5 * i);
        put(-1, 1, -0.5 * i);
        put(2, 1, 0.25 * e * i);
        put(-2, 1, -0.25 * e * i);
    } else {
        // (1+e cos t)(sin t, cos t)
        put(1, 0, -0.5 * i);
        put(-1, 0, 0.5 * i);
        put(2, 0, -0.25 * e * i);
        put(-2, 0, 0.25 * e * i);
        put(0, 1, Complex64::from(0.5 * e));
        put(1, 1, Complex64::from(0.5));
        put(-1, 1, Complex64::from(0.5));
        put(2, 1, Complex64::from(0.25 * e));
        put(-2, 1, Complex64::from(0.25 * e));
    }
    let hv = prob.band().matvec(&v);
    let num = hv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let den = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    num / den
}
