//! End-to-end cross-checks tying the pipeline to its closed-form anchors.
//!
//! Thirteen checks cover the circular-case eigenvalue law and index tables,
//! the boundary row, operator/matrix kernel agreement, the mass-geometry
//! identity, parity and multiplicity of degeneracies, curve starts and
//! ordering, region normal forms, the index growth bound, monotonicity in
//! beta, and the numeric hygiene of every monodromy the suite computes.
//! Each check returns a [`CheckReport`] with a single pass/fail verdict and
//! a one-line account of the measured extremes, so the whole suite prints
//! as one screen of text.  Runtime budgets are enforced in optimized builds
//! and reported (but waived) under debug assertions.

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::atlas::{degenerate_betas, order_check, trace_curves, DegeneracyCurve};
use crate::central_config::{delta_from_geometry, mass_parameter, solve_euler_quintic, MassTriple};
use crate::index_theory::{
    alpha_of_beta, beta_hat, circular_tables, classify, kernel_dimension, BasicForm,
};
use crate::monodromy::{
    integrate_segment, integrate_with_tolerance, monodromy, EssentialSystem, SymplecticMatrix,
};
use crate::spectral::{assemble, index_and_nullity, BoundaryTwist};
use crate::tolerances as tol;

/// Seed shared by every randomized check, so reruns are byte-identical.
const SUITE_SEED: u64 = 0x45554c4552;

/// Verdict and measured extremes of one suite check.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CheckReport {
    #[must_use]
    pub fn line(&self) -> String {
        format!(
            "check {:02} {} {} ({:.2} s): {}",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.seconds,
            self.detail
        )
    }
}

/// Whether a measured runtime honors its budget: always in optimized
/// builds, waived under debug assertions where the budgets are meaningless.
fn budget_ok(elapsed: f64, limit: f64) -> bool {
    cfg!(debug_assertions) || elapsed < limit
}

/// Running extremes over every monodromy and flow map the suite computes.
#[derive(Clone, Debug, Default)]
pub struct Hygiene {
    pub maps: usize,
    pub max_defect: f64,
    pub defect_at: (f64, f64),
    pub max_backward: f64,
    pub backward_at: (f64, f64),
    pub failures: Vec<String>,
    /// When set, [`checked_monodromy`] integrates at these (rtol, atol)
    /// instead of the defaults.  Exists so a run can demonstrate that the
    /// hygiene gates reject a sloppy integrator; leave `None` for real use.
    pub integrator_tolerance: Option<(f64, f64)>,
}

impl Hygiene {
    /// Records the symplectic defect of the flow map `m` of `sys` over
    /// [t0, t1] and the residual of integrating it back to the identity.
    pub fn record_map(&mut self, sys: &EssentialSystem, t0: f64, t1: f64, m: &Matrix4<f64>) {
        self.maps += 1;
        let at = (sys.beta(), sys.ecc());
        let defect = SymplecticMatrix::from_matrix(*m).symplectic_defect();
        if defect > self.max_defect {
            self.max_defect = defect;
            self.defect_at = at;
        }
        match integrate_segment(sys, t1, t0, m) {
            Ok(back) => {
                let scale = m.abs().max().max(1.0);
                let residual = (back - Matrix4::identity()).abs().max() / (scale * scale);
                if residual > self.max_backward {
                    self.max_backward = residual;
                    self.backward_at = at;
                }
            }
            Err(err) => self.failures.push(format!(
                "backward integration at beta = {:.4}, e = {:.4}: {err}",
                at.0, at.1
            )),
        }
    }
}

/// Full-period monodromy with its hygiene recorded into the accumulator.
pub fn checked_monodromy(
    sys: &EssentialSystem,
    hygiene: &mut Hygiene,
) -> crate::Result<SymplecticMatrix> {
    let m = monodromy(sys)?;
    hygiene.record_map(sys, 0.0, TAU, m.matrix());
    Ok(m)
}

/// Best bijective matching of two eigenvalue quadruples: the smallest over
/// all pairings of the largest relative mismatch.
fn quadruple_mismatch(got: &[Complex64; 4], want: &[Complex64; 4]) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..4 {
        for b in 0..4 {
            if b == a {
                continue;
            }
            for c in 0..4 {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                let worst = [(0, a), (1, b), (2, c), (3, d)]
                    .iter()
                    .map(|&(i, j)| (got[j] - want[i]).norm() / want[i].norm())
                    .fold(0.0f64, f64::max);
                best = best.min(worst);
            }
        }
    }
    best
}

/// Check 1: at e = 0 the monodromy spectrum is {exp(+-2 pi sqrt(alpha)),
/// exp(+-2 pi i theta)} to relative 1e-7 across 50 beta values in [0, 7].
///
/// The eigenvalues are extracted through the autonomous factorization
/// gamma(2 pi) = gamma(2 pi / K)^K, exact at e = 0: the K-th-power spectrum
/// of the integrated segment map reproduces the full-period spectrum
/// without pushing the tiny and elliptic eigenvalues below the roundoff
/// floor eps * |M| of the assembled full-period matrix.  The dominant
/// eigenvalue, the one the full matrix does determine well, is additionally
/// matched directly on gamma(2 pi) itself.
pub fn check_circular_eigenvalue_law(hygiene: &mut Hygiene) -> CheckReport {
    const SEGMENTS: u32 = 8;
    let start = Instant::now();
    let mut worst_quad = 0.0f64;
    let mut worst_dom = 0.0f64;
    let mut problems: Vec<String> = Vec::new();

    for i in 0..50 {
        let beta = 7.0 * f64::from(i) / 49.0;
        let sys = match EssentialSystem::new(beta, 0.0) {
            Ok(s) => s,
            Err(err) => {
                problems.push(format!("system at beta = {beta:.4}: {err}"));
                continue;
            }
        };
        let lambda = (TAU * alpha_of_beta(beta).sqrt()).exp();
        let angle = TAU * crate::index_theory::theta_of_beta(beta);
        let want = [
            Complex64::from(lambda),
            Complex64::from(1.0 / lambda),
            Complex64::from_polar(1.0, angle),
            Complex64::from_polar(1.0, -angle),
        ];

        match checked_monodromy(&sys, hygiene) {
            Ok(m) => match m.matrix().map(Complex64::from).eigenvalues() {
                Some(eigs) => {
                    let dom = eigs.iter().cloned().fold(Complex64::from(0.0), |acc, z| {
                        if z.norm() > acc.norm() {
                            z
                        } else {
                            acc
                        }
                    });
                    worst_dom = worst_dom.max((dom - want[0]).norm() / want[0].norm());
                }
                None => problems.push(format!("eigensolver stalled at beta = {beta:.4}")),
            },
            Err(err) => problems.push(format!("monodromy at beta = {beta:.4}: {err}")),
        }

        let tau = TAU / f64::from(SEGMENTS);
        match integrate_segment(&sys, 0.0, tau, &Matrix4::identity()) {
            Ok(p) => {
                hygiene.record_map(&sys, 0.0, tau, &p);
                match p.map(Complex64::from).eigenvalues() {
                    Some(mu) => {
                        let powered = [
                            mu[0].powu(SEGMENTS),
                            mu[1].powu(SEGMENTS),
                            mu[2].powu(SEGMENTS),
                            mu[3].powu(SEGMENTS),
                        ];
                        worst_quad = worst_quad.max(quadruple_mismatch(&powered, &want));
                    }
                    None => problems.push(format!("segment eigensolver stalled at beta = {beta:.4}")),
                }
            }
            Err(err) => problems.push(format!("segment at beta = {beta:.4}: {err}")),
        }
    }

    let seconds = start.elapsed().as_secs_f64();
    let passed = problems.is_empty()
        && worst_quad <= 1e-7
        && worst_dom <= 1e-7
        && budget_ok(seconds, 5.0);
    let mut detail = format!(
        "50 points; worst spectrum mismatch {worst_quad:.2e}, dominant direct {worst_dom:.2e}, bound 1e-7"
    );
    if !problems.is_empty() {
        detail.push_str(&format!("; {} failures: {}", problems.len(), problems[0]));
    }
    CheckReport {
        id: 1,
        name: "circular eigenvalue law",
        passed,
        detail,
        seconds,
    }
}

/// Check 2: circular index/nullity tables are exact integers on a 100-point
/// beta grid plus the first four nonzero thresholds of both families.
pub fn check_circular_index_tables() -> CheckReport {
    let start = Instant::now();
    let mut betas: Vec<f64> = (0..100).map(|i| 7.0 * f64::from(i) / 99.0).collect();
    betas.extend([beta_hat(1.5), beta_hat(2.0), beta_hat(2.5), beta_hat(3.0)]);
    let mut checked = 0usize;
    let mut problems: Vec<String> = Vec::new();

    for &beta in &betas {
        let outcome = circular_tables(beta).and_then(|tables| {
            let p = index_and_nullity(beta, 0.0, BoundaryTwist::periodic())?;
            let a = index_and_nullity(beta, 0.0, BoundaryTwist::antiperiodic())?;
            if (p.index, p.nullity) != (tables.i1, tables.nu1) {
                problems.push(format!(
                    "beta = {beta:.6}: periodic ({}, {}) vs table ({}, {})",
                    p.index, p.nullity, tables.i1, tables.nu1
                ));
            }
            if (a.index, a.nullity) != (tables.i_minus1, tables.nu_minus1) {
                problems.push(format!(
                    "beta = {beta:.6}: antiperiodic ({}, {}) vs table ({}, {})",
                    a.index, a.nullity, tables.i_minus1, tables.nu_minus1
                ));
            }
            Ok(())
        });
        match outcome {
            Ok(()) => checked += 1,
            Err(err) => problems.push(format!("beta = {beta:.6}: {err}")),
        }
    }

    let seconds = start.elapsed().as_secs_f64();
    let passed = problems.is_empty() && budget_ok(seconds, 60.0);
    let detail = if problems.is_empty() {
        format!("{checked} grid and threshold points, every index pair exact")
    } else {
        format!("{} of {} points off: {}", problems.len(), betas.len(), problems[0])
    };
    CheckReport {
        id: 2,
        name: "circular index tables",
        passed,
        detail,
        seconds,
    }
}

/// Check 3: the beta = 0 boundary keeps (i, nu) = (0, 3) at omega = 1 and
/// (2, 0) at omega = -1 and omega = exp(i pi / 3) for all eccentricities.
pub fn check_boundary_row() -> CheckReport {
    let start = Instant::now();
    let mut problems: Vec<String> = Vec::new();
    let third = match BoundaryTwist::from_angle(PI / 3.0) {
        Ok(t) => t,
        Err(err) => {
            return CheckReport {
                id: 3,
                name: "boundary row",
                passed: false,
                detail: format!("twist construction failed: {err}"),
                seconds: start.elapsed().as_secs_f64(),
            }
        }
    };

    for &e in &[0.0, 0.3, 0.6, 0.9] {
        let cases = [
            (BoundaryTwist::periodic(), (0usize, 3usize), "periodic"),
            (BoundaryTwist::antiperiodic(), (2, 0), "antiperiodic"),
            (third, (2, 0), "third-turn"),
        ];
        for (twist, want, name) in cases {
            match index_and_nullity(0.0, e, twist) {
                Ok(got) if (got.index, got.nullity) == want => {}
                Ok(got) => problems.push(format!(
                    "e = {e}: {name} gave ({}, {}), expected ({}, {})",
                    got.index, got.nullity, want.0, want.1
                )),
                Err(err) => problems.push(format!("e = {e}: {name}: {err}")),
            }
        }
    }

    let seconds = start.elapsed().as_secs_f64();
    CheckReport {
        id: 3,
        name: "boundary row",
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            "12 index pairs exact at e in {0, 0.3, 0.6, 0.9}".into()
        } else {
            problems.join("; ")
        },
        seconds,
    }
}

/// Check 4: operator nullity equals the monodromy kernel dimension on 30
/// seeded random (beta, e, omega) triples with omega = +-1.
///
/// Triples whose matrix kernel falls beyond double-precision resolution
/// (huge monodromy scale right on a degeneracy) are resampled, since the
/// comparison needs both routes to produce an integer; the count of such
/// refusals is reported.
pub fn check_kernel_agreement(hygiene: &mut Hygiene) -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let mut accepted = 0usize;
    let mut refused = 0usize;
    let mut attempts = 0usize;
    let mut problems: Vec<String> = Vec::new();

    while accepted < 30 && attempts < 120 {
        attempts += 1;
        let beta: f64 = rng.random_range(0.0..7.0);
        let e: f64 = rng.random_range(0.0..0.9);
        let (omega, twist) = if rng.random_bool(0.5) {
            (Complex64::from(-1.0), BoundaryTwist::antiperiodic())
        } else {
            (Complex64::from(1.0), BoundaryTwist::periodic())
        };
        let result = (|| -> crate::Result<Option<(usize, usize)>> {
            let op = index_and_nullity(beta, e, twist)?;
            let sys = EssentialSystem::new(beta, e)?;
            let m = checked_monodromy(&sys, hygiene)?;
            match kernel_dimension(&m, omega) {
                Ok(k) => Ok(Some((op.nullity, k))),
                Err(_) => Ok(None),
            }
        })();
        match result {
            Ok(Some((op, mat))) => {
                accepted += 1;
                if op != mat {
                    problems.push(format!(
                        "beta = {beta:.4}, e = {e:.4}, omega = {:+.0}: operator {op} vs matrix {mat}",
                        omega.re
                    ));
                }
            }
            Ok(None) => refused += 1,
            Err(err) => problems.push(format!("beta = {beta:.4}, e = {e:.4}: {err}")),
        }
    }

    let seconds = start.elapsed().as_secs_f64();
    let passed = problems.is_empty() && accepted == 30;
    let detail = if passed {
        format!("30 triples agree exactly; {refused} resampled at kernel-resolution refusals")
    } else {
        format!(
            "{accepted} accepted, {refused} refused, {} mismatches{}{}",
            problems.len(),
            if problems.is_empty() { "" } else { ": " },
            problems.first().map_or("", |s| s.as_str())
        )
    };
    CheckReport {
        id: 4,
        name: "kernel agreement",
        passed,
        detail,
        seconds,
    }
}

/// Check 5: the geometric combination delta of every admissible mass triple
/// equals beta + 1 within 1e-10, on 1000 seeded random triples.
pub fn check_delta_identity() -> CheckReport {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED ^ 0x5);
    let mut worst = 0.0f64;
    let mut problems: Vec<String> = Vec::new();

    for _ in 0..1000 {
        let raw = [
            rng.random_range(0.05..10.0),
            rng.random_range(0.05..10.0),
            rng.random_range(0.05..10.0),
        ];
        let sum: f64 = raw.iter().sum();
        let outcome = MassTriple::new(raw[0] / sum, raw[1] / sum, raw[2] / sum).and_then(|m| {
            let x = solve_euler_quintic(&m)?;
            let beta = mass_parameter(&m, x);
            let delta = delta_from_geometry(&m, x);
            worst = worst.max((delta - (beta + 1.0)).abs());
            Ok(())
        });
        if let Err(err) = outcome {
            problems.push(format!("triple {raw:?}: {err}"));
        }
    }

    let seconds = start.elapsed().as_secs_f64();
    let passed = problems.is_empty()
        && worst < tol::DELTA_IDENTITY_TOL
        && budget_ok(seconds, 1.0);
    CheckReport {
        id: 5,
        name: "mass-geometry identity",
        passed,
        detail: format!("1000 triples, worst |delta - (beta + 1)| = {worst:.2e}, bound 1e-10"),
        seconds,
    }
}

/// Check 6: the periodic index is odd at every sampled beta > 0, and every
/// detected periodic degeneracy carries a kernel of dimension exactly 2.
pub fn check_parity_and_double_kernels() -> CheckReport {
    let start = Instant::now();
    let mut odd_points = 0usize;
    let mut roots_seen = 0usize;
    let mut problems: Vec<String> = Vec::new();

    for &e in &[0.2, 0.5, 0.8] {
        for k in 1..=28 {
            let beta = 0.25 * f64::from(k);
            match index_and_nullity(beta, e, BoundaryTwist::periodic()) {
                Ok(p) if p.index % 2 == 1 => odd_points += 1,
                Ok(p) => problems.push(format!(
                    "beta = {beta:.2}, e = {e}: index {} is even",
                    p.index
                )),
                Err(err) => problems.push(format!("beta = {beta:.2}, e = {e}: {err}")),
            }
        }
        match degenerate_betas(BoundaryTwist::periodic(), e, 7.0) {
            Ok(slice) => {
                for &(root, mult) in &slice.roots {
                    roots_seen += 1;
                    if mult != 2 {
                        problems.push(format!(
                            "root beta = {root:.6}, e = {e}: scan multiplicity {mult}"
                        ));
                    }
                    match index_and_nullity(root, e, BoundaryTwist::periodic()) {
                        Ok(p) if p.nullity == 2 => {}
                        Ok(p) => problems.push(format!(
                            "root beta = {root:.6}, e = {e}: kernel dimension {}",
                            p.nullity
                        )),
                        Err(err) => problems.push(format!("root beta = {root:.6}: {err}")),
                    }
                }
            }
            Err(err) => problems.push(format!("scan at e = {e}: {err}")),
        }
    }

    let seconds = start.elapsed().as_secs_f64();
    CheckReport {
        id: 6,
        name: "parity and double kernels",
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{odd_points} indices odd, {roots_seen} degeneracies all of kernel dimension 2")
        } else {
            problems.join("; ")
        },
        seconds,
    }
}

/// Check 7: the first two curves of each family start at their closed-form
/// thresholds within 1e-6 and leave the axis with slope below 0.05.
pub fn check_curve_starts() -> CheckReport {
    let start = Instant::now();
    let e_probe = 1e-3;
    let grid = [0.0, e_probe];
    let mut problems: Vec<String> = Vec::new();
    let mut matched = 0usize;

    let traced: crate::Result<Vec<DegeneracyCurve>> = (|| {
        let mut all = trace_curves(BoundaryTwist::periodic(), &grid, 8.2)?.curves;
        all.extend(trace_curves(BoundaryTwist::antiperiodic(), &grid, 8.2)?.curves);
        Ok(all)
    })();
    match traced {
        Ok(curves) => {
            let targets = [
                (true, 1usize, beta_hat(2.0)),
                (true, 2, beta_hat(3.0)),
                (false, 1, beta_hat(1.5)),
                (false, 2, beta_hat(2.5)),
            ];
            for (periodic, order, anchor) in targets {
                let members: Vec<&DegeneracyCurve> = curves
                    .iter()
                    .filter(|c| {
                        c.label.is_periodic_family() == periodic && c.label.order() == order
                    })
                    .collect();
                if members.is_empty() {
                    problems.push(format!(
                        "no traced curve of order {order} in the {} family",
                        if periodic { "periodic" } else { "antiperiodic" }
                    ));
                    continue;
                }
                for c in members {
                    matched += 1;
                    let miss = (c.start_beta - anchor).abs();
                    if miss > tol::CURVE_START_TOL {
                        problems.push(format!(
                            "{} starts {miss:.2e} from its threshold {anchor:.6}",
                            c.label
                        ));
                    }
                    match c.beta_at(e_probe) {
                        Some(b) => {
                            let slope = (b - c.start_beta).abs() / e_probe;
                            if slope >= 0.05 {
                                problems.push(format!(
                                    "{} leaves the axis with slope {slope:.3}",
                                    c.label
                                ));
                            }
                        }
                        None => problems.push(format!("{} has no sample at e = 1e-3", c.label)),
                    }
                }
            }
        }
        Err(err) => problems.push(format!("tracing failed: {err}")),
    }

    let seconds = start.elapsed().as_secs_f64();
    CheckReport {
        id: 7,
        name: "curve starts",
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{matched} curves on their thresholds within 1e-6, axis slopes below 0.05")
        } else {
            problems.join("; ")
        },
        seconds,
    }
}

/// Check 8: the interlacing order of the two curve families holds on every
/// traced slice, and the two kernel betas of each periodic-family curve
/// coincide within 1e-6 (the pair never splits).
pub fn check_ordering_and_coincidence() -> CheckReport {
    let start = Instant::now();
    let grid = [0.0, 0.1, 0.3, 0.5, 0.7];
    let mut problems: Vec<String> = Vec::new();
    let mut slices_ok = 0usize;

    let traced: crate::Result<(Vec<DegeneracyCurve>, Vec<String>)> = (|| {
        let per = trace_curves(BoundaryTwist::periodic(), &grid, 8.2)?;
        let anti = trace_curves(BoundaryTwist::antiperiodic(), &grid, 8.2)?;
        let mut all = per.curves;
        let mut diags = per.diagnostics;
        all.extend(anti.curves);
        diags.extend(anti.diagnostics);
        Ok((all, diags))
    })();

    match traced {
        Ok((curves, diagnostics)) => {
            for d in &diagnostics {
                if d.contains("forbids") {
                    problems.push(format!("family-structure violation: {d}"));
                }
            }
            for &e in &grid[1..] {
                let report = order_check(&curves, e);
                if report.ok() {
                    slices_ok += 1;
                } else {
                    problems.push(format!("e = {e}: {}", report.violations.join("; ")));
                }
            }
            for c in curves.iter().filter(|c| c.label.is_periodic_family()) {
                for s in &c.samples {
                    if s.multiplicity != 2 {
                        problems.push(format!(
                            "{} at e = {:.3} carries multiplicity {}, pair split past 1e-6",
                            c.label, s.e, s.multiplicity
                        ));
                    }
                }
            }
        }
        Err(err) => problems.push(format!("tracing failed: {err}")),
    }

    let seconds = start.elapsed().as_secs_f64();
    CheckReport {
        id: 8,
        name: "ordering and coincidence",
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{slices_ok} slices interlaced, periodic pairs coincident throughout")
        } else {
            problems.join("; ")
        },
        seconds,
    }
}

/// Bisects the single count crossing inside [beta0 - w, beta0 + w] at the
/// given truncation down to machine-level width.
fn refine_crossing(
    e: f64,
    beta0: f64,
    twist: BoundaryTwist,
    n_trunc: usize,
) -> crate::Result<f64> {
    let count = |b: f64| -> crate::Result<usize> {
        Ok(assemble(b, e, twist, n_trunc)?.count_below(0.0))
    };
    let mut lo = beta0 - 1e-4;
    let mut hi = beta0 + 1e-4;
    let clo = count(lo)?;
    if count(hi)? <= clo {
        return Err(crate::Error::Conflict(format!(
            "no index crossing in [{lo:.6}, {hi:.6}] at e = {e}"
        )));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid)? > clo {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// What a region probe must produce: exact index data plus a shape test on
/// the classified normal form.
struct RegionCase {
    name: &'static str,
    beta: f64,
    want: (usize, usize, usize, usize),
    form: fn(&[BasicForm]) -> bool,
}

/// Check 9: at e = 0.3, probe points in the four qualitatively distinct
/// stability regions (below the first antiperiodic pair, between its split
/// branches, between the pair and the first periodic curve, and on that
/// curve) reproduce the predicted indices and normal forms exactly.
pub fn check_region_normal_forms(hygiene: &mut Hygiene) -> CheckReport {
    let start = Instant::now();
    let e = 0.3;
    let mut problems: Vec<String> = Vec::new();

    let cases: crate::Result<Vec<RegionCase>> = (|| {
        let anti = degenerate_betas(BoundaryTwist::antiperiodic(), e, 2.0)?;
        if anti.roots.len() != 2 || anti.roots.iter().any(|&(_, m)| m != 1) {
            return Err(crate::Error::Conflict(format!(
                "expected a split antiperiodic pair below beta = 2, found {:?}",
                anti.roots
            )));
        }
        let band_mid = 0.5 * (anti.roots[0].0 + anti.roots[1].0);

        let per = degenerate_betas(BoundaryTwist::periodic(), e, 4.0)?;
        let &(gamma1, mult) = per.roots.first().ok_or_else(|| {
            crate::Error::Conflict("no periodic-family degeneracy below beta = 4".into())
        })?;
        if mult != 2 {
            return Err(crate::Error::Conflict(format!(
                "periodic degeneracy at {gamma1:.6} has multiplicity {mult}"
            )));
        }
        let on_curve = refine_crossing(e, gamma1, BoundaryTwist::periodic(), per.n_used)?;

        Ok(vec![
            RegionCase {
                name: "low rotation",
                beta: 0.5,
                want: (3, 0, 2, 0),
                form: |f| {
                    matches!(f,
                        [BasicForm::Rotation { theta }, BasicForm::Hyperbolic { lambda }]
                            if *theta > 0.0 && *theta < PI && *lambda > 1.0)
                },
            },
            RegionCase {
                name: "saddle band",
                beta: band_mid,
                want: (3, 0, 3, 0),
                form: |f| {
                    matches!(f,
                        [BasicForm::Hyperbolic { lambda: a }, BasicForm::Hyperbolic { lambda: b }]
                            if (*a < -1.0 && *b > 1.0) || (*a > 1.0 && *b < -1.0))
                },
            },
            RegionCase {
                name: "high rotation",
                beta: 1.9,
                want: (3, 0, 4, 0),
                form: |f| {
                    matches!(f,
                        [BasicForm::Rotation { theta }, BasicForm::Hyperbolic { lambda }]
                            if *theta > PI && *theta < TAU && *lambda > 1.0)
                },
            },
            RegionCase {
                name: "on the periodic curve",
                beta: on_curve,
                want: (3, 2, 4, 0),
                form: |f| {
                    matches!(f,
                        [BasicForm::Identity, BasicForm::Hyperbolic { lambda }] if *lambda > 1.0)
                },
            },
        ])
    })();

    let mut probed = 0usize;
    match cases {
        Ok(cases) => {
            for case in &cases {
                let outcome = (|| -> crate::Result<()> {
                    let p = index_and_nullity(case.beta, e, BoundaryTwist::periodic())?;
                    let a = index_and_nullity(case.beta, e, BoundaryTwist::antiperiodic())?;
                    let got = (p.index, p.nullity, a.index, a.nullity);
                    if got != case.want {
                        problems.push(format!(
                            "{}: indices {:?}, expected {:?}",
                            case.name, got, case.want
                        ));
                    }
                    let sys = EssentialSystem::new(case.beta, e)?;
                    let m = checked_monodromy(&sys, hygiene)?;
                    let class = classify(&m)?;
                    if !(case.form)(&class.tag.factors) {
                        problems.push(format!(
                            "{}: normal form {} does not match the predicted shape",
                            case.name,
                            class.tag.label()
                        ));
                    }
                    Ok(())
                })();
                match outcome {
                    Ok(()) => probed += 1,
                    Err(err) => problems.push(format!("{}: {err}", case.name)),
                }
            }
        }
        Err(err) => problems.push(format!("locating the probe points failed: {err}")),
    }

    let seconds = start.elapsed().as_secs_f64();
    CheckReport {
        id: 9,
        name: "region normal forms",
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{probed} probes at e = 0.3, zero classification conflicts")
        } else {
            problems.join("; ")
        },
        seconds,
    }
}

/// Check 10: the periodic index obeys i <= 4n + 2 wherever beta lies below
/// the n-th closed-form growth bound, for n = 1, 2, 3.
pub fn check_index_bound() -> CheckReport {
    let start = Instant::now();
    let factor = 2.0 / (3.0 * 2.0f64.sqrt() - 1.0);
    let mut checked = 0usize;
    let mut problems: Vec<String> = Vec::new();

    for n in 1..=3u32 {
        for k in 0..10 {
            let e = 0.1 * f64::from(k);
            let bound = factor * (f64::from(n * n) - e / (1.0 + e)) * (1.0 - e) - 1.0;
            let top = bound.min(7.0);
            if top <= 0.05 {
                continue;
            }
            for j in 0..4 {
                let beta = top * (f64::from(j) + 0.5) / 4.0;
                match index_and_nullity(beta, e, BoundaryTwist::periodic()) {
                    Ok(p) => {
                        checked += 1;
                        if p.index > (4 * n + 2) as usize {
                            problems.push(format!(
                                "beta = {beta:.3}, e = {e:.1}: index {} exceeds {}",
                                p.index,
                                4 * n + 2
                            ));
                        }
                    }
                    Err(err) => problems.push(format!("beta = {beta:.3}, e = {e:.1}: {err}")),
                }
            }
        }
    }

    let seconds = start.elapsed().as_secs_f64();
    CheckReport {
        id: 10,
        name: "index growth bound",
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{checked} grid points below the bound region, all indices within 4n + 2")
        } else {
            problems.join("; ")
        },
        seconds,
    }
}

/// How far from a degeneracy the index is sampled when measuring its jump.
/// Closer probes can leave the near-zero operator eigenvalue stuck at the
/// nullity-window edge, where the truncation sweep honestly refuses to
/// commit; at 1e-3 every slice point commits cleanly.
const PROBE_OFFSET: f64 = 1e-3;

/// Check 11: along each scanned slice both indices are non-decreasing in
/// beta, and the jump across every degeneracy equals its kernel dimension.
///
/// Degeneracies closer together than twice the probe offset (a pair split
/// by less than the probes can straddle) are bracketed as one cluster: the
/// jump across the cluster must equal its total multiplicity.  Pointwise
/// kernel dimensions are asserted only at isolated degeneracies, where the
/// question is resolvable.
pub fn check_monotonicity() -> CheckReport {
    let start = Instant::now();
    let mut slices = 0usize;
    let mut jumps = 0usize;
    let mut problems: Vec<String> = Vec::new();

    for &e in &[0.0, 0.1, 0.3, 0.5, 0.7] {
        for twist in [BoundaryTwist::periodic(), BoundaryTwist::antiperiodic()] {
            let outcome = (|| -> crate::Result<()> {
                let slice = degenerate_betas(twist, e, 7.0)?;

                // (hull low, hull high, total multiplicity, member count);
                // the scan returns roots in increasing order.
                let mut clusters: Vec<(f64, f64, usize, usize)> = Vec::new();
                for &(r, mult) in &slice.roots {
                    match clusters.last_mut() {
                        Some((_, hi, total, members)) if r - *hi <= 2.0 * PROBE_OFFSET => {
                            *hi = r;
                            *total += mult;
                            *members += 1;
                        }
                        _ => clusters.push((r, r, mult, 1)),
                    }
                }

                let mut points: Vec<f64> = (1..=28)
                    .map(|k| 0.25 * f64::from(k))
                    .filter(|&b| {
                        clusters
                            .iter()
                            .all(|&(lo, hi, _, _)| b < lo - PROBE_OFFSET || b > hi + PROBE_OFFSET)
                    })
                    .collect();
                for &(lo, hi, _, _) in &clusters {
                    points.push(lo - PROBE_OFFSET);
                    points.push(hi + PROBE_OFFSET);
                }
                points.retain(|&b| b > 0.0);
                points.sort_by(f64::total_cmp);

                let mut walked: Vec<(f64, usize)> = Vec::with_capacity(points.len());
                for &b in &points {
                    let p = index_and_nullity(b, e, twist)?;
                    walked.push((b, p.index));
                }
                for w in walked.windows(2) {
                    if w[1].1 < w[0].1 {
                        problems.push(format!(
                            "e = {e}, varsigma = {}: index drops {} -> {} between beta {:.4} and {:.4}",
                            twist.varsigma(),
                            w[0].1,
                            w[1].1,
                            w[0].0,
                            w[1].0
                        ));
                    }
                }

                for &(lo, hi, total, members) in &clusters {
                    let below = walked
                        .iter()
                        .rev()
                        .find(|&&(b, _)| b < lo)
                        .map(|&(_, i)| i as i64);
                    let above = walked.iter().find(|&&(b, _)| b > hi).map(|&(_, i)| i as i64);
                    if let (Some(ilo), Some(ihi)) = (below, above) {
                        jumps += 1;
                        if ihi - ilo != total as i64 {
                            problems.push(format!(
                                "degeneracies near beta = {lo:.6}, e = {e}, varsigma = {}: \
                                 index jump {} vs total multiplicity {total}",
                                twist.varsigma(),
                                ihi - ilo
                            ));
                        }
                    }
                    if members == 1 {
                        let at = index_and_nullity(lo, e, twist)?;
                        if at.nullity != total {
                            problems.push(format!(
                                "root beta = {lo:.6}, e = {e}, varsigma = {}: kernel {} vs multiplicity {total}",
                                twist.varsigma(),
                                at.nullity
                            ));
                        }
                    }
                }
                Ok(())
            })();
            if let Err(err) = outcome {
                problems.push(format!("slice e = {e}, varsigma = {}: {err}", twist.varsigma()));
            } else {
                slices += 1;
            }
        }
    }

    let seconds = start.elapsed().as_secs_f64();
    CheckReport {
        id: 11,
        name: "index monotonicity",
        passed: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("{slices} slices non-decreasing, {jumps} degeneracy jumps equal their kernels")
        } else {
            problems.join("; ")
        },
        seconds,
    }
}

/// Check 12: every monodromy and flow map the suite computed stayed within
/// the symplectic-defect and backward-residual gates.
pub fn check_hygiene_totals(hygiene: &Hygiene) -> CheckReport {
    let passed = hygiene.failures.is_empty()
        && hygiene.maps > 0
        && hygiene.max_defect < tol::SYMPLECTIC_DEFECT_TOL
        && hygiene.max_backward < tol::BACKWARD_RESIDUAL_TOL;
    let detail = if hygiene.maps == 0 {
        "no flow maps were recorded".to_string()
    } else {
        format!(
            "{} maps: max defect {:.2e} at ({:.3}, {:.3}), max backward residual {:.2e} at ({:.3}, {:.3}){}",
            hygiene.maps,
            hygiene.max_defect,
            hygiene.defect_at.0,
            hygiene.defect_at.1,
            hygiene.max_backward,
            hygiene.backward_at.0,
            hygiene.backward_at.1,
            if hygiene.failures.is_empty() {
                String::new()
            } else {
                format!("; {} failures", hygiene.failures.len())
            }
        )
    };
    CheckReport {
        id: 12,
        name: "numerical hygiene",
        passed,
        detail,
        seconds: 0.0,
    }
}

/// Hygiene of one full-period integration at a caller-chosen local
/// tolerance, run at beta = 0, e = 0.
///
/// The defect and residual gates are relative to the squared matrix scale,
/// so a sloppy integration shows up most plainly on the smallest monodromy
/// in the domain; at large beta the same absolute error would be divided
/// away by a scale of 1e10 or more.
pub fn loose_integrator_hygiene(rtol: f64, atol: f64) -> crate::Result<Hygiene> {
    let sys = EssentialSystem::new(0.0, 0.0)?;
    let m = integrate_with_tolerance(&sys, 0.0, TAU, &Matrix4::identity(), rtol, atol)?;
    let mut hygiene = Hygiene::default();
    hygiene.record_map(&sys, 0.0, TAU, &m);
    Ok(hygiene)
}

/// Check 13: a deliberately loosened integrator tolerance must push the
/// symplectic defect past its gate, proving the gate actually bites.
pub fn check_loose_tolerance_rejected() -> CheckReport {
    let start = Instant::now();
    let (passed, detail) = match loose_integrator_hygiene(1e-3, 1e-3) {
        Ok(h) => {
            let tripped =
                h.max_defect >= tol::SYMPLECTIC_DEFECT_TOL && !check_hygiene_totals(&h).passed;
            (
                tripped,
                format!(
                    "defect {:.2e} at rtol 1e-3 {} the 1e-9 gate",
                    h.max_defect,
                    if tripped {
                        "correctly trips"
                    } else {
                        "unexpectedly passes"
                    }
                ),
            )
        }
        Err(err) => (false, format!("loose integration failed outright: {err}")),
    };
    CheckReport {
        id: 13,
        name: "loose tolerance rejected",
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs the whole suite in order, sharing one hygiene accumulator, and
/// returns the reports sorted by check number.
pub fn run_all() -> Vec<CheckReport> {
    let mut hygiene = Hygiene::default();
    let mut reports = vec![
        check_circular_eigenvalue_law(&mut hygiene),
        check_circular_index_tables(),
        check_boundary_row(),
        check_kernel_agreement(&mut hygiene),
        check_delta_identity(),
        check_parity_and_double_kernels(),
        check_curve_starts(),
        check_ordering_and_coincidence(),
        check_region_normal_forms(&mut hygiene),
        check_index_bound(),
        check_monotonicity(),
        check_loose_tolerance_rejected(),
    ];
    reports.push(check_hygiene_totals(&hygiene));
    reports.sort_by_key(|r| r.id);
    reports
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_lines_carry_verdicts() {
        let r = CheckReport {
            id: 5,
            name: "demo",
            passed: true,
            detail: "fine".into(),
            seconds: 0.25,
        };
        assert_eq!(r.line(), "check 05 PASS demo (0.25 s): fine");
    }

    #[test]
    fn delta_identity_holds_on_seeded_triples() {
        let r = check_delta_identity();
        assert!(r.passed, "{}", r.line());
    }

    #[test]
    fn loose_tolerance_is_caught_by_the_defect_gate() {
        let r = check_loose_tolerance_rejected();
        assert!(r.passed, "{}", r.line());
    }

    #[test]
    fn hygiene_records_extremes() {
        let mut h = Hygiene::default();
        let sys = EssentialSystem::new(1.4, 0.2).unwrap();
        let m = checked_monodromy(&sys, &mut h).unwrap();
        assert_eq!(h.maps, 1);
        assert!(h.max_defect < tol::SYMPLECTIC_DEFECT_TOL);
        assert!(h.max_backward < tol::BACKWARD_RESIDUAL_TOL);
        assert!(m.matrix().abs().max() > 1.0);
        let empty = check_hygiene_totals(&Hygiene::default());
        assert!(!empty.passed);
        let ok = check_hygiene_totals(&h);
        assert!(ok.passed, "{}", ok.line());
    }
}
