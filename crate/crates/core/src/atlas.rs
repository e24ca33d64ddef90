//! Degeneracy curves and region structure over the (beta, e) rectangle.
//!
//! A point (beta, e) lies on a degeneracy curve of the twist omega when the
//! second-order operator has a kernel there, equivalently when omega is an
//! eigenvalue of the essential monodromy.  The periodic family (omega = 1)
//! yields the curves Gamma_n; the antiperiodic family (omega = -1) yields
//! the pairs Xi_n, which start as double kernels on the e = 0 axis and may
//! split into a minus and a plus branch at positive eccentricity.  Curves of
//! one family never intersect each other, which is what makes the slice
//! matching below purely order-based.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::index_theory::{beta_hat, classify, BasicForm, NormalFormTag};
use crate::monodromy::{monodromy, EssentialSystem};
use crate::spectral::{assemble, index_and_nullity, BoundaryTwist};
use crate::tolerances as tol;

/// The scan starts just off beta = 0: the axis itself carries a kernel for
/// every eccentricity and is a boundary of the parameter domain, not a curve.
const BETA_SCAN_EDGE: f64 = 1e-4;

/// Region probes stay this far away from the beta = 0 edge and the window top.
const BETA_PROBE_MARGIN: f64 = 0.05;

/// Inter-curve bands narrower than this are not probed.
const MIN_REGION_WIDTH: f64 = 0.02;

fn worker_count(explicit: Option<usize>) -> usize {
    if let Some(w) = explicit {
        return w.max(1);
    }
    if let Ok(s) = std::env::var("EULERSTAB_WORKERS") {
        if let Ok(w) = s.trim().parse::<usize>() {
            return w.max(1);
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs `f(0..jobs)` on a small thread pool and collects results in order.
fn parallel_map<T, F>(jobs: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let slots: Vec<Mutex<Option<T>>> = (0..jobs).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    let threads = workers.clamp(1, jobs.max(1));
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs {
                    break;
                }
                let out = f(i);
                *slots[i].lock().unwrap() = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().unwrap().expect("worker filled every slot"))
        .collect()
}

// ---------------------------------------------------------------------------
// labels and curves

/// Identity of a degeneracy curve.  Orders count curves of one family from
/// the bottom of the beta axis upward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CurveLabel {
    /// n-th periodic-family curve; multiplicity-two kernel at omega = 1.
    Gamma(usize),
    /// n-th antiperiodic pair while its two branches are unresolved.
    XiPair(usize),
    /// Lower branch of a split antiperiodic pair.
    XiMinus(usize),
    /// Upper branch of a split antiperiodic pair.
    XiPlus(usize),
}

impl CurveLabel {
    #[must_use]
    pub fn order(self) -> usize {
        match self {
            CurveLabel::Gamma(n)
            | CurveLabel::XiPair(n)
            | CurveLabel::XiMinus(n)
            | CurveLabel::XiPlus(n) => n,
        }
    }

    /// True for the omega = 1 family, false for omega = -1.
    #[must_use]
    pub fn is_periodic_family(self) -> bool {
        matches!(self, CurveLabel::Gamma(_))
    }

    /// Kernel dimension the curve carries at each of its samples.
    #[must_use]
    pub fn multiplicity(self) -> usize {
        match self {
            CurveLabel::Gamma(_) | CurveLabel::XiPair(_) => 2,
            CurveLabel::XiMinus(_) | CurveLabel::XiPlus(_) => 1,
        }
    }

    /// Position within one order group: Xi sits below Gamma of the same order.
    fn rank(self) -> usize {
        match self {
            CurveLabel::XiMinus(_) => 0,
            CurveLabel::XiPair(_) => 1,
            CurveLabel::XiPlus(_) => 2,
            CurveLabel::Gamma(_) => 3,
        }
    }
}

impl fmt::Display for CurveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveLabel::Gamma(n) => write!(f, "Gamma_{n}"),
            CurveLabel::XiPair(n) => write!(f, "Xi_{n}"),
            CurveLabel::XiMinus(n) => write!(f, "Xi_{n}-"),
            CurveLabel::XiPlus(n) => write!(f, "Xi_{n}+"),
        }
    }
}

/// One traced point of a degeneracy curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample {
    pub e: f64,
    pub beta: f64,
    /// Kernel dimension observed at this point (2 on pairs, 1 on branches).
    pub multiplicity: usize,
    /// Galerkin truncation the slice was confirmed at.
    pub n_used: usize,
}

/// A connected piece of one degeneracy curve, sampled on an ascending
/// eccentricity grid.
#[derive(Clone, Debug)]
pub struct DegeneracyCurve {
    pub label: CurveLabel,
    /// Where the family member meets the e = 0 axis.  Branches inherit the
    /// starting point of the pair they split from.
    pub start_beta: f64,
    pub samples: Vec<CurveSample>,
}

impl DegeneracyCurve {
    #[must_use]
    pub fn first_e(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.e)
    }

    #[must_use]
    pub fn last_e(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.e)
    }

    #[must_use]
    pub fn last_beta(&self) -> f64 {
        self.samples.last().map_or(self.start_beta, |s| s.beta)
    }

    /// Linear interpolation of beta at eccentricity `e`; `None` outside the
    /// traced span.
    #[must_use]
    pub fn beta_at(&self, e: f64) -> Option<f64> {
        let eps = 1e-12;
        if self.samples.is_empty() || e < self.first_e() - eps || e > self.last_e() + eps {
            return None;
        }
        let k = self.samples.partition_point(|s| s.e < e - eps);
        let hi = &self.samples[k.min(self.samples.len() - 1)];
        if (hi.e - e).abs() <= eps || k == 0 {
            return Some(hi.beta);
        }
        let lo = &self.samples[k - 1];
        let t = (e - lo.e) / (hi.e - lo.e);
        Some(lo.beta + t * (hi.beta - lo.beta))
    }
}

// ---------------------------------------------------------------------------
// one-slice root finding

/// Degeneracy roots of one family on a fixed-eccentricity slice.
#[derive(Clone, Debug)]
pub struct SliceRoots {
    pub e: f64,
    /// Truncation the confirming scan ran at.
    pub n_used: usize,
    /// Ascending `(beta, multiplicity)` pairs.
    pub roots: Vec<(f64, usize)>,
    /// Scan anomalies (non-monotone counts and the like); empty on a clean run.
    pub notes: Vec<String>,
}

/// Recursive bracket refinement: the eigenvalue count below zero jumped by
/// `chi - clo` over `[lo, hi]`, so that many roots (with multiplicity) live
/// inside.  Splits until each cluster is localized to `BISECT_TOL`.
fn bracket_roots(
    count: &dyn Fn(f64) -> Result<usize>,
    lo: f64,
    hi: f64,
    clo: usize,
    chi: usize,
    out: &mut Vec<(f64, usize)>,
) -> Result<()> {
    debug_assert!(chi > clo);
    if hi - lo <= tol::BISECT_TOL {
        out.push((0.5 * (lo + hi), chi - clo));
        return Ok(());
    }
    let mid = 0.5 * (lo + hi);
    // Clamping shields the bracket from a count that wobbles non-monotonically
    // at truncation-noise scale inside the interval.
    let cm = count(mid)?.clamp(clo, chi);
    if cm > clo {
        bracket_roots(count, lo, mid, clo, cm, out)?;
    }
    if chi > cm {
        bracket_roots(count, mid, hi, cm, chi, out)?;
    }
    Ok(())
}

/// Full scan of one slice at a fixed truncation.
fn roots_at(
    twist: BoundaryTwist,
    e: f64,
    beta_max: f64,
    n_trunc: usize,
) -> Result<(Vec<(f64, usize)>, Vec<String>)> {
    let count = |b: f64| -> Result<usize> { Ok(assemble(b, e, twist, n_trunc)?.count_below(0.0)) };
    let mut roots: Vec<(f64, usize)> = Vec::new();
    let mut notes = Vec::new();

    let mut prev_b = BETA_SCAN_EDGE;
    let mut prev_c = count(prev_b)?;
    let steps = ((beta_max - BETA_SCAN_EDGE) / tol::SCAN_STEP).ceil() as usize;
    for k in 1..=steps {
        let b = (BETA_SCAN_EDGE + k as f64 * tol::SCAN_STEP).min(beta_max);
        let c = count(b)?;
        if c > prev_c {
            bracket_roots(&count, prev_b, b, prev_c, c, &mut roots)?;
        } else if c < prev_c {
            notes.push(format!(
                "count below zero dropped {prev_c} -> {c} near beta = {b:.4} at N = {n_trunc}"
            ));
        }
        prev_b = b;
        prev_c = c;
    }

    // merge clusters the subdivision separated by less than the merge radius
    let mut merged: Vec<(f64, usize)> = Vec::with_capacity(roots.len());
    for (b, m) in roots {
        match merged.last_mut() {
            Some((pb, pm)) if (b - *pb).abs() <= tol::ROOT_MERGE_TOL => {
                *pb = (*pb * *pm as f64 + b * m as f64) / (*pm + m) as f64;
                *pm += m;
            }
            _ => merged.push((b, m)),
        }
    }
    Ok((merged, notes))
}

fn roots_agree(a: &[(f64, usize)], b: &[(f64, usize)]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|((ba, ma), (bb, mb))| ma == mb && (ba - bb).abs() <= tol::ROOT_CONFIRM_TOL)
}

/// Finds every beta in `(0, beta_max]` where the operator of the given twist
/// is degenerate at eccentricity `e`.
///
/// The truncation is chosen from a certified index computation near the top
/// of the window, the scan runs at half that truncation, and the root set
/// must be reproduced at the full truncation (escalating once to twice that)
/// before it is returned.
pub fn degenerate_betas(twist: BoundaryTwist, e: f64, beta_max: f64) -> Result<SliceRoots> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::InvalidInput(format!(
            "eccentricity {e} outside [0, 1)"
        )));
    }
    if !(beta_max > BETA_SCAN_EDGE && beta_max <= 50.0) {
        return Err(Error::InvalidInput(format!(
            "beta_max = {beta_max} outside ({BETA_SCAN_EDGE}, 50]"
        )));
    }

    // Why probe off the endpoint: the certified routine is also the one the
    // scan is compared against, and the top edge is as stiff as the slice gets.
    let probe_beta = (0.997 * beta_max).max(0.5 * beta_max);
    let certified = index_and_nullity(probe_beta, e, twist)?;
    let n0 = (certified.n_used / 2).max(tol::GALERKIN_N_MIN);

    let (first, mut notes) = roots_at(twist, e, beta_max, n0)?;
    let (second, notes2) = roots_at(twist, e, beta_max, 2 * n0)?;
    notes.extend(notes2);
    if roots_agree(&first, &second) {
        return Ok(SliceRoots {
            e,
            n_used: 2 * n0,
            roots: second,
            notes,
        });
    }

    let n4 = (4 * n0).min(tol::GALERKIN_N_MAX);
    let (third, notes4) = roots_at(twist, e, beta_max, n4)?;
    notes.extend(notes4);
    if n4 > 2 * n0 && roots_agree(&second, &third) {
        return Ok(SliceRoots {
            e,
            n_used: n4,
            roots: third,
            notes,
        });
    }

    Err(Error::SliceUnconfirmed {
        e,
        detail: format!(
            "{} roots at N = {}, {} at N = {}, {} at N = {}",
            first.len(),
            n0,
            second.len(),
            2 * n0,
            third.len(),
            n4
        ),
    })
}

// ---------------------------------------------------------------------------
// curve tracing

/// Traced curves of one family plus anything unusual the matcher saw.
#[derive(Clone, Debug)]
pub struct CurveSet {
    pub curves: Vec<DegeneracyCurve>,
    pub diagnostics: Vec<String>,
}

/// Traces the degeneracy curves of one boundary family over an ascending
/// eccentricity grid that starts on the e = 0 axis.
///
/// Slices are computed independently (in parallel), then joined in grid
/// order by consuming roots and open curves in matching beta order; the
/// non-intersection of same-family curves is what justifies this.  A pair
/// whose two branches separate by more than the split threshold is closed
/// and replaced by labelled minus/plus branches.  Structural surprises are
/// recorded as diagnostics and truncate the affected curve rather than
/// invent data.
pub fn trace_curves(twist: BoundaryTwist, e_grid: &[f64], beta_max: f64) -> Result<CurveSet> {
    trace_curves_with(twist, e_grid, beta_max, worker_count(None))
}

fn trace_curves_with(
    twist: BoundaryTwist,
    e_grid: &[f64],
    beta_max: f64,
    workers: usize,
) -> Result<CurveSet> {
    if e_grid.is_empty() {
        return Err(Error::InvalidInput("empty eccentricity grid".into()));
    }
    if e_grid[0] != 0.0 {
        return Err(Error::InvalidInput(
            "curve labels are anchored on the e = 0 axis, so the grid must start there".into(),
        ));
    }
    if e_grid.windows(2).any(|w| w[1] <= w[0]) || *e_grid.last().unwrap() >= 1.0 {
        return Err(Error::InvalidInput(
            "eccentricity grid must be strictly ascending inside [0, 1)".into(),
        ));
    }
    let vs = twist.varsigma();
    if vs != 0.0 && vs != 0.5 {
        return Err(Error::InvalidInput(
            "curves are traced for the periodic and antiperiodic families only".into(),
        ));
    }

    let slices = parallel_map(e_grid.len(), workers, |j| {
        degenerate_betas(twist, e_grid[j], beta_max)
    });
    Ok(match_slices(
        twist.is_periodic(),
        e_grid,
        beta_max,
        slices,
    ))
}

/// Sequential joining of per-slice root sets into labelled curves.
fn match_slices(
    periodic: bool,
    e_grid: &[f64],
    beta_max: f64,
    slices: Vec<Result<SliceRoots>>,
) -> CurveSet {
    let mut diagnostics: Vec<String> = Vec::new();
    let mut closed: Vec<DegeneracyCurve> = Vec::new();
    let mut open: Vec<DegeneracyCurve> = Vec::new();
    // next family order, for curves that enter through the window top
    let mut next_order = 1usize;

    let mut slice_iter = slices.into_iter();

    // axis slice: label curves positionally and pin their starting points
    match slice_iter.next().unwrap() {
        Ok(axis) => {
            diagnostics.extend(axis.notes.iter().map(|n| format!("e = 0: {n}")));
            for (k, &(b, m)) in axis.roots.iter().enumerate() {
                let n = k + 1;
                let (label, closed_form) = if periodic {
                    (CurveLabel::Gamma(n), beta_hat(n as f64 + 1.0))
                } else {
                    (CurveLabel::XiPair(n), beta_hat(n as f64 + 0.5))
                };
                if (b - closed_form).abs() > tol::CURVE_START_TOL {
                    diagnostics.push(format!(
                        "{label} starts at beta = {b:.9}, {:.2e} away from the closed form {closed_form:.9}",
                        (b - closed_form).abs()
                    ));
                }
                if m != 2 {
                    diagnostics.push(format!(
                        "{label} has axis multiplicity {m}, expected 2"
                    ));
                }
                open.push(DegeneracyCurve {
                    label,
                    start_beta: b,
                    samples: vec![CurveSample {
                        e: 0.0,
                        beta: b,
                        multiplicity: m,
                        n_used: axis.n_used,
                    }],
                });
                next_order = n + 1;
            }
        }
        Err(err) => {
            diagnostics.push(format!("axis slice failed: {err}; no curves traced"));
            return CurveSet {
                curves: closed,
                diagnostics,
            };
        }
    }

    'slices: for (j, slice) in slice_iter.enumerate() {
        let e = e_grid[j + 1];
        let prev_e = e_grid[j];
        let window = tol::SLOPE_CAP * (e - prev_e);
        let slice = match slice {
            Ok(s) => s,
            Err(err) => {
                diagnostics.push(format!(
                    "slice at e = {e:.6} failed ({err}); curves truncated at e = {prev_e:.6}"
                ));
                break 'slices;
            }
        };
        diagnostics.extend(slice.notes.iter().map(|n| format!("e = {e:.6}: {n}")));

        // remaining capacity per root; curves consume in ascending beta order
        let mut roots: Vec<(f64, usize)> = slice.roots.clone();
        let have: usize = roots.iter().map(|&(_, m)| m).sum();
        let mut need_total: usize = open.iter().map(|c| c.label.multiplicity()).sum();

        // a curve can leave through the top of the beta window
        while need_total > have {
            match open.last() {
                Some(c) if c.last_beta() + window >= beta_max => {
                    let c = open.pop().unwrap();
                    diagnostics.push(format!(
                        "{} reached the beta window top after e = {prev_e:.6}",
                        c.label
                    ));
                    need_total -= c.label.multiplicity();
                    closed.push(c);
                }
                _ => {
                    diagnostics.push(format!(
                        "kernel count at e = {e:.6} fell below the open curve set \
                         ({have} < {need_total}); tracing stopped"
                    ));
                    closed.append(&mut open);
                    break 'slices;
                }
            }
        }

        let mut next_open: Vec<DegeneracyCurve> = Vec::with_capacity(open.len() + 2);
        let mut i = 0usize;
        let mut starved = false;
        for mut c in open.drain(..) {
            if starved {
                closed.push(c);
                continue;
            }
            let mut rem = c.label.multiplicity();
            let mut taken: Vec<(f64, usize)> = Vec::with_capacity(2);
            while rem > 0 && i < roots.len() {
                let (rb, cap) = &mut roots[i];
                let take = rem.min(*cap);
                taken.push((*rb, take));
                *cap -= take;
                rem -= take;
                if *cap == 0 {
                    i += 1;
                }
            }
            if rem > 0 {
                diagnostics.push(format!(
                    "roots at e = {e:.6} ran out while matching {}; curve truncated",
                    c.label
                ));
                starved = true;
                closed.push(c);
                continue;
            }

            let deviation = taken
                .iter()
                .map(|(rb, _)| (rb - c.last_beta()).abs())
                .fold(0.0f64, f64::max);
            if deviation > window {
                diagnostics.push(format!(
                    "{} jumped {deviation:.4} in beta between e = {prev_e:.6} and {e:.6} \
                     (window {window:.4}); curve truncated",
                    c.label
                ));
                closed.push(c);
                continue;
            }

            if taken.len() == 2 {
                let gap = taken[1].0 - taken[0].0;
                if gap > tol::SPLIT_SEPARATION {
                    if let CurveLabel::XiPair(n) = c.label {
                        diagnostics.push(format!(
                            "Xi_{n} splits into branches at e = {e:.6} (gap {gap:.3e})"
                        ));
                        for (branch, rb) in [
                            (CurveLabel::XiMinus(n), taken[0].0),
                            (CurveLabel::XiPlus(n), taken[1].0),
                        ] {
                            next_open.push(DegeneracyCurve {
                                label: branch,
                                start_beta: c.start_beta,
                                samples: vec![CurveSample {
                                    e,
                                    beta: rb,
                                    multiplicity: 1,
                                    n_used: slice.n_used,
                                }],
                            });
                        }
                        closed.push(c);
                        continue;
                    }
                    diagnostics.push(format!(
                        "{} would split at e = {e:.6} (gap {gap:.3e}), which its family \
                         forbids; curve truncated",
                        c.label
                    ));
                    closed.push(c);
                    continue;
                }
            }

            let mult: usize = taken.iter().map(|&(_, t)| t).sum();
            let beta = taken.iter().map(|&(rb, t)| rb * t as f64).sum::<f64>() / mult as f64;
            c.samples.push(CurveSample {
                e,
                beta,
                multiplicity: mult,
                n_used: slice.n_used,
            });
            next_open.push(c);
        }

        // leftover roots near the window top are curves entering from above
        // beta_max; their axis anchors are the closed-form thresholds, which
        // lie outside the window
        for &(rb, cap) in &roots[i..] {
            if cap == 0 {
                continue;
            }
            if rb + window < beta_max {
                diagnostics.push(format!(
                    "{cap} unmatched kernel dimension(s) at e = {e:.6}, beta = {rb:.4}"
                ));
                continue;
            }
            let label = if periodic {
                if cap == 2 {
                    let l = CurveLabel::Gamma(next_order);
                    next_order += 1;
                    Some(l)
                } else {
                    None
                }
            } else {
                match cap {
                    2 => {
                        let l = CurveLabel::XiPair(next_order);
                        next_order += 1;
                        Some(l)
                    }
                    1 => {
                        // a lone branch is the plus side of a half-entered
                        // pair if one is waiting, otherwise a new minus side
                        let waiting = next_open
                            .iter()
                            .filter_map(|c| match c.label {
                                CurveLabel::XiMinus(k) => Some(k),
                                _ => None,
                            })
                            .filter(|k| {
                                !next_open
                                    .iter()
                                    .any(|c| c.label == CurveLabel::XiPlus(*k))
                            })
                            .max();
                        Some(match waiting {
                            Some(k) => CurveLabel::XiPlus(k),
                            None => {
                                let l = CurveLabel::XiMinus(next_order);
                                next_order += 1;
                                l
                            }
                        })
                    }
                    _ => None,
                }
            };
            match label {
                Some(label) => {
                    let anchor = if periodic {
                        beta_hat(label.order() as f64 + 1.0)
                    } else {
                        beta_hat(label.order() as f64 + 0.5)
                    };
                    diagnostics.push(format!(
                        "{label} enters through the window top at e = {e:.6}"
                    ));
                    next_open.push(DegeneracyCurve {
                        label,
                        start_beta: anchor,
                        samples: vec![CurveSample {
                            e,
                            beta: rb,
                            multiplicity: cap,
                            n_used: slice.n_used,
                        }],
                    });
                }
                None => diagnostics.push(format!(
                    "{cap} kernel dimension(s) entering at e = {e:.6}, beta = {rb:.4} \
                     do not fit a single curve of this family"
                )),
            }
        }

        next_open.sort_by(|a, b| a.last_beta().total_cmp(&b.last_beta()));
        open = next_open;
    }

    closed.append(&mut open);
    closed.sort_by_key(|c| (c.label.order(), c.label.rank()));
    CurveSet {
        curves: closed,
        diagnostics,
    }
}

// ---------------------------------------------------------------------------
// slice ordering

/// Result of checking the interlacing law on one eccentricity slice.
#[derive(Clone, Debug)]
pub struct OrderingReport {
    pub e: f64,
    /// Labels present at this eccentricity with their beta values, ascending.
    pub sequence: Vec<(String, f64)>,
    pub violations: Vec<String>,
}

impl OrderingReport {
    #[must_use]
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that the curves crossing eccentricity `e` obey the interlacing
/// pattern Xi_1 < Gamma_1 < Xi_2 < Gamma_2 < ... with the two branches of
/// each pair in minus-plus order, and that the two families never touch.
#[must_use]
pub fn order_check(curves: &[DegeneracyCurve], e: f64) -> OrderingReport {
    let mut entries: Vec<(CurveLabel, f64)> = curves
        .iter()
        .filter_map(|c| c.beta_at(e).map(|b| (c.label, b)))
        .collect();
    entries.sort_by(|a, b| a.1.total_cmp(&b.1));
    let sequence: Vec<(String, f64)> = entries.iter().map(|(l, b)| (l.to_string(), *b)).collect();

    let find = |label: CurveLabel| entries.iter().find(|(l, _)| *l == label).map(|(_, b)| *b);
    // lowest and highest beta reached by the order-n antiperiodic pair
    let xi_lo = |n: usize| find(CurveLabel::XiMinus(n)).or_else(|| find(CurveLabel::XiPair(n)));
    let xi_hi = |n: usize| find(CurveLabel::XiPlus(n)).or_else(|| find(CurveLabel::XiPair(n)));

    let mut violations = Vec::new();
    let max_order = entries.iter().map(|(l, _)| l.order()).max().unwrap_or(0);
    for n in 1..=max_order {
        if let (Some(lo), Some(hi)) = (
            find(CurveLabel::XiMinus(n)),
            find(CurveLabel::XiPlus(n)),
        ) {
            if lo > hi {
                violations.push(format!(
                    "Xi_{n}- at beta = {lo:.6} lies above Xi_{n}+ at {hi:.6}"
                ));
            }
        }
        if let (Some(x), Some(g)) = (xi_hi(n), find(CurveLabel::Gamma(n))) {
            if g - x <= tol::CROSS_FAMILY_SEPARATION {
                violations.push(format!(
                    "Gamma_{n} at beta = {g:.6} fails to clear Xi_{n} at {x:.6}"
                ));
            }
        }
        if let (Some(g), Some(x)) = (find(CurveLabel::Gamma(n)), xi_lo(n + 1)) {
            if x - g <= tol::CROSS_FAMILY_SEPARATION {
                violations.push(format!(
                    "Xi_{} at beta = {x:.6} fails to clear Gamma_{n} at {g:.6}",
                    n + 1
                ));
            }
        }
        if let (Some(a), Some(b)) = (find(CurveLabel::Gamma(n)), find(CurveLabel::Gamma(n + 1))) {
            if a >= b {
                violations.push(format!(
                    "Gamma_{n} at beta = {a:.6} is not below Gamma_{} at {b:.6}",
                    n + 1
                ));
            }
        }
        if let (Some(a), Some(b)) = (xi_hi(n), xi_lo(n + 1)) {
            if a >= b {
                violations.push(format!(
                    "Xi_{n} at beta = {a:.6} is not below Xi_{} at {b:.6}",
                    n + 1
                ));
            }
        }
    }

    OrderingReport {
        e,
        sequence,
        violations,
    }
}

// ---------------------------------------------------------------------------
// region classification

/// Stability type predicted for a region between curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionClass {
    /// Elliptic essential part with rotation angle in (0, pi): below the
    /// current Xi pair.
    LowRotation,
    /// Hyperbolic essential part with a negative saddle: between the
    /// branches of the current Xi pair.
    NegativeSaddle,
    /// Elliptic essential part with rotation angle in (pi, 2 pi): above the
    /// current Xi pair, below the next Gamma.
    HighRotation,
    /// The beta = 0 edge, where a one-parameter symmetry restores a
    /// three-dimensional periodic kernel.
    ZeroBoundary,
}

impl fmt::Display for RegionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegionClass::LowRotation => "R(0<th<pi)*D(2)",
            RegionClass::NegativeSaddle => "D(-2)*D(2)",
            RegionClass::HighRotation => "R(pi<th<2pi)*D(2)",
            RegionClass::ZeroBoundary => "I2*N1(1,1)",
        };
        f.write_str(s)
    }
}

fn class_matches(tag: &NormalFormTag, class: RegionClass) -> bool {
    use std::f64::consts::PI;
    match (class, tag.factors.as_slice()) {
        (
            RegionClass::LowRotation,
            [BasicForm::Rotation { theta }, BasicForm::Hyperbolic { lambda }],
        ) => *theta > 0.0 && *theta < PI && *lambda > 1.0,
        (
            RegionClass::HighRotation,
            [BasicForm::Rotation { theta }, BasicForm::Hyperbolic { lambda }],
        ) => *theta > PI && *theta < 2.0 * PI && *lambda > 1.0,
        (
            RegionClass::NegativeSaddle,
            [BasicForm::Hyperbolic { lambda: neg }, BasicForm::Hyperbolic { lambda: pos }],
        ) => *neg < 0.0 && *pos > 0.0,
        (
            RegionClass::ZeroBoundary,
            [BasicForm::Identity, BasicForm::Unipotent { lambda, a }],
        ) => *lambda > 0.0 && *a == 1.0,
        _ => false,
    }
}

/// A probed point together with its predicted and computed stability data.
#[derive(Clone, Debug)]
pub struct RegionRecord {
    pub beta: f64,
    pub e: f64,
    /// `(i1, nu1, i-1, nu-1)` predicted from the curve crossings below beta.
    pub expected_indices: (usize, usize, usize, usize),
    /// Same quantities computed from the operator.
    pub indices: (usize, usize, usize, usize),
    /// Normal-form class the region position predicts; `None` when the
    /// relevant pair lies outside the traced window.
    pub expected_class: Option<RegionClass>,
    /// Monodromy normal form; `None` when the expanding direction has grown
    /// past what double precision can see around the unit circle.
    pub tag: Option<NormalFormTag>,
    pub alternate: Option<NormalFormTag>,
    /// Truncations used for the periodic and antiperiodic indices.
    pub n_used: (usize, usize),
    /// Disagreements between prediction and computation; empty when the
    /// probe confirms the region picture.
    pub conflicts: Vec<String>,
    /// Non-failure observations, e.g. an unresolvable monodromy tag.
    pub notes: Vec<String>,
}

/// Classifies the point `(beta, e)` against the traced curve background.
///
/// The index prediction counts kernel dimensions on curves passing below
/// beta; the class prediction reads the position relative to the current
/// antiperiodic pair.  Both are then compared with an independent operator
/// computation and a monodromy classification; disagreements are listed in
/// `conflicts` rather than raised, so a sweep can report them in bulk.
pub fn region_classify(
    beta: f64,
    e: f64,
    curves: &[DegeneracyCurve],
) -> Result<RegionRecord> {
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::InvalidInput(format!(
            "beta = {beta} must be finite and nonnegative"
        )));
    }
    if !(0.0..1.0).contains(&e) {
        return Err(Error::InvalidInput(format!(
            "eccentricity {e} outside [0, 1)"
        )));
    }

    let crossings: Vec<(CurveLabel, f64)> = curves
        .iter()
        .filter_map(|c| c.beta_at(e).map(|b| (c.label, b)))
        .collect();

    let (expected_indices, expected_class) = if beta == 0.0 {
        ((0, 3, 2, 0), Some(RegionClass::ZeroBoundary))
    } else {
        for (label, b) in &crossings {
            if (b - beta).abs() <= tol::REGION_CLEARANCE {
                return Err(Error::InvalidInput(format!(
                    "beta = {beta} at e = {e} lies within the clearance of {label}"
                )));
            }
        }
        let mut k_plus = 0usize;
        let mut k_minus = 0usize;
        let mut gammas_below = 0usize;
        for (label, b) in &crossings {
            if *b < beta {
                if label.is_periodic_family() {
                    k_plus += label.multiplicity();
                    gammas_below += 1;
                } else {
                    k_minus += label.multiplicity();
                }
            }
        }
        let group = gammas_below + 1;
        let find = |label: CurveLabel| {
            crossings
                .iter()
                .find(|(l, _)| *l == label)
                .map(|(_, b)| *b)
        };
        let lo = find(CurveLabel::XiMinus(group)).or_else(|| find(CurveLabel::XiPair(group)));
        let hi = find(CurveLabel::XiPlus(group)).or_else(|| find(CurveLabel::XiPair(group)));
        let class = match (lo, hi) {
            (Some(lo), _) if beta < lo => Some(RegionClass::LowRotation),
            (_, Some(hi)) if beta > hi => Some(RegionClass::HighRotation),
            (Some(_), Some(_)) => Some(RegionClass::NegativeSaddle),
            _ => None,
        };
        ((3 + k_plus, 0, 2 + k_minus, 0), class)
    };

    let pm = index_and_nullity(beta, e, BoundaryTwist::periodic())?;
    let am = index_and_nullity(beta, e, BoundaryTwist::antiperiodic())?;
    let m = monodromy(&EssentialSystem::new(beta, e)?)?;
    let mut notes = Vec::new();
    let cls = match classify(&m) {
        Ok(c) => Some(c),
        Err(Error::Ambiguous(msg)) => {
            notes.push(format!("monodromy tag unresolved: {msg}"));
            None
        }
        Err(err) => return Err(err),
    };
    let indices = (pm.index, pm.nullity, am.index, am.nullity);

    let mut conflicts = Vec::new();
    let names = ["i1", "nu1", "i-1", "nu-1"];
    let want = [
        expected_indices.0,
        expected_indices.1,
        expected_indices.2,
        expected_indices.3,
    ];
    let got = [indices.0, indices.1, indices.2, indices.3];
    for k in 0..4 {
        if want[k] != got[k] {
            conflicts.push(format!(
                "{} = {} differs from the crossing-count prediction {}",
                names[k], got[k], want[k]
            ));
        }
    }
    if let (Some(class), Some(cls)) = (expected_class, cls.as_ref()) {
        let hit = class_matches(&cls.tag, class)
            || cls
                .alternate
                .as_ref()
                .is_some_and(|t| class_matches(t, class));
        if !hit {
            conflicts.push(format!(
                "normal form {} does not match the predicted {class}",
                cls.tag.label()
            ));
        }
    }

    let (tag, alternate) = cls.map_or((None, None), |c| (Some(c.tag), c.alternate));
    Ok(RegionRecord {
        beta,
        e,
        expected_indices,
        indices,
        expected_class,
        tag,
        alternate,
        n_used: (pm.n_used, am.n_used),
        conflicts,
        notes,
    })
}

// ---------------------------------------------------------------------------
// the full atlas

/// Knobs for [`compute_atlas`].
#[derive(Clone, Debug)]
pub struct AtlasOptions {
    /// Top of the beta window.
    pub beta_max: f64,
    /// Top of the eccentricity grid (the grid always starts at 0).
    pub e_max: f64,
    /// Number of grid slices including both ends.
    pub e_steps: usize,
    /// Region probes run on every `grid_stride`-th slice.
    pub grid_stride: usize,
    /// Worker threads; default is the environment override `EULERSTAB_WORKERS`
    /// or the machine's available parallelism.
    pub workers: Option<usize>,
}

impl Default for AtlasOptions {
    fn default() -> Self {
        Self {
            beta_max: 12.0,
            e_max: 0.9,
            e_steps: 91,
            grid_stride: 10,
            workers: None,
        }
    }
}

/// Degeneracy curves, per-slice ordering reports and region probes over the
/// `(beta, e)` rectangle.
#[derive(Clone, Debug)]
pub struct Atlas {
    pub e_grid: Vec<f64>,
    pub curves: Vec<DegeneracyCurve>,
    pub orderings: Vec<OrderingReport>,
    pub regions: Vec<RegionRecord>,
    pub diagnostics: Vec<String>,
}

/// Traces both curve families over the rectangle, checks the interlacing law
/// on every slice, and probes the open regions between curves on a strided
/// subset of slices (plus the beta = 0 edge of each probed slice).
pub fn compute_atlas(opts: &AtlasOptions) -> Result<Atlas> {
    if !(opts.e_max > 0.0 && opts.e_max < 1.0) {
        return Err(Error::InvalidInput(format!(
            "e_max = {} outside (0, 1)",
            opts.e_max
        )));
    }
    if opts.e_steps < 2 {
        return Err(Error::InvalidInput(
            "need at least the axis slice and one more".into(),
        ));
    }
    if opts.grid_stride == 0 {
        return Err(Error::InvalidInput("grid_stride must be positive".into()));
    }
    let workers = worker_count(opts.workers);
    let e_grid: Vec<f64> = (0..opts.e_steps)
        .map(|k| opts.e_max * k as f64 / (opts.e_steps - 1) as f64)
        .collect();

    let per = trace_curves_with(BoundaryTwist::periodic(), &e_grid, opts.beta_max, workers)?;
    let anti = trace_curves_with(
        BoundaryTwist::antiperiodic(),
        &e_grid,
        opts.beta_max,
        workers,
    )?;
    let mut curves = per.curves;
    curves.extend(anti.curves);
    curves.sort_by_key(|c| (c.label.order(), c.label.rank()));
    let mut diagnostics = per.diagnostics;
    diagnostics.extend(anti.diagnostics);

    let orderings: Vec<OrderingReport> = e_grid.iter().map(|&e| order_check(&curves, e)).collect();

    // region probe jobs: band midpoints between consecutive crossings, plus
    // the beta = 0 edge, on every strided slice
    let mut jobs: Vec<(f64, f64)> = Vec::new();
    for j in (0..e_grid.len()).step_by(opts.grid_stride) {
        let e = e_grid[j];
        jobs.push((0.0, e));
        let mut cuts: Vec<f64> = vec![BETA_PROBE_MARGIN];
        let mut crossings: Vec<f64> = curves.iter().filter_map(|c| c.beta_at(e)).collect();
        crossings.sort_by(f64::total_cmp);
        cuts.extend(
            crossings
                .into_iter()
                .filter(|b| *b > BETA_PROBE_MARGIN && *b < opts.beta_max - BETA_PROBE_MARGIN),
        );
        cuts.push(opts.beta_max - BETA_PROBE_MARGIN);
        for w in cuts.windows(2) {
            if w[1] - w[0] < MIN_REGION_WIDTH {
                diagnostics.push(format!(
                    "band [{:.4}, {:.4}] at e = {e:.6} too narrow to probe",
                    w[0], w[1]
                ));
                continue;
            }
            jobs.push((0.5 * (w[0] + w[1]), e));
        }
    }

    let probed = parallel_map(jobs.len(), workers, |k| {
        region_classify(jobs[k].0, jobs[k].1, &curves)
    });
    let mut regions = Vec::with_capacity(jobs.len());
    for (k, r) in probed.into_iter().enumerate() {
        match r {
            Ok(rec) => regions.push(rec),
            Err(err) => diagnostics.push(format!(
                "region probe at beta = {:.4}, e = {:.6} failed: {err}",
                jobs[k].0, jobs[k].1
            )),
        }
    }

    Ok(Atlas {
        e_grid,
        curves,
        orderings,
        regions,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn axis_curves(beta_max: f64) -> Vec<DegeneracyCurve> {
        let grid = [0.0];
        let mut curves = trace_curves(BoundaryTwist::periodic(), &grid, beta_max)
            .unwrap()
            .curves;
        curves.extend(
            trace_curves(BoundaryTwist::antiperiodic(), &grid, beta_max)
                .unwrap()
                .curves,
        );
        curves.sort_by_key(|c| (c.label.order(), c.label.rank()));
        curves
    }

    #[test]
    fn scans_recover_the_circular_thresholds() {
        let per = degenerate_betas(BoundaryTwist::periodic(), 0.0, 8.0).unwrap();
        let want = [beta_hat(2.0), beta_hat(3.0)];
        assert_eq!(per.roots.len(), want.len(), "{:?}", per.roots);
        for ((b, m), w) in per.roots.iter().zip(want) {
            assert!(close(*b, w, 1e-6), "{b} vs {w}");
            assert_eq!(*m, 2);
        }
        assert!(per.notes.is_empty(), "{:?}", per.notes);

        let anti = degenerate_betas(BoundaryTwist::antiperiodic(), 0.0, 8.0).unwrap();
        let want = [beta_hat(1.5), beta_hat(2.5)];
        assert_eq!(anti.roots.len(), want.len(), "{:?}", anti.roots);
        for ((b, m), w) in anti.roots.iter().zip(want) {
            assert!(close(*b, w, 1e-6), "{b} vs {w}");
            assert_eq!(*m, 2);
        }

        assert!(degenerate_betas(BoundaryTwist::periodic(), 1.0, 8.0).is_err());
        assert!(degenerate_betas(BoundaryTwist::periodic(), 0.0, 60.0).is_err());
    }

    #[test]
    fn curves_start_on_axis_and_move_slowly() {
        let grid = [0.0, 1e-3];
        let per = trace_curves(BoundaryTwist::periodic(), &grid, 8.0).unwrap();
        assert!(per.diagnostics.is_empty(), "{:?}", per.diagnostics);
        assert_eq!(per.curves.len(), 2);
        for (c, n) in per.curves.iter().zip([1usize, 2]) {
            assert_eq!(c.label, CurveLabel::Gamma(n));
            assert!(close(c.start_beta, beta_hat(n as f64 + 1.0), 1e-6));
            assert_eq!(c.samples.len(), 2);
            let slope = (c.samples[1].beta - c.samples[0].beta).abs() / 1e-3;
            assert!(slope < 0.05, "{} slope {slope}", c.label);
        }

        let anti = trace_curves(BoundaryTwist::antiperiodic(), &grid, 8.0).unwrap();
        let total: usize = anti
            .curves
            .iter()
            .map(|c| c.samples.last().unwrap().multiplicity)
            .sum();
        assert_eq!(total, 4, "pair multiplicities must sum to 2 per pair");
        for c in &anti.curves {
            let n = c.label.order();
            assert!(close(c.start_beta, beta_hat(n as f64 + 0.5), 1e-6));
            let slope = (c.last_beta() - c.start_beta).abs() / 1e-3;
            assert!(slope < 0.05, "{} slope {slope}", c.label);
        }

        assert!(trace_curves(BoundaryTwist::periodic(), &[0.1, 0.2], 8.0).is_err());
        assert!(
            trace_curves(BoundaryTwist::from_angle(1.0).unwrap(), &grid, 8.0).is_err(),
            "tracing is defined for the real twists only"
        );
    }

    #[test]
    fn slice_ordering_interlaces_the_families() {
        let curves = axis_curves(8.0);
        let report = order_check(&curves, 0.0);
        let labels: Vec<&str> = report.sequence.iter().map(|(l, _)| l.as_str()).collect();
        assert_eq!(labels, ["Xi_1", "Gamma_1", "Xi_2", "Gamma_2"]);
        assert!(report.ok(), "{:?}", report.violations);
    }

    #[test]
    fn region_probes_match_predictions_on_the_axis() {
        let curves = axis_curves(8.0);

        // below the first pair: elliptic with a low rotation angle
        let r = region_classify(0.5, 0.0, &curves).unwrap();
        assert_eq!(r.expected_indices, (3, 0, 2, 0));
        assert_eq!(r.expected_class, Some(RegionClass::LowRotation));
        assert!(r.conflicts.is_empty(), "{:?}", r.conflicts);

        // between the first pair and the first periodic curve
        let r = region_classify(2.0, 0.0, &curves).unwrap();
        assert_eq!(r.expected_indices, (3, 0, 4, 0));
        assert_eq!(r.expected_class, Some(RegionClass::HighRotation));
        assert!(r.conflicts.is_empty(), "{:?}", r.conflicts);

        // past the first periodic curve, below the second pair
        let r = region_classify(3.5, 0.0, &curves).unwrap();
        assert_eq!(r.expected_indices, (5, 0, 4, 0));
        assert_eq!(r.expected_class, Some(RegionClass::LowRotation));
        assert!(r.conflicts.is_empty(), "{:?}", r.conflicts);

        // the beta = 0 edge carries the extra kernel
        let r = region_classify(0.0, 0.0, &curves).unwrap();
        assert_eq!(r.expected_indices, (0, 3, 2, 0));
        assert_eq!(r.expected_class, Some(RegionClass::ZeroBoundary));
        assert!(r.conflicts.is_empty(), "{:?}", r.conflicts);

        // probing on a curve is refused
        assert!(region_classify(beta_hat(2.0), 0.0, &curves).is_err());
    }
}
