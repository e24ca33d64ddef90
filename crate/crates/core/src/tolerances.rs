//! Central home for every numeric tolerance used across the crate.
//!
//! Keeping them in one place makes the accuracy contract auditable and lets
//! the validation suite loosen individual knobs to prove the checks bite.

/// Mass triples must sum to 1 within this before normalization.
pub const MASS_SUM_TOL: f64 = 1e-12;

/// Quintic residual bound, relative to the largest coefficient magnitude.
pub const QUINTIC_RESIDUAL_REL: f64 = 1e-12;

/// Relative width at which the quintic root bracket stops shrinking.
pub const QUINTIC_ROOT_REL: f64 = 1e-14;

/// Bound on |delta - (beta + 1)| for the geometric identity.
pub const DELTA_IDENTITY_TOL: f64 = 1e-10;

/// Upper end of the admissible beta range, with a hair of slack because the
/// supremum beta = 7 is attained exactly at masses (1/2, 0, 1/2).
pub const BETA_MAX: f64 = 7.0 + 1e-9;

/// Default relative local error for the adaptive integrator.
pub const INTEGRATOR_RTOL: f64 = 1e-12;

/// Default absolute local error for the adaptive integrator.
pub const INTEGRATOR_ATOL: f64 = 1e-14;

/// Symplectic defect bound, measured relative to the squared matrix scale
/// (max(1, max|M|^2)); at matrix norms of order one this coincides with the
/// absolute reading.
pub const SYMPLECTIC_DEFECT_TOL: f64 = 1e-9;

/// det(M) = 1 bound under the same relative scaling.
pub const DET_ONE_TOL: f64 = 1e-9;

/// Agreement between the integrator and the matrix-exponential oracle at
/// e = 0, relative to max(1, matrix scale).
pub const EXPM_AGREEMENT_TOL: f64 = 1e-8;

/// Backward re-integration must return to the identity within this,
/// relative to max(1, matrix scale).
pub const BACKWARD_RESIDUAL_TOL: f64 = 1e-8;

/// Galerkin truncation order the convergence loop starts from.
pub const GALERKIN_N_MIN: usize = 8;

/// Hard cap on the Galerkin truncation order.
pub const GALERKIN_N_MAX: usize = 1024;

/// Hermitian defect bound for assembled Galerkin matrices.
pub const HERMITIAN_DEFECT_TOL: f64 = 1e-12;

/// Factor defining the spectral null band: eigenvalues within
/// null_tol of zero count toward the nullity. The scale factor is
/// independent of the truncation order N (the raw matrix norm grows like
/// N^2, which would never stabilize), and instead tracks the size of the
/// potential term, max(1, (beta + 3) / (1 - e)).
pub const NULL_TOL_FACTOR: f64 = 1e-7;

/// The null band must be clean: no eigenvalue in (null_tol, 10 null_tol]
/// on either side, otherwise the truncation order is doubled.
pub const NULL_GAP_FACTOR: f64 = 10.0;

/// Trailing-coefficient cutoff for the kernel recurrence.
pub const RECURRENCE_TAIL_TOL: f64 = 1e-14;

/// Hard cap on the recurrence truncation order.
pub const RECURRENCE_K_MAX: usize = 512;

/// Relative singular-value threshold declaring a recurrence solution.
pub const RECURRENCE_SV_REL: f64 = 1e-8;

/// Relative singular-value threshold for monodromy nullity.
pub const MONODROMY_NULLITY_REL: f64 = 1e-7;

/// Eigenvalues of a monodromy matrix closer than this to a classification
/// boundary (unit circle, +-1, collision of angles) are reported ambiguous.
pub const CLASSIFY_BOUNDARY_TOL: f64 = 1e-7;

/// Minimal angular separation for index propagation around the circle.
pub const ANGLE_ORDER_TOL: f64 = 1e-9;

/// Condition-number cap beyond which a 4x4 normal-form reduction is
/// reported ambiguous instead of trusted.
pub const REDUCTION_COND_CAP: f64 = 1e8;

/// Atlas beta-scan step.
pub const SCAN_STEP: f64 = 0.02;

/// Atlas bisection width for degenerate beta roots.
pub const BISECT_TOL: f64 = 1e-9;

/// Roots closer than this are merged and their multiplicities summed.
pub const ROOT_MERGE_TOL: f64 = 1e-9;

/// Curve-matching slope cap in beta units per unit eccentricity.
pub const SLOPE_CAP: f64 = 50.0;

/// Separation in beta above which a multiplicity-2 start is considered
/// split into two simple curves.
pub const SPLIT_SEPARATION: f64 = 1e-6;

/// Traced curve starting points must match the closed-form degenerate
/// values at e = 0 within this.
pub const CURVE_START_TOL: f64 = 1e-6;

/// Degeneracy roots recomputed at a doubled truncation must agree within
/// this before a slice is trusted.
pub const ROOT_CONFIRM_TOL: f64 = 1e-6;

/// Region probes closer than this (in beta) to a traced curve are refused.
pub const REGION_CLEARANCE: f64 = 1e-6;

/// Curves from the periodic and antiperiodic families must stay at least
/// this far apart in beta at every traced eccentricity.
pub const CROSS_FAMILY_SEPARATION: f64 = 1e-6;

/// A +-2-proximity window wider than this means a stability parameter's
/// position against the unit circle is numerically vacuous at working
/// precision (the expanding direction has eaten the trace), so the
/// classifier refuses rather than guesses.
pub const WINDOW_RESOLUTION_CAP: f64 = 0.5;

/// A boundary twist must sit on the unit circle within this before its
/// angle is trusted.
pub const UNIT_CIRCLE_TOL: f64 = 1e-14;

/// Factor on eps * scale bounding how accurately a stability parameter can
/// be recovered from the traces of a stored monodromy matrix; measured
/// floors sit near 0.15 eps scale, so 4 keeps margin on both sides.
pub const KERNEL_S_RESOLUTION: f64 = 4.0;

/// Above this matrix scale the absolute singular-value gate no longer
/// separates a genuine kernel from roundoff, so in-window kernel questions
/// are refused instead of guessed.
pub const KERNEL_SVD_SCALE_CAP: f64 = 1e8;
