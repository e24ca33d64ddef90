//! Release gate: every check of the validation suite must hold at its
//! stated tolerance.  Each test prints the one-line report of its check,
//! so a failing run shows the measured value next to the bound.

use euler_stability::validation::{
    check_boundary_row, check_circular_eigenvalue_law, check_circular_index_tables,
    check_curve_starts, check_delta_identity, check_hygiene_totals, check_index_bound,
    check_kernel_agreement, check_loose_tolerance_rejected, check_monotonicity,
    check_ordering_and_coincidence, check_parity_and_double_kernels, check_region_normal_forms,
    Hygiene,
};

fn assert_passes(r: euler_stability::validation::CheckReport) {
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn circular_eigenvalue_law_holds() {
    assert_passes(check_circular_eigenvalue_law(&mut Hygiene::default()));
}

#[test]
fn circular_index_tables_are_exact() {
    assert_passes(check_circular_index_tables());
}

#[test]
fn boundary_row_keeps_its_indices() {
    assert_passes(check_boundary_row());
}

#[test]
fn operator_and_matrix_kernels_agree() {
    assert_passes(check_kernel_agreement(&mut Hygiene::default()));
}

#[test]
fn mass_geometry_identity_holds() {
    assert_passes(check_delta_identity());
}

#[test]
fn periodic_index_is_odd_and_kernels_are_double() {
    assert_passes(check_parity_and_double_kernels());
}

#[test]
fn curves_start_on_their_thresholds() {
    assert_passes(check_curve_starts());
}

#[test]
fn slices_are_ordered_and_pairs_coincide() {
    assert_passes(check_ordering_and_coincidence());
}

#[test]
fn region_probes_match_their_normal_forms() {
    assert_passes(check_region_normal_forms(&mut Hygiene::default()));
}

#[test]
fn index_respects_the_growth_bound() {
    assert_passes(check_index_bound());
}

#[test]
fn index_is_monotone_with_kernel_sized_jumps() {
    assert_passes(check_monotonicity());
}

#[test]
fn every_computed_monodromy_is_numerically_clean() {
    let mut hygiene = Hygiene::default();
    assert_passes(check_circular_eigenvalue_law(&mut hygiene));
    assert_passes(check_kernel_agreement(&mut hygiene));
    assert_passes(check_region_normal_forms(&mut hygiene));
    assert_passes(check_hygiene_totals(&hygiene));
}

#[test]
fn sloppy_integration_trips_the_defect_gate() {
    assert_passes(check_loose_tolerance_rejected());
}
