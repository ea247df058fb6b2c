mod common;

#[test]
fn trace_property() {
    common::trace_property(100).unwrap();
}

#[test]
fn left_and_right_traces() {
    common::left_right_traces(100).unwrap();
}

#[test]
fn unit_associativity_and_specialness_give_frobenius() {
    common::unit_assoc_special_implies_frobenius(100).unwrap();
}

#[test]
fn killing_ring() {
    common::killing_ring(100).unwrap();
}

#[test]
fn direct_sum_and_central_decomposition() {
    common::direct_sum_round_trip(100).unwrap();
}

#[test]
fn nonscalar_normalizer() {
    common::nonscalar_normalizer_is_reported(100).unwrap();
}
