mod acceptance_suite {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/acceptance_suite.rs"));
}
mod asymptotic_rates {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/asymptotic_rates.rs"));
}
mod bound_formulas {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/bound_formulas.rs"));
}
mod classify_seeds {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/classify_seeds.rs"));
}
mod connecting_orbit {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/connecting_orbit.rs"));
}
mod data_at_infinity {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data_at_infinity.rs"));
}
mod explicit_p0 {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/explicit_p0.rs"));
}
mod fixed_points {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fixed_points.rs"));
}
mod phase_orbits {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/phase_orbits.rs"));
}
mod radial_shooting {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/radial_shooting.rs"));
}
mod scaling {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scaling.rs"));
}
mod transform_q_equals_m {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/transform_q_equals_m.rs"));
}

#[test]
fn acceptance_suite_runs() {
    acceptance_suite::run_example().expect("acceptance_suite");
}

#[test]
fn asymptotic_rates_runs() {
    asymptotic_rates::run_example().expect("asymptotic_rates");
}

#[test]
fn bound_formulas_runs() {
    bound_formulas::run_example().expect("bound_formulas");
}

#[test]
fn classify_seeds_runs() {
    classify_seeds::run_example().expect("classify_seeds");
}

#[test]
fn connecting_orbit_runs() {
    connecting_orbit::run_example().expect("connecting_orbit");
}

#[test]
fn data_at_infinity_runs() {
    data_at_infinity::run_example().expect("data_at_infinity");
}

#[test]
fn explicit_p0_runs() {
    explicit_p0::run_example().expect("explicit_p0");
}

#[test]
fn fixed_points_runs() {
    fixed_points::run_example().expect("fixed_points");
}

#[test]
fn phase_orbits_runs() {
    phase_orbits::run_example().expect("phase_orbits");
}

#[test]
fn radial_shooting_runs() {
    radial_shooting::run_example().expect("radial_shooting");
}

#[test]
fn scaling_runs() {
    scaling::run_example().expect("scaling");
}

#[test]
fn transform_q_equals_m_runs() {
    transform_q_equals_m::run_example().expect("transform_q_equals_m");
}
