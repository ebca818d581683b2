// The orbit joining N0 to A0: a solution singular at the origin and
// decaying like `c r^{-A}` at infinity.
use radial_lab::params::Params;
use radial_lab::phase::{self, PhaseOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::new(3.0, 2.0, 1.0, 3.0)?;
    let sm = phase::stable_manifold_a0(&p, 1e-4, &PhaseOptions::default())?;
    println!("seed {:?}", sm.seed);
    println!("distance to N0 at the end: {:.2e}", sm.n0_distance);
    println!("u0 = {:.8}, c = {:.8}", sm.u0, sm.c);
    println!("crosses the Z-nullcline: {}", sm.crosses_l_z);
    let a = p.decay_exponent();
    for r in [1e-3, 1.0, 1e2] {
        let u = sm.u_at(r).unwrap();
        println!("r = {r:e}: u = {u:.8}, r^A u = {:.8}", r.powf(a) * u);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("connecting_orbit example");
}
