// Classifying seeds of the phase plane by the behaviour of the radial
// solution through them.
use radial_lab::params::Params;
use radial_lab::phase::{self, PhasePoint, Seed};
use radial_lab::radial::RadialState;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::new(3.0, 2.0, 1.0, 3.0)?;
    let seeds = [
        Seed::Phase(PhasePoint { t: 0.0, x: 0.3, z: 0.2 }),
        Seed::Phase(PhasePoint { t: 0.0, x: 1.0, z: 0.5 }),
        Seed::Phase(PhasePoint { t: 0.0, x: 0.5, z: 8.0 }),
        Seed::Phase(PhasePoint { t: 0.0, x: -0.5, z: -0.2 }),
        Seed::Phase(PhasePoint { t: 0.0, x: -0.5, z: -6.0 }),
        Seed::Radial(RadialState::new(&p, 1.0, 2.0, 0.0)),
    ];
    for seed in &seeds {
        let c = phase::classify(&p, seed)?;
        let w = c.witnesses;
        println!("{:?}: u0 {:?} l {:?} rho {:?} k {:?}", c.kind, w.u0, w.l, w.rho, w.k);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("classify_seeds example");
}
