// Orbits of the phase-plane system, the nullclines, and CSV export.
use radial_lab::params::Params;
use radial_lab::phase::{self, PhaseOptions, PhasePoint};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::new(3.0, 2.0, 1.0, 3.0)?;
    let nc = phase::nullclines(&p)?;
    println!("L_X: Z = {} X + {}", nc.l_x.slope, nc.l_x.intercept);
    println!("L_Z: Z = {} X + {}", nc.l_z.slope, nc.l_z.intercept);
    let opts = PhaseOptions::default();
    let mut orbits = Vec::new();
    for (x, z) in [(0.3, 0.2), (0.5, 4.0), (2.0, 0.5)] {
        let start = PhasePoint { t: 0.0, x, z };
        let fwd = phase::integrate_phase(&p, &start, (0.0, 200.0), &opts)?;
        println!("({x}, {z}) forward: {:?}, omega limit {:?}", fwd.forward_end, fwd.omega_limit);
        orbits.push(fwd);
    }
    let mut csv = Vec::new();
    phase::write_orbits_csv(&orbits, &mut csv)?;
    println!("{} CSV rows", String::from_utf8(csv)?.lines().count() - 1);
    // The map to the radial picture and back is exact.
    let pt = PhasePoint { t: 0.7, x: 0.4, z: 1.1 };
    let st = phase::from_phase(&p, &pt)?;
    let back = phase::to_phase(&p, &st)?;
    println!("round trip: {pt:?} -> r = {:.4}, u = {:.6} -> {back:?}", st.r, st.u);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("phase_orbits example");
}
