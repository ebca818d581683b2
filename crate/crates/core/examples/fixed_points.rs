// Fixed points of the phase-plane system and their linearization.
use radial_lab::params::{self, FixedPointLabel, Params};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::new(3.0, 2.0, 1.0, 3.0)?;
    println!("regime {:?}", p.regime);
    for label in FixedPointLabel::ALL {
        let fp = params::linearize(&p, label)?;
        let (l1, l2) = fp.eigenvalues.unwrap();
        println!("{label:?} at {:?}: eigenvalues ({l1}, {l2}), {:?}", fp.location, fp.stability.unwrap());
    }
    println!("slope of the stable direction at A0: {}", params::a0_eigen_slope(&p));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("fixed_points example");
}
