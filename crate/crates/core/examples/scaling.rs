// The scaling `u ↦ λ^θ u(λ ·)` maps solutions to solutions.
use radial_lab::params::Params;
use radial_lab::radial::{self, IntegrateOptions, RadialState};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::new(4.0, 2.5, 0.5, 3.5)?;
    let opts = IntegrateOptions::default();
    let tr = radial::integrate(&p, &RadialState::new(&p, 1.0, 1.0, -0.2), (1.0, 3.0), &opts)?;
    let lambda = 2.0;
    let scaled = radial::scale_solution(&tr, lambda)?;
    let theta = p.scaling_exponent();
    let init = RadialState::new(&p, 1.0 / lambda, lambda.powf(-theta), -0.2 * lambda.powf(1.0 - theta));
    let direct = radial::integrate(&p, &init, (1.0 / lambda, 3.0 / lambda), &opts)?;
    for r in [0.6, 1.0, 1.4] {
        let (a, b) = (scaled.eval(r).unwrap(), direct.eval(r).unwrap());
        println!("r = {r}: scaled {:.14}, direct {:.14}", a.u, b.u);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("scaling example");
}
