// The explicit family for `p = 0` against direct integration.
use radial_lab::closed_form::{self, Branch, ExplicitP0};
use radial_lab::params::Params;
use radial_lab::radial::{self, IntegrateOptions, RadialState};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::new(3.0, 2.0, 0.0, 3.0)?;
    let ep = ExplicitP0::new(&p, Branch::Decreasing, 0.5)?;
    let du1 = closed_form::p0_derivative(&ep, 1.0)?;
    let init = RadialState::new(&p, 1.0, 1.0, du1);
    let tr = radial::integrate(&p, &init, (1.0, 10.0), &IntegrateOptions::default())?;
    let mut worst = 0.0f64;
    for r in [1.5, 2.0, 4.0, 8.0] {
        let exact = closed_form::p0_value(&ep, 1.0, 1.0, r)?;
        let num = tr.eval(r).unwrap().u;
        worst = worst.max((num - exact).abs() / exact);
        println!("r = {r}: closed form {exact:.12}, integrated {num:.12}");
    }
    println!("largest relative deviation {worst:.1e}");
    let inc = ExplicitP0::new(&p, Branch::Increasing, 2.0)?;
    println!("increasing branch lives on {:?}", inc.domain);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("explicit_p0 example");
}
