// Solutions prescribed by their behaviour `l + c r^{-A}` at infinity.
use radial_lab::params::Params;
use radial_lab::radial::{self, IntegrateOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::new(3.0, 2.0, 1.0, 3.0)?;
    let a = p.decay_exponent();
    for (l, c) in [(1.0, 1.0), (0.0, 1.0), (2.0, 0.3)] {
        let tr = radial::integrate_at_infinity(&p, l, c, (0.0, 1.0), &IntegrateOptions::default())?;
        let r = 1e3;
        let u = tr.eval(r).unwrap().u;
        println!(
            "l = {l}, c = {c}: r^A (u - l) at r = 1e3 is {:.8}; innermost radius {:.4}, {:?}",
            r.powf(a) * (u - l),
            tr.first().r,
            tr.terminal.kind
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("data_at_infinity example");
}
