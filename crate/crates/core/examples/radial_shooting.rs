// Shooting from a point with prescribed `u`, `u'` and watching how the
// solution ends: vanishing, gradient blow-up or decay to a limit.
use radial_lab::params::Params;
use radial_lab::radial::{self, IntegrateOptions, RadialState};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::new(3.0, 2.0, 1.0, 3.0)?;
    let opts = IntegrateOptions::default();
    for du in [-0.05, -0.6, -3.0] {
        let init = RadialState::new(&p, 1.0, 1.0, du);
        let tr = radial::integrate(&p, &init, (1.0, f64::INFINITY), &opts)?;
        println!(
            "u'(1) = {du:>5}: {:?} at r = {:.6}, payload {:?}, {} samples",
            tr.terminal.kind,
            tr.terminal.location,
            tr.terminal.payload,
            tr.samples.len()
        );
    }
    // Toward the origin the same data becomes singular.
    let init = RadialState::new(&p, 1.0, 1.0, -0.6);
    let tr = radial::integrate(&p, &init, (1.0, 1e-8), &opts)?;
    let s = tr.eval(1e-8).unwrap();
    println!("at r = 1e-8: u = {:.8}, u' = {:.4e}", s.u, s.du);
    let (defect, scale) = tr.residual(0.5).unwrap();
    println!("relative residual at r = 0.5: {:.2e}", defect.abs() / scale);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("radial_shooting example");
}
