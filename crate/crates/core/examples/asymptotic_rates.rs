// Limits and power laws read off a computed solution near the origin.
use radial_lab::estimates::{self, LimitMode, RateQuantity};
use radial_lab::params::Params;
use radial_lab::phase::{self, PhasePoint};
use radial_lab::radial::{self, IntegrateOptions};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::new(3.0, 2.0, 1.0, 3.0)?;
    let init = phase::from_phase(&p, &PhasePoint { t: 0.0, x: 0.3, z: 0.2 })?;
    let opts = IntegrateOptions {
        abs_tol: 0.0,
        ..Default::default()
    };
    let tr = radial::integrate(&p, &init, (init.r, 1e-14), &opts)?;
    let samples: Vec<(f64, f64)> = (0..10)
        .map(|j| {
            let r = 1e-12 * 4f64.powi(j);
            (r, tr.eval(r).unwrap().u)
        })
        .collect();
    let u0 = estimates::estimate_limit(&samples, LimitMode::RToZero)?;
    println!("u(0+) = {:.10} +- {:.1e}", u0.value, u0.error_bar);
    let k = p.q - p.m + 1.0;
    let v = estimates::check_rate(&tr, RateQuantity::GradientNearOrigin, -1.0 / k, (1e-12, 1e-8), 0.01)?;
    println!("|u'| ~ r^{:.5} (target {}), {}", v.fit.exponent, v.target, if v.pass { "PASS" } else { "FAIL" });
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("asymptotic_rates example");
}
