// The barrier bound for `|v'|²` and the bootstrap product.
use radial_lab::estimates;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (k, d, theta, n) = (3.0, 0.0, 1.0, 3.0);
    println!("barrier constant {:.6}", estimates::osserman_constant(k, d, theta, n));
    for rho in [0.1, 1.0, 10.0] {
        let b = estimates::osserman_bound(k, d, theta, n, rho, 2.0, 1.0)?;
        println!("rho = {rho}: z <= {b:.6}");
    }
    let bb = estimates::bootstrap_bound(2.0, 0.5, 1.0, 0.5)?;
    println!(
        "bootstrap: iterated {:.6}, summed series {:.6}, alternative form {:.6}, converged {}",
        bb.iterated, bb.closed_form, bb.closed_form_alt, bb.converged
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("bound_formulas example");
}
