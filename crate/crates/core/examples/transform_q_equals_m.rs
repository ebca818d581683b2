// For `q = m` the equation linearizes through the transform `Ψ`.
use radial_lab::closed_form::{self, PsiTransform};
use radial_lab::params::Params;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = Params::new(3.0, 2.0, 1.0, 2.0)?;
    let ps = PsiTransform::new(&p)?;
    for u in [0.5, 1.0, 2.0] {
        let v = closed_form::psi(&ps, u)?;
        println!("Psi({u}) = {v:.10}, inverse {:.12}", closed_form::psi_inverse(&ps, v)?);
    }
    for r in [1e-6, 1e-3, 1.0, 1e3] {
        let (u, du) = closed_form::qm_solution(&ps, 0.5, 0.5, r)?;
        println!("r = {r:e}: u = {u:.10}, u' = {du:.4e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("transform_q_equals_m example");
}
