// Running the acceptance criteria from code.
use radial_lab::verify::{self, VerifyConfig};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = VerifyConfig::default();
    for id in [1, 7, 9] {
        let c = verify::run_criterion(id, &cfg);
        println!("{} {:>2} {}", if c.pass { "PASS" } else { "FAIL" }, c.id, c.name);
        if !c.pass {
            return Err(format!("criterion {id} failed: {}", c.details).into());
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("acceptance_suite example");
}
