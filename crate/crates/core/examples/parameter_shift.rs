//! Exact circuit derivatives with the two-point shift rule, compared with
//! central finite differences.

use qsann::ansatz::{build_circuit, param_shift_grad, AnsatzSpec};
use qsann::sim::{Gate, PauliString, StateVector};

fn main() -> qsann::Result<()> {
    // single RY: <Z> = cos(theta), derivative -sin(theta)
    let spec = AnsatzSpec::new(1, 0)?;
    let z: PauliString = "Z".parse()?;
    let start = StateVector::zero(1)?;
    for theta in [0.0, 0.4, 1.3, 2.9] {
        // parameters: [RX, RY]
        let g = param_shift_grad(&start, &spec, &[0.0, theta], &z, 1)?;
        println!(
            "theta {theta:.2}: shift rule {g:+.12}  -sin {:+.12}",
            -f64::sin(theta)
        );
    }

    let spec = AnsatzSpec::new(2, 2)?;
    let obs: PauliString = "XZ".parse()?;
    let params: Vec<f64> = (0..spec.param_count())
        .map(|i| 0.7 + 0.45 * i as f64)
        .collect();
    let mut start = StateVector::zero(2)?;
    start.apply_circuit(&[Gate::H(0), Gate::H(1)])?;
    let value = |p: &[f64]| -> qsann::Result<f64> {
        let mut s = start.clone();
        s.apply_circuit(&build_circuit(&spec, p)?)?;
        s.expectation(&obs)
    };
    println!("\nparam  shift rule        finite difference");
    let h = 1e-6;
    for j in 0..spec.param_count() {
        let exact = param_shift_grad(&start, &spec, &params, &obs, j)?;
        let (mut up, mut down) = (params.clone(), params.clone());
        up[j] += h;
        down[j] -= h;
        let fd = (value(&up)? - value(&down)?) / (2.0 * h);
        println!("{j:>5}  {exact:+.12}  {fd:+.12}");
    }
    Ok(())
}
