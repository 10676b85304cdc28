//! Builds a small entangling circuit, measures Pauli observables on the
//! state vector and checks the density-matrix path agrees.

use qsann::ansatz::{build_circuit, AnsatzSpec};
use qsann::sim::{DensityMatrix, Gate, PauliString, StateVector};

fn main() -> qsann::Result<()> {
    // Bell state
    let mut bell = StateVector::zero(2)?;
    bell.apply_circuit(&[Gate::H(0), Gate::cnot(0, 1)])?;
    println!("bell probabilities: {:?}", bell.probabilities());
    for obs in ["ZZ", "XX", "YY", "ZI"] {
        let p: PauliString = obs.parse()?;
        println!("<{obs}> = {:+.6}", bell.expectation(&p)?);
    }

    let spec = AnsatzSpec::new(3, 2)?;
    let params: Vec<f64> = (0..spec.param_count()).map(|i| 0.3 * i as f64).collect();
    let circuit = build_circuit(&spec, &params)?;
    println!(
        "\n{} gates, {} parameters:",
        circuit.len(),
        spec.param_count()
    );
    for g in &circuit {
        print!("{g} ");
    }
    println!();

    let mut psi = StateVector::zero(3)?;
    psi.apply_circuit(&circuit)?;
    let mut rho = DensityMatrix::zero(3)?;
    rho.apply_circuit(&circuit)?;
    for obs in ["ZII", "IXI", "IIY", "ZZZ"] {
        let p: PauliString = obs.parse()?;
        println!(
            "<{obs}>  state vector {:+.12}  density matrix {:+.12}",
            psi.expectation(&p)?,
            rho.expectation(&p)?
        );
    }
    Ok(())
}
