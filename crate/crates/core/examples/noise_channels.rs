//! Depolarizing and amplitude-damping channels acting on a density matrix,
//! and their effect on a noisy attention layer.

use qsann::qsal::{layer_forward, LayerShape, ObservableSet, QsalLayerParams};
use qsann::sim::{
    DensityMatrix, Gate, NoiseChannel, NoiseKind, NoiseSpec, PauliString, Simulator, StateVector,
};

fn main() -> qsann::Result<()> {
    let z: PauliString = "Z".parse()?;
    let mut psi = StateVector::zero(1)?;
    psi.apply_gate_mut(&Gate::ry(0, 0.8))?;
    let rho = DensityMatrix::from_pure(&psi);
    let z0 = rho.expectation(&z)?;
    println!("<Z> before noise: {z0:.6}");
    println!("   p   depolarizing   (1-4p/3)<Z>   damping   (1-p)<Z>+p");
    for p in [0.0, 0.01, 0.1, 0.2, 0.75] {
        let dep = rho
            .apply_channel(&NoiseChannel::depolarizing(p, 0)?)?
            .expectation(&z)?;
        let amp = rho
            .apply_channel(&NoiseChannel::amplitude_damping(p, 0)?)?
            .expectation(&z)?;
        println!(
            "{p:>5}   {dep:+.9}   {:+.9}   {amp:+.9}   {:+.9}",
            (1.0 - 4.0 * p / 3.0) * z0,
            (1.0 - p) * z0 + p
        );
    }

    let shape = LayerShape::new(2, 1, 1)?;
    let d = shape.dim();
    let n_params = shape.qkv_spec().param_count();
    let angles =
        |offset: f64| -> Vec<f64> { (0..n_params).map(|i| offset + 0.2 * i as f64).collect() };
    let params = QsalLayerParams::new(
        shape,
        angles(0.1).into(),
        angles(0.5).into(),
        angles(0.9).into(),
    )?;
    let obs = ObservableSet::standard(2, d)?;
    let inputs: Vec<Vec<f64>> = (0..3)
        .map(|s| (0..d).map(|k| 0.1 * (s * d + k) as f64).collect())
        .collect();
    println!("\nfirst output coordinate of each word:");
    for (label, sim) in [
        ("noiseless", Simulator::noiseless()),
        (
            "depolarizing 0.1",
            Simulator::noisy(NoiseSpec::new(NoiseKind::Depolarizing, 0.1)?),
        ),
        (
            "damping 0.1",
            Simulator::noisy(NoiseSpec::new(NoiseKind::AmplitudeDamping, 0.1)?),
        ),
    ] {
        let (out, _) = layer_forward(&inputs, &params, &obs, &sim)?;
        let first: Vec<String> = out.iter().map(|y| format!("{:+.6}", y[0])).collect();
        println!("{label:>18}: {}", first.join("  "));
    }
    Ok(())
}
