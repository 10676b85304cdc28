//! One quantum self-attention layer on a three-word sequence: query and key
//! readouts, the Gaussian attention matrix and the residual outputs.

use qsann::qsal::{
    inner_product_coefficients, layer_forward_traced, LayerShape, ObservableSet, QsalLayerParams,
};
use qsann::sim::Simulator;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qsann::Result<()> {
    let shape = LayerShape::new(2, 1, 1)?;
    let d = shape.dim();
    let per_circuit = shape.qkv_spec().param_count();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut draw =
        |len: usize| -> Vec<f64> { (0..len).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let params = QsalLayerParams::new(
        shape,
        draw(per_circuit).into(),
        draw(per_circuit).into(),
        draw(per_circuit).into(),
    )?;
    let inputs = vec![draw(d), draw(d), draw(d)];
    let obs = ObservableSet::standard(shape.n_qubits, d)?;
    println!(
        "value observables: {}",
        obs.as_slice()
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );

    let trace = layer_forward_traced(&inputs, &params, &obs, &Simulator::noiseless())?;
    println!("<Z_q>: {:?}", trace.zq);
    println!("<Z_k>: {:?}", trace.zk);
    println!("attention:");
    for row in trace.attention.rows() {
        println!(
            "  {}",
            row.iter()
                .map(|a| format!("{a:.6}"))
                .collect::<Vec<_>>()
                .join("  ")
        );
    }
    println!(
        "word-averaged attention: {:?}",
        trace.attention.column_means()
    );
    for (s, y) in trace.outputs.iter().enumerate() {
        println!(
            "y_{s} = {}",
            y.iter()
                .map(|v| format!("{v:+.4}"))
                .collect::<Vec<_>>()
                .join(" ")
        );
    }

    let ip = inner_product_coefficients(&inputs, &params)?;
    println!("inner-product attention (comparison only):");
    for row in ip.rows() {
        println!(
            "  {}",
            row.iter()
                .map(|a| format!("{a:.6}"))
                .collect::<Vec<_>>()
                .join("  ")
        );
    }
    Ok(())
}
