//! One quantum self-attention layer.
//!
//! Every input vector is loaded as the angles of an encoder circuit applied
//! after a Hadamard layer. The encoded state then feeds three trainable
//! circuits: query and key circuits read out `<Z>` on qubit 0, the value
//! circuit reads out a fixed list of `d` Pauli observables. Attention
//! weights are a row-normalized Gaussian of the query/key difference and
//! the layer output adds the attended values back onto its input.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::ansatz::{build_circuit, encoder_circuit, AnsatzSpec, ParamVector};
use crate::error::{QsannError, Result};
use crate::sim::{Pauli, PauliString, Register, Simulator, StateVector};

/// Qubit count and circuit depths shared by every layer of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayerShape {
    pub n_qubits: usize,
    pub enc_depth: usize,
    pub qkv_depth: usize,
}

impl LayerShape {
    pub fn new(n_qubits: usize, enc_depth: usize, qkv_depth: usize) -> Result<Self> {
        AnsatzSpec::new(n_qubits, enc_depth)?;
        Ok(Self {
            n_qubits,
            enc_depth,
            qkv_depth,
        })
    }

    /// Width of the vectors flowing through the layer, `n(D_enc + 2)`.
    pub fn dim(&self) -> usize {
        self.encoder_spec().param_count()
    }

    pub fn encoder_spec(&self) -> AnsatzSpec {
        AnsatzSpec {
            n_qubits: self.n_qubits,
            depth: self.enc_depth,
        }
    }

    pub fn qkv_spec(&self) -> AnsatzSpec {
        AnsatzSpec {
            n_qubits: self.n_qubits,
            depth: self.qkv_depth,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsalLayerParams {
    pub shape: LayerShape,
    pub theta_q: ParamVector,
    pub theta_k: ParamVector,
    pub theta_v: ParamVector,
}

impl QsalLayerParams {
    pub fn new(
        shape: LayerShape,
        theta_q: ParamVector,
        theta_k: ParamVector,
        theta_v: ParamVector,
    ) -> Result<Self> {
        let params = Self {
            shape,
            theta_q,
            theta_k,
            theta_v,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn zeros(shape: LayerShape) -> Self {
        let spec = shape.qkv_spec();
        Self {
            shape,
            theta_q: ParamVector::zeros(&spec),
            theta_k: ParamVector::zeros(&spec),
            theta_v: ParamVector::zeros(&spec),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let expected = self.shape.qkv_spec().param_count();
        for (name, p) in [
            ("q", &self.theta_q),
            ("k", &self.theta_k),
            ("v", &self.theta_v),
        ] {
            if p.len() != expected {
                return Err(QsannError::config(format!(
                    "theta_{name} has {} entries, expected {expected}",
                    p.len()
                )));
            }
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        3 * self.shape.qkv_spec().param_count()
    }
}

/// Pauli observables read out by the value circuit.
///
/// The first `min(d, 3n)` entries are `Z_1..Z_n, X_1..X_n, Y_1..Y_n`. Beyond
/// that come same-letter pairs on cyclically adjacent qubits (`Z_iZ_{i+1}`
/// for every `i`, then the `X` pairs, then the `Y` pairs), then pairs at
/// distance 2, and so on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObservableSet(Vec<PauliString>);

impl ObservableSet {
    pub fn standard(n_qubits: usize, d: usize) -> Result<Self> {
        const LETTERS: [Pauli; 3] = [Pauli::Z, Pauli::X, Pauli::Y];
        let mut out = Vec::with_capacity(d);
        'singles: for letter in LETTERS {
            for q in 0..n_qubits {
                if out.len() == d {
                    break 'singles;
                }
                out.push(PauliString::single(n_qubits, q, letter)?);
            }
        }
        let mut distance = 1;
        while out.len() < d && distance < n_qubits {
            for letter in LETTERS {
                let mut seen = HashSet::new();
                for i in 0..n_qubits {
                    let j = (i + distance) % n_qubits;
                    if out.len() < d && seen.insert((i.min(j), i.max(j))) {
                        let pair = PauliString::pair(n_qubits, i, j, letter)?;
                        if !out.contains(&pair) {
                            out.push(pair);
                        }
                    }
                }
            }
            distance += 1;
        }
        if out.len() < d {
            return Err(QsannError::config(format!(
                "cannot choose {d} distinct single/pair observables on {n_qubits} qubits"
            )));
        }
        Ok(Self(out))
    }

    pub fn from_observables(observables: Vec<PauliString>) -> Result<Self> {
        if observables.is_empty() {
            return Err(QsannError::config("observable set is empty"));
        }
        let n = observables[0].n_qubits();
        if observables.iter().any(|o| o.n_qubits() != n) {
            return Err(QsannError::config(
                "observables act on different qubit counts",
            ));
        }
        Ok(Self(observables))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[PauliString] {
        &self.0
    }
}

/// Row-stochastic `S x S` attention weights, row `s` attending over columns `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionMatrix {
    size: usize,
    coefficients: Vec<f64>,
}

impl AttentionMatrix {
    /// Normalizes each row of a raw non-negative weight matrix.
    pub fn from_raw(size: usize, mut raw: Vec<f64>) -> Result<Self> {
        if size == 0 {
            return Err(QsannError::EmptySequence);
        }
        if raw.len() != size * size {
            return Err(QsannError::config(format!(
                "attention matrix of size {size} needs {} entries, got {}",
                size * size,
                raw.len()
            )));
        }
        for row in raw.chunks_mut(size) {
            let total: f64 = row.iter().sum();
            if !(total > 0.0 && total.is_finite()) {
                return Err(QsannError::NonFinite(format!("attention row sum {total}")));
            }
            row.iter_mut().for_each(|a| *a /= total);
        }
        Ok(Self {
            size,
            coefficients: raw,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, s: usize, j: usize) -> f64 {
        self.coefficients[s * self.size + j]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.coefficients[s * self.size..(s + 1) * self.size]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coefficients.chunks(self.size)
    }

    /// Column means `(1/S) sum_s a[s][j]`: how much attention word `j` receives.
    pub fn column_means(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.size];
        for row in self.rows() {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a;
            }
        }
        out.iter_mut().for_each(|o| *o /= self.size as f64);
        out
    }
}

/// Gaussian projected attention: `a[s][j] = exp(-(zq[s] - zk[j])^2)`, row-normalized.
pub fn gpqsa_coefficients(zq: &[f64], zk: &[f64]) -> Result<AttentionMatrix> {
    if zq.len() != zk.len() {
        return Err(QsannError::config(format!(
            "{} query values but {} key values",
            zq.len(),
            zk.len()
        )));
    }
    let size = zq.len();
    let raw = zq
        .iter()
        .flat_map(|q| zk.iter().map(move |k| (-(q - k).powi(2)).exp()))
        .collect();
    AttentionMatrix::from_raw(size, raw)
}

/// Readouts of one encoded word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordReadout {
    pub zq: f64,
    pub zk: f64,
    pub value: Vec<f64>,
}

fn check_input(input: &[f64], shape: &LayerShape) -> Result<()> {
    if input.len() != shape.dim() {
        return Err(QsannError::config(format!(
            "layer input has dimension {}, expected {}",
            input.len(),
            shape.dim()
        )));
    }
    Ok(())
}

pub(crate) fn z_first(n_qubits: usize) -> PauliString {
    PauliString::single(n_qubits, 0, Pauli::Z).expect("qubit 0 always exists")
}

pub(crate) fn encode(sim: &Simulator, shape: &LayerShape, input: &[f64]) -> Result<Register> {
    check_input(input, shape)?;
    sim.run(
        shape.n_qubits,
        &encoder_circuit(&shape.encoder_spec(), input)?,
    )
}

pub(crate) fn circuit_readout(
    sim: &Simulator,
    encoded: &Register,
    spec: &AnsatzSpec,
    theta: &[f64],
    observables: &[PauliString],
) -> Result<Vec<f64>> {
    sim.evolve(encoded, &build_circuit(spec, theta)?)?
        .expectations(observables)
}

/// Query, key and value readouts of an already encoded word.
pub(crate) fn readout_encoded(
    sim: &Simulator,
    encoded: &Register,
    params: &QsalLayerParams,
    obs: &ObservableSet,
) -> Result<WordReadout> {
    let spec = params.shape.qkv_spec();
    let z = [z_first(params.shape.n_qubits)];
    let zq = circuit_readout(sim, encoded, &spec, &params.theta_q, &z)?[0];
    let zk = circuit_readout(sim, encoded, &spec, &params.theta_k, &z)?[0];
    let value = circuit_readout(sim, encoded, &spec, &params.theta_v, obs.as_slice())?;
    Ok(WordReadout { zq, zk, value })
}

/// Encodes `input` once and reads out its query, key and value.
pub fn word_readout(
    input: &[f64],
    params: &QsalLayerParams,
    obs: &ObservableSet,
    sim: &Simulator,
) -> Result<WordReadout> {
    let encoded = encode(sim, &params.shape, input)?;
    readout_encoded(sim, &encoded, params, obs)
}

/// `<Z_1>` after the query and key circuits for every position.
pub fn query_key_expectations(
    inputs: &[Vec<f64>],
    params: &QsalLayerParams,
    sim: &Simulator,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let spec = params.shape.qkv_spec();
    let z = [z_first(params.shape.n_qubits)];
    let mut zq = Vec::with_capacity(inputs.len());
    let mut zk = Vec::with_capacity(inputs.len());
    for input in inputs {
        let encoded = encode(sim, &params.shape, input)?;
        zq.push(circuit_readout(sim, &encoded, &spec, &params.theta_q, &z)?[0]);
        zk.push(circuit_readout(sim, &encoded, &spec, &params.theta_k, &z)?[0]);
    }
    Ok((zq, zk))
}

/// The value circuit's `d` Pauli readouts for one input.
pub fn value_vector(
    input: &[f64],
    params: &QsalLayerParams,
    obs: &ObservableSet,
    sim: &Simulator,
) -> Result<Vec<f64>> {
    let encoded = encode(sim, &params.shape, input)?;
    circuit_readout(
        sim,
        &encoded,
        &params.shape.qkv_spec(),
        &params.theta_v,
        obs.as_slice(),
    )
}

/// `y[s] = x[s] + sum_j a[s][j] * values[j]`
pub fn residual_combine(
    inputs: &[Vec<f64>],
    attention: &AttentionMatrix,
    values: &[Vec<f64>],
) -> Vec<Vec<f64>> {
    inputs
        .iter()
        .zip(attention.rows())
        .map(|(x, row)| {
            let mut y = x.clone();
            for (a, v) in row.iter().zip(values) {
                for (yi, vi) in y.iter_mut().zip(v) {
                    *yi += a * vi;
                }
            }
            y
        })
        .collect()
}

/// Everything a layer computed, kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerTrace {
    pub inputs: Vec<Vec<f64>>,
    pub zq: Vec<f64>,
    pub zk: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub attention: AttentionMatrix,
    pub outputs: Vec<Vec<f64>>,
}

pub fn layer_forward_traced(
    inputs: &[Vec<f64>],
    params: &QsalLayerParams,
    obs: &ObservableSet,
    sim: &Simulator,
) -> Result<LayerTrace> {
    if inputs.is_empty() {
        return Err(QsannError::EmptySequence);
    }
    if obs.len() != params.shape.dim() {
        return Err(QsannError::config(format!(
            "{} value observables for a {}-dimensional layer",
            obs.len(),
            params.shape.dim()
        )));
    }
    params.validate()?;
    let mut zq = Vec::with_capacity(inputs.len());
    let mut zk = Vec::with_capacity(inputs.len());
    let mut values = Vec::with_capacity(inputs.len());
    for input in inputs {
        let r = word_readout(input, params, obs, sim)?;
        zq.push(r.zq);
        zk.push(r.zk);
        values.push(r.value);
    }
    let attention = gpqsa_coefficients(&zq, &zk)?;
    let outputs = residual_combine(inputs, &attention, &values);
    Ok(LayerTrace {
        inputs: inputs.to_vec(),
        zq,
        zk,
        values,
        attention,
        outputs,
    })
}

/// Layer outputs and the attention matrix that produced them.
pub fn layer_forward(
    inputs: &[Vec<f64>],
    params: &QsalLayerParams,
    obs: &ObservableSet,
    sim: &Simulator,
) -> Result<(Vec<Vec<f64>>, AttentionMatrix)> {
    let trace = layer_forward_traced(inputs, params, obs, sim)?;
    Ok((trace.outputs, trace.attention))
}

/// Ablation only: inner-product attention `|<psi_s| U_q^dag U_k |psi_j>|^2`,
/// row-normalized, on noiseless states. Not used by training.
pub fn inner_product_coefficients(
    inputs: &[Vec<f64>],
    params: &QsalLayerParams,
) -> Result<AttentionMatrix> {
    if inputs.is_empty() {
        return Err(QsannError::EmptySequence);
    }
    let shape = params.shape;
    let spec = shape.qkv_spec();
    let mut queries: Vec<StateVector> = Vec::with_capacity(inputs.len());
    let mut keys: Vec<StateVector> = Vec::with_capacity(inputs.len());
    for input in inputs {
        check_input(input, &shape)?;
        let mut psi = StateVector::zero(shape.n_qubits)?;
        psi.apply_circuit(&encoder_circuit(&shape.encoder_spec(), input)?)?;
        let mut q = psi.clone();
        q.apply_circuit(&build_circuit(&spec, &params.theta_q)?)?;
        let mut k = psi;
        k.apply_circuit(&build_circuit(&spec, &params.theta_k)?)?;
        queries.push(q);
        keys.push(k);
    }
    let mut raw = Vec::with_capacity(inputs.len() * inputs.len());
    for q in &queries {
        for k in &keys {
            raw.push(q.inner(k)?.norm_sqr());
        }
    }
    AttentionMatrix::from_raw(inputs.len(), raw)
}
