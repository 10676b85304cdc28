//! Analytic gradients of the per-sample loss.
//!
//! Head gradients are closed-form. Everything behind a quantum readout is
//! chained through the attention algebra, with the readout derivatives
//! themselves taken by the ±π/2 parameter-shift rule. That covers both the
//! trainable circuit angles and the encoder angles, which are the layer
//! inputs (for the first layer, the word vectors).

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use crate::ansatz::shifted;
use crate::error::{QsannError, Result};
use crate::model::{dot, QsannModel};
use crate::qsal::{
    circuit_readout, encode, readout_encoded, z_first, LayerTrace, ObservableSet, QsalLayerParams,
};
use crate::sim::Simulator;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub d_theta_q: Vec<f64>,
    pub d_theta_k: Vec<f64>,
    pub d_theta_v: Vec<f64>,
}

/// Gradient of one sample's loss with respect to every model parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle {
    pub d_theta: Vec<LayerGradient>,
    pub d_w: Vec<f64>,
    pub d_b: f64,
    /// Only rows touched by the sample; repeated tokens accumulate.
    pub d_embeddings: BTreeMap<usize, Vec<f64>>,
}

impl GradientBundle {
    /// Dense gradient in [`crate::train::Classifier::parameters`] order.
    pub fn flatten(&self, model: &QsannModel) -> Vec<f64> {
        let mut out = Vec::with_capacity(crate::train::Classifier::parameter_len(model));
        for g in &self.d_theta {
            out.extend_from_slice(&g.d_theta_q);
            out.extend_from_slice(&g.d_theta_k);
            out.extend_from_slice(&g.d_theta_v);
        }
        out.extend_from_slice(&self.d_w);
        out.push(self.d_b);
        let d = model.dim();
        let start = out.len();
        out.resize(start + model.embeddings.rows() * d, 0.0);
        for (&id, g) in &self.d_embeddings {
            out[start + id * d..start + (id + 1) * d].copy_from_slice(g);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.d_b.is_finite()
            && self.d_w.iter().all(|x| x.is_finite())
            && self.d_theta.iter().all(|g| {
                g.d_theta_q
                    .iter()
                    .chain(&g.d_theta_k)
                    .chain(&g.d_theta_v)
                    .all(|x| x.is_finite())
            })
            && self.d_embeddings.values().flatten().all(|x| x.is_finite())
    }
}

/// The four contributions to the gradient with respect to one layer input.
#[derive(Debug, Clone, PartialEq)]
pub struct InputGradientTerms {
    pub residual: Vec<f64>,
    pub value: Vec<f64>,
    pub query: Vec<f64>,
    pub key: Vec<f64>,
}

impl InputGradientTerms {
    pub fn total(&self) -> Vec<f64> {
        (0..self.residual.len())
            .map(|i| self.residual[i] + self.value[i] + self.query[i] + self.key[i])
            .collect()
    }
}

/// Result of backpropagating through one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerBackward {
    pub params: LayerGradient,
    /// One entry per input position.
    pub inputs: Vec<InputGradientTerms>,
}

/// `d a[s][j] / d zk[i] = -a[s][j] (a[s][i] - delta_ij) * 2 (zq[s] - zk[i])`
pub fn attention_key_derivative(trace: &LayerTrace, s: usize, j: usize, i: usize) -> f64 {
    let a = &trace.attention;
    let delta = if i == j { 1.0 } else { 0.0 };
    -a.get(s, j) * (a.get(s, i) - delta) * 2.0 * (trace.zq[s] - trace.zk[i])
}

/// Elementwise `(f(+) - f(-)) / 2` for readouts taken at `params[j] ± π/2`.
fn shift_rule<F>(params: &[f64], j: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let plus = f(&shifted(params, j, FRAC_PI_2))?;
    let minus = f(&shifted(params, j, -FRAC_PI_2))?;
    Ok(plus
        .iter()
        .zip(&minus)
        .map(|(p, m)| (p - m) / 2.0)
        .collect())
}

/// Backpropagates `grad_out[s] = dL/dy_s` through one layer.
pub fn layer_backward(
    trace: &LayerTrace,
    grad_out: &[Vec<f64>],
    params: &QsalLayerParams,
    obs: &ObservableSet,
    sim: &Simulator,
) -> Result<LayerBackward> {
    let s_len = trace.inputs.len();
    let d = params.shape.dim();
    let a = &trace.attention;

    // dL/do_j = sum_s a[s][j] g_s
    let d_values: Vec<Vec<f64>> = (0..s_len)
        .map(|j| {
            let mut acc = vec![0.0; d];
            for (s, g) in grad_out.iter().enumerate() {
                let w = a.get(s, j);
                acc.iter_mut().zip(g).for_each(|(o, gi)| *o += w * gi);
            }
            acc
        })
        .collect();
    // dL/da[s][j] = g_s . o_j
    let d_att: Vec<Vec<f64>> = grad_out
        .iter()
        .map(|g| trace.values.iter().map(|o| dot(g, o)).collect())
        .collect();
    // dL/dzk_i and dL/dzq_s; d a[s][j]/d zq[s] = -sum_i d a[s][j]/d zk[i]
    let mut d_zk = vec![0.0; s_len];
    let mut d_zq = vec![0.0; s_len];
    for s in 0..s_len {
        for j in 0..s_len {
            let mut row_sum = 0.0;
            for (i, dzk) in d_zk.iter_mut().enumerate() {
                let da = attention_key_derivative(trace, s, j, i);
                *dzk += d_att[s][j] * da;
                row_sum += da;
            }
            d_zq[s] -= d_att[s][j] * row_sum;
        }
    }

    let shape = params.shape;
    let spec = shape.qkv_spec();
    let z = [z_first(shape.n_qubits)];
    let n_theta = spec.param_count();
    let mut grad = LayerGradient {
        d_theta_q: vec![0.0; n_theta],
        d_theta_k: vec![0.0; n_theta],
        d_theta_v: vec![0.0; n_theta],
    };
    let mut inputs = Vec::with_capacity(s_len);

    for (s, x) in trace.inputs.iter().enumerate() {
        let encoded = encode(sim, &shape, x)?;
        for j in 0..n_theta {
            let dq = shift_rule(&params.theta_q, j, |t| {
                circuit_readout(sim, &encoded, &spec, t, &z)
            })?;
            let dk = shift_rule(&params.theta_k, j, |t| {
                circuit_readout(sim, &encoded, &spec, t, &z)
            })?;
            let dv = shift_rule(&params.theta_v, j, |t| {
                circuit_readout(sim, &encoded, &spec, t, obs.as_slice())
            })?;
            grad.d_theta_q[j] += d_zq[s] * dq[0];
            grad.d_theta_k[j] += d_zk[s] * dk[0];
            grad.d_theta_v[j] += dot(&d_values[s], &dv);
        }

        // readouts as a function of the encoder angles: [zq, zk, o_1..o_d]
        let readout = |angles: &[f64]| -> Result<Vec<f64>> {
            let enc = encode(sim, &shape, angles)?;
            let r = readout_encoded(sim, &enc, params, obs)?;
            let mut out = Vec::with_capacity(d + 2);
            out.push(r.zq);
            out.push(r.zk);
            out.extend(r.value);
            Ok(out)
        };
        let mut terms = InputGradientTerms {
            residual: grad_out[s].clone(),
            value: vec![0.0; d],
            query: vec![0.0; d],
            key: vec![0.0; d],
        };
        for j in 0..d {
            let dr = shift_rule(x, j, readout)?;
            terms.query[j] = d_zq[s] * dr[0];
            terms.key[j] = d_zk[s] * dr[1];
            terms.value[j] = dot(&d_values[s], &dr[2..]);
        }
        inputs.push(terms);
    }
    Ok(LayerBackward {
        params: grad,
        inputs,
    })
}

/// Gradient of `(y_hat - y)^2 / 2 + penalties` for one sample.
pub fn backward(tokens: &[usize], label: u8, model: &QsannModel) -> Result<GradientBundle> {
    if label > 1 {
        return Err(QsannError::config(format!("label {label} is not 0 or 1")));
    }
    let trace = model.forward_traced(tokens)?;
    let sim = model.simulator();
    let d = model.dim();
    let s_len = tokens.len() as f64;
    let reg = model.config.regularization;

    let y_hat = trace.y_hat;
    let sigma_tilde = (y_hat - f64::from(label)) * y_hat * (1.0 - y_hat);
    let d_w: Vec<f64> = trace
        .pooled
        .iter()
        .zip(&model.head_w)
        .map(|(m, w)| sigma_tilde * m + reg.lambda / d as f64 * w)
        .collect();
    let d_b = sigma_tilde;

    let head_grad: Vec<f64> = model
        .head_w
        .iter()
        .map(|w| sigma_tilde / s_len * w)
        .collect();
    let mut grad_out = vec![head_grad; tokens.len()];
    let mut d_theta = Vec::with_capacity(model.layers.len());
    for (params, layer) in model.layers.iter().zip(&trace.layers).rev() {
        let back = layer_backward(layer, &grad_out, params, &model.observables, &sim)?;
        grad_out = back.inputs.iter().map(InputGradientTerms::total).collect();
        d_theta.push(back.params);
    }
    d_theta.reverse();

    let mut d_embeddings: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for ((&id, g), x) in tokens.iter().zip(&grad_out).zip(&trace.embedded) {
        let id = if id < model.embeddings.rows() {
            id
        } else {
            crate::data::OOV_ID
        };
        let row = d_embeddings.entry(id).or_insert_with(|| vec![0.0; d]);
        for i in 0..d {
            row[i] += g[i] + reg.gamma / d as f64 * x[i];
        }
    }
    Ok(GradientBundle {
        d_theta,
        d_w,
        d_b,
        d_embeddings,
    })
}
