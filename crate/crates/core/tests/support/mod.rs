//! Independent oracles for the integration suites.
//!
//! Everything here recomputes results through routes the library does not
//! use: Jacobi rotations instead of power iteration, a dense all-experts
//! mixture instead of the sparse forward pass, and literal transcriptions of
//! the closed-form expressions. Oracles must stay independent of the code
//! paths they check.

// each integration test target compiles this module separately and uses a
// different subset of it
#![allow(dead_code)]

use smoe_core::linalg::Matrix;
use smoe_core::model::SMoEModel;

/// All singular values of `m`, descending, via cyclic Jacobi rotations on
/// the symmetric matrix `M^T M`.
#[allow(clippy::needless_range_loop)]
pub fn jacobi_singular_values(m: &Matrix) -> Vec<f64> {
    let n = m.cols();
    let mut s = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for r in 0..m.rows() {
                acc += m.get(r, i) * m.get(r, j);
            }
            s[i][j] = acc;
        }
    }
    let frob: f64 = s.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    if frob > 0.0 {
        for _sweep in 0..200 {
            let off: f64 = (0..n)
                .flat_map(|p| (0..n).map(move |q| (p, q)))
                .filter(|&(p, q)| p != q)
                .map(|(p, q)| s[p][q] * s[p][q])
                .sum::<f64>()
                .sqrt();
            if off <= 1e-15 * frob {
                break;
            }
            for p in 0..n.saturating_sub(1) {
                for q in p + 1..n {
                    if s[p][q] == 0.0 {
                        continue;
                    }
                    let tau = (s[q][q] - s[p][p]) / (2.0 * s[p][q]);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (tau - (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let sn = t * c;
                    for i in 0..n {
                        let sip = s[i][p];
                        let siq = s[i][q];
                        s[i][p] = c * sip - sn * siq;
                        s[i][q] = sn * sip + c * siq;
                    }
                    for i in 0..n {
                        let spi = s[p][i];
                        let sqi = s[q][i];
                        s[p][i] = c * spi - sn * sqi;
                        s[q][i] = sn * spi + c * sqi;
                    }
                }
            }
        }
    }
    let mut svs: Vec<f64> = (0..n).map(|i| s[i][i].max(0.0).sqrt()).collect();
    svs.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    svs
}

/// Naive layered forward pass reading the weights directly.
#[allow(clippy::needless_range_loop)]
fn reference_net_forward(layers: &[Matrix], x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    for (idx, w) in layers.iter().enumerate() {
        if idx > 0 {
            for e in v.iter_mut() {
                if *e < 0.0 {
                    *e = 0.0;
                }
            }
        }
        let mut next = vec![0.0; w.rows()];
        for (r, out) in next.iter_mut().enumerate() {
            for c in 0..w.cols() {
                *out += w.get(r, c) * v[c];
            }
        }
        v = next;
    }
    v
}

/// Dense recomputation of the mixture: every expert evaluated, the gate
/// rebuilt from scratch (repeated argmax top-k with low-index ties, direct
/// softmax ratio), and the weighted sum taken over all experts.
pub fn reference_mixture(model: &SMoEModel, x: &[f64]) -> f64 {
    let logits = reference_net_forward(model.router().layers(), x);
    let t = logits.len();
    let k = model.selected_count();

    let mut selected = Vec::with_capacity(k);
    let mut taken = vec![false; t];
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for j in 0..t {
            if taken[j] {
                continue;
            }
            match best {
                None => best = Some(j),
                Some(b) if logits[j] > logits[b] => best = Some(j),
                _ => {}
            }
        }
        let b = best.expect("k <= T");
        taken[b] = true;
        selected.push(b);
    }

    let denom: f64 = selected.iter().map(|&j| logits[j].exp()).sum();
    let mut prediction = 0.0;
    for j in 0..t {
        let weight = if taken[j] { logits[j].exp() / denom } else { 0.0 };
        let h = reference_net_forward(model.experts()[j].layers(), x)[0];
        prediction += weight * h;
    }
    prediction
}

/// Literal transcription of the bound's displayed expression.
pub fn reference_bound_total(
    c: f64,
    r: f64,
    d_n: f64,
    m: f64,
    t: f64,
    k: f64,
    delta: f64,
) -> f64 {
    4.0 * c * r
        + 2.0
            * ((2.0 * k * d_n * (1.0 + (t / k).ln()) + d_n * (2.0 * m).ln() + (4.0 / delta).ln())
                / (2.0 * m))
                .sqrt()
}

/// Literal transcription of the norm-budget complexity bound, with the
/// fractional powers arranged as displayed.
pub fn reference_bartlett(c: f64, spectral: &[f64], norms21: &[f64], m: f64) -> f64 {
    let prod: f64 = spectral.iter().product();
    let sum: f64 = spectral
        .iter()
        .zip(norms21)
        .map(|(k, b)| b.powf(2.0 / 3.0) / k.powf(2.0 / 3.0))
        .sum();
    c / m.sqrt() * prod * sum.powf(3.0 / 2.0)
}
