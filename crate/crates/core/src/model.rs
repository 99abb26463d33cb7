//! Sparse mixture-of-experts model: ReLU feed-forward experts, a router
//! network, top-k selection with masked softmax, and the sparse-pattern
//! indicator of the gate's support.
//!
//! The predictor is `f(x) = sum_j a(x)_j h_j(x)` where the gate `a(x)` has
//! exactly `k` nonzero entries: the router logits `g(x)` are computed, the
//! top-k logits are kept (ties broken toward the lowest index), and a softmax
//! over the kept logits produces the weights. Only the selected experts are
//! evaluated on the forward pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::risk::Predictor;

/// Tolerance on the gate-weight sum; softmax normalization is exact up to
/// float rounding.
pub const GATE_SUM_TOLERANCE: f64 = 1e-9;

/// A bias-free feed-forward network `W_r relu(W_{r-1} relu(... W_1 x))`,
/// with no activation after the final layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Matrix>", into = "Vec<Matrix>")]
pub struct DenseNet {
    layers: Vec<Matrix>,
}

impl TryFrom<Vec<Matrix>> for DenseNet {
    type Error = Error;

    fn try_from(layers: Vec<Matrix>) -> Result<Self> {
        DenseNet::new(layers)
    }
}

impl From<DenseNet> for Vec<Matrix> {
    fn from(net: DenseNet) -> Self {
        net.layers
    }
}

impl DenseNet {
    pub fn new(layers: Vec<Matrix>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::input("network needs at least one layer"));
        }
        for i in 1..layers.len() {
            if layers[i].cols() != layers[i - 1].rows() {
                return Err(Error::input(format!(
                    "layer {} expects input dimension {}, previous layer outputs {}",
                    i,
                    layers[i].cols(),
                    layers[i - 1].rows()
                )));
            }
        }
        Ok(DenseNet { layers })
    }

    /// Layer sizes `dims = [input, hidden..., output]`, entries uniform in
    /// `[-s, s]` with `s = init_scale / sqrt(fan_in)`.
    pub fn random(dims: &[usize], init_scale: f64, rng: &mut impl Rng) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::input("need at least an input and an output dimension"));
        }
        if !(init_scale.is_finite() && init_scale > 0.0) {
            return Err(Error::input("init scale must be positive and finite"));
        }
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = init_scale / (fan_in as f64).sqrt();
            layers.push(Matrix::random_uniform(fan_out, fan_in, limit, rng)?);
        }
        DenseNet::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].rows()
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [Matrix] {
        &mut self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|w| w.rows() * w.cols()).sum()
    }

    /// Every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        DenseNet::new(self.layers.iter().map(|w| w.scaled(factor)).collect())
    }

    /// Alternating matrix multiply / ReLU; no activation after the last layer.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::input(format!(
                "input has dimension {}, network expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut v = self.layers[0].matvec(x);
        for w in &self.layers[1..] {
            for e in v.iter_mut() {
                *e = e.max(0.0);
            }
            v = w.matvec(&v);
        }
        Ok(v)
    }

    /// Forward pass that retains per-layer inputs and pre-activations for
    /// backpropagation. `inputs[i]` feeds layer `i`; `pres[i]` is its raw
    /// output before any activation.
    pub(crate) fn forward_cached(&self, x: &[f64]) -> Result<DenseCache> {
        if x.len() != self.input_dim() {
            return Err(Error::input("dimension mismatch in cached forward"));
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pres = Vec::with_capacity(self.layers.len());
        let mut v = x.to_vec();
        for (i, w) in self.layers.iter().enumerate() {
            if i > 0 {
                for e in v.iter_mut() {
                    *e = e.max(0.0);
                }
            }
            let pre = w.matvec(&v);
            inputs.push(v);
            pres.push(pre.clone());
            v = pre;
        }
        Ok(DenseCache { inputs, pres })
    }
}

/// Cached activations from one forward pass, consumed by backprop.
pub(crate) struct DenseCache {
    inputs: Vec<Vec<f64>>,
    pres: Vec<Vec<f64>>,
}

impl DenseCache {
    /// Network output: the final pre-activation.
    pub fn output(&self) -> &[f64] {
        &self.pres[self.pres.len() - 1]
    }

    /// The (post-activation) vector fed into layer `i`.
    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i]
    }

    /// Layer `i`'s raw output before any activation.
    pub fn pre(&self, i: usize) -> &[f64] {
        &self.pres[i]
    }
}

/// The k-sparse normalized routing weights paired with their support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateVector {
    weights: Vec<f64>,
    selected: Vec<usize>,
}

impl GateVector {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Selected expert indices in ascending order.
    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn expert_count(&self) -> usize {
        self.weights.len()
    }

    pub fn sparsity(&self) -> usize {
        self.selected.len()
    }

    /// Binary support indicator of the gate.
    pub fn pattern(&self) -> SparsePattern {
        SparsePattern {
            mask: self.weights.iter().map(|&w| w != 0.0).collect(),
        }
    }
}

/// Binary mask marking which experts received nonzero gate weight.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparsePattern {
    mask: Vec<bool>,
}

impl SparsePattern {
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn ones(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}

/// Indices of the `k` largest logits; ties broken toward the lowest index.
/// The result is sorted ascending.
pub fn topk_select(logits: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > logits.len() {
        return Err(Error::input(format!(
            "k must satisfy 1 <= k <= {}, got {k}",
            logits.len()
        )));
    }
    if !logits.iter().all(|v| v.is_finite()) {
        return Err(Error::input("logits must be finite"));
    }
    let mut order: Vec<usize> = (0..logits.len()).collect();
    order.sort_by(|&a, &b| {
        logits[b]
            .partial_cmp(&logits[a])
            .expect("finite logits compare")
            .then(a.cmp(&b))
    });
    let mut selected = order[..k].to_vec();
    selected.sort_unstable();
    Ok(selected)
}

/// Softmax over the selected logits; exact zeros elsewhere.
pub fn masked_softmax(logits: &[f64], selected: &[usize]) -> Result<GateVector> {
    if selected.is_empty() {
        return Err(Error::input("selection must be nonempty"));
    }
    let mut seen = vec![false; logits.len()];
    for &j in selected {
        if j >= logits.len() {
            return Err(Error::input(format!("selected index {j} out of range")));
        }
        if seen[j] {
            return Err(Error::input(format!("selected index {j} repeated")));
        }
        seen[j] = true;
    }
    // subtract the selected max so the exponentials cannot overflow
    let max = selected
        .iter()
        .map(|&j| logits[j])
        .fold(f64::NEG_INFINITY, f64::max);
    let mut weights = vec![0.0; logits.len()];
    let mut sum = 0.0;
    for &j in selected {
        let e = (logits[j] - max).exp();
        weights[j] = e;
        sum += e;
    }
    for &j in selected {
        weights[j] /= sum;
    }
    let mut selected = selected.to_vec();
    selected.sort_unstable();
    Ok(GateVector { weights, selected })
}

/// `T` single-output expert networks, a router with `T` outputs, and the
/// number `k` of experts selected per input.
#[derive(Debug, Clone, PartialEq)]
pub struct SMoEModel {
    experts: Vec<DenseNet>,
    router: DenseNet,
    k: usize,
}

/// Wire format: `{d, T, k, router, experts}` with row-major matrices.
#[derive(Serialize, Deserialize)]
struct ModelJson {
    d: usize,
    #[serde(rename = "T")]
    expert_count: usize,
    k: usize,
    router: Vec<Matrix>,
    experts: Vec<Vec<Matrix>>,
}

impl SMoEModel {
    pub fn new(experts: Vec<DenseNet>, router: DenseNet, k: usize) -> Result<Self> {
        if experts.is_empty() {
            return Err(Error::input("need at least one expert"));
        }
        let t = experts.len();
        if k == 0 || k > t {
            return Err(Error::input(format!("k must satisfy 1 <= k <= {t}, got {k}")));
        }
        let d = router.input_dim();
        if router.output_dim() != t {
            return Err(Error::input(format!(
                "router outputs {} logits for {t} experts",
                router.output_dim()
            )));
        }
        for (j, h) in experts.iter().enumerate() {
            if h.input_dim() != d {
                return Err(Error::input(format!(
                    "expert {j} expects dimension {}, router expects {d}",
                    h.input_dim()
                )));
            }
            if h.output_dim() != 1 {
                return Err(Error::input(format!(
                    "expert {j} must output a single value, outputs {}",
                    h.output_dim()
                )));
            }
        }
        Ok(SMoEModel { experts, router, k })
    }

    /// Random model: experts of shape `[d, expert_hidden..., 1]`, router of
    /// shape `[d, router_hidden..., T]`.
    pub fn random(
        feature_dim: usize,
        expert_count: usize,
        k: usize,
        expert_hidden: &[usize],
        router_hidden: &[usize],
        init_scale: f64,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut expert_dims = vec![feature_dim];
        expert_dims.extend_from_slice(expert_hidden);
        expert_dims.push(1);
        let mut router_dims = vec![feature_dim];
        router_dims.extend_from_slice(router_hidden);
        router_dims.push(expert_count);

        let experts = (0..expert_count)
            .map(|_| DenseNet::random(&expert_dims, init_scale, &mut rng))
            .collect::<Result<Vec<_>>>()?;
        let router = DenseNet::random(&router_dims, init_scale, &mut rng)?;
        SMoEModel::new(experts, router, k)
    }

    pub fn feature_dim(&self) -> usize {
        self.router.input_dim()
    }

    pub fn expert_count(&self) -> usize {
        self.experts.len()
    }

    pub fn selected_count(&self) -> usize {
        self.k
    }

    pub fn experts(&self) -> &[DenseNet] {
        &self.experts
    }

    pub fn router(&self) -> &DenseNet {
        &self.router
    }

    pub(crate) fn experts_mut(&mut self) -> &mut [DenseNet] {
        &mut self.experts
    }

    pub(crate) fn router_mut(&mut self) -> &mut DenseNet {
        &mut self.router
    }

    /// Mixture prediction and the gate that produced it. Only the `k`
    /// selected experts are evaluated.
    pub fn forward(&self, x: &[f64]) -> Result<(f64, GateVector)> {
        let (pred, gate, _) = self.forward_counted(x)?;
        Ok((pred, gate))
    }

    /// `forward` plus the number of expert evaluations performed, so tests
    /// can hold the sparse-compute contract to account.
    pub fn forward_counted(&self, x: &[f64]) -> Result<(f64, GateVector, usize)> {
        let logits = self.router.forward(x)?;
        let selected = topk_select(&logits, self.k)?;
        let gate = masked_softmax(&logits, &selected)?;
        let mut prediction = 0.0;
        let mut evaluations = 0;
        for &j in gate.selected() {
            let h = self.experts[j].forward(x)?[0];
            evaluations += 1;
            prediction += gate.weights()[j] * h;
        }
        Ok((prediction, gate, evaluations))
    }

    pub fn to_json(&self) -> String {
        let doc = ModelJson {
            d: self.feature_dim(),
            expert_count: self.expert_count(),
            k: self.k,
            router: self.router.layers().to_vec(),
            experts: self
                .experts
                .iter()
                .map(|h| h.layers().to_vec())
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelJson =
            serde_json::from_str(text).map_err(|e| Error::parse(format!("model json: {e}")))?;
        let experts = doc
            .experts
            .into_iter()
            .map(DenseNet::new)
            .collect::<Result<Vec<_>>>()?;
        let router = DenseNet::new(doc.router)?;
        let model = SMoEModel::new(experts, router, doc.k)?;
        if model.feature_dim() != doc.d {
            return Err(Error::parse(format!(
                "declared dimension {} does not match router input {}",
                doc.d,
                model.feature_dim()
            )));
        }
        if model.expert_count() != doc.expert_count {
            return Err(Error::parse(format!(
                "declared expert count {} does not match {} experts",
                doc.expert_count,
                model.expert_count()
            )));
        }
        Ok(model)
    }
}

impl Predictor for SMoEModel {
    fn input_dim(&self) -> usize {
        self.feature_dim()
    }

    fn predict(&self, x: &[f64]) -> f64 {
        let (pred, _) = self.forward(x).expect("dimension checked by caller");
        pred
    }
}
