use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ndiff::matrix::gemm;
use crate::ndiff::{
    uniform_init, Activation, DenseParams, GruCache, GruParams, Matrix, Parameters, Real,
};

use super::spec::{CombineMode, ModelSpec, Variant};
use super::ModelError;

/// Backbone plus task-specific parts of one architecture variant.
///
/// Backbone: dense(ReLU) → dense(ReLU) → GRU → dense(ReLU), applied day by
/// day. Heads are linear maps from the backbone features to the three LTE
/// channels. Embedding variants combine a task vector with the normalized
/// input features before the first dense layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Network<S> {
    spec: ModelSpec,
    pub fc1: DenseParams<S>,
    pub fc2: DenseParams<S>,
    pub gru: GruParams<S>,
    pub fc3: DenseParams<S>,
    pub heads: Vec<DenseParams<S>>,
    /// `base_tasks × embed_dim` table, embedding variants only.
    pub embedding: Option<Matrix<S>>,
    /// One `1 × base_tasks` coefficient row per derived task.
    pub derived: Vec<Matrix<S>>,
}

/// Activations of a batched forward pass.
///
/// Rows are batch-major with every season padded to `steps` days: row
/// `b * steps + t` is day `t` of season `b`.
#[derive(Clone, Debug)]
pub struct ForwardCache<S> {
    pub steps: usize,
    pub lengths: Vec<usize>,
    pub tasks: Vec<usize>,
    pub raw: Matrix<S>,
    pub combined: Matrix<S>,
    pub a1: Matrix<S>,
    pub a2: Matrix<S>,
    pub gru: GruCache<S>,
    pub a3: Matrix<S>,
    pub out: Matrix<S>,
}

impl<S: Real> ForwardCache<S> {
    pub fn batch(&self) -> usize {
        self.lengths.len()
    }

    /// Which ReLU units are active on unpadded rows. Two parameter settings
    /// with the same pattern lie in the same smooth piece of the loss.
    pub fn relu_pattern(&self) -> Vec<bool> {
        let mut pattern = Vec::new();
        for m in [&self.a1, &self.a2, &self.a3] {
            for (b, &len) in self.lengths.iter().enumerate() {
                for t in 0..len {
                    pattern.extend(m.row(b * self.steps + t).iter().map(|v| *v > S::zero()));
                }
            }
        }
        pattern
    }

    /// Predictions of season `b`, trimmed to its true length.
    pub fn season_output(&self, b: usize) -> Matrix<S> {
        let start = b * self.steps;
        let cols = self.out.cols();
        let data = self.out.as_slice()[start * cols..(start + self.lengths[b]) * cols].to_vec();
        Matrix::from_vec(self.lengths[b], cols, data).expect("row block")
    }
}

impl<S: Real> Network<S> {
    /// Seeded initialization: uniform(±1/√fan_in) weights, zero biases.
    ///
    /// Draw order is backbone, heads, embedding, so variants sharing a
    /// backbone shape and seed share backbone (and first-head) weights.
    pub fn new(spec: ModelSpec, seed: u64) -> Result<Self, ModelError> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [d1, d2, d3] = spec.fc_dims;
        let fc1 = DenseParams::init(spec.backbone_input_dim(), d1, &mut rng);
        let fc2 = DenseParams::init(d1, d2, &mut rng);
        let gru = GruParams::init(d2, spec.gru_hidden, &mut rng);
        let fc3 = DenseParams::init(spec.gru_hidden, d3, &mut rng);
        let heads = (0..spec.n_heads())
            .map(|_| DenseParams::init(d3, spec.output_dim, &mut rng))
            .collect();
        let embedding = spec.variant.uses_embedding().then(|| {
            uniform_init(
                spec.base_tasks(),
                spec.embed_dim,
                spec.base_tasks(),
                &mut rng,
            )
        });
        let derived = (0..spec.derived_tasks)
            .map(|_| Matrix::zeros(1, spec.base_tasks()))
            .collect();
        Ok(Self {
            spec,
            fc1,
            fc2,
            gru,
            fc3,
            heads,
            embedding,
            derived,
        })
    }

    /// Same shapes, all zeros. Used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        let mut z = self.clone();
        z.zero_();
        z
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub(crate) fn spec_mut(&mut self) -> &mut ModelSpec {
        &mut self.spec
    }

    pub fn variant(&self) -> Variant {
        self.spec.variant
    }

    fn check_task(&self, task: usize) -> Result<(), ModelError> {
        if task < self.spec.n_tasks {
            Ok(())
        } else {
            Err(ModelError::TaskOutOfRange {
                task,
                n_tasks: self.spec.n_tasks,
            })
        }
    }

    /// Embedding vector of `task`; derived tasks combine the table rows.
    pub fn task_embedding(&self, task: usize) -> Result<Option<Vec<S>>, ModelError> {
        self.check_task(task)?;
        let Some(table) = &self.embedding else {
            return Ok(None);
        };
        let base = self.spec.base_tasks();
        if task < base {
            return Ok(Some(table.row(task).to_vec()));
        }
        let alpha = &self.derived[task - base];
        let mut e = vec![S::zero(); table.cols()];
        for (j, &a) in alpha.as_slice().iter().enumerate() {
            for (ek, &tk) in e.iter_mut().zip(table.row(j)) {
                *ek += a * tk;
            }
        }
        Ok(Some(e))
    }

    fn head_index(&self, task: usize) -> usize {
        match self.spec.variant {
            Variant::MultiH => task,
            _ => 0,
        }
    }

    /// Runs a batch of seasons. `inputs[b]` is `T_b × input_dim`.
    pub fn forward(
        &self,
        inputs: &[&Matrix<S>],
        tasks: &[usize],
    ) -> Result<ForwardCache<S>, ModelError> {
        if inputs.is_empty() || inputs.len() != tasks.len() {
            return Err(ModelError::EmptyBatch);
        }
        let input_dim = self.spec.input_dim;
        for (x, &task) in inputs.iter().zip(tasks) {
            self.check_task(task)?;
            if x.cols() != input_dim || x.rows() == 0 {
                return Err(ModelError::Shape(
                    crate::ndiff::NumericError::ShapeMismatch {
                        context: "season features".into(),
                        expected: (x.rows().max(1), input_dim),
                        actual: x.shape(),
                    },
                ));
            }
        }
        let batch = inputs.len();
        let steps = inputs.iter().map(|x| x.rows()).max().unwrap_or(0);
        let lengths: Vec<usize> = inputs.iter().map(|x| x.rows()).collect();

        let mut raw = Matrix::zeros(batch * steps, input_dim);
        for (b, x) in inputs.iter().enumerate() {
            let start = b * steps * input_dim;
            raw.as_mut_slice()[start..start + x.len()].copy_from_slice(x.as_slice());
        }

        let combined = match self.spec.variant.combine_mode() {
            None => raw.clone(),
            Some(mode) => {
                let mut combined = Matrix::zeros(batch * steps, self.spec.backbone_input_dim());
                for (b, &task) in tasks.iter().enumerate() {
                    let e = self.task_embedding(task)?.expect("embedding variant");
                    for t in 0..steps {
                        let row = b * steps + t;
                        let c = embed_combine(raw.row(row), &e, mode)?;
                        combined.row_mut(row).copy_from_slice(&c);
                    }
                }
                combined
            }
        };

        let a1 = self.fc1.forward_rows(&combined, Activation::Relu);
        let a2 = self.fc2.forward_rows(&a1, Activation::Relu);
        let gru = self.gru.forward_sequence(&a2, batch, steps);
        let a3 = self.fc3.forward_rows(&gru.h, Activation::Relu);

        let out_dim = self.spec.output_dim;
        let mut out = Matrix::zeros(batch * steps, out_dim);
        for (b, &task) in tasks.iter().enumerate() {
            let head = &self.heads[self.head_index(task)];
            gemm(
                S::one(),
                a3.strided_rows(b * steps, 1, steps),
                head.weight.view().t(),
                S::zero(),
                out.strided_rows_mut(b * steps, 1, steps),
            );
            for t in 0..steps {
                for (o, &bias) in out
                    .row_mut(b * steps + t)
                    .iter_mut()
                    .zip(head.bias.as_slice())
                {
                    *o += bias;
                }
            }
        }

        Ok(ForwardCache {
            steps,
            lengths,
            tasks: tasks.to_vec(),
            raw,
            combined,
            a1,
            a2,
            gru,
            a3,
            out,
        })
    }

    /// `T × 3` predictions (LTE10, LTE50, LTE90) for one season.
    pub fn predict(&self, x: &Matrix<S>, task: usize) -> Result<Matrix<S>, ModelError> {
        Ok(self.forward(&[x], &[task])?.season_output(0))
    }

    /// Backbone output features (`T × fc_dims[2]`) for one season.
    pub fn backbone_features(&self, x: &Matrix<S>, task: usize) -> Result<Matrix<S>, ModelError> {
        let cache = self.forward(&[x], &[task])?;
        let len = cache.lengths[0];
        let cols = cache.a3.cols();
        Ok(
            Matrix::from_vec(len, cols, cache.a3.as_slice()[..len * cols].to_vec())
                .expect("row block"),
        )
    }

    /// Reverse pass. `dout` is the loss gradient for every output row
    /// (zero on padding). With `heads_only`, only head gradients are
    /// computed and every other block of the result stays zero.
    pub fn backward(
        &self,
        cache: &ForwardCache<S>,
        dout: &Matrix<S>,
        heads_only: bool,
    ) -> Network<S> {
        let mut grad = self.zeros_like();
        let steps = cache.steps;
        let batch = cache.batch();
        let d3 = self.spec.fc_dims[2];

        let mut da3 = Matrix::zeros(batch * steps, d3);
        for (b, &task) in cache.tasks.iter().enumerate() {
            let hi = self.head_index(task);
            let head = &self.heads[hi];
            let head_grad = &mut grad.heads[hi];
            let rows = b * steps;
            gemm(
                S::one(),
                dout.strided_rows(rows, 1, steps).t(),
                cache.a3.strided_rows(rows, 1, steps),
                S::one(),
                head_grad.weight.view_mut(),
            );
            for t in 0..steps {
                for (g, &d) in head_grad
                    .bias
                    .as_mut_slice()
                    .iter_mut()
                    .zip(dout.row(rows + t))
                {
                    *g += d;
                }
            }
            if !heads_only {
                gemm(
                    S::one(),
                    dout.strided_rows(rows, 1, steps),
                    head.weight.view(),
                    S::zero(),
                    da3.strided_rows_mut(rows, 1, steps),
                );
            }
        }
        if heads_only {
            return grad;
        }

        let dh = self
            .fc3
            .backward_rows(
                &cache.gru.h,
                &cache.a3,
                &mut da3,
                Activation::Relu,
                &mut grad.fc3,
                true,
            )
            .expect("input grad");
        let mut da2 = self
            .gru
            .backward_sequence(&cache.a2, &cache.gru, &dh, &mut grad.gru, true)
            .expect("input grad");
        let mut da1 = self
            .fc2
            .backward_rows(
                &cache.a1,
                &cache.a2,
                &mut da2,
                Activation::Relu,
                &mut grad.fc2,
                true,
            )
            .expect("input grad");
        let need_input_grad = self.embedding.is_some();
        let dcombined = self.fc1.backward_rows(
            &cache.combined,
            &cache.a1,
            &mut da1,
            Activation::Relu,
            &mut grad.fc1,
            need_input_grad,
        );

        if let (Some(mode), Some(dx)) = (self.spec.variant.combine_mode(), dcombined) {
            self.embedding_backward(cache, &dx, mode, &mut grad);
        }
        grad
    }

    fn embedding_backward(
        &self,
        cache: &ForwardCache<S>,
        dx: &Matrix<S>,
        mode: CombineMode,
        grad: &mut Network<S>,
    ) {
        let input_dim = self.spec.input_dim;
        let embed_dim = self.spec.embed_dim;
        let base = self.spec.base_tasks();
        let table = self.embedding.as_ref().expect("embedding variant");
        for (b, &task) in cache.tasks.iter().enumerate() {
            let mut de = vec![S::zero(); embed_dim];
            for t in 0..cache.lengths[b] {
                let row = b * cache.steps + t;
                let d = dx.row(row);
                match mode {
                    CombineMode::Add => de.iter_mut().zip(d).for_each(|(g, &v)| *g += v),
                    CombineMode::Mult => {
                        for ((g, &v), &x) in de.iter_mut().zip(d).zip(cache.raw.row(row)) {
                            *g += v * x;
                        }
                    }
                    CombineMode::Concat => de
                        .iter_mut()
                        .zip(&d[input_dim..])
                        .for_each(|(g, &v)| *g += v),
                }
            }
            let gtable = grad.embedding.as_mut().expect("embedding variant");
            if task < base {
                for (g, &v) in gtable.row_mut(task).iter_mut().zip(&de) {
                    *g += v;
                }
            } else {
                let k = task - base;
                let alpha = self.derived[k].as_slice().to_vec();
                for j in 0..base {
                    let dot: S = table.row(j).iter().zip(&de).map(|(&e, &g)| e * g).sum();
                    let ga = grad.derived[k].get(0, j) + dot;
                    grad.derived[k].set(0, j, ga);
                    for (g, &v) in gtable.row_mut(j).iter_mut().zip(&de) {
                        *g += alpha[j] * v;
                    }
                }
            }
        }
    }

    /// Converts every parameter to another precision.
    pub fn cast<T: Real>(&self) -> Network<T> {
        let dense = |d: &DenseParams<S>| DenseParams {
            weight: d.weight.cast(),
            bias: d.bias.cast(),
        };
        Network {
            spec: self.spec.clone(),
            fc1: dense(&self.fc1),
            fc2: dense(&self.fc2),
            gru: GruParams {
                w_input: self.gru.w_input.cast(),
                w_hidden: self.gru.w_hidden.cast(),
                b_input: self.gru.b_input.cast(),
                b_hidden_n: self.gru.b_hidden_n.cast(),
            },
            fc3: dense(&self.fc3),
            heads: self.heads.iter().map(dense).collect(),
            embedding: self.embedding.as_ref().map(|m| m.cast()),
            derived: self.derived.iter().map(|m| m.cast()).collect(),
        }
    }

    pub(crate) fn from_parts(
        spec: ModelSpec,
        blocks: Vec<(String, Matrix<S>)>,
    ) -> Result<Self, ModelError> {
        let mut net = Network::new(spec, 0)?;
        let expected: Vec<(String, (usize, usize))> = net
            .blocks()
            .into_iter()
            .map(|(n, m)| (n, m.shape()))
            .collect();
        if expected.len() != blocks.len() {
            return Err(ModelError::Checkpoint(format!(
                "expected {} parameter blocks, found {}",
                expected.len(),
                blocks.len()
            )));
        }
        for ((name, shape), (found, m)) in expected.iter().zip(&blocks) {
            if name != found || *shape != m.shape() {
                return Err(ModelError::Checkpoint(format!(
                    "block `{found}` {:?} does not match expected `{name}` {shape:?}",
                    m.shape()
                )));
            }
        }
        for ((_, dst), (_, src)) in net.blocks_mut().into_iter().zip(blocks) {
            *dst = src;
        }
        Ok(net)
    }
}

/// Block names start with `backbone.`, `head.<k>.`, `embedding` or `derived.<k>`.
impl<S: Real> Parameters<S> for Network<S> {
    fn blocks(&self) -> Vec<(String, &Matrix<S>)> {
        let mut out = Vec::new();
        self.fc1.push_blocks("backbone.fc1", &mut out);
        self.fc2.push_blocks("backbone.fc2", &mut out);
        self.gru.push_blocks("backbone.gru", &mut out);
        self.fc3.push_blocks("backbone.fc3", &mut out);
        for (k, h) in self.heads.iter().enumerate() {
            h.push_blocks(&format!("head.{k}"), &mut out);
        }
        if let Some(e) = &self.embedding {
            out.push(("embedding".to_string(), e));
        }
        for (k, d) in self.derived.iter().enumerate() {
            out.push((format!("derived.{k}"), d));
        }
        out
    }

    fn blocks_mut(&mut self) -> Vec<(String, &mut Matrix<S>)> {
        let mut out = Vec::new();
        self.fc1.push_blocks_mut("backbone.fc1", &mut out);
        self.fc2.push_blocks_mut("backbone.fc2", &mut out);
        self.gru.push_blocks_mut("backbone.gru", &mut out);
        self.fc3.push_blocks_mut("backbone.fc3", &mut out);
        for (k, h) in self.heads.iter_mut().enumerate() {
            h.push_blocks_mut(&format!("head.{k}"), &mut out);
        }
        if let Some(e) = &mut self.embedding {
            out.push(("embedding".to_string(), e));
        }
        for (k, d) in self.derived.iter_mut().enumerate() {
            out.push((format!("derived.{k}"), d));
        }
        out
    }
}

/// Combines one day's input features with a task embedding.
pub fn embed_combine<S: Real>(x: &[S], e: &[S], mode: CombineMode) -> Result<Vec<S>, ModelError> {
    match mode {
        CombineMode::Concat => Ok(x.iter().chain(e).copied().collect()),
        CombineMode::Add | CombineMode::Mult if x.len() != e.len() => Err(ModelError::Shape(
            crate::ndiff::NumericError::ShapeMismatch {
                context: "task embedding".into(),
                expected: (1, x.len()),
                actual: (1, e.len()),
            },
        )),
        CombineMode::Add => Ok(x.iter().zip(e).map(|(&a, &b)| a + b).collect()),
        CombineMode::Mult => Ok(x.iter().zip(e).map(|(&a, &b)| a * b).collect()),
    }
}
