//! The denoiser contract and a small message-passing network that satisfies it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::BipartiteGraph;
use crate::spectral::NodeEmbeddings;

use super::edm::{NoiseConfig, Preconditioning};
use super::features::FeatureTriple;

/// Everything a denoiser may condition on besides the noisy features.
#[derive(Debug, Clone, Copy)]
pub struct DenoiseContext<'a> {
    /// The expanded graph whose nodes and edges carry the features.
    pub host: &'a BipartiteGraph,
    pub embeddings: &'a NodeEmbeddings,
    /// Target number of nodes of the final hypergraph.
    pub n_target: usize,
    /// Fraction of the host's left nodes that come from duplication.
    pub rho_hat: f64,
}

/// Maps noisy features at noise level `sigma` to an estimate of the clean ones.
/// Output lengths match the input.
pub trait Denoiser: Sync {
    fn denoise(&self, x: &FeatureTriple, sigma: f64, ctx: &DenoiseContext<'_>) -> FeatureTriple;
}

/// Returns the same features whatever the input.
#[derive(Debug, Clone)]
pub struct ConstantDenoiser(pub FeatureTriple);

impl Denoiser for ConstantDenoiser {
    fn denoise(&self, _x: &FeatureTriple, _sigma: f64, _ctx: &DenoiseContext<'_>) -> FeatureTriple {
        self.0.clone()
    }
}

/// Predicts all zeros.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroDenoiser;

impl Denoiser for ZeroDenoiser {
    fn denoise(&self, x: &FeatureTriple, _sigma: f64, _ctx: &DenoiseContext<'_>) -> FeatureTriple {
        x.map(|_| 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden: usize,
    /// Message-passing rounds.
    pub rounds: usize,
    /// Number of spectral embedding coordinates; 0 means random embeddings of width 1.
    pub spectral_k: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            hidden: 32,
            rounds: 4,
            spectral_k: crate::spectral::DEFAULT_SPECTRAL_FEATURES,
        }
    }
}

impl ModelConfig {
    pub fn embedding_width(&self) -> usize {
        self.spectral_k.max(1)
    }

    /// Width of the per-node input: scaled value, noise level, log target size, ρ̂, embedding.
    fn node_input(&self) -> usize {
        4 + self.embedding_width()
    }

    /// Edge input: the same four scalars plus both endpoint embeddings.
    fn edge_input(&self) -> usize {
        4 + 2 * self.embedding_width()
    }
}

/// A named contiguous slice of the flat parameter vector, row-major `rows x cols`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub offset: usize,
    pub rows: usize,
    pub cols: usize,
    /// Fan-in used for initialization.
    pub fan_in: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

// Block order within the layout.
const ENC_L_W: usize = 0;
const ENC_L_B: usize = 1;
const ENC_R_W: usize = 2;
const ENC_R_B: usize = 3;
const ENC_E_W: usize = 4;
const ENC_E_B: usize = 5;
const ROUND_BASE: usize = 6;
const PER_ROUND: usize = 10;
// Offsets inside a round.
const MP_A: usize = 0;
const MP_B: usize = 1;
const MP_C: usize = 2;
const MP_EB: usize = 3;
const MP_P: usize = 4;
const MP_Q: usize = 5;
const MP_LB: usize = 6;
const MP_R: usize = 7;
const MP_S: usize = 8;
const MP_RB: usize = 9;

/// Parameter layout of a [`ReferenceDenoiser`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    pub blocks: Vec<Block>,
    pub total: usize,
}

impl Layout {
    pub fn new(cfg: &ModelConfig) -> Self {
        let h = cfg.hidden;
        let (dn, de) = (cfg.node_input(), cfg.edge_input());
        let mut spec: Vec<(String, usize, usize, usize)> = vec![
            ("enc_left.w".into(), h, dn, dn),
            ("enc_left.b".into(), h, 1, dn),
            ("enc_right.w".into(), h, dn, dn),
            ("enc_right.b".into(), h, 1, dn),
            ("enc_edge.w".into(), h, de, de),
            ("enc_edge.b".into(), h, 1, de),
        ];
        for t in 0..cfg.rounds {
            for name in ["edge_self", "edge_left", "edge_right"] {
                spec.push((format!("round{t}.{name}"), h, h, 3 * h));
            }
            spec.push((format!("round{t}.edge_bias"), h, 1, 3 * h));
            spec.push((format!("round{t}.left_self"), h, h, 2 * h));
            spec.push((format!("round{t}.left_agg"), h, h, 2 * h));
            spec.push((format!("round{t}.left_bias"), h, 1, 2 * h));
            spec.push((format!("round{t}.right_self"), h, h, 2 * h));
            spec.push((format!("round{t}.right_agg"), h, h, 2 * h));
            spec.push((format!("round{t}.right_bias"), h, 1, 2 * h));
        }
        for side in ["left", "right", "edge"] {
            spec.push((format!("head_{side}.w"), 1, h, h));
            spec.push((format!("head_{side}.b"), 1, 1, h));
        }
        let mut offset = 0;
        let blocks = spec
            .into_iter()
            .map(|(name, rows, cols, fan_in)| {
                let b = Block {
                    name,
                    offset,
                    rows,
                    cols,
                    fan_in,
                };
                offset += rows * cols;
                b
            })
            .collect();
        Self {
            blocks,
            total: offset,
        }
    }

    fn round(&self, t: usize, which: usize) -> &Block {
        &self.blocks[ROUND_BASE + PER_ROUND * t + which]
    }

    fn head(&self, rounds: usize, side: usize) -> (&Block, &Block) {
        let base = ROUND_BASE + PER_ROUND * rounds + 2 * side;
        (&self.blocks[base], &self.blocks[base + 1])
    }
}

/// `out = W x + b` for row-major `W` with `out.len()` rows.
fn affine(w: &[f64], b: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        *o = b[r] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += W x`.
fn gemv_add(w: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (r, o) in out.iter_mut().enumerate() {
        let row = &w[r * cols..(r + 1) * cols];
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += Wᵀ g` for `W` with `g.len()` rows.
fn gemv_t_add(w: &[f64], g: &[f64], out: &mut [f64]) {
    let cols = out.len();
    for (r, &gr) in g.iter().enumerate() {
        if gr == 0.0 {
            continue;
        }
        let row = &w[r * cols..(r + 1) * cols];
        for (o, a) in out.iter_mut().zip(row) {
            *o += gr * a;
        }
    }
}

/// `dw += g xᵀ`.
fn outer_add(dw: &mut [f64], g: &[f64], x: &[f64]) {
    let cols = x.len();
    for (r, &gr) in g.iter().enumerate() {
        if gr == 0.0 {
            continue;
        }
        for (d, xi) in dw[r * cols..(r + 1) * cols].iter_mut().zip(x) {
            *d += gr * xi;
        }
    }
}

fn add_into(acc: &mut [f64], x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b;
    }
}

/// Intermediate activations of one forward pass, kept for backpropagation.
struct Trace {
    in_l: Vec<f64>,
    in_r: Vec<f64>,
    in_e: Vec<f64>,
    /// `rounds + 1` states each, `n × hidden` row-major.
    hl: Vec<Vec<f64>>,
    hr: Vec<Vec<f64>>,
    he: Vec<Vec<f64>>,
    /// Per round: edge update `tanh(..)`, aggregates and node updates.
    se: Vec<Vec<f64>>,
    agg_l: Vec<Vec<f64>>,
    agg_r: Vec<Vec<f64>>,
    ul: Vec<Vec<f64>>,
    ur: Vec<Vec<f64>>,
    out: FeatureTriple,
}

/// Edge-conditioned bipartite message passing with hand-written gradients.
///
/// Encoders lift each node and edge input to `hidden` units with `tanh`. Each
/// round first updates every edge from itself and its two endpoints, then
/// updates every node from itself and the sum of its incident edge states.
/// All updates are residual. Linear heads read out one scalar per node and edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceDenoiser {
    pub config: ModelConfig,
    pub noise: NoiseConfig,
    pub params: Vec<f64>,
}

impl ReferenceDenoiser {
    /// Weights and biases uniform in `±1/√fan_in`.
    pub fn init(config: ModelConfig, noise: NoiseConfig, rng: &mut impl Rng) -> Self {
        let layout = Layout::new(&config);
        let mut params = vec![0.0; layout.total];
        for block in &layout.blocks {
            let s = 1.0 / (block.fan_in as f64).sqrt();
            for p in &mut params[block.range()] {
                *p = rng.random_range(-s..=s);
            }
        }
        Self {
            config,
            noise,
            params,
        }
    }

    pub fn from_params(config: ModelConfig, noise: NoiseConfig, params: Vec<f64>) -> Result<Self> {
        let layout = Layout::new(&config);
        if params.len() != layout.total {
            return Err(Error::LengthMismatch {
                what: "parameter vector",
                expected: layout.total,
                got: params.len(),
            });
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "parameter {i} is not finite"
            )));
        }
        Ok(Self {
            config,
            noise,
            params,
        })
    }

    pub fn layout(&self) -> Layout {
        Layout::new(&self.config)
    }

    fn block<'a>(&'a self, layout: &Layout, i: usize) -> &'a [f64] {
        &self.params[layout.blocks[i].range()]
    }

    fn check_context(&self, x: &FeatureTriple, ctx: &DenoiseContext<'_>) -> Result<()> {
        x.check_host(ctx.host)?;
        let emb = ctx.embeddings;
        if emb.width() != self.config.embedding_width() {
            return Err(Error::LengthMismatch {
                what: "embedding width",
                expected: self.config.embedding_width(),
                got: emb.width(),
            });
        }
        if emb.n_left() != ctx.host.n_left() || emb.n_right() != ctx.host.n_right() {
            return Err(Error::LengthMismatch {
                what: "embedded nodes",
                expected: ctx.host.num_nodes(),
                got: emb.n_left() + emb.n_right(),
            });
        }
        Ok(())
    }

    /// Raw network output `F(c_in x; c_noise)` with its activation trace.
    fn forward(&self, x: &FeatureTriple, pre: &Preconditioning, ctx: &DenoiseContext<'_>) -> Trace {
        let layout = self.layout();
        let h = self.config.hidden;
        let host = ctx.host;
        let (nl, nr, ne) = (host.n_left(), host.n_right(), host.num_edges());
        let (dn, de) = (self.config.node_input(), self.config.edge_input());
        let scalars = [pre.c_noise, (ctx.n_target as f64 + 1.0).ln(), ctx.rho_hat];

        let mut in_l = Vec::with_capacity(nl * dn);
        for i in 0..nl {
            in_l.push(pre.c_in * x.vl[i]);
            in_l.extend_from_slice(&scalars);
            in_l.extend_from_slice(ctx.embeddings.left(i));
        }
        let mut in_r = Vec::with_capacity(nr * dn);
        for j in 0..nr {
            in_r.push(pre.c_in * x.vr[j]);
            in_r.extend_from_slice(&scalars);
            in_r.extend_from_slice(ctx.embeddings.right(j));
        }
        let mut in_e = Vec::with_capacity(ne * de);
        for (k, &(i, j)) in host.edges().iter().enumerate() {
            in_e.push(pre.c_in * x.e[k]);
            in_e.extend_from_slice(&scalars);
            in_e.extend_from_slice(ctx.embeddings.left(i));
            in_e.extend_from_slice(ctx.embeddings.right(j));
        }

        let encode = |inputs: &[f64], width: usize, n: usize, w: usize, b: usize| {
            let mut out = vec![0.0; n * h];
            for r in 0..n {
                let o = &mut out[r * h..(r + 1) * h];
                affine(
                    self.block(&layout, w),
                    self.block(&layout, b),
                    &inputs[r * width..(r + 1) * width],
                    o,
                );
                o.iter_mut().for_each(|v| *v = v.tanh());
            }
            out
        };
        let mut hl = vec![encode(&in_l, dn, nl, ENC_L_W, ENC_L_B)];
        let mut hr = vec![encode(&in_r, dn, nr, ENC_R_W, ENC_R_B)];
        let mut he = vec![encode(&in_e, de, ne, ENC_E_W, ENC_E_B)];
        let (mut se, mut agg_l, mut agg_r, mut ul, mut ur) =
            (vec![], vec![], vec![], vec![], vec![]);

        for t in 0..self.config.rounds {
            let p = |which| &self.params[layout.round(t, which).range()];
            let (hl_t, hr_t, he_t) = (&hl[t], &hr[t], &he[t]);

            let mut s = vec![0.0; ne * h];
            let mut he_next = he_t.clone();
            for (k, &(i, j)) in host.edges().iter().enumerate() {
                let z = &mut s[k * h..(k + 1) * h];
                affine(p(MP_A), p(MP_EB), &he_t[k * h..(k + 1) * h], z);
                gemv_add(p(MP_B), &hl_t[i * h..(i + 1) * h], z);
                gemv_add(p(MP_C), &hr_t[j * h..(j + 1) * h], z);
                z.iter_mut().for_each(|v| *v = v.tanh());
                add_into(&mut he_next[k * h..(k + 1) * h], z);
            }

            let mut al = vec![0.0; nl * h];
            let mut ar = vec![0.0; nr * h];
            for (k, &(i, j)) in host.edges().iter().enumerate() {
                add_into(&mut al[i * h..(i + 1) * h], &he_next[k * h..(k + 1) * h]);
                add_into(&mut ar[j * h..(j + 1) * h], &he_next[k * h..(k + 1) * h]);
            }

            let update = |state: &[f64], agg: &[f64], n: usize, w_self, w_agg, bias| {
                let mut u = vec![0.0; n * h];
                let mut next = state.to_vec();
                for r in 0..n {
                    let z = &mut u[r * h..(r + 1) * h];
                    affine(p(w_self), p(bias), &state[r * h..(r + 1) * h], z);
                    gemv_add(p(w_agg), &agg[r * h..(r + 1) * h], z);
                    z.iter_mut().for_each(|v| *v = v.tanh());
                    add_into(&mut next[r * h..(r + 1) * h], z);
                }
                (u, next)
            };
            let (u_l, hl_next) = update(hl_t, &al, nl, MP_P, MP_Q, MP_LB);
            let (u_r, hr_next) = update(hr_t, &ar, nr, MP_R, MP_S, MP_RB);

            se.push(s);
            agg_l.push(al);
            agg_r.push(ar);
            ul.push(u_l);
            ur.push(u_r);
            hl.push(hl_next);
            hr.push(hr_next);
            he.push(he_next);
        }

        let rounds = self.config.rounds;
        let readout = |state: &[f64], n: usize, side: usize| -> Vec<f64> {
            let (w, b) = layout.head(rounds, side);
            let (w, b) = (&self.params[w.range()], self.params[b.offset]);
            (0..n)
                .map(|r| {
                    b + w
                        .iter()
                        .zip(&state[r * h..(r + 1) * h])
                        .map(|(a, c)| a * c)
                        .sum::<f64>()
                })
                .collect()
        };
        let out = FeatureTriple {
            vl: readout(&hl[rounds], nl, 0),
            vr: readout(&hr[rounds], nr, 1),
            e: readout(&he[rounds], ne, 2),
        };
        Trace {
            in_l,
            in_r,
            in_e,
            hl,
            hr,
            he,
            se,
            agg_l,
            agg_r,
            ul,
            ur,
            out,
        }
    }

    /// Accumulates the parameter gradient given `dF`, the gradient of the loss
    /// with respect to the raw network output.
    fn backward(
        &self,
        trace: &Trace,
        d_out: &FeatureTriple,
        ctx: &DenoiseContext<'_>,
        grad: &mut [f64],
    ) {
        let layout = self.layout();
        let h = self.config.hidden;
        let rounds = self.config.rounds;
        let host = ctx.host;
        let (nl, nr, ne) = (host.n_left(), host.n_right(), host.num_edges());

        // Heads.
        let head_back = |grad: &mut [f64], state: &[f64], d: &[f64], side: usize| -> Vec<f64> {
            let (wb, bb) = layout.head(rounds, side);
            let w = &self.params[wb.range()];
            let mut g_state = vec![0.0; d.len() * h];
            for (r, &dr) in d.iter().enumerate() {
                grad[bb.offset] += dr;
                let hs = &state[r * h..(r + 1) * h];
                for c in 0..h {
                    grad[wb.offset + c] += dr * hs[c];
                    g_state[r * h + c] = dr * w[c];
                }
            }
            g_state
        };
        let mut gl = head_back(grad, &trace.hl[rounds], &d_out.vl, 0);
        let mut gr = head_back(grad, &trace.hr[rounds], &d_out.vr, 1);
        let mut ge = head_back(grad, &trace.he[rounds], &d_out.e, 2);

        for t in (0..rounds).rev() {
            let blk = |which| layout.round(t, which).clone();
            let p = |which| &self.params[layout.round(t, which).range()];

            // Node updates: h' = h + tanh(W_self h + W_agg agg + b).
            let node_back = |grad: &mut [f64],
                             g: &[f64],
                             u: &[f64],
                             state: &[f64],
                             agg: &[f64],
                             n: usize,
                             (w_self, w_agg, bias): (usize, usize, usize)|
             -> (Vec<f64>, Vec<f64>) {
                let (bs, ba, bb) = (blk(w_self), blk(w_agg), blk(bias));
                let mut g_prev = g.to_vec();
                let mut g_agg = vec![0.0; n * h];
                let mut dz = vec![0.0; h];
                for r in 0..n {
                    let rows = r * h..(r + 1) * h;
                    for c in 0..h {
                        let uc = u[r * h + c];
                        dz[c] = g[r * h + c] * (1.0 - uc * uc);
                    }
                    outer_add(&mut grad[bs.range()], &dz, &state[rows.clone()]);
                    outer_add(&mut grad[ba.range()], &dz, &agg[rows.clone()]);
                    add_into(&mut grad[bb.range()], &dz);
                    gemv_t_add(p(w_self), &dz, &mut g_prev[rows.clone()]);
                    gemv_t_add(p(w_agg), &dz, &mut g_agg[rows]);
                }
                (g_prev, g_agg)
            };
            let (gl_prev, g_agg_l) = node_back(
                grad,
                &gl,
                &trace.ul[t],
                &trace.hl[t],
                &trace.agg_l[t],
                nl,
                (MP_P, MP_Q, MP_LB),
            );
            let (gr_prev, g_agg_r) = node_back(
                grad,
                &gr,
                &trace.ur[t],
                &trace.hr[t],
                &trace.agg_r[t],
                nr,
                (MP_R, MP_S, MP_RB),
            );
            gl = gl_prev;
            gr = gr_prev;

            // Edge updates: he' = he + tanh(A he + B hl[i] + C hr[j] + a); he' feeds both aggregates.
            let (ba, bbm, bc, beb) = (blk(MP_A), blk(MP_B), blk(MP_C), blk(MP_EB));
            let mut ge_prev = vec![0.0; ne * h];
            let mut dz = vec![0.0; h];
            for (k, &(i, j)) in host.edges().iter().enumerate() {
                let rows = k * h..(k + 1) * h;
                let mut g_total = ge[rows.clone()].to_vec();
                add_into(&mut g_total, &g_agg_l[i * h..(i + 1) * h]);
                add_into(&mut g_total, &g_agg_r[j * h..(j + 1) * h]);
                for c in 0..h {
                    let sc = trace.se[t][k * h + c];
                    dz[c] = g_total[c] * (1.0 - sc * sc);
                }
                outer_add(&mut grad[ba.range()], &dz, &trace.he[t][rows.clone()]);
                outer_add(
                    &mut grad[bbm.range()],
                    &dz,
                    &trace.hl[t][i * h..(i + 1) * h],
                );
                outer_add(&mut grad[bc.range()], &dz, &trace.hr[t][j * h..(j + 1) * h]);
                add_into(&mut grad[beb.range()], &dz);
                let gp = &mut ge_prev[rows];
                add_into(gp, &g_total);
                gemv_t_add(p(MP_A), &dz, gp);
                gemv_t_add(p(MP_B), &dz, &mut gl[i * h..(i + 1) * h]);
                gemv_t_add(p(MP_C), &dz, &mut gr[j * h..(j + 1) * h]);
            }
            ge = ge_prev;
        }

        // Encoders: h0 = tanh(W in + b).
        let enc_back = |grad: &mut [f64],
                        g: &[f64],
                        h0: &[f64],
                        inputs: &[f64],
                        width: usize,
                        n: usize,
                        w: usize,
                        b: usize| {
            let (bw, bb) = (layout.blocks[w].clone(), layout.blocks[b].clone());
            let mut dz = vec![0.0; h];
            for r in 0..n {
                for c in 0..h {
                    let hc = h0[r * h + c];
                    dz[c] = g[r * h + c] * (1.0 - hc * hc);
                }
                outer_add(
                    &mut grad[bw.range()],
                    &dz,
                    &inputs[r * width..(r + 1) * width],
                );
                add_into(&mut grad[bb.range()], &dz);
            }
        };
        let (dn, de) = (self.config.node_input(), self.config.edge_input());
        enc_back(
            grad,
            &gl,
            &trace.hl[0],
            &trace.in_l,
            dn,
            nl,
            ENC_L_W,
            ENC_L_B,
        );
        enc_back(
            grad,
            &gr,
            &trace.hr[0],
            &trace.in_r,
            dn,
            nr,
            ENC_R_W,
            ENC_R_B,
        );
        enc_back(
            grad,
            &ge,
            &trace.he[0],
            &trace.in_e,
            de,
            ne,
            ENC_E_W,
            ENC_E_B,
        );
    }

    /// Weighted denoising loss for clean features `x0` under noise `sigma · eps`.
    pub fn loss(
        &self,
        x0: &FeatureTriple,
        eps: &FeatureTriple,
        sigma: f64,
        ctx: &DenoiseContext<'_>,
    ) -> Result<f64> {
        self.check_context(x0, ctx)?;
        Ok(super::edm::edm_loss(self, &self.noise, x0, eps, sigma, ctx))
    }

    /// The loss and its gradient with respect to every parameter.
    pub fn loss_and_grad(
        &self,
        x0: &FeatureTriple,
        eps: &FeatureTriple,
        sigma: f64,
        ctx: &DenoiseContext<'_>,
    ) -> Result<(f64, Vec<f64>)> {
        self.check_context(x0, ctx)?;
        let pre = self.noise.preconditioning(sigma);
        let x = x0.combine(1.0, eps, sigma);
        let trace = self.forward(&x, &pre, ctx);
        let pred = x.combine(pre.c_skip, &trace.out, pre.c_out);
        let weight = self.noise.loss_weight(sigma);

        let groups = pred
            .groups()
            .iter()
            .filter(|g| !g.is_empty())
            .count()
            .max(1) as f64;
        let mut loss = 0.0;
        let d_group = |p: &[f64], t: &[f64], loss: &mut f64| -> Vec<f64> {
            if p.is_empty() {
                return Vec::new();
            }
            let n = p.len() as f64;
            let mut sse = 0.0;
            let d = p
                .iter()
                .zip(t)
                .map(|(a, b)| {
                    sse += (a - b) * (a - b);
                    weight * 2.0 * (a - b) / (n * groups) * pre.c_out
                })
                .collect();
            *loss += weight * sse / (n * groups);
            d
        };
        let d_out = FeatureTriple {
            vl: d_group(&pred.vl, &x0.vl, &mut loss),
            vr: d_group(&pred.vr, &x0.vr, &mut loss),
            e: d_group(&pred.e, &x0.e, &mut loss),
        };
        let mut grad = vec![0.0; self.params.len()];
        self.backward(&trace, &d_out, ctx, &mut grad);
        Ok((loss, grad))
    }
}

impl Denoiser for ReferenceDenoiser {
    fn denoise(&self, x: &FeatureTriple, sigma: f64, ctx: &DenoiseContext<'_>) -> FeatureTriple {
        let pre = self.noise.preconditioning(sigma);
        let trace = self.forward(x, &pre, ctx);
        x.combine(pre.c_skip, &trace.out, pre.c_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expand::ExpansionVectors;
    use crate::spectral::node_embeddings;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny() -> (BipartiteGraph, NodeEmbeddings, FeatureTriple) {
        let host = BipartiteGraph::new(3, 2, vec![(0, 0), (1, 0), (1, 1), (2, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let emb = node_embeddings(&host, &ExpansionVectors::ones(&host), 2, &mut rng).unwrap();
        let x0 = FeatureTriple {
            vl: vec![1.0, 2.0, 1.0],
            vr: vec![1.0, 3.0],
            e: vec![1.0, 0.0, 1.0, 1.0],
        };
        (host, emb, x0)
    }

    #[test]
    fn layout_is_contiguous() {
        let cfg = ModelConfig {
            hidden: 4,
            rounds: 2,
            spectral_k: 3,
        };
        let layout = Layout::new(&cfg);
        let mut next = 0;
        for b in &layout.blocks {
            assert_eq!(b.offset, next);
            next += b.len();
        }
        assert_eq!(next, layout.total);
        assert_eq!(layout.blocks.len(), 6 + 10 * 2 + 6);
    }

    #[test]
    fn full_gradient_matches_finite_differences() {
        let (host, emb, x0) = tiny();
        let cfg = ModelConfig {
            hidden: 5,
            rounds: 2,
            spectral_k: 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let model = ReferenceDenoiser::init(cfg, NoiseConfig::default(), &mut rng);
        let eps = FeatureTriple::standard_normal(&x0, &mut rng);
        let ctx = DenoiseContext {
            host: &host,
            embeddings: &emb,
            n_target: 6,
            rho_hat: 0.25,
        };
        let sigma = 0.7;
        let (_, grad) = model.loss_and_grad(&x0, &eps, sigma, &ctx).unwrap();
        let step = 1e-5;
        let mut worst: f64 = 0.0;
        for i in 0..model.params.len() {
            let mut plus = model.clone();
            plus.params[i] += step;
            let mut minus = model.clone();
            minus.params[i] -= step;
            let fd = (plus.loss(&x0, &eps, sigma, &ctx).unwrap()
                - minus.loss(&x0, &eps, sigma, &ctx).unwrap())
                / (2.0 * step);
            let err = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-6);
            worst = worst.max(err);
        }
        assert!(worst < 1e-5, "worst relative error {worst}");
    }

    #[test]
    fn loss_matches_generic_definition() {
        let (host, emb, x0) = tiny();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model = ReferenceDenoiser::init(
            ModelConfig {
                spectral_k: 2,
                ..Default::default()
            },
            NoiseConfig::default(),
            &mut rng,
        );
        let eps = FeatureTriple::standard_normal(&x0, &mut rng);
        let ctx = DenoiseContext {
            host: &host,
            embeddings: &emb,
            n_target: 3,
            rho_hat: 0.0,
        };
        let (l, _) = model.loss_and_grad(&x0, &eps, 2.0, &ctx).unwrap();
        assert!((l - model.loss(&x0, &eps, 2.0, &ctx).unwrap()).abs() < 1e-12 * l.max(1.0));
    }

    #[test]
    fn rejects_wrong_embedding_width() {
        let (host, emb, x0) = tiny();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let model =
            ReferenceDenoiser::init(ModelConfig::default(), NoiseConfig::default(), &mut rng);
        let ctx = DenoiseContext {
            host: &host,
            embeddings: &emb,
            n_target: 3,
            rho_hat: 0.0,
        };
        assert!(model.loss(&x0, &x0, 1.0, &ctx).is_err());
    }

    #[test]
    fn stubs_give_zero_loss() {
        let (host, emb, x0) = tiny();
        let ctx = DenoiseContext {
            host: &host,
            embeddings: &emb,
            n_target: 3,
            rho_hat: 0.0,
        };
        let cfg = NoiseConfig::default();
        let eps = FeatureTriple::standard_normal(&x0, &mut ChaCha8Rng::seed_from_u64(1));
        let perfect = ConstantDenoiser(x0.clone());
        assert_eq!(
            super::super::edm::edm_loss(&perfect, &cfg, &x0, &eps, 3.0, &ctx),
            0.0
        );
        let zeros = x0.map(|_| 0.0);
        assert_eq!(
            super::super::edm::edm_loss(&ZeroDenoiser, &cfg, &zeros, &eps, 0.1, &ctx),
            0.0
        );
    }
}
