//! Fourier-type ratios `||[F^G, T] f||_{p'} / ||f||_p` and lower-bound
//! estimation of their supremum `||T | FT_p^G||`.
//!
//! The search works on the coefficients of `f` over a fixed support. The
//! transform is sampled at a fixed node set of the dual model: exactly at the
//! characters of finite factors, at `M` equispaced angles on torus axes
//! (trapezoid rule), and at `M` folded angles on the real frequency axis,
//! weighted by the periodized sinc kernel. On finite models the sampled
//! objective is the exact ratio; elsewhere the best witness is re-evaluated
//! with certified quadrature before it is reported.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{root_of_unity, Factor, GroupModel, Side};
use crate::operator::OperatorSpec;
use crate::sinc;
use crate::transform::tensor_transform;
use crate::vecfun::{conjugate, lp_norm_with, BanachSpec, NormConfig, NormResult, VecFunction};

pub const P_RANGE: &str = "p must satisfy 1 < p ≤ 2";

pub fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p <= 2.0 {
        Ok(())
    } else {
        Err(Error::validation("p", format!("{P_RANGE}, got {p}")))
    }
}

fn check_function(g: &GroupModel, t: &OperatorSpec, f: &VecFunction) -> Result<()> {
    if f.model() != g {
        return Err(Error::Domain(format!("function lives on {}, not on {g}", f.model())));
    }
    if f.space() != t.domain() {
        return Err(Error::Domain(format!(
            "function space {} differs from the operator domain {}",
            f.space(),
            t.domain()
        )));
    }
    Ok(())
}

/// Bound on `|a/b - a'/b'|` for `|a - a'| <= ea`, `|b - b'| <= eb`.
fn quotient_error(a: NormResult, b: NormResult) -> f64 {
    if a.error == 0.0 && b.error == 0.0 {
        return 0.0;
    }
    if b.value <= b.error {
        return f64::INFINITY;
    }
    (a.error + a.value / b.value * b.error) / (b.value - b.error)
}

pub fn ratio(g: &GroupModel, t: &OperatorSpec, p: f64, f: &VecFunction) -> Result<NormResult> {
    ratio_with(g, t, p, f, &NormConfig::default())
}

/// `||[F^G, T] f||_{p'} / ||f||_p` with a propagated error bound.
pub fn ratio_with(
    g: &GroupModel,
    t: &OperatorSpec,
    p: f64,
    f: &VecFunction,
    cfg: &NormConfig,
) -> Result<NormResult> {
    check_p(p)?;
    check_function(g, t, f)?;
    if f.is_zero() {
        return Err(Error::Domain("ratio undefined at zero".into()));
    }
    let den = lp_norm_with(f, p, cfg)?;
    if den.value == 0.0 {
        return Err(Error::Domain("ratio undefined at zero".into()));
    }
    let num = lp_norm_with(&tensor_transform(g, t, f)?, conjugate(p), cfg)?;
    Ok(NormResult { value: num.value / den.value, error: quotient_error(num, den) })
}

/// `2 d/d(conj z) ||z||_q^r = r ||z||^(r-q) |z_k|^(q-2) z_k`, i.e. the gradient
/// with respect to real and imaginary parts packed as a complex number. The
/// map is C^1 for `q, r > 1`; components at zero get 0.
fn norm_power_gradient(z: &[Complex64], q: f64, r: f64, out: &mut [Complex64]) {
    let n = BanachSpec { dim: z.len(), q }.norm(z);
    if n == 0.0 {
        out.iter_mut().for_each(|o| *o = Complex64::new(0.0, 0.0));
        return;
    }
    for (o, zk) in out.iter_mut().zip(z) {
        let a = zk.norm();
        *o = if a == 0.0 {
            Complex64::new(0.0, 0.0)
        } else if q == 2.0 {
            zk * (r * n.powf(r - 2.0))
        } else {
            // r (a/n)^(q-1) n^(r-1) z/|z|, written to avoid overflow in |z|^(q-2)
            zk / a * (r * (a / n).powf(q - 1.0) * n.powf(r - 1.0))
        };
    }
}

/// Sampled log-ratio over a fixed support.
pub(crate) struct Objective {
    t: OperatorSpec,
    p: f64,
    pp: f64,
    support: Vec<Vec<i64>>,
    mass: Vec<f64>,
    nodes: usize,
    /// `nodes x support`, row-major.
    kernel: Vec<Complex64>,
    weights: Vec<f64>,
}

/// Per-axis node set: weights and, per node, the factor for each support point.
struct AxisNodes {
    weights: Vec<f64>,
    factors: Vec<Vec<Complex64>>,
}

const MAX_KERNEL_ENTRIES: usize = 1 << 24;

impl Objective {
    pub fn new(
        g: &GroupModel,
        t: &OperatorSpec,
        p: f64,
        support: Vec<Vec<i64>>,
        angles: usize,
    ) -> Result<Objective> {
        let pp = conjugate(p);
        let mut axes = Vec::new();
        let mut folded = 0;
        let angle = |j: usize| -PI + 2.0 * PI * j as f64 / angles as f64;
        for (a, f) in g.factors().iter().enumerate() {
            let coord: Vec<i64> = support.iter().map(|s| s[a]).collect();
            axes.push(match *f {
                Factor::Cyclic { order, side } => {
                    let n = order as i64;
                    let (w, m) = match side {
                        Side::Primal => (1.0 / n as f64, 1.0),
                        Side::Dual => (1.0, 1.0 / n as f64),
                    };
                    AxisNodes {
                        weights: vec![w; order as usize],
                        factors: (0..n)
                            .map(|chi| coord.iter().map(|&x| root_of_unity(x * chi, n) * m).collect())
                            .collect(),
                    }
                }
                Factor::Lattice { .. } | Factor::RealGrid { .. } => {
                    let scale = match *f {
                        Factor::RealGrid { delta, .. } => {
                            folded += 1;
                            delta.powf(pp - 1.0)
                        }
                        _ => 1.0,
                    };
                    AxisNodes {
                        weights: (0..angles)
                            .map(|j| {
                                let k = match f {
                                    Factor::RealGrid { .. } => {
                                        sinc::fold_kernel(angle(j), pp, sinc::DEFAULT_TRUNCATION).mid()
                                    }
                                    _ => 1.0,
                                };
                                scale * k / angles as f64
                            })
                            .collect(),
                        factors: (0..angles)
                            .map(|j| coord.iter().map(|&m| Complex64::cis(m as f64 * angle(j))).collect())
                            .collect(),
                    }
                }
                Factor::Torus { .. } | Factor::RealFreq { .. } => {
                    return Err(Error::Capability(format!(
                        "Fourier-type search needs pointwise primal factors; {g} has a spectral axis"
                    )))
                }
            });
        }
        if folded > 1 {
            return Err(Error::Capability(format!("{g}: at most one real axis is supported")));
        }
        let nodes: usize = axes.iter().map(|a| a.weights.len()).product();
        if nodes.saturating_mul(support.len().max(1)) > MAX_KERNEL_ENTRIES {
            return Err(Error::Capability(format!(
                "{nodes} sample nodes x {} support points exceeds the search budget",
                support.len()
            )));
        }
        let mut weights = vec![1.0];
        let mut kernel = vec![Complex64::new(1.0, 0.0); support.len()];
        for axis in &axes {
            let mut w2 = Vec::with_capacity(weights.len() * axis.weights.len());
            let mut k2 = Vec::with_capacity(kernel.len() * axis.weights.len());
            for (i, &w) in weights.iter().enumerate() {
                let row = &kernel[i * support.len()..(i + 1) * support.len()];
                for (wa, fa) in axis.weights.iter().zip(&axis.factors) {
                    w2.push(w * wa);
                    k2.extend(row.iter().zip(fa).map(|(x, y)| x * y));
                }
            }
            weights = w2;
            kernel = k2;
        }
        let mass = support
            .iter()
            .map(|s| {
                g.factors()
                    .iter()
                    .zip(s)
                    .map(|(f, _)| f.cell_mass().unwrap())
                    .product()
            })
            .collect();
        Ok(Objective { t: t.clone(), p, pp, support, mass, nodes, kernel, weights })
    }

    fn transform(&self, tx: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let dy = self.t.codomain().dim;
        let ns = self.support.len();
        (0..self.nodes)
            .map(|n| {
                let mut y = vec![Complex64::new(0.0, 0.0); dy];
                for (k, v) in self.kernel[n * ns..(n + 1) * ns].iter().zip(tx) {
                    for (a, b) in y.iter_mut().zip(v) {
                        *a += k * b;
                    }
                }
                y
            })
            .collect()
    }

    fn sums(&self, x: &[Vec<Complex64>]) -> (f64, f64, Vec<Vec<Complex64>>) {
        let tx: Vec<_> = x.iter().map(|v| self.t.apply(v)).collect();
        let y = self.transform(&tx);
        let cod = self.t.codomain();
        let dom = self.t.domain();
        let num = y.iter().zip(&self.weights).map(|(v, w)| w * cod.norm(v).powf(self.pp)).sum();
        let den = x.iter().zip(&self.mass).map(|(v, m)| m * dom.norm(v).powf(self.p)).sum();
        (num, den, y)
    }

    /// `log ||[F,T] f||_{p'} - log ||f||_p` on the sampled nodes.
    pub fn log_ratio(&self, x: &[Vec<Complex64>]) -> f64 {
        let (num, den, _) = self.sums(x);
        num.ln() / self.pp - den.ln() / self.p
    }

    pub fn log_ratio_gradient(&self, x: &[Vec<Complex64>]) -> Result<(f64, Vec<Vec<Complex64>>)> {
        let (num, den, y) = self.sums(x);
        if den == 0.0 {
            return Err(Error::Domain("ratio undefined at zero".into()));
        }
        if num == 0.0 {
            return Err(Error::Numeric("transform vanishes; log-ratio is not differentiable".into()));
        }
        let (cod, dom) = (self.t.codomain(), self.t.domain());
        let ns = self.support.len();
        let mut gy = vec![Complex64::new(0.0, 0.0); cod.dim];
        let mut back = vec![vec![Complex64::new(0.0, 0.0); cod.dim]; ns];
        for (n, (yn, w)) in y.iter().zip(&self.weights).enumerate() {
            norm_power_gradient(yn, cod.q, self.pp, &mut gy);
            for (k, b) in self.kernel[n * ns..(n + 1) * ns].iter().zip(back.iter_mut()) {
                let kc = k.conj() * *w;
                for (bj, gj) in b.iter_mut().zip(&gy) {
                    *bj += kc * gj;
                }
            }
        }
        let mut gx = vec![Complex64::new(0.0, 0.0); dom.dim];
        let grad = back
            .iter()
            .zip(x)
            .zip(&self.mass)
            .map(|((b, xs), m)| {
                let gn = self.t.apply_adjoint(b);
                norm_power_gradient(xs, dom.q, self.p, &mut gx);
                gn.iter()
                    .zip(&gx)
                    .map(|(a, d)| a / (self.pp * num) - d * (m / (self.p * den)))
                    .collect()
            })
            .collect();
        Ok((num.ln() / self.pp - den.ln() / self.p, grad))
    }

    fn normalize(&self, x: &mut [Vec<Complex64>]) {
        let dom = self.t.domain();
        let den: f64 = x.iter().zip(&self.mass).map(|(v, m)| m * dom.norm(v).powf(self.p)).sum();
        let s = den.powf(-1.0 / self.p);
        if s.is_finite() {
            x.iter_mut().flatten().for_each(|z| *z *= s);
        }
    }

    fn to_function(&self, g: &GroupModel, x: &[Vec<Complex64>]) -> VecFunction {
        VecFunction::from_terms(g.clone(), self.t.domain(), self.support.iter().cloned().zip(x.iter().cloned()))
            .expect("support points come from the model")
    }
}

fn coefficients(f: &VecFunction) -> (Vec<Vec<i64>>, Vec<Vec<Complex64>>) {
    f.terms().iter().map(|(k, v)| (k.clone(), v.clone())).unzip()
}

/// Default number of sample angles per continuous dual axis.
pub const DEFAULT_ANGLES: usize = 256;

/// Gradient of the log-ratio with respect to the real and imaginary parts of
/// every support coefficient, packed as `d/d re + i d/d im`. Exact on finite
/// models; on continuum models it is the gradient of the sampled objective.
pub fn ratio_gradient(g: &GroupModel, t: &OperatorSpec, p: f64, f: &VecFunction) -> Result<VecFunction> {
    check_p(p)?;
    check_function(g, t, f)?;
    if f.is_zero() {
        return Err(Error::Domain("ratio undefined at zero".into()));
    }
    if !(t.domain().is_smooth() && t.codomain().is_smooth()) {
        return Err(Error::Capability("gradients need 1 < q < inf on both spaces".into()));
    }
    let (support, x) = coefficients(f);
    let obj = Objective::new(g, t, p, support, DEFAULT_ANGLES)?;
    let (_, grad) = obj.log_ratio_gradient(&x)?;
    Ok(obj.to_function(g, &grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepRule {
    /// Armijo backtracking from a unit-length trial step.
    Backtracking,
    /// Armijo backtracking from the Barzilai–Borwein step length.
    BarzilaiBorwein,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimatorConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    pub step: StepRule,
    /// Initial support size; defaults to the whole model when finite, else 4.
    pub support: Option<usize>,
    /// Cap for support doubling.
    pub max_support: usize,
    pub seed: u64,
    /// Relative ratio change below which an ascent stops.
    pub tolerance: f64,
    /// Sample angles per continuous dual axis.
    pub angles: usize,
    /// Tolerance of the certified re-evaluation of the best witness.
    pub norm_tolerance: f64,
    /// Extra starting points, e.g. witnesses transported from a related model.
    #[serde(skip)]
    pub warm_starts: Vec<VecFunction>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            restarts: 32,
            max_iterations: 500,
            step: StepRule::BarzilaiBorwein,
            support: None,
            max_support: 32,
            seed: 0,
            tolerance: 1e-9,
            angles: DEFAULT_ANGLES,
            norm_tolerance: 1e-9,
            warm_starts: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RestartTrace {
    pub support: usize,
    pub ratio: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Estimate {
    /// Certified ratio of the witness: a lower bound for the constant, up to `error`.
    pub bound: f64,
    pub error: f64,
    pub p: f64,
    pub restarts: usize,
    pub converged: bool,
    pub trace: Vec<RestartTrace>,
    pub witness: VecFunction,
    pub config: EstimatorConfig,
}

struct Ascent {
    ratio: f64,
    iterations: usize,
    converged: bool,
    x: Vec<Vec<Complex64>>,
}

fn inner(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Coordinates below this fraction of the largest one count as collapsed.
const COLLAPSE: f64 = 1e-4;

/// Gradient ascent, followed by a polish when it stalls.
///
/// For `q < 2` maximizers typically sit on faces where some coordinates
/// vanish; the `|z|^{q-2}` factor makes the objective ill-conditioned there
/// and the ascent crawls. The polish pins collapsed coordinates at zero and
/// ascends on the remaining (smooth) face, keeping whichever run is better.
fn ascend(obj: &Objective, x: Vec<Vec<Complex64>>, cfg: &EstimatorConfig) -> Ascent {
    let first = ascend_on(obj, x, None, cfg);
    if first.converged {
        return first;
    }
    let top = first.x.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let free: Vec<Vec<bool>> = first.x.iter().map(|v| v.iter().map(|z| z.norm() > COLLAPSE * top).collect()).collect();
    if free.iter().flatten().all(|&b| b) {
        return first;
    }
    let snapped = first
        .x
        .iter()
        .zip(&free)
        .map(|(v, m)| v.iter().zip(m).map(|(z, &keep)| if keep { *z } else { Complex64::new(0.0, 0.0) }).collect())
        .collect();
    let second = ascend_on(obj, snapped, Some(&free), cfg);
    let iterations = first.iterations + second.iterations;
    if second.ratio > first.ratio {
        Ascent { iterations, ..second }
    } else {
        Ascent { iterations, ..first }
    }
}

fn mask(g: &mut [Vec<Complex64>], free: Option<&[Vec<bool>]>) {
    if let Some(free) = free {
        for (v, m) in g.iter_mut().zip(free) {
            for (z, &keep) in v.iter_mut().zip(m) {
                if !keep {
                    *z = Complex64::new(0.0, 0.0);
                }
            }
        }
    }
}

fn ascend_on(obj: &Objective, mut x: Vec<Vec<Complex64>>, free: Option<&[Vec<bool>]>, cfg: &EstimatorConfig) -> Ascent {
    const ARMIJO: f64 = 1e-4;
    obj.normalize(&mut x);
    let Ok((mut phi, mut g)) = obj.log_ratio_gradient(&x) else {
        return Ascent { ratio: 0.0, iterations: 0, converged: true, x };
    };
    mask(&mut g, free);
    let mut prev: Option<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> = None;
    let mut converged = false;
    let mut it = 0;
    while it < cfg.max_iterations {
        it += 1;
        let g2 = inner(&g, &g);
        if g2 == 0.0 || !g2.is_finite() {
            converged = true;
            break;
        }
        let mut alpha = 1.0 / g2.sqrt();
        if let (StepRule::BarzilaiBorwein, Some((px, pg))) = (cfg.step, &prev) {
            let s: Vec<Vec<Complex64>> =
                x.iter().zip(px).map(|(a, b)| a.iter().zip(b).map(|(u, v)| u - v).collect()).collect();
            let y: Vec<Vec<Complex64>> =
                g.iter().zip(pg).map(|(a, b)| a.iter().zip(b).map(|(u, v)| u - v).collect()).collect();
            let sy = inner(&s, &y).abs();
            if sy > 0.0 {
                alpha = (inner(&s, &s) / sy).clamp(1e-12, 1e6);
            }
        }
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<Vec<Complex64>> = x
                .iter()
                .zip(&g)
                .map(|(a, b)| a.iter().zip(b).map(|(u, v)| u + v * alpha).collect())
                .collect();
            obj.normalize(&mut trial);
            let val = obj.log_ratio(&trial);
            if val.is_finite() && val >= phi + ARMIJO * alpha * g2 {
                accepted = Some((trial, val));
                break;
            }
            alpha *= 0.5;
        }
        let Some((trial, val)) = accepted else {
            converged = true;
            break;
        };
        let change = (val - phi).exp_m1();
        match obj.log_ratio_gradient(&trial) {
            Ok((v, mut gt)) => {
                mask(&mut gt, free);
                prev = Some((std::mem::replace(&mut x, trial), std::mem::replace(&mut g, gt)));
                phi = v;
            }
            Err(_) => break,
        }
        if change < cfg.tolerance {
            converged = true;
            break;
        }
    }
    Ascent { ratio: phi.exp(), iterations: it, converged, x }
}

fn random_start(rng: &mut ChaCha8Rng, support: usize, dim: usize) -> Vec<Vec<Complex64>> {
    (0..support)
        .map(|_| (0..dim).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
        .collect()
}

fn stream(seed: u64, level: usize, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((level as u64) << 32) | restart as u64);
    rng
}

/// Coefficients of `f` on `support`, zero elsewhere.
fn restrict(f: &VecFunction, support: &[Vec<i64>], dim: usize) -> Vec<Vec<Complex64>> {
    support
        .iter()
        .map(|s| f.get(s).map_or_else(|| vec![Complex64::new(0.0, 0.0); dim], <[_]>::to_vec))
        .collect()
}

fn delta_witness(g: &GroupModel, space: BanachSpec) -> VecFunction {
    let mut e = vec![Complex64::new(0.0, 0.0); space.dim];
    e[0] = Complex64::new(1.0, 0.0);
    VecFunction::from_terms(g.clone(), space, [(g.identity(), e)]).expect("identity is a point of every model")
}

fn check_estimable(t: &OperatorSpec) -> Result<()> {
    if !(t.domain().is_smooth() && t.codomain().is_smooth()) {
        return Err(Error::Capability(format!(
            "gradient search needs 1 < q < inf on both spaces (got {} -> {}); use brute_force_constant",
            t.domain(),
            t.codomain()
        )));
    }
    Ok(())
}

/// Lower-bound estimate of `||T | FT_p^G||` by multi-restart gradient ascent.
///
/// Restart 0 starts from `delta_0 (x) x` (a stationary point for scalar
/// identities); the others from seeded random coefficients, each restart on
/// its own ChaCha8 stream so adding restarts never changes existing ones.
/// When the model has more points than the initial support, the support is
/// doubled (in centered order) while the best ratio keeps improving.
pub fn estimate_constant(g: &GroupModel, t: &OperatorSpec, p: f64, cfg: &EstimatorConfig) -> Result<Estimate> {
    check_p(p)?;
    check_estimable(t)?;
    if cfg.restarts < 1 {
        return Err(Error::validation("restarts", "at least one restart is needed"));
    }
    let dim = t.domain().dim;
    if t.is_zero() {
        return Ok(Estimate {
            bound: 0.0,
            error: 0.0,
            p,
            restarts: 1,
            converged: true,
            trace: vec![RestartTrace { support: 1, ratio: 0.0, iterations: 0, converged: true }],
            witness: delta_witness(g, t.domain()),
            config: cfg.clone(),
        });
    }
    let total = usize::try_from(g.index_count()).unwrap_or(usize::MAX);
    let cap = total.min(cfg.max_support.max(1));
    let default_support = if g.is_finite() { cap } else { 4 };
    let mut k = cfg.support.unwrap_or(default_support).clamp(1, cap);
    let centered = g.centered_indices();

    let mut trace = Vec::new();
    let mut best: Option<(f64, bool, VecFunction)> = None;
    let mut previous_level = f64::NEG_INFINITY;
    for level in 0.. {
        let support: Vec<Vec<i64>> = centered[..k].to_vec();
        let obj = Objective::new(g, t, p, support.clone(), cfg.angles)?;
        let mut starts: Vec<Vec<Vec<Complex64>>> = (0..cfg.restarts)
            .map(|i| {
                let mut rng = stream(cfg.seed, level, i);
                match (i, &best) {
                    (0, None) => {
                        let mut x = vec![vec![Complex64::new(0.0, 0.0); dim]; k];
                        x[0] = random_start(&mut rng, 1, dim).remove(0);
                        x
                    }
                    (0, Some((_, _, w))) => restrict(w, &support, dim),
                    _ => random_start(&mut rng, k, dim),
                }
            })
            .collect();
        starts.extend(cfg.warm_starts.iter().filter(|w| w.model() == g).map(|w| restrict(w, &support, dim)));
        let runs: Vec<Ascent> = starts.into_par_iter().map(|x| ascend(&obj, x, cfg)).collect();
        trace.extend(runs.iter().map(|r| RestartTrace {
            support: k,
            ratio: r.ratio,
            iterations: r.iterations,
            converged: r.converged,
        }));
        // max by (ratio, lowest restart index)
        let top = runs.iter().fold(&runs[0], |acc, r| if r.ratio > acc.ratio { r } else { acc });
        let level_best = top.ratio;
        if best.as_ref().is_none_or(|b| level_best > b.0) {
            best = Some((level_best, top.converged, obj.to_function(g, &top.x)));
        }
        let improved = level == 0 || level_best > previous_level * (1.0 + 1e-6);
        previous_level = previous_level.max(level_best);
        if k >= cap || !improved {
            break;
        }
        k = (2 * k).min(cap);
    }
    let (_, converged, witness) = best.expect("at least one level runs");
    let witness = drop_zero_terms(&witness);
    let certified = ratio_with(g, t, p, &witness, &NormConfig { tol: cfg.norm_tolerance, ..Default::default() })?;
    Ok(Estimate {
        bound: certified.value,
        error: certified.error,
        p,
        restarts: trace.len(),
        converged,
        trace,
        witness,
        config: cfg.clone(),
    })
}

fn drop_zero_terms(f: &VecFunction) -> VecFunction {
    let zero = Complex64::new(0.0, 0.0);
    let terms = f.terms().iter().filter(|(_, v)| v.iter().any(|z| *z != zero));
    let kept = VecFunction::from_terms(f.model().clone(), f.space(), terms.map(|(k, v)| (k.clone(), v.clone())))
        .expect("subset of a valid function");
    if kept.terms().is_empty() {
        f.clone()
    } else {
        kept
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BruteForceConfig {
    /// Maximum real search dimension `2 dim_X |support|`.
    pub cap: usize,
    /// Coarse grid points per real coordinate.
    pub points: usize,
    /// Coarse candidates refined by the pattern search.
    pub keep: usize,
    /// Final pattern spacing.
    pub min_step: f64,
    /// Support size; defaults to every point of the model.
    pub support: Option<usize>,
    pub angles: usize,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        BruteForceConfig { cap: 6, points: 9, keep: 4, min_step: 1e-7, support: None, angles: DEFAULT_ANGLES }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BruteForce {
    pub value: f64,
    /// Largest ratio change to a neighbouring grid point at the final spacing,
    /// plus the certification error.
    pub grid_error: f64,
    pub witness: VecFunction,
}

fn unpack(v: &[f64], support: usize, dim: usize) -> Vec<Vec<Complex64>> {
    (0..support)
        .map(|s| (0..dim).map(|d| Complex64::new(v[2 * (s * dim + d)], v[2 * (s * dim + d) + 1])).collect())
        .collect()
}

/// Grid search for `||T | FT_p^G||` on tiny instances.
///
/// Since the ratio is scale-invariant, the surface of the coefficient cube
/// `[-1, 1]^D` meets every direction; it is scanned on a uniform grid, and the
/// best candidates are refined by a `3^D` pattern search with halving spacing.
pub fn brute_force_constant(g: &GroupModel, t: &OperatorSpec, p: f64, cfg: &BruteForceConfig) -> Result<BruteForce> {
    check_p(p)?;
    let dim = t.domain().dim;
    let total = usize::try_from(g.index_count()).unwrap_or(usize::MAX);
    let k = cfg.support.unwrap_or(total).clamp(1, total);
    let d = 2 * dim * k;
    if d > cfg.cap {
        return Err(Error::Capability(format!(
            "brute force search dimension {d} exceeds the cap {}",
            cfg.cap
        )));
    }
    if t.is_zero() {
        return Ok(BruteForce { value: 0.0, grid_error: 0.0, witness: delta_witness(g, t.domain()) });
    }
    let support: Vec<Vec<i64>> = g.centered_indices()[..k].to_vec();
    let obj = Objective::new(g, t, p, support, cfg.angles)?;
    let eval = |v: &[f64]| {
        let r = obj.log_ratio(&unpack(v, k, dim)).exp();
        if r.is_finite() { r } else { 0.0 }
    };

    let m = cfg.points.max(3);
    let h0 = 2.0 / (m - 1) as f64;
    let count = (m as u64).pow(d as u32);
    let decode = |mut n: u64| -> Option<Vec<f64>> {
        let mut v = Vec::with_capacity(d);
        let mut on_surface = false;
        for _ in 0..d {
            let j = (n % m as u64) as usize;
            n /= m as u64;
            on_surface |= j == 0 || j == m - 1;
            v.push(-1.0 + h0 * j as f64);
        }
        on_surface.then_some(v)
    };
    let mut coarse: Vec<(f64, u64)> = (0..count)
        .into_par_iter()
        .filter_map(|n| decode(n).map(|v| (eval(&v), n)))
        .collect();
    coarse.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let offsets: Vec<Vec<f64>> = (0..3u64.pow(d as u32))
        .map(|mut n| {
            (0..d)
                .map(|_| {
                    let j = (n % 3) as f64 - 1.0;
                    n /= 3;
                    j
                })
                .collect()
        })
        .filter(|o: &Vec<f64>| o.iter().any(|&x| x != 0.0))
        .collect();
    let neighbours = |v: &[f64], h: f64| -> Vec<Vec<f64>> {
        offsets.iter().map(|o| v.iter().zip(o).map(|(a, b)| a + h * b).collect()).collect()
    };

    let refined: Vec<(f64, f64, Vec<f64>)> = coarse
        .iter()
        .take(cfg.keep.max(1))
        .map(|&(val, n)| {
            let mut v = decode(n).expect("kept points lie on the surface");
            let mut best = val;
            let mut h = h0 / 2.0;
            let mut last_h = h;
            while h >= cfg.min_step {
                last_h = h;
                for _ in 0..1000 {
                    let cand = neighbours(&v, h)
                        .into_par_iter()
                        .map(|w| (eval(&w), w))
                        .reduce_with(|a, b| if b.0 > a.0 { b } else { a });
                    match cand {
                        Some((r, w)) if r > best => {
                            best = r;
                            v = w;
                        }
                        _ => break,
                    }
                }
                h /= 2.0;
            }
            let spread = neighbours(&v, last_h).iter().map(|w| (eval(w) - best).abs()).fold(0.0, f64::max);
            (best, spread, v)
        })
        .collect();
    let (_, spread, v) = refined
        .into_iter()
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one candidate");
    let witness = obj.to_function(g, &unpack(&v, k, dim));
    let certified = ratio(g, t, p, &witness)?;
    Ok(BruteForce { value: certified.value, grid_error: spread + certified.error, witness })
}
