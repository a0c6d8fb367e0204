//! Executable checks of the Fourier-type inequalities.
//!
//! Where a proof transports witnesses, the check does the same thing per
//! witness and compares exact (or certified) ratios. Suprema are only
//! approached through `estimate_constant`, which gives lower bounds, so the
//! statements about constants are checked as two-sided agreement of estimates
//! within a stated tolerance.
//!
//! Every comparison is recorded as a signed slack (positive = holds) with its
//! own error budget; it passes iff `slack >= -budget`. The report shows the
//! tightest comparison, so a failed report always has `margin < -budget`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ftype::{check_p, estimate_constant, ratio_with, EstimatorConfig};
use crate::group::{Factor, GroupModel, SubgroupDecomposition};
use crate::operator::{dual_operator, OperatorSpec};
use crate::quadrature::{integrate_periodic, QuadConfig};
use crate::sinc::{pole_distance, sinc_power_sum, DEFAULT_TRUNCATION};
use crate::transform::{
    fourier, grid_discretize, interleave, make_interleaving, step_extension, tensor_transform, weil_decompose,
    zero_extend, Embedding,
};
use crate::vecfun::{conjugate, lp_integral, lp_norm_with, random_function, NormConfig, VecFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub part: String,
    pub slack: f64,
    pub budget: f64,
    /// Offending witness, for replay.
    pub witness: Option<VecFunction>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub params: BTreeMap<String, Value>,
    pub verdict: Verdict,
    /// Slack of the tightest comparison (signed; negative means violated).
    pub margin: f64,
    pub witnesses: usize,
    /// Error budget of the tightest comparison.
    pub budget: f64,
    /// Largest budget over every comparison.
    pub max_budget: f64,
    pub failures: Vec<Failure>,
    /// Named quantities worth reporting, e.g. the two estimates of a duality check.
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Tolerances and witness battery shared by the checks.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub seed: u64,
    /// Random witnesses per check (structured ones come on top).
    pub witnesses: usize,
    /// Random witnesses for checks that integrate over two torus axes per witness.
    pub integral_witnesses: usize,
    /// Support size of random witnesses on infinite models.
    pub support: usize,
    /// Lattice window of the `Z` axes witnesses live on.
    pub window: u32,
    /// Relative tolerance of exact finite identities.
    pub exact_tol: f64,
    /// Relative tolerance of per-witness ratio transports.
    pub transport_tol: f64,
    /// Relative tolerance of quadrature identities between integrals.
    pub integral_tol: f64,
    /// Relative tolerance of estimate-level comparisons.
    pub estimate_tol: f64,
    /// Relative tolerance of the duality comparison.
    pub duality_tol: f64,
    /// Absolute tolerance of the sinc-sum bound.
    pub sinc_tol: f64,
    pub norm: NormConfig,
    pub estimator: EstimatorConfig,
    /// Run the estimate-level parts (slow on infinite models).
    pub estimates: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            witnesses: 20,
            integral_witnesses: 10,
            support: 5,
            window: 4,
            exact_tol: 1e-12,
            transport_tol: 1e-10,
            integral_tol: 1e-7,
            estimate_tol: 1e-4,
            duality_tol: 0.05,
            sinc_tol: 1e-9,
            norm: NormConfig::default(),
            estimator: EstimatorConfig::default(),
            estimates: true,
        }
    }
}

impl CheckConfig {
    fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig { seed: self.seed, ..self.estimator.clone() }
    }

    fn witness_seed(&self, i: usize) -> u64 {
        self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64)
    }
}

struct Comparison {
    part: String,
    slack: f64,
    budget: f64,
    witness: Option<VecFunction>,
}

struct Tally {
    id: &'static str,
    params: BTreeMap<String, Value>,
    witnesses: usize,
    comparisons: Vec<Comparison>,
    values: BTreeMap<String, f64>,
    notes: Vec<String>,
}

impl Tally {
    fn new(id: &'static str) -> Self {
        Tally {
            id,
            params: BTreeMap::new(),
            witnesses: 0,
            comparisons: Vec::new(),
            values: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn param(&mut self, key: &str, v: impl Serialize) -> &mut Self {
        self.params.insert(key.into(), serde_json::to_value(v).unwrap_or(Value::Null));
        self
    }

    /// Records `lhs <= rhs` as slack `rhs - lhs`.
    fn le(&mut self, part: &str, lhs: f64, rhs: f64, budget: f64, witness: Option<&VecFunction>) {
        self.record(part, rhs - lhs, budget, witness);
    }

    fn record(&mut self, part: &str, slack: f64, budget: f64, witness: Option<&VecFunction>) {
        let slack = if slack.is_nan() { f64::NEG_INFINITY } else { slack };
        self.comparisons.push(Comparison { part: part.into(), slack, budget, witness: witness.cloned() });
    }

    fn finish(self) -> CheckReport {
        let worst = self
            .comparisons
            .iter()
            .min_by(|a, b| (a.slack + a.budget).total_cmp(&(b.slack + b.budget)));
        let (margin, budget) = worst.map_or((0.0, 0.0), |c| (c.slack, c.budget));
        let max_budget = self.comparisons.iter().map(|c| c.budget).fold(0.0, f64::max);
        let failures: Vec<Failure> = self
            .comparisons
            .iter()
            .filter(|c| !(c.slack >= -c.budget))
            .map(|c| Failure { part: c.part.clone(), slack: c.slack, budget: c.budget, witness: c.witness.clone() })
            .collect();
        CheckReport {
            id: self.id.into(),
            params: self.params,
            verdict: if failures.is_empty() { Verdict::Pass } else { Verdict::Fail },
            margin,
            witnesses: self.witnesses,
            budget,
            max_budget,
            failures,
            values: self.values,
            notes: self.notes,
        }
    }
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn require_finite(g: &GroupModel) -> Result<()> {
    let all_cyclic = g.factors().iter().all(|f| matches!(f, Factor::Cyclic { .. }));
    if all_cyclic {
        Ok(())
    } else {
        Err(Error::Domain(format!("this check needs a finite model, got {g}")))
    }
}

fn operator_params(t: &OperatorSpec) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

/// `delta_0 (x) e_1`.
fn delta(g: &GroupModel, t: &OperatorSpec) -> VecFunction {
    let mut e = vec![Complex64::new(0.0, 0.0); t.domain().dim];
    e[0] = Complex64::new(1.0, 0.0);
    VecFunction::from_terms(g.clone(), t.domain(), [(g.identity(), e)]).expect("identity lies in every model")
}

fn full_support(g: &GroupModel) -> usize {
    usize::try_from(g.index_count()).unwrap_or(usize::MAX)
}

/// Default sample points for the sinc-sum check: 25 in `(0, pi)`, 25 in `(pi, 4 pi)`.
pub fn default_sinc_samples() -> Vec<f64> {
    let inner = (0..25).map(|k| (k as f64 + 0.5) * PI / 25.0);
    let outer = (0..25).map(|k| PI + (k as f64 + 0.5) * 3.0 * PI / 25.0);
    inner.chain(outer).collect()
}

/// `sum_n |sin s / (s - n pi)|^p' <= 1` at every sample, with equality at
/// `p' = 2`. The upper end of a rigorous enclosure (partial sum plus tail
/// bound) is compared with 1.
pub fn check_sinc_sum(p_dual: f64, samples: &[f64], truncation: usize, cfg: &CheckConfig) -> Result<CheckReport> {
    if !(p_dual >= 2.0 && p_dual.is_finite()) {
        return Err(Error::validation("p'", format!("exponent must be ≥ 2, got {p_dual}")));
    }
    let mut tally = Tally::new("sinc_sum");
    tally.param("p_dual", p_dual).param("samples", samples.len()).param("truncation", truncation);
    for &s in samples {
        if pole_distance(s) < 1e-8 {
            tally.notes.push(format!("skipped s = {s}: within 1e-8 of a multiple of pi"));
            continue;
        }
        tally.witnesses += 1;
        let e = sinc_power_sum(s, p_dual, truncation);
        tally.le("bound", e.hi, 1.0, cfg.sinc_tol, None);
        if p_dual == 2.0 {
            let dev = (e.lo - 1.0).abs().max((e.hi - 1.0).abs());
            tally.record("identity", -dev, cfg.sinc_tol, None);
        }
    }
    Ok(tally.finish())
}

pub fn check_sinc_sum_default(p_dual: f64, cfg: &CheckConfig) -> Result<CheckReport> {
    check_sinc_sum(p_dual, &default_sinc_samples(), DEFAULT_TRUNCATION, cfg)
}

/// `||F f||_2 = ||f||_2` on a finite model.
pub fn check_parseval(g: &GroupModel, dim: usize, cfg: &CheckConfig) -> Result<CheckReport> {
    require_finite(g)?;
    let space = crate::vecfun::BanachSpec::new(dim, 2.0)?;
    let mut tally = Tally::new("parseval");
    tally.param("group", g.to_string()).param("dim", dim).param("seed", cfg.seed);
    let n = full_support(g);
    let mut battery = Vec::new();
    for i in 0..cfg.witnesses {
        battery.push(random_function(g, n, space, cfg.witness_seed(i))?);
    }
    let t = OperatorSpec::identity(dim, 2.0)?;
    battery.push(delta(g, &t));
    let one = vec![Complex64::new(1.0, 0.0); dim];
    battery.push(VecFunction::from_terms(g.clone(), space, g.indices().into_iter().map(|k| (k, one.clone())))?);
    for f in &battery {
        tally.witnesses += 1;
        let a = lp_norm_with(f, 2.0, &cfg.norm)?.value;
        let b = lp_norm_with(&fourier(g, f)?, 2.0, &cfg.norm)?.value;
        tally.record("norm", -relative(a, b), cfg.exact_tol, Some(f));
    }
    Ok(tally.finish())
}

/// `int_G ||f||^p = int_{G/H} int_H ||f(s + h)||^p` with `mu_G` and `mu_H`
/// counting and `mu_{G/H}` the counting measure on coset representatives.
pub fn check_weil(g: &GroupModel, h: &SubgroupDecomposition, dim: usize, p: f64, cfg: &CheckConfig) -> Result<CheckReport> {
    require_finite(g)?;
    if h.parent() != g {
        return Err(Error::Domain(format!("subgroup of {}, not of {g}", h.parent())));
    }
    let space = crate::vecfun::BanachSpec::new(dim, 2.0)?;
    let mut tally = Tally::new("weil");
    tally
        .param("group", g.to_string())
        .param("subgroup", h.basis())
        .param("index", h.index())
        .param("p", p)
        .param("seed", cfg.seed);
    for i in 0..cfg.witnesses {
        let f = random_function(g, full_support(g), space, cfg.witness_seed(i))?;
        tally.witnesses += 1;
        let whole = lp_integral(&f, p, &cfg.norm)?.value;
        let mut double = 0.0;
        for part in weil_decompose(&f, h)? {
            double += lp_integral(&part, p, &cfg.norm)?.value;
        }
        tally.record("integral", -relative(whole, double), cfg.exact_tol, Some(&f));
    }
    Ok(tally.finish())
}

fn ratio_check(
    g: &GroupModel,
    t: &OperatorSpec,
    p: f64,
    f: &VecFunction,
    cfg: &CheckConfig,
) -> Result<crate::vecfun::NormResult> {
    ratio_with(g, t, p, f, &cfg.norm)
}

fn open_subgroup_parts(
    tally: &mut Tally,
    g: &GroupModel,
    h: &SubgroupDecomposition,
    t: &OperatorSpec,
    p: f64,
    cfg: &CheckConfig,
) -> Result<()> {
    let hm = h.model();
    let mut battery = vec![delta(hm, t)];
    for i in 0..cfg.witnesses {
        battery.push(random_function(hm, full_support(hm), t.domain(), cfg.witness_seed(i))?);
    }
    for f in &battery {
        tally.witnesses += 1;
        let rh = ratio_check(hm, t, p, f, cfg)?.value;
        let rg = ratio_check(g, t, p, &zero_extend(f, &Embedding::Subgroup(h))?, cfg)?.value;
        tally.record("transport", -relative(rh, rg), cfg.transport_tol, Some(f));
    }
    Ok(())
}

fn subgroup_params(tally: &mut Tally, g: &GroupModel, h: &SubgroupDecomposition, t: &OperatorSpec, p: f64, cfg: &CheckConfig) {
    tally
        .param("group", g.to_string())
        .param("subgroup", h.basis())
        .param("subgroup_model", h.model().to_string())
        .param("index", h.index())
        .param("operator", operator_params(t))
        .param("p", p)
        .param("seed", cfg.seed);
}

/// `ratio_H(f) = ratio_G(zero_extend f)` per witness, and
/// `estimate(H) <= estimate(G)` up to the estimate tolerance.
pub fn check_open_subgroup(
    g: &GroupModel,
    h: &SubgroupDecomposition,
    t: &OperatorSpec,
    p: f64,
    cfg: &CheckConfig,
) -> Result<CheckReport> {
    check_p(p)?;
    require_finite(g)?;
    let mut tally = Tally::new("open_subgroup");
    subgroup_params(&mut tally, g, h, t, p, cfg);
    open_subgroup_parts(&mut tally, g, h, t, p, cfg)?;
    if cfg.estimates {
        let est = cfg.estimator();
        let eh = estimate_constant(h.model(), t, p, &est)?;
        let eg = estimate_constant(g, t, p, &est)?;
        tally.values.insert("estimate_subgroup".into(), eh.bound);
        tally.values.insert("estimate_group".into(), eg.bound);
        let scale = eh.bound.max(eg.bound).max(f64::MIN_POSITIVE);
        tally.le("estimate", eh.bound / scale, eg.bound / scale, cfg.estimate_tol, None);
    }
    Ok(tally.finish())
}

/// Coset-decomposition bound: (a) the open-subgroup transport; (b) per
/// witness `||[F^G,T] f||_{p'} <= n^{1/p'} max_i ratio_H(f_i) ||f||_p` with
/// `f_i(h) = f(s_i + h)`; (c) the estimate sandwich
/// `estimate(H) <= estimate(G) <= n^{1/p'} estimate(H)`.
pub fn check_fcc(g: &GroupModel, h: &SubgroupDecomposition, t: &OperatorSpec, p: f64, cfg: &CheckConfig) -> Result<CheckReport> {
    check_p(p)?;
    require_finite(g)?;
    let pp = conjugate(p);
    let n = h.index() as f64;
    let factor = n.powf(1.0 / pp);
    let mut tally = Tally::new("fcc");
    subgroup_params(&mut tally, g, h, t, p, cfg);
    tally.values.insert("index_factor".into(), factor);
    open_subgroup_parts(&mut tally, g, h, t, p, cfg)?;

    let mut battery = vec![delta(g, t)];
    // a function living on a single coset s_1 + H
    if let Some(s) = h.representatives().get(1).or(h.representatives().first()) {
        let on_h = random_function(h.model(), full_support(h.model()), t.domain(), cfg.witness_seed(0))?;
        let mut f = VecFunction::zero(g.clone(), t.domain());
        for (k, v) in on_h.terms() {
            f.insert(g.add(s, &h.embed(k)?), v.clone())?;
        }
        battery.push(f);
    }
    for i in 0..cfg.witnesses {
        battery.push(random_function(g, full_support(g), t.domain(), cfg.witness_seed(i))?);
    }
    for f in &battery {
        tally.witnesses += 1;
        let lhs = lp_norm_with(&tensor_transform(g, t, f)?, pp, &cfg.norm)?.value;
        let norm = lp_norm_with(f, p, &cfg.norm)?.value;
        let mut worst: f64 = 0.0;
        for part in weil_decompose(f, h)? {
            if !part.is_zero() {
                worst = worst.max(ratio_check(h.model(), t, p, &part, cfg)?.value);
            }
        }
        let rhs = factor * worst * norm;
        let scale = rhs.max(lhs).max(f64::MIN_POSITIVE);
        tally.le("coset_bound", lhs / scale, rhs / scale, cfg.exact_tol, Some(f));
    }

    if cfg.estimates {
        let est = cfg.estimator();
        let eh = estimate_constant(h.model(), t, p, &est)?;
        let eg = estimate_constant(g, t, p, &est)?;
        tally.values.insert("estimate_subgroup".into(), eh.bound);
        tally.values.insert("estimate_group".into(), eg.bound);
        let scale = eh.bound.max(eg.bound).max(f64::MIN_POSITIVE);
        tally.le("sandwich_lower", eh.bound / scale, eg.bound / scale, cfg.estimate_tol, None);
        tally.le("sandwich_upper", eg.bound / scale, factor * eh.bound / scale, cfg.estimate_tol, None);
    }
    Ok(tally.finish())
}

/// `estimate(G, T) ~ estimate(G', T')` within the duality tolerance.
pub fn check_duality(g: &GroupModel, t: &OperatorSpec, p: f64, cfg: &CheckConfig) -> Result<CheckReport> {
    check_p(p)?;
    require_finite(g)?;
    let mut tally = Tally::new("duality");
    tally.param("group", g.to_string()).param("operator", operator_params(t)).param("p", p).param("seed", cfg.seed);
    let est = cfg.estimator();
    let a = estimate_constant(g, t, p, &est)?;
    let gd = g.dual();
    let b = estimate_constant(&gd, &dual_operator(t), p, &est)?;
    tally.witnesses = a.restarts + b.restarts;
    tally.values.insert("estimate".into(), a.bound);
    tally.values.insert("estimate_dual".into(), b.bound);
    tally.record("agreement", -relative(a.bound, b.bound), cfg.duality_tol, None);
    Ok(tally.finish())
}

fn lattice_times(windows: usize, window: u32, g: &GroupModel) -> Result<GroupModel> {
    let lat = GroupModel::from_factors(vec![Factor::Lattice { window }; windows])?;
    Ok(lat.product(g))
}

/// Witnesses on a lattice model: a delta atom, a single off-centre cell, and
/// seeded random functions.
fn lattice_battery(m: &GroupModel, t: &OperatorSpec, count: usize, cfg: &CheckConfig) -> Result<Vec<VecFunction>> {
    let mut battery = vec![delta(m, t)];
    let mut cell = m.identity();
    cell[0] = 1;
    let mut v = vec![Complex64::new(0.0, 0.0); t.domain().dim];
    v[0] = Complex64::new(0.6, -0.8);
    battery.push(VecFunction::from_terms(m.clone(), t.domain(), [(cell, v)])?);
    let support = cfg.support.min(full_support(m));
    for i in 0..count {
        battery.push(random_function(m, support, t.domain(), cfg.witness_seed(i))?);
    }
    Ok(battery)
}

/// Lattice versus real line: (a) per witness
/// `ratio_{Z x G}(f) <= (pi/2) ratio_{R x G}(step f)`; (b0) per witness
/// `ratio_{R x G}(h) <= ratio_{Z x G}(grid h)` for step functions `h`;
/// (b) `ratio_{R x G}(h) <= estimate(Z x G)`.
pub fn check_eqrz(g: &GroupModel, t: &OperatorSpec, p: f64, cfg: &CheckConfig) -> Result<CheckReport> {
    check_p(p)?;
    require_finite(g)?;
    let zg = lattice_times(1, cfg.window, g)?;
    let mut tally = Tally::new("eqrz");
    tally
        .param("group", g.to_string())
        .param("lattice_model", zg.to_string())
        .param("operator", operator_params(t))
        .param("p", p)
        .param("seed", cfg.seed);
    let battery = lattice_battery(&zg, t, cfg.witnesses, cfg)?;
    let mut steps = Vec::new();
    for (i, f) in battery.iter().enumerate() {
        tally.witnesses += 1;
        let rz = ratio_check(&zg, t, p, f, cfg)?;
        let delta = if i % 2 == 0 { 1.0 } else { 0.5 };
        let h = step_extension(f, delta)?;
        let rr = ratio_check(h.model(), t, p, &h, cfg)?;
        let rhs = PI / 2.0 * rr.value;
        tally.le("transport", rz.value / rhs, 1.0, (rz.error + PI / 2.0 * rr.error) / rhs, Some(f));
        let (back, _) = grid_discretize(&h)?;
        debug_assert_eq!(&back, f);
        tally.le("kernel", rr.value / rz.value, 1.0, (rr.error + rz.error) / rz.value, Some(&h));
        steps.push((h, rr));
    }
    if cfg.estimates {
        let e = estimate_constant(&zg, t, p, &cfg.estimator())?;
        tally.values.insert("estimate_lattice".into(), e.bound);
        let top = steps.iter().map(|(_, r)| r.value).fold(0.0, f64::max);
        tally.values.insert("best_real_ratio".into(), top);
        for (h, rr) in &steps {
            tally.le(
                "estimate",
                rr.value / e.bound,
                1.0,
                cfg.estimate_tol + (rr.error + e.error) / e.bound,
                Some(h),
            );
        }
    }
    Ok(tally.finish())
}

/// Angles at which the interleaving norm identity is sampled.
const INTERLEAVE_ANGLES: [f64; 4] = [0.0, 1.0, -2.5, PI];

/// Two lattice axes versus one: (a) `||f||_p = ||interleave(f, s2)||_p`;
/// (b) `||[F,T] f||^{p'} = int ||[F,T] interleave(f, s2)||^{p'} ds2 / 2 pi`;
/// (c) pinning the second axis at 0 preserves the ratio.
pub fn check_zng(g: &GroupModel, t: &OperatorSpec, p: f64, cfg: &CheckConfig) -> Result<CheckReport> {
    check_p(p)?;
    require_finite(g)?;
    let pp = conjugate(p);
    let z2g = lattice_times(2, cfg.window, g)?;
    let zg = lattice_times(1, cfg.window, g)?;
    let mut tally = Tally::new("zng");
    tally
        .param("group", g.to_string())
        .param("lattice_model", z2g.to_string())
        .param("operator", operator_params(t))
        .param("p", p)
        .param("seed", cfg.seed);
    // both sides to well within the identity tolerance
    let tol = cfg.integral_tol * 1e-2;
    let inner = NormConfig { tol, ..cfg.norm };
    let quad = QuadConfig { abs_tol: tol, rel_tol: tol, initial_panels: 2, ..QuadConfig::default() };
    for f in &lattice_battery(&z2g, t, cfg.integral_witnesses, cfg)? {
        tally.witnesses += 1;
        let plan = make_interleaving(f)?;
        let norm = lp_norm_with(f, p, &cfg.norm)?.value;
        for &s2 in &INTERLEAVE_ANGLES {
            let other = lp_norm_with(&interleave(f, &plan, s2)?, p, &cfg.norm)?.value;
            tally.record("norm", -relative(norm, other), cfg.exact_tol, Some(f));
        }
        let lhs = lp_integral(&tensor_transform(&z2g, t, f)?, pp, &inner)?;
        let mut failure = None;
        let res = integrate_periodic(
            |s2| {
                let r = interleave(f, &plan, s2)
                    .and_then(|w| tensor_transform(&plan.target, t, &w))
                    .and_then(|w| lp_integral(&w, pp, &inner));
                match r {
                    Ok(r) => (r.value, r.error),
                    Err(e) => {
                        failure.get_or_insert(e);
                        (f64::NAN, 0.0)
                    }
                }
            },
            &quad,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let rhs = res.value / (2.0 * PI);
        tally.record("integral", -relative(lhs.value, rhs), cfg.integral_tol, Some(f));
    }
    // pinned embedding of Z x G witnesses
    let mut positions = vec![0];
    positions.extend(2..z2g.rank());
    let pin = Embedding::Pinned { target: z2g.clone(), positions };
    for f in &lattice_battery(&zg, t, cfg.integral_witnesses, cfg)? {
        tally.witnesses += 1;
        let a = ratio_check(&zg, t, p, f, cfg)?;
        let b = ratio_check(&z2g, t, p, &zero_extend(f, &pin)?, cfg)?;
        let budget = cfg.transport_tol + (a.error + b.error) / a.value.max(b.value);
        tally.record("pinned", -relative(a.value, b.value), budget, Some(f));
    }
    Ok(tally.finish())
}
