//! Finitely supported vector-valued functions on group models and their
//! Bochner `L_p` norms.
//!
//! A [`VecFunction`] stores a sparse map from multi-indices to coefficient
//! vectors. What an index means is fixed by each factor of the model (see
//! [`crate::group`]); in particular functions on a `Torus` axis are
//! trigonometric polynomials and functions on a `RealFreq` axis are sums of
//! cell spectra, so Fourier transforms of finitely supported data stay exact.
//!
//! Norms over the frequency line are computed by folding onto one period:
//! with `F(s) = sum_m g_m exp(i m delta s) sin(delta s/2)/(s/2)` and
//! `P(phi) = sum_m g_m exp(i m phi)`,
//!
//! ```text
//! int_R |F(s)|^r ds/2pi = delta^(r-1) int_{-pi}^{pi} |P(phi)|^r K_r(phi) dphi/2pi
//! ```
//!
//! where `K_r` is the periodized sinc kernel of [`crate::sinc::fold_kernel`].

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Factor, GroupModel};
use crate::operator::OperatorSpec;
use crate::quadrature::{integrate_periodic, QuadConfig};
use crate::sinc::{self, Enclosure};

/// `l_q^dim` over the complex numbers, `1 <= q <= inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDoc", into = "SpaceDoc")]
pub struct BanachSpec {
    pub dim: usize,
    pub q: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Exponent {
    Finite(f64),
    Named(String),
}

#[derive(Serialize, Deserialize)]
struct SpaceDoc {
    dim: usize,
    q: Exponent,
}

impl TryFrom<SpaceDoc> for BanachSpec {
    type Error = Error;

    fn try_from(d: SpaceDoc) -> Result<Self> {
        let q = match d.q {
            Exponent::Finite(q) => q,
            Exponent::Named(s) if s == "inf" => f64::INFINITY,
            Exponent::Named(s) => return Err(Error::validation("q", format!("unknown exponent {s:?}"))),
        };
        BanachSpec::new(d.dim, q)
    }
}

impl From<BanachSpec> for SpaceDoc {
    fn from(s: BanachSpec) -> Self {
        let q = if s.q.is_infinite() { Exponent::Named("inf".into()) } else { Exponent::Finite(s.q) };
        SpaceDoc { dim: s.dim, q }
    }
}

/// Conjugate exponent `r / (r - 1)`, with `1 <-> inf`.
pub fn conjugate(r: f64) -> f64 {
    if r == 1.0 {
        f64::INFINITY
    } else if r.is_infinite() {
        1.0
    } else {
        r / (r - 1.0)
    }
}

impl BanachSpec {
    pub fn new(dim: usize, q: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::validation("dim", "dimension must be ≥ 1"));
        }
        if !(q >= 1.0) {
            return Err(Error::validation("q", format!("exponent must lie in [1, inf], got {q}")));
        }
        Ok(BanachSpec { dim, q })
    }

    pub fn dual(&self) -> BanachSpec {
        BanachSpec { dim: self.dim, q: conjugate(self.q) }
    }

    /// True when the `l_q` norm is differentiable away from zero.
    pub fn is_smooth(&self) -> bool {
        self.q > 1.0 && self.q.is_finite()
    }

    pub fn norm(&self, x: &[Complex64]) -> f64 {
        let m = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if m == 0.0 || self.q.is_infinite() {
            return m;
        }
        if self.q == 2.0 {
            return m * x.iter().map(|z| (z / m).norm_sqr()).sum::<f64>().sqrt();
        }
        if self.q == 1.0 {
            return x.iter().map(|z| z.norm()).sum();
        }
        m * x.iter().map(|z| (z.norm() / m).powf(self.q)).sum::<f64>().powf(1.0 / self.q)
    }
}

impl fmt::Display for BanachSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l_{}^{}", self.q, self.dim)
    }
}

/// How the coefficients of a function are to be read; derived from its model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    PointValues,
    TrigPoly,
    SincSeries,
}

impl Representation {
    pub fn of(model: &GroupModel) -> Self {
        let has = |pred: fn(&Factor) -> bool| model.factors().iter().any(pred);
        if has(|f| matches!(f, Factor::RealFreq { .. })) {
            Representation::SincSeries
        } else if has(|f| matches!(f, Factor::Torus { .. })) {
            Representation::TrigPoly
        } else {
            Representation::PointValues
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NormResult {
    pub value: f64,
    /// Absolute error bound; zero on purely discrete models.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VecFunction {
    model: GroupModel,
    space: BanachSpec,
    terms: BTreeMap<Vec<i64>, Vec<Complex64>>,
}

impl VecFunction {
    pub fn zero(model: GroupModel, space: BanachSpec) -> Self {
        VecFunction { model, space, terms: BTreeMap::new() }
    }

    pub fn from_terms<I>(model: GroupModel, space: BanachSpec, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Vec<Complex64>)>,
    {
        let mut f = VecFunction::zero(model, space);
        for (idx, c) in terms {
            f.insert(idx, c)?;
        }
        Ok(f)
    }

    /// Sets the coefficient at `idx`, replacing any previous value.
    pub fn insert(&mut self, idx: Vec<i64>, coeffs: Vec<Complex64>) -> Result<()> {
        if !self.model.contains_index(&idx) {
            return Err(Error::Domain(format!("index {idx:?} outside model {}", self.model)));
        }
        if coeffs.len() != self.space.dim {
            return Err(Error::Domain(format!(
                "coefficient vector of length {} in a space of dimension {}",
                coeffs.len(),
                self.space.dim
            )));
        }
        self.terms.insert(idx, coeffs);
        Ok(())
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn space(&self) -> BanachSpec {
        self.space
    }

    pub fn representation(&self) -> Representation {
        Representation::of(&self.model)
    }

    pub fn terms(&self) -> &BTreeMap<Vec<i64>, Vec<Complex64>> {
        &self.terms
    }

    pub fn get(&self, idx: &[i64]) -> Option<&[Complex64]> {
        self.terms.get(idx).map(Vec::as_slice)
    }

    pub fn support(&self) -> Vec<Vec<i64>> {
        self.terms.keys().cloned().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().flatten().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> VecFunction {
        self.map(|v| v.iter().map(|z| z * c).collect())
    }

    pub fn map(&self, f: impl Fn(&[Complex64]) -> Vec<Complex64>) -> VecFunction {
        VecFunction {
            model: self.model.clone(),
            space: self.space,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), f(v))).collect(),
        }
    }

    /// Pointwise sum; both functions must live on the same model and space.
    pub fn add(&self, other: &VecFunction) -> Result<VecFunction> {
        if self.model != other.model || self.space != other.space {
            return Err(Error::Domain("sum of functions on different models or spaces".into()));
        }
        let mut terms = self.terms.clone();
        for (k, v) in &other.terms {
            let e = terms.entry(k.clone()).or_insert_with(|| vec![Complex64::new(0.0, 0.0); v.len()]);
            for (a, b) in e.iter_mut().zip(v) {
                *a += b;
            }
        }
        Ok(VecFunction { terms, ..self.clone() })
    }

    /// Same coefficients on another model and space (caller checks validity).
    pub(crate) fn with_parts(
        model: GroupModel,
        space: BanachSpec,
        terms: BTreeMap<Vec<i64>, Vec<Complex64>>,
    ) -> VecFunction {
        VecFunction { model, space, terms }
    }

    fn check_finite(&self) -> Result<()> {
        if self.terms.values().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Numeric("non-finite coefficient".into()));
        }
        Ok(())
    }

    /// Value at a point of the model: point or cell coordinates on pointwise
    /// axes, frequencies on the spectral axes.
    pub fn evaluate(&self, point: &[f64]) -> Result<Vec<Complex64>> {
        if point.len() != self.model.rank() {
            return Err(Error::Domain("point rank mismatch".into()));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.space.dim];
        'terms: for (idx, c) in &self.terms {
            let mut w = Complex64::new(1.0, 0.0);
            for ((f, &k), &x) in self.model.factors().iter().zip(idx).zip(point) {
                match *f {
                    Factor::Cyclic { .. } | Factor::Lattice { .. } => {
                        if x != k as f64 {
                            continue 'terms;
                        }
                    }
                    Factor::RealGrid { delta, .. } => {
                        if (x / delta).round() as i64 != k {
                            continue 'terms;
                        }
                    }
                    Factor::Torus { .. } => w *= Complex64::cis(k as f64 * x),
                    Factor::RealFreq { delta, .. } => {
                        w *= Complex64::cis(k as f64 * delta * x) * sinc::cell_factor(delta, x)
                    }
                }
            }
            for (o, z) in out.iter_mut().zip(c) {
                *o += w * z;
            }
        }
        Ok(out)
    }
}

/// Settings for continuum norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormConfig {
    /// Target absolute error of the norm.
    pub tol: f64,
    pub max_panels: usize,
    /// Truncation of the periodized sinc kernel.
    pub kernel_terms: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig { tol: 1e-9, max_panels: 4096, kernel_terms: sinc::DEFAULT_TRUNCATION }
    }
}

/// Terms of one pointwise fibre: spectral indices and coefficients.
pub(crate) type Fibre = Vec<(Vec<i64>, Vec<Complex64>)>;

/// Axis layout of a model: pointwise axes carry mass, spectral axes are
/// integrated.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub pointwise: Vec<usize>,
    pub spectral: Vec<usize>,
    /// Grid width of the folded frequency axis, if any, and its position in `spectral`.
    pub folded: Option<(usize, f64)>,
}

impl Layout {
    pub fn of(model: &GroupModel) -> Result<Layout> {
        let mut layout = Layout { pointwise: Vec::new(), spectral: Vec::new(), folded: None };
        for (i, f) in model.factors().iter().enumerate() {
            if f.is_pointwise() {
                layout.pointwise.push(i);
                continue;
            }
            if let Factor::RealFreq { delta, .. } = *f {
                if layout.folded.is_some() {
                    return Err(Error::Capability(format!(
                        "norms on {model} need at most one real frequency axis"
                    )));
                }
                layout.folded = Some((layout.spectral.len(), delta));
            }
            layout.spectral.push(i);
        }
        Ok(layout)
    }

    /// Groups terms by their pointwise coordinates; each fibre carries the
    /// product of the cell masses.
    pub fn fibres(&self, f: &VecFunction) -> Vec<(f64, Fibre)> {
        let factors = f.model().factors();
        let mut groups: BTreeMap<Vec<i64>, Fibre> = BTreeMap::new();
        for (idx, c) in f.terms() {
            let key = self.pointwise.iter().map(|&a| idx[a]).collect();
            let spec = self.spectral.iter().map(|&a| idx[a]).collect();
            groups.entry(key).or_default().push((spec, c.clone()));
        }
        let mass: f64 = self.pointwise.iter().map(|&a| factors[a].cell_mass().unwrap()).product();
        groups.into_values().map(|fib| (mass, fib)).collect()
    }

    /// Initial panel count for spectral axis `j`.
    pub fn panels(&self, model: &GroupModel, j: usize) -> usize {
        match model.factors()[self.spectral[j]] {
            Factor::Torus { resolution } => (resolution as usize / 4).max(4),
            Factor::RealFreq { window, .. } => (window as usize / 2).max(8),
            _ => unreachable!(),
        }
    }
}

/// Kernel values keyed by the exact bits of the node.
pub(crate) struct KernelCache {
    r: f64,
    terms: usize,
    memo: RefCell<HashMap<u64, Enclosure>>,
}

impl KernelCache {
    pub fn new(r: f64, terms: usize) -> Self {
        KernelCache { r, terms, memo: RefCell::new(HashMap::new()) }
    }

    pub fn get(&self, phi: f64) -> Enclosure {
        *self
            .memo
            .borrow_mut()
            .entry(phi.to_bits())
            .or_insert_with(|| sinc::fold_kernel(phi, self.r, self.terms))
    }
}

/// Collapses spectral axis 0 at angle `phi`, returning terms in the remaining axes.
fn collapse(terms: &[(Vec<i64>, Vec<Complex64>)], phi: f64) -> Fibre {
    let mut out: BTreeMap<Vec<i64>, Vec<Complex64>> = BTreeMap::new();
    for (idx, c) in terms {
        let w = Complex64::cis(idx[0] as f64 * phi);
        let e = out.entry(idx[1..].to_vec()).or_insert_with(|| vec![Complex64::new(0.0, 0.0); c.len()]);
        for (a, z) in e.iter_mut().zip(c) {
            *a += w * z;
        }
    }
    out.into_iter().collect()
}

struct FibreIntegral<'a> {
    model: &'a GroupModel,
    layout: &'a Layout,
    space: BanachSpec,
    r: f64,
    quad: QuadConfig,
    kernel: &'a KernelCache,
}

impl FibreIntegral<'_> {
    /// `int ||sum c exp(i k.phi)||^r (kernel) dphi/2pi` over axes `j..`.
    /// Inner levels get half the tolerance, so their inherited error cannot
    /// force the outer level to over-refine.
    fn integrate(&self, j: usize, terms: &[(Vec<i64>, Vec<Complex64>)], tol: f64) -> (f64, f64) {
        let folded = matches!(self.layout.folded, Some((a, _)) if a == j);
        let last = j + 1 == self.layout.spectral.len();
        let cfg = QuadConfig { initial_panels: self.layout.panels(self.model, j), abs_tol: tol, ..self.quad };
        let res = integrate_periodic(
            |phi| {
                let (v, e) = if last {
                    let mut y = vec![Complex64::new(0.0, 0.0); self.space.dim];
                    for (idx, c) in terms {
                        let w = Complex64::cis(idx[0] as f64 * phi);
                        for (a, z) in y.iter_mut().zip(c) {
                            *a += w * z;
                        }
                    }
                    (self.space.norm(&y).powf(self.r), 0.0)
                } else {
                    self.integrate(j + 1, &collapse(terms, phi), 0.5 * tol)
                };
                if folded {
                    let k = self.kernel.get(phi);
                    (v * k.mid(), e * k.hi + v * k.radius())
                } else {
                    (v, e)
                }
            },
            &cfg,
        );
        (res.value / (2.0 * PI), res.error / (2.0 * PI))
    }
}

/// `int ||f||^r dmu` with an absolute error bound.
pub fn lp_integral(f: &VecFunction, r: f64, cfg: &NormConfig) -> Result<NormResult> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::Domain(format!("exponent must lie in (1, inf), got {r}")));
    }
    f.check_finite()?;
    let layout = Layout::of(f.model())?;
    let fibres = layout.fibres(f);
    if layout.spectral.is_empty() {
        let value = fibres
            .iter()
            .flat_map(|(m, fib)| fib.iter().map(move |(_, c)| m * f.space().norm(c).powf(r)))
            .sum();
        return Ok(NormResult { value, error: 0.0 });
    }
    let kernel = KernelCache::new(r, cfg.kernel_terms);
    let per_fibre = cfg.tol / fibres.len().max(1) as f64;
    let job = FibreIntegral {
        model: f.model(),
        layout: &layout,
        space: f.space(),
        r,
        quad: QuadConfig { abs_tol: per_fibre, rel_tol: 0.0, initial_panels: 1, max_panels: cfg.max_panels },
        kernel: &kernel,
    };
    let scale = layout.folded.map_or(1.0, |(_, delta)| delta.powf(r - 1.0));
    let (mut value, mut error) = (0.0, 0.0);
    for (mass, fib) in &fibres {
        let (v, e) = job.integrate(0, fib, per_fibre);
        value += mass * scale * v;
        error += mass * scale * e;
    }
    Ok(NormResult { value, error })
}

/// Bound on `|I^(1/r) - J^(1/r)|` for any `J` within `e` of `I`.
pub(crate) fn root_error(i: f64, e: f64, r: f64) -> f64 {
    let root = i.max(0.0).powf(1.0 / r);
    let up = (i + e).max(0.0).powf(1.0 / r) - root;
    let down = root - (i - e).max(0.0).powf(1.0 / r);
    up.max(down)
}

pub fn lp_norm(f: &VecFunction, p: f64) -> Result<NormResult> {
    lp_norm_with(f, p, &NormConfig::default())
}

/// `||f | L_p||` with error bound; on continuum models the integral
/// tolerance is tightened until the bound on the root meets `cfg.tol`.
pub fn lp_norm_with(f: &VecFunction, p: f64, cfg: &NormConfig) -> Result<NormResult> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p must lie in (1, inf), got {p}")));
    }
    let mut inner = *cfg;
    let mut best = None;
    for _ in 0..4 {
        let NormResult { value: i, error: e } = lp_integral(f, p, &inner)?;
        let res = NormResult { value: i.max(0.0).powf(1.0 / p), error: root_error(i, e, p) };
        best = Some(res);
        if res.error <= cfg.tol || e == 0.0 {
            break;
        }
        inner.tol = (inner.tol * cfg.tol / res.error * 0.5).max(1e-15);
    }
    Ok(best.unwrap())
}

/// Applies `T` to every coefficient vector.
pub fn apply_operator(t: &OperatorSpec, f: &VecFunction) -> Result<VecFunction> {
    if f.space().dim != t.domain().dim {
        return Err(Error::Domain(format!(
            "operator domain has dimension {}, function space {}",
            t.domain().dim,
            f.space().dim
        )));
    }
    Ok(VecFunction {
        model: f.model.clone(),
        space: t.codomain(),
        terms: f.terms.iter().map(|(k, v)| (k.clone(), t.apply(v))).collect(),
    })
}

/// Mixed-radix decoding of a flat position in the model's lexicographic index order.
fn nth_index(model: &GroupModel, mut n: u64) -> Vec<i64> {
    let mut idx = vec![0; model.rank()];
    for (slot, f) in idx.iter_mut().zip(model.factors()).rev() {
        let (lo, hi) = f.index_range();
        let size = (hi - lo + 1) as u64;
        *slot = lo + (n % size) as i64;
        n /= size;
    }
    idx
}

/// Seeded random function: `support` distinct indices drawn uniformly without
/// replacement from the model's index range, then sorted; each coordinate of
/// each coefficient has real and imaginary parts uniform on `[-1, 1)`, drawn
/// in sorted index order. Uses a ChaCha8 stream.
pub fn random_function(
    model: &GroupModel,
    support: usize,
    space: BanachSpec,
    seed: u64,
) -> Result<VecFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_function_with(model, support, space, &mut rng)
}

pub(crate) fn random_function_with(
    model: &GroupModel,
    support: usize,
    space: BanachSpec,
    rng: &mut ChaCha8Rng,
) -> Result<VecFunction> {
    if support < 1 {
        return Err(Error::Domain("support size must be ≥ 1".into()));
    }
    let count = model.index_count();
    if support as u64 > count {
        return Err(Error::Domain(format!(
            "support size {support} exceeds the {count} indices of {model}"
        )));
    }
    let mut flat: Vec<u64> = rand::seq::index::sample(rng, count as usize, support)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    flat.sort_unstable();
    let terms = flat.into_iter().map(|n| {
        let c = (0..space.dim)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        (nth_index(model, n), c)
    });
    VecFunction::from_terms(model.clone(), space, terms.collect::<Vec<_>>())
}

#[derive(Serialize, Deserialize)]
struct FunctionDoc {
    model: String,
    space: BanachSpec,
    representation: Representation,
    support: Vec<Vec<i64>>,
    coefficients: Vec<Vec<Complex64>>,
}

impl Serialize for VecFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FunctionDoc {
            model: self.model.to_string(),
            space: self.space,
            representation: self.representation(),
            support: self.support(),
            coefficients: self.terms.values().cloned().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for VecFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = FunctionDoc::deserialize(d)?;
        let model: GroupModel = doc.model.parse().map_err(D::Error::custom)?;
        if doc.representation != Representation::of(&model) {
            return Err(D::Error::custom("representation does not match the model"));
        }
        if doc.support.len() != doc.coefficients.len() {
            return Err(D::Error::custom("support and coefficients differ in length"));
        }
        VecFunction::from_terms(model, doc.space, doc.support.into_iter().zip(doc.coefficients))
            .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn model(s: &str) -> GroupModel {
        s.parse().unwrap()
    }

    #[test]
    fn vector_norms() {
        let x = [c(3.0, 0.0), c(0.0, -4.0)];
        assert_eq!(BanachSpec::new(2, 2.0).unwrap().norm(&x), 5.0);
        assert_eq!(BanachSpec::new(2, 1.0).unwrap().norm(&x), 7.0);
        assert_eq!(BanachSpec::new(2, f64::INFINITY).unwrap().norm(&x), 4.0);
        let n3 = BanachSpec::new(2, 3.0).unwrap().norm(&x);
        assert!((n3 - 91f64.cbrt()).abs() < 1e-14);
        assert!(BanachSpec::new(0, 2.0).is_err());
        assert!(BanachSpec::new(2, 0.5).is_err());
    }

    #[test]
    fn delta_atom_has_unit_norm() {
        let g = model("Z4");
        let f = VecFunction::from_terms(g, BanachSpec::new(1, 2.0).unwrap(), [(vec![0], vec![c(1.0, 0.0)])])
            .unwrap();
        for p in [1.1, 1.5, 2.0, 3.0] {
            assert_eq!(lp_norm(&f, p).unwrap(), NormResult { value: 1.0, error: 0.0 });
        }
    }

    #[test]
    fn zero_function_norm() {
        let f = VecFunction::zero(model("R[delta=0.5,M=4]'"), BanachSpec::new(2, 2.0).unwrap());
        assert_eq!(lp_norm(&f, 1.5).unwrap(), NormResult { value: 0.0, error: 0.0 });
        assert!(matches!(lp_norm(&f, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn step_function_norm_identity() {
        // cells of width delta: ||f||_p = delta^(1/p) (sum ||g_m||^p)^(1/p)
        let space = BanachSpec::new(2, 1.5).unwrap();
        for delta in [0.1f64, 0.5, 1.0, 2.0] {
            let g = model(&format!("R[delta={delta},M=5]"));
            let f = random_function(&g, 6, space, 3).unwrap();
            let p = 1.7;
            let direct: f64 = f.terms().values().map(|v| space.norm(v).powf(p)).sum();
            let lhs = lp_norm(&f, p).unwrap().value;
            let rhs = delta.powf(1.0 / p) * direct.powf(1.0 / p);
            assert!((lhs - rhs).abs() <= 1e-14 * rhs, "{delta}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn torus_norm_against_closed_form() {
        // |1 + e^{is}|^2 averages to 2 over the circle
        let g = model("T[16]");
        let s = BanachSpec::new(1, 2.0).unwrap();
        let f = VecFunction::from_terms(g, s, [(vec![0], vec![c(1.0, 0.0)]), (vec![1], vec![c(1.0, 0.0)])])
            .unwrap();
        let n = lp_norm(&f, 2.0).unwrap();
        assert!((n.value - 2f64.sqrt()).abs() < 1e-12, "{n:?}");
        assert!(n.error <= 1e-9);
        // |1 + e^{is}|^4 averages to 6
        let n4 = lp_norm(&f, 4.0).unwrap();
        assert!((n4.value - 6f64.powf(0.25)).abs() <= n4.error.max(1e-13), "{n4:?}");
    }

    #[test]
    fn single_cell_spectrum_norm_matches_parseval() {
        // one cell of width delta has L2 norm sqrt(delta) on both sides
        let delta: f64 = 0.5;
        let g = model(&format!("R[delta={delta},M=3]'"));
        let s = BanachSpec::new(1, 2.0).unwrap();
        let f = VecFunction::from_terms(g, s, [(vec![1], vec![c(1.0, 0.0)])]).unwrap();
        let n = lp_norm(&f, 2.0).unwrap();
        assert!((n.value - delta.sqrt()).abs() < 1e-10, "{n:?}");
    }

    #[test]
    fn evaluate_sinc_series_at_zero() {
        let g = model("R[delta=0.25,M=3]'");
        let s = BanachSpec::new(1, 2.0).unwrap();
        let f = VecFunction::from_terms(g, s, [(vec![-1], vec![c(2.0, 0.0)]), (vec![2], vec![c(0.0, 1.0)])])
            .unwrap();
        let v = f.evaluate(&[0.0]).unwrap();
        assert!((v[0] - c(0.5, 0.25)).norm() < 1e-16);
    }

    #[test]
    fn apply_operator_examples() {
        let g = model("Z3");
        let s = BanachSpec::new(2, 2.0).unwrap();
        let f = random_function(&g, 2, s, 11).unwrap();
        let id = OperatorSpec::identity(2, 2.0).unwrap();
        assert_eq!(apply_operator(&id, &f).unwrap(), f);
        assert!(apply_operator(&OperatorSpec::zero(2, 2.0).unwrap(), &f).unwrap().is_zero());
        let diag = OperatorSpec::new(
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(2.0, 0.0)]],
            s,
            s,
        )
        .unwrap();
        let g2 = apply_operator(&diag, &f).unwrap();
        for (k, v) in f.terms() {
            assert_eq!(g2.get(k).unwrap(), &[v[0], v[1] * 2.0]);
        }
        assert!(apply_operator(&OperatorSpec::identity(3, 2.0).unwrap(), &f).is_err());
    }

    #[test]
    fn random_functions_are_reproducible() {
        let g = model("Z4");
        let s = BanachSpec::new(2, 2.0).unwrap();
        let a = random_function(&g, 2, s, 42).unwrap();
        assert_eq!(a, random_function(&g, 2, s, 42).unwrap());
        assert_eq!(random_function(&g, 1, s, 42).unwrap().support().len(), 1);
        assert_ne!(a.support(), random_function(&g, 3, s, 42).unwrap().support());
        assert!(random_function(&g, 5, s, 42).is_err());
        for v in a.terms().values().flatten() {
            assert!((-1.0..1.0).contains(&v.re) && (-1.0..1.0).contains(&v.im));
        }
    }

    #[test]
    fn json_round_trip() {
        let g = model("Z2 x R[delta=0.5,M=2]'");
        let s = BanachSpec::new(2, f64::INFINITY).unwrap();
        let f = random_function(&g, 3, s, 5).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert!(text.contains("\"q\":\"inf\""), "{text}");
        assert!(text.contains("SincSeries"));
        let back: VecFunction = serde_json::from_str(&text).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn nonfinite_coefficients_are_rejected() {
        let g = model("Z2");
        let s = BanachSpec::new(1, 2.0).unwrap();
        let f = VecFunction::from_terms(g, s, [(vec![0], vec![c(f64::NAN, 0.0)])]).unwrap();
        assert!(matches!(lp_norm(&f, 2.0), Err(Error::Numeric(_))));
    }
}
