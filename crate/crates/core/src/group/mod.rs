//! Computable models of locally compact abelian groups.
//!
//! A [`GroupModel`] is a flat product of leaf [`Factor`]s. Each factor knows
//! its Haar normalization, its dual factor, the character pairing with that
//! dual, and an integer index range used by the sparse function
//! representation in [`crate::vecfun`]:
//!
//! | factor | index `k` denotes | Haar measure |
//! |---|---|---|
//! | `Cyclic` primal | the point `k` of `Z_n` | counting |
//! | `Cyclic` dual | the character `k` of `Z_n` | counting / n |
//! | `Lattice` | the point `k` of `Z` | counting |
//! | `Torus` | the monomial `exp(i k s)` | `ds / 2pi` on `[-pi, pi]` |
//! | `RealGrid` | the cell `[delta (k - 1/2), delta (k + 1/2)]` | Lebesgue |
//! | `RealFreq` | the cell spectrum `exp(i k delta s) sin(delta s/2)/(s/2)` | `ds / 2pi` |
//!
//! With these conventions the Fourier transform is an isometry of `L_2`.

mod spec;
mod subgroup;

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use subgroup::{annihilator, subgroup, SubgroupDecomposition};

/// Which side of Pontryagin duality a finite factor lives on. Only the Haar
/// normalization differs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Primal,
    Dual,
}

impl Side {
    fn flip(self) -> Side {
        match self {
            Side::Primal => Side::Dual,
            Side::Dual => Side::Primal,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Factor {
    /// `Z_n`.
    Cyclic { order: u32, side: Side },
    /// `Z` truncated to the window `-window..=window`.
    Lattice { window: u32 },
    /// The circle `[-pi, pi)`; `resolution` is the initial quadrature panel
    /// count and `floor(resolution / 2)` bounds the trigonometric degree.
    Torus { resolution: u32 },
    /// `R` carrying step functions on cells of width `delta`, cells `-window..=window`.
    RealGrid { delta: f64, window: u32 },
    /// The frequency axis dual to a `RealGrid`; kept symbolic.
    RealFreq { delta: f64, window: u32 },
}

/// Normalization of the Haar measure carried by a factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Haar {
    Counting,
    /// Counting measure times the given mass per point.
    ScaledCounting(f64),
    /// `ds / 2pi` over `[-pi, pi]`.
    NormalizedArc,
    /// Lebesgue measure `ds` on the primal real line.
    Lebesgue,
    /// `ds / 2pi` on the unbounded frequency line.
    NormalizedLine,
}

impl Factor {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Factor::Cyclic { order, .. } if order < 2 => Err(Error::validation(
                "order",
                format!("order must be ≥ 2, got {order}"),
            )),
            Factor::Lattice { window } if window < 1 => {
                Err(Error::validation("window", "lattice window must be ≥ 1"))
            }
            Factor::Torus { resolution } if resolution < 8 => Err(Error::validation(
                "resolution",
                format!("torus resolution must be ≥ 8, got {resolution}"),
            )),
            Factor::RealGrid { delta, window } | Factor::RealFreq { delta, window } => {
                if !(delta.is_finite() && delta > 0.0) {
                    Err(Error::validation("delta", format!("delta must be > 0, got {delta}")))
                } else if window < 1 {
                    Err(Error::validation("window", "grid window M must be ≥ 1"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    pub fn dual(&self) -> Factor {
        match *self {
            Factor::Cyclic { order, side } => Factor::Cyclic { order, side: side.flip() },
            Factor::Lattice { window } => Factor::Torus { resolution: (2 * window + 1).max(8) },
            Factor::Torus { resolution } => Factor::Lattice { window: resolution / 2 },
            Factor::RealGrid { delta, window } => Factor::RealFreq { delta, window },
            Factor::RealFreq { delta, window } => Factor::RealGrid { delta, window },
        }
    }

    pub fn haar(&self) -> Haar {
        match *self {
            Factor::Cyclic { side: Side::Primal, .. } | Factor::Lattice { .. } => Haar::Counting,
            Factor::Cyclic { order, side: Side::Dual } => Haar::ScaledCounting(1.0 / order as f64),
            Factor::Torus { .. } => Haar::NormalizedArc,
            Factor::RealGrid { .. } => Haar::Lebesgue,
            Factor::RealFreq { .. } => Haar::NormalizedLine,
        }
    }

    /// Inclusive range of representation indices.
    pub fn index_range(&self) -> (i64, i64) {
        match *self {
            Factor::Cyclic { order, .. } => (0, order as i64 - 1),
            Factor::Lattice { window }
            | Factor::RealGrid { window, .. }
            | Factor::RealFreq { window, .. } => (-(window as i64), window as i64),
            Factor::Torus { resolution } => {
                let w = (resolution / 2) as i64;
                (-w, w)
            }
        }
    }

    /// True when representation indices are points of the factor (values are
    /// attached to points or cells); false for the two spectral axes.
    pub fn is_pointwise(&self) -> bool {
        !matches!(self, Factor::Torus { .. } | Factor::RealFreq { .. })
    }

    /// Mass of one representation cell for pointwise factors.
    pub fn cell_mass(&self) -> Option<f64> {
        match *self {
            Factor::Cyclic { side: Side::Primal, .. } | Factor::Lattice { .. } => Some(1.0),
            Factor::Cyclic { order, side: Side::Dual } => Some(1.0 / order as f64),
            Factor::RealGrid { delta, .. } => Some(delta),
            _ => None,
        }
    }

    /// Centered enumeration order used for deterministic witness supports:
    /// `0, 1, ..` for cyclic factors and `0, -1, 1, -2, 2, ..` otherwise.
    pub(crate) fn centered_indices(&self) -> Vec<i64> {
        match *self {
            Factor::Cyclic { order, .. } => (0..order as i64).collect(),
            _ => {
                let (_, hi) = self.index_range();
                let mut out = vec![0];
                for k in 1..=hi {
                    out.push(-k);
                    out.push(k);
                }
                out
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Factor::Cyclic { .. } => "Z_n",
            Factor::Lattice { .. } => "lattice",
            Factor::Torus { .. } => "torus",
            Factor::RealGrid { .. } => "real grid",
            Factor::RealFreq { .. } => "real frequency axis",
        }
    }
}

/// Descriptor accepted by [`make_group`]; products may nest and are flattened.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupDescriptor {
    Finite(Vec<u32>),
    Lattice(u32),
    Torus(u32),
    RealGrid { delta: f64, window: u32 },
    Product(Vec<GroupDescriptor>),
}

/// A validated, flat product of factors. The empty product is the trivial group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupModel {
    factors: Vec<Factor>,
}

pub fn make_group(desc: &GroupDescriptor) -> Result<GroupModel> {
    fn flatten(desc: &GroupDescriptor, out: &mut Vec<Factor>) {
        match desc {
            GroupDescriptor::Finite(orders) => out.extend(
                orders.iter().map(|&order| Factor::Cyclic { order, side: Side::Primal }),
            ),
            GroupDescriptor::Lattice(window) => out.push(Factor::Lattice { window: *window }),
            GroupDescriptor::Torus(resolution) => {
                out.push(Factor::Torus { resolution: *resolution })
            }
            GroupDescriptor::RealGrid { delta, window } => {
                out.push(Factor::RealGrid { delta: *delta, window: *window })
            }
            GroupDescriptor::Product(parts) => parts.iter().for_each(|p| flatten(p, out)),
        }
    }
    if let GroupDescriptor::Finite(orders) = desc {
        if orders.is_empty() {
            return Err(Error::validation("orders", "a finite group needs at least one order"));
        }
    }
    let mut factors = Vec::new();
    flatten(desc, &mut factors);
    GroupModel::from_factors(factors)
}

/// Maximum |G| for finite models; keeps naive DFT sums exact to working precision.
pub const MAX_FINITE_ORDER: u64 = 1 << 16;

impl GroupModel {
    pub fn from_factors(factors: Vec<Factor>) -> Result<Self> {
        for f in &factors {
            f.validate()?;
        }
        let finite: u64 = factors
            .iter()
            .filter_map(|f| match f {
                Factor::Cyclic { order, .. } => Some(*order as u64),
                _ => None,
            })
            .try_fold(1u64, |acc, n| acc.checked_mul(n))
            .unwrap_or(u64::MAX);
        if finite > MAX_FINITE_ORDER {
            return Err(Error::validation(
                "orders",
                format!("finite part has order {finite}, above the supported {MAX_FINITE_ORDER}"),
            ));
        }
        Ok(GroupModel { factors })
    }

    pub fn trivial() -> Self {
        GroupModel { factors: Vec::new() }
    }

    pub fn cyclic(orders: &[u32]) -> Result<Self> {
        make_group(&GroupDescriptor::Finite(orders.to_vec()))
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    /// `self x other`, factors in declared order.
    pub fn product(&self, other: &GroupModel) -> GroupModel {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        GroupModel { factors }
    }

    pub fn dual(&self) -> GroupModel {
        GroupModel { factors: self.factors.iter().map(Factor::dual).collect() }
    }

    /// True when every factor is cyclic (on either side).
    pub fn is_finite(&self) -> bool {
        self.factors.iter().all(|f| matches!(f, Factor::Cyclic { .. }))
    }

    /// Cyclic orders, if the model is finite.
    pub fn orders(&self) -> Option<Vec<u32>> {
        self.factors
            .iter()
            .map(|f| match f {
                Factor::Cyclic { order, .. } => Some(*order),
                _ => None,
            })
            .collect()
    }

    /// |G| for finite models.
    pub fn order(&self) -> Option<u64> {
        self.orders().map(|o| o.iter().map(|&n| n as u64).product())
    }

    /// Number of representation indices (product of index-range sizes).
    pub fn index_count(&self) -> u64 {
        self.factors
            .iter()
            .map(|f| {
                let (lo, hi) = f.index_range();
                (hi - lo + 1) as u64
            })
            .product()
    }

    pub fn contains_index(&self, idx: &[i64]) -> bool {
        idx.len() == self.factors.len()
            && self.factors.iter().zip(idx).all(|(f, &k)| {
                let (lo, hi) = f.index_range();
                (lo..=hi).contains(&k)
            })
    }

    /// All representation indices in lexicographic order.
    pub fn indices(&self) -> Vec<Vec<i64>> {
        let ranges: Vec<Vec<i64>> = self
            .factors
            .iter()
            .map(|f| {
                let (lo, hi) = f.index_range();
                (lo..=hi).collect()
            })
            .collect();
        cartesian(&ranges)
    }

    /// Indices ordered by distance from the identity (sum of per-factor
    /// centered ranks), ties broken lexicographically.
    pub fn centered_indices(&self) -> Vec<Vec<i64>> {
        let per: Vec<Vec<i64>> = self.factors.iter().map(Factor::centered_indices).collect();
        let mut all: Vec<(usize, Vec<i64>)> = cartesian(
            &per.iter().map(|v| (0..v.len() as i64).collect()).collect::<Vec<_>>(),
        )
        .into_iter()
        .map(|ranks| {
            let cost = ranks.iter().map(|&r| r as usize).sum();
            let idx = ranks.iter().zip(&per).map(|(&r, v)| v[r as usize]).collect();
            (cost, idx)
        })
        .collect();
        all.sort();
        all.into_iter().map(|(_, idx)| idx).collect()
    }

    pub fn identity(&self) -> Vec<i64> {
        vec![0; self.factors.len()]
    }

    /// Group law on finite models (coordinatewise mod n).
    pub fn add(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        self.factors
            .iter()
            .zip(a.iter().zip(b))
            .map(|(f, (&x, &y))| match f {
                Factor::Cyclic { order, .. } => (x + y).rem_euclid(*order as i64),
                _ => x + y,
            })
            .collect()
    }

    pub fn neg(&self, a: &[i64]) -> Vec<i64> {
        self.factors
            .iter()
            .zip(a)
            .map(|(f, &x)| match f {
                Factor::Cyclic { order, .. } => (-x).rem_euclid(*order as i64),
                _ => -x,
            })
            .collect()
    }

    /// Position of the first factor matching `pred`.
    pub fn find(&self, pred: impl Fn(&Factor) -> bool) -> Option<usize> {
        self.factors.iter().position(pred)
    }

    /// Model with factor `axis` replaced.
    pub fn with_factor(&self, axis: usize, factor: Factor) -> Result<GroupModel> {
        let mut factors = self.factors.clone();
        factors[axis] = factor;
        GroupModel::from_factors(factors)
    }

    pub fn without_factor(&self, axis: usize) -> GroupModel {
        let mut factors = self.factors.clone();
        factors.remove(axis);
        GroupModel { factors }
    }
}

pub(crate) fn cartesian(ranges: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for range in ranges {
        let mut next = Vec::with_capacity(out.len() * range.len());
        for prefix in &out {
            for &k in range {
                let mut v = prefix.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

pub fn dual_group(g: &GroupModel) -> GroupModel {
    g.dual()
}

fn integer_coord(x: f64, what: &str) -> Result<i64> {
    if x.is_finite() && x.fract() == 0.0 {
        Ok(x as i64)
    } else {
        Err(Error::Domain(format!("{what} coordinate {x} is not an integer")))
    }
}

fn check_range<T: PartialOrd + fmt::Display>(x: T, lo: T, hi: T, what: &str) -> Result<()> {
    if x < lo || x > hi {
        Err(Error::Domain(format!("{what} coordinate {x} outside [{lo}, {hi}]")))
    } else {
        Ok(())
    }
}

/// Character pairing `(s, chi)` between a point of `g` and a point of its
/// dual, `exp(+i ...)` with no conjugate.
pub fn pair(g: &GroupModel, s: &[f64], chi: &[f64]) -> Result<Complex64> {
    if s.len() != g.rank() || chi.len() != g.rank() {
        return Err(Error::Domain(format!(
            "point rank mismatch: model has {} factors, got {} and {}",
            g.rank(),
            s.len(),
            chi.len()
        )));
    }
    let mut phase = 0.0;
    let mut turns: Vec<(i64, i64)> = Vec::new();
    for (f, (&a, &b)) in g.factors().iter().zip(s.iter().zip(chi)) {
        match *f {
            Factor::Cyclic { order, .. } => {
                let (a, b) = (integer_coord(a, "cyclic")?, integer_coord(b, "cyclic")?);
                let n = order as i64;
                check_range(a, 0, n - 1, "cyclic")?;
                check_range(b, 0, n - 1, "cyclic")?;
                turns.push(((a * b).rem_euclid(n), n));
            }
            Factor::Lattice { window } => {
                let m = integer_coord(a, "lattice")?;
                check_range(m, -(window as i64), window as i64, "lattice")?;
                check_range(b, -PI, PI, "torus")?;
                phase += m as f64 * b;
            }
            Factor::Torus { .. } => {
                check_range(a, -PI, PI, "torus")?;
                let m = integer_coord(b, "lattice")?;
                phase += a * m as f64;
            }
            Factor::RealGrid { delta, window } => {
                let half = delta * (window as f64 + 0.5);
                check_range(a, -half, half, "real grid")?;
                if !b.is_finite() {
                    return Err(Error::Domain("frequency must be finite".into()));
                }
                phase += a * b;
            }
            Factor::RealFreq { delta, window } => {
                let half = delta * (window as f64 + 0.5);
                if !a.is_finite() {
                    return Err(Error::Domain("frequency must be finite".into()));
                }
                check_range(b, -half, half, "real grid")?;
                phase += a * b;
            }
        }
    }
    Ok(Complex64::cis(phase) * root_of_unity_product(&turns))
}

/// `prod_j exp(2 pi i k_j / n_j)`, reduced exactly over the lcm first.
fn root_of_unity_product(turns: &[(i64, i64)]) -> Complex64 {
    if turns.is_empty() {
        return Complex64::new(1.0, 0.0);
    }
    let l = turns.iter().fold(1i64, |acc, &(_, n)| lcm(acc, n));
    let k = turns.iter().fold(0i64, |acc, &(k, n)| (acc + k * (l / n)).rem_euclid(l));
    root_of_unity(k, l)
}

/// `exp(2 pi i k / n)` with exact values on the axes.
pub(crate) fn root_of_unity(k: i64, n: i64) -> Complex64 {
    let k = k.rem_euclid(n);
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * k == n {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * k == n {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * k == 3 * n {
        return Complex64::new(0.0, -1.0);
    }
    Complex64::cis(2.0 * PI * k as f64 / n as f64)
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

/// Measure mass attached to `point`. Pointwise factors contribute their cell
/// mass; the continuous axes contribute their density against Lebesgue
/// measure (`1 / 2pi`).
pub fn haar_weight(g: &GroupModel, point: &[f64]) -> Result<f64> {
    if point.len() != g.rank() {
        return Err(Error::Domain("point rank mismatch".into()));
    }
    let mut w = 1.0;
    for (f, &x) in g.factors().iter().zip(point) {
        w *= match *f {
            Factor::Cyclic { order, side } => {
                let k = integer_coord(x, "cyclic")?;
                check_range(k, 0, order as i64 - 1, "cyclic")?;
                match side {
                    Side::Primal => 1.0,
                    Side::Dual => 1.0 / order as f64,
                }
            }
            Factor::Lattice { window } => {
                let k = integer_coord(x, "lattice")?;
                check_range(k, -(window as i64), window as i64, "lattice")?;
                1.0
            }
            Factor::RealGrid { delta, window } => {
                let half = delta * (window as f64 + 0.5);
                check_range(x, -half, half, "real grid")?;
                delta
            }
            Factor::Torus { .. } => {
                check_range(x, -PI, PI, "torus")?;
                1.0 / (2.0 * PI)
            }
            Factor::RealFreq { .. } => 1.0 / (2.0 * PI),
        };
    }
    Ok(w)
}

impl fmt::Display for GroupModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&spec::render(self))
    }
}

impl std::str::FromStr for GroupModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        spec::parse(s)
    }
}

pub(crate) fn describe(f: &Factor) -> &'static str {
    f.name()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn finite_construction() {
        let g = make_group(&GroupDescriptor::Finite(vec![4])).unwrap();
        assert_eq!(g.order(), Some(4));
        assert!(g.is_finite());
    }

    #[test]
    fn products_flatten() {
        let g = make_group(&GroupDescriptor::Product(vec![
            GroupDescriptor::Finite(vec![2, 3]),
            GroupDescriptor::Product(vec![GroupDescriptor::Lattice(5)]),
        ]))
        .unwrap();
        assert_eq!(g.rank(), 3);
        assert_eq!(g.factors()[2], Factor::Lattice { window: 5 });
    }

    #[test]
    fn validation_errors_name_the_field() {
        let err = make_group(&GroupDescriptor::Finite(vec![1])).unwrap_err();
        assert!(err.to_string().contains("order must be ≥ 2"), "{err}");
        let err = make_group(&GroupDescriptor::RealGrid { delta: 0.0, window: 3 }).unwrap_err();
        assert!(matches!(err, Error::Validation { field: "delta", .. }));
        let err = make_group(&GroupDescriptor::Lattice(0)).unwrap_err();
        assert!(matches!(err, Error::Validation { field: "window", .. }));
    }

    #[test]
    fn duals() {
        let g = GroupModel::cyclic(&[2, 3]).unwrap();
        assert_eq!(g.dual().orders(), Some(vec![2, 3]));
        assert_eq!(g.dual().dual(), g);
        let l = make_group(&GroupDescriptor::Lattice(5)).unwrap();
        assert!(matches!(l.dual().factors()[0], Factor::Torus { .. }));
        let z4 = GroupModel::cyclic(&[4]).unwrap();
        assert_eq!(z4.dual().factors()[0].haar(), Haar::ScaledCounting(0.25));
        assert_eq!(z4.dual().dual().factors()[0].haar(), Haar::Counting);
    }

    #[test]
    fn pairing_examples() {
        let z4 = GroupModel::cyclic(&[4]).unwrap();
        assert_eq!(pair(&z4, &[3.0], &[1.0]).unwrap(), c(0.0, -1.0));
        let k = GroupModel::cyclic(&[2, 2]).unwrap();
        assert_eq!(pair(&k, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), c(1.0, 0.0));
        let mixed: GroupModel = "Z3 x Zlat[4] x R[delta=0.5,M=3]".parse().unwrap();
        assert_eq!(pair(&mixed, &[0.0, 0.0, 0.0], &[2.0, 1.3, -7.0]).unwrap(), c(1.0, 0.0));
        let e = pair(&mixed, &[0.0, 2.0, 0.0], &[0.0, 0.5, 0.0]).unwrap();
        assert!((e - Complex64::cis(1.0)).norm() < 1e-15);
    }

    #[test]
    fn pairing_rejects_out_of_range() {
        let z4 = GroupModel::cyclic(&[4]).unwrap();
        assert!(matches!(pair(&z4, &[4.0], &[0.0]), Err(Error::Domain(_))));
        assert!(matches!(pair(&z4, &[0.5], &[0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn haar_weights() {
        let z6 = GroupModel::cyclic(&[6]).unwrap();
        assert_eq!(haar_weight(&z6, &[5.0]).unwrap(), 1.0);
        assert!((haar_weight(&z6.dual(), &[5.0]).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        let r: GroupModel = "R[delta=0.5,M=4]".parse().unwrap();
        assert_eq!(haar_weight(&r, &[0.3]).unwrap(), 0.5);
    }

    #[test]
    fn pairing_is_multiplicative_on_finite_models() {
        let g = GroupModel::cyclic(&[4, 6]).unwrap();
        let pts = g.indices();
        for s in pts.iter().step_by(5) {
            for t in pts.iter().step_by(7) {
                for chi in pts.iter().step_by(3) {
                    let f = |v: &[i64]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
                    let st = g.add(s, t);
                    let lhs = pair(&g, &f(&st), &f(chi)).unwrap();
                    let rhs = pair(&g, &f(s), &f(chi)).unwrap() * pair(&g, &f(t), &f(chi)).unwrap();
                    assert!((lhs - rhs).norm() < 1e-14);
                    assert!((lhs.norm() - 1.0).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn centered_order_starts_at_identity() {
        let g: GroupModel = "Zlat[2] x Z2".parse().unwrap();
        let c = g.centered_indices();
        assert_eq!(c[0], vec![0, 0]);
        assert_eq!(c.len(), 10);
        assert!(c[1] == vec![-1, 0] || c[1] == vec![0, 1]);
    }
}
