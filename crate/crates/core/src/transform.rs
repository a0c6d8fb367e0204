//! Fourier transforms on group models and the transfer maps between models.
//!
//! Transforms run axis by axis in declared factor order. Per axis, an index
//! `k` of the input becomes:
//!
//! | input factor | output |
//! |---|---|
//! | `Z_n` primal, point `a` | `sum_chi exp(2 pi i a chi / n) [chi]` |
//! | `Z_n` dual, character `chi` | `(1/n) sum_a exp(2 pi i a chi / n) [a]` |
//! | `Z`, point `m` | torus monomial `m` |
//! | torus monomial `k` | lattice point `-k` |
//! | grid cell `m` | cell spectrum `m` |

use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{self, root_of_unity, Factor, GroupModel, Side, SubgroupDecomposition};
use crate::operator::OperatorSpec;
use crate::vecfun::{apply_operator, VecFunction};

type Terms = BTreeMap<Vec<i64>, Vec<Complex64>>;

fn accumulate(out: &mut Terms, idx: Vec<i64>, w: Complex64, c: &[Complex64]) {
    let e = out.entry(idx).or_insert_with(|| vec![Complex64::new(0.0, 0.0); c.len()]);
    for (a, z) in e.iter_mut().zip(c) {
        *a += w * z;
    }
}

fn transform_axis(terms: &Terms, axis: usize, factor: &Factor, model: &GroupModel) -> Result<Terms> {
    let mut out = Terms::new();
    match *factor {
        Factor::Cyclic { order, side } => {
            let n = order as i64;
            let mass = match side {
                Side::Primal => 1.0,
                Side::Dual => 1.0 / n as f64,
            };
            for (idx, c) in terms {
                for chi in 0..n {
                    let mut j = idx.clone();
                    j[axis] = chi;
                    accumulate(&mut out, j, root_of_unity(idx[axis] * chi, n) * mass, c);
                }
            }
        }
        Factor::Lattice { .. } | Factor::RealGrid { .. } => return Ok(terms.clone()),
        Factor::Torus { .. } => {
            for (idx, c) in terms {
                let mut j = idx.clone();
                j[axis] = -idx[axis];
                accumulate(&mut out, j, Complex64::new(1.0, 0.0), c);
            }
        }
        Factor::RealFreq { .. } => {
            return Err(Error::Capability(format!(
                "fourier: SincSeries data on the real frequency axis of {model} has no supported transform"
            )))
        }
    }
    Ok(out)
}

/// `F^G f` on the dual model.
pub fn fourier(g: &GroupModel, f: &VecFunction) -> Result<VecFunction> {
    if f.model() != g {
        return Err(Error::Domain(format!("function lives on {}, not on {g}", f.model())));
    }
    let mut terms = f.terms().clone();
    for (axis, factor) in g.factors().iter().enumerate() {
        terms = transform_axis(&terms, axis, factor, g)?;
    }
    Ok(VecFunction::with_parts(g.dual(), f.space(), terms))
}

/// `[F^G, T] f = F^G (T f)`.
pub fn tensor_transform(g: &GroupModel, t: &OperatorSpec, f: &VecFunction) -> Result<VecFunction> {
    fourier(g, &apply_operator(t, f)?)
}

fn first_axis(model: &GroupModel, pred: fn(&Factor) -> bool, what: &str) -> Result<usize> {
    model
        .find(pred)
        .ok_or_else(|| Error::Domain(format!("{model} has no {what} factor")))
}

/// Places the lattice coefficient `g_m` on the cell `[delta (m - 1/2), delta (m + 1/2)]`
/// of the first lattice factor.
pub fn step_extension(f: &VecFunction, delta: f64) -> Result<VecFunction> {
    let axis = first_axis(f.model(), |x| matches!(x, Factor::Lattice { .. }), "lattice")?;
    let Factor::Lattice { window } = f.model().factors()[axis] else { unreachable!() };
    let model = f.model().with_factor(axis, Factor::RealGrid { delta, window })?;
    Ok(VecFunction::with_parts(model, f.space(), f.terms().clone()))
}

/// Cell coefficients of a step function on the first grid factor, as a
/// function on the lattice, together with the grid width.
pub fn grid_discretize(f: &VecFunction) -> Result<(VecFunction, f64)> {
    let axis = first_axis(f.model(), |x| matches!(x, Factor::RealGrid { .. }), "real grid")?;
    let Factor::RealGrid { delta, window } = f.model().factors()[axis] else { unreachable!() };
    let model = f.model().with_factor(axis, Factor::Lattice { window })?;
    Ok((VecFunction::with_parts(model, f.space(), f.terms().clone()), delta))
}

/// Index map `(l1, l2) -> l1 + A l2` collapsing the first two lattice axes.
#[derive(Debug, Clone, PartialEq)]
pub struct InterleavingPlan {
    pub a: i64,
    pub source: GroupModel,
    pub target: GroupModel,
}

impl InterleavingPlan {
    pub fn index(&self, l1: i64, l2: i64) -> i64 {
        l1 + self.a * l2
    }
}

fn check_two_lattices(model: &GroupModel) -> Result<()> {
    match model.factors() {
        [Factor::Lattice { .. }, Factor::Lattice { .. }, ..] => Ok(()),
        _ => Err(Error::Domain(format!("interleaving needs a model Z x Z x G, got {model}"))),
    }
}

/// `A = 2 max |l1| + 1` over the support of `f`; the target lattice window
/// covers every image `l1 + A l2`.
pub fn make_interleaving(f: &VecFunction) -> Result<InterleavingPlan> {
    check_two_lattices(f.model())?;
    let support = f.support();
    let a = 2 * support.iter().map(|k| k[0].abs()).max().unwrap_or(0) + 1;
    let images: BTreeSet<(i64, &[i64])> = support.iter().map(|k| (k[0] + a * k[1], &k[2..])).collect();
    // injective on the support: |l1| <= (A - 1)/2 pins down l1 mod A
    assert_eq!(images.len(), support.len());
    let window = images.iter().map(|k| k.0.unsigned_abs()).max().unwrap_or(0).max(1) as u32;
    let mut factors = vec![Factor::Lattice { window }];
    factors.extend_from_slice(&f.model().factors()[2..]);
    Ok(InterleavingPlan { a, source: f.model().clone(), target: GroupModel::from_factors(factors)? })
}

/// Coefficient `g_{l1,l2} exp(i s2 A l2)` placed at `l1 + A l2`.
pub fn interleave(f: &VecFunction, plan: &InterleavingPlan, s2: f64) -> Result<VecFunction> {
    if f.model() != &plan.source {
        return Err(Error::Domain("plan was built for another model".into()));
    }
    let half = (plan.a - 1) / 2;
    let mut out = VecFunction::zero(plan.target.clone(), f.space());
    for (idx, c) in f.terms() {
        if idx[0].abs() > half {
            return Err(Error::Domain(format!("support point {idx:?} outside the plan (A = {})", plan.a)));
        }
        let w = Complex64::cis(s2 * (plan.a * idx[1]) as f64);
        let mut j = vec![plan.index(idx[0], idx[1])];
        j.extend_from_slice(&idx[2..]);
        if out.get(&j).is_some() {
            return Err(Error::Domain(format!("index collision at {j:?}")));
        }
        out.insert(j, c.iter().map(|z| z * w).collect())
            .map_err(|_| Error::Domain(format!("image of {idx:?} outside the plan's window")))?;
    }
    Ok(out)
}

/// How the domain of a function sits inside a larger model.
#[derive(Debug, Clone)]
pub enum Embedding<'a> {
    /// `H <= G` for a finite `G`; the function lives on `H`'s own model.
    Subgroup(&'a SubgroupDecomposition),
    /// `Z` into `R` as cells of width `delta`.
    LatticeInGrid { delta: f64 },
    /// Axes of the function go to `positions` of `target`; all other axes of
    /// `target` are pinned at index 0.
    Pinned { target: GroupModel, positions: Vec<usize> },
}

/// Extends `f` by zero off the embedded subgroup.
pub fn zero_extend(f: &VecFunction, embedding: &Embedding<'_>) -> Result<VecFunction> {
    match embedding {
        Embedding::Subgroup(h) => {
            if f.model() != h.model() {
                return Err(Error::Domain(format!(
                    "function lives on {}, the subgroup model is {}",
                    f.model(),
                    h.model()
                )));
            }
            let mut out = VecFunction::zero(h.parent().clone(), f.space());
            for (idx, c) in f.terms() {
                out.insert(h.embed(idx)?, c.clone())?;
            }
            Ok(out)
        }
        Embedding::LatticeInGrid { delta } => {
            if f.model().rank() != 1 {
                return Err(Error::Capability(format!(
                    "lattice-in-grid embedding needs the model Z, got {}",
                    f.model()
                )));
            }
            step_extension(f, *delta)
        }
        Embedding::Pinned { target, positions } => {
            let src = f.model().factors();
            let tf = target.factors();
            let distinct: BTreeSet<_> = positions.iter().collect();
            if positions.len() != src.len()
                || distinct.len() != positions.len()
                || positions.iter().any(|&p| p >= tf.len())
            {
                return Err(Error::Domain("pinned embedding needs one distinct target axis per axis".into()));
            }
            for (s, &p) in src.iter().zip(positions) {
                if *s != tf[p] {
                    return Err(Error::Domain(format!(
                        "axis {} of {} does not match axis {p} of {target}",
                        group::describe(s),
                        f.model()
                    )));
                }
            }
            for (i, t) in tf.iter().enumerate() {
                let counting = matches!(t, Factor::Lattice { .. } | Factor::Cyclic { side: Side::Primal, .. });
                if !positions.contains(&i) && !counting {
                    return Err(Error::Capability(format!(
                        "cannot pin the {} axis of {target}: only discrete counting-measure axes carry an open subgroup",
                        group::describe(t)
                    )));
                }
            }
            let mut out = VecFunction::zero(target.clone(), f.space());
            for (idx, c) in f.terms() {
                let mut j = target.identity();
                for (&k, &p) in idx.iter().zip(positions) {
                    j[p] = k;
                }
                out.insert(j, c.clone())?;
            }
            Ok(out)
        }
    }
}

/// Restrictions `h -> f(s_i + h)` to the cosets of `H`, one per representative.
pub fn weil_decompose(f: &VecFunction, h: &SubgroupDecomposition) -> Result<Vec<VecFunction>> {
    if f.model() != h.parent() {
        return Err(Error::Domain(format!(
            "subgroup decomposition of {} applied to a function on {}",
            h.parent(),
            f.model()
        )));
    }
    let g = h.parent();
    let h_model = h.model();
    h.representatives()
        .iter()
        .map(|s| {
            let mut part = VecFunction::zero(h_model.clone(), f.space());
            for k in h_model.indices() {
                if let Some(c) = f.get(&g.add(s, &h.embed(&k)?)) {
                    part.insert(k, c.to_vec())?;
                }
            }
            Ok(part)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::subgroup;
    use crate::vecfun::{lp_norm, random_function, BanachSpec};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn model(s: &str) -> GroupModel {
        s.parse().unwrap()
    }

    fn scalar() -> BanachSpec {
        BanachSpec::new(1, 2.0).unwrap()
    }

    fn close(a: &VecFunction, b: &VecFunction, tol: f64) -> bool {
        let keys: BTreeSet<_> = a.terms().keys().chain(b.terms().keys()).collect();
        let zero = vec![c(0.0, 0.0); a.space().dim];
        keys.into_iter().all(|k| {
            let x = a.get(k).unwrap_or(&zero);
            let y = b.get(k).unwrap_or(&zero);
            x.iter().zip(y).all(|(u, v)| (u - v).norm() <= tol)
        })
    }

    #[test]
    fn delta_transforms_to_constant() {
        let g = model("Z4");
        let f = VecFunction::from_terms(g.clone(), scalar(), [(vec![0], vec![c(1.0, 0.0)])]).unwrap();
        let hat = fourier(&g, &f).unwrap();
        assert_eq!(hat.model(), &g.dual());
        for chi in 0..4 {
            assert_eq!(hat.get(&[chi]).unwrap(), &[c(1.0, 0.0)]);
        }
    }

    #[test]
    fn finite_transform_matches_character_sum() {
        let g = model("Z3 x Z4");
        let space = BanachSpec::new(2, 2.0).unwrap();
        let f = random_function(&g, 7, space, 9).unwrap();
        let hat = fourier(&g, &f).unwrap();
        for chi in g.dual().indices() {
            let mut expected = vec![c(0.0, 0.0); 2];
            for (s, v) in f.terms() {
                let sf: Vec<f64> = s.iter().map(|&x| x as f64).collect();
                let cf: Vec<f64> = chi.iter().map(|&x| x as f64).collect();
                let w = group::pair(&g, &sf, &cf).unwrap();
                for (e, z) in expected.iter_mut().zip(v) {
                    *e += w * z;
                }
            }
            let got = hat.get(&chi).unwrap();
            for (a, b) in got.iter().zip(&expected) {
                assert!((a - b).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn inverse_on_finite_models() {
        // F^{G'} F^G f (a) = f(-a) with the chosen normalizations
        let g = model("Z6 x Z2");
        let f = random_function(&g, 5, scalar(), 1).unwrap();
        let back = fourier(&g.dual(), &fourier(&g, &f).unwrap()).unwrap();
        let reflected = VecFunction::from_terms(
            g.clone(),
            scalar(),
            f.terms().iter().map(|(k, v)| (g.neg(k), v.clone())),
        )
        .unwrap();
        assert!(close(&back, &reflected, 1e-13));
    }

    #[test]
    fn parseval_on_z6() {
        let g = model("Z6");
        let space = BanachSpec::new(3, 2.0).unwrap();
        for seed in 0..10 {
            let f = random_function(&g, 4, space, seed).unwrap();
            let a = lp_norm(&f, 2.0).unwrap().value;
            let b = lp_norm(&fourier(&g, &f).unwrap(), 2.0).unwrap().value;
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn lattice_and_torus_round_trip() {
        let g = model("Zlat[4]");
        let f = random_function(&g, 3, scalar(), 2).unwrap();
        let hat = fourier(&g, &f).unwrap();
        assert_eq!(hat.representation(), crate::vecfun::Representation::TrigPoly);
        assert_eq!(hat.terms(), f.terms());
        let back = fourier(hat.model(), &hat).unwrap();
        for (k, v) in f.terms() {
            assert_eq!(back.get(&[-k[0]]).unwrap(), v.as_slice());
        }
    }

    #[test]
    fn single_cell_spectrum() {
        let delta = 0.5;
        let g = model("R[delta=0.5,M=3]");
        let f = VecFunction::from_terms(g.clone(), scalar(), [(vec![2], vec![c(1.0, 0.0)])]).unwrap();
        let hat = fourier(&g, &f).unwrap();
        for s in [-3.0, -0.2, 0.0, 1e-9, 0.7, 5.0f64] {
            let v = hat.evaluate(&[s]).unwrap()[0];
            let closed = if s == 0.0 {
                c(delta, 0.0)
            } else {
                Complex64::cis(2.0 * delta * s) * ((delta * s / 2.0).sin() / (s / 2.0))
            };
            assert!((v - closed).norm() < 1e-15, "{s}");
        }
        assert!(matches!(fourier(hat.model(), &hat), Err(Error::Capability(_))));
    }

    #[test]
    fn sinc_series_matches_riemann_sum() {
        // brute-force midpoint sum of int f(s) exp(i s t) ds on a fine grid
        let g = model("R[delta=0.5,M=2]");
        let f = random_function(&g, 3, scalar(), 4).unwrap();
        let hat = fourier(&g, &f).unwrap();
        let n = 20_000;
        let (lo, hi) = (-1.25, 1.25);
        let h = (hi - lo) / n as f64;
        for t in [-4.0, -1.0, 0.3, 2.5f64] {
            let mut sum = c(0.0, 0.0);
            for i in 0..n {
                let s = lo + (i as f64 + 0.5) * h;
                sum += f.evaluate(&[s]).unwrap()[0] * Complex64::cis(s * t) * h;
            }
            let v = hat.evaluate(&[t]).unwrap()[0];
            assert!((v - sum).norm() < 1e-7, "{t}: {v} vs {sum}");
        }
    }

    #[test]
    fn tensor_transform_factorizes() {
        let g = model("Z4 x Z2");
        let space = BanachSpec::new(2, 2.0).unwrap();
        let f = random_function(&g, 3, space, 8).unwrap();
        let t = OperatorSpec::new(
            vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(0.5, 0.5), c(1.0, 1.0)]],
            space,
            space,
        )
        .unwrap();
        let a = tensor_transform(&g, &t, &f).unwrap();
        let b = fourier(&g, &apply_operator(&t, &f).unwrap()).unwrap();
        assert_eq!(a, b);
        let id = OperatorSpec::identity(2, 2.0).unwrap();
        assert_eq!(tensor_transform(&g, &id, &f).unwrap(), fourier(&g, &f).unwrap());
        assert!(tensor_transform(&g, &OperatorSpec::zero(2, 2.0).unwrap(), &f).unwrap().is_zero());
        // rank one: every spectrum value is a multiple of (1, 1 + i)
        for v in a.terms().values() {
            assert!((v[1] - v[0] * c(0.5, 0.5)).norm() < 1e-13);
        }
    }

    #[test]
    fn step_extension_and_discretization() {
        let g = model("Zlat[3] x Z2");
        let space = BanachSpec::new(2, 2.0).unwrap();
        let f = random_function(&g, 4, space, 6).unwrap();
        let ext = step_extension(&f, 1.0).unwrap();
        assert_eq!(ext.model().to_string(), "R[delta=1,M=3] x Z2");
        for p in [1.2, 1.5, 2.0] {
            let a = lp_norm(&f, p).unwrap().value;
            let b = lp_norm(&ext, p).unwrap().value;
            assert!((a - b).abs() <= 1e-14 * a);
        }
        let (back, delta) = grid_discretize(&ext).unwrap();
        assert_eq!(back, f);
        assert_eq!(delta, 1.0);

        let fine = step_extension(&f, 0.25).unwrap();
        let p = 1.5;
        let lhs = lp_norm(&fine, p).unwrap().value;
        let rhs = 0.25f64.powf(1.0 / p) * lp_norm(&f, p).unwrap().value;
        assert!((lhs - rhs).abs() <= 1e-14 * rhs);

        let empty = VecFunction::zero(model("R[delta=0.5,M=2]"), space);
        let (seq, _) = grid_discretize(&empty).unwrap();
        assert!(seq.terms().is_empty());
        assert!(grid_discretize(&f).is_err());
    }

    #[test]
    fn interleaving_plan() {
        let g = model("Zlat[3] x Zlat[2]");
        let f = VecFunction::from_terms(
            g.clone(),
            scalar(),
            [(vec![3, 0], vec![c(1.0, 0.0)]), (vec![-3, 1], vec![c(2.0, 0.0)])],
        )
        .unwrap();
        let plan = make_interleaving(&f).unwrap();
        assert_eq!(plan.a, 7);
        assert_eq!(plan.index(3, 0), 3);
        assert_eq!(plan.index(-3, 1), 4);
        let origin = VecFunction::from_terms(g, scalar(), [(vec![0, 0], vec![c(1.0, 0.0)])]).unwrap();
        assert_eq!(make_interleaving(&origin).unwrap().a, 1);
    }

    #[test]
    fn interleave_single_atom() {
        let g = model("Zlat[2] x Zlat[2]");
        let f = VecFunction::from_terms(g, scalar(), [(vec![1, 1], vec![c(1.0, 0.0)])]).unwrap();
        let plan = make_interleaving(&f).unwrap();
        assert_eq!(plan.a, 3);
        let out = interleave(&f, &plan, PI).unwrap();
        let v = out.get(&[4]).unwrap()[0];
        assert!((v - Complex64::cis(3.0 * PI)).norm() < 1e-15);
    }

    #[test]
    fn interleave_preserves_norms() {
        let g = model("Zlat[3] x Zlat[3] x Z2");
        let space = BanachSpec::new(2, 3.0).unwrap();
        let f = random_function(&g, 12, space, 3).unwrap();
        let plan = make_interleaving(&f).unwrap();
        for s2 in [0.0, 0.4, -2.0, PI] {
            let out = interleave(&f, &plan, s2).unwrap();
            assert_eq!(out.terms().len(), f.terms().len());
            let a = lp_norm(&f, 1.5).unwrap().value;
            let b = lp_norm(&out, 1.5).unwrap().value;
            assert!((a - b).abs() <= 1e-12 * a);
        }
        let narrow = VecFunction::from_terms(g.clone(), space, [(vec![1, 0, 0], vec![c(1.0, 0.0); 2])]).unwrap();
        let wide = VecFunction::from_terms(g, space, [(vec![3, 0, 1], vec![c(1.0, 0.0); 2])]).unwrap();
        let plan = make_interleaving(&narrow).unwrap();
        assert!(matches!(interleave(&wide, &plan, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn zero_extension_on_z4() {
        let g = model("Z4");
        let h = subgroup(&g, &[vec![2]]).unwrap();
        let f = random_function(h.model(), 2, scalar(), 5).unwrap();
        let ext = zero_extend(&f, &Embedding::Subgroup(&h)).unwrap();
        assert!(ext.get(&[1]).is_none() && ext.get(&[3]).is_none());
        assert_eq!(ext.get(&[2]).unwrap(), f.get(&[1]).unwrap());
        for p in [1.3, 2.0] {
            assert_eq!(lp_norm(&ext, p).unwrap().value, lp_norm(&f, p).unwrap().value);
        }
    }

    #[test]
    fn pinned_embedding() {
        let src = model("Zlat[2] x Z2");
        let target = model("Zlat[2] x Zlat[2] x Z2");
        let f = random_function(&src, 3, scalar(), 1).unwrap();
        let e = zero_extend(&f, &Embedding::Pinned { target: target.clone(), positions: vec![0, 2] }).unwrap();
        for (k, v) in f.terms() {
            assert_eq!(e.get(&[k[0], 0, k[1]]).unwrap(), v.as_slice());
        }
        let bad = Embedding::Pinned { target: model("Zlat[2] x T[8] x Z2"), positions: vec![0, 2] };
        assert!(matches!(zero_extend(&f, &bad), Err(Error::Capability(_))));
    }

    #[test]
    fn weil_components() {
        let g = model("Z3");
        let h = subgroup(&g, &[]).unwrap();
        let f = random_function(&g, 3, scalar(), 2).unwrap();
        let parts = weil_decompose(&f, &h).unwrap();
        assert_eq!(parts.len(), 3);
        for (i, part) in parts.iter().enumerate() {
            assert_eq!(part.get(&[]).unwrap(), f.get(&[i as i64]).unwrap());
        }
        let full = subgroup(&g, &[vec![1]]).unwrap();
        let parts = weil_decompose(&f, &full).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(zero_extend(&parts[0], &Embedding::Subgroup(&full)).unwrap(), f);
        let other = subgroup(&model("Z6"), &[]).unwrap();
        assert!(weil_decompose(&f, &other).is_err());
    }
}
