use std::collections::{BTreeMap, BTreeSet};

use super::{lcm, Factor, GroupModel, Side};
use crate::error::{Error, Result};

/// A subgroup `H` of a finite model together with coset representatives and
/// an explicit isomorphism `Z_{d_1} x .. x Z_{d_k} -> H`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgroupDecomposition {
    parent: GroupModel,
    /// Elements of `H`, lexicographically sorted.
    elements: Vec<Vec<i64>>,
    /// Lexicographically smallest element of each coset; `representatives[0]` is the identity.
    representatives: Vec<Vec<i64>>,
    /// `H` as its own finite model.
    model: GroupModel,
    /// Images in the parent of the unit vectors of `model`.
    basis: Vec<Vec<i64>>,
    to_parent: Vec<Vec<i64>>,
    from_parent: BTreeMap<Vec<i64>, Vec<i64>>,
}

impl SubgroupDecomposition {
    pub fn parent(&self) -> &GroupModel {
        &self.parent
    }

    pub fn elements(&self) -> &[Vec<i64>] {
        &self.elements
    }

    pub fn representatives(&self) -> &[Vec<i64>] {
        &self.representatives
    }

    /// `n = |G| / |H|`.
    pub fn index(&self) -> usize {
        self.representatives.len()
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    /// Parent element corresponding to an index of [`Self::model`].
    pub fn embed(&self, h: &[i64]) -> Result<Vec<i64>> {
        if !self.model.contains_index(h) {
            return Err(Error::Domain(format!("{h:?} is not a point of {}", self.model)));
        }
        let mut flat = 0usize;
        for (f, &k) in self.model.factors().iter().zip(h) {
            let Factor::Cyclic { order, .. } = f else { unreachable!() };
            flat = flat * *order as usize + k as usize;
        }
        Ok(self.to_parent[flat].clone())
    }

    /// Inverse of [`Self::embed`]; `None` when `g` is not in `H`.
    pub fn locate(&self, g: &[i64]) -> Option<&[i64]> {
        self.from_parent.get(g).map(Vec::as_slice)
    }

    pub fn contains(&self, g: &[i64]) -> bool {
        self.from_parent.contains_key(g)
    }
}

fn closure(g: &GroupModel, generators: &[Vec<i64>]) -> BTreeSet<Vec<i64>> {
    let mut set = BTreeSet::from([g.identity()]);
    let mut frontier = vec![g.identity()];
    while let Some(x) = frontier.pop() {
        for gen in generators {
            let y = g.add(&x, gen);
            if set.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    set
}

fn element_order(g: &GroupModel, x: &[i64]) -> u64 {
    g.factors()
        .iter()
        .zip(x)
        .map(|(f, &k)| match f {
            Factor::Cyclic { order, .. } => *order as i64 / super::gcd(k, *order as i64),
            _ => 1,
        })
        .fold(1i64, lcm) as u64
}

/// Depth-first search for elements `b_1..b_k` with `H = <b_1> (+) .. (+) <b_k>`.
fn cyclic_basis(g: &GroupModel, h: &BTreeSet<Vec<i64>>) -> Vec<(Vec<i64>, u64)> {
    let mut candidates: Vec<(u64, &Vec<i64>)> = h
        .iter()
        .map(|x| (element_order(g, x), x))
        .filter(|(o, _)| *o > 1)
        .collect();
    candidates.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1)));

    fn search(
        g: &GroupModel,
        target: usize,
        candidates: &[(u64, &Vec<i64>)],
        span: &BTreeSet<Vec<i64>>,
        basis: &mut Vec<(Vec<i64>, u64)>,
    ) -> bool {
        if span.len() == target {
            return true;
        }
        for &(order, x) in candidates {
            if span.contains(x) {
                continue;
            }
            let cyclic = closure(g, std::slice::from_ref(x));
            if cyclic.iter().filter(|y| span.contains(*y)).count() != 1 {
                continue;
            }
            let next: BTreeSet<Vec<i64>> =
                span.iter().flat_map(|a| cyclic.iter().map(move |c| g.add(a, c))).collect();
            basis.push((x.clone(), order));
            if search(g, target, candidates, &next, basis) {
                return true;
            }
            basis.pop();
        }
        false
    }

    let mut basis = Vec::new();
    let found = search(g, h.len(), &candidates, &BTreeSet::from([g.identity()]), &mut basis);
    debug_assert!(found, "every finite abelian group has a cyclic decomposition");
    basis
}

/// Subgroup generated by `generators` in a finite model, with lexicographically
/// smallest coset representatives.
pub fn subgroup(g: &GroupModel, generators: &[Vec<i64>]) -> Result<SubgroupDecomposition> {
    if !g.is_finite() {
        return Err(Error::Capability(format!(
            "subgroup decomposition needs a finite model, got {g}"
        )));
    }
    for gen in generators {
        if !g.contains_index(gen) {
            return Err(Error::Domain(format!("generator {gen:?} is not a point of {g}")));
        }
    }
    let h = closure(g, generators);

    let mut representatives = Vec::new();
    let mut covered = BTreeSet::new();
    for x in g.indices() {
        if covered.contains(&x) {
            continue;
        }
        for y in &h {
            covered.insert(g.add(&x, y));
        }
        representatives.push(x);
    }

    let basis = cyclic_basis(g, &h);
    let side = match g.factors().first() {
        Some(Factor::Cyclic { side, .. }) => *side,
        _ => Side::Primal,
    };
    let model = GroupModel::from_factors(
        basis.iter().map(|(_, o)| Factor::Cyclic { order: *o as u32, side }).collect(),
    )?;
    let mut to_parent = Vec::with_capacity(h.len());
    let mut from_parent = BTreeMap::new();
    for idx in model.indices() {
        let mut x = g.identity();
        for ((b, _), &k) in basis.iter().zip(&idx) {
            for _ in 0..k {
                x = g.add(&x, b);
            }
        }
        from_parent.insert(x.clone(), idx);
        to_parent.push(x);
    }
    debug_assert_eq!(from_parent.len(), h.len());

    Ok(SubgroupDecomposition {
        parent: g.clone(),
        elements: h.into_iter().collect(),
        representatives,
        model,
        basis: basis.into_iter().map(|(b, _)| b).collect(),
        to_parent,
        from_parent,
    })
}

/// `H^⊥`: characters of the dual model that are trivial on `H`, in
/// lexicographic order.
pub fn annihilator(g: &GroupModel, h: &SubgroupDecomposition) -> Result<Vec<Vec<i64>>> {
    if h.parent() != g {
        return Err(Error::Domain("subgroup belongs to a different model".into()));
    }
    let orders: Vec<i64> = g.orders().unwrap().into_iter().map(i64::from).collect();
    let l = orders.iter().copied().fold(1, lcm);
    let trivial_on = |chi: &[i64], x: &[i64]| {
        orders
            .iter()
            .zip(chi.iter().zip(x))
            .fold(0i64, |acc, (&n, (&c, &a))| (acc + (c * a).rem_euclid(n) * (l / n)).rem_euclid(l))
            == 0
    };
    // Trivial on the basis implies trivial on H.
    Ok(g.dual()
        .indices()
        .into_iter()
        .filter(|chi| h.basis().iter().all(|b| trivial_on(chi, b)))
        .collect())
}
