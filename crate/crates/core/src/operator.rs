use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecfun::BanachSpec;

/// A complex `dim_Y x dim_X` matrix between two finite-dimensional `l_q` spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorDoc", into = "OperatorDoc")]
pub struct OperatorSpec {
    matrix: Vec<Vec<Complex64>>,
    domain: BanachSpec,
    codomain: BanachSpec,
}

#[derive(Serialize, Deserialize)]
struct OperatorDoc {
    matrix: Vec<Vec<Complex64>>,
    domain: BanachSpec,
    codomain: BanachSpec,
}

impl TryFrom<OperatorDoc> for OperatorSpec {
    type Error = Error;

    fn try_from(d: OperatorDoc) -> Result<Self> {
        OperatorSpec::new(d.matrix, d.domain, d.codomain)
    }
}

impl From<OperatorSpec> for OperatorDoc {
    fn from(t: OperatorSpec) -> Self {
        OperatorDoc { matrix: t.matrix, domain: t.domain, codomain: t.codomain }
    }
}

impl OperatorSpec {
    pub fn new(matrix: Vec<Vec<Complex64>>, domain: BanachSpec, codomain: BanachSpec) -> Result<Self> {
        if matrix.len() != codomain.dim {
            return Err(Error::validation(
                "matrix",
                format!("{} rows for a codomain of dimension {}", matrix.len(), codomain.dim),
            ));
        }
        if let Some(row) = matrix.iter().find(|r| r.len() != domain.dim) {
            return Err(Error::validation(
                "matrix",
                format!("row of length {} for a domain of dimension {}", row.len(), domain.dim),
            ));
        }
        if matrix.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::validation("matrix", "entries must be finite"));
        }
        Ok(OperatorSpec { matrix, domain, codomain })
    }

    pub fn identity(dim: usize, q: f64) -> Result<Self> {
        let space = BanachSpec::new(dim, q)?;
        let matrix = (0..dim)
            .map(|i| (0..dim).map(|j| Complex64::new(f64::from(u8::from(i == j)), 0.0)).collect())
            .collect();
        OperatorSpec::new(matrix, space, space)
    }

    pub fn zero(dim: usize, q: f64) -> Result<Self> {
        let space = BanachSpec::new(dim, q)?;
        OperatorSpec::new(vec![vec![Complex64::new(0.0, 0.0); dim]; dim], space, space)
    }

    /// `c` times the identity on the scalars (`dim = 1`).
    pub fn scalar(c: Complex64) -> Self {
        let space = BanachSpec::new(1, 2.0).unwrap();
        OperatorSpec { matrix: vec![vec![c]], domain: space, codomain: space }
    }

    pub fn matrix(&self) -> &[Vec<Complex64>] {
        &self.matrix
    }

    pub fn domain(&self) -> BanachSpec {
        self.domain
    }

    pub fn codomain(&self) -> BanachSpec {
        self.codomain
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(|z| *z == Complex64::new(0.0, 0.0))
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        self.matrix.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// `T^H x`: the adjoint action, used for gradients.
    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.domain.dim];
        for (row, &yi) in self.matrix.iter().zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a.conj() * yi;
            }
        }
        out
    }
}

/// Conjugate transpose, mapping `Y' -> X'`.
pub fn dual_operator(t: &OperatorSpec) -> OperatorSpec {
    let rows = t.domain.dim;
    let cols = t.codomain.dim;
    let matrix = (0..rows).map(|i| (0..cols).map(|j| t.matrix[j][i].conj()).collect()).collect();
    OperatorSpec { matrix, domain: t.codomain.dual(), codomain: t.domain.dual() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_dual_swaps_exponents() {
        let t = OperatorSpec::new(
            vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]],
            BanachSpec::new(2, 1.5).unwrap(),
            BanachSpec::new(2, 4.0).unwrap(),
        )
        .unwrap();
        let d = dual_operator(&t);
        assert_eq!(d.matrix(), t.matrix());
        assert_eq!(d.domain().q, 4.0 / 3.0);
        assert!((d.codomain().q - 3.0).abs() < 1e-15);
    }

    #[test]
    fn dual_is_an_involution() {
        let t = OperatorSpec::new(
            vec![vec![c(1.0, 2.0), c(-0.5, 0.25)], vec![c(0.0, -1.0), c(3.0, 0.0)], vec![c(1.0, 1.0), c(0.0, 0.0)]],
            BanachSpec::new(2, 3.0).unwrap(),
            BanachSpec::new(3, 1.25).unwrap(),
        )
        .unwrap();
        let dd = dual_operator(&dual_operator(&t));
        assert_eq!(dd.matrix(), t.matrix());
        assert_eq!(dd.domain().dim, 2);
        assert!((dd.domain().q - 3.0).abs() < 1e-14);
    }

    #[test]
    fn nilpotent_example() {
        let t = OperatorSpec::new(
            vec![vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(0.0, 0.0)]],
            BanachSpec::new(2, 2.0).unwrap(),
            BanachSpec::new(2, 2.0).unwrap(),
        )
        .unwrap();
        let d = dual_operator(&t);
        assert_eq!(d.matrix()[1][0], c(1.0, 0.0));
        assert_eq!(d.matrix()[0][1], c(0.0, 0.0));
    }

    #[test]
    fn adjoint_matches_conjugate_transpose() {
        let t = OperatorSpec::new(
            vec![vec![c(1.0, 2.0), c(0.5, -1.0)]],
            BanachSpec::new(2, 2.0).unwrap(),
            BanachSpec::new(1, 2.0).unwrap(),
        )
        .unwrap();
        let y = [c(0.3, -0.7)];
        assert_eq!(t.apply_adjoint(&y), dual_operator(&t).apply(&y));
    }

    #[test]
    fn shape_validation() {
        let s = BanachSpec::new(2, 2.0).unwrap();
        assert!(OperatorSpec::new(vec![vec![c(1.0, 0.0)]], s, s).is_err());
        assert!(OperatorSpec::new(vec![vec![c(f64::NAN, 0.0); 2]; 2], s, s).is_err());
    }
}
