//! Vector-valued Fourier transforms on computable models of locally compact
//! abelian groups, and numerical estimation of Fourier-type constants
//! `||T | FT_p^G||` of finite-dimensional operators.

pub mod error;
pub mod ftype;
pub mod group;
pub mod operator;
pub mod quadrature;
pub mod sinc;
pub mod transform;
pub mod verify;
pub mod vecfun;

pub use error::{Error, Result};
pub use group::{GroupModel, SubgroupDecomposition};
pub use operator::{dual_operator, OperatorSpec};
pub use vecfun::{BanachSpec, NormResult, VecFunction};
