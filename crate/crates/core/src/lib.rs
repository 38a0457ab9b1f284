//! Computational toolkit for central values of Dirichlet L-functions twisted
//! by a real character.
//!
//! The crate evaluates every finite object that appears in the mollification
//! argument for `L(1/2, χ)L(1/2, χψ)` with `χ` ranging over even primitive
//! characters modulo a prime `q` and `ψ` a real even primitive character
//! modulo a squarefree discriminant `D`:
//!
//! - [`arith`]: factorization, the Kronecker symbol, `1⋆ψ`, the mollifier
//!   coefficients `ρ`, Ramanujan and Kloosterman sums.
//! - [`characters`]: the character group modulo a prime, Gauss sums, root
//!   numbers and the orthogonality / root-number identities.
//! - [`special`]: complex Γ and digamma, the Mellin-inversion weights of the
//!   approximate functional equation, Bessel `Y₀` and `K₀`.
//! - [`lvalues`]: central values through the approximate functional
//!   equation, with a Hurwitz-zeta oracle.
//! - [`moments`]: mollified moments, the nonvanishing census and the
//!   diagonal Euler products.
//! - [`offdiag`]: shifted convolution sums, singular series and the
//!   `H(u, v)` kernel.
//! - [`voronoi`]: the twisted Voronoi summation formula for `1⋆ψ`.
//!
//! Every real or complex accumulation goes through [`sum`], which uses
//! compensated summation in a fixed order so results are bit-stable across
//! thread counts.

pub mod arith;
pub mod characters;
mod error;
pub mod lvalues;
pub mod moments;
pub mod offdiag;
pub mod par;
pub mod quad;
pub mod special;
pub mod sum;
pub mod voronoi;

pub use error::{Error, Result};
pub use num_complex::Complex64;
