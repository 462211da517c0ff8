//! Exact computation for boundary actions of free groups.
//!
//! This crate implements, over exact integer arithmetic, the objects attached
//! to the diagonal action of a free group `F_n` on the product of its Gromov
//! boundary and a finite coset space:
//!
//! - reduced words, Nielsen automorphisms and their abelianizations ([`words`]),
//! - finite-index subgroups as Schreier coset graphs with Schreier free bases
//!   ([`subgrp`]),
//! - the clopen-set algebra of the boundary, cylinder sets `Omega` and `Theta`,
//!   and the boundary action ([`boundary`]),
//! - Smith normal form with transformation certificates and the Cuntz-Krieger
//!   K-theory of the diagonal action ([`matrix`], [`ktheory`]),
//! - supernatural-number arithmetic and the classification of the
//!   boundary-times-odometer family by K-theoretic invariants ([`supernat`],
//!   [`classify`]),
//! - finite-level models of the dynamical systems: odometer towers, minimality
//!   certification, and Pimsner-Voiculescu kernel ranks ([`dynsys`]).
//!
//! All values are immutable after construction and every operation is a pure
//! function, so everything here is safe to use concurrently.
//!
//! ```
//! use freeboundary::words::ReducedWord;
//!
//! let a = ReducedWord::generator(2, 1).unwrap();
//! let b = ReducedWord::generator(2, 2).unwrap();
//! let ab = a.multiply(&b).unwrap();
//! assert_eq!(ab.multiply(&ab.inverse()).unwrap(), ReducedWord::identity(2));
//! ```

pub mod boundary;
pub mod classify;
pub mod dynsys;
pub mod error;
pub mod ktheory;
pub mod matrix;
pub mod subgrp;
pub mod supernat;
pub mod words;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
