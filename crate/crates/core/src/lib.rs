//! Surplus-extracting auctions for correlated bidders whose prior is only
//! known to lie in a finite family of discrete distributions.
//!
//! The auction runs a second-price auction, draws `m` fresh value profiles
//! from the true prior, and charges every bidder a lottery payment that
//! depends on the other bids and the samples. Lotteries are chosen so every
//! bidder's interim utility is zero under every member of the family.
//!
//! ```
//! use cm_core::{dist, linalg, mechanisms, verify};
//!
//! let family = dist::coin_family(2, 0.1).unwrap();
//! let m = mechanisms::sample_search(&family, linalg::DEFAULT_RANK_TOL, linalg::DEFAULT_CAP).unwrap();
//! assert_eq!(m, 1);
//! let auction = mechanisms::solve_lotteries(&family, m, linalg::DEFAULT_SOLVE_TOL, linalg::DEFAULT_CAP).unwrap();
//! let reports = verify::exact_certify(&auction, 1e-9, linalg::DEFAULT_CAP).unwrap();
//! assert!(reports.iter().all(|r| r.full_surplus_ok));
//! ```

pub mod dist;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod mechanisms;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
