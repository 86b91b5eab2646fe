//! Learning from label proportions (LLP).
//!
//! Training data arrives as bags of feature vectors, each labeled only with
//! the class proportions of its members; predictions are made per instance.
//! The crate provides:
//!
//! - proportion losses: KL ([`losses::kl_proportion_loss`]), total variation,
//!   and the bounded, symmetric TV* family ([`losses::tv_star_loss`]), plus a
//!   bag-level contrastive auxiliary loss ([`losses::ssc_loss`]);
//! - per-epoch reshuffled bags ([`bagging::make_bags`]);
//! - linear and one-hidden-layer softmax models with exact backward passes
//!   ([`model::backward`]) trained one bag per step ([`trainer::train`]);
//! - weighted precision / recall / F1 ([`metrics`]) and sweeps ([`sweep`]);
//! - executable audits of the loss properties and the generalization bound
//!   ([`theory`], [`gradcheck`]).
//!
//! Class labels are 0-based. All arithmetic is `f64`.
//!
//! ```
//! use llp_forge::losses::{kl_proportion_loss, tv_star_loss};
//! use llp_forge::simplex::make_simplex;
//!
//! let rho = make_simplex(&[0.7, 0.3]).unwrap();
//! let pred = make_simplex(&[0.4, 0.6]).unwrap();
//! assert!((tv_star_loss(&rho, &pred, 2.0).unwrap() - 0.09).abs() < 1e-12);
//! assert!(kl_proportion_loss(&rho, &pred).unwrap() > 0.0);
//! ```

pub mod bagging;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod error;
pub mod gradcheck;
pub mod losses;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod simplex;
pub mod sweep;
pub mod theory;
pub mod trainer;

pub use error::{LlpError, Result};
