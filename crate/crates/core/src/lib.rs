//! Construction and certification of finite Laplace transforms that change
//! sign along an unbounded sequence of real arguments.
//!
//! The library builds a function `g` on (0,1) as a finite alternating
//! combination of disjointly supported bump functions, then *forges* a
//! certificate: checkpoints `b_2 < b_3 < …` where the transform
//! `G(k) = ∫₀¹ g(x) e^{kx} dx` provably exceeds a margin `ω` with alternating
//! sign, zeros of `G` bracketed between consecutive checkpoints, and an
//! invariant suite that re-derives every finitely checkable bound from the
//! certificate alone.
//!
//! Everything numerically delicate runs in signed log-domain arithmetic
//! ([`scaled`]) with explicit precision policies, because the sums involved
//! span dynamic ranges like `e^{±10^18}` and cancel catastrophically near
//! zeros of `G`.
//!
//! ```
//! use lapforge_core::*;
//!
//! let family = BumpFamily::standard(0.9, 2).unwrap();
//! let series = AlternatingSeries::geometric(family, 64, SignPattern::Alternating).unwrap();
//! let params = ForgeParams { omega: 0.1, pairs: 1, ..Default::default() };
//! let forged = forge(&series, &params).unwrap();
//!
//! let policy = PrecisionPolicy::default();
//! let zeros = find_zeros(&forged.certificate, &forged.series, 1e-12, &policy).unwrap();
//! assert_eq!(zeros.len(), 1);
//! assert!(forged.certificate.b[0] < zeros[0].k && zeros[0].k < forged.certificate.b[1]);
//!
//! let report = run_all_checks(&forged.certificate, &forged.series, &policy, 0).unwrap();
//! assert!(report.passing);
//! ```

pub mod basis;
pub mod forge;
pub mod quad;
pub mod real;
pub mod scaled;
pub mod series;
pub mod verify;
pub mod zeros;

pub use basis::{BumpFamily, Partition, Profile};
pub use forge::{erosion_report, forge, Certificate, ForgeOutcome, ForgeParams, ZeroRecord};
pub use real::Real;
pub use scaled::{ls_mul, ls_sum, LogSigned, PrecisionPolicy};
pub use series::{AlternatingSeries, SignPattern, TransformValue};
pub use verify::{run_all_checks, CheckResult, VerifyReport};
pub use zeros::{bisect, bracket_zeros, find_zeros, ZeroBracket};
