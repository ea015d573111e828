//! Security and optimality checks for built schemes.
//!
//! * rank certificates: for a linear groupwise scheme, colluding set `T` learns
//!   nothing beyond the sum iff `Ĥ[T]` has rank `(K - |T| - 1) L`;
//! * exact conditional mutual information by exhaustive enumeration at desk scale;
//! * achieved rates against the optimal rate regions.

mod capacity;
mod certificate;
mod mutual_info;
mod rates;

pub use capacity::{capacity_coded, capacity_groupwise, CodedRegion, GroupwiseRegion, InfeasibleReason};
pub use certificate::{hat_matrix, rank_certificate, RankCertificate};
pub use mutual_info::{mi_bruteforce, state_space, MiValue, MutualInformation, DEFAULT_MI_LIMIT};
pub use rates::{rate_report, RateCoordinate, RateReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{CollusionFamily, UserSet};
use crate::linalg::LinalgError;
use crate::schemes::Scheme;

pub type Rational = num_rational::Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("parameter out of range: {0}")]
    Bounds(String),
    #[error("invalid colluding set: {0}")]
    InvalidCollusion(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("state space {states} exceeds the limit of {limit} joint states")]
    StateSpaceTooLarge { states: String, limit: u64 },
    #[error("encoding failed during enumeration: {0}")]
    Encoding(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Rationals as `"p/q"` strings (integers as `"p"`).
pub mod rational_str {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    use super::Rational;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(|_| D::Error::custom(format!("not a rational: {s:?}")))
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match r {
                Some(r) => s.collect_str(r),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| s.parse().map_err(|_| D::Error::custom(format!("not a rational: {s:?}"))))
                .transpose()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum MiOutcome {
    Computed { mi: MiValue, state_space: u64 },
    Skipped { reason: String },
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiCheck {
    #[serde(rename = "T")]
    pub collusion: UserSet,
    pub outcome: MiOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryError {
    #[serde(rename = "T")]
    pub collusion: UserSet,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub per_collusion: Vec<RankCertificate>,
    pub mi_checks: Vec<MiCheck>,
    pub rates: RateReport,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<EntryError>,
}

impl AuditReport {
    pub fn certificates_pass(&self) -> bool {
        self.errors.is_empty() && self.per_collusion.iter().all(|c| c.pass)
    }

    /// Every computed MI value is exactly zero (skipped entries are ignored).
    pub fn mi_secure(&self) -> bool {
        self.mi_checks.iter().all(|m| match &m.outcome {
            MiOutcome::Computed { mi, .. } => mi.is_zero(),
            MiOutcome::Skipped { .. } => true,
            MiOutcome::Error { .. } => false,
        })
    }

    pub fn mi_skipped(&self) -> bool {
        self.mi_checks.iter().any(|m| matches!(m.outcome, MiOutcome::Skipped { .. }))
    }

    pub fn secure(&self) -> bool {
        self.certificates_pass() && self.mi_secure()
    }
}

/// Rank certificates (groupwise schemes) for every set in `family` plus the empty
/// set, exact MI for each set when `mi_limit` is given and the enumeration fits, and
/// the rate report. Failures are recorded per entry.
pub fn audit_scheme(scheme: &Scheme, family: &CollusionFamily, mi_limit: Option<u64>) -> Result<AuditReport, AuditError> {
    if family.users() != scheme.users() {
        return Err(AuditError::InvalidCollusion(format!(
            "family is over {} users, scheme has {}",
            family.users(),
            scheme.users()
        )));
    }
    let family = family.with_empty();
    let sets = family.sets();
    let mut errors = Vec::new();
    let mut per_collusion = Vec::new();
    if scheme.params().is_groupwise() {
        let results: Vec<_> = sets.par_iter().map(|t| rank_certificate(scheme, t)).collect();
        for (t, r) in sets.iter().zip(results) {
            match r {
                Ok(c) => per_collusion.push(c),
                Err(e) => errors.push(EntryError { collusion: t.clone(), message: e.to_string() }),
            }
        }
    }
    let mi_checks = match mi_limit {
        None => Vec::new(),
        Some(limit) => sets
            .iter()
            .map(|t| {
                let outcome = match mi_bruteforce(scheme, t, limit) {
                    Ok(mi) => MiOutcome::Computed { mi: mi.value, state_space: mi.state_space },
                    Err(e @ AuditError::StateSpaceTooLarge { .. }) => MiOutcome::Skipped { reason: e.to_string() },
                    Err(e) => MiOutcome::Error { message: e.to_string() },
                };
                MiCheck { collusion: t.clone(), outcome }
            })
            .collect(),
    };
    Ok(AuditReport { per_collusion, mi_checks, rates: rate_report(scheme), errors })
}
