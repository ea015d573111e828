use std::fmt;

use num_integer::binomial;
use serde::{Deserialize, Serialize};

use super::{AuditError, Rational};

/// Optimal region for coded keys: `R >= 1, R_Z >= 1, R_ZΣ >= K - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodedRegion {
    #[serde(with = "super::rational_str")]
    pub rate: Rational,
    #[serde(with = "super::rational_str")]
    pub key_rate: Rational,
    #[serde(with = "super::rational_str")]
    pub source_key_rate: Rational,
}

impl fmt::Display for CodedRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R ≥ {}, R_Z ≥ {}, R_ZΣ ≥ {}", self.rate, self.key_rate, self.source_key_rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfeasibleReason {
    /// Some `G`-group always contains a colluder, so no key survives collusion.
    GroupExceedsHonestUsers,
    /// `G = 1`: every key is private, nothing ties two users together.
    PrivateKeysOnly,
}

impl fmt::Display for InfeasibleReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfeasibleReason::GroupExceedsHonestUsers => write!(f, "G > K - T, every group meets some colluding set"),
            InfeasibleReason::PrivateKeysOnly => write!(f, "G = 1, keys are private and cannot cancel"),
        }
    }
}

/// Optimal region for symmetric groupwise keys, or infeasibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GroupwiseRegion {
    Infeasible {
        reason: InfeasibleReason,
    },
    Region {
        #[serde(with = "super::rational_str")]
        rate: Rational,
        #[serde(with = "super::rational_str")]
        key_rate: Rational,
    },
}

impl GroupwiseRegion {
    pub fn is_feasible(&self) -> bool {
        matches!(self, GroupwiseRegion::Region { .. })
    }
}

impl fmt::Display for GroupwiseRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupwiseRegion::Infeasible { .. } => write!(f, "INFEASIBLE"),
            GroupwiseRegion::Region { rate, key_rate } => write!(f, "R ≥ {rate}, R_S ≥ {key_rate}"),
        }
    }
}

fn check_users(users: usize, max_colluders: usize) -> Result<(), AuditError> {
    if users < 2 {
        return Err(AuditError::Bounds(format!("K = {users}, need K >= 2")));
    }
    if max_colluders + 2 > users {
        return Err(AuditError::Bounds(format!("T = {max_colluders}, need T <= K - 2 = {}", users - 2)));
    }
    Ok(())
}

/// The region does not depend on `T`; `T` is only range-checked.
pub fn capacity_coded(users: usize, max_colluders: usize) -> Result<CodedRegion, AuditError> {
    check_users(users, max_colluders)?;
    Ok(CodedRegion {
        rate: Rational::from_integer(1),
        key_rate: Rational::from_integer(1),
        source_key_rate: Rational::from_integer(users as i128 - 1),
    })
}

/// `R_S >= (K-T-1) / C(K-T, G)` when `2 <= G <= K - T`.
///
/// `G = 1` is reported infeasible: a secure scheme needs the hypergraph of key
/// groups to stay connected, and singleton groups connect nothing.
pub fn capacity_groupwise(users: usize, max_colluders: usize, group_size: usize) -> Result<GroupwiseRegion, AuditError> {
    check_users(users, max_colluders)?;
    if group_size == 0 || group_size > users {
        return Err(AuditError::Bounds(format!("G = {group_size}, need 1 <= G <= K = {users}")));
    }
    let free = users - max_colluders;
    if group_size > free {
        return Ok(GroupwiseRegion::Infeasible { reason: InfeasibleReason::GroupExceedsHonestUsers });
    }
    if group_size == 1 {
        return Ok(GroupwiseRegion::Infeasible { reason: InfeasibleReason::PrivateKeysOnly });
    }
    Ok(GroupwiseRegion::Region {
        rate: Rational::from_integer(1),
        key_rate: Rational::new((free - 1) as i128, binomial(free, group_size) as i128),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coded_region_values() {
        assert_eq!(capacity_coded(3, 0).unwrap().to_string(), "R ≥ 1, R_Z ≥ 1, R_ZΣ ≥ 2");
        assert_eq!(capacity_coded(2, 0).unwrap().to_string(), "R ≥ 1, R_Z ≥ 1, R_ZΣ ≥ 1");
        assert_eq!(capacity_coded(5, 3).unwrap(), capacity_coded(5, 0).unwrap());
        assert!(capacity_coded(5, 4).is_err());
        assert!(capacity_coded(1, 0).is_err());
    }

    #[test]
    fn groupwise_region_values() {
        assert_eq!(capacity_groupwise(3, 0, 2).unwrap().to_string(), "R ≥ 1, R_S ≥ 2/3");
        assert_eq!(capacity_groupwise(5, 2, 2).unwrap().to_string(), "R ≥ 1, R_S ≥ 2/3");
        assert_eq!(capacity_groupwise(4, 2, 3).unwrap().to_string(), "INFEASIBLE");
        // G = K - T: a single honest group, key rate (K-T-1)/1
        assert_eq!(capacity_groupwise(6, 1, 5).unwrap().to_string(), "R ≥ 1, R_S ≥ 4");
        assert_eq!(
            capacity_groupwise(4, 0, 1).unwrap(),
            GroupwiseRegion::Infeasible { reason: InfeasibleReason::PrivateKeysOnly }
        );
        assert!(capacity_groupwise(4, 0, 5).is_err());
        assert!(capacity_groupwise(4, 0, 0).is_err());
    }

    #[test]
    fn region_json() {
        let r = capacity_groupwise(3, 0, 2).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(json, r#"{"status":"region","rate":"1","key_rate":"2/3"}"#);
        assert_eq!(serde_json::from_str::<GroupwiseRegion>(&json).unwrap(), r);
    }
}
