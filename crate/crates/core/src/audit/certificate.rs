use serde::{Deserialize, Serialize};

use super::AuditError;
use crate::hypergraph::UserSet;
use crate::linalg::{stack_blocks, FieldMatrix};
use crate::schemes::Scheme;

/// Outcome of the rank test for one colluding set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankCertificate {
    #[serde(rename = "T")]
    pub collusion: UserSet,
    #[serde(rename = "rank_required")]
    pub required: usize,
    #[serde(rename = "rank_found")]
    pub found: usize,
    pub pass: bool,
}

pub(crate) fn check_collusion(users: usize, collusion: &UserSet) -> Result<(), AuditError> {
    if collusion.iter().any(|u| u == 0 || u > users) {
        return Err(AuditError::InvalidCollusion(format!("T={collusion} is not a subset of 1..={users}")));
    }
    if collusion.len() + 2 > users {
        return Err(AuditError::InvalidCollusion(format!("|T| = {} exceeds K - 2 = {}", collusion.len(), users - 2)));
    }
    Ok(())
}

/// `Ĥ[T]`: block rows for honest users (ascending), block columns for the key
/// groups that avoid `T` (scheme order); block `(k, G)` is `H_G^k`, zero if `k ∉ G`.
pub fn hat_matrix(scheme: &Scheme, collusion: &UserSet) -> Result<FieldMatrix, AuditError> {
    if !scheme.params().is_groupwise() {
        return Err(AuditError::NotApplicable("rank certificates need a groupwise scheme".into()));
    }
    let users = scheme.users();
    check_collusion(users, collusion)?;
    let honest = collusion.complement(users);
    let groups: Vec<_> = scheme.groups().iter().filter(|g| g.members.is_disjoint(collusion)).collect();
    let heights = vec![scheme.params().input_len(); honest.len()];
    let widths: Vec<usize> = groups.iter().map(|g| g.key_len).collect();
    let grid: Vec<Vec<Option<&FieldMatrix>>> =
        honest.iter().map(|k| groups.iter().map(|g| g.block_for(k)).collect()).collect();
    Ok(stack_blocks(scheme.field(), &heights, &widths, &grid)?)
}

/// Passes iff `rank Ĥ[T] = (K - |T| - 1) L`.
pub fn rank_certificate(scheme: &Scheme, collusion: &UserSet) -> Result<RankCertificate, AuditError> {
    let hat = hat_matrix(scheme, collusion)?;
    let required = (scheme.users() - collusion.len() - 1) * scheme.params().input_len();
    let found = hat.rank();
    Ok(RankCertificate { collusion: collusion.clone(), required, found, pass: found == required })
}
