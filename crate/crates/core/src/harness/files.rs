use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Schema};
use crate::audit::AuditReport;
use crate::field::FieldSpec;
use crate::hypergraph::UserSet;
use crate::linalg::{FieldMatrix, FieldVector};
use crate::schemes::{symmetric_from_generators, Scheme, SchemeParams};

/// Output of `keygen`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub schema: Schema,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mi_limit: Option<u64>,
    pub scheme: Scheme,
}

impl SchemeFile {
    pub fn new(scheme: Scheme, seed: Option<u64>, mi_limit: Option<u64>) -> Self {
        Self { schema: Schema, seed, mi_limit, scheme }
    }
}

/// Externally supplied symmetric precoding. Each entry lists a group (lexicographic
/// order) and the blocks of all members but the largest, whose block is the
/// negated sum.
///
/// ```json
/// {"schema": 1, "K": 5, "T": 2, "G": 2, "q": 5,
///  "generators": [{"group": [1, 2], "blocks": [[[3, 3], [1, 4], [2, 4]]]}, ...]}
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureFile {
    pub schema: Schema,
    #[serde(rename = "K")]
    pub users: usize,
    #[serde(rename = "T")]
    pub max_colluders: usize,
    #[serde(rename = "G")]
    pub group_size: usize,
    #[serde(rename = "m", default = "one")]
    pub multiplier: usize,
    pub q: u64,
    pub generators: Vec<FixtureGroup>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixtureGroup {
    pub group: UserSet,
    /// Row-major entries; negative values are reduced mod `q`.
    pub blocks: Vec<Vec<Vec<i64>>>,
}

fn one() -> usize {
    1
}

impl FixtureFile {
    /// Builds the scheme and attaches certificates for every `|T| <= T`.
    pub fn build(&self, path: &Path) -> Result<Scheme, HarnessError> {
        let invalid = |m: String| HarnessError::invalid(path, m);
        let field = FieldSpec::new(self.q).map_err(|e| invalid(e.to_string()))?;
        let params = SchemeParams::symmetric(self.users, self.max_colluders, self.group_size, self.multiplier, field)?;
        let layout = params.group_layout();
        if layout.len() != self.generators.len() {
            return Err(invalid(format!("expected {} groups, got {}", layout.len(), self.generators.len())));
        }
        let mut gens = Vec::with_capacity(layout.len());
        for ((members, _), g) in layout.iter().zip(&self.generators) {
            if &g.group != members {
                return Err(invalid(format!("group {} listed where {members} was expected", g.group)));
            }
            let blocks = g
                .blocks
                .iter()
                .map(|rows| FieldMatrix::from_rows(field, rows))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| invalid(format!("group {members}: {e}")))?;
            gens.push(blocks);
        }
        symmetric_from_generators(params, gens).map_err(|e| invalid(e.to_string()))
    }
}

/// `run --inputs` file: one vector per user, zero-padded to `L`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputsFile {
    pub schema: Schema,
    pub inputs: Vec<Vec<u64>>,
}

impl InputsFile {
    pub fn to_vectors(&self, scheme: &Scheme, path: &Path) -> Result<Vec<FieldVector>, HarnessError> {
        let invalid = |m: String| HarnessError::invalid(path, m);
        let l = scheme.params().input_len();
        if self.inputs.len() != scheme.users() {
            return Err(invalid(format!("{} inputs for {} users", self.inputs.len(), scheme.users())));
        }
        self.inputs
            .iter()
            .enumerate()
            .map(|(i, w)| {
                if w.len() > l {
                    return Err(invalid(format!("input of user {} has {} symbols, L = {l}", i + 1, w.len())));
                }
                let v = FieldVector::from_canonical(scheme.field(), w).map_err(|e| invalid(format!("user {}: {e}", i + 1)))?;
                v.padded(l).map_err(|e| invalid(e.to_string()))
            })
            .collect()
    }
}

/// Output of `audit --out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditFile {
    pub schema: Schema,
    pub report: AuditReport,
}
