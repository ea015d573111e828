//! Executable secure-summation schemes.
//!
//! Three key regimes are supported:
//!
//! * **coded** keys: `Z_1..Z_{K-1}` uniform, `Z_K = -(Z_1 + ... + Z_{K-1})`, `X_k = W_k + Z_k`;
//! * **symmetric groupwise** keys: every `G`-subset of users shares a key `S_G`
//!   which user `k` precodes with `H_G^k` (an `L x L_S` matrix) before adding it to
//!   its input;
//! * **general groupwise** keys on an arbitrary key hypergraph, with scalar inputs
//!   (`L = 1`) and fixed `1 x (|G|-1)` precoding rows.
//!
//! In both groupwise regimes the precoding blocks of a group sum to zero, so the
//! keys cancel in `X_1 + ... + X_K`.

mod coded;
mod general;
mod symmetric;

pub use coded::coded_keygen;
pub use general::general_keygen;
pub use symmetric::{draw_symmetric, symmetric_from_generators, symmetric_keygen, SymmetricRequest, DEFAULT_MAX_ATTEMPTS};

use num_integer::binomial;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::audit::{self, AuditError, GroupwiseRegion, RankCertificate};
use crate::field::{FieldError, FieldSpec};
use crate::hypergraph::{CollusionFamily, HypergraphError, HypergraphInstance, KeyHypergraph, UserSet};
use crate::linalg::{FieldMatrix, FieldVector, LinalgError};
use crate::stream::RandomStream;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("secure summation is infeasible for K={users}, T={max_colluders}, G={group_size}: {reason}")]
    Infeasible { users: usize, max_colluders: usize, group_size: usize, reason: String },
    #[error(
        "no precoding passed every rank certificate after {attempts} attempts (last failure: T={failing}); \
         try a larger field q or block multiplier m"
    )]
    CertificateNotFound { attempts: usize, failing: UserSet },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("malformed scheme: {0}")]
    Malformed(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error(transparent)]
    Audit(#[from] AuditError),
}

/// Which key regime a scheme uses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeKind {
    Coded,
    Symmetric { max_colluders: usize, group_size: usize, multiplier: usize },
    General { hypergraph: KeyHypergraph, collusion: CollusionFamily },
}

/// Key sizes in symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KeyLengths {
    General {
        per_edge: Vec<usize>,
        /// Longest edge key; shorter keys can be zero-padded to this length.
        #[serde(rename = "L_S")]
        padded: usize,
    },
    Coded {
        #[serde(rename = "L_Z")]
        individual: usize,
        #[serde(rename = "L_ZSigma")]
        source: usize,
    },
    Symmetric {
        #[serde(rename = "L_S")]
        groupwise: usize,
    },
}

/// Scheme parameters: `K`, `q`, the key regime, `L`, `L_X` and key lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ParamsRepr", try_from = "ParamsRepr")]
pub struct SchemeParams {
    users: usize,
    field: FieldSpec,
    kind: SchemeKind,
    input_len: usize,
    message_len: usize,
    keys: KeyLengths,
}

impl SchemeParams {
    pub fn coded(users: usize, input_len: usize, field: FieldSpec) -> Result<Self, SchemeError> {
        if users < 2 {
            return Err(SchemeError::InvalidParameters(format!("K = {users}, need K >= 2")));
        }
        if input_len == 0 {
            return Err(SchemeError::InvalidParameters("L must be at least 1".into()));
        }
        Ok(Self {
            users,
            field,
            kind: SchemeKind::Coded,
            input_len,
            message_len: input_len,
            keys: KeyLengths::Coded { individual: input_len, source: (users - 1) * input_len },
        })
    }

    /// Minimal block shape `L = C(K-T, G) m`, `L_S = (K-T-1) m`.
    pub fn symmetric(
        users: usize,
        max_colluders: usize,
        group_size: usize,
        multiplier: usize,
        field: FieldSpec,
    ) -> Result<Self, SchemeError> {
        if multiplier == 0 {
            return Err(SchemeError::InvalidParameters("block multiplier m must be at least 1".into()));
        }
        let region = audit::capacity_groupwise(users, max_colluders, group_size)
            .map_err(|e| SchemeError::InvalidParameters(e.to_string()))?;
        if let GroupwiseRegion::Infeasible { reason } = region {
            return Err(SchemeError::Infeasible { users, max_colluders, group_size, reason: reason.to_string() });
        }
        let free = users - max_colluders;
        let input_len = binomial(free, group_size) * multiplier;
        Ok(Self {
            users,
            field,
            kind: SchemeKind::Symmetric { max_colluders, group_size, multiplier },
            input_len,
            message_len: input_len,
            keys: KeyLengths::Symmetric { groupwise: (free - 1) * multiplier },
        })
    }

    /// Scalar scheme on an arbitrary key hypergraph; edge `G` carries `|G| - 1` key symbols.
    pub fn general(hypergraph: KeyHypergraph, collusion: CollusionFamily, field: FieldSpec) -> Result<Self, SchemeError> {
        if hypergraph.users() != collusion.users() {
            return Err(HypergraphError::UserCountMismatch { graph: hypergraph.users(), family: collusion.users() }.into());
        }
        let per_edge: Vec<usize> = hypergraph.edges().iter().map(|e| e.len() - 1).collect();
        let padded = per_edge.iter().copied().max().unwrap_or(0);
        Ok(Self {
            users: hypergraph.users(),
            field,
            kind: SchemeKind::General { hypergraph, collusion },
            input_len: 1,
            message_len: 1,
            keys: KeyLengths::General { per_edge, padded },
        })
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn kind(&self) -> &SchemeKind {
        &self.kind
    }

    pub fn input_len(&self) -> usize {
        self.input_len
    }

    pub fn message_len(&self) -> usize {
        self.message_len
    }

    pub fn keys(&self) -> &KeyLengths {
        &self.keys
    }

    pub fn is_groupwise(&self) -> bool {
        !matches!(self.kind, SchemeKind::Coded)
    }

    /// Number of symbols in the source key `Z_Σ`.
    pub fn source_len(&self) -> usize {
        match (&self.kind, &self.keys) {
            (SchemeKind::Symmetric { group_size, .. }, KeyLengths::Symmetric { groupwise }) => {
                binomial(self.users, *group_size) * groupwise
            }
            (_, KeyLengths::Coded { source, .. }) => *source,
            (_, KeyLengths::General { per_edge, .. }) => per_edge.iter().sum(),
            _ => unreachable!("kind and key lengths are built together"),
        }
    }

    /// Key groups in canonical order with their key lengths (empty for coded keys).
    pub fn group_layout(&self) -> Vec<(UserSet, usize)> {
        match (&self.kind, &self.keys) {
            (SchemeKind::Coded, _) => Vec::new(),
            (SchemeKind::Symmetric { group_size, .. }, KeyLengths::Symmetric { groupwise }) => {
                crate::hypergraph::subsets_of_size(self.users, *group_size).map(|g| (g, *groupwise)).collect()
            }
            (SchemeKind::General { hypergraph, .. }, _) => {
                hypergraph.edges().iter().map(|e| (e.clone(), e.len() - 1)).collect()
            }
            _ => unreachable!("kind and key lengths are built together"),
        }
    }

    /// Collusion sets the scheme is meant to withstand, always including the empty set.
    pub fn default_family(&self) -> CollusionFamily {
        let family = match &self.kind {
            SchemeKind::Coded => CollusionFamily::up_to_size(self.users, self.users - 2),
            SchemeKind::Symmetric { max_colluders, .. } => CollusionFamily::up_to_size(self.users, *max_colluders),
            SchemeKind::General { collusion, .. } => Ok(collusion.clone()),
        };
        family.expect("parameters were validated").with_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    #[serde(rename = "K")]
    users: usize,
    q: u64,
    kind: KindRepr,
    #[serde(rename = "L")]
    input_len: usize,
    #[serde(rename = "L_X")]
    message_len: usize,
    keys: KeyLengths,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum KindRepr {
    Coded,
    Symmetric {
        #[serde(rename = "T")]
        max_colluders: usize,
        #[serde(rename = "G")]
        group_size: usize,
        #[serde(rename = "m")]
        multiplier: usize,
    },
    General {
        hypergraph: HypergraphInstance,
    },
}

impl From<SchemeParams> for ParamsRepr {
    fn from(p: SchemeParams) -> Self {
        let kind = match &p.kind {
            SchemeKind::Coded => KindRepr::Coded,
            &SchemeKind::Symmetric { max_colluders, group_size, multiplier } => {
                KindRepr::Symmetric { max_colluders, group_size, multiplier }
            }
            SchemeKind::General { hypergraph, collusion } => {
                KindRepr::General { hypergraph: HypergraphInstance::from_parts(hypergraph, collusion) }
            }
        };
        ParamsRepr {
            users: p.users,
            q: p.field.modulus() as u64,
            kind,
            input_len: p.input_len,
            message_len: p.message_len,
            keys: p.keys,
        }
    }
}

impl TryFrom<ParamsRepr> for SchemeParams {
    type Error = SchemeError;

    fn try_from(r: ParamsRepr) -> Result<Self, Self::Error> {
        let field = FieldSpec::new(r.q)?;
        let rebuilt = match r.kind {
            KindRepr::Coded => SchemeParams::coded(r.users, r.input_len, field)?,
            KindRepr::Symmetric { max_colluders, group_size, multiplier } => {
                SchemeParams::symmetric(r.users, max_colluders, group_size, multiplier, field)?
            }
            KindRepr::General { hypergraph } => {
                let (graph, family) = hypergraph.build()?;
                SchemeParams::general(graph, family, field)?
            }
        };
        if rebuilt.users != r.users
            || rebuilt.input_len != r.input_len
            || rebuilt.message_len != r.message_len
            || rebuilt.keys != r.keys
        {
            return Err(SchemeError::Malformed("declared lengths disagree with the scheme kind".into()));
        }
        Ok(rebuilt)
    }
}

/// Precoding for one key group: `blocks[j]` is applied by the `j`-th member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupKey {
    pub members: UserSet,
    pub key_len: usize,
    pub blocks: Vec<FieldMatrix>,
}

impl GroupKey {
    /// Completes `generators` (one block per member except the last) with the negated
    /// sum for the last member.
    pub fn from_generators(
        field: FieldSpec,
        members: UserSet,
        rows: usize,
        key_len: usize,
        generators: Vec<FieldMatrix>,
    ) -> Result<Self, SchemeError> {
        if members.is_empty() || generators.len() + 1 != members.len() {
            return Err(SchemeError::Malformed(format!(
                "group {members} needs {} generator blocks, got {}",
                members.len().saturating_sub(1),
                generators.len()
            )));
        }
        let mut sum = FieldMatrix::zeros(field, rows, key_len);
        for g in &generators {
            if g.shape() != (rows, key_len) {
                return Err(SchemeError::Malformed(format!(
                    "group {members}: block is {:?}, expected {:?}",
                    g.shape(),
                    (rows, key_len)
                )));
            }
            sum = sum.try_add(g)?;
        }
        let mut blocks = generators;
        blocks.push(sum.neg());
        Ok(Self { members, key_len, blocks })
    }

    pub fn block_for(&self, user: usize) -> Option<&FieldMatrix> {
        self.members.position(user).map(|j| &self.blocks[j])
    }

    pub fn is_zero_sum(&self) -> bool {
        let Some(first) = self.blocks.first() else { return true };
        let mut sum = FieldMatrix::zeros(first.spec(), first.rows(), first.cols());
        for b in &self.blocks {
            match sum.try_add(b) {
                Ok(s) => sum = s,
                Err(_) => return false,
            }
        }
        sum.is_zero()
    }
}

/// A fully materialized scheme: parameters, precoding and its rank certificates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SchemeRepr", try_from = "SchemeRepr")]
pub struct Scheme {
    params: SchemeParams,
    groups: Vec<GroupKey>,
    certificate: Vec<RankCertificate>,
}

#[derive(Serialize, Deserialize)]
struct SchemeRepr {
    params: SchemeParams,
    groups: Vec<GroupKey>,
    certificate: Vec<RankCertificate>,
}

impl From<Scheme> for SchemeRepr {
    fn from(s: Scheme) -> Self {
        SchemeRepr { params: s.params, groups: s.groups, certificate: s.certificate }
    }
}

impl TryFrom<SchemeRepr> for Scheme {
    type Error = SchemeError;

    fn try_from(r: SchemeRepr) -> Result<Self, Self::Error> {
        for c in &r.certificate {
            if c.pass != (c.found == c.required) {
                return Err(SchemeError::Malformed(format!("certificate for T={} is inconsistent", c.collusion)));
            }
        }
        let mut scheme = Scheme::from_parts(r.params, r.groups)?;
        scheme.certificate = r.certificate;
        Ok(scheme)
    }
}

impl Scheme {
    /// Validates group layout, block shapes and the zero-sum property.
    pub fn from_parts(params: SchemeParams, groups: Vec<GroupKey>) -> Result<Self, SchemeError> {
        let layout = params.group_layout();
        if layout.len() != groups.len() {
            return Err(SchemeError::Malformed(format!("expected {} key groups, got {}", layout.len(), groups.len())));
        }
        for ((members, key_len), g) in layout.iter().zip(&groups) {
            if &g.members != members || g.key_len != *key_len || g.blocks.len() != members.len() {
                return Err(SchemeError::Malformed(format!("group {} does not match layout {members}", g.members)));
            }
            for b in &g.blocks {
                if b.spec() != params.field || b.shape() != (params.input_len, *key_len) {
                    return Err(SchemeError::Malformed(format!("group {members}: block has wrong field or shape")));
                }
            }
            if !g.is_zero_sum() {
                return Err(SchemeError::Malformed(format!("group {members}: precoding blocks do not sum to zero")));
            }
        }
        Ok(Self { params, groups, certificate: Vec::new() })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn groups(&self) -> &[GroupKey] {
        &self.groups
    }

    pub fn certificate(&self) -> &[RankCertificate] {
        &self.certificate
    }

    pub fn users(&self) -> usize {
        self.params.users
    }

    pub fn field(&self) -> FieldSpec {
        self.params.field
    }

    /// Computes and attaches rank certificates for every set in `family`.
    pub fn certify(&mut self, family: &CollusionFamily) -> Result<&[RankCertificate], SchemeError> {
        let certs = family
            .sets()
            .par_iter()
            .map(|t| audit::rank_certificate(self, t))
            .collect::<Result<Vec<_>, _>>()?;
        self.certificate = certs;
        Ok(&self.certificate)
    }

    pub fn certified(&self) -> bool {
        self.certificate.iter().all(|c| c.pass)
    }

    /// Derives every user's key (and every group key) from a source-key realization.
    pub fn keys_from_source(&self, source: &FieldVector) -> Result<KeyRealization, SchemeError> {
        let field = self.field();
        if source.spec() != field || source.len() != self.params.source_len() {
            return Err(SchemeError::InvalidParameters(format!(
                "source key must have {} symbols over {field}",
                self.params.source_len()
            )));
        }
        let users = self.users();
        let l = self.params.input_len;
        if !self.params.is_groupwise() {
            let mut per_user: Vec<FieldVector> = (0..users - 1).map(|k| source.slice(k * l, l)).collect();
            let mut last = FieldVector::zeros(field, l);
            for n in &per_user {
                last.add_assign(n)?;
            }
            per_user.push(last.neg());
            return Ok(KeyRealization { source: source.clone(), per_user, per_group: Vec::new() });
        }
        let mut offset = 0;
        let per_group: Vec<FieldVector> = self
            .groups
            .iter()
            .map(|g| {
                let s = source.slice(offset, g.key_len);
                offset += g.key_len;
                s
            })
            .collect();
        let per_user = (1..=users)
            .map(|k| {
                FieldVector::concat(
                    field,
                    self.groups.iter().zip(&per_group).filter(|(g, _)| g.members.contains(k)).map(|(_, s)| s),
                )
            })
            .collect();
        Ok(KeyRealization { source: source.clone(), per_user, per_group })
    }

    pub fn sample_keys(&self, stream: &mut RandomStream) -> KeyRealization {
        let source = FieldVector::sample(self.field(), self.params.source_len(), stream);
        self.keys_from_source(&source).expect("sampled source has the right shape")
    }

    /// All-zero keys, which make every message equal to its input.
    pub fn zero_keys(&self) -> KeyRealization {
        let source = FieldVector::zeros(self.field(), self.params.source_len());
        self.keys_from_source(&source).expect("zero source has the right shape")
    }

    /// `X_k` for 1-based user `user`, computed from `W_k` and `Z_k` only.
    pub fn encode_message(&self, user: usize, input: &FieldVector, keys: &KeyRealization) -> Result<FieldVector, SchemeError> {
        if user == 0 || user > self.users() {
            return Err(SchemeError::InvalidParameters(format!("user {user} outside 1..={}", self.users())));
        }
        let local_key = keys
            .per_user
            .get(user - 1)
            .ok_or_else(|| SchemeError::InvalidParameters("key realization has too few users".into()))?;
        self.encode_local(user, input, local_key)
    }

    /// `X_k = W_k + Z_k` (coded) or `X_k = W_k + Σ_{G ∋ k} H_G^k S_G` where the
    /// `S_G` are read off `local_key` in group order.
    pub fn encode_local(&self, user: usize, input: &FieldVector, local_key: &FieldVector) -> Result<FieldVector, SchemeError> {
        let l = self.params.input_len;
        if input.spec() != self.field() || input.len() != l {
            return Err(LinalgError::Dimension(format!("input of user {user} must have {l} symbols over {}", self.field())).into());
        }
        if !self.params.is_groupwise() {
            return Ok(input.try_add(local_key)?);
        }
        let mut message = input.clone();
        let mut offset = 0;
        for g in &self.groups {
            let Some(block) = g.block_for(user) else { continue };
            if offset + g.key_len > local_key.len() {
                return Err(LinalgError::Dimension(format!("key of user {user} is too short")).into());
            }
            let s = local_key.slice(offset, g.key_len);
            offset += g.key_len;
            message.add_assign(&block.mat_vec(&s)?)?;
        }
        if offset != local_key.len() {
            return Err(LinalgError::Dimension(format!("key of user {user} is too long")).into());
        }
        Ok(message)
    }

    pub fn encode_all(&self, inputs: &[FieldVector], keys: &KeyRealization) -> Result<Vec<FieldVector>, SchemeError> {
        if inputs.len() != self.users() {
            return Err(SchemeError::InvalidParameters(format!("{} inputs for {} users", inputs.len(), self.users())));
        }
        inputs.iter().enumerate().map(|(i, w)| self.encode_message(i + 1, w, keys)).collect()
    }
}

/// One draw of all key material.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KeyRealization {
    /// `Z_Σ`: the symbols every other key is a function of.
    pub source: FieldVector,
    /// `Z_k` for users `1..=K`.
    pub per_user: Vec<FieldVector>,
    /// `S_G` per key group (groupwise regimes only).
    pub per_group: Vec<FieldVector>,
}

/// The server's decoder: `X_1 + ... + X_K`.
pub fn decode_sum(messages: &[FieldVector]) -> Result<FieldVector, SchemeError> {
    let first = messages.first().ok_or_else(|| SchemeError::InvalidParameters("no messages to decode".into()))?;
    let mut sum = FieldVector::zeros(first.spec(), first.len());
    for m in messages {
        sum.add_assign(m)?;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    #[test]
    fn coded_params_meet_rates_with_equality() {
        let p = SchemeParams::coded(4, 2, f(7)).unwrap();
        assert_eq!(p.message_len(), 2);
        assert_eq!(p.keys(), &KeyLengths::Coded { individual: 2, source: 6 });
        assert_eq!(p.source_len(), 6);
        assert!(SchemeParams::coded(1, 1, f(7)).is_err());
        assert!(SchemeParams::coded(3, 0, f(7)).is_err());
    }

    #[test]
    fn symmetric_params_block_shape() {
        let p = SchemeParams::symmetric(5, 2, 2, 1, f(5)).unwrap();
        assert_eq!((p.input_len(), p.keys()), (3, &KeyLengths::Symmetric { groupwise: 2 }));
        assert_eq!(p.source_len(), 20);
        let p = SchemeParams::symmetric(3, 0, 2, 2, f(251)).unwrap();
        assert_eq!((p.input_len(), p.keys()), (6, &KeyLengths::Symmetric { groupwise: 4 }));
        assert!(matches!(SchemeParams::symmetric(4, 2, 3, 1, f(5)), Err(SchemeError::Infeasible { .. })));
        assert!(matches!(SchemeParams::symmetric(4, 0, 2, 0, f(5)), Err(SchemeError::InvalidParameters(_))));
        assert!(matches!(SchemeParams::symmetric(4, 3, 1, 1, f(5)), Err(SchemeError::InvalidParameters(_))));
    }

    #[test]
    fn decode_rejects_ragged_or_empty() {
        assert!(decode_sum(&[]).is_err());
        let a = FieldVector::zeros(f(5), 2);
        let b = FieldVector::zeros(f(5), 3);
        assert!(decode_sum(&[a, b]).is_err());
    }

    #[test]
    fn group_key_completion() {
        let spec = f(7);
        let g1 = FieldMatrix::from_rows(spec, &[vec![1, 2]]).unwrap();
        let g2 = FieldMatrix::from_rows(spec, &[vec![3, 3]]).unwrap();
        let key = GroupKey::from_generators(spec, [1, 2, 3].into(), 1, 2, vec![g1, g2]).unwrap();
        assert_eq!(key.blocks[2], FieldMatrix::from_rows(spec, &[vec![-4, -5]]).unwrap());
        assert!(key.is_zero_sum());
        assert!(GroupKey::from_generators(spec, [1, 2].into(), 1, 2, vec![]).is_err());
    }

    #[test]
    fn params_json_round_trip() {
        let p = SchemeParams::symmetric(5, 2, 2, 1, f(5)).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"K":5,"q":5,"kind":{"type":"symmetric","T":2,"G":2,"m":1},"L":3,"L_X":3,"keys":{"L_S":2}}"#);
        assert_eq!(serde_json::from_str::<SchemeParams>(&json).unwrap(), p);
        let tampered = json.replace(r#""L":3"#, r#""L":4"#);
        assert!(serde_json::from_str::<SchemeParams>(&tampered).is_err());

        let c = SchemeParams::coded(3, 1, f(3)).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, r#"{"K":3,"q":3,"kind":{"type":"coded"},"L":1,"L_X":1,"keys":{"L_Z":1,"L_ZSigma":2}}"#);
        assert_eq!(serde_json::from_str::<SchemeParams>(&json).unwrap(), c);
    }
}
