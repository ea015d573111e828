use super::{GroupKey, Scheme, SchemeError, SchemeKind, SchemeParams};
use crate::field::FieldSpec;
use crate::hypergraph::UserSet;
use crate::linalg::FieldMatrix;
use crate::stream::RandomStream;

pub const DEFAULT_MAX_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymmetricRequest {
    pub users: usize,
    pub max_colluders: usize,
    pub group_size: usize,
    pub multiplier: usize,
    pub max_attempts: usize,
}

impl SymmetricRequest {
    pub fn new(users: usize, max_colluders: usize, group_size: usize) -> Self {
        Self { users, max_colluders, group_size, multiplier: 1, max_attempts: DEFAULT_MAX_ATTEMPTS }
    }

    pub fn params(&self, field: FieldSpec) -> Result<SchemeParams, SchemeError> {
        SchemeParams::symmetric(self.users, self.max_colluders, self.group_size, self.multiplier, field)
    }
}

/// One uncertified draw: in each group the `G - 1` smallest members get uniform
/// `L x L_S` blocks and the largest member gets their negated sum.
pub fn draw_symmetric(params: &SchemeParams, stream: &mut RandomStream) -> Result<Scheme, SchemeError> {
    if !matches!(params.kind(), SchemeKind::Symmetric { .. }) {
        return Err(SchemeError::InvalidParameters("expected symmetric groupwise parameters".into()));
    }
    let field = params.field();
    let rows = params.input_len();
    let groups = params
        .group_layout()
        .into_iter()
        .map(|(members, key_len)| {
            let generators = (1..members.len()).map(|_| FieldMatrix::sample(field, rows, key_len, stream)).collect();
            GroupKey::from_generators(field, members, rows, key_len, generators)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Scheme::from_parts(params.clone(), groups)
}

/// Sample-and-verify: redraws every block until all rank certificates for
/// `|T| <= T` (empty set included) pass, giving up after `max_attempts`.
pub fn symmetric_keygen(request: SymmetricRequest, field: FieldSpec, stream: &RandomStream) -> Result<Scheme, SchemeError> {
    let params = request.params(field)?;
    let family = params.default_family();
    let mut failing = UserSet::empty();
    for attempt in 0..request.max_attempts {
        let mut draw_stream = stream.split("symmetric-precoding", attempt as u64);
        let mut scheme = draw_symmetric(&params, &mut draw_stream)?;
        scheme.certify(&family)?;
        match scheme.certificate().iter().find(|c| !c.pass) {
            None => return Ok(scheme),
            Some(c) => failing = c.collusion.clone(),
        }
    }
    Err(SchemeError::CertificateNotFound { attempts: request.max_attempts, failing })
}

/// Builds a symmetric scheme from externally supplied blocks: `generators[i]` holds
/// the blocks of all but the largest member of the `i`-th group (lexicographic
/// order). Certificates are attached but not required to pass.
pub fn symmetric_from_generators(params: SchemeParams, generators: Vec<Vec<FieldMatrix>>) -> Result<Scheme, SchemeError> {
    if !matches!(params.kind(), SchemeKind::Symmetric { .. }) {
        return Err(SchemeError::InvalidParameters("expected symmetric groupwise parameters".into()));
    }
    let layout = params.group_layout();
    if layout.len() != generators.len() {
        return Err(SchemeError::Malformed(format!("expected blocks for {} groups, got {}", layout.len(), generators.len())));
    }
    let field = params.field();
    let rows = params.input_len();
    let groups = layout
        .into_iter()
        .zip(generators)
        .map(|((members, key_len), gens)| GroupKey::from_generators(field, members, rows, key_len, gens))
        .collect::<Result<Vec<_>, _>>()?;
    let family = params.default_family();
    let mut scheme = Scheme::from_parts(params, groups)?;
    scheme.certify(&family)?;
    Ok(scheme)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::FieldVector;
    use crate::schemes::decode_sum;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    #[test]
    fn three_users_pairwise_keys() {
        let s = RandomStream::new(7);
        let scheme = symmetric_keygen(SymmetricRequest::new(3, 0, 2), f(251), &s).unwrap();
        assert_eq!(scheme.params().input_len(), 3);
        assert_eq!(scheme.groups().len(), 3);
        assert!(scheme.certified());
        assert_eq!(scheme.certificate().len(), 1);
        for g in scheme.groups() {
            assert_eq!(g.blocks[0].shape(), (3, 2));
            assert!(g.is_zero_sum());
        }
    }

    #[test]
    fn keygen_is_deterministic_per_seed() {
        let a = symmetric_keygen(SymmetricRequest::new(4, 1, 2), f(251), &RandomStream::new(5)).unwrap();
        let b = symmetric_keygen(SymmetricRequest::new(4, 1, 2), f(251), &RandomStream::new(5)).unwrap();
        let c = symmetric_keygen(SymmetricRequest::new(4, 1, 2), f(251), &RandomStream::new(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn infeasible_group_size_is_rejected() {
        let err = symmetric_keygen(SymmetricRequest::new(4, 2, 3), f(251), &RandomStream::new(1)).unwrap_err();
        assert!(matches!(err, SchemeError::Infeasible { .. }));
    }

    #[test]
    fn tiny_field_exhausts_attempts() {
        // over F_2 with one attempt, the all-zero-block outcomes make failure likely but
        // not certain; zero attempts always reports exhaustion
        let mut req = SymmetricRequest::new(3, 0, 2);
        req.max_attempts = 0;
        let err = symmetric_keygen(req, f(2), &RandomStream::new(1)).unwrap_err();
        assert!(matches!(err, SchemeError::CertificateNotFound { attempts: 0, .. }));
        assert!(err.to_string().contains("larger field"));
    }

    #[test]
    fn zero_generators_fail_certificates() {
        let p = SchemeParams::symmetric(3, 0, 2, 1, f(5)).unwrap();
        let zero = FieldMatrix::zeros(f(5), 3, 2);
        let scheme = symmetric_from_generators(p, vec![vec![zero.clone()], vec![zero.clone()], vec![zero]]).unwrap();
        assert!(!scheme.certified());
        assert_eq!(scheme.certificate()[0].found, 0);
    }

    #[test]
    fn group_keys_concatenate_into_user_keys() {
        let scheme = symmetric_keygen(SymmetricRequest::new(3, 0, 2), f(251), &RandomStream::new(2)).unwrap();
        let keys = scheme.sample_keys(&mut RandomStream::new(3));
        // user 2 is in {1,2} and {2,3}
        let expect = FieldVector::concat(f(251), [&keys.per_group[0], &keys.per_group[2]]);
        assert_eq!(keys.per_user[1], expect);
        let inputs: Vec<_> = (0..3).map(|k| FieldVector::from_values(f(251), &[k, 2 * k, 3 * k])).collect();
        let x = scheme.encode_all(&inputs, &keys).unwrap();
        assert_eq!(decode_sum(&x).unwrap().values(), &[3, 6, 9]);
    }
}
