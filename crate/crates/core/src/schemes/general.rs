use super::{GroupKey, Scheme, SchemeError, SchemeParams};
use crate::field::FieldSpec;
use crate::hypergraph::{CollusionFamily, KeyHypergraph};
use crate::linalg::FieldMatrix;

/// Deterministic scalar construction: on edge `{u_1 < ... < u_g}` member `u_j`
/// gets the `j`-th unit row of length `g - 1` for `j < g`, and `u_g` gets the all
/// `-1` row. Rank certificates are attached for `collusion` plus the empty set.
pub fn general_keygen(
    hypergraph: KeyHypergraph,
    collusion: CollusionFamily,
    field: FieldSpec,
) -> Result<Scheme, SchemeError> {
    let family = collusion.with_empty();
    let params = SchemeParams::general(hypergraph, collusion, field)?;
    let groups = params
        .group_layout()
        .into_iter()
        .map(|(members, key_len)| {
            let generators = (0..key_len)
                .map(|j| {
                    let mut row = FieldMatrix::zeros(field, 1, key_len);
                    row.set(0, j, field.one()).expect("in range");
                    row
                })
                .collect();
            GroupKey::from_generators(field, members, 1, key_len, generators)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut scheme = Scheme::from_parts(params, groups)?;
    scheme.certify(&family)?;
    Ok(scheme)
}
