use super::{KeyRealization, Scheme, SchemeError, SchemeParams};
use crate::field::FieldSpec;
use crate::stream::RandomStream;

/// Draws `N_1..N_{K-1}` uniformly and sets `Z_K = -(N_1 + ... + N_{K-1})`.
pub fn coded_keygen(
    users: usize,
    input_len: usize,
    field: FieldSpec,
    stream: &mut RandomStream,
) -> Result<(Scheme, KeyRealization), SchemeError> {
    let params = SchemeParams::coded(users, input_len, field)?;
    let scheme = Scheme::from_parts(params, Vec::new())?;
    let keys = scheme.sample_keys(stream);
    Ok((scheme, keys))
}
