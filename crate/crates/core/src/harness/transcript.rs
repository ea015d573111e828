use serde::{Deserialize, Serialize};

use super::{HarnessError, Schema};
use crate::linalg::FieldVector;
use crate::schemes::{decode_sum, KeyRealization, Scheme, SchemeParams};
use crate::stream::RandomStream;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeysRecord {
    pub source: Vec<u32>,
    pub per_user: Vec<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_group: Vec<Vec<u32>>,
}

impl From<&KeyRealization> for KeysRecord {
    fn from(k: &KeyRealization) -> Self {
        KeysRecord {
            source: k.source.values().to_vec(),
            per_user: k.per_user.iter().map(|z| z.values().to_vec()).collect(),
            per_group: k.per_group.iter().map(|s| s.values().to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSummary {
    pub decoded_matches: bool,
    /// Every rank certificate stored with the scheme passed.
    pub scheme_certified: bool,
    pub certificates: usize,
}

/// One run of the protocol. Loading re-checks that the decoded sum equals both
/// the sum of the inputs and the sum of the messages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "TranscriptRepr")]
pub struct Transcript {
    pub schema: Schema,
    pub seed: u64,
    pub params: SchemeParams,
    pub random_inputs: bool,
    /// `None` when written with `--redact-keys`.
    pub keys: Option<KeysRecord>,
    pub inputs: Vec<Vec<u32>>,
    pub messages: Vec<Vec<u32>>,
    pub decoded_sum: Vec<u32>,
    pub summary: RunSummary,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TranscriptRepr {
    schema: Schema,
    seed: u64,
    params: SchemeParams,
    random_inputs: bool,
    keys: Option<KeysRecord>,
    inputs: Vec<Vec<u32>>,
    messages: Vec<Vec<u32>>,
    decoded_sum: Vec<u32>,
    summary: RunSummary,
}

impl TryFrom<TranscriptRepr> for Transcript {
    type Error = String;

    fn try_from(r: TranscriptRepr) -> Result<Self, String> {
        let field = r.params.field();
        let users = r.params.users();
        let vectors = |name: &str, rows: &[Vec<u32>], len: usize| -> Result<Vec<FieldVector>, String> {
            if rows.len() != users {
                return Err(format!("{name}: {} entries for {users} users", rows.len()));
            }
            rows.iter()
                .map(|row| {
                    if row.len() != len {
                        return Err(format!("{name}: expected {len} symbols per user"));
                    }
                    let wide: Vec<u64> = row.iter().map(|&v| v as u64).collect();
                    FieldVector::from_canonical(field, &wide).map_err(|e| format!("{name}: {e}"))
                })
                .collect()
        };
        let inputs = vectors("inputs", &r.inputs, r.params.input_len())?;
        let messages = vectors("messages", &r.messages, r.params.message_len())?;
        let sum_w = decode_sum(&inputs).map_err(|e| e.to_string())?;
        let sum_x = decode_sum(&messages).map_err(|e| e.to_string())?;
        if r.decoded_sum != sum_x.values() {
            return Err("decoded_sum is not the sum of the messages".into());
        }
        if r.decoded_sum != sum_w.values() {
            return Err("decoded_sum is not the sum of the inputs".into());
        }
        if !r.summary.decoded_matches {
            return Err("summary disagrees with the recomputed sums".into());
        }
        if let Some(keys) = &r.keys {
            if keys.per_user.len() != users || keys.source.len() != r.params.source_len() {
                return Err("key record does not match the scheme parameters".into());
            }
        }
        Ok(Transcript {
            schema: r.schema,
            seed: r.seed,
            params: r.params,
            random_inputs: r.random_inputs,
            keys: r.keys,
            inputs: r.inputs,
            messages: r.messages,
            decoded_sum: r.decoded_sum,
            summary: r.summary,
        })
    }
}

/// Runs the protocol once: inputs (given, or drawn from the `"inputs"` sub-stream),
/// keys from the `"keys"` sub-stream, one message per user, and the server's sum.
pub fn run_protocol(
    scheme: &Scheme,
    inputs: Option<Vec<FieldVector>>,
    seed: u64,
    redact_keys: bool,
) -> Result<Transcript, HarnessError> {
    let root = RandomStream::new(seed);
    let random_inputs = inputs.is_none();
    let inputs = match inputs {
        Some(w) => w,
        None => {
            let mut s = root.split("inputs", 0);
            (0..scheme.users()).map(|_| FieldVector::sample(scheme.field(), scheme.params().input_len(), &mut s)).collect()
        }
    };
    let keys = scheme.sample_keys(&mut root.split("keys", 0));
    let messages = scheme.encode_all(&inputs, &keys)?;
    let decoded = decode_sum(&messages)?;
    let expected = decode_sum(&inputs)?;
    let rows = |vs: &[FieldVector]| vs.iter().map(|v| v.values().to_vec()).collect::<Vec<_>>();
    Ok(Transcript {
        schema: Schema,
        seed,
        params: scheme.params().clone(),
        random_inputs,
        keys: (!redact_keys).then(|| KeysRecord::from(&keys)),
        inputs: rows(&inputs),
        messages: rows(&messages),
        decoded_sum: decoded.values().to_vec(),
        summary: RunSummary {
            decoded_matches: decoded == expected,
            scheme_certified: scheme.certified(),
            certificates: scheme.certificate().len(),
        },
    })
}
