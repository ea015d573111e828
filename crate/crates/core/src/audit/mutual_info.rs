use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::check_collusion;
use super::{AuditError, Rational};
use crate::field::FieldSpec;
use crate::hypergraph::UserSet;
use crate::linalg::FieldVector;
use crate::schemes::Scheme;

pub const DEFAULT_MI_LIMIT: u64 = 1 << 24;

const CHUNK: u64 = 1 << 12;

/// Mutual information in q-ary units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MiValue {
    Exact {
        #[serde(with = "super::rational_str")]
        value: Rational,
    },
    /// Used only when some probability is not a power of `1/q`.
    Approximate { value: f64, abs_error: f64 },
}

impl MiValue {
    /// Only an exact zero counts; an approximate value never certifies security.
    pub fn is_zero(&self) -> bool {
        matches!(self, MiValue::Exact { value } if *value == Rational::from_integer(0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MutualInformation {
    pub value: MiValue,
    pub state_space: u64,
}

/// `q^n` if it fits under `limit`.
pub fn state_space(field: FieldSpec, symbols: usize, limit: u64) -> Result<u64, AuditError> {
    let too_large = || AuditError::StateSpaceTooLarge { states: format!("{}^{symbols}", field.modulus()), limit };
    let states = u32::try_from(symbols)
        .ok()
        .and_then(|n| (field.modulus() as u64).checked_pow(n))
        .ok_or_else(too_large)?;
    if states > limit {
        return Err(too_large());
    }
    Ok(states)
}

/// `I((W_k)_k ; (X_k)_k | ΣW, (W_k, Z_k)_{k∈T})` by enumerating every input and
/// source-key realization once.
///
/// Counts are exact; every entropy term is `Σ c (n - log_q c) / q^n` when each
/// count is a power of `q` (always the case for linear schemes, whose fibers are
/// cosets), giving an exact rational.
pub fn mi_bruteforce(scheme: &Scheme, collusion: &UserSet, limit: u64) -> Result<MutualInformation, AuditError> {
    let users = scheme.users();
    check_collusion(users, collusion)?;
    let field = scheme.field();
    let params = scheme.params();
    let l = params.input_len();
    let inputs_len = users * l;
    let symbols = inputs_len + params.source_len();
    let states = state_space(field, symbols, limit)?;

    let key_len: usize = collusion.iter().map(|k| per_user_key_len(scheme, k)).sum();
    let c_len = l + collusion.len() * l + key_len;
    let b_len = users * params.message_len();
    let bits = 32 - (field.modulus() - 1).leading_zeros() as usize;
    let widest = (inputs_len + b_len + c_len) * bits.max(1);
    let ctx = Ctx { scheme, collusion, symbols, inputs_len };
    let (total, q) = (symbols as u32, field.modulus() as u64);
    let value = if widest <= 128 {
        ctx.count(states, |parts| pack_bits(bits, parts))?.mutual_information(states, total, q)
    } else {
        ctx.count(states, |parts| parts.concat())?.mutual_information(states, total, q)
    };
    Ok(MutualInformation { value, state_space: states })
}

fn per_user_key_len(scheme: &Scheme, user: usize) -> usize {
    if scheme.params().is_groupwise() {
        scheme.groups().iter().filter(|g| g.members.contains(user)).map(|g| g.key_len).sum()
    } else {
        scheme.params().input_len()
    }
}

fn pack_bits(bits: usize, parts: &[&[u32]]) -> u128 {
    let mut key = 0u128;
    for &d in parts.iter().flat_map(|p| p.iter()) {
        key = (key << bits) | d as u128;
    }
    key
}

struct Ctx<'a> {
    scheme: &'a Scheme,
    collusion: &'a UserSet,
    symbols: usize,
    inputs_len: usize,
}

/// Joint counts for `(A,C)`, `(B,C)`, `(A,B,C)` and `C`.
struct Tables<K> {
    ac: HashMap<K, u64>,
    bc: HashMap<K, u64>,
    abc: HashMap<K, u64>,
    c: HashMap<K, u64>,
}

impl<K: Hash + Eq> Tables<K> {
    fn new() -> Self {
        Self { ac: HashMap::new(), bc: HashMap::new(), abc: HashMap::new(), c: HashMap::new() }
    }

    fn merge(mut self, other: Self) -> Self {
        for (mine, theirs) in [(&mut self.ac, other.ac), (&mut self.bc, other.bc), (&mut self.abc, other.abc), (&mut self.c, other.c)] {
            for (k, n) in theirs {
                *mine.entry(k).or_insert(0) += n;
            }
        }
        self
    }

    fn mutual_information(&self, total: u64, log_total: u32, q: u64) -> MiValue {
        let terms = [entropy(&self.ac, total, log_total, q), entropy(&self.bc, total, log_total, q)];
        let minus = [entropy(&self.abc, total, log_total, q), entropy(&self.c, total, log_total, q)];
        match (&terms, &minus) {
            ([Entropy::Exact(a), Entropy::Exact(b)], [Entropy::Exact(c), Entropy::Exact(d)]) => {
                MiValue::Exact { value: a + b - c - d }
            }
            _ => {
                let float = |e: &Entropy| match e {
                    Entropy::Exact(r) => (*r.numer() as f64 / *r.denom() as f64, 0.0),
                    Entropy::Float(v, err) => (*v, *err),
                };
                let (a, ea) = float(&terms[0]);
                let (b, eb) = float(&terms[1]);
                let (c, ec) = float(&minus[0]);
                let (d, ed) = float(&minus[1]);
                MiValue::Approximate { value: a + b - c - d, abs_error: ea + eb + ec + ed }
            }
        }
    }
}

enum Entropy {
    Exact(Rational),
    Float(f64, f64),
}

fn log_exact(mut c: u64, q: u64) -> Option<u32> {
    let mut e = 0;
    while c > 1 {
        if !c.is_multiple_of(q) {
            return None;
        }
        c /= q;
        e += 1;
    }
    Some(e)
}

fn entropy<K>(counts: &HashMap<K, u64>, total: u64, log_total: u32, q: u64) -> Entropy {
    let exps: Option<Vec<(u64, u32)>> = counts.values().map(|&c| log_exact(c, q).map(|e| (c, e))).collect();
    match exps {
        Some(exps) => {
            let numer: i128 = exps.iter().map(|&(c, e)| c as i128 * (log_total - e) as i128).sum();
            Entropy::Exact(Rational::new(numer, total as i128))
        }
        None => {
            let ln_q = (q as f64).ln();
            let ln_total = (total as f64).ln();
            let value: f64 = counts.values().map(|&c| c as f64 / total as f64 * (ln_total - (c as f64).ln()) / ln_q).sum();
            // each term carries a few ulps of relative error on a magnitude of at most log_q(total)
            let abs_error = 8.0 * f64::EPSILON * (counts.len() as f64 + 1.0) * (log_total as f64 + 1.0);
            Entropy::Float(value, abs_error)
        }
    }
}

impl Ctx<'_> {
    fn count<K, P>(&self, states: u64, pack: P) -> Result<Tables<K>, AuditError>
    where
        K: Hash + Eq + Send,
        P: Fn(&[&[u32]]) -> K + Sync,
    {
        let chunks = states.div_ceil(CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut tables = Tables::new();
                let start = chunk * CHUNK;
                for state in start..(start + CHUNK).min(states) {
                    self.observe(state, &pack, &mut tables)?;
                }
                Ok(tables)
            })
            .try_reduce(Tables::new, |a, b| Ok(a.merge(b)))
    }

    fn observe<K, P>(&self, state: u64, pack: &P, tables: &mut Tables<K>) -> Result<(), AuditError>
    where
        K: Hash + Eq,
        P: Fn(&[&[u32]]) -> K,
    {
        let scheme = self.scheme;
        let field = scheme.field();
        let q = field.modulus() as u64;
        let l = scheme.params().input_len();
        let mut digits = Vec::with_capacity(self.symbols);
        let mut rest = state;
        for _ in 0..self.symbols {
            digits.push((rest % q) as u32);
            rest /= q;
        }
        let (w_digits, source_digits) = digits.split_at(self.inputs_len);
        let inputs: Vec<FieldVector> = w_digits.chunks(l.max(1)).map(|c| FieldVector::from_raw(field, c.to_vec())).collect();
        let keys = scheme
            .keys_from_source(&FieldVector::from_raw(field, source_digits.to_vec()))
            .map_err(|e| AuditError::Encoding(e.to_string()))?;
        let messages = scheme.encode_all(&inputs, &keys).map_err(|e| AuditError::Encoding(e.to_string()))?;

        let mut c = crate::schemes::decode_sum(&inputs).map_err(|e| AuditError::Encoding(e.to_string()))?.values().to_vec();
        for k in self.collusion.iter() {
            c.extend_from_slice(inputs[k - 1].values());
            c.extend_from_slice(keys.per_user[k - 1].values());
        }
        let b: Vec<u32> = messages.iter().flat_map(|m| m.values().iter().copied()).collect();
        let a = w_digits;

        *tables.c.entry(pack(&[&c])).or_insert(0) += 1;
        *tables.ac.entry(pack(&[a, &c])).or_insert(0) += 1;
        *tables.bc.entry(pack(&[&b, &c])).or_insert(0) += 1;
        *tables.abc.entry(pack(&[a, &b, &c])).or_insert(0) += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::{CollusionFamily, KeyHypergraph};
    use crate::schemes::{general_keygen, Scheme, SchemeParams};

    fn f(q: u64) -> FieldSpec {
        FieldSpec::new(q).unwrap()
    }

    fn exact(scheme: &Scheme, t: UserSet) -> Rational {
        match mi_bruteforce(scheme, &t, DEFAULT_MI_LIMIT).unwrap().value {
            MiValue::Exact { value } => value,
            other => panic!("expected an exact value, got {other:?}"),
        }
    }

    #[test]
    fn coded_three_users_leak_nothing() {
        let scheme = Scheme::from_parts(SchemeParams::coded(3, 1, f(2)).unwrap(), vec![]).unwrap();
        let mi = mi_bruteforce(&scheme, &UserSet::empty(), DEFAULT_MI_LIMIT).unwrap();
        assert_eq!(mi.state_space, 32);
        assert!(mi.value.is_zero());
        assert_eq!(exact(&scheme, [2].into()), Rational::from_integer(0));
    }

    #[test]
    fn keyless_two_users_leak_one_unit() {
        let g = KeyHypergraph::new(2, vec![]).unwrap();
        let scheme = general_keygen(g, CollusionFamily::new(2, vec![]).unwrap(), f(2)).unwrap();
        assert_eq!(exact(&scheme, UserSet::empty()), Rational::from_integer(1));
        let g = KeyHypergraph::new(2, vec![]).unwrap();
        let scheme = general_keygen(g, CollusionFamily::new(2, vec![]).unwrap(), f(3)).unwrap();
        assert_eq!(exact(&scheme, UserSet::empty()), Rational::from_integer(1));
    }

    #[test]
    fn three_edge_general_scheme() {
        let g = KeyHypergraph::new(4, vec![[1, 2, 4].into(), [2, 3].into(), [3, 4].into()]).unwrap();
        let scheme = general_keygen(g, CollusionFamily::new(4, vec![]).unwrap(), f(2)).unwrap();
        assert_eq!(exact(&scheme, UserSet::empty()), Rational::from_integer(0));
        assert_eq!(exact(&scheme, [3].into()), Rational::from_integer(0));
        // removing user 4 isolates user 1, whose input is then exposed
        assert_eq!(exact(&scheme, [4].into()), Rational::from_integer(1));
    }

    #[test]
    fn limit_is_enforced() {
        let scheme = Scheme::from_parts(SchemeParams::coded(3, 1, f(3)).unwrap(), vec![]).unwrap();
        assert!(mi_bruteforce(&scheme, &UserSet::empty(), 243).is_ok());
        let err = mi_bruteforce(&scheme, &UserSet::empty(), 242).unwrap_err();
        assert_eq!(err.to_string(), "state space 3^5 exceeds the limit of 242 joint states");
    }

    #[test]
    fn exact_entropy_of_uniform_counts() {
        let counts: HashMap<u8, u64> = [(0, 4), (1, 2), (2, 2)].into_iter().collect();
        // probabilities 1/2, 1/4, 1/4 in bits: 3/2
        match entropy(&counts, 8, 3, 2) {
            Entropy::Exact(h) => assert_eq!(h, Rational::new(3, 2)),
            Entropy::Float(..) => panic!("expected exact"),
        }
        let counts: HashMap<u8, u64> = [(0, 1), (1, 2)].into_iter().collect();
        match entropy(&counts, 3, 1, 3) {
            Entropy::Float(h, err) => {
                let expect = (1.0 / 3.0) * 3f64.log(3.0) + (2.0 / 3.0) * 1.5f64.log(3.0);
                assert!((h - expect).abs() <= err.max(1e-12));
            }
            Entropy::Exact(_) => panic!("3 is not a power of 3 with count 2"),
        }
    }
}
