use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::Schema;
use crate::hypergraph::HypergraphInstance;

fn one() -> usize {
    1
}

/// Which scheme to build.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SchemeSpec {
    Coded {
        #[serde(rename = "K")]
        users: usize,
        #[serde(rename = "L", default = "one")]
        input_len: usize,
    },
    Symmetric {
        #[serde(rename = "K")]
        users: usize,
        #[serde(rename = "T")]
        max_colluders: usize,
        #[serde(rename = "G")]
        group_size: usize,
        #[serde(rename = "m", default = "one")]
        multiplier: usize,
    },
    General {
        #[serde(flatten)]
        hypergraph: HypergraphInstance,
    },
}

/// `keygen --config` input.
///
/// ```json
/// {"schema": 1, "scheme": {"type": "symmetric", "K": 3, "T": 0, "G": 2}, "q": 251, "seed": 7}
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub schema: Schema,
    pub scheme: SchemeSpec,
    pub q: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_attempts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mi_limit: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_kinds() {
        let c: InstanceConfig =
            serde_json::from_str(r#"{"schema":1,"scheme":{"type":"symmetric","K":3,"T":0,"G":2},"q":251,"seed":7}"#)
                .unwrap();
        assert_eq!(c.scheme, SchemeSpec::Symmetric { users: 3, max_colluders: 0, group_size: 2, multiplier: 1 });
        assert_eq!(c.seed, Some(7));
        let c: InstanceConfig = serde_json::from_str(r#"{"schema":1,"scheme":{"type":"coded","K":4},"q":5}"#).unwrap();
        assert_eq!(c.scheme, SchemeSpec::Coded { users: 4, input_len: 1 });
        let c: InstanceConfig = serde_json::from_str(
            r#"{"schema":1,"scheme":{"type":"general","K":4,"edges":[[1,2,4],[2,3],[3,4]],"collusion":[[3]]},"q":2}"#,
        )
        .unwrap();
        let SchemeSpec::General { hypergraph } = c.scheme else { panic!() };
        assert_eq!(hypergraph.edges.len(), 3);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(serde_json::from_str::<InstanceConfig>(r#"{"scheme":{"type":"coded","K":4},"q":5}"#).is_err());
        assert!(serde_json::from_str::<InstanceConfig>(r#"{"schema":2,"scheme":{"type":"coded","K":4},"q":5}"#).is_err());
        assert!(serde_json::from_str::<InstanceConfig>(r#"{"schema":1,"scheme":{"type":"coded","K":4},"q":5,"x":1}"#).is_err());
    }
}
