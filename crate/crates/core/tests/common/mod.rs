#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::PathBuf;

use securesum::audit::{mi_bruteforce, MiValue, Rational};
use securesum::harness::{read_json, FixtureFile};
use securesum::hypergraph::{CollusionFamily, KeyHypergraph, UserSet};
use securesum::linalg::FieldMatrix;
use securesum::schemes::{general_keygen, GroupKey, Scheme};
use securesum::{FieldSpec, RandomStream};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn field(q: u64) -> FieldSpec {
    FieldSpec::new(q).unwrap()
}

/// The K=5, T=2, G=2 scheme over F_5 built from the published blocks.
pub fn q5_fixture_scheme() -> Scheme {
    let path = fixture("k5_t2_g2_q5.json");
    let file: FixtureFile = read_json(&path).unwrap();
    file.build(&path).unwrap()
}

pub fn three_edge() -> KeyHypergraph {
    KeyHypergraph::new(4, vec![[1, 2, 4].into(), [2, 3].into(), [3, 4].into()]).unwrap()
}

/// `X_k = W_k`: a general scheme with no keys at all.
pub fn keyless(users: usize, q: u64) -> Scheme {
    let g = KeyHypergraph::new(users, vec![]).unwrap();
    general_keygen(g, CollusionFamily::new(users, vec![]).unwrap(), field(q)).unwrap()
}

pub fn exact_mi(scheme: &Scheme, t: &UserSet, limit: u64) -> Rational {
    match mi_bruteforce(scheme, t, limit).unwrap().value {
        MiValue::Exact { value } => value,
        other => panic!("T={t}: expected an exact value, got {other:?}"),
    }
}

/// Connectivity by BFS on the bipartite user/edge incidence graph.
pub fn bfs_connected(users: usize, edges: &[UserSet]) -> bool {
    let n = users + edges.len();
    let mut adj = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        for u in e.iter() {
            adj[u - 1].push(users + i);
            adj[users + i].push(u - 1);
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    seen[..users].iter().all(|&s| s)
}

pub fn random_set(users: usize, max_len: usize, stream: &mut RandomStream) -> UserSet {
    let len = 1 + stream.below(max_len as u64) as usize;
    (0..len).map(|_| 1 + stream.below(users as u64) as usize).collect()
}

pub fn random_hypergraph(users: usize, stream: &mut RandomStream) -> KeyHypergraph {
    let edges = (0..stream.below(2 * users as u64 + 1)).map(|_| random_set(users, users, stream)).collect();
    KeyHypergraph::new(users, edges).unwrap()
}

/// Up to three random colluding sets of size `<= K - 2` (the empty set may appear).
pub fn random_family(users: usize, stream: &mut RandomStream) -> CollusionFamily {
    let sets = (0..1 + stream.below(3))
        .map(|_| {
            let len = stream.below(users as u64 - 1) as usize;
            (0..len).map(|_| 1 + stream.below(users as u64) as usize).collect::<UserSet>()
        })
        .filter(|s: &UserSet| s.len() + 2 <= users)
        .collect();
    CollusionFamily::new(users, sets).unwrap()
}

/// Zeroes the block of member `member` of group `group` and re-balances the
/// group's last block so the blocks still sum to zero. With two members both
/// blocks become zero.
pub fn corrupt(scheme: &Scheme, group: usize, member: usize) -> Scheme {
    let mut groups: Vec<GroupKey> = scheme.groups().to_vec();
    let g = &mut groups[group];
    let last = g.blocks.len() - 1;
    assert!(member < last, "corrupt a member other than the balancing one");
    let (rows, cols) = g.blocks[member].shape();
    g.blocks[member] = FieldMatrix::zeros(scheme.field(), rows, cols);
    let mut sum = FieldMatrix::zeros(scheme.field(), rows, cols);
    for b in &g.blocks[..last] {
        sum = sum.try_add(b).unwrap();
    }
    g.blocks[last] = sum.neg();
    Scheme::from_parts(scheme.params().clone(), groups).unwrap()
}
