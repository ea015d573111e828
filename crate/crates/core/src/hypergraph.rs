//! Key hypergraphs and collusion families.
//!
//! Users are numbered `1..=K` everywhere in this module and in every file format.
//! A hyperedge is a group of users that share one independent key; a collusion
//! family lists the user sets that may pool their knowledge with the server.

use std::fmt;

use itertools::Itertools;
use petgraph::unionfind::UnionFind;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergraphError {
    #[error("a key hypergraph needs at least 2 users, got {0}")]
    TooFewUsers(usize),
    #[error("user {user} is outside 1..={users}")]
    UserOutOfRange { user: usize, users: usize },
    #[error("edge {0} is empty")]
    EmptyEdge(usize),
    #[error("colluding set {set} has {} users; at most K-2 = {max} may collude", set.len())]
    CollusionTooLarge { set: UserSet, max: usize },
    #[error("removing {removed} leaves fewer than 2 users")]
    RemovalTooLarge { removed: UserSet },
    #[error("collusion family is for {family} users but the hypergraph has {graph}")]
    UserCountMismatch { graph: usize, family: usize },
    #[error("group size {group} must satisfy 1 <= G <= K = {users}")]
    GroupSize { group: usize, users: usize },
}

/// A sorted, duplicate-free set of 1-based user indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(from = "Vec<usize>", into = "Vec<usize>")]
pub struct UserSet(Vec<usize>);

impl UserSet {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, user: usize) -> bool {
        self.0.binary_search(&user).is_ok()
    }

    pub fn is_disjoint(&self, other: &UserSet) -> bool {
        self.0.iter().all(|u| !other.contains(*u))
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    /// Position of `user` within the sorted member list.
    pub fn position(&self, user: usize) -> Option<usize> {
        self.0.binary_search(&user).ok()
    }

    /// `1..=users` minus `self`.
    pub fn complement(&self, users: usize) -> UserSet {
        UserSet((1..=users).filter(|u| !self.contains(*u)).collect())
    }

    fn check_range(&self, users: usize) -> Result<(), HypergraphError> {
        match self.0.iter().find(|&&u| u == 0 || u > users) {
            Some(&user) => Err(HypergraphError::UserOutOfRange { user, users }),
            None => Ok(()),
        }
    }
}

impl FromIterator<usize> for UserSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

impl From<Vec<usize>> for UserSet {
    fn from(v: Vec<usize>) -> Self {
        v.into_iter().collect()
    }
}

impl From<UserSet> for Vec<usize> {
    fn from(s: UserSet) -> Self {
        s.0
    }
}

impl<const N: usize> From<[usize; N]> for UserSet {
    fn from(a: [usize; N]) -> Self {
        a.into_iter().collect()
    }
}

impl fmt::Display for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.iter().join(","))
    }
}

/// All `size`-subsets of `1..=users` in lexicographic order.
pub fn subsets_of_size(users: usize, size: usize) -> impl Iterator<Item = UserSet> {
    (1..=users).combinations(size).map(UserSet)
}

/// A key hypergraph: `K` users and an ordered list of key groups.
///
/// Repeated edges are kept; each stands for its own independent key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyHypergraph {
    users: usize,
    edges: Vec<UserSet>,
}

impl KeyHypergraph {
    pub fn new(users: usize, edges: Vec<UserSet>) -> Result<Self, HypergraphError> {
        if users < 2 {
            return Err(HypergraphError::TooFewUsers(users));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.is_empty() {
                return Err(HypergraphError::EmptyEdge(i));
            }
            e.check_range(users)?;
        }
        Ok(Self { users, edges })
    }

    /// Every `G`-subset of `1..=K` as an edge, in lexicographic order.
    pub fn symmetric(users: usize, group: usize) -> Result<Self, HypergraphError> {
        if group == 0 || group > users {
            return Err(HypergraphError::GroupSize { group, users });
        }
        Self::new(users, subsets_of_size(users, group).collect())
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn edges(&self) -> &[UserSet] {
        &self.edges
    }

    /// Connected components as user sets, ordered by smallest member.
    pub fn components(&self) -> Vec<UserSet> {
        let mut uf = UnionFind::<usize>::new(self.users);
        for e in &self.edges {
            let mut it = e.iter();
            if let Some(first) = it.next() {
                for u in it {
                    uf.union(first - 1, u - 1);
                }
            }
        }
        let labels = uf.into_labeling();
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for user in 1..=self.users {
            let label = labels[user - 1];
            match groups.iter_mut().find(|(l, _)| *l == label) {
                Some((_, members)) => members.push(user),
                None => groups.push((label, vec![user])),
            }
        }
        groups.into_iter().map(|(_, members)| UserSet(members)).collect()
    }

    /// True iff every bipartition of the users is crossed by some edge.
    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Deletes `removed` and every edge touching it, then renumbers the survivors.
    pub fn induced_subgraph(&self, removed: &UserSet) -> Result<InducedSubgraph, HypergraphError> {
        removed.check_range(self.users)?;
        if self.users - removed.len() < 2 {
            return Err(HypergraphError::RemovalTooLarge { removed: removed.clone() });
        }
        let original: Vec<usize> = (1..=self.users).filter(|u| !removed.contains(*u)).collect();
        let mut new_index = vec![0usize; self.users + 1];
        for (i, &u) in original.iter().enumerate() {
            new_index[u] = i + 1;
        }
        let mut edges = Vec::new();
        let mut edge_origin = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.is_disjoint(removed) {
                edges.push(e.iter().map(|u| new_index[u]).collect());
                edge_origin.push(i);
            }
        }
        let graph = KeyHypergraph { users: original.len(), edges };
        Ok(InducedSubgraph { graph, original, edge_origin })
    }
}

/// Result of [`KeyHypergraph::induced_subgraph`] with the map back to the parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InducedSubgraph {
    pub graph: KeyHypergraph,
    /// `original[i]` is the parent index of renumbered user `i + 1`.
    pub original: Vec<usize>,
    /// `edge_origin[j]` is the parent index of surviving edge `j`.
    pub edge_origin: Vec<usize>,
}

impl InducedSubgraph {
    pub fn to_original(&self, set: &UserSet) -> UserSet {
        set.iter().map(|u| self.original[u - 1]).collect()
    }

    /// Surviving edges in parent numbering.
    pub fn original_edges(&self) -> Vec<UserSet> {
        self.graph.edges.iter().map(|e| self.to_original(e)).collect()
    }
}

/// The user sets that may collude with the server.
///
/// Exactly the listed sets are audited; the family is not closed under subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollusionFamily {
    users: usize,
    sets: Vec<UserSet>,
}

impl CollusionFamily {
    pub fn new(users: usize, sets: Vec<UserSet>) -> Result<Self, HypergraphError> {
        if users < 2 {
            return Err(HypergraphError::TooFewUsers(users));
        }
        for s in &sets {
            s.check_range(users)?;
            if s.len() > users - 2 {
                return Err(HypergraphError::CollusionTooLarge { set: s.clone(), max: users - 2 });
            }
        }
        Ok(Self { users, sets })
    }

    /// All sets of exactly `size` users.
    pub fn all_of_size(users: usize, size: usize) -> Result<Self, HypergraphError> {
        Self::new(users, subsets_of_size(users, size).collect())
    }

    /// All sets of at most `max` users, including the empty set, ordered by size.
    pub fn up_to_size(users: usize, max: usize) -> Result<Self, HypergraphError> {
        Self::new(users, (0..=max).flat_map(|t| subsets_of_size(users, t)).collect())
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn sets(&self) -> &[UserSet] {
        &self.sets
    }

    /// Same family with the empty set prepended if it was missing.
    pub fn with_empty(&self) -> Self {
        if self.sets.iter().any(UserSet::is_empty) {
            return self.clone();
        }
        let mut sets = vec![UserSet::empty()];
        sets.extend(self.sets.iter().cloned());
        Self { users: self.users, sets }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityVerdict {
    Feasible,
    /// `collusion` disconnects the hypergraph; no surviving edge crosses `parts`.
    Infeasible { collusion: UserSet, parts: (UserSet, UserSet) },
}

impl FeasibilityVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Feasible)
    }
}

impl fmt::Display for FeasibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibilityVerdict::Feasible => write!(f, "FEASIBLE"),
            FeasibilityVerdict::Infeasible { collusion, parts } => {
                let side = |s: &UserSet| s.members().iter().join(",");
                write!(f, "INFEASIBLE: T={collusion}, partition {{{}}} | {{{}}}", side(&parts.0), side(&parts.1))
            }
        }
    }
}

/// Secure summation is feasible iff the hypergraph stays connected after deleting
/// every listed colluding set together with its incident edges.
///
/// The first violating set in family order is reported, with the witness split
/// (component of the smallest surviving user, everyone else).
pub fn feasibility(graph: &KeyHypergraph, family: &CollusionFamily) -> Result<FeasibilityVerdict, HypergraphError> {
    if family.users() != graph.users() {
        return Err(HypergraphError::UserCountMismatch { graph: graph.users(), family: family.users() });
    }
    let violation = family
        .sets()
        .par_iter()
        .map(|t| -> Result<Option<FeasibilityVerdict>, HypergraphError> {
            let sub = graph.induced_subgraph(t)?;
            let components = sub.graph.components();
            if components.len() == 1 {
                return Ok(None);
            }
            let first = sub.to_original(&components[0]);
            let rest = sub.to_original(&components[1..].iter().flat_map(|c| c.iter()).collect());
            Ok(Some(FeasibilityVerdict::Infeasible { collusion: t.clone(), parts: (first, rest) }))
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(violation.unwrap_or(FeasibilityVerdict::Feasible))
}

/// JSON instance: `{"K": 4, "edges": [[1,2,4],[2,3],[3,4]], "collusion": [[4]]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypergraphInstance {
    #[serde(rename = "K")]
    pub users: usize,
    pub edges: Vec<UserSet>,
    #[serde(default = "default_collusion")]
    pub collusion: Vec<UserSet>,
}

fn default_collusion() -> Vec<UserSet> {
    vec![UserSet::empty()]
}

impl HypergraphInstance {
    pub fn build(&self) -> Result<(KeyHypergraph, CollusionFamily), HypergraphError> {
        Ok((
            KeyHypergraph::new(self.users, self.edges.clone())?,
            CollusionFamily::new(self.users, self.collusion.clone())?,
        ))
    }

    pub fn from_parts(graph: &KeyHypergraph, family: &CollusionFamily) -> Self {
        Self { users: graph.users(), edges: graph.edges().to_vec(), collusion: family.sets().to_vec() }
    }
}
