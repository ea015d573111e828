use serde::{Deserialize, Serialize};

use super::{capacity_coded, capacity_groupwise, GroupwiseRegion, Rational};
use crate::schemes::{KeyLengths, Scheme, SchemeKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateCoordinate {
    pub name: String,
    #[serde(with = "super::rational_str")]
    pub achieved: Rational,
    #[serde(with = "super::rational_str::option")]
    pub bound: Option<Rational>,
    /// `None` when no optimal region is known for the scheme's key regime.
    pub optimal: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateReport {
    pub coordinates: Vec<RateCoordinate>,
}

impl RateReport {
    pub fn all_optimal(&self) -> bool {
        self.coordinates.iter().all(|c| c.optimal == Some(true))
    }

    /// No coordinate beats its capacity bound.
    pub fn respects_converse(&self) -> bool {
        self.coordinates.iter().all(|c| c.bound.is_none_or(|b| c.achieved >= b))
    }

    pub fn get(&self, name: &str) -> Option<&RateCoordinate> {
        self.coordinates.iter().find(|c| c.name == name)
    }
}

fn coordinate(name: &str, achieved: Rational, bound: Option<Rational>) -> RateCoordinate {
    RateCoordinate { name: name.into(), achieved, bound, optimal: bound.map(|b| achieved == b) }
}

/// Achieved `L_X / L` and key rates, next to the optimal region where one is known.
pub fn rate_report(scheme: &Scheme) -> RateReport {
    let params = scheme.params();
    let l = params.input_len() as i128;
    let ratio = |n: usize| Rational::new(n as i128, l);
    let rate = ratio(params.message_len());
    let coordinates = match (params.kind(), params.keys()) {
        (SchemeKind::Coded, KeyLengths::Coded { individual, source }) => {
            let region = capacity_coded(params.users(), 0).ok();
            vec![
                coordinate("R", rate, region.map(|r| r.rate)),
                coordinate("R_Z", ratio(*individual), region.map(|r| r.key_rate)),
                coordinate("R_ZΣ", ratio(*source), region.map(|r| r.source_key_rate)),
            ]
        }
        (SchemeKind::Symmetric { max_colluders, group_size, .. }, KeyLengths::Symmetric { groupwise }) => {
            let region = match capacity_groupwise(params.users(), *max_colluders, *group_size) {
                Ok(GroupwiseRegion::Region { rate, key_rate }) => Some((rate, key_rate)),
                _ => None,
            };
            vec![
                coordinate("R", rate, region.map(|r| r.0)),
                coordinate("R_S", ratio(*groupwise), region.map(|r| r.1)),
            ]
        }
        (_, KeyLengths::General { padded, .. }) => {
            vec![coordinate("R", rate, None), coordinate("R_S", ratio(*padded), None)]
        }
        _ => unreachable!("kind and key lengths are built together"),
    };
    RateReport { coordinates }
}
