//! Single-integer action codec.
//!
//! Links occupy contiguous blocks of the action space in catalog order. Inside
//! link `l`'s block, an action is laid out resource-major, MCS-minor:
//!
//! ```text
//! index = offset(l) + level * i_l + mcs
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use super::LinkCatalog;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ActionIndex(pub usize);

impl ActionIndex {
    pub fn value(self) -> usize {
        self.0
    }
}

impl fmt::Display for ActionIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The `(link, MCS, resource level)` triple behind an [`ActionIndex`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecodedAction {
    pub link: usize,
    pub mcs: usize,
    pub level: usize,
}

pub fn encode_action(
    link: usize,
    mcs: usize,
    level: usize,
    catalog: &LinkCatalog,
) -> Result<ActionIndex> {
    let spec = catalog.link(link)?;
    if mcs >= spec.mcs_count() {
        return Err(Error::IndexOutOfRange {
            what: "MCS",
            link,
            index: mcs,
            limit: spec.mcs_count(),
        });
    }
    if level >= spec.level_count() {
        return Err(Error::IndexOutOfRange {
            what: "resource level",
            link,
            index: level,
            limit: spec.level_count(),
        });
    }
    Ok(ActionIndex(
        catalog.offset(link) + level * spec.mcs_count() + mcs,
    ))
}

pub fn decode_action(a: ActionIndex, catalog: &LinkCatalog) -> Result<DecodedAction> {
    let total = catalog.action_count();
    if a.0 >= total {
        return Err(Error::ActionOutOfRange { index: a.0, total });
    }
    // The last block whose offset is <= a.
    let link = (0..catalog.len())
        .rev()
        .find(|&l| catalog.offset(l) <= a.0)
        .expect("offset(0) == 0");
    let within = a.0 - catalog.offset(link);
    let i = catalog.links()[link].mcs_count();
    Ok(DecodedAction {
        link,
        mcs: within % i,
        level: within / i,
    })
}

impl DecodedAction {
    pub fn encode(&self, catalog: &LinkCatalog) -> Result<ActionIndex> {
        encode_action(self.link, self.mcs, self.level, catalog)
    }
}

/// An action as handed to the scheduler: the encodable action plus the
/// resource amount actually granted.
///
/// `amount` equals the level's amount except when refinement had to grant a
/// quantity that does not sit on the level grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppliedAction {
    pub index: ActionIndex,
    pub action: DecodedAction,
    pub amount: f64,
}

impl AppliedAction {
    /// The action with its level's nominal amount.
    pub fn nominal(index: ActionIndex, catalog: &LinkCatalog) -> Result<Self> {
        let action = decode_action(index, catalog)?;
        let amount = catalog.links()[action.link].level_amount(action.level);
        Ok(Self {
            index,
            action,
            amount,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{LinkKind, LinkSpec, McsEntry};

    fn link(mcs: usize, levels: usize) -> LinkSpec {
        let entries = (0..mcs)
            .map(|m| McsEntry {
                rate_bps_per_unit: 1000.0 * (m + 1) as f64,
                snr50_db: m as f64,
                slope: 1.0,
            })
            .collect();
        LinkSpec::new(
            format!("l{mcs}x{levels}"),
            LinkKind::ResourceBlock,
            levels as f64,
            LinkSpec::uniform_levels(levels as f64, levels),
            entries,
        )
        .unwrap()
    }

    fn two_link() -> LinkCatalog {
        LinkCatalog::new(vec![link(29, 10), link(8, 10)]).unwrap()
    }

    #[test]
    fn first_action_is_zero() {
        let c = two_link();
        assert_eq!(encode_action(0, 0, 0, &c).unwrap(), ActionIndex(0));
        assert_eq!(
            decode_action(ActionIndex(0), &c).unwrap(),
            DecodedAction {
                link: 0,
                mcs: 0,
                level: 0
            }
        );
    }

    #[test]
    fn hand_computed_indices() {
        let c = two_link();
        assert_eq!(c.action_count(), 29 * 10 + 8 * 10);
        assert_eq!(encode_action(1, 7, 9, &c).unwrap(), ActionIndex(369));
        assert_eq!(
            decode_action(ActionIndex(289), &c).unwrap(),
            DecodedAction {
                link: 0,
                mcs: 28,
                level: 9
            }
        );
        assert_eq!(
            decode_action(ActionIndex(290), &c).unwrap(),
            DecodedAction {
                link: 1,
                mcs: 0,
                level: 0
            }
        );
    }

    #[test]
    fn exhaustive_roundtrip() {
        let c = LinkCatalog::new(vec![link(29, 10), link(8, 10), link(29, 4)]).unwrap();
        for a in 0..c.action_count() {
            let d = decode_action(ActionIndex(a), &c).unwrap();
            assert_eq!(d.encode(&c).unwrap(), ActionIndex(a));
        }
    }

    #[test]
    fn out_of_range_is_an_error() {
        let c = two_link();
        assert!(matches!(
            decode_action(ActionIndex(370), &c),
            Err(Error::ActionOutOfRange {
                index: 370,
                total: 370
            })
        ));
        assert!(encode_action(0, 29, 0, &c).is_err());
        assert!(encode_action(1, 0, 10, &c).is_err());
        assert!(encode_action(2, 0, 0, &c).is_err());
    }
}
