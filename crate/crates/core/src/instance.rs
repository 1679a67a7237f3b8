//! The JSON instance format and its loader.
//!
//! An instance is `{"ground_set_size": n, "labels": [...]?, "separations":
//! [{"side": [indices], "order": int?}, ...]}`. Generator output adds an
//! `orientation` array (one 0/1 per stored separation, 1 meaning the listed
//! side is the big side), a `designated_sets` block and a `metadata` block.
//! Loading canonicalizes: each side is replaced by the numerically smaller
//! of itself and its complement, duplicates collapse, and orientations are
//! re-expressed relative to the stored side.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::generators::InstanceBundle;
use crate::point_set::PointSet;
use crate::tangle::{GroundSet, SeparationSystem, Tangle};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SeparationJson {
    pub side: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Instance {
    pub ground_set_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub separations: Vec<SeparationJson>,
    /// One 0/1 entry per separation; 1 orients toward the listed side.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Vec<u8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub designated_sets: Option<BTreeMap<String, Vec<usize>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metadata: Option<serde_json::Value>,
}

/// A tangle file references an instance by path or carries it inline.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceRef {
    Path(String),
    Inline(Box<Instance>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TangleFile {
    pub instance: InstanceRef,
    pub orientation: Vec<u8>,
}

impl Instance {
    pub fn from_json_str(s: &str) -> Result<Instance> {
        serde_json::from_str(s).map_err(|e| Error::Parse {
            row: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("instance serialization cannot fail")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serialization cannot fail")
    }

    /// Builds the separation system, canonicalizing and deduplicating.
    /// Returns the input-to-stored index mapping alongside.
    pub fn system(&self) -> Result<(SeparationSystem, Vec<usize>)> {
        let ground = match &self.labels {
            Some(labels) => GroundSet::with_labels(self.ground_set_size, labels.clone())?,
            None => GroundSet::new(self.ground_set_size)?,
        };
        let sides: Vec<PointSet> = self
            .separations
            .iter()
            .map(|s| {
                for &i in &s.side {
                    if i >= self.ground_set_size {
                        return Err(Error::IndexOutOfRange {
                            index: i,
                            limit: self.ground_set_size,
                        });
                    }
                }
                Ok(PointSet::from_indices(
                    self.ground_set_size,
                    s.side.iter().copied(),
                ))
            })
            .collect::<Result<_>>()?;
        let (mut system, mapping) = SeparationSystem::new(ground, &sides)?;

        let orders: Vec<Option<u64>> = {
            let mut per_stored = vec![None; system.len()];
            for (input, &stored) in mapping.iter().enumerate() {
                if let Some(o) = self.separations[input].order {
                    match per_stored[stored] {
                        None => per_stored[stored] = Some(o),
                        Some(prev) if prev == o => {}
                        Some(prev) => {
                            return Err(Error::InvalidParam(format!(
                                "conflicting orders {prev} and {o} for one separation"
                            )))
                        }
                    }
                }
            }
            per_stored
        };
        if !orders.is_empty() && orders.iter().all(|o| o.is_some()) {
            system = system.with_orders(orders.into_iter().map(|o| o.unwrap()).collect())?;
        } else if orders.iter().any(|o| o.is_some()) {
            return Err(Error::MissingOrders);
        }
        Ok((system, mapping))
    }

    /// Builds the tangle from the embedded orientation.
    pub fn tangle(&self) -> Result<Tangle> {
        let orientation = self
            .orientation
            .as_ref()
            .ok_or_else(|| Error::InvalidParam("instance carries no orientation".into()))?;
        self.tangle_with(orientation)
    }

    /// Builds a tangle from an explicit 0/1 orientation over the listed
    /// separations (1 = the listed side is big).
    pub fn tangle_with(&self, orientation: &[u8]) -> Result<Tangle> {
        if orientation.len() != self.separations.len() {
            return Err(Error::OrientationLength {
                got: orientation.len(),
                want: self.separations.len(),
            });
        }
        let (system, mapping) = self.system()?;
        let system = Arc::new(system);
        let mut stored: Vec<Option<bool>> = vec![None; system.len()];
        for (input, &bit) in orientation.iter().enumerate() {
            if bit > 1 {
                return Err(Error::InvalidParam(format!(
                    "orientation entries must be 0 or 1, got {bit}"
                )));
            }
            let side = PointSet::from_indices(
                self.ground_set_size,
                self.separations[input].side.iter().copied(),
            );
            let stored_index = mapping[input];
            let canonical_is_listed = system.sides()[stored_index] == side;
            let toward_canonical = canonical_is_listed == (bit == 1);
            match stored[stored_index] {
                None => stored[stored_index] = Some(toward_canonical),
                Some(prev) if prev == toward_canonical => {}
                Some(_) => {
                    return Err(Error::InvalidParam(
                        "conflicting orientations for one separation".into(),
                    ))
                }
            }
        }
        let orientation: Vec<bool> = stored
            .into_iter()
            .map(|o| o.ok_or_else(|| Error::InvalidParam("separation left unoriented".into())))
            .collect::<Result<_>>()?;
        Tangle::new(system, orientation)
    }

    /// Resolves a named designated set into a point set.
    pub fn designated(&self, name: &str) -> Result<PointSet> {
        let sets = self
            .designated_sets
            .as_ref()
            .ok_or_else(|| Error::InvalidParam("instance has no designated sets".into()))?;
        let indices = sets
            .get(name)
            .ok_or_else(|| Error::InvalidParam(format!("no designated set named {name:?}")))?;
        for &i in indices {
            if i >= self.ground_set_size {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    limit: self.ground_set_size,
                });
            }
        }
        Ok(PointSet::from_indices(
            self.ground_set_size,
            indices.iter().copied(),
        ))
    }

    /// The canonical form: stored separations in system order, sides as
    /// sorted canonical index arrays, orientation re-expressed accordingly.
    pub fn canonicalized(&self) -> Result<Instance> {
        let (system, _mapping) = self.system()?;
        let orientation = match &self.orientation {
            None => None,
            Some(bits) => {
                let tangle = self.tangle_with(bits)?;
                Some(tangle.orientation().iter().map(|&b| b as u8).collect())
            }
        };
        let orders = system.orders();
        let separations = system
            .sides()
            .iter()
            .enumerate()
            .map(|(i, side)| SeparationJson {
                side: side.indices(),
                order: orders.map(|o| o[i]),
            })
            .collect();
        Ok(Instance {
            ground_set_size: self.ground_set_size,
            labels: self.labels.clone(),
            separations,
            orientation,
            designated_sets: self.designated_sets.clone(),
            metadata: self.metadata.clone(),
        })
    }

    /// Content digest of the canonical serialization, comparable across
    /// machines.
    pub fn digest(&self) -> Result<String> {
        let canonical = self.canonicalized()?;
        let bytes = canonical.to_json_string();
        let hash = Sha256::digest(bytes.as_bytes());
        Ok(hash.iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn from_bundle(bundle: &InstanceBundle) -> Instance {
        let system = &bundle.system;
        let orders = system.orders();
        let separations = system
            .sides()
            .iter()
            .enumerate()
            .map(|(i, side)| SeparationJson {
                side: side.indices(),
                order: orders.map(|o| o[i]),
            })
            .collect();
        let designated_sets = if bundle.designated.is_empty() {
            None
        } else {
            Some(
                bundle
                    .designated
                    .iter()
                    .map(|(name, set)| (name.clone(), set.indices()))
                    .collect(),
            )
        };
        let mut metadata = serde_json::json!({
            "example": bundle.meta.example,
            "params": bundle.meta.params,
        });
        if !bundle.meta.flags.is_empty() {
            metadata["flags"] = serde_json::json!(bundle.meta.flags);
        }
        if let Some(spread) = &bundle.spread_triples {
            metadata["spread_triples"] = serde_json::json!(spread);
        }
        Instance {
            ground_set_size: system.ground().size(),
            labels: system.ground().labels().map(|l| l.to_vec()),
            separations,
            orientation: Some(
                bundle
                    .tangle
                    .orientation()
                    .iter()
                    .map(|&b| b as u8)
                    .collect(),
            ),
            designated_sets,
            metadata: Some(metadata),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_triples;

    #[test]
    fn bundle_round_trip() {
        let bundle = gen_triples(4).unwrap();
        let instance = Instance::from_bundle(&bundle);
        let text = instance.to_json_string();
        let back = Instance::from_json_str(&text).unwrap();
        assert_eq!(back, instance);
        let (system, _) = back.system().unwrap();
        assert_eq!(system.sides(), bundle.system.sides());
        let tangle = back.tangle().unwrap();
        assert_eq!(tangle.orientation(), bundle.tangle.orientation());
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let raw = Instance {
            ground_set_size: 4,
            labels: None,
            separations: vec![
                SeparationJson {
                    side: vec![1, 2, 3],
                    order: None,
                },
                SeparationJson {
                    side: vec![0],
                    order: None,
                },
            ],
            orientation: Some(vec![1, 0]),
            designated_sets: None,
            metadata: None,
        };
        let canon = raw.canonicalized().unwrap();
        // Both rows describe the same separation; the orientations agree
        // (toward {1,2,3}), so one stored row remains.
        assert_eq!(canon.separations.len(), 1);
        assert_eq!(canon.separations[0].side, vec![0]);
        assert_eq!(canon.orientation, Some(vec![0]));
        assert_eq!(canon.canonicalized().unwrap(), canon);
        assert_eq!(raw.digest().unwrap(), canon.digest().unwrap());
    }

    #[test]
    fn conflicting_orientation_rejected() {
        let raw = Instance {
            ground_set_size: 4,
            labels: None,
            separations: vec![
                SeparationJson {
                    side: vec![1, 2, 3],
                    order: None,
                },
                SeparationJson {
                    side: vec![0],
                    order: None,
                },
            ],
            orientation: Some(vec![1, 1]),
            designated_sets: None,
            metadata: None,
        };
        assert!(raw.tangle().is_err());
    }

    #[test]
    fn partial_orders_rejected() {
        let raw = Instance {
            ground_set_size: 4,
            labels: None,
            separations: vec![
                SeparationJson {
                    side: vec![0],
                    order: Some(1),
                },
                SeparationJson {
                    side: vec![1],
                    order: None,
                },
            ],
            orientation: None,
            designated_sets: None,
            metadata: None,
        };
        assert!(matches!(raw.system(), Err(Error::MissingOrders)));
    }

    #[test]
    fn out_of_range_side_rejected() {
        let raw = Instance {
            ground_set_size: 3,
            labels: None,
            separations: vec![SeparationJson {
                side: vec![5],
                order: None,
            }],
            orientation: None,
            designated_sets: None,
            metadata: None,
        };
        assert!(matches!(
            raw.system(),
            Err(Error::IndexOutOfRange { .. })
        ));
    }
}
