//! Ground sets, separation systems, tangles and the consistency condition.
//!
//! A *separation* is an unordered bipartition `{A, A^c}` of the ground set;
//! choosing one side orients it. A *tangle* orients every separation of a
//! system so that any one, two or three chosen big sides have a common
//! point. Systems store one canonical side per separation (the numerically
//! smaller bitmask of the pair), so an orientation is just one boolean per
//! separation.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::point_set::PointSet;
use crate::{Error, Result};

/// The finite set of points the separations bipartition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundSet {
    size: usize,
    labels: Option<Vec<String>>,
}

impl GroundSet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParam("ground set must be nonempty".into()));
        }
        Ok(GroundSet { size, labels: None })
    }

    pub fn with_labels(size: usize, labels: Vec<String>) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidParam("ground set must be nonempty".into()));
        }
        if labels.len() != size {
            return Err(Error::InvalidParam(format!(
                "expected {size} labels, got {}",
                labels.len()
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::InvalidParam(format!("duplicate label {l:?}")));
            }
        }
        Ok(GroundSet {
            size,
            labels: Some(labels),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, index: usize) -> String {
        match &self.labels {
            Some(ls) => ls[index].clone(),
            None => index.to_string(),
        }
    }
}

/// An ordered family of separations over one ground set.
///
/// Each separation is stored by its canonical side; `orders` (when present)
/// aligns with the separation list by index.
#[derive(Clone, Debug)]
pub struct SeparationSystem {
    ground: GroundSet,
    canonical: Vec<PointSet>,
    index: BTreeMap<PointSet, usize>,
    orders: Option<Vec<u64>>,
}

impl SeparationSystem {
    /// Canonicalizes and deduplicates `sides` into a system, preserving
    /// first-occurrence order. The second return is the index mapping from
    /// input positions to stored separations.
    pub fn new(ground: GroundSet, sides: &[PointSet]) -> Result<(Self, Vec<usize>)> {
        let n = ground.size();
        let mut canonical = Vec::new();
        let mut index = BTreeMap::new();
        let mut mapping = Vec::with_capacity(sides.len());
        for side in sides {
            if side.universe() != n {
                return Err(Error::IndexOutOfRange {
                    index: side.universe(),
                    limit: n,
                });
            }
            if side.is_empty() || side.is_full() {
                return Err(Error::TrivialSeparation);
            }
            let canon = canonical_side(side);
            let at = *index.entry(canon.clone()).or_insert_with(|| {
                canonical.push(canon.clone());
                canonical.len() - 1
            });
            mapping.push(at);
        }
        Ok((
            SeparationSystem {
                ground,
                canonical,
                index,
                orders: None,
            },
            mapping,
        ))
    }

    /// Attaches one order value per separation.
    pub fn with_orders(mut self, orders: Vec<u64>) -> Result<Self> {
        if orders.len() != self.canonical.len() {
            return Err(Error::MissingOrders);
        }
        self.orders = Some(orders);
        Ok(self)
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn len(&self) -> usize {
        self.canonical.len()
    }

    pub fn is_empty(&self) -> bool {
        self.canonical.is_empty()
    }

    /// The stored (canonical) side of separation `i`.
    pub fn canonical_side_of(&self, i: usize) -> Result<&PointSet> {
        self.canonical.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            limit: self.canonical.len(),
        })
    }

    pub fn sides(&self) -> &[PointSet] {
        &self.canonical
    }

    pub fn orders(&self) -> Option<&[u64]> {
        self.orders.as_deref()
    }

    /// Index of the separation whose canonical side matches either `side`
    /// or its complement.
    pub fn find(&self, side: &PointSet) -> Option<usize> {
        self.index.get(&canonical_side(side)).copied()
    }

    /// All `2^(n-1) - 1` nontrivial separations of an `n`-point ground set,
    /// in ascending canonical-mask order. Guarded because the count is
    /// exponential.
    pub fn all_separations(ground: GroundSet, limit_points: usize) -> Result<Self> {
        let n = ground.size();
        if n > limit_points {
            return Err(Error::LimitExceeded {
                what: "ground points for full separation enumeration",
                value: n,
                limit: limit_points,
            });
        }
        // Canonical sides are exactly the masks not containing point n-1
        // (their complements do), except the empty set.
        let mut sides = Vec::with_capacity((1usize << (n - 1)) - 1);
        for mask in 1..(1u64 << (n - 1)) {
            sides.push(PointSet::from_indices(
                n,
                (0..n - 1).filter(|i| mask >> i & 1 == 1),
            ));
        }
        let (sys, _) = SeparationSystem::new(ground, &sides)?;
        Ok(sys)
    }
}

/// The canonical representative of the separation `{side, side^c}`: the
/// numerically smaller of the two bitmasks.
pub fn canonical_side(side: &PointSet) -> PointSet {
    let comp = side.complement();
    if *side <= comp {
        side.clone()
    } else {
        comp
    }
}

/// An orientation of every separation in a system satisfying the
/// consistency condition. `orientation[i] = true` means the canonical side
/// of separation `i` is the big side.
#[derive(Clone, Debug)]
pub struct Tangle {
    system: Arc<SeparationSystem>,
    orientation: Vec<bool>,
}

impl Tangle {
    /// Validates consistency; rejects orientations where some one, two or
    /// three big sides have empty intersection.
    pub fn new(system: Arc<SeparationSystem>, orientation: Vec<bool>) -> Result<Self> {
        let report = is_consistent(&system, &orientation)?;
        match report.violation {
            None => Ok(Tangle {
                system,
                orientation,
            }),
            Some(triple) => Err(Error::NotATangle(triple)),
        }
    }

    /// Skips the consistency check. For callers whose orientations are
    /// consistent by construction (enumeration, generators, extension);
    /// debug builds still verify small systems, where the cubic check is
    /// affordable.
    pub(crate) fn new_unchecked(system: Arc<SeparationSystem>, orientation: Vec<bool>) -> Self {
        debug_assert!(
            system.len() > 64
                || is_consistent(&system, &orientation)
                    .map(|r| r.violation.is_none())
                    .unwrap_or(false)
        );
        Tangle {
            system,
            orientation,
        }
    }

    pub fn system(&self) -> &Arc<SeparationSystem> {
        &self.system
    }

    pub fn orientation(&self) -> &[bool] {
        &self.orientation
    }

    pub fn len(&self) -> usize {
        self.orientation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientation.is_empty()
    }

    /// The side selected by the orientation bit of separation `i`.
    pub fn big_side(&self, i: usize) -> Result<PointSet> {
        let canon = self.system.canonical_side_of(i)?;
        Ok(if self.orientation[i] {
            canon.clone()
        } else {
            canon.complement()
        })
    }

    /// The complement of the big side.
    pub fn small_side(&self, i: usize) -> Result<PointSet> {
        Ok(self.big_side(i)?.complement())
    }

    /// All big sides in separation order.
    pub fn big_sides(&self) -> Vec<PointSet> {
        (0..self.len()).map(|i| self.big_side(i).unwrap()).collect()
    }

    /// Big sides minimal under inclusion, in separation order. Every big
    /// side contains at least one of these.
    pub fn minimal_elements(&self) -> Vec<PointSet> {
        let sides = self.big_sides();
        sides
            .iter()
            .filter(|a| {
                !sides
                    .iter()
                    .any(|b| b != *a && b.is_subset_of(a))
            })
            .cloned()
            .collect()
    }
}

/// Outcome of the consistency check: `violation` holds the lexicographically
/// first set of at most three separation indices whose big sides have empty
/// intersection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub violation: Option<Vec<usize>>,
}

impl ConsistencyReport {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// Checks the consistency condition for an orientation of `system`: every
/// subset of at most three chosen big sides must have nonempty intersection.
///
/// Subsets are visited in lexicographic order of their sorted index
/// sequences, so the reported violation is deterministic. Singletons cannot
/// violate (sides are nontrivial), so the search effectively covers pairs
/// and triples.
pub fn is_consistent(system: &SeparationSystem, orientation: &[bool]) -> Result<ConsistencyReport> {
    if orientation.len() != system.len() {
        return Err(Error::OrientationLength {
            got: orientation.len(),
            want: system.len(),
        });
    }
    let sides: Vec<PointSet> = (0..system.len())
        .map(|i| {
            let canon = &system.sides()[i];
            if orientation[i] {
                canon.clone()
            } else {
                canon.complement()
            }
        })
        .collect();
    Ok(ConsistencyReport {
        violation: first_empty_intersection(&sides),
    })
}

/// Incremental consistency step for depth-first orientation searches.
///
/// `chosen` are the big sides picked so far and `pair_cuts[t]` their pairwise
/// intersections with every earlier side. Returns the intersections of
/// `side` with each chosen side if adding `side` keeps every pair and triple
/// nonempty, `None` if some pair or triple dies.
pub(crate) fn extend_cuts(
    chosen: &[PointSet],
    pair_cuts: &[Vec<PointSet>],
    side: &PointSet,
) -> Option<Vec<PointSet>> {
    let mut cuts = Vec::with_capacity(chosen.len());
    for prev in chosen {
        let cut = prev.intersection(side);
        if cut.is_empty() {
            return None;
        }
        cuts.push(cut);
    }
    for earlier in pair_cuts {
        for pair in earlier {
            if pair.is_disjoint(side) {
                return None;
            }
        }
    }
    Some(cuts)
}

/// Lexicographically first subset of at most three of `sides` with empty
/// intersection, as sorted indices.
pub(crate) fn first_empty_intersection(sides: &[PointSet]) -> Option<Vec<usize>> {
    let m = sides.len();
    for i in 0..m {
        if sides[i].is_empty() {
            return Some(vec![i]);
        }
        for j in i + 1..m {
            let ij = sides[i].intersection(&sides[j]);
            if ij.is_empty() {
                return Some(vec![i, j]);
            }
            for l in j + 1..m {
                if ij.is_disjoint(&sides[l]) {
                    return Some(vec![i, j, l]);
                }
            }
        }
    }
    None
}

/// The orientation choosing, for each separation, the side containing `v`.
/// Always consistent: `v` itself witnesses every triple.
pub fn principal_tangle(system: &Arc<SeparationSystem>, v: usize) -> Result<Tangle> {
    let n = system.ground().size();
    if v >= n {
        return Err(Error::IndexOutOfRange { index: v, limit: n });
    }
    let orientation = system.sides().iter().map(|c| c.contains(v)).collect();
    Ok(Tangle::new_unchecked(Arc::clone(system), orientation))
}

pub const DEFAULT_ENUMERATION_LIMIT: usize = 24;

/// All consistent orientations of `system`, by depth-first search trying the
/// canonical side first at each separation and pruning on the first violated
/// pair or triple. Output order is the DFS order, i.e. lexicographic on
/// orientation vectors with `true` before `false`.
pub fn enumerate_tangles(system: &Arc<SeparationSystem>, limit: usize) -> Result<Vec<Tangle>> {
    let m = system.len();
    if m > limit {
        return Err(Error::LimitExceeded {
            what: "separations in tangle enumeration",
            value: m,
            limit,
        });
    }
    let mut found = Vec::new();
    let mut chosen: Vec<PointSet> = Vec::with_capacity(m);
    // pair_cuts[t] holds the intersections of side t with every earlier side.
    let mut pair_cuts: Vec<Vec<PointSet>> = Vec::with_capacity(m);
    let mut orientation = vec![false; m];

    fn dfs(
        system: &Arc<SeparationSystem>,
        depth: usize,
        orientation: &mut Vec<bool>,
        chosen: &mut Vec<PointSet>,
        pair_cuts: &mut Vec<Vec<PointSet>>,
        found: &mut Vec<Tangle>,
    ) {
        if depth == system.len() {
            found.push(Tangle::new_unchecked(
                Arc::clone(system),
                orientation.clone(),
            ));
            return;
        }
        let canon = system.sides()[depth].clone();
        for (bit, side) in [(true, canon.clone()), (false, canon.complement())] {
            if let Some(cuts) = extend_cuts(chosen, pair_cuts, &side) {
                orientation[depth] = bit;
                chosen.push(side);
                pair_cuts.push(cuts);
                dfs(system, depth + 1, orientation, chosen, pair_cuts, found);
                pair_cuts.pop();
                chosen.pop();
            }
        }
    }

    dfs(
        system,
        0,
        &mut orientation,
        &mut chosen,
        &mut pair_cuts,
        &mut found,
    );
    Ok(found)
}

/// The two corners `(A ∩ B, A ∪ B)` of two sides. A corner is `None` when it
/// is empty or the full ground set, since trivial bipartitions are excluded
/// from systems.
pub fn corners(a: &PointSet, b: &PointSet) -> Result<(Option<PointSet>, Option<PointSet>)> {
    a.same_ground(b)?;
    let keep = |s: PointSet| {
        if s.is_empty() || s.is_full() {
            None
        } else {
            Some(s)
        }
    };
    Ok((keep(a.intersection(b)), keep(a.union(b))))
}
