//! Covers and witnessing sets of tangles: exact minimum solvers, a greedy
//! upper bound, the level-by-level inductive construction, intersection
//! chains, and the closed-form size bounds.
//!
//! A set witnesses a tangle when it meets the intersection of every one,
//! two or three big sides. Because every big side contains a minimal one,
//! it is enough to check subsets of the minimal big sides; the equivalence
//! with the definition over all big sides is covered by the oracle tests
//! rather than assumed silently.

use std::collections::{BTreeSet, HashMap};

use crate::point_set::PointSet;
use crate::tangle::Tangle;
use crate::{Error, Result};

/// Cap on the number of minimal sides fed to the exact cover solver.
pub const DEFAULT_COVER_LIMIT: usize = 10_000;
/// Cap on the number of generated `<=3`-subset intersections.
pub const DEFAULT_FAMILY_LIMIT: usize = 1_000_000;
/// Cap on the tangle order accepted by the inductive construction; the
/// partition family grows by a factor of three per level.
pub const DEFAULT_INDUCTIVE_K_LIMIT: usize = 4;
/// Cap on minimal sides in the chain search.
pub const DEFAULT_CHAIN_LIMIT: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessMethod {
    Exact,
    Greedy,
    Inductive,
}

impl WitnessMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            WitnessMethod::Exact => "exact",
            WitnessMethod::Greedy => "greedy",
            WitnessMethod::Inductive => "inductive",
        }
    }
}

/// A verified witnessing set together with how it was obtained.
#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub set: PointSet,
    pub method: WitnessMethod,
    /// True only for the exact solver.
    pub certified_minimal: bool,
    /// Number of `<=3`-subsets of the minimal big sides considered.
    pub triple_count: usize,
}

/// First unwitnessed subset found by [`is_witnessing`], as indices into
/// `tangle.minimal_elements()` plus the sides themselves.
#[derive(Clone, Debug)]
pub struct UnwitnessedTriple {
    pub minimal_indices: Vec<usize>,
    pub sides: Vec<PointSet>,
}

#[derive(Clone, Debug)]
pub struct WitnessCheck {
    pub witnessed: bool,
    pub missing: Option<UnwitnessedTriple>,
    pub triple_count: usize,
}

/// All `<=3`-subsets of `minimals` with their intersections, in
/// lexicographic order of the index sequences.
fn triple_family(minimals: &[PointSet]) -> Vec<(Vec<usize>, PointSet)> {
    let t = minimals.len();
    let mut family = Vec::new();
    for i in 0..t {
        family.push((vec![i], minimals[i].clone()));
        for j in i + 1..t {
            let ij = minimals[i].intersection(&minimals[j]);
            family.push((vec![i, j], ij.clone()));
            for l in j + 1..t {
                family.push((vec![i, j, l], ij.intersection(&minimals[l])));
            }
        }
    }
    family
}

fn family_size(t: usize) -> usize {
    t + t * t.saturating_sub(1) / 2 + t * t.saturating_sub(1) * t.saturating_sub(2) / 6
}

/// Whether `w` meets the intersection of every `<=3`-subset of the minimal
/// big sides. Reports the lexicographically first missed subset.
pub fn is_witnessing(tangle: &Tangle, w: &PointSet) -> Result<WitnessCheck> {
    let ground = tangle.system().ground().size();
    if w.universe() != ground {
        return Err(Error::GroundMismatch {
            left: w.universe(),
            right: ground,
        });
    }
    let minimals = tangle.minimal_elements();
    let family = triple_family(&minimals);
    let triple_count = family.len();
    for (indices, cut) in family {
        if w.is_disjoint(&cut) {
            let sides = indices.iter().map(|&i| minimals[i].clone()).collect();
            return Ok(WitnessCheck {
                witnessed: false,
                missing: Some(UnwitnessedTriple {
                    minimal_indices: indices,
                    sides,
                }),
                triple_count,
            });
        }
    }
    Ok(WitnessCheck {
        witnessed: true,
        missing: None,
        triple_count,
    })
}

/// Whether `u` meets every minimal big side (hence every big side).
pub fn is_cover(tangle: &Tangle, u: &PointSet) -> Result<bool> {
    let ground = tangle.system().ground().size();
    if u.universe() != ground {
        return Err(Error::GroundMismatch {
            left: u.universe(),
            right: ground,
        });
    }
    Ok(tangle
        .minimal_elements()
        .iter()
        .all(|a| !u.is_disjoint(a)))
}

/// Deduplicates a hitting-set family and drops sets that contain another
/// set of the family.
fn reduce_family(sets: &[PointSet]) -> Vec<PointSet> {
    let distinct: BTreeSet<PointSet> = sets.iter().cloned().collect();
    let distinct: Vec<PointSet> = distinct.into_iter().collect();
    distinct
        .iter()
        .filter(|s| {
            !distinct
                .iter()
                .any(|o| o != *s && o.is_subset_of(s))
        })
        .cloned()
        .collect()
}

fn greedy_hitting_set(universe: usize, sets: &[PointSet]) -> PointSet {
    let mut picked = PointSet::empty(universe);
    let mut uncovered: Vec<&PointSet> = sets.iter().collect();
    while !uncovered.is_empty() {
        let mut counts = vec![0usize; universe];
        for s in &uncovered {
            for p in s.iter() {
                counts[p] += 1;
            }
        }
        let best = (0..universe)
            .max_by_key(|&p| (counts[p], std::cmp::Reverse(p)))
            .expect("nonempty universe");
        picked.insert(best);
        uncovered.retain(|s| !s.contains(best));
    }
    picked
}

/// Number of pairwise disjoint sets among `sets`, greedily packed in order.
/// Each such set needs its own point, so this lower-bounds the hitting set.
fn packing_bound(sets: &[&PointSet], universe: usize) -> usize {
    let mut used = PointSet::empty(universe);
    let mut count = 0;
    for s in sets {
        if s.is_disjoint(&used) {
            used = used.union(s);
            count += 1;
        }
    }
    count
}

/// Exact minimum hitting set by branch and bound: branch on the points of
/// an uncovered set of minimum size, prune with the disjoint-packing lower
/// bound against a greedy incumbent. Deterministic: candidate points are
/// taken in ascending order and the first optimum found is kept.
fn minimum_hitting_set(universe: usize, sets: &[PointSet]) -> PointSet {
    let reduced = reduce_family(sets);
    if reduced.is_empty() {
        return PointSet::empty(universe);
    }
    debug_assert!(reduced.iter().all(|s| !s.is_empty()), "unhittable empty set");
    let mut best = greedy_hitting_set(universe, &reduced);

    fn recurse(
        universe: usize,
        remaining: &[&PointSet],
        picked: &mut Vec<usize>,
        best: &mut PointSet,
    ) {
        if remaining.is_empty() {
            if picked.len() < best.len() {
                *best = PointSet::from_indices(universe, picked.iter().copied());
            }
            return;
        }
        let bound = packing_bound(remaining, universe);
        if picked.len() + bound >= best.len() {
            return;
        }
        let target = remaining
            .iter()
            .min_by_key(|s| (s.len(), (**s).clone()))
            .unwrap();
        for p in target.iter() {
            picked.push(p);
            let next: Vec<&PointSet> = remaining
                .iter()
                .filter(|s| !s.contains(p))
                .copied()
                .collect();
            recurse(universe, &next, picked, best);
            picked.pop();
        }
    }

    let refs: Vec<&PointSet> = reduced.iter().collect();
    let mut picked = Vec::new();
    recurse(universe, &refs, &mut picked, &mut best);
    best
}

/// A minimum-cardinality cover of the tangle: an exact hitting set over the
/// minimal big sides.
pub fn min_cover(tangle: &Tangle) -> Result<PointSet> {
    let minimals = tangle.minimal_elements();
    if minimals.len() > DEFAULT_COVER_LIMIT {
        return Err(Error::LimitExceeded {
            what: "minimal sides in cover search",
            value: minimals.len(),
            limit: DEFAULT_COVER_LIMIT,
        });
    }
    let universe = tangle.system().ground().size();
    Ok(minimum_hitting_set(universe, &minimals))
}

/// A certified minimum witnessing set: an exact hitting set over the
/// intersections of all `<=3`-subsets of the minimal big sides.
pub fn min_witnessing(tangle: &Tangle) -> Result<WitnessReport> {
    let minimals = tangle.minimal_elements();
    let count = family_size(minimals.len());
    if count > DEFAULT_FAMILY_LIMIT {
        return Err(Error::LimitExceeded {
            what: "triple intersections in witnessing search",
            value: count,
            limit: DEFAULT_FAMILY_LIMIT,
        });
    }
    let family: Vec<PointSet> = triple_family(&minimals)
        .into_iter()
        .map(|(_, cut)| cut)
        .collect();
    let universe = tangle.system().ground().size();
    let set = minimum_hitting_set(universe, &family);
    let check = is_witnessing(tangle, &set)?;
    debug_assert!(check.witnessed);
    Ok(WitnessReport {
        set,
        method: WitnessMethod::Exact,
        certified_minimal: true,
        triple_count: count,
    })
}

/// Fast witnessing upper bound: repeatedly add the point meeting the most
/// still-unwitnessed subset intersections.
pub fn greedy_witnessing(tangle: &Tangle) -> Result<WitnessReport> {
    let minimals = tangle.minimal_elements();
    let count = family_size(minimals.len());
    if count > DEFAULT_FAMILY_LIMIT {
        return Err(Error::LimitExceeded {
            what: "triple intersections in witnessing search",
            value: count,
            limit: DEFAULT_FAMILY_LIMIT,
        });
    }
    let family: Vec<PointSet> = triple_family(&minimals)
        .into_iter()
        .map(|(_, cut)| cut)
        .collect();
    let universe = tangle.system().ground().size();
    let set = greedy_hitting_set(universe, &reduce_family(&family));
    let check = is_witnessing(tangle, &set)?;
    debug_assert!(check.witnessed);
    Ok(WitnessReport {
        set,
        method: WitnessMethod::Greedy,
        certified_minimal: false,
        triple_count: count,
    })
}

/// One partition of the working witness set into three disjoint (possibly
/// empty) parts, with the point assigned to it, if any.
#[derive(Clone, Debug)]
pub struct PartitionTrace {
    pub parts: [PointSet; 3],
    pub point: Option<usize>,
}

/// Per-level record of the inductive construction.
#[derive(Clone, Debug)]
pub struct LevelTrace {
    pub level: usize,
    pub partitions: Vec<PartitionTrace>,
    pub new_points: PointSet,
    pub witness_after: PointSet,
}

#[derive(Clone, Debug)]
pub struct InductiveOutcome {
    pub report: WitnessReport,
    pub trace: Vec<LevelTrace>,
}

/// For one part `X_j`, a big side disjoint from it with minimal order and,
/// subject to that, minimal under inclusion. `None` when no big side avoids
/// `X_j`.
///
/// Submodularity makes this side unique whenever the union corner of two
/// candidates is itself a separation; when that corner degenerates to the
/// whole ground set (it does for empty parts on small instances) several
/// incomparable minima can remain, and the numerically smallest is taken.
fn min_avoiding_side(sides: &[PointSet], orders: &[u64], part: &PointSet) -> Option<PointSet> {
    let min_order = sides
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_disjoint(part))
        .map(|(i, _)| orders[i])
        .min()?;
    let candidates: Vec<&PointSet> = sides
        .iter()
        .enumerate()
        .filter(|(i, s)| orders[*i] == min_order && s.is_disjoint(part))
        .map(|(_, s)| s)
        .collect();
    candidates
        .iter()
        .filter(|s| !candidates.iter().any(|o| o != *s && o.is_subset_of(s)))
        .map(|s| (*s).clone())
        .min()
}

/// Witnessing set by the inductive cover-and-partition construction.
///
/// Starts from a minimum cover `W_k` and, for `3k - 2 - k` levels, assigns
/// to every ordered 3-partition of the working set a point witnessing the
/// cheapest still-open triples compatible with it, then splits each
/// partition three ways around its point. The result is verified
/// witnessing and satisfies the `(3^(3k-2) - 3^k)/2 + k` size bound.
///
/// The tangle must be a `k`-tangle of the separations of order `< k` with
/// the order values attached to its system.
pub fn inductive_witnessing(tangle: &Tangle, k: usize) -> Result<InductiveOutcome> {
    if k == 0 || k > DEFAULT_INDUCTIVE_K_LIMIT {
        return Err(Error::LimitExceeded {
            what: "tangle order in inductive construction",
            value: k,
            limit: DEFAULT_INDUCTIVE_K_LIMIT,
        });
    }
    let orders_attached = tangle.system().orders().ok_or(Error::MissingOrders)?;
    if let Some(&bad) = orders_attached.iter().find(|&&f| f >= k as u64) {
        return Err(Error::NotKTangle {
            k,
            reason: format!("system contains a separation of order {bad}"),
        });
    }
    // Submodularity can only be spot-checked on the restricted system; the
    // corners that stay inside it must already satisfy the inequality.
    let sampled = crate::order::is_submodular(tangle.system(), crate::order::CheckScope::Sampled)?;
    if !sampled.holds {
        return Err(Error::OrderNotSubmodular);
    }
    let sides = tangle.big_sides();
    let orders = orders_attached.to_vec();
    let universe = tangle.system().ground().size();
    let minimals = tangle.minimal_elements();
    let family = triple_family(&minimals);
    let triple_count = family.len();
    let unwitnessed = |w: &PointSet| family.iter().any(|(_, cut)| w.is_disjoint(cut));

    let cover = min_cover(tangle)?;
    if cover.len() > k {
        return Err(Error::NotKTangle {
            k,
            reason: format!("minimum cover has {} > k points", cover.len()),
        });
    }
    let mut witness = cover.clone();
    let mut trace = Vec::new();

    // Ordered 3-partitions of the base cover: one part choice per point.
    let mut partitions: Vec<[PointSet; 3]> = Vec::new();
    if !unwitnessed(&witness) {
        return finish(tangle, witness, trace, triple_count);
    }
    let base_points = cover.indices();
    let mut assignment = vec![0usize; base_points.len()];
    loop {
        let mut parts = [
            PointSet::empty(universe),
            PointSet::empty(universe),
            PointSet::empty(universe),
        ];
        for (pos, &point) in base_points.iter().enumerate() {
            parts[assignment[pos]].insert(point);
        }
        partitions.push(parts);
        // Increment the mixed-radix assignment vector.
        let mut pos = 0;
        loop {
            if pos == assignment.len() {
                break;
            }
            assignment[pos] += 1;
            if assignment[pos] < 3 {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
        if pos == assignment.len() {
            break;
        }
    }

    for level in k..=(3 * k).saturating_sub(3) {
        let mut new_points = PointSet::empty(universe);
        let mut next_partitions: Vec<[PointSet; 3]> = Vec::new();
        let mut seen: BTreeSet<[PointSet; 3]> = BTreeSet::new();
        let mut level_trace = Vec::new();
        for parts in &partitions {
            let picks: Vec<Option<PointSet>> = parts
                .iter()
                .map(|part| min_avoiding_side(&sides, &orders, part))
                .collect();
            // A triple compatible with this partition would make each of its
            // sides a candidate for its slot, so a missing side means no
            // such triple exists and the partition is inert.
            if picks.iter().any(|b| b.is_none()) {
                level_trace.push(PartitionTrace {
                    parts: parts.clone(),
                    point: None,
                });
                continue;
            }
            let mut cut = PointSet::full(universe);
            for b in picks.iter().flatten() {
                cut = cut.intersection(b);
            }
            let point = cut.first().ok_or_else(|| Error::NotKTangle {
                k,
                reason: "avoiding sides with empty intersection".into(),
            })?;
            new_points.insert(point);
            level_trace.push(PartitionTrace {
                parts: parts.clone(),
                point: Some(point),
            });
            for j in 0..3 {
                let mut child = parts.clone();
                child[j].insert(point);
                if seen.insert(child.clone()) {
                    next_partitions.push(child);
                }
            }
        }
        witness = witness.union(&new_points);
        trace.push(LevelTrace {
            level,
            partitions: level_trace,
            new_points,
            witness_after: witness.clone(),
        });
        if !unwitnessed(&witness) {
            break;
        }
        partitions = next_partitions;
    }

    finish(tangle, witness, trace, triple_count)
}

fn finish(
    tangle: &Tangle,
    witness: PointSet,
    trace: Vec<LevelTrace>,
    triple_count: usize,
) -> Result<InductiveOutcome> {
    let check = is_witnessing(tangle, &witness)?;
    if !check.witnessed {
        return Err(Error::NotKTangle {
            k: 0,
            reason: "inductive construction terminated without witnessing; input is not a k-tangle of all separations of order < k".into(),
        });
    }
    Ok(InductiveOutcome {
        report: WitnessReport {
            set: witness,
            method: WitnessMethod::Inductive,
            certified_minimal: false,
            triple_count,
        },
        trace,
    })
}

/// A longest sequence of minimal big sides whose complements' running
/// intersections strictly decrease.
#[derive(Clone, Debug)]
pub struct IntersectionChain {
    pub sides: Vec<PointSet>,
    /// `intersections[i]` is the intersection of the first `i + 1`
    /// complements.
    pub intersections: Vec<PointSet>,
}

impl IntersectionChain {
    pub fn len(&self) -> usize {
        self.sides.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sides.is_empty()
    }
}

/// Longest intersection chain, by depth-first search over the minimal big
/// sides memoized on the running intersection mask. Appending side `A` to a
/// chain with running intersection `I` is allowed iff `I ∩ A` is nonempty,
/// which is exactly strict descent of `I ∩ A^c`.
pub fn max_intersection_chain(tangle: &Tangle) -> Result<IntersectionChain> {
    let minimals = tangle.minimal_elements();
    if minimals.len() > DEFAULT_CHAIN_LIMIT {
        return Err(Error::LimitExceeded {
            what: "minimal sides in chain search",
            value: minimals.len(),
            limit: DEFAULT_CHAIN_LIMIT,
        });
    }
    let universe = tangle.system().ground().size();
    let complements: Vec<PointSet> = minimals.iter().map(|a| a.complement()).collect();

    fn longest(
        current: &PointSet,
        minimals: &[PointSet],
        complements: &[PointSet],
        memo: &mut HashMap<PointSet, usize>,
    ) -> usize {
        if let Some(&v) = memo.get(current) {
            return v;
        }
        let mut best = 0;
        for (i, side) in minimals.iter().enumerate() {
            if !current.is_disjoint(side) {
                let next = current.intersection(&complements[i]);
                let v = 1 + longest(&next, minimals, complements, memo);
                if v > best {
                    best = v;
                }
            }
        }
        memo.insert(current.clone(), best);
        best
    }

    let mut memo = HashMap::new();
    let full = PointSet::full(universe);
    let total = longest(&full, &minimals, &complements, &mut memo);

    // Reconstruct one optimal chain by following the memo greedily,
    // preferring the smallest side index.
    let mut sides = Vec::with_capacity(total);
    let mut intersections = Vec::with_capacity(total);
    let mut current = full;
    for remaining in (1..=total).rev() {
        let mut advanced = false;
        for (i, side) in minimals.iter().enumerate() {
            if current.is_disjoint(side) {
                continue;
            }
            let next = current.intersection(&complements[i]);
            if 1 + memo.get(&next).copied().unwrap_or(0) == remaining {
                sides.push(minimals[i].clone());
                intersections.push(next.clone());
                current = next;
                advanced = true;
                break;
            }
        }
        debug_assert!(advanced, "memo reconstruction must advance");
    }
    Ok(IntersectionChain {
        sides,
        intersections,
    })
}

/// A closed-form bound value; `Overflow` when it exceeds `u128`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundValue {
    Exact(u128),
    Overflow,
}

impl BoundValue {
    pub fn exact(&self) -> Option<u128> {
        match self {
            BoundValue::Exact(v) => Some(*v),
            BoundValue::Overflow => None,
        }
    }
}

/// The witnessing-size bounds for tangles of order `k`.
#[derive(Clone, Copy, Debug)]
pub struct WitnessBounds {
    /// Tower-recursive bound `theta(3k - 2)` with
    /// `theta(i + 1) = theta(i) + 3^theta(i)`; overflows almost immediately.
    pub gs_theta: BoundValue,
    /// `(3^(3k-2) - 3^k)/2 + k`, the bound met by the inductive
    /// construction.
    pub first_bound: BoundValue,
    /// `(3^k - 1)/2`, the sharper exponential bound.
    pub second_bound: BoundValue,
    /// `C(k, 3)`, the largest known lower bound.
    pub lower_bound_choose: BoundValue,
}

fn pow3(e: u128) -> Option<u128> {
    if e > u32::MAX as u128 {
        return None;
    }
    3u128.checked_pow(e as u32)
}

/// Evaluates all bound formulas for order `k >= 1`.
pub fn bound_values(k: u32) -> Result<WitnessBounds> {
    if k == 0 {
        return Err(Error::InvalidParam("order k must be at least 1".into()));
    }
    let k = k as u128;
    let mut theta: Option<u128> = Some(0);
    for _ in 0..(3 * k - 2) {
        theta = theta.and_then(|t| pow3(t).and_then(|p| t.checked_add(p)));
    }
    let first = pow3(3 * k - 2)
        .and_then(|a| pow3(k).map(|b| (a - b) / 2))
        .and_then(|h| h.checked_add(k));
    let second = pow3(k).map(|p| (p - 1) / 2);
    let choose = if k < 3 {
        Some(0)
    } else {
        k.checked_mul(k - 1)
            .and_then(|v| v.checked_mul(k - 2))
            .map(|v| v / 6)
    };
    let wrap = |o: Option<u128>| o.map_or(BoundValue::Overflow, BoundValue::Exact);
    Ok(WitnessBounds {
        gs_theta: wrap(theta),
        first_bound: wrap(first),
        second_bound: wrap(second),
        lower_bound_choose: wrap(choose),
    })
}
