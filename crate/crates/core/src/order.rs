//! Order functions on separation systems: submodularity checking, the
//! `S_k` restriction, the canonical extension of a tangle to all
//! separations of the ground set, and fake-tangle detection.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::point_set::PointSet;
use crate::tangle::{extend_cuts, SeparationSystem, Tangle};
use crate::{Error, Result};

/// Ground-size cap for enumerating all nontrivial separations of `V`.
pub const DEFAULT_EXTENSION_POINT_LIMIT: usize = 20;
/// Ground-size cap for the fake-tangle backtracking search.
pub const DEFAULT_FAKE_POINT_LIMIT: usize = 16;

/// `min(|A|, |A^c|)` for every separation of the system. Submodular when
/// taken over all separations of the ground set.
pub fn min_side_order(system: &SeparationSystem) -> Vec<u64> {
    let n = system.ground().size() as u64;
    system
        .sides()
        .iter()
        .map(|a| {
            let s = a.len() as u64;
            s.min(n - s)
        })
        .collect()
}

/// How much of the pair space a submodularity check covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckScope {
    /// The system must carry every nontrivial separation of the ground set;
    /// every corner then has an order (trivial corners count as order 0).
    Full,
    /// Pairs whose corners are missing from the system are skipped and
    /// counted instead of failing the precondition.
    Sampled,
}

/// Result of a submodularity check. `violation` is the first side pair
/// (in deterministic iteration order) with
/// `f(A ∩ B) + f(A ∪ B) > f(A) + f(B)`.
#[derive(Clone, Debug)]
pub struct SubmodularityReport {
    pub holds: bool,
    pub violation: Option<(PointSet, PointSet)>,
    pub skipped_pairs: usize,
}

/// Order of a corner set under the system's assignment: attached value if
/// the separation is stored, 0 if the corner is trivial, `None` otherwise.
fn corner_order(system: &SeparationSystem, orders: &[u64], corner: &PointSet) -> Option<u64> {
    if corner.is_empty() || corner.is_full() {
        return Some(0);
    }
    system.find(corner).map(|i| orders[i])
}

/// Checks `f(A ∩ B) + f(A ∪ B) <= f(A) + f(B)` over side pairs of the
/// system. Trivial corners are assigned order 0.
pub fn is_submodular(system: &SeparationSystem, scope: CheckScope) -> Result<SubmodularityReport> {
    let orders = system.orders().ok_or(Error::MissingOrders)?;
    let n = system.ground().size();
    if scope == CheckScope::Full {
        if n > 64 {
            return Err(Error::LimitExceeded {
                what: "ground points in full submodularity check",
                value: n,
                limit: 64,
            });
        }
        let expected: u128 = (1u128 << (n - 1)) - 1;
        if system.len() as u128 != expected {
            return Err(Error::InvalidParam(format!(
                "full submodularity check needs all {expected} nontrivial separations, system has {}",
                system.len()
            )));
        }
    }
    let mut sides = Vec::with_capacity(2 * system.len());
    for (i, canon) in system.sides().iter().enumerate() {
        sides.push((canon.clone(), orders[i]));
        sides.push((canon.complement(), orders[i]));
    }
    let mut skipped = 0usize;
    for i in 0..sides.len() {
        for j in i + 1..sides.len() {
            let (a, fa) = &sides[i];
            let (b, fb) = &sides[j];
            let cut = a.intersection(b);
            let join = a.union(b);
            match (
                corner_order(system, orders, &cut),
                corner_order(system, orders, &join),
            ) {
                (Some(fc), Some(fj)) => {
                    if fc + fj > fa + fb {
                        return Ok(SubmodularityReport {
                            holds: false,
                            violation: Some((a.clone(), b.clone())),
                            skipped_pairs: skipped,
                        });
                    }
                }
                _ => skipped += 1,
            }
        }
    }
    Ok(SubmodularityReport {
        holds: true,
        violation: None,
        skipped_pairs: skipped,
    })
}

/// The subsystem of separations with order `< k`, preserving order values.
/// Also returns the indices the retained separations had in the input.
pub fn restrict_sk(system: &SeparationSystem, k: u64) -> Result<(SeparationSystem, Vec<usize>)> {
    let orders = system.orders().ok_or(Error::MissingOrders)?;
    let mut sides = Vec::new();
    let mut kept_orders = Vec::new();
    let mut retained = Vec::new();
    for (i, side) in system.sides().iter().enumerate() {
        if orders[i] < k {
            sides.push(side.clone());
            kept_orders.push(orders[i]);
            retained.push(i);
        }
    }
    let (sub, _) = SeparationSystem::new(system.ground().clone(), &sides)?;
    Ok((sub.with_orders(kept_orders)?, retained))
}

/// Whether for every two sides of the system at least one corner is again
/// in the system or trivial.
pub fn corner_closure_check(system: &SeparationSystem) -> bool {
    let mut sides = Vec::with_capacity(2 * system.len());
    for canon in system.sides() {
        sides.push(canon.clone());
        sides.push(canon.complement());
    }
    for i in 0..sides.len() {
        for j in i + 1..sides.len() {
            let cut = sides[i].intersection(&sides[j]);
            let join = sides[i].union(&sides[j]);
            let ok = |s: &PointSet| s.is_empty() || s.is_full() || system.find(s).is_some();
            if !ok(&cut) && !ok(&join) {
                return false;
            }
        }
    }
    true
}

/// Output of [`extend_order`]: the order function over all nontrivial
/// separations of the ground set, and the extension tangle it induces.
#[derive(Clone, Debug)]
pub struct Extension {
    /// Number of minimal oriented separations of the base tangle.
    pub k: usize,
    /// The minimal big sides `A_1 .. A_k` of the base tangle.
    pub base_minimals: Vec<PointSet>,
    /// For each point `v`, the indices `{j : v in A_j}`.
    pub point_types: Vec<Vec<usize>>,
    /// All nontrivial separations of the ground set with the extension
    /// order attached.
    pub star_system: SeparationSystem,
    /// The extension tangle over the separations of order `< k`.
    pub star_tangle: Tangle,
    /// Indices into `star_system` of the separations the tangle orients.
    pub sk_indices: Vec<usize>,
}

/// Extends a tangle with `k` minimal oriented separations to a `k`-tangle
/// over all separations of the ground set.
///
/// For a separation `s = {A, A^c}`, the side containing all points that
/// touch an index set `U ⊆ {1..k}` is `A` iff every `A_j`, `j in U`, is a
/// subset of `A`; so the maximum such `U` per side is `{j : A_j ⊆ side}`
/// and the order is `k` minus the larger count. Separations of order `< k`
/// are oriented toward their nonempty-`U` side; both sides nonempty cannot
/// happen for a consistent base.
pub fn extend_order(base: &Tangle, limit_points: usize) -> Result<Extension> {
    let ground = base.system().ground().clone();
    let n = ground.size();
    let minimals = base.minimal_elements();
    let k = minimals.len();
    let star = SeparationSystem::all_separations(ground, limit_points)?;

    let point_types: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            (0..k)
                .filter(|&j| minimals[j].contains(v))
                .collect()
        })
        .collect();

    let mut orders = Vec::with_capacity(star.len());
    let mut toward_canonical = Vec::with_capacity(star.len());
    for canon in star.sides() {
        let comp = canon.complement();
        let u_canon = minimals.iter().filter(|a| a.is_subset_of(canon)).count();
        let u_comp = minimals.iter().filter(|a| a.is_subset_of(&comp)).count();
        debug_assert!(
            u_canon == 0 || u_comp == 0,
            "two minimal sides on opposite sides of one separation"
        );
        orders.push((k - u_canon.max(u_comp)) as u64);
        toward_canonical.push(u_canon >= u_comp);
    }
    let star_system = star.with_orders(orders)?;
    let (sk_system, sk_indices) = restrict_sk(&star_system, k as u64)?;
    let orientation: Vec<bool> = sk_indices.iter().map(|&i| toward_canonical[i]).collect();
    // Any three extension big sides contain three base minimal sides, whose
    // intersection is nonempty; skip the cubic recheck on large systems.
    let star_tangle = Tangle::new_unchecked(Arc::new(sk_system), orientation);
    Ok(Extension {
        k,
        base_minimals: minimals,
        point_types,
        star_system,
        star_tangle,
        sk_indices,
    })
}

/// Whether a tangle over a subsystem fails to extend to a `k`-tangle of all
/// separations of order `< k` of the ground set.
///
/// `full_system` must carry every nontrivial separation of `V` with orders
/// attached. Decided by backtracking over the orientations of the missing
/// separations with consistency pruning; `true` means the search exhausted
/// without finding an extension.
pub fn is_fake(
    tangle: &Tangle,
    full_system: &SeparationSystem,
    k: u64,
    limit_points: usize,
) -> Result<bool> {
    let n = tangle.system().ground().size();
    if n > limit_points.min(64) {
        return Err(Error::LimitExceeded {
            what: "ground points in fake-tangle search",
            value: n,
            limit: limit_points.min(64),
        });
    }
    if full_system.ground().size() != n {
        return Err(Error::GroundMismatch {
            left: full_system.ground().size(),
            right: n,
        });
    }
    let orders = full_system.orders().ok_or(Error::MissingOrders)?;
    let expected: u128 = (1u128 << (n - 1)) - 1;
    if full_system.len() as u128 != expected {
        return Err(Error::InvalidParam(format!(
            "fake-tangle search needs all {expected} nontrivial separations, got {}",
            full_system.len()
        )));
    }

    // Indices of order-< k separations already oriented by the tangle.
    let mut oriented = BTreeSet::new();
    for i in 0..tangle.len() {
        let side = tangle.big_side(i)?;
        match full_system.find(&side) {
            Some(fi) if orders[fi] < k => {
                oriented.insert(fi);
            }
            Some(fi) => {
                return Err(Error::NotKTangle {
                    k: k as usize,
                    reason: format!("tangle orients a separation of order {}", orders[fi]),
                })
            }
            None => unreachable!("full system misses a nontrivial separation"),
        }
    }
    let free: Vec<PointSet> = (0..full_system.len())
        .filter(|i| orders[*i] < k && !oriented.contains(i))
        .map(|i| full_system.sides()[i].clone())
        .collect();

    // Seed the search with the tangle's big sides; they are consistent by
    // construction.
    let mut chosen: Vec<PointSet> = Vec::new();
    let mut pair_cuts: Vec<Vec<PointSet>> = Vec::new();
    for i in 0..tangle.len() {
        let side = tangle.big_side(i)?;
        let cuts = extend_cuts(&chosen, &pair_cuts, &side)
            .expect("tangle big sides are mutually consistent");
        chosen.push(side);
        pair_cuts.push(cuts);
    }

    fn completes(
        free: &[PointSet],
        depth: usize,
        chosen: &mut Vec<PointSet>,
        pair_cuts: &mut Vec<Vec<PointSet>>,
    ) -> bool {
        if depth == free.len() {
            return true;
        }
        let canon = &free[depth];
        for side in [canon.clone(), canon.complement()] {
            if let Some(cuts) = extend_cuts(chosen, pair_cuts, &side) {
                chosen.push(side);
                pair_cuts.push(cuts);
                if completes(free, depth + 1, chosen, pair_cuts) {
                    return true;
                }
                pair_cuts.pop();
                chosen.pop();
            }
        }
        false
    }

    Ok(!completes(&free, 0, &mut chosen, &mut pair_cuts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tangle::GroundSet;

    fn ps(n: usize, ix: &[usize]) -> PointSet {
        PointSet::from_indices(n, ix.iter().copied())
    }

    fn full_min_side(n: usize) -> SeparationSystem {
        let sys = SeparationSystem::all_separations(GroundSet::new(n).unwrap(), 20).unwrap();
        let orders = min_side_order(&sys);
        sys.with_orders(orders).unwrap()
    }

    fn t4_base() -> Tangle {
        let ground = GroundSet::new(4).unwrap();
        let sides = vec![
            ps(4, &[0, 1, 2]),
            ps(4, &[0, 1, 3]),
            ps(4, &[0, 2, 3]),
            ps(4, &[1, 2, 3]),
        ];
        let (sys, _) = SeparationSystem::new(ground, &sides).unwrap();
        let sys = Arc::new(sys);
        let orientation: Vec<bool> = sides
            .iter()
            .enumerate()
            .map(|(i, a)| sys.sides()[i] == *a)
            .collect();
        Tangle::new(sys, orientation).unwrap()
    }

    #[test]
    fn min_side_values() {
        let (sys, _) = SeparationSystem::new(
            GroundSet::new(4).unwrap(),
            &[ps(4, &[0]), ps(4, &[0, 1])],
        )
        .unwrap();
        assert_eq!(min_side_order(&sys), vec![1, 2]);
        let (sys6, _) =
            SeparationSystem::new(GroundSet::new(6).unwrap(), &[ps(6, &[0, 1, 2, 3])]).unwrap();
        assert_eq!(min_side_order(&sys6), vec![2]);
    }

    #[test]
    fn min_side_is_submodular_full() {
        for n in 3..=6 {
            let sys = full_min_side(n);
            let report = is_submodular(&sys, CheckScope::Full).unwrap();
            assert!(report.holds, "min-side order must be submodular for n={n}");
            assert_eq!(report.skipped_pairs, 0);
        }
    }

    #[test]
    fn zero_order_is_submodular() {
        let sys = SeparationSystem::all_separations(GroundSet::new(4).unwrap(), 20).unwrap();
        let m = sys.len();
        let sys = sys.with_orders(vec![0; m]).unwrap();
        assert!(is_submodular(&sys, CheckScope::Full).unwrap().holds);
    }

    #[test]
    fn spiked_order_violates_at_the_spiked_union() {
        // f({0}) = f({1}) = 0 but f({0,1}) = 5 breaks the corner inequality.
        let sys = SeparationSystem::all_separations(GroundSet::new(4).unwrap(), 20).unwrap();
        let orders: Vec<u64> = sys
            .sides()
            .iter()
            .map(|s| {
                if *s == ps(4, &[0, 1]) || *s == ps(4, &[2, 3]) {
                    5
                } else {
                    0
                }
            })
            .collect();
        let sys = sys.with_orders(orders).unwrap();
        let report = is_submodular(&sys, CheckScope::Full).unwrap();
        assert!(!report.holds);
        let (a, b) = report.violation.unwrap();
        let cut = a.intersection(&b);
        let join = a.union(&b);
        let canonical_join = crate::tangle::canonical_side(&join);
        assert!(
            canonical_join == ps(4, &[0, 1]) || crate::tangle::canonical_side(&cut) == ps(4, &[0, 1])
        );
    }

    #[test]
    fn sampled_scope_skips_missing_corners() {
        // Two separations whose union corner is not in the system.
        let (sys, _) = SeparationSystem::new(
            GroundSet::new(4).unwrap(),
            &[ps(4, &[0]), ps(4, &[1])],
        )
        .unwrap();
        let sys = sys.with_orders(vec![1, 1]).unwrap();
        let report = is_submodular(&sys, CheckScope::Sampled).unwrap();
        assert!(report.holds);
        assert!(report.skipped_pairs > 0);
    }

    #[test]
    fn restrict_sk_of_min_side_n4_k2() {
        let sys = full_min_side(4);
        let (sub, retained) = restrict_sk(&sys, 2).unwrap();
        assert_eq!(sub.len(), 4);
        assert_eq!(retained.len(), 4);
        for side in sub.sides() {
            assert_eq!(side.len().min(4 - side.len()), 1);
        }
    }

    #[test]
    fn restrict_sk_zero_is_empty() {
        let sys = full_min_side(4);
        let (sub, _) = restrict_sk(&sys, 0).unwrap();
        assert!(sub.is_empty());
    }

    #[test]
    fn restrict_is_monotone() {
        let sys = full_min_side(6);
        let (s2, _) = restrict_sk(&sys, 2).unwrap();
        let (s3, _) = restrict_sk(&sys, 3).unwrap();
        for side in s2.sides() {
            assert!(s3.find(side).is_some());
        }
    }

    #[test]
    fn sk_of_min_side_is_corner_closed() {
        for (n, k) in [(4, 2u64), (7, 3)] {
            let sys = full_min_side(n);
            let (sub, _) = restrict_sk(&sys, k).unwrap();
            assert!(corner_closure_check(&sub), "S*_{k} over {n} points");
        }
    }

    #[test]
    fn extend_t4_orders_and_tangle() {
        let base = t4_base();
        let ext = extend_order(&base, 20).unwrap();
        assert_eq!(ext.k, 4);
        // Singleton splits carry order 3, the 2|2 splits order 4.
        let orders = ext.star_system.orders().unwrap();
        for (i, side) in ext.star_system.sides().iter().enumerate() {
            let small = side.len().min(4 - side.len());
            assert_eq!(orders[i], if small == 1 { 3 } else { 4 });
        }
        // The k-restriction keeps exactly the four original separations.
        assert_eq!(ext.star_tangle.len(), 4);
        let report = is_submodular(&ext.star_system, CheckScope::Full).unwrap();
        assert!(report.holds);
    }

    #[test]
    fn extension_preserves_base_and_minimals() {
        let base = t4_base();
        let ext = extend_order(&base, 20).unwrap();
        let star_sides = ext.star_tangle.big_sides();
        for i in 0..base.len() {
            let side = base.big_side(i).unwrap();
            assert!(star_sides.contains(&side), "base side lost by extension");
        }
        let mut base_min = base.minimal_elements();
        let mut star_min = ext.star_tangle.minimal_elements();
        base_min.sort();
        star_min.sort();
        assert_eq!(base_min, star_min);
    }

    #[test]
    fn extension_fstar_below_k_iff_u_nonempty() {
        let base = t4_base();
        let ext = extend_order(&base, 20).unwrap();
        let orders = ext.star_system.orders().unwrap();
        for (i, side) in ext.star_system.sides().iter().enumerate() {
            let comp = side.complement();
            let u = ext
                .base_minimals
                .iter()
                .any(|a| a.is_subset_of(side) || a.is_subset_of(&comp));
            assert_eq!(orders[i] < ext.k as u64, u);
        }
    }

    /// Orienting every singleton split of a 4-point set toward its 3-set is
    /// consistent on those four separations but cannot be completed over the
    /// halving separations: with all four 3-sets big, both sides of
    /// `{0,1}|{2,3}` close off some triple.
    #[test]
    fn all_big_m2_tangle_is_fake_at_order_zero() {
        let ground = GroundSet::new(4).unwrap();
        let sides: Vec<PointSet> = (0..4).map(|v| PointSet::singleton(4, v)).collect();
        let (sys, _) = SeparationSystem::new(ground, &sides).unwrap();
        let sys = Arc::new(sys);
        // Orient every separation toward its 3-element side.
        let orientation: Vec<bool> = sys.sides().iter().map(|c| c.len() == 3).collect();
        let tangle = Tangle::new(Arc::clone(&sys), orientation).unwrap();

        let full = SeparationSystem::all_separations(GroundSet::new(4).unwrap(), 20).unwrap();
        let m = full.len();
        let full = full.with_orders(vec![0; m]).unwrap();
        assert!(is_fake(&tangle, &full, 1, 16).unwrap());

        // The principal tangle at point 0 over the same subsystem extends.
        let principal = crate::tangle::principal_tangle(&sys, 0).unwrap();
        assert!(!is_fake(&principal, &full, 1, 16).unwrap());
    }

    #[test]
    fn same_tangle_is_not_fake_under_min_side_order() {
        // Under the min-side order with k = 2, S*_2 is exactly the four
        // singleton splits, so there is nothing left to orient.
        let ground = GroundSet::new(4).unwrap();
        let sides: Vec<PointSet> = (0..4).map(|v| PointSet::singleton(4, v)).collect();
        let (sys, _) = SeparationSystem::new(ground, &sides).unwrap();
        let sys = Arc::new(sys);
        let orientation: Vec<bool> = sys.sides().iter().map(|c| c.len() == 3).collect();
        let tangle = Tangle::new(sys, orientation).unwrap();
        let full = full_min_side(4);
        assert!(!is_fake(&tangle, &full, 2, 16).unwrap());
    }

    #[test]
    fn extension_tangle_is_not_fake() {
        let base = t4_base();
        let ext = extend_order(&base, 20).unwrap();
        assert!(!is_fake(&ext.star_tangle, &ext.star_system, ext.k as u64, 16).unwrap());
    }
}
