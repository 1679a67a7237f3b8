//! Constructors for the standard worked instances. Every generator returns
//! a consistent tangle plus the named sets and parameters the instance is
//! known by, so the same fixtures serve the tests, the CLI and the JSON
//! output.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::order::{min_side_order, restrict_sk};
use crate::point_set::PointSet;
use crate::tangle::{enumerate_tangles, principal_tangle, GroundSet, SeparationSystem, Tangle};
use crate::{Error, Result};

/// Identification of a generated instance.
#[derive(Clone, Debug)]
pub struct BundleMeta {
    pub example: String,
    pub params: BTreeMap<String, i64>,
    pub flags: Vec<String>,
}

/// A generated system with its tangle, named point sets and parameters.
#[derive(Clone, Debug)]
pub struct InstanceBundle {
    pub system: Arc<SeparationSystem>,
    pub tangle: Tangle,
    pub designated: BTreeMap<String, PointSet>,
    /// Separation-index triples highlighted by the instance, if any.
    pub spread_triples: Option<Vec<[usize; 3]>>,
    pub meta: BundleMeta,
}

/// All size-`m` subsets of `{0..n-1}` in lexicographic order.
fn subsets_of_size(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    let mut current: Vec<usize> = (0..m).collect();
    loop {
        out.push(current.clone());
        // advance to the next combination
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] != i + n - m {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        current[i] += 1;
        for j in i + 1..m {
            current[j] = current[j - 1] + 1;
        }
    }
}

fn subset_label(elements: &[usize]) -> String {
    if elements.iter().all(|&e| e <= 9) {
        elements.iter().map(|e| e.to_string()).collect()
    } else {
        elements
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

/// Orientation vector putting the given big sides on top; the sides must
/// map one-to-one onto the system's separations.
fn orient_toward(system: &Arc<SeparationSystem>, big_sides: &[PointSet]) -> Result<Tangle> {
    let mut orientation = vec![false; system.len()];
    for side in big_sides {
        let i = system.find(side).ok_or_else(|| {
            Error::InvalidParam("big side does not belong to the system".into())
        })?;
        orientation[i] = system.sides()[i] == *side;
    }
    Tangle::new(Arc::clone(system), orientation)
}

/// The sharp-cover instance: `3k - 2` points, the separations of min-side
/// order below `k`, oriented toward the larger side.
///
/// For `k = 1` there are no such separations; the bundle degenerates to an
/// empty system over two points and is flagged. For `k > 6` the full
/// separation set is too large to materialize, so only the restriction is
/// built directly and flagged.
pub fn gen_min_order(k: u64) -> Result<InstanceBundle> {
    if k == 0 {
        return Err(Error::InvalidParam("order k must be at least 1".into()));
    }
    let n = ((3 * k).saturating_sub(2) as usize).max(2);
    let mut flags = Vec::new();
    let system = if k <= 6 {
        let full = SeparationSystem::all_separations(GroundSet::new(n)?, 20)?;
        let orders = min_side_order(&full);
        let full = full.with_orders(orders)?;
        let (sk, _) = restrict_sk(&full, k)?;
        sk
    } else {
        flags.push("sk-only".to_string());
        let mut sides = Vec::new();
        for size in 1..k as usize {
            for subset in subsets_of_size(n, size) {
                sides.push(PointSet::from_indices(n, subset));
            }
        }
        let (sys, _) = SeparationSystem::new(GroundSet::new(n)?, &sides)?;
        let orders = min_side_order(&sys);
        sys.with_orders(orders)?
    };
    if system.is_empty() {
        flags.push("degenerate".to_string());
    }
    let system = Arc::new(system);
    let orientation: Vec<bool> = system
        .sides()
        .iter()
        .map(|c| 2 * c.len() > n)
        .collect();
    // Consistent by counting: three complements of size < k cannot cover
    // the 3k - 2 points. The checked constructor would be cubic in the
    // separation count, which is exponential in k here.
    let tangle = Tangle::new_unchecked(Arc::clone(&system), orientation);
    Ok(InstanceBundle {
        system,
        tangle,
        designated: BTreeMap::new(),
        spread_triples: None,
        meta: BundleMeta {
            example: "minorder".into(),
            params: BTreeMap::from([("k".into(), k as i64), ("n".into(), n as i64)]),
            flags,
        },
    })
}

/// The triple-hypergraph instance: points are the 3-subsets of `{1..k}`,
/// separation `j` collects the points containing `j`, and the tangle takes
/// all of them. Its smallest witnessing set is the whole ground set.
pub fn gen_triples(k: u64) -> Result<InstanceBundle> {
    if k < 4 {
        return Err(Error::InvalidParam(
            "triple instance needs k >= 4".into(),
        ));
    }
    if k > 12 {
        return Err(Error::LimitExceeded {
            what: "k in triple instance",
            value: k as usize,
            limit: 12,
        });
    }
    let k = k as usize;
    let triples = subsets_of_size(k, 3);
    let n = triples.len();
    let labels: Vec<String> = triples
        .iter()
        .map(|t| subset_label(&t.iter().map(|e| e + 1).collect::<Vec<_>>()))
        .collect();
    let ground = GroundSet::with_labels(n, labels)?;
    let sides: Vec<PointSet> = (0..k)
        .map(|j| {
            PointSet::from_indices(
                n,
                triples
                    .iter()
                    .enumerate()
                    .filter(|(_, t)| t.contains(&j))
                    .map(|(v, _)| v),
            )
        })
        .collect();
    let (system, mapping) = SeparationSystem::new(ground, &sides)?;
    if system.len() != k || mapping.len() != k {
        return Err(Error::InvalidParam("separations collapsed".into()));
    }
    let system = Arc::new(system);
    let tangle = orient_toward(&system, &sides)?;
    Ok(InstanceBundle {
        system,
        tangle,
        designated: BTreeMap::new(),
        spread_triples: None,
        meta: BundleMeta {
            example: "triples".into(),
            params: BTreeMap::from([("k".into(), k as i64), ("n".into(), n as i64)]),
            flags: Vec::new(),
        },
    })
}

/// Shared construction of the cyclic-arc instances: the ground set is the
/// union of a family `W` of subsets of `Z_n` and `n` tagged arcs of
/// `arc_len` consecutive residues; separation `j` collects the points whose
/// residue set contains `j`.
fn arcs_instance(
    example: &str,
    n: usize,
    w_size: usize,
    arc_len: usize,
    k: usize,
) -> Result<InstanceBundle> {
    if arc_len == 0 || arc_len > n {
        return Err(Error::InvalidParam(format!(
            "arc length must lie in 1..={n}"
        )));
    }
    let w_sets = subsets_of_size(n, w_size);
    let mut residues: Vec<Vec<usize>> = w_sets.clone();
    let mut labels: Vec<String> = w_sets.iter().map(|t| subset_label(t)).collect();
    for j in 0..n {
        let arc: Vec<usize> = (0..arc_len).map(|d| (j + d) % n).collect();
        let mut sorted = arc.clone();
        sorted.sort_unstable();
        residues.push(sorted);
        labels.push(format!("arc{j}"));
    }
    let total = residues.len();
    let ground = GroundSet::with_labels(total, labels)?;
    let sides: Vec<PointSet> = (0..n)
        .map(|j| {
            PointSet::from_indices(
                total,
                residues
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.contains(&j))
                    .map(|(v, _)| v),
            )
        })
        .collect();
    let (system, _) = SeparationSystem::new(ground, &sides)?;
    if system.len() != n {
        return Err(Error::InvalidParam("arc separations collapsed".into()));
    }
    let system = Arc::new(system);
    let tangle = orient_toward(&system, &sides)?;
    let w_points = PointSet::from_indices(total, 0..w_sets.len());
    let g_points = PointSet::from_indices(total, w_sets.len()..total);
    Ok(InstanceBundle {
        system,
        tangle,
        designated: BTreeMap::from([("W".to_string(), w_points), ("G".to_string(), g_points)]),
        spread_triples: None,
        meta: BundleMeta {
            example: example.into(),
            params: BTreeMap::from([
                ("n".into(), n as i64),
                ("k".into(), k as i64),
                ("arc_len".into(), arc_len as i64),
            ]),
            flags: Vec::new(),
        },
    })
}

/// The guiding-without-witnessing instance: `W` holds the `(k-1)`-subsets
/// of `Z_n` with `k = 2n/3`, `G` the `n` arcs. `G` guides the tangle with
/// the maximum reliability `k/n` but misses some separation triples.
pub fn gen_arcs(n: usize, arc_len: Option<usize>) -> Result<InstanceBundle> {
    if n < 6 || n % 3 != 0 {
        return Err(Error::InvalidParam(
            "arc instance needs n >= 6 divisible by 3".into(),
        ));
    }
    let k = 2 * n / 3;
    arcs_instance("arcs", n, k - 1, arc_len.unwrap_or(k), k)
}

/// The no-witnessing-and-guiding-set instance: as [`gen_arcs`] but `W`
/// holds all 3-subsets of `Z_n` with `n = 2k - 1`. Also emits the `n`
/// spread separation triples whose unique witnesses force any witnessing
/// set to take many points of `W`.
pub fn gen_arcs_witness(k: usize, arc_len: Option<usize>) -> Result<InstanceBundle> {
    if k < 5 || (2 * k - 1) % 3 != 0 {
        return Err(Error::InvalidParam(
            "arc witness instance needs k >= 5 with 3 | (2k - 1)".into(),
        ));
    }
    let n = 2 * k - 1;
    let mut bundle = arcs_instance("arcs-witness", n, 3, arc_len.unwrap_or(k), k)?;
    let spread: Vec<[usize; 3]> = (0..n)
        .map(|j| [j, (j + n / 3 + 1) % n, (j + 2 * n / 3 + 2) % n])
        .collect();
    bundle.spread_triples = Some(spread);
    Ok(bundle)
}

/// Seeded random instance: `m` distinct nontrivial separations over `n`
/// points, with the first consistent orientation found by enumeration as
/// the tangle (the principal tangle at point 0 as a fallback).
pub fn gen_random(n: usize, m: usize, seed: u64) -> Result<InstanceBundle> {
    if n == 0 || n > 64 {
        return Err(Error::InvalidParam("random instance needs 1 <= n <= 64".into()));
    }
    if m > 24 {
        return Err(Error::LimitExceeded {
            what: "separations in random instance",
            value: m,
            limit: 24,
        });
    }
    let capacity = if n >= 2 { (1u128 << (n - 1)) - 1 } else { 0 };
    if m as u128 > capacity {
        return Err(Error::InvalidParam(format!(
            "only {capacity} distinct separations exist over {n} points"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full_mask: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut seen = std::collections::BTreeSet::new();
    let mut sides = Vec::new();
    while sides.len() < m {
        let mask = rng.next_u64() & full_mask;
        if mask == 0 || mask == full_mask {
            continue;
        }
        let side = PointSet::from_indices(n, (0..n).filter(|i| mask >> i & 1 == 1));
        let canon = crate::tangle::canonical_side(&side);
        if seen.insert(canon.clone()) {
            sides.push(canon);
        }
    }
    let (system, _) = SeparationSystem::new(GroundSet::new(n)?, &sides)?;
    let system = Arc::new(system);
    let tangle = match enumerate_tangles(&system, 24)?.into_iter().next() {
        Some(t) => t,
        None => principal_tangle(&system, 0)?,
    };
    Ok(InstanceBundle {
        system,
        tangle,
        designated: BTreeMap::new(),
        spread_triples: None,
        meta: BundleMeta {
            example: "random".into(),
            params: BTreeMap::from([
                ("n".into(), n as i64),
                ("m".into(), m as i64),
                ("seed".into(), seed as i64),
            ]),
            flags: Vec::new(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guide::set_reliability;
    use crate::lp::rat;
    use crate::tangle::is_consistent;
    use crate::witness::is_witnessing;

    #[test]
    fn subsets_enumeration() {
        assert_eq!(subsets_of_size(4, 3).len(), 4);
        assert_eq!(subsets_of_size(6, 3).len(), 20);
        assert_eq!(
            subsets_of_size(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert!(subsets_of_size(2, 3).is_empty());
    }

    #[test]
    fn min_order_shapes() {
        let b = gen_min_order(2).unwrap();
        assert_eq!(b.system.ground().size(), 4);
        assert_eq!(b.system.len(), 4);
        assert!(is_consistent(&b.system, b.tangle.orientation())
            .unwrap()
            .holds());

        let b3 = gen_min_order(3).unwrap();
        assert_eq!(b3.system.ground().size(), 7);
        assert_eq!(b3.system.len(), 7 + 21);
    }

    #[test]
    fn min_order_degenerate_k1() {
        let b = gen_min_order(1).unwrap();
        assert_eq!(b.system.ground().size(), 2);
        assert!(b.system.is_empty());
        assert!(b.meta.flags.iter().any(|f| f == "degenerate"));
    }

    #[test]
    fn min_order_large_k_is_sk_only() {
        let b = gen_min_order(7).unwrap();
        assert!(b.meta.flags.iter().any(|f| f == "sk-only"));
        assert_eq!(b.system.ground().size(), 19);
        let orders = b.system.orders().unwrap();
        assert!(orders.iter().all(|&f| f < 7));
    }

    #[test]
    fn triples_shape_and_witnessing() {
        let b = gen_triples(4).unwrap();
        assert_eq!(b.system.ground().size(), 4);
        assert_eq!(b.system.len(), 4);
        assert_eq!(b.system.ground().label(0), "123");
        let all = PointSet::full(4);
        assert!(is_witnessing(&b.tangle, &all).unwrap().witnessed);
        assert!(gen_triples(3).is_err());
        assert!(gen_triples(13).is_err());
    }

    #[test]
    fn arcs_reliability_matches_k_over_n() {
        let b = gen_arcs(6, None).unwrap();
        assert_eq!(b.designated["W"].len(), 20);
        assert_eq!(b.designated["G"].len(), 6);
        assert_eq!(b.system.ground().size(), 26);
        let rho = set_reliability(&b.tangle, &b.designated["G"]).unwrap();
        assert_eq!(rho, rat(2, 3));
        assert!(gen_arcs(5, None).is_err());
        assert!(gen_arcs(9, None).unwrap().designated["W"].len() == 126);
    }

    #[test]
    fn arcs_witness_shape() {
        let b = gen_arcs_witness(5, None).unwrap();
        assert_eq!(b.system.ground().size(), 84 + 9);
        assert_eq!(b.designated["G"].len(), 9);
        let rho = set_reliability(&b.tangle, &b.designated["G"]).unwrap();
        assert_eq!(rho, rat(5, 9));
        let spread = b.spread_triples.as_ref().unwrap();
        assert_eq!(spread.len(), 9);
        assert_eq!(spread[0], [0, 4, 8]);
        assert!(gen_arcs_witness(6, None).is_err());
    }

    #[test]
    fn random_is_reproducible() {
        let a = gen_random(8, 6, 1).unwrap();
        let b = gen_random(8, 6, 1).unwrap();
        assert_eq!(a.system.sides(), b.system.sides());
        assert_eq!(a.tangle.orientation(), b.tangle.orientation());
        assert!(is_consistent(&a.system, a.tangle.orientation())
            .unwrap()
            .holds());
        let c = gen_random(8, 6, 2).unwrap();
        assert!(c.system.sides() != a.system.sides() || c.tangle.orientation() != a.tangle.orientation());
    }
}
