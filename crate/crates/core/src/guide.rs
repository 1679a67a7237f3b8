//! Reliability of sets and functions over a tangle, guiding-function /
//! dual-witness certificates via linear-programming duality, maximum
//! reliability, and a seeded randomized guiding-set sampler.
//!
//! All reliability arithmetic is exact rational, so the strict inequality
//! separating a dual witness from a guiding function is never decided by
//! rounding.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lp::{self, LinearProgram, LpStatus, Rat};
use crate::point_set::PointSet;
use crate::tangle::Tangle;
use crate::{Error, Result};

/// Parses `"p/q"` or a plain integer string into an exact rational.
pub fn parse_ratio(s: &str) -> Result<Rat> {
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::InvalidParam(format!("bad rational {s:?}: {e}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den.is_zero() {
                return Err(Error::InvalidParam(format!("bad rational {s:?}: zero denominator")));
            }
            Ok(Rat::new(parse_int(p)?, den))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

/// Renders a rational as `"p/q"` (or `"n"` for integers).
pub fn format_ratio(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn half() -> Rat {
    Rat::new(BigInt::from(1), BigInt::from(2))
}

/// Non-negative point weights summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct GuidingFunction {
    weights: Vec<Rat>,
}

impl GuidingFunction {
    pub fn new(weights: Vec<Rat>) -> Result<Self> {
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::NotNormalized("negative weight".into()));
        }
        let total: Rat = weights.iter().cloned().fold(Rat::zero(), |a, b| a + b);
        if !total.is_one() {
            return Err(Error::NotNormalized(format!(
                "weights sum to {}",
                format_ratio(&total)
            )));
        }
        Ok(GuidingFunction { weights })
    }

    pub fn uniform(n: usize) -> Self {
        let w = Rat::new(BigInt::one(), BigInt::from(n as i64));
        GuidingFunction {
            weights: vec![w; n],
        }
    }

    /// `1/|G|` on the members of `G`, zero elsewhere.
    pub fn indicator(set: &PointSet) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::EmptySet);
        }
        let w = Rat::new(BigInt::one(), BigInt::from(set.len() as i64));
        Ok(GuidingFunction {
            weights: (0..set.universe())
                .map(|v| if set.contains(v) { w.clone() } else { Rat::zero() })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    /// Total weight carried by a side.
    pub fn side_mass(&self, side: &PointSet) -> Rat {
        side.iter()
            .map(|v| self.weights[v].clone())
            .fold(Rat::zero(), |a, b| a + b)
    }

    pub fn max_weight(&self) -> Rat {
        self.weights
            .iter()
            .cloned()
            .max()
            .unwrap_or_else(Rat::zero)
    }
}

/// Weights on separations summing to one whose per-point incident mass
/// stays strictly below `rho`, certifying that no guiding function of
/// reliability `rho` exists.
#[derive(Clone, Debug, PartialEq)]
pub struct DualWitness {
    pub weights: Vec<Rat>,
    pub rho: Rat,
}

/// Outcome of the reliability duality: exactly one branch exists for any
/// tangle and threshold.
#[derive(Clone, Debug)]
pub enum GuidanceCertificate {
    Guiding { function: GuidingFunction, rho: Rat },
    Witness(DualWitness),
}

/// `min { |G ∩ A| / |G| : A big side }`, exact.
pub fn set_reliability(tangle: &Tangle, g: &PointSet) -> Result<Rat> {
    if g.universe() != tangle.system().ground().size() {
        return Err(Error::GroundMismatch {
            left: g.universe(),
            right: tangle.system().ground().size(),
        });
    }
    if g.is_empty() {
        return Err(Error::EmptySet);
    }
    let size = Rat::from_integer(BigInt::from(g.len() as i64));
    let mut best: Option<Rat> = None;
    for i in 0..tangle.len() {
        let side = tangle.big_side(i)?;
        let hits = Rat::from_integer(BigInt::from(g.intersection(&side).len() as i64));
        let ratio = hits / size.clone();
        best = Some(match best {
            None => ratio,
            Some(b) => b.min(ratio),
        });
    }
    // A tangle over no separations puts no constraint on the set.
    Ok(best.unwrap_or_else(Rat::one))
}

/// `min { sum_{v in A} g(v) : A big side }`, exact.
pub fn function_reliability(tangle: &Tangle, g: &GuidingFunction) -> Result<Rat> {
    if g.len() != tangle.system().ground().size() {
        return Err(Error::GroundMismatch {
            left: g.len(),
            right: tangle.system().ground().size(),
        });
    }
    let mut best: Option<Rat> = None;
    for i in 0..tangle.len() {
        let mass = g.side_mass(&tangle.big_side(i)?);
        best = Some(match best {
            None => mass,
            Some(b) => b.min(mass),
        });
    }
    Ok(best.unwrap_or_else(Rat::one))
}

/// Re-checks a guiding certificate arithmetically: weights normalized and
/// every big side carrying mass at least `rho`.
pub fn verify_guiding(tangle: &Tangle, g: &GuidingFunction, rho: &Rat) -> bool {
    if g.len() != tangle.system().ground().size() {
        return false;
    }
    match function_reliability(tangle, g) {
        Ok(r) => r >= *rho,
        Err(_) => false,
    }
}

/// Re-checks a dual witness arithmetically: weights non-negative and
/// normalized, and every point's incident big-side mass strictly below
/// `rho`.
pub fn verify_dual_witness(tangle: &Tangle, w: &DualWitness) -> bool {
    if w.weights.len() != tangle.len() {
        return false;
    }
    if w.weights.iter().any(|h| h.is_negative()) {
        return false;
    }
    let total: Rat = w.weights.iter().cloned().fold(Rat::zero(), |a, b| a + b);
    if !total.is_one() {
        return false;
    }
    let n = tangle.system().ground().size();
    let sides = tangle.big_sides();
    for v in 0..n {
        let mut load = Rat::zero();
        for (s, side) in sides.iter().enumerate() {
            if side.contains(v) {
                load = load + w.weights[s].clone();
            }
        }
        if load >= w.rho {
            return false;
        }
    }
    true
}

/// The primal program `max sum h(s)` subject to per-point incident loads
/// at most `rho`. Its optimum equals the minimum total weight of a function
/// with side masses at least `rho`.
fn load_program(tangle: &Tangle, rho: &Rat) -> Result<LinearProgram<Rat>> {
    let n = tangle.system().ground().size();
    let m = tangle.len();
    let sides = tangle.big_sides();
    let mut matrix = vec![vec![Rat::zero(); m]; n];
    for (s, side) in sides.iter().enumerate() {
        for v in side.iter() {
            matrix[v][s] = Rat::one();
        }
    }
    LinearProgram::new(vec![Rat::one(); m], matrix, vec![rho.clone(); n])
}

/// Decides, for a threshold `rho`, which of the two certificates exists:
/// a guiding function of reliability `rho`, or separation weights whose
/// per-point load stays strictly below `rho`. The returned certificate is
/// re-verified arithmetically before it is handed out.
pub fn guiding_duality(tangle: &Tangle, rho: &Rat) -> Result<GuidanceCertificate> {
    if rho.is_negative() || *rho > Rat::one() {
        return Err(Error::InvalidParam(format!(
            "rho must lie in [0, 1], got {}",
            format_ratio(rho)
        )));
    }
    let n = tangle.system().ground().size();
    if rho.is_zero() || tangle.is_empty() {
        let function = GuidingFunction::uniform(n);
        if !verify_guiding(tangle, &function, rho) {
            return Err(Error::LpFailure("uniform certificate failed check".into()));
        }
        return Ok(GuidanceCertificate::Guiding {
            function,
            rho: rho.clone(),
        });
    }
    let lp = load_program(tangle, rho)?;
    let sol = lp::solve(&lp)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::LpFailure(format!(
            "load program ended {:?} although it is feasible and bounded",
            sol.status
        )));
    }
    if !lp::verify(&lp, &sol) {
        return Err(Error::LpFailure("solver certificate failed recheck".into()));
    }
    let opt = sol.objective.clone();
    if opt <= Rat::one() {
        // Scale the dual vector into a normalized function with side masses
        // >= rho / opt >= rho.
        let weights: Vec<Rat> = sol
            .y
            .iter()
            .map(|y| rho.clone() * y.clone() / opt.clone())
            .collect();
        let function = GuidingFunction::new(weights)?;
        if !verify_guiding(tangle, &function, rho) {
            return Err(Error::LpFailure("guiding certificate failed recheck".into()));
        }
        Ok(GuidanceCertificate::Guiding {
            function,
            rho: rho.clone(),
        })
    } else {
        let weights: Vec<Rat> = sol.x.iter().map(|h| h.clone() / opt.clone()).collect();
        let witness = DualWitness {
            weights,
            rho: rho.clone(),
        };
        if !verify_dual_witness(tangle, &witness) {
            return Err(Error::LpFailure("dual witness failed recheck".into()));
        }
        Ok(GuidanceCertificate::Witness(witness))
    }
}

/// The maximum reliability over all normalized functions, with an optimal
/// function attaining it.
///
/// Solves the load program once at `rho = 1`; the feasible region scales
/// linearly in `rho`, so the optimum for any threshold is `rho` times the
/// optimum at one, and the maximum guiding reliability is its reciprocal.
pub fn max_reliability(tangle: &Tangle) -> Result<(Rat, GuidingFunction)> {
    let n = tangle.system().ground().size();
    if tangle.is_empty() {
        return Ok((Rat::one(), GuidingFunction::uniform(n)));
    }
    let lp = load_program(tangle, &Rat::one())?;
    let sol = lp::solve(&lp)?;
    if sol.status != LpStatus::Optimal || !lp::verify(&lp, &sol) {
        return Err(Error::LpFailure("load program at rho = 1 failed".into()));
    }
    let opt = sol.objective.clone(); // >= 1: side mass never exceeds total mass
    let weights: Vec<Rat> = sol.y.iter().map(|y| y.clone() / opt.clone()).collect();
    let function = GuidingFunction::new(weights)?;
    let rho_star = function_reliability(tangle, &function)?;
    if rho_star != Rat::one() / opt {
        return Err(Error::LpFailure(
            "optimal function reliability disagrees with the LP value".into(),
        ));
    }
    Ok((rho_star, function))
}

/// Left-hand side of the sampling premise
/// `sum_v g(v)(1 - g(v) eta) / (4 eta) * sum_{A minimal} 1/(rho_A - 1/2)^2`.
#[derive(Clone, Debug)]
pub struct SamplerCheck {
    pub lhs: Rat,
    pub holds: bool,
}

/// Evaluates the sampling premise exactly. Requires reliability above 1/2;
/// a side of mass exactly 1/2 would put a zero in a denominator.
pub fn sampler_condition(tangle: &Tangle, g: &GuidingFunction) -> Result<SamplerCheck> {
    let rho = function_reliability(tangle, g)?;
    if rho <= half() {
        return Err(Error::NotGuiding);
    }
    let eta = Rat::one() / g.max_weight();
    let variance_part: Rat = g
        .weights()
        .iter()
        .map(|w| w.clone() * (Rat::one() - w.clone() * eta.clone()))
        .fold(Rat::zero(), |a, b| a + b)
        / (Rat::from_integer(BigInt::from(4)) * eta);
    let spread_part: Rat = tangle
        .minimal_elements()
        .iter()
        .map(|a| {
            let d = g.side_mass(a) - half();
            Rat::one() / (d.clone() * d)
        })
        .fold(Rat::zero(), |a, b| a + b);
    let lhs = variance_part * spread_part;
    let holds = lhs < Rat::one();
    Ok(SamplerCheck { lhs, holds })
}

/// The coarser premise `|tau_min| < 4 delta^2 eps^2 |V|` with
/// `delta = rho_g - 1/2` and `eps = 1/(n max_v g(v))`.
#[derive(Clone, Debug)]
pub struct CorollaryCheck {
    pub minimal_count: usize,
    pub threshold: Rat,
    pub holds: bool,
}

pub fn corollary_condition(tangle: &Tangle, g: &GuidingFunction) -> Result<CorollaryCheck> {
    let rho = function_reliability(tangle, g)?;
    if rho <= half() {
        return Err(Error::NotGuiding);
    }
    let n = tangle.system().ground().size();
    let delta = rho - half();
    let eps = Rat::one() / (Rat::from_integer(BigInt::from(n as i64)) * g.max_weight());
    let threshold = Rat::from_integer(BigInt::from(4))
        * delta.clone()
        * delta
        * eps.clone()
        * eps
        * Rat::from_integer(BigInt::from(n as i64));
    let minimal_count = tangle.minimal_elements().len();
    let holds = Rat::from_integer(BigInt::from(minimal_count as i64)) < threshold;
    Ok(CorollaryCheck {
        minimal_count,
        threshold,
        holds,
    })
}

/// Sampler parameters; `max_trials` caps the retry loop.
#[derive(Clone, Copy, Debug)]
pub struct SamplerConfig {
    pub seed: u64,
    pub max_trials: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            max_trials: 10_000,
        }
    }
}

/// Sampler result. `found: None` after exhausting the trial budget is a
/// soft outcome, not an error.
#[derive(Clone, Debug)]
pub struct SampleOutcome {
    pub found: Option<PointSet>,
    pub trials: u64,
    /// Whether the sampling premise held for the input function; sampling
    /// proceeds either way, the premise only guarantees success chances.
    pub condition_held: bool,
}

/// Independent per-trial generator so outcomes do not depend on how trials
/// are scheduled.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&trial.to_le_bytes());
    key[16..24].copy_from_slice(&0x7461_6e67_6c65_6b69_u64.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Draws `u < p` exactly: `u` uniform on `[0, 2^64)`, `p` rational in
/// `[0, 1]`.
fn bernoulli_exact(u: u64, p: &Rat) -> bool {
    let lhs = BigInt::from(u) * p.denom();
    let rhs = p.numer() * (BigInt::one() << 64);
    lhs < rhs
}

/// Repeatedly draws a random subset including each point `v` independently
/// with probability `g(v) * eta`, and returns the first draw whose set
/// reliability exceeds 1/2. Deterministic in the seed.
pub fn sample_guiding_set(
    tangle: &Tangle,
    g: &GuidingFunction,
    config: &SamplerConfig,
) -> Result<SampleOutcome> {
    let n = tangle.system().ground().size();
    if g.len() != n {
        return Err(Error::GroundMismatch {
            left: g.len(),
            right: n,
        });
    }
    let condition_held = sampler_condition(tangle, g)
        .map(|c| c.holds)
        .unwrap_or(false);
    let eta = Rat::one() / g.max_weight();
    let probabilities: Vec<Rat> = g
        .weights()
        .iter()
        .map(|w| w.clone() * eta.clone())
        .collect();
    for trial in 0..config.max_trials {
        let mut rng = trial_rng(config.seed, trial);
        let mut set = PointSet::empty(n);
        for (v, p) in probabilities.iter().enumerate() {
            let u = rng.next_u64();
            if bernoulli_exact(u, p) {
                set.insert(v);
            }
        }
        if set.is_empty() {
            continue;
        }
        if set_reliability(tangle, &set)? > half() {
            return Ok(SampleOutcome {
                found: Some(set),
                trials: trial + 1,
                condition_held,
            });
        }
    }
    Ok(SampleOutcome {
        found: None,
        trials: config.max_trials,
        condition_held,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::rat;
    use crate::tangle::{GroundSet, SeparationSystem};
    use std::sync::Arc;

    fn ps(n: usize, ix: &[usize]) -> PointSet {
        PointSet::from_indices(n, ix.iter().copied())
    }

    fn t4_tangle() -> Tangle {
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
    fn parse_and_format() {
        assert_eq!(parse_ratio("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_ratio("2").unwrap(), rat(2, 1));
        assert!(parse_ratio("1/0").is_err());
        assert_eq!(format_ratio(&rat(3, 4)), "3/4");
        assert_eq!(format_ratio(&rat(4, 2)), "2");
    }

    #[test]
    fn t4_full_set_reliability() {
        let t = t4_tangle();
        assert_eq!(set_reliability(&t, &PointSet::full(4)).unwrap(), rat(3, 4));
        assert!(matches!(
            set_reliability(&t, &PointSet::empty(4)),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn indicator_transfer() {
        let t = t4_tangle();
        for g in [ps(4, &[0]), ps(4, &[0, 2]), ps(4, &[1, 2, 3]), PointSet::full(4)] {
            let f = GuidingFunction::indicator(&g).unwrap();
            assert_eq!(
                function_reliability(&t, &f).unwrap(),
                set_reliability(&t, &g).unwrap()
            );
        }
    }

    #[test]
    fn uniform_function_reliability() {
        let t = t4_tangle();
        let g = GuidingFunction::uniform(4);
        assert_eq!(function_reliability(&t, &g).unwrap(), rat(3, 4));
    }

    #[test]
    fn unnormalized_weights_rejected() {
        assert!(GuidingFunction::new(vec![rat(1, 2), rat(1, 4)]).is_err());
        assert!(GuidingFunction::new(vec![rat(3, 2), rat(-1, 2)]).is_err());
    }

    #[test]
    fn duality_branches_on_t4() {
        let t = t4_tangle();
        match guiding_duality(&t, &rat(3, 5)).unwrap() {
            GuidanceCertificate::Guiding { function, rho } => {
                assert!(verify_guiding(&t, &function, &rho));
            }
            GuidanceCertificate::Witness(_) => panic!("3/5 < 3/4 must admit a guiding function"),
        }
        match guiding_duality(&t, &rat(4, 5)).unwrap() {
            GuidanceCertificate::Witness(w) => {
                assert!(verify_dual_witness(&t, &w));
            }
            GuidanceCertificate::Guiding { .. } => panic!("4/5 > 3/4 must yield a dual witness"),
        }
    }

    #[test]
    fn duality_at_zero_is_guiding() {
        let t = t4_tangle();
        assert!(matches!(
            guiding_duality(&t, &Rat::zero()).unwrap(),
            GuidanceCertificate::Guiding { .. }
        ));
    }

    #[test]
    fn duality_rejects_rho_outside_unit_interval() {
        let t = t4_tangle();
        assert!(guiding_duality(&t, &rat(-1, 2)).is_err());
        assert!(guiding_duality(&t, &rat(3, 2)).is_err());
    }

    #[test]
    fn t4_max_reliability() {
        let t = t4_tangle();
        let (rho, g) = max_reliability(&t).unwrap();
        assert_eq!(rho, rat(3, 4));
        assert_eq!(function_reliability(&t, &g).unwrap(), rat(3, 4));
    }

    #[test]
    fn boundary_rho_takes_guiding_branch() {
        let t = t4_tangle();
        match guiding_duality(&t, &rat(3, 4)).unwrap() {
            GuidanceCertificate::Guiding { .. } => {}
            GuidanceCertificate::Witness(_) => panic!("the boundary belongs to the guiding side"),
        }
        assert!(matches!(
            guiding_duality(&t, &(rat(3, 4) + rat(1, 1000))).unwrap(),
            GuidanceCertificate::Witness(_)
        ));
    }

    #[test]
    fn uniform_t4_sampler_condition_lhs_zero() {
        // Uniform weights have g(v) * eta = 1, so the variance factor dies.
        let t = t4_tangle();
        let g = GuidingFunction::uniform(4);
        let check = sampler_condition(&t, &g).unwrap();
        assert_eq!(check.lhs, Rat::zero());
        assert!(check.holds);
    }

    #[test]
    fn not_guiding_rejected_by_condition_checks() {
        let t = t4_tangle();
        let g = GuidingFunction::indicator(&ps(4, &[0])).unwrap();
        // One point misses the side {1,2,3}: reliability 0.
        assert!(matches!(sampler_condition(&t, &g), Err(Error::NotGuiding)));
        assert!(matches!(corollary_condition(&t, &g), Err(Error::NotGuiding)));
    }

    #[test]
    fn corollary_on_single_separation() {
        let ground = GroundSet::new(6).unwrap();
        let (sys, _) = SeparationSystem::new(ground, &[ps(6, &[0, 1, 2, 3, 4])]).unwrap();
        let sys = Arc::new(sys);
        let big_is_canonical = sys.sides()[0].len() == 5;
        let t = Tangle::new(sys, vec![big_is_canonical]).unwrap();
        let g = GuidingFunction::uniform(6);
        let check = corollary_condition(&t, &g).unwrap();
        assert_eq!(check.minimal_count, 1);
        assert!(check.holds); // 1 < 4 * (1/3)^2 * 1 * 6 = 8/3
    }

    #[test]
    fn sampler_returns_indicator_support_immediately() {
        let ground = GroundSet::new(6).unwrap();
        let (sys, _) = SeparationSystem::new(ground, &[ps(6, &[0, 1, 2, 3, 4])]).unwrap();
        let sys = Arc::new(sys);
        let big_is_canonical = sys.sides()[0].len() == 5;
        let t = Tangle::new(sys, vec![big_is_canonical]).unwrap();
        let g = GuidingFunction::indicator(&ps(6, &[0])).unwrap();
        for seed in [0u64, 1, 42] {
            let out = sample_guiding_set(
                &t,
                &g,
                &SamplerConfig {
                    seed,
                    max_trials: 5,
                },
            )
            .unwrap();
            assert_eq!(out.found.as_ref().unwrap(), &ps(6, &[0]));
            assert_eq!(out.trials, 1);
        }
    }

    #[test]
    fn sampler_is_deterministic_in_the_seed() {
        let t = t4_tangle();
        let g = GuidingFunction::uniform(4);
        let cfg = SamplerConfig {
            seed: 42,
            max_trials: 100,
        };
        let a = sample_guiding_set(&t, &g, &cfg).unwrap();
        let b = sample_guiding_set(&t, &g, &cfg).unwrap();
        assert_eq!(a.found, b.found);
        assert_eq!(a.trials, b.trials);
        if let Some(set) = a.found {
            assert!(set_reliability(&t, &set).unwrap() > rat(1, 2));
        }
    }
}
