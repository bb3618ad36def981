//! Submodular function minimization over arbitrary ground sets.
//!
//! Every hard step in this crate bottoms out here: least-core separation,
//! superadditive covers, reduced-game evaluation. The engine is pluggable in
//! principle; the one shipped is exhaustive enumeration, which is exact and
//! fast enough at desk scale (ground sets up to [`MAX_GROUND`] elements).
//! Strongly polynomial engines can be swapped in behind [`SetFunction`]
//! without touching any caller.

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest ground set the exhaustive engine will enumerate (2^22 subsets).
pub const MAX_GROUND: usize = 22;

/// Evaluation oracle for a set function on subsets of a fixed ground set.
///
/// `eval` must be pure: the same coalition always yields the same value.
/// The ground may be a scattered subset of a larger player universe; all
/// arguments are submasks of it.
pub trait SetFunction {
    fn ground(&self) -> Coalition;
    fn eval(&self, s: Coalition) -> Rational;
}

/// A set function given by a closure.
pub struct FnOracle<F: Fn(Coalition) -> Rational> {
    ground: Coalition,
    f: F,
}

impl<F: Fn(Coalition) -> Rational> FnOracle<F> {
    pub fn new(ground: Coalition, f: F) -> Self {
        FnOracle { ground, f }
    }
}

impl<F: Fn(Coalition) -> Rational> SetFunction for FnOracle<F> {
    fn ground(&self) -> Coalition {
        self.ground
    }

    fn eval(&self, s: Coalition) -> Rational {
        debug_assert!(s.is_subset_of(self.ground));
        (self.f)(s)
    }
}

/// Outcome of a minimization: the inclusion-wise minimal minimizer, its
/// value, and how many oracle evaluations were spent.
///
/// [`maximize_supermodular`] reuses this shape: there `minimizer` holds the
/// maximizer and `min_value` the maximum.
#[derive(Debug, Clone)]
pub struct SfmResult {
    pub minimizer: Coalition,
    pub min_value: Rational,
    pub evaluations: u64,
}

/// Minimizes `f` over all subsets of its ground set.
///
/// For submodular `f` the minimizers form a lattice, so their intersection is
/// itself a minimizer; that inclusion-wise minimal one is returned, making the
/// result independent of enumeration order and of the engine. Submodularity is
/// not checked at runtime (callers assert it in tests); if it fails to hold,
/// the result is still a true minimizer, chosen by (cardinality, mask).
pub fn minimize(f: &impl SetFunction) -> Result<SfmResult> {
    let ground = f.ground();
    check_ground(ground.len())?;

    let mut evaluations = 0u64;
    let mut best: Option<Rational> = None;
    // Intersection of all minimizers seen, and a deterministic fallback.
    let mut meet = Coalition::empty(ground.ground());
    let mut fallback = meet;
    for s in ground.subsets() {
        let v = f.eval(s);
        evaluations += 1;
        match best.as_ref().map(|b| v.cmp(b)) {
            Some(std::cmp::Ordering::Greater) => {}
            Some(std::cmp::Ordering::Equal) => {
                meet = meet.inter(s);
                if (s.len(), s.mask()) < (fallback.len(), fallback.mask()) {
                    fallback = s;
                }
            }
            _ => {
                best = Some(v);
                meet = s;
                fallback = s;
            }
        }
    }
    let min_value = best.expect("ground has at least the empty subset");

    let minimizer = if meet == fallback {
        meet
    } else {
        // One extra probe decides whether the lattice meet attains the
        // minimum (it does whenever f is submodular).
        evaluations += 1;
        if f.eval(meet) == min_value {
            meet
        } else {
            fallback
        }
    };

    Ok(SfmResult {
        minimizer,
        min_value,
        evaluations,
    })
}

/// Minimizes `f` over subsets that contain all of `forced_in` and none of
/// `forced_out`, by minimizing the contraction `g(T) = f(T ∪ forced_in)` over
/// the remaining ground (submodular whenever `f` is).
pub fn minimize_constrained(
    f: &impl SetFunction,
    forced_in: Coalition,
    forced_out: Coalition,
) -> Result<SfmResult> {
    let ground = f.ground();
    if !forced_in.inter(forced_out).is_empty() {
        return Err(Error::input(format!(
            "forced_in {forced_in} and forced_out {forced_out} overlap"
        )));
    }
    if !forced_in.is_subset_of(ground) || !forced_out.is_subset_of(ground) {
        return Err(Error::input(
            "constraint sets must lie within the ground set".to_string(),
        ));
    }

    let free = ground.minus(forced_in).minus(forced_out);
    let g = FnOracle::new(free, |t: Coalition| f.eval(t.union(forced_in)));
    let inner = minimize(&g)?;
    Ok(SfmResult {
        minimizer: inner.minimizer.union(forced_in),
        min_value: inner.min_value,
        evaluations: inner.evaluations,
    })
}

/// Maximizes a supermodular function by minimizing its negation. The returned
/// `minimizer`/`min_value` fields carry the (inclusion-wise minimal)
/// maximizer and the maximum.
pub fn maximize_supermodular(g: &impl SetFunction) -> Result<SfmResult> {
    let neg = FnOracle::new(g.ground(), |s: Coalition| -g.eval(s));
    let inner = minimize(&neg)?;
    Ok(SfmResult {
        minimizer: inner.minimizer,
        min_value: -inner.min_value,
        evaluations: inner.evaluations,
    })
}

fn check_ground(k: usize) -> Result<()> {
    if k > MAX_GROUND {
        return Err(Error::Size {
            what: "exhaustive submodular minimization",
            limit: MAX_GROUND,
            got: k,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn cardinality(k: usize) -> FnOracle<impl Fn(Coalition) -> Rational> {
        FnOracle::new(Coalition::full(k), |s: Coalition| rat(s.len() as i64))
    }

    fn modular(weights: &'static [i64]) -> FnOracle<impl Fn(Coalition) -> Rational> {
        FnOracle::new(Coalition::full(weights.len()), move |s: Coalition| {
            s.players().map(|p| rat(weights[p])).sum()
        })
    }

    #[test]
    fn cardinality_minimized_at_empty() {
        let r = minimize(&cardinality(5)).unwrap();
        assert!(r.minimizer.is_empty());
        assert_eq!(r.min_value, rat(0));
        assert_eq!(r.evaluations, 32);
    }

    #[test]
    fn modular_picks_all_negative_weights() {
        let r = minimize(&modular(&[-1, 2, -3])).unwrap();
        assert_eq!(r.minimizer.key(), "1,3");
        assert_eq!(r.min_value, rat(-4));
    }

    #[test]
    fn constrained_respects_forcing() {
        let f = cardinality(5);
        let r = minimize_constrained(&f, Coalition::singleton(5, 1), Coalition::empty(5)).unwrap();
        assert_eq!(r.minimizer.key(), "2");
        assert_eq!(r.min_value, rat(1));

        // forced_in = ground: single feasible set.
        let all = Coalition::full(5);
        let r = minimize_constrained(&f, all, Coalition::empty(5)).unwrap();
        assert_eq!(r.minimizer, all);
        assert_eq!(r.min_value, rat(5));
    }

    #[test]
    fn negated_fixture_game_is_minimized_at_the_grand_coalition() {
        // max v = 10, attained only at N, so the minimal minimizer of −v is N.
        let g = crate::game::Game::kuipers_counterexample();
        let neg = FnOracle::new(Coalition::full(4), |s: Coalition| -g.value(s));
        let r = minimize(&neg).unwrap();
        assert_eq!(r.minimizer, Coalition::full(4));
        assert_eq!(r.min_value, rat(-10));

        let r = maximize_supermodular(&g).unwrap();
        assert_eq!(r.minimizer, Coalition::full(4));
        assert_eq!(r.min_value, rat(10));

        // Forcing player 4 in changes nothing here.
        let r = minimize_constrained(&neg, Coalition::singleton(4, 3), Coalition::empty(4)).unwrap();
        assert_eq!(r.minimizer, Coalition::full(4));
        assert_eq!(r.min_value, rat(-10));
    }

    #[test]
    fn constrained_rejects_overlap() {
        let f = cardinality(3);
        let s = Coalition::singleton(3, 0);
        assert!(minimize_constrained(&f, s, s).is_err());
    }

    #[test]
    fn unconstrained_equals_empty_constraints() {
        let f = modular(&[3, -1, 2, -2]);
        let a = minimize(&f).unwrap();
        let b = minimize_constrained(&f, Coalition::empty(4), Coalition::empty(4)).unwrap();
        assert_eq!(a.minimizer, b.minimizer);
        assert_eq!(a.min_value, b.min_value);
    }

    #[test]
    fn maximize_modular() {
        let r = maximize_supermodular(&modular(&[1, 2, 3])).unwrap();
        assert_eq!(r.minimizer, Coalition::full(3));
        assert_eq!(r.min_value, rat(6));
    }

    #[test]
    fn ground_bound_enforced() {
        let f = FnOracle::new(Coalition::full(23), |_s| rat(0));
        assert!(matches!(minimize(&f), Err(Error::Size { .. })));
    }

    /// Random submodular instances: negated convex games and graph cut
    /// functions with a modular tilt.
    fn random_submodular_tables(seed: u64, k: usize) -> Vec<Vec<Rational>> {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();

        let game = crate::game::Game::random_convex(k, seed, (0, 9), 2).unwrap();
        out.push(
            (0..(1u32 << k))
                .map(|m| -game.value(Coalition::from_mask(m, k).unwrap()))
                .collect(),
        );

        let mut edges = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                if rng.gen_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let tilt: Vec<i64> = (0..k).map(|_| rng.gen_range(-3..=3)).collect();
        out.push(
            (0..(1u32 << k))
                .map(|m| {
                    let s = Coalition::from_mask(m, k).unwrap();
                    let cut = edges
                        .iter()
                        .filter(|(a, b)| s.contains(*a) != s.contains(*b))
                        .count() as i64;
                    rat(cut) - s.players().map(|p| rat(tilt[p])).sum::<Rational>()
                })
                .collect(),
        );
        out
    }

    #[test]
    fn equivalence_minimality_and_lattice_on_random_submodular_functions() {
        let mut instances = 0;
        for k in 2..=10usize {
            for seed in 0..12u64 {
                for table in random_submodular_tables(seed * 100 + k as u64, k) {
                    instances += 1;
                    let f = FnOracle::new(Coalition::full(k), |s: Coalition| {
                        table[s.mask() as usize].clone()
                    });
                    let r = minimize(&f).unwrap();
                    // Independent linear scan for the minimum value.
                    let brute = table.iter().min().unwrap();
                    assert_eq!(&r.min_value, brute);
                    assert_eq!(table[r.minimizer.mask() as usize], r.min_value);
                    // Inclusion-wise minimal: no strict subset attains it.
                    for sub in r.minimizer.subsets() {
                        if sub != r.minimizer {
                            assert!(
                                table[sub.mask() as usize] > r.min_value,
                                "strict subset {sub} also attains the minimum"
                            );
                        }
                    }
                    // Minimizers of a submodular function form a lattice.
                    if k <= 8 {
                        let mins: Vec<u32> = (0..(1u32 << k))
                            .filter(|&m| table[m as usize] == r.min_value)
                            .collect();
                        for &a in &mins {
                            for &b in &mins {
                                assert_eq!(table[(a | b) as usize], r.min_value);
                                assert_eq!(table[(a & b) as usize], r.min_value);
                            }
                        }
                    }
                }
            }
        }
        assert!(instances >= 200, "want ≥ 200 instances, got {instances}");
    }

    #[test]
    fn scattered_ground() {
        // Minimize |S| - 2·[4 ∈ S] over subsets of {2,4,5} (1-based) in a
        // 6-player universe.
        let ground = Coalition::from_players(6, &[1, 3, 4]).unwrap();
        let f = FnOracle::new(ground, |s: Coalition| {
            rat(s.len() as i64) - if s.contains(3) { rat(2) } else { rat(0) }
        });
        let r = minimize(&f).unwrap();
        assert_eq!(r.minimizer.key(), "4");
        assert_eq!(r.min_value, rat(-1));
    }
}
