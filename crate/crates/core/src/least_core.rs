//! Least-core computation without linear programming.
//!
//! Feasibility of the ε-shifted core system is decided by one submodular
//! minimization over `N∖{s}`: the shifted game and its complement-side dual
//! both get superadditive covers, and the sandwich condition
//! `min (−v̄(S) − ū(S)) ≥ 0` characterizes non-emptiness. Each infeasible ε
//! yields two partition certificates, which assemble into a Farkas
//! certificate and a strictly smaller candidate ε; the search provably stops
//! within `2n − 2` rounds at the least-core value with a set of essential
//! coalitions and optimal dual weights.

use num::Signed;

use crate::coalition::Coalition;
use crate::cover::{dual_function, superadditive_cover, CoverCache, ProperPartition};
use crate::error::{Error, Result};
use crate::game::{Allocation, Game};
use crate::rational::{rat, Rational};
use crate::sfm::{self, FnOracle, SetFunction};

/// The ε-shifted game: `v_ε(S) = v(S) + ε` on proper nonempty coalitions,
/// `v_ε(∅) = 0`, `v_ε(N) = v(N)`. Crossing supermodular whenever the base is
/// convex.
pub struct ShiftedGame<'a, V: SetFunction> {
    base: &'a V,
    epsilon: Rational,
    ground: Coalition,
    grand_value: Rational,
}

impl<'a, V: SetFunction> ShiftedGame<'a, V> {
    pub fn new(base: &'a V, epsilon: Rational) -> Self {
        let ground = base.ground();
        let grand_value = base.eval(ground);
        ShiftedGame {
            base,
            epsilon,
            ground,
            grand_value,
        }
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }
}

impl<V: SetFunction> SetFunction for ShiftedGame<'_, V> {
    fn ground(&self) -> Coalition {
        self.ground
    }

    fn eval(&self, s: Coalition) -> Rational {
        if s.is_empty() {
            rat(0)
        } else if s == self.ground {
            self.grand_value.clone()
        } else {
            self.base.eval(s) + &self.epsilon
        }
    }
}

/// Result of the sandwich-based core non-emptiness test.
#[derive(Debug, Clone)]
pub struct NonEmptinessOutcome {
    /// `min_{S ⊆ N∖{s}} (−v̄(S) − ū(S))`; nonnegative iff the core is
    /// non-empty.
    pub min_value: Rational,
    /// Inclusion-minimal minimizer (∅ exactly when the core is non-empty).
    pub witness: Coalition,
    /// Cover certificate of the witness for the game itself.
    pub v_partition: ProperPartition,
    /// Cover certificate of the witness for the complement-side dual.
    pub u_partition: ProperPartition,
    /// Oracle evaluations spent (cover greedy passes plus the outer sweep).
    pub evaluations: u64,
}

impl NonEmptinessOutcome {
    pub fn core_is_nonempty(&self) -> bool {
        !self.min_value.is_negative()
    }
}

/// Decides `Core(w) ≠ ∅` for a crossing supermodular `w` via one submodular
/// minimization of `−v̄ − ū` over subsets of `N∖{s}`.
///
/// Valid for any reference player `s`; crossing supermodularity is
/// caller-asserted (tests check it exhaustively at small sizes).
pub fn core_nonempty_test<V: SetFunction>(w: &V, s: usize) -> Result<NonEmptinessOutcome> {
    let ground = w.ground();
    if !ground.contains(s) {
        return Err(Error::input(format!(
            "reference player {} is not in the ground set {ground}",
            s + 1
        )));
    }
    let u = dual_function(w, s);
    let w_covers = CoverCache::new(w);
    let u_covers = CoverCache::new(&u);
    let rest = ground.remove(s);

    let h = FnOracle::new(rest, |t: Coalition| {
        let a = w_covers.value(t).expect("cover within ground");
        let b = u_covers.value(t).expect("cover within ground");
        -a - b
    });
    let sweep = sfm::minimize(&h)?;

    let v_partition = w_covers.cover(sweep.minimizer)?.partition;
    let u_partition = u_covers.cover(sweep.minimizer)?.partition;
    Ok(NonEmptinessOutcome {
        min_value: sweep.min_value,
        witness: sweep.minimizer,
        v_partition,
        u_partition,
        evaluations: sweep.evaluations + w_covers.evaluations() + u_covers.evaluations(),
    })
}

/// How to obtain the bound `M > max_T |v(T)|` seeding the least-core search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// Enumerate all coalition values.
    Exact,
    /// One supermodular maximization for `A = max v`, then the deterministic
    /// double-sided greedy 1/3-approximation on the nonnegative submodular
    /// `A − v` to bound `max(−v)`.
    Oracle,
}

/// Computes `M > max_T |v(T)|` in the requested mode.
pub fn bound_m<V: SetFunction>(v: &V, mode: BoundMode) -> Result<Rational> {
    let ground = v.ground();
    match mode {
        BoundMode::Exact => {
            if ground.len() > sfm::MAX_GROUND {
                return Err(Error::Size {
                    what: "exact bound enumeration",
                    limit: sfm::MAX_GROUND,
                    got: ground.len(),
                });
            }
            let mut max_abs = rat(0);
            for s in ground.subsets() {
                let a = v.eval(s).abs();
                if a > max_abs {
                    max_abs = a;
                }
            }
            Ok(max_abs + rat(1))
        }
        BoundMode::Oracle => {
            let a = sfm::maximize_supermodular(v)?.min_value;
            let w = FnOracle::new(ground, |s: Coalition| &a - v.eval(s));
            let c = double_greedy_max(&w);
            let bound_neg = rat(3) * c - &a;
            Ok(if a >= bound_neg { a.clone() } else { bound_neg } + rat(1))
        }
    }
}

/// Deterministic double-sided greedy for unconstrained nonnegative submodular
/// maximization (1/3-approximation): grow `X` from ∅ and shrink `Y` from the
/// ground, keeping `X ⊆ Y`, choosing per element by marginal comparison.
fn double_greedy_max(w: &impl SetFunction) -> Rational {
    let ground = w.ground();
    let mut x = Coalition::empty(ground.ground());
    let mut y = ground;
    for p in ground.players() {
        let add = w.eval(x.insert(p)) - w.eval(x);
        let del = w.eval(y.remove(p)) - w.eval(y);
        if add >= del {
            x = x.insert(p);
        } else {
            y = y.remove(p);
        }
    }
    debug_assert_eq!(x, y);
    w.eval(x)
}

/// Farkas certificate for infeasibility of the ε-shifted core system:
/// weight 1 on the blocks of 𝒫 and on the complements of the blocks of 𝒬,
/// weight −|𝒬| on the grand coalition.
#[derive(Debug, Clone)]
pub struct FarkasCertificate {
    /// Sparse `(coalition, λ)` entries, ascending by mask; includes the grand
    /// coalition.
    pub lambda: Vec<(Coalition, Rational)>,
    ground: Coalition,
}

impl FarkasCertificate {
    pub fn ground(&self) -> Coalition {
        self.ground
    }

    /// `Σ_{S ∋ p} λ_S = 0` for every player `p` — holds structurally because
    /// every player is covered exactly |𝒬| times by 𝒫 ∪ {N∖Q}.
    pub fn balance_holds(&self) -> bool {
        self.ground.players().all(|p| {
            let total: Rational = self
                .lambda
                .iter()
                .filter(|(s, _)| s.contains(p))
                .map(|(_, l)| l.clone())
                .sum();
            total == rat(0)
        })
    }

    /// The dual objective `Σ_{∅≠S⊊N} λ_S (v(S) + ε) + λ_N v(N)`.
    pub fn objective<V: SetFunction>(&self, v: &V, eps: &Rational) -> Rational {
        self.lambda
            .iter()
            .map(|(s, l)| {
                if *s == self.ground {
                    l * v.eval(*s)
                } else {
                    l * (v.eval(*s) + eps)
                }
            })
            .sum()
    }

    /// Full check of the alternative system: nonnegative proper weights,
    /// balance, and a strictly positive objective at `(v, ε)`.
    pub fn satisfies_system_d<V: SetFunction>(&self, v: &V, eps: &Rational) -> bool {
        let proper_nonneg = self
            .lambda
            .iter()
            .all(|(s, l)| *s == self.ground || !l.is_negative());
        proper_nonneg && self.balance_holds() && self.objective(v, eps).is_positive()
    }
}

/// Assembles the Farkas certificate from two proper partitions of the same
/// nonempty witness within a ground set of `n` players.
pub fn farkas_certificate(
    p: &ProperPartition,
    q: &ProperPartition,
    ground: Coalition,
) -> Result<FarkasCertificate> {
    if p.union() != q.union() {
        return Err(Error::input(format!(
            "partitions cover different sets: {} vs {}",
            p.union(),
            q.union()
        )));
    }
    if p.union().is_empty() {
        return Err(Error::input("witness must be nonempty".to_string()));
    }
    if !p.union().is_subset_of(ground) || p.union() == ground {
        return Err(Error::input(
            "witness must be a proper subset of the ground set".to_string(),
        ));
    }
    let mut lambda: Vec<(Coalition, Rational)> = Vec::with_capacity(p.size() + q.size() + 1);
    for b in p.blocks() {
        lambda.push((*b, rat(1)));
    }
    for b in q.blocks() {
        lambda.push((ground.minus(*b), rat(1)));
    }
    lambda.push((ground, -rat(q.size() as i64)));
    lambda.sort_by_key(|(s, _)| s.mask());
    Ok(FarkasCertificate { lambda, ground })
}

/// One iteration record of the least-core search.
#[derive(Debug, Clone)]
pub struct TraceEntry {
    pub epsilon: Rational,
    pub witness: Coalition,
    /// `|𝒫| + |𝒬|` at this iteration.
    pub partition_sizes: usize,
    /// Oracle evaluations spent by the non-emptiness test.
    pub sfm_evaluations: u64,
}

/// Least-core value with essential coalitions, dual weights, the last
/// infeasibility certificate, and the full iteration trace.
#[derive(Debug, Clone)]
pub struct LeastCoreResult {
    pub epsilon_star: Rational,
    /// `𝒮 = 𝒫 ∪ {N∖Q}`: a nonempty set of essential coalitions (not claimed
    /// exhaustive), ascending by mask.
    pub essential: Vec<Coalition>,
    /// Optimal dual weights: `−1/(|𝒫|+|𝒬|)` on each essential coalition,
    /// `|𝒬|/(|𝒫|+|𝒬|)` on the grand coalition.
    pub dual_weights: Vec<(Coalition, Rational)>,
    /// Farkas certificate of the final infeasible ε (proves optimality from
    /// above together with feasibility at ε*).
    pub farkas: Option<FarkasCertificate>,
    pub trace: Vec<TraceEntry>,
}

/// Least core of a convex game; reference player is the lowest index and the
/// bound mode follows the representation (exact for explicit tables).
pub fn least_core(game: &Game) -> Result<LeastCoreResult> {
    let mode = if game.representation() == "explicit-table" {
        BoundMode::Exact
    } else {
        BoundMode::Oracle
    };
    least_core_with(game, 0, mode)
}

/// Least core over any convex value oracle (possibly on a scattered ground),
/// with an explicit reference player and bound mode.
pub fn least_core_with<V: SetFunction>(
    v: &V,
    s: usize,
    mode: BoundMode,
) -> Result<LeastCoreResult> {
    let ground = v.ground();
    let m = ground.len();
    if m < 2 {
        return Err(Error::domain(
            "least core needs at least two players (the ε-LP is unbounded otherwise)".to_string(),
        ));
    }
    if !ground.contains(s) {
        return Err(Error::input(format!(
            "reference player {} is not in the ground set {ground}",
            s + 1
        )));
    }

    let big_m = bound_m(v, mode)?;
    let grand_value = v.eval(ground);
    let mut eps = rat(2) * big_m;
    let mut prev_witness: Option<Coalition> = None;
    let mut farkas: Option<FarkasCertificate> = None;
    let mut trace: Vec<TraceEntry> = Vec::new();

    loop {
        let shifted = ShiftedGame::new(v, eps.clone());
        let outcome = core_nonempty_test(&shifted, s)?;

        if !outcome.min_value.is_negative() {
            // Terminating round: reuse the previous witness, whose partitions
            // recomputed at the final ε certify value exactly zero.
            let witness = prev_witness.ok_or_else(|| {
                Error::domain(
                    "the initial ε = 2M cannot be feasible for a two-or-more player game"
                        .to_string(),
                )
            })?;
            let u = dual_function(&shifted, s);
            let pc = superadditive_cover(&shifted, witness)?;
            let qc = superadditive_cover(&u, witness)?;
            let slack = -&pc.value - &qc.value;
            if slack != rat(0) {
                return Err(Error::domain(format!(
                    "termination invariant broken: previous witness has slack {slack} at ε = {eps}"
                )));
            }
            let denom = rat((pc.partition.size() + qc.partition.size()) as i64);
            let mut essential: Vec<Coalition> = pc
                .partition
                .blocks()
                .iter()
                .copied()
                .chain(qc.partition.blocks().iter().map(|q| ground.minus(*q)))
                .collect();
            essential.sort();
            let mut dual_weights: Vec<(Coalition, Rational)> = essential
                .iter()
                .map(|e| (*e, -rat(1) / &denom))
                .collect();
            dual_weights.push((ground, rat(qc.partition.size() as i64) / &denom));
            trace.push(TraceEntry {
                epsilon: eps.clone(),
                witness,
                partition_sizes: pc.partition.size() + qc.partition.size(),
                sfm_evaluations: outcome.evaluations + pc.evaluations + qc.evaluations,
            });
            return Ok(LeastCoreResult {
                epsilon_star: eps,
                essential,
                dual_weights,
                farkas,
                trace,
            });
        }

        let witness = outcome.witness;
        let p = outcome.v_partition;
        let q = outcome.u_partition;
        farkas = Some(farkas_certificate(&p, &q, ground)?);
        trace.push(TraceEntry {
            epsilon: eps.clone(),
            witness,
            partition_sizes: p.size() + q.size(),
            sfm_evaluations: outcome.evaluations,
        });
        if trace.len() > 2 * m - 3 {
            return Err(Error::domain(
                "least-core search exceeded its iteration bound; input is likely not convex"
                    .to_string(),
            ));
        }

        // Next candidate from the certificate:
        // (|𝒬|·v(N) − Σ_P v(P) − Σ_Q v(N∖Q)) / (|𝒫| + |𝒬|).
        let sum_p: Rational = p.blocks().iter().map(|b| v.eval(*b)).sum();
        let sum_q: Rational = q.blocks().iter().map(|b| v.eval(ground.minus(*b))).sum();
        let next = (rat(q.size() as i64) * &grand_value - sum_p - sum_q)
            / rat((p.size() + q.size()) as i64);
        debug_assert!(next < eps, "candidate ε must strictly decrease");
        eps = next;
        prev_witness = Some(witness);
    }
}

/// Minimum excess `min_{∅≠S⊊N} x(S) − v(S)` of a preimputation, through
/// `n(n−1)` constrained submodular minimizations (force `i` in, `j` out).
/// A point is in the least core iff this equals ε*.
pub fn min_excess(game: &Game, x: &Allocation) -> Result<(Rational, Coalition)> {
    let n = game.player_count();
    if n < 2 {
        return Err(Error::domain(
            "minimum excess needs at least two players".to_string(),
        ));
    }
    if !x.is_preimputation(game) {
        return Err(Error::input(
            "allocation is not a preimputation of this game".to_string(),
        ));
    }
    let ground = game.grand();
    let f = FnOracle::new(ground, |s: Coalition| x.sum_over(s) - game.value(s));
    let mut best: Option<(Rational, Coalition)> = None;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let r = sfm::minimize_constrained(
                &f,
                Coalition::singleton(n, i),
                Coalition::singleton(n, j),
            )?;
            if best.as_ref().is_none_or(|(b, _)| r.min_value < *b) {
                best = Some((r.min_value, r.minimizer));
            }
        }
    }
    Ok(best.expect("n ≥ 2 yields at least one pair"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::is_crossing_supermodular;
    use crate::oracle;
    use crate::rational::frac;

    fn c(n: usize, players: &[usize]) -> Coalition {
        Coalition::from_players(n, players).unwrap()
    }

    #[test]
    fn shifted_game_values() {
        let g = Game::kuipers_counterexample();
        let sh = ShiftedGame::new(&g, rat(5));
        assert_eq!(sh.eval(Coalition::empty(4)), rat(0));
        assert_eq!(sh.eval(Coalition::full(4)), rat(10));
        assert_eq!(sh.eval(c(4, &[2])), rat(5));
        assert_eq!(sh.eval(c(4, &[0, 1])), rat(8));
    }

    #[test]
    fn nonemptiness_matches_the_known_threshold() {
        // Least-core value of the fixture is 2: the shift by 2 keeps the core
        // non-empty, the shift by 3 empties it.
        let g = Game::kuipers_counterexample();
        for s in 0..4 {
            let sh = ShiftedGame::new(&g, rat(2));
            let out = core_nonempty_test(&sh, s).unwrap();
            assert!(out.core_is_nonempty(), "ε = 2 must be feasible (s = {s})");
            assert!(out.witness.is_empty());

            let sh = ShiftedGame::new(&g, rat(3));
            let out = core_nonempty_test(&sh, s).unwrap();
            assert!(!out.core_is_nonempty(), "ε = 3 must be infeasible (s = {s})");
            assert!(!out.witness.is_empty());
            // The partitions certify the violation as a Farkas certificate.
            let cert = farkas_certificate(&out.v_partition, &out.u_partition, g.grand()).unwrap();
            assert!(cert.satisfies_system_d(&g, &rat(3)));
        }
    }

    #[test]
    fn zero_game_core_is_trivially_nonempty() {
        let g = Game::zero(3);
        for s in 0..3 {
            let out = core_nonempty_test(&g, s).unwrap();
            assert_eq!(out.min_value, rat(0));
            assert!(out.witness.is_empty());
        }
    }

    #[test]
    fn bound_modes() {
        let g = Game::kuipers_counterexample();
        assert_eq!(bound_m(&g, BoundMode::Exact).unwrap(), rat(11));
        let z = Game::zero(3);
        assert_eq!(bound_m(&z, BoundMode::Exact).unwrap(), rat(1));
        assert_eq!(bound_m(&z, BoundMode::Oracle).unwrap(), rat(1));
        // Oracle mode is a valid (possibly looser) bound on every game:
        // strictly above max |v|, which equals the exact-mode M minus one.
        for seed in 0..10u64 {
            let g = Game::random_convex(5, seed, (0, 9), 2).unwrap();
            let m = bound_m(&g, BoundMode::Oracle).unwrap();
            let exact = bound_m(&g, BoundMode::Exact).unwrap();
            assert!(m > exact - rat(1), "oracle-mode M must exceed max |v|");
        }
    }

    #[test]
    fn least_core_of_the_counterexample() {
        let g = Game::kuipers_counterexample();
        let r = least_core(&g).unwrap();
        assert_eq!(r.epsilon_star, rat(2));
        assert!(!r.essential.is_empty());
        for e in &r.essential {
            assert!(
                oracle::brute_essential(&g, *e).unwrap(),
                "{e} reported essential but fails the LP tightness test"
            );
        }
        // Dual weights are feasible for the dual LP and attain ε*.
        let obj: Rational = r
            .dual_weights
            .iter()
            .map(|(s, mu)| mu * g.value(*s))
            .sum();
        assert_eq!(obj, r.epsilon_star);
        let total: Rational = r
            .dual_weights
            .iter()
            .filter(|(s, _)| *s != g.grand())
            .map(|(_, mu)| mu.clone())
            .sum();
        assert_eq!(total, rat(-1));
        // Trace shape: starts at 2M, strictly decreasing, bounded length.
        assert_eq!(r.trace[0].epsilon, rat(22));
        assert!(r.trace.len() >= 2 && r.trace.len() <= 6);
        for w in r.trace.windows(2) {
            assert!(w[1].epsilon < w[0].epsilon);
        }
        assert!(r.farkas.is_some());
    }

    #[test]
    fn least_core_of_additive_and_two_player_games() {
        let add = Game::additive(&[rat(1), rat(2), rat(3)]).unwrap();
        assert_eq!(least_core(&add).unwrap().epsilon_star, rat(0));

        let two = Game::from_entries(
            2,
            rat(0),
            [(c(2, &[1]), rat(1)), (c(2, &[0, 1]), rat(6))],
        )
        .unwrap();
        let r = least_core(&two).unwrap();
        assert_eq!(r.epsilon_star, frac(5, 2));
        // Both singletons are essential in a two-player game.
        assert_eq!(r.essential, vec![c(2, &[0]), c(2, &[1])]);
    }

    #[test]
    fn least_core_rejects_single_player() {
        let g = Game::explicit(1, vec![rat(0), rat(1)]).unwrap();
        assert!(matches!(least_core(&g), Err(Error::Domain(_))));
    }

    #[test]
    fn epsilon_star_is_independent_of_reference_player_and_bound_mode() {
        for seed in 0..5u64 {
            let g = Game::random_convex(4, seed + 100, (0, 9), 2).unwrap();
            let base = least_core_with(&g, 0, BoundMode::Exact).unwrap().epsilon_star;
            for s in 1..4 {
                let r = least_core_with(&g, s, BoundMode::Exact).unwrap();
                assert_eq!(r.epsilon_star, base, "s = {s}");
            }
            let r = least_core_with(&g, 0, BoundMode::Oracle).unwrap();
            assert_eq!(r.epsilon_star, base);
        }
    }

    #[test]
    fn shifted_games_stay_crossing_supermodular() {
        let g = Game::kuipers_counterexample();
        for eps in [rat(-2), rat(0), rat(2), rat(7)] {
            let sh = ShiftedGame::new(&g, eps);
            assert!(is_crossing_supermodular(&sh).unwrap().holds());
        }
    }

    #[test]
    fn farkas_certificate_example() {
        // 𝒫 = 𝒬 = {{4}} on the fixture: λ_{4} = 1, λ_{1,2,3} = 1, λ_N = −1.
        let g = Game::kuipers_counterexample();
        let p = ProperPartition::new(vec![c(4, &[3])]).unwrap();
        let q = ProperPartition::new(vec![c(4, &[3])]).unwrap();
        let cert = farkas_certificate(&p, &q, g.grand()).unwrap();
        assert_eq!(
            cert.lambda,
            vec![
                (c(4, &[0, 1, 2]), rat(1)),
                (c(4, &[3]), rat(1)),
                (Coalition::full(4), rat(-1)),
            ]
        );
        assert!(cert.balance_holds());
        // Objective 2ε − 4: positive exactly above the least-core value.
        assert_eq!(cert.objective(&g, &rat(3)), rat(2));
        assert!(cert.satisfies_system_d(&g, &rat(3)));
        assert!(!cert.satisfies_system_d(&g, &rat(2)));
    }

    #[test]
    fn farkas_certificate_rejects_mismatched_partitions() {
        let p = ProperPartition::new(vec![c(4, &[3])]).unwrap();
        let q = ProperPartition::new(vec![c(4, &[2])]).unwrap();
        assert!(farkas_certificate(&p, &q, Coalition::full(4)).is_err());
    }

    #[test]
    fn min_excess_examples() {
        let g = Game::kuipers_counterexample();
        let nu = Allocation::new(vec![frac(5, 2), frac(7, 2), rat(2), rat(2)]);
        let (e, s) = min_excess(&g, &nu).unwrap();
        assert_eq!(e, rat(2));
        assert_eq!(nu.sum_over(s) - g.value(s), rat(2));

        let greedy = Allocation::new(vec![rat(0), rat(3), rat(3), rat(4)]);
        let (e, s) = min_excess(&g, &greedy).unwrap();
        assert_eq!(e, rat(0));
        assert_eq!(s, c(4, &[0]));

        let add = Game::additive(&[rat(1), rat(2), rat(3)]).unwrap();
        let w = Allocation::new(vec![rat(1), rat(2), rat(3)]);
        let (e, s) = min_excess(&add, &w).unwrap();
        assert_eq!(e, rat(0));
        assert_eq!(s.len(), 1);

        let bad = Allocation::new(vec![rat(1), rat(1), rat(1), rat(1)]);
        assert!(min_excess(&g, &bad).is_err());
    }

    #[test]
    fn min_excess_equals_epsilon_star_exactly_on_least_core_points() {
        let g = Game::kuipers_counterexample();
        let nu = Allocation::new(vec![frac(5, 2), frac(7, 2), rat(2), rat(2)]);
        let r = least_core(&g).unwrap();
        assert_eq!(min_excess(&g, &nu).unwrap().0, r.epsilon_star);
    }
}
