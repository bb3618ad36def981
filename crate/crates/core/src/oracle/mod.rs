//! Exact brute-force ground truth, independent of the combinatorial solvers.
//!
//! Everything here goes through dense linear programs or outright
//! enumeration: the direct least-core LP, essential-coalition tightness by
//! re-solves, the sequential-LP nucleolus, Bell-number partition enumeration
//! for covers, and sorted excess vectors. Deliberately small-n (refuses above
//! [`DEFAULT_MAX_N`] unless told otherwise) and deliberately dumb — this is
//! the yardstick the fast path is measured against.

mod simplex;

pub use simplex::{
    lp_solve, lp_solve_dualized, Constraint, LinearProgram, LpOutcome, Sense, MAX_LP_ROWS,
    MAX_LP_VARS,
};

use std::cmp::Ordering;

use num::Zero;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::game::{Allocation, Game};
use crate::rational::{rat, Rational};
use crate::sfm::SetFunction;

/// Default player cap for the oracle (LP (2) has `2^n − 2` rows).
pub const DEFAULT_MAX_N: usize = 8;

/// Partition enumeration cap (Bell(10) = 115975 partitions).
pub const MAX_PARTITION_GROUND: usize = 10;

fn check_size(n: usize, max_n: usize) -> Result<()> {
    if n > max_n {
        return Err(Error::Size {
            what: "brute-force oracle",
            limit: max_n,
            got: n,
        });
    }
    Ok(())
}

/// All proper nonempty coalitions in ascending mask order.
fn proper_nonempty(n: usize) -> impl Iterator<Item = Coalition> {
    let grand = (1u32 << n) - 1;
    (1..grand).map(move |mask| Coalition::from_mask(mask, n).unwrap())
}

/// The least-core LP: maximize ε subject to `x(S) ≥ v(S) + ε` for every
/// proper nonempty coalition and `x(N) = v(N)`. Variables are
/// `(x_1, …, x_n, ε)`, all free.
pub fn least_core_lp(game: &Game) -> LinearProgram {
    let n = game.player_count();
    let mut obj = vec![rat(0); n + 1];
    obj[n] = rat(1);
    let mut lp = LinearProgram::maximize(obj);
    for s in proper_nonempty(n) {
        let mut coeffs = vec![rat(0); n + 1];
        for p in s.players() {
            coeffs[p] = rat(1);
        }
        coeffs[n] = rat(-1);
        lp = lp.ge(coeffs, game.value(s));
    }
    let mut eff = vec![rat(1); n + 1];
    eff[n] = rat(0);
    lp.eq(eff, game.value(game.grand()))
}

/// The dual of the least-core LP, in nonnegated variables `m_S = −μ_S`
/// (ascending mask order) followed by the free grand-coalition weight.
pub fn least_core_dual_lp(game: &Game) -> LinearProgram {
    let n = game.player_count();
    let sets: Vec<Coalition> = proper_nonempty(n).collect();
    let k = sets.len();
    let mut obj: Vec<Rational> = sets.iter().map(|s| -game.value(*s)).collect();
    obj.push(game.value(game.grand()));
    let mut lp = LinearProgram::minimize(obj);
    lp.nonneg = vec![true; k + 1];
    lp.nonneg[k] = false;
    for p in 0..n {
        let mut coeffs: Vec<Rational> = sets
            .iter()
            .map(|s| if s.contains(p) { rat(-1) } else { rat(0) })
            .collect();
        coeffs.push(rat(1));
        lp = lp.eq(coeffs, rat(0));
    }
    let mut norm = vec![rat(1); k + 1];
    norm[k] = rat(0);
    lp.eq(norm, rat(1))
}

fn expect_optimal(outcome: LpOutcome, what: &str) -> Result<(Rational, Vec<Rational>)> {
    match outcome {
        LpOutcome::Optimal { value, point } => Ok((value, point)),
        other => Err(Error::domain(format!("{what}: expected optimum, got {other:?}"))),
    }
}

/// Solves the least-core LP exactly; returns `(ε*, x*)`.
pub fn brute_least_core(game: &Game) -> Result<(Rational, Allocation)> {
    brute_least_core_bounded(game, DEFAULT_MAX_N)
}

pub fn brute_least_core_bounded(game: &Game, max_n: usize) -> Result<(Rational, Allocation)> {
    let n = game.player_count();
    check_size(n, max_n)?;
    if n < 2 {
        return Err(Error::domain(
            "least core needs at least two players (no proper nonempty coalition otherwise)"
                .to_string(),
        ));
    }
    let lp = least_core_lp(game);
    let (value, mut point) = expect_optimal(lp_solve_dualized(&lp)?, "least-core LP")?;
    point.truncate(n);
    Ok((value, Allocation::new(point)))
}

/// Is `x(S) = v(S) + ε*` in *every* optimum of the least-core LP? Decided by
/// re-solving with ε fixed at ε* and the objective switched to maximizing
/// `x(S)`.
pub fn brute_essential(game: &Game, s: Coalition) -> Result<bool> {
    brute_essential_bounded(game, s, DEFAULT_MAX_N)
}

pub fn brute_essential_bounded(game: &Game, s: Coalition, max_n: usize) -> Result<bool> {
    let (eps, _) = brute_least_core_bounded(game, max_n)?;
    brute_essential_given(game, s, &eps)
}

/// As [`brute_essential`], reusing a precomputed least-core value.
pub fn brute_essential_given(game: &Game, s: Coalition, eps_star: &Rational) -> Result<bool> {
    let n = game.player_count();
    if s.ground() != n || s.is_empty() || s == game.grand() {
        return Err(Error::input(format!(
            "essential-coalition query needs a proper nonempty coalition of the game, got {s}"
        )));
    }
    let mut obj = vec![rat(0); n];
    for p in s.players() {
        obj[p] = rat(1);
    }
    let mut lp = LinearProgram::maximize(obj);
    for t in proper_nonempty(n) {
        let mut coeffs = vec![rat(0); n];
        for p in t.players() {
            coeffs[p] = rat(1);
        }
        lp = lp.ge(coeffs, game.value(t) + eps_star);
    }
    lp = lp.eq(vec![rat(1); n], game.value(game.grand()));
    let (max_share, _) = expect_optimal(lp_solve_dualized(&lp)?, "essential-coalition probe")?;
    Ok(max_share == game.value(s) + eps_star)
}

/// Exact feasibility of the ε-shifted core system: `x(S) ≥ v(S) + ε` for all
/// proper nonempty `S`, `x(N) = v(N)`.
pub fn system_p_feasible(game: &Game, eps: &Rational) -> Result<bool> {
    let n = game.player_count();
    let mut lp = LinearProgram::maximize(vec![rat(0); n]);
    for t in proper_nonempty(n) {
        let mut coeffs = vec![rat(0); n];
        for p in t.players() {
            coeffs[p] = rat(1);
        }
        lp = lp.ge(coeffs, game.value(t) + eps);
    }
    lp = lp.eq(vec![rat(1); n], game.value(game.grand()));
    Ok(lp_solve_dualized(&lp)? != LpOutcome::Infeasible)
}

/// Sequential-LP prenucleolus: maximize the lowest excess, freeze the
/// coalitions tight in every optimum, re-optimize the next level over the
/// rest, until the frozen equalities pin the point down.
pub fn brute_nucleolus(game: &Game) -> Result<Allocation> {
    brute_nucleolus_bounded(game, DEFAULT_MAX_N)
}

pub fn brute_nucleolus_bounded(game: &Game, max_n: usize) -> Result<Allocation> {
    let n = game.player_count();
    check_size(n, max_n)?;
    if n == 1 {
        return Ok(Allocation::new(vec![game.value(game.grand())]));
    }

    let grand_value = game.value(game.grand());
    let mut remaining: Vec<Coalition> = proper_nonempty(n).collect();
    let mut frozen: Vec<(Coalition, Rational)> = Vec::new();

    let indicator = |s: Coalition| -> Vec<Rational> {
        (0..n)
            .map(|p| if s.contains(p) { rat(1) } else { rat(0) })
            .collect()
    };

    loop {
        // Level LP over the remaining coalitions.
        let mut obj = vec![rat(0); n + 1];
        obj[n] = rat(1);
        let mut lp = LinearProgram::maximize(obj);
        for t in &remaining {
            let mut coeffs = indicator(*t);
            coeffs.push(rat(-1));
            lp = lp.ge(coeffs, game.value(*t));
        }
        for (t, c) in &frozen {
            let mut coeffs = indicator(*t);
            coeffs.push(rat(0));
            lp = lp.eq(coeffs, c.clone());
        }
        let mut eff = vec![rat(1); n + 1];
        eff[n] = rat(0);
        lp = lp.eq(eff, grand_value.clone());

        let (eps, mut point) = expect_optimal(lp_solve_dualized(&lp)?, "nucleolus level LP")?;
        point.truncate(n);
        let x = Allocation::new(point);

        // Freeze the remaining coalitions tight in all optima of this level.
        // Only coalitions tight at the found optimum can qualify.
        let mut still = Vec::new();
        let mut froze = 0usize;
        for t in &remaining {
            let bound = game.value(*t) + &eps;
            if x.sum_over(*t) == bound && face_max_share(game, *t, &eps, &remaining, &frozen)? == bound
            {
                frozen.push((*t, bound));
                froze += 1;
            } else {
                still.push(*t);
            }
        }
        remaining = still;
        if froze == 0 {
            return Err(Error::domain(
                "sequential LP stalled: no coalition tight in all optima".to_string(),
            ));
        }

        // Unique once the frozen equalities (plus efficiency) have full rank.
        let mut rows: Vec<Vec<Rational>> = frozen.iter().map(|(t, _)| indicator(*t)).collect();
        rows.push(vec![rat(1); n]);
        if rank(rows) == n {
            return Ok(x);
        }
        if remaining.is_empty() {
            return Err(Error::domain(
                "sequential LP exhausted coalitions without pinning the point".to_string(),
            ));
        }
    }
}

/// Max of `x(S)` over the level-optimal face.
fn face_max_share(
    game: &Game,
    s: Coalition,
    eps: &Rational,
    remaining: &[Coalition],
    frozen: &[(Coalition, Rational)],
) -> Result<Rational> {
    let n = game.player_count();
    let indicator = |t: Coalition| -> Vec<Rational> {
        (0..n)
            .map(|p| if t.contains(p) { rat(1) } else { rat(0) })
            .collect()
    };
    let mut lp = LinearProgram::maximize(indicator(s));
    for t in remaining {
        lp = lp.ge(indicator(*t), game.value(*t) + eps);
    }
    for (t, c) in frozen {
        lp = lp.eq(indicator(*t), c.clone());
    }
    lp = lp.eq(vec![rat(1); n], game.value(game.grand()));
    Ok(expect_optimal(lp_solve_dualized(&lp)?, "tightness probe")?.0)
}

/// Rank of a rational matrix by Gaussian elimination.
fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut r = 0usize;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        for e in rows[r].iter_mut() {
            *e /= &pivot;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (e, pe) in row.iter_mut().zip(&pivot_row) {
                    *e -= &f * pe;
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Superadditive cover by exhaustive enumeration of all set partitions of
/// `s` (Bell-number work, ground capped at [`MAX_PARTITION_GROUND`]).
pub fn brute_superadditive_cover(v: &impl SetFunction, s: Coalition) -> Result<Rational> {
    if s.ground() != v.ground().ground() || !s.is_subset_of(v.ground()) {
        return Err(Error::input(format!(
            "{s} is not within the oracle ground {}",
            v.ground()
        )));
    }
    if s.len() > MAX_PARTITION_GROUND {
        return Err(Error::Size {
            what: "partition enumeration",
            limit: MAX_PARTITION_GROUND,
            got: s.len(),
        });
    }
    if s.is_empty() {
        return Ok(rat(0));
    }
    let members: Vec<usize> = s.players().collect();
    let ground = s.ground();
    let mut best: Option<Rational> = None;
    let mut blocks: Vec<Coalition> = Vec::new();
    fn go(
        members: &[usize],
        idx: usize,
        ground: usize,
        blocks: &mut Vec<Coalition>,
        v: &impl SetFunction,
        best: &mut Option<Rational>,
    ) {
        if idx == members.len() {
            let total: Rational = blocks.iter().map(|b| v.eval(*b)).sum();
            if best.as_ref().is_none_or(|b| total > *b) {
                *best = Some(total);
            }
            return;
        }
        let p = members[idx];
        for i in 0..blocks.len() {
            blocks[i] = blocks[i].insert(p);
            go(members, idx + 1, ground, blocks, v, best);
            blocks[i] = blocks[i].remove(p);
        }
        blocks.push(Coalition::singleton(ground, p));
        go(members, idx + 1, ground, blocks, v, best);
        blocks.pop();
    }
    go(&members, 0, ground, &mut blocks, v, &mut best);
    Ok(best.expect("nonempty set has at least one partition"))
}

/// The sorted excess vector θ(x, v): `x(S) − v(S)` over all proper nonempty
/// coalitions, non-decreasing, length `2^n − 2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcessVector(Vec<Rational>);

impl ExcessVector {
    pub fn components(&self) -> &[Rational] {
        &self.0
    }
}

pub fn excess_vector(game: &Game, x: &Allocation) -> Result<ExcessVector> {
    excess_vector_bounded(game, x, DEFAULT_MAX_N)
}

pub fn excess_vector_bounded(game: &Game, x: &Allocation, max_n: usize) -> Result<ExcessVector> {
    let n = game.player_count();
    check_size(n, max_n)?;
    if x.len() != n {
        return Err(Error::input("allocation length does not match the game".to_string()));
    }
    let mut v: Vec<Rational> = proper_nonempty(n)
        .map(|s| x.sum_over(s) - game.value(s))
        .collect();
    v.sort();
    Ok(ExcessVector(v))
}

/// Standard lexicographic order on equally long excess vectors.
pub fn lex_compare(a: &ExcessVector, b: &ExcessVector) -> Ordering {
    debug_assert_eq!(a.0.len(), b.0.len());
    a.0.cmp(&b.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn c(n: usize, players: &[usize]) -> Coalition {
        Coalition::from_players(n, players).unwrap()
    }

    #[test]
    fn least_core_lp_on_counterexample_game() {
        let g = Game::kuipers_counterexample();
        let lp = least_core_lp(&g);
        assert_eq!(lp.constraints.len(), 15); // 14 proper nonempty + efficiency
        let (value, point) = match lp_solve(&lp).unwrap() {
            LpOutcome::Optimal { value, point } => (value, point),
            other => panic!("unexpected {other:?}"),
        };
        assert_eq!(value, rat(2));
        assert!(lp.is_feasible(&point));
    }

    #[test]
    fn brute_least_core_examples() {
        let g = Game::kuipers_counterexample();
        let (eps, x) = brute_least_core(&g).unwrap();
        assert_eq!(eps, rat(2));
        assert!(x.is_preimputation(&g));

        let add = Game::additive(&[rat(1), rat(2), rat(3)]).unwrap();
        let (eps, _) = brute_least_core(&add).unwrap();
        assert_eq!(eps, rat(0));

        let two = Game::from_entries(
            2,
            rat(0),
            [(c(2, &[1]), rat(1)), (c(2, &[0, 1]), rat(6))],
        )
        .unwrap();
        let (eps, x) = brute_least_core(&two).unwrap();
        assert_eq!(eps, frac(5, 2));
        assert_eq!(x.components(), &[frac(5, 2), frac(7, 2)]);
    }

    #[test]
    fn primal_and_dual_lp_agree() {
        for (seed, n) in [(1u64, 3usize), (2, 4), (3, 5)] {
            let g = Game::random_convex(n, seed, (0, 9), 2).unwrap();
            let (primal, _) = expect_optimal(lp_solve_dualized(&least_core_lp(&g)).unwrap(), "p")
                .unwrap();
            let (dual, _) = expect_optimal(lp_solve_dualized(&least_core_dual_lp(&g)).unwrap(), "d")
                .unwrap();
            assert_eq!(primal, dual, "strong duality violated, n={n} seed={seed}");
        }
    }

    #[test]
    fn essential_coalitions_of_counterexample() {
        let g = Game::kuipers_counterexample();
        assert!(brute_essential(&g, c(4, &[2])).unwrap());
        assert!(brute_essential(&g, c(4, &[3])).unwrap());
        // {2} has excess 3/2 at the nucleolus; not essential.
        assert!(!brute_essential(&g, c(4, &[1])).unwrap());
        assert!(brute_essential(&g, Coalition::empty(4)).is_err());
        assert!(brute_essential(&g, Coalition::full(4)).is_err());
    }

    #[test]
    fn essential_in_additive_game() {
        let g = Game::additive(&[rat(1), rat(2), rat(3)]).unwrap();
        assert!(brute_essential(&g, c(3, &[0])).unwrap());
    }

    #[test]
    fn nucleolus_of_counterexample() {
        let g = Game::kuipers_counterexample();
        let x = brute_nucleolus(&g).unwrap();
        assert_eq!(
            x.components(),
            &[frac(5, 2), frac(7, 2), rat(2), rat(2)]
        );
    }

    #[test]
    fn nucleolus_of_small_games() {
        let add = Game::additive(&[rat(1), rat(2), rat(3)]).unwrap();
        assert_eq!(
            brute_nucleolus(&add).unwrap().components(),
            &[rat(1), rat(2), rat(3)]
        );

        let two = Game::from_entries(
            2,
            rat(0),
            [(c(2, &[1]), rat(1)), (c(2, &[0, 1]), rat(6))],
        )
        .unwrap();
        assert_eq!(
            brute_nucleolus(&two).unwrap().components(),
            &[frac(5, 2), frac(7, 2)]
        );

        let single = Game::explicit(1, vec![rat(0), rat(7)]).unwrap();
        assert_eq!(brute_nucleolus(&single).unwrap().components(), &[rat(7)]);
    }

    #[test]
    fn nucleolus_lies_in_core_and_lex_dominates() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for seed in 0..6u64 {
            let n = 3 + (seed as usize % 5);
            let g = Game::random_convex(n, seed + 40, (0, 9), 2).unwrap();
            let nu = brute_nucleolus(&g).unwrap();
            assert!(nu.in_core(&g));
            // The combinatorial solver lands on the same point, so the lex
            // spot-check covers it too.
            assert_eq!(
                crate::nucleolus::nucleolus_divide_conquer(&g).unwrap().allocation,
                nu
            );
            let theta_nu = excess_vector(&g, &nu).unwrap();
            for _ in 0..50 {
                // Random zero-sum perturbation keeps it a preimputation.
                let mut delta: Vec<Rational> =
                    (0..n).map(|_| frac(rng.gen_range(-6..=6), 3)).collect();
                let shift: Rational = delta.iter().cloned().sum::<Rational>() / rat(n as i64);
                for d in delta.iter_mut() {
                    *d -= &shift;
                }
                let y = Allocation::new(
                    nu.components()
                        .iter()
                        .zip(&delta)
                        .map(|(a, b)| a + b)
                        .collect(),
                );
                assert!(y.is_preimputation(&g));
                let theta_y = excess_vector(&g, &y).unwrap();
                assert_ne!(
                    lex_compare(&theta_nu, &theta_y),
                    Ordering::Less,
                    "nucleolus must lexicographically dominate"
                );
            }
        }
    }

    #[test]
    fn excess_vector_examples() {
        let g = Game::kuipers_counterexample();
        let nu = Allocation::new(vec![frac(5, 2), frac(7, 2), rat(2), rat(2)]);
        let theta = excess_vector(&g, &nu).unwrap();
        assert_eq!(theta.components().len(), 14);
        assert_eq!(theta.components()[0], rat(2), "minimum excess equals ε*");

        let add = Game::additive(&[rat(1), rat(2), rat(3)]).unwrap();
        let w = Allocation::new(vec![rat(1), rat(2), rat(3)]);
        let theta = excess_vector(&add, &w).unwrap();
        assert!(theta.components().iter().all(Zero::is_zero));
    }

    #[test]
    fn brute_cover_examples() {
        let g = Game::kuipers_counterexample();
        for s in g.grand().subsets() {
            assert_eq!(
                brute_superadditive_cover(&g, s).unwrap(),
                g.value(s),
                "cover of a convex game is the game itself"
            );
        }
        assert_eq!(
            brute_superadditive_cover(&g, Coalition::empty(4)).unwrap(),
            rat(0)
        );

        let flat = Game::from_entries(
            2,
            rat(0),
            [
                (c(2, &[0]), rat(1)),
                (c(2, &[1]), rat(1)),
                (c(2, &[0, 1]), rat(1)),
            ],
        )
        .unwrap();
        assert_eq!(
            brute_superadditive_cover(&flat, c(2, &[0, 1])).unwrap(),
            rat(2)
        );
    }

    #[test]
    fn oracle_refuses_oversize() {
        let g = Game::random_convex(9, 1, (0, 3), 1).unwrap();
        assert!(matches!(brute_least_core(&g), Err(Error::Size { .. })));
        assert!(matches!(brute_nucleolus(&g), Err(Error::Size { .. })));
        assert!(brute_least_core_bounded(&g, 9).is_ok());
    }

    #[test]
    fn rank_helper() {
        assert_eq!(
            rank(vec![
                vec![rat(1), rat(0)],
                vec![rat(0), rat(1)],
                vec![rat(1), rat(1)],
            ]),
            2
        );
        assert_eq!(rank(vec![vec![rat(0), rat(0)]]), 0);
    }
}
