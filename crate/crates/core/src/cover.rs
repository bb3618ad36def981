//! Superadditive covers of intersecting supermodular functions.
//!
//! The cover `v̄(S)` is the best total value achievable by splitting `S` into
//! a proper partition and summing `v` over the blocks. For intersecting
//! supermodular `v` the cover is supermodular on the whole ground set, which
//! is what makes the sandwich-based core test work. The computation is a
//! greedy pass (one supermodular maximization per member of `S`) followed by
//! union-merging of overlapping greedy sets.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::rational::{rat, Rational};
use crate::sfm::{self, FnOracle, SetFunction};

/// Pairwise-disjoint nonempty blocks covering `union`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProperPartition {
    blocks: Vec<Coalition>,
    union: Coalition,
}

impl ProperPartition {
    /// Validates disjointness, nonemptiness and coverage. Blocks are stored
    /// in ascending mask order.
    pub fn new(mut blocks: Vec<Coalition>) -> Result<ProperPartition> {
        blocks.sort();
        let ground = match blocks.first() {
            None => return Err(Error::input("a proper partition cannot be empty of blocks; use ProperPartition::empty for S = ∅".to_string())),
            Some(b) => b.ground(),
        };
        let mut union = Coalition::empty(ground);
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::input("partition blocks must be nonempty".to_string()));
            }
            if !union.inter(*b).is_empty() {
                return Err(Error::input(format!("partition blocks overlap at {b}")));
            }
            union = union.union(*b);
        }
        Ok(ProperPartition { blocks, union })
    }

    /// The empty partition of the empty coalition.
    pub fn empty(ground: usize) -> ProperPartition {
        ProperPartition {
            blocks: Vec::new(),
            union: Coalition::empty(ground),
        }
    }

    pub fn blocks(&self) -> &[Coalition] {
        &self.blocks
    }

    pub fn union(&self) -> Coalition {
        self.union
    }

    pub fn size(&self) -> usize {
        self.blocks.len()
    }
}

/// Cover value together with a partition certificate attaining it.
#[derive(Debug, Clone)]
pub struct CoverResult {
    pub value: Rational,
    pub partition: ProperPartition,
    /// Oracle evaluations spent in the inner maximizations.
    pub evaluations: u64,
}

/// Computes the superadditive cover `v̄(S)` with a certificate.
///
/// `v` must be intersecting supermodular on `S` (caller-asserted; the greedy
/// exchange argument needs it). `S = ∅` yields `(0, empty partition)`.
///
/// Greedy phase: members of `S` are taken in increasing player order
/// `s_1 < … < s_k`; for each `i` the set `T_i` maximizes
/// `v(U) − x(U∖{s_i})` over `U ⊆ {s_1..s_i}` with `s_i ∈ U` (one supermodular
/// maximization over `{s_1..s_{i-1}}`), and `x_{s_i} ← v(T_i) − x(T_i∖{s_i})`.
/// Merge phase: overlapping `T_i` are repeatedly replaced by their union.
/// Ties in the argmax are broken toward the inclusion-wise minimal maximizer
/// (inherited from the minimization engine); any maximizer is sound.
pub fn superadditive_cover(v: &impl SetFunction, s: Coalition) -> Result<CoverResult> {
    let ground = v.ground();
    if s.ground() != ground.ground() || !s.is_subset_of(ground) {
        return Err(Error::input(format!(
            "{s} is not within the oracle ground {ground}"
        )));
    }
    if s.is_empty() {
        return Ok(CoverResult {
            value: rat(0),
            partition: ProperPartition::empty(s.ground()),
            evaluations: 0,
        });
    }

    let members: Vec<usize> = s.players().collect();
    let mut x: HashMap<usize, Rational> = HashMap::new();
    let sum_x = |x: &HashMap<usize, Rational>, t: Coalition| -> Rational {
        t.players().map(|p| x[&p].clone()).sum()
    };

    let mut greedy_sets: Vec<Coalition> = Vec::with_capacity(members.len());
    let mut evaluations = 0u64;
    let mut prefix = Coalition::empty(s.ground());
    for &p in &members {
        let f = FnOracle::new(prefix, |t: Coalition| {
            v.eval(t.insert(p)) - sum_x(&x, t)
        });
        let best = sfm::maximize_supermodular(&f)?;
        evaluations += best.evaluations;
        let t_i = best.minimizer.insert(p);
        x.insert(p, best.min_value.clone());
        debug_assert_eq!(best.min_value, v.eval(t_i) - sum_x(&x, t_i.remove(p)));
        greedy_sets.push(t_i);
        prefix = prefix.insert(p);
    }

    // Merge overlapping greedy sets until the family is disjoint.
    let mut family = greedy_sets;
    family.sort();
    family.dedup();
    loop {
        let mut merged = false;
        'scan: for a in 0..family.len() {
            for b in a + 1..family.len() {
                if !family[a].inter(family[b]).is_empty() {
                    let u = family[a].union(family[b]);
                    family.swap_remove(b);
                    family.swap_remove(a);
                    if !family.contains(&u) {
                        family.push(u);
                    }
                    family.sort();
                    merged = true;
                    break 'scan;
                }
            }
        }
        if !merged {
            break;
        }
    }

    let partition = ProperPartition::new(family)?;
    debug_assert_eq!(partition.union(), s);
    let value: Rational = partition.blocks().iter().map(|t| v.eval(*t)).sum();
    // The greedy potential x(S) equals the cover value at termination.
    debug_assert_eq!(value, sum_x(&x, s));

    Ok(CoverResult {
        value,
        partition,
        evaluations,
    })
}

/// The complement-side function `u(S) = w(N∖S) − w(N)` on the ground
/// `N∖{s}`, crossing supermodular whenever `w` is.
pub struct DualFunction<'a, W: SetFunction> {
    w: &'a W,
    ground: Coalition,
    grand_value: Rational,
}

pub fn dual_function<W: SetFunction>(w: &W, s: usize) -> DualFunction<'_, W> {
    let full = w.ground();
    debug_assert!(full.contains(s));
    let grand_value = w.eval(full);
    DualFunction {
        w,
        ground: full.remove(s),
        grand_value,
    }
}

impl<W: SetFunction> SetFunction for DualFunction<'_, W> {
    fn ground(&self) -> Coalition {
        self.ground
    }

    fn eval(&self, s: Coalition) -> Rational {
        self.w.eval(self.w.ground().minus(s)) - self.grand_value.clone()
    }
}

/// Uncrosses a multiset of coalitions: every crossing pair `X, Y`
/// (`X∩Y ≠ ∅`, neither contains the other) is replaced by `X∪Y, X∩Y` until
/// the family is laminar. Per-element coverage multiplicities are preserved,
/// and `Σ v` over the family never decreases when `v` is intersecting
/// supermodular. Terminates because `Σ |U||ground∖U|` strictly drops at every
/// step.
pub fn refine_family(family: &[Coalition]) -> Vec<Coalition> {
    let mut fam: Vec<Coalition> = family.to_vec();
    loop {
        let mut changed = false;
        'scan: for a in 0..fam.len() {
            for b in a + 1..fam.len() {
                let (x, y) = (fam[a], fam[b]);
                let inter = x.inter(y);
                if !inter.is_empty() && !x.is_subset_of(y) && !y.is_subset_of(x) {
                    fam[a] = x.union(y);
                    fam[b] = inter;
                    changed = true;
                    break 'scan;
                }
            }
        }
        if !changed {
            return fam;
        }
    }
}

/// Memoizing wrapper around [`superadditive_cover`] for one oracle within one
/// solver run: the core test probes the same coalitions across many
/// overlapping evaluations.
pub struct CoverCache<'a, F: SetFunction> {
    f: &'a F,
    memo: RefCell<HashMap<u32, CoverResult>>,
    evaluations: Cell<u64>,
}

impl<'a, F: SetFunction> CoverCache<'a, F> {
    pub fn new(f: &'a F) -> Self {
        CoverCache {
            f,
            memo: RefCell::new(HashMap::new()),
            evaluations: Cell::new(0),
        }
    }

    pub fn cover(&self, s: Coalition) -> Result<CoverResult> {
        if let Some(hit) = self.memo.borrow().get(&s.mask()) {
            return Ok(hit.clone());
        }
        let out = superadditive_cover(self.f, s)?;
        self.evaluations.set(self.evaluations.get() + out.evaluations);
        self.memo.borrow_mut().insert(s.mask(), out.clone());
        Ok(out)
    }

    pub fn value(&self, s: Coalition) -> Result<Rational> {
        Ok(self.cover(s)?.value)
    }

    /// Total oracle evaluations spent on cache misses.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.get()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Game;

    fn c(n: usize, players: &[usize]) -> Coalition {
        Coalition::from_players(n, players).unwrap()
    }

    #[test]
    fn cover_of_convex_game_is_the_game() {
        let g = Game::kuipers_counterexample();
        for s in g.grand().subsets() {
            let out = superadditive_cover(&g, s).unwrap();
            assert_eq!(out.value, g.value(s), "cover must equal v on convex games at {s}");
            let attained: Rational = out.partition.blocks().iter().map(|b| g.value(*b)).sum();
            assert_eq!(attained, out.value);
        }
        // Strict supermodularity at {1,2}: the certificate is the whole set.
        let out = superadditive_cover(&g, c(4, &[0, 1])).unwrap();
        assert_eq!(out.partition.blocks(), &[c(4, &[0, 1])]);
    }

    #[test]
    fn cover_of_empty_set_is_zero() {
        let g = Game::zero(3);
        let out = superadditive_cover(&g, Coalition::empty(3)).unwrap();
        assert_eq!(out.value, rat(0));
        assert_eq!(out.partition.size(), 0);
    }

    #[test]
    fn cover_splits_non_superadditive_pair() {
        // v({1}) = v({2}) = 1, v({1,2}) = 1: intersecting supermodular, and
        // the best proper partition of {1,2} is the two singletons.
        let g = Game::from_entries(
            2,
            rat(0),
            [
                (c(2, &[0]), rat(1)),
                (c(2, &[1]), rat(1)),
                (c(2, &[0, 1]), rat(1)),
            ],
        )
        .unwrap();
        let out = superadditive_cover(&g, c(2, &[0, 1])).unwrap();
        assert_eq!(out.value, rat(2));
        assert_eq!(out.partition.blocks(), &[c(2, &[0]), c(2, &[1])]);
    }

    #[test]
    fn cover_rejects_sets_outside_ground() {
        let g = Game::zero(3);
        assert!(superadditive_cover(&g, Coalition::full(4)).is_err());
    }

    #[test]
    fn dual_function_basics() {
        let g = Game::kuipers_counterexample();
        let u = dual_function(&g, 0);
        assert_eq!(u.ground().key(), "2,3,4");
        assert_eq!(u.eval(Coalition::empty(4)), rat(0));
        // u({4}) = v({1,2,3}) − v(N) = 6 − 10.
        assert_eq!(u.eval(c(4, &[3])), rat(-4));

        let z = Game::zero(3);
        let u = dual_function(&z, 0);
        for s in u.ground().subsets() {
            assert_eq!(u.eval(s), rat(0));
        }
    }

    #[test]
    fn refine_laminar_input_unchanged() {
        let fam = vec![c(4, &[0]), c(4, &[0, 1]), c(4, &[2])];
        assert_eq!(refine_family(&fam), fam);
    }

    #[test]
    fn refine_single_uncrossing_step() {
        let fam = vec![c(3, &[0, 1]), c(3, &[1, 2])];
        let out = refine_family(&fam);
        assert_eq!(out, vec![c(3, &[0, 1, 2]), c(3, &[1])]);
    }

    #[test]
    fn refine_preserves_coverage_multiplicity() {
        let fam = vec![
            c(5, &[0, 1, 2]),
            c(5, &[1, 2, 3]),
            c(5, &[2, 3, 4]),
            c(5, &[0, 4]),
        ];
        let out = refine_family(&fam);
        for p in 0..5 {
            let before = fam.iter().filter(|s| s.contains(p)).count();
            let after = out.iter().filter(|s| s.contains(p)).count();
            assert_eq!(before, after, "coverage of player {} changed", p + 1);
        }
        // Laminarity: every pair is nested or disjoint.
        for (a, x) in out.iter().enumerate() {
            for y in &out[a + 1..] {
                assert!(
                    x.inter(*y).is_empty() || x.is_subset_of(*y) || y.is_subset_of(*x),
                    "family not laminar: {x} vs {y}"
                );
            }
        }
    }

    #[test]
    fn partition_validation() {
        assert!(ProperPartition::new(vec![c(3, &[0]), c(3, &[0, 1])]).is_err());
        assert!(ProperPartition::new(vec![Coalition::empty(3)]).is_err());
        let p = ProperPartition::new(vec![c(3, &[1]), c(3, &[0])]).unwrap();
        assert_eq!(p.blocks(), &[c(3, &[0]), c(3, &[1])]);
        assert_eq!(p.union(), c(3, &[0, 1]));
    }
}
