//! Nucleolus computation through reduced games.
//!
//! Once an essential coalition `S` and the least-core value are known, the
//! nucleolus mass of `S` and of its complement are determined, and the
//! problem splits into two smaller reduced games that stay convex and
//! inherit the nucleolus componentwise. A reduced value never needs the
//! `2^k`-term expansion scanned naively: over the list of removed sets it is
//! the maximum of a supermodular function of the index set, so one
//! supermodular maximization per queried coalition suffices (memoized per
//! view). The per-player solver descends one chain per player; the
//! divide-and-conquer solver keeps a worklist of blocks and solves each once.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::game::{Allocation, Game};
use crate::least_core::{least_core_with, BoundMode};
use crate::rational::{rat, Rational};
use crate::sfm::{self, FnOracle, SetFunction};

/// A reduced game evaluated lazily against the base game.
///
/// `block` is the current player set; `ancestry` lists the sets removed along
/// the reduction chain together with their known nucleolus masses. The value
/// of `T ⊆ block` is `max_J (v(T ∪ ⋃_{j∈J} T_j) − Σ_{j∈J} mass_j)` over index
/// subsets `J` of the ancestry, computed by supermodular maximization.
pub struct ReducedGameView {
    base: Arc<Game>,
    block: Coalition,
    ancestry: Vec<(Coalition, Rational)>,
    memo: Mutex<HashMap<u32, Rational>>,
    evaluations: Arc<AtomicU64>,
}

impl ReducedGameView {
    /// The trivial view: whole ground set, empty ancestry.
    pub fn root(base: Arc<Game>) -> ReducedGameView {
        let block = base.grand();
        ReducedGameView {
            base,
            block,
            ancestry: Vec::new(),
            memo: Mutex::new(HashMap::new()),
            evaluations: Arc::new(AtomicU64::new(0)),
        }
    }

    /// A view with explicit ancestry. The block and the removed sets must be
    /// pairwise disjoint and together cover the base ground set.
    pub fn new(
        base: Arc<Game>,
        block: Coalition,
        ancestry: Vec<(Coalition, Rational)>,
    ) -> Result<ReducedGameView> {
        let mut seen = block;
        if block.is_empty() {
            return Err(Error::input("view block must be nonempty".to_string()));
        }
        for (t, _) in &ancestry {
            if t.is_empty() || !seen.inter(*t).is_empty() {
                return Err(Error::input(format!(
                    "removed set {t} overlaps the block or another removed set"
                )));
            }
            seen = seen.union(*t);
        }
        if seen != base.grand() {
            return Err(Error::input(
                "block and removed sets must cover all players".to_string(),
            ));
        }
        Ok(ReducedGameView {
            base,
            block,
            ancestry,
            memo: Mutex::new(HashMap::new()),
            evaluations: Arc::new(AtomicU64::new(0)),
        })
    }

    /// Child view after removing `removed` (with known mass) from this block.
    fn child(&self, new_block: Coalition, removed: Coalition, mass: Rational) -> ReducedGameView {
        debug_assert_eq!(new_block.union(removed), self.block);
        debug_assert!(new_block.inter(removed).is_empty());
        let mut ancestry = self.ancestry.clone();
        ancestry.push((removed, mass));
        ReducedGameView {
            base: Arc::clone(&self.base),
            block: new_block,
            ancestry,
            memo: Mutex::new(HashMap::new()),
            evaluations: Arc::clone(&self.evaluations),
        }
    }

    pub fn block(&self) -> Coalition {
        self.block
    }

    pub fn ancestry(&self) -> &[(Coalition, Rational)] {
        &self.ancestry
    }

    pub fn base(&self) -> &Arc<Game> {
        &self.base
    }

    /// Checked reduced value.
    pub fn value(&self, t: Coalition) -> Result<Rational> {
        if !t.is_subset_of(self.block) {
            return Err(Error::input(format!(
                "{t} is not a subset of the view block {}",
                self.block
            )));
        }
        Ok(self.eval(t))
    }

    /// Base-oracle evaluations spent on reduced-value maximizations, shared
    /// across this view and all views derived from it.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    /// Dense explicit game over the block members relabeled to `0..m-1` in
    /// increasing player order (for exhaustive checks).
    pub fn materialize(&self) -> Result<Game> {
        let members: Vec<usize> = self.block.players().collect();
        let m = members.len();
        let mut table = Vec::with_capacity(1 << m);
        for mask in 0..(1u32 << m) {
            let mut t = Coalition::empty(self.block.ground());
            for (bit, &p) in members.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    t = t.insert(p);
                }
            }
            table.push(self.eval(t));
        }
        Game::explicit(m, table)
    }
}

impl SetFunction for ReducedGameView {
    fn ground(&self) -> Coalition {
        self.block
    }

    fn eval(&self, t: Coalition) -> Rational {
        debug_assert!(t.is_subset_of(self.block));
        if let Some(hit) = self.memo.lock().unwrap().get(&t.mask()) {
            return hit.clone();
        }
        let k = self.ancestry.len();
        let out = if k == 0 {
            self.base.value(t)
        } else {
            let index_ground = Coalition::full(k);
            let f = FnOracle::new(index_ground, |j: Coalition| {
                let mut union = t;
                let mut masses = rat(0);
                for idx in j.players() {
                    let (set, mass) = &self.ancestry[idx];
                    union = union.union(*set);
                    masses += mass;
                }
                self.base.value(union) - masses
            });
            let best = sfm::maximize_supermodular(&f).expect("ancestry within engine bound");
            self.evaluations.fetch_add(best.evaluations, Ordering::Relaxed);
            best.min_value
        };
        self.memo.lock().unwrap().insert(t.mask(), out.clone());
        out
    }
}

/// Closed-form prenucleolus of a two-player (sub)game:
/// `ν_j = v({j}) + (v({a,b}) − v({a}) − v({b})) / 2`, the unique least-core
/// point. Returns `(player, value)` pairs in increasing player order.
pub fn two_player_prenucleolus<V: SetFunction>(v: &V) -> Result<Vec<(usize, Rational)>> {
    let ground = v.ground();
    if ground.len() != 2 {
        return Err(Error::domain(format!(
            "two-player formula applied to a {}-player ground set",
            ground.len()
        )));
    }
    let members: Vec<usize> = ground.players().collect();
    let (a, b) = (members[0], members[1]);
    let ga = Coalition::singleton(ground.ground(), a);
    let gb = Coalition::singleton(ground.ground(), b);
    let va = v.eval(ga);
    let vb = v.eval(gb);
    let surplus = (v.eval(ground) - &va - &vb) / rat(2);
    Ok(vec![(a, va + &surplus), (b, vb + surplus)])
}

/// One split in a nucleolus derivation.
#[derive(Debug, Clone)]
pub struct DerivationStep {
    /// Block being split.
    pub block: Coalition,
    /// The essential coalition chosen (smallest mask among those reported).
    pub essential: Coalition,
    /// Least-core value of the block's reduced game.
    pub epsilon: Rational,
    /// Ancestry of the block's view at the time of the split.
    pub ancestry: Vec<(Coalition, Rational)>,
}

/// `(player, value)` pairs produced by solving a worklist of views.
type ViewSolution = (Vec<(usize, Rational)>, Vec<DerivationStep>, u64);

#[derive(Debug, Clone)]
pub struct NucleolusResult {
    pub allocation: Allocation,
    pub steps: Vec<DerivationStep>,
    /// Total oracle evaluations spent in submodular minimizations (least-core
    /// sweeps, cover passes and reduced-value maximizations).
    pub sfm_evaluations: u64,
}

/// Splits one view: solves its least core, picks the canonical essential
/// coalition, and returns `(S, ε, mass of S, mass of complement)`.
fn split_view(
    view: &ReducedGameView,
) -> Result<(Coalition, Rational, Rational, Rational, u64)> {
    let block = view.block();
    let s_ref = block.first_player().expect("blocks are nonempty");
    let lc = least_core_with(view, s_ref, BoundMode::Oracle)?;
    let essential = lc.essential[0];
    let mass_s = view.eval(essential) + &lc.epsilon_star;
    let mass_rest = view.eval(block) - &mass_s;
    let lc_evals: u64 = lc.trace.iter().map(|t| t.sfm_evaluations).sum();
    Ok((essential, lc.epsilon_star, mass_s, mass_rest, lc_evals))
}

/// Nucleolus by per-player descent: for each player, repeatedly split the
/// current block on an essential coalition and keep the side containing the
/// player until a singleton remains.
pub fn nucleolus_per_player(game: &Game) -> Result<NucleolusResult> {
    let n = game.player_count();
    let base = Arc::new(game.clone());
    if n == 1 {
        return Ok(NucleolusResult {
            allocation: Allocation::new(vec![base.value(base.grand())]),
            steps: Vec::new(),
            sfm_evaluations: 0,
        });
    }
    let mut components = vec![rat(0); n];
    let mut steps = Vec::new();
    let mut lc_evals = 0u64;
    let mut view_evals = 0u64;
    for (i, slot) in components.iter_mut().enumerate() {
        let mut view = ReducedGameView::root(Arc::clone(&base));
        while view.block().len() > 1 {
            let block = view.block();
            let (essential, eps, mass_s, mass_rest, evals) = split_view(&view)?;
            lc_evals += evals;
            steps.push(DerivationStep {
                block,
                essential,
                epsilon: eps,
                ancestry: view.ancestry().to_vec(),
            });
            view = if essential.contains(i) {
                view.child(essential, block.minus(essential), mass_rest)
            } else {
                view.child(block.minus(essential), essential, mass_s)
            };
        }
        *slot = view.eval(view.block());
        // The counter is shared along this player's whole descent chain.
        view_evals += view.evaluations();
    }
    Ok(NucleolusResult {
        allocation: Allocation::new(components),
        steps,
        sfm_evaluations: lc_evals + view_evals,
    })
}

/// Nucleolus by divide and conquer: each split pushes both sides onto a
/// worklist, so every block is solved once. Two-player blocks use the
/// closed-form prenucleolus.
pub fn nucleolus_divide_conquer(game: &Game) -> Result<NucleolusResult> {
    let base = Arc::new(game.clone());
    let root = ReducedGameView::root(Arc::clone(&base));
    let (pairs, steps, evals) = solve_view_worklist(root)?;
    let mut components = vec![rat(0); game.player_count()];
    for (p, val) in pairs {
        components[p] = val;
    }
    Ok(NucleolusResult {
        allocation: Allocation::new(components),
        steps,
        sfm_evaluations: evals,
    })
}

/// Nucleolus components of an arbitrary reduced view, as `(player, value)`
/// pairs (consistency: these match the base game's nucleolus restricted to
/// the block when the ancestry masses are genuine).
pub fn nucleolus_of_view(view: ReducedGameView) -> Result<Vec<(usize, Rational)>> {
    let (mut pairs, _, _) = solve_view_worklist(view)?;
    pairs.sort_by_key(|(p, _)| *p);
    Ok(pairs)
}

fn solve_view_worklist(root: ReducedGameView) -> Result<ViewSolution> {
    let mut out: Vec<(usize, Rational)> = Vec::new();
    let mut steps = Vec::new();
    let mut lc_evals = 0u64;
    // All views in the worklist share the root's cumulative counter.
    let view_counter = Arc::clone(&root.evaluations);
    let mut worklist = vec![root];
    while let Some(view) = worklist.pop() {
        let block = view.block();
        match block.len() {
            1 => {
                let p = block.first_player().unwrap();
                out.push((p, view.eval(block)));
            }
            2 => {
                let members: Vec<usize> = block.players().collect();
                let pair = two_player_prenucleolus(&view)?;
                let eps = {
                    // ε of a 2-player block is half the surplus; recorded for
                    // the trace.
                    let va = view.eval(Coalition::singleton(block.ground(), members[0]));
                    let vb = view.eval(Coalition::singleton(block.ground(), members[1]));
                    (view.eval(block) - va - vb) / rat(2)
                };
                steps.push(DerivationStep {
                    block,
                    essential: Coalition::singleton(block.ground(), members[0]),
                    epsilon: eps,
                    ancestry: view.ancestry().to_vec(),
                });
                out.extend(pair);
            }
            _ => {
                let (essential, eps, mass_s, mass_rest, evals) = split_view(&view)?;
                lc_evals += evals;
                steps.push(DerivationStep {
                    block,
                    essential,
                    epsilon: eps,
                    ancestry: view.ancestry().to_vec(),
                });
                let rest = block.minus(essential);
                worklist.push(view.child(essential, rest, mass_rest));
                worklist.push(view.child(rest, essential, mass_s));
            }
        }
    }
    Ok((out, steps, lc_evals + view_counter.load(Ordering::Relaxed)))
}

/// Evaluates both sides of the (refuted) reduced-value shortcut from
/// Kuipers' 1996 manuscript, Theorem 12: the left side is the true reduced
/// value `max_{Q ⊆ N∖U} (v(S∪Q) − x(Q))`, the right side the claimed
/// two-term shortcut `max{v(S), v(S ∪ (N∖U)) − x(N∖U)}`. On the built-in
/// counterexample game with `U = {1,2}`, `x = ν`, `S = {2}` they differ
/// (1 vs 0); where an essential-coalition split applies they agree.
pub fn kuipers_theorem12_check(
    game: &Game,
    u: Coalition,
    x: &Allocation,
    s: Coalition,
) -> Result<(Rational, Rational)> {
    let n = game.player_count();
    let grand = game.grand();
    if u.ground() != n || s.ground() != n {
        return Err(Error::input("coalitions must belong to the game's ground set".to_string()));
    }
    if s.is_empty() || !s.is_subset_of(u) || u == grand {
        return Err(Error::input(
            "need ∅ ≠ S ⊆ U ⊊ N for the reduced-value comparison".to_string(),
        ));
    }
    if x.len() != n || !x.is_preimputation(game) {
        return Err(Error::input("x must be a preimputation".to_string()));
    }
    if n <= 12 && !x.in_core(game) {
        return Err(Error::input("x must be a core point".to_string()));
    }

    let outside = grand.minus(u);
    let f = FnOracle::new(outside, |q: Coalition| {
        game.value(s.union(q)) - x.sum_over(q)
    });
    let lhs = sfm::maximize_supermodular(&f)?.min_value;
    let two_term = game.value(s.union(outside)) - x.sum_over(outside);
    let vs = game.value(s);
    let rhs = if vs >= two_term { vs } else { two_term };
    Ok((lhs, rhs))
}
