//! Cooperative games with transferable utility, in profit form.
//!
//! A game is a player count together with a pure value oracle `v` over
//! coalitions, `v(∅) = 0`. Three representations are shipped: dense explicit
//! tables (indexed by coalition bitmask, capped at [`MAX_PLAYERS`] players),
//! airport savings games, and bankruptcy games; the latter two evaluate their
//! closed-form formula on demand. Shifted and reduced views live in
//! [`crate::least_core`] and [`crate::nucleolus`] and wrap a base game.

use num::BigInt;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coalition::{Coalition, MAX_PLAYERS};
use crate::error::{Error, Result};
use crate::rational::{rat, Rational};
use crate::sfm::SetFunction;

#[derive(Debug, Clone)]
enum Repr {
    /// Dense table indexed by bitmask, length `2^n`, entry 0 fixed to zero.
    Explicit(Vec<Rational>),
    /// Landing costs; `v(S) = Σ_{i∈S} c_i − max_{i∈S} c_i` (savings form).
    Airport(Vec<Rational>),
    /// Estate and claims; `v(S) = max(0, E − Σ_{i∉S} d_i)`.
    Bankruptcy {
        estate: Rational,
        claims: Vec<Rational>,
    },
}

/// A transferable-utility game on players `0..n-1`.
#[derive(Debug, Clone)]
pub struct Game {
    n: usize,
    repr: Repr,
}

impl Game {
    /// Game from a dense value table of length `2^n` indexed by coalition
    /// bitmask. `table[0]` must be zero.
    pub fn explicit(n: usize, table: Vec<Rational>) -> Result<Game> {
        check_explicit_size(n)?;
        if table.len() != 1 << n {
            return Err(Error::input(format!(
                "explicit table needs {} entries for {n} players, got {}",
                1usize << n,
                table.len()
            )));
        }
        if table[0] != rat(0) {
            return Err(Error::input("v(∅) must be 0".to_string()));
        }
        Ok(Game {
            n,
            repr: Repr::Explicit(table),
        })
    }

    /// Game from sparse `(coalition, value)` entries; unlisted nonempty
    /// coalitions take `default`.
    pub fn from_entries(
        n: usize,
        default: Rational,
        entries: impl IntoIterator<Item = (Coalition, Rational)>,
    ) -> Result<Game> {
        check_explicit_size(n)?;
        let mut table = vec![default; 1 << n];
        table[0] = rat(0);
        for (s, v) in entries {
            if s.ground() != n {
                return Err(Error::input(format!(
                    "coalition {s} has ground {} but the game has {n} players",
                    s.ground()
                )));
            }
            if s.is_empty() {
                return Err(Error::input("v(∅) is fixed to 0 and cannot be listed".to_string()));
            }
            table[s.mask() as usize] = v;
        }
        Game::explicit(n, table)
    }

    pub fn zero(n: usize) -> Game {
        Game::explicit(n, vec![rat(0); 1 << n]).expect("zero table is valid")
    }

    /// Additive game `v(S) = Σ_{i∈S} w_i`.
    pub fn additive(weights: &[Rational]) -> Result<Game> {
        Game::modular_power(weights, 1)
    }

    /// `v(S) = (Σ_{i∈S} w_i)^curvature` with nonnegative weights: a
    /// nondecreasing convex transform of a nonnegative modular function, hence
    /// supermodular.
    pub fn modular_power(weights: &[Rational], curvature: u32) -> Result<Game> {
        let n = weights.len();
        check_explicit_size(n)?;
        if curvature == 0 {
            return Err(Error::input("curvature must be ≥ 1".to_string()));
        }
        if curvature > 1 && weights.iter().any(|w| w < &rat(0)) {
            return Err(Error::input(
                "negative weights break convexity for curvature > 1".to_string(),
            ));
        }
        let mut table = Vec::with_capacity(1 << n);
        for mask in 0..(1u32 << n) {
            let s = Coalition::from_mask(mask, n)?;
            let w: Rational = s.players().map(|p| weights[p].clone()).sum();
            table.push(pow_rational(&w, curvature));
        }
        Game::explicit(n, table)
    }

    /// Airport savings game from nonnegative landing costs.
    pub fn airport(costs: &[Rational]) -> Result<Game> {
        if costs.is_empty() {
            return Err(Error::input("airport game needs at least one player".to_string()));
        }
        if costs.iter().any(|c| c < &rat(0)) {
            return Err(Error::input("landing costs must be nonnegative".to_string()));
        }
        Ok(Game {
            n: costs.len(),
            repr: Repr::Airport(costs.to_vec()),
        })
    }

    /// Bankruptcy game from a nonnegative estate and claims.
    pub fn bankruptcy(estate: Rational, claims: &[Rational]) -> Result<Game> {
        if claims.is_empty() {
            return Err(Error::input("bankruptcy game needs at least one player".to_string()));
        }
        if estate < rat(0) || claims.iter().any(|d| d < &rat(0)) {
            return Err(Error::input("estate and claims must be nonnegative".to_string()));
        }
        Ok(Game {
            n: claims.len(),
            repr: Repr::Bankruptcy {
                estate,
                claims: claims.to_vec(),
            },
        })
    }

    /// Deterministic random convex game: integer weights drawn uniformly from
    /// `weight_range`, then `v(S) = w(S)^curvature`. Same `(n, seed, range,
    /// curvature)` always yields the same table.
    pub fn random_convex(
        n: usize,
        seed: u64,
        weight_range: (u64, u64),
        curvature: u32,
    ) -> Result<Game> {
        if n == 0 {
            return Err(Error::input("need at least one player".to_string()));
        }
        let (lo, hi) = weight_range;
        if lo > hi {
            return Err(Error::input(format!("empty weight range {lo}..={hi}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<Rational> = (0..n)
            .map(|_| rat(rng.gen_range(lo..=hi) as i64))
            .collect();
        Game::modular_power(&weights, curvature)
    }

    /// The built-in 4-player fixture: a convex game whose nucleolus
    /// (5/2, 7/2, 2, 2) witnesses that the reduced-game shortcut from
    /// Kuipers' 1996 manuscript is unsound. See
    /// [`crate::nucleolus::kuipers_theorem12_check`].
    pub fn kuipers_counterexample() -> Game {
        let n = 4;
        let entries = [
            (vec![0, 1], 3),
            (vec![1, 2], 3),
            (vec![1, 2, 3], 3),
            (vec![0, 1, 2], 6),
            (vec![0, 1, 3], 6),
            (vec![0, 1, 2, 3], 10),
        ]
        .into_iter()
        .map(|(players, v)| (Coalition::from_players(n, &players).unwrap(), rat(v)));
        Game::from_entries(n, rat(0), entries).expect("fixture table is valid")
    }

    pub fn player_count(&self) -> usize {
        self.n
    }

    pub fn grand(&self) -> Coalition {
        Coalition::full(self.n)
    }

    /// Representation tag, mirroring how the game is stored.
    pub fn representation(&self) -> &'static str {
        match self.repr {
            Repr::Explicit(_) => "explicit-table",
            Repr::Airport(_) => "airport",
            Repr::Bankruptcy { .. } => "bankruptcy",
        }
    }

    /// `v(S)`. The coalition must belong to this game's ground set.
    pub fn value(&self, s: Coalition) -> Rational {
        debug_assert_eq!(s.ground(), self.n, "coalition from a different ground set");
        match &self.repr {
            Repr::Explicit(table) => table[s.mask() as usize].clone(),
            Repr::Airport(costs) => {
                let mut sum = rat(0);
                let mut max = rat(0);
                for p in s.players() {
                    sum += &costs[p];
                    if costs[p] > max {
                        max = costs[p].clone();
                    }
                }
                sum - max
            }
            Repr::Bankruptcy { estate, claims } => {
                let outside: Rational = s.complement().players().map(|p| claims[p].clone()).sum();
                let v = estate - outside;
                if v < rat(0) {
                    rat(0)
                } else {
                    v
                }
            }
        }
    }

    /// Checked variant of [`Game::value`].
    pub fn try_value(&self, s: Coalition) -> Result<Rational> {
        if s.ground() != self.n {
            return Err(Error::input(format!(
                "coalition ground {} does not match game with {} players",
                s.ground(),
                self.n
            )));
        }
        Ok(self.value(s))
    }

    /// Materializes into a dense explicit table.
    pub fn to_explicit(&self) -> Result<Game> {
        check_explicit_size(self.n)?;
        let table = (0..(1u32 << self.n))
            .map(|mask| self.value(Coalition::from_mask(mask, self.n).unwrap()))
            .collect();
        Game::explicit(self.n, table)
    }
}

impl SetFunction for Game {
    fn ground(&self) -> Coalition {
        self.grand()
    }

    fn eval(&self, s: Coalition) -> Rational {
        self.value(s)
    }
}

fn check_explicit_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::input("need at least one player".to_string()));
    }
    if n > MAX_PLAYERS {
        return Err(Error::Size {
            what: "explicit game table",
            limit: MAX_PLAYERS,
            got: n,
        });
    }
    Ok(())
}

fn pow_rational(q: &Rational, exp: u32) -> Rational {
    let mut out = Rational::from_integer(BigInt::from(1));
    for _ in 0..exp {
        out *= q;
    }
    out
}

/// A payoff vector over the players of a game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation(Vec<Rational>);

impl Allocation {
    pub fn new(components: Vec<Rational>) -> Allocation {
        Allocation(components)
    }

    pub fn components(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, player: usize) -> &Rational {
        &self.0[player]
    }

    /// `x(S) = Σ_{i∈S} x_i`.
    pub fn sum_over(&self, s: Coalition) -> Rational {
        s.players().map(|p| self.0[p].clone()).sum()
    }

    pub fn total(&self) -> Rational {
        self.0.iter().cloned().sum()
    }

    /// Efficiency: `x(N) = v(N)`.
    pub fn is_preimputation(&self, game: &Game) -> bool {
        self.len() == game.player_count() && self.total() == game.value(game.grand())
    }

    /// Core membership by full enumeration: `x(S) ≥ v(S)` for every coalition.
    pub fn in_core(&self, game: &Game) -> bool {
        self.is_preimputation(game)
            && game
                .grand()
                .subsets()
                .all(|s| self.sum_over(s) >= game.value(s))
    }
}

impl std::fmt::Display for Allocation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|q| q.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Default exhaustive bound for [`is_supermodular`].
pub const SUPERMODULARITY_CHECK_BOUND: usize = 16;
/// Default exhaustive bound for [`is_crossing_supermodular`] (all-pairs scan).
pub const CROSSING_CHECK_BOUND: usize = 12;

/// Outcome of a supermodularity check. A violation is reported as the
/// lexicographically smallest triple `(i, j, base)` with
/// `v(base∪{i}) − v(base) > v(base∪{i,j}) − v(base∪{j})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Convexity {
    Convex,
    Violation { i: usize, j: usize, base: Coalition },
}

impl Convexity {
    pub fn is_convex(&self) -> bool {
        matches!(self, Convexity::Convex)
    }
}

/// Exhaustive supermodularity test in the marginal form, `O(k²·2^k)`
/// evaluations over a ground of size `k`.
pub fn is_supermodular(v: &impl SetFunction) -> Result<Convexity> {
    is_supermodular_bounded(v, SUPERMODULARITY_CHECK_BOUND)
}

pub fn is_supermodular_bounded(v: &impl SetFunction, bound: usize) -> Result<Convexity> {
    let ground = v.ground();
    if ground.len() > bound {
        return Err(Error::Size {
            what: "exhaustive supermodularity check",
            limit: bound,
            got: ground.len(),
        });
    }
    let members: Vec<usize> = ground.players().collect();
    for (a, &i) in members.iter().enumerate() {
        for &j in &members[a + 1..] {
            let rest = ground.remove(i).remove(j);
            for base in rest.subsets() {
                // v(S∪{i}) − v(S) ≤ v(S∪{i,j}) − v(S∪{j})
                let lhs = v.eval(base.insert(i)) - v.eval(base);
                let rhs = v.eval(base.insert(i).insert(j)) - v.eval(base.insert(j));
                if lhs > rhs {
                    return Ok(Convexity::Violation { i, j, base });
                }
            }
        }
    }
    Ok(Convexity::Convex)
}

/// Outcome of a crossing-supermodularity check; a violating pair satisfies
/// `S∩T ≠ ∅`, `S∪T ≠ ground` and `v(S)+v(T) > v(S∩T)+v(S∪T)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CrossingCheck {
    CrossingSupermodular,
    Violation { s: Coalition, t: Coalition },
}

impl CrossingCheck {
    pub fn holds(&self) -> bool {
        matches!(self, CrossingCheck::CrossingSupermodular)
    }
}

/// Exhaustive crossing-supermodularity test (all qualifying pairs, `O(4^k)`).
pub fn is_crossing_supermodular(v: &impl SetFunction) -> Result<CrossingCheck> {
    is_crossing_supermodular_bounded(v, CROSSING_CHECK_BOUND)
}

pub fn is_crossing_supermodular_bounded(
    v: &impl SetFunction,
    bound: usize,
) -> Result<CrossingCheck> {
    let ground = v.ground();
    if ground.len() > bound {
        return Err(Error::Size {
            what: "exhaustive crossing-supermodularity check",
            limit: bound,
            got: ground.len(),
        });
    }
    for s in ground.subsets() {
        for t in ground.subsets() {
            if t.mask() >= s.mask() {
                break;
            }
            if s.inter(t).is_empty() || s.union(t) == ground {
                continue;
            }
            if v.eval(s) + v.eval(t) > v.eval(s.inter(t)) + v.eval(s.union(t)) {
                return Ok(CrossingCheck::Violation { s: t, t: s });
            }
        }
    }
    Ok(CrossingCheck::CrossingSupermodular)
}

/// Greedy marginal vector along a player order: an extreme core point for
/// convex games. Convexity is caller-asserted.
pub fn greedy_core_point(game: &Game, order: &[usize]) -> Result<Allocation> {
    let n = game.player_count();
    let mut seen = Coalition::empty(n);
    let mut x = vec![rat(0); n];
    if order.len() != n {
        return Err(Error::input(format!(
            "order has {} entries for {n} players",
            order.len()
        )));
    }
    for &p in order {
        if p >= n || seen.contains(p) {
            return Err(Error::input("order must be a permutation of the players".to_string()));
        }
        let next = seen.insert(p);
        x[p] = game.value(next) - game.value(seen);
        seen = next;
    }
    Ok(Allocation::new(x))
}
