//! Game file format and result envelopes.
//!
//! Games are JSON: a player count, an optional default value, and a map from
//! coalition keys (comma-separated sorted 1-based player indices, `"1,2,3"`)
//! to rational strings (`"p"` or `"p/q"`). Unlisted nonempty coalitions take
//! the default; the empty coalition is fixed at 0 and may not be listed; the
//! grand coalition must be present. Parsing canonicalizes key order and
//! rational encoding; emission is byte-stable for a fixed game.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use nucleolus::coalition::Coalition;
use nucleolus::error::Error;
use nucleolus::game::Game;
use nucleolus::rational::{parse_rational, render_rational, Rational};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub players: usize,
    #[serde(default = "zero_string")]
    pub default: String,
    pub values: BTreeMap<String, String>,
}

fn zero_string() -> String {
    "0".to_string()
}

impl GameFile {
    pub fn parse(text: &str) -> Result<GameFile, Error> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("bad game file: {e}")))
    }

    pub fn to_game(&self) -> Result<Game, Error> {
        let n = self.players;
        let default = parse_rational(&self.default)?;
        let mut entries: Vec<(Coalition, Rational)> = Vec::with_capacity(self.values.len());
        let mut seen: BTreeMap<u32, String> = BTreeMap::new();
        for (key, raw) in &self.values {
            let coalition = Coalition::parse_key(key, n)?;
            if coalition.is_empty() {
                return Err(Error::input("the empty coalition may not be listed".to_string()));
            }
            if let Some(prev) = seen.insert(coalition.mask(), key.clone()) {
                return Err(Error::input(format!(
                    "keys {prev:?} and {key:?} name the same coalition"
                )));
            }
            entries.push((coalition, parse_rational(raw)?));
        }
        let grand = Coalition::full(n);
        if !seen.contains_key(&grand.mask()) {
            return Err(Error::input(format!(
                "grand coalition key {:?} must be present",
                grand.key()
            )));
        }
        Game::from_entries(n, default, entries)
    }

    /// Dense-to-sparse emission: the grand coalition always, every other
    /// nonempty coalition only when it differs from the default.
    pub fn from_game(game: &Game) -> Result<GameFile, Error> {
        let n = game.player_count();
        let default = Rational::from_integer(0.into());
        let mut values = BTreeMap::new();
        let grand = game.grand();
        for s in grand.subsets() {
            if s.is_empty() {
                continue;
            }
            let v = game.try_value(s)?;
            if s == grand || v != default {
                values.insert(s.key(), render_rational(&v));
            }
        }
        Ok(GameFile {
            players: n,
            default: render_rational(&default),
            values,
        })
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("game files always serialize");
        s.push('\n');
        s
    }
}

/// Machine-readable result wrapper. Byte-stable for a fixed input and
/// version; wall-clock timing goes to stderr instead, to keep it that way.
#[derive(Debug, Serialize)]
pub struct Envelope {
    pub command: String,
    pub input_digest: String,
    pub result: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<serde_json::Value>,
}

impl Envelope {
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("envelopes always serialize");
        s.push('\n');
        s
    }
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nucleolus::rational::rat;

    #[test]
    fn round_trip_through_file_format() {
        let g = Game::kuipers_counterexample();
        let file = GameFile::from_game(&g).unwrap();
        let text = file.to_json_string();
        let back = GameFile::parse(&text).unwrap().to_game().unwrap();
        for s in g.grand().subsets() {
            assert_eq!(g.value(s), back.value(s));
        }
        // Sparse: zero-valued coalitions are not listed.
        assert_eq!(file.values.len(), 6);
    }

    #[test]
    fn round_trip_preserves_values_across_sizes() {
        use nucleolus::rational::frac;
        for n in 1..=10usize {
            // Fractional, negative-free airport costs exercise `p/q` strings.
            let costs: Vec<_> = (0..n).map(|i| frac(2 * i as i64 + 1, 3)).collect();
            let g = Game::airport(&costs).unwrap();
            let text = GameFile::from_game(&g).unwrap().to_json_string();
            let back = GameFile::parse(&text).unwrap().to_game().unwrap();
            for s in g.grand().subsets() {
                assert_eq!(g.value(s), back.value(s), "n={n}, S={s}");
            }
        }
    }

    #[test]
    fn parser_rejects_malformed_files() {
        // Missing grand coalition.
        let t = r#"{"players":2,"values":{"1":"1"}}"#;
        assert!(GameFile::parse(t).unwrap().to_game().is_err());
        // Colliding keys.
        let t = r#"{"players":2,"values":{"1,2":"3","2,1":"3"}}"#;
        assert!(GameFile::parse(t).unwrap().to_game().is_err());
        // Out-of-range player.
        let t = r#"{"players":2,"values":{"3":"1","1,2":"3"}}"#;
        assert!(GameFile::parse(t).unwrap().to_game().is_err());
        // Bad rational.
        let t = r#"{"players":2,"values":{"1,2":"3/0"}}"#;
        assert!(GameFile::parse(t).unwrap().to_game().is_err());
        // Unknown field.
        assert!(GameFile::parse(r#"{"players":2,"values":{},"extra":1}"#).is_err());
    }

    #[test]
    fn unsorted_keys_are_canonicalized() {
        let t = r#"{"players":3,"default":"1/2","values":{"3,1":"5/2","1,2,3":"4"}}"#;
        let g = GameFile::parse(t).unwrap().to_game().unwrap();
        let c13 = Coalition::parse_key("1,3", 3).unwrap();
        assert_eq!(g.value(c13), nucleolus::rational::frac(5, 2));
        let c2 = Coalition::parse_key("2", 3).unwrap();
        assert_eq!(g.value(c2), nucleolus::rational::frac(1, 2));
        assert_eq!(g.value(g.grand()), rat(4));
    }
}
