//! PATRICIA tries over lazily generated random keys.

use rand::Rng;
use serde::Serialize;

use super::histogram::TrialRng;
use crate::error::{Error, Result};

/// Keys that still agree after this many bits abort the sample.
const MAX_KEY_BITS: usize = 4096;
/// Bits generated up front for every key; more are appended on demand.
const GUARD_BITS: usize = 256;

/// A key whose bits are drawn only when first inspected: bit 1 with
/// probability `p`, and a 0 bit sends the key left.
#[derive(Debug, Clone)]
struct LazyKey {
    bits: Vec<bool>,
}

struct KeySource<'r> {
    p: f64,
    rng: &'r mut TrialRng,
    keys: Vec<LazyKey>,
}

impl KeySource<'_> {
    fn bit(&mut self, key: usize, index: usize) -> Result<bool> {
        if index >= MAX_KEY_BITS {
            return Err(Error::NonConvergence {
                what: "PATRICIA key separation",
                evaluations: MAX_KEY_BITS,
                error: 0.0,
            });
        }
        let k = &mut self.keys[key];
        while k.bits.len() <= index {
            let target = (k.bits.len() + GUARD_BITS).min(MAX_KEY_BITS);
            while k.bits.len() < target {
                k.bits.push(self.rng.random_bool(self.p));
            }
        }
        Ok(k.bits[index])
    }
}

/// A compressed binary trie: every internal node has two children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatriciaTrie {
    Leaf(usize),
    Node {
        /// Bit index this node tests.
        bit: usize,
        /// Bits skipped since the parent because all keys agreed.
        skipped: usize,
        left: Box<PatriciaTrie>,
        right: Box<PatriciaTrie>,
    },
}

impl PatriciaTrie {
    pub fn internal_nodes(&self) -> usize {
        match self {
            Self::Leaf(_) => 0,
            Self::Node { left, right, .. } => 1 + left.internal_nodes() + right.internal_nodes(),
        }
    }

    /// Edges from the root to the leaf holding `key`.
    pub fn depth_of(&self, key: usize) -> Option<usize> {
        match self {
            Self::Leaf(k) => (*k == key).then_some(0),
            Self::Node { left, right, .. } => left
                .depth_of(key)
                .or_else(|| right.depth_of(key))
                .map(|d| d + 1),
        }
    }

    /// Edges on the path that always goes left.
    pub fn leftmost_depth(&self) -> usize {
        match self {
            Self::Leaf(_) => 0,
            Self::Node { left, .. } => 1 + left.leftmost_depth(),
        }
    }
}

fn build(source: &mut KeySource<'_>, keys: Vec<usize>, start: usize) -> Result<PatriciaTrie> {
    if keys.len() == 1 {
        return Ok(PatriciaTrie::Leaf(keys[0]));
    }
    let mut bit = start;
    loop {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for &k in &keys {
            if source.bit(k, bit)? {
                right.push(k);
            } else {
                left.push(k);
            }
        }
        if !left.is_empty() && !right.is_empty() {
            return Ok(PatriciaTrie::Node {
                bit,
                skipped: bit - start,
                left: Box::new(build(source, left, bit + 1)?),
                right: Box::new(build(source, right, bit + 1)?),
            });
        }
        bit += 1;
    }
}

/// Length of the left arm in the splitting sense: follow the keys whose
/// bits are all 0 so far; each bit position at which at least one of them
/// shows a 1 adds one, positions where all of them show 0 add nothing.
fn left_arm(source: &mut KeySource<'_>, n: usize) -> Result<usize> {
    let mut alive: Vec<usize> = (0..n).collect();
    let mut bit = 0;
    let mut arm = 0;
    while !alive.is_empty() {
        let mut zeros = Vec::with_capacity(alive.len());
        for &k in &alive {
            if !source.bit(k, bit)? {
                zeros.push(k);
            }
        }
        if zeros.len() < alive.len() {
            arm += 1;
        }
        alive = zeros;
        bit += 1;
    }
    Ok(arm)
}

/// Builds only the trie on `n` random keys with bit probability `p`.
pub fn patricia_trie(n: usize, p: f64, rng: &mut TrialRng) -> Result<PatriciaTrie> {
    check_args(n, p)?;
    let mut source = KeySource {
        p,
        rng,
        keys: vec![LazyKey { bits: Vec::new() }; n],
    };
    build(&mut source, (0..n).collect(), 0)
}

fn check_args(n: usize, p: f64) -> Result<()> {
    if n == 0 || !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "PATRICIA sampling needs n >= 1 and 0 < p < 1, got n = {n}, p = {p}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PatriciaSample {
    /// Edges from the root to a uniformly chosen key.
    pub depth: usize,
    /// Left-arm length, with the single-key trie counted as 1.
    pub left_arm: usize,
    /// Edges on the all-left path of the compressed trie itself.
    pub trie_left_path: usize,
}

/// Builds a PATRICIA trie on `n` random keys with bit probability `p` and
/// reports the depth of a random key and the left-arm length.
pub fn patricia_sample(n: usize, p: f64, rng: &mut TrialRng) -> Result<PatriciaSample> {
    check_args(n, p)?;
    let chosen = rng.random_range(0..n);
    let mut source = KeySource {
        p,
        rng,
        keys: vec![LazyKey { bits: Vec::new() }; n],
    };
    let trie = build(&mut source, (0..n).collect(), 0)?;
    debug_assert_eq!(trie.internal_nodes(), n - 1);
    let depth = trie.depth_of(chosen).expect("chosen key is in the trie");
    let arm = left_arm(&mut source, n)?;
    Ok(PatriciaSample {
        depth,
        left_arm: arm,
        trie_left_path: trie.leftmost_depth(),
    })
}
