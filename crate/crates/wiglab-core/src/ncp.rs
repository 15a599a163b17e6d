//! Non-crossing partitions and non-crossing graphs on finite ordered
//! ground sets: enumeration, the Kreweras complement, the Möbius function
//! of the NCP lattice, and Catalan numbers.

use crate::error::CoreError;
use num_bigint::BigUint;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// Largest ground set `enumerate_ncp` accepts.
pub const NCP_ENUMERATION_CAP: usize = 12;
/// Largest ground set the graph routines accept.
pub const NCG_ENUMERATION_CAP: usize = 8;

/// A finite set of positive integers arranged counter-clockwise on a
/// circle, stored in strictly increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct GroundSet {
    elems: Vec<u32>,
}

impl GroundSet {
    pub fn new(elems: Vec<u32>) -> Result<Self, CoreError> {
        if elems.is_empty() {
            return Err(CoreError::validation("ground set must be nonempty"));
        }
        if elems[0] == 0 {
            return Err(CoreError::validation("ground elements must be positive"));
        }
        if elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CoreError::validation(
                "ground elements must be strictly increasing",
            ));
        }
        Ok(GroundSet { elems })
    }

    /// The ground set `{1, 2, ..., n}`.
    pub fn first_n(n: usize) -> Self {
        assert!(n >= 1, "ground set must be nonempty");
        GroundSet {
            elems: (1..=n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn elems(&self) -> &[u32] {
        &self.elems
    }

    pub fn position(&self, elem: u32) -> Option<usize> {
        self.elems.binary_search(&elem).ok()
    }
}

impl<'de> Deserialize<'de> for GroundSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let elems = Vec::<u32>::deserialize(d)?;
        GroundSet::new(elems).map_err(D::Error::custom)
    }
}

/// A partition of a ground set with no crossing blocks, kept in canonical
/// form: each block ascending, blocks ordered by their minima.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NonCrossingPartition {
    ground: GroundSet,
    blocks: Vec<Vec<u32>>,
}

/// A graph on a ground set whose edges, drawn as chords of the circle,
/// do not cross. Edges are stored as (min, max) pairs in lexicographic
/// order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NonCrossingGraph {
    ground: GroundSet,
    edges: Vec<(u32, u32)>,
}

fn canonicalize_blocks(mut blocks: Vec<Vec<u32>>) -> Vec<Vec<u32>> {
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort_by_key(|b| b[0]);
    blocks
}

/// Checks that `blocks` is an exact partition of `ground`.
fn validate_partition(blocks: &[Vec<u32>], ground: &GroundSet) -> Result<(), CoreError> {
    let mut seen: Vec<u32> = Vec::with_capacity(ground.len());
    for b in blocks {
        if b.is_empty() {
            return Err(CoreError::validation("empty block"));
        }
        seen.extend_from_slice(b);
    }
    let mut sorted = seen.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(CoreError::validation("blocks overlap"));
    }
    if sorted != ground.elems() {
        return Err(CoreError::validation("blocks do not cover the ground set"));
    }
    Ok(())
}

/// Two blocks cross iff their merged label sequence alternates at least
/// three times (the pattern a..c..b..d with a,b in one block, c,d in the
/// other).
fn blocks_cross(a: &[u32], b: &[u32]) -> bool {
    let mut changes = 0u32;
    let mut last = 0u8; // 0: none yet, 1: from a, 2: from b
    let (mut i, mut j) = (0usize, 0usize);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i] < b[j]);
        let label = if take_a { 1 } else { 2 };
        if take_a {
            i += 1;
        } else {
            j += 1;
        }
        if last != 0 && label != last {
            changes += 1;
            if changes >= 3 {
                return true;
            }
        }
        last = label;
    }
    false
}

/// True iff no pair of candidate blocks crosses. Validates that the
/// blocks form a partition of `ground` first.
pub fn is_noncrossing_partition(
    blocks: &[Vec<u32>],
    ground: &GroundSet,
) -> Result<bool, CoreError> {
    validate_partition(blocks, ground)?;
    let canon = canonicalize_blocks(blocks.to_vec());
    for i in 0..canon.len() {
        for j in i + 1..canon.len() {
            if blocks_cross(&canon[i], &canon[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

impl NonCrossingPartition {
    pub fn new(ground: GroundSet, blocks: Vec<Vec<u32>>) -> Result<Self, CoreError> {
        if !is_noncrossing_partition(&blocks, &ground)? {
            return Err(CoreError::validation("blocks cross"));
        }
        Ok(NonCrossingPartition {
            ground,
            blocks: canonicalize_blocks(blocks),
        })
    }

    /// Builds the partition whose ground set is the union of the blocks.
    pub fn from_blocks(blocks: Vec<Vec<u32>>) -> Result<Self, CoreError> {
        let mut elems: Vec<u32> = blocks.iter().flatten().copied().collect();
        elems.sort_unstable();
        elems.dedup();
        let ground = GroundSet::new(elems)?;
        NonCrossingPartition::new(ground, blocks)
    }

    /// The partition of `ground` into singletons (lattice bottom).
    pub fn singletons(ground: GroundSet) -> Self {
        let blocks = ground.elems().iter().map(|&e| vec![e]).collect();
        NonCrossingPartition { ground, blocks }
    }

    /// The one-block partition (lattice top).
    pub fn full(ground: GroundSet) -> Self {
        let blocks = vec![ground.elems().to_vec()];
        NonCrossingPartition { ground, blocks }
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// The block containing `elem`, if `elem` is in the ground set.
    pub fn block_of(&self, elem: u32) -> Option<&[u32]> {
        self.blocks
            .iter()
            .find(|b| b.binary_search(&elem).is_ok())
            .map(|b| b.as_slice())
    }

    /// Compact text form: blocks separated by '|', elements by spaces.
    pub fn to_text(&self) -> String {
        self.blocks
            .iter()
            .map(|b| {
                b.iter()
                    .map(|e| e.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn from_text(s: &str) -> Result<Self, CoreError> {
        let mut blocks = Vec::new();
        for part in s.split('|') {
            let block: Vec<u32> = part
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<u32>().map_err(|_| {
                        CoreError::validation(format!("bad partition element {tok:?}"))
                    })
                })
                .collect::<Result<_, _>>()?;
            if block.is_empty() {
                return Err(CoreError::validation("empty block in text form"));
            }
            blocks.push(block);
        }
        NonCrossingPartition::from_blocks(blocks)
    }
}

impl fmt::Display for NonCrossingPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

impl Serialize for NonCrossingPartition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.blocks.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NonCrossingPartition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let blocks = Vec::<Vec<u32>>::deserialize(d)?;
        NonCrossingPartition::from_blocks(blocks).map_err(D::Error::custom)
    }
}

/// Recursively enumerates partitions of the position slice `positions`
/// (ascending). The block containing the first position splits the rest
/// into independent segments, which forces non-crossing by construction.
fn enumerate_positions(positions: &[usize]) -> Vec<Vec<Vec<usize>>> {
    if positions.is_empty() {
        return vec![Vec::new()];
    }
    let first = positions[0];
    let rest = &positions[1..];
    let r = rest.len();
    let mut out = Vec::new();
    // Subsets of `rest` joining `first`, as bitmasks. r <= 11 under the cap.
    for mask in 0u32..(1u32 << r) {
        let mut block = vec![first];
        let mut segments: Vec<Vec<usize>> = Vec::new();
        let mut current: Vec<usize> = Vec::new();
        for (i, &p) in rest.iter().enumerate() {
            if mask & (1 << i) != 0 {
                block.push(p);
                segments.push(std::mem::take(&mut current));
            } else {
                current.push(p);
            }
        }
        segments.push(current);
        // Cartesian product of the segment partitions.
        let mut partials: Vec<Vec<Vec<usize>>> = vec![vec![block]];
        for seg in &segments {
            if seg.is_empty() {
                continue;
            }
            let sub = enumerate_positions(seg);
            let mut next = Vec::with_capacity(partials.len() * sub.len());
            for p in &partials {
                for s in &sub {
                    let mut combined = p.clone();
                    combined.extend(s.iter().cloned());
                    next.push(combined);
                }
            }
            partials = next;
        }
        out.extend(partials);
    }
    out
}

/// Every non-crossing partition of `ground`, exactly once, sorted
/// lexicographically on the canonical block form.
pub fn enumerate_ncp(ground: &GroundSet) -> Result<Vec<NonCrossingPartition>, CoreError> {
    let n = ground.len();
    if n > NCP_ENUMERATION_CAP {
        return Err(CoreError::SizeLimit {
            what: "non-crossing partition enumeration",
            cap: NCP_ENUMERATION_CAP,
            got: n,
        });
    }
    let positions: Vec<usize> = (0..n).collect();
    let mut result: Vec<NonCrossingPartition> = enumerate_positions(&positions)
        .into_iter()
        .map(|blocks| {
            let mapped = blocks
                .into_iter()
                .map(|b| b.into_iter().map(|p| ground.elems()[p]).collect())
                .collect();
            NonCrossingPartition {
                ground: ground.clone(),
                blocks: canonicalize_blocks(mapped),
            }
        })
        .collect();
    result.sort_by_key(|p| p.to_text());
    Ok(result)
}

/// Minimal union-find over `0..n`.
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }

    fn components(&mut self, n: usize) -> Vec<Vec<usize>> {
        let mut map: Vec<Vec<usize>> = vec![Vec::new(); n];
        for x in 0..n {
            let r = self.find(x);
            map[r].push(x);
        }
        map.retain(|c| !c.is_empty());
        map
    }
}

/// Kreweras complement by the arc construction: arc p sits between the
/// p-th and (p+1)-th ground points counter-clockwise. Two arcs belong to
/// the same complement block iff the chord joining them crosses no block
/// of the partition, i.e. no block has points strictly on both sides.
pub fn kreweras(pi: &NonCrossingPartition) -> NonCrossingPartition {
    let n = pi.ground.len();
    let block_positions: Vec<Vec<usize>> = pi
        .blocks
        .iter()
        .map(|b| {
            b.iter()
                .map(|&e| pi.ground.position(e).expect("block element in ground"))
                .collect()
        })
        .collect();
    let mut uf = UnionFind::new(n);
    // side[pos]: true if the point lies in (p, q] walking counter-clockwise.
    let mut inside = vec![false; n];
    for p in 0..n {
        for q in p + 1..n {
            for x in inside.iter_mut() {
                *x = false;
            }
            let mut pos = (p + 1) % n;
            loop {
                inside[pos] = true;
                if pos == q {
                    break;
                }
                pos = (pos + 1) % n;
            }
            let crossed = block_positions.iter().any(|bp| {
                let has_in = bp.iter().any(|&x| inside[x]);
                let has_out = bp.iter().any(|&x| !inside[x]);
                has_in && has_out
            });
            if !crossed {
                uf.union(p, q);
            }
        }
    }
    let blocks = uf
        .components(n)
        .into_iter()
        .map(|comp| comp.into_iter().map(|p| pi.ground.elems()[p]).collect())
        .collect();
    NonCrossingPartition {
        ground: pi.ground.clone(),
        blocks: canonicalize_blocks(blocks),
    }
}

/// Exact n-th Catalan number.
pub fn catalan(n: usize) -> BigUint {
    let mut c = BigUint::from(1u32);
    for k in 0..n {
        // C_{k+1} = C_k * 2(2k+1) / (k+2), always an exact division.
        c = c * BigUint::from(2 * (2 * k as u64 + 1)) / BigUint::from(k as u64 + 2);
    }
    c
}

/// Catalan number as u64; exact for n <= 33.
pub fn catalan_u64(n: usize) -> u64 {
    assert!(n <= 33, "catalan_u64 overflows past n=33");
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c as u64
}

/// Möbius function mu(pi, top) of the NCP lattice via the closed form
/// (-1)^(|pi|-1) * prod over blocks B of K(pi) of Catalan(|B|-1).
pub fn mobius_to_top(pi: &NonCrossingPartition) -> i64 {
    let kp = kreweras(pi);
    let sign: i64 = if (pi.num_blocks() - 1) % 2 == 0 { 1 } else { -1 };
    let mut prod: i64 = 1;
    for b in kp.blocks() {
        prod = prod
            .checked_mul(catalan_u64(b.len() - 1) as i64)
            .expect("Möbius value fits in i64 under the enumeration cap");
    }
    sign * prod
}

/// True iff every block of `pi` is contained in some block of `sigma`.
pub fn refinement_leq(
    pi: &NonCrossingPartition,
    sigma: &NonCrossingPartition,
) -> Result<bool, CoreError> {
    if pi.ground != sigma.ground {
        return Err(CoreError::validation("refinement on mismatched grounds"));
    }
    for b in pi.blocks() {
        let host = sigma.block_of(b[0]).expect("element in ground");
        if !b.iter().all(|e| host.binary_search(e).is_ok()) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn edges_cross(a: (usize, usize), b: (usize, usize)) -> bool {
    let (p, q) = a;
    let (r, s) = b;
    (p < r && r < q && q < s) || (r < p && p < s && s < q)
}

impl NonCrossingGraph {
    pub fn new(ground: GroundSet, edges: Vec<(u32, u32)>) -> Result<Self, CoreError> {
        let mut canon: Vec<(u32, u32)> = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a == b {
                return Err(CoreError::validation("self-loop"));
            }
            if ground.position(a).is_none() || ground.position(b).is_none() {
                return Err(CoreError::validation("edge endpoint outside ground"));
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        if canon.windows(2).any(|w| w[0] == w[1]) {
            return Err(CoreError::validation("duplicate edge"));
        }
        let pos: Vec<(usize, usize)> = canon
            .iter()
            .map(|&(a, b)| (ground.position(a).unwrap(), ground.position(b).unwrap()))
            .collect();
        for i in 0..pos.len() {
            for j in i + 1..pos.len() {
                if edges_cross(pos[i], pos[j]) {
                    return Err(CoreError::validation("edges cross"));
                }
            }
        }
        Ok(NonCrossingGraph {
            ground,
            edges: canon,
        })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// True iff the graph has a single connected component covering the
    /// whole ground set.
    pub fn is_connected(&self) -> bool {
        components_partition(self).num_blocks() == 1
    }
}

impl Serialize for NonCrossingGraph {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            ground: &'a GroundSet,
            edges: &'a [(u32, u32)],
        }
        Repr {
            ground: &self.ground,
            edges: &self.edges,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NonCrossingGraph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            ground: GroundSet,
            edges: Vec<(u32, u32)>,
        }
        let r = Repr::deserialize(d)?;
        NonCrossingGraph::new(r.ground, r.edges).map_err(D::Error::custom)
    }
}

/// All non-crossing graphs on `ground`, in deterministic order (sorted
/// canonical edge lists, shorter lists first).
pub fn enumerate_ncg(ground: &GroundSet) -> Result<Vec<NonCrossingGraph>, CoreError> {
    let n = ground.len();
    if n > NCG_ENUMERATION_CAP {
        return Err(CoreError::SizeLimit {
            what: "non-crossing graph enumeration",
            cap: NCG_ENUMERATION_CAP,
            got: n,
        });
    }
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            candidates.push((i, j));
        }
    }
    let mut out = Vec::new();
    let mut chosen: Vec<(usize, usize)> = Vec::new();
    fn dfs(
        idx: usize,
        candidates: &[(usize, usize)],
        chosen: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if idx == candidates.len() {
            out.push(chosen.clone());
            return;
        }
        dfs(idx + 1, candidates, chosen, out);
        let e = candidates[idx];
        if chosen.iter().all(|&c| !edges_cross(c, e)) {
            chosen.push(e);
            dfs(idx + 1, candidates, chosen, out);
            chosen.pop();
        }
    }
    let mut edge_sets = Vec::new();
    dfs(0, &candidates, &mut chosen, &mut edge_sets);
    for es in edge_sets {
        let mut edges: Vec<(u32, u32)> = es
            .into_iter()
            .map(|(i, j)| (ground.elems()[i], ground.elems()[j]))
            .collect();
        edges.sort_unstable();
        out.push(NonCrossingGraph {
            ground: ground.clone(),
            edges,
        });
    }
    out.sort_by(|a, b| {
        (a.edges.len(), &a.edges).cmp(&(b.edges.len(), &b.edges))
    });
    Ok(out)
}

/// The connected non-crossing graphs on `ground`.
pub fn enumerate_connected_ncg(ground: &GroundSet) -> Result<Vec<NonCrossingGraph>, CoreError> {
    Ok(enumerate_ncg(ground)?
        .into_iter()
        .filter(|g| g.is_connected())
        .collect())
}

/// The partition of the ground set into connected components of `g`.
/// Non-crossing edges always induce a non-crossing partition.
pub fn components_partition(g: &NonCrossingGraph) -> NonCrossingPartition {
    let n = g.ground.len();
    let mut uf = UnionFind::new(n);
    for &(a, b) in &g.edges {
        uf.union(
            g.ground.position(a).unwrap(),
            g.ground.position(b).unwrap(),
        );
    }
    let blocks = uf
        .components(n)
        .into_iter()
        .map(|comp| comp.into_iter().map(|p| g.ground.elems()[p]).collect())
        .collect();
    NonCrossingPartition {
        ground: g.ground.clone(),
        blocks: canonicalize_blocks(blocks),
    }
}
