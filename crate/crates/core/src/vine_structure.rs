//! Regular vine tree sequences.
//!
//! A structure on `d` variables is the explicit sequence of trees
//! `T_1..T_{d-1}`; each edge carries its conditioned pair `(a, b)` and
//! conditioning set `D`. Tree `k` has `d - k` edges whose conditioning sets
//! have `k - 1` elements. Validation checks edge shapes, tree-ness per
//! level, and the proximity condition.
//!
//! Variables are 1-based throughout, matching column labels `u1..ud`.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

use crate::error::{Result, VineError};

pub type VarId = usize;

/// A vine edge: conditioned pair plus conditioning set.
///
/// The conditioned pair is stored unordered and serialized with `a < b`;
/// the conditioning set is kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    a: VarId,
    b: VarId,
    cond: Vec<VarId>,
}

impl Edge {
    pub fn new(x: VarId, y: VarId, mut cond: Vec<VarId>) -> Self {
        let (a, b) = if x <= y { (x, y) } else { (y, x) };
        cond.sort_unstable();
        cond.dedup();
        Edge { a, b, cond }
    }

    pub fn conditioned(&self) -> (VarId, VarId) {
        (self.a, self.b)
    }

    pub fn cond(&self) -> &[VarId] {
        &self.cond
    }

    /// Tree level: `|D| + 1`.
    pub fn level(&self) -> usize {
        self.cond.len() + 1
    }

    /// Sorted union of the conditioned pair and the conditioning set.
    pub fn constraint_set(&self) -> Vec<VarId> {
        let mut s = self.cond.clone();
        s.push(self.a);
        s.push(self.b);
        s.sort_unstable();
        s
    }

    /// Human-readable form, e.g. `2,5|1,3,4`.
    pub fn label(&self) -> String {
        if self.cond.is_empty() {
            format!("{},{}", self.a, self.b)
        } else {
            let cond: Vec<String> = self.cond.iter().map(|v| v.to_string()).collect();
            format!("{},{}|{}", self.a, self.b, cond.join(","))
        }
    }

    /// True if `v` is one of the conditioned variables.
    pub fn conditions(&self, v: VarId) -> bool {
        self.a == v || self.b == v
    }

    /// The conditioned variable that is not `v`.
    pub fn partner(&self, v: VarId) -> VarId {
        if self.a == v {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationRule {
    TreeCount,
    EdgeShape,
    NotATree,
    Proximity,
}

impl std::fmt::Display for ViolationRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ViolationRule::TreeCount => "tree count",
            ViolationRule::EdgeShape => "edge shape",
            ViolationRule::NotATree => "not a tree",
            ViolationRule::Proximity => "proximity condition",
        };
        f.write_str(s)
    }
}

/// First violated structural rule, with the tree level it occurred at.
#[derive(Debug, Clone, thiserror::Error)]
#[error("tree {level}: {rule} violated: {detail}")]
pub struct StructureViolation {
    pub level: usize,
    pub rule: ViolationRule,
    pub detail: String,
}

fn violation(level: usize, rule: ViolationRule, detail: impl Into<String>) -> StructureViolation {
    StructureViolation {
        level,
        rule,
        detail: detail.into(),
    }
}

/// A regular vine: the tree sequence `T_1..T_{d-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RVineStructure {
    d: usize,
    trees: Vec<Vec<Edge>>,
}

impl RVineStructure {
    /// Builds and validates a structure from its trees. Edges within each
    /// tree are put into canonical order (sorted by conditioned pair).
    pub fn new(d: usize, mut trees: Vec<Vec<Edge>>) -> std::result::Result<Self, StructureViolation> {
        for t in &mut trees {
            t.sort();
        }
        let s = RVineStructure { d, trees };
        s.validate()?;
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn num_edges(&self) -> usize {
        self.d * (self.d - 1) / 2
    }

    /// Edges of tree `k` (1-based) in canonical order.
    pub fn edges_of(&self, k: usize) -> Result<&[Edge]> {
        if k == 0 || k > self.d - 1 {
            return Err(VineError::Parse(format!(
                "tree level {k} out of range 1..={}",
                self.d - 1
            )));
        }
        Ok(&self.trees[k - 1])
    }

    pub fn trees(&self) -> &[Vec<Edge>] {
        &self.trees
    }

    /// All edges in (level, canonical) order; the position in this
    /// iteration is the edge's global index.
    pub fn all_edges(&self) -> impl Iterator<Item = &Edge> {
        self.trees.iter().flatten()
    }

    pub fn edge_index(&self, e: &Edge) -> Option<usize> {
        let mut idx = 0;
        for t in &self.trees {
            for edge in t {
                if edge == e {
                    return Some(idx);
                }
                idx += 1;
            }
        }
        None
    }

    /// D-vine: tree 1 is the path `1-2-...-d`.
    pub fn dvine(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(VineError::Parse(format!("vine needs d >= 2, got {d}")));
        }
        let mut trees = Vec::with_capacity(d - 1);
        for k in 1..d {
            let tree: Vec<Edge> = (1..=d - k)
                .map(|i| Edge::new(i, i + k, (i + 1..i + k).collect()))
                .collect();
            trees.push(tree);
        }
        Self::new(d, trees).map_err(Into::into)
    }

    /// C-vine: tree 1 is the star on `root`, later trees root at the
    /// remaining variables in ascending order.
    pub fn cvine(d: usize, root: VarId) -> Result<Self> {
        if d < 2 {
            return Err(VineError::Parse(format!("vine needs d >= 2, got {d}")));
        }
        if root == 0 || root > d {
            return Err(VineError::Parse(format!("root {root} not in 1..={d}")));
        }
        let mut order = vec![root];
        order.extend((1..=d).filter(|&v| v != root));
        Self::cvine_ordered(&order)
    }

    /// C-vine with an explicit root sequence: tree `k` is the star centered
    /// at `order[k-1]`, conditioned on the earlier roots.
    pub fn cvine_ordered(order: &[VarId]) -> Result<Self> {
        let d = order.len();
        if d < 2 {
            return Err(VineError::Parse(format!("vine needs d >= 2, got {d}")));
        }
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        if sorted != (1..=d).collect::<Vec<_>>() {
            return Err(VineError::Parse(format!(
                "order {order:?} is not a permutation of 1..={d}"
            )));
        }
        let mut trees = Vec::with_capacity(d - 1);
        for k in 1..d {
            let center = order[k - 1];
            let cond: Vec<VarId> = order[..k - 1].to_vec();
            let tree: Vec<Edge> = order[k..]
                .iter()
                .map(|&v| Edge::new(center, v, cond.clone()))
                .collect();
            trees.push(tree);
        }
        Self::new(d, trees).map_err(Into::into)
    }

    /// Checks tree counts, edge shapes, tree-ness per level, and the
    /// proximity condition; reports the first violation.
    pub fn validate(&self) -> std::result::Result<(), StructureViolation> {
        let d = self.d;
        if d < 2 {
            return Err(violation(1, ViolationRule::TreeCount, format!("d = {d} < 2")));
        }
        if self.trees.len() != d - 1 {
            return Err(violation(
                self.trees.len(),
                ViolationRule::TreeCount,
                format!("expected {} trees, got {}", d - 1, self.trees.len()),
            ));
        }
        for (ti, tree) in self.trees.iter().enumerate() {
            let k = ti + 1;
            if tree.len() != d - k {
                return Err(violation(
                    k,
                    ViolationRule::TreeCount,
                    format!("expected {} edges, got {}", d - k, tree.len()),
                ));
            }
            for e in tree {
                if e.a == e.b
                    || e.a == 0
                    || e.b > d
                    || e.cond.iter().any(|&v| v == 0 || v > d)
                    || e.cond.contains(&e.a)
                    || e.cond.contains(&e.b)
                {
                    return Err(violation(
                        k,
                        ViolationRule::EdgeShape,
                        format!("edge {} has an invalid conditioned pair", e.label()),
                    ));
                }
                if e.cond.len() != k - 1 {
                    return Err(violation(
                        k,
                        ViolationRule::EdgeShape,
                        format!(
                            "edge {} has |D| = {}, expected {}",
                            e.label(),
                            e.cond.len(),
                            k - 1
                        ),
                    ));
                }
            }
        }

        // tree 1: spanning tree on the variables
        check_is_tree(
            1,
            d,
            self.trees[0]
                .iter()
                .map(|e| (e.a - 1, e.b - 1))
                .collect::<Vec<_>>(),
        )?;

        // higher trees: each edge must join the two lower edges whose
        // constraint sets are D + {a} and D + {b} (this encodes proximity),
        // and the induced graph on the lower tree's edges must be a tree.
        for k in 2..d {
            let prev: HashMap<Vec<VarId>, usize> = self.trees[k - 2]
                .iter()
                .enumerate()
                .map(|(i, e)| (e.constraint_set(), i))
                .collect();
            let mut links = Vec::with_capacity(self.trees[k - 1].len());
            for e in &self.trees[k - 1] {
                let mut left = e.cond.clone();
                left.push(e.a);
                left.sort_unstable();
                let mut right = e.cond.clone();
                right.push(e.b);
                right.sort_unstable();
                match (prev.get(&left), prev.get(&right)) {
                    (Some(&l), Some(&r)) => links.push((l, r)),
                    _ => {
                        return Err(violation(
                            k,
                            ViolationRule::Proximity,
                            format!(
                                "edge {} requires tree-{} edges with constraint sets {:?} and {:?}",
                                e.label(),
                                k - 1,
                                left,
                                right
                            ),
                        ))
                    }
                }
            }
            check_is_tree(k, d - k + 1, links)?;
        }
        Ok(())
    }

    /// The canonical sampling (diagonal) order and, for each variable, its
    /// ladder: the edges that condition it, one per tree level.
    ///
    /// Peeling picks the larger conditioned variable of the current top
    /// edge, removes its ladder, and recurses on the remaining sub-vine.
    pub fn sampling_order(&self) -> Result<SamplingOrder> {
        let edges: Vec<&Edge> = self.all_edges().collect();
        let mut active = vec![true; edges.len()];
        let d = self.d;
        let mut order = vec![0usize; d];
        let mut ladders: Vec<Vec<usize>> = vec![Vec::new(); d];

        for j in (1..d).rev() {
            // the single active edge at level j
            let top = edges
                .iter()
                .enumerate()
                .find(|(i, e)| active[*i] && e.level() == j)
                .map(|(i, _)| i)
                .ok_or_else(|| {
                    VineError::Numerical(format!("no active edge at level {j} while peeling"))
                })?;
            let (a, b) = edges[top].conditioned();
            let v = a.max(b);
            order[j] = v;
            let mut ladder = Vec::with_capacity(j);
            for k in 1..=j {
                let found: Vec<usize> = edges
                    .iter()
                    .enumerate()
                    .filter(|(i, e)| active[*i] && e.level() == k && e.conditions(v))
                    .map(|(i, _)| i)
                    .collect();
                if found.len() != 1 {
                    return Err(VineError::Numerical(format!(
                        "variable {v} appears in {} active edges at level {k}, expected 1",
                        found.len()
                    )));
                }
                ladder.push(found[0]);
                active[found[0]] = false;
            }
            // ladder nesting: D_{k+1} = D_k + {partner_k}
            for k in 1..j {
                let mut expect = edges[ladder[k - 1]].cond().to_vec();
                expect.push(edges[ladder[k - 1]].partner(v));
                expect.sort_unstable();
                if expect != edges[ladder[k]].cond() {
                    return Err(VineError::Numerical(format!(
                        "ladder of variable {v} is not nested at level {}",
                        k + 1
                    )));
                }
            }
            ladders[j] = ladder;
        }

        let used: BTreeSet<VarId> = order[1..].iter().copied().collect();
        order[0] = (1..=d)
            .find(|v| !used.contains(v))
            .ok_or_else(|| VineError::Numerical("peeling left no first variable".into()))?;
        Ok(SamplingOrder { order, ladders })
    }

    /// Triangular-array export: one column per variable in reverse peel
    /// order. A column lists the variable followed by its ladder partners,
    /// so column `[v, c1, .., ck]` encodes the edges
    /// `(v, c1), (v, c2 | c1), ..., (v, ck | c1..c{k-1})`.
    pub fn to_matrix(&self) -> Result<Vec<Vec<VarId>>> {
        let so = self.sampling_order()?;
        let edges: Vec<&Edge> = self.all_edges().collect();
        let mut cols = Vec::with_capacity(self.d);
        for j in (0..self.d).rev() {
            let v = so.order[j];
            let mut col = vec![v];
            for &ei in &so.ladders[j] {
                col.push(edges[ei].partner(v));
            }
            cols.push(col);
        }
        Ok(cols)
    }

    /// Inverse of [`Self::to_matrix`].
    pub fn from_matrix(cols: &[Vec<VarId>]) -> Result<Self> {
        let d = cols.len();
        if d < 2 {
            return Err(VineError::Parse("triangular array needs d >= 2 columns".into()));
        }
        let mut trees: Vec<Vec<Edge>> = vec![Vec::new(); d - 1];
        for (i, col) in cols.iter().enumerate() {
            if col.len() != d - i {
                return Err(VineError::Parse(format!(
                    "column {i} has length {}, expected {}",
                    col.len(),
                    d - i
                )));
            }
            let v = col[0];
            for k in 1..col.len() {
                let cond = col[1..k].to_vec();
                trees[k - 1].push(Edge::new(v, col[k], cond));
            }
        }
        Ok(Self::new(d, trees)?)
    }
}

/// Result of peeling: the diagonal order and per-variable ladders
/// (global edge indices, one per level, ascending).
#[derive(Debug, Clone)]
pub struct SamplingOrder {
    pub order: Vec<VarId>,
    pub ladders: Vec<Vec<usize>>,
}

fn check_is_tree(
    level: usize,
    n_nodes: usize,
    links: Vec<(usize, usize)>,
) -> std::result::Result<(), StructureViolation> {
    let mut parent: Vec<usize> = (0..n_nodes).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (a, b) in links {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra == rb {
            return Err(violation(
                level,
                ViolationRule::NotATree,
                "edges form a cycle",
            ));
        }
        parent[ra] = rb;
    }
    // n_nodes - 1 edges and no cycle implies connected
    Ok(())
}

// serialization: {"d": 3, "trees": [[{"pair":[1,2],"cond":[]}, ...], ...]}
#[derive(Serialize, Deserialize)]
struct EdgeRepr {
    pair: [usize; 2],
    cond: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct StructureRepr {
    d: usize,
    trees: Vec<Vec<EdgeRepr>>,
}

impl Serialize for RVineStructure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StructureRepr {
            d: self.d,
            trees: self
                .trees
                .iter()
                .map(|t| {
                    t.iter()
                        .map(|e| EdgeRepr {
                            pair: [e.a, e.b],
                            cond: e.cond.clone(),
                        })
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RVineStructure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = StructureRepr::deserialize(d)?;
        let trees = repr
            .trees
            .into_iter()
            .map(|t| {
                t.into_iter()
                    .map(|e| Edge::new(e.pair[0], e.pair[1], e.cond))
                    .collect()
            })
            .collect();
        RVineStructure::new(repr.d, trees).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The five-variable structure used as the running example: first tree
    /// 1-2, 1-3, 3-4, 3-5, then 2,3|1, 1,4|3, 1,5|3, then 2,4|1,3, 4,5|1,3,
    /// then 2,5|1,3,4.
    pub(crate) fn five_var_example() -> RVineStructure {
        RVineStructure::new(
            5,
            vec![
                vec![
                    Edge::new(1, 2, vec![]),
                    Edge::new(1, 3, vec![]),
                    Edge::new(3, 4, vec![]),
                    Edge::new(3, 5, vec![]),
                ],
                vec![
                    Edge::new(2, 3, vec![1]),
                    Edge::new(1, 4, vec![3]),
                    Edge::new(1, 5, vec![3]),
                ],
                vec![Edge::new(2, 4, vec![1, 3]), Edge::new(4, 5, vec![1, 3])],
                vec![Edge::new(2, 5, vec![1, 3, 4])],
            ],
        )
        .unwrap()
    }

    #[test]
    fn dvine_and_cvine_definitions() {
        let dv = RVineStructure::dvine(3).unwrap();
        assert_eq!(
            dv.edges_of(1).unwrap(),
            &[Edge::new(1, 2, vec![]), Edge::new(2, 3, vec![])]
        );
        assert_eq!(dv.edges_of(2).unwrap(), &[Edge::new(1, 3, vec![2])]);

        let cv = RVineStructure::cvine(4, 1).unwrap();
        assert_eq!(
            cv.edges_of(1).unwrap(),
            &[
                Edge::new(1, 2, vec![]),
                Edge::new(1, 3, vec![]),
                Edge::new(1, 4, vec![])
            ]
        );

        let single = RVineStructure::dvine(2).unwrap();
        assert_eq!(single.edges_of(1).unwrap(), &[Edge::new(1, 2, vec![])]);

        assert!(RVineStructure::dvine(1).is_err());
    }

    #[test]
    fn generated_structures_validate() {
        for d in 2..=10 {
            assert!(RVineStructure::dvine(d).unwrap().validate().is_ok());
            for root in 1..=d {
                assert!(RVineStructure::cvine(d, root).unwrap().validate().is_ok());
            }
        }
    }

    #[test]
    fn five_var_example_is_regular() {
        let s = five_var_example();
        assert!(s.validate().is_ok());
        assert_eq!(s.edges_of(4).unwrap(), &[Edge::new(2, 5, vec![1, 3, 4])]);
    }

    #[test]
    fn edge_count_identity() {
        for s in [
            RVineStructure::dvine(6).unwrap(),
            RVineStructure::cvine(6, 3).unwrap(),
            five_var_example(),
        ] {
            let total: usize = (1..s.dim()).map(|k| s.edges_of(k).unwrap().len()).sum();
            assert_eq!(total, s.dim() * (s.dim() - 1) / 2);
            assert_eq!(total, s.num_edges());
        }
    }

    #[test]
    fn proximity_violation_is_reported_at_its_level() {
        // T_2 joins edges (1,2) and (4,5) of a 5-variable path, which share
        // no node.
        let bad = RVineStructure::new(
            5,
            vec![
                vec![
                    Edge::new(1, 2, vec![]),
                    Edge::new(2, 3, vec![]),
                    Edge::new(3, 4, vec![]),
                    Edge::new(4, 5, vec![]),
                ],
                vec![
                    Edge::new(1, 4, vec![2]), // requires {2,4} in T1: absent
                    Edge::new(2, 4, vec![3]),
                    Edge::new(3, 5, vec![4]),
                ],
                vec![Edge::new(1, 3, vec![2, 4]), Edge::new(2, 5, vec![3, 4])],
                vec![Edge::new(1, 5, vec![2, 3, 4])],
            ],
        );
        match bad {
            Err(v) => {
                assert_eq!(v.level, 2);
                assert_eq!(v.rule, ViolationRule::Proximity);
            }
            Ok(_) => panic!("expected proximity violation"),
        }
    }

    #[test]
    fn conditioning_sets_grow_by_one_per_level() {
        let s = five_var_example();
        for k in 1..s.dim() {
            for e in s.edges_of(k).unwrap() {
                assert_eq!(e.cond().len(), k - 1);
            }
        }
    }

    #[test]
    fn sampling_order_covers_all_edges() {
        for s in [
            RVineStructure::dvine(5).unwrap(),
            RVineStructure::cvine(5, 2).unwrap(),
            five_var_example(),
        ] {
            let so = s.sampling_order().unwrap();
            let mut seen: Vec<usize> = so.ladders.iter().flatten().copied().collect();
            seen.sort_unstable();
            assert_eq!(seen, (0..s.num_edges()).collect::<Vec<_>>());
            let mut vars = so.order.clone();
            vars.sort_unstable();
            assert_eq!(vars, (1..=s.dim()).collect::<Vec<_>>());
            // ladder of the variable at position j has one edge per level
            for (j, ladder) in so.ladders.iter().enumerate() {
                assert_eq!(ladder.len(), j);
            }
        }
    }

    #[test]
    fn matrix_roundtrip() {
        for s in [
            RVineStructure::dvine(5).unwrap(),
            RVineStructure::cvine(6, 4).unwrap(),
            five_var_example(),
        ] {
            let m = s.to_matrix().unwrap();
            let back = RVineStructure::from_matrix(&m).unwrap();
            assert_eq!(s, back);
        }
    }

    #[test]
    fn json_roundtrip_preserves_canonical_order() {
        let s = five_var_example();
        let json = serde_json::to_string(&s).unwrap();
        let back: RVineStructure = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);
        let json2 = serde_json::to_string(&back).unwrap();
        assert_eq!(json, json2);
    }
}
