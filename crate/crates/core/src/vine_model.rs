//! Simplified vine copula models on the uniform scale.
//!
//! A model is a regular vine structure with one pair-copula per edge. The
//! density factorizes over the edges, with each factor evaluated at
//! conditional pseudo-observations built by h-function recursion. The
//! recursion is compiled once per model into an evaluation plan (a slot
//! arena plus one step per edge), which turns per-point evaluation into a
//! single pass and is shared by the density, the Rosenblatt transform, and
//! the inverse-Rosenblatt sampler.
//!
//! The sampling order is the structure's canonical diagonal (see
//! [`RVineStructure::sampling_order`]); simulation draws one uniform per
//! variable per observation from a per-observation substream.

use serde::{Deserialize, Serialize};
use std::collections::HashMap;

use crate::error::{Result, VineError};
use crate::pair_copula::PairCopula;
use crate::rng::{unit, RandomStream};
use crate::sample::SampleMatrix;
use crate::scalar::{clamp_unit, Real};
use crate::vine_structure::{Edge, RVineStructure, VarId};

#[derive(Debug, Clone)]
struct PlanStep {
    in_a: usize,
    in_b: usize,
    out_b_given_a: usize,
    out_a_given_b: usize,
}

#[derive(Debug, Clone)]
struct EvalPlan {
    n_slots: usize,
    steps: Vec<PlanStep>,
    order: Vec<VarId>,
    ladders: Vec<Vec<usize>>,
    z_slots: Vec<usize>,
}

impl EvalPlan {
    fn build(structure: &RVineStructure) -> Result<Self> {
        let d = structure.dim();
        let mut n_slots = d;
        let mut dict: HashMap<(VarId, Vec<VarId>), usize> = HashMap::new();
        for v in 1..=d {
            dict.insert((v, Vec::new()), v - 1);
        }
        let mut steps = Vec::with_capacity(structure.num_edges());
        for e in structure.all_edges() {
            let (a, b) = e.conditioned();
            let key_a = (a, e.cond().to_vec());
            let key_b = (b, e.cond().to_vec());
            let in_a = *dict.get(&key_a).ok_or_else(|| {
                VineError::Numerical(format!("missing pseudo-observation for {a}|{:?}", e.cond()))
            })?;
            let in_b = *dict.get(&key_b).ok_or_else(|| {
                VineError::Numerical(format!("missing pseudo-observation for {b}|{:?}", e.cond()))
            })?;
            let out_b_given_a = n_slots;
            let out_a_given_b = n_slots + 1;
            n_slots += 2;
            let mut cond_a = e.cond().to_vec();
            cond_a.push(a);
            cond_a.sort_unstable();
            let mut cond_b = e.cond().to_vec();
            cond_b.push(b);
            cond_b.sort_unstable();
            dict.insert((b, cond_a), out_b_given_a);
            dict.insert((a, cond_b), out_a_given_b);
            steps.push(PlanStep {
                in_a,
                in_b,
                out_b_given_a,
                out_a_given_b,
            });
        }

        let so = structure.sampling_order()?;
        let edges: Vec<&Edge> = structure.all_edges().collect();
        let mut z_slots = Vec::with_capacity(d);
        for j in 0..d {
            if j == 0 {
                z_slots.push(so.order[0] - 1);
            } else {
                let top = so.ladders[j][j - 1];
                let v = so.order[j];
                let slot = if edges[top].conditioned().1 == v {
                    steps[top].out_b_given_a
                } else {
                    steps[top].out_a_given_b
                };
                z_slots.push(slot);
            }
        }
        Ok(EvalPlan {
            n_slots,
            steps,
            order: so.order,
            ladders: so.ladders,
            z_slots,
        })
    }
}

/// A simplified vine copula: structure plus one pair-copula per edge.
#[derive(Debug, Clone)]
pub struct VineModel<R: Real> {
    structure: RVineStructure,
    pairs: Vec<PairCopula<R>>,
    plan: EvalPlan,
}

impl<R: Real> PartialEq for VineModel<R> {
    fn eq(&self, other: &Self) -> bool {
        self.structure == other.structure && self.pairs == other.pairs
    }
}

impl<R: Real> VineModel<R> {
    /// Builds a model from explicit edge assignments; every structure edge
    /// must be covered exactly once.
    pub fn new(structure: RVineStructure, assignments: Vec<(Edge, PairCopula<R>)>) -> Result<Self> {
        let mut map: HashMap<Edge, PairCopula<R>> = HashMap::with_capacity(assignments.len());
        for (e, pc) in assignments {
            if map.insert(e.clone(), pc).is_some() {
                return Err(VineError::UnknownEdge(format!(
                    "duplicate pair-copula for edge {}",
                    e.label()
                )));
            }
        }
        let mut pairs = Vec::with_capacity(structure.num_edges());
        for e in structure.all_edges() {
            let pc = map.remove(e).ok_or_else(|| {
                VineError::UnknownEdge(format!("no pair-copula assigned to edge {}", e.label()))
            })?;
            pairs.push(pc);
        }
        if let Some(extra) = map.keys().next() {
            return Err(VineError::UnknownEdge(extra.label()));
        }
        Self::from_ordered_pairs(structure, pairs)
    }

    /// Builds a model from pair-copulas listed in global edge order.
    pub fn from_ordered_pairs(structure: RVineStructure, pairs: Vec<PairCopula<R>>) -> Result<Self> {
        if pairs.len() != structure.num_edges() {
            return Err(VineError::DimensionMismatch {
                expected: structure.num_edges(),
                got: pairs.len(),
            });
        }
        structure.validate()?;
        let plan = EvalPlan::build(&structure)?;
        Ok(VineModel {
            structure,
            pairs,
            plan,
        })
    }

    /// All edges carry the independence copula.
    pub fn independence(structure: RVineStructure) -> Result<Self> {
        let pairs = vec![PairCopula::independence(); structure.num_edges()];
        Self::from_ordered_pairs(structure, pairs)
    }

    /// Two-variable model with a single pair-copula.
    pub fn single_pair(pc: PairCopula<R>) -> Self {
        let structure = RVineStructure::dvine(2).expect("dvine(2) is valid");
        Self::from_ordered_pairs(structure, vec![pc]).expect("single edge always matches")
    }

    pub fn structure(&self) -> &RVineStructure {
        &self.structure
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    pub fn pair(&self, e: &Edge) -> Option<&PairCopula<R>> {
        self.structure.edge_index(e).map(|i| &self.pairs[i])
    }

    pub fn edge_pairs(&self) -> impl Iterator<Item = (&Edge, &PairCopula<R>)> {
        self.structure.all_edges().zip(self.pairs.iter())
    }

    /// Sampling/Rosenblatt variable order (the structure's canonical
    /// diagonal).
    pub fn sampling_order(&self) -> &[VarId] {
        &self.plan.order
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(VineError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Fills the slot arena for one observation and returns the log density
    /// accumulated over the edges.
    fn run_plan(&self, u: &[R], arena: &mut [R]) -> R {
        for (v, slot) in u.iter().zip(arena.iter_mut()) {
            *slot = clamp_unit(*v);
        }
        let mut ll = R::zero();
        for (step, pc) in self.plan.steps.iter().zip(&self.pairs) {
            let va = arena[step.in_a];
            let vb = arena[step.in_b];
            ll += pc.log_pdf(va, vb);
            arena[step.out_b_given_a] = clamp_unit(pc.hfunc1(va, vb));
            arena[step.out_a_given_b] = clamp_unit(pc.hfunc2(va, vb));
        }
        ll
    }

    /// Log of the vine density at a point of `(0,1)^d`.
    pub fn log_density(&self, u: &[R]) -> Result<R> {
        self.check_dim(u.len())?;
        let mut arena = vec![R::zero(); self.plan.n_slots];
        Ok(self.run_plan(u, &mut arena))
    }

    /// Total log-likelihood of a sample.
    pub fn loglik(&self, s: &SampleMatrix<R>) -> Result<R> {
        if s.n() > 0 {
            self.check_dim(s.dim())?;
        }
        let mut arena = vec![R::zero(); self.plan.n_slots];
        let mut total = R::zero();
        for row in s.rows() {
            total += self.run_plan(row, &mut arena);
        }
        Ok(total)
    }

    /// Inverse-Rosenblatt simulation: n i.i.d. observations.
    ///
    /// Observation `i` draws `d` uniforms from substream `i` (one per
    /// variable, in variable order); the uniform at column `v` drives
    /// variable `v`'s conditional inversion.
    pub fn simulate(&self, n: usize, stream: &mut RandomStream) -> SampleMatrix<R> {
        let d = self.dim();
        let edges: Vec<&Edge> = self.structure.all_edges().collect();
        let mut out = SampleMatrix::with_dim(d);
        let mut arena = vec![R::zero(); self.plan.n_slots];
        let mut u = vec![R::zero(); d];
        let mut w = vec![R::zero(); d];
        for i in 0..n {
            let mut rng = stream.substream(i as u64);
            for wj in w.iter_mut() {
                *wj = unit(&mut rng);
            }
            for j in 0..d {
                let v = self.plan.order[j];
                let mut x = w[v - 1];
                for k in (0..j).rev() {
                    let eidx = self.plan.ladders[j][k];
                    let step = &self.plan.steps[eidx];
                    let pc = &self.pairs[eidx];
                    x = if edges[eidx].conditioned().1 == v {
                        pc.hinv1(arena[step.in_a], x)
                    } else {
                        pc.hinv2(arena[step.in_b], x)
                    };
                }
                u[v - 1] = x;
                arena[v - 1] = x;
                for &eidx in &self.plan.ladders[j] {
                    let step = &self.plan.steps[eidx];
                    let pc = &self.pairs[eidx];
                    let va = arena[step.in_a];
                    let vb = arena[step.in_b];
                    arena[step.out_b_given_a] = clamp_unit(pc.hfunc1(va, vb));
                    arena[step.out_a_given_b] = clamp_unit(pc.hfunc2(va, vb));
                }
            }
            out.push_row(&u).expect("fixed row width");
        }
        out
    }

    /// Rosenblatt transform: maps a model sample to i.i.d. uniforms.
    /// Column `v` of the output holds the conditional PIT of variable `v`,
    /// so `rosenblatt` inverts `simulate`'s driving uniforms.
    pub fn rosenblatt(&self, s: &SampleMatrix<R>) -> Result<SampleMatrix<R>> {
        self.check_dim(s.dim())?;
        let mut out = SampleMatrix::with_labels(s.labels().to_vec());
        let mut arena = vec![R::zero(); self.plan.n_slots];
        let mut z = vec![R::zero(); self.dim()];
        for row in s.rows() {
            self.run_plan(row, &mut arena);
            for j in 0..self.dim() {
                z[self.plan.order[j] - 1] = arena[self.plan.z_slots[j]];
            }
            out.push_row(&z)?;
        }
        Ok(out)
    }

    /// The conditional pseudo-observations `(U_a|D, U_b|D)` feeding edge `e`.
    pub fn pseudo_obs(&self, s: &SampleMatrix<R>, e: &Edge) -> Result<SampleMatrix<R>> {
        self.check_dim(s.dim())?;
        let idx = self
            .structure
            .edge_index(e)
            .ok_or_else(|| VineError::UnknownEdge(e.label()))?;
        let (a, b) = e.conditioned();
        let label = |v: VarId| {
            if e.cond().is_empty() {
                format!("u{v}")
            } else {
                let cond: Vec<String> = e.cond().iter().map(|c| c.to_string()).collect();
                format!("u{v}|{}", cond.join(","))
            }
        };
        let mut out = SampleMatrix::with_labels(vec![label(a), label(b)]);
        let step_in = (self.plan.steps[idx].in_a, self.plan.steps[idx].in_b);
        let mut arena = vec![R::zero(); self.plan.n_slots];
        for row in s.rows() {
            self.run_plan(row, &mut arena);
            out.push_row(&[arena[step_in.0], arena[step_in.1]])?;
        }
        Ok(out)
    }
}

// serialization:
// {"structure": {...},
//  "pairs": [{"tree":1,"pair":[1,2],"cond":[],"copula":{...}}, ...]}
#[derive(Serialize, Deserialize)]
struct ModelPairRepr {
    tree: usize,
    pair: [usize; 2],
    cond: Vec<usize>,
    copula: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    structure: RVineStructure,
    pairs: Vec<ModelPairRepr>,
}

impl<R: Real> Serialize for VineModel<R> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs = self
            .edge_pairs()
            .map(|(e, pc)| {
                let (a, b) = e.conditioned();
                ModelPairRepr {
                    tree: e.level(),
                    pair: [a, b],
                    cond: e.cond().to_vec(),
                    copula: serde_json::to_value(pc).expect("pair copula serializes"),
                }
            })
            .collect();
        ModelRepr {
            structure: self.structure.clone(),
            pairs,
        }
        .serialize(s)
    }
}

impl<'de, R: Real> Deserialize<'de> for VineModel<R> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let repr = ModelRepr::deserialize(d)?;
        let mut assignments = Vec::with_capacity(repr.pairs.len());
        for p in repr.pairs {
            let pc: PairCopula<R> =
                serde_json::from_value(p.copula).map_err(|e| D::Error::custom(e.to_string()))?;
            assignments.push((Edge::new(p.pair[0], p.pair[1], p.cond), pc));
        }
        VineModel::new(repr.structure, assignments).map_err(|e| D::Error::custom(e.to_string()))
    }
}
