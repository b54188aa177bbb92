//! Combinatorial 2-complexes over a rose, branched maps, folding, Nielsen
//! reduction, one-relator pushouts and the negative-immersions
//! classification.
//!
//! A complex is a labeled skeleton plus faces attached along closed,
//! cyclically reduced edge paths. Codomains of branched maps are
//! presentation complexes: a rose skeleton with a single relator face, so
//! the skeleton morphism of a map into one is carried by the labels and the
//! face data reduces to a branching degree and a rotation per face.

use crate::adjunction::{self, AdjunctionInstance};
use crate::graph::{
    betti_euler, decode_edge_ref, fold, Basis, CellId, GraphMorphism, LabeledGraph,
};
use crate::prank::{PiValue, PrimitivityRankReport};
use crate::whitehead::{is_sub_basis, MinimizationTrace};
use crate::words::{cyclic_reduce, maximal_root, Letter, Word};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet};

/// An edge traversal: (edge id, forwards).
pub type SignedEdge = (CellId, bool);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub path: Vec<SignedEdge>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoComplex {
    pub skeleton: LabeledGraph,
    pub faces: Vec<Face>,
}

fn step_endpoints(g: &LabeledGraph, (eid, fwd): SignedEdge) -> (CellId, CellId) {
    let e = g.edge(eid).expect("face path references a skeleton edge");
    if fwd {
        (e.from, e.to)
    } else {
        (e.to, e.from)
    }
}

impl TwoComplex {
    pub fn graph(skeleton: LabeledGraph) -> Self {
        TwoComplex {
            skeleton,
            faces: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, face) in self.faces.iter().enumerate() {
            if face.path.is_empty() {
                return Err(Error::Input(format!("face {i} has an empty attaching path")));
            }
            let m = face.path.len();
            for j in 0..m {
                let (eid, _) = face.path[j];
                if self.skeleton.edge(eid).is_none() {
                    return Err(Error::Input(format!(
                        "face {i} references missing edge {eid}"
                    )));
                }
                let here = step_endpoints(&self.skeleton, face.path[j]);
                let next = step_endpoints(&self.skeleton, face.path[(j + 1) % m]);
                if here.1 != next.0 {
                    return Err(Error::Input(format!("face {i} path is not closed at {j}")));
                }
                // Cyclically reduced: no immediate backtrack.
                let (ne, nf) = face.path[(j + 1) % m];
                if ne == eid && nf != face.path[j].1 && m > 1 {
                    return Err(Error::Input(format!(
                        "face {i} attaching path backtracks at {j}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn chi(&self) -> i64 {
        betti_euler(&self.skeleton).2 + self.faces.len() as i64
    }

    pub fn is_connected(&self) -> bool {
        betti_euler(&self.skeleton).0 <= 1
    }

    /// The label word read along a face path.
    pub fn face_word(&self, face: &Face) -> Word {
        let letters: Vec<Letter> = face
            .path
            .iter()
            .map(|&(eid, fwd)| {
                let l = self.skeleton.edge(eid).unwrap().label as Letter;
                if fwd {
                    l
                } else {
                    -l
                }
            })
            .collect();
        Word::reduce(&letters)
    }

    /// Total traversal count of every skeleton edge over all faces.
    pub fn edge_traversals(&self) -> BTreeMap<CellId, usize> {
        let mut count: BTreeMap<CellId, usize> =
            self.skeleton.edges().map(|e| (e.id, 0)).collect();
        for face in &self.faces {
            for &(eid, _) in &face.path {
                *count.get_mut(&eid).unwrap() += 1;
            }
        }
        count
    }

    /// Boundary: the edges traversed exactly once in total (the closure of
    /// the free faces).
    pub fn boundary_edges(&self) -> BTreeSet<CellId> {
        self.edge_traversals()
            .into_iter()
            .filter(|&(_, c)| c == 1)
            .map(|(e, _)| e)
            .collect()
    }

    /// The 1-skeleton is a core graph: no valence-one vertices and no
    /// isolated vertices away from a single-point graph.
    pub fn skeleton_is_core(&self) -> bool {
        if self.skeleton.edge_count() == 0 {
            return self.skeleton.vertex_count() <= 1;
        }
        self.skeleton.vertices().all(|v| self.skeleton.valence(v) >= 2)
    }
}

// ---------------------------------------------------------------------------
// Free faces, collapses, Nielsen reduction.
// ---------------------------------------------------------------------------

/// Collapse candidates: pairs (face, edge) where the face traverses the
/// edge exactly once and no other face traverses it.
pub fn free_faces(y: &TwoComplex) -> Vec<(usize, CellId)> {
    let total = y.edge_traversals();
    let mut out = Vec::new();
    for (i, face) in y.faces.iter().enumerate() {
        let mut mine: BTreeMap<CellId, usize> = BTreeMap::new();
        for &(eid, _) in &face.path {
            *mine.entry(eid).or_insert(0) += 1;
        }
        for (&eid, &c) in &mine {
            if c == 1 && total[&eid] == 1 {
                out.push((i, eid));
            }
        }
    }
    out
}

/// Removes the open face and the open edge of a free-face pair.
pub fn collapse(y: &TwoComplex, candidate: (usize, CellId)) -> Result<TwoComplex> {
    let (face_idx, edge) = candidate;
    if !free_faces(y).contains(&candidate) {
        return Err(Error::Domain(format!(
            "({face_idx}, {edge}) is not a free face"
        )));
    }
    let mut skeleton = LabeledGraph::new(y.skeleton.rank());
    for v in y.skeleton.vertices() {
        skeleton.add_vertex(v);
    }
    for e in y.skeleton.edges() {
        if e.id != edge {
            skeleton.add_edge(e.id, e.from, e.to, e.label);
        }
    }
    skeleton.set_base(y.skeleton.base());
    let faces = y
        .faces
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != face_idx)
        .map(|(_, f)| f.clone())
        .collect();
    Ok(TwoComplex { skeleton, faces })
}

#[derive(Debug, Clone)]
pub struct NielsenTrace {
    pub collapses: Vec<(usize, CellId)>,
    /// Attaching classes expressed in a spanning-tree basis, when faces
    /// remain after collapsing.
    pub attaching_words: Vec<Word>,
    pub skeleton_rank: usize,
    pub whitehead: Option<MinimizationTrace>,
}

/// Decides whether the complex Nielsen reduces to a graph: collapse free
/// faces to a fixpoint, then test whether the remaining attaching
/// conjugacy classes form a sub-basis of the skeleton group.
pub fn nielsen_reduces_to_graph(y: &TwoComplex) -> Result<(bool, NielsenTrace)> {
    if !y.is_connected() {
        return Err(Error::Domain("nielsen reduction needs a connected complex".into()));
    }
    let mut current = y.clone();
    let mut collapses = Vec::new();
    loop {
        let candidates = free_faces(&current);
        let Some(&first) = candidates.first() else { break };
        collapses.push(first);
        current = collapse(&current, first)?;
    }
    if current.faces.is_empty() {
        return Ok((
            true,
            NielsenTrace {
                collapses,
                attaching_words: Vec::new(),
                skeleton_rank: betti_euler(&current.skeleton).1,
                whitehead: None,
            },
        ));
    }
    let base = current
        .skeleton
        .base()
        .unwrap_or_else(|| current.skeleton.vertices().next().unwrap());
    let basis = Basis::spanning(&current.skeleton, base);
    let rank = basis.rank();
    let words: Vec<Word> = current
        .faces
        .iter()
        .map(|f| {
            let path: Vec<i64> = f
                .path
                .iter()
                .map(|&(eid, fwd)| {
                    if fwd {
                        eid as i64 + 1
                    } else {
                        -(eid as i64 + 1)
                    }
                })
                .collect();
            // The attaching path is based wherever it starts; its class in
            // the skeleton group is the tree-path conjugate, and sub-basis
            // decisions are about conjugacy classes anyway.
            let start = step_endpoints(&current.skeleton, f.path[0]).0;
            let _ = start;
            cyclic_reduce(&basis.rewrite_path(&path)).0
        })
        .collect();
    let decision = is_sub_basis(&words, rank);
    let trace = crate::whitehead::whitehead_minimize(&words, rank.max(1));
    Ok((
        decision,
        NielsenTrace {
            collapses,
            attaching_words: words,
            skeleton_rank: rank,
            whitehead: Some(trace),
        },
    ))
}

// ---------------------------------------------------------------------------
// Branched maps into a one-relator presentation complex.
// ---------------------------------------------------------------------------

/// The single-face presentation complex of a cyclically reduced word over
/// the rank-n rose.
pub fn one_relator_complex(w: &Word, rank: usize) -> Result<TwoComplex> {
    if w.is_empty() || !w.is_cyclically_reduced() {
        return Err(Error::Domain(
            "a one-relator complex needs a nonempty cyclically reduced relator".into(),
        ));
    }
    if w.max_index() > rank {
        return Err(Error::Input("relator exceeds the rank".into()));
    }
    let skeleton = LabeledGraph::rose(rank);
    let path: Vec<SignedEdge> = w
        .letters()
        .iter()
        .map(|&l| (l.unsigned_abs(), l > 0))
        .collect();
    let x = TwoComplex {
        skeleton,
        faces: vec![Face { path }],
    };
    x.validate()?;
    Ok(x)
}

/// A branched map Y -> X over the common rose: labels carry the skeleton
/// morphism, and every face of Y wraps the relator disc some positive
/// number of times with a rotation offset.
#[derive(Debug, Clone)]
pub struct BranchedMap {
    pub y: TwoComplex,
    pub x: TwoComplex,
    pub relator: Word,
    /// Branching degree n_e per face of Y.
    pub degrees: Vec<usize>,
    /// Position 0 of face i maps to relator position rotations[i].
    pub rotations: Vec<usize>,
}

impl BranchedMap {
    /// Infers the face data from the labels and validates the branched-map
    /// conditions, including the immersion condition on vertex links.
    pub fn infer(y: TwoComplex, x: TwoComplex) -> Result<BranchedMap> {
        y.validate()?;
        x.validate()?;
        if x.faces.len() != 1 {
            return Err(Error::Domain("codomain must have exactly one face".into()));
        }
        if x.skeleton.vertex_count() != 1 {
            return Err(Error::Domain("codomain skeleton must be a rose".into()));
        }
        let labels: BTreeSet<u32> = x.skeleton.edges().map(|e| e.label).collect();
        if labels.len() != x.skeleton.edge_count() {
            return Err(Error::Domain("codomain rose must have distinct petals".into()));
        }
        if y.skeleton.rank() != x.skeleton.rank() {
            return Err(Error::Input("domain and codomain disagree about the rose".into()));
        }
        let relator = x.face_word(&x.faces[0]);
        let m = relator.len();
        let mut degrees = Vec::with_capacity(y.faces.len());
        let mut rotations = Vec::with_capacity(y.faces.len());
        for (i, face) in y.faces.iter().enumerate() {
            let word = y.face_word(face);
            if word.len() != face.path.len() {
                return Err(Error::Input(format!(
                    "face {i} attaching word is not reduced"
                )));
            }
            if word.len() % m != 0 || word.is_empty() {
                return Err(Error::Domain(format!(
                    "face {i} boundary length {} is not a multiple of the relator length {m}",
                    word.len()
                )));
            }
            let n = word.len() / m;
            let target = relator.pow(n);
            let rot = (0..m).find(|&r| {
                (0..word.len()).all(|j| word.letters()[j] == target.letters()[(j + r) % (n * m)])
            });
            let Some(rot) = rot else {
                return Err(Error::Domain(format!(
                    "face {i} boundary does not wrap the relator"
                )));
            };
            degrees.push(n);
            rotations.push(rot);
        }
        let map = BranchedMap {
            y,
            x,
            relator,
            degrees,
            rotations,
        };
        map.check_links()?;
        Ok(map)
    }

    /// The relator position of corner j of face i (the corner between path
    /// positions j and j+1 sits before letter (rot + j + 1) of the relator).
    fn corner_position(&self, face: usize, j: usize) -> usize {
        let m = self.relator.len();
        (self.rotations[face] + j + 1) % m
    }

    /// Immersion on vertex links: at each edge-end of Y, the incident face
    /// corners map to distinct corners of the relator disc.
    fn check_links(&self) -> Result<()> {
        // An edge-end is (edge id, end): end false = iota side, true = tau.
        let mut at_end: BTreeMap<(CellId, bool), BTreeSet<usize>> = BTreeMap::new();
        for (i, face) in self.y.faces.iter().enumerate() {
            let len = face.path.len();
            for j in 0..len {
                let corner = self.corner_position(i, j);
                let (e_in, fwd_in) = face.path[j];
                let (e_out, fwd_out) = face.path[(j + 1) % len];
                // Arrival end of the incoming step and departure end of the
                // outgoing step both witness this corner.
                for end in [(e_in, fwd_in), (e_out, !fwd_out)] {
                    if !at_end.entry(end).or_default().insert(corner) {
                        return Err(Error::Domain(format!(
                            "not a branched map: faces fold at edge {} (corner {corner})",
                            end.0
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn degree_sum(&self) -> usize {
        self.degrees.iter().sum()
    }

    /// Branching bookkeeping: sum of (n_e - 1).
    pub fn branching_excess(&self) -> i64 {
        self.degrees.iter().map(|&n| n as i64 - 1).sum()
    }

    pub fn is_immersion(&self) -> bool {
        self.degrees.iter().all(|&n| n == 1) && self.y.skeleton.is_immersed()
    }

    /// The adjunction data of the map: Γ = Y^(1), S the relator circle, P
    /// the disjoint union of the face boundary circles.
    pub fn adjunction_instance(&self) -> AdjunctionInstance {
        let rank = self.x.skeleton.rank();
        let s = crate::words::word_to_cycle(&self.relator, rank).expect("relator is a circle");
        let m = self.relator.len();
        let s_edge_at = |pos: usize| pos as CellId;
        let s_vertex_at = |pos: usize| pos as CellId;

        let mut p = LabeledGraph::new(rank);
        let mut lambda_v = BTreeMap::new();
        let mut lambda_e = BTreeMap::new();
        let mut sigma_v = BTreeMap::new();
        let mut sigma_e = BTreeMap::new();
        let mut next = 0u32;
        for (i, face) in self.y.faces.iter().enumerate() {
            let len = face.path.len();
            let base = next;
            next += len as u32;
            for j in 0..len {
                p.add_vertex(base + j as u32);
            }
            for j in 0..len {
                let pos = (self.rotations[i] + j) % m;
                let letter = self.relator.letters()[pos];
                let (pv_from, pv_to) = (base + j as u32, base + ((j + 1) % len) as u32);
                let id = base + j as u32;
                // Direction matches the letter so that labels are preserved.
                if letter > 0 {
                    p.add_edge(id, pv_from, pv_to, letter as u32);
                } else {
                    p.add_edge(id, pv_to, pv_from, (-letter) as u32);
                }
                sigma_e.insert(id, s_edge_at(pos));
                lambda_e.insert(id, face.path[j].0);
                sigma_v.insert(base + j as u32, s_vertex_at(pos));
                lambda_v.insert(
                    base + j as u32,
                    step_endpoints(&self.y.skeleton, face.path[j]).0,
                );
            }
        }
        let mut gamma = self.y.skeleton.clone();
        gamma.set_base(None);
        AdjunctionInstance {
            rank,
            gamma,
            s,
            p,
            lambda: GraphMorphism {
                vertex_map: lambda_v,
                edge_map: lambda_e,
            },
            sigma: GraphMorphism {
                vertex_map: sigma_v,
                edge_map: sigma_e,
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Folding a combinatorial map of complexes.
// ---------------------------------------------------------------------------

/// A combinatorial (degree-one) map of complexes over the common rose.
#[derive(Debug, Clone)]
pub struct ComplexMap {
    pub domain: TwoComplex,
    pub codomain: TwoComplex,
    pub vertex_map: BTreeMap<CellId, CellId>,
    pub edge_map: BTreeMap<CellId, CellId>,
    /// Per domain face: (codomain face, rotation r), position j mapping to
    /// codomain position j + r.
    pub face_map: Vec<(usize, usize)>,
}

impl ComplexMap {
    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        self.codomain.validate()?;
        let skel = GraphMorphism {
            vertex_map: self.vertex_map.clone(),
            edge_map: self.edge_map.clone(),
        };
        skel.verify(&self.domain.skeleton, &self.codomain.skeleton)?;
        if self.face_map.len() != self.domain.faces.len() {
            return Err(Error::Input("face map must cover every face".into()));
        }
        for (i, &(xf, rot)) in self.face_map.iter().enumerate() {
            let dom = &self.domain.faces[i];
            let cod = self
                .codomain
                .faces
                .get(xf)
                .ok_or_else(|| Error::Input(format!("face {i} maps to missing face {xf}")))?;
            if dom.path.len() != cod.path.len() {
                return Err(Error::Input(format!(
                    "face {i} is not mapped combinatorially"
                )));
            }
            let m = cod.path.len();
            for j in 0..m {
                let (de, df) = dom.path[j];
                let (ce, cf) = cod.path[(j + rot) % m];
                if self.edge_map[&de] != ce || df != cf {
                    return Err(Error::Input(format!(
                        "face {i} path does not commute at position {j}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The image data of a folded map: the middle complex, the quotient onto
/// it, and the immersion onward.
pub struct FoldedComplexMap {
    pub z: TwoComplex,
    pub front: ComplexMap,
    pub back: ComplexMap,
}

/// Folds a combinatorial map of complexes X -> Y into X -> Z ↪ Y with the
/// front surjective and π1-surjective: the skeleton is folded relative to
/// its image in Y, faces are pushed forward, and faces with the same image
/// face and the same attaching path are identified.
pub fn fold_complex_map(f: &ComplexMap) -> Result<FoldedComplexMap> {
    f.validate()?;
    // Fold the skeleton relative to the codomain: relabel edges by their
    // image edge id so that only cells with equal images merge.
    let max_img: CellId = f
        .codomain
        .skeleton
        .edges()
        .map(|e| e.id)
        .max()
        .map(|m| m + 1)
        .unwrap_or(1);
    let mut relabeled = LabeledGraph::new(max_img as usize);
    for v in f.domain.skeleton.vertices() {
        relabeled.add_vertex(v);
    }
    for e in f.domain.skeleton.edges() {
        relabeled.add_edge(e.id, e.from, e.to, f.edge_map[&e.id] + 1);
    }
    relabeled.set_base(f.domain.skeleton.base());
    let (folded_rel, q) = fold(&relabeled);

    let mut z_skeleton = LabeledGraph::new(f.domain.skeleton.rank());
    for v in folded_rel.vertices() {
        z_skeleton.add_vertex(v);
    }
    let mut back_edge: BTreeMap<CellId, CellId> = BTreeMap::new();
    for e in folded_rel.edges() {
        let y_edge = e.label - 1;
        let label = f.codomain.skeleton.edge(y_edge).unwrap().label;
        z_skeleton.add_edge(e.id, e.from, e.to, label);
        back_edge.insert(e.id, y_edge);
    }
    z_skeleton.set_base(folded_rel.base());
    let mut back_vertex: BTreeMap<CellId, CellId> = BTreeMap::new();
    for v in f.domain.skeleton.vertices() {
        let img = q.vertex_map[&v];
        let y_v = f.vertex_map[&v];
        if let Some(&prev) = back_vertex.get(&img) {
            if prev != y_v {
                return Err(Error::Input(
                    "folding identified vertices with distinct images".into(),
                ));
            }
        } else {
            back_vertex.insert(img, y_v);
        }
    }

    // Push faces forward, align to rotation zero, identify duplicates.
    let mut z_faces: Vec<Face> = Vec::new();
    let mut z_face_data: Vec<(usize, usize)> = Vec::new();
    let mut keys: BTreeMap<(usize, Vec<SignedEdge>), usize> = BTreeMap::new();
    let mut front_faces: Vec<(usize, usize)> = Vec::new();
    for (i, face) in f.domain.faces.iter().enumerate() {
        let (xf, rot) = f.face_map[i];
        let pushed: Vec<SignedEdge> = face
            .path
            .iter()
            .map(|&(eid, fwd)| (q.edge_map[&eid], fwd))
            .collect();
        let m = pushed.len();
        // Align so that position 0 corresponds to codomain position 0.
        let aligned: Vec<SignedEdge> = (0..m).map(|j| pushed[(m - rot + j) % m]).collect();
        let idx = match keys.get(&(xf, aligned.clone())) {
            Some(&idx) => idx,
            None => {
                let idx = z_faces.len();
                keys.insert((xf, aligned.clone()), idx);
                z_faces.push(Face { path: aligned });
                z_face_data.push((xf, 0));
                idx
            }
        };
        front_faces.push((idx, (m - rot) % m.max(1)));
    }

    let z = TwoComplex {
        skeleton: z_skeleton,
        faces: z_faces,
    };
    z.validate().map_err(|e| {
        Error::Input(format!("folded complex is malformed (non-reduced image?): {e}"))
    })?;
    let front = ComplexMap {
        domain: f.domain.clone(),
        codomain: z.clone(),
        vertex_map: q.vertex_map,
        edge_map: q.edge_map,
        face_map: front_faces,
    };
    front.validate()?;
    let back = ComplexMap {
        domain: z.clone(),
        codomain: f.codomain.clone(),
        vertex_map: back_vertex,
        edge_map: back_edge,
        face_map: z_face_data,
    };
    back.validate()?;
    Ok(FoldedComplexMap { z, front, back })
}

// ---------------------------------------------------------------------------
// One-relator pushout.
// ---------------------------------------------------------------------------

pub struct PushoutResult {
    pub y_hat: TwoComplex,
    pub y_hat_immersed: TwoComplex,
    /// Skeleton cell maps of f_Z: Y -> Ŷ.
    pub front_vertex_map: BTreeMap<CellId, CellId>,
    pub front_edge_map: BTreeMap<CellId, CellId>,
    pub chi_y: i64,
    pub chi_y_hat: i64,
    pub chi_y_hat_immersed: i64,
    /// True when Y has no faces and the pushout degenerates to its
    /// skeleton mapped onward.
    pub degenerate: bool,
}

/// The unique maximal object of the poset of one-relator complexes through
/// which the branched map factors: the skeleton is the pushout of Y^(1) and
/// the relator circle along the face boundaries, and the single face is
/// attached along the lifted relator.
pub fn one_relator_pushout(f: &BranchedMap) -> Result<PushoutResult> {
    let chi_y = f.y.chi();
    if f.y.faces.is_empty() {
        let y_hat = TwoComplex::graph(f.y.skeleton.clone());
        let (folded, q) = fold(&f.y.skeleton);
        return Ok(PushoutResult {
            y_hat: y_hat.clone(),
            y_hat_immersed: TwoComplex::graph(folded),
            front_vertex_map: q.vertex_map,
            front_edge_map: q.edge_map,
            chi_y,
            chi_y_hat: y_hat.chi(),
            chi_y_hat_immersed: chi_y,
            degenerate: true,
        })
    }
    let instance = f.adjunction_instance();
    let space = adjunction::build(&instance)?;
    let m = f.relator.len();

    // The lifted relator path in Γ_u: the class of each S-edge, traversed
    // with the letter's sign.
    let gamma_u = space.gamma_u.clone();
    let lifted: Vec<SignedEdge> = (0..m)
        .map(|pos| {
            let class = space.edge_class[&(adjunction::HSide::S, pos as CellId)];
            (class, f.relator.letters()[pos] > 0)
        })
        .collect();
    let y_hat = TwoComplex {
        skeleton: gamma_u,
        faces: vec![Face { path: lifted }],
    };
    y_hat.validate()?;

    let (folded, q) = fold(&y_hat.skeleton);
    let y_hat_immersed = TwoComplex {
        skeleton: folded,
        faces: vec![Face {
            path: y_hat.faces[0]
                .path
                .iter()
                .map(|&(eid, fwd)| (q.edge_map[&eid], fwd))
                .collect(),
        }],
    };
    y_hat_immersed.validate()?;

    let front_vertex_map = f
        .y
        .skeleton
        .vertices()
        .map(|v| (v, space.vertex_class[&(adjunction::HSide::Gamma, v)]))
        .collect();
    let front_edge_map = f
        .y
        .skeleton
        .edges()
        .map(|e| (e.id, space.edge_class[&(adjunction::HSide::Gamma, e.id)]))
        .collect();

    let chi_y_hat = y_hat.chi();
    let chi_y_hat_immersed = y_hat_immersed.chi();
    if chi_y_hat_immersed < chi_y_hat {
        return Err(Error::Falsified(
            "folding the pushout skeleton decreased chi".into(),
        ));
    }
    Ok(PushoutResult {
        y_hat,
        y_hat_immersed,
        front_vertex_map,
        front_edge_map,
        chi_y,
        chi_y_hat,
        chi_y_hat_immersed,
        degenerate: false,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PushoutInequalityReport {
    pub chi_y: i64,
    pub branching_excess: i64,
    pub chi_y_hat: i64,
    /// Boundary edges of Y per relator petal.
    pub boundary_coverage: BTreeMap<u32, usize>,
    /// The hypothesis: the boundary does NOT cover w(S) at least twice.
    pub hypothesis_holds: bool,
    pub inequality_asserted: bool,
    pub inequality_holds: bool,
    pub tight: bool,
    /// The immersed no-free-face special case chi(Y) <= chi(Ŷ).
    pub special_case_asserted: bool,
}

/// The pushout inequality: when the boundary of Y does not cover w(S) at
/// least two-to-one, chi(Y) + sum(n_e - 1) <= chi(Ŷ). Requires an
/// indivisible relator.
pub fn pushout_inequality(f: &BranchedMap) -> Result<PushoutInequalityReport> {
    let root = maximal_root(&f.relator)?;
    if root.exponent >= 2 {
        return Err(Error::Hypothesis(format!(
            "relator is a proper power (root^{}); pass to the root complex and retry",
            root.exponent
        )));
    }
    let pushout = one_relator_pushout(f)?;
    let boundary = f.y.boundary_edges();
    let mut coverage: BTreeMap<u32, usize> = f
        .relator
        .letters()
        .iter()
        .map(|l| (l.unsigned_abs(), 0))
        .collect();
    for e in &boundary {
        let label = f.y.skeleton.edge(*e).unwrap().label;
        if let Some(c) = coverage.get_mut(&label) {
            *c += 1;
        }
    }
    let hypothesis_holds = coverage.values().any(|&c| c < 2);
    let lhs = pushout.chi_y + f.branching_excess();
    let inequality_holds = lhs <= pushout.chi_y_hat;
    let special_case = f.is_immersion() && free_faces(&f.y).is_empty();
    let report = PushoutInequalityReport {
        chi_y: pushout.chi_y,
        branching_excess: f.branching_excess(),
        chi_y_hat: pushout.chi_y_hat,
        boundary_coverage: coverage,
        hypothesis_holds,
        inequality_asserted: hypothesis_holds,
        inequality_holds,
        tight: lhs == pushout.chi_y_hat,
        special_case_asserted: special_case,
    };
    if hypothesis_holds && !inequality_holds {
        return Err(Error::Falsified(format!(
            "pushout inequality fails: {} + {} > {}",
            report.chi_y, report.branching_excess, report.chi_y_hat
        )));
    }
    if special_case && pushout.chi_y > pushout.chi_y_hat {
        return Err(Error::Falsified(
            "immersed no-free-face monotonicity fails".into(),
        ));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Negative-immersions classification.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Classification {
    ReducesToGraph { trace: Box<NielsenTrace> },
    FactorsThroughQ { index: usize },
    /// Neither branch applies: a counterexample to the classification
    /// lemma. Treated as a falsification alarm by callers.
    BoundaryCaseViolation,
}

/// Classifies an immersion Y ↪ X with chi(Y) >= 2 - pi(w), no free faces
/// and core 1-skeleton: either Y Nielsen reduces to a graph (through Ŷ^I)
/// or it factors through one of the w-subgroup complexes Q_i.
pub fn classify_immersion(
    f: &BranchedMap,
    pr: &PrimitivityRankReport,
) -> Result<Classification> {
    if !f.is_immersion() {
        return Err(Error::Hypothesis("the map must be an immersion".into()));
    }
    if !f.y.is_connected() {
        return Err(Error::Hypothesis("Y must be connected".into()));
    }
    if !free_faces(&f.y).is_empty() {
        return Err(Error::Hypothesis("Y must have no free faces".into()));
    }
    if !f.y.skeleton_is_core() {
        return Err(Error::Hypothesis("the 1-skeleton of Y must be a core graph".into()));
    }
    let threshold = match pr.pi {
        PiValue::Infinite => i64::MIN,
        PiValue::Finite(p) => 2 - p as i64,
    };
    if f.y.chi() < threshold {
        return Err(Error::Hypothesis(format!(
            "chi(Y) = {} is below 2 - pi(w) = {threshold}",
            f.y.chi()
        )));
    }
    if f.y.faces.is_empty() {
        let (_, trace) = nielsen_reduces_to_graph(&f.y)?;
        return Ok(Classification::ReducesToGraph { trace: Box::new(trace) });
    }
    let pushout = one_relator_pushout(f)?;
    let skel = &pushout.y_hat_immersed.skeleton;
    let rank_skel = betti_euler(skel).1;
    let pi = match pr.pi {
        PiValue::Infinite => usize::MAX,
        PiValue::Finite(p) => p,
    };
    let (reduces, trace) = nielsen_reduces_to_graph(&pushout.y_hat_immersed)?;
    if reduces {
        return Ok(Classification::ReducesToGraph { trace: Box::new(trace) });
    }
    if rank_skel < pi {
        // The skeleton subgroup has rank below pi(w), so the relator is
        // primitive in it and the reduction had to succeed.
        return Ok(Classification::BoundaryCaseViolation);
    }
    // rank == pi: the skeleton subgroup must sit inside a w-subgroup; find
    // it by the unbased factoring test on core graphs.
    let mut core_skel = crate::graph::core(&{
        let mut s = skel.clone();
        s.set_base(None);
        s
    });
    let root = core_skel.vertices().next();
    core_skel.set_base(root);
    for (i, sub) in pr.w_subgroups.iter().enumerate() {
        let found = sub.graph.vertices().any(|target| {
            crate::graph::factors_through_at(
                &core_skel,
                &sub.graph,
                core_skel.base().unwrap(),
                target,
            )
            .is_some()
        });
        if found {
            return Ok(Classification::FactorsThroughQ { index: i });
        }
    }
    Ok(Classification::BoundaryCaseViolation)
}

/// Brute-force enumeration of the poset of one-relator complexes through
/// which a branched map factors, for validating that the constructed
/// pushout really is the unique maximal object. Exponential in the cell
/// count; use on tiny instances only.
pub mod oracle {
    use super::*;

    /// An object of the poset identified by the cell partition of Y it
    /// induces: class index per vertex and per edge, in the orders of
    /// `Y`'s vertex and edge id listings.
    #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
    pub struct ObjectKey {
        pub vertex_classes: Vec<usize>,
        pub edge_classes: Vec<usize>,
    }

    /// Every quotient of Y's cells that yields a one-relator complex
    /// mapping onward to X: vertex partitions are unrestricted; edges can
    /// only merge when they share label and endpoint classes; all face
    /// images must wrap a common relator-length boundary.
    pub fn poset_objects(f: &BranchedMap) -> Vec<ObjectKey> {
        let vids: Vec<CellId> = f.y.skeleton.vertices().collect();
        let eids: Vec<CellId> = f.y.skeleton.edges().map(|e| e.id).collect();
        let vindex: BTreeMap<CellId, usize> =
            vids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut objects = Vec::new();
        let mut vclasses = vec![0usize; vids.len()];
        enumerate_rgs(&mut vclasses.clone(), 1, 0, &mut |vc| {
            vclasses.copy_from_slice(vc);
            // Group edges by (label, endpoint classes); enumerate one set
            // partition per group, combined across groups.
            let mut groups: BTreeMap<(u32, usize, usize), Vec<usize>> = BTreeMap::new();
            for (i, &eid) in eids.iter().enumerate() {
                let e = f.y.skeleton.edge(eid).unwrap();
                groups
                    .entry((e.label, vclasses[vindex[&e.from]], vclasses[vindex[&e.to]]))
                    .or_default()
                    .push(i);
            }
            let group_list: Vec<Vec<usize>> = groups.into_values().collect();
            let mut partitions_per_group: Vec<Vec<Vec<usize>>> = Vec::new();
            for g in &group_list {
                let mut parts = Vec::new();
                let mut assignment = vec![0usize; g.len()];
                collect_rgs(&mut assignment, 1, 0, &mut parts);
                partitions_per_group.push(parts);
            }
            let mut choice = vec![0usize; group_list.len()];
            loop {
                let mut eclasses = vec![usize::MAX; eids.len()];
                let mut next_class = 0usize;
                for (gi, g) in group_list.iter().enumerate() {
                    let assignment = &partitions_per_group[gi][choice[gi]];
                    let local_max = assignment.iter().copied().max().unwrap_or(0);
                    for (k, &edge_idx) in g.iter().enumerate() {
                        eclasses[edge_idx] = next_class + assignment[k];
                    }
                    next_class += local_max + 1;
                }
                if let Some(key) = try_object(f, &vids, &eids, &vclasses, &eclasses) {
                    objects.push(key);
                }
                // Advance the mixed-radix choice vector.
                let mut i = 0;
                loop {
                    if i == choice.len() {
                        return;
                    }
                    choice[i] += 1;
                    if choice[i] < partitions_per_group[i].len() {
                        break;
                    }
                    choice[i] = 0;
                    i += 1;
                }
            }
        });
        objects.sort();
        objects.dedup();
        objects
    }

    fn enumerate_rgs(
        class: &mut Vec<usize>,
        k: usize,
        max: usize,
        visit: &mut impl FnMut(&[usize]),
    ) {
        if class.is_empty() {
            return;
        }
        if k == class.len() {
            visit(class);
            return;
        }
        for c in 0..=max + 1 {
            class[k] = c;
            enumerate_rgs(class, k + 1, max.max(c), visit);
        }
        class[k] = 0;
    }

    fn collect_rgs(assignment: &mut Vec<usize>, k: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if k >= assignment.len() {
            out.push(assignment.clone());
            return;
        }
        for c in 0..=max + 1 {
            assignment[k] = c;
            collect_rgs(assignment, k + 1, max.max(c), out);
        }
        assignment[k] = 0;
    }

    /// Checks the one-relator condition: all pushed face boundaries,
    /// aligned to relator position zero, wrap a common cycle of relator
    /// length.
    fn try_object(
        f: &BranchedMap,
        vids: &[CellId],
        eids: &[CellId],
        vclasses: &[usize],
        eclasses: &[usize],
    ) -> Option<ObjectKey> {
        let _ = vids;
        let eindex: BTreeMap<CellId, usize> =
            eids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let m = f.relator.len();
        let mut common: Option<Vec<(usize, bool)>> = None;
        for (i, face) in f.y.faces.iter().enumerate() {
            let len = face.path.len();
            let rot = f.rotations[i];
            let aligned: Vec<(usize, bool)> = (0..len)
                .map(|j| {
                    let (eid, fwd) = face.path[(len - rot + j) % len];
                    (eclasses[eindex[&eid]], fwd)
                })
                .collect();
            // Must be periodic with period m, matching the common cycle.
            let candidate: Vec<(usize, bool)> = aligned[..m].to_vec();
            if !(0..len).all(|j| aligned[j] == candidate[j % m]) {
                return None;
            }
            match &common {
                None => common = Some(candidate),
                Some(prev) => {
                    if *prev != candidate {
                        return None;
                    }
                }
            }
        }
        Some(ObjectKey {
            vertex_classes: normalize_classes(vclasses),
            edge_classes: normalize_classes(eclasses),
        })
    }

    /// Renumbers class labels in order of first appearance so that equal
    /// partitions get equal keys.
    fn normalize_classes(raw: &[usize]) -> Vec<usize> {
        let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
        raw.iter()
            .map(|&c| {
                let next = renumber.len();
                *renumber.entry(c).or_insert(next)
            })
            .collect()
    }

    /// The kernel of the constructed pushout as an ObjectKey.
    pub fn pushout_key(f: &BranchedMap, p: &PushoutResult) -> ObjectKey {
        let vids: Vec<CellId> = f.y.skeleton.vertices().collect();
        let eids: Vec<CellId> = f.y.skeleton.edges().map(|e| e.id).collect();
        let normalize = |raw: Vec<CellId>| -> Vec<usize> {
            let mut renumber: BTreeMap<CellId, usize> = BTreeMap::new();
            raw.into_iter()
                .map(|c| {
                    let next = renumber.len();
                    *renumber.entry(c).or_insert(next)
                })
                .collect()
        };
        ObjectKey {
            vertex_classes: normalize(
                vids.iter().map(|v| p.front_vertex_map[v]).collect(),
            ),
            edge_classes: normalize(eids.iter().map(|e| p.front_edge_map[e]).collect()),
        }
    }

    fn refines(fine: &ObjectKey, coarse: &ObjectKey) -> bool {
        let classes_respected = |f: &[usize], c: &[usize]| {
            let mut map: BTreeMap<usize, usize> = BTreeMap::new();
            for (a, b) in f.iter().zip(c.iter()) {
                match map.get(a) {
                    None => {
                        map.insert(*a, *b);
                    }
                    Some(&prev) => {
                        if prev != *b {
                            return false;
                        }
                    }
                }
            }
            true
        };
        classes_respected(&fine.vertex_classes, &coarse.vertex_classes)
            && classes_respected(&fine.edge_classes, &coarse.edge_classes)
    }

    /// Asserts that the constructed pushout is an object and that every
    /// other object is a coarsening of it (so it is the unique maximal
    /// object). Returns the number of objects.
    pub fn verify_unique_maximal(f: &BranchedMap, p: &PushoutResult) -> Result<usize> {
        let objects = poset_objects(f);
        let key = pushout_key(f, p);
        if !objects.contains(&key) {
            return Err(Error::Falsified(
                "constructed pushout is not an object of the poset".into(),
            ));
        }
        for o in &objects {
            if !refines(&key, o) {
                return Err(Error::Falsified(format!(
                    "poset object {o:?} is not dominated by the pushout"
                )));
            }
        }
        Ok(objects.len())
    }
}

// ---------------------------------------------------------------------------
// Complex text format: graph lines plus `face <id> <signed edge ids>`.
// ---------------------------------------------------------------------------

use crate::words::Alphabet;

pub fn write_complex(y: &TwoComplex, alphabet: &Alphabet) -> String {
    let mut out = crate::graph::write_graph(&y.skeleton, alphabet);
    for (i, face) in y.faces.iter().enumerate() {
        out.push_str(&format!("face {i}"));
        for &(eid, fwd) in &face.path {
            let signed = eid as i64;
            out.push_str(&format!(" {}", if fwd { signed } else { -signed }));
        }
        out.push('\n');
    }
    out
}

/// Parses the complex format. Edge ids must be positive so that signed ids
/// in face paths are unambiguous.
pub fn parse_complex(text: &str, alphabet: &Alphabet) -> Result<TwoComplex> {
    let mut graph_lines = String::new();
    let mut face_lines: Vec<(usize, Vec<i64>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("face ") {
            let mut parts = rest.split_whitespace();
            let id: usize = parts
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::Input(format!("line {}: bad face id", lineno + 1)))?;
            let path: Vec<i64> = parts
                .map(|t| {
                    t.parse::<i64>()
                        .map_err(|_| Error::Input(format!("line {}: bad edge ref", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            if path.iter().any(|&r| r == 0) {
                return Err(Error::Input(format!(
                    "line {}: edge ids in face paths must be nonzero",
                    lineno + 1
                )));
            }
            face_lines.push((id, path));
        } else {
            graph_lines.push_str(line);
            graph_lines.push('\n');
        }
    }
    let skeleton = crate::graph::parse_graph(&graph_lines, alphabet)?;
    if skeleton.edge(0).is_some() {
        return Err(Error::Input(
            "complex files need positive edge ids (0 is ambiguous in signed paths)".into(),
        ));
    }
    face_lines.sort_by_key(|&(id, _)| id);
    let faces: Vec<Face> = face_lines
        .into_iter()
        .map(|(_, path)| Face {
            path: path
                .into_iter()
                .map(|r| (r.unsigned_abs() as CellId, r > 0))
                .collect(),
        })
        .collect();
    let y = TwoComplex { skeleton, faces };
    y.validate()?;
    Ok(y)
}

/// Parses a branched-map file: `complex x` ... `end` and `complex y` ...
/// `end` blocks in the complex format, sharing one alphabet. The skeleton
/// morphism is carried by the labels (the codomain skeleton is a rose) and
/// the per-face degrees are inferred and validated.
pub fn parse_branched_map_file(text: &str) -> Result<BranchedMap> {
    let mut sections: BTreeMap<String, String> = BTreeMap::new();
    let mut current: Option<(String, String)> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((name, body)) = current.as_mut() {
            if line == "end" {
                sections.insert(name.clone(), body.clone());
                current = None;
            } else {
                body.push_str(line);
                body.push('\n');
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next()) {
            (Some("complex"), Some(name)) if name == "x" || name == "y" => {
                current = Some((name.to_string(), String::new()));
            }
            _ => {
                return Err(Error::Input(format!(
                    "line {}: expected 'complex x' or 'complex y'",
                    lineno + 1
                )))
            }
        }
    }
    if current.is_some() {
        return Err(Error::Input("unterminated complex block".into()));
    }
    for required in ["x", "y"] {
        if !sections.contains_key(required) {
            return Err(Error::Input(format!("missing complex block {required}")));
        }
    }
    let letters: String = sections
        .values()
        .flat_map(|s| s.lines())
        .filter(|l| l.starts_with("e "))
        .filter_map(|l| l.split_whitespace().nth(4))
        .collect();
    let alphabet = Alphabet::infer(&letters, None)?;
    let x = parse_complex(&sections["x"], &alphabet)?;
    let y = parse_complex(&sections["y"], &alphabet)?;
    BranchedMap::infer(y, x)
}

/// The regular cover complex of a one-relator complex determined by a
/// covering graph of the rose: faces are the orbits of the relator
/// translation, one face of degree |orbit| per orbit.
pub fn cover_complex(cover: &LabeledGraph, relator: &Word) -> Result<TwoComplex> {
    if !cover.is_immersed() {
        return Err(Error::Domain("cover skeleton must be immersed".into()));
    }
    let mut faces = Vec::new();
    let mut used: BTreeSet<CellId> = BTreeSet::new();
    for v in cover.vertices() {
        if used.contains(&v) {
            continue;
        }
        // Follow the relator translation until it returns to v.
        let mut orbit = vec![v];
        let mut path: Vec<SignedEdge> = Vec::new();
        let mut at = v;
        loop {
            match cover.trace(at, relator) {
                crate::graph::LiftOutcome::Closed { path: p } if orbit.len() == 1 => {
                    path.extend(p.iter().map(|&r| {
                        let (e, fwd) = decode_edge_ref(r);
                        (e, fwd)
                    }));
                    break;
                }
                crate::graph::LiftOutcome::Closed { .. } => {
                    return Err(Error::Domain("translation returned early".into()));
                }
                crate::graph::LiftOutcome::Open { path: p, end } => {
                    path.extend(p.iter().map(|&r| {
                        let (e, fwd) = decode_edge_ref(r);
                        (e, fwd)
                    }));
                    if end == v {
                        break;
                    }
                    orbit.push(end);
                    at = end;
                }
                crate::graph::LiftOutcome::NoLift { .. } => {
                    return Err(Error::Domain(
                        "relator does not lift: not a covering of the rose".into(),
                    ));
                }
            }
        }
        used.extend(orbit.iter().copied());
        faces.push(Face { path });
    }
    let y = TwoComplex {
        skeleton: cover.clone(),
        faces,
    };
    y.validate()?;
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;

    fn w(s: &str) -> Word {
        Alphabet::canonical(26).parse_word(s).unwrap()
    }

    fn torus_complex() -> TwoComplex {
        one_relator_complex(&w("abAB"), 2).unwrap()
    }

    #[test]
    fn torus_complex_shape() {
        let x = torus_complex();
        assert_eq!(x.chi(), 0);
        assert!(free_faces(&x).is_empty(), "every edge is traversed twice");
        assert!(x.boundary_edges().is_empty());
    }

    #[test]
    fn disk_has_free_face() {
        // A bigon: one face over a single edge used once... needs an edge
        // traversed exactly once, so take the disk with boundary "ab": two
        // edges, each traversed once.
        let mut skeleton = LabeledGraph::new(2);
        skeleton.add_vertex(0);
        skeleton.add_vertex(1);
        skeleton.add_edge(1, 0, 1, 1);
        skeleton.add_edge(2, 1, 0, 2);
        let y = TwoComplex {
            skeleton,
            faces: vec![Face {
                path: vec![(1, true), (2, true)],
            }],
        };
        y.validate().unwrap();
        let candidates = free_faces(&y);
        assert_eq!(candidates.len(), 2);
        let collapsed = collapse(&y, candidates[0]).unwrap();
        assert!(collapsed.faces.is_empty());
        assert_eq!(collapsed.skeleton.edge_count(), 1);
    }

    #[test]
    fn sphere_like_double_face_has_no_free_faces() {
        // Two faces over the same disk boundary: each edge is traversed
        // twice in total.
        let mut skeleton = LabeledGraph::new(2);
        skeleton.add_vertex(0);
        skeleton.add_vertex(1);
        skeleton.add_edge(1, 0, 1, 1);
        skeleton.add_edge(2, 1, 0, 2);
        let face = Face {
            path: vec![(1, true), (2, true)],
        };
        let y = TwoComplex {
            skeleton,
            faces: vec![face.clone(), face],
        };
        assert!(free_faces(&y).is_empty());
    }

    #[test]
    fn nielsen_examples() {
        // A single face attached along the petal a of the rank-2 rose.
        let mut x = one_relator_complex(&w("a"), 2).unwrap();
        let (reduces, _) = nielsen_reduces_to_graph(&x).unwrap();
        assert!(reduces, "face word a is a sub-basis element");

        // Torus complex: the commutator is not part of any basis.
        let (reduces, trace) = nielsen_reduces_to_graph(&torus_complex()).unwrap();
        assert!(!reduces);
        assert_eq!(trace.attaching_words.len(), 1);

        // The disk with a free face collapses away entirely.
        x.faces[0].path = vec![(1, true)];
        let mut skeleton = LabeledGraph::new(1);
        skeleton.add_vertex(0);
        skeleton.add_edge(1, 0, 0, 1);
        let disk = TwoComplex {
            skeleton,
            faces: vec![Face {
                path: vec![(1, true)],
            }],
        };
        let (reduces, trace) = nielsen_reduces_to_graph(&disk).unwrap();
        assert!(reduces);
        assert_eq!(trace.collapses.len(), 1);
    }

    #[test]
    fn branched_map_inference() {
        let x = torus_complex();
        // Y = X: identity immersion.
        let f = BranchedMap::infer(x.clone(), x.clone()).unwrap();
        assert_eq!(f.degrees, vec![1]);
        assert!(f.is_immersion());
        assert_eq!(f.branching_excess() + f.y.faces.len() as i64, f.degree_sum() as i64);

        // A degree-2 face: the disk with boundary (abAB)^2, subdivided so
        // the branch point stays interior and the links stay embedded.
        let word2 = w("abAB").pow(2);
        let boundary = crate::words::word_to_cycle(&word2, 2).unwrap();
        let mut skel = boundary.clone();
        skel.set_base(None);
        let path: Vec<SignedEdge> = word2
            .letters()
            .iter()
            .enumerate()
            .map(|(i, &l)| (i as CellId, l > 0))
            .collect();
        let doubled = TwoComplex {
            skeleton: skel,
            faces: vec![Face { path }],
        };
        let f = BranchedMap::infer(doubled, x.clone()).unwrap();
        assert_eq!(f.degrees, vec![2]);
        assert!(!f.is_immersion());
    }

    #[test]
    fn branched_map_rejects_folding_faces() {
        // Two identical faces over the relator share every corner: a fold.
        let x = torus_complex();
        let mut y = x.clone();
        y.faces.push(y.faces[0].clone());
        assert!(BranchedMap::infer(y, x).is_err());
    }

    #[test]
    fn identity_pushout_is_x() {
        let x = torus_complex();
        let f = BranchedMap::infer(x.clone(), x.clone()).unwrap();
        let p = one_relator_pushout(&f).unwrap();
        assert_eq!(p.chi_y_hat, x.chi());
        assert_eq!(p.y_hat.skeleton.edge_count(), 2);
        assert_eq!(p.y_hat.skeleton.vertex_count(), 1);
        assert_eq!(p.y_hat.faces.len(), 1);
    }

    #[test]
    fn disk_pushout_is_disk() {
        // Y = a disk with boundary word abAB mapped by degree one: the
        // skeleton pushout is the relator circle.
        let x = torus_complex();
        let skeleton = crate::words::word_to_cycle(&w("abAB"), 2).unwrap();
        let path: Vec<SignedEdge> = (0..4)
            .map(|i| {
                let l = w("abAB").letters()[i];
                (i as CellId, l > 0)
            })
            .collect();
        let mut skel = skeleton.clone();
        skel.set_base(None);
        let y = TwoComplex {
            skeleton: skel,
            faces: vec![Face { path }],
        };
        let f = BranchedMap::infer(y, x).unwrap();
        let p = one_relator_pushout(&f).unwrap();
        assert_eq!(p.y_hat.skeleton.vertex_count(), 4);
        assert_eq!(p.y_hat.skeleton.edge_count(), 4);
        assert_eq!(p.chi_y_hat, 1, "the disk");
        assert_eq!(p.chi_y, 1);
    }

    #[test]
    fn pushout_inequality_identity_tight() {
        let x = torus_complex();
        let f = BranchedMap::infer(x.clone(), x.clone()).unwrap();
        let report = pushout_inequality(&f).unwrap();
        assert!(report.hypothesis_holds, "empty boundary is not two-to-one");
        assert!(report.inequality_holds);
        assert!(report.tight);
        assert!(report.special_case_asserted);
    }

    #[test]
    fn pushout_inequality_rejects_divisible() {
        let x = one_relator_complex(&w("abab"), 2).unwrap();
        let f = BranchedMap::infer(x.clone(), x.clone()).unwrap();
        assert!(matches!(pushout_inequality(&f), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn fold_complex_map_identity() {
        let x = torus_complex();
        let f = ComplexMap {
            domain: x.clone(),
            codomain: x.clone(),
            vertex_map: x.skeleton.vertices().map(|v| (v, v)).collect(),
            edge_map: x.skeleton.edges().map(|e| (e.id, e.id)).collect(),
            face_map: vec![(0, 0)],
        };
        let folded = fold_complex_map(&f).unwrap();
        assert_eq!(folded.z.faces.len(), 1);
        assert_eq!(folded.z.skeleton.edge_count(), 2);
    }

    #[test]
    fn fold_identifies_equal_faces() {
        // Two copies of the relator disk glued along the same boundary,
        // mapping identically to X: they merge into one face.
        let x = torus_complex();
        let mut y = x.clone();
        y.faces.push(y.faces[0].clone());
        let f = ComplexMap {
            domain: y.clone(),
            codomain: x.clone(),
            vertex_map: y.skeleton.vertices().map(|v| (v, v)).collect(),
            edge_map: y.skeleton.edges().map(|e| (e.id, e.id)).collect(),
            face_map: vec![(0, 0), (0, 0)],
        };
        let folded = fold_complex_map(&f).unwrap();
        assert_eq!(folded.z.faces.len(), 1);
    }

    #[test]
    fn fold_wedge_of_disks() {
        // Two disks wedged at a vertex, both mapping onto the relator disk
        // of X = complex of "aa"... use relator ab to stay reduced.
        let x = one_relator_complex(&w("ab"), 2).unwrap();
        let mut skeleton = LabeledGraph::new(2);
        for v in 0..3 {
            skeleton.add_vertex(v);
        }
        skeleton.add_edge(1, 0, 1, 1);
        skeleton.add_edge(2, 1, 0, 2);
        skeleton.add_edge(3, 0, 2, 1);
        skeleton.add_edge(4, 2, 0, 2);
        let y = TwoComplex {
            skeleton,
            faces: vec![
                Face {
                    path: vec![(1, true), (2, true)],
                },
                Face {
                    path: vec![(3, true), (4, true)],
                },
            ],
        };
        let f = ComplexMap {
            domain: y.clone(),
            codomain: x.clone(),
            vertex_map: [(0, 0), (1, 0), (2, 0)].into(),
            edge_map: [(1, 1), (2, 2), (3, 1), (4, 2)].into(),
            face_map: vec![(0, 0), (0, 0)],
        };
        let folded = fold_complex_map(&f).unwrap();
        // The wedge folds to a single disk: skeleton folds the two lobes
        // together and the two faces become equal.
        assert_eq!(folded.z.skeleton.edge_count(), 2);
        assert_eq!(folded.z.faces.len(), 1);
        assert!(folded.z.skeleton.is_immersed());
    }

    #[test]
    fn classify_torus_itself() {
        let x = torus_complex();
        let pr = crate::prank::primitivity_rank(&w("abAB"), 2).unwrap();
        let f = BranchedMap::infer(x.clone(), x.clone()).unwrap();
        match classify_immersion(&f, &pr).unwrap() {
            Classification::FactorsThroughQ { index } => assert_eq!(index, 0),
            other => panic!("expected factoring through the peripheral subgroup, got {other:?}"),
        }
    }

    #[test]
    fn classify_double_covers_of_torus() {
        let x = torus_complex();
        let pr = crate::prank::primitivity_rank(&w("abAB"), 2).unwrap();
        // Double covers of the rose: monodromies in Z/2 x Z/2 minus trivial.
        for (ma, mb) in [(true, false), (false, true), (true, true)] {
            let mut cover = LabeledGraph::new(2);
            cover.add_vertex(0);
            cover.add_vertex(1);
            let swap = |m: bool, v: u32| if m { 1 - v } else { v };
            cover.add_edge(1, 0, swap(ma, 0), 1);
            cover.add_edge(2, 1, swap(ma, 1), 1);
            cover.add_edge(3, 0, swap(mb, 0), 2);
            cover.add_edge(4, 1, swap(mb, 1), 2);
            let y = cover_complex(&cover, &w("abAB")).unwrap();
            assert_eq!(y.chi(), 0);
            let f = BranchedMap::infer(y, x.clone()).unwrap();
            let c = classify_immersion(&f, &pr).unwrap();
            assert!(
                !matches!(c, Classification::BoundaryCaseViolation),
                "cover ({ma},{mb})"
            );
        }
    }

    #[test]
    fn pushout_is_poset_maximum_on_small_cases() {
        let x = torus_complex();
        // Identity and the subdivided disk.
        let f = BranchedMap::infer(x.clone(), x.clone()).unwrap();
        let p = one_relator_pushout(&f).unwrap();
        let count = oracle::verify_unique_maximal(&f, &p).unwrap();
        assert!(count >= 1);

        let skeleton = crate::words::word_to_cycle(&w("abAB"), 2).unwrap();
        let mut skel = skeleton.clone();
        skel.set_base(None);
        let path: Vec<SignedEdge> = w("abAB")
            .letters()
            .iter()
            .enumerate()
            .map(|(i, &l)| (i as CellId, l > 0))
            .collect();
        let disk = TwoComplex {
            skeleton: skel,
            faces: vec![Face { path }],
        };
        let f = BranchedMap::infer(disk, x.clone()).unwrap();
        let p = one_relator_pushout(&f).unwrap();
        let count = oracle::verify_unique_maximal(&f, &p).unwrap();
        assert!(count > 1, "the disk has several one-relator quotients");
    }

    #[test]
    fn two_faces_at_a_basepoint_match_poset_oracle() {
        // Two faces over the same relator glued at a common basepoint: the
        // wedge of two subdivided disks... over relator ab, the wedge of
        // two bigons.
        let x = one_relator_complex(&w("ab"), 2).unwrap();
        let mut skeleton = LabeledGraph::new(2);
        for v in 0..3 {
            skeleton.add_vertex(v);
        }
        skeleton.add_edge(1, 0, 1, 1);
        skeleton.add_edge(2, 1, 0, 2);
        skeleton.add_edge(3, 0, 2, 1);
        skeleton.add_edge(4, 2, 0, 2);
        let y = TwoComplex {
            skeleton,
            faces: vec![
                Face {
                    path: vec![(1, true), (2, true)],
                },
                Face {
                    path: vec![(3, true), (4, true)],
                },
            ],
        };
        let f = BranchedMap::infer(y, x).unwrap();
        let p = one_relator_pushout(&f).unwrap();
        oracle::verify_unique_maximal(&f, &p).unwrap();
    }

    #[test]
    fn complex_text_round_trip() {
        let alphabet = Alphabet::canonical(2);
        let x = torus_complex();
        let text = write_complex(&x, &alphabet);
        let parsed = parse_complex(&text, &alphabet).unwrap();
        assert_eq!(parsed, x);
        assert_eq!(write_complex(&parsed, &alphabet), text);
    }
}
