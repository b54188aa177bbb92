//! Directed graphs labeled over a rose, label-respecting morphisms,
//! Stallings folding, fiber products, cores, and Betti/Euler arithmetic.
//!
//! A `LabeledGraph` carries the morphism to the rank-n rose implicitly:
//! every edge has a label in 1..=n and all vertices map to the rose's
//! single vertex. An edge from `u` to `v` labeled `g` reads `g` when
//! traversed forwards and `g^-1` backwards.

use crate::words::{Letter, Word};
use crate::{Error, Result};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Graph cells are identified by stable numeric ids.
pub type CellId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub id: CellId,
    pub from: CellId,
    pub to: CellId,
    pub label: u32,
}

/// A finite directed graph with edges labeled by rose petals and an
/// optional basepoint. Immutable in spirit: operations return new graphs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    rank: usize,
    vertices: BTreeSet<CellId>,
    edges: BTreeMap<CellId, Edge>,
    base: Option<CellId>,
}

impl LabeledGraph {
    pub fn new(rank: usize) -> Self {
        LabeledGraph {
            rank,
            vertices: BTreeSet::new(),
            edges: BTreeMap::new(),
            base: None,
        }
    }

    /// The rank-n rose: one vertex, one loop per generator.
    pub fn rose(rank: usize) -> Self {
        let mut g = LabeledGraph::new(rank);
        g.add_vertex(0);
        for i in 1..=rank as u32 {
            g.add_edge(i, 0, 0, i);
        }
        g.set_base(Some(0));
        g
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn add_vertex(&mut self, id: CellId) {
        self.vertices.insert(id);
    }

    pub fn add_edge(&mut self, id: CellId, from: CellId, to: CellId, label: u32) {
        assert!(label >= 1 && label as usize <= self.rank, "label out of range");
        assert!(self.vertices.contains(&from) && self.vertices.contains(&to));
        let prev = self.edges.insert(id, Edge { id, from, to, label });
        assert!(prev.is_none(), "duplicate edge id {id}");
    }

    pub fn set_base(&mut self, base: Option<CellId>) {
        if let Some(b) = base {
            assert!(self.vertices.contains(&b));
        }
        self.base = base;
    }

    pub fn base(&self) -> Option<CellId> {
        self.base
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = CellId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.values()
    }

    pub fn edge(&self, id: CellId) -> Option<&Edge> {
        self.edges.get(&id)
    }

    pub fn has_vertex(&self, id: CellId) -> bool {
        self.vertices.contains(&id)
    }

    /// Geometric valence: loops count twice.
    pub fn valence(&self, v: CellId) -> usize {
        self.edges
            .values()
            .map(|e| (e.from == v) as usize + (e.to == v) as usize)
            .sum()
    }

    /// Outgoing directions at a vertex: `(letter, edge id, other endpoint)`
    /// where positive letters leave along the edge and negative letters
    /// traverse it backwards.
    pub fn directions_at(&self, v: CellId) -> Vec<(Letter, CellId, CellId)> {
        let mut out = Vec::new();
        for e in self.edges.values() {
            if e.from == v {
                out.push((e.label as Letter, e.id, e.to));
            }
            if e.to == v {
                out.push((-(e.label as Letter), e.id, e.from));
            }
        }
        out.sort_unstable();
        out
    }

    /// No two distinct edges share a label together with their source, nor a
    /// label together with their target.
    pub fn is_immersed(&self) -> bool {
        let mut out = BTreeSet::new();
        let mut inc = BTreeSet::new();
        for e in self.edges.values() {
            if !out.insert((e.label, e.from)) || !inc.insert((e.label, e.to)) {
                return false;
            }
        }
        true
    }

    /// Follows `word` from `start`, using that immersed graphs have at most
    /// one way to read each letter at each vertex. Path entries are signed
    /// edge references `±(id + 1)`: positive for forward traversal.
    pub fn trace(&self, start: CellId, word: &Word) -> LiftOutcome {
        debug_assert!(self.is_immersed());
        let mut at = start;
        let mut path = Vec::with_capacity(word.len());
        for (pos, &l) in word.letters().iter().enumerate() {
            let step = self.edges.values().find_map(|e| {
                if l > 0 && e.label == l as u32 && e.from == at {
                    Some((e.id as i64 + 1, e.to))
                } else if l < 0 && e.label == (-l) as u32 && e.to == at {
                    Some((-(e.id as i64 + 1), e.from))
                } else {
                    None
                }
            });
            match step {
                Some((signed_edge, next)) => {
                    path.push(signed_edge);
                    at = next;
                }
                None => return LiftOutcome::NoLift { position: pos },
            }
        }
        if at == start {
            LiftOutcome::Closed { path }
        } else {
            LiftOutcome::Open { path, end: at }
        }
    }
}

/// Result of lifting a loop into an immersed graph. Closed and open lifts
/// are reported distinctly from a lift that does not exist at all. Path
/// entries are signed edge references `±(id + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiftOutcome {
    Closed { path: Vec<i64> },
    Open { path: Vec<i64>, end: CellId },
    NoLift { position: usize },
}

/// Decodes a signed edge reference into `(edge id, forwards)`.
pub fn decode_edge_ref(signed: i64) -> (CellId, bool) {
    debug_assert!(signed != 0);
    ((signed.unsigned_abs() - 1) as CellId, signed > 0)
}

/// A morphism of labeled graphs: cell maps commuting with the incidence
/// maps and preserving labels (hence commuting with the maps to the rose).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMorphism {
    pub vertex_map: BTreeMap<CellId, CellId>,
    pub edge_map: BTreeMap<CellId, CellId>,
}

impl GraphMorphism {
    pub fn identity(g: &LabeledGraph) -> Self {
        GraphMorphism {
            vertex_map: g.vertices().map(|v| (v, v)).collect(),
            edge_map: g.edges().map(|e| (e.id, e.id)).collect(),
        }
    }

    pub fn verify(&self, domain: &LabeledGraph, codomain: &LabeledGraph) -> Result<()> {
        for v in domain.vertices() {
            let img = self
                .vertex_map
                .get(&v)
                .ok_or_else(|| Error::Input(format!("vertex {v} unmapped")))?;
            if !codomain.has_vertex(*img) {
                return Err(Error::Input(format!("vertex image {img} missing")));
            }
        }
        for e in domain.edges() {
            let img_id = self
                .edge_map
                .get(&e.id)
                .ok_or_else(|| Error::Input(format!("edge {} unmapped", e.id)))?;
            let img = codomain
                .edge(*img_id)
                .ok_or_else(|| Error::Input(format!("edge image {img_id} missing")))?;
            if img.label != e.label {
                return Err(Error::Input(format!("edge {} changes label", e.id)));
            }
            if self.vertex_map[&e.from] != img.from || self.vertex_map[&e.to] != img.to {
                return Err(Error::Input(format!(
                    "edge {} does not commute with incidence maps",
                    e.id
                )));
            }
        }
        if let (Some(db), Some(cb)) = (domain.base(), codomain.base()) {
            if self.vertex_map[&db] != cb {
                return Err(Error::Input("basepoint not preserved".into()));
            }
        }
        Ok(())
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // Deterministic: smaller index wins as representative.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Stallings folding: the universal immersed quotient of a labeled graph,
/// together with the quotient morphism. Union-find over vertices with a
/// worklist of label-clashing edge pairs; near-linear and confluent.
pub fn fold(g: &LabeledGraph) -> (LabeledGraph, GraphMorphism) {
    let vids: Vec<CellId> = g.vertices().collect();
    let eids: Vec<CellId> = g.edges().map(|e| e.id).collect();
    let vindex: BTreeMap<CellId, usize> = vids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut vdsu = Dsu::new(vids.len());
    let mut edsu = Dsu::new(eids.len());
    let edges: Vec<Edge> = eids.iter().map(|id| *g.edge(*id).unwrap()).collect();

    // adjacency per vertex class: (label, dir) -> edge class. dir 0 = out.
    let mut adj: Vec<BTreeMap<(u32, u8), usize>> = vec![BTreeMap::new(); vids.len()];
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();

    let attach = |adj: &mut Vec<BTreeMap<(u32, u8), usize>>,
                      vdsu: &mut Dsu,
                      edsu: &mut Dsu,
                      queue: &mut VecDeque<(usize, usize)>,
                      vclass: usize,
                      key: (u32, u8),
                      eclass: usize| {
        let eclass = edsu.find(eclass);
        match adj[vclass].get(&key) {
            None => {
                adj[vclass].insert(key, eclass);
            }
            Some(&other) => {
                let other = edsu.find(other);
                if other != eclass {
                    edsu.union(other, eclass);
                    // The merged edges' far endpoints must also merge.
                    let (ea, eb) = (&edges[other], &edges[eclass]);
                    let (fa, fb) = if key.1 == 0 {
                        (vindex[&ea.to], vindex[&eb.to])
                    } else {
                        (vindex[&ea.from], vindex[&eb.from])
                    };
                    queue.push_back((vdsu.find(fa), vdsu.find(fb)));
                }
            }
        }
    };

    for (i, e) in edges.iter().enumerate() {
        let vf = vdsu.find(vindex[&e.from]);
        attach(&mut adj, &mut vdsu, &mut edsu, &mut queue, vf, (e.label, 0), i);
        let vt = vdsu.find(vindex[&e.to]);
        attach(&mut adj, &mut vdsu, &mut edsu, &mut queue, vt, (e.label, 1), i);
    }

    while let Some((a, b)) = queue.pop_front() {
        let (a, b) = (vdsu.find(a), vdsu.find(b));
        if a == b {
            continue;
        }
        vdsu.union(a, b);
        let survivor = vdsu.find(a);
        let absorbed = if survivor == a { b } else { a };
        let moved = std::mem::take(&mut adj[absorbed]);
        for (key, eclass) in moved {
            attach(&mut adj, &mut vdsu, &mut edsu, &mut queue, survivor, key, eclass);
        }
    }

    // Canonical ids for the quotient: the least original id in each class.
    let mut vclass_id: BTreeMap<usize, CellId> = BTreeMap::new();
    for (i, &vid) in vids.iter().enumerate() {
        let root = vdsu.find(i);
        let entry = vclass_id.entry(root).or_insert(vid);
        *entry = (*entry).min(vid);
    }
    let mut eclass_id: BTreeMap<usize, CellId> = BTreeMap::new();
    for (i, &eid) in eids.iter().enumerate() {
        let root = edsu.find(i);
        let entry = eclass_id.entry(root).or_insert(eid);
        *entry = (*entry).min(eid);
    }

    let mut folded = LabeledGraph::new(g.rank());
    for &id in vclass_id.values() {
        folded.add_vertex(id);
    }
    let mut vertex_map = BTreeMap::new();
    for (i, &vid) in vids.iter().enumerate() {
        vertex_map.insert(vid, vclass_id[&vdsu.find(i)]);
    }
    let mut edge_map = BTreeMap::new();
    let mut emitted: BTreeSet<CellId> = BTreeSet::new();
    for (i, &eid) in eids.iter().enumerate() {
        let class = eclass_id[&edsu.find(i)];
        edge_map.insert(eid, class);
        if emitted.insert(class) {
            let e = &edges[i];
            folded.add_edge(class, vertex_map[&e.from], vertex_map[&e.to], e.label);
        }
    }
    folded.set_base(g.base().map(|b| vertex_map[&b]));
    debug_assert!(folded.is_immersed());
    (
        folded,
        GraphMorphism {
            vertex_map,
            edge_map,
        },
    )
}

/// The fiber product of two graphs over the common rose: cells are the
/// label-matched pairs, incidence acts coordinatewise.
pub struct FiberProduct {
    pub graph: LabeledGraph,
    pub onto_left: GraphMorphism,
    pub onto_right: GraphMorphism,
}

pub fn fiber_product(left: &LabeledGraph, right: &LabeledGraph) -> FiberProduct {
    assert_eq!(left.rank(), right.rank(), "fiber product needs a common rose");
    let stride = right
        .vertices()
        .chain(right.edges().map(|e| e.id))
        .max()
        .map(|m| m + 1)
        .unwrap_or(1);
    let pair = |a: CellId, b: CellId| a * stride + b;

    let mut graph = LabeledGraph::new(left.rank());
    let mut vertex_left = BTreeMap::new();
    let mut vertex_right = BTreeMap::new();
    for u in left.vertices() {
        for v in right.vertices() {
            let id = pair(u, v);
            graph.add_vertex(id);
            vertex_left.insert(id, u);
            vertex_right.insert(id, v);
        }
    }
    let mut edge_left = BTreeMap::new();
    let mut edge_right = BTreeMap::new();
    for e in left.edges() {
        for f in right.edges() {
            if e.label != f.label {
                continue;
            }
            let id = pair(e.id, f.id);
            graph.add_edge(id, pair(e.from, f.from), pair(e.to, f.to), e.label);
            edge_left.insert(id, e.id);
            edge_right.insert(id, f.id);
        }
    }
    if let (Some(a), Some(b)) = (left.base(), right.base()) {
        graph.set_base(Some(pair(a, b)));
    }
    FiberProduct {
        graph,
        onto_left: GraphMorphism {
            vertex_map: vertex_left,
            edge_map: edge_left,
        },
        onto_right: GraphMorphism {
            vertex_map: vertex_right,
            edge_map: edge_right,
        },
    }
}

/// Iteratively removes valence-1 vertices (sparing the basepoint if there is
/// one) together with their edges; the fundamental group is unchanged.
pub fn core(g: &LabeledGraph) -> LabeledGraph {
    let mut out = g.clone();
    loop {
        let victim = out.vertices().find(|&v| {
            Some(v) != out.base() && out.valence(v) == 1
        });
        let Some(v) = victim else { break };
        let edge_id = out
            .edges()
            .find(|e| e.from == v || e.to == v)
            .map(|e| e.id)
            .expect("valence-1 vertex has an incident edge");
        out.edges.remove(&edge_id);
        out.vertices.remove(&v);
    }
    // Isolated non-base vertices carry no fundamental group.
    let isolated: Vec<CellId> = out
        .vertices()
        .filter(|&v| Some(v) != out.base() && out.valence(v) == 0)
        .collect();
    for v in isolated {
        out.vertices.remove(&v);
    }
    out
}

/// `(components, b1, chi)` with `chi = |V| - |E|` and
/// `b1 = components - chi`.
pub fn betti_euler(g: &LabeledGraph) -> (usize, usize, i64) {
    let vids: Vec<CellId> = g.vertices().collect();
    let vindex: BTreeMap<CellId, usize> = vids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut dsu = Dsu::new(vids.len());
    for e in g.edges() {
        dsu.union(vindex[&e.from], vindex[&e.to]);
    }
    let components: BTreeSet<usize> = (0..vids.len()).map(|i| dsu.find(i)).collect();
    let components = components.len();
    let chi = g.vertex_count() as i64 - g.edge_count() as i64;
    let b1 = components as i64 - chi;
    debug_assert!(b1 >= 0);
    (components, b1 as usize, chi)
}

/// A spanning-tree basis of the fundamental group of a based graph: one
/// generator per non-tree edge, read as tree path, edge, tree path back.
#[derive(Debug, Clone)]
pub struct Basis {
    pub tree_edges: BTreeSet<CellId>,
    /// Non-tree edge ids in increasing order; generator i+1 crosses
    /// `generator_edges[i]` forwards.
    pub generator_edges: Vec<CellId>,
    /// Each generator expressed as a word over the rose's alphabet.
    pub generator_words: Vec<Word>,
    parent: BTreeMap<CellId, (CellId, i64)>,
    base: CellId,
}

impl Basis {
    /// BFS spanning tree from the basepoint. Only the basepoint component
    /// contributes generators; the graph is expected to be connected when
    /// the basis is used for rewriting.
    pub fn spanning(g: &LabeledGraph, base: CellId) -> Basis {
        assert!(g.has_vertex(base));
        let mut parent: BTreeMap<CellId, (CellId, i64)> = BTreeMap::new();
        let mut seen: BTreeSet<CellId> = BTreeSet::new();
        let mut tree_edges = BTreeSet::new();
        seen.insert(base);
        let mut queue = VecDeque::from([base]);
        while let Some(v) = queue.pop_front() {
            for (letter, eid, other) in g.directions_at(v) {
                if seen.insert(other) {
                    tree_edges.insert(eid);
                    let signed = if letter > 0 { eid as i64 + 1 } else { -(eid as i64 + 1) };
                    parent.insert(other, (v, signed));
                    queue.push_back(other);
                }
            }
        }
        let generator_edges: Vec<CellId> = g
            .edges()
            .filter(|e| !tree_edges.contains(&e.id) && seen.contains(&e.from))
            .map(|e| e.id)
            .collect();
        let mut basis = Basis {
            tree_edges,
            generator_edges,
            generator_words: Vec::new(),
            parent,
            base,
        };
        basis.generator_words = basis
            .generator_edges
            .iter()
            .map(|&eid| {
                let e = g.edge(eid).unwrap();
                let mut raw = basis.path_word(g, e.from);
                raw.push(e.label as Letter);
                let back = basis.path_word(g, e.to);
                raw.extend(back.iter().rev().map(|&l| -l));
                Word::reduce(&raw)
            })
            .collect();
        basis
    }

    /// Letters of the tree path from the basepoint to `v`.
    fn path_word(&self, g: &LabeledGraph, v: CellId) -> Vec<Letter> {
        let mut letters = Vec::new();
        let mut at = v;
        while at != self.base {
            let (up, signed) = self.parent[&at];
            let (eid, forwards) = decode_edge_ref(signed);
            let e = g.edge(eid).unwrap();
            letters.push(if forwards { e.label as Letter } else { -(e.label as Letter) });
            at = up;
        }
        letters.reverse();
        letters
    }

    pub fn rank(&self) -> usize {
        self.generator_edges.len()
    }

    /// Rewrites a closed edge path (signed edge references) as a word in the
    /// basis generators: each crossing of a non-tree edge contributes one
    /// letter.
    pub fn rewrite_path(&self, path: &[i64]) -> Word {
        let mut letters = Vec::new();
        for &signed in path {
            let (eid, forwards) = decode_edge_ref(signed);
            if self.tree_edges.contains(&eid) {
                continue;
            }
            let gen = self
                .generator_edges
                .iter()
                .position(|&x| x == eid)
                .expect("edge belongs to the graph") as Letter
                + 1;
            letters.push(if forwards { gen } else { -gen });
        }
        Word::reduce(&letters)
    }
}

/// Lifts `loop_word` at the basepoint of an immersed based graph and, when
/// the lift closes, rewrites it in the spanning-tree basis.
pub fn express_in_basis(g: &LabeledGraph, loop_word: &Word) -> Result<ExpressOutcome> {
    let base = g
        .base()
        .ok_or_else(|| Error::Domain("express_in_basis needs a based graph".into()))?;
    if !g.is_immersed() {
        return Err(Error::Domain("express_in_basis needs an immersed graph".into()));
    }
    Ok(match g.trace(base, loop_word) {
        LiftOutcome::Closed { path } => {
            let basis = Basis::spanning(g, base);
            ExpressOutcome::Closed {
                word: basis.rewrite_path(&path),
                basis,
            }
        }
        LiftOutcome::Open { end, .. } => ExpressOutcome::OpenLift { end },
        LiftOutcome::NoLift { position } => ExpressOutcome::NotLiftable { position },
    })
}

#[derive(Debug)]
pub enum ExpressOutcome {
    Closed { word: Word, basis: Basis },
    OpenLift { end: CellId },
    NotLiftable { position: usize },
}

/// Canonical form of an immersed graph: per-component BFS renumbering with
/// (label, direction)-sorted edge order, taking the least form over root
/// choices (the basepoint, when present, is the forced root of its
/// component). Equal canonical forms mean isomorphic labeled graphs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    pub rank: usize,
    /// Sorted per-component encodings: (has_base, edges as (from,to,label)).
    pub components: Vec<(bool, usize, Vec<(u32, u32, u32)>)>,
}

pub fn canonical_form(g: &LabeledGraph) -> CanonicalForm {
    assert!(g.is_immersed(), "canonical form is defined for immersed graphs");
    // Partition vertices into components.
    let vids: Vec<CellId> = g.vertices().collect();
    let vindex: BTreeMap<CellId, usize> = vids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut dsu = Dsu::new(vids.len());
    for e in g.edges() {
        dsu.union(vindex[&e.from], vindex[&e.to]);
    }
    let mut comps: BTreeMap<usize, Vec<CellId>> = BTreeMap::new();
    for (i, &v) in vids.iter().enumerate() {
        comps.entry(dsu.find(i)).or_default().push(v);
    }
    let mut out = Vec::new();
    for members in comps.values() {
        let has_base = g.base().map(|b| members.contains(&b)).unwrap_or(false);
        let roots: Vec<CellId> = if has_base {
            vec![g.base().unwrap()]
        } else {
            members.clone()
        };
        let encoding = roots
            .into_iter()
            .map(|root| bfs_encoding(g, root))
            .min()
            .expect("component has a vertex");
        out.push((has_base, members.len(), encoding));
    }
    out.sort();
    CanonicalForm {
        rank: g.rank(),
        components: out,
    }
}

fn bfs_encoding(g: &LabeledGraph, root: CellId) -> Vec<(u32, u32, u32)> {
    let mut number: BTreeMap<CellId, u32> = BTreeMap::new();
    number.insert(root, 0);
    let mut queue = VecDeque::from([root]);
    let mut next = 1u32;
    let mut edges: Vec<(u32, u32, u32)> = Vec::new();
    let mut seen_edges: BTreeSet<CellId> = BTreeSet::new();
    while let Some(v) = queue.pop_front() {
        for (letter, eid, other) in g.directions_at(v) {
            if !number.contains_key(&other) {
                number.insert(other, next);
                next += 1;
                queue.push_back(other);
            }
            if seen_edges.insert(eid) {
                let e = g.edge(eid).unwrap();
                let _ = letter;
                edges.push((number[&e.from], number[&e.to], e.label));
            }
        }
    }
    edges.sort_unstable();
    edges
}

pub fn isomorphic(a: &LabeledGraph, b: &LabeledGraph) -> bool {
    a.rank() == b.rank() && canonical_form(a) == canonical_form(b)
}

/// Based label-respecting morphisms between immersed graphs are unique when
/// they exist: propagate from `base -> base` and check consistency.
/// Returns the morphism when `a`'s immersion factors through `b`'s.
pub fn factors_through(a: &LabeledGraph, b: &LabeledGraph) -> Option<GraphMorphism> {
    let (abase, bbase) = (a.base()?, b.base()?);
    factors_through_at(a, b, abase, bbase)
}

pub fn factors_through_at(
    a: &LabeledGraph,
    b: &LabeledGraph,
    abase: CellId,
    bbase: CellId,
) -> Option<GraphMorphism> {
    debug_assert!(a.is_immersed() && b.is_immersed());
    let mut vmap: BTreeMap<CellId, CellId> = BTreeMap::new();
    let mut emap: BTreeMap<CellId, CellId> = BTreeMap::new();
    vmap.insert(abase, bbase);
    let mut queue = VecDeque::from([abase]);
    let b_dirs: BTreeMap<CellId, BTreeMap<Letter, (CellId, CellId)>> = b
        .vertices()
        .map(|v| {
            let dirs = b
                .directions_at(v)
                .into_iter()
                .map(|(l, e, o)| (l, (e, o)))
                .collect();
            (v, dirs)
        })
        .collect();
    while let Some(v) = queue.pop_front() {
        let target = vmap[&v];
        for (letter, eid, other) in a.directions_at(v) {
            let (img_edge, img_other) = *b_dirs[&target].get(&letter)?;
            if let Some(&prev) = emap.get(&eid) {
                if prev != img_edge {
                    return None;
                }
            } else {
                emap.insert(eid, img_edge);
            }
            match vmap.get(&other) {
                Some(&prev) => {
                    if prev != img_other {
                        return None;
                    }
                }
                None => {
                    vmap.insert(other, img_other);
                    queue.push_back(other);
                }
            }
        }
    }
    if vmap.len() != a.vertex_count() || emap.len() != a.edge_count() {
        // Disconnected domain: only the base component factors.
        return None;
    }
    Some(GraphMorphism {
        vertex_map: vmap,
        edge_map: emap,
    })
}

// ---------------------------------------------------------------------------
// Text format: `v <id>`, `e <id> <from> <to> <label>`, `base <id>`, with `#`
// comments. The writer emits a canonical ordering so that writing after
// parsing reproduces canonical files byte for byte.
// ---------------------------------------------------------------------------

use crate::words::Alphabet;

pub fn write_graph(g: &LabeledGraph, alphabet: &Alphabet) -> String {
    let mut out = String::new();
    for v in g.vertices() {
        out.push_str(&format!("v {v}\n"));
    }
    for e in g.edges() {
        out.push_str(&format!(
            "e {} {} {} {}\n",
            e.id,
            e.from,
            e.to,
            alphabet.display_letter(e.label as Letter)
        ));
    }
    if let Some(b) = g.base() {
        out.push_str(&format!("base {b}\n"));
    }
    out
}

pub fn parse_graph(text: &str, alphabet: &Alphabet) -> Result<LabeledGraph> {
    let mut g = LabeledGraph::new(alphabet.rank());
    let mut pending_edges: Vec<(CellId, CellId, CellId, u32)> = Vec::new();
    let mut base: Option<CellId> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let kind = parts.next().unwrap();
        let parse_id = |tok: Option<&str>| -> Result<CellId> {
            tok.ok_or_else(|| Error::Input(format!("line {}: missing field", lineno + 1)))?
                .parse()
                .map_err(|_| Error::Input(format!("line {}: bad id", lineno + 1)))
        };
        match kind {
            "v" => {
                let id = parse_id(parts.next())?;
                if g.has_vertex(id) {
                    return Err(Error::Input(format!("line {}: duplicate vertex {id}", lineno + 1)));
                }
                g.add_vertex(id);
            }
            "e" => {
                let id = parse_id(parts.next())?;
                let from = parse_id(parts.next())?;
                let to = parse_id(parts.next())?;
                let label_tok = parts
                    .next()
                    .ok_or_else(|| Error::Input(format!("line {}: missing label", lineno + 1)))?;
                let mut chars = label_tok.chars();
                let (ch, extra) = (chars.next(), chars.next());
                let ch = ch.ok_or_else(|| Error::Input(format!("line {}: empty label", lineno + 1)))?;
                if extra.is_some() || !ch.is_ascii_lowercase() {
                    return Err(Error::Input(format!(
                        "line {}: label must be a single lowercase letter",
                        lineno + 1
                    )));
                }
                let letter = alphabet.index_of(ch)?;
                pending_edges.push((id, from, to, letter as u32));
            }
            "base" => {
                base = Some(parse_id(parts.next())?);
            }
            other => {
                return Err(Error::Input(format!(
                    "line {}: unknown directive {other:?}",
                    lineno + 1
                )));
            }
        }
        if parts.next().is_some() {
            return Err(Error::Input(format!("line {}: trailing tokens", lineno + 1)));
        }
    }
    for (id, from, to, label) in pending_edges {
        if !g.has_vertex(from) || !g.has_vertex(to) {
            return Err(Error::Input(format!("edge {id} references missing vertex")));
        }
        if g.edge(id).is_some() {
            return Err(Error::Input(format!("duplicate edge id {id}")));
        }
        g.add_edge(id, from, to, label);
    }
    if let Some(b) = base {
        if !g.has_vertex(b) {
            return Err(Error::Input(format!("basepoint {b} is not a vertex")));
        }
        g.set_base(Some(b));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{word_to_cycle, Alphabet};

    fn w(s: &str) -> Word {
        Alphabet::canonical(26).parse_word(s).unwrap()
    }

    /// Naive repeated-scan folding used as an oracle against the worklist
    /// implementation.
    fn fold_oracle(g: &LabeledGraph) -> LabeledGraph {
        let mut cur = g.clone();
        loop {
            let mut clash: Option<(Edge, Edge)> = None;
            'outer: for e in cur.edges() {
                for f in cur.edges() {
                    if e.id < f.id
                        && e.label == f.label
                        && (e.from == f.from || e.to == f.to)
                    {
                        clash = Some((*e, *f));
                        break 'outer;
                    }
                }
            }
            let Some((e, f)) = clash else { return cur };
            let mut next = LabeledGraph::new(cur.rank());
            // Merge: identify f's endpoints with e's, drop f.
            let remap = |v: CellId| {
                if e.from == f.from && v == f.to {
                    e.to
                } else if e.to == f.to && v == f.from {
                    e.from
                } else {
                    v
                }
            };
            for v in cur.vertices() {
                let img = remap(v);
                if !next.has_vertex(img) {
                    next.add_vertex(img);
                }
            }
            for ed in cur.edges() {
                if ed.id == f.id {
                    continue;
                }
                next.add_edge(ed.id, remap(ed.from), remap(ed.to), ed.label);
            }
            next.set_base(cur.base().map(remap));
            cur = next;
        }
    }

    #[test]
    fn fold_two_petals() {
        let mut g = LabeledGraph::new(2);
        g.add_vertex(0);
        g.add_edge(1, 0, 0, 1);
        g.add_edge(2, 0, 0, 1);
        let (folded, q) = fold(&g);
        assert_eq!(folded.edge_count(), 1);
        assert_eq!(q.edge_map[&1], q.edge_map[&2]);
        q.verify(&g, &folded).unwrap();
    }

    #[test]
    fn fold_already_immersed_is_identity() {
        let g = word_to_cycle(&w("abAB"), 2).unwrap();
        let (folded, q) = fold(&g);
        assert!(isomorphic(&folded, &g));
        assert_eq!(q.vertex_map.len(), 4);
    }

    #[test]
    fn fold_matches_naive_oracle() {
        // The abAB cycle with two extra a-edges glued at the basepoint.
        let mut g = word_to_cycle(&w("abAB"), 2).unwrap();
        g.add_vertex(100);
        g.add_vertex(101);
        g.add_edge(50, 0, 100, 1);
        g.add_edge(51, 0, 101, 1);
        let (folded, q) = fold(&g);
        let oracle = fold_oracle(&g);
        assert!(isomorphic(&folded, &oracle));
        q.verify(&g, &folded).unwrap();
        assert!(folded.is_immersed());
    }

    #[test]
    fn fold_confluence_on_randomish_graphs() {
        // Folding must be independent of presentation order: permute ids.
        let mut g = LabeledGraph::new(2);
        for vtx in 0..6 {
            g.add_vertex(vtx);
        }
        let layout = [
            (0u32, 1u32, 1u32),
            (0, 2, 1),
            (1, 3, 2),
            (2, 3, 2),
            (3, 4, 1),
            (3, 5, 1),
            (4, 0, 2),
            (5, 0, 2),
        ];
        for (i, &(a, b, l)) in layout.iter().enumerate() {
            g.add_edge(i as u32, a, b, l);
        }
        g.set_base(Some(0));
        let (f1, _) = fold(&g);

        let mut g2 = LabeledGraph::new(2);
        for vtx in 0..6 {
            g2.add_vertex(vtx);
        }
        for (i, &(a, b, l)) in layout.iter().enumerate().rev() {
            g2.add_edge(100 - i as u32, a, b, l);
        }
        g2.set_base(Some(0));
        let (f2, _) = fold(&g2);
        assert_eq!(canonical_form(&f1), canonical_form(&f2));
        let oracle = fold_oracle(&g);
        assert!(isomorphic(&f1, &oracle));
    }

    #[test]
    fn fold_never_decreases_chi() {
        let mut g = word_to_cycle(&w("abab"), 2).unwrap();
        g.add_edge(10, 0, 2, 1);
        let (_, _, chi_before) = betti_euler(&g);
        let (folded, _) = fold(&g);
        let (_, _, chi_after) = betti_euler(&folded);
        assert!(chi_after >= chi_before);
    }

    #[test]
    fn fiber_product_with_rose_is_identity() {
        let gamma = word_to_cycle(&w("abAB"), 2).unwrap();
        let rose = LabeledGraph::rose(2);
        let fp = fiber_product(&gamma, &rose);
        assert!(isomorphic(&fp.graph, &gamma));
        fp.onto_left.verify(&fp.graph, &gamma).unwrap();
    }

    #[test]
    fn fiber_product_distributes_over_disjoint_union() {
        let mut two_petals = LabeledGraph::new(1);
        two_petals.add_vertex(0);
        two_petals.add_vertex(1);
        two_petals.add_edge(0, 0, 0, 1);
        two_petals.add_edge(1, 1, 1, 1);
        let one = LabeledGraph::rose(1);
        let fp = fiber_product(&two_petals, &one);
        assert_eq!(fp.graph.vertex_count(), 2);
        assert_eq!(fp.graph.edge_count(), 2);
    }

    #[test]
    fn fiber_product_of_aa_cycles() {
        let c = word_to_cycle(&w("aa"), 1).unwrap();
        let fp = fiber_product(&c, &c);
        assert_eq!(fp.graph.edge_count(), 4);
        assert_eq!(fp.graph.vertex_count(), 4);
    }

    #[test]
    fn fiber_product_symmetry() {
        let a = word_to_cycle(&w("aab"), 2).unwrap();
        let b = word_to_cycle(&w("ab"), 2).unwrap();
        let ab = fiber_product(&a, &b);
        let ba = fiber_product(&b, &a);
        assert_eq!(canonical_form(&ab.graph), canonical_form(&ba.graph));
    }

    #[test]
    fn core_removes_hanging_tree() {
        let mut g = word_to_cycle(&w("ab"), 2).unwrap();
        g.add_vertex(10);
        g.add_vertex(11);
        g.add_edge(20, 1, 10, 1);
        g.add_edge(21, 10, 11, 2);
        let cored = core(&g);
        assert_eq!(cored.vertex_count(), 2);
        assert_eq!(cored.edge_count(), 2);
        assert!(cored.vertices().all(|v| cored.valence(v) >= 2 || Some(v) == cored.base()));
    }

    #[test]
    fn betti_euler_examples() {
        let rose = LabeledGraph::rose(2);
        assert_eq!(betti_euler(&rose), (1, 2, -1));
        let mut tree = LabeledGraph::new(1);
        for vtx in 0..5 {
            tree.add_vertex(vtx);
        }
        for i in 0..4u32 {
            tree.add_edge(i, i, i + 1, 1);
        }
        assert_eq!(betti_euler(&tree), (1, 0, 1));
        let mut circles = word_to_cycle(&w("ab"), 2).unwrap();
        circles.add_vertex(10);
        circles.add_vertex(11);
        circles.add_edge(30, 10, 11, 1);
        circles.add_edge(31, 11, 10, 2);
        assert_eq!(betti_euler(&circles), (2, 2, 0));
    }

    #[test]
    fn express_in_basis_on_rose() {
        let rose = LabeledGraph::rose(2);
        match express_in_basis(&rose, &w("ab")).unwrap() {
            ExpressOutcome::Closed { word, basis } => {
                assert_eq!(basis.rank(), 2);
                assert_eq!(word, w("ab"));
            }
            other => panic!("expected closed lift, got {other:?}"),
        }
    }

    #[test]
    fn express_in_basis_not_liftable() {
        let mut petal = LabeledGraph::new(2);
        petal.add_vertex(0);
        petal.add_edge(0, 0, 0, 1);
        petal.set_base(Some(0));
        match express_in_basis(&petal, &w("b")).unwrap() {
            ExpressOutcome::NotLiftable { position } => assert_eq!(position, 0),
            other => panic!("expected no lift, got {other:?}"),
        }
    }

    #[test]
    fn express_in_basis_open_lift_distinct() {
        let cycle = word_to_cycle(&w("aa"), 1).unwrap();
        match express_in_basis(&cycle, &w("a")).unwrap() {
            ExpressOutcome::OpenLift { end } => assert_eq!(end, 1),
            other => panic!("expected open lift, got {other:?}"),
        }
        match express_in_basis(&cycle, &w("aa")).unwrap() {
            ExpressOutcome::Closed { word, .. } => assert_eq!(word, w("a")),
            other => panic!("expected closed, got {other:?}"),
        }
    }

    #[test]
    fn basis_words_evaluate_back() {
        let g = word_to_cycle(&w("abAB"), 2).unwrap();
        let loop_word = w("abAB");
        match express_in_basis(&g, &loop_word).unwrap() {
            ExpressOutcome::Closed { word, basis } => {
                // Substitute basis words for generators and compare in F.
                let mut raw = Vec::new();
                for &l in word.letters() {
                    let gen = &basis.generator_words[l.unsigned_abs() as usize - 1];
                    if l > 0 {
                        raw.extend_from_slice(gen.letters());
                    } else {
                        raw.extend(gen.letters().iter().rev().map(|&x| -x));
                    }
                }
                assert_eq!(Word::reduce(&raw), loop_word);
            }
            other => panic!("expected closed lift, got {other:?}"),
        }
    }

    #[test]
    fn factoring_detects_subgraph_inclusion() {
        let mut petal = LabeledGraph::new(2);
        petal.add_vertex(0);
        petal.add_edge(0, 0, 0, 1);
        petal.set_base(Some(0));
        let rose = LabeledGraph::rose(2);
        assert!(factors_through(&petal, &rose).is_some());
        assert!(factors_through(&rose, &petal).is_none());
    }

    #[test]
    fn text_round_trip() {
        let alpha = Alphabet::canonical(2);
        let text = "v 0\nv 1\ne 0 0 1 a\ne 1 1 0 b\nbase 0\n";
        let g = parse_graph(text, &alpha).unwrap();
        assert_eq!(write_graph(&g, &alpha), text);
        let reparsed = parse_graph(&write_graph(&g, &alpha), &alpha).unwrap();
        assert_eq!(reparsed, g);
    }

    #[test]
    fn text_format_rejects_garbage() {
        let alpha = Alphabet::canonical(2);
        assert!(parse_graph("e 0 0 1 a", &alpha).is_err());
        assert!(parse_graph("v 0\nz 1", &alpha).is_err());
        assert!(parse_graph("v 0\ne 0 0 0 q", &alpha).is_err());
    }
}
