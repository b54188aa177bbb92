//! Adjunction spaces W over the pushout graph Γ_u, their bipartite fibers,
//! boundary and dependence classification, fiberwise filtrations by a
//! stacking, the up-down lemma, and the dependence-theorem inequality.
//!
//! The input data is a square of graph morphisms over a rose Ω: Γ and S
//! carry the maps h and w through their labels, and λ: P → Γ, σ: P → S are
//! explicit. W is the bipartite bookkeeping graph with vertex side
//! V_Γ ⊔ E_Γ ⊔ V_S ⊔ E_S and edge side V_P ⊔ E_P; its components over the
//! cells of Ω are the cells of the pushout Γ_u, and the component of a cell
//! x is the fiber W_x.

use crate::graph::{betti_euler, fold, CellId, GraphMorphism, LabeledGraph};
use crate::stacking::{verify_stacking, Stacking};
use crate::words::{maximal_root, Alphabet, Letter, Word};
use crate::{Error, Result};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// The horizontal origin of a cell of W.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum HSide {
    Gamma,
    S,
    P,
}

/// The data (Ω, Γ, S, P, λ, σ): Ω is the rose of the given rank; the maps
/// h: Γ → Ω and w: S → Ω are the labelings.
#[derive(Debug, Clone)]
pub struct AdjunctionInstance {
    pub rank: usize,
    pub gamma: LabeledGraph,
    pub s: LabeledGraph,
    pub p: LabeledGraph,
    pub lambda: GraphMorphism,
    pub sigma: GraphMorphism,
}

impl AdjunctionInstance {
    /// Validates the commuting square: λ and σ are label-respecting
    /// morphisms out of P, which forces h∘λ = w∘σ cell by cell.
    pub fn validate(&self) -> Result<()> {
        for g in [&self.gamma, &self.s, &self.p] {
            if g.rank() != self.rank {
                return Err(Error::Input("graphs disagree about the rose".into()));
            }
        }
        self.lambda.verify(&self.p, &self.gamma)?;
        self.sigma.verify(&self.p, &self.s)?;
        if self.s.vertex_count() == 0 {
            return Err(Error::Input("S is empty".into()));
        }
        Ok(())
    }

    /// S traversed as a circle: the cyclic word together with the cell
    /// order, vertex i first, then edge i carrying letter i.
    pub fn s_walk(&self) -> Result<SWalk> {
        circle_walk(&self.s)
    }

    /// Covering degree of σ summed over the components of P, when σ is a
    /// covering of the circle S; None when some component fails to cover.
    pub fn sigma_covering_degree(&self) -> Option<usize> {
        let s_len = self.s.edge_count();
        if s_len == 0 {
            return None;
        }
        // σ must be locally injective, and each component of P a circle
        // whose length is a multiple of |S|.
        if !morphism_locally_injective(&self.p, &self.s, &self.sigma) {
            return None;
        }
        let comps = components_of(&self.p);
        let mut total = 0usize;
        for comp in comps {
            let edges = comp.1;
            if edges.is_empty() || edges.len() % s_len != 0 {
                return None;
            }
            if !comp.0.iter().all(|&v| self.p.valence(v) == 2) {
                return None;
            }
            total += edges.len() / s_len;
        }
        Some(total)
    }
}

/// A circle traversal: word plus the vertex/edge ids in position order.
#[derive(Debug, Clone)]
pub struct SWalk {
    pub word: Word,
    pub vertex_order: Vec<CellId>,
    pub edge_order: Vec<CellId>,
}

pub fn circle_walk(s: &LabeledGraph) -> Result<SWalk> {
    let n = s.edge_count();
    if n == 0 || s.vertex_count() != n {
        return Err(Error::Domain("S is not a circle".into()));
    }
    if s.vertices().any(|v| s.valence(v) != 2) {
        return Err(Error::Domain("S has a vertex of valence != 2".into()));
    }
    let start = s.base().unwrap_or_else(|| s.vertices().next().unwrap());
    let mut letters: Vec<Letter> = Vec::with_capacity(n);
    let mut vertex_order = vec![start];
    let mut edge_order = Vec::with_capacity(n);
    let mut at = start;
    let mut last_edge: Option<CellId> = None;
    for _ in 0..n {
        let step = s
            .directions_at(at)
            .into_iter()
            .find(|&(_, eid, _)| Some(eid) != last_edge)
            .ok_or_else(|| Error::Domain("S is not a circle".into()))?;
        letters.push(step.0);
        edge_order.push(step.1);
        last_edge = Some(step.1);
        at = step.2;
        if vertex_order.len() < n {
            vertex_order.push(at);
        }
    }
    if at != start || edge_order.iter().collect::<BTreeSet<_>>().len() != n {
        return Err(Error::Domain("S is not a single circle".into()));
    }
    Ok(SWalk {
        word: Word::reduce(&letters),
        vertex_order,
        edge_order,
    })
}

fn components_of(g: &LabeledGraph) -> Vec<(Vec<CellId>, Vec<CellId>)> {
    let vids: Vec<CellId> = g.vertices().collect();
    let index: BTreeMap<CellId, usize> = vids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vids.len()).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in g.edges() {
        let (a, b) = (find(&mut parent, index[&e.from]), find(&mut parent, index[&e.to]));
        if a != b {
            parent[a] = b;
        }
    }
    let mut out: BTreeMap<usize, (Vec<CellId>, Vec<CellId>)> = BTreeMap::new();
    for (i, &v) in vids.iter().enumerate() {
        out.entry(find(&mut parent, i)).or_default().0.push(v);
    }
    for e in g.edges() {
        out.entry(find(&mut parent, index[&e.from]))
            .or_default()
            .1
            .push(e.id);
    }
    out.into_values().collect()
}

/// Local injectivity of a morphism on edge-ends at every domain vertex.
fn morphism_locally_injective(
    dom: &LabeledGraph,
    _cod: &LabeledGraph,
    f: &GraphMorphism,
) -> bool {
    for v in dom.vertices() {
        let mut seen: BTreeSet<(CellId, bool)> = BTreeSet::new();
        for e in dom.edges() {
            if e.from == v {
                if !seen.insert((f.edge_map[&e.id], false)) {
                    return false;
                }
            }
            if e.to == v {
                if !seen.insert((f.edge_map[&e.id], true)) {
                    return false;
                }
            }
        }
    }
    true
}

/// One fiber W_x: a bipartite graph with S-side and Γ-side cells joined by
/// P-cells.
#[derive(Debug, Clone)]
pub struct Fiber {
    pub s_cells: Vec<CellId>,
    pub gamma_cells: Vec<CellId>,
    pub p_cells: Vec<CellId>,
    /// Per p_cells[k]: (index into gamma_cells, index into s_cells).
    pub incidences: Vec<(usize, usize)>,
}

impl Fiber {
    pub fn b1(&self) -> i64 {
        let b = Bipartite {
            c_count: self.s_cells.len(),
            u_count: self.gamma_cells.len(),
            edges: self.incidences.iter().map(|&(g, s)| (s, g)).collect(),
        };
        b.b1()
    }

    pub fn chi(&self) -> i64 {
        self.s_cells.len() as i64 + self.gamma_cells.len() as i64 - self.p_cells.len() as i64
    }
}

/// W resolved over the pushout: Γ_u, its folded immersion Γ_u^I, the cell
/// map m: W → Γ_u, the fibers and the boundary.
#[derive(Debug, Clone)]
pub struct ResolvedSpace {
    pub instance: AdjunctionInstance,
    pub gamma_u: LabeledGraph,
    pub gamma_u_immersed: LabeledGraph,
    /// Class (= Γ_u vertex id) of each vertex-level cell of W.
    pub vertex_class: BTreeMap<(HSide, CellId), CellId>,
    /// Class (= Γ_u edge id) of each edge-level cell of W.
    pub edge_class: BTreeMap<(HSide, CellId), CellId>,
    pub vertex_fibers: BTreeMap<CellId, Fiber>,
    pub edge_fibers: BTreeMap<CellId, Fiber>,
    /// Γ-edges hit by exactly one P-edge.
    pub boundary: BTreeSet<CellId>,
    pub s_walk: SWalk,
    pub chi_w: i64,
}

struct ClassBuilder {
    ids: Vec<(HSide, CellId)>,
    index: BTreeMap<(HSide, CellId), usize>,
    parent: Vec<usize>,
}

impl ClassBuilder {
    fn new(cells: impl Iterator<Item = (HSide, CellId)>) -> Self {
        let ids: Vec<(HSide, CellId)> = cells.collect();
        let index = ids.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let parent = (0..ids.len()).collect();
        ClassBuilder { ids, index, parent }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: (HSide, CellId), b: (HSide, CellId)) {
        let (ia, ib) = (self.index[&a], self.index[&b]);
        let (ra, rb) = (self.find(ia), self.find(ib));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Numbers the classes 0.. in order of least member and returns the
    /// class of every cell.
    fn classes(&mut self) -> (BTreeMap<(HSide, CellId), CellId>, usize) {
        let mut renumber: BTreeMap<usize, CellId> = BTreeMap::new();
        let mut map = BTreeMap::new();
        for i in 0..self.ids.len() {
            let root = self.find(i);
            let next = renumber.len() as CellId;
            let id = *renumber.entry(root).or_insert(next);
            map.insert(self.ids[i], id);
        }
        let count = renumber.len();
        (map, count)
    }
}

/// Builds the resolved space: Γ_u as the pushout of Γ and S along P by
/// union-find over cells, the fibers as the classes themselves, m and l,
/// and the folded Γ_u^I.
pub fn build(instance: &AdjunctionInstance) -> Result<ResolvedSpace> {
    instance.validate()?;
    let s_walk = instance.s_walk()?;
    let gamma = &instance.gamma;
    let s = &instance.s;
    let p = &instance.p;

    let mut vbuild = ClassBuilder::new(
        gamma
            .vertices()
            .map(|v| (HSide::Gamma, v))
            .chain(s.vertices().map(|v| (HSide::S, v))),
    );
    for v in p.vertices() {
        vbuild.union(
            (HSide::Gamma, instance.lambda.vertex_map[&v]),
            (HSide::S, instance.sigma.vertex_map[&v]),
        );
    }
    let (vertex_class_raw, n_vclasses) = vbuild.classes();

    let mut ebuild = ClassBuilder::new(
        gamma
            .edges()
            .map(|e| (HSide::Gamma, e.id))
            .chain(s.edges().map(|e| (HSide::S, e.id))),
    );
    for e in p.edges() {
        ebuild.union(
            (HSide::Gamma, instance.lambda.edge_map[&e.id]),
            (HSide::S, instance.sigma.edge_map[&e.id]),
        );
    }
    let (edge_class_raw, n_eclasses) = ebuild.classes();

    // Incidence and labels descend to the pushout; disagreement within a
    // class would mean the square does not commute.
    let mut gamma_u = LabeledGraph::new(instance.rank);
    for c in 0..n_vclasses as CellId {
        gamma_u.add_vertex(c);
    }
    let mut eclass_data: BTreeMap<CellId, (CellId, CellId, u32)> = BTreeMap::new();
    let cells_with_ends: Vec<((HSide, CellId), (CellId, CellId, u32))> = gamma
        .edges()
        .map(|e| {
            (
                (HSide::Gamma, e.id),
                (
                    vertex_class_raw[&(HSide::Gamma, e.from)],
                    vertex_class_raw[&(HSide::Gamma, e.to)],
                    e.label,
                ),
            )
        })
        .chain(s.edges().map(|e| {
            (
                (HSide::S, e.id),
                (
                    vertex_class_raw[&(HSide::S, e.from)],
                    vertex_class_raw[&(HSide::S, e.to)],
                    e.label,
                ),
            )
        }))
        .collect();
    for (cell, data) in cells_with_ends {
        let class = edge_class_raw[&cell];
        match eclass_data.get(&class) {
            None => {
                eclass_data.insert(class, data);
            }
            Some(&prev) => {
                if prev != data {
                    return Err(Error::Input(format!(
                        "square does not commute at edge class {class}: {prev:?} vs {data:?}"
                    )));
                }
            }
        }
    }
    for (&class, &(f, t, lab)) in &eclass_data {
        gamma_u.add_edge(class, f, t, lab);
    }
    let (gamma_u_immersed, _) = fold(&gamma_u);

    // Fibers: the members of each class, with P-cells as bipartite edges.
    let mut vertex_fibers: BTreeMap<CellId, Fiber> = (0..n_vclasses as CellId)
        .map(|c| (c, Fiber { s_cells: vec![], gamma_cells: vec![], p_cells: vec![], incidences: vec![] }))
        .collect();
    let mut edge_fibers: BTreeMap<CellId, Fiber> = (0..n_eclasses as CellId)
        .map(|c| (c, Fiber { s_cells: vec![], gamma_cells: vec![], p_cells: vec![], incidences: vec![] }))
        .collect();
    for v in gamma.vertices() {
        let c = vertex_class_raw[&(HSide::Gamma, v)];
        vertex_fibers.get_mut(&c).unwrap().gamma_cells.push(v);
    }
    for v in s.vertices() {
        let c = vertex_class_raw[&(HSide::S, v)];
        vertex_fibers.get_mut(&c).unwrap().s_cells.push(v);
    }
    for e in gamma.edges() {
        let c = edge_class_raw[&(HSide::Gamma, e.id)];
        edge_fibers.get_mut(&c).unwrap().gamma_cells.push(e.id);
    }
    for e in s.edges() {
        let c = edge_class_raw[&(HSide::S, e.id)];
        edge_fibers.get_mut(&c).unwrap().s_cells.push(e.id);
    }
    let mut vertex_class = vertex_class_raw;
    let mut edge_class = edge_class_raw;
    for v in p.vertices() {
        let gcell = instance.lambda.vertex_map[&v];
        let scell = instance.sigma.vertex_map[&v];
        let c = vertex_class[&(HSide::Gamma, gcell)];
        debug_assert_eq!(c, vertex_class[&(HSide::S, scell)]);
        vertex_class.insert((HSide::P, v), c);
        let fiber = vertex_fibers.get_mut(&c).unwrap();
        let gi = fiber.gamma_cells.iter().position(|&x| x == gcell).unwrap();
        let si = fiber.s_cells.iter().position(|&x| x == scell).unwrap();
        fiber.p_cells.push(v);
        fiber.incidences.push((gi, si));
    }
    for e in p.edges() {
        let gcell = instance.lambda.edge_map[&e.id];
        let scell = instance.sigma.edge_map[&e.id];
        let c = edge_class[&(HSide::Gamma, gcell)];
        debug_assert_eq!(c, edge_class[&(HSide::S, scell)]);
        edge_class.insert((HSide::P, e.id), c);
        let fiber = edge_fibers.get_mut(&c).unwrap();
        let gi = fiber.gamma_cells.iter().position(|&x| x == gcell).unwrap();
        let si = fiber.s_cells.iter().position(|&x| x == scell).unwrap();
        fiber.p_cells.push(e.id);
        fiber.incidences.push((gi, si));
    }

    // Boundary: Γ-edges hit by exactly one P-edge.
    let mut hit_count: BTreeMap<CellId, usize> = gamma.edges().map(|e| (e.id, 0)).collect();
    for e in p.edges() {
        *hit_count.get_mut(&instance.lambda.edge_map[&e.id]).unwrap() += 1;
    }
    let boundary: BTreeSet<CellId> = hit_count
        .iter()
        .filter(|&(_, &c)| c == 1)
        .map(|(&e, _)| e)
        .collect();

    // Characteristic of W, both ways.
    let chi_gamma = betti_euler(gamma).2;
    let chi_s = betti_euler(s).2;
    let chi_p = betti_euler(p).2;
    let chi_w = chi_gamma + chi_s - chi_p;
    let chi_fibers: i64 = vertex_fibers.values().map(Fiber::chi).sum::<i64>()
        - edge_fibers.values().map(Fiber::chi).sum::<i64>();
    if chi_w != chi_fibers {
        return Err(Error::Falsified(format!(
            "chi(W) disagreement: vertical {chi_fibers} vs horizontal {chi_w}"
        )));
    }
    let chi_u = betti_euler(&gamma_u).2;
    let chi_ui = betti_euler(&gamma_u_immersed).2;
    if chi_ui < chi_u {
        return Err(Error::Falsified(format!(
            "folding decreased chi: {chi_u} -> {chi_ui}"
        )));
    }

    Ok(ResolvedSpace {
        instance: instance.clone(),
        gamma_u,
        gamma_u_immersed,
        vertex_class,
        edge_class,
        vertex_fibers,
        edge_fibers,
        boundary,
        s_walk,
        chi_w,
    })
}

impl ResolvedSpace {
    /// Edge classes of Γ_u in the image of S, i.e. the cells of w(E_S).
    pub fn s_image_edge_classes(&self) -> BTreeSet<CellId> {
        self.instance
            .s
            .edges()
            .map(|e| self.edge_class[&(HSide::S, e.id)])
            .collect()
    }
}

/// Diagrammatic irreducibility: ρ embeds the P-edges into E_Γ × E_S, and
/// both σ and w are immersions.
#[derive(Debug, Clone, Serialize)]
pub enum DiFailure {
    RhoNotInjective { p_edge_a: CellId, p_edge_b: CellId },
    SigmaNotImmersion,
    WNotImmersion,
}

pub fn check_diagrammatic_irreducibility(
    instance: &AdjunctionInstance,
) -> Result<std::result::Result<(), DiFailure>> {
    instance.validate()?;
    let mut seen: BTreeMap<(CellId, CellId), CellId> = BTreeMap::new();
    for e in instance.p.edges() {
        let key = (
            instance.lambda.edge_map[&e.id],
            instance.sigma.edge_map[&e.id],
        );
        if let Some(&other) = seen.get(&key) {
            return Ok(Err(DiFailure::RhoNotInjective {
                p_edge_a: other,
                p_edge_b: e.id,
            }));
        }
        seen.insert(key, e.id);
    }
    if !morphism_locally_injective(&instance.p, &instance.s, &instance.sigma) {
        return Ok(Err(DiFailure::SigmaNotImmersion));
    }
    if !instance.s.is_immersed() {
        return Ok(Err(DiFailure::WNotImmersion));
    }
    Ok(Ok(()))
}

/// Independence means nonempty boundary; strong independence means every
/// edge fiber over w(E_S) meets the boundary at least twice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DependenceClass {
    pub independent: bool,
    pub strongly_independent: bool,
}

pub fn classify_dependence(space: &ResolvedSpace) -> DependenceClass {
    let independent = !space.boundary.is_empty();
    let strongly_independent = space.s_image_edge_classes().iter().all(|c| {
        let fiber = &space.edge_fibers[c];
        fiber
            .gamma_cells
            .iter()
            .filter(|g| space.boundary.contains(g))
            .count()
            >= 2
    });
    DependenceClass {
        independent,
        strongly_independent,
    }
}

// ---------------------------------------------------------------------------
// Bipartite graphs, sublevel filtrations and the up-down lemma.
// ---------------------------------------------------------------------------

/// A bipartite graph with ordered side C and free side U.
#[derive(Debug, Clone)]
pub struct Bipartite {
    pub c_count: usize,
    pub u_count: usize,
    /// Edges as (c index, u index).
    pub edges: Vec<(usize, usize)>,
}

impl Bipartite {
    pub fn is_simple(&self) -> bool {
        let set: BTreeSet<(usize, usize)> = self.edges.iter().copied().collect();
        set.len() == self.edges.len()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.c_count + self.u_count;
        if n == 0 {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(c, u) in &self.edges {
            let (a, b) = (find(&mut parent, c), find(&mut parent, self.c_count + u));
            if a != b {
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 0);
        (1..n).all(|i| find(&mut parent, i) == root)
    }

    pub fn b1(&self) -> i64 {
        let n = self.c_count + self.u_count;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut components = n as i64;
        for &(c, u) in &self.edges {
            let (a, b) = (find(&mut parent, c), find(&mut parent, self.c_count + u));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        self.edges.len() as i64 - n as i64 + components
    }

    pub fn valence_c(&self, c: usize) -> usize {
        self.edges.iter().filter(|&&(x, _)| x == c).count()
    }

    pub fn valence_u(&self, u: usize) -> usize {
        self.edges.iter().filter(|&&(_, y)| y == u).count()
    }
}

/// The increments dim A^+(c) and dim A^-(c) of first Betti numbers along
/// the sublevel filtration of `order` (a permutation of the C side).
pub fn sublevel_dims(b: &Bipartite, order: &[usize]) -> (Vec<i64>, Vec<i64>) {
    let plus = sweep(b, order.iter().copied());
    let minus = sweep(b, order.iter().rev().copied());
    let minus: Vec<i64> = {
        let mut m = minus;
        m.reverse();
        m
    };
    (plus, minus)
}

/// Adds C-vertices one at a time onto the full U side, tracking the Betti
/// increment contributed at each step: valence minus newly joined
/// components.
fn sweep(b: &Bipartite, order: impl Iterator<Item = usize>) -> Vec<i64> {
    let n = b.c_count + b.u_count;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut by_c: Vec<Vec<usize>> = vec![Vec::new(); b.c_count];
    for &(c, u) in &b.edges {
        by_c[c].push(u);
    }
    let mut dims = Vec::with_capacity(b.c_count);
    let mut vertices = b.u_count as i64;
    let mut edges = 0i64;
    let mut components = b.u_count as i64;
    let mut prev_b1 = 0i64;
    for c in order {
        vertices += 1;
        components += 1;
        for &u in &by_c[c] {
            edges += 1;
            let (a, bb) = (find(&mut parent, c), find(&mut parent, b.c_count + u));
            if a != bb {
                parent[a] = bb;
                components -= 1;
            }
        }
        let b1 = edges - vertices + components;
        dims.push(b1 - prev_b1);
        prev_b1 = b1;
    }
    dims
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum GoodVertex {
    C(usize),
    U(usize),
}

/// All good vertices of a simple connected bipartite graph that is not a
/// point, for the given order on C: a C-vertex is good when its maximal
/// filtration increment equals valence - 1; a U-vertex is good when it has
/// valence one.
pub fn good_vertices(b: &Bipartite, order: &[usize]) -> Result<Vec<GoodVertex>> {
    if !b.is_simple() {
        return Err(Error::Domain("up-down lemma needs a simple graph".into()));
    }
    if !b.is_connected() {
        return Err(Error::Domain("up-down lemma needs a connected graph".into()));
    }
    if b.c_count + b.u_count < 2 {
        return Err(Error::Domain("up-down lemma needs more than a point".into()));
    }
    if order.len() != b.c_count {
        return Err(Error::Input("order must list the C side exactly".into()));
    }
    let (plus, minus) = sublevel_dims(b, order);
    let mut rank_of = vec![0usize; b.c_count];
    for (i, &c) in order.iter().enumerate() {
        rank_of[c] = i;
    }
    let mut good = Vec::new();
    for c in 0..b.c_count {
        let i = rank_of[c];
        if plus[i].max(minus[i]) == b.valence_c(c) as i64 - 1 {
            good.push(GoodVertex::C(c));
        }
    }
    for u in 0..b.u_count {
        if b.valence_u(u) == 1 {
            good.push(GoodVertex::U(u));
        }
    }
    Ok(good)
}

/// `good_vertices` plus the lemma's guarantee: at least two good vertices
/// exist. Fewer would falsify the up-down lemma.
pub fn updown_check(b: &Bipartite, order: &[usize]) -> Result<Vec<GoodVertex>> {
    let good = good_vertices(b, order)?;
    if good.len() < 2 {
        return Err(Error::Falsified(format!(
            "up-down lemma: only {} good vertices",
            good.len()
        )));
    }
    Ok(good)
}

// ---------------------------------------------------------------------------
// Fiberwise filtration and the dependence theorem.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub enum FiberCell {
    Vertex(CellId),
    Edge(CellId),
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberReport {
    pub cell: FiberCell,
    pub b1: i64,
    /// S-cells of the fiber in increasing stacking order.
    pub s_cells: Vec<CellId>,
    pub dim_a_plus: Vec<i64>,
    pub dim_a_minus: Vec<i64>,
    /// Good vertices, reported for edge fibers that are not points.
    pub good: Option<Vec<GoodVertex>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FiltrationReport {
    pub chi_c: i64,
    pub chi_c_plus: i64,
    pub chi_c_minus: i64,
    pub max_dim_a: i64,
    pub fibers: Vec<FiberReport>,
}

/// Computes all filtration data of the resolved space under a stacking of
/// the circle word. Requires diagrammatic irreducibility (the fiber maps
/// must inject on A^±) and a valid stacking.
pub fn filtration(space: &ResolvedSpace, st: &Stacking) -> Result<FiltrationReport> {
    if let Err(fail) = check_diagrammatic_irreducibility(&space.instance)? {
        return Err(Error::Hypothesis(format!(
            "filtration requires diagrammatic irreducibility: {fail:?}"
        )));
    }
    // Post-check of irreducibility: every edge fiber is simple bipartite.
    for fiber in space.edge_fibers.values() {
        let mut pairs = fiber.incidences.clone();
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        if pairs.len() != before {
            return Err(Error::Falsified(
                "diagrammatically irreducible but an edge fiber is not simple".into(),
            ));
        }
    }
    if verify_stacking(&space.s_walk.word, st)? != true {
        return Err(Error::Domain("stacking fails the pullback condition".into()));
    }

    // Stacking ranks per S-cell id.
    let n = space.s_walk.word.len();
    let mut vertex_rank: BTreeMap<CellId, usize> = BTreeMap::new();
    for (rank, &pos) in st.vertex_fiber.iter().enumerate() {
        vertex_rank.insert(space.s_walk.vertex_order[pos], rank);
    }
    let mut edge_rank: BTreeMap<CellId, usize> = BTreeMap::new();
    for fiber in st.edge_fibers.values() {
        for (rank, &pos) in fiber.iter().enumerate() {
            edge_rank.insert(space.s_walk.edge_order[pos], rank);
        }
    }
    debug_assert_eq!(vertex_rank.len(), n);

    let mut fibers = Vec::new();
    let mut chi_c = 0i64;
    let mut chi_c_plus = 0i64;
    let mut chi_c_minus = 0i64;
    let mut max_dim_a = 0i64;

    let mut handle = |cell: FiberCell,
                      fiber: &Fiber,
                      ranks: &BTreeMap<CellId, usize>|
     -> Result<FiberReport> {
        let mut s_sorted: Vec<usize> = (0..fiber.s_cells.len()).collect();
        s_sorted.sort_by_key(|&i| ranks[&fiber.s_cells[i]]);
        let order: Vec<usize> = s_sorted.clone();
        let b = Bipartite {
            c_count: fiber.s_cells.len(),
            u_count: fiber.gamma_cells.len(),
            edges: fiber.incidences.iter().map(|&(g, s)| (s, g)).collect(),
        };
        let (plus_by_rank, minus_by_rank) = if b.c_count > 0 {
            let (p, m) = sublevel_dims(&b, &order);
            (p, m)
        } else {
            (Vec::new(), Vec::new())
        };
        let b1 = b.b1();
        // Sublevel inclusions inject on H1 of graphs, so increments are
        // non-negative, and they decompose b1.
        for dims in [&plus_by_rank, &minus_by_rank] {
            if dims.iter().any(|&d| d < 0) {
                return Err(Error::Falsified("negative filtration increment".into()));
            }
            if dims.iter().sum::<i64>() != b1 {
                return Err(Error::Falsified(
                    "filtration increments do not decompose b1".into(),
                ));
            }
        }
        for &d in plus_by_rank.iter().chain(minus_by_rank.iter()) {
            max_dim_a = max_dim_a.max(d);
        }
        let is_edge = matches!(cell, FiberCell::Edge(_));
        if is_edge {
            chi_c -= b1;
            chi_c_plus -= plus_by_rank.iter().sum::<i64>();
            chi_c_minus -= minus_by_rank.iter().sum::<i64>();
        } else {
            chi_c += b1;
            chi_c_plus += plus_by_rank.iter().sum::<i64>();
            chi_c_minus += minus_by_rank.iter().sum::<i64>();
        }
        let good = if is_edge && b.c_count > 0 && b.c_count + b.u_count >= 2 {
            Some(good_vertices(&b, &order)?)
        } else {
            None
        };
        Ok(FiberReport {
            cell,
            b1,
            s_cells: s_sorted.iter().map(|&i| fiber.s_cells[i]).collect(),
            dim_a_plus: plus_by_rank,
            dim_a_minus: minus_by_rank,
            good,
        })
    };

    for (&c, fiber) in &space.vertex_fibers {
        fibers.push(handle(FiberCell::Vertex(c), fiber, &vertex_rank)?);
    }
    for (&c, fiber) in &space.edge_fibers {
        fibers.push(handle(FiberCell::Edge(c), fiber, &edge_rank)?);
    }

    if chi_c_plus != chi_c || chi_c_minus != chi_c {
        return Err(Error::Falsified(format!(
            "chi(C) = {chi_c} but chi(C+) = {chi_c_plus}, chi(C-) = {chi_c_minus}"
        )));
    }
    if max_dim_a > chi_c {
        return Err(Error::Falsified(format!(
            "max dim A = {max_dim_a} exceeds chi(C) = {chi_c}"
        )));
    }
    Ok(FiltrationReport {
        chi_c,
        chi_c_plus,
        chi_c_minus,
        max_dim_a,
        fibers,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HypothesisChecklist {
    pub diagrammatically_irreducible: bool,
    pub s_is_circle: bool,
    pub w_indivisible: bool,
    pub sigma_covering: bool,
}

impl HypothesisChecklist {
    pub fn all_hold(&self) -> bool {
        self.diagrammatically_irreducible
            && self.s_is_circle
            && self.w_indivisible
            && self.sigma_covering
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DependenceReport {
    pub checklist: HypothesisChecklist,
    pub classification: DependenceClass,
    pub chi_gamma: i64,
    pub deg_sigma: usize,
    pub chi_gamma_u: i64,
    pub chi_gamma_u_immersed: i64,
    pub chi_w: i64,
    /// Left side chi(Gamma) + deg(sigma) - 1 of the main inequality.
    pub lhs: i64,
    pub inequality_asserted: bool,
    pub inequality_holds: bool,
    pub equality: bool,
    pub w_cycles_asserted: bool,
    pub w_cycles_holds: bool,
    pub chi_c: Option<i64>,
    pub max_dim_a: Option<i64>,
    pub circle_valence_checked: bool,
}

/// The four hypotheses of the dependence theorem, evaluated on an instance.
pub fn hypothesis_checklist(instance: &AdjunctionInstance) -> Result<HypothesisChecklist> {
    let di_ok = check_diagrammatic_irreducibility(instance)?.is_ok();
    let s_is_circle = instance.s_walk().is_ok();
    let w_indivisible = s_is_circle
        && instance.s.is_immersed()
        && instance
            .s_walk()
            .and_then(|walk| maximal_root(&walk.word))
            .map(|r| r.exponent == 1)
            .unwrap_or(false);
    Ok(HypothesisChecklist {
        diagrammatically_irreducible: di_ok,
        s_is_circle,
        w_indivisible,
        sigma_covering: instance.sigma_covering_degree().is_some(),
    })
}

/// Verifies the dependence theorem on one instance: checks the hypotheses,
/// classifies dependence, runs the filtration, and asserts the inequality
/// chi(Γ) + deg(σ) - 1 <= chi(Γ_u) whenever λ is weakly dependent, plus the
/// w-cycles consequence when chi(Γ_u) <= -1 and the circle-valence lemma.
/// A theorem violation comes back as a falsification error.
pub fn verify_dependence_theorem(
    instance: &AdjunctionInstance,
    st: &Stacking,
) -> Result<DependenceReport> {
    let space = build(instance)?;
    let deg = instance.sigma_covering_degree();
    let checklist = hypothesis_checklist(instance)?;

    let classification = classify_dependence(&space);
    let chi_gamma = betti_euler(&instance.gamma).2;
    let chi_gamma_u = betti_euler(&space.gamma_u).2;
    let chi_gamma_u_immersed = betti_euler(&space.gamma_u_immersed).2;
    let deg_sigma = deg.unwrap_or(0);
    let lhs = chi_gamma + deg_sigma as i64 - 1;

    let mut report = DependenceReport {
        checklist,
        classification,
        chi_gamma,
        deg_sigma,
        chi_gamma_u,
        chi_gamma_u_immersed,
        chi_w: space.chi_w,
        lhs,
        inequality_asserted: false,
        inequality_holds: true,
        equality: false,
        w_cycles_asserted: false,
        w_cycles_holds: true,
        chi_c: None,
        max_dim_a: None,
        circle_valence_checked: false,
    };
    if !checklist.all_hold() {
        return Ok(report);
    }

    // Circle valence: with sigma a covering, every S-vertex and S-edge has
    // exactly deg(sigma) incident P-cells in its fiber.
    for fibers in [&space.vertex_fibers, &space.edge_fibers] {
        for fiber in fibers.values() {
            for (si, _) in fiber.s_cells.iter().enumerate() {
                let valence = fiber.incidences.iter().filter(|&&(_, s)| s == si).count();
                if valence != deg_sigma {
                    return Err(Error::Falsified(format!(
                        "circle valence: S-cell has valence {valence}, deg(sigma) = {deg_sigma}"
                    )));
                }
            }
        }
    }
    report.circle_valence_checked = true;

    let filt = filtration(&space, st)?;
    report.chi_c = Some(filt.chi_c);
    report.max_dim_a = Some(filt.max_dim_a);
    // chi(W) = chi(Γ_u) - chi(C).
    if space.chi_w != chi_gamma_u - filt.chi_c {
        return Err(Error::Falsified(format!(
            "chi(W) = {} but chi(Gamma_u) - chi(C) = {}",
            space.chi_w,
            chi_gamma_u - filt.chi_c
        )));
    }

    let weakly_dependent = !classification.strongly_independent;
    if weakly_dependent {
        report.inequality_asserted = true;
        report.inequality_holds = lhs <= chi_gamma_u;
        report.equality = lhs == chi_gamma_u;
        if !report.inequality_holds {
            return Err(Error::Falsified(format!(
                "dependence theorem fails: {lhs} > {chi_gamma_u}"
            )));
        }
        if chi_gamma_u <= -1 {
            report.w_cycles_asserted = true;
            report.w_cycles_holds = chi_gamma + deg_sigma as i64 <= 0;
            if !report.w_cycles_holds {
                return Err(Error::Falsified(format!(
                    "w-cycles consequence fails: chi(Gamma) + deg = {}",
                    chi_gamma + deg_sigma as i64
                )));
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// The Borromean instance: the triple-punctured torus spine over the rose of
// rank two, with the three boundary circles mapping to the commutator.
// ---------------------------------------------------------------------------

/// Γ is the 3-fold cover of the rank-2 rose with a-monodromy (0 1 2) and
/// trivial b-monodromy (a rank-4 graph); P is the three lifts of the
/// boundary commutator a b a^-1 b^-1, each of covering degree one over S.
pub fn borromean_instance() -> AdjunctionInstance {
    let mut gamma = LabeledGraph::new(2);
    for v in 0..3 {
        gamma.add_vertex(v);
    }
    for i in 0..3u32 {
        gamma.add_edge(i, i, (i + 1) % 3, 1);
        gamma.add_edge(3 + i, i, i, 2);
    }
    let alphabet = Alphabet::canonical(2);
    let w = alphabet.parse_word("abAB").unwrap();
    let s = crate::words::word_to_cycle(&w, 2).unwrap();

    let mut p = LabeledGraph::new(2);
    let mut lambda_v = BTreeMap::new();
    let mut lambda_e = BTreeMap::new();
    let mut sigma_v = BTreeMap::new();
    let mut sigma_e = BTreeMap::new();
    for i in 0..3u32 {
        let base = 4 * i;
        for j in 0..4u32 {
            p.add_vertex(base + j);
            sigma_v.insert(base + j, j);
        }
        p.add_edge(base, base, base + 1, 1);
        p.add_edge(base + 1, base + 1, base + 2, 2);
        p.add_edge(base + 2, base + 3, base + 2, 1);
        p.add_edge(base + 3, base, base + 3, 2);
        for j in 0..4u32 {
            sigma_e.insert(base + j, j);
        }
        let next = (i + 1) % 3;
        lambda_v.insert(base, i);
        lambda_v.insert(base + 1, next);
        lambda_v.insert(base + 2, next);
        lambda_v.insert(base + 3, i);
        lambda_e.insert(base, i);
        lambda_e.insert(base + 1, 3 + next);
        lambda_e.insert(base + 2, i);
        lambda_e.insert(base + 3, 3 + i);
    }
    AdjunctionInstance {
        rank: 2,
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

// ---------------------------------------------------------------------------
// Instance text format: four graph blocks plus morphism lines.
// ---------------------------------------------------------------------------

/// Parses an instance file: blocks `graph omega|gamma|s|p` ... `end` in the
/// graph text format, then lines `map lambda|sigma v<id> -> v<id>` and
/// `map lambda|sigma e<id> -> e<id>`.
pub fn parse_instance(text: &str) -> Result<AdjunctionInstance> {
    let mut sections: BTreeMap<String, String> = BTreeMap::new();
    let mut maps: Vec<(String, char, CellId, CellId)> = Vec::new();
    let mut current: Option<(String, String)> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| Error::Input(format!("line {}: {msg}", lineno + 1));
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
        match parts.next() {
            Some("graph") => {
                let name = parts
                    .next()
                    .ok_or_else(|| err("graph block needs a name"))?
                    .to_string();
                if !["omega", "gamma", "s", "p"].contains(&name.as_str()) {
                    return Err(err("graph name must be omega, gamma, s or p"));
                }
                current = Some((name, String::new()));
            }
            Some("map") => {
                let name = parts.next().ok_or_else(|| err("map needs a name"))?;
                if name != "lambda" && name != "sigma" {
                    return Err(err("map name must be lambda or sigma"));
                }
                let dom = parts.next().ok_or_else(|| err("map needs a domain cell"))?;
                let arrow = parts.next();
                if arrow != Some("->") {
                    return Err(err("map needs '->'"));
                }
                let cod = parts.next().ok_or_else(|| err("map needs a codomain cell"))?;
                let parse_cell = |tok: &str| -> Result<(char, CellId)> {
                    let kind = tok.chars().next().ok_or_else(|| err("empty cell"))?;
                    if kind != 'v' && kind != 'e' {
                        return Err(err("cell must start with v or e"));
                    }
                    let id: CellId = tok[1..]
                        .parse()
                        .map_err(|_| err("bad cell id"))?;
                    Ok((kind, id))
                };
                let (dk, did) = parse_cell(dom)?;
                let (ck, cid) = parse_cell(cod)?;
                if dk != ck {
                    return Err(err("map must send vertices to vertices and edges to edges"));
                }
                maps.push((name.to_string(), dk, did, cid));
            }
            _ => return Err(err("expected a graph block or a map line")),
        }
    }
    if current.is_some() {
        return Err(Error::Input("unterminated graph block".into()));
    }
    for required in ["omega", "gamma", "s", "p"] {
        if !sections.contains_key(required) {
            return Err(Error::Input(format!("missing graph block {required}")));
        }
    }
    let alphabet = Alphabet::infer(
        &sections
            .values()
            .flat_map(|s| s.lines())
            .filter(|l| l.starts_with("e "))
            .filter_map(|l| l.split_whitespace().nth(4))
            .collect::<String>(),
        None,
    )?;
    let omega = crate::graph::parse_graph(&sections["omega"], &alphabet)?;
    if omega.vertex_count() != 1 || omega.edge_count() != alphabet.rank() {
        return Err(Error::Input(
            "omega must be the rose on the alphabet (one vertex, one petal per letter)".into(),
        ));
    }
    let labels: BTreeSet<u32> = omega.edges().map(|e| e.label).collect();
    if labels.len() != alphabet.rank() {
        return Err(Error::Input("omega petals must carry distinct letters".into()));
    }
    let gamma = crate::graph::parse_graph(&sections["gamma"], &alphabet)?;
    let s = crate::graph::parse_graph(&sections["s"], &alphabet)?;
    let p = crate::graph::parse_graph(&sections["p"], &alphabet)?;
    let mut lambda = GraphMorphism {
        vertex_map: BTreeMap::new(),
        edge_map: BTreeMap::new(),
    };
    let mut sigma = GraphMorphism {
        vertex_map: BTreeMap::new(),
        edge_map: BTreeMap::new(),
    };
    for (name, kind, dom, cod) in maps {
        let target = if name == "lambda" { &mut lambda } else { &mut sigma };
        let map = if kind == 'v' {
            &mut target.vertex_map
        } else {
            &mut target.edge_map
        };
        if map.insert(dom, cod).is_some() {
            return Err(Error::Input(format!(
                "duplicate map entry {name} {kind}{dom}"
            )));
        }
    }
    let instance = AdjunctionInstance {
        rank: alphabet.rank(),
        gamma,
        s,
        p,
        lambda,
        sigma,
    };
    instance.validate()?;
    Ok(instance)
}

pub fn write_instance(instance: &AdjunctionInstance, alphabet: &Alphabet) -> String {
    let mut out = String::new();
    out.push_str("graph omega\n");
    out.push_str(&crate::graph::write_graph(
        &LabeledGraph::rose(instance.rank),
        alphabet,
    ));
    out.push_str("end\n");
    for (name, g) in [
        ("gamma", &instance.gamma),
        ("s", &instance.s),
        ("p", &instance.p),
    ] {
        out.push_str(&format!("graph {name}\n"));
        out.push_str(&crate::graph::write_graph(g, alphabet));
        out.push_str("end\n");
    }
    for (name, m) in [("lambda", &instance.lambda), ("sigma", &instance.sigma)] {
        for (d, c) in &m.vertex_map {
            out.push_str(&format!("map {name} v{d} -> v{c}\n"));
        }
        for (d, c) in &m.edge_map {
            out.push_str(&format!("map {name} e{d} -> e{c}\n"));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stacking::find_stacking;
    use crate::words::word_to_cycle;

    fn w(sv: &str) -> Word {
        Alphabet::canonical(26).parse_word(sv).unwrap()
    }

    /// P = S mapped isomorphically onto a cycle in Γ = that same cycle.
    fn identity_instance(word: &str) -> AdjunctionInstance {
        let word = w(word);
        let rank = word.max_index();
        let s = word_to_cycle(&word, rank).unwrap();
        let mut gamma = s.clone();
        gamma.set_base(None);
        let p = s.clone();
        let ident = GraphMorphism::identity(&s);
        AdjunctionInstance {
            rank,
            gamma,
            s,
            p,
            lambda: ident.clone(),
            sigma: ident,
        }
    }

    #[test]
    fn empty_p_gives_disjoint_union() {
        let word = w("ab");
        let s = word_to_cycle(&word, 2).unwrap();
        let gamma = LabeledGraph::rose(2);
        let p = LabeledGraph::new(2);
        let inst = AdjunctionInstance {
            rank: 2,
            gamma: gamma.clone(),
            s: s.clone(),
            p,
            lambda: GraphMorphism {
                vertex_map: BTreeMap::new(),
                edge_map: BTreeMap::new(),
            },
            sigma: GraphMorphism {
                vertex_map: BTreeMap::new(),
                edge_map: BTreeMap::new(),
            },
        };
        let space = build(&inst).unwrap();
        assert_eq!(
            space.gamma_u.vertex_count(),
            gamma.vertex_count() + s.vertex_count()
        );
        assert_eq!(space.gamma_u.edge_count(), gamma.edge_count() + s.edge_count());
        assert_eq!(space.chi_w, betti_euler(&gamma).2 + betti_euler(&s).2);
    }

    #[test]
    fn single_embedded_circle_is_independent_but_weakly_dependent() {
        // Every Γ-edge is hit exactly once, so the whole circle is boundary,
        // yet each fiber meets it only once.
        let inst = identity_instance("abAB");
        let space = build(&inst).unwrap();
        let class = classify_dependence(&space);
        assert!(class.independent, "a free edge exists");
        assert!(!class.strongly_independent);
    }

    #[test]
    fn two_disjoint_copies_are_strongly_independent() {
        // P = two circles over w, mapped onto two disjoint copies of the
        // w-cycle: every edge fiber carries two boundary edges, so the
        // inequality is not asserted.
        let word = w("abAB");
        let s = word_to_cycle(&word, 2).unwrap();
        let mut gamma = LabeledGraph::new(2);
        let mut p = LabeledGraph::new(2);
        let mut lambda_v = BTreeMap::new();
        let mut lambda_e = BTreeMap::new();
        let mut sigma_v = BTreeMap::new();
        let mut sigma_e = BTreeMap::new();
        for copy in 0..2u32 {
            let base = copy * 4;
            for vtx in s.vertices() {
                gamma.add_vertex(base + vtx);
                p.add_vertex(base + vtx);
                lambda_v.insert(base + vtx, base + vtx);
                sigma_v.insert(base + vtx, vtx);
            }
            for e in s.edges() {
                gamma.add_edge(base + e.id, base + e.from, base + e.to, e.label);
                p.add_edge(base + e.id, base + e.from, base + e.to, e.label);
                lambda_e.insert(base + e.id, base + e.id);
                sigma_e.insert(base + e.id, e.id);
            }
        }
        let inst = AdjunctionInstance {
            rank: 2,
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
        };
        let space = build(&inst).unwrap();
        let class = classify_dependence(&space);
        assert!(class.independent && class.strongly_independent);
        let st = find_stacking(&space.s_walk.word, 2).unwrap();
        let report = verify_dependence_theorem(&inst, &st).unwrap();
        assert!(report.checklist.all_hold());
        assert!(!report.inequality_asserted, "strongly independent: nothing asserted");
    }

    #[test]
    fn identity_gluing_gives_gamma() {
        let inst = identity_instance("abAB");
        let space = build(&inst).unwrap();
        assert_eq!(space.gamma_u.vertex_count(), inst.gamma.vertex_count());
        assert_eq!(space.gamma_u.edge_count(), inst.gamma.edge_count());
        assert!(crate::graph::isomorphic(&space.gamma_u, &{
            let mut g = inst.gamma.clone();
            g.set_base(None);
            g
        }));
        // All fibers are single edges and points: no A^± anywhere.
        let st = find_stacking(&space.s_walk.word, inst.rank).unwrap();
        let filt = filtration(&space, &st).unwrap();
        assert_eq!(filt.chi_c, 0);
        assert_eq!(filt.max_dim_a, 0);
    }

    #[test]
    fn borromean_numbers() {
        let inst = borromean_instance();
        let space = build(&inst).unwrap();
        assert_eq!(betti_euler(&inst.gamma).2, -3);
        assert_eq!(inst.sigma_covering_degree(), Some(3));
        assert_eq!(betti_euler(&space.gamma_u).2, -1);
        let (_, b1, _) = betti_euler(&space.gamma_u);
        assert_eq!(b1, 2, "free image of rank two");
        assert!(space.boundary.is_empty(), "dependent");
        assert_eq!(space.chi_w, -3);
        assert!(check_diagrammatic_irreducibility(&inst).unwrap().is_ok());

        let st = find_stacking(&space.s_walk.word, 2).unwrap();
        let report = verify_dependence_theorem(&inst, &st).unwrap();
        assert!(report.checklist.all_hold());
        assert!(!report.classification.independent);
        assert!(report.inequality_asserted);
        assert!(report.inequality_holds);
        assert!(report.equality, "-1 <= -1 with equality");
        assert_eq!(report.chi_c, Some(2));
        assert_eq!(report.chi_w, report.chi_gamma_u - report.chi_c.unwrap());
        assert!(report.w_cycles_asserted && report.w_cycles_holds);
    }

    #[test]
    fn di_failures_are_witnessed() {
        // Two P-edges with the same (Γ-edge, S-edge) image pair.
        let word = w("aa");
        let s = word_to_cycle(&word, 1).unwrap();
        let mut gamma = LabeledGraph::new(1);
        gamma.add_vertex(0);
        gamma.add_edge(0, 0, 0, 1);
        let mut p = LabeledGraph::new(1);
        for v in 0..4 {
            p.add_vertex(v);
        }
        p.add_edge(0, 0, 1, 1);
        p.add_edge(1, 1, 0, 1);
        p.add_edge(2, 2, 3, 1);
        p.add_edge(3, 3, 2, 1);
        let lambda = GraphMorphism {
            vertex_map: [(0, 0), (1, 0), (2, 0), (3, 0)].into(),
            edge_map: [(0, 0), (1, 0), (2, 0), (3, 0)].into(),
        };
        let sigma = GraphMorphism {
            vertex_map: [(0, 0), (1, 1), (2, 0), (3, 1)].into(),
            edge_map: [(0, 0), (1, 1), (2, 0), (3, 1)].into(),
        };
        let inst = AdjunctionInstance {
            rank: 1,
            gamma,
            s,
            p,
            lambda,
            sigma,
        };
        match check_diagrammatic_irreducibility(&inst).unwrap() {
            Err(DiFailure::RhoNotInjective { .. }) => {}
            other => panic!("expected rho injectivity failure, got {other:?}"),
        }
    }

    #[test]
    fn updown_examples() {
        // Single edge c-u: both endpoints good.
        let b = Bipartite {
            c_count: 1,
            u_count: 1,
            edges: vec![(0, 0)],
        };
        let good = updown_check(&b, &[0]).unwrap();
        assert_eq!(good.len(), 2);

        // Path u1 - c - u2: the leaves are good, c is not.
        let b = Bipartite {
            c_count: 1,
            u_count: 2,
            edges: vec![(0, 0), (0, 1)],
        };
        let good = updown_check(&b, &[0]).unwrap();
        assert_eq!(
            good,
            vec![GoodVertex::U(0), GoodVertex::U(1)],
            "dim A = 0 != valence - 1 = 1 for the center"
        );

        // Star with center u of valence 3: the three C-leaves are good.
        let b = Bipartite {
            c_count: 3,
            u_count: 1,
            edges: vec![(0, 0), (1, 0), (2, 0)],
        };
        let good = updown_check(&b, &[0, 1, 2]).unwrap();
        assert_eq!(
            good,
            vec![GoodVertex::C(0), GoodVertex::C(1), GoodVertex::C(2)]
        );
    }

    #[test]
    fn updown_rejects_bad_input() {
        let not_simple = Bipartite {
            c_count: 1,
            u_count: 1,
            edges: vec![(0, 0), (0, 0)],
        };
        assert!(matches!(good_vertices(&not_simple, &[0]), Err(Error::Domain(_))));
        let disconnected = Bipartite {
            c_count: 1,
            u_count: 2,
            edges: vec![(0, 0)],
        };
        assert!(matches!(good_vertices(&disconnected, &[0]), Err(Error::Domain(_))));
    }

    #[test]
    fn figure_filtration_pattern() {
        // A 6+6-vertex, 18-edge connected simple bipartite graph whose A^+
        // increments along c1 < ... < c6 read 0,0,2,2,1,2 with b1 = 7 and
        // chi = -6. Neighborhoods: each c has valence three.
        let neighbors = [
            [0, 1, 2],
            [3, 4, 5],
            [0, 1, 2],
            [3, 4, 5],
            [0, 1, 3],
            [3, 4, 5],
        ];
        let mut edges = Vec::new();
        for (c, ns) in neighbors.iter().enumerate() {
            for &u in ns {
                edges.push((c, u));
            }
        }
        let b = Bipartite {
            c_count: 6,
            u_count: 6,
            edges,
        };
        assert!(b.is_simple() && b.is_connected());
        assert_eq!(b.b1(), 7);
        let order = [0, 1, 2, 3, 4, 5];
        let (plus, _) = sublevel_dims(&b, &order);
        assert_eq!(plus, vec![0, 0, 2, 2, 1, 2]);
        assert!(updown_check(&b, &order).unwrap().len() >= 2);
    }

    #[test]
    fn instance_round_trip() {
        let inst = borromean_instance();
        let alphabet = Alphabet::canonical(2);
        let text = write_instance(&inst, &alphabet);
        let parsed = parse_instance(&text).unwrap();
        let text2 = write_instance(&parsed, &alphabet);
        assert_eq!(text, text2);
        let space = build(&parsed).unwrap();
        assert_eq!(betti_euler(&space.gamma_u).2, -1);
    }

    #[test]
    fn commuting_square_is_enforced() {
        let mut inst = identity_instance("ab");
        // Break sigma: send an edge to a different-labeled edge of S.
        let ids: Vec<CellId> = inst.s.edges().map(|e| e.id).collect();
        inst.sigma.edge_map.insert(ids[0], ids[1]);
        assert!(inst.validate().is_err());
    }
}
