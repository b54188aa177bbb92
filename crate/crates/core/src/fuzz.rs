//! Deterministic instance generators for the property-fuzzing harnesses:
//! random words, random immersed graphs, random simple connected bipartite
//! graphs, random dependence-theorem instances and random branched maps.
//! Everything is driven by a seeded ChaCha stream so runs replay exactly.

use crate::adjunction::{AdjunctionInstance, Bipartite};
use crate::graph::{fold, CellId, GraphMorphism, LabeledGraph, LiftOutcome};
use crate::twocomplex::{BranchedMap, Face, SignedEdge, TwoComplex};
use crate::words::{maximal_root, Letter, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly random cyclically reduced word of exactly the given length.
pub fn random_cyclic_word(rng: &mut ChaCha8Rng, rank: usize, len: usize) -> Word {
    assert!(rank >= 1 && len >= 1);
    loop {
        let mut letters: Vec<Letter> = Vec::with_capacity(len);
        for _ in 0..len {
            loop {
                let g = rng.gen_range(1..=rank as Letter);
                let l = if rng.gen::<bool>() { g } else { -g };
                if letters.last() == Some(&-l) {
                    continue;
                }
                letters.push(l);
                break;
            }
        }
        let word = Word::reduce(&letters);
        if word.len() == len && word.is_cyclically_reduced() {
            return word;
        }
    }
}

pub fn random_indivisible_word(
    rng: &mut ChaCha8Rng,
    rank: usize,
    min_len: usize,
    max_len: usize,
) -> Word {
    loop {
        let len = rng.gen_range(min_len..=max_len);
        let word = random_cyclic_word(rng, rank, len);
        if maximal_root(&word).map(|r| r.exponent == 1).unwrap_or(false) {
            return word;
        }
    }
}

/// A random graph over the rose folded to an immersion; at most `max_edges`
/// edges survive the fold.
pub fn random_immersed_graph(rng: &mut ChaCha8Rng, rank: usize, max_edges: usize) -> LabeledGraph {
    let nv = rng.gen_range(1..=5u32);
    let ne = rng.gen_range(1..=max_edges);
    let mut g = LabeledGraph::new(rank);
    for v in 0..nv {
        g.add_vertex(v);
    }
    for e in 0..ne as u32 {
        let from = rng.gen_range(0..nv);
        let to = rng.gen_range(0..nv);
        let label = rng.gen_range(1..=rank as u32);
        g.add_edge(e, from, to, label);
    }
    let (folded, _) = fold(&g);
    folded
}

/// A random simple connected bipartite graph with both sides nonempty,
/// together with a random order on the C side.
pub fn random_bipartite(
    rng: &mut ChaCha8Rng,
    max_c: usize,
    max_u: usize,
) -> (Bipartite, Vec<usize>) {
    let c_count = rng.gen_range(1..=max_c);
    let u_count = rng.gen_range(1..=max_u);
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    // Spanning connectivity: introduce vertices in a shuffled order, each
    // attached to an already-present vertex of the other side.
    edges.insert((0, 0));
    let mut pending: Vec<(bool, usize)> = (1..c_count)
        .map(|c| (true, c))
        .chain((1..u_count).map(|u| (false, u)))
        .collect();
    for i in (1..pending.len()).rev() {
        pending.swap(i, rng.gen_range(0..=i));
    }
    let mut cs = vec![0usize];
    let mut us = vec![0usize];
    for (is_c, v) in pending {
        if is_c {
            edges.insert((v, us[rng.gen_range(0..us.len())]));
            cs.push(v);
        } else {
            edges.insert((cs[rng.gen_range(0..cs.len())], v));
            us.push(v);
        }
    }
    let extra = rng.gen_range(0..=2 * (c_count + u_count));
    for _ in 0..extra {
        edges.insert((rng.gen_range(0..c_count), rng.gen_range(0..u_count)));
    }
    let b = Bipartite {
        c_count,
        u_count,
        edges: edges.into_iter().collect(),
    };
    debug_assert!(b.is_simple() && b.is_connected());
    let mut order: Vec<usize> = (0..c_count).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    (b, order)
}

/// Orbits of the w-translation on an immersed graph: each orbit is a cycle
/// v -> end of the w-lift -> ... -> v, and its face is the concatenated
/// lift path (a closed lift of w^{orbit length}).
pub fn translation_orbits(graph: &LabeledGraph, w: &Word) -> Vec<(Vec<CellId>, Face)> {
    let mut step: BTreeMap<CellId, (CellId, Vec<SignedEdge>)> = BTreeMap::new();
    for v in graph.vertices() {
        match graph.trace(v, w) {
            LiftOutcome::Closed { path } => {
                step.insert(v, (v, decode_path(&path)));
            }
            LiftOutcome::Open { path, end } => {
                step.insert(v, (end, decode_path(&path)));
            }
            LiftOutcome::NoLift { .. } => {}
        }
    }
    let mut seen: BTreeSet<CellId> = BTreeSet::new();
    let mut orbits = Vec::new();
    for v in graph.vertices() {
        if seen.contains(&v) || !step.contains_key(&v) {
            continue;
        }
        let mut orbit = vec![v];
        let mut path = step[&v].1.clone();
        let mut at = step[&v].0;
        let mut closed = at == v;
        while !closed && orbit.len() <= graph.vertex_count() {
            if !step.contains_key(&at) || seen.contains(&at) || orbit.contains(&at) {
                break;
            }
            orbit.push(at);
            path.extend_from_slice(&step[&at].1);
            at = step[&at].0;
            closed = at == v;
        }
        if closed {
            seen.extend(orbit.iter().copied());
            orbits.push((orbit, Face { path }));
        }
    }
    orbits
}

fn decode_path(path: &[i64]) -> Vec<SignedEdge> {
    path.iter()
        .map(|&r| crate::graph::decode_edge_ref(r))
        .collect()
}

/// A random branched map over the one-relator complex of `relator`: the
/// domain is a random immersed graph with a random nonempty set of
/// translation-orbit faces of total degree at most `max_degree`.
pub fn random_branched_map(
    rng: &mut ChaCha8Rng,
    relator: &Word,
    rank: usize,
    max_degree: usize,
    max_edges: usize,
) -> Option<BranchedMap> {
    let x = crate::twocomplex::one_relator_complex(relator, rank).ok()?;
    let gamma = random_immersed_graph(rng, rank, max_edges);
    if gamma.edge_count() > max_edges {
        return None;
    }
    let orbits = translation_orbits(&gamma, relator);
    if orbits.is_empty() {
        return None;
    }
    let mut budget = max_degree;
    let mut faces = Vec::new();
    let mut indices: Vec<usize> = (0..orbits.len()).collect();
    for i in (1..indices.len()).rev() {
        indices.swap(i, rng.gen_range(0..=i));
    }
    for &i in &indices {
        let deg = orbits[i].0.len();
        if deg <= budget && (faces.is_empty() || rng.gen::<bool>()) {
            budget -= deg;
            faces.push(orbits[i].1.clone());
        }
    }
    if faces.is_empty() {
        return None;
    }
    // Restrict the skeleton to the cells the faces actually traverse, so
    // the complex is connected whenever the face set is.
    let mut used_edges: BTreeSet<CellId> = BTreeSet::new();
    for f in &faces {
        used_edges.extend(f.path.iter().map(|&(e, _)| e));
    }
    let mut skeleton = LabeledGraph::new(rank);
    for e in gamma.edges().filter(|e| used_edges.contains(&e.id)) {
        if !skeleton.has_vertex(e.from) {
            skeleton.add_vertex(e.from);
        }
        if !skeleton.has_vertex(e.to) {
            skeleton.add_vertex(e.to);
        }
        skeleton.add_edge(e.id, e.from, e.to, e.label);
    }
    let y = TwoComplex { skeleton, faces };
    if !y.is_connected() {
        return None;
    }
    BranchedMap::infer(y, x).ok()
}

pub struct DependenceFuzzParams {
    pub rank: usize,
    pub max_s_len: usize,
    pub max_gamma_edges: usize,
    pub max_degree: usize,
}

impl Default for DependenceFuzzParams {
    fn default() -> Self {
        DependenceFuzzParams {
            rank: 2,
            max_s_len: 8,
            max_gamma_edges: 12,
            max_degree: 4,
        }
    }
}

/// A random diagrammatically irreducible instance built from translation
/// orbits in an immersed Γ. Lifts through an immersed graph never share an
/// (edge, relator position) pair, so ρ is injective and DI holds by
/// construction.
pub fn random_dependence_instance(
    rng: &mut ChaCha8Rng,
    params: &DependenceFuzzParams,
) -> Option<(AdjunctionInstance, Word)> {
    let rank = if params.rank >= 3 && rng.gen::<bool>() {
        3
    } else {
        2.min(params.rank)
    };
    let len = rng.gen_range(2..=params.max_s_len);
    let w = random_cyclic_word(rng, rank, len);
    if maximal_root(&w).ok()?.exponent != 1 {
        return None;
    }
    let f = random_branched_map(rng, &w, rank, params.max_degree, params.max_gamma_edges)?;
    if f.y.skeleton.edge_count() > params.max_gamma_edges {
        return None;
    }
    Some((f.adjunction_instance(), w))
}

/// A random instance with a typically non-immersed Γ: quotient the circles
/// of P by a random vertex partition, then merge parallel edges only when
/// their σ-images differ, which keeps ρ injective.
pub fn random_quotient_instance(
    rng: &mut ChaCha8Rng,
    rank: usize,
    max_s_len: usize,
    max_gamma_edges: usize,
) -> Option<(AdjunctionInstance, Word)> {
    let len = rng.gen_range(2..=max_s_len);
    let w = random_cyclic_word(rng, rank, len);
    if maximal_root(&w).ok()?.exponent != 1 {
        return None;
    }
    let copies = rng.gen_range(1..=2usize);
    let total = copies * len;
    if total > 2 * max_gamma_edges {
        return None;
    }
    let s = crate::words::word_to_cycle(&w, rank).ok()?;

    // P: `copies` disjoint circles over w, each of covering degree one.
    let mut p = LabeledGraph::new(rank);
    let mut sigma_v = BTreeMap::new();
    let mut sigma_e = BTreeMap::new();
    for c in 0..copies {
        let base = (c * len) as u32;
        for j in 0..len as u32 {
            p.add_vertex(base + j);
            sigma_v.insert(base + j, j);
        }
        for j in 0..len {
            let letter = w.letters()[j];
            let id = base + j as u32;
            let (from, to) = (base + j as u32, base + ((j + 1) % len) as u32);
            if letter > 0 {
                p.add_edge(id, from, to, letter as u32);
            } else {
                p.add_edge(id, to, from, (-letter) as u32);
            }
            sigma_e.insert(id, j as u32);
        }
    }

    // Random vertex partition of P.
    let nv = total as u32;
    let classes = rng.gen_range(1..=total.min(6)) as u32;
    let mut class_of: BTreeMap<CellId, u32> = BTreeMap::new();
    for v in 0..nv {
        class_of.insert(v, rng.gen_range(0..classes));
    }
    // Merge parallel edges with equal endpoints and label when their
    // σ-positions differ.
    let mut gamma = LabeledGraph::new(rank);
    let used: BTreeSet<u32> = class_of.values().copied().collect();
    for &c in &used {
        gamma.add_vertex(c);
    }
    let mut lambda_v = BTreeMap::new();
    for v in 0..nv {
        lambda_v.insert(v, class_of[&v]);
    }
    let mut lambda_e = BTreeMap::new();
    let mut merged: BTreeMap<(u32, u32, u32), Vec<(CellId, u32)>> = BTreeMap::new();
    for e in p.edges() {
        let key = (class_of[&e.from], class_of[&e.to], e.label);
        merged.entry(key).or_default().push((e.id, sigma_e[&e.id]));
    }
    let mut next_id = 0u32;
    for ((from, to, label), group) in merged {
        // Split the group into sub-edges so that no two members of one
        // sub-edge share a σ-position.
        let mut buckets: Vec<(CellId, BTreeSet<u32>)> = Vec::new();
        for (pid, pos) in group {
            match buckets.iter_mut().find(|(_, seen)| !seen.contains(&pos)) {
                Some((gid, seen)) => {
                    seen.insert(pos);
                    lambda_e.insert(pid, *gid);
                }
                None => {
                    let gid = next_id;
                    next_id += 1;
                    gamma.add_edge(gid, from, to, label);
                    buckets.push((gid, BTreeSet::from([pos])));
                    lambda_e.insert(pid, gid);
                }
            }
        }
    }
    if gamma.edge_count() > max_gamma_edges {
        return None;
    }
    let instance = AdjunctionInstance {
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
    };
    instance.validate().ok()?;
    Some((instance, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjunction::{build, check_diagrammatic_irreducibility, classify_dependence};

    #[test]
    fn words_are_cyclically_reduced() {
        let mut rng = rng_from_seed(7);
        for _ in 0..200 {
            let w = random_cyclic_word(&mut rng, 3, 8);
            assert!(w.is_reduced() && w.is_cyclically_reduced());
            assert_eq!(w.len(), 8);
        }
    }

    #[test]
    fn bipartite_generator_contract() {
        let mut rng = rng_from_seed(11);
        for _ in 0..100 {
            let (b, order) = random_bipartite(&mut rng, 12, 12);
            assert!(b.is_simple());
            assert!(b.is_connected());
            assert_eq!(order.len(), b.c_count);
        }
    }

    #[test]
    fn dependence_generator_yields_di_instances() {
        let mut rng = rng_from_seed(23);
        let params = DependenceFuzzParams::default();
        let mut produced = 0;
        for _ in 0..300 {
            if let Some((inst, _)) = random_dependence_instance(&mut rng, &params) {
                assert!(check_diagrammatic_irreducibility(&inst).unwrap().is_ok());
                assert!(inst.sigma_covering_degree().is_some());
                let space = build(&inst).unwrap();
                let _ = classify_dependence(&space);
                produced += 1;
            }
        }
        assert!(produced > 50, "generator produced {produced} instances");
    }

    #[test]
    fn quotient_generator_yields_di_instances() {
        let mut rng = rng_from_seed(29);
        let mut produced = 0;
        let mut non_immersed = 0;
        for _ in 0..300 {
            if let Some((inst, _)) = random_quotient_instance(&mut rng, 2, 6, 12) {
                assert!(check_diagrammatic_irreducibility(&inst).unwrap().is_ok());
                if !inst.gamma.is_immersed() {
                    non_immersed += 1;
                }
                build(&inst).unwrap();
                produced += 1;
            }
        }
        assert!(produced > 50);
        assert!(non_immersed > 0, "the quotient generator should hit non-immersed Γ");
    }

    #[test]
    fn branched_generator_yields_valid_maps() {
        let mut rng = rng_from_seed(31);
        let mut produced = 0;
        for _ in 0..200 {
            let w = random_indivisible_word(&mut rng, 2, 2, 6);
            if let Some(f) = random_branched_map(&mut rng, &w, 2, 4, 10) {
                assert_eq!(
                    f.branching_excess() + f.y.faces.len() as i64,
                    f.degree_sum() as i64
                );
                produced += 1;
            }
        }
        assert!(produced > 30);
    }
}
