//! Stackings of immersed loops in a rose.
//!
//! A stacking of w: S -> Omega is a total order on each fiber of w over the
//! cells of Omega such that every edge fiber's order is the common pullback
//! of its two endpoint orders. Over a rose there is one vertex fiber (all
//! |w| vertices of the circle) and one edge fiber per petal, so the pullback
//! condition says: for same-labeled edges e, e' of S,
//! iota(e) < iota(e') exactly when tau(e) < tau(e').
//!
//! That is a binary constraint network on the order relation of vertex
//! pairs. The search keeps an order matrix with three states per pair,
//! ties pairs that the pullback condition forces equal (or opposite) into
//! signed union-find classes, and backtracks with transitive-closure
//! propagation. Exhausting the search is a proof that no stacking exists,
//! which is exercised on proper powers.

use crate::words::{maximal_root, Word};
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Total orders on the fibers of w, cells named by position index in w:
/// vertex i is the start of letter i, edge i carries letter i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stacking {
    /// All |w| vertex positions in increasing order.
    pub vertex_fiber: Vec<usize>,
    /// Per petal, the edge positions in increasing order.
    pub edge_fibers: BTreeMap<u32, Vec<usize>>,
}

/// Geometric endpoints of the i-th edge of the w-cycle.
fn edge_endpoints(w: &Word, i: usize) -> (usize, usize, u32) {
    let n = w.len();
    let l = w.letters()[i];
    let succ = (i + 1) % n;
    if l > 0 {
        (i, succ, l as u32)
    } else {
        (succ, i, (-l) as u32)
    }
}

struct ParityDsu {
    parent: Vec<usize>,
    /// Parity relative to parent: true means opposite value.
    parity: Vec<bool>,
}

impl ParityDsu {
    fn new(n: usize) -> Self {
        ParityDsu {
            parent: (0..n).collect(),
            parity: vec![false; n],
        }
    }

    fn find(&mut self, x: usize) -> (usize, bool) {
        if self.parent[x] == x {
            return (x, false);
        }
        let parent = self.parent[x];
        let (root, parent_parity) = self.find(parent);
        self.parent[x] = root;
        self.parity[x] ^= parent_parity;
        (root, self.parity[x])
    }

    /// Declares value(a) == value(b) XOR rel. Returns false on conflict.
    fn union(&mut self, a: usize, b: usize, rel: bool) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return (pa ^ pb) == rel;
        }
        self.parent[rb] = ra;
        self.parity[rb] = pa ^ pb ^ rel;
        true
    }
}

/// One order variable between two vertex positions, as a member of its
/// constraint class.
#[derive(Clone, Copy)]
struct PairRef {
    lo: usize,
    hi: usize,
    /// True when "lo < hi" equals the class value, false when inverted.
    same: bool,
}

struct Search {
    n: usize,
    /// ord[a*n+b]: 0 unknown, 1 means a < b, -1 means a > b.
    ord: Vec<i8>,
    /// Members per signed union-find class of pair variables.
    classes: Vec<Vec<PairRef>>,
    /// Class index and `same` flag per pair (lo * n + hi).
    class_of: Vec<(usize, bool)>,
}

impl Search {
    fn get(&self, a: usize, b: usize) -> i8 {
        self.ord[a * self.n + b]
    }

    /// Sets a < b with class and transitivity propagation. Records every
    /// newly decided ordered pair in `trail`.
    fn set_less(&mut self, a: usize, b: usize, trail: &mut Vec<(usize, usize)>) -> bool {
        let mut queue = vec![(a, b)];
        while let Some((x, y)) = queue.pop() {
            if x == y {
                return false;
            }
            match self.get(x, y) {
                1 => continue,
                -1 => return false,
                _ => {}
            }
            self.ord[x * self.n + y] = 1;
            self.ord[y * self.n + x] = -1;
            trail.push((x, y));

            // The whole signed class of {x,y} is decided with this pair.
            let (lo, hi, value) = if x < y { (x, y, true) } else { (y, x, false) };
            let (class, same) = self.class_of[lo * self.n + hi];
            let class_value = if same { value } else { !value };
            for m in &self.classes[class] {
                let v = if m.same { class_value } else { !class_value };
                let (p, q) = if v { (m.lo, m.hi) } else { (m.hi, m.lo) };
                if self.get(p, q) != 1 {
                    queue.push((p, q));
                }
            }

            // Transitive closure: predecessors of x before successors of y.
            let preds: Vec<usize> = (0..self.n).filter(|&k| self.get(k, x) == 1).collect();
            let succs: Vec<usize> = (0..self.n).filter(|&k| self.get(y, k) == 1).collect();
            for &p in preds.iter().chain(std::iter::once(&x)) {
                for &s in succs.iter().chain(std::iter::once(&y)) {
                    if p != x || s != y {
                        if self.get(p, s) != 1 {
                            queue.push((p, s));
                        }
                    }
                }
            }
        }
        true
    }

    fn undo(&mut self, trail: &[(usize, usize)], from: usize) {
        for &(x, y) in &trail[from..] {
            self.ord[x * self.n + y] = 0;
            self.ord[y * self.n + x] = 0;
        }
    }

    fn solve(&mut self, trail: &mut Vec<(usize, usize)>) -> bool {
        // Branch on an unknown pair from the largest class first.
        let mut choice: Option<(usize, usize)> = None;
        let mut best_size = 0usize;
        for class in &self.classes {
            if class.len() <= best_size {
                continue;
            }
            if let Some(m) = class.iter().find(|m| self.get(m.lo, m.hi) == 0) {
                choice = Some((m.lo, m.hi));
                best_size = class.len();
            }
        }
        let Some((a, b)) = choice else {
            return true;
        };
        for (x, y) in [(a, b), (b, a)] {
            let mark = trail.len();
            if self.set_less(x, y, trail) && self.solve(trail) {
                return true;
            }
            self.undo(trail, mark);
            trail.truncate(mark);
        }
        false
    }
}

/// Exhaustive backtracking search for a stacking, with no indivisibility
/// precondition. Returns None only after the whole space is refuted.
pub fn search_stacking(w: &Word) -> Option<Stacking> {
    let n = w.len();
    if n == 0 {
        return None;
    }
    if n == 1 {
        let (_, _, lab) = edge_endpoints(w, 0);
        return Some(Stacking {
            vertex_fiber: vec![0],
            edge_fibers: BTreeMap::from([(lab, vec![0])]),
        });
    }
    // Group edges by label and tie the order of iota endpoints to the order
    // of tau endpoints for every same-label pair.
    let mut by_label: BTreeMap<u32, Vec<(usize, usize, usize)>> = BTreeMap::new();
    for i in 0..n {
        let (f, t, lab) = edge_endpoints(w, i);
        by_label.entry(lab).or_default().push((i, f, t));
    }
    let mut dsu = ParityDsu::new(n * n);
    let norm = |a: usize, b: usize| -> (usize, bool) {
        // Variable of the unordered pair; value true means lesser id first.
        if a < b {
            (a * n + b, false)
        } else {
            (b * n + a, true)
        }
    };
    for edges in by_label.values() {
        for (i, &(_, f1, t1)) in edges.iter().enumerate() {
            for &(_, f2, t2) in edges.iter().skip(i + 1) {
                debug_assert!(f1 != f2 && t1 != t2, "cycle over a rose is immersed");
                let (vi, pi) = norm(f1, f2);
                let (vt, pt) = norm(t1, t2);
                if !dsu.union(vi, vt, pi ^ pt) {
                    return None;
                }
            }
        }
    }
    // Gather the pair variables into their signed classes.
    let mut class_index: BTreeMap<usize, usize> = BTreeMap::new();
    let mut classes: Vec<Vec<PairRef>> = Vec::new();
    let mut class_of = vec![(usize::MAX, true); n * n];
    for lo in 0..n {
        for hi in lo + 1..n {
            let (root, parity) = dsu.find(lo * n + hi);
            let idx = *class_index.entry(root).or_insert_with(|| {
                classes.push(Vec::new());
                classes.len() - 1
            });
            let same = !parity;
            classes[idx].push(PairRef { lo, hi, same });
            class_of[lo * n + hi] = (idx, same);
        }
    }
    let mut search = Search {
        n,
        ord: vec![0; n * n],
        classes,
        class_of,
    };
    let mut trail = Vec::new();
    if !search.solve(&mut trail) {
        return None;
    }
    // Read the total order off the matrix.
    let mut vertex_fiber: Vec<usize> = (0..n).collect();
    vertex_fiber.sort_by(|&a, &b| {
        if search.get(a, b) == 1 {
            std::cmp::Ordering::Less
        } else {
            std::cmp::Ordering::Greater
        }
    });
    let rank_of: Vec<usize> = {
        let mut r = vec![0; n];
        for (i, &v) in vertex_fiber.iter().enumerate() {
            r[v] = i;
        }
        r
    };
    let mut edge_fibers: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (lab, edges) in by_label {
        let mut positions: Vec<usize> = edges.iter().map(|&(i, _, _)| i).collect();
        positions.sort_by_key(|&i| rank_of[edge_endpoints(w, i).0]);
        edge_fibers.insert(lab, positions);
    }
    let stacking = Stacking {
        vertex_fiber,
        edge_fibers,
    };
    debug_assert_eq!(verify_stacking(w, &stacking), Ok(true));
    Some(stacking)
}

/// Finds a stacking of an indivisible cyclically reduced loop. Divisible or
/// trivial input is a domain error; search failure on valid input would
/// contradict the existence guarantee and is reported loudly.
pub fn find_stacking(w: &Word, rank: usize) -> Result<Stacking> {
    if w.is_empty() {
        return Err(Error::Domain("find_stacking of the trivial word".into()));
    }
    if !w.is_cyclically_reduced() {
        return Err(Error::Domain(
            "find_stacking requires a cyclically reduced word".into(),
        ));
    }
    if w.max_index() > rank {
        return Err(Error::Input(format!(
            "word uses generator {} beyond rank {rank}",
            w.max_index()
        )));
    }
    let root = maximal_root(w)?;
    if root.exponent >= 2 {
        return Err(Error::Domain(format!(
            "word is the proper power root^{}; stackings require an indivisible loop",
            root.exponent
        )));
    }
    search_stacking(w).ok_or_else(|| {
        Error::Falsified(
            "exhaustive search found no stacking of an indivisible loop; \
             this contradicts the stacking existence lemma"
                .into(),
        )
    })
}

/// Checks the pullback condition: every edge fiber's order agrees with the
/// order induced through iota and through tau. Fiber mismatches (missing or
/// extra cells) are malformed input.
pub fn verify_stacking(w: &Word, s: &Stacking) -> Result<bool> {
    let n = w.len();
    let mut seen = vec![false; n];
    if s.vertex_fiber.len() != n {
        return Err(Error::Input("vertex fiber has the wrong size".into()));
    }
    for &v in &s.vertex_fiber {
        if v >= n || seen[v] {
            return Err(Error::Input(format!("vertex fiber malformed at {v}")));
        }
        seen[v] = true;
    }
    let mut expected: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        expected.entry(edge_endpoints(w, i).2).or_default().push(i);
    }
    if expected.keys().collect::<Vec<_>>() != s.edge_fibers.keys().collect::<Vec<_>>() {
        return Err(Error::Input("edge fibers keyed by the wrong labels".into()));
    }
    for (lab, positions) in &s.edge_fibers {
        let mut sorted = positions.clone();
        sorted.sort_unstable();
        if &sorted != expected.get(lab).unwrap() {
            return Err(Error::Input(format!("edge fiber {lab} has wrong cells")));
        }
    }
    let rank_of: Vec<usize> = {
        let mut r = vec![0; n];
        for (i, &v) in s.vertex_fiber.iter().enumerate() {
            r[v] = i;
        }
        r
    };
    for positions in s.edge_fibers.values() {
        for (i, &e1) in positions.iter().enumerate() {
            for &e2 in positions.iter().skip(i + 1) {
                // e1 listed before e2; both endpoint orders must agree.
                let (f1, t1, _) = edge_endpoints(w, e1);
                let (f2, t2, _) = edge_endpoints(w, e2);
                if rank_of[f1] >= rank_of[f2] || rank_of[t1] >= rank_of[t2] {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;

    fn w(s: &str) -> Word {
        Alphabet::canonical(26).parse_word(s).unwrap()
    }

    #[test]
    fn trivial_single_letter() {
        let s = find_stacking(&w("a"), 1).unwrap();
        assert_eq!(s.vertex_fiber, vec![0]);
        assert_eq!(verify_stacking(&w("a"), &s), Ok(true));
    }

    #[test]
    fn commutator_has_stacking() {
        let word = w("abAB");
        let s = find_stacking(&word, 2).unwrap();
        assert_eq!(verify_stacking(&word, &s), Ok(true));
    }

    #[test]
    fn figure_word_has_stacking() {
        // The stacked word from the figure: u = a, v = b.
        let word = w("aababbAABABB");
        assert_eq!(word.len(), 12);
        assert_eq!(maximal_root(&word).unwrap().exponent, 1);
        let s = find_stacking(&word, 2).unwrap();
        assert_eq!(verify_stacking(&word, &s), Ok(true));
    }

    #[test]
    fn divisible_words_are_domain_errors() {
        assert!(matches!(find_stacking(&w("aa"), 1), Err(Error::Domain(_))));
        assert!(matches!(find_stacking(&w("abab"), 2), Err(Error::Domain(_))));
        assert!(matches!(find_stacking(&w(""), 2), Err(Error::Domain(_))));
    }

    #[test]
    fn no_stacking_for_small_powers() {
        for v in ["a", "ab", "aab", "abAB"] {
            let root = w(v);
            for k in [2usize, 3] {
                let word = root.pow(k);
                assert!(
                    search_stacking(&word).is_none(),
                    "power {v}^{k} must not stack"
                );
            }
        }
    }

    #[test]
    fn mutated_stacking_fails_verification() {
        let word = w("abAB");
        let mut s = find_stacking(&word, 2).unwrap();
        let fiber = s.edge_fibers.get_mut(&1).unwrap();
        assert_eq!(fiber.len(), 2);
        fiber.swap(0, 1);
        assert_eq!(verify_stacking(&word, &s), Ok(false));
    }

    #[test]
    fn reversal_symmetry() {
        for word in ["abAB", "aababb", "aabAbb"] {
            let word = w(word);
            let mut s = find_stacking(&word, 2).unwrap();
            s.vertex_fiber.reverse();
            for fiber in s.edge_fibers.values_mut() {
                fiber.reverse();
            }
            assert_eq!(
                verify_stacking(&word, &s),
                Ok(true),
                "reverse of a stacking stacks"
            );
        }
    }

    #[test]
    fn fiber_mismatch_is_malformed() {
        let word = w("abAB");
        let mut s = find_stacking(&word, 2).unwrap();
        s.vertex_fiber.pop();
        assert!(verify_stacking(&word, &s).is_err());
    }

    #[test]
    fn exhaustive_small_round_trip() {
        // Every indivisible cyclically reduced rank-2 word of length <= 7
        // admits a stacking that verifies.
        let letters = [1i32, -1, 2, -2];
        let mut stack: Vec<Vec<i32>> = vec![vec![]];
        let mut found = 0usize;
        while let Some(cur) = stack.pop() {
            if !cur.is_empty() {
                let word = Word::reduce(&cur);
                if word.len() == cur.len()
                    && word.is_cyclically_reduced()
                    && maximal_root(&word).unwrap().exponent == 1
                {
                    let s = find_stacking(&word, 2).unwrap();
                    assert_eq!(verify_stacking(&word, &s), Ok(true));
                    found += 1;
                }
            }
            if cur.len() < 7 {
                for &l in &letters {
                    let mut next = cur.clone();
                    next.push(l);
                    stack.push(next);
                }
            }
        }
        assert!(found > 2000);
    }
}
