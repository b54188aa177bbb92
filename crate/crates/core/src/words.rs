//! Words in a free group over a finite symmetrized alphabet.
//!
//! Letters are signed generator indices: `k` is the k-th generator
//! (1-based), `-k` its inverse. Inversion is a sign flip, so no string
//! handling happens in inner loops. The ASCII convention at the I/O
//! boundary is lowercase for generators and uppercase for inverses.

use crate::graph::LabeledGraph;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Signed generator index; never zero.
pub type Letter = i32;

/// Names the generators of a free group. Index i (1-based) displays as
/// `names[i-1]` lowercase, its inverse as the same letter uppercase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<char>,
}

impl Alphabet {
    /// The canonical alphabet a, b, c, ... of the given rank.
    pub fn canonical(rank: usize) -> Self {
        assert!(rank >= 1 && rank <= 26, "rank must be in 1..=26");
        Alphabet {
            names: (0..rank).map(|i| (b'a' + i as u8) as char).collect(),
        }
    }

    /// Builds an alphabet from the distinct letters used in `text`,
    /// in alphabetical order. If `declared_rank` is given it must be at
    /// least the number of distinct letters; when all used letters fall
    /// within the first `declared_rank` letters of a..z the canonical
    /// alphabet is used, otherwise the used letters are compressed to
    /// indices 1..k and padded with unused letters.
    pub fn infer(text: &str, declared_rank: Option<usize>) -> Result<Self> {
        let mut used: Vec<char> = Vec::new();
        for ch in text.chars() {
            if ch.is_ascii_alphabetic() {
                let lower = ch.to_ascii_lowercase();
                if !used.contains(&lower) {
                    used.push(lower);
                }
            } else if !ch.is_whitespace() {
                return Err(Error::Input(format!("unknown letter {ch:?}")));
            }
        }
        used.sort_unstable();
        let k = used.len();
        match declared_rank {
            None => {
                if used.is_empty() {
                    // Empty word over an unspecified alphabet: rank 1 default.
                    return Ok(Alphabet::canonical(1));
                }
                let max_pos = (used[k - 1] as u8 - b'a') as usize + 1;
                if max_pos == k {
                    Ok(Alphabet::canonical(k))
                } else {
                    Ok(Alphabet { names: used })
                }
            }
            Some(r) => {
                if r < k {
                    return Err(Error::Input(format!(
                        "declared rank {r} but {k} distinct letters used"
                    )));
                }
                if r > 26 {
                    return Err(Error::Input(format!("rank {r} exceeds 26")));
                }
                let canonical = Alphabet::canonical(r);
                if used.iter().all(|c| canonical.names.contains(c)) {
                    Ok(canonical)
                } else {
                    let mut names = used;
                    for c in ('a'..='z').rev() {
                        if names.len() == r {
                            break;
                        }
                        if !names.contains(&c) {
                            names.push(c);
                        }
                    }
                    Ok(Alphabet { names })
                }
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    /// The signed index of an ASCII letter, or an input error.
    pub fn index_of(&self, ch: char) -> Result<Letter> {
        let lower = ch.to_ascii_lowercase();
        match self.names.iter().position(|&c| c == lower) {
            Some(i) => {
                let idx = (i + 1) as Letter;
                Ok(if ch.is_ascii_uppercase() { -idx } else { idx })
            }
            None => Err(Error::Input(format!("unknown letter {ch:?}"))),
        }
    }

    pub fn display_letter(&self, letter: Letter) -> char {
        let idx = letter.unsigned_abs() as usize;
        assert!(idx >= 1 && idx <= self.names.len(), "letter out of range");
        let c = self.names[idx - 1];
        if letter < 0 {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let mut letters = Vec::with_capacity(text.len());
        for ch in text.chars() {
            if ch.is_whitespace() {
                continue;
            }
            letters.push(self.index_of(ch)?);
        }
        Ok(Word::reduce(&letters))
    }

    pub fn display_word(&self, w: &Word) -> String {
        w.letters().iter().map(|&l| self.display_letter(l)).collect()
    }
}

/// A freely reduced word. The constructor reduces, so the no-adjacent-
/// cancellation invariant always holds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    /// Free reduction of a raw letter sequence: cancels adjacent inverse
    /// pairs to the unique shortest representative.
    pub fn reduce(raw: &[Letter]) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(raw.len());
        for &l in raw {
            debug_assert!(l != 0, "letters are nonzero signed indices");
            if stack.last() == Some(&-l) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word { letters: stack }
    }

    pub fn empty() -> Word {
        Word { letters: Vec::new() }
    }

    pub fn single(l: Letter) -> Word {
        assert!(l != 0);
        Word { letters: vec![l] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|p| p[0] != -p[1])
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => f != -l,
            _ => true,
        }
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|&l| -l).collect(),
        }
    }

    /// Concatenation followed by free reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut raw = self.letters.clone();
        raw.extend_from_slice(&other.letters);
        Word::reduce(&raw)
    }

    pub fn pow(&self, k: usize) -> Word {
        let mut raw = Vec::with_capacity(self.letters.len() * k);
        for _ in 0..k {
            raw.extend_from_slice(&self.letters);
        }
        Word::reduce(&raw)
    }

    pub fn rotated(&self, by: usize) -> Word {
        if self.letters.is_empty() {
            return self.clone();
        }
        let n = self.letters.len();
        let by = by % n;
        let mut raw = Vec::with_capacity(n);
        raw.extend_from_slice(&self.letters[by..]);
        raw.extend_from_slice(&self.letters[..by]);
        Word::reduce(&raw)
    }

    /// Largest generator index appearing, 0 for the empty word.
    pub fn max_index(&self) -> usize {
        self.letters.iter().map(|l| l.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Lexicographically least rotation; canonical representative of the
    /// cyclic word. Only meaningful for cyclically reduced words.
    pub fn min_rotation(&self) -> Word {
        let n = self.letters.len();
        if n == 0 {
            return self.clone();
        }
        let mut best = self.letters.clone();
        for by in 1..n {
            let mut cand = Vec::with_capacity(n);
            cand.extend_from_slice(&self.letters[by..]);
            cand.extend_from_slice(&self.letters[..by]);
            if cand < best {
                best = cand;
            }
        }
        Word { letters: best }
    }
}

/// Cyclic reduction: returns `(core, conjugator)` with
/// `conjugator * core * conjugator^-1` freely equal to the input.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let mut letters = w.letters.clone();
    let mut conj: Vec<Letter> = Vec::new();
    while letters.len() >= 2 && letters[0] == -letters[letters.len() - 1] {
        conj.push(letters[0]);
        letters.remove(0);
        letters.pop();
    }
    (Word { letters }, Word { letters: conj })
}

/// An indivisible root together with the maximal exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootDecomposition {
    pub root: Word,
    pub exponent: usize,
}

/// The maximal-root decomposition of a nonempty cyclically reduced word:
/// the unique indivisible `v` and maximal `k` with `v^k = w`. Each divisor
/// `d` of `|w|` is tested by comparing `w` against its rotation by `d`.
pub fn maximal_root(w: &Word) -> Result<RootDecomposition> {
    if w.is_empty() {
        return Err(Error::Domain("maximal_root of the empty word".into()));
    }
    if !w.is_cyclically_reduced() {
        return Err(Error::Domain(
            "maximal_root requires a cyclically reduced word".into(),
        ));
    }
    let n = w.len();
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        let ok = (0..n).all(|i| w.letters[i] == w.letters[(i + d) % n]);
        if ok {
            return Ok(RootDecomposition {
                root: Word {
                    letters: w.letters[..d].to_vec(),
                },
                exponent: n / d,
            });
        }
    }
    unreachable!("d = n always matches");
}

pub fn is_proper_power(w: &Word) -> Result<bool> {
    Ok(maximal_root(w)?.exponent >= 2)
}

/// The cycle graph of a cyclically reduced nonempty word: vertices are the
/// positions 0..|w|, edge i carries letter i, and traversing the cycle from
/// the basepoint spells w. The labeling is the morphism to the rank-n rose,
/// and cyclic reducedness makes it an immersion.
pub fn word_to_cycle(w: &Word, rank: usize) -> Result<LabeledGraph> {
    if w.is_empty() {
        return Err(Error::Domain("word_to_cycle of the empty word".into()));
    }
    if !w.is_cyclically_reduced() {
        return Err(Error::Domain(
            "word_to_cycle requires a cyclically reduced word (the morphism would not immerse)"
                .into(),
        ));
    }
    if w.max_index() > rank {
        return Err(Error::Input(format!(
            "word uses generator {} beyond rank {rank}",
            w.max_index()
        )));
    }
    let n = w.len() as u32;
    let mut g = LabeledGraph::new(rank);
    for v in 0..n {
        g.add_vertex(v);
    }
    for (i, &l) in w.letters.iter().enumerate() {
        let i = i as u32;
        let succ = (i + 1) % n;
        if l > 0 {
            g.add_edge(i, i, succ, l as u32);
        } else {
            g.add_edge(i, succ, i, (-l) as u32);
        }
    }
    g.set_base(Some(0));
    Ok(g)
}

/// Rank of the kernel of the induced map on abelianizations, computed as
/// (number of generators) minus the rational rank of the exponent-sum
/// matrix. Exact arithmetic via fraction-free Gaussian elimination.
pub fn abelianization_kernel_rank(generator_images: &[Word], ambient_rank: usize) -> usize {
    let n = generator_images.len();
    let mut m: Vec<Vec<i128>> = generator_images
        .iter()
        .map(|w| {
            let mut row = vec![0i128; ambient_rank];
            for &l in w.letters() {
                let idx = l.unsigned_abs() as usize - 1;
                row[idx] += if l > 0 { 1 } else { -1 };
            }
            row
        })
        .collect();
    n - matrix_rank(&mut m)
}

/// Rank over the rationals by Bareiss fraction-free elimination.
fn matrix_rank(m: &mut [Vec<i128>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    let mut prev_pivot: i128 = 1;
    let mut col = 0;
    while rank < rows && col < cols {
        let pivot_row = (rank..rows).find(|&r| m[r][col] != 0);
        let Some(pr) = pivot_row else {
            col += 1;
            continue;
        };
        m.swap(rank, pr);
        let pivot = m[rank][col];
        for r in rank + 1..rows {
            for c in col + 1..cols {
                m[r][c] = (m[r][c] * pivot - m[r][col] * m[rank][c]) / prev_pivot;
            }
            m[r][col] = 0;
        }
        prev_pivot = pivot;
        rank += 1;
        col += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Alphabet::canonical(26).parse_word(s).unwrap()
    }

    #[test]
    fn reduce_cancels_pairs() {
        assert_eq!(w("abB"), w("a"));
        assert_eq!(w(""), Word::empty());
        assert_eq!(w("aABb"), Word::empty());
    }

    #[test]
    fn reduce_is_idempotent_on_samples() {
        for s in ["abB", "aABb", "abcCBA", "aa", "baBA"] {
            let once = w(s);
            assert_eq!(Word::reduce(once.letters()), once);
        }
    }

    #[test]
    fn cyclic_reduce_peels_conjugation() {
        let (core, conj) = cyclic_reduce(&w("Bab"));
        assert_eq!(core, w("a"));
        assert_eq!(conj, w("B"));
        let (core, conj) = cyclic_reduce(&w("ab"));
        assert_eq!(core, w("ab"));
        assert!(conj.is_empty());
        // BAaba freely reduces to a before any peeling happens.
        let (core, conj) = cyclic_reduce(&w("BAaba"));
        assert_eq!(core, w("a"));
        assert!(conj.is_empty());
    }

    #[test]
    fn cyclic_reduce_conjugation_identity() {
        for s in ["Bab", "ab", "BAaba", "Aba", "BAcab"] {
            let input = w(s);
            let (core, conj) = cyclic_reduce(&input);
            assert!(core.is_cyclically_reduced());
            let back = conj.concat(&core).concat(&conj.inverse());
            assert_eq!(back, input);
        }
    }

    #[test]
    fn cyclic_core_is_shortest_conjugate() {
        // Brute force over all short conjugators.
        let alpha = Alphabet::canonical(2);
        let letters: Vec<Letter> = vec![1, -1, 2, -2];
        for s in ["Bab", "aabAA", "abAB", "bbaBB"] {
            let input = alpha.parse_word(s).unwrap();
            let (core, _) = cyclic_reduce(&input);
            let mut shortest = input.len();
            let mut stack = vec![Vec::<Letter>::new()];
            while let Some(g) = stack.pop() {
                let gw = Word::reduce(&g);
                let conj = gw.concat(&input).concat(&gw.inverse());
                shortest = shortest.min(conj.len());
                if g.len() < 3 {
                    for &l in &letters {
                        let mut next = g.clone();
                        next.push(l);
                        stack.push(next);
                    }
                }
            }
            assert_eq!(core.len(), shortest, "word {s}");
        }
    }

    #[test]
    fn maximal_root_examples() {
        let r = maximal_root(&w("abab")).unwrap();
        assert_eq!((r.root, r.exponent), (w("ab"), 2));
        let r = maximal_root(&w("abAB")).unwrap();
        assert_eq!((r.root, r.exponent), (w("abAB"), 1));
        let r = maximal_root(&w("aaa")).unwrap();
        assert_eq!((r.root, r.exponent), (w("a"), 3));
        assert!(maximal_root(&Word::empty()).is_err());
    }

    #[test]
    fn maximal_root_round_trip() {
        for s in ["abab", "aaa", "abAB", "aabaab", "abaaba"] {
            let word = w(s);
            let r = maximal_root(&word).unwrap();
            assert_eq!(r.root.pow(r.exponent), word);
            let again = maximal_root(&r.root).unwrap();
            assert_eq!(again.exponent, 1, "root of {s} is indivisible");
        }
    }

    #[test]
    fn cycle_graph_shape() {
        let g = word_to_cycle(&w("ab"), 2).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 2);
        assert!(g.is_immersed());
        let g = word_to_cycle(&w("aa"), 2).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.is_immersed());
        let g = word_to_cycle(&w("abAB"), 2).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(g.is_immersed());
        let (components, b1, chi) = crate::graph::betti_euler(&g);
        assert_eq!((components, b1, chi), (1, 1, 0));
    }

    #[test]
    fn cycle_graph_rejects_unreduced() {
        assert!(word_to_cycle(&Word { letters: vec![1, 2, -1, -1] }, 2).is_err());
    }

    #[test]
    fn kernel_rank_examples() {
        let a = Alphabet::canonical(2);
        // {a, bab^-1, b^2 a b^-2} in F(a,b): all three abelianize to a.
        let images = vec![
            a.parse_word("a").unwrap(),
            a.parse_word("baB").unwrap(),
            a.parse_word("bbaBB").unwrap(),
        ];
        assert_eq!(abelianization_kernel_rank(&images, 2), 2);
        let images = vec![a.parse_word("a").unwrap(), a.parse_word("b").unwrap()];
        assert_eq!(abelianization_kernel_rank(&images, 2), 0);
        let images = vec![a.parse_word("ab").unwrap(), a.parse_word("ba").unwrap()];
        assert_eq!(abelianization_kernel_rank(&images, 1.max(2)), 1);
    }

    #[test]
    fn alphabet_inference_compresses() {
        let alpha = Alphabet::infer("uuvuvvUUVUVV", Some(2)).unwrap();
        assert_eq!(alpha.rank(), 2);
        let word = alpha.parse_word("uuvuvvUUVUVV").unwrap();
        assert_eq!(word.len(), 12);
        assert_eq!(alpha.display_word(&word), "uuvuvvUUVUVV");
        let plain = Alphabet::infer("abAB", None).unwrap();
        assert_eq!(plain.rank(), 2);
        assert_eq!(plain.display_word(&plain.parse_word("abAB").unwrap()), "abAB");
    }
}
