//! Flag adjacency, reduced flag paths and distance words.
//!
//! A step `F → G` with letter `s` is split when `F` and `G` are also joined by
//! a path whose letters are proper subletters of `s`. Splitting is decided
//! exactly from residues: a `[0,1]` step splits iff both lines lie in one
//! connected piece of the point–line graph of the common plane, a `[1,2]` step
//! iff both lines lie in one connected piece of the line–plane graph around the
//! common point, and a `[0,2]` step iff both flags lie in one component.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::geometry::{Flag, Geometry, Level, VertexId};
use crate::report::Report;
use crate::words::{Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlagPath {
    pub flags: Vec<Flag>,
    pub word: Word,
}

impl FlagPath {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

/// The letter naming the levels on which two distinct flags differ.
pub fn step_letter(f: Flag, g: Flag) -> Option<Letter> {
    Letter::from_levels(&f.differing_levels(g))
}

/// All flags of `g`, indexed, with the residue data needed for exact splitting.
pub struct FlagIndex<'g> {
    g: &'g Geometry,
    flags: Vec<Flag>,
    index: HashMap<Flag, usize>,
    comp: Vec<usize>,
    plane_res: HashMap<(VertexId, VertexId), u32>,
    point_res: HashMap<(VertexId, VertexId), u32>,
    // Non-split steps other than [0,2], by flag index.
    adj: Vec<Vec<(Letter, u32)>>,
}

impl<'g> FlagIndex<'g> {
    pub fn new(g: &'g Geometry) -> FlagIndex<'g> {
        let flags = g.flags();
        let index = flags.iter().enumerate().map(|(i, &f)| (f, i)).collect();
        let mut plane_res = HashMap::new();
        let mut next = 0u32;
        for a in g.vertices_at(Level::Plane) {
            for b0 in g.lines_in(a) {
                if plane_res.contains_key(&(a, b0)) {
                    continue;
                }
                plane_res.insert((a, b0), next);
                let mut stack = vec![b0];
                while let Some(b) = stack.pop() {
                    for c in g.points_on(b) {
                        for b2 in g.lines_through(c) {
                            if g.is_edge(b2, a) && !plane_res.contains_key(&(a, b2)) {
                                plane_res.insert((a, b2), next);
                                stack.push(b2);
                            }
                        }
                    }
                }
                next += 1;
            }
        }
        let mut point_res = HashMap::new();
        for c in g.vertices_at(Level::Point) {
            for b0 in g.lines_through(c) {
                if point_res.contains_key(&(c, b0)) {
                    continue;
                }
                point_res.insert((c, b0), next);
                let mut stack = vec![b0];
                while let Some(b) = stack.pop() {
                    for a in g.planes_through(b) {
                        for b2 in g.lines_in(a) {
                            if g.is_edge(b2, c) && !point_res.contains_key(&(c, b2)) {
                                point_res.insert((c, b2), next);
                                stack.push(b2);
                            }
                        }
                    }
                }
                next += 1;
            }
        }
        let mut idx = FlagIndex {
            g,
            flags,
            index,
            comp: g.components(),
            plane_res,
            point_res,
            adj: Vec::new(),
        };
        idx.adj = (0..idx.flags.len())
            .map(|i| {
                let f = idx.flags[i];
                let mut out = Vec::new();
                for s in [Letter::P0, Letter::P1, Letter::P2, Letter::P01, Letter::P12] {
                    for h in idx.neighbors(f, s) {
                        out.push((s, idx.index[&h] as u32));
                    }
                }
                out
            })
            .collect();
        idx
    }

    pub fn geometry(&self) -> &'g Geometry {
        self.g
    }

    pub fn flags(&self) -> &[Flag] {
        &self.flags
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn index_of(&self, f: Flag) -> Option<usize> {
        self.index.get(&f).copied()
    }

    fn require(&self, f: Flag) -> Result<usize> {
        self.index_of(f).ok_or(Error::NotAFlag(f.plane, f.line, f.point))
    }

    pub fn same_component(&self, f: Flag, h: Flag) -> bool {
        self.comp[f.plane as usize] == self.comp[h.plane as usize]
    }

    /// Whether the step `f → h` (flags differing in at least one level) is split.
    pub fn step_splits(&self, f: Flag, h: Flag) -> bool {
        match step_letter(f, h) {
            Some(Letter::P01) => self.plane_res.get(&(f.plane, f.line)) == self.plane_res.get(&(h.plane, h.line)),
            Some(Letter::P12) => self.point_res.get(&(f.point, f.line)) == self.point_res.get(&(h.point, h.line)),
            Some(Letter::P02) => self.same_component(f, h),
            _ => false,
        }
    }

    /// All flags differing from `f` exactly on the levels of `s`.
    pub fn raw_neighbors(&self, f: Flag, s: Letter) -> Vec<Flag> {
        let g = self.g;
        let mut out = Vec::new();
        match s {
            Letter::P0 => {
                out.extend(g.points_on(f.line).filter(|&c| c != f.point).map(|c| Flag::new(f.plane, f.line, c)))
            }
            Letter::P1 => out.extend(
                g.lines_through(f.point)
                    .filter(|&b| b != f.line && g.is_edge(b, f.plane))
                    .map(|b| Flag::new(f.plane, b, f.point)),
            ),
            Letter::P2 => {
                out.extend(g.planes_through(f.line).filter(|&a| a != f.plane).map(|a| Flag::new(a, f.line, f.point)))
            }
            Letter::P01 => {
                for b in g.lines_in(f.plane).filter(|&b| b != f.line) {
                    out.extend(g.points_on(b).filter(|&c| c != f.point).map(|c| Flag::new(f.plane, b, c)));
                }
            }
            Letter::P12 => {
                for b in g.lines_through(f.point).filter(|&b| b != f.line) {
                    out.extend(g.planes_through(b).filter(|&a| a != f.plane).map(|a| Flag::new(a, b, f.point)));
                }
            }
            _ => out.extend(
                self.flags
                    .iter()
                    .copied()
                    .filter(|h| h.plane != f.plane && h.line != f.line && h.point != f.point),
            ),
        }
        out
    }

    /// Neighbors by `s` reachable in one non-split step.
    pub fn neighbors(&self, f: Flag, s: Letter) -> Vec<Flag> {
        let mut v = self.raw_neighbors(f, s);
        if s.len() > 1 {
            v.retain(|&h| !self.step_splits(f, h));
        }
        v
    }

    /// Non-split steps with letters other than `[0,2]`, which never occurs in a
    /// reduced word of length above one.
    pub fn local_steps(&self, f: Flag) -> Vec<(Letter, Flag)> {
        self.index_of(f)
            .map(|i| self.adj[i].iter().map(|&(s, j)| (s, self.flags[j as usize])).collect())
            .unwrap_or_default()
    }

    pub fn local_steps_at(&self, i: usize) -> &[(Letter, u32)] {
        &self.adj[i]
    }

    /// Reduced paths from `f` to every flag reachable inside `allowed` (a
    /// per-vertex mask; `None` allows everything). Flags of other components
    /// are not visited; use `distance_from` for those.
    pub fn reduced_tree(&self, f: Flag, allowed: Option<&[bool]>) -> Result<PathTree> {
        let root = self.require(f)?;
        let ok = |h: Flag| match allowed {
            None => true,
            Some(mask) => h.vertices().iter().all(|&v| mask.get(v as usize).copied().unwrap_or(false)),
        };
        if !ok(f) {
            return Err(Error::Invalid(format!("flag {f} lies outside the allowed set")));
        }
        let mut parent: Vec<Option<(usize, Letter)>> = vec![None; self.flags.len()];
        let mut words: Vec<Option<Word>> = vec![None; self.flags.len()];
        words[root] = Some(Word::empty());
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let w = words[i].clone().expect("queued nodes have words");
            for &(s, j) in &self.adj[i] {
                let j = j as usize;
                if words[j].is_some() || !ok(self.flags[j]) || !w.extends_reduced(s) {
                    continue;
                }
                let mut w2 = w.clone();
                w2.push(s);
                parent[j] = Some((i, s));
                words[j] = Some(w2);
                queue.push_back(j);
            }
        }
        Ok(PathTree { root, parent, words })
    }

    /// Flag indices reachable from `root` by reduced paths whose flags lie in
    /// `mask`. Sparse counterpart of `reduced_tree` for small sets.
    pub fn reach_within(&self, root: usize, mask: &[bool]) -> HashMap<usize, Word> {
        let inside = |j: usize| self.flags[j].vertices().iter().all(|&v| mask.get(v as usize).copied().unwrap_or(false));
        let mut words = HashMap::from([(root, Word::empty())]);
        let mut queue = VecDeque::from([root]);
        while let Some(i) = queue.pop_front() {
            let w = words[&i].clone();
            for &(s, j) in &self.adj[i] {
                let j = j as usize;
                if words.contains_key(&j) || !inside(j) || !w.extends_reduced(s) {
                    continue;
                }
                let mut w2 = w.clone();
                w2.push(s);
                words.insert(j, w2);
                queue.push_back(j);
            }
        }
        words
    }

    /// `d(f, h)` for every flag `h` (normal forms), `None` where no reduced path
    /// exists inside `allowed`.
    pub fn distance_from(&self, f: Flag, allowed: Option<&[bool]>) -> Result<Vec<Option<Word>>> {
        let tree = self.reduced_tree(f, allowed)?;
        let cross = Word::new(vec![Letter::P02]);
        Ok(self
            .flags
            .iter()
            .enumerate()
            .map(|(j, &h)| match &tree.words[j] {
                Some(w) => Some(w.canonical()),
                None if !self.same_component(f, h) => {
                    let inside = allowed.is_none_or(|m| h.vertices().iter().all(|&v| m[v as usize]));
                    inside.then(|| cross.clone())
                }
                None => None,
            })
            .collect())
    }

    pub fn find_reduced_path(&self, f: Flag, h: Flag) -> Result<FlagPath> {
        let j = self.require(h)?;
        if !self.same_component(f, h) {
            self.require(f)?;
            return Ok(FlagPath {
                flags: vec![f, h],
                word: Word::new(vec![Letter::P02]),
            });
        }
        let tree = self.reduced_tree(f, None)?;
        tree.path_to(self, j)
            .ok_or_else(|| Error::Invalid(format!("no reduced path from {f} to {h}")))
    }

    pub fn distance_word(&self, f: Flag, h: Flag) -> Result<Word> {
        Ok(self.find_reduced_path(f, h)?.word.canonical())
    }
}

/// Breadth-first tree of reduced paths from one flag.
pub struct PathTree {
    root: usize,
    parent: Vec<Option<(usize, Letter)>>,
    words: Vec<Option<Word>>,
}

impl PathTree {
    pub fn word(&self, j: usize) -> Option<&Word> {
        self.words[j].as_ref()
    }

    pub fn reached(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.words.len()).filter(|&j| self.words[j].is_some())
    }

    pub fn path_to(&self, idx: &FlagIndex<'_>, j: usize) -> Option<FlagPath> {
        let word = self.words[j].clone()?;
        let mut flags = vec![idx.flags[j]];
        let mut cur = j;
        while cur != self.root {
            let (p, _) = self.parent[cur].expect("non-root reached nodes have parents");
            flags.push(idx.flags[p]);
            cur = p;
        }
        flags.reverse();
        Some(FlagPath { flags, word })
    }
}

pub fn flag_neighbors(g: &Geometry, f: Flag, s: Letter) -> Result<Vec<Flag>> {
    g.require_flag(f)?;
    let idx = FlagIndex::new(g);
    Ok(idx.raw_neighbors(f, s))
}

pub fn find_reduced_path(g: &Geometry, f: Flag, h: Flag) -> Result<FlagPath> {
    FlagIndex::new(g).find_reduced_path(f, h)
}

pub fn distance_word(g: &Geometry, f: Flag, h: Flag) -> Result<Word> {
    FlagIndex::new(g).distance_word(f, h)
}

/// Whether some path `f1 → f2` of length at most `bound` uses only proper
/// subletters of `s`.
pub fn has_splitting(g: &Geometry, f1: Flag, f2: Flag, s: Letter, bound: usize) -> Result<bool> {
    g.require_flag(f1)?;
    g.require_flag(f2)?;
    if step_letter(f1, f2) != Some(s) {
        return Err(Error::Invalid(format!("{f2} is not an {s}-neighbor of {f1}")));
    }
    let idx = FlagIndex::new(g);
    let subs = s.proper_subletters();
    let mut seen = BTreeSet::from([f1]);
    let mut frontier = vec![f1];
    for _ in 0..bound {
        let mut next = Vec::new();
        for f in frontier {
            for &t in &subs {
                for h in idx.raw_neighbors(f, t) {
                    if h == f2 {
                        return Ok(true);
                    }
                    if seen.insert(h) {
                        next.push(h);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    Ok(false)
}

/// A flag `G` of `a` with `d(f, G') = d(f, G)·d(G, G')` reduced for all flags
/// `G'` of `a`, checked against every flag of `a`.
pub fn base_point(g: &Geometry, f: Flag, a: &BTreeSet<VertexId>) -> Result<(Flag, Word)> {
    let idx = FlagIndex::new(g);
    base_point_in(&idx, f, a)
}

pub fn base_point_in(idx: &FlagIndex<'_>, f: Flag, a: &BTreeSet<VertexId>) -> Result<(Flag, Word)> {
    let inside: Vec<usize> = (0..idx.len())
        .filter(|&i| idx.flags[i].vertices().iter().all(|v| a.contains(v)))
        .collect();
    if inside.is_empty() {
        return Err(Error::NoBasePoint("the set contains no flag".into()));
    }
    let from_f = idx.distance_from(f, None)?;
    // Candidates ordered by distance from f: a base-point is the nearest flag.
    let mut cands = inside.clone();
    cands.sort_by_key(|&i| (from_f[i].as_ref().map_or(usize::MAX, Word::len), i));
    for &gi in &cands {
        let Some(dfg) = &from_f[gi] else { continue };
        let from_g = idx.distance_from(idx.flags[gi], None)?;
        let ok = inside.iter().all(|&h| match (&from_f[h], &from_g[h]) {
            (Some(dfh), Some(dgh)) => *dfh == dfg.concat_reduce(dgh).canonical(),
            _ => false,
        });
        if ok {
            return Ok((idx.flags[gi], dfg.clone()));
        }
    }
    Err(Error::NoBasePoint(format!("no flag of the set works for {}", f)))
}

/// Exhaustive search for closed reduced flag paths of length 2 to `max_len`.
///
/// A closed path of length n splits into two reduced paths of lengths
/// ceil(n/2) and floor(n/2) from the start flag to a common middle flag; the
/// closed path is reduced iff the first word followed by the reversed second
/// word is reduced. Words containing `[0,2]` have length one, so those steps
/// never occur in a closed path.
pub fn closed_reduced_path_audit(g: &Geometry, max_len: usize) -> Report {
    let mut r = Report::new("closed-reduced-paths");
    let idx = FlagIndex::new(g);
    let half = max_len.div_ceil(2);
    let mut found = 0usize;
    let mut examples = Vec::new();
    for &f in idx.flags() {
        // endpoint -> words of reduced paths from f, by length
        let mut ends: HashMap<Flag, Vec<Word>> = HashMap::new();
        let mut stack: Vec<(Flag, Word)> = vec![(f, Word::empty())];
        while let Some((h, w)) = stack.pop() {
            if !w.is_empty() {
                ends.entry(h).or_default().push(w.clone());
            }
            if w.len() == half {
                continue;
            }
            for (s, h2) in idx.local_steps(h) {
                if w.extends_reduced(s) {
                    let mut w2 = w.clone();
                    w2.push(s);
                    stack.push((h2, w2));
                }
            }
        }
        for (m, words) in &ends {
            for p in words {
                for q in words {
                    let n = p.len() + q.len();
                    if p.len() < q.len() || p.len() > q.len() + 1 || n > max_len || n < 2 {
                        continue;
                    }
                    if p == q {
                        continue;
                    }
                    let w = p.concat(&q.reversed());
                    if w.is_reduced() {
                        found += 1;
                        if examples.len() < 5 {
                            examples.push(format!("from {f} via {m}: {w}"));
                        }
                    }
                }
            }
        }
    }
    r.info("flags", idx.len().to_string());
    r.info("max-len", max_len.to_string());
    if found == 0 {
        r.pass("closed-paths", "none");
    } else {
        for e in examples {
            r.fail("closed-path", e);
        }
        r.info("closed-path-count", found.to_string());
    }
    r
}

/// Groups flags by the canonical distance word from `f`; handy for audits.
pub fn distance_profile(g: &Geometry, f: Flag) -> Result<BTreeMap<String, usize>> {
    let idx = FlagIndex::new(g);
    let mut out = BTreeMap::new();
    for w in idx.distance_from(f, None)?.into_iter().flatten() {
        *out.entry(w.to_string()).or_insert(0) += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{new_flag_geometry, ColorChoice};

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    #[test]
    fn fresh_flag_has_no_neighbors() {
        let (g, f) = new_flag_geometry(None, 0, 0).unwrap();
        for s in Letter::ALL {
            assert!(flag_neighbors(&g, f, s).unwrap().is_empty());
        }
        assert!(closed_reduced_path_audit(&g, 6).passed());
        assert_eq!(distance_word(&g, f, f).unwrap(), Word::empty());
    }

    #[test]
    fn single_operations_give_single_letter_words() {
        let (g, f) = new_flag_geometry(None, 0, 0).unwrap();
        for s in Letter::ALL {
            let (h, new) = g.apply_operation(f, s, ColorChoice::Forced).unwrap();
            assert_eq!(distance_word(&h, f, new).unwrap(), Word::new(vec![s]), "{s}");
            assert!(flag_neighbors(&h, new, s).unwrap().contains(&f));
        }
    }

    #[test]
    fn chain_word() {
        let (g, f) = new_flag_geometry(None, 0, 0).unwrap();
        let (g, f1) = g.apply_operation(f, Letter::P0, ColorChoice::Forced).unwrap();
        let (g, f2) = g.apply_operation(f1, Letter::P1, ColorChoice::Forced).unwrap();
        let p = find_reduced_path(&g, f, f2).unwrap();
        assert_eq!(p.word, word("0.1"));
        assert_eq!(p.flags, vec![f, f1, f2]);
        assert_eq!(distance_word(&g, f2, f).unwrap(), word("1.0"));
    }

    #[test]
    fn splitting_detected() {
        // f -[0]-> f1 -[1]-> f2 gives an [0,1]-neighbor f2 of f with a split.
        let (g, f) = new_flag_geometry(None, 0, 0).unwrap();
        let (g, f1) = g.apply_operation(f, Letter::P0, ColorChoice::Forced).unwrap();
        let (g, f2) = g.apply_operation(f1, Letter::P1, ColorChoice::Forced).unwrap();
        assert_eq!(step_letter(f, f2), Some(Letter::P01));
        assert!(has_splitting(&g, f, f2, Letter::P01, 6).unwrap());
        assert!(FlagIndex::new(&g).step_splits(f, f2));
        let (g, f3) = g.apply_operation(f, Letter::P12, ColorChoice::Forced).unwrap();
        assert!(!has_splitting(&g, f, f3, Letter::P12, 6).unwrap());
        assert!(!FlagIndex::new(&g).step_splits(f, f3));
        assert!(!has_splitting(&g, f, f1, Letter::P0, 6).unwrap());
    }

    #[test]
    fn glued_square_is_a_closed_reduced_path() {
        let (g, f) = new_flag_geometry(None, 0, 0).unwrap();
        let (g, f1) = g.apply_operation(f, Letter::P0, ColorChoice::Forced).unwrap();
        let (mut g, f2) = g.apply_operation(f, Letter::P1, ColorChoice::Forced).unwrap();
        g.add_edge(f2.line, f1.point).unwrap();
        let r = closed_reduced_path_audit(&g, 6);
        assert!(!r.passed(), "{r}");
    }

    #[test]
    fn base_point_of_inside_and_adjacent_flags() {
        let (g, f) = new_flag_geometry(None, 0, 0).unwrap();
        let (g, f1) = g.apply_operation(f, Letter::P2, ColorChoice::Forced).unwrap();
        let a: BTreeSet<VertexId> = f.vertices().into_iter().collect();
        assert_eq!(base_point(&g, f, &a).unwrap(), (f, Word::empty()));
        assert_eq!(base_point(&g, f1, &a).unwrap(), (f, word("2")));
    }
}
