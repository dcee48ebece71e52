//! Nice sets, the colourless closure `fcl`, exceptional points and the colored
//! closure `acl = fcl ∪ EP(fcl)`.
//!
//! `fcl X` is the intersection of all nice supersets of `X`. The production
//! method searches for witnesses: a vertex `v` stays out of the closure as soon
//! as some nice superset avoiding `v` is found, and a vertex is kept only when
//! the search proves that every nice superset contains it. Nice supersets are
//! grown from `X` by repairing the first defect (a vertex outside every
//! internal flag, or two internal flags without an internal reduced path) in
//! every possible way. The oracle enumerates all subsets of a small ambient.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::geometry::{Flag, Geometry, Level, VertexId};
use crate::paths::FlagIndex;
use crate::words::Word;

pub type VertexSet = BTreeSet<VertexId>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureKind {
    Plain,
    Fcl,
    Acl,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedSet {
    pub members: VertexSet,
    pub kind: ClosureKind,
    pub ep: Option<VertexSet>,
}

impl ClosedSet {
    pub fn plain(members: VertexSet) -> ClosedSet {
        ClosedSet {
            members,
            kind: ClosureKind::Plain,
            ep: None,
        }
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Why a set fails to be nice.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Defect {
    Uncovered(VertexId),
    Disconnected(Flag, Flag),
}

/// Flags of a geometry restricted to an allowed vertex set. Reducedness and
/// splitting are always judged in the whole geometry.
pub struct Ambient<'g> {
    idx: FlagIndex<'g>,
    allowed: Vec<bool>,
    // Reduced-path lengths to a flag, by flag index.
    lens: RefCell<HashMap<usize, Rc<Vec<Option<usize>>>>>,
}

impl<'g> Ambient<'g> {
    pub fn full(g: &'g Geometry) -> Ambient<'g> {
        let allowed = (0..g.id_bound()).map(|v| g.contains(v as VertexId)).collect();
        Ambient {
            idx: FlagIndex::new(g),
            allowed,
            lens: RefCell::new(HashMap::new()),
        }
    }

    pub fn restricted(g: &'g Geometry, vertices: &VertexSet) -> Ambient<'g> {
        let mut allowed = vec![false; g.id_bound()];
        for &v in vertices {
            if g.contains(v) {
                allowed[v as usize] = true;
            }
        }
        Ambient {
            idx: FlagIndex::new(g),
            allowed,
            lens: RefCell::new(HashMap::new()),
        }
    }

    pub fn geometry(&self) -> &'g Geometry {
        self.idx.geometry()
    }

    pub fn index(&self) -> &FlagIndex<'g> {
        &self.idx
    }

    pub fn vertices(&self) -> VertexSet {
        (0..self.allowed.len())
            .filter(|&v| self.allowed[v])
            .map(|v| v as VertexId)
            .collect()
    }

    fn check_inside(&self, x: &VertexSet) -> Result<()> {
        match x.iter().find(|&&v| !self.allowed.get(v as usize).copied().unwrap_or(false)) {
            Some(&v) => Err(Error::UnknownVertex(v)),
            None => Ok(()),
        }
    }

    fn mask(&self, a: &VertexSet) -> Vec<bool> {
        let mut m = vec![false; self.allowed.len()];
        for &v in a {
            if let Some(slot) = m.get_mut(v as usize) {
                *slot = self.allowed[v as usize];
            }
        }
        m
    }

    fn flags_through(&self, x: VertexId, avoid: &VertexSet) -> Vec<Flag> {
        self.geometry()
            .flags_through(x)
            .into_iter()
            .filter(|f| f.vertices().iter().all(|&v| self.allowed[v as usize] && !avoid.contains(&v)))
            .collect()
    }

    /// The first reason `a` is not nice, or `None` if it is.
    pub fn nice_defect(&self, a: &VertexSet) -> Option<Defect> {
        let mask = self.mask(a);
        let g = self.geometry();
        let mut inside = Vec::new();
        for &p in a.iter().filter(|&&v| mask[v as usize] && g.level(v) == Some(Level::Plane)) {
            for l in g.lines_in(p).filter(|&l| mask[l as usize]) {
                for c in g.points_on(l).filter(|&c| mask[c as usize]) {
                    inside.push(Flag::new(p, l, c));
                }
            }
        }
        let mut covered = VertexSet::new();
        for f in &inside {
            covered.extend(f.vertices());
        }
        if let Some(&x) = a.iter().find(|v| !covered.contains(v)) {
            return Some(Defect::Uncovered(x));
        }
        let ids: Vec<usize> = inside.iter().map(|&f| self.idx.index_of(f).expect("flag")).collect();
        for (i, &f) in inside.iter().enumerate() {
            let reach = self.idx.reach_within(ids[i], &mask);
            for (k, &h) in inside.iter().enumerate().skip(i + 1) {
                if !reach.contains_key(&ids[k]) && self.idx.same_component(f, h) {
                    return Some(Defect::Disconnected(f, h));
                }
            }
        }
        None
    }

    pub fn is_nice(&self, a: &VertexSet) -> bool {
        !a.is_empty() && self.a_inside(a) && self.nice_defect(a).is_none()
    }

    fn a_inside(&self, a: &VertexSet) -> bool {
        self.check_inside(a).is_ok()
    }

    fn lengths_to(&self, h: Flag) -> Rc<Vec<Option<usize>>> {
        let j = self.idx.index_of(h).expect("flag");
        if let Some(l) = self.lens.borrow().get(&j) {
            return l.clone();
        }
        let d = self.idx.distance_from(h, None).expect("flag");
        let l: Rc<Vec<Option<usize>>> = Rc::new(d.iter().map(|w| w.as_ref().map(Word::len)).collect());
        self.lens.borrow_mut().insert(j, l.clone());
        l
    }

    /// Vertex sets of all reduced paths `f → h` whose vertices are allowed and
    /// avoid `avoid`.
    fn reduced_paths(&self, f: Flag, h: Flag, avoid: &VertexSet) -> Vec<VertexSet> {
        let to_h = self.lengths_to(h);
        let len = |x: Flag| to_h[self.idx.index_of(x).expect("flag")];
        let Some(total) = len(f) else { return Vec::new() };
        let ok = |x: Flag| x.vertices().iter().all(|&v| self.allowed[v as usize] && !avoid.contains(&v));
        let mut out = BTreeSet::new();
        let mut stack = vec![(vec![f], Word::empty())];
        while let Some((path, w)) = stack.pop() {
            let cur = *path.last().expect("nonempty");
            if cur == h {
                out.insert(path.iter().flat_map(|x| x.vertices()).collect::<VertexSet>());
                continue;
            }
            for (s, nxt) in self.idx.local_steps(cur) {
                if !ok(nxt) || len(nxt) != Some(total - w.len() - 1) || !w.extends_reduced(s) {
                    continue;
                }
                let mut w2 = w.clone();
                w2.push(s);
                let mut p2 = path.clone();
                p2.push(nxt);
                stack.push((p2, w2));
            }
        }
        out.into_iter().collect()
    }

    /// Some nice set `A` with `start ⊆ A` inside the ambient avoiding `avoid`.
    pub fn find_nice_superset(&self, start: &VertexSet, avoid: &VertexSet) -> Option<VertexSet> {
        let mut failed = HashSet::new();
        self.search(start.clone(), avoid, &mut failed)
    }

    fn search(&self, s: VertexSet, avoid: &VertexSet, failed: &mut HashSet<Vec<VertexId>>) -> Option<VertexSet> {
        if s.iter().any(|v| avoid.contains(v)) {
            return None;
        }
        let defect = match self.nice_defect(&s) {
            None => return Some(s),
            Some(d) => d,
        };
        let mut options: Vec<VertexSet> = match defect {
            Defect::Uncovered(x) => self
                .flags_through(x, avoid)
                .into_iter()
                .map(|f| f.vertices().into_iter().collect())
                .collect(),
            Defect::Disconnected(f, h) => self.reduced_paths(f, h, avoid),
        };
        options.sort_by_key(|o| (o.difference(&s).count(), o.iter().copied().collect::<Vec<_>>()));
        for o in options {
            let mut next = s.clone();
            next.extend(o);
            let key: Vec<VertexId> = next.iter().copied().collect();
            if next.len() == s.len() || failed.contains(&key) {
                continue;
            }
            if let Some(found) = self.search(next, avoid, failed) {
                return Some(found);
            }
            failed.insert(key);
        }
        None
    }

    /// Vertices forced by every flag through an element, iterated.
    fn forced_by_flags(&self, x: &VertexSet) -> Result<VertexSet> {
        let mut y = x.clone();
        loop {
            let mut added = false;
            for v in y.clone() {
                let flags = self.flags_through(v, &VertexSet::new());
                let Some(first) = flags.first() else {
                    return Err(Error::Invalid(format!("vertex {v} lies in no flag of the ambient")));
                };
                let mut common: VertexSet = first.vertices().into_iter().collect();
                for f in &flags[1..] {
                    common.retain(|u| f.contains(*u));
                }
                for u in common {
                    added |= y.insert(u);
                }
            }
            if !added {
                return Ok(y);
            }
        }
    }

    /// Intersection of all nice supersets of `x` inside the ambient.
    pub fn fcl(&self, x: &VertexSet) -> Result<VertexSet> {
        self.check_inside(x)?;
        if x.is_empty() {
            return Ok(VertexSet::new());
        }
        let y = self.forced_by_flags(x)?;
        let first = self
            .find_nice_superset(&y, &VertexSet::new())
            .ok_or_else(|| Error::Invalid("no nice superset inside the ambient".into()))?;
        let mut c = first.clone();
        for v in first.difference(&y).copied().collect::<Vec<_>>() {
            if !c.contains(&v) {
                continue;
            }
            if let Some(w) = self.find_nice_superset(&y, &VertexSet::from([v])) {
                c.retain(|u| w.contains(u));
            }
        }
        Ok(c)
    }

    /// Brute force over every subset of the ambient (at most 24 vertices).
    pub fn fcl_oracle(&self, x: &VertexSet) -> Result<VertexSet> {
        self.check_inside(x)?;
        if x.is_empty() {
            return Ok(VertexSet::new());
        }
        let verts: Vec<VertexId> = self.vertices().into_iter().collect();
        if verts.len() > 24 {
            return Err(Error::Invalid(format!("oracle ambient has {} > 24 vertices", verts.len())));
        }
        let bit = |v: VertexId| 1u32 << verts.iter().position(|&u| u == v).expect("ambient vertex");
        let flag_masks: Vec<u32> = self
            .idx
            .flags()
            .iter()
            .filter(|f| f.vertices().iter().all(|&v| self.allowed[v as usize]))
            .map(|f| f.vertices().iter().map(|&v| bit(v)).fold(0, |a, b| a | b))
            .collect();
        let xm: u32 = x.iter().map(|&v| bit(v)).fold(0, |a, b| a | b);
        let free: Vec<u32> = (0..verts.len()).map(|i| 1u32 << i).filter(|b| xm & b == 0).collect();
        let mut meet: Option<u32> = None;
        for t in 0u32..(1u32 << free.len()) {
            let mut a = xm;
            for (i, b) in free.iter().enumerate() {
                if t >> i & 1 == 1 {
                    a |= b;
                }
            }
            if let Some(m) = meet {
                // Cannot shrink the intersection: skip the expensive check.
                if m & !a == 0 {
                    continue;
                }
            }
            let covered = flag_masks.iter().filter(|&&f| f & !a == 0).fold(0, |acc, &f| acc | f);
            if a & !covered != 0 {
                continue;
            }
            let set: VertexSet = (0..verts.len()).filter(|&i| a >> i & 1 == 1).map(|i| verts[i]).collect();
            if self.nice_defect(&set).is_none() {
                meet = Some(meet.map_or(a, |m| m & a));
            }
        }
        let m = meet.ok_or_else(|| Error::Invalid("no nice superset inside the ambient".into()))?;
        Ok((0..verts.len()).filter(|&i| m >> i & 1 == 1).map(|i| verts[i]).collect())
    }
}

/// The first `size` vertices met by a breadth-first search from `seeds`
/// (ties by id).
pub fn neighborhood(g: &Geometry, seeds: &VertexSet, size: usize) -> VertexSet {
    let mut out = VertexSet::new();
    let mut frontier: Vec<VertexId> = seeds.iter().copied().filter(|&v| g.contains(v)).collect();
    while !frontier.is_empty() && out.len() < size {
        let mut next = BTreeSet::new();
        for v in frontier {
            if out.len() >= size {
                break;
            }
            if out.insert(v) {
                next.extend(g.neighbors(v).iter().copied());
            }
        }
        frontier = next.into_iter().filter(|v| !out.contains(v)).collect();
    }
    out
}

/// Exceptional points of incident plane–line pairs inside `x`.
pub fn ep_set(g: &Geometry, x: &VertexSet) -> Result<VertexSet> {
    if !g.is_colored() {
        return Err(Error::Uncolored);
    }
    let mut out = VertexSet::new();
    for &a in x.iter().filter(|&&a| g.level(a) == Some(Level::Plane)) {
        for b in g.lines_in(a).filter(|b| x.contains(b)) {
            match g.exceptional_point(a, b)? {
                Some(c) => {
                    out.insert(c);
                }
                None => return Err(Error::MissingExceptional { plane: a, line: b }),
            }
        }
    }
    Ok(out)
}

/// Closure queries sharing one flag index.
pub struct Closure<'g> {
    amb: Ambient<'g>,
}

impl<'g> Closure<'g> {
    pub fn new(g: &'g Geometry) -> Closure<'g> {
        Closure { amb: Ambient::full(g) }
    }

    pub fn ambient(&self) -> &Ambient<'g> {
        &self.amb
    }

    pub fn geometry(&self) -> &'g Geometry {
        self.amb.geometry()
    }

    pub fn is_nice(&self, x: &VertexSet) -> bool {
        self.amb.is_nice(x)
    }

    pub fn fcl(&self, x: &VertexSet) -> Result<ClosedSet> {
        Ok(ClosedSet {
            members: self.amb.fcl(x)?,
            kind: ClosureKind::Fcl,
            ep: None,
        })
    }

    /// `fcl X ∪ EP(fcl X)`, checked to be closed again.
    pub fn acl(&self, x: &VertexSet) -> Result<ClosedSet> {
        let f = self.amb.fcl(x)?;
        let ep = ep_set(self.geometry(), &f)?;
        let mut members = f.clone();
        members.extend(ep.iter().copied());
        if members.len() != f.len() && self.amb.fcl(&members)? != members {
            return Err(Error::Invalid("closure under exceptional points is not fcl-closed".into()));
        }
        Ok(ClosedSet {
            members,
            kind: ClosureKind::Acl,
            ep: Some(ep),
        })
    }

    /// `|EP(fcl W) ∖ fcl W|`.
    pub fn defect(&self, w: &VertexSet) -> Result<usize> {
        let f = self.amb.fcl(w)?;
        Ok(ep_set(self.geometry(), &f)?.difference(&f).count())
    }
}

pub fn is_nice(g: &Geometry, x: &VertexSet) -> bool {
    Closure::new(g).is_nice(x)
}

pub fn fcl(g: &Geometry, x: &VertexSet) -> Result<ClosedSet> {
    Closure::new(g).fcl(x)
}

pub fn acl_colored(g: &Geometry, x: &VertexSet) -> Result<ClosedSet> {
    Closure::new(g).acl(x)
}

pub fn defect(g: &Geometry, w: &VertexSet) -> Result<usize> {
    Closure::new(g).defect(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{new_flag_geometry, ColorChoice, ColorSpec};
    use crate::words::Letter;

    fn set(v: &[VertexId]) -> VertexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn nice_examples() {
        let (g, f) = new_flag_geometry(None, 0, 0).unwrap();
        assert!(is_nice(&g, &set(&f.vertices())));
        assert!(!is_nice(&g, &set(&[f.line])));
        let (g, f1) = g.apply_operation(f, Letter::P1, ColorChoice::Forced).unwrap();
        assert!(is_nice(&g, &set(&[f.plane, f.line, f.point, f1.line])));
    }

    #[test]
    fn closures_of_a_flag_in_a_two_color_stage() {
        let spec = ColorSpec::cyclic(2).unwrap();
        let (g, f) = new_flag_geometry(Some(spec), 0, 0).unwrap();
        let (g, f1) = g.apply_operation(f, Letter::P0, ColorChoice::Forced).unwrap();
        let flag = set(&f.vertices());
        assert_eq!(fcl(&g, &flag).unwrap().members, flag);
        let mut expect = flag.clone();
        expect.insert(f1.point);
        assert_eq!(acl_colored(&g, &flag).unwrap().members, expect);
        assert_eq!(defect(&g, &flag).unwrap(), 1);
    }

    #[test]
    fn oracle_agrees_on_a_tiny_build() {
        let (g, f) = new_flag_geometry(None, 0, 0).unwrap();
        let (g, f1) = g.apply_operation(f, Letter::P1, ColorChoice::Forced).unwrap();
        let (g, _) = g.apply_operation(f1, Letter::P0, ColorChoice::Forced).unwrap();
        let amb = Ambient::full(&g);
        for x in [set(&[f.plane, f.point]), set(&[f1.line]), set(&[f.point]), set(&[0, 4])] {
            assert_eq!(amb.fcl(&x).unwrap(), amb.fcl_oracle(&x).unwrap(), "{x:?}");
        }
    }
}
