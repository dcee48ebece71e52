//! Elementary maps, equality of types of finite tuples, colored forking
//! independence with certificates, finite kernels and the matrix patterns.
//!
//! Types are compared through closures: two tuples have the same type iff some
//! map between their algebraic closures, sending one tuple to the other,
//! preserves incidence, colors and the coincidence pattern of exceptional
//! points.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use crate::closure::{ep_set, Closure, VertexSet};
use crate::error::{Error, Result};
use crate::geometry::{Color, Flag, Geometry, Level, VertexId};
use crate::report::Report;
use crate::words::Word;

/// A finite injective, level-preserving map between vertex sets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialMap {
    pairs: BTreeMap<VertexId, VertexId>,
}

impl PartialMap {
    pub fn new() -> PartialMap {
        PartialMap::default()
    }

    pub fn identity(x: &VertexSet) -> PartialMap {
        PartialMap {
            pairs: x.iter().map(|&v| (v, v)).collect(),
        }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<PartialMap> {
        let mut m = PartialMap::new();
        for (u, v) in pairs {
            m.insert(u, v)?;
        }
        Ok(m)
    }

    /// Adds `u ↦ v`; rejects a second image for `u` or a second preimage for `v`.
    pub fn insert(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        if let Some(&old) = self.pairs.get(&u) {
            if old != v {
                return Err(Error::Invalid(format!("{u} already maps to {old}")));
            }
            return Ok(());
        }
        if self.pairs.values().any(|&w| w == v) {
            return Err(Error::Invalid(format!("map is not injective at {v}")));
        }
        self.pairs.insert(u, v);
        Ok(())
    }

    pub fn get(&self, u: VertexId) -> Option<VertexId> {
        self.pairs.get(&u).copied()
    }

    pub fn pairs(&self) -> &BTreeMap<VertexId, VertexId> {
        &self.pairs
    }

    pub fn domain(&self) -> VertexSet {
        self.pairs.keys().copied().collect()
    }

    pub fn image(&self) -> VertexSet {
        self.pairs.values().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

impl fmt::Display for PartialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs.iter().map(|(u, v)| format!("{u}>{v}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    EpCollision {
        point: VertexId,
        plane_a: VertexId,
        line_a: VertexId,
        plane_b: VertexId,
        line_b: VertexId,
    },
    WordDefect {
        f: Flag,
        h: Flag,
        expected: Word,
        actual: Word,
    },
    /// A vertex of both closures outside the base.
    ClosureOverlap(VertexId),
    /// An incidence between the two sides that independent closed sets
    /// cannot have.
    Incidence(String),
    NoBasePoint(Flag),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EpCollision {
                point,
                plane_a,
                line_a,
                plane_b,
                line_b,
            } => write!(f, "ep-collision({point}, {plane_a}, {line_a}, {plane_b}, {line_b})"),
            Violation::WordDefect { f: a, h, expected, actual } => {
                write!(f, "word-defect({a}, {h}, expected {expected}, actual {actual})")
            }
            Violation::ClosureOverlap(v) => write!(f, "closure-overlap({v})"),
            Violation::Incidence(d) => write!(f, "incidence({d})"),
            Violation::NoBasePoint(fl) => write!(f, "no-base-point({fl})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependenceCertificate {
    pub verdict: bool,
    pub violations: Vec<Violation>,
    /// The nice supersets of the base against which words were checked.
    pub d_family: Vec<VertexSet>,
    pub notes: Vec<String>,
}

impl IndependenceCertificate {
    pub fn to_report(&self) -> Report {
        let mut r = Report::new("independence");
        r.info("d-family", format!("{} sets {}", self.d_family.len(), fmt_family(&self.d_family)));
        for n in &self.notes {
            r.info("note", n.clone());
        }
        for v in &self.violations {
            r.fail("violation", v.to_string());
        }
        r.check("independent", self.verdict, "");
        r
    }
}

fn fmt_set(s: &VertexSet) -> String {
    let parts: Vec<String> = s.iter().map(|v| v.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn fmt_family(f: &[VertexSet]) -> String {
    f.iter().map(fmt_set).collect::<Vec<_>>().join(" ")
}

/// Atomic relations usable in a pattern matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Predicate {
    /// The point and plane heading the two entries have this section color.
    SectionColor(Color),
    /// The left entry heads with a point `c`, the right entry with a plane `a`
    /// and a line `b`, and `c = expt(a, b)`.
    Exceptional,
    /// The first vertices of the two entries are adjacent.
    Incident,
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::SectionColor(r) => write!(f, "section-color={r}"),
            Predicate::Exceptional => write!(f, "exceptional"),
            Predicate::Incident => write!(f, "incident"),
        }
    }
}

impl FromStr for Predicate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Predicate> {
        match s {
            "exceptional" => Ok(Predicate::Exceptional),
            "incident" => Ok(Predicate::Incident),
            _ => s
                .strip_prefix("section-color=")
                .and_then(|r| r.parse().ok())
                .map(Predicate::SectionColor)
                .ok_or_else(|| Error::Invalid(format!("unsupported predicate `{s}`"))),
        }
    }
}

impl Predicate {
    pub fn holds(self, g: &Geometry, x: &[VertexId], y: &[VertexId]) -> Result<bool> {
        let head = |t: &[VertexId]| t.first().copied().ok_or_else(|| Error::Invalid("empty entry".into()));
        match self {
            Predicate::SectionColor(r) => {
                let (u, v) = (head(x)?, head(y)?);
                let (plane, point) = match (g.level(u), g.level(v)) {
                    (Some(Level::Point), Some(Level::Plane)) => (v, u),
                    (Some(Level::Plane), Some(Level::Point)) => (u, v),
                    _ => return Ok(false),
                };
                Ok(g.section_color(plane, point) == Some(r))
            }
            Predicate::Exceptional => {
                let c = head(x)?;
                let [a, b] = y.get(..2).and_then(|s| <[VertexId; 2]>::try_from(s).ok()).ok_or_else(|| {
                    Error::Invalid("exceptional test needs a (plane, line) entry".into())
                })?;
                if g.level(a) != Some(Level::Plane) || g.level(b) != Some(Level::Line) || !g.is_edge(a, b) {
                    return Ok(false);
                }
                Ok(g.exceptional_point(a, b)? == Some(c))
            }
            Predicate::Incident => Ok(g.is_edge(head(x)?, head(y)?)),
        }
    }
}

/// Rows `i`, columns `j`; entry `(i, j)` is the pair `(a[i][j], b[i][j])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternMatrix {
    pub a: Vec<Vec<Vec<VertexId>>>,
    pub b: Vec<Vec<Vec<VertexId>>>,
    pub predicate: Predicate,
}

impl PatternMatrix {
    pub fn rows(&self) -> usize {
        self.a.len()
    }

    pub fn cols(&self) -> usize {
        self.a.first().map_or(0, Vec::len)
    }

    fn check_shape(&self) -> Result<()> {
        let (n, m) = (self.rows(), self.cols());
        let rect = |t: &Vec<Vec<Vec<VertexId>>>| t.len() == n && t.iter().all(|row| row.len() == m);
        if rect(&self.a) && rect(&self.b) {
            Ok(())
        } else {
            Err(Error::Invalid("pattern matrix is not rectangular".into()))
        }
    }
}

fn concat(x: &[VertexId], y: &[VertexId]) -> Vec<VertexId> {
    x.iter().chain(y).copied().collect()
}

/// Queries sharing one closure engine and a cache of distance words.
pub struct Logic<'g> {
    cl: Closure<'g>,
    dist: RefCell<HashMap<usize, Rc<Vec<Option<Word>>>>>,
    fcls: RefCell<HashMap<VertexSet, VertexSet>>,
}

impl<'g> Logic<'g> {
    pub fn new(g: &'g Geometry) -> Logic<'g> {
        Logic {
            cl: Closure::new(g),
            dist: RefCell::new(HashMap::new()),
            fcls: RefCell::new(HashMap::new()),
        }
    }

    pub fn geometry(&self) -> &'g Geometry {
        self.cl.geometry()
    }

    pub fn closure(&self) -> &Closure<'g> {
        &self.cl
    }

    pub fn fcl(&self, x: &VertexSet) -> Result<VertexSet> {
        if let Some(c) = self.fcls.borrow().get(x) {
            return Ok(c.clone());
        }
        let c = self.cl.fcl(x)?.members;
        self.fcls.borrow_mut().insert(x.clone(), c.clone());
        Ok(c)
    }

    /// `acl` in a colored geometry, `fcl` otherwise.
    pub fn closed(&self, x: &VertexSet) -> Result<VertexSet> {
        let f = self.fcl(x)?;
        if !self.geometry().is_colored() {
            return Ok(f);
        }
        let mut members = f.clone();
        members.extend(ep_set(self.geometry(), &f)?);
        if members.len() != f.len() && self.fcl(&members)? != members {
            return Err(Error::Invalid("closure under exceptional points is not fcl-closed".into()));
        }
        Ok(members)
    }

    fn distances(&self, f: Flag) -> Result<Rc<Vec<Option<Word>>>> {
        let idx = self.cl.ambient().index();
        let i = idx.index_of(f).ok_or(Error::NotAFlag(f.plane, f.line, f.point))?;
        if let Some(d) = self.dist.borrow().get(&i) {
            return Ok(d.clone());
        }
        let d = Rc::new(idx.distance_from(f, None)?);
        self.dist.borrow_mut().insert(i, d.clone());
        Ok(d)
    }

    fn dword(&self, f: Flag, h: Flag) -> Result<Word> {
        let idx = self.cl.ambient().index();
        let j = idx.index_of(h).ok_or(Error::NotAFlag(h.plane, h.line, h.point))?;
        self.distances(f)?[j]
            .clone()
            .ok_or_else(|| Error::Invalid(format!("no reduced path from {f} to {h}")))
    }

    fn flags_inside(&self, a: &VertexSet) -> Vec<Flag> {
        let g = self.geometry();
        let mut out = Vec::new();
        for &p in a.iter().filter(|&&v| g.level(v) == Some(Level::Plane)) {
            for l in g.lines_in(p).filter(|l| a.contains(l)) {
                for c in g.points_on(l).filter(|c| a.contains(c)) {
                    out.push(Flag::new(p, l, c));
                }
            }
        }
        out
    }

    /// Nearest flag `G` of `d` such that `d(f, G')` is the reduction of
    /// `d(f, G)·d(G, G')` for every flag `G'` of `d`.
    fn base_point(&self, f: Flag, d_flags: &[Flag]) -> Result<Option<Flag>> {
        let from_f = self.distances(f)?;
        let idx = self.cl.ambient().index();
        let mut cands: Vec<(usize, Flag)> = d_flags
            .iter()
            .filter_map(|&h| {
                let j = idx.index_of(h)?;
                from_f[j].as_ref().map(|w| (w.len(), h))
            })
            .collect();
        cands.sort();
        for (_, gflag) in cands {
            let dfg = self.dword(f, gflag)?;
            let from_g = self.distances(gflag)?;
            let mut ok = true;
            for &h in d_flags {
                let j = idx.index_of(h).expect("flag of the geometry");
                match (&from_f[j], &from_g[j]) {
                    (Some(dfh), Some(dgh)) if *dfh == dfg.concat_reduce(dgh).canonical() => {}
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(Some(gflag));
            }
        }
        Ok(None)
    }

    // ---- elementary maps and types ----

    /// Conditions (1) to (3) for a map already known to be total on `x`.
    fn map_conditions(&self, m: &PartialMap, x: &VertexSet, y: &VertexSet) -> Result<Report> {
        let g = self.geometry();
        let mut r = Report::new("elementary-map");
        let mut bad1 = Vec::new();
        if m.domain() != *x || m.image() != *y {
            bad1.push("map is not a bijection between the sets".to_string());
        }
        for (&u, &v) in m.pairs() {
            if g.level(u) != g.level(v) {
                bad1.push(format!("level {u}>{v}"));
            }
        }
        for (&u, &mu) in m.pairs() {
            for (&w, &mw) in m.pairs().range(u + 1..) {
                if g.is_edge(u, w) != g.is_edge(mu, mw) {
                    bad1.push(format!("edge {u}-{w}"));
                }
            }
        }
        r.check("incidence", bad1.is_empty(), bad1.join("; "));

        let mut bad2 = Vec::new();
        if g.is_colored() {
            for (&u, &mu) in m.pairs() {
                match g.level(u) {
                    Some(Level::Line) if g.line_color(u) != g.line_color(mu) => bad2.push(format!("line {u}")),
                    Some(Level::Plane) => {
                        for (&c, &mc) in m.pairs() {
                            if g.level(c) == Some(Level::Point) && g.section_color(u, c) != g.section_color(mu, mc) {
                                bad2.push(format!("section {u},{c}"));
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        r.check("colors", bad2.is_empty(), bad2.join("; "));

        let mut bad3 = Vec::new();
        if g.is_colored() {
            let lines: Vec<VertexId> = x.iter().copied().filter(|&v| g.level(v) == Some(Level::Line)).collect();
            for &b in &lines {
                let planes: Vec<VertexId> = g.planes_through(b).filter(|p| x.contains(p)).collect();
                let mb = m.get(b).expect("total");
                for (i, &a) in planes.iter().enumerate() {
                    for &a2 in &planes[i + 1..] {
                        let (ma, ma2) = (m.get(a).expect("total"), m.get(a2).expect("total"));
                        if !g.is_edge(ma, mb) || !g.is_edge(ma2, mb) {
                            continue;
                        }
                        let here = g.exceptional_point(a, b)? == g.exceptional_point(a2, b)?;
                        let there = g.exceptional_point(ma, mb)? == g.exceptional_point(ma2, mb)?;
                        if here != there {
                            bad3.push(format!("{a},{a2} over {b}"));
                        }
                    }
                }
            }
        }
        r.check("exceptional-pattern", bad3.is_empty(), bad3.join("; "));
        Ok(r)
    }

    pub fn check_elementary_map(&self, m: &PartialMap, x: &VertexSet, y: &VertexSet) -> Result<Report> {
        for s in [x, y] {
            if self.fcl(s)? != *s {
                return Err(Error::Invalid(format!("{} is not closed", fmt_set(s))));
            }
        }
        self.map_conditions(m, x, y)
    }

    /// A witnessing map from the closure of `u` onto the closure of `v`.
    pub fn type_map(&self, u: &[VertexId], v: &[VertexId]) -> Result<Option<PartialMap>> {
        let g = self.geometry();
        if u.len() != v.len() {
            return Ok(None);
        }
        let mut seed = PartialMap::new();
        for (&x, &y) in u.iter().zip(v) {
            if g.level(x).is_none() {
                return Err(Error::UnknownVertex(x));
            }
            if g.level(y).is_none() {
                return Err(Error::UnknownVertex(y));
            }
            if g.level(x) != g.level(y) || seed.insert(x, y).is_err() {
                return Ok(None);
            }
        }
        let a = self.closed(&u.iter().copied().collect())?;
        let b = self.closed(&v.iter().copied().collect())?;
        if a.len() != b.len() {
            return Ok(None);
        }
        let mut order: Vec<VertexId> = Vec::new();
        for &x in u {
            if !order.contains(&x) {
                order.push(x);
            }
        }
        let mut rest: Vec<VertexId> = a.iter().copied().filter(|x| !order.contains(x)).collect();
        rest.sort_by_key(|&x| (std::cmp::Reverse(g.level(x).map_or(0, Level::index)), x));
        order.extend(rest);
        let deg = |s: &VertexSet, x: VertexId| g.neighbors(x).iter().filter(|n| s.contains(n)).count();
        let mut search = Search {
            lg: self,
            a: &a,
            b: &b,
            order,
            seed,
            deg_a: a.iter().map(|&x| (x, deg(&a, x))).collect(),
            deg_b: b.iter().map(|&y| (y, deg(&b, y))).collect(),
        };
        let mut m = PartialMap::new();
        search.run(0, &mut m)
    }

    pub fn types_equal(&self, u: &[VertexId], v: &[VertexId]) -> Result<bool> {
        Ok(self.type_map(u, v)?.is_some())
    }

    // ---- independence ----

    fn d_family(&self, z: &VertexSet, a: &VertexSet, b: &VertexSet) -> Vec<VertexSet> {
        const CAP: usize = 24;
        let amb = self.cl.ambient();
        let mut fam: Vec<VertexSet> = Vec::new();
        let push = |fam: &mut Vec<VertexSet>, d: VertexSet| {
            if fam.len() < CAP && !fam.contains(&d) {
                fam.push(d);
            }
        };
        if !self.flags_inside(z).is_empty() && amb.is_nice(z) {
            push(&mut fam, z.clone());
        }
        let union: VertexSet = a.union(b).copied().collect();
        for f in self.flags_inside(&union) {
            if z.is_empty() || f.vertices().iter().any(|v| z.contains(v)) {
                let mut start = z.clone();
                start.extend(f.vertices());
                if let Some(d) = amb.find_nice_superset(&start, &VertexSet::new()) {
                    push(&mut fam, d);
                }
            }
        }
        let base: Vec<VertexSet> = fam.clone();
        let idx = amb.index();
        for d in base {
            for f in self.flags_inside(&d) {
                for (_, h) in idx.local_steps(f) {
                    let mut start = d.clone();
                    start.extend(h.vertices());
                    if let Some(e) = amb.find_nice_superset(&start, &VertexSet::new()) {
                        push(&mut fam, e);
                    }
                }
            }
        }
        fam
    }

    fn word_defects(&self, fam: &[VertexSet], a: &VertexSet, b: &VertexSet, out: &mut Vec<Violation>) -> Result<()> {
        let (fa, fb) = (self.flags_inside(a), self.flags_inside(b));
        if fa.is_empty() || fb.is_empty() {
            return Ok(());
        }
        for d in fam {
            let df = self.flags_inside(d);
            for &f in &fa {
                let Some(gf) = self.base_point(f, &df)? else {
                    let v = Violation::NoBasePoint(f);
                    if !out.contains(&v) {
                        out.push(v);
                    }
                    continue;
                };
                let dfg = self.dword(f, gf)?;
                for &h in &fb {
                    let actual = self.dword(f, h)?;
                    let expected = dfg.concat_reduce(&self.dword(gf, h)?).canonical();
                    if actual != expected {
                        let v = Violation::WordDefect { f, h, expected, actual };
                        if !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn ep_pairs(&self, s: &VertexSet) -> Result<Vec<(VertexId, VertexId, VertexId)>> {
        let g = self.geometry();
        let mut out = Vec::new();
        for &p in s.iter().filter(|&&v| g.level(v) == Some(Level::Plane)) {
            for l in g.lines_in(p).filter(|l| s.contains(l)) {
                match g.exceptional_point(p, l)? {
                    Some(c) => out.push((c, p, l)),
                    None => return Err(Error::MissingExceptional { plane: p, line: l }),
                }
            }
        }
        Ok(out)
    }

    pub fn independent(&self, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<IndependenceCertificate> {
        let g = self.geometry();
        let mut notes = Vec::new();
        let zc = self.closed(z)?;
        if zc != *z {
            notes.push(format!("base {} is not closed", fmt_set(z)));
        }
        let xz: VertexSet = x.union(z).copied().collect();
        let yz: VertexSet = y.union(z).copied().collect();
        let (fx, fy) = (self.fcl(&xz)?, self.fcl(&yz)?);
        let mut violations = Vec::new();

        let fam = self.d_family(z, &fx, &fy);
        self.word_defects(&fam, &fx, &fy, &mut violations)?;
        self.word_defects(&fam, &fy, &fx, &mut violations)?;

        if g.is_colored() {
            let (ex, ey) = (self.ep_pairs(&fx)?, self.ep_pairs(&fy)?);
            let mut seen = BTreeSet::new();
            for &(c, pa, la) in &ex {
                if z.contains(&c) || seen.contains(&c) {
                    continue;
                }
                if let Some(&(_, pb, lb)) = ey.iter().find(|e| e.0 == c) {
                    seen.insert(c);
                    violations.push(Violation::EpCollision {
                        point: c,
                        plane_a: pa,
                        line_a: la,
                        plane_b: pb,
                        line_b: lb,
                    });
                }
            }
        }

        let (ax, ay) = (self.closed(&xz)?, self.closed(&yz)?);
        for &v in ax.intersection(&ay) {
            if !z.contains(&v) {
                violations.push(Violation::ClosureOverlap(v));
            }
        }
        let c: VertexSet = ax.intersection(&ay).copied().collect();
        for e in incidence_defects(g, &ax, &ay, &c) {
            violations.push(Violation::Incidence(e));
        }
        let ab: VertexSet = ax.union(&ay).copied().collect();
        for v in self.closed(&ab)?.difference(&ab) {
            violations.push(Violation::Incidence(format!("{v} in the closure of the union")));
        }
        Ok(IndependenceCertificate {
            verdict: violations.is_empty(),
            violations,
            d_family: fam,
            notes,
        })
    }

    pub fn verify_independence_consequences(&self, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<Report> {
        let g = self.geometry();
        let a = self.closed(&x.union(z).copied().collect())?;
        let b = self.closed(&y.union(z).copied().collect())?;
        let c: VertexSet = a.intersection(&b).copied().collect();
        let mut r = Report::new("independence-consequences");
        r.info("sets", format!("A={} B={} C={}", fmt_set(&a), fmt_set(&b), fmt_set(&c)));

        let ab: VertexSet = a.union(&b).copied().collect();
        let closed = self.closed(&ab)?;
        r.check("union-closed", closed == ab, format!("closure adds {}", closed.len() - ab.len()));

        let [edges, pp, common] = incidence_clauses(g, &a, &b, &c);
        r.check("no-direct-edge", edges.is_empty(), edges.join(" "));
        r.check("point-plane-line", pp.is_empty(), pp.join(" "));
        r.check("common-point", common.is_empty(), common.join(" "));
        Ok(r)
    }

    // ---- kernels and patterns ----

    pub fn kernel_finite(&self, seq: &[Vec<VertexId>]) -> Result<VertexSet> {
        if seq.len() < 4 {
            return Err(Error::Invalid("a kernel needs at least four tuples".into()));
        }
        let block = |r: std::ops::Range<usize>| -> Result<VertexSet> {
            self.closed(&seq[r].iter().flatten().copied().collect())
        };
        let mut out = VertexSet::new();
        for q in 1..seq.len() {
            let (l, r) = (block(0..q)?, block(q..seq.len())?);
            out.extend(l.intersection(&r).copied());
        }
        Ok(out)
    }

    pub fn pf_witness_check(&self, c: &VertexSet, a: &[VertexId], a2: &[VertexId], b: &[VertexId]) -> Result<bool> {
        let cv: Vec<VertexId> = c.iter().copied().collect();
        if !self.types_equal(&concat(a, &cv), &concat(a2, &cv))? {
            return Ok(false);
        }
        let cert = self.independent(&a.iter().copied().collect(), &b.iter().copied().collect(), c)?;
        Ok(cert.verdict)
    }

    pub fn ms_pattern_check(&self, mat: &PatternMatrix) -> Result<Report> {
        mat.check_shape()?;
        let g = self.geometry();
        let (n, m) = (mat.rows(), mat.cols());
        let mut r = Report::new("ms-pattern");
        r.info("shape", format!("{n}x{m} {}", mat.predicate));
        let mut bad = Vec::new();
        for i in 0..n {
            for j in 0..m {
                for l in 0..m {
                    if mat.predicate.holds(g, &mat.a[i][j], &mat.b[i][l])? != (j == l) {
                        bad.push(format!("cell ({i},{j},{l})"));
                    }
                }
            }
        }
        r.check("predicate-diagonal", bad.is_empty(), bad.join(" "));
        let mut bad = Vec::new();
        for i in 0..n {
            for k in i + 1..n {
                for j in 0..m {
                    for l in j + 1..m {
                        let aij = &mat.a[i][j];
                        if !self.types_equal(&concat(aij, &mat.b[i][j]), &concat(aij, &mat.b[k][l]))? {
                            bad.push(format!("cell ({i},{j},{k},{l})"));
                        }
                    }
                }
            }
        }
        r.check("type-pattern", bad.is_empty(), bad.join(" "));
        Ok(r)
    }

    pub fn pf_pattern_check(&self, pairs: &[TuplePair], p_rep: &TuplePair, q_rep: &TuplePair) -> Result<bool> {
        let p = concat(&p_rep.0, &p_rep.1);
        let q = concat(&q_rep.0, &q_rep.1);
        for (i, (ai, bi)) in pairs.iter().enumerate() {
            if !self.types_equal(&concat(ai, bi), &q)? {
                return Ok(false);
            }
            for (_, bj) in &pairs[i + 1..] {
                if !self.types_equal(&concat(ai, bj), &p)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub type TuplePair = (Vec<VertexId>, Vec<VertexId>);

struct Search<'a, 'g> {
    lg: &'a Logic<'g>,
    a: &'a VertexSet,
    b: &'a VertexSet,
    order: Vec<VertexId>,
    seed: PartialMap,
    deg_a: HashMap<VertexId, usize>,
    deg_b: HashMap<VertexId, usize>,
}

impl Search<'_, '_> {
    fn compatible(&self, m: &PartialMap, x: VertexId, y: VertexId) -> bool {
        let g = self.lg.geometry();
        if g.level(x) != g.level(y) || self.deg_a[&x] != self.deg_b[&y] || !self.b.contains(&y) {
            return false;
        }
        if g.level(x) == Some(Level::Line) && g.line_color(x) != g.line_color(y) {
            return false;
        }
        m.pairs().iter().all(|(&u, &v)| {
            g.is_edge(x, u) == g.is_edge(y, v)
                && g.section_color(x, u) == g.section_color(y, v)
                && g.section_color(u, x) == g.section_color(v, y)
        })
    }

    fn run(&mut self, depth: usize, m: &mut PartialMap) -> Result<Option<PartialMap>> {
        if depth == self.order.len() {
            let r = self.lg.map_conditions(m, self.a, self.b)?;
            return Ok(r.passed().then(|| m.clone()));
        }
        let x = self.order[depth];
        let cands: Vec<VertexId> = match self.seed.get(x) {
            Some(y) => vec![y],
            None => self.b.iter().copied().filter(|y| !m.image().contains(y)).collect(),
        };
        for y in cands {
            if m.image().contains(&y) || !self.compatible(m, x, y) {
                continue;
            }
            m.pairs.insert(x, y);
            if let Some(found) = self.run(depth + 1, m)? {
                return Ok(Some(found));
            }
            m.pairs.remove(&x);
        }
        Ok(None)
    }
}

/// Clauses on direct edges, points in planes and common points of lines that
/// hold between independent closed sets `a` and `b` with `c = a ∩ b`.
fn incidence_clauses(g: &Geometry, a: &VertexSet, b: &VertexSet, c: &VertexSet) -> [Vec<String>; 3] {
    let a_only: Vec<VertexId> = a.difference(c).copied().collect();
    let b_only: Vec<VertexId> = b.difference(c).copied().collect();
    let edges: Vec<String> = a_only
        .iter()
        .flat_map(|&u| b_only.iter().filter(move |&&w| g.is_edge(u, w)).map(move |&w| format!("{u}-{w}")))
        .collect();

    let mut pp = Vec::new();
    for (s, t) in [(&a_only, &b_only), (&b_only, &a_only)] {
        for &p in s.iter().filter(|&&v| g.level(v) == Some(Level::Point)) {
            for &q in t.iter().filter(|&&v| g.level(v) == Some(Level::Plane)) {
                if g.point_in_plane(q, p) && !g.lines_joining(q, p).iter().any(|l| c.contains(l)) {
                    pp.push(format!("{p} in {q}"));
                }
            }
        }
    }

    let mut common = Vec::new();
    for &l1 in a_only.iter().filter(|&&v| g.level(v) == Some(Level::Line)) {
        for &l2 in b_only.iter().filter(|&&v| g.level(v) == Some(Level::Line)) {
            for p in g.points_on(l1).filter(|&p| g.is_edge(p, l2)) {
                if !c.contains(&p) {
                    common.push(format!("{p} on {l1},{l2}"));
                }
            }
        }
    }
    [edges, pp, common]
}

fn incidence_defects(g: &Geometry, a: &VertexSet, b: &VertexSet, c: &VertexSet) -> Vec<String> {
    let [e, p, q] = incidence_clauses(g, a, b, c);
    e.into_iter().chain(p).chain(q).collect()
}

pub fn check_elementary_map(g: &Geometry, m: &PartialMap, x: &VertexSet, y: &VertexSet) -> Result<Report> {
    Logic::new(g).check_elementary_map(m, x, y)
}

pub fn types_equal(g: &Geometry, u: &[VertexId], v: &[VertexId]) -> Result<bool> {
    Logic::new(g).types_equal(u, v)
}

pub fn independent(g: &Geometry, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<IndependenceCertificate> {
    Logic::new(g).independent(x, y, z)
}

pub fn verify_independence_consequences(g: &Geometry, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<Report> {
    Logic::new(g).verify_independence_consequences(x, y, z)
}

pub fn kernel_finite(g: &Geometry, seq: &[Vec<VertexId>]) -> Result<VertexSet> {
    Logic::new(g).kernel_finite(seq)
}

pub fn pf_witness_check(g: &Geometry, c: &VertexSet, a: &[VertexId], a2: &[VertexId], b: &[VertexId]) -> Result<bool> {
    Logic::new(g).pf_witness_check(c, a, a2, b)
}

pub fn ms_pattern_check(g: &Geometry, mat: &PatternMatrix) -> Result<Report> {
    Logic::new(g).ms_pattern_check(mat)
}

pub fn pf_pattern_check(g: &Geometry, pairs: &[TuplePair], p_rep: &TuplePair, q_rep: &TuplePair) -> Result<bool> {
    Logic::new(g).pf_pattern_check(pairs, p_rep, q_rep)
}

/// Exceptional points of `fcl X`, exposed for certificates.
pub fn exceptional_points(g: &Geometry, x: &VertexSet) -> Result<VertexSet> {
    ep_set(g, &Closure::new(g).fcl(x)?.members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{new_flag_geometry, ColorChoice, ColorSpec};
    use crate::words::Letter;

    fn set(v: &[VertexId]) -> VertexSet {
        v.iter().copied().collect()
    }

    /// Line 1 with points 2 and 4 in planes 0 and 3; point 2 is exceptional
    /// in both planes.
    fn shared_exceptional() -> Geometry {
        let (mut g, f) = new_flag_geometry(Some(ColorSpec::cyclic(2).unwrap()), 0, 1).unwrap();
        g.apply_operation_mut(f, Letter::P2, ColorChoice::FlagPointExceptional).unwrap();
        g.apply_operation_mut(f, Letter::P0, ColorChoice::Forced).unwrap();
        g
    }

    #[test]
    fn partial_map_rejects_collisions() {
        let mut m = PartialMap::new();
        m.insert(1, 2).unwrap();
        assert!(m.insert(1, 3).is_err());
        assert!(m.insert(4, 2).is_err());
        assert_eq!(m.to_string(), "1>2");
    }

    #[test]
    fn predicate_tokens() {
        for p in [Predicate::SectionColor(3), Predicate::Exceptional, Predicate::Incident] {
            assert_eq!(p.to_string().parse::<Predicate>().unwrap(), p);
        }
        assert!("colour".parse::<Predicate>().is_err());
    }

    #[test]
    fn shared_exceptional_point_collides() {
        let g = shared_exceptional();
        let cert = independent(&g, &set(&[0]), &set(&[3]), &set(&[1])).unwrap();
        assert!(!cert.verdict);
        assert!(cert.violations.iter().any(|v| matches!(v, Violation::EpCollision { point: 2, .. })));
    }

    #[test]
    fn merging_exceptional_points_breaks_pattern() {
        let mut g = shared_exceptional();
        let f = Flag::new(0, 1, 4);
        let a2 = g.apply_operation_mut(f, Letter::P2, ColorChoice::FlagPointExceptional).unwrap().plane;
        // Planes 0 and a2 have different exceptional points on 1, planes 0 and 3 the same one.
        let x = set(&[0, a2, 1, 2, 4]);
        let y = set(&[0, 3, 1, 2, 4]);
        let m = PartialMap::from_pairs([(0, 0), (a2, 3), (1, 1), (2, 2), (4, 4)]).unwrap();
        let r = check_elementary_map(&g, &m, &x, &y).unwrap();
        assert!(r.failures().any(|e| e.key == "exceptional-pattern"));
        let id = check_elementary_map(&g, &PartialMap::identity(&x), &x, &x).unwrap();
        assert!(id.passed());
    }

    #[test]
    fn unclosed_inputs_are_rejected() {
        let g = shared_exceptional();
        assert!(check_elementary_map(&g, &PartialMap::identity(&set(&[0])), &set(&[0]), &set(&[0])).is_err());
    }

    #[test]
    fn kernel_needs_four_tuples() {
        let g = shared_exceptional();
        assert!(kernel_finite(&g, &[vec![0], vec![0]]).is_err());
        let k = kernel_finite(&g, &vec![vec![0]; 4]).unwrap();
        assert!(k.contains(&0));
    }
}
