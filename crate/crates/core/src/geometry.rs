//! Three-level incidence geometries (points, lines, planes), flags, the six
//! free flag operations and the optional line/section coloring.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::report::Report;
use crate::words::Letter;

pub type VertexId = u32;
pub type Color = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Point = 0,
    Line = 1,
    Plane = 2,
}

impl Level {
    pub fn from_index(i: u8) -> Option<Level> {
        match i {
            0 => Some(Level::Point),
            1 => Some(Level::Line),
            2 => Some(Level::Plane),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Level::Point => "point",
            Level::Line => "line",
            Level::Plane => "plane",
        };
        f.write_str(s)
    }
}

/// An incident triple plane – line – point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Flag {
    pub plane: VertexId,
    pub line: VertexId,
    pub point: VertexId,
}

impl Flag {
    pub fn new(plane: VertexId, line: VertexId, point: VertexId) -> Flag {
        Flag { plane, line, point }
    }

    pub fn at(self, level: u8) -> VertexId {
        match level {
            0 => self.point,
            1 => self.line,
            _ => self.plane,
        }
    }

    pub fn vertices(self) -> [VertexId; 3] {
        [self.point, self.line, self.plane]
    }

    pub fn contains(self, v: VertexId) -> bool {
        self.point == v || self.line == v || self.plane == v
    }

    /// Levels on which the two flags differ, ascending.
    pub fn differing_levels(self, other: Flag) -> Vec<u8> {
        (0..3u8).filter(|&l| self.at(l) != other.at(l)).collect()
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}", self.plane, self.line, self.point)
    }
}

/// Number of colors and the exceptional-point shift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorSpec {
    successor: Vec<Color>,
}

impl ColorSpec {
    /// `i ↦ i+1 mod k`.
    pub fn cyclic(k: usize) -> Result<ColorSpec> {
        ColorSpec::from_successor((0..k).map(|i| (i + 1) % k.max(1)).collect())
    }

    pub fn from_successor(successor: Vec<Color>) -> Result<ColorSpec> {
        let k = successor.len();
        if k < 2 {
            return Err(Error::InvalidColorSpec(format!("k = {k}, need k >= 2")));
        }
        for (i, &j) in successor.iter().enumerate() {
            if j >= k {
                return Err(Error::InvalidColorSpec(format!("successor({i}) = {j} >= k")));
            }
            if j == i {
                return Err(Error::InvalidColorSpec(format!("successor has fixed point {i}")));
            }
        }
        Ok(ColorSpec { successor })
    }

    pub fn k(&self) -> usize {
        self.successor.len()
    }

    pub fn successor(&self, i: Color) -> Color {
        self.successor[i]
    }

    pub fn successor_map(&self) -> &[Color] {
        &self.successor
    }

    /// Smallest `j` with `successor(j) = i`.
    pub fn predecessor(&self, i: Color) -> Option<Color> {
        self.successor.iter().position(|&j| j == i)
    }

    pub fn is_cyclic(&self) -> bool {
        let k = self.k();
        self.successor.iter().enumerate().all(|(i, &j)| j == (i + 1) % k)
    }

    fn check(&self, c: Color) -> Result<()> {
        if c >= self.k() {
            Err(Error::ColorOutOfRange { color: c, k: self.k() })
        } else {
            Ok(())
        }
    }
}

/// Coloring decision attached to one operation of a colored build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ColorChoice {
    /// No decision: uncolored builds and op `[0]`, whose coloring is forced.
    Forced,
    /// Op `[1]`: the new line gets the section color of the flag's pair.
    Same,
    /// Op `[1]`: the new line gets the predecessor color, so the flag's point
    /// becomes its exceptional point in the plane.
    Predecessor,
    /// Op `[2]`: every point of the line keeps the line color in the new plane.
    NoExceptional,
    /// Op `[2]`: the flag's point is exceptional for the line in the new plane.
    FlagPointExceptional,
    /// Op `[2]`: the n-th point of the line (id order, modulo the number of
    /// points) is exceptional in the new plane.
    ExceptionalAt(usize),
}

impl fmt::Display for ColorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColorChoice::Forced => write!(f, "-"),
            ColorChoice::Same => write!(f, "same"),
            ColorChoice::Predecessor => write!(f, "pred"),
            ColorChoice::NoExceptional => write!(f, "plain"),
            ColorChoice::FlagPointExceptional => write!(f, "exc"),
            ColorChoice::ExceptionalAt(n) => write!(f, "exc@{n}"),
        }
    }
}

impl std::str::FromStr for ColorChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<ColorChoice> {
        match s {
            "-" => Ok(ColorChoice::Forced),
            "same" => Ok(ColorChoice::Same),
            "pred" => Ok(ColorChoice::Predecessor),
            "plain" => Ok(ColorChoice::NoExceptional),
            "exc" => Ok(ColorChoice::FlagPointExceptional),
            _ => s
                .strip_prefix("exc@")
                .and_then(|n| n.parse().ok())
                .map(ColorChoice::ExceptionalAt)
                .ok_or_else(|| Error::BadChoice(format!("unknown choice `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Node {
    level: Level,
    adj: Vec<VertexId>,
}

/// A graph on points, lines and planes, optionally colored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Geometry {
    nodes: Vec<Option<Node>>,
    colors: Option<ColorSpec>,
    line_color: BTreeMap<VertexId, Color>,
    section_color: BTreeMap<(VertexId, VertexId), Color>,
}

impl Geometry {
    pub fn new(colors: Option<ColorSpec>) -> Geometry {
        Geometry {
            colors,
            ..Geometry::default()
        }
    }

    pub fn color_spec(&self) -> Option<&ColorSpec> {
        self.colors.as_ref()
    }

    pub fn is_colored(&self) -> bool {
        self.colors.is_some()
    }

    fn spec(&self) -> Result<&ColorSpec> {
        self.colors.as_ref().ok_or(Error::Uncolored)
    }

    /// Adds a vertex with the next free id.
    pub fn add_vertex(&mut self, level: Level) -> VertexId {
        let id = self.nodes.len() as VertexId;
        self.nodes.push(Some(Node { level, adj: Vec::new() }));
        id
    }

    pub fn insert_vertex(&mut self, id: VertexId, level: Level) -> Result<()> {
        let i = id as usize;
        if i < self.nodes.len() && self.nodes[i].is_some() {
            return Err(Error::Invalid(format!("duplicate vertex id {id}")));
        }
        if i >= self.nodes.len() {
            self.nodes.resize(i + 1, None);
        }
        self.nodes[i] = Some(Node { level, adj: Vec::new() });
        Ok(())
    }

    /// Adds an undirected edge between existing vertices. Level structure is
    /// not enforced here; `validate_geometry` reports violations.
    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        if u == v {
            return Err(Error::Invalid(format!("self-loop on {u}")));
        }
        self.node(u)?;
        self.node(v)?;
        for (x, y) in [(u, v), (v, u)] {
            let adj = &mut self.nodes[x as usize].as_mut().expect("checked").adj;
            if let Err(pos) = adj.binary_search(&y) {
                adj.insert(pos, y);
            }
        }
        Ok(())
    }

    pub fn set_line_color(&mut self, line: VertexId, color: Color) -> Result<()> {
        self.spec()?.check(color)?;
        self.line_color.insert(line, color);
        Ok(())
    }

    pub fn set_section_color(&mut self, plane: VertexId, point: VertexId, color: Color) -> Result<()> {
        self.spec()?.check(color)?;
        self.section_color.insert((plane, point), color);
        Ok(())
    }

    fn node(&self, v: VertexId) -> Result<&Node> {
        self.nodes
            .get(v as usize)
            .and_then(Option::as_ref)
            .ok_or(Error::UnknownVertex(v))
    }

    fn node_opt(&self, v: VertexId) -> Option<&Node> {
        self.nodes.get(v as usize).and_then(Option::as_ref)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.node_opt(v).is_some()
    }

    pub fn level(&self, v: VertexId) -> Option<Level> {
        self.node_opt(v).map(|n| n.level)
    }

    pub fn require_level(&self, v: VertexId, level: Level) -> Result<()> {
        match self.level(v) {
            None => Err(Error::UnknownVertex(v)),
            Some(l) if l == level => Ok(()),
            Some(l) => Err(Error::WrongLevel(v, format!("expected {level}, found {l}"))),
        }
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.node_opt(v).map(|n| n.adj.as_slice()).unwrap_or(&[])
    }

    /// Neighbors of `v` at the given level.
    pub fn neighbors_at(&self, v: VertexId, level: Level) -> impl Iterator<Item = VertexId> + '_ {
        self.neighbors(v)
            .iter()
            .copied()
            .filter(move |&u| self.level(u) == Some(level))
    }

    pub fn vertex_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_some()).count()
    }

    /// One past the largest id ever allocated.
    pub fn id_bound(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().flatten().map(|n| n.adj.len()).sum::<usize>() / 2
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.is_some())
            .map(|(i, _)| i as VertexId)
    }

    pub fn vertices_at(&self, level: Level) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(move |&v| self.level(v) == Some(level))
    }

    /// Edges as `(smaller, larger)` pairs in ascending order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for u in self.vertices() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn line_colors(&self) -> &BTreeMap<VertexId, Color> {
        &self.line_color
    }

    pub fn section_colors(&self) -> &BTreeMap<(VertexId, VertexId), Color> {
        &self.section_color
    }

    pub fn line_color(&self, line: VertexId) -> Option<Color> {
        self.line_color.get(&line).copied()
    }

    pub fn section_color(&self, plane: VertexId, point: VertexId) -> Option<Color> {
        self.section_color.get(&(plane, point)).copied()
    }

    pub fn is_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn points_on(&self, line: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.neighbors_at(line, Level::Point)
    }

    pub fn planes_through(&self, line: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.neighbors_at(line, Level::Plane)
    }

    pub fn lines_through(&self, point: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.neighbors_at(point, Level::Line)
    }

    pub fn lines_in(&self, plane: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.neighbors_at(plane, Level::Line)
    }

    /// Lines incident with both the plane and the point.
    pub fn lines_joining(&self, plane: VertexId, point: VertexId) -> Vec<VertexId> {
        self.lines_through(point)
            .filter(|&b| self.is_edge(b, plane))
            .collect()
    }

    /// The point lies in the plane (via some line).
    pub fn point_in_plane(&self, plane: VertexId, point: VertexId) -> bool {
        self.level(plane) == Some(Level::Plane)
            && self.level(point) == Some(Level::Point)
            && self.lines_through(point).any(|b| self.is_edge(b, plane))
    }

    pub fn points_in(&self, plane: VertexId) -> Vec<VertexId> {
        let set: BTreeSet<VertexId> = self.lines_in(plane).flat_map(|b| self.points_on(b)).collect();
        set.into_iter().collect()
    }

    pub fn planes_containing_point(&self, point: VertexId) -> Vec<VertexId> {
        let set: BTreeSet<VertexId> = self
            .lines_through(point)
            .flat_map(|b| self.planes_through(b))
            .collect();
        set.into_iter().collect()
    }

    pub fn is_flag(&self, f: Flag) -> bool {
        self.level(f.plane) == Some(Level::Plane)
            && self.level(f.line) == Some(Level::Line)
            && self.level(f.point) == Some(Level::Point)
            && self.is_edge(f.plane, f.line)
            && self.is_edge(f.line, f.point)
    }

    pub fn require_flag(&self, f: Flag) -> Result<()> {
        if self.is_flag(f) {
            Ok(())
        } else {
            Err(Error::NotAFlag(f.plane, f.line, f.point))
        }
    }

    /// All flags, sorted by (plane, line, point).
    pub fn flags(&self) -> Vec<Flag> {
        let mut out = Vec::new();
        for a in self.vertices_at(Level::Plane) {
            for b in self.lines_in(a) {
                for c in self.points_on(b) {
                    out.push(Flag::new(a, b, c));
                }
            }
        }
        out
    }

    pub fn flags_through(&self, v: VertexId) -> Vec<Flag> {
        let mut out = Vec::new();
        match self.level(v) {
            Some(Level::Point) => {
                for b in self.lines_through(v) {
                    for a in self.planes_through(b) {
                        out.push(Flag::new(a, b, v));
                    }
                }
            }
            Some(Level::Line) => {
                for a in self.planes_through(v) {
                    for c in self.points_on(v) {
                        out.push(Flag::new(a, v, c));
                    }
                }
            }
            Some(Level::Plane) => {
                for b in self.lines_in(v) {
                    for c in self.points_on(b) {
                        out.push(Flag::new(v, b, c));
                    }
                }
            }
            None => {}
        }
        out.sort();
        out
    }

    /// Connected component index for every vertex id (`usize::MAX` for gaps).
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        for s in self.vertices() {
            if comp[s as usize] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s as usize] = next;
            while let Some(u) = stack.pop() {
                for &v in self.neighbors(u) {
                    if comp[v as usize] == usize::MAX {
                        comp[v as usize] = next;
                        stack.push(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Induced sub-geometry on `keep`, preserving ids and colors.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> Geometry {
        let mut g = Geometry::new(self.colors.clone());
        for &v in keep {
            if let Some(l) = self.level(v) {
                g.insert_vertex(v, l).expect("fresh id");
            }
        }
        for (u, v) in self.edges() {
            if keep.contains(&u) && keep.contains(&v) {
                g.add_edge(u, v).expect("both present");
            }
        }
        for (&b, &col) in &self.line_color {
            if keep.contains(&b) {
                g.line_color.insert(b, col);
            }
        }
        let pairs: Vec<_> = self.section_color.iter().map(|(&k, &c)| (k, c)).collect();
        for ((a, c), col) in pairs {
            if keep.contains(&a) && keep.contains(&c) && g.point_in_plane(a, c) {
                g.section_color.insert((a, c), col);
            }
        }
        g
    }

    /// Points `c` on `line` whose section color in `plane` is the successor of
    /// the line color.
    pub fn exceptional_candidates(&self, plane: VertexId, line: VertexId) -> Result<Vec<VertexId>> {
        let spec = self.spec()?;
        self.require_level(plane, Level::Plane)?;
        self.require_level(line, Level::Line)?;
        if !self.is_edge(plane, line) {
            return Err(Error::NotIncident { plane, line });
        }
        let Some(i) = self.line_color(line) else {
            return Ok(Vec::new());
        };
        let target = spec.successor(i);
        Ok(self
            .points_on(line)
            .filter(|&c| self.section_color(plane, c) == Some(target))
            .collect())
    }

    /// The exceptional point of `line` in `plane`, if any.
    pub fn exceptional_point(&self, plane: VertexId, line: VertexId) -> Result<Option<VertexId>> {
        let cands = self.exceptional_candidates(plane, line)?;
        match cands.as_slice() {
            [] => Ok(None),
            [c] => Ok(Some(*c)),
            _ => Err(Error::Invalid(format!(
                "line {line} has {} exceptional points in plane {plane}",
                cands.len()
            ))),
        }
    }

    /// Applies the free operation `s` to `f` in place and returns the new flag.
    pub fn apply_operation_mut(&mut self, f: Flag, s: Letter, choice: ColorChoice) -> Result<Flag> {
        self.require_flag(f)?;
        if self.is_colored() && s.len() != 1 {
            return Err(Error::UnsupportedColoredOp(s.to_string()));
        }
        // Decide colors before mutating so a rejected choice leaves self intact.
        let plan = if self.is_colored() {
            Some(self.plan_coloring(f, s, choice)?)
        } else {
            None
        };
        let mut g = [f.point, f.line, f.plane];
        for level in s.lo()..=s.hi() {
            g[level as usize] = self.add_vertex(Level::from_index(level).expect("level <= 2"));
        }
        let new = Flag::new(g[2], g[1], g[0]);
        if new.plane != f.plane || new.line != f.line {
            self.add_edge(new.plane, new.line)?;
        }
        if new.line != f.line || new.point != f.point {
            self.add_edge(new.line, new.point)?;
        }
        if let Some(plan) = plan {
            match plan {
                ColoringPlan::NewPoint(colors) => {
                    for (a, col) in colors {
                        self.section_color.insert((a, new.point), col);
                    }
                }
                ColoringPlan::NewLine(col) => {
                    self.line_color.insert(new.line, col);
                }
                ColoringPlan::NewPlane(colors) => {
                    for (c, col) in colors {
                        self.section_color.insert((new.plane, c), col);
                    }
                }
            }
        }
        Ok(new)
    }

    /// Functional form of `apply_operation_mut`.
    pub fn apply_operation(&self, f: Flag, s: Letter, choice: ColorChoice) -> Result<(Geometry, Flag)> {
        let mut g = self.clone();
        let new = g.apply_operation_mut(f, s, choice)?;
        Ok((g, new))
    }

    fn plan_coloring(&self, f: Flag, s: Letter, choice: ColorChoice) -> Result<ColoringPlan> {
        let spec = self.spec()?;
        match s {
            Letter::P0 => {
                if choice != ColorChoice::Forced {
                    return Err(Error::BadChoice(format!("op [0] takes no choice, got {choice}")));
                }
                let i = self.line_color(f.line).ok_or_else(|| {
                    Error::Invalid(format!("line {} has no color", f.line))
                })?;
                let mut colors = Vec::new();
                for a in self.planes_through(f.line) {
                    let col = if self.exceptional_point(a, f.line)?.is_some() {
                        i
                    } else {
                        spec.successor(i)
                    };
                    colors.push((a, col));
                }
                Ok(ColoringPlan::NewPoint(colors))
            }
            Letter::P1 => {
                let i = self.section_color(f.plane, f.point).ok_or_else(|| {
                    Error::Invalid(format!("pair ({}, {}) has no section color", f.plane, f.point))
                })?;
                match choice {
                    ColorChoice::Same => Ok(ColoringPlan::NewLine(i)),
                    ColorChoice::Predecessor => spec
                        .predecessor(i)
                        .map(ColoringPlan::NewLine)
                        .ok_or_else(|| Error::BadChoice(format!("color {i} has no predecessor"))),
                    other => Err(Error::BadChoice(format!("op [1] needs same|pred, got {other}"))),
                }
            }
            Letter::P2 => {
                let i = self.line_color(f.line).ok_or_else(|| {
                    Error::Invalid(format!("line {} has no color", f.line))
                })?;
                let points: Vec<VertexId> = self.points_on(f.line).collect();
                let exceptional = match choice {
                    ColorChoice::NoExceptional => None,
                    ColorChoice::FlagPointExceptional => Some(f.point),
                    ColorChoice::ExceptionalAt(n) => Some(points[n % points.len()]),
                    other => {
                        return Err(Error::BadChoice(format!(
                            "op [2] needs plain|exc|exc@n, got {other}"
                        )))
                    }
                };
                Ok(ColoringPlan::NewPlane(
                    points
                        .into_iter()
                        .map(|c| {
                            let col = if Some(c) == exceptional { spec.successor(i) } else { i };
                            (c, col)
                        })
                        .collect(),
                ))
            }
            _ => Err(Error::UnsupportedColoredOp(s.to_string())),
        }
    }
}

enum ColoringPlan {
    NewPoint(Vec<(VertexId, Color)>),
    NewLine(Color),
    NewPlane(Vec<(VertexId, Color)>),
}

/// A single flag `a − b − c` with ids 0 (plane), 1 (line), 2 (point).
pub fn new_flag_geometry(
    spec: Option<ColorSpec>,
    line_color: Color,
    section_color: Color,
) -> Result<(Geometry, Flag)> {
    let mut g = Geometry::new(spec);
    let a = g.add_vertex(Level::Plane);
    let b = g.add_vertex(Level::Line);
    let c = g.add_vertex(Level::Point);
    g.add_edge(a, b)?;
    g.add_edge(b, c)?;
    if g.is_colored() {
        g.set_line_color(b, line_color)?;
        g.set_section_color(a, c, section_color)?;
    }
    Ok((g, Flag::new(a, b, c)))
}

/// Structural audit: level-bipartite edges, every vertex in a flag, the two
/// pseudoplane conditions, and coloring totality when colored.
pub fn validate_geometry(g: &Geometry) -> Report {
    let mut r = Report::new("validate-geometry");
    for (u, v) in g.edges() {
        let (lu, lv) = (g.level(u).expect("present"), g.level(v).expect("present"));
        if (lu.index() as i8 - lv.index() as i8).abs() != 1 {
            r.fail("edge-levels", format!("{u}({lu})-{v}({lv})"));
        }
    }
    let mut in_flag = vec![false; g.id_bound()];
    for f in g.flags() {
        for v in f.vertices() {
            in_flag[v as usize] = true;
        }
    }
    for v in g.vertices() {
        if !in_flag[v as usize] {
            r.fail("vertex-in-flag", format!("{v}"));
        }
    }
    // Two lines share at most one point; two lines lie in at most one plane.
    for level in [Level::Point, Level::Plane] {
        let mut seen: BTreeMap<(VertexId, VertexId), VertexId> = BTreeMap::new();
        for x in g.vertices_at(level) {
            let lines: Vec<VertexId> = g.neighbors_at(x, Level::Line).collect();
            for i in 0..lines.len() {
                for j in (i + 1)..lines.len() {
                    if let Some(prev) = seen.insert((lines[i], lines[j]), x) {
                        let key = if level == Level::Point {
                            "lines-share-two-points"
                        } else {
                            "lines-share-two-planes"
                        };
                        r.fail(key, format!("lines {} {} via {prev} and {x}", lines[i], lines[j]));
                    }
                }
            }
        }
    }
    if let Some(spec) = g.color_spec() {
        for b in g.vertices_at(Level::Line) {
            match g.line_color(b) {
                None => r.fail("line-color-missing", format!("{b}")),
                Some(c) if c >= spec.k() => r.fail("line-color-range", format!("{b} -> {c}")),
                _ => {}
            }
        }
        for &b in g.line_colors().keys() {
            if g.level(b) != Some(Level::Line) {
                r.fail("line-color-on-non-line", format!("{b}"));
            }
        }
        for a in g.vertices_at(Level::Plane) {
            for c in g.points_in(a) {
                match g.section_color(a, c) {
                    None => r.fail("section-color-missing", format!("({a}, {c})")),
                    Some(col) if col >= spec.k() => {
                        r.fail("section-color-range", format!("({a}, {c}) -> {col}"))
                    }
                    _ => {}
                }
            }
        }
        for &(a, c) in g.section_colors().keys() {
            if !g.point_in_plane(a, c) {
                r.fail("section-color-on-non-incident", format!("({a}, {c})"));
            }
        }
    }
    r
}

/// For every incident plane–line pair: all points carry the line color except
/// at most one, which carries the successor color.
pub fn audit_universal(g: &Geometry) -> Report {
    let mut r = Report::new("universal-axioms");
    let Some(spec) = g.color_spec() else {
        r.fail("colored", "geometry is uncolored");
        return r;
    };
    for b in g.vertices_at(Level::Line) {
        let Some(i) = g.line_color(b) else {
            r.fail("line-color-missing", format!("{b}"));
            continue;
        };
        for a in g.planes_through(b) {
            let mut exceptional = 0;
            for c in g.points_on(b) {
                match g.section_color(a, c) {
                    Some(col) if col == i => {}
                    Some(col) if col == spec.successor(i) => exceptional += 1,
                    other => r.fail(
                        "section-color",
                        format!("plane {a} line {b} (color {i}) point {c} has {other:?}"),
                    ),
                }
            }
            if exceptional > 1 {
                r.fail(
                    "exceptional-unique",
                    format!("plane {a} line {b} has {exceptional} exceptional points"),
                );
            }
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn colored(k: usize) -> (Geometry, Flag) {
        new_flag_geometry(Some(ColorSpec::cyclic(k).unwrap()), 0, 0).unwrap()
    }

    #[test]
    fn fresh_flag_shapes() {
        let (g, f) = colored(2);
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.line_color(f.line), Some(0));
        assert_eq!(g.section_color(f.plane, f.point), Some(0));
        let (h, _) = new_flag_geometry(None, 0, 0).unwrap();
        assert!(h.line_colors().is_empty() && h.section_colors().is_empty());
        assert!(new_flag_geometry(Some(ColorSpec::cyclic(3).unwrap()), 5, 0).is_err());
        assert!(validate_geometry(&g).passed());
    }

    #[test]
    fn color_spec_rejects_fixed_points() {
        assert!(ColorSpec::from_successor(vec![1, 1]).is_err());
        assert!(ColorSpec::from_successor(vec![1]).is_err());
        let spec = ColorSpec::from_successor(vec![1, 0, 3, 2]).unwrap();
        assert_eq!(spec.predecessor(0), Some(1));
        assert!(!spec.is_cyclic());
        assert!(ColorSpec::cyclic(5).unwrap().is_cyclic());
    }

    #[test]
    fn operation_shapes() {
        let (g, f) = new_flag_geometry(None, 0, 0).unwrap();
        let expected_edges = [
            (Letter::P0, 1),
            (Letter::P1, 2),
            (Letter::P2, 1),
            (Letter::P01, 2),
            (Letter::P12, 2),
            (Letter::P02, 2),
        ];
        for (s, de) in expected_edges {
            let (h, new) = g.apply_operation(f, s, ColorChoice::Forced).unwrap();
            assert_eq!(h.vertex_count(), 3 + s.len(), "{s}");
            assert_eq!(h.edge_count(), 2 + de, "{s}");
            assert!(h.is_flag(new));
            assert_eq!(Letter::from_levels(&f.differing_levels(new)), Some(s));
            assert!(validate_geometry(&h).passed());
        }
        let (h, new) = g.apply_operation(f, Letter::P1, ColorChoice::Forced).unwrap();
        assert!(h.is_edge(f.plane, new.line) && h.is_edge(new.line, f.point));
        let (h, new) = g.apply_operation(f, Letter::P02, ColorChoice::Forced).unwrap();
        let comps = h.components();
        assert_ne!(comps[f.plane as usize], comps[new.plane as usize]);
    }

    #[test]
    fn op0_second_point_keeps_line_color() {
        let (g, f) = colored(3);
        let (g, f1) = g.apply_operation(f, Letter::P0, ColorChoice::Forced).unwrap();
        assert_eq!(g.section_color(f.plane, f1.point), Some(1));
        assert_eq!(g.exceptional_point(f.plane, f.line).unwrap(), Some(f1.point));
        let (g, f2) = g.apply_operation(f, Letter::P0, ColorChoice::Forced).unwrap();
        assert_eq!(g.section_color(f.plane, f2.point), Some(0));
        assert!(audit_universal(&g).passed());
    }

    #[test]
    fn op1_and_op2_choices() {
        let (g, f) = colored(3);
        let (h, n) = g.apply_operation(f, Letter::P1, ColorChoice::Predecessor).unwrap();
        assert_eq!(h.line_color(n.line), Some(2));
        assert_eq!(h.exceptional_point(f.plane, n.line).unwrap(), Some(f.point));
        let (h, n) = g.apply_operation(f, Letter::P1, ColorChoice::Same).unwrap();
        assert_eq!(h.exceptional_point(f.plane, n.line).unwrap(), None);
        assert!(g.apply_operation(f, Letter::P1, ColorChoice::Forced).is_err());
        let (h, n) = g.apply_operation(f, Letter::P2, ColorChoice::FlagPointExceptional).unwrap();
        assert_eq!(h.section_color(n.plane, f.point), Some(1));
        assert!(g.apply_operation(f, Letter::P01, ColorChoice::Forced).is_err());
        assert!(g.apply_operation(f, Letter::P0, ColorChoice::Same).is_err());
    }

    #[test]
    fn hand_made_violations() {
        let mut g = Geometry::new(None);
        let a = g.add_vertex(Level::Plane);
        let c = g.add_vertex(Level::Point);
        g.add_edge(a, c).unwrap();
        let r = validate_geometry(&g);
        assert!(r.failures().any(|e| e.key == "edge-levels"));
        assert!(g.add_edge(a, a).is_err());
    }

    #[test]
    fn two_exceptional_candidates_detected() {
        let (mut g, f) = colored(2);
        let c2 = g.add_vertex(Level::Point);
        g.add_edge(f.line, c2).unwrap();
        g.set_section_color(f.plane, c2, 1).unwrap();
        g.set_section_color(f.plane, f.point, 1).unwrap();
        assert!(g.exceptional_point(f.plane, f.line).is_err());
        assert!(!audit_universal(&g).passed());
        assert!(g.exceptional_point(f.plane, f.point).is_err());
    }
}
