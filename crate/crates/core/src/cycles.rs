//! Witnesses for the cycle of section types `p_0 → p_1 → … → p_0`, the
//! color-shift audit for maps between closed sets, and cycle lengths of the
//! color successor.

use std::collections::BTreeSet;
use std::fmt;

use crate::closure::VertexSet;
use crate::error::{Error, Result};
use crate::geometry::{Color, ColorSpec, Geometry, Level, VertexId};
use crate::logic::{Logic, PartialMap};
use crate::report::Report;

/// A pair `(a, c)` of section color `r`, a line `b` of color `r` joining them
/// and the exceptional point `c'` of `b` in `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CycleWitness {
    pub r: Color,
    pub a: VertexId,
    pub b: VertexId,
    pub c: VertexId,
    pub c_prime: VertexId,
}

impl fmt::Display for CycleWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r={} a={} b={} c={} c'={}",
            self.r, self.a, self.b, self.c, self.c_prime
        )
    }
}

fn singleton(v: VertexId) -> VertexSet {
    [v].into_iter().collect()
}

/// First `(c, a)` in id order with section color `r` and `{a, c}` closed. Pairs
/// whose closure is larger are unfinished at this stage.
pub fn canonical_pair(g: &Geometry, r: Color) -> Result<Option<[VertexId; 2]>> {
    let lg = Logic::new(g);
    for (&(a, c), _) in g.section_colors().iter().filter(|&(_, &col)| col == r) {
        let ac: VertexSet = [a, c].into_iter().collect();
        if lg.closed(&ac)? == ac {
            return Ok(Some([c, a]));
        }
    }
    Ok(None)
}

pub fn construct_cycle_witness(g: &Geometry, r: Color) -> Result<CycleWitness> {
    let spec = g.color_spec().ok_or(Error::Uncolored)?;
    if r >= spec.k() {
        return Err(Error::ColorOutOfRange { color: r, k: spec.k() });
    }
    let lg = Logic::new(g);
    let mut seen_pair = false;
    let mut seen_line = false;
    for (&(a, c), _) in g.section_colors().iter().filter(|&(_, &col)| col == r) {
        seen_pair = true;
        for b in g.lines_joining(a, c) {
            if g.line_color(b) != Some(r) {
                continue;
            }
            seen_line = true;
            let Some(cp) = g.exceptional_point(a, b)? else { continue };
            if cp == c {
                continue;
            }
            // Both closures must be as small as in the infinite model.
            if g.planes_through(b).count() < 2 || g.lines_joining(a, c).len() < 2 {
                continue;
            }
            if lg.closed(&singleton(b))? != singleton(b) {
                continue;
            }
            let ac: VertexSet = [a, c].into_iter().collect();
            if lg.closed(&ac)? != ac {
                continue;
            }
            return Ok(CycleWitness { r, a, b, c, c_prime: cp });
        }
    }
    let why = if !seen_pair {
        format!("no point of section color {r}")
    } else if !seen_line {
        format!("no line of color {r} joins a section-{r} pair (same-color line demand unmet)")
    } else {
        format!("no section-{r} pair has a closed neighbourhood yet (raise the witness budget)")
    };
    Err(Error::NoWitness(why))
}

fn structural(g: &Geometry, w: &CycleWitness) -> std::result::Result<Color, String> {
    let spec = g.color_spec().ok_or("geometry is uncolored")?;
    for (v, lvl) in [(w.a, Level::Plane), (w.b, Level::Line), (w.c, Level::Point), (w.c_prime, Level::Point)] {
        if g.level(v) != Some(lvl) {
            return Err(format!("{v} is not a {lvl}"));
        }
    }
    if !g.is_edge(w.a, w.b) || !g.is_edge(w.b, w.c) {
        return Err(format!("{}-{}-{} is not a flag", w.a, w.b, w.c));
    }
    if w.r >= spec.k() {
        return Err(format!("color {} out of range", w.r));
    }
    if g.line_color(w.b) != Some(w.r) {
        return Err(format!("line {} has color {:?}, expected {}", w.b, g.line_color(w.b), w.r));
    }
    Ok(spec.successor(w.r))
}

pub fn verify_cycle_step(g: &Geometry, w: &CycleWitness) -> Report {
    let mut rep = Report::new(format!("cycle-step {}", w.r));
    rep.info("witness", w.to_string());
    let succ = match structural(g, w) {
        Ok(s) => s,
        Err(msg) => {
            rep.fail("invariants", msg);
            return rep;
        }
    };
    rep.pass("invariants", "");
    rep.check("section-c", g.section_color(w.a, w.c) == Some(w.r), "");
    let expt = g.exceptional_point(w.a, w.b).ok().flatten();
    rep.check("c-prime-exceptional", expt == Some(w.c_prime), "");
    rep.check("c-prime-distinct", w.c != w.c_prime, "");
    rep.check("section-c-prime", g.section_color(w.a, w.c_prime) == Some(succ), "");

    let lg = Logic::new(g);
    let mut run = |key: &str, f: &dyn Fn() -> Result<bool>| match f() {
        Ok(ok) => rep.check(key, ok, ""),
        Err(e) => rep.fail(key, e.to_string()),
    };
    run("unique-type", &|| match canonical_pair(g, w.r)? {
        Some(p) => lg.types_equal(&[w.c, w.a], &p),
        None => Ok(false),
    });
    run("next-type-differs", &|| Ok(!lg.types_equal(&[w.c, w.a], &[w.c_prime, w.a])?));
    run("line-closed", &|| Ok(lg.closed(&singleton(w.b))? == singleton(w.b)));
    run("pf-step", &|| lg.pf_witness_check(&singleton(w.b), &[w.c], &[w.c_prime], &[w.a]));
    rep
}

/// Colors on the successor cycle reached from color 0, in successor order.
pub fn cycle_colors(spec: &ColorSpec) -> Vec<Color> {
    let start = (0..spec.k()).fold(0, |x, _| spec.successor(x));
    let mut out = vec![start];
    let mut x = spec.successor(start);
    while x != start {
        out.push(x);
        x = spec.successor(x);
    }
    out
}

/// Witnesses along the successor cycle through the colors of the initial flag;
/// for `+1 mod k` this is every color.
pub fn run_full_cycle(g: &Geometry, spec: &ColorSpec) -> Result<Report> {
    if g.color_spec() != Some(spec) {
        return Err(Error::Invalid("geometry colors differ from the given spec".into()));
    }
    let colors = cycle_colors(spec);
    let k = colors.len();
    let mut rep = Report::new(format!("cycle k={}", spec.k()));
    rep.info("successor", format!("{:?}", spec.successor_map()));
    rep.info("cycle", format!("{colors:?}"));
    let mut reps = Vec::new();
    for &r in &colors {
        let w = construct_cycle_witness(g, r)?;
        rep.absorb(&format!("step-{r}"), verify_cycle_step(g, &w));
        reps.push([w.c, w.a]);
    }
    let lg = Logic::new(g);
    let mut same = Vec::new();
    for r in 0..k {
        for s in r + 1..k {
            if lg.types_equal(&reps[r], &reps[s])? {
                same.push(format!("{}={}", colors[r], colors[s]));
            }
        }
    }
    rep.check("types-distinct", same.is_empty(), same.join(" "));
    let steps = rep
        .entries
        .iter()
        .filter(|e| e.key.ends_with("pf-step") && e.status == crate::report::Status::Pass)
        .count();
    rep.check("pf-steps", steps == k, format!("{steps}/{k}"));
    Ok(rep)
}

/// For every section pair of `p` whose color changes under `m`: a line of the
/// same color joins the pair inside the base, the point is not exceptional for
/// it, and the color moves to its successor.
pub fn color_shift_audit(
    g: &Geometry,
    m: &PartialMap,
    p: &VertexSet,
    q: &VertexSet,
    split: (&VertexSet, &VertexSet, &VertexSet),
) -> Report {
    let mut rep = Report::new("color-shift");
    let Some(spec) = g.color_spec() else {
        rep.fail("hypotheses", "geometry is uncolored");
        return rep;
    };
    let (xs, ys, zs) = split;
    let covered: VertexSet = xs.iter().chain(ys).chain(zs).copied().collect();
    if !p.is_subset(&covered) {
        rep.fail("hypotheses", "split does not cover the domain");
        return rep;
    }
    let lg = Logic::new(g);
    let mut hyp = Vec::new();
    if m.domain() != *p || m.image() != *q {
        hyp.push("map is not onto".to_string());
    }
    let lines_ok = p
        .iter()
        .filter(|&&v| g.level(v) == Some(Level::Line))
        .all(|&v| m.get(v).is_some_and(|w| g.line_color(v) == g.line_color(w)));
    if !lines_ok {
        hyp.push("line colors not preserved".into());
    }
    if hyp.is_empty() {
        match lg.check_elementary_map(m, p, q) {
            Ok(r) => {
                for e in r.failures().filter(|e| e.key != "colors") {
                    hyp.push(format!("{} {}", e.key, e.detail));
                }
            }
            Err(e) => hyp.push(e.to_string()),
        }
    }
    if !hyp.is_empty() {
        rep.fail("hypotheses", hyp.join("; "));
        return rep;
    }
    rep.pass("hypotheses", "");

    let mut changed = 0;
    let mut bad = BTreeSet::new();
    for &a in p.iter().filter(|&&v| g.level(v) == Some(Level::Plane)) {
        for &c in p.iter().filter(|&&v| g.level(v) == Some(Level::Point)) {
            let Some(j) = g.section_color(a, c) else { continue };
            let (ma, mc) = (m.get(a).expect("total"), m.get(c).expect("total"));
            let Some(j2) = g.section_color(ma, mc) else { continue };
            if j == j2 {
                continue;
            }
            changed += 1;
            rep.info("changed", format!("({a},{c}) {j}->{j2}"));
            let joined = g.lines_joining(a, c).into_iter().find(|b| zs.contains(b));
            let ok = match joined {
                Some(b) => {
                    g.line_color(b) == Some(j)
                        && g.exceptional_point(a, b).ok().flatten() != Some(c)
                        && j2 == spec.successor(j)
                }
                None => false,
            };
            if !ok {
                bad.insert(format!("({a},{c})"));
            }
        }
    }
    rep.info("changed-pairs", changed.to_string());
    rep.check("dichotomy", bad.is_empty(), bad.into_iter().collect::<Vec<_>>().join(" "));
    rep
}

/// Shortest cycle of the successor map; fixed points are rejected.
pub fn shortest_pi_cycle(spec: &ColorSpec) -> Result<usize> {
    shortest_cycle(spec.successor_map())
}

pub fn shortest_cycle(succ: &[Color]) -> Result<usize> {
    let k = succ.len();
    if let Some(i) = (0..k).find(|&i| succ[i] == i) {
        return Err(Error::InvalidColorSpec(format!("{i} is a fixed point")));
    }
    if succ.iter().any(|&j| j >= k) {
        return Err(Error::InvalidColorSpec("successor out of range".into()));
    }
    let mut best = usize::MAX;
    for start in 0..k {
        // After k steps the walk sits on a cycle.
        let p = (0..k).fold(start, |x, _| succ[x]);
        let mut len = 1;
        let mut x = succ[p];
        while x != p {
            x = succ[x];
            len += 1;
        }
        best = best.min(len);
    }
    Ok(best)
}
