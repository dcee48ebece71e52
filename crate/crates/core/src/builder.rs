//! Seeded, stage-by-stage construction of free and colored geometries.
//!
//! Every stage applies one operation to one flag. Colored builds start from a
//! single flag with ids 0, 1, 2 and add exactly one vertex per stage, so the
//! vertices present after stage `j` are exactly the ids below `3 + j`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{new_flag_geometry, Color, ColorChoice, ColorSpec, Flag, Geometry, Level, VertexId};
use crate::report::Report;
use crate::words::Letter;

/// How a step picks the flag it acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    /// The next flag in (plane, line, point) order, cycling.
    RoundRobin,
    /// A flag drawn from the seeded generator.
    Random,
    /// A fixed flag.
    Flag(Flag),
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::RoundRobin => write!(f, "rr"),
            Selector::Random => write!(f, "rand"),
            Selector::Flag(fl) => write!(f, "flag:{},{},{}", fl.plane, fl.line, fl.point),
        }
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Selector> {
        match s {
            "rr" => Ok(Selector::RoundRobin),
            "rand" => Ok(Selector::Random),
            _ => {
                let ids: Vec<VertexId> = s
                    .strip_prefix("flag:")
                    .map(|rest| rest.split(',').filter_map(|t| t.parse().ok()).collect())
                    .unwrap_or_default();
                match ids.as_slice() {
                    [a, b, c] => Ok(Selector::Flag(Flag::new(*a, *b, *c))),
                    _ => Err(Error::Invalid(format!("bad selector `{s}`"))),
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScheduleStep {
    pub letter: Letter,
    pub selector: Selector,
    pub choice: ColorChoice,
}

/// Steps are applied cyclically, one per stage. With no steps every stage is
/// drawn from the generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildSchedule {
    pub steps: Vec<ScheduleStep>,
    pub seed: u64,
    pub stages: usize,
}

impl BuildSchedule {
    pub fn new(steps: Vec<ScheduleStep>, seed: u64, stages: usize) -> BuildSchedule {
        BuildSchedule { steps, seed, stages }
    }

    /// Pseudorandom letters and flags.
    pub fn random(stages: usize, seed: u64) -> BuildSchedule {
        BuildSchedule::new(Vec::new(), seed, stages)
    }

    /// Cycles through `letters`, each applied to the next flag in order.
    pub fn round_robin(letters: &[Letter], stages: usize, seed: u64) -> BuildSchedule {
        let steps = letters
            .iter()
            .map(|&letter| ScheduleStep {
                letter,
                selector: Selector::RoundRobin,
                choice: ColorChoice::Forced,
            })
            .collect();
        BuildSchedule::new(steps, seed, stages)
    }

    /// Parses `seed <n>` and `stages <n>` directives and step lines
    /// `<letter> <selector> [<choice>]`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<BuildSchedule> {
        let mut sched = BuildSchedule::new(Vec::new(), 0, 0);
        let mut stages = None;
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::ScheduleParse { line: n, msg };
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["seed", v] => sched.seed = v.parse().map_err(|_| err(format!("bad seed `{v}`")))?,
                ["stages", v] => stages = Some(v.parse().map_err(|_| err(format!("bad stages `{v}`")))?),
                [letter, sel, rest @ ..] if rest.len() <= 1 => {
                    let letter: Letter = letter.parse().map_err(|e: Error| err(e.to_string()))?;
                    let selector: Selector = sel.parse().map_err(|e: Error| err(e.to_string()))?;
                    let choice = match rest {
                        [c] => c.parse().map_err(|e: Error| err(e.to_string()))?,
                        _ => ColorChoice::Forced,
                    };
                    sched.steps.push(ScheduleStep { letter, selector, choice });
                }
                _ => return Err(err(format!("cannot parse `{line}`"))),
            }
        }
        sched.stages = stages.unwrap_or(sched.steps.len());
        Ok(sched)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("seed {}\nstages {}\n", self.seed, self.stages);
        for s in &self.steps {
            out.push_str(&format!("{} {} {}\n", s.letter, s.selector, s.choice));
        }
        out
    }
}

/// Finite stand-in for "infinitely many": instances built before `cutoff`
/// need `n` witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WitnessBudget {
    pub n: usize,
    pub cutoff: usize,
}

impl WitnessBudget {
    pub fn new(n: usize, cutoff: usize) -> Result<WitnessBudget> {
        if n == 0 {
            return Err(Error::Invalid("witness count must be at least 1".into()));
        }
        Ok(WitnessBudget { n, cutoff })
    }

    /// Vertices with ids below this bound were created before the cutoff.
    pub fn id_limit(&self) -> VertexId {
        (3 + self.cutoff) as VertexId
    }
}

struct Driver {
    rng: ChaCha8Rng,
    rr: usize,
    step: usize,
}

impl Driver {
    fn new(seed: u64) -> Driver {
        Driver {
            rng: ChaCha8Rng::seed_from_u64(seed),
            rr: 0,
            step: 0,
        }
    }

    fn pick_flag(&mut self, g: &Geometry, sel: Selector) -> Result<Flag> {
        match sel {
            Selector::Flag(f) => {
                g.require_flag(f)?;
                Ok(f)
            }
            Selector::RoundRobin => {
                let flags = g.flags();
                let f = flags[self.rr % flags.len()];
                self.rr += 1;
                Ok(f)
            }
            Selector::Random => {
                let flags = g.flags();
                Ok(flags[self.rng.gen_range(0..flags.len())])
            }
        }
    }

    /// The next scheduled operation, with any open choice drawn from the generator.
    fn next_step(&mut self, g: &Geometry, sched: &BuildSchedule, letters: &[Letter]) -> Result<(Flag, Letter, ColorChoice)> {
        let step = if sched.steps.is_empty() {
            ScheduleStep {
                letter: letters[self.rng.gen_range(0..letters.len())],
                selector: Selector::Random,
                choice: ColorChoice::Forced,
            }
        } else {
            let s = sched.steps[self.step % sched.steps.len()];
            self.step += 1;
            s
        };
        let f = self.pick_flag(g, step.selector)?;
        let choice = if !g.is_colored() {
            ColorChoice::Forced
        } else {
            match (step.letter, step.choice) {
                (Letter::P1, ColorChoice::Forced) => {
                    if self.rng.gen_bool(0.5) {
                        ColorChoice::Same
                    } else {
                        ColorChoice::Predecessor
                    }
                }
                (Letter::P2, ColorChoice::Forced) => {
                    if self.rng.gen_bool(0.5) {
                        ColorChoice::NoExceptional
                    } else {
                        ColorChoice::FlagPointExceptional
                    }
                }
                (_, c) => c,
            }
        };
        Ok((f, step.letter, choice))
    }
}

/// Colourless build from a single flag.
pub fn build_free(schedule: &BuildSchedule) -> Result<Geometry> {
    let (mut g, _) = new_flag_geometry(None, 0, 0)?;
    let mut d = Driver::new(schedule.seed);
    for _ in 0..schedule.stages {
        let (f, s, _) = d.next_step(&g, schedule, &Letter::ALL)?;
        g.apply_operation_mut(f, s, ColorChoice::Forced)?;
    }
    Ok(g)
}

/// One unmet inductive-axiom requirement.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Demand {
    /// Line `b` in plane `a` has no exceptional point.
    Exceptional { plane: VertexId, line: VertexId },
    /// Point `c` of plane `a` (section color `color`) has too few lines
    /// through it in `a` of the same color.
    SameLines { plane: VertexId, point: VertexId, color: Color, have: usize },
    /// As above for lines whose color has `color` as successor.
    PredLines { plane: VertexId, point: VertexId, color: Color, have: usize },
    /// Point `c` on line `b` is exceptional in too few planes through `b`.
    ExceptionalPlanes { point: VertexId, line: VertexId, have: usize },
}

impl fmt::Display for Demand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Demand::Exceptional { plane, line } => write!(f, "exceptional({plane},{line}) have 0"),
            Demand::SameLines { plane, point, color, have } => {
                write!(f, "same-lines({plane},{point}) color {color} have {have}")
            }
            Demand::PredLines { plane, point, color, have } => {
                write!(f, "pred-lines({plane},{point}) color {color} have {have}")
            }
            Demand::ExceptionalPlanes { point, line, have } => {
                write!(f, "exceptional-planes({point},{line}) have {have}")
            }
        }
    }
}

impl Demand {
    /// How many more witnesses the instance needs.
    fn missing(&self, n: usize) -> usize {
        match self {
            Demand::Exceptional { .. } => 1,
            Demand::SameLines { have, .. } | Demand::PredLines { have, .. } | Demand::ExceptionalPlanes { have, .. } => {
                n - have
            }
        }
    }
}

/// Instance counts by kind, plus unmet demands, for vertices below `limit`.
struct Census {
    instances: BTreeMap<&'static str, usize>,
    demands: Vec<Demand>,
}

fn census(g: &Geometry, n: usize, limit: VertexId) -> Result<Census> {
    let spec = g.color_spec().ok_or(Error::Uncolored)?;
    let mut instances = BTreeMap::new();
    let mut demands = Vec::new();
    let early = |v: VertexId| v < limit;
    for a in g.vertices_at(Level::Plane).filter(|&a| early(a)) {
        for b in g.lines_in(a).filter(|&b| early(b)) {
            *instances.entry("exceptional").or_insert(0) += 1;
            if g.exceptional_point(a, b)?.is_none() {
                demands.push(Demand::Exceptional { plane: a, line: b });
            }
        }
        for c in g.points_in(a).into_iter().filter(|&c| early(c)) {
            let Some(i) = g.section_color(a, c) else {
                return Err(Error::Invalid(format!("pair ({a}, {c}) has no section color")));
            };
            let mut same = 0;
            let mut pred = 0;
            for b in g.lines_joining(a, c) {
                let j = g.line_color(b).ok_or_else(|| Error::Invalid(format!("line {b} has no color")))?;
                if j == i {
                    same += 1;
                }
                if spec.successor(j) == i {
                    pred += 1;
                }
            }
            *instances.entry("same-lines").or_insert(0) += 1;
            if same < n {
                demands.push(Demand::SameLines { plane: a, point: c, color: i, have: same });
            }
            // A color nobody maps onto imposes nothing.
            if spec.predecessor(i).is_some() {
                *instances.entry("pred-lines").or_insert(0) += 1;
                if pred < n {
                    demands.push(Demand::PredLines { plane: a, point: c, color: i, have: pred });
                }
            }
        }
    }
    for b in g.vertices_at(Level::Line).filter(|&b| early(b)) {
        let planes: Vec<VertexId> = g.planes_through(b).collect();
        for c in g.points_on(b).filter(|&c| early(c)) {
            let mut have = 0;
            for &a in &planes {
                if g.exceptional_point(a, b)? == Some(c) {
                    have += 1;
                }
            }
            *instances.entry("exceptional-planes").or_insert(0) += 1;
            if have < n {
                demands.push(Demand::ExceptionalPlanes { point: c, line: b, have });
            }
        }
    }
    Ok(Census { instances, demands })
}

/// The operation servicing `d`, and its net effect on the number of missing
/// witnesses were the new vertex counted: (created, served).
fn service(g: &Geometry, d: &Demand, n: usize, limit: VertexId) -> Result<(Flag, Letter, ColorChoice, usize, usize)> {
    let first = |it: &mut dyn Iterator<Item = VertexId>, what: &str| {
        it.next().ok_or_else(|| Error::Invalid(format!("no {what} to complete a flag")))
    };
    Ok(match *d {
        Demand::Exceptional { plane, line } => {
            let c = first(&mut g.points_on(line), "point")?;
            let planes: Vec<VertexId> = g.planes_through(line).collect();
            let mut served = 0;
            for &a in &planes {
                if a < limit && g.exceptional_point(a, line)?.is_none() {
                    served += 1;
                }
            }
            let created = 2 * n * planes.len() + n;
            (Flag::new(plane, line, c), Letter::P0, ColorChoice::Forced, created, served)
        }
        Demand::SameLines { plane, point, .. } => {
            let b = g.lines_joining(plane, point)[0];
            (Flag::new(plane, b, point), Letter::P1, ColorChoice::Same, 1 + n, 1)
        }
        Demand::PredLines { plane, point, .. } => {
            let b = g.lines_joining(plane, point)[0];
            (Flag::new(plane, b, point), Letter::P1, ColorChoice::Predecessor, n, 1)
        }
        Demand::ExceptionalPlanes { point, line, .. } => {
            let a = first(&mut g.planes_through(line), "plane")?;
            let q = g.points_on(line).count();
            (Flag::new(a, line, point), Letter::P2, ColorChoice::FlagPointExceptional, 2 * n * q, 1)
        }
    })
}

fn first_missing_exceptional(g: &Geometry) -> Result<Option<Flag>> {
    for a in g.vertices_at(Level::Plane) {
        for b in g.lines_in(a) {
            if g.exceptional_point(a, b)?.is_none() {
                let c = g.points_on(b).next().expect("lines carry points");
                return Ok(Some(Flag::new(a, b, c)));
            }
        }
    }
    Ok(None)
}

/// Colored build. Stages first service the inductive-axiom demands of
/// instances born before the cutoff: before the cutoff the demand whose
/// servicing adds the fewest new missing witnesses goes first, after it the one
/// serving the most. Once nothing is owed, lines lacking an exceptional point
/// in some plane get one, and then the schedule drives growth.
/// `observe` sees the geometry after every stage.
pub fn build_colored_with(
    spec: &ColorSpec,
    schedule: &BuildSchedule,
    budget: WitnessBudget,
    mut observe: impl FnMut(&Geometry, usize),
) -> Result<Geometry> {
    for s in &schedule.steps {
        if s.letter.len() != 1 {
            return Err(Error::UnsupportedColoredOp(s.letter.to_string()));
        }
    }
    if budget.cutoff > schedule.stages {
        return Err(Error::Invalid(format!(
            "cutoff {} exceeds stages {}",
            budget.cutoff, schedule.stages
        )));
    }
    let (mut g, _) = new_flag_geometry(Some(spec.clone()), 0, 0)?;
    let limit = budget.id_limit();
    let mut d = Driver::new(schedule.seed);
    for stage in 0..schedule.stages {
        let pending = census(&g, budget.n, limit)?.demands;
        let (f, s, choice) = if pending.is_empty() {
            // Keep every line exceptional in every plane before free growth.
            match first_missing_exceptional(&g)? {
                Some(f) => (f, Letter::P0, ColorChoice::Forced),
                None => d.next_step(&g, schedule, &[Letter::P0, Letter::P1, Letter::P2])?,
            }
        } else {
            let before = stage < budget.cutoff;
            let mut best: Option<((i64, usize), (Flag, Letter, ColorChoice))> = None;
            for (i, dem) in pending.iter().enumerate() {
                let (f, s, c, created, served) = service(&g, dem, budget.n, limit)?;
                let score = if before {
                    created as i64 - served as i64
                } else {
                    -(served as i64)
                };
                if best.as_ref().is_none_or(|(k, _)| (score, i) < *k) {
                    best = Some(((score, i), (f, s, c)));
                }
            }
            best.expect("pending is nonempty").1
        };
        g.apply_operation_mut(f, s, choice)?;
        observe(&g, stage);
    }
    let left = census(&g, budget.n, limit)?.demands;
    if !left.is_empty() {
        let missing: usize = left.iter().map(|d| d.missing(budget.n)).sum();
        let shown: Vec<String> = left.iter().take(8).map(Demand::to_string).collect();
        return Err(Error::InfeasibleBudget(format!(
            "{} instances short of {missing} witnesses after {} stages: {}",
            left.len(),
            schedule.stages,
            shown.join("; ")
        )));
    }
    Ok(g)
}

pub fn build_colored(spec: &ColorSpec, schedule: &BuildSchedule, budget: WitnessBudget) -> Result<Geometry> {
    build_colored_with(spec, schedule, budget, |_, _| {})
}

/// Witness counts for every inductive-axiom instance whose vertices were all
/// created before `budget.cutoff` (ids below `3 + cutoff`). Deficits are
/// reported, not raised.
pub fn audit_inductive_witnesses(g: &Geometry, budget: WitnessBudget) -> Report {
    let mut r = Report::new("inductive-witnesses");
    let c = match census(g, budget.n, budget.id_limit()) {
        Ok(c) => c,
        Err(e) => {
            r.fail("census", e.to_string());
            return r;
        }
    };
    r.info("witnesses-required", budget.n.to_string());
    r.info("cutoff", budget.cutoff.to_string());
    for (kind, count) in &c.instances {
        r.info(format!("instances.{kind}"), count.to_string());
    }
    for d in &c.demands {
        r.fail("deficit", d.to_string());
    }
    r.check("deficits", c.demands.is_empty(), c.demands.len().to_string());
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{audit_universal, validate_geometry};
    use crate::psg::to_psg_string;

    #[test]
    fn zero_stages_is_one_flag() {
        let g = build_free(&BuildSchedule::random(0, 1)).unwrap();
        assert_eq!(g.flags().len(), 1);
    }

    #[test]
    fn free_builds_are_deterministic_and_valid() {
        let sched = BuildSchedule::round_robin(&Letter::ALL, 60, 3);
        let g = build_free(&sched).unwrap();
        assert!(validate_geometry(&g).passed());
        assert_eq!(to_psg_string(&g), to_psg_string(&build_free(&sched).unwrap()));
        let h = build_free(&BuildSchedule::random(60, 9)).unwrap();
        assert_eq!(to_psg_string(&h), to_psg_string(&build_free(&BuildSchedule::random(60, 9)).unwrap()));
    }

    #[test]
    fn schedule_text_round_trip() {
        let text = "seed 7\nstages 5\n0 rr -\n1 rand pred\n2 flag:0,1,2 exc@1\n";
        let s = BuildSchedule::parse(text).unwrap();
        assert_eq!(s.steps.len(), 3);
        assert_eq!(s.to_text(), text);
        assert!(BuildSchedule::parse("0 sometimes\n").is_err());
        assert!(matches!(
            BuildSchedule::parse("0 rr\nzz rr\n"),
            Err(Error::ScheduleParse { line: 2, .. })
        ));
    }

    #[test]
    fn single_flag_lacks_exceptional_point() {
        let (g, _) = new_flag_geometry(Some(ColorSpec::cyclic(2).unwrap()), 0, 0).unwrap();
        let r = audit_inductive_witnesses(&g, WitnessBudget::new(1, 0).unwrap());
        assert!(r.failures().any(|e| e.detail.starts_with("exceptional(0,1)")));
    }

    #[test]
    fn small_colored_build_meets_budget() {
        let spec = ColorSpec::cyclic(3).unwrap();
        let budget = WitnessBudget::new(1, 10).unwrap();
        let mut worst = 0;
        let g = build_colored_with(&spec, &BuildSchedule::random(60, 5), budget, |g, _| {
            worst = worst.max(audit_universal(g).failure_count());
        })
        .unwrap();
        assert_eq!(worst, 0);
        assert!(validate_geometry(&g).passed());
        assert!(audit_inductive_witnesses(&g, budget).passed());
    }

    #[test]
    fn colored_builds_reject_compound_letters() {
        let spec = ColorSpec::cyclic(2).unwrap();
        let sched = BuildSchedule::round_robin(&[Letter::P01], 5, 0);
        assert!(build_colored(&spec, &sched, WitnessBudget::new(1, 0).unwrap()).is_err());
    }
}
