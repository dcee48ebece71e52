use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use pseudospace::builder::{audit_inductive_witnesses, build_colored, build_free, BuildSchedule, WitnessBudget};
use pseudospace::closure::{Closure, VertexSet};
use pseudospace::cycles::{run_full_cycle, shortest_pi_cycle};
use pseudospace::geometry::{audit_universal, validate_geometry};
use pseudospace::logic::{Logic, PatternMatrix, Predicate, TuplePair};
use pseudospace::paths::{closed_reduced_path_audit, distance_word, find_reduced_path};
use pseudospace::psg::{load_psg, to_psg_string};
use pseudospace::{ColorSpec, Flag, Geometry, Report, VertexId, Word};

/// Output format version, printed first by every command.
const FORMAT: &str = "format: pseudospace 1";

#[derive(Parser)]
#[command(name = "pseudospace", version, about = "Finite stages of the free 2-dimensional pseudospace and its colored variants")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Colors {
    /// Number of colors with successor +1 mod k.
    #[arg(long, conflicts_with = "pi")]
    k: Option<usize>,
    /// Successor map as comma-separated images, e.g. 1,2,0.
    #[arg(long)]
    pi: Option<String>,
}

impl Colors {
    fn spec(&self) -> anyhow::Result<Option<ColorSpec>> {
        Ok(match (&self.k, &self.pi) {
            (Some(k), _) => Some(ColorSpec::cyclic(*k)?),
            (None, Some(p)) => Some(ColorSpec::from_successor(parse_list(p)?)?),
            (None, None) => None,
        })
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a stage and print it as PSG.
    Build {
        #[command(flatten)]
        colors: Colors,
        #[arg(long, default_value_t = 100)]
        stages: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Schedule file; overrides --stages and --seed.
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Witnesses required per demand before the cutoff.
        #[arg(long, default_value_t = 1)]
        witnesses: usize,
        /// Cutoff stage; defaults to a quarter of the stages.
        #[arg(long)]
        cutoff: Option<usize>,
        /// Write the PSG here instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Structural, reduced-path and coloring audits of a PSG file.
    Audit {
        psg: PathBuf,
        #[arg(long, default_value_t = 6)]
        max_len: usize,
        /// Also audit inductive witnesses with this count and cutoff.
        #[arg(long, num_args = 2, value_names = ["N", "CUTOFF"])]
        witnesses: Option<Vec<usize>>,
    },
    /// Colored algebraic closure of a set of vertices.
    Acl { psg: PathBuf, ids: String },
    /// Colourless closure of a set of vertices.
    Fcl { psg: PathBuf, ids: String },
    /// Exceptional points of the closure lying outside it.
    Defect { psg: PathBuf, ids: String },
    /// A reduced flag path between two flags given as plane,line,point.
    Path { psg: PathBuf, from: String, to: String },
    /// The distance word between two flags.
    Dword { psg: PathBuf, from: String, to: String },
    /// Normal form of a dot-separated word.
    ReduceWord { word: String },
    /// Whether two tuples have the same type.
    TypeEq { psg: PathBuf, u: String, v: String },
    /// Independence of X and Y over Z.
    Indep {
        psg: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, default_value = "")]
        z: String,
        /// Also run the consequence checks.
        #[arg(long)]
        consequences: bool,
    },
    /// Kernel of a finite sequence of tuples.
    Kernel {
        psg: PathBuf,
        #[arg(required = true, num_args = 4..)]
        tuples: Vec<String>,
    },
    /// Finite pf witness `a -> a2` over a base, or a pf pattern file.
    PfCheck {
        psg: PathBuf,
        #[arg(long, default_value = "")]
        base: String,
        #[arg(long, required_unless_present = "pattern")]
        a: Option<String>,
        #[arg(long, required_unless_present = "pattern")]
        a2: Option<String>,
        #[arg(long, required_unless_present = "pattern")]
        b: Option<String>,
        /// Lines `pair: <ids> | <ids>`, `p: <ids> | <ids>`, `q: <ids> | <ids>`.
        #[arg(long, conflicts_with_all = ["a", "a2", "b"])]
        pattern: Option<PathBuf>,
    },
    /// Matrix pattern check from a file of `predicate <token>` and
    /// `a|b <row> <col>: <ids>` lines.
    MsCheck { psg: PathBuf, matrix: PathBuf },
    /// Build a colored stage and certify the cycle of section types.
    CycleDemo {
        #[command(flatten)]
        colors: Colors,
        #[arg(long, default_value_t = 200)]
        stages: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Shortest cycle of the color successor.
    PiCycle {
        #[command(flatten)]
        colors: Colors,
    },
}

/// Verdict of a successful run; errors map to exit code 2.
enum Verdict {
    Pass,
    Fail,
}

impl From<bool> for Verdict {
    fn from(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> anyhow::Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|_| anyhow!("cannot parse `{t}`")))
        .collect()
}

fn tuple(g: &Geometry, s: &str) -> anyhow::Result<Vec<VertexId>> {
    let v: Vec<VertexId> = parse_list(s)?;
    if let Some(bad) = v.iter().find(|&&x| !g.contains(x)) {
        bail!("unknown vertex {bad}");
    }
    Ok(v)
}

fn ids(g: &Geometry, s: &str) -> anyhow::Result<VertexSet> {
    Ok(tuple(g, s)?.into_iter().collect())
}

fn flag(g: &Geometry, s: &str) -> anyhow::Result<Flag> {
    match tuple(g, s)?.as_slice() {
        &[a, b, c] => {
            let f = Flag::new(a, b, c);
            g.require_flag(f)?;
            Ok(f)
        }
        _ => bail!("a flag is plane,line,point; got `{s}`"),
    }
}

fn fmt_set(s: &VertexSet) -> String {
    let v: Vec<String> = s.iter().map(VertexId::to_string).collect();
    format!("{{{}}}", v.join(","))
}

fn load(path: &Path) -> anyhow::Result<Geometry> {
    load_psg(path).with_context(|| format!("loading {}", path.display()))
}

fn emit(rep: &Report) -> Verdict {
    print!("{rep}");
    rep.passed().into()
}

fn run(cmd: Cmd) -> anyhow::Result<Verdict> {
    // A PSG on stdout stays loadable as is.
    if !matches!(cmd, Cmd::Build { out: None, .. }) {
        println!("{FORMAT}");
    }
    match cmd {
        Cmd::Build { colors, stages, seed, schedule, witnesses, cutoff, out } => {
            let sched = match schedule {
                Some(p) => BuildSchedule::parse(&std::fs::read_to_string(&p).with_context(|| p.display().to_string())?)?,
                None => BuildSchedule::random(stages, seed),
            };
            let g = match colors.spec()? {
                Some(spec) => {
                    let budget = WitnessBudget::new(witnesses, cutoff.unwrap_or(sched.stages / 4))?;
                    build_colored(&spec, &sched, budget)?
                }
                None => build_free(&sched)?,
            };
            let text = to_psg_string(&g);
            match out {
                Some(p) => {
                    std::fs::write(&p, &text).with_context(|| p.display().to_string())?;
                    println!("vertices: {}", g.vertex_count());
                    println!("edges: {}", g.edge_count());
                    println!("written: {}", p.display());
                }
                None => print!("{text}"),
            }
            Ok(Verdict::Pass)
        }
        Cmd::Audit { psg, max_len, witnesses } => {
            let g = load(&psg)?;
            let mut rep = Report::new("audit");
            rep.absorb("validate", validate_geometry(&g));
            rep.absorb("paths", closed_reduced_path_audit(&g, max_len));
            if g.is_colored() {
                rep.absorb("universal", audit_universal(&g));
            }
            if let Some(w) = witnesses {
                rep.absorb("witnesses", audit_inductive_witnesses(&g, WitnessBudget::new(w[0], w[1])?));
            }
            Ok(emit(&rep))
        }
        Cmd::Acl { psg, ids: s } => {
            let g = load(&psg)?;
            let x = ids(&g, &s)?;
            println!("acl: {}", fmt_set(&Closure::new(&g).acl(&x)?.members));
            Ok(Verdict::Pass)
        }
        Cmd::Fcl { psg, ids: s } => {
            let g = load(&psg)?;
            let x = ids(&g, &s)?;
            println!("fcl: {}", fmt_set(&Closure::new(&g).fcl(&x)?.members));
            Ok(Verdict::Pass)
        }
        Cmd::Defect { psg, ids: s } => {
            let g = load(&psg)?;
            let x = ids(&g, &s)?;
            println!("defect: {}", Closure::new(&g).defect(&x)?);
            Ok(Verdict::Pass)
        }
        Cmd::Path { psg, from, to } => {
            let g = load(&psg)?;
            let p = find_reduced_path(&g, flag(&g, &from)?, flag(&g, &to)?)?;
            for f in &p.flags {
                println!("flag: {f}");
            }
            println!("word: {}", p.word);
            Ok(Verdict::Pass)
        }
        Cmd::Dword { psg, from, to } => {
            let g = load(&psg)?;
            println!("word: {}", distance_word(&g, flag(&g, &from)?, flag(&g, &to)?)?);
            Ok(Verdict::Pass)
        }
        Cmd::ReduceWord { word } => {
            let w: Word = word.parse()?;
            println!("{}", w.nonsplitting_reduce());
            Ok(Verdict::Pass)
        }
        Cmd::TypeEq { psg, u, v } => {
            let g = load(&psg)?;
            let lg = Logic::new(&g);
            let (u, v) = (tuple(&g, &u)?, tuple(&g, &v)?);
            let map = lg.type_map(&u, &v)?;
            match &map {
                Some(m) => println!("map: {m}"),
                None => println!("map: none"),
            }
            println!("verdict: {}", map.is_some());
            Ok(map.is_some().into())
        }
        Cmd::Indep { psg, x, y, z, consequences } => {
            let g = load(&psg)?;
            let lg = Logic::new(&g);
            let (x, y, z) = (ids(&g, &x)?, ids(&g, &y)?, ids(&g, &z)?);
            let mut rep = lg.independent(&x, &y, &z)?.to_report();
            if consequences && rep.passed() {
                rep.absorb("consequences", lg.verify_independence_consequences(&x, &y, &z)?);
            }
            Ok(emit(&rep))
        }
        Cmd::Kernel { psg, tuples } => {
            let g = load(&psg)?;
            let seq = tuples.iter().map(|t| tuple(&g, t)).collect::<anyhow::Result<Vec<_>>>()?;
            println!("kernel: {}", fmt_set(&Logic::new(&g).kernel_finite(&seq)?));
            Ok(Verdict::Pass)
        }
        Cmd::PfCheck { psg, base, a, a2, b, pattern } => {
            let g = load(&psg)?;
            let lg = Logic::new(&g);
            let ok = match pattern {
                Some(p) => {
                    let (pairs, p_rep, q_rep) = parse_pf_pattern(&g, &std::fs::read_to_string(&p)?)?;
                    lg.pf_pattern_check(&pairs, &p_rep, &q_rep)?
                }
                None => {
                    let get = |o: Option<String>| tuple(&g, &o.unwrap_or_default());
                    lg.pf_witness_check(&ids(&g, &base)?, &get(a)?, &get(a2)?, &get(b)?)?
                }
            };
            println!("verdict: {ok}");
            Ok(ok.into())
        }
        Cmd::MsCheck { psg, matrix } => {
            let g = load(&psg)?;
            let mat = parse_matrix(&g, &std::fs::read_to_string(&matrix)?)?;
            Ok(emit(&Logic::new(&g).ms_pattern_check(&mat)?))
        }
        Cmd::CycleDemo { colors, stages, seed } => {
            let spec = colors.spec()?.ok_or_else(|| anyhow!("cycle-demo needs --k or --pi"))?;
            let budget = WitnessBudget::new(1, stages / 4)?;
            let g = build_colored(&spec, &BuildSchedule::random(stages, seed), budget)?;
            println!("stages: {stages}");
            println!("seed: {seed}");
            println!("vertices: {}", g.vertex_count());
            Ok(emit(&run_full_cycle(&g, &spec)?))
        }
        Cmd::PiCycle { colors } => {
            let spec = colors.spec()?.ok_or_else(|| anyhow!("pi-cycle needs --k or --pi"))?;
            println!("successor: {:?}", spec.successor_map());
            println!("shortest-cycle: {}", shortest_pi_cycle(&spec)?);
            Ok(Verdict::Pass)
        }
    }
}

fn parse_pf_pattern(g: &Geometry, text: &str) -> anyhow::Result<(Vec<TuplePair>, TuplePair, TuplePair)> {
    let (mut pairs, mut p, mut q) = (Vec::new(), None, None);
    for (n, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, rest) = line.split_once(':').ok_or_else(|| anyhow!("line {n}: expected `key: ids | ids`"))?;
        let (l, r) = rest.split_once('|').ok_or_else(|| anyhow!("line {n}: expected `ids | ids`"))?;
        let pair = (tuple(g, l)?, tuple(g, r)?);
        match key.trim() {
            "pair" => pairs.push(pair),
            "p" => p = Some(pair),
            "q" => q = Some(pair),
            k => bail!("line {n}: unknown key `{k}`"),
        }
    }
    Ok((pairs, p.ok_or_else(|| anyhow!("missing `p:` line"))?, q.ok_or_else(|| anyhow!("missing `q:` line"))?))
}

fn parse_matrix(g: &Geometry, text: &str) -> anyhow::Result<PatternMatrix> {
    let mut predicate = None;
    let mut cells: Vec<(bool, usize, usize, Vec<VertexId>)> = Vec::new();
    for (n, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(tok) = line.strip_prefix("predicate") {
            predicate = Some(tok.trim().parse::<Predicate>()?);
            continue;
        }
        let (head, rest) = line.split_once(':').ok_or_else(|| anyhow!("line {n}: expected `a|b row col: ids`"))?;
        let toks: Vec<&str> = head.split_whitespace().collect();
        let [side, i, j] = toks.as_slice() else { bail!("line {n}: expected `a|b row col`") };
        let side = match *side {
            "a" => true,
            "b" => false,
            s => bail!("line {n}: unknown side `{s}`"),
        };
        cells.push((side, i.parse()?, j.parse()?, tuple(g, rest)?));
    }
    let rows = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
    let cols = cells.iter().map(|c| c.2 + 1).max().unwrap_or(0);
    let mut a = vec![vec![Vec::new(); cols]; rows];
    let mut b = a.clone();
    for (side, i, j, t) in cells {
        if side { a[i][j] = t } else { b[i][j] = t }
    }
    Ok(PatternMatrix { a, b, predicate: predicate.ok_or_else(|| anyhow!("missing `predicate` line"))? })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
