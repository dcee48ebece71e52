use std::sync::OnceLock;

use proptest::prelude::*;
use pseudospace::builder::{build_colored, build_free, BuildSchedule, WitnessBudget};
use pseudospace::closure::{neighborhood, Closure, VertexSet};
use pseudospace::cycles::{canonical_pair, construct_cycle_witness};
use pseudospace::logic::{kernel_finite, Logic};
use pseudospace::{ColorSpec, Geometry, Level, VertexId};

fn colored() -> &'static Geometry {
    static G: OnceLock<Geometry> = OnceLock::new();
    G.get_or_init(|| {
        let spec = ColorSpec::cyclic(3).unwrap();
        build_colored(&spec, &BuildSchedule::random(200, 42), WitnessBudget::new(1, 50).unwrap()).unwrap()
    })
}

fn free() -> &'static Geometry {
    static G: OnceLock<Geometry> = OnceLock::new();
    G.get_or_init(|| build_free(&BuildSchedule::random(80, 11)).unwrap())
}

fn set(v: &[VertexId]) -> VertexSet {
    v.iter().copied().collect()
}

fn pick(g: &Geometry, seed: u32, picks: &[usize]) -> VertexSet {
    let amb: Vec<VertexId> = neighborhood(g, &set(&[seed % 60]), 12).into_iter().collect();
    picks.iter().map(|&i| amb[i % amb.len()]).collect()
}

#[test]
fn section_pairs_have_one_type_per_color() {
    let g = colored();
    let lg = Logic::new(g);
    let mut reps = Vec::new();
    for r in 0..3 {
        let w = construct_cycle_witness(g, r).unwrap();
        let rep = canonical_pair(g, r).unwrap().unwrap();
        assert!(lg.types_equal(&[w.c, w.a], &rep).unwrap());
        assert!(lg.types_equal(&rep, &rep).unwrap());
        reps.push(rep);
    }
    for r in 0..3 {
        for s in 0..3 {
            assert_eq!(lg.types_equal(&reps[r], &reps[s]).unwrap(), r == s);
        }
    }
}

#[test]
fn witness_independence_and_controls() {
    let g = colored();
    let lg = Logic::new(g);
    let w = construct_cycle_witness(g, 0).unwrap();
    let (c, a, b) = (set(&[w.c]), set(&[w.a]), set(&[w.b]));
    assert!(lg.independent(&c, &a, &b).unwrap().verdict);
    assert!(lg.verify_independence_consequences(&c, &a, &b).unwrap().passed());
    // The exceptional point lies in both closures.
    let forged = lg.independent(&set(&[w.c_prime]), &a, &b).unwrap();
    assert!(!forged.verdict && !forged.violations.is_empty());
    // Nothing outside the base.
    let z = lg.closed(&set(&[w.a, w.c])).unwrap();
    assert!(lg.independent(&set(&[w.c]), &b, &z).unwrap().verdict);
}

#[test]
fn pf_witnesses() {
    let g = colored();
    let lg = Logic::new(g);
    for r in 0..3 {
        let w = construct_cycle_witness(g, r).unwrap();
        let b = set(&[w.b]);
        assert!(lg.pf_witness_check(&b, &[w.c], &[w.c_prime], &[w.a]).unwrap());
        assert!(lg.pf_witness_check(&b, &[w.c], &[w.c], &[w.a]).unwrap());
        assert!(!lg
            .pf_witness_check(&VertexSet::new(), &[w.c, w.a], &[w.c_prime, w.a], &[w.b])
            .unwrap());
    }
}

#[test]
fn kernels() {
    let g = colored();
    let lg = Logic::new(g);
    let a = 0;
    let k = lg.kernel_finite(&vec![vec![a]; 4]).unwrap();
    assert!(lg.closed(&set(&[a])).unwrap().is_subset(&k));
    // Planes through a common line all contain it in their kernel.
    let b = (0..g.id_bound() as VertexId)
        .find(|&v| g.level(v) == Some(Level::Line) && g.planes_through(v).count() >= 4)
        .expect("a line with four planes");
    let planes: Vec<Vec<VertexId>> = g.planes_through(b).map(|p| vec![p]).collect();
    assert!(lg.kernel_finite(&planes).unwrap().contains(&b));

    // Four flags in separate components.
    let mut h = Geometry::new(None);
    let mut seq = Vec::new();
    for _ in 0..4 {
        let p = h.add_vertex(Level::Plane);
        let l = h.add_vertex(Level::Line);
        let c = h.add_vertex(Level::Point);
        h.add_edge(p, l).unwrap();
        h.add_edge(l, c).unwrap();
        seq.push(vec![p, l, c]);
    }
    assert!(kernel_finite(&h, &seq).unwrap().is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn independence_is_symmetric_with_consequences(
        seed in any::<u32>(),
        xs in prop::collection::vec(any::<usize>(), 1..3),
        ys in prop::collection::vec(any::<usize>(), 1..3),
        zs in prop::collection::vec(any::<usize>(), 0..2),
    ) {
        let g = colored();
        let lg = Logic::new(g);
        let x = pick(g, seed, &xs);
        let y = pick(g, seed, &ys);
        let z = lg.closed(&pick(g, seed, &zs)).unwrap();
        let xy = lg.independent(&x, &y, &z).unwrap();
        let yx = lg.independent(&y, &x, &z).unwrap();
        prop_assert_eq!(xy.verdict, yx.verdict);
        if xy.verdict {
            let r = lg.verify_independence_consequences(&x, &y, &z).unwrap();
            prop_assert!(r.passed(), "{}", r);
        }
    }

    #[test]
    fn point_on_a_line_keeps_independence(
        seed in any::<u32>(),
        xs in prop::collection::vec(any::<usize>(), 1..3),
        ys in prop::collection::vec(any::<usize>(), 1..3),
        which in any::<usize>(),
    ) {
        let g = free();
        let lg = Logic::new(g);
        let x = lg.closed(&pick(g, seed, &xs)).unwrap();
        let y = lg.closed(&pick(g, seed, &ys)).unwrap();
        let z: VertexSet = x.intersection(&y).copied().collect();
        prop_assume!(lg.closed(&z).map(|c| c == z).unwrap_or(false));
        prop_assume!(lg.independent(&x, &y, &z).unwrap().verdict);
        let cands: Vec<VertexId> = x
            .iter()
            .filter(|&&b| g.level(b) == Some(Level::Line))
            .flat_map(|&b| g.points_on(b).collect::<Vec<_>>())
            .filter(|c| !y.contains(c) || z.contains(c))
            .collect();
        prop_assume!(!cands.is_empty());
        let mut xc = x.clone();
        xc.insert(cands[which % cands.len()]);
        prop_assert!(lg.independent(&xc, &y, &z).unwrap().verdict);
    }

    #[test]
    fn type_equality_is_an_equivalence(seed in any::<u32>(), i in any::<usize>(), j in any::<usize>(), k in any::<usize>()) {
        let g = colored();
        let lg = Logic::new(g);
        let pts: Vec<VertexId> = neighborhood(g, &set(&[seed % 60]), 30)
            .into_iter()
            .filter(|&v| g.level(v) == Some(Level::Point))
            .collect();
        prop_assume!(!pts.is_empty());
        let plane = g.planes_containing_point(pts[0])[0];
        let (u, v, w) = ([pts[i % pts.len()], plane], [pts[j % pts.len()], plane], [pts[k % pts.len()], plane]);
        prop_assert!(lg.types_equal(&u, &u).unwrap());
        let (uv, vu) = (lg.types_equal(&u, &v).unwrap(), lg.types_equal(&v, &u).unwrap());
        prop_assert_eq!(uv, vu);
        if uv && lg.types_equal(&v, &w).unwrap() {
            prop_assert!(lg.types_equal(&u, &w).unwrap());
        }
        if uv {
            let cl = Closure::new(g);
            prop_assert_eq!(cl.defect(&set(&u)).unwrap(), cl.defect(&set(&v)).unwrap());
        }
    }

    #[test]
    fn pair_types_determine_the_type(seed in any::<u32>(), xs in prop::collection::vec(any::<usize>(), 2..4), order in any::<u64>()) {
        let g = free();
        let lg = Logic::new(g);
        let x: Vec<VertexId> = pick(g, seed, &xs).into_iter().collect();
        // Greedy search for another tuple matching x on every pair.
        let cands: Vec<VertexId> = neighborhood(g, &set(&[(seed / 7) % 60]), 24).into_iter().collect();
        let mut y: Vec<VertexId> = Vec::new();
        for i in 0..x.len() {
            let start = (order as usize).wrapping_add(i * 13) % cands.len();
            let found = (0..cands.len()).map(|t| cands[(start + t) % cands.len()]).find(|&c| {
                !y.contains(&c)
                    && g.level(c) == g.level(x[i])
                    && lg.types_equal(&[x[i]], &[c]).unwrap()
                    && (0..i).all(|j| lg.types_equal(&[x[j], x[i]], &[y[j], c]).unwrap())
            });
            match found {
                Some(c) => y.push(c),
                None => break,
            }
        }
        prop_assume!(y.len() == x.len());
        prop_assert!(lg.types_equal(&x, &y).unwrap(), "{:?} {:?}", x, y);
    }
}
