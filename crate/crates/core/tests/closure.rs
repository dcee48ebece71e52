use std::sync::OnceLock;

use proptest::prelude::*;
use pseudospace::builder::{build_colored, build_free, BuildSchedule, WitnessBudget};
use pseudospace::closure::{ep_set, neighborhood, Ambient, Closure, VertexSet};
use pseudospace::{ColorSpec, Geometry, Level, VertexId};

fn colored() -> &'static Geometry {
    static G: OnceLock<Geometry> = OnceLock::new();
    G.get_or_init(|| {
        let spec = ColorSpec::cyclic(3).unwrap();
        build_colored(&spec, &BuildSchedule::random(100, 7), WitnessBudget::new(1, 25).unwrap()).unwrap()
    })
}

fn free() -> &'static Geometry {
    static G: OnceLock<Geometry> = OnceLock::new();
    G.get_or_init(|| build_free(&BuildSchedule::random(80, 3)).unwrap())
}

/// Up to `n` vertices drawn from a small neighbourhood of `seed`.
fn local_set(g: &Geometry, seed: VertexId, picks: &[usize], radius: usize) -> (VertexSet, VertexSet) {
    let amb = neighborhood(g, &VertexSet::from([seed % g.id_bound() as VertexId]), radius);
    let v: Vec<VertexId> = amb.iter().copied().collect();
    let x = picks.iter().map(|&i| v[i % v.len()]).collect();
    (x, amb)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn witness_search_matches_subset_oracle(seed in any::<u32>(), picks in prop::collection::vec(any::<usize>(), 1..4)) {
        let g = free();
        let (x, amb) = local_set(g, seed, &picks, 14);
        let a = Ambient::restricted(g, &amb);
        let fast = a.fcl(&x);
        let slow = a.fcl_oracle(&x);
        match (fast, slow) {
            (Ok(f), Ok(s)) => prop_assert_eq!(f, s),
            (Err(_), Err(_)) => {}
            (f, s) => prop_assert!(false, "disagree: {:?} {:?}", f, s),
        }
    }

    #[test]
    fn closure_laws(seed in any::<u32>(), picks in prop::collection::vec(any::<usize>(), 1..4), extra in any::<usize>()) {
        let g = colored();
        let cl = Closure::new(g);
        let (x, amb) = local_set(g, seed, &picks, 20);
        let fx = cl.fcl(&x).unwrap().members;
        prop_assert!(x.is_subset(&fx));
        prop_assert_eq!(&cl.fcl(&fx).unwrap().members, &fx);
        let mut y = x.clone();
        y.insert(*amb.iter().nth(extra % amb.len()).unwrap());
        prop_assert!(fx.is_subset(&cl.fcl(&y).unwrap().members));

        let acl = cl.acl(&x).unwrap();
        let ep = ep_set(g, &fx).unwrap();
        let union: VertexSet = fx.union(&ep).copied().collect();
        prop_assert_eq!(&acl.members, &union);
        prop_assert_eq!(&cl.acl(&acl.members).unwrap().members, &acl.members);
        prop_assert_eq!(cl.defect(&x).unwrap(), ep.difference(&fx).count());
    }

    #[test]
    fn adding_a_point_on_an_inner_line(seed in any::<u32>(), picks in prop::collection::vec(any::<usize>(), 1..3), which in any::<usize>()) {
        let g = colored();
        let cl = Closure::new(g);
        let (x, _) = local_set(g, seed, &picks, 20);
        let fx = cl.fcl(&x).unwrap().members;
        let lines: Vec<VertexId> = fx.iter().copied().filter(|&v| g.level(v) == Some(Level::Line)).collect();
        prop_assume!(!lines.is_empty());
        let b = lines[which % lines.len()];
        let points: Vec<VertexId> = g.points_on(b).collect();
        let c = points[which / lines.len() % points.len()];
        let mut xc = fx.clone();
        xc.insert(c);
        prop_assert_eq!(cl.fcl(&xc).unwrap().members, xc);
    }
}
