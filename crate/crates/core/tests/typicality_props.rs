use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pushcast::phases::PhaseParams;
use pushcast::typicality::{
    audit, audit_sets, check_property_i, check_property_ii, check_property_iii, Property,
};
use pushcast::{Graph, Vertex, VertexSet};

fn set_from(n: usize, members: &[bool]) -> VertexSet {
    VertexSet::from_mask(members[..n].to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn property_i_matches_brute_force(
        n in 4usize..50,
        p in 0.05f64..0.95,
        eps in 0.01f64..1.0,
        seed in any::<u64>(),
        members in proptest::collection::vec(any::<bool>(), 50),
    ) {
        let g = Graph::gnp(n, p, seed).unwrap();
        let set = set_from(n, &members);
        let center = p * set.len() as f64;
        let brute: Vec<Vertex> = (0..n as Vertex)
            .filter(|&v| !set.contains(v))
            .filter(|&v| {
                let c = g.neighbors(v).filter(|&u| set.contains(u)).count() as f64;
                !((1.0 - eps) * center < c && c < (1.0 + eps) * center)
            })
            .collect();
        prop_assert_eq!(check_property_i(&g, &set, p, eps).unwrap().violating, brute);
    }

    #[test]
    fn property_ii_matches_brute_force(
        n in 4usize..50,
        p in 0.05f64..0.95,
        eps in 0.01f64..1.0,
        seed in any::<u64>(),
        members in proptest::collection::vec(any::<bool>(), 50),
    ) {
        let g = Graph::gnp(n, p, seed).unwrap();
        let set = set_from(n, &members);
        let limit = eps * p * n as f64;
        let brute: Vec<Vertex> = (0..n as Vertex)
            .filter(|&v| !set.contains(v))
            .filter(|&v| g.neighbors(v).filter(|&u| set.contains(u)).count() as f64 > limit)
            .collect();
        let r = check_property_ii(&g, &set, p, eps, 4.0).unwrap();
        prop_assert_eq!(r.passed, brute.len() as f64 <= set.len() as f64 / (eps * 4.0));
        prop_assert_eq!(r.violating, brute);
    }

    // Widening ε can only shrink exceptional sets and widen cut windows.
    #[test]
    fn monotone_in_epsilon(
        n in 4usize..50,
        p in 0.05f64..0.95,
        e1 in 0.01f64..1.0,
        e2 in 0.01f64..1.0,
        seed in any::<u64>(),
        members in proptest::collection::vec(any::<bool>(), 50),
    ) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let g = Graph::gnp(n, p, seed).unwrap();
        let set = set_from(n, &members);
        let i_lo = check_property_i(&g, &set, p, lo).unwrap();
        let i_hi = check_property_i(&g, &set, p, hi).unwrap();
        prop_assert!(i_hi.violating.iter().all(|v| i_lo.violating.contains(v)));
        prop_assert!(!i_lo.passed || i_hi.passed);
        let ii_lo = check_property_ii(&g, &set, p, lo, 4.0).unwrap();
        let ii_hi = check_property_ii(&g, &set, p, hi, 4.0).unwrap();
        prop_assert!(ii_hi.violating.iter().all(|v| ii_lo.violating.contains(v)));
        if !set.is_empty() && set.len() < n {
            let a = check_property_iii(&g, &set, p, lo).unwrap();
            let b = check_property_iii(&g, &set, p, hi).unwrap();
            prop_assert!(!a.passed || b.passed);
        }
    }
}

#[test]
fn dense_random_graph_is_typical() {
    let (n, p) = (2000, 0.05);
    let g = Graph::gnp(n, p, 8).unwrap();
    let params = PhaseParams::new(p * n as f64 / (n as f64).ln(), 0.3).unwrap();
    let report = audit(&g, p, params, 10, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    assert!(report.all_passed, "{:?}", report.failures().next());
    let singles = report
        .results
        .iter()
        .filter(|r| r.property == Property::III && r.size == 1)
        .count();
    assert!(singles >= n);
}

#[test]
fn planted_dense_block_fails_cut_check() {
    // Half the vertices form a clique with nothing else attached.
    let n = 40;
    let edges = (0..20).flat_map(|u| (u + 1..20).map(move |v| (u, v)));
    let g = Graph::from_edges(n, edges).unwrap();
    let half: VertexSet = VertexSet::from_ids(n, 0..20).unwrap();
    let params = PhaseParams::new(2.0, 0.1).unwrap();
    let report = audit_sets(&g, 0.25, params, &[half]).unwrap();
    assert!(!report.all_passed);
    assert!(report.failures().any(|r| r.property == Property::III));
}
