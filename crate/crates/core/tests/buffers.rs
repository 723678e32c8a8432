mod common;

use common::{all_topologies, exhaustive_min_bits, problem, random_problem};
use pixelflow::buffer::{solve_buffers, solve_buffers_via_mincost_flow};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn both_solvers_hit_the_exhaustive_minimum_on_small_dags() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 2..=5 {
        for (edges, _) in all_topologies(n)
            .into_iter()
            .flat_map(|e| (0..4).map(move |k| (e.clone(), k)))
        {
            let latency: Vec<u64> = (0..n).map(|_| rng.random_range(0..=10)).collect();
            let bits: Vec<u64> = edges
                .iter()
                .map(|_| if rng.random_bool(0.5) { 8 } else { 32 })
                .collect();
            let p = problem(&latency, &edges, &bits);
            let want = exhaustive_min_bits(&p);
            let a = solve_buffers(&p).unwrap();
            let b = solve_buffers_via_mincost_flow(&p).unwrap();
            assert_eq!(a.latency_bits, want, "{p:?}");
            assert_eq!(b.latency_bits, want, "{p:?}");
        }
    }
}

#[test]
fn diamond_buffers_the_short_branch() {
    // root -> a (L=10) -> join, root -> b (L=2) -> join
    let p = problem(
        &[0, 10, 2, 0],
        &[(0, 1), (0, 2), (1, 3), (2, 3)],
        &[8, 8, 8, 8],
    );
    for sol in [
        solve_buffers(&p).unwrap(),
        solve_buffers_via_mincost_flow(&p).unwrap(),
    ] {
        assert_eq!(sol.delay, vec![0, 0, 0, 8]);
        assert_eq!(sol.latency_bits, 64);
    }
}

#[test]
fn wide_branch_is_left_unbuffered() {
    // the 8-bit edge into the short branch is cheaper to delay than its 32-bit output
    let p = problem(
        &[0, 10, 2, 0],
        &[(0, 1), (0, 2), (1, 3), (2, 3)],
        &[8, 8, 8, 32],
    );
    let sol = solve_buffers(&p).unwrap();
    assert_eq!(sol.delay, vec![0, 8, 0, 0]);
    assert_eq!(sol.latency_bits, exhaustive_min_bits(&p));
    assert_eq!(solve_buffers_via_mincost_flow(&p).unwrap().latency_bits, 64);
}

#[test]
fn solvers_agree_on_random_ten_node_dags() {
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, 10, 0.3, &[8, 16, 32]);
        let a = solve_buffers(&p).unwrap();
        let b = solve_buffers_via_mincost_flow(&p).unwrap();
        assert_eq!(a.latency_bits, b.latency_bits, "seed {seed}");
        assert_eq!(a.total_bits, b.total_bits, "seed {seed}");
    }
}

proptest! {
    #[test]
    fn schedules_respect_every_latency(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_problem(&mut rng, n, 0.4, &[1, 8, 32]);
        let sol = solve_buffers(&p).unwrap();
        prop_assert_eq!(sol.start[0], 0);
        for (k, e) in p.edges.iter().enumerate() {
            prop_assert_eq!(sol.start[e.to], sol.start[e.from] + p.nodes[e.from].latency + sol.delay[k]);
        }
        let bits: u64 = p.edges.iter().zip(&sol.delay).map(|(e, d)| e.bits * d).sum();
        prop_assert_eq!(bits, sol.latency_bits);
    }

    #[test]
    fn chains_need_no_buffers(lat in proptest::collection::vec(0u64..=10, 2..10)) {
        let edges: Vec<(usize, usize)> = (1..lat.len()).map(|j| (j - 1, j)).collect();
        let p = problem(&lat, &edges, &vec![8; edges.len()]);
        let sol = solve_buffers_via_mincost_flow(&p).unwrap();
        prop_assert_eq!(sol.latency_bits, 0);
        let prefix: Vec<u64> = lat.iter().scan(0, |acc, &l| { let s = *acc; *acc += l; Some(s) }).collect();
        prop_assert_eq!(sol.start, prefix);
    }
}
