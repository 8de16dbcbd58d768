use dualfair_core::generate::{random_instance, ValueSpace};
use dualfair_core::graphlab::{check_kneser_lower_bound, non_ef1_independent_set, Graph, DEFAULT_VERTEX_CAP};

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// All `(n, k, s)` with `s < k < n` whose graph fits the colouring cap.
fn in_cap() -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for n in 2..=DEFAULT_VERTEX_CAP {
        for k in 1..n {
            if binomial(n, k) > DEFAULT_VERTEX_CAP as u128 {
                continue;
            }
            for s in 0..k {
                out.push((n, k, s));
            }
        }
    }
    out
}

#[test]
fn gamma_chromatic_at_least_five() {
    for n in 3..=5 {
        let g = Graph::gamma(n).unwrap();
        let coloring = g.chromatic_number().unwrap();
        assert!(coloring.chi >= 5, "chi(Gamma({n})) = {}", coloring.chi);
        for v in 0..g.vertex_count() {
            for u in 0..g.vertex_count() {
                if g.has_edge(u, v) {
                    assert_ne!(coloring.colors[u], coloring.colors[v]);
                }
            }
        }
    }
    let g3 = Graph::gamma(3).unwrap();
    assert!(g3.max_clique().unwrap().len() >= 6);
    assert!(g3.chromatic_number().unwrap().chi >= 6);
}

#[test]
fn classic_kneser_identity() {
    for (n, k, s) in in_cap() {
        if s == 0 && n >= 2 * k {
            let chi = Graph::kneser(n, k, 0).unwrap().chromatic_number().unwrap().chi;
            assert_eq!(chi, n - 2 * k + 2, "K({n},{k},0)");
        }
    }
}

#[test]
fn generalized_lower_bound_where_edges_exist() {
    for (n, k, s) in in_cap() {
        let check = check_kneser_lower_bound(n, k, s).unwrap();
        let edgeless = Graph::kneser(n, k, s).unwrap().edge_count() == 0;
        // Two k-subsets of [n] share at least 2k − n elements.
        assert_eq!(edgeless, n + s < 2 * k, "({n}, {k}, {s})");
        if edgeless {
            assert_eq!(check.chi, 1);
        } else {
            assert!(check.holds, "{check:?}");
        }
    }
}

#[test]
fn ef1_failure_sets_are_independent() {
    for seed in 0..1000u64 {
        let m = 3 + (seed % 6) as usize;
        let inst = random_instance(seed, 2, m, ValueSpace::SmallInteger { max: 20 }, ValueSpace::SmallInteger { max: 20 });
        let cover = non_ef1_independent_set(&inst, &Graph::gamma(m).unwrap()).unwrap();
        assert!(cover.verdict, "seed {seed}: {cover:?}");
    }
}
