mod common;

use std::collections::BTreeSet;

use num::Zero;
use pathtower::linalg::{self, sparse_row};
use pathtower::scalar::{int, ratio};
use pathtower::tree::{random_automorphism, swap_root_subtrees};
use pathtower::{
    adjoint, coboundary, exactness_check, h1c_dimension, harmonic_space, induced_apartments, intersect_harmonic_exact,
    l2_norm_squared, primitive, radon_kernel_interior, radon_transform, span_check, Cochain, Level, KPath, Scalar,
};

use common::{ball, bfs_components, bfs_distances, row_of, solve, tower, Row};

#[test]
fn ball_sizes_match_breadth_first_count() {
    for (q, r, v) in [(2, 1, 4), (2, 2, 10), (3, 2, 17), (2, 3, 22), (3, 4, 161)] {
        let b = ball(q, r);
        let reached = bfs_distances(&b)[0].iter().filter(|&&d| d <= r).count();
        assert_eq!((b.num_vertices(), b.edges().len(), reached), (v, v - 1, v));
        assert_eq!(b.params().expected_vertex_count(), Some(v));
    }
}

#[test]
fn meet_distance_agrees_with_bfs() {
    for (q, r) in [(2, 3), (3, 2)] {
        let b = ball(q, r);
        let dist = bfs_distances(&b);
        for u in 0..b.num_vertices() {
            for v in 0..b.num_vertices() {
                assert_eq!(b.distance(u, v), dist[u][v]);
                let g = b.geodesic_between(u, v).unwrap();
                assert_eq!(g.len(), dist[u][v]);
                assert!(KPath(g.0.clone()).is_valid_in(&b));
            }
        }
    }
}

#[test]
fn geodesic_examples() {
    let b = ball(2, 2);
    assert_eq!(b.geodesic_between(4, 4).unwrap().0, vec![4]);
    let leaf = *b.leaves().last().unwrap();
    assert_eq!(b.geodesic_between(0, leaf).unwrap().len(), 2);
    let p = b.parent(b.leaves()[0]).unwrap();
    let (x, y) = (b.children(p)[0], b.children(p)[1]);
    assert_eq!(b.geodesic_between(x, y).unwrap().0, vec![x, p, y]);
    assert_eq!(b.convex_hull(&BTreeSet::from([x, y])).unwrap(), BTreeSet::from([x, p, y]));
    assert_eq!(b.convex_hull(&BTreeSet::from([x])).unwrap(), BTreeSet::from([x]));
    let small = ball(2, 1);
    let all: BTreeSet<usize> = small.leaves().iter().copied().collect();
    assert_eq!(small.convex_hull(&all).unwrap().len(), 4);
}

#[test]
fn diameter_counts() {
    assert_eq!(ball(2, 1).enumerate_oriented_diameters().len(), 6);
    assert_eq!(ball(2, 2).enumerate_oriented_diameters().len(), 30);
    let b = ball(3, 2);
    let l = b.leaves().len();
    assert_eq!(b.enumerate_oriented_diameters().len(), l * (l - 1));
}

#[test]
fn automorphisms_preserve_distances() {
    let b = ball(2, 3);
    let dist = bfs_distances(&b);
    for seed in 0..10 {
        let g = random_automorphism(&b, seed);
        for &(u, v) in b.edges() {
            assert!(b.are_adjacent(g.apply(u), g.apply(v)));
        }
        for u in 0..b.num_vertices() {
            for v in 0..b.num_vertices() {
                assert_eq!(dist[g.apply(u)][g.apply(v)], dist[u][v]);
            }
        }
        assert!(g.compose(&g.inverse()).is_identity());
    }
}

/// k-paths are geodesic segments, so they are counted by ordered pairs at
/// distance k (one path for each pair, or the single vertex when k = 0).
fn count_by_distance(q: usize, r: usize, k: usize) -> usize {
    let b = ball(q, r);
    bfs_distances(&b).iter().flatten().filter(|&&d| d == k).count()
}

#[test]
fn path_graph_counts() {
    for (q, r, k, v, e) in [(2, 1, 0, 4, 6), (2, 1, 1, 6, 6), (2, 2, 1, 18, 24), (2, 1, 2, 6, 0)] {
        let pg = tower(q, r, k);
        assert_eq!((pg.num_vertices(), pg.num_edges()), (v, e), "({q},{r},{k})");
    }
    for (q, r, k) in common::grid() {
        let pg = tower(q, r, k);
        assert_eq!(pg.num_vertices(), count_by_distance(q, r, k));
        assert_eq!(pg.num_edges(), count_by_distance(q, r, k + 1));
    }
}

#[test]
fn components_agree_with_bfs() {
    for (q, r, k) in common::grid() {
        let pg = tower(q, r, k);
        let (labels, count) = bfs_components(&pg);
        let c = pg.components();
        assert_eq!(c.count, count);
        for s in 0..pg.num_vertices() {
            for t in [0, s / 2, pg.num_vertices() - 1] {
                assert_eq!(c.of[s] == c.of[t], labels[s] == labels[t]);
            }
        }
    }
    assert_eq!(tower(2, 1, 0).components().count, 1);
}

#[test]
fn automorphism_action_on_tower() {
    let pg = tower(2, 3, 1);
    let id = pathtower::BallAutomorphism::identity(pg.ball());
    assert!(pg.apply_automorphism(&id).unwrap().is_identity());
    let g = swap_root_subtrees(pg.ball(), 0, 2).unwrap();
    let m = pg.apply_automorphism(&g).unwrap();
    assert!(!m.is_identity());
    assert!(m.compose(&m).is_identity());
    for a in 0..pg.num_edges() {
        for s in [pg.head(a), pg.tail(a), (a * 7) % pg.num_vertices()] {
            assert_eq!(
                pg.incidence(m.edges[a], m.vertices[s]).unwrap(),
                pg.incidence(a, s).unwrap()
            );
        }
    }
}

#[test]
fn extension_sets() {
    let pg = tower(2, 1, 0);
    assert_eq!(pg.edges_with_head(0).unwrap().len(), 3);
    assert_eq!(pg.edges_with_tail(0).unwrap().len(), 3);
    assert_eq!(pg.edges_with_head(1).unwrap().len(), 1);
    for (q, r, k) in [(2, 3, 1), (3, 2, 2)] {
        let pg = tower(q, r, k);
        for s in 0..pg.num_vertices() {
            let plus: BTreeSet<_> = pg.edges_with_head(s).unwrap().iter().collect();
            assert!(pg.edges_with_tail(s).unwrap().iter().all(|a| !plus.contains(a)));
        }
    }
}

/// All forward (head to tail) walks with `len` edges in the path graph.
fn forward_walks(pg: &pathtower::PathGraph, len: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..pg.num_edges()).map(|a| vec![a]).collect();
    for _ in 1..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                let last = *w.last().unwrap();
                pg.edges_with_tail(pg.head(last)).unwrap().iter().map(move |&b| {
                    let mut x = w.clone();
                    x.push(b);
                    x
                }).collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

#[test]
fn monotone_walks_lie_on_diameters() {
    let pg = tower(2, 3, 1);
    let diameters = pg.ball().enumerate_oriented_diameters();
    let mut walks = 0;
    for len in 1..=4 {
        for w in forward_walks(&pg, len) {
            let seg = pg.monotone_path_check(&w).unwrap();
            assert!(diameters.iter().any(|d| d.contains_window(&seg.0)), "{:?}", w);
            let back: Vec<usize> = w.iter().rev().copied().collect();
            assert_eq!(pg.monotone_path_check(&back).unwrap().0, seg.0);
            walks += 1;
        }
    }
    assert!(walks > 100);
}

#[test]
fn diameter_windows_reassemble() {
    let pg = tower(2, 3, 1);
    let aps = induced_apartments(&pg, &pg.ball().enumerate_oriented_diameters()).unwrap();
    for ap in aps.apartments() {
        assert_eq!(pg.monotone_path_check(&ap.induced_edges).unwrap(), ap.base);
    }
}

#[test]
fn adjoint_of_coboundary_is_laplacian() {
    let pg = tower(2, 2, 1);
    let (v, e) = (pg.num_vertices(), pg.num_edges());
    // dense L = D - A over the undirected multigraph
    let mut lap = vec![vec![0i64; v]; v];
    for a in 0..e {
        let (h, t) = (pg.head(a), pg.tail(a));
        lap[h][h] += 1;
        lap[t][t] += 1;
        lap[h][t] -= 1;
        lap[t][h] -= 1;
    }
    for s in 0..v {
        let f = Cochain::from_pairs(Level::Vertex, [(s, ratio(3, 2)), ((s * 5 + 1) % v, int(-2))]);
        let got = adjoint(&pg, &coboundary(&pg, &f).unwrap()).unwrap();
        for t in 0..v {
            let want: Scalar = (0..v).map(|u| int(lap[t][u]) * f.get(u)).fold(Scalar::zero(), |x, y| x + y);
            assert_eq!(got.get(t), want);
        }
    }
}

#[test]
fn harmonic_dimension_examples() {
    assert_eq!(harmonic_space(&tower(2, 1, 0)).dim(), 3);
    assert_eq!(h1c_dimension(&tower(2, 1, 0)), 3);
    assert_eq!(harmonic_space(&tower(2, 1, 2)).dim(), 0);
    let pg = tower(2, 2, 1);
    let c = pg.components().count;
    assert_eq!(harmonic_space(&pg).dim(), 24 + c - 18);
    // rank of d from the independent solver
    let rows: Vec<Row> = (0..pg.num_edges()).map(|a| row_of(&[(pg.head(a), 1), (pg.tail(a), -1)])).collect();
    assert_eq!(h1c_dimension(&pg), pg.num_edges() - common::rank(rows));
}

#[test]
fn intersection_examples() {
    assert_eq!(intersect_harmonic_exact(&tower(2, 1, 0)), 0);
    assert_eq!(intersect_harmonic_exact(&tower(2, 3, 2)), 0);
    assert_eq!(intersect_harmonic_exact(&tower(2, 1, 2)), 0);
}

#[test]
fn norm_example() {
    let w = Cochain::from_pairs(Level::Edge, [(0, int(3)), (5, int(-4))]);
    assert_eq!(l2_norm_squared(&w), int(25));
}

#[test]
fn echelon_rank_agrees_with_solver() {
    let rows = [
        vec![(0, 1), (1, 2), (3, -1)],
        vec![(1, 1), (2, 1)],
        vec![(0, 1), (1, 3), (2, 1), (3, -1)],
        vec![(2, 5)],
        vec![(0, 2), (1, 4), (3, -2)],
    ];
    let sparse: Vec<_> = rows.iter().map(|r| sparse_row(r.iter().map(|&(c, v)| (c, int(v))))).collect();
    let dense: Vec<Row> = rows.iter().map(|r| row_of(r)).collect();
    assert_eq!(linalg::rank(sparse.clone()), common::rank(dense));
    let null = linalg::nullspace(sparse.clone(), 4);
    assert_eq!(null.len(), 4 - linalg::rank(sparse.clone()));
    for v in &null {
        for r in &sparse {
            assert!(linalg::dot(r, v).is_zero());
        }
    }
}

#[test]
fn radon_examples() {
    let pg = tower(2, 1, 0);
    let aps = induced_apartments(&pg, &pg.ball().enumerate_oriented_diameters()).unwrap();
    assert!(aps.apartments().iter().all(|ap| ap.induced_edges.len() == 2));
    assert!(radon_transform(&pg, &aps, &Cochain::zero(Level::Edge)).unwrap().is_zero());
    // full-length windows select exactly one apartment
    let pg = tower(2, 2, 3);
    let aps = induced_apartments(&pg, &pg.ball().enumerate_oriented_diameters()).unwrap();
    for a in 0..pg.num_edges() {
        assert_eq!(aps.apartments_through(a).unwrap().len(), 1);
    }
}

#[test]
fn kernel_dimension_against_solver() {
    let pg = tower(2, 4, 0);
    let aps = induced_apartments(&pg, &pg.ball().enumerate_oriented_diameters()).unwrap();
    let kernel = radon_kernel_interior(&pg, &aps, 2).unwrap();
    let interior: Vec<usize> = (0..pg.num_edges()).filter(|&a| pg.edge_path(a).max_depth(pg.ball()) <= 2).collect();
    let rows: Vec<Row> = aps
        .apartments()
        .iter()
        .map(|ap| {
            let cols: Vec<(usize, i64)> = ap
                .induced_edges
                .iter()
                .filter_map(|a| interior.iter().position(|b| b == a).map(|i| (i, 1)))
                .collect();
            row_of(&cols)
        })
        .collect();
    assert_eq!(kernel.len(), interior.len() - common::rank(rows));
    for w in &kernel {
        assert!(radon_transform(&pg, &aps, w).unwrap().is_zero());
    }
    let rep = exactness_check(&pg, &aps, 2).unwrap();
    assert!(rep.equal);
    assert!(exactness_check(&pg, &aps, 3).unwrap().equal);
}

#[test]
fn primitive_of_an_indicator_coboundary() {
    let pg = tower(2, 4, 0);
    let s = pg.vertex_id(&KPath(vec![0])).unwrap();
    let w = coboundary(&pg, &Cochain::indicator(Level::Vertex, s)).unwrap();
    let far = pg.vertex_id(&KPath(vec![pg.ball().leaves()[0]])).unwrap();
    let p = primitive(&pg, &w, Some(far)).unwrap();
    assert_eq!(p.f, Cochain::indicator(Level::Vertex, s));
}

#[test]
fn primitive_matches_linear_solve() {
    let pg = tower(2, 4, 0);
    let aps = induced_apartments(&pg, &pg.ball().enumerate_oriented_diameters()).unwrap();
    let (comp, count) = bfs_components(&pg);
    for w in radon_kernel_interior(&pg, &aps, 2).unwrap() {
        let f = primitive(&pg, &w, None).unwrap().f;
        let rows = (0..pg.num_edges()).map(|a| (row_of(&[(pg.head(a), 1), (pg.tail(a), -1)]), w.get(a))).collect();
        let sol = solve(rows, pg.num_vertices()).1.expect("consistent");
        let mut offsets = vec![None; count];
        for s in 0..pg.num_vertices() {
            let d = f.get(s) - &sol[s];
            let slot = offsets[comp[s]].get_or_insert_with(|| d.clone());
            assert_eq!(*slot, d);
        }
    }
}

#[test]
fn span_examples() {
    let b = ball(2, 2);
    assert!(span_check(&b, 3).unwrap().spans);
    let low = span_check(&b, 0).unwrap();
    assert!(!low.spans);
    assert!(low.rank <= 18);
}
