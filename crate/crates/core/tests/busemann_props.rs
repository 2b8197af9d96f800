mod common;

use std::collections::BTreeSet;

use curvecx::boundary::BoundaryPoint;
use curvecx::busemann::{self, Horizon, MinSetConfig};
use curvecx::hypgraph::{FareyOracle, GraphOracle, HalfInt, Tree3, TreeEnd};
use curvecx::{Error, Slope};
use proptest::prelude::*;

use common::strategies::{seed, slope};
use common::*;

type Word = Vec<u8>;
type End = (Vec<u8>, Vec<u8>);

fn word_distance(u: &[u8], v: &[u8]) -> i64 {
    let c = u.iter().zip(v).take_while(|(a, b)| a == b).count();
    (u.len() + v.len() - 2 * c) as i64
}

/// lim d(x, r(t)) - t along the ray r from y, read off far out.
fn naive_busemann(x: &[u8], y: &[u8], end: &End) -> i64 {
    let t = 60;
    word_distance(x, &tree_ray_point(y, end, t)) - t as i64
}

fn tree_case() -> impl Strategy<Value = (Word, Word, End)> {
    seed().prop_map(|mut r| {
        (tree_random_vertex(&mut r, 6), tree_random_vertex(&mut r, 6), tree_random_end(&mut r))
    })
}

fn distinct_tree_ends() -> impl Strategy<Value = [End; 3]> {
    seed().prop_filter_map("repeated end", |mut r| {
        let e = [tree_random_end(&mut r), tree_random_end(&mut r), tree_random_end(&mut r)];
        let t: Vec<TreeEnd> = e.iter().map(to_tree_end).collect();
        let distinct = t[0].common_prefix(&t[1]).is_some()
            && t[1].common_prefix(&t[2]).is_some()
            && t[0].common_prefix(&t[2]).is_some();
        distinct.then_some(e)
    })
}

fn pair_or_skip<G: curvecx::hypgraph::RayOracle>(
    g: &G,
    a: &G::End,
    x: &G::Vertex,
    y: &G::Vertex,
) -> Option<busemann::BusemannPair> {
    match busemann::busemann_pair(g, a, x, y, &Horizon::for_distance(g.distance(x, y) + 4)) {
        Ok(p) => Some(p),
        Err(Error::NotStabilized(_)) => None,
        Err(e) => panic!("{e}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tree_values_match_the_limit((x, y, end) in tree_case()) {
        let p = busemann::busemann_pair(&Tree3, &to_tree_end(&end), &to_tree_vertex(&x), &to_tree_vertex(&y), &Horizon::for_distance(word_distance(&x, &y) as u64)).unwrap();
        let expect = naive_busemann(&x, &y, &end);
        prop_assert_eq!(p.alpha, expect);
        prop_assert_eq!(p.beta, expect);
        prop_assert_eq!(p.delta_hat, HalfInt::default());
    }

    #[test]
    fn tree_beta_is_one_lipschitz((x, y, end) in tree_case(), z in seed()) {
        let mut z = z;
        let z = tree_random_vertex(&mut z, 6);
        let a = to_tree_end(&end);
        let b = |p: &Word| {
            busemann::beta(&Tree3, &a, &to_tree_vertex(p), &to_tree_vertex(&z), &Horizon::for_distance(word_distance(p, &z) as u64))
                .unwrap()
                .value
        };
        prop_assert!((b(&x) - b(&y)).abs() <= word_distance(&x, &y));
    }

    #[test]
    fn tree_min_set_is_the_brute_force_argmin(ends in distinct_tree_ends()) {
        let t: Vec<TreeEnd> = ends.iter().map(to_tree_end).collect();
        let res = busemann::min_set(&Tree3, &t[0], &t[1], &t[2], &MinSetConfig::default()).unwrap();
        let root: Word = vec![];
        let f = |w: &Word| ends.iter().map(|e| naive_busemann(w, &root, e)).sum::<i64>();
        let ball = tree_ball(&root, 12);
        let best = ball.iter().map(f).min().unwrap();
        let argmin: Vec<Word> = ball.iter().filter(|w| f(w) == best).cloned().collect();
        let ms: Vec<Word> = res.ms.iter().map(|v| v.word().to_vec()).collect();
        prop_assert_eq!(ms, argmin);
    }

    // with delta 0 the base-change bound says every base sees the same minimizers
    #[test]
    fn tree_min_set_ignores_the_base(ends in distinct_tree_ends()) {
        let t: Vec<TreeEnd> = ends.iter().map(to_tree_end).collect();
        let res = busemann::min_set(&Tree3, &t[0], &t[1], &t[2], &MinSetConfig::default()).unwrap();
        for b in &res.bases {
            prop_assert_eq!(&b.argmin, &res.ms);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn farey_alpha_and_beta_are_close(r in seed(), x in slope(8), y in slope(8)) {
        let mut r = r;
        let a = random_qi(&mut r);
        let p = pair_or_skip(&FareyOracle, &a, &x, &y);
        prop_assume!(p.is_some());
        let p = p.unwrap();
        prop_assert!(2 * (p.alpha - p.beta).abs() <= 8 * p.delta_hat.doubled());
    }

    #[test]
    fn farey_beta_is_coarsely_lipschitz(r in seed(), x in slope(6), y in slope(6), z in slope(6)) {
        let mut r = r;
        let a = random_qi(&mut r);
        let (px, py) = (pair_or_skip(&FareyOracle, &a, &x, &z), pair_or_skip(&FareyOracle, &a, &y, &z));
        prop_assume!(px.is_some() && py.is_some());
        let (px, py) = (px.unwrap(), py.unwrap());
        let dh = px.delta_hat.doubled().max(py.delta_hat.doubled());
        let d = FareyOracle.distance(&x, &y) as i64;
        prop_assert!(2 * (px.beta - py.beta).abs() <= 2 * d + 80 * dh);
    }
}

fn distinct_points() -> impl Strategy<Value = [BoundaryPoint; 3]> {
    seed().prop_filter_map("repeated point", |mut r| {
        let t = [random_qi(&mut r), random_qi(&mut r), random_qi(&mut r)];
        (t[0] != t[1] && t[1] != t[2] && t[0] != t[2]).then_some(t)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn farey_minimizers_survive_a_change_of_base([a, b, c] in distinct_points()) {
        let g = FareyOracle;
        let cfg = MinSetConfig::default();
        let res = busemann::min_set(&g, &a, &b, &c, &cfg).unwrap();
        let slack = 1344 * res.delta_hat.doubled() / 2;
        for y in &res.bases {
            for z in &res.bases {
                let f = busemann::evaluate_f(&g, [&a, &b, &c], &y.base, &z.argmin, &cfg).unwrap();
                for (w, v) in &f {
                    prop_assert!(*v <= y.min_value + slack, "{} from base {}", w, y.base);
                }
            }
        }
        let msp: BTreeSet<&Slope> = res.ms_prime.iter().collect();
        prop_assert!(res.ms.iter().all(|v| msp.contains(v)));
    }
}
