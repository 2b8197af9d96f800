//! Acceptance suite: eleven end-to-end criteria, one PASS/FAIL line each.
//! Runs without the libtest harness so the summary is always printed.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use curvecx::boundary::BoundaryPoint;
use curvecx::busemann::{self, Horizon, IdealGeometry, MinSetConfig};
use curvecx::hypgraph::{FareyOracle, GraphOracle, HalfInt, Tree3};
use curvecx::mcg::{self, ElementClass, SL2Matrix};
use curvecx::propa::{self, PropaConstants, Scaled, Truncation, WitnessFunction};
use curvecx::surfaces::{self, Enumeration, SurfaceType};
use curvecx::{farey, Slope};

use common::*;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn geodesic_set(x: &Slope, y: &Slope) -> BTreeSet<Vec<(i64, i64)>> {
    farey::geodesics(x, y)
        .into_iter()
        .map(|p| p.iter().map(pq).collect())
        .collect()
}

fn farey_oracle() -> Check {
    let ball = FareyBall::new(40);
    let small: Vec<usize> = (0..ball.verts.len())
        .filter(|&i| ball.verts[i].0.abs() <= 20 && ball.verts[i].1 <= 20)
        .collect();
    let mut r = rng(1);
    let random: Vec<(usize, usize)> = (0..500)
        .map(|_| (r.gen_range(0..ball.verts.len()), r.gen_range(0..ball.verts.len())))
        .collect();
    let mut by_src: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &a) in small.iter().enumerate() {
        by_src.entry(a).or_default().extend(small[i + 1..].iter().copied());
    }
    for &(a, b) in &random {
        by_src.entry(a).or_default().push(b);
    }
    let jobs: Vec<(usize, Vec<usize>)> = by_src.into_iter().collect();
    let checked: usize = jobs
        .par_iter()
        .map(|(a, bs)| -> Result<usize, String> {
            let dist = ball.bfs(*a);
            let (p, q) = ball.verts[*a];
            let x = Slope::new(p, q).unwrap();
            for &b in bs {
                let (r, s) = ball.verts[b];
                let y = Slope::new(r, s).unwrap();
                let d = farey::distance(&x, &y);
                ensure!(d == dist[b], "distance {x} {y}: {d} vs oracle {}", dist[b]);
                ensure!(
                    geodesic_set(&x, &y) == ball.paths(&dist, b),
                    "geodesics {x} {y} differ from oracle"
                );
            }
            Ok(bs.len())
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .sum();
    Ok(format!("{checked} pairs agree with BFS on {} slopes", ball.verts.len()))
}

fn f1_bound() -> Check {
    let mut r = rng(2);
    let mut pairs = Vec::new();
    while pairs.len() < 200 {
        let x = farey::random_slope(&mut r, 30);
        let y = farey::random_slope(&mut r, 3000);
        let d = farey::distance(&x, &y);
        if (3..=8).contains(&d) {
            pairs.push((x, y));
        }
    }
    let mut worst = 0;
    for (x, y) in &pairs {
        let gv: Vec<Slope> = farey::geodesic_vertices(x, y).into_iter().collect();
        for z in &gv {
            let c = gv.iter().filter(|w| *w == z || farey::adjacent(z, w)).count();
            worst = worst.max(c);
            ensure!(c <= 6, "{x} {y}: {z} sees {c} geodesic vertices");
        }
    }
    Ok(format!("200 pairs, largest |G cap B(z;1)| = {worst}"))
}

fn quadrilateral() -> Check {
    let mut r = rng(3);
    let (m1, p1) = (Slope::int(-1), Slope::int(1));
    for _ in 0..100 {
        let len = r.gen_range(1..30);
        let m = mcg::random_word(&mut r, len);
        let (x, y) = (m.apply(&m1), m.apply(&p1));
        let e = farey::FareyEdge::new(m.apply(&Slope::infinity()), m.apply(&Slope::int(0))).unwrap();
        ensure!(farey::separating_edges(&x, &y) == vec![e.clone()], "{x} {y}: E(x,y) != {{{e}}}");
        ensure!(farey::pivots(&x, &y).is_empty(), "{x} {y} has pivots");
        let g = farey::geodesics(&x, &y);
        ensure!(g.len() == 2 && farey::distance(&x, &y) == 2, "{x} {y}: {} geodesics", g.len());
    }
    Ok("100 quadrilaterals, two geodesics each".into())
}

fn f_lower_bound() -> Check {
    let mut r = rng(4);
    let points: Vec<(Slope, BoundaryPoint)> = (0..20)
        .map(|_| (farey::random_slope(&mut r, 5), random_qi(&mut r)))
        .collect();
    let mut least = u64::MAX;
    let results: Vec<Result<u64, String>> = points
        .par_iter()
        .map(|(x, a)| {
            let mut slack = u64::MAX;
            for n in 4..=12u64 {
                let (s, exact) = propa::segment_union(&FareyOracle, x, a, 0, n, None)
                    .map_err(|e| format!("{x} {a} n={n}: {e}"))?;
                ensure!(exact, "k = 0 ball should be exact");
                ensure!(s.len() as u64 >= n, "{x} {a} n={n}: |F| = {}", s.len());
                slack = slack.min(s.len() as u64 - n);
            }
            Ok(slack)
        })
        .collect();
    for s in results {
        least = least.min(s?);
    }
    Ok(format!("20 points, n = 4..12, least |F| - n = {least}"))
}

fn tree_decay() -> Check {
    let mut r = rng(5);
    let consts = PropaConstants::tree();
    let trunc = Truncation::default();
    let ns = [4u64, 9, 16, 25];
    for _ in 0..20 {
        let xw = tree_random_vertex(&mut r, 5);
        let yw = tree_neighbor(&mut r, &xw);
        let end = tree_random_end(&mut r);
        let (x, y, a) = (to_tree_vertex(&xw), to_tree_vertex(&yw), to_tree_end(&end));
        let mut prev: Option<Scaled> = None;
        for n in ns {
            let d = propa::h_difference(&Tree3, &x, &y, &a, n, &consts, &trunc)
                .map_err(|e| e.to_string())?;
            let oracle = l1_counts(&tree_h(&xw, &end, n), &tree_h(&yw, &end, n));
            ensure!(d.value.m == BigInt::from(oracle), "{x} {y} {a} n={n}: {} vs oracle {oracle}", d.value);
            ensure!(propa::within_difference_bound(&d.value, n, 1, &consts), "bound fails at n={n}");
            if let Some(p) = &prev {
                ensure!(d.value < *p, "not decreasing at n={n}");
            }
            prev = Some(d.value);
        }
    }
    // one pair against the closed form 2 ceil(sqrt n) n^{-3/2}
    let (x, y) = (to_tree_vertex(&[]), to_tree_vertex(&[0]));
    let a = "(12)".parse().unwrap();
    let vals: Vec<String> = ns
        .iter()
        .map(|&n| {
            propa::h_difference(&Tree3, &x, &y, &a, n, &consts, &trunc)
                .unwrap()
                .value
                .to_string()
        })
        .collect();
    ensure!(vals == ["1/2", "2/9", "1/8", "2/25"], "closed form mismatch {vals:?}");
    Ok(format!("20 pairs exact, e.g. {}", vals.join(" > ")))
}

fn tree_h_witness(x: &[u8], end: &(Vec<u8>, Vec<u8>), n: u64) -> WitnessFunction<curvecx::hypgraph::TreeVertex> {
    propa::h_witness(
        &Tree3,
        &to_tree_vertex(x),
        &to_tree_end(end),
        n,
        &PropaConstants::tree(),
        &Truncation::default(),
    )
    .unwrap()
}

fn yu_identity() -> Check {
    let mut r = rng(6);
    let consts = PropaConstants::tree();
    for i in 0..100 {
        let xw = tree_random_vertex(&mut r, 4);
        let yw = tree_neighbor(&mut r, &xw);
        let end = tree_random_end(&mut r);
        let n = [4u64, 9, 16][i % 3];
        let mut ws = BTreeMap::new();
        ws.insert(to_tree_vertex(&xw), tree_h_witness(&xw, &end, n));
        ws.insert(to_tree_vertex(&yw), tree_h_witness(&yw, &end, n));
        let prob = propa::normalize(&ws, &consts).map_err(|e| e.to_string())?;
        let vx = &prob.vectors[&to_tree_vertex(&xw)];
        let vy = &prob.vectors[&to_tree_vertex(&yw)];
        let lcm = {
            use num_integer::Integer;
            propa::common_denominator(vx).lcm(&propa::common_denominator(vy))
        };
        let p: u64 = lcm.try_into().unwrap();
        let (a, b) = (propa::yu_sets(vx, p).unwrap(), propa::yu_sets(vy, p).unwrap());
        ensure!(a.elements.len() as u64 == p, "|A| != P");
        let lhs = BigRational::from_integer(propa::symmetric_difference_size(&a, &b).into());
        let rhs = BigRational::from_integer(p.into()) * propa::l1_rational(vx, vy);
        ensure!(lhs == rhs, "pair {i}: {lhs} != {rhs}");
    }
    Ok("100 quantized tree pairs".into())
}

fn doubled(h: HalfInt) -> i64 {
    h.doubled()
}

fn busemann_comparison() -> Check {
    let mut r = rng(7);
    let g = FareyOracle;
    let mut done = 0;
    let mut attempts = 0;
    let mut worst = (0i64, 0i64);
    while done < 50 {
        attempts += 1;
        ensure!(attempts < 200, "only {done} stabilized configurations in {attempts} attempts");
        let a = random_qi(&mut r);
        let x = farey::random_slope(&mut r, 8);
        let y = farey::random_slope(&mut r, 8);
        let h = Horizon::for_distance(g.distance(&x, &y));
        let p = match busemann::busemann_pair(&g, &a, &x, &y, &h) {
            Ok(p) => p,
            Err(curvecx::Error::NotStabilized(_)) => continue,
            Err(e) => return Err(e.to_string()),
        };
        let diff = (p.alpha - p.beta).abs();
        ensure!(2 * diff <= 8 * doubled(p.delta_hat), "{a} {x} {y}: |alpha-beta| = {diff}, delta {}", p.delta_hat);
        worst = worst.max((diff, doubled(p.delta_hat)));
        done += 1;
    }
    let mut tree = 0;
    for _ in 0..50 {
        let (x, y) = (tree_random_vertex(&mut r, 6), tree_random_vertex(&mut r, 6));
        let a = to_tree_end(&tree_random_end(&mut r));
        let (x, y) = (to_tree_vertex(&x), to_tree_vertex(&y));
        let h = Horizon::for_distance(Tree3.distance(&x, &y));
        let p = busemann::busemann_pair(&Tree3, &a, &x, &y, &h).map_err(|e| e.to_string())?;
        ensure!(p.alpha == p.beta, "tree {a} {x} {y}: {} != {}", p.alpha, p.beta);
        tree += 1;
    }
    let mut cocycles = 0;
    while cocycles < 20 {
        let a = random_qi(&mut r);
        let (x, y, z) = (
            farey::random_slope(&mut r, 6),
            farey::random_slope(&mut r, 6),
            farey::random_slope(&mut r, 6),
        );
        let mut dh = 0;
        let mut skip = false;
        for (p, q) in [(&x, &y), (&y, &z), (&x, &z)] {
            match busemann::busemann_pair(&g, &a, p, q, &Horizon::for_distance(g.distance(p, q) + 8)) {
                Ok(b) => dh = dh.max(doubled(b.delta_hat)),
                Err(curvecx::Error::NotStabilized(_)) => skip = true,
                Err(e) => return Err(e.to_string()),
            }
        }
        if skip {
            continue;
        }
        let (anti, tri) = match busemann::cocycle_defects(&g, &a, &x, &y, &z, 8) {
            Ok(v) => v,
            Err(curvecx::Error::NotStabilized(_)) => continue,
            Err(e) => return Err(e.to_string()),
        };
        ensure!(2 * anti <= 120 * dh && 2 * tri <= 200 * dh, "cocycle {a} {x} {y} {z}: ({anti}, {tri}) vs delta {dh}/2");
        cocycles += 1;
    }
    Ok(format!(
        "50 Farey configs (max |alpha-beta| {} at delta {}/2, {} skipped unstable), {tree} tree configs, {cocycles} cocycles",
        worst.0,
        worst.1,
        attempts - 50
    ))
}

fn min_sets() -> Check {
    let mut r = rng(8);
    let cfg = MinSetConfig::default();
    let g = FareyOracle;
    let triples: Vec<[BoundaryPoint; 3]> = (0..20)
        .map(|_| loop {
            let t = [random_qi(&mut r), random_qi(&mut r), random_qi(&mut r)];
            if t[0] != t[1] && t[1] != t[2] && t[0] != t[2] {
                break t;
            }
        })
        .collect();
    let mats: Vec<SL2Matrix> = (0..10)
        .map(|_| {
            let len = r.gen_range(1..6);
            mcg::random_word(&mut r, len)
        })
        .collect();
    let results: Vec<Result<(i64, i64), String>> = triples
        .par_iter()
        .enumerate()
        .map(|(i, [a, b, c])| {
            let res = busemann::min_set(&g, a, b, c, &cfg).map_err(|e| format!("{a} {b} {c}: {e}"))?;
            ensure!(res.margin > 0, "margin {}", res.margin);
            let msp: BTreeSet<&Slope> = res.ms_prime.iter().collect();
            ensure!(res.ms.iter().all(|v| msp.contains(v)), "MS not inside MS'");
            // M0 is fitted on the window; it must still hold on a window two steps wider
            let wide: Vec<Slope> = busemann::region(&g, [a, b, c], &res.center, res.radius + 2)
                .map_err(|e| e.to_string())?
                .into_iter()
                .collect();
            ensure!(wide.len() > res.region.len(), "triple {i}: wider window adds nothing");
            let bases: Vec<Slope> = res.bases.iter().map(|m| m.base.clone()).collect();
            let bad = busemann::properness_violations(&g, [a, b, c], &bases, &wide, res.m0, &cfg)
                .map_err(|e| e.to_string())?;
            ensure!(bad == 0, "triple {i}: {bad} properness violations with M0 = {}", res.m0);
            if i < mats.len() {
                let m = &mats[i];
                let img = |p: &BoundaryPoint| p.apply(m).unwrap();
                let res2 = busemann::min_set_at(
                    &g,
                    [&img(a), &img(b), &img(c)],
                    &g.ideal_center(&img(a), &img(b), &img(c)).unwrap(),
                    &res.center.iter().map(|v| m.apply(v)).collect::<Vec<_>>(),
                    res.radius,
                    &cfg,
                )
                .map_err(|e| e.to_string())?;
                let moved: BTreeSet<Slope> = res.ms_prime.iter().map(|v| m.apply(v)).collect();
                let direct: BTreeSet<Slope> = res2.ms_prime.into_iter().collect();
                ensure!(moved == direct, "triple {i}: MS' not equivariant under {m}");
            }
            Ok((res.margin, res.m0))
        })
        .collect();
    let mut margins = Vec::new();
    for x in results {
        margins.push(x?);
    }
    let min_margin = margins.iter().map(|m| m.0).min().unwrap();
    let max_m0 = margins.iter().map(|m| m.1).max().unwrap();
    Ok(format!("20 triples, least margin {min_margin}, largest M0 {max_m0}, 10 equivariant"))
}

fn decomposition_lemmas() -> Check {
    let list = surfaces::surfaces_up_to(8);
    let mut types = 0;
    for s in &list {
        let e = Enumeration::new(*s).map_err(|e| e.to_string())?;
        let max = surfaces::verify_max_lemma(&e);
        ensure!(max.pass, "{s}: max n {} != {}", max.observed_max, max.n_max);
        let par = surfaces::verify_parity_lemmas(&e);
        ensure!(par.pass, "{s}: {:?}", par.failures);
        types += e.graphs.len();
    }
    Ok(format!("{} surfaces, {types} decomposition types", list.len()))
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn invariants() -> Check {
    let chi = surfaces::virtual_euler(SurfaceType::new(1, 1)).unwrap();
    ensure!(chi == q(-1, 12), "chi(1,1) = {chi}");
    let (idx, b) = surfaces::l2_betti(SurfaceType::new(1, 1)).unwrap();
    ensure!(idx == 1 && BigRational::one() + &b == q(13, 12), "cost 1 + beta_1 = {}", BigRational::one() + b);
    ensure!(surfaces::l2_betti(SurfaceType::new(2, 0)).unwrap() == (3, q(1, 240)), "l2_betti(2,0)");
    let mut checked = 0;
    for g in 0..=5u32 {
        for p in 0..=14u32 {
            let s = SurfaceType::new(g, p);
            if s.complexity() > 10 {
                continue;
            }
            let Ok(chi) = surfaces::virtual_euler(s) else { continue };
            ensure!(!chi.is_zero(), "chi{s} = 0");
            ensure!(surfaces::l2_euler(s).unwrap() == chi, "l2 Euler characteristic differs at {s}");
            checked += 1;
        }
    }
    Ok(format!("identity exact on {checked} surfaces with kappa <= 10"))
}

fn dynamics() -> Check {
    let mut r = rng(11);
    let eps_sq = q(1, 10i64.pow(16));
    let (mut fo, mut red, mut pa) = (0, 0, 0);
    for _ in 0..1000 {
        let len = r.gen_range(1..25);
        let m = mcg::random_word(&mut r, len);
        let t = m.trace();
        let (a, b, c, d) = m.entries();
        match mcg::classify(&m).map_err(|e| e.to_string())? {
            ElementClass::FiniteOrder { order } => {
                ensure!(t.magnitude() < &2u32.into() || m.is_central(), "{m}: finite order with trace {t}");
                ensure!(m.pow(order as i64).is_identity(), "{m}^{order} != I");
                ensure!((1..order).all(|k| !m.pow(k as i64).is_identity()), "{m}: order not minimal");
                fo += 1;
            }
            ElementClass::Reducible { fixed } => {
                ensure!(t.magnitude() == &2u32.into() && !m.is_central(), "{m}: reducible with trace {t}");
                ensure!(m.apply(&fixed) == fixed, "{m} moves {fixed}");
                red += 1;
            }
            ElementClass::PseudoAnosov { f_plus, f_minus, .. } => {
                ensure!(t.magnitude() > &2u32.into(), "{m}: pA with trace {t}");
                for f in [&f_plus, &f_minus] {
                    let qi = f.to_quadratic().map_err(|e| e.to_string())?;
                    ensure!(qi.mobius(a, b, c, d) == qi, "{m} does not fix {f}");
                }
                let steps = mcg::iterate_convergence(&m, &Slope::int(0), 30).map_err(|e| e.to_string())?;
                ensure!(
                    steps.iter().any(|s| s.dist_sq.cmp_rational(&eps_sq).is_lt()),
                    "{m}: no iterate within 1e-8 of {f_plus} in 30 steps"
                );
                pa += 1;
            }
        }
    }
    let mut holds = 0;
    for _ in 0..1000 {
        let al = farey::random_slope(&mut r, 40);
        let be = farey::random_slope(&mut r, 40);
        let ga = farey::random_slope(&mut r, 40);
        let n = *[-5i64, -3, -2, -1, 1, 2, 3, 5].get(r.gen_range(0..8)).unwrap();
        let ti = mcg::twist_inequality_check(&[(al.clone(), n)], &be, &ga).map_err(|e| e.to_string())?;
        ensure!(ti.holds, "twist inequality fails for {al}^{n}, {be}, {ga}: {ti:?}");
        holds += 1;
    }
    let mut comm = 0;
    while comm < 500 {
        let al = farey::random_slope(&mut r, 40);
        let be = farey::random_slope(&mut r, 40);
        if al == be {
            continue;
        }
        let (n, m) = (r.gen_range(1..=4), r.gen_range(1..=4));
        let rep = mcg::commuting_check(&al, &be, n, m).map_err(|e| e.to_string())?;
        ensure!(!rep.commute, "twists about {al} and {be} commute");
        comm += 1;
    }
    Ok(format!("{fo} finite, {red} reducible, {pa} pA; {holds} twist inequalities; {comm} commutators"))
}

fn main() {
    let criteria: [(&str, fn() -> Check, Duration); 11] = [
        ("farey oracle equivalence", farey_oracle, Duration::from_secs(30)),
        ("geodesic ball bound", f1_bound, Duration::MAX),
        ("quadrilateral geodesics", quadrilateral, Duration::MAX),
        ("F lower bound", f_lower_bound, Duration::MAX),
        ("tree H decay", tree_decay, Duration::from_secs(10)),
        ("Yu identity", yu_identity, Duration::MAX),
        ("Busemann comparison", busemann_comparison, Duration::MAX),
        ("MIN sets", min_sets, Duration::MAX),
        ("decomposition lemmas", decomposition_lemmas, Duration::from_secs(120)),
        ("mapping class group invariants", invariants, Duration::MAX),
        ("torus dynamics", dynamics, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, f, budget)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let took = t.elapsed();
        let out = match out {
            Ok(m) if took > *budget => Err(format!("{m}; took {took:.1?}, target {budget:?}")),
            o => o,
        };
        match out {
            Ok(m) => println!("[PASS] {:>2} {name}: {m} ({took:.1?})", i + 1),
            Err(m) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {m} ({took:.1?})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
