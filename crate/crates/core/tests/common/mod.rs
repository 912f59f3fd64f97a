//! Independent oracles for integration tests. Nothing here calls the library's
//! convolution, union-find or region code.
#![allow(dead_code)]

use std::collections::VecDeque;

use gfperc_core::sampler::draw_field;
use gfperc_core::topology::{Connectivity, EventKind, EventSpec};
use gfperc_core::{make_kernel, FieldSample, KernelSpec, Route, TorusGrid};

/// `f[x] = sum_y q[x - y] w[y]` on an `n x n` torus, first coordinate fastest.
pub fn direct_convolution(n: usize, q: &[f64], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for (x, o) in out.iter_mut().enumerate() {
        let (x0, x1) = (x % n, x / n);
        for y1 in 0..n {
            for y0 in 0..n {
                let d = ((x0 + n - y0) % n) + ((x1 + n - y1) % n) * n;
                *o += q[d] * w[y0 + y1 * n];
            }
        }
    }
    out
}

/// `kappa[x] = cv * sum_y q[y] q[y + x]` on an `n x n` torus.
pub fn direct_autocorrelation(n: usize, q: &[f64], cv: f64) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for (x, o) in out.iter_mut().enumerate() {
        let (x0, x1) = (x % n, x / n);
        for y1 in 0..n {
            for y0 in 0..n {
                *o += q[y0 + y1 * n] * q[(y0 + x0) % n + ((y1 + x1) % n) * n];
            }
        }
        *o *= cv;
    }
    out
}

fn steps(conn: Connectivity) -> Vec<(i64, i64)> {
    let mut v = vec![(1, 0), (-1, 0), (0, 1), (0, -1)];
    if conn == Connectivity::Eight {
        v.extend([(1, 1), (1, -1), (-1, 1), (-1, -1)]);
    }
    v
}

/// Fundamental-cycle classes (in units of `n`) of the open set, one per non-tree edge.
pub fn winding_generators(open: &[bool], n: usize, conn: Connectivity) -> Vec<[i64; 2]> {
    let ni = n as i64;
    let mut lift: Vec<Option<(i64, i64)>> = vec![None; n * n];
    let mut gens = Vec::new();
    for s in 0..n * n {
        if !open[s] || lift[s].is_some() {
            continue;
        }
        lift[s] = Some(((s % n) as i64, (s / n) as i64));
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            let (ux, uy) = lift[u].unwrap();
            for (dx, dy) in steps(conn) {
                let (tx, ty) = (ux + dx, uy + dy);
                let v = (tx.rem_euclid(ni) + ty.rem_euclid(ni) * ni) as usize;
                if !open[v] {
                    continue;
                }
                match lift[v] {
                    None => {
                        lift[v] = Some((tx, ty));
                        q.push_back(v);
                    }
                    Some((vx, vy)) => {
                        let c = [(tx - vx) / ni, (ty - vy) / ni];
                        if c != [0, 0] {
                            gens.push(c);
                        }
                    }
                }
            }
        }
    }
    gens
}

fn rot(a: i64, b: i64, k: u8) -> (i64, i64) {
    match k % 4 {
        0 => (a, b),
        1 => (-b, a),
        2 => (-a, -b),
        _ => (b, -a),
    }
}

/// Whether the open set realizes the increasing event `e` (complement ignored).
pub fn realizes(open: &[bool], grid: &TorusGrid, e: &EventSpec, conn: Connectivity) -> bool {
    let n = grid.n();
    let ni = n as i64;
    let h = grid.spacing();
    let cell = |x: i64, y: i64| (x.rem_euclid(ni) + y.rem_euclid(ni) * ni) as usize;
    match e.kind {
        EventKind::Loop { axis } => winding_generators(open, n, conn).iter().any(|c| c[axis] != 0),
        EventKind::Cross | EventKind::CrossDagger => {
            let len = if e.kind == EventKind::Cross { 6.0 } else { 3.0 };
            let w = (len * e.scale / h - 1e-9).ceil() as i64 + 1;
            let ht = (4.0 * e.scale / h - 1e-9).ceil() as i64 + 1;
            let ax = (e.placement.origin[0] / h + 1e-9).floor() as i64;
            let ay = (e.placement.origin[1] / h + 1e-9).floor() as i64;
            let site_open = |a: i64, b: i64| {
                let (dx, dy) = rot(a, b, e.placement.rotation);
                open[cell(ax + dx, ay + dy)]
            };
            let mut seen = vec![false; (w * ht) as usize];
            let mut q = VecDeque::new();
            for b in 0..ht {
                if site_open(0, b) {
                    seen[(b * w) as usize] = true;
                    q.push_back((0, b));
                }
            }
            while let Some((a, b)) = q.pop_front() {
                if a == w - 1 {
                    return true;
                }
                for (da, db) in steps(conn) {
                    let (na, nb) = (a + da, b + db);
                    if na < 0 || nb < 0 || na >= w || nb >= ht || seen[(na + nb * w) as usize] || !site_open(na, nb) {
                        continue;
                    }
                    seen[(na + nb * w) as usize] = true;
                    q.push_back((na, nb));
                }
            }
            false
        }
        EventKind::Circuit { r1, r2 } => {
            let (c1, c2) = (r1 / h, r2 / h);
            let cx = (e.placement.origin[0] / h).round() as i64;
            let cy = (e.placement.origin[1] / h).round() as i64;
            let inside = |dx: i64, dy: i64| {
                let r2 = (dx * dx + dy * dy) as f64;
                r2 >= c1 * c1 - 1e-9 && r2 <= c2 * c2 + 1e-9
            };
            let span = c2.floor() as i64 + 1;
            let side = 2 * span + 1;
            let idx = |dx: i64, dy: i64| ((dx + span) + (dy + span) * side) as usize;
            // sheet index across the cut {x = 1/2, y > 0}
            let mut sheet: Vec<Option<i64>> = vec![None; (side * side) as usize];
            let ok = |dx: i64, dy: i64| inside(dx, dy) && open[cell(cx + dx, cy + dy)];
            for sy in -span..=span {
                for sx in -span..=span {
                    if !ok(sx, sy) || sheet[idx(sx, sy)].is_some() {
                        continue;
                    }
                    sheet[idx(sx, sy)] = Some(0);
                    let mut q = VecDeque::from([(sx, sy)]);
                    while let Some((ux, uy)) = q.pop_front() {
                        let su = sheet[idx(ux, uy)].unwrap();
                        for (dx, dy) in steps(conn) {
                            let (vx, vy) = (ux + dx, uy + dy);
                            if vx.abs() > span || vy.abs() > span || !ok(vx, vy) {
                                continue;
                            }
                            let cut = if uy + vy > 0 && ux <= 0 && vx >= 1 {
                                1
                            } else if uy + vy > 0 && ux >= 1 && vx <= 0 {
                                -1
                            } else {
                                0
                            };
                            match sheet[idx(vx, vy)] {
                                None => {
                                    sheet[idx(vx, vy)] = Some(su + cut);
                                    q.push_back((vx, vy));
                                }
                                Some(sv) if sv != su + cut => return true,
                                Some(_) => {}
                            }
                        }
                    }
                }
            }
            false
        }
    }
}

/// Open set `{v + level > 0}`.
pub fn open_at(values: &[f64], level: f64) -> Vec<bool> {
    values.iter().map(|v| v + level > 0.0).collect()
}

/// Threshold by bisection over distinct field values: `-max{v : event holds on {f >= v}}`.
pub fn bisection_threshold(f: &FieldSample, e: &EventSpec, conn: Connectivity) -> f64 {
    let vals = f.effective_values();
    let mut distinct = vals.clone();
    distinct.sort_by(|a, b| b.total_cmp(a));
    distinct.dedup();
    let holds = |k: usize| {
        let v = distinct[k];
        let open: Vec<bool> = vals.iter().map(|&x| x >= v).collect();
        realizes(&open, &f.grid, e, conn)
    };
    let last = distinct.len() - 1;
    if !holds(last) {
        return f64::INFINITY;
    }
    // smallest k with holds(k); holds is monotone in k
    let (mut lo, mut hi) = (0usize, last);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    -distinct[lo]
}

/// Unit-sigma Bargmann-Fock sample on an `n x n` grid of spacing 1/2.
pub fn bf_field(n: usize, seed: u64) -> FieldSample {
    let grid = TorusGrid::square(n, n as f64 / 2.0).unwrap();
    let k = make_kernel(&KernelSpec::bargmann_fock(1.0).normalized(), &grid).unwrap();
    draw_field(&k, seed, Route::WhiteNoise).unwrap()
}

/// Same sample rounded to a coarse value lattice, so that ties are common.
pub fn quantized(f: &FieldSample, step: f64) -> FieldSample {
    let values = f.values.iter().map(|v| (v / step).round() * step).collect();
    FieldSample::from_values(f.grid, values).unwrap()
}

/// Integer lattice spanned by the classes is all of `Z^2`.
pub fn spans_plane(gens: &[[i64; 2]]) -> bool {
    fn gcd(a: i64, b: i64) -> i64 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    let mut g = 0;
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            g = gcd(g, a[0] * b[1] - a[1] * b[0]);
        }
    }
    g == 1
}

pub fn parallel(a: [i64; 2], b: [i64; 2]) -> bool {
    a[0] * b[1] - a[1] * b[0] == 0
}

/// Proptest settings for integration tests, which have no source file to persist failures next to.
pub fn cases(n: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { cases: n, failure_persistence: None, ..Default::default() }
}
