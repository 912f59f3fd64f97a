use serde::{Deserialize, Serialize};

use super::events::{Connectivity, Goal, Region};
use super::union_find::{Class, PeriodicUnionFind, UnionOutcome};
use crate::error::{Error, Result};
use crate::sampler::FieldSample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualityKind {
    /// Both images have rank one and lie on a common line.
    Colinear,
    /// The positive set carries all of `Z^2`; the negative set carries nothing.
    PositiveSurjective,
    NegativeSurjective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityCase {
    pub case: DualityKind,
    /// Hermite basis of the classes carried by `{f > 0}`.
    pub pos_classes: Vec<[i64; 2]>,
    /// Hermite basis of the classes carried by `{f <= 0}`.
    pub neg_classes: Vec<[i64; 2]>,
}

/// Hermite normal form of the lattice spanned by `vs`: at most two rows, upper triangular.
pub fn hermite_basis(vs: &[[i64; 2]]) -> Vec<[i64; 2]> {
    let mut rows: Vec<[i64; 2]> = vs.iter().copied().filter(|v| *v != [0, 0]).collect();
    // Euclid on the first column until at most one row has a nonzero entry there
    loop {
        let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| rows[i][0] != 0).collect();
        if nz.len() <= 1 {
            break;
        }
        nz.sort_by_key(|&i| rows[i][0].abs());
        let p = nz[0];
        let pv = rows[p];
        for &i in &nz[1..] {
            let q = rows[i][0] / pv[0];
            rows[i] = [rows[i][0] - q * pv[0], rows[i][1] - q * pv[1]];
        }
    }
    let lead = rows.iter().copied().find(|r| r[0] != 0);
    let g = rows.iter().filter(|r| r[0] == 0).fold(0i64, |g, r| gcd(g, r[1].abs()));
    let mut out = Vec::new();
    if let Some(mut r) = lead {
        if r[0] < 0 {
            r = [-r[0], -r[1]];
        }
        if g > 0 {
            r[1] = r[1].rem_euclid(g);
        }
        out.push(r);
    }
    if g > 0 {
        out.push([0, g]);
    }
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn cross(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Nonzero cycle classes of the sites selected by `open`.
fn winding_classes(region: &Region, open: impl Fn(usize) -> bool) -> Vec<[i64; 2]> {
    let mut uf = PeriodicUnionFind::new(region.len());
    let mut out = Vec::new();
    for s in 0..region.len() {
        if !open(region.cells[s]) {
            continue;
        }
        // each edge once, from its later endpoint
        for &(nb, w) in region.neighbors(s) {
            let nb = nb as usize;
            if nb > s || !open(region.cells[nb]) {
                continue;
            }
            if let UnionOutcome::Cycle(c) = uf.union(s, nb, [w[0] as i32, w[1] as i32, 0]) {
                if c[0] != 0 || c[1] != 0 {
                    out.push([c[0] as i64, c[1] as i64]);
                }
            }
        }
    }
    out
}

/// Classifies the windings of `{f > 0}` (primal connectivity) against `{f <= 0}` (dual).
pub fn duality_classify(f: &FieldSample, primal: Connectivity) -> Result<DualityCase> {
    if f.grid.d() != 2 {
        return Err(Error::UnsupportedDimension(f.grid.d()));
    }
    let pos_region = Region::torus(&f.grid, primal, Goal::Winding { axis: 0 });
    let neg_region = Region::torus(&f.grid, primal.dual(), Goal::Winding { axis: 0 });
    let pos = hermite_basis(&winding_classes(&pos_region, |c| f.value(c) > 0.0));
    let neg = hermite_basis(&winding_classes(&neg_region, |c| f.value(c) <= 0.0));
    let describe = || format!("positive basis {pos:?}, negative basis {neg:?}");
    for a in &pos {
        for b in &neg {
            if cross(*a, *b) != 0 {
                return Err(Error::ClassificationImpossible(format!("classes cross: {}", describe())));
            }
        }
    }
    let surjective = |b: &[[i64; 2]]| b.len() == 2 && (b[0][0] * b[1][1]).abs() == 1;
    let case = match (pos.len(), neg.len()) {
        (1, 1) => DualityKind::Colinear,
        (2, 0) if surjective(&pos) => DualityKind::PositiveSurjective,
        (0, 2) if surjective(&neg) => DualityKind::NegativeSurjective,
        _ => return Err(Error::ClassificationImpossible(describe())),
    };
    Ok(DualityCase { case, pos_classes: pos, neg_classes: neg })
}

/// All nonzero winding generators of `{f + level > 0}`, for callers that need the raw list.
pub fn positive_windings(f: &FieldSample, conn: Connectivity) -> Vec<Class> {
    let region = Region::torus(&f.grid, conn, Goal::Winding { axis: 0 });
    winding_classes(&region, |c| f.value(c) > 0.0).into_iter().map(|v| [v[0] as i32, v[1] as i32, 0]).collect()
}
