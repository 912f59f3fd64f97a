//! Event geometry and evaluation on the site lattice.
//!
//! Every event is evaluated on a [`Region`]: a list of local sites, each mapped
//! to a torus cell, with an adjacency whose edges carry a wrap class. Loops live
//! on the whole torus with periodic wraps; crossings live on a rectangle in local
//! coordinates with virtual left/right terminals; circuits live on an annulus
//! whose edges crossing a cut ray carry an angular wrap of +-1.

use serde::{Deserialize, Serialize};

use super::union_find::{Class, PeriodicUnionFind, UnionOutcome, ZERO_CLASS};
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::sampler::FieldSample;

/// Slack used when snapping physical lengths to whole cells.
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Connectivity {
    /// Face neighbours only.
    #[default]
    Four,
    /// Face and corner neighbours.
    Eight,
}

impl Connectivity {
    /// The matched connectivity for the complementary set.
    pub fn dual(self) -> Self {
        match self {
            Self::Four => Self::Eight,
            Self::Eight => Self::Four,
        }
    }

    pub fn offsets(self, d: usize) -> Vec<[i64; 3]> {
        let mut out = Vec::new();
        let r = |k: usize| if k < d { -1..=1 } else { 0..=0 };
        for a in r(0) {
            for b in r(1) {
                for c in r(2) {
                    let o: [i64; 3] = [a, b, c];
                    let l1: i64 = o.iter().map(|v| v.abs()).sum();
                    if l1 == 0 || (self == Self::Four && l1 != 1) {
                        continue;
                    }
                    out.push(o);
                }
            }
        }
        out
    }
}

impl std::str::FromStr for Connectivity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" | "four" => Ok(Self::Four),
            "8" | "eight" => Ok(Self::Eight),
            other => Err(Error::Domain(format!("unknown connectivity {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// A cluster winds with nonzero coordinate `axis`.
    Loop { axis: usize },
    /// Left-right crossing of a `6R x 4R` rectangle.
    Cross,
    /// Left-right crossing of a `3R x 4R` rectangle.
    CrossDagger,
    /// A cluster inside the annulus `r1 <= |x - center| <= r2` winds around the center.
    Circuit { r1: f64, r2: f64 },
}

/// Translation (physical lower-left corner, or the annulus center) and quarter turns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Placement {
    pub origin: [f64; 2],
    pub rotation: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    pub kind: EventKind,
    /// Rectangle scale `R`; unused by loops and circuits.
    pub scale: f64,
    #[serde(default)]
    pub placement: Placement,
    /// Marks the complement of the event, which is decreasing.
    #[serde(default)]
    pub complement: bool,
}

impl EventSpec {
    pub fn new(kind: EventKind, scale: f64) -> Self {
        Self { kind, scale, placement: Placement::default(), complement: false }
    }

    pub fn loop_event(axis: usize) -> Self {
        Self::new(EventKind::Loop { axis }, 0.0)
    }

    pub fn cross(scale: f64) -> Self {
        Self::new(EventKind::Cross, scale)
    }

    pub fn cross_dagger(scale: f64) -> Self {
        Self::new(EventKind::CrossDagger, scale)
    }

    pub fn circuit(r1: f64, r2: f64) -> Self {
        Self::new(EventKind::Circuit { r1, r2 }, 0.0)
    }

    pub fn at(mut self, origin: [f64; 2], rotation: u8) -> Self {
        self.placement = Placement { origin, rotation: rotation % 4 };
        self
    }

    pub fn complemented(mut self) -> Self {
        self.complement = !self.complement;
        self
    }

    pub fn is_increasing(&self) -> bool {
        !self.complement
    }

    pub fn label(&self) -> String {
        let base = match self.kind {
            EventKind::Loop { axis } => format!("loop{}", axis + 1),
            EventKind::Cross => format!("cross(R={})", self.scale),
            EventKind::CrossDagger => format!("cross_dagger(R={})", self.scale),
            EventKind::Circuit { r1, r2 } => format!("circuit({r1},{r2})"),
        };
        if self.complement {
            format!("not_{base}")
        } else {
            base
        }
    }
}

fn cells(len: f64, h: f64) -> i64 {
    (len / h - SNAP).ceil().max(0.0) as i64
}

fn anchor(x: f64, h: f64) -> i64 {
    (x / h + SNAP).floor() as i64
}

/// Maps rectangle-local `(a, b)` to torus offsets from the anchor under `k` quarter turns.
pub fn rotate(a: i64, b: i64, k: u8) -> (i64, i64) {
    match k % 4 {
        0 => (a, b),
        1 => (-b, a),
        2 => (-a, -b),
        _ => (b, -a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Goal {
    Winding { axis: usize },
    Terminals,
}

/// Local site graph of one event on one grid.
#[derive(Debug, Clone)]
pub struct Region {
    pub(crate) grid: TorusGrid,
    /// Torus cell of each local site.
    pub(crate) cells: Vec<usize>,
    adj_start: Vec<u32>,
    adj: Vec<(u32, [i8; 3])>,
    /// Bit 0 left terminal, bit 1 right terminal.
    pub(crate) terminal: Vec<u8>,
    pub(crate) goal: Goal,
    /// Rectangle width in sites, or 0 for other regions.
    pub(crate) width: usize,
}

impl Region {
    pub fn build(grid: &TorusGrid, e: &EventSpec, conn: Connectivity) -> Result<Region> {
        match e.kind {
            EventKind::Loop { axis } => {
                if axis >= grid.d() {
                    return Err(Error::Domain(format!("loop axis {axis} on a {}-d torus", grid.d())));
                }
                Ok(Self::torus(grid, conn, Goal::Winding { axis }))
            }
            EventKind::Cross => Self::rectangle(grid, e, 6.0, 4.0, conn),
            EventKind::CrossDagger => Self::rectangle(grid, e, 3.0, 4.0, conn),
            EventKind::Circuit { r1, r2 } => Self::annulus(grid, e.placement.origin, r1, r2, conn),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    #[inline]
    pub(crate) fn neighbors(&self, s: usize) -> &[(u32, [i8; 3])] {
        &self.adj[self.adj_start[s] as usize..self.adj_start[s + 1] as usize]
    }

    pub(crate) fn torus(grid: &TorusGrid, conn: Connectivity, goal: Goal) -> Region {
        let n = grid.n() as i64;
        let d = grid.d();
        let offs = conn.offsets(d);
        let mut adj_start = Vec::with_capacity(grid.len() + 1);
        let mut adj = Vec::with_capacity(grid.len() * offs.len());
        for i in 0..grid.len() {
            adj_start.push(adj.len() as u32);
            let c = grid.coords(i);
            for o in &offs {
                let mut nc = [0usize; 3];
                let mut wrap = [0i8; 3];
                for k in 0..d {
                    let v = c[k] as i64 + o[k];
                    wrap[k] = v.div_euclid(n) as i8;
                    nc[k] = v.rem_euclid(n) as usize;
                }
                adj.push((grid.index(&nc[..d]) as u32, wrap));
            }
        }
        adj_start.push(adj.len() as u32);
        Region {
            grid: *grid,
            cells: (0..grid.len()).collect(),
            adj_start,
            adj,
            terminal: Vec::new(),
            goal,
            width: 0,
        }
    }

    fn rectangle(grid: &TorusGrid, e: &EventSpec, len_r: f64, height_r: f64, conn: Connectivity) -> Result<Region> {
        if grid.d() != 2 {
            return Err(Error::UnsupportedDimension(grid.d()));
        }
        if !(e.scale.is_finite() && e.scale > 0.0) {
            return Err(Error::Domain(format!("rectangle scale {} must be positive", e.scale)));
        }
        let h = grid.spacing();
        let w = cells(len_r * e.scale, h) + 1;
        let ht = cells(height_r * e.scale, h) + 1;
        let p = e.placement;
        let anchor = (anchor(p.origin[0], h), anchor(p.origin[1], h));
        Self::rect_sites(grid, anchor, p.rotation, w as usize, ht as usize, conn)
    }

    /// Rectangle of `w x ht` sites crossed along its local first axis.
    pub(crate) fn rect_sites(
        grid: &TorusGrid,
        anchor: (i64, i64),
        rotation: u8,
        w: usize,
        ht: usize,
        conn: Connectivity,
    ) -> Result<Region> {
        let n = grid.n();
        if w > n + 1 || ht > n + 1 || w < 1 || ht < 1 {
            return Err(Error::GeometryOutOfBounds(format!("{w} x {ht} sites on a torus of {n} cells")));
        }
        let ni = n as i64;
        let mut cells_v = Vec::with_capacity(w * ht);
        let mut local = Vec::with_capacity(w * ht);
        let mut terminal = Vec::with_capacity(w * ht);
        for b in 0..ht as i64 {
            for a in 0..w as i64 {
                let (dx, dy) = rotate(a, b, rotation);
                let x = (anchor.0 + dx).rem_euclid(ni) as usize;
                let y = (anchor.1 + dy).rem_euclid(ni) as usize;
                cells_v.push(grid.index(&[x, y]));
                local.push((a, b));
                terminal.push(u8::from(a == 0) | (u8::from(a == w as i64 - 1) << 1));
            }
        }
        let offs = conn.offsets(2);
        let mut adj_start = Vec::with_capacity(w * ht + 1);
        let mut adj = Vec::new();
        for &(a, b) in &local {
            adj_start.push(adj.len() as u32);
            for o in &offs {
                let (na, nb) = (a + o[0], b + o[1]);
                if na >= 0 && nb >= 0 && na < w as i64 && nb < ht as i64 {
                    adj.push(((na + nb * w as i64) as u32, [0i8; 3]));
                }
            }
        }
        adj_start.push(adj.len() as u32);
        Ok(Region { grid: *grid, cells: cells_v, adj_start, adj, terminal, goal: Goal::Terminals, width: w })
    }

    fn annulus(grid: &TorusGrid, center: [f64; 2], r1: f64, r2: f64, conn: Connectivity) -> Result<Region> {
        if grid.d() != 2 {
            return Err(Error::UnsupportedDimension(grid.d()));
        }
        if !(r1.is_finite() && r2.is_finite() && r1 > 0.0 && r1 <= r2) {
            return Err(Error::Domain(format!("annulus radii must satisfy 0 < r1 <= r2, got {r1}, {r2}")));
        }
        let h = grid.spacing();
        let (c1, c2) = (r1 / h, r2 / h);
        if 2.0 * c2 >= grid.n() as f64 {
            return Err(Error::GeometryOutOfBounds(format!(
                "annulus of outer radius {r2} needs fewer than half of {} cells",
                grid.n()
            )));
        }
        let ci = ((center[0] / h).round() as i64, (center[1] / h).round() as i64);
        Ok(Self::annulus_sites(grid, ci, c1, c2, conn))
    }

    /// Annulus around a lattice point with radii in cell units.
    pub(crate) fn annulus_sites(grid: &TorusGrid, center: (i64, i64), c1: f64, c2: f64, conn: Connectivity) -> Region {
        let ni = grid.n() as i64;
        let span = (c2 + SNAP).floor() as i64;
        let (lo2, hi2) = (c1 * c1 - SNAP, c2 * c2 + SNAP);
        let mut local = Vec::new();
        for dy in -span..=span {
            for dx in -span..=span {
                let r2 = (dx * dx + dy * dy) as f64;
                if r2 >= lo2 && r2 <= hi2 {
                    local.push((dx, dy));
                }
            }
        }
        let index_of = |p: (i64, i64)| local.binary_search_by(|q| (q.1, q.0).cmp(&(p.1, p.0))).ok();
        let cells_v = local
            .iter()
            .map(|&(dx, dy)| {
                grid.index(&[(center.0 + dx).rem_euclid(ni) as usize, (center.1 + dy).rem_euclid(ni) as usize])
            })
            .collect();
        let offs = conn.offsets(2);
        let mut adj_start = Vec::with_capacity(local.len() + 1);
        let mut adj = Vec::new();
        for &(ax, ay) in &local {
            adj_start.push(adj.len() as u32);
            for o in &offs {
                let (bx, by) = (ax + o[0], ay + o[1]);
                if let Some(j) = index_of((bx, by)) {
                    adj.push((j as u32, [ray_wrap((ax, ay), (bx, by)), 0, 0]));
                }
            }
        }
        adj_start.push(adj.len() as u32);
        Region {
            grid: *grid,
            cells: cells_v,
            adj_start,
            adj,
            terminal: Vec::new(),
            goal: Goal::Winding { axis: 0 },
            width: 0,
        }
    }
}

/// Signed crossing of the ray `{y = -1/2, x > 0}` by the step `a -> b`; +1 is counterclockwise.
fn ray_wrap(a: (i64, i64), b: (i64, i64)) -> i8 {
    let up = a.1 <= -1 && b.1 >= 0;
    let down = a.1 >= 0 && b.1 <= -1;
    if !(up || down) {
        return 0;
    }
    // steps span one row, so the crossing point is the midpoint
    if a.0 + b.0 > 0 {
        if up {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

/// Incremental site percolation on a region.
pub(crate) struct Percolator<'a> {
    region: &'a Region,
    uf: PeriodicUnionFind,
    present: Vec<bool>,
    left: usize,
    right: usize,
    terminals: bool,
}

impl<'a> Percolator<'a> {
    pub(crate) fn new(region: &'a Region) -> Self {
        let n = region.len();
        Self {
            region,
            uf: PeriodicUnionFind::new(n + 2),
            present: vec![false; n],
            left: n,
            right: n + 1,
            terminals: matches!(region.goal, Goal::Terminals),
        }
    }

    /// Percolation on the bare site graph; terminals stay detached.
    pub(crate) fn without_terminals(region: &'a Region) -> Self {
        Self { terminals: false, ..Self::new(region) }
    }

    /// Opens site `s`; returns the realizing class if the event now holds.
    pub(crate) fn open(&mut self, s: usize) -> Option<Class> {
        self.present[s] = true;
        let mut hit = None;
        if self.terminals {
            let t = self.region.terminal[s];
            if t & 1 != 0 {
                self.uf.union(s, self.left, ZERO_CLASS);
            }
            if t & 2 != 0 {
                self.uf.union(s, self.right, ZERO_CLASS);
            }
        }
        for &(nb, w) in self.region.neighbors(s) {
            let nb = nb as usize;
            if !self.present[nb] {
                continue;
            }
            let wrap = [w[0] as i32, w[1] as i32, w[2] as i32];
            if let UnionOutcome::Cycle(c) = self.uf.union(s, nb, wrap) {
                if let Goal::Winding { axis } = self.region.goal {
                    if c[axis] != 0 && hit.is_none() {
                        hit = Some(c);
                    }
                }
            }
        }
        match self.region.goal {
            Goal::Terminals if self.terminals && self.uf.connected(self.left, self.right) => Some(ZERO_CLASS),
            _ => hit,
        }
    }

    pub(crate) fn is_open(&self, s: usize) -> bool {
        self.present[s]
    }

    pub(crate) fn root(&mut self, s: usize) -> usize {
        self.uf.find(s).0
    }
}

/// Whether `{f + level > 0}` realizes the event (before any complement).
pub(crate) fn holds_on_region(f: &FieldSample, level: f64, region: &Region) -> bool {
    let mut p = Percolator::new(region);
    let mut held = false;
    for (s, &c) in region.cells.iter().enumerate() {
        if f.value(c) + level > 0.0 && p.open(s).is_some() {
            held = true;
        }
    }
    held
}

/// True iff the open set `{f + level > 0}` realizes `e` with the chosen connectivity.
pub fn evaluate_event(f: &FieldSample, level: f64, e: &EventSpec, conn: Connectivity) -> Result<bool> {
    let region = Region::build(&f.grid, e, conn)?;
    Ok(holds_on_region(f, level, &region) != e.complement)
}

/// Component label of every local site open at `level`; closed sites get `usize::MAX`.
pub(crate) fn open_components(f: &FieldSample, level: f64, region: &Region) -> Vec<usize> {
    let mut p = Percolator::without_terminals(region);
    for (s, &c) in region.cells.iter().enumerate() {
        if f.value(c) + level > 0.0 {
            p.open(s);
        }
    }
    (0..region.len()).map(|s| if p.is_open(s) { p.root(s) } else { usize::MAX }).collect()
}
