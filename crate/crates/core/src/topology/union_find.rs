use serde::{Deserialize, Serialize};

/// Integer homology class; unused trailing coordinates stay 0.
pub type Class = [i32; 3];

pub const ZERO_CLASS: Class = [0; 3];

fn add(a: Class, b: Class) -> Class {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: Class, b: Class) -> Class {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnionOutcome {
    Merged,
    /// The edge closed a cycle with this class (possibly zero).
    Cycle(Class),
}

/// Union-find whose nodes carry their lift displacement relative to the root.
///
/// An edge `u -> v` with wrap `w` states `lift(v) = lift(u) + w`. `offset[x]` is
/// `lift(x) - lift(parent(x))`, so a root has offset 0 and the offset of `x`
/// relative to its root is the sum along its parent path.
#[derive(Debug, Clone)]
pub struct PeriodicUnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
    offset: Vec<Class>,
    wrap_found: Option<Class>,
    path: Vec<u32>,
}

impl PeriodicUnionFind {
    pub fn new(n: usize) -> Self {
        assert!(n < u32::MAX as usize, "too many nodes");
        Self {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            offset: vec![ZERO_CLASS; n],
            wrap_found: None,
            path: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Root of `x` and the displacement of `x` relative to it; compresses the path.
    pub fn find(&mut self, x: usize) -> (usize, Class) {
        let mut path = std::mem::take(&mut self.path);
        path.clear();
        let mut cur = x as u32;
        while self.parent[cur as usize] != cur {
            path.push(cur);
            cur = self.parent[cur as usize];
        }
        let root = cur;
        // walk back from the node nearest the root, accumulating offsets
        let mut acc = ZERO_CLASS;
        for &node in path.iter().rev() {
            acc = add(self.offset[node as usize], acc);
            self.offset[node as usize] = acc;
            self.parent[node as usize] = root;
        }
        self.path = path;
        let off = if x as u32 == root { ZERO_CLASS } else { self.offset[x] };
        (root as usize, off)
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a).0 == self.find(b).0
    }

    /// Adds the edge `u -> v` with the given wrap.
    pub fn union(&mut self, u: usize, v: usize, wrap: Class) -> UnionOutcome {
        let (ru, ou) = self.find(u);
        let (rv, ov) = self.find(v);
        if ru == rv {
            let class = add(sub(ou, ov), wrap);
            if class != ZERO_CLASS && self.wrap_found.is_none() {
                self.wrap_found = Some(class);
            }
            return UnionOutcome::Cycle(class);
        }
        // lift(rv) - lift(ru) = ou + wrap - ov
        let rv_to_ru = sub(add(ou, wrap), ov);
        if self.rank[ru] >= self.rank[rv] {
            self.parent[rv] = ru as u32;
            self.offset[rv] = rv_to_ru;
            if self.rank[ru] == self.rank[rv] {
                self.rank[ru] += 1;
            }
        } else {
            self.parent[ru] = rv as u32;
            self.offset[ru] = sub(ZERO_CLASS, rv_to_ru);
        }
        UnionOutcome::Merged
    }

    /// First nonzero cycle class seen, if any.
    pub fn wrap_found(&self) -> Option<Class> {
        self.wrap_found
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_cell_torus_wraps() {
        let mut uf = PeriodicUnionFind::new(2);
        assert_eq!(uf.union(0, 1, [0, 0, 0]), UnionOutcome::Merged);
        match uf.union(1, 0, [1, 0, 0]) {
            UnionOutcome::Cycle(c) => assert_eq!(c, [1, 0, 0]),
            other => panic!("{other:?}"),
        }
        assert_eq!(uf.wrap_found(), Some([1, 0, 0]));
    }

    #[test]
    fn contractible_cycle_has_zero_class() {
        // square 0-1-3-2-0 inside the fundamental domain
        let mut uf = PeriodicUnionFind::new(4);
        uf.union(0, 1, ZERO_CLASS);
        uf.union(1, 3, ZERO_CLASS);
        uf.union(3, 2, ZERO_CLASS);
        assert_eq!(uf.union(2, 0, ZERO_CLASS), UnionOutcome::Cycle(ZERO_CLASS));
        assert_eq!(uf.wrap_found(), None);
    }

    #[test]
    fn root_offset_is_zero() {
        let mut uf = PeriodicUnionFind::new(3);
        uf.union(0, 1, [1, 0, 0]);
        uf.union(1, 2, [0, 1, 0]);
        let (r, o) = uf.find(2);
        assert_eq!(uf.find(r).1, ZERO_CLASS);
        let (_, o0) = uf.find(0);
        // lift(2) - lift(0) = (1, 1)
        assert_eq!(sub(o, o0), [1, 1, 0]);
    }

    proptest! {
        /// Relative offsets equal the lift displacement implied by a random spanning walk.
        #[test]
        fn offsets_compose_along_paths(edges in proptest::collection::vec((0usize..12, 0usize..12, -1i32..=1, -1i32..=1), 1..60)) {
            let mut uf = PeriodicUnionFind::new(12);
            let mut lift: Vec<Option<Class>> = vec![None; 12];
            let mut tree_adj: Vec<Vec<(usize, Class)>> = vec![Vec::new(); 12];
            for &(u, v, a, b) in &edges {
                let w = [a, b, 0];
                if let UnionOutcome::Merged = uf.union(u, v, w) {
                    tree_adj[u].push((v, w));
                    tree_adj[v].push((u, sub(ZERO_CLASS, w)));
                }
            }
            for s in 0..12 {
                if lift[s].is_some() { continue; }
                lift[s] = Some(ZERO_CLASS);
                let mut stack = vec![s];
                while let Some(x) = stack.pop() {
                    for &(y, w) in &tree_adj[x] {
                        if lift[y].is_none() {
                            lift[y] = Some(add(lift[x].unwrap(), w));
                            stack.push(y);
                        }
                    }
                }
            }
            for x in 0..12 {
                for y in 0..12 {
                    let (rx, ox) = uf.find(x);
                    let (ry, oy) = uf.find(y);
                    if rx == ry {
                        prop_assert_eq!(sub(oy, ox), sub(lift[y].unwrap(), lift[x].unwrap()));
                    }
                }
            }
        }
    }
}
