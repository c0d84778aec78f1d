//! Component tracking under point insertions and deletions.
//!
//! Insertions union the new node with every touching component. A deletion
//! first decides how many pieces `k(x, ω - δ_x)` the component of `x` falls
//! into: neighbours of `x` that overlap each other are grouped directly, and
//! the remaining groups are separated or joined by interleaved breadth-first
//! searches that stop as soon as at most one search is still running. Every
//! piece a search exhausted is moved onto a fresh union–find node; the one
//! unfinished piece keeps the old tree. Stale nodes are reclaimed by a full
//! rebuild once they outnumber live points.

use std::collections::VecDeque;

use smallvec::SmallVec;

use super::dsu::DisjointSet;
use super::grid_bounds;
use crate::geometry::{overlaps, Configuration, MarkedPoint, Window};
use crate::scalar::Scalar;
use crate::spatial::SpatialGrid;

/// Outcome of [`DynamicClusters::plan_removal`], consumed by `apply_removal`.
#[derive(Clone, Debug)]
pub struct RemovalPlan {
    slot: usize,
    generation: u64,
    /// `k(x, ω - δ_x)`: components of the remaining configuration touching `B(x)`.
    pub k: usize,
    pieces: Vec<Vec<u32>>,
}

#[derive(Clone, Debug)]
pub struct DynamicClusters<T: Scalar> {
    window: Window<T>,
    points: Vec<MarkedPoint<T>>,
    fixed: usize,
    node: Vec<u32>,
    dsu: DisjointSet,
    grid: SpatialGrid<T>,
    cell_size: T,
    components: usize,
    fixed_components: usize,
    generation: u64,
    stamp: Vec<u64>,
    owner: Vec<u32>,
    epoch: u64,
    scratch: Vec<u32>,
}

impl<T: Scalar> DynamicClusters<T> {
    /// Empty interior over `window`, conditioned on the fixed `boundary`
    /// points. Interior balls must have radius at most `cell_size / 2` to be
    /// stored inline; larger ones are still handled exactly.
    pub fn new(window: &Window<T>, boundary: &[MarkedPoint<T>], cell_size: T) -> Self {
        let bounds = grid_bounds(window, boundary);
        let grid = SpatialGrid::new(&bounds, cell_size).expect("positive cell size");
        let mut s = Self {
            window: window.clone(),
            points: Vec::new(),
            fixed: 0,
            node: Vec::new(),
            dsu: DisjointSet::default(),
            grid,
            cell_size,
            components: 0,
            fixed_components: 0,
            generation: 0,
            stamp: Vec::new(),
            owner: Vec::new(),
            epoch: 0,
            scratch: Vec::new(),
        };
        for p in boundary {
            s.insert(p.clone());
        }
        s.fixed = s.points.len();
        s.fixed_components = s.components;
        s
    }

    pub fn from_configuration(config: &Configuration<T>, boundary: &[MarkedPoint<T>], cell_size: T) -> Self {
        let mut s = Self::new(config.window(), boundary, cell_size);
        for p in config.points() {
            s.insert(p.clone());
        }
        s
    }

    pub fn window(&self) -> &Window<T> {
        &self.window
    }

    /// Number of interior (removable) points.
    pub fn interior_len(&self) -> usize {
        self.points.len() - self.fixed
    }

    pub fn interior(&self) -> &[MarkedPoint<T>] {
        &self.points[self.fixed..]
    }

    pub fn boundary(&self) -> &[MarkedPoint<T>] {
        &self.points[..self.fixed]
    }

    pub fn interior_point(&self, i: usize) -> &MarkedPoint<T> {
        &self.points[self.fixed + i]
    }

    /// `N_cc` of interior plus boundary.
    pub fn component_count(&self) -> usize {
        self.components
    }

    /// `N_cc^Λ = N_cc(ω_Λ + ω_out) - N_cc(ω_out)`.
    pub fn local_component_count(&self) -> i64 {
        self.components as i64 - self.fixed_components as i64
    }

    pub fn boundary_component_count(&self) -> usize {
        self.fixed_components
    }

    pub fn to_configuration(&self) -> Configuration<T> {
        Configuration::from_parts_unchecked(self.window.clone(), self.interior().to_vec())
    }

    fn neighbours_into(&self, x: &MarkedPoint<T>, skip: Option<usize>, out: &mut Vec<u32>) {
        out.clear();
        let points = &self.points;
        let window = &self.window;
        self.grid.for_each_candidate(&x.position, x.radius, |j| {
            if Some(j as usize) != skip && overlaps(window, &points[j as usize], x) {
                out.push(j);
            }
        });
    }

    /// `k(x, ω)` for the current state.
    pub fn touching_components(&mut self, x: &MarkedPoint<T>) -> usize {
        let mut nbrs = std::mem::take(&mut self.scratch);
        self.neighbours_into(x, None, &mut nbrs);
        let mut roots: SmallVec<[u32; 16]> = SmallVec::new();
        for &j in &nbrs {
            let r = self.dsu.find(self.node[j as usize]);
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
        self.scratch = nbrs;
        roots.len()
    }

    /// Inserts an interior point and returns `k(x, ω)` before insertion.
    pub fn insert(&mut self, x: MarkedPoint<T>) -> usize {
        let mut nbrs = std::mem::take(&mut self.scratch);
        self.neighbours_into(&x, None, &mut nbrs);
        let mut roots: SmallVec<[u32; 16]> = SmallVec::new();
        for &j in &nbrs {
            let r = self.dsu.find(self.node[j as usize]);
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
        self.scratch = nbrs;
        let n = self.dsu.make();
        for &r in &roots {
            self.dsu.union(n, r);
        }
        let slot = self.points.len();
        self.grid.insert(slot as u32, &x);
        self.points.push(x);
        self.node.push(n);
        self.stamp.push(0);
        self.owner.push(0);
        self.components = self.components + 1 - roots.len();
        self.generation += 1;
        roots.len()
    }

    /// Computes `k(x, ω - δ_x)` for interior point `i` and the component
    /// split that removing it would cause. The state is not modified.
    pub fn plan_removal(&mut self, i: usize) -> RemovalPlan {
        let slot = self.fixed + i;
        let x = self.points[slot].clone();
        let mut nbrs = Vec::new();
        self.neighbours_into(&x, Some(slot), &mut nbrs);
        let generation = self.generation;
        let plan = |k, pieces| RemovalPlan { slot, generation, k, pieces };
        if nbrs.len() <= 1 {
            return plan(nbrs.len(), Vec::new());
        }

        // neighbours overlapping each other are connected without x
        let m = nbrs.len();
        let mut local = DisjointSet::new(m);
        for a in 0..m {
            for b in 0..a {
                if overlaps(&self.window, &self.points[nbrs[a] as usize], &self.points[nbrs[b] as usize]) {
                    local.union(a as u32, b as u32);
                }
            }
        }
        let mut group_of_root: SmallVec<[(u32, usize); 16]> = SmallVec::new();
        let mut groups: Vec<Vec<u32>> = Vec::new();
        for (a, &slot_a) in nbrs.iter().enumerate() {
            let r = local.find(a as u32);
            match group_of_root.iter().find(|(root, _)| *root == r) {
                Some(&(_, g)) => groups[g].push(slot_a),
                None => {
                    group_of_root.push((r, groups.len()));
                    groups.push(vec![slot_a]);
                }
            }
        }
        if groups.len() == 1 {
            return plan(1, Vec::new());
        }
        let (k, pieces) = self.separate(slot, groups);
        plan(k, pieces)
    }

    /// Interleaved BFS from each neighbour group in `ω - δ_x`.
    fn separate(&mut self, removed: usize, groups: Vec<Vec<u32>>) -> (usize, Vec<Vec<u32>>) {
        self.epoch += 1;
        let epoch = self.epoch;
        let g = groups.len();
        let mut class = DisjointSet::new(g);
        let mut frontier: Vec<VecDeque<u32>> = Vec::with_capacity(g);
        let mut members: Vec<Vec<u32>> = Vec::with_capacity(g);
        self.stamp[removed] = epoch;
        self.owner[removed] = u32::MAX;
        for (id, group) in groups.into_iter().enumerate() {
            for &s in &group {
                self.stamp[s as usize] = epoch;
                self.owner[s as usize] = id as u32;
            }
            frontier.push(group.iter().copied().collect());
            members.push(group);
        }
        let mut nbrs = Vec::new();
        loop {
            let mut active = 0;
            for c in 0..g {
                if class.root(c as u32) != c as u32 || frontier[c].is_empty() {
                    continue;
                }
                active += 1;
                let Some(u) = frontier[c].pop_front() else { continue };
                let pu = self.points[u as usize].clone();
                self.neighbours_into(&pu, Some(removed), &mut nbrs);
                for &v in &nbrs {
                    let vs = v as usize;
                    if self.stamp[vs] != epoch {
                        self.stamp[vs] = epoch;
                        self.owner[vs] = c as u32;
                        frontier[c].push_back(v);
                        members[c].push(v);
                        continue;
                    }
                    let other = class.find(self.owner[vs]);
                    let mine = class.find(c as u32);
                    if other != mine {
                        let keep = class.union(mine, other);
                        let gone = if keep == mine { other } else { mine };
                        let moved_frontier = std::mem::take(&mut frontier[gone as usize]);
                        frontier[keep as usize].extend(moved_frontier);
                        let moved_members = std::mem::take(&mut members[gone as usize]);
                        members[keep as usize].extend(moved_members);
                    }
                }
                if class.root(c as u32) != c as u32 {
                    // c has merged away; its loop slot is done this round
                    continue;
                }
            }
            let live = (0..g).filter(|&c| class.root(c as u32) == c as u32 && !frontier[c].is_empty()).count();
            if live <= 1 || active == 0 {
                let roots: Vec<usize> = (0..g).filter(|&c| class.root(c as u32) == c as u32).collect();
                let pieces = roots
                    .iter()
                    .filter(|&&c| frontier[c].is_empty())
                    .map(|&c| std::mem::take(&mut members[c]))
                    .collect::<Vec<_>>();
                return (roots.len(), pieces);
            }
        }
    }

    /// Removes the planned point; panics if the state changed after planning.
    pub fn apply_removal(&mut self, plan: RemovalPlan) -> MarkedPoint<T> {
        assert_eq!(plan.generation, self.generation, "stale removal plan");
        for piece in &plan.pieces {
            let fresh = self.dsu.make();
            for &s in piece {
                self.node[s as usize] = fresh;
            }
        }
        self.components = self.components + plan.k - 1;
        let slot = plan.slot;
        let last = self.points.len() - 1;
        self.grid.remove(slot as u32, &self.points[slot]);
        if last != slot {
            self.grid.relabel(last as u32, slot as u32, &self.points[last]);
        }
        let removed = self.points.swap_remove(slot);
        self.node.swap_remove(slot);
        self.stamp.swap_remove(slot);
        self.owner.swap_remove(slot);
        self.generation += 1;
        if self.dsu.len() > 4 * self.points.len() + 1024 {
            self.rebuild();
        }
        removed
    }

    pub fn remove(&mut self, i: usize) -> (usize, MarkedPoint<T>) {
        let plan = self.plan_removal(i);
        let k = plan.k;
        (k, self.apply_removal(plan))
    }

    /// Recomputes the partition from scratch and returns the component count.
    pub fn rebuild(&mut self) -> usize {
        let n = self.points.len();
        let mut dsu = DisjointSet::new(n);
        let mut nbrs = Vec::new();
        for i in 0..n {
            let p = self.points[i].clone();
            self.neighbours_into(&p, Some(i), &mut nbrs);
            for &j in &nbrs {
                if (j as usize) < i {
                    dsu.union(i as u32, j);
                }
            }
        }
        let mut fixed_roots = Vec::new();
        for i in 0..self.fixed {
            fixed_roots.push(dsu.find(i as u32));
        }
        let mut roots: Vec<u32> = (0..n as u32).map(|i| dsu.find(i)).collect();
        self.node = (0..n as u32).collect();
        self.dsu = dsu;
        roots.sort_unstable();
        roots.dedup();
        self.components = roots.len();
        self.generation += 1;
        self.components
    }

    /// Full recompute check of the tracked count. Returns `true` when the
    /// incremental state was consistent; the state is repaired either way.
    pub fn audit(&mut self) -> bool {
        let tracked = self.components;
        tracked == self.rebuild()
    }

    pub fn cell_size(&self) -> T {
        self.cell_size
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connectivity::component_count_of;
    use crate::geometry::{Coords, Topology};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut impl Rng, side: f64, rmax: f64) -> MarkedPoint<f64> {
        MarkedPoint::new(Coords::from_slice(&[rng.random::<f64>() * side, rng.random::<f64>() * side]), rng.random::<f64>() * rmax).unwrap()
    }

    fn brute_k_after_removal(window: &Window<f64>, pts: &[MarkedPoint<f64>], i: usize) -> usize {
        let before = component_count_of(window, pts) as i64;
        let mut rest = pts.to_vec();
        rest.remove(i);
        let after = component_count_of(window, &rest) as i64;
        (after - before + 1) as usize
    }

    fn run_random_walk(topology: Topology, side: f64, rmax: f64, seed: u64, steps: usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = Window::cube(2, side).unwrap().with_topology(topology);
        let mut dc = DynamicClusters::new(&w, &[], 2.0 * rmax);
        for _ in 0..steps {
            let n = dc.interior_len();
            if n == 0 || rng.random::<f64>() < 0.55 {
                let x = random_point(&mut rng, side, rmax);
                let expect = component_count_of(&w, dc.interior()) as i64;
                let k = dc.insert(x);
                assert_eq!(dc.component_count() as i64, expect + 1 - k as i64);
            } else {
                let i = rng.random_range(0..n);
                let brute = brute_k_after_removal(&w, dc.interior(), i);
                let (k, _) = dc.remove(i);
                assert_eq!(k, brute);
            }
            assert_eq!(dc.component_count(), component_count_of(&w, dc.interior()));
        }
        assert!(dc.audit());
    }

    #[test]
    fn random_walk_matches_full_recompute_free() {
        run_random_walk(Topology::Free, 5.0, 0.6, 11, 3000);
    }

    #[test]
    fn random_walk_matches_full_recompute_torus() {
        run_random_walk(Topology::Torus, 4.0, 0.6, 12, 3000);
    }

    #[test]
    fn dense_random_walk_splits_large_components() {
        run_random_walk(Topology::Free, 6.0, 0.45, 13, 6000);
    }

    #[test]
    fn boundary_is_fixed_and_counted() {
        let w = Window::cube(2, 2.0).unwrap();
        let b = vec![
            MarkedPoint::new(Coords::from_slice(&[-0.5, 1.0]), 0.6).unwrap(),
            MarkedPoint::new(Coords::from_slice(&[2.5, 1.0]), 0.6).unwrap(),
        ];
        let mut dc = DynamicClusters::new(&w, &b, 1.0);
        assert_eq!(dc.component_count(), 2);
        assert_eq!(dc.local_component_count(), 0);
        let bridge = MarkedPoint::new(Coords::from_slice(&[1.0, 1.0]), 1.0).unwrap();
        assert_eq!(dc.touching_components(&bridge), 2);
        assert_eq!(dc.insert(bridge), 2);
        assert_eq!(dc.local_component_count(), -1);
        let (k, _) = dc.remove(0);
        assert_eq!(k, 2);
        assert_eq!(dc.local_component_count(), 0);
        assert_eq!(dc.interior_len(), 0);
    }

    #[test]
    fn insert_then_remove_restores_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = Window::cube(2, 5.0).unwrap();
        let mut dc = DynamicClusters::new(&w, &[], 1.0);
        for _ in 0..60 {
            dc.insert(random_point(&mut rng, 5.0, 0.5));
        }
        for _ in 0..200 {
            let before = dc.component_count();
            dc.insert(random_point(&mut rng, 5.0, 0.5));
            let last = dc.interior_len() - 1;
            dc.remove(last);
            assert_eq!(dc.component_count(), before);
        }
    }
}
