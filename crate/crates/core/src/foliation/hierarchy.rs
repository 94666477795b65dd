use serde::Serialize;

use super::FoliationError;
use crate::field_core::Vec2;

/// A forest vertex (x_i, k) with k ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vertex {
    pub point: usize,
    pub level: usize,
    /// Position of `point` within its level family.
    pub slot: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub degree: usize,
    /// Set when a strict non-root ancestor has degree two.
    pub pruned: bool,
}

/// Multi-scale maximal families with their edge maps and forest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverHierarchy {
    pub r0: f64,
    pub m: f64,
    /// Top level K = ⌊½ ln N⌋.
    pub top: usize,
    pub radii: Vec<f64>,
    /// Point indices of the maximal family at each level 0..=K.
    pub levels: Vec<Vec<usize>>,
    /// `edges[k][a]` is the slot in level k + 1 nearest to `levels[k][a]`.
    pub edges: Vec<Vec<usize>>,
    pub vertices: Vec<Vertex>,
    /// Vertex id of each (level, slot) for levels ≥ 1.
    vertex_of: Vec<Vec<usize>>,
    /// Degree-two vertices at levels 2..K−1 with the point x_{i₀} of their only child.
    pub degree_two: Vec<(usize, usize)>,
}

impl CoverHierarchy {
    pub fn vertex_id(&self, level: usize, slot: usize) -> Option<usize> {
        if level == 0 {
            return None;
        }
        self.vertex_of
            .get(level - 1)
            .and_then(|v| v.get(slot))
            .copied()
    }

    /// Distinct points x_{i₀} attached to degree-two vertices, ascending.
    pub fn degree_two_points(&self) -> Vec<usize> {
        let mut j: Vec<usize> = self.degree_two.iter().map(|&(_, p)| p).collect();
        j.sort_unstable();
        j.dedup();
        j
    }

    /// Number of pruned-forest vertices.
    pub fn pruned_size(&self) -> usize {
        self.vertices.iter().filter(|v| !v.pruned).count()
    }
}

fn lex_sorted(points: &[Vec2]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a]
            .x
            .total_cmp(&points[b].x)
            .then(points[a].y.total_cmp(&points[b].y))
            .then(a.cmp(&b))
    });
    order
}

/// Greedy maximal subfamily with pairwise distances ≥ r.
fn maximal_family(points: &[Vec2], order: &[usize], r: f64) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for &i in order {
        if kept.iter().all(|&j| points[j].dist(points[i]) >= r) {
            kept.push(i);
        }
    }
    kept
}

/// Builds the hierarchy with r_k = Mᵏ·c₀/N for k = 0..=⌊½ ln N⌋.
pub fn build_hierarchy(points: &[Vec2], c0: f64, m: f64) -> Result<CoverHierarchy, FoliationError> {
    if points.is_empty() {
        return Err(FoliationError::InvalidParameter {
            name: "points",
            value: 0.0,
            range: "at least one point",
        });
    }
    if !(m > 34.0 && m.is_finite()) {
        return Err(FoliationError::InvalidParameter {
            name: "M",
            value: m,
            range: "(34, inf)",
        });
    }
    if !(c0 > 0.0 && c0.is_finite()) {
        return Err(FoliationError::InvalidParameter {
            name: "c0",
            value: c0,
            range: "(0, inf)",
        });
    }
    let n = points.len();
    let top = (0.5 * (n as f64).ln()).floor() as usize;
    let r0 = c0 / n as f64;
    let radii: Vec<f64> = (0..=top).map(|k| r0 * m.powi(k as i32)).collect();
    let order = lex_sorted(points);
    let levels: Vec<Vec<usize>> = radii
        .iter()
        .map(|&r| maximal_family(points, &order, r))
        .collect();
    let edges: Vec<Vec<usize>> = (0..top)
        .map(|k| {
            levels[k]
                .iter()
                .map(|&i| {
                    let next = &levels[k + 1];
                    (0..next.len())
                        .min_by(|&a, &b| {
                            points[next[a]]
                                .dist(points[i])
                                .total_cmp(&points[next[b]].dist(points[i]))
                                .then(next[a].cmp(&next[b]))
                        })
                        .expect("level families are nonempty")
                })
                .collect()
        })
        .collect();
    let mut vertices = Vec::new();
    let mut vertex_of: Vec<Vec<usize>> = Vec::with_capacity(top);
    for (k, level) in levels.iter().enumerate().take(top + 1).skip(1) {
        let ids = level
            .iter()
            .enumerate()
            .map(|(slot, &point)| {
                vertices.push(Vertex {
                    point,
                    level: k,
                    slot,
                    parent: None,
                    children: Vec::new(),
                    degree: 0,
                    pruned: false,
                });
                vertices.len() - 1
            })
            .collect();
        vertex_of.push(ids);
    }
    for k in 1..top {
        for (slot, &target) in edges[k].iter().enumerate() {
            let child = vertex_of[k - 1][slot];
            let parent = vertex_of[k][target];
            vertices[child].parent = Some(parent);
            vertices[parent].children.push(child);
        }
    }
    for v in &mut vertices {
        v.degree = v.children.len() + usize::from(v.parent.is_some());
    }
    // Top-down so that parents are settled before their children.
    for id in (0..vertices.len()).rev() {
        if let Some(p) = vertices[id].parent {
            let parent = &vertices[p];
            let prunes = parent.degree == 2 && parent.parent.is_some();
            vertices[id].pruned = parent.pruned || prunes;
        }
    }
    let degree_two = vertices
        .iter()
        .enumerate()
        .filter(|(_, v)| v.degree == 2 && v.level >= 2 && v.level < top)
        .map(|(id, v)| (id, vertices[v.children[0]].point))
        .collect();
    Ok(CoverHierarchy {
        r0,
        m,
        top,
        radii,
        levels,
        edges,
        vertices,
        vertex_of,
        degree_two,
    })
}

fn descendants(h: &CoverHierarchy, id: usize, out: &mut Vec<usize>) {
    for &c in &h.vertices[id].children {
        out.push(c);
        descendants(h, c, out);
    }
}

/// Exhaustive check of the forest invariants and the empty-annulus
/// properties at every degree-two vertex.
pub fn verify_hierarchy(points: &[Vec2], h: &CoverHierarchy) -> Result<(), String> {
    for (k, fam) in h.levels.iter().enumerate() {
        let r = h.radii[k];
        for (a, &i) in fam.iter().enumerate() {
            for &j in &fam[a + 1..] {
                if points[i].dist(points[j]) < r {
                    return Err(format!("level {k}: points {i} and {j} closer than r_k"));
                }
            }
        }
        for (p, x) in points.iter().enumerate() {
            if !fam.iter().any(|&i| points[i].dist(*x) < r) {
                return Err(format!(
                    "level {k}: point {p} is not within r_k of the family"
                ));
            }
        }
    }
    for (k, e) in h.edges.iter().enumerate() {
        for (slot, &target) in e.iter().enumerate() {
            let (x, y) = (points[h.levels[k][slot]], points[h.levels[k + 1][target]]);
            if x.dist(y) >= h.radii[k + 1] {
                return Err(format!("edge at level {k} slot {slot} is too long"));
            }
        }
    }
    for (id, v) in h.vertices.iter().enumerate() {
        if (v.level < h.top) != v.parent.is_some() {
            return Err(format!("vertex {id} has the wrong out-degree"));
        }
    }
    let roots: Vec<usize> = (0..h.vertices.len())
        .filter(|&id| h.vertices[id].parent.is_none())
        .collect();
    for root in roots {
        let mut tree = vec![root];
        descendants(h, root, &mut tree);
        if tree.len() < 2 {
            continue;
        }
        let deg = |d: usize| tree.iter().filter(|&&t| h.vertices[t].degree == d).count();
        if tree.len() > 2 * deg(1) + deg(2) {
            return Err(format!("tree rooted at {root} violates the leaf bound"));
        }
    }
    for &(id, i0) in &h.degree_two {
        let v = &h.vertices[id];
        let (k, x) = (v.level, points[v.point]);
        let (rk, rkm) = (h.radii[k], h.radii[k - 1]);
        let near: Vec<usize> = h.levels[k - 1]
            .iter()
            .copied()
            .filter(|&j| points[j].dist(x) < 0.5 * rk)
            .collect();
        if near != [i0] {
            return Err(format!(
                "vertex {id}: level below has {near:?} near it, expected [{i0}]"
            ));
        }
        if x.dist(points[i0]) >= rkm {
            return Err(format!("vertex {id}: child point too far"));
        }
        let c = points[i0];
        if points.iter().any(|p| {
            let d = p.dist(c);
            d >= rkm && d < 0.5 * rk - 2.0 * rkm
        }) {
            return Err(format!("vertex {id}: annulus around {i0} is not empty"));
        }
        let mut below = Vec::new();
        descendants(h, id, &mut below);
        for d in below {
            if points[h.vertices[d].point].dist(c) >= rk / (h.m - 1.0) {
                return Err(format!("vertex {id}: descendant {d} too far from {i0}"));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::split_rng;
    use rand::Rng;

    #[test]
    fn single_point_has_no_levels_above_zero() {
        let h = build_hierarchy(&[Vec2::new(0.7, 0.0)], 0.03, 40.0).unwrap();
        assert_eq!(h.top, 0);
        assert_eq!(h.levels, vec![vec![0]]);
        assert!(h.vertices.is_empty());
    }

    #[test]
    fn top_level_uses_natural_log() {
        let pts: Vec<Vec2> = (0..55)
            .map(|i| Vec2::new(0.6 + 0.005 * i as f64, 0.0))
            .collect();
        assert_eq!(build_hierarchy(&pts, 0.03, 40.0).unwrap().top, 2);
        let pts: Vec<Vec2> = (0..54)
            .map(|i| Vec2::new(0.6 + 0.005 * i as f64, 0.0))
            .collect();
        assert_eq!(build_hierarchy(&pts, 0.03, 40.0).unwrap().top, 1);
    }

    /// Many spread points plus a tight cluster far from everything; with
    /// N ≥ 403 the top level is 3 and the cluster forms a degree-two chain.
    fn planted(seed: u64) -> Vec<Vec2> {
        let mut rng = split_rng(seed, 13);
        let mut pts = Vec::new();
        let cluster = Vec2::new(0.75, 0.0);
        for _ in 0..6 {
            pts.push(
                cluster + Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 1e-6,
            );
        }
        while pts.len() < 500 {
            let p = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if p.dist(cluster) > 0.3 {
                pts.push(p);
            }
        }
        pts
    }

    #[test]
    fn planted_cluster_yields_a_degree_two_vertex() {
        for seed in 0..3 {
            let pts = planted(seed);
            let h = build_hierarchy(&pts, 2.0 / 64.0, 40.0).unwrap();
            assert_eq!(h.top, 3);
            verify_hierarchy(&pts, &h).unwrap();
            assert!(h.degree_two_points().iter().any(|&p| p < 6), "seed {seed}");
        }
    }

    #[test]
    fn random_forests_satisfy_the_invariants() {
        for seed in 0..5 {
            let mut rng = split_rng(seed, 17);
            let pts: Vec<Vec2> = (0..450)
                .map(|_| Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let h = build_hierarchy(&pts, 0.03, 40.0).unwrap();
            verify_hierarchy(&pts, &h).unwrap();
            assert!(h.pruned_size() <= h.vertices.len());
        }
    }
}
