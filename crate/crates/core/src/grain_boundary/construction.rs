use std::collections::HashMap;

use super::{DyadicFrame, GrainBoundaryError, PiecewiseAffineMap};
use crate::field_core::{rotation, CoreSet, Params, Vec2};

/// Which half of the tile a node belongs to; nodes on x = 0 exist once per side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// +1 on the left, −1 on the right: v⁽¹⁾ moves nodes by −sign·g·e₁.
    fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    /// The rigid rotation of this half: R_α on the left, R_{−α} on the right.
    fn angle(self, alpha: f64) -> f64 {
        self.sign() * alpha
    }
}

/// Triangulation of one tile [−W, W]² in local coordinates.
#[derive(Debug, Clone)]
pub struct TileMesh {
    pub nodes: Vec<Vec2>,
    pub sides: Vec<Side>,
    /// Opening amplitude g ≥ 0 at each node.
    pub opening: Vec<f64>,
    pub triangles: Vec<[usize; 3]>,
    /// Ring index n of each triangle (0 for the core square).
    pub ring: Vec<usize>,
}

// Per-ring node slots.
const TL: usize = 0;
const TCL: usize = 1;
const TCR: usize = 2;
const TR: usize = 3;
const BR: usize = 4;
const BCR: usize = 5;
const BCL: usize = 6;
const BL: usize = 7;

/// Opening amplitude at the boundary of Q_n: zero at the corners and on
/// the side edges, (2W − r_n) tan α at the top centre and r_n tan α at the
/// bottom centre. The jump across x = 0 of the final map,
/// 2g cos α + 2y sin α, is then constant between consecutive cores and
/// grows by 4W sin α = τε across each core.
pub fn opening_field(frame: &DyadicFrame, ring: usize, slot: usize) -> f64 {
    let r = frame.radii[ring];
    let tan = frame.alpha.tan();
    match slot {
        TCL | TCR => (2.0 * frame.half_tile - r) * tan,
        BCL | BCR => r * tan,
        _ => 0.0,
    }
}

/// Nodes, opening amplitudes and triangles of one tile.
pub fn tile_mesh(frame: &DyadicFrame) -> TileMesh {
    let mut nodes = Vec::new();
    let mut sides = Vec::new();
    let mut opening = Vec::new();
    for (n, &r) in frame.radii.iter().enumerate() {
        let slots = [
            (Vec2::new(-r, r), Side::Left),
            (Vec2::new(0.0, r), Side::Left),
            (Vec2::new(0.0, r), Side::Right),
            (Vec2::new(r, r), Side::Right),
            (Vec2::new(r, -r), Side::Right),
            (Vec2::new(0.0, -r), Side::Right),
            (Vec2::new(0.0, -r), Side::Left),
            (Vec2::new(-r, -r), Side::Left),
        ];
        for (slot, (p, side)) in slots.into_iter().enumerate() {
            nodes.push(p);
            sides.push(side);
            opening.push(opening_field(frame, n, slot));
        }
    }
    let id = |n: usize, slot: usize| 8 * n + slot;
    let mut triangles = vec![
        [id(0, BL), id(0, BCL), id(0, TCL)],
        [id(0, BL), id(0, TCL), id(0, TL)],
        [id(0, BR), id(0, TR), id(0, TCR)],
        [id(0, BR), id(0, TCR), id(0, BCR)],
    ];
    let mut ring = vec![0; 4];
    for n in 1..frame.radii.len() {
        let m = n - 1;
        for (corner_top, centre_top, corner_bot, centre_bot) in
            [(TL, TCL, BL, BCL), (TR, TCR, BR, BCR)]
        {
            triangles.extend_from_slice(&[
                [id(n, corner_top), id(n, centre_top), id(m, centre_top)],
                [id(n, corner_top), id(m, centre_top), id(m, corner_top)],
                [id(n, corner_top), id(m, corner_top), id(m, corner_bot)],
                [id(n, corner_top), id(m, corner_bot), id(n, corner_bot)],
                [id(n, corner_bot), id(m, corner_bot), id(m, centre_bot)],
                [id(n, corner_bot), id(m, centre_bot), id(n, centre_bot)],
            ]);
            ring.extend_from_slice(&[n; 6]);
        }
    }
    TileMesh {
        nodes,
        sides,
        opening,
        triangles,
        ring,
    }
}

fn v1_value(p: Vec2, side: Side, g: f64) -> Vec2 {
    Vec2::new(p.x - side.sign() * g, p.y)
}

/// The opening stage on one tile: each half is pushed away from x = 0 by
/// the opening amplitude, p ↦ p ∓ g(p)e₁.
pub fn build_v1(params: &Params) -> Result<PiecewiseAffineMap, GrainBoundaryError> {
    let frame = DyadicFrame::new(params)?;
    let mesh = tile_mesh(&frame);
    let values = (0..mesh.nodes.len())
        .map(|k| v1_value(mesh.nodes[k], mesh.sides[k], mesh.opening[k]))
        .collect();
    PiecewiseAffineMap::from_vertex_values(mesh.nodes, values, mesh.triangles)
}

/// The rotation stage: R_α on the left half-box [−2W, 0] × [−2W, 2W] and
/// R_{−α} on the right half-box; seam nodes are not shared.
pub fn build_v2(params: &Params) -> Result<PiecewiseAffineMap, GrainBoundaryError> {
    let frame = DyadicFrame::new(params)?;
    let b = 2.0 * frame.half_tile;
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    let mut triangles = Vec::new();
    for (side, x0, x1) in [(Side::Left, -b, 0.0), (Side::Right, 0.0, b)] {
        let r = rotation(side.angle(frame.alpha));
        let base = nodes.len();
        for p in [
            Vec2::new(x0, -b),
            Vec2::new(x1, -b),
            Vec2::new(x1, b),
            Vec2::new(x0, b),
        ] {
            nodes.push(p);
            values.push(r.mul_vec(p));
        }
        triangles.push([base, base + 1, base + 2]);
        triangles.push([base, base + 2, base + 3]);
    }
    PiecewiseAffineMap::from_vertex_values(nodes, values, triangles)
}

/// Node key on the r₀-lattice, with the two copies of x = 0 nodes kept apart.
type NodeKey = (i64, i64, u8);

struct Assembler {
    r0: f64,
    keys: HashMap<NodeKey, usize>,
    nodes: Vec<Vec2>,
    values: Vec<Vec2>,
}

impl Assembler {
    fn node(&mut self, p: Vec2, side: Side, value: impl FnOnce() -> Vec2) -> usize {
        let ix = (p.x / self.r0).round() as i64;
        let iy = (p.y / self.r0).round() as i64;
        let tag = match (ix, side) {
            (0, Side::Left) => 1,
            (0, Side::Right) => 2,
            _ => 0,
        };
        *self.keys.entry((ix, iy, tag)).or_insert_with(|| {
            self.nodes.push(p);
            self.values.push(value());
            self.nodes.len() - 1
        })
    }
}

/// The grain-boundary map u = v⁽²⁾∘v⁽¹⁾ stacked over N tiles along x = 0,
/// extended by R_α for x < −W and R_{−α} for x > W, together with one core
/// disk per tile.
pub fn compose_tile(params: &Params) -> Result<(PiecewiseAffineMap, CoreSet), GrainBoundaryError> {
    let frame = DyadicFrame::new(params)?;
    let mesh = tile_mesh(&frame);
    let w = frame.half_tile;
    let l = frame.half_side;
    let mut asm = Assembler {
        r0: frame.r0(),
        keys: HashMap::new(),
        nodes: Vec::new(),
        values: Vec::new(),
    };
    let rot = |side: Side| rotation(side.angle(frame.alpha));
    let mut triangles = Vec::new();
    let mut centers = Vec::with_capacity(frame.tiles);
    for k in 0..frame.tiles {
        let yk = frame.core_y(k);
        centers.push(Vec2::new(0.0, yk));
        let ids: Vec<usize> = (0..mesh.nodes.len())
            .map(|m| {
                let p = mesh.nodes[m] + Vec2::new(0.0, yk);
                let side = mesh.sides[m];
                let g = mesh.opening[m];
                asm.node(p, side, || rot(side).mul_vec(v1_value(p, side, g)))
            })
            .collect();
        triangles.extend(mesh.triangles.iter().map(|t| t.map(|m| ids[m])));
        for (side, x_far) in [(Side::Left, -l), (Side::Right, l)] {
            let x_near = if side == Side::Left { -w } else { w };
            let mut corner = |x: f64, y: f64| {
                let p = Vec2::new(x, y);
                asm.node(p, side, || rot(side).mul_vec(p))
            };
            let (fb, nb) = (corner(x_far, yk - w), corner(x_near, yk - w));
            let (nt, ft) = (corner(x_near, yk + w), corner(x_far, yk + w));
            triangles.push([fb, nb, nt]);
            triangles.push([fb, nt, ft]);
        }
    }
    let map = PiecewiseAffineMap::from_vertex_values(asm.nodes, asm.values, triangles)?;
    let cores = CoreSet::new(centers, params)?;
    Ok((map, cores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_core::{dist_so2_sq, Mat2};
    use crate::grain_boundary::compatible_epsilon;

    fn params(alpha: f64, eps_max: f64) -> Params {
        let eps = compatible_epsilon(alpha, 1.0, 1.0, eps_max);
        Params::new(eps, alpha, 1.0, 1.0, 1.0, 0.2).unwrap()
    }

    #[test]
    fn tile_mesh_tiles_the_square() {
        let p = params(1.0 / 16.0, 1.0 / 32.0);
        let v1 = build_v1(&p).unwrap();
        let frame = DyadicFrame::new(&p).unwrap();
        let w = frame.half_tile;
        assert!((v1.total_area() - 4.0 * w * w).abs() < 1e-15);
        assert_eq!(v1.triangles().len(), 12 * frame.n_bar + 4);
        assert!(v1.continuity_defect() < 1e-15);
    }

    #[test]
    fn v1_fixes_tile_corners_and_deep_upper_left() {
        let p = params(1.0 / 16.0, 1.0 / 32.0);
        let frame = DyadicFrame::new(&p).unwrap();
        let w = frame.half_tile;
        let v1 = build_v1(&p).unwrap();
        for q in [
            Vec2::new(-w, -w),
            Vec2::new(w, w),
            Vec2::new(-w, 0.3 * w),
            Vec2::new(-0.5 * w, 0.5 * w),
        ] {
            assert!((v1.eval(q).unwrap() - q).norm() < 1e-15);
        }
    }

    #[test]
    fn v1_gradient_deviation_decays_geometrically() {
        for alpha in [0.125, 1.0 / 16.0, 1.0 / 64.0, 1.0 / 256.0] {
            let p = params(alpha, 1.0 / 1024.0);
            let frame = DyadicFrame::new(&p).unwrap();
            let mesh = tile_mesh(&frame);
            let v1 = build_v1(&p).unwrap();
            for (t, tri) in v1.triangles().iter().enumerate() {
                let n = mesh.ring[t];
                let scaled = (tri.gradient - Mat2::IDENTITY).frobenius() * 2f64.powi(n as i32);
                assert!(scaled <= 8.0, "alpha {alpha} ring {n}: {scaled}");
            }
        }
    }

    #[test]
    fn v2_is_rigid_on_each_half() {
        let p = params(1.0 / 16.0, 1.0 / 32.0);
        let v2 = build_v2(&p).unwrap();
        for t in v2.triangles() {
            assert!(dist_so2_sq(t.gradient) < 1e-30);
            assert!(dist_so2_sq(t.gradient) <= 16.0 * p.alpha * p.alpha);
        }
        let q = Vec2::new(-0.01, 0.003);
        assert!((v2.eval(q).unwrap() - rotation(p.alpha).mul_vec(q)).norm() < 1e-16);
        let q = Vec2::new(0.01, 0.003);
        assert!((v2.eval(q).unwrap() - rotation(-p.alpha).mul_vec(q)).norm() < 1e-16);
    }

    #[test]
    fn composed_map_meets_boundary_rotations() {
        let p = params(1.0 / 16.0, 1.0 / 32.0);
        let (u, cores) = compose_tile(&p).unwrap();
        let frame = DyadicFrame::new(&p).unwrap();
        assert_eq!(cores.len(), frame.tiles);
        assert!(u.continuity_defect() < 1e-12);
        assert!((u.total_area() - 4.0).abs() < 1e-12);
        let a = u.gradient_at(Vec2::new(-1.0 + 0.1, 0.0)).unwrap();
        assert!((a - rotation(p.alpha)).max_abs() < 1e-14);
        for y in [-0.999, -0.31, 0.0, 0.77, 0.999] {
            for x in [-0.99, -0.85] {
                let a = u.gradient_at(Vec2::new(x, y)).unwrap();
                assert!((a - rotation(p.alpha)).max_abs() < 1e-14);
                let b = u.gradient_at(Vec2::new(-x, y)).unwrap();
                assert!((b - rotation(-p.alpha)).max_abs() < 1e-14);
            }
        }
    }

    #[test]
    fn seam_jump_is_constant_between_cores_and_steps_by_burgers() {
        let p = params(1.0 / 16.0, 1.0 / 32.0);
        let (u, _) = compose_tile(&p).unwrap();
        let frame = DyadicFrame::new(&p).unwrap();
        let jump = |y: f64| {
            let d = 1e-9;
            u.eval(Vec2::new(d, y)).unwrap() - u.eval(Vec2::new(-d, y)).unwrap()
        };
        let w = frame.half_tile;
        let r0 = frame.r0();
        for k in 0..frame.tiles - 1 {
            let y = frame.core_y(k);
            let above = jump(y + 1.5 * r0);
            let far = jump(y + 1.7 * w);
            assert!((above - far).norm() < 1e-8);
            let below = jump(y - 1.5 * r0);
            assert!((above - below - Vec2::new(p.burgers_quantum(), 0.0)).norm() < 1e-8);
        }
    }
}
