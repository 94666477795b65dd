use std::collections::VecDeque;

use super::CompetitorError;
use crate::field_core::{FieldError, Grid2, Vec2};

/// A nonempty 4-connected set of grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMask {
    grid: Grid2,
    inside: Vec<bool>,
}

impl RegionMask {
    pub fn new(grid: Grid2, inside: Vec<bool>) -> Result<Self, CompetitorError> {
        if inside.len() != grid.len() {
            return Err(FieldError::FieldSizeMismatch {
                got: inside.len(),
                expected: grid.len(),
            }
            .into());
        }
        let components = count_components(&grid, &inside);
        match components {
            0 => Err(CompetitorError::EmptyMask),
            1 => Ok(Self { grid, inside }),
            components => Err(CompetitorError::Disconnected { components }),
        }
    }

    pub fn from_fn(grid: Grid2, keep: impl Fn(Vec2) -> bool) -> Result<Self, CompetitorError> {
        let n = grid.n();
        let inside = (0..grid.len())
            .map(|k| keep(grid.node(k % n, k / n)))
            .collect();
        Self::new(grid, inside)
    }

    /// Nodes with r_in ≤ |x − c| ≤ r_out.
    pub fn annulus(grid: Grid2, c: Vec2, r_in: f64, r_out: f64) -> Result<Self, CompetitorError> {
        Self::from_fn(grid, |x| {
            let r = x.dist(c);
            r >= r_in && r <= r_out
        })
    }

    pub fn grid(&self) -> Grid2 {
        self.grid
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.inside[self.grid.index(i, j)]
    }

    /// Mask node off the grid boundary; the unknowns of a Dirichlet solve.
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        let n = self.grid.n();
        i > 0 && j > 0 && i + 1 < n && j + 1 < n && self.contains(i, j)
    }

    /// Interior node whose (2·depth + 1)² neighbourhood is interior.
    pub fn is_deep(&self, i: usize, j: usize, depth: usize) -> bool {
        let n = self.grid.n();
        if i < depth || j < depth || i + depth >= n || j + depth >= n {
            return false;
        }
        (j - depth..=j + depth).all(|b| (i - depth..=i + depth).all(|a| self.is_interior(a, b)))
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    pub fn interior_count(&self) -> usize {
        let n = self.grid.n();
        (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .filter(|&(i, j)| self.is_interior(i, j))
            .count()
    }
}

fn count_components(grid: &Grid2, inside: &[bool]) -> usize {
    let n = grid.n();
    let mut seen = vec![false; inside.len()];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..inside.len() {
        if !inside[start] || seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            let (i, j) = (k % n, k / n);
            let mut visit = |m: usize| {
                if inside[m] && !seen[m] {
                    seen[m] = true;
                    queue.push_back(m);
                }
            };
            if i > 0 {
                visit(k - 1);
            }
            if i + 1 < n {
                visit(k + 1);
            }
            if j > 0 {
                visit(k - n);
            }
            if j + 1 < n {
                visit(k + n);
            }
        }
    }
    components
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2 {
        Grid2::new(33, 1.0).unwrap()
    }

    #[test]
    fn annulus_is_connected() {
        let m = RegionMask::annulus(grid(), Vec2::ZERO, 0.3, 0.7).unwrap();
        assert!(m.count() > 0);
        assert!(!m.contains(16, 16));
    }

    #[test]
    fn empty_and_split_masks_are_rejected() {
        assert_eq!(
            RegionMask::from_fn(grid(), |_| false),
            Err(CompetitorError::EmptyMask)
        );
        let two = RegionMask::from_fn(grid(), |x| x.x.abs() > 0.5);
        assert_eq!(two, Err(CompetitorError::Disconnected { components: 2 }));
    }

    #[test]
    fn diagonal_neighbours_do_not_connect() {
        let g = Grid2::new(3, 1.0).unwrap();
        let inside = vec![true, false, false, false, true, false, false, false, false];
        assert_eq!(
            RegionMask::new(g, inside),
            Err(CompetitorError::Disconnected { components: 2 })
        );
    }

    #[test]
    fn interior_excludes_the_grid_boundary() {
        let m = RegionMask::from_fn(grid(), |_| true).unwrap();
        assert_eq!(m.interior_count(), 31 * 31);
        assert!(m.is_deep(16, 16, 3));
        assert!(!m.is_deep(2, 16, 2));
    }
}
