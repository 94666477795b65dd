use super::GrainBoundaryError;
use crate::field_core::Params;

/// Scans pick the largest compatible ε ≤ L·2^(−this exponent).
pub const DEFAULT_EPSILON_MAX_EXPONENT: i32 = 10;

/// Geometry of the tiled construction.
///
/// Frank's relation fixes the tile height: each tile of height 2W carries
/// one dislocation with Burgers vector (τε, 0) = (4W sin α, 0), so the number
/// of tiles is N = 4 L sin α/(τε), which must be an even integer. Inside a
/// tile the nested squares Q_n = [−r_n, r_n]² have r_n = 2ⁿ r₀, with
/// r_n̄ = W and n̄ = ⌊log₂(1/α)⌋.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicFrame {
    /// n̄ = ⌊log₂(1/α)⌋.
    pub n_bar: usize,
    /// r_n = 2ⁿ r₀ for n = 0..=n̄.
    pub radii: Vec<f64>,
    /// Number of tiles N.
    pub tiles: usize,
    /// Tile half-size W = L/N = r_n̄.
    pub half_tile: f64,
    pub alpha: f64,
    pub half_side: f64,
    /// Burgers quantum τε.
    pub burgers: f64,
    /// Core radius λε.
    pub core_radius: f64,
}

fn n_bar_of(alpha: f64) -> usize {
    let inv = 1.0 / alpha;
    let mut n = 0usize;
    while 2f64.powi(n as i32 + 1) <= inv {
        n += 1;
    }
    n
}

impl DyadicFrame {
    pub fn new(params: &Params) -> Result<Self, GrainBoundaryError> {
        params.validate()?;
        let tiles_real = 4.0 * params.half_side * params.alpha.sin() / params.burgers_quantum();
        let tiles = tiles_real.round();
        if tiles < 2.0 || tiles % 2.0 != 0.0 || (tiles_real - tiles).abs() > 1e-9 * tiles {
            return Err(GrainBoundaryError::IncompatibleEpsilon {
                epsilon: params.epsilon,
                tiles: tiles_real,
            });
        }
        let tiles = tiles as usize;
        let n_bar = n_bar_of(params.alpha);
        let half_tile = params.half_side / tiles as f64;
        let r0 = half_tile / 2f64.powi(n_bar as i32);
        let radii: Vec<f64> = (0..=n_bar).map(|n| r0 * 2f64.powi(n as i32)).collect();
        let half_diagonal = r0 * std::f64::consts::SQRT_2;
        if half_diagonal > params.core_radius() {
            return Err(GrainBoundaryError::CoreSquareTooLarge {
                half_diagonal,
                core_radius: params.core_radius(),
            });
        }
        let limit = params.half_side - params.band_width;
        if half_tile >= limit {
            return Err(GrainBoundaryError::StripTooWide {
                half_width: half_tile,
                limit,
            });
        }
        Ok(Self {
            n_bar,
            radii,
            tiles,
            half_tile,
            alpha: params.alpha,
            half_side: params.half_side,
            burgers: params.burgers_quantum(),
            core_radius: params.core_radius(),
        })
    }

    pub fn r0(&self) -> f64 {
        self.radii[0]
    }

    /// Exponent k with N = L/(2^k r₀); equals n̄.
    pub fn k(&self) -> usize {
        self.n_bar
    }

    /// Vertical position of the core of tile `index`.
    pub fn core_y(&self, index: usize) -> f64 {
        -self.half_side + self.half_tile * (2 * index + 1) as f64
    }
}

/// Largest ε ≤ `epsilon_max` for which 4 L sin α/(τε) is an even integer.
pub fn compatible_epsilon(alpha: f64, half_side: f64, tau: f64, epsilon_max: f64) -> f64 {
    let sin = alpha.sin();
    let half_tiles = (2.0 * half_side * sin / (tau * epsilon_max))
        .ceil()
        .max(1.0);
    4.0 * half_side * sin / (tau * 2.0 * half_tiles)
}
