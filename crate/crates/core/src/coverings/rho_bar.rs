use crate::energies::WeightedPointMeasure;
use crate::field_core::Vec2;

/// ρ̄(x) = sup{ρ > 0 : μ({ρ ≤ |y − x| < 2ρ}) > δ₀ρ}, or 0 when no ρ qualifies.
///
/// An atom at distance d lies in the annulus exactly for ρ ∈ (d/2, d], so
/// the annulus mass is constant on each interval between consecutive
/// breakpoints {d, d/2}. On such an interval (a, b] with mass m the
/// qualifying radii have supremum min(b, m/δ₀) whenever m/δ₀ > a.
pub fn rho_bar(mu: &WeightedPointMeasure, x: Vec2, delta0: f64) -> f64 {
    let mut atoms: Vec<(f64, f64)> = mu
        .atoms()
        .iter()
        .map(|(p, w)| (p.dist(x), *w))
        .filter(|(d, w)| *d > 0.0 && *w > 0.0)
        .collect();
    if atoms.is_empty() {
        return 0.0;
    }
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut halves: Vec<(f64, f64)> = atoms.iter().map(|(d, w)| (0.5 * d, *w)).collect();
    halves.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut breaks: Vec<f64> = atoms.iter().flat_map(|(d, _)| [*d, 0.5 * d]).collect();
    breaks.push(0.0);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    // Active mass on (a, b] is W(d/2 ≤ a) − W(d ≤ a).
    let (mut hi_ptr, mut lo_ptr) = (0usize, 0usize);
    let (mut entered, mut left) = (0.0f64, 0.0f64);
    let mut best = 0.0f64;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        while hi_ptr < halves.len() && halves[hi_ptr].0 <= a {
            entered += halves[hi_ptr].1;
            hi_ptr += 1;
        }
        while lo_ptr < atoms.len() && atoms[lo_ptr].0 <= a {
            left += atoms[lo_ptr].1;
            lo_ptr += 1;
        }
        let mass = entered - left;
        if mass > 0.0 && mass / delta0 > a {
            best = best.max(b.min(mass / delta0));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::split_rng;
    use rand::Rng;

    fn measure(atoms: Vec<(Vec2, f64)>) -> WeightedPointMeasure {
        WeightedPointMeasure::new(atoms).unwrap()
    }

    /// Brute force over a dense set of radii including every breakpoint.
    fn brute(mu: &WeightedPointMeasure, x: Vec2, delta0: f64) -> f64 {
        let mut radii: Vec<f64> = Vec::new();
        for (p, _) in mu.atoms() {
            let d = p.dist(x);
            for k in 0..=400 {
                radii.push(d * (0.5 + 0.5 * k as f64 / 400.0));
            }
        }
        radii
            .into_iter()
            .filter(|&r| r > 0.0 && mu.mass_in_annulus(x, r) > delta0 * r)
            .fold(0.0, f64::max)
    }

    #[test]
    fn empty_measure_gives_zero() {
        assert_eq!(
            rho_bar(&WeightedPointMeasure::empty(), Vec2::ZERO, 0.1),
            0.0
        );
    }

    #[test]
    fn unit_atom_at_unit_distance() {
        let mu = measure(vec![(Vec2::new(1.0, 0.0), 1.0)]);
        assert_eq!(rho_bar(&mu, Vec2::ZERO, 0.1), 1.0);
        // A heavy threshold caps the radius at m/δ₀.
        assert_eq!(rho_bar(&mu, Vec2::ZERO, 1.6), 0.625);
        // m/δ₀ ≤ d/2 leaves no qualifying radius.
        assert_eq!(rho_bar(&mu, Vec2::ZERO, 2.5), 0.0);
    }

    #[test]
    fn homogeneity_under_joint_scaling() {
        let mu = measure(vec![
            (Vec2::new(0.3, 0.1), 0.2),
            (Vec2::new(-1.0, 0.4), 0.05),
        ]);
        for c in [0.5, 2.0, 8.0] {
            assert_eq!(
                rho_bar(&mu.scaled(c), Vec2::ZERO, 0.1 * c),
                rho_bar(&mu, Vec2::ZERO, 0.1)
            );
        }
    }

    #[test]
    fn matches_brute_force_on_random_measures() {
        for seed in 0..200 {
            let mut rng = split_rng(seed, 3);
            let n = rng.gen_range(1..12);
            let atoms = (0..n)
                .map(|_| {
                    (
                        Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        rng.gen_range(0.0..0.2),
                    )
                })
                .collect();
            let mu = measure(atoms);
            let delta0 = rng.gen_range(0.01..0.5);
            let exact = rho_bar(&mu, Vec2::ZERO, delta0);
            let approx = brute(&mu, Vec2::ZERO, delta0);
            assert!(approx <= exact + 1e-12, "seed {seed}: {approx} > {exact}");
            assert!(
                exact - approx <= 0.01 * exact + 1e-12,
                "seed {seed}: {approx} vs {exact}"
            );
        }
    }
}
