use crate::scalar::Real;

/// Default number of nodes for profile tabulation and evaluation grids.
pub const DEFAULT_NODES: usize = 4096;

/// Closest approach to 0 and 1 for tabulated profiles.
pub const TABULATION_EDGE: f64 = 1e-12;

/// Closest approach to 0 and 1 for checker evaluation grids.
pub const EVALUATION_EDGE: f64 = 1e-6;

/// Where the geometric end zones hand over to the linear middle.
const KNEE: f64 = 0.1;

/// Strictly increasing grid on `[edge, 1 - edge]`, geometric near both
/// endpoints and linear on `[0.1, 0.9]`. The grid is symmetric under
/// `t -> 1 - t` up to rounding.
pub fn endpoint_refined<T: Real>(nodes: usize, edge: T) -> Vec<T> {
    assert!(nodes >= 4, "grid needs at least 4 nodes");
    let knee = T::lit(KNEE);
    assert!(edge > T::zero() && edge < knee, "edge must lie in (0, 0.1)");
    let n_end = nodes / 4;
    let n_mid = nodes - 2 * n_end;
    let ratio = (knee / edge).ln();
    let lower: Vec<T> = (0..n_end)
        .map(|i| edge * (ratio * T::lit(i as f64) / T::lit(n_end as f64)).exp())
        .collect();
    let mut grid = Vec::with_capacity(nodes);
    grid.extend(lower.iter().copied());
    let span = T::one() - knee - knee;
    for i in 0..n_mid {
        let frac = if n_mid == 1 {
            T::lit(0.5)
        } else {
            T::lit(i as f64) / T::lit((n_mid - 1) as f64)
        };
        grid.push(knee + span * frac);
    }
    grid.extend(lower.iter().rev().map(|&t| T::one() - t));
    grid
}
