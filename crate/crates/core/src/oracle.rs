//! Brute-force counterparts on finite metric measure spaces.
//!
//! Perimeter on a finite space is measured at a fixed resolution `h`:
//! `Per_h(A) = (μ(A^h) - μ(A)) / h` where `A^h` collects every point within
//! distance `h` of `A` (closed ball). The true liminf-perimeter vanishes
//! identically on finite spaces; `Per_h` converges to the continuum perimeter
//! for grid discretizations as the spacing shrinks.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::ModelMeasure;
use crate::rearrangement::{distribution, SampledFunction, WEIGHT_TOLERANCE};
use crate::scalar::{Real, Scalar};

/// Largest space accepted by [`DiscreteMetricSpace::iso_profile_bruteforce`].
pub const MAX_BRUTEFORCE_POINTS: usize = 22;

pub const DEFAULT_BUCKETS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub enum Metric<T> {
    /// Full symmetric distance matrix, row-major.
    Matrix { n: usize, dist: Vec<T> },
    /// Points on the real line with `d(x, y) = |x - y|`.
    Line { coords: Vec<T> },
}

/// A subset of the points, as a membership mask.
pub type Subset = Vec<bool>;

#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMetricSpace<T> {
    metric: Metric<T>,
    weights: Vec<T>,
    h: T,
}

impl<T: Scalar> DiscreteMetricSpace<T> {
    /// Validates symmetry, zero diagonal and the triangle inequality.
    pub fn from_matrix(dist: Vec<Vec<T>>, weights: Vec<T>, h: T) -> Result<Self> {
        let n = dist.len();
        if dist.iter().any(|row| row.len() != n) {
            return Err(invalid("distance matrix must be square"));
        }
        for i in 0..n {
            if dist[i][i] != T::zero() {
                return Err(invalid(format!("d({i},{i}) must be 0")));
            }
            for j in 0..n {
                if !(dist[i][j] >= T::zero()) || dist[i][j] != dist[j][i] {
                    return Err(invalid(format!(
                        "d({i},{j}) must be symmetric and non-negative"
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] {
                        return Err(invalid(format!(
                            "triangle inequality fails at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        let flat = dist.into_iter().flatten().collect();
        Self::assemble(Metric::Matrix { n, dist: flat }, weights, h)
    }

    pub fn from_line(coords: Vec<T>, weights: Vec<T>, h: T) -> Result<Self> {
        Self::assemble(Metric::Line { coords }, weights, h)
    }

    fn assemble(metric: Metric<T>, weights: Vec<T>, h: T) -> Result<Self> {
        let n = match &metric {
            Metric::Matrix { n, .. } => *n,
            Metric::Line { coords } => coords.len(),
        };
        if n == 0 || weights.len() != n {
            return Err(invalid("need one weight per point"));
        }
        if weights.iter().any(|&w| !(w >= T::zero())) {
            return Err(invalid("weights must be non-negative"));
        }
        let total = weights.iter().fold(T::zero(), |acc, &w| acc + w);
        if (total - T::one()).abs() > T::lit(WEIGHT_TOLERANCE) {
            return Err(invalid(format!("weights sum to {total:?}, expected 1")));
        }
        if !(h > T::zero()) {
            return Err(invalid("resolution h must be positive"));
        }
        Ok(DiscreteMetricSpace { metric, weights, h })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn resolution(&self) -> T {
        self.h
    }

    pub fn metric(&self) -> &Metric<T> {
        &self.metric
    }

    pub fn dist(&self, i: usize, j: usize) -> T {
        match &self.metric {
            Metric::Matrix { n, dist } => dist[i * n + j],
            Metric::Line { coords } => (coords[i] - coords[j]).abs(),
        }
    }

    pub fn measure(&self, set: &[bool]) -> T {
        set.iter()
            .zip(&self.weights)
            .filter(|(&inside, _)| inside)
            .fold(T::zero(), |acc, (_, &w)| acc + w)
    }

    /// Points whose distance to `set` is below `eps` (`closed = false`) or at
    /// most `eps` (`closed = true`).
    fn neighbourhood(&self, set: &[bool], eps: T, closed: bool) -> Subset {
        let near = |d: T| if closed { reaches(d, eps) } else { d < eps };
        match &self.metric {
            Metric::Line { coords } => {
                // nearest member to the left and right of each point
                let mut order: Vec<usize> = (0..coords.len()).collect();
                order.sort_by(|&a, &b| coords[a].partial_cmp(&coords[b]).expect("finite coords"));
                let mut out = vec![false; coords.len()];
                let mut last: Option<T> = None;
                for &i in &order {
                    if set[i] {
                        last = Some(coords[i]);
                    }
                    if let Some(x) = last {
                        out[i] |= near(coords[i] - x);
                    }
                }
                last = None;
                for &i in order.iter().rev() {
                    if set[i] {
                        last = Some(coords[i]);
                    }
                    if let Some(x) = last {
                        out[i] |= near(x - coords[i]);
                    }
                }
                out
            }
            Metric::Matrix { .. } => (0..self.len())
                .map(|x| (0..self.len()).any(|y| set[y] && near(self.dist(x, y))))
                .collect(),
        }
    }

    /// `A_ε = {x : ∃ y ∈ A, d(x, y) < ε}`.
    pub fn extension(&self, set: &[bool], eps: T) -> Subset {
        self.neighbourhood(set, eps, false)
    }

    /// `(μ(A^h) - μ(A)) / h` with the closed `h`-neighbourhood `A^h`.
    pub fn perimeter_h(&self, set: &[bool]) -> T {
        let grown = self.neighbourhood(set, self.h, true);
        (self.measure(&grown) - self.measure(set)) / self.h
    }

    /// Exact minimum of `perimeter_h` over all subsets, per measure bucket
    /// `[k/buckets, (k+1)/buckets)` (the last bucket also holds measure 1).
    /// Empty buckets are omitted.
    pub fn iso_profile_bruteforce(&self, buckets: usize) -> Result<Vec<ProfileBucket<T>>> {
        let n = self.len();
        if n > MAX_BRUTEFORCE_POINTS {
            return Err(Error::TooLarge {
                points: n,
                max: MAX_BRUTEFORCE_POINTS,
            });
        }
        if buckets == 0 {
            return Err(invalid("need at least one bucket"));
        }
        let neighbours: Vec<u32> = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| reaches(self.dist(i, j), self.h))
                    .fold(0u32, |m, j| m | (1 << j))
            })
            .collect();
        let total = 1usize << n;
        let mut grown = vec![0u32; total];
        let mut mass = vec![T::zero(); total];
        for mask in 1..total {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            grown[mask] = grown[rest] | neighbours[low];
            mass[mask] = mass[rest] + self.weights[low];
        }
        let bucket_of = |m: T| -> usize {
            let scale = T::from_usize(buckets).expect("bucket count fits scalar");
            let mut k = ((m * scale).to_f64_lossy().floor().max(0.0) as usize).min(buckets - 1);
            while k > 0 && m * scale < T::from_usize(k).expect("fits") {
                k -= 1;
            }
            while k + 1 < buckets && m * scale >= T::from_usize(k + 1).expect("fits") {
                k += 1;
            }
            k
        };
        const CHUNK: usize = 1 << 14;
        let partial: Vec<Vec<Option<(T, T, u32)>>> = (0..total)
            .collect::<Vec<_>>()
            .par_chunks(CHUNK)
            .map(|range| {
                let mut best: Vec<Option<(T, T, u32)>> = vec![None; buckets];
                for &mask in range {
                    let per = (mass[grown[mask] as usize] - mass[mask]) / self.h;
                    let slot = &mut best[bucket_of(mass[mask])];
                    if slot.is_none_or(|(p, _, _)| per < p) {
                        *slot = Some((per, mass[mask], mask as u32));
                    }
                }
                best
            })
            .collect();
        let mut best: Vec<Option<(T, T, u32)>> = vec![None; buckets];
        for chunk in partial {
            for (slot, cand) in best.iter_mut().zip(chunk) {
                if let Some(c) = cand {
                    if slot.is_none_or(|(p, _, _)| c.0 < p) {
                        *slot = Some(c);
                    }
                }
            }
        }
        let scale = T::from_usize(buckets).expect("fits");
        Ok(best
            .into_iter()
            .enumerate()
            .filter_map(|(k, slot)| {
                slot.map(|(per, m, mask)| ProfileBucket {
                    lo: T::from_usize(k).expect("fits") / scale,
                    hi: T::from_usize(k + 1).expect("fits") / scale,
                    min_perimeter: per,
                    measure: m,
                    minimizer: (0..n).map(|i| mask & (1 << i) != 0).collect(),
                })
            })
            .collect())
    }

    /// Discrete Lipschitz modulus: `max |f(x) - f(y)| / d(x, y)` over
    /// `y ≠ x` with `d(x, y) <= radius`, or `0` without such neighbours.
    pub fn lip_modulus(&self, values: &[T], radius: T) -> Result<Vec<T>> {
        if values.len() != self.len() {
            return Err(invalid("need one value per point"));
        }
        let n = self.len();
        Ok((0..n)
            .map(|x| {
                (0..n)
                    .filter(|&y| y != x)
                    .filter_map(|y| {
                        let d = self.dist(x, y);
                        (d > T::zero() && d <= radius).then(|| (values[x] - values[y]).abs() / d)
                    })
                    .fold(T::zero(), |acc, v| acc.max_of(v))
            })
            .collect())
    }
}

impl<T: Real> DiscreteMetricSpace<T> {
    /// Uniform grid of `count` points on `[lo, hi]` carrying the μ_r mass of
    /// their cells; the two unbounded tails are lumped into the end points.
    /// The resolution `h` is the grid spacing.
    pub fn grid_discretization(
        measure: &ModelMeasure<T>,
        lo: T,
        hi: T,
        count: usize,
    ) -> Result<Self> {
        if count < 2 || !(hi > lo) {
            return Err(invalid(
                "grid needs at least two points on a non-empty interval",
            ));
        }
        let h = (hi - lo) / T::lit((count - 1) as f64);
        let coords: Vec<T> = (0..count).map(|i| lo + h * T::lit(i as f64)).collect();
        let half = h * T::lit(0.5);
        let mut cuts = vec![T::zero()];
        cuts.extend(coords[..count - 1].iter().map(|&x| measure.cdf(x + half)));
        cuts.push(T::one());
        let weights = cuts.windows(2).map(|w| w[1] - w[0]).collect();
        Self::from_line(coords, weights, h)
    }
}

/// `d <= radius`, forgiving a relative excess of `1e-12` so that float grids
/// whose spacing equals the radius stay connected.
fn reaches<T: Scalar>(d: T, radius: T) -> bool {
    d <= radius || (d - radius).to_f64_lossy() <= RADIUS_SLACK * radius.to_f64_lossy().abs()
}

const RADIUS_SLACK: f64 = 1e-12;

/// One bucket of a brute-force profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileBucket<T> {
    pub lo: T,
    pub hi: T,
    pub min_perimeter: T,
    /// Measure of the minimizing subset.
    pub measure: T,
    pub minimizer: Subset,
}

/// `u*(s) = inf{t >= 0 : λ_u(t) <= s}` straight from the definition. The
/// infimum is attained on `{0} ∪ {|f_i|}`; since `λ` is non-increasing the
/// candidates are bisected, each probe of `λ` being a direct summation.
pub fn rearrange_by_definition<T: Scalar>(f: &SampledFunction<T>, probes: &[T]) -> Vec<T> {
    let mut candidates: Vec<T> = std::iter::once(T::zero())
        .chain(f.entries().iter().map(|e| e.value.abs()))
        .collect();
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    candidates.dedup();
    probes
        .iter()
        .map(|&s| {
            let k = candidates.partition_point(|&t| distribution(f, t) > s);
            // λ(max |f|) = 0 <= s, so k is always in range for s >= 0
            candidates[k.min(candidates.len() - 1)]
        })
        .collect()
}
