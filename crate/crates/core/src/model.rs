//! The μ_r family `dμ_r = α_r⁻¹ e^{-|x|^r} dx` on ℝ, its products, and
//! isoperimetric profiles.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, invalid, Result};
use crate::grid;
use crate::scalar::Real;
use crate::special::{gamma, gamma_p, ln_gamma, ln_gamma_q};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelMeasure<T> {
    r: T,
    dim: usize,
    alpha: T,
    ln_alpha: T,
}

impl<T: Real> ModelMeasure<T> {
    /// `r` must lie in `[1, 2]`; `r = 1` is the two-sided exponential law.
    pub fn new(r: T, dim: usize) -> Result<Self> {
        if !(r >= T::one() && r <= T::lit(2.0)) {
            return Err(domain(format!("exponent r = {r} outside [1, 2]")));
        }
        if dim == 0 {
            return Err(domain("dimension must be positive"));
        }
        // α_r = ∫ e^{-|t|^r} dt = 2Γ(1 + 1/r)
        let ln_alpha = T::lit(2.0).ln() + ln_gamma(T::one() + r.recip());
        Ok(ModelMeasure {
            r,
            dim,
            alpha: ln_alpha.exp(),
            ln_alpha,
        })
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Normalizing constant `α_r`.
    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Conjugate exponent `q` with `1/r + 1/q = 1`; `None` stands for `q = ∞`.
    pub fn q(&self) -> Option<T> {
        if self.r == T::one() {
            None
        } else {
            Some(self.r / (self.r - T::one()))
        }
    }

    /// `1/q`, which is `0` when `r = 1`.
    pub fn inv_q(&self) -> T {
        T::one() - self.r.recip()
    }

    /// Same measure with a different product dimension.
    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(self.r, dim)
    }

    pub fn ln_density(&self, x: T) -> T {
        -x.abs().powf(self.r) - self.ln_alpha
    }

    /// One-dimensional density `φ_r(x)`.
    pub fn density(&self, x: T) -> T {
        self.ln_density(x).exp()
    }

    /// `ln μ_r((y, ∞))`. Uses `μ_r((y, ∞)) = Q(1/r, y^r) / 2` for `y >= 0`.
    pub fn ln_tail(&self, y: T) -> T {
        if y < T::zero() {
            return (-self.ln_tail(-y).exp()).ln_1p();
        }
        ln_gamma_q(self.r.recip(), y.powf(self.r)) - T::LN_2()
    }

    /// Distribution function `F_r(x) = μ_r((-∞, x])`.
    pub fn cdf(&self, x: T) -> T {
        let half = T::lit(0.5);
        if x.is_nan() {
            return x;
        }
        let p = gamma_p(self.r.recip(), x.abs().powf(self.r));
        let value = if x >= T::zero() {
            half + half * p
        } else {
            self.ln_tail(-x).exp()
        };
        value.max(T::zero()).min(T::one())
    }

    /// Inverse distribution function `F_r⁻¹(u)` for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: T) -> Result<T> {
        if !(u > T::zero() && u < T::one()) {
            return Err(domain(format!("quantile level {u} outside (0, 1)")));
        }
        let half = T::lit(0.5);
        Ok(if u == half {
            T::zero()
        } else if u < half {
            -self.upper_quantile(u.ln())
        } else {
            self.upper_quantile((T::one() - u).ln())
        })
    }

    /// Solves `ln μ_r((y, ∞)) = ln_p` for `y >= 0`, where `ln_p < ln(1/2)`.
    ///
    /// Safeguarded Newton on the log-tail: the log formulation keeps full
    /// relative accuracy for tail masses far below the smallest normal float.
    fn upper_quantile(&self, ln_p: T) -> T {
        let r = self.r;
        let mismatch = |y: T| self.ln_tail(y) - ln_p;
        // start from the tail expansion μ((y,∞)) ≈ φ(y) / (r y^{r-1})
        let target = -ln_p;
        let mut guess = target.max(T::one()).powf(r.recip());
        for _ in 0..3 {
            let correction = (r * guess.powf(r - T::one())).ln() + self.ln_alpha;
            guess = (target - correction).max(T::lit(1e-3)).powf(r.recip());
        }
        let mut lo = T::zero();
        let mut hi = guess.max(T::lit(0.5));
        while mismatch(hi) > T::zero() {
            lo = hi;
            hi = hi * T::lit(2.0);
        }
        let mut y = if guess > lo && guess < hi {
            guess
        } else {
            (lo + hi) * T::lit(0.5)
        };
        for _ in 0..200 {
            let g = mismatch(y);
            if g == T::zero() {
                return y;
            }
            if g > T::zero() {
                lo = y;
            } else {
                hi = y;
            }
            // d/dy ln tail(y) = -φ(y) / tail(y)
            let slope = -(self.ln_density(y) - self.ln_tail(y)).exp();
            let mut next = y - g / slope;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = (lo + hi) * T::lit(0.5);
            }
            let step = (next - y).abs();
            y = next;
            if step <= T::tol() * y.max(T::one()) || hi - lo <= T::tol() * hi {
                break;
            }
        }
        y
    }

    /// The one-dimensional isoperimetric profile `φ_r ∘ F_r⁻¹`. It is used for
    /// every product dimension.
    pub fn profile(&self) -> MeasureProfile<T> {
        MeasureProfile { measure: *self }
    }

    /// `r t (ln 1/t)^{1/q}`, the small-`t` behaviour of the profile.
    pub fn asymptotic_profile(&self, t: T) -> Result<T> {
        if self.q().is_none() {
            return Err(domain("asymptotic profile needs r > 1 (q = ∞ for r = 1)"));
        }
        if !(t > T::zero() && t < T::lit(0.5)) {
            return Err(domain(format!("t = {t} outside (0, 1/2)")));
        }
        Ok(self.r * t * t.recip().ln().powf(self.inv_q()))
    }

    /// `count` i.i.d. points of `μ_r^{⊗dim}`, each coordinate drawn by
    /// inverse-CDF transform. Deterministic in `seed`: the uniform stream is
    /// split into fixed-size chunks, chunk `c` using ChaCha stream `c`.
    pub fn sample(&self, count: usize, seed: u64) -> Result<SamplePoints<T>> {
        if count == 0 {
            return Err(invalid("sample count must be at least 1"));
        }
        const CHUNK: usize = 4096;
        let dim = self.dim;
        let mut coords = vec![T::zero(); count * dim];
        coords
            .par_chunks_mut(CHUNK * dim)
            .enumerate()
            .for_each(|(chunk, out)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(chunk as u64);
                for slot in out.iter_mut() {
                    let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
                    *slot = self.quantile(T::lit(u)).expect("u in (0, 1)");
                }
            });
        Ok(SamplePoints { dim, coords })
    }

    /// Deterministic one-dimensional discretization: the quantiles at the
    /// midpoints `(i + 1/2) / count`, each carrying mass `1/count`.
    pub fn quantile_grid(&self, count: usize) -> Result<Vec<T>> {
        if count == 0 {
            return Err(invalid("grid count must be at least 1"));
        }
        (0..count)
            .into_par_iter()
            .map(|i| self.quantile(T::lit((i as f64 + 0.5) / count as f64)))
            .collect()
    }

    /// Rows `(t, I(t), asymptotic(t), ratio)` on the endpoint-refined grid.
    /// The asymptotic and ratio columns are `None` for `r = 1` and for
    /// `t >= 1/2`.
    pub fn profile_table(&self, nodes: usize) -> Vec<ProfileRow> {
        let profile = self.profile();
        grid::endpoint_refined(nodes, T::lit(grid::TABULATION_EDGE))
            .into_iter()
            .map(|t| {
                let value = profile.value(t);
                let asymptotic = self.asymptotic_profile(t).ok();
                ProfileRow {
                    t: t.to_f64_lossy(),
                    profile: value.to_f64_lossy(),
                    asymptotic: asymptotic.map(|a| a.to_f64_lossy()),
                    ratio: asymptotic.map(|a| (value / a).to_f64_lossy()),
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    pub t: f64,
    #[serde(rename = "I")]
    pub profile: f64,
    pub asymptotic: Option<f64>,
    pub ratio: Option<f64>,
}

/// Points of ℝ^dim stored row-major, all with weight `1 / len`.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePoints<T> {
    pub dim: usize,
    pub coords: Vec<T>,
}

impl<T: Real> SamplePoints<T> {
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn weight(&self) -> T {
        T::one() / T::lit(self.len() as f64)
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks(self.dim)
    }
}

/// An isoperimetric profile `I : [0, 1] -> [0, ∞)`.
pub trait IsoProfile<T: Real>: Sync {
    fn value(&self, t: T) -> T;

    /// `∫_a^b ds / I(s)` in closed form, if known.
    fn reciprocal_integral(&self, _a: T, _b: T) -> Option<T> {
        None
    }

    /// `Some(1/q)` when `I(t) ~ r t (ln 1/t)^{1/q}` with `1/q > 0`, so that
    /// `I(t)/t` is unbounded as `t -> 0`.
    fn log_exponent(&self) -> Option<T> {
        None
    }

    fn label(&self) -> String;
}

impl<T: Real, P: IsoProfile<T> + ?Sized> IsoProfile<T> for &P {
    fn value(&self, t: T) -> T {
        (**self).value(t)
    }
    fn reciprocal_integral(&self, a: T, b: T) -> Option<T> {
        (**self).reciprocal_integral(a, b)
    }
    fn log_exponent(&self) -> Option<T> {
        (**self).log_exponent()
    }
    fn label(&self) -> String {
        (**self).label()
    }
}

/// `I_{μ_r}(t) = φ_r(F_r⁻¹(t))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureProfile<T> {
    measure: ModelMeasure<T>,
}

impl<T: Real> MeasureProfile<T> {
    pub fn measure(&self) -> &ModelMeasure<T> {
        &self.measure
    }

    /// Tabulate on the default endpoint-refined grid.
    pub fn tabulate(self) -> Tabulated<T, Self> {
        Tabulated::new(self, grid::DEFAULT_NODES)
    }
}

impl<T: Real> IsoProfile<T> for MeasureProfile<T> {
    fn value(&self, t: T) -> T {
        if !(t > T::zero() && t < T::one()) {
            return T::zero();
        }
        let x = self.measure.quantile(t).expect("t in (0, 1)");
        self.measure.density(x)
    }

    /// Substituting `s = F(x)` gives `∫_a^b ds / φ(F⁻¹(s)) = F⁻¹(b) - F⁻¹(a)`.
    fn reciprocal_integral(&self, a: T, b: T) -> Option<T> {
        let end = |s: T| {
            if s <= T::zero() {
                T::neg_infinity()
            } else if s >= T::one() {
                T::infinity()
            } else {
                self.measure.quantile(s).expect("s in (0, 1)")
            }
        };
        if a == b {
            return Some(T::zero());
        }
        Some(end(b) - end(a))
    }

    fn log_exponent(&self) -> Option<T> {
        self.measure.q().map(|_| self.measure.inv_q())
    }

    fn label(&self) -> String {
        format!("mu_r profile (r = {})", self.measure.r)
    }
}

/// `c · min(t, 1 - t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TentProfile<T> {
    pub slope: T,
}

impl<T: Real> IsoProfile<T> for TentProfile<T> {
    fn value(&self, t: T) -> T {
        if !(t > T::zero() && t < T::one()) {
            return T::zero();
        }
        self.slope * t.min(T::one() - t)
    }

    fn reciprocal_integral(&self, a: T, b: T) -> Option<T> {
        if a == b {
            return Some(T::zero());
        }
        let half = T::lit(0.5);
        // antiderivative of 1/min(s, 1-s)
        let anti = |s: T| {
            if s <= half {
                s.ln()
            } else {
                T::lit(-2.0) * T::LN_2() - (T::one() - s).ln()
            }
        };
        Some((anti(b) - anti(a)) / self.slope)
    }

    fn label(&self) -> String {
        format!("tent profile (slope {})", self.slope)
    }
}

/// A profile given only by its evaluation rule.
pub struct FnProfile<F> {
    pub rule: F,
    pub name: String,
}

impl<T: Real, F: Fn(T) -> T + Sync> IsoProfile<T> for FnProfile<F> {
    fn value(&self, t: T) -> T {
        if !(t > T::zero() && t < T::one()) {
            return T::zero();
        }
        (self.rule)(t)
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

/// Piecewise-linear interpolation of another profile on an endpoint-refined
/// grid; outside the grid the inner profile is evaluated directly.
#[derive(Clone, Debug)]
pub struct Tabulated<T, P> {
    inner: P,
    nodes: Vec<T>,
    values: Vec<T>,
}

impl<T: Real, P: IsoProfile<T>> Tabulated<T, P> {
    pub fn new(inner: P, nodes: usize) -> Self {
        let nodes = grid::endpoint_refined(nodes, T::lit(grid::TABULATION_EDGE));
        let values = nodes.par_iter().map(|&t| inner.value(t)).collect();
        Tabulated {
            inner,
            nodes,
            values,
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<T: Real, P: IsoProfile<T>> IsoProfile<T> for Tabulated<T, P> {
    fn value(&self, t: T) -> T {
        let n = self.nodes.len();
        if !(t > self.nodes[0] && t < self.nodes[n - 1]) {
            return self.inner.value(t);
        }
        let k = self.nodes.partition_point(|&x| x <= t);
        let (t0, t1) = (self.nodes[k - 1], self.nodes[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        v0 + (v1 - v0) * ((t - t0) / (t1 - t0))
    }

    fn reciprocal_integral(&self, a: T, b: T) -> Option<T> {
        self.inner.reciprocal_integral(a, b)
    }

    fn log_exponent(&self) -> Option<T> {
        self.inner.log_exponent()
    }

    fn label(&self) -> String {
        self.inner.label()
    }
}

/// Worst deviations found by [`validate_profile`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ProfileDiagnostics {
    pub max_asymmetry: f64,
    pub max_concavity_defect: f64,
    pub max_monotonicity_defect: f64,
}

/// Check the structural assumptions on a profile over a dense grid:
/// vanishing endpoints, positivity, symmetry about 1/2, midpoint concavity
/// and monotonicity on (0, 1/2), each to absolute tolerance `tol`.
pub fn validate_profile<T: Real, P: IsoProfile<T>>(
    profile: &P,
    nodes: usize,
    tol: T,
) -> Result<ProfileDiagnostics> {
    if profile.value(T::zero()) != T::zero() || profile.value(T::one()) != T::zero() {
        return Err(invalid("profile must vanish at 0 and 1"));
    }
    let grid = grid::endpoint_refined(nodes, T::lit(1e-9));
    let values: Vec<T> = grid.iter().map(|&t| profile.value(t)).collect();
    let mut diag = ProfileDiagnostics::default();
    let half = T::lit(0.5);
    for (i, (&t, &v)) in grid.iter().zip(&values).enumerate() {
        if !(v > T::zero()) {
            return Err(invalid(format!("profile not positive at t = {t}")));
        }
        let mirror = profile.value(T::one() - t);
        diag.max_asymmetry = diag.max_asymmetry.max((v - mirror).abs().to_f64_lossy());
        if i + 1 < grid.len() && grid[i + 1] <= half {
            let drop = (v - values[i + 1]).to_f64_lossy();
            diag.max_monotonicity_defect = diag.max_monotonicity_defect.max(drop);
        }
    }
    // midpoint concavity on pairs (a, b) spread across the grid
    let stride = (grid.len() / 64).max(1);
    for i in (0..grid.len()).step_by(stride) {
        for j in (i..grid.len()).step_by(stride) {
            let (a, b) = (grid[i], grid[j]);
            let mid = profile.value((a + b) * half);
            let defect = ((values[i] + values[j]) * half - mid).to_f64_lossy();
            diag.max_concavity_defect = diag.max_concavity_defect.max(defect);
        }
    }
    let tol = tol.to_f64_lossy();
    if diag.max_asymmetry > tol {
        return Err(invalid(format!(
            "profile asymmetric by {}",
            diag.max_asymmetry
        )));
    }
    if diag.max_concavity_defect > tol {
        return Err(invalid(format!(
            "profile not concave (defect {})",
            diag.max_concavity_defect
        )));
    }
    if diag.max_monotonicity_defect > tol {
        return Err(invalid(format!(
            "profile decreasing on (0, 1/2) (defect {})",
            diag.max_monotonicity_defect
        )));
    }
    Ok(diag)
}

/// `2Γ(1 + 1/r)` evaluated without constructing a measure.
pub fn normalizer<T: Real>(r: T) -> T {
    T::lit(2.0) * gamma(T::one() + r.recip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{LN_2, PI};

    fn mu(r: f64) -> ModelMeasure<f64> {
        ModelMeasure::new(r, 1).unwrap()
    }

    #[test]
    fn rejects_exponent_outside_range() {
        assert!(ModelMeasure::new(0.9f64, 1).is_err());
        assert!(ModelMeasure::new(2.1f64, 1).is_err());
        assert!(ModelMeasure::new(1.5f64, 0).is_err());
    }

    #[test]
    fn density_examples() {
        assert_relative_eq!(mu(2.0).density(0.0), 1.0 / PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(mu(1.0).density(0.0), 0.5, max_relative = 1e-14);
        assert_relative_eq!(mu(1.5).density(-0.3), mu(1.5).density(0.3));
    }

    #[test]
    fn cdf_examples() {
        for &r in &[1.0, 1.2, 1.5, 2.0] {
            assert_eq!(mu(r).cdf(0.0), 0.5);
        }
        assert_relative_eq!(mu(1.0).cdf(LN_2), 0.75, max_relative = 1e-14);
        // erf(1) to 16 digits
        let erf1 = 0.842_700_792_949_714_9;
        assert_relative_eq!(mu(2.0).cdf(1.0), 0.5 * (1.0 + erf1), max_relative = 1e-14);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(mu(1.7).quantile(0.5).unwrap(), 0.0);
        assert_relative_eq!(mu(1.0).quantile(0.75).unwrap(), LN_2, max_relative = 1e-13);
        assert!((mu(2.0).quantile(0.921_350_396_4).unwrap() - 1.0).abs() < 1e-9);
        assert!(mu(2.0).quantile(0.0).is_err());
        assert!(mu(2.0).quantile(1.0).is_err());
        assert!(mu(2.0).quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_deep_tail() {
        // r = 1: F(x) = e^x / 2 for x < 0, so F⁻¹(u) = ln(2u)
        let m = mu(1.0);
        for &u in &[1e-20, 1e-100, 1e-300, 1e-310] {
            assert_relative_eq!(m.quantile(u).unwrap(), (2.0 * u).ln(), max_relative = 1e-12);
        }
        let m = mu(2.0);
        for &u in &[1e-13, 1e-50, 1e-305] {
            let x = m.quantile(u).unwrap();
            assert_relative_eq!(m.ln_tail(-x), u.ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn profile_examples() {
        let p2 = mu(2.0).profile();
        assert_relative_eq!(p2.value(0.5), 1.0 / PI.sqrt(), max_relative = 1e-12);
        let p1 = mu(1.0).profile();
        assert_relative_eq!(p1.value(0.25), 0.25, max_relative = 1e-12);
        let p = mu(1.3).profile();
        assert_relative_eq!(p.value(0.1), p.value(0.9), max_relative = 1e-12);
        assert_eq!(p.value(0.0), 0.0);
        assert_eq!(p.value(1.0), 0.0);
    }

    #[test]
    fn asymptotic_examples() {
        let m = mu(2.0);
        let t = (-1.0f64).exp();
        assert_relative_eq!(
            m.asymptotic_profile(t).unwrap(),
            2.0 * t,
            max_relative = 1e-14
        );
        assert!(mu(1.0).asymptotic_profile(0.1).is_err());
        assert!(m.asymptotic_profile(0.5).is_err());
        let ratio = m.profile().value(1e-8) / m.asymptotic_profile(1e-8).unwrap();
        assert!((0.85..=1.0).contains(&ratio), "ratio {ratio}");
        let m = mu(1.5);
        let ratios: Vec<f64> = [1e-4, 1e-6, 1e-8]
            .iter()
            .map(|&t| m.profile().value(t) / m.asymptotic_profile(t).unwrap())
            .collect();
        assert!(
            ratios.windows(2).all(|w| w[0] < w[1] && w[1] < 1.0),
            "{ratios:?}"
        );
    }

    #[test]
    fn profiles_satisfy_structural_invariants() {
        for &r in &[1.0, 1.2, 1.5, 2.0] {
            validate_profile(&mu(r).profile(), 2048, 1e-10).unwrap();
        }
        validate_profile(&TentProfile { slope: 1.0 }, 512, 1e-12).unwrap();
        let bump = FnProfile {
            rule: |t: f64| (t - 0.5).powi(2),
            name: "convex".into(),
        };
        assert!(validate_profile(&bump, 256, 1e-10).is_err());
    }

    #[test]
    fn tabulated_profile_is_close() {
        let exact = mu(1.5).profile();
        let table = exact.tabulate();
        for &t in &[1e-13, 1e-9, 3.3e-5, 0.01, 0.2, 0.5, 0.77, 0.999_99] {
            assert_relative_eq!(table.value(t), exact.value(t), max_relative = 1e-5);
        }
    }

    #[test]
    fn reciprocal_integrals_agree_with_quadrature() {
        let p = mu(1.5).profile();
        let closed = p.reciprocal_integral(0.01, 0.7).unwrap();
        let numeric = crate::quadrature::integrate(|s| 1.0 / p.value(s), 0.01, 0.7, 1e-12).value;
        assert_relative_eq!(closed, numeric, max_relative = 1e-9);
        let tent = TentProfile { slope: 1.0 };
        assert_relative_eq!(
            tent.reciprocal_integral(0.25, 0.5).unwrap(),
            LN_2,
            max_relative = 1e-14
        );
        let both = tent.reciprocal_integral(0.25, 0.75).unwrap();
        assert_relative_eq!(both, 2.0 * LN_2, max_relative = 1e-14);
        assert_eq!(p.reciprocal_integral(0.3, 1.0), Some(f64::INFINITY));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = ModelMeasure::new(1.5f64, 3).unwrap();
        let a = m.sample(10_000, 11).unwrap();
        let b = m.sample(10_000, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, m.sample(10_000, 12).unwrap());
        assert_eq!(m.sample(1, 5).unwrap().len(), 1);
        assert_eq!(m.sample(1, 5).unwrap().weight(), 1.0);
        assert!(m.sample(0, 5).is_err());
    }

    #[test]
    fn gaussian_second_moment() {
        // variance of φ_2 is 1/2
        let m = mu(2.0);
        let pts = m.sample(1_000_000, 3).unwrap();
        let n = pts.len() as f64;
        let sq: Vec<f64> = pts.coords.iter().map(|x| x * x).collect();
        let mean = sq.iter().sum::<f64>() / n;
        let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((mean - 0.5).abs() < 3.0 * (var / n).sqrt(), "mean {mean}");
    }

    #[test]
    fn f32_measure() {
        let m = ModelMeasure::new(2.0f32, 1).unwrap();
        assert!((m.density(0.0) - 0.564_189_6).abs() < 1e-6);
        let x = m.quantile(0.9).unwrap();
        assert!((m.cdf(x) - 0.9).abs() < 1e-5);
    }
}
