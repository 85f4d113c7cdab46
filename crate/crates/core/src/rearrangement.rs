//! Distribution functions, decreasing rearrangements, maximal averages and
//! medians of functions known through weighted samples.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::scalar::{pairwise_sum, Scalar};

/// Weight-sum tolerance for [`SampledFunction::new`].
pub const WEIGHT_TOLERANCE: f64 = 1e-12;

/// One atom: `f(x_i)`, `|∇f|(x_i)` and `μ({x_i})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry<T> {
    pub value: T,
    pub grad: T,
    pub weight: T,
}

impl<T: Scalar> Entry<T> {
    pub fn new(value: T, grad: T, weight: T) -> Self {
        Entry {
            value,
            grad,
            weight,
        }
    }
}

/// A function together with the modulus of its gradient, sampled at the atoms
/// of a probability measure.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction<T> {
    entries: Vec<Entry<T>>,
}

fn desc<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    b.partial_cmp(a).unwrap_or(Ordering::Equal)
}

impl<T: Scalar> SampledFunction<T> {
    /// Validates positive weights summing to one and non-negative gradients.
    pub fn new(entries: Vec<Entry<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("sampled function needs at least one atom"));
        }
        for (i, e) in entries.iter().enumerate() {
            if !(e.weight > T::zero()) {
                return Err(invalid(format!("atom {i}: weight must be positive")));
            }
            if !(e.grad >= T::zero()) {
                return Err(invalid(format!(
                    "atom {i}: gradient modulus must be non-negative"
                )));
            }
            if e.value.partial_cmp(&e.value).is_none() {
                return Err(invalid(format!("atom {i}: value is NaN")));
            }
        }
        let weights: Vec<T> = entries.iter().map(|e| e.weight).collect();
        let total = pairwise_sum(&weights);
        if (total - T::one()).abs() > T::lit(WEIGHT_TOLERANCE) {
            return Err(invalid(format!("weights sum to {total:?}, expected 1")));
        }
        Ok(SampledFunction { entries })
    }

    /// Equal weights `1 / n` over `(value, grad)` pairs.
    pub fn uniform(pairs: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let pairs: Vec<(T, T)> = pairs.into_iter().collect();
        let w = T::one() / T::from_usize(pairs.len().max(1)).expect("count fits scalar");
        Self::new(
            pairs
                .into_iter()
                .map(|(v, g)| Entry::new(v, g, w))
                .collect(),
        )
    }

    /// Rescales the weights to sum exactly to one before validating.
    pub fn normalized(mut entries: Vec<Entry<T>>) -> Result<Self> {
        let weights: Vec<T> = entries.iter().map(|e| e.weight).collect();
        let total = pairwise_sum(&weights);
        if !(total > T::zero()) {
            return Err(invalid("total weight must be positive"));
        }
        for e in &mut entries {
            e.weight = e.weight / total;
        }
        Self::new(entries)
    }

    pub fn entries(&self) -> &[Entry<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `Σ w_i f_i`.
    pub fn mean(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, e| acc + e.weight * e.value)
    }

    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, e| acc.max_of(e.value.abs()))
    }

    /// `sup |∇f|`, the Lipschitz seminorm seen by the samples.
    pub fn lip(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, e| acc.max_of(e.grad))
    }

    pub fn is_constant(&self) -> bool {
        let first = self.entries[0].value;
        self.entries.iter().all(|e| e.value == first)
    }

    /// `c·f` with gradients scaled by `|c|`.
    pub fn scaled(&self, c: T) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| Entry::new(e.value * c, e.grad * c.abs(), e.weight))
            .collect();
        SampledFunction { entries }
    }

    /// `f + c`; gradients are unchanged.
    pub fn shifted(&self, c: T) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| Entry::new(e.value + c, e.grad, e.weight))
            .collect();
        SampledFunction { entries }
    }

    /// Same values with every gradient set to zero.
    pub fn with_zero_gradients(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| Entry::new(e.value, T::zero(), e.weight))
            .collect();
        SampledFunction { entries }
    }

    /// `|∇f|` viewed as a function in its own right.
    pub fn gradient_function(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|e| Entry::new(e.grad, T::zero(), e.weight))
            .collect();
        SampledFunction { entries }
    }

    /// Splits the atoms into `count` contiguous groups, each renormalized to
    /// a probability measure. For i.i.d. samples these are independent
    /// replicates.
    pub fn batches(&self, count: usize) -> Vec<Self> {
        let count = count.clamp(1, self.len());
        let size = self.len().div_ceil(count);
        self.entries
            .chunks(size)
            .map(|chunk| Self::normalized(chunk.to_vec()).expect("chunk weights are positive"))
            .collect()
    }
}

/// `λ_f(t) = μ{|f| > t}` by direct summation.
pub fn distribution<T: Scalar>(f: &SampledFunction<T>, t: T) -> T {
    f.entries
        .iter()
        .filter(|e| e.value.abs() > t)
        .fold(T::zero(), |acc, e| acc + e.weight)
}

/// `∫_{|f| > level} |∇f| dμ`. Negative levels are clamped to zero, so the
/// set is never larger than `{|f| > 0}`.
pub fn gradient_integral_above<T: Scalar>(f: &SampledFunction<T>, level: T) -> T {
    let level = level.max_of(T::zero());
    f.entries
        .iter()
        .filter(|e| e.value.abs() > level)
        .fold(T::zero(), |acc, e| acc + e.weight * e.grad)
}

/// The distribution function as a step function of the threshold.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionFunction<T> {
    /// Distinct values of `|f|`, increasing.
    thresholds: Vec<T>,
    /// `masses[k] = μ{|f| > thresholds[k]}`; strictly decreasing.
    masses: Vec<T>,
    /// `μ{|f| > t}` for `t` below every threshold.
    base: T,
}

impl<T: Scalar> DistributionFunction<T> {
    pub fn new(f: &SampledFunction<T>) -> Self {
        let q = rearrange(f);
        // q holds the distinct values in decreasing order with cumulative masses
        let m = q.values.len();
        let mut thresholds = Vec::with_capacity(m);
        let mut masses = Vec::with_capacity(m);
        for j in (0..m).rev() {
            thresholds.push(q.values[j]);
            masses.push(if j == 0 { T::zero() } else { q.breaks[j - 1] });
        }
        DistributionFunction {
            thresholds,
            masses,
            base: q.breaks[m - 1],
        }
    }

    pub fn eval(&self, t: T) -> T {
        let k = self.thresholds.partition_point(|&a| a <= t);
        if k == 0 {
            self.base
        } else {
            self.masses[k - 1]
        }
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }
}

/// A non-negative, non-increasing, right-continuous step function on `(0, 1]`:
/// `values[j]` on `[breaks[j-1], breaks[j])` (with `breaks[-1] = 0`) and `0`
/// from `breaks[m-1]` on.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantileFunction<T> {
    breaks: Vec<T>,
    values: Vec<T>,
    /// `integrals[j] = ∫_0^{breaks[j]}`.
    integrals: Vec<T>,
}

impl<T: Scalar> QuantileFunction<T> {
    /// Builds a step function from explicit breakpoints and values.
    pub fn from_steps(breaks: Vec<T>, values: Vec<T>) -> Result<Self> {
        if breaks.is_empty() || breaks.len() != values.len() {
            return Err(invalid("need one value per breakpoint"));
        }
        let mut prev = T::zero();
        for &b in &breaks {
            if !(b > prev) {
                return Err(invalid(
                    "breakpoints must be strictly increasing and positive",
                ));
            }
            prev = b;
        }
        if prev > T::one() + T::lit(WEIGHT_TOLERANCE) {
            return Err(invalid("breakpoints must not exceed 1"));
        }
        if values.iter().any(|&v| !(v >= T::zero())) {
            return Err(invalid("values must be non-negative"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(invalid("values must be non-increasing"));
        }
        Ok(Self::assemble(breaks, values))
    }

    fn assemble(breaks: Vec<T>, values: Vec<T>) -> Self {
        let mut integrals = Vec::with_capacity(breaks.len());
        let mut acc = T::zero();
        let mut left = T::zero();
        for (&b, &v) in breaks.iter().zip(&values) {
            acc = acc + v * (b - left);
            integrals.push(acc);
            left = b;
        }
        QuantileFunction {
            breaks,
            values,
            integrals,
        }
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `(left, right, value)` for every step.
    pub fn steps(&self) -> impl Iterator<Item = (T, T, T)> + '_ {
        self.breaks
            .iter()
            .zip(&self.values)
            .enumerate()
            .map(move |(j, (&b, &v))| {
                let left = if j == 0 {
                    T::zero()
                } else {
                    self.breaks[j - 1]
                };
                (left, b, v)
            })
    }

    /// Value at `s`; `0` at and beyond the last breakpoint.
    pub fn eval(&self, s: T) -> T {
        let j = self.breaks.partition_point(|&b| b <= s);
        if j == self.breaks.len() {
            T::zero()
        } else {
            self.values[j]
        }
    }

    /// Value just left of `s`.
    pub fn eval_left(&self, s: T) -> T {
        let j = self.breaks.partition_point(|&b| b < s);
        if j == self.breaks.len() {
            T::zero()
        } else {
            self.values[j]
        }
    }

    /// `∫_0^t` of the step function.
    pub fn integral_to(&self, t: T) -> T {
        if !(t > T::zero()) {
            return T::zero();
        }
        let j = self.breaks.partition_point(|&b| b <= t);
        let (done, left) = if j == 0 {
            (T::zero(), T::zero())
        } else {
            (self.integrals[j - 1], self.breaks[j - 1])
        };
        if j == self.breaks.len() {
            return done;
        }
        done + self.values[j] * (t - left)
    }

    pub fn total_integral(&self) -> T {
        *self.integrals.last().expect("non-empty")
    }

    pub fn sup(&self) -> T {
        self.values[0]
    }

    /// `c·f*` for `c >= 0`.
    pub fn scaled(&self, c: T) -> Self {
        Self::assemble(
            self.breaks.clone(),
            self.values.iter().map(|&v| v * c).collect(),
        )
    }
}

/// The maximal average `u**(t) = (1/t) ∫_0^t u*(s) ds`.
pub fn maximal_average<T: Scalar>(q: &QuantileFunction<T>, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(domain(format!("maximal average needs t > 0, got {t:?}")));
    }
    Ok(q.integral_to(t) / t)
}

/// The decreasing rearrangement `u*(s) = inf{t >= 0 : λ_u(t) <= s}`.
///
/// Atoms with equal `|f|` merge into a single step.
pub fn rearrange<T: Scalar>(f: &SampledFunction<T>) -> QuantileFunction<T> {
    let mut atoms: Vec<(T, T)> = f
        .entries
        .iter()
        .map(|e| (e.value.abs(), e.weight))
        .collect();
    atoms.par_sort_by(|a, b| desc(&a.0, &b.0));
    let mut breaks: Vec<T> = Vec::with_capacity(atoms.len());
    let mut values: Vec<T> = Vec::with_capacity(atoms.len());
    let mut acc = T::zero();
    for (v, w) in atoms {
        acc = acc + w;
        match values.last() {
            Some(&last) if last == v => *breaks.last_mut().expect("parallel vectors") = acc,
            _ => {
                values.push(v);
                breaks.push(acc);
            }
        }
    }
    QuantileFunction::assemble(breaks, values)
}

/// Rearrangement of the gradient samples, `|∇f|*`.
pub fn rearrange_gradient<T: Scalar>(f: &SampledFunction<T>) -> QuantileFunction<T> {
    rearrange(&f.gradient_function())
}

/// A median of the signed values: `μ(f >= m) >= 1/2` and `μ(f <= m) >= 1/2`.
/// Returns the smallest admissible value among those attained.
pub fn median<T: Scalar>(f: &SampledFunction<T>) -> T {
    let mut atoms: Vec<(T, T)> = f.entries.iter().map(|e| (e.value, e.weight)).collect();
    atoms.par_sort_by(|a, b| desc(&b.0, &a.0));
    let total = atoms.iter().fold(T::zero(), |acc, a| acc + a.1);
    let half = total / (T::one() + T::one());
    let mut below = T::zero();
    let mut i = 0;
    while i < atoms.len() {
        let v = atoms[i].0;
        while i < atoms.len() && atoms[i].0 == v {
            below = below + atoms[i].1;
            i += 1;
        }
        if below >= half {
            return v;
        }
    }
    atoms.last().expect("non-empty").0
}
