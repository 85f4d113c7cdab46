//! Profile-weighted integral operators: the kernel `∫_t^1 f(s) ds/I(s)` and
//! `Q_I f(t) = (I(t)/t) ∫_t^1 f(s) ds/I(s)`.

use serde::Serialize;

use crate::error::{domain, invalid, Error, Result};
use crate::model::IsoProfile;
use crate::norms::{norm, norm_of_decreasing, NormSpec};
use crate::quadrature;
use crate::rearrangement::QuantileFunction;
use crate::scalar::Real;

/// Lower end of the grid on which suprema of `Q_I f` are taken.
pub const SUP_GRID_EDGE: f64 = 1e-6;

pub struct ProfileWeightedOperator<P> {
    profile: P,
}

/// `K(t) = ∫_t^1 f/I` precomputed at the breakpoints of `f`.
pub struct KernelTable<'a, T, P> {
    profile: &'a P,
    f: &'a QuantileFunction<T>,
    /// `tail[j] = K(breaks[j])`.
    tail: Vec<T>,
}

/// Result of [`ProfileWeightedOperator::estimate_operator_norm`]; `value` is
/// only a lower bound for the operator norm.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorNormEstimate<T> {
    pub value: T,
    pub best_tester: usize,
    /// `‖Q_I f‖/‖f‖` per tester, `None` for testers of zero norm.
    pub ratios: Vec<Option<T>>,
}

impl<P> ProfileWeightedOperator<P> {
    pub fn new(profile: P) -> Self {
        ProfileWeightedOperator { profile }
    }

    pub fn profile(&self) -> &P {
        &self.profile
    }
}

fn reciprocal<T: Real, P: IsoProfile<T>>(profile: &P, a: T, b: T) -> T {
    if !(b > a) {
        return T::zero();
    }
    if b >= T::one() || a <= T::zero() {
        // 1/I is not integrable at either end
        return T::infinity();
    }
    profile.reciprocal_integral(a, b).unwrap_or_else(|| {
        quadrature::integrate(
            |s| profile.value(s).recip(),
            a,
            b,
            T::lit(1e-12).max(T::tol()),
        )
        .value
    })
}

impl<'a, T: Real, P: IsoProfile<T>> KernelTable<'a, T, P> {
    pub fn new(profile: &'a P, f: &'a QuantileFunction<T>) -> Self {
        let breaks = f.breaks();
        let values = f.values();
        let mut tail = vec![T::zero(); breaks.len()];
        for j in (0..breaks.len().saturating_sub(1)).rev() {
            let v = values[j + 1];
            let piece = if v == T::zero() {
                T::zero()
            } else {
                v * reciprocal(profile, breaks[j], breaks[j + 1])
            };
            tail[j] = tail[j + 1] + piece;
        }
        KernelTable { profile, f, tail }
    }

    /// `∫_t^1 f(s)/I(s) ds`; infinite when `f` does not vanish near `1`.
    pub fn kernel(&self, t: T) -> T {
        let breaks = self.f.breaks();
        let j = breaks.partition_point(|&b| b <= t);
        if j == breaks.len() {
            return T::zero();
        }
        let v = self.f.values()[j];
        let head = if v == T::zero() {
            T::zero()
        } else {
            v * reciprocal(self.profile, t, breaks[j])
        };
        head + self.tail[j]
    }

    pub fn q_value(&self, t: T) -> T {
        let k = self.kernel(t);
        if k == T::zero() {
            return T::zero();
        }
        self.profile.value(t) / t * k
    }

    /// Pieces of `(0, 1)` on which the kernel is smooth.
    fn pieces(&self) -> Vec<(T, T)> {
        let mut out = Vec::with_capacity(self.f.breaks().len() + 1);
        let mut left = T::zero();
        for &b in self.f.breaks() {
            if b > left && b <= T::one() {
                out.push((left, b));
                left = b;
            }
        }
        if left < T::one() {
            out.push((left, T::one()));
        }
        out
    }

    /// `‖t ↦ ∫_t^1 f/I‖_Ȳ` over the whole interval; suprema are attained as
    /// `t -> 0`.
    pub fn kernel_norm(&self, spec: &NormSpec<T>) -> Result<T> {
        if self.tail.first().is_some_and(|k| k.is_infinite()) {
            return Ok(T::infinity());
        }
        match spec {
            NormSpec::Linf => Ok(if self.f.sup() > T::zero() {
                T::infinity()
            } else {
                T::zero()
            }),
            _ => norm_of_decreasing(spec, |t| self.kernel(t), &self.pieces()),
        }
    }

    /// `‖Q_I f‖_X̄`. `Q_I f` is non-increasing, so integral norms are taken on
    /// all of `(0, 1)` and the supremum on the grid `[SUP_GRID_EDGE, 1)`.
    pub fn q_norm(&self, spec: &NormSpec<T>) -> Result<T> {
        if self.tail.first().is_some_and(|k| k.is_infinite()) {
            return Ok(T::infinity());
        }
        match spec {
            NormSpec::Linf => Ok(self.q_value(T::lit(SUP_GRID_EDGE))),
            _ => norm_of_decreasing(spec, |t| self.q_value(t), &self.pieces()),
        }
    }
}

fn check_t<T: Real>(t: T) -> Result<()> {
    if t > T::zero() && t < T::one() {
        Ok(())
    } else {
        Err(domain(format!("t = {t} outside (0, 1)")))
    }
}

impl<P> ProfileWeightedOperator<P> {
    pub fn kernel_integral<T: Real>(&self, f: &QuantileFunction<T>, t: T) -> Result<T>
    where
        P: IsoProfile<T>,
    {
        check_t(t)?;
        Ok(KernelTable::new(&self.profile, f).kernel(t))
    }

    pub fn q_operator<T: Real>(&self, f: &QuantileFunction<T>, t: T) -> Result<T>
    where
        P: IsoProfile<T>,
    {
        check_t(t)?;
        Ok(KernelTable::new(&self.profile, f).q_value(t))
    }

    /// `(t, Q_I f(t))` on the given nodes.
    pub fn q_table<T: Real>(&self, f: &QuantileFunction<T>, nodes: &[T]) -> Result<Vec<(T, T)>>
    where
        P: IsoProfile<T>,
    {
        let table = KernelTable::new(&self.profile, f);
        nodes
            .iter()
            .map(|&t| {
                check_t(t)?;
                Ok((t, table.q_value(t)))
            })
            .collect()
    }

    /// `max ‖Q_I f‖/‖f‖` over the testers.
    pub fn estimate_operator_norm<T: Real>(
        &self,
        space: &NormSpec<T>,
        testers: &[QuantileFunction<T>],
    ) -> Result<OperatorNormEstimate<T>>
    where
        P: IsoProfile<T>,
    {
        let mut ratios = Vec::with_capacity(testers.len());
        let mut best: Option<(usize, T)> = None;
        for (i, f) in testers.iter().enumerate() {
            let nf = norm(space, f)?;
            if !(nf > T::zero()) {
                ratios.push(None);
                continue;
            }
            let ratio = KernelTable::new(&self.profile, f).q_norm(space)? / nf;
            if best.is_none_or(|(_, b)| ratio > b) {
                best = Some((i, ratio));
            }
            ratios.push(Some(ratio));
        }
        let (best_tester, value) = best.ok_or(Error::NoAdmissibleTester)?;
        Ok(OperatorNormEstimate {
            value,
            best_tester,
            ratios,
        })
    }
}

/// `s^{-β} χ_(0, end)` as a step function holding cell averages on a
/// geometric grid of `cells` cells down to `1e-12`.
pub fn power_tester<T: Real>(beta: T, end: T, cells: usize) -> Result<QuantileFunction<T>> {
    if !(beta >= T::zero() && beta < T::one()) {
        return Err(invalid(format!("tester exponent {beta} outside [0, 1)")));
    }
    if !(end > T::zero() && end <= T::one()) || cells == 0 {
        return Err(invalid(
            "tester support must be (0, end] with end in (0, 1]",
        ));
    }
    let e = T::one() - beta;
    let mass = |a: T, b: T| (b.powf(e) - a.powf(e)) / e;
    if beta == T::zero() {
        return QuantileFunction::from_steps(vec![end], vec![T::one()]);
    }
    let edge = T::lit(1e-12).min(end * T::lit(0.5));
    let ratio = (end / edge).powf(T::lit(cells as f64).recip());
    let mut breaks = vec![edge];
    for k in 1..=cells {
        breaks.push(if k == cells {
            end
        } else {
            edge * ratio.powi(k as i32)
        });
    }
    let mut values = Vec::with_capacity(breaks.len());
    let mut left = T::zero();
    for &b in &breaks {
        values.push(mass(left, b) / (b - left));
        left = b;
    }
    QuantileFunction::from_steps(breaks, values)
}

/// `{s^{-β} χ_(0,1/2)}` with `β` ranging over `[0, β_max)`, where `β_max`
/// keeps the tester in the space: `1/p` for the `p`-type norms, `1` for `L1`.
pub fn canonical_testers<T: Real>(space: &NormSpec<T>) -> Result<Vec<QuantileFunction<T>>> {
    let limit = match *space {
        NormSpec::Linf => T::zero(),
        NormSpec::L1 => T::one(),
        NormSpec::Lp { p } | NormSpec::Lorentz { p, .. } | NormSpec::LpLogL { p, .. } => p.recip(),
    };
    let mut betas: Vec<T> = [0.0, 0.25, 0.5, 0.75, 0.9]
        .iter()
        .map(|&frac| T::lit(frac) * limit)
        .collect();
    betas.dedup();
    betas
        .into_iter()
        .map(|b| power_tester(b, T::lit(0.5), 256))
        .collect()
}
