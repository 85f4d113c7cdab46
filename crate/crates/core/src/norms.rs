//! Rearrangement-invariant norms on `(0, 1)` and the `LS(X)` functional.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::grid;
use crate::model::IsoProfile;
use crate::quadrature;
use crate::rearrangement::{rearrange, QuantileFunction, SampledFunction};
use crate::scalar::Real;
use crate::special::{gamma, gamma_p};

/// A rearrangement-invariant norm on `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum NormSpec<T> {
    /// `(∫ f*^p)^{1/p}`
    Lp {
        p: T,
    },
    /// `(∫ (s^{1/p} f*(s))^q ds/s)^{1/q}`, `q = ∞` allowed.
    Lorentz {
        p: T,
        q: T,
    },
    /// `(∫ (f*(s) (ln 1/s)^α)^p ds)^{1/p}`
    LpLogL {
        p: T,
        alpha: T,
    },
    Linf,
    L1,
}

impl<T: Real> NormSpec<T> {
    pub fn validate(&self) -> Result<()> {
        let one = T::one();
        let ok = match *self {
            NormSpec::Lp { p } => p >= one && p.is_finite(),
            NormSpec::Lorentz { p, q } => p >= one && p.is_finite() && q >= one,
            NormSpec::LpLogL { p, alpha } => {
                p >= one && p.is_finite() && alpha >= T::zero() && alpha.is_finite()
            }
            NormSpec::Linf | NormSpec::L1 => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::NormSpec(self.to_string()))
        }
    }

    /// Lp and Lorentz(p, q ≤ p) are genuine norms; the others are only
    /// quasi-norms in general.
    pub fn is_normable(&self) -> bool {
        match *self {
            NormSpec::Lorentz { p, q } => q <= p,
            _ => true,
        }
    }
}

impl<T: Real> fmt::Display for NormSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormSpec::Lp { p } => write!(f, "Lp:{p}"),
            NormSpec::Lorentz { p, q } if q.is_infinite() => write!(f, "Lorentz:{p},inf"),
            NormSpec::Lorentz { p, q } => write!(f, "Lorentz:{p},{q}"),
            NormSpec::LpLogL { p, alpha } => write!(f, "LpLogL:{p},{alpha}"),
            NormSpec::Linf => write!(f, "Linf"),
            NormSpec::L1 => write!(f, "L1"),
        }
    }
}

impl<T: Real> FromStr for NormSpec<T> {
    type Err = Error;

    /// Compact forms: `Lp:2`, `Lorentz:2,1`, `Lorentz:2,inf`, `LpLogL:2,0.5`,
    /// `Linf`, `L1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::NormSpec(s.to_string());
        let num = |x: &str| -> Result<T> {
            let x = x.trim();
            if x.eq_ignore_ascii_case("inf") {
                return Ok(T::infinity());
            }
            x.parse::<f64>().map(T::lit).map_err(|_| bad())
        };
        let (head, args) = match s.trim().split_once(':') {
            Some((h, a)) => (h, a.split(',').collect::<Vec<_>>()),
            None => (s.trim(), Vec::new()),
        };
        let spec = match (head, args.as_slice()) {
            ("Linf", []) => NormSpec::Linf,
            ("L1", []) => NormSpec::L1,
            ("Lp", [p]) => NormSpec::Lp { p: num(p)? },
            ("Lorentz", [p, q]) => NormSpec::Lorentz {
                p: num(p)?,
                q: num(q)?,
            },
            ("LpLogL", [p, a]) => NormSpec::LpLogL {
                p: num(p)?,
                alpha: num(a)?,
            },
            _ => return Err(bad()),
        };
        spec.validate().map_err(|_| bad())?;
        Ok(spec)
    }
}

/// `∫_a^b (ln 1/s)^β ds` for `0 <= a < b <= 1`.
fn log_weight_mass<T: Real>(beta: T, a: T, b: T) -> T {
    if beta == T::zero() {
        return b - a;
    }
    let k = beta + T::one();
    let ua = if a > T::zero() {
        -a.ln()
    } else {
        T::infinity()
    };
    let ub = -b.ln();
    gamma(k) * (gamma_p(k, ua) - gamma_p(k, ub))
}

/// `∫_a^b s (ln 1/s)^β ds`.
fn log_weight_first_moment<T: Real>(beta: T, a: T, b: T) -> T {
    let two = T::lit(2.0);
    if beta == T::zero() {
        return (b * b - a * a) / two;
    }
    let k = beta + T::one();
    let ua = if a > T::zero() {
        -two * a.ln()
    } else {
        T::infinity()
    };
    let ub = -two * b.ln();
    gamma(k) * two.powf(-k) * (gamma_p(k, ua) - gamma_p(k, ub))
}

/// Norm of a decreasing rearrangement given as a step function.
pub fn norm<T: Real>(spec: &NormSpec<T>, f: &QuantileFunction<T>) -> Result<T> {
    spec.validate()?;
    Ok(match *spec {
        NormSpec::L1 => f.total_integral(),
        NormSpec::Linf => f.sup(),
        NormSpec::Lp { p } => {
            let sum: T = f.steps().map(|(a, b, v)| v.powf(p) * (b - a)).sum();
            sum.powf(p.recip())
        }
        NormSpec::Lorentz { p, q } if q.is_infinite() => f
            .steps()
            .map(|(_, b, v)| v * b.powf(p.recip()))
            .fold(T::zero(), T::max),
        NormSpec::Lorentz { p, q } => {
            let c = q / p;
            let sum: T = f
                .steps()
                .map(|(a, b, v)| v.powf(q) * (b.powf(c) - a.powf(c)) / c)
                .sum();
            sum.powf(q.recip())
        }
        NormSpec::LpLogL { p, alpha } => {
            let beta = alpha * p;
            let sum: T = f
                .steps()
                .map(|(a, b, v)| {
                    if v == T::zero() {
                        T::zero()
                    } else {
                        v.powf(p) * log_weight_mass(beta, a, b)
                    }
                })
                .sum();
            sum.powf(p.recip())
        }
    })
}

/// One linear piece `[a, b]` running from `ya` to `yb`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment<T> {
    pub a: T,
    pub b: T,
    pub ya: T,
    pub yb: T,
}

/// A non-negative piecewise-linear function on `(0, 1)`, possibly with jumps
/// between pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear<T> {
    segments: Vec<Segment<T>>,
}

/// Neumaier-compensated accumulator; the rearrangement sweep adds and
/// later removes very large slope terms.
#[derive(Clone, Copy, Default)]
struct Accumulator<T> {
    sum: T,
    carry: T,
}

impl<T: Real> Accumulator<T> {
    fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry = self.carry + ((self.sum - t) + x);
        } else {
            self.carry = self.carry + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    fn value(&self) -> T {
        self.sum + self.carry
    }
}

impl<T: Real> PiecewiseLinear<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Self {
        PiecewiseLinear { segments }
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    /// Exact integral (trapezoid per piece).
    pub fn integral(&self) -> T {
        let half = T::lit(0.5);
        crate::scalar::compensated_sum(
            self.segments
                .iter()
                .map(|s| (s.b - s.a) * (s.ya + s.yb) * half),
        )
    }

    pub fn max(&self) -> T {
        self.segments
            .iter()
            .fold(T::zero(), |m, s| m.max(s.ya).max(s.yb))
    }

    /// Decreasing rearrangement with respect to Lebesgue measure. The
    /// distribution function of a piecewise-linear function is itself
    /// piecewise linear in the level, so the result is exact.
    pub fn rearranged(&self) -> DecreasingPiecewiseLinear<T> {
        #[derive(Clone, Copy)]
        enum Kind<T> {
            Start(T),
            End(T, T),
            Flat(T),
        }
        let mut events: Vec<(T, Kind<T>)> = Vec::with_capacity(2 * self.segments.len());
        for s in &self.segments {
            let len = s.b - s.a;
            if !(len > T::zero()) {
                continue;
            }
            let (hi, lo) = if s.ya >= s.yb {
                (s.ya, s.yb)
            } else {
                (s.yb, s.ya)
            };
            if hi - lo <= T::epsilon() * hi.abs() {
                events.push((hi, Kind::Flat(len)));
            } else {
                let density = len / (hi - lo);
                events.push((hi, Kind::Start(density)));
                events.push((lo, Kind::End(density, len)));
            }
        }
        events.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite levels"));
        let mut points: Vec<(T, T)> = Vec::with_capacity(events.len() + 2);
        let mut slope = Accumulator::<T>::default();
        let mut lambda = T::zero();
        let mut level = match events.first() {
            Some(&(y, _)) => y,
            None => {
                return DecreasingPiecewiseLinear {
                    s: vec![T::zero()],
                    y: vec![T::zero()],
                }
            }
        };
        let mut i = 0;
        while i < events.len() {
            let y = events[i].0;
            lambda = lambda + slope.value().max(T::zero()) * (level - y);
            level = y;
            points.push((lambda, y));
            while i < events.len() && events[i].0 == y {
                match events[i].1 {
                    Kind::Start(d) => slope.add(d),
                    Kind::End(d, _) => slope.add(-d),
                    Kind::Flat(len) => lambda = lambda + len,
                }
                i += 1;
            }
            if lambda > points.last().expect("pushed above").0 {
                points.push((lambda, y));
            }
        }
        // snap accumulated rounding so the domain length is exact
        let total = crate::scalar::compensated_sum(
            self.segments.iter().map(|s| (s.b - s.a).max(T::zero())),
        );
        let last = points.len() - 1;
        let scale = if points[last].0 > T::zero() {
            total / points[last].0
        } else {
            T::one()
        };
        let (s, y): (Vec<T>, Vec<T>) = points.into_iter().map(|(s, y)| (s * scale, y)).unzip();
        DecreasingPiecewiseLinear { s, y }
    }
}

/// A non-increasing piecewise-linear function through the points `(s_k, y_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecreasingPiecewiseLinear<T> {
    s: Vec<T>,
    y: Vec<T>,
}

impl<T: Real> DecreasingPiecewiseLinear<T> {
    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.s.iter().copied().zip(self.y.iter().copied())
    }

    pub fn eval(&self, t: T) -> T {
        let k = self.s.partition_point(|&x| x <= t);
        if k == 0 {
            return self.y[0];
        }
        if k == self.s.len() {
            return T::zero();
        }
        let (s0, s1, y0, y1) = (self.s[k - 1], self.s[k], self.y[k - 1], self.y[k]);
        y0 + (y1 - y0) * (t - s0) / (s1 - s0)
    }

    fn pieces(&self) -> impl Iterator<Item = (T, T, T, T)> + '_ {
        (1..self.s.len())
            .map(move |k| (self.s[k - 1], self.s[k], self.y[k - 1], self.y[k]))
            .filter(|(a, b, _, _)| b > a)
    }

    /// Norm with exact piece integrals for L1/Lp/L∞; for the weighted norms
    /// the power of the linear piece is replaced by its chord, integrated
    /// exactly against the weight.
    pub fn norm(&self, spec: &NormSpec<T>) -> Result<T> {
        spec.validate()?;
        let one = T::one();
        let chord =
            |ea: T, eb: T, a: T, b: T, m0: T, m1: T| ea * m0 + (eb - ea) * (m1 - a * m0) / (b - a);
        Ok(match *spec {
            NormSpec::Linf => self.y[0],
            NormSpec::L1 => crate::scalar::compensated_sum(
                self.pieces()
                    .map(|(a, b, ya, yb)| (b - a) * (ya + yb) * T::lit(0.5)),
            ),
            NormSpec::Lp { p } => {
                let sum = crate::scalar::compensated_sum(self.pieces().map(|(a, b, ya, yb)| {
                    if (ya - yb).abs() <= T::epsilon() * ya.abs() {
                        ya.powf(p) * (b - a)
                    } else {
                        (b - a) * (ya.powf(p + one) - yb.powf(p + one)) / ((p + one) * (ya - yb))
                    }
                }));
                sum.powf(p.recip())
            }
            NormSpec::Lorentz { p, q } if q.is_infinite() => {
                let inv = p.recip();
                let mut best = T::zero();
                for (a, b, ya, yb) in self.pieces() {
                    let m = (yb - ya) / (b - a);
                    let mut cands = vec![a, b];
                    if m < T::zero() {
                        let s = (m * a - ya) / (m * (one + p));
                        if s > a && s < b {
                            cands.push(s);
                        }
                    }
                    for s in cands {
                        best = best.max(s.powf(inv) * (ya + m * (s - a)));
                    }
                }
                best
            }
            NormSpec::Lorentz { p, q } => {
                let c = q / p;
                let sum = crate::scalar::compensated_sum(self.pieces().map(|(a, b, ya, yb)| {
                    let m0 = (b.powf(c) - a.powf(c)) / c;
                    let m1 = (b.powf(c + one) - a.powf(c + one)) / (c + one);
                    chord(ya.powf(q), yb.powf(q), a, b, m0, m1)
                }));
                sum.powf(q.recip())
            }
            NormSpec::LpLogL { p, alpha } => {
                let beta = alpha * p;
                let sum = crate::scalar::compensated_sum(self.pieces().map(|(a, b, ya, yb)| {
                    let m0 = log_weight_mass(beta, a, b);
                    let m1 = log_weight_first_moment(beta, a, b);
                    chord(ya.powf(p), yb.powf(p), a, b, m0, m1)
                }));
                sum.powf(p.recip())
            }
        })
    }
}

/// Norm of a non-increasing function `g` on `(0, end]` (zero beyond), by
/// quadrature over the given pieces. Not for `Linf`.
pub fn norm_of_decreasing<T: Real, G: Fn(T) -> T>(
    spec: &NormSpec<T>,
    g: G,
    pieces: &[(T, T)],
) -> Result<T> {
    spec.validate()?;
    let rel = T::lit(1e-10).max(T::tol());
    let (power, root, weight): (T, T, Box<dyn Fn(T) -> T>) = match *spec {
        NormSpec::L1 => (T::one(), T::one(), Box::new(|_| T::one())),
        NormSpec::Lp { p } => (p, p, Box::new(|_| T::one())),
        NormSpec::Lorentz { p, q } if q.is_finite() => {
            let c = q / p - T::one();
            (q, q, Box::new(move |s: T| s.powf(c)))
        }
        NormSpec::LpLogL { p, alpha } => {
            let beta = alpha * p;
            (p, p, Box::new(move |s: T| (-s.ln()).powf(beta)))
        }
        _ => {
            return Err(invalid(format!(
                "{spec} is a supremum norm; evaluate it directly"
            )))
        }
    };
    let sum =
        crate::scalar::compensated_sum(pieces.iter().map(|&(a, b)| {
            quadrature::integrate(|s| g(s).powf(power) * weight(s), a, b, rel).value
        }));
    Ok(sum.powf(root.recip()))
}

/// `f - ∫ f dμ`; gradients are unchanged.
pub fn deviation_from_mean<T: Real>(f: &SampledFunction<T>) -> SampledFunction<T> {
    f.shifted(-f.mean())
}

/// Nodes used to represent `g(t) = (f**(t) - f*(t)) I(t)/t`: the breakpoints
/// of `f*` merged with an endpoint-refined grid.
fn ls_nodes<T: Real>(q: &QuantileFunction<T>, nodes: usize) -> Vec<T> {
    let mut ts: Vec<T> = grid::endpoint_refined(nodes, T::lit(grid::TABULATION_EDGE));
    ts.extend(q.breaks().iter().copied().filter(|&b| b < T::one()));
    ts.sort_by(|a, b| a.partial_cmp(b).expect("finite nodes"));
    ts.dedup();
    ts
}

/// `g(t) = (f**(t) - f*(t)) I(t)/t` as a piecewise-linear function through
/// its exact node values, with jumps at the breakpoints of `f*`.
pub fn ls_function<T: Real, P: IsoProfile<T>>(
    f: &QuantileFunction<T>,
    profile: &P,
    nodes: usize,
) -> PiecewiseLinear<T> {
    let ts = ls_nodes(f, nodes);
    let value = |t: T, fstar: T| {
        let avg = f.integral_to(t) / t;
        ((avg - fstar).max(T::zero())) * profile.value(t) / t
    };
    let mut segments = Vec::with_capacity(ts.len() + 1);
    let mut prev_t = T::zero();
    let mut prev_y = T::zero();
    for &t in &ts {
        let left = value(t, f.eval_left(t));
        segments.push(Segment {
            a: prev_t,
            b: t,
            ya: prev_y,
            yb: left,
        });
        prev_t = t;
        prev_y = value(t, f.eval(t));
    }
    segments.push(Segment {
        a: prev_t,
        b: T::one(),
        ya: prev_y,
        yb: T::zero(),
    });
    PiecewiseLinear::new(segments)
}

/// `‖(f** - f*) I(t)/t‖_X̄`, rearranging with respect to Lebesgue measure.
pub fn ls_norm<T: Real, P: IsoProfile<T>>(
    spec: &NormSpec<T>,
    f: &SampledFunction<T>,
    profile: &P,
) -> Result<T> {
    ls_norm_of(spec, &rearrange(f), profile, grid::DEFAULT_NODES)
}

pub fn ls_norm_of<T: Real, P: IsoProfile<T>>(
    spec: &NormSpec<T>,
    f: &QuantileFunction<T>,
    profile: &P,
    nodes: usize,
) -> Result<T> {
    let g = ls_function(f, profile, nodes);
    match spec {
        NormSpec::Linf => Ok(g.max()),
        _ => g.rearranged().norm(spec),
    }
}
