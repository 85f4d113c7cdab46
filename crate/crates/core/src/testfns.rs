//! Lipschitz test functions on ℝ^n with analytic gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::SamplePoints;
use crate::rearrangement::{Entry, SampledFunction};
use crate::scalar::Real;

/// Clamp level for the random polynomials.
pub const POLYNOMIAL_CLAMP: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `x_1`
    Coordinate,
    /// `1` for `x_1 <= a`, `0` for `x_1 >= a + eps`, linear in between.
    SmoothedHalfLine { a: f64, eps: f64 },
    /// `clamp(x_1, -1, 1)`
    ClampedRamp,
    /// `(1 - |x|²/R²)_+`
    RadialBump { radius: f64 },
    /// `clamp(c + b·x + xᵀAx, -M, M)` with `A` upper triangular.
    Polynomial {
        constant: f64,
        linear: Vec<f64>,
        quadratic: Vec<Vec<f64>>,
        clamp: f64,
    },
    /// Always `c`.
    Constant { c: f64 },
}

impl TestFunction {
    /// Polynomial of degree at most two with coefficients uniform in `[-1, 1]`.
    pub fn random_polynomial(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coef = || rng.gen_range(-1.0..1.0);
        let constant = coef();
        let linear = (0..dim).map(|_| coef()).collect();
        let quadratic = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if j >= i { coef() } else { 0.0 })
                    .collect()
            })
            .collect();
        TestFunction::Polynomial {
            constant,
            linear,
            quadratic,
            clamp: POLYNOMIAL_CLAMP,
        }
    }

    pub fn label(&self) -> String {
        match self {
            TestFunction::Coordinate => "coordinate".into(),
            TestFunction::SmoothedHalfLine { a, eps } => format!("half_line(a={a},eps={eps})"),
            TestFunction::ClampedRamp => "clamped_ramp".into(),
            TestFunction::RadialBump { radius } => format!("radial_bump(R={radius})"),
            TestFunction::Polynomial { .. } => "polynomial".into(),
            TestFunction::Constant { c } => format!("constant({c})"),
        }
    }

    /// `(f(x), |∇f(x)|)`. At kinks the one-sided gradient of the inner piece
    /// is used; kinks carry no mass under the sampling measures.
    pub fn eval<T: Real>(&self, x: &[T]) -> (T, T) {
        let one = T::one();
        let x1 = x[0];
        match self {
            TestFunction::Coordinate => (x1, one),
            TestFunction::SmoothedHalfLine { a, eps } => {
                let (a, eps) = (T::lit(*a), T::lit(*eps));
                if x1 <= a {
                    (one, T::zero())
                } else if x1 >= a + eps {
                    (T::zero(), T::zero())
                } else {
                    (one - (x1 - a) / eps, eps.recip())
                }
            }
            TestFunction::ClampedRamp => {
                if x1.abs() < one {
                    (x1, one)
                } else {
                    (x1.signum(), T::zero())
                }
            }
            TestFunction::RadialBump { radius } => {
                let r2 = T::lit(radius * radius);
                let norm2 = x.iter().fold(T::zero(), |acc, &v| acc + v * v);
                if norm2 >= r2 {
                    (T::zero(), T::zero())
                } else {
                    (one - norm2 / r2, T::lit(2.0) * norm2.sqrt() / r2)
                }
            }
            TestFunction::Polynomial {
                constant,
                linear,
                quadratic,
                clamp,
            } => {
                let n = x.len().min(linear.len());
                let mut value = T::lit(*constant);
                let mut grad: Vec<T> = linear.iter().take(n).map(|&b| T::lit(b)).collect();
                for i in 0..n {
                    value = value + T::lit(linear[i]) * x[i];
                    for j in i..n {
                        let a = T::lit(quadratic[i][j]);
                        value = value + a * x[i] * x[j];
                        grad[i] = grad[i] + a * x[j];
                        grad[j] = grad[j] + a * x[i];
                    }
                }
                let m = T::lit(*clamp);
                if value.abs() >= m {
                    (value.signum() * m, T::zero())
                } else {
                    (
                        value,
                        grad.iter().fold(T::zero(), |acc, &g| acc + g * g).sqrt(),
                    )
                }
            }
            TestFunction::Constant { c } => (T::lit(*c), T::zero()),
        }
    }

    /// Evaluate at every sample point, each atom carrying weight `1/N`.
    pub fn sample<T: Real>(&self, points: &SamplePoints<T>) -> Result<SampledFunction<T>> {
        if points.is_empty() {
            return Err(invalid("no sample points"));
        }
        let w = T::lit(points.len() as f64).recip();
        let entries: Vec<Entry<T>> = points
            .coords
            .par_chunks(points.dim)
            .map(|x| {
                let (v, g) = self.eval(x);
                Entry::new(v, g, w)
            })
            .collect();
        SampledFunction::normalized(entries)
    }
}

/// The built-in family: coordinate projection, smoothed half-line indicators
/// at three widths, clamped ramp, radial bump and two random polynomials.
pub fn builtin_family(dim: usize, seed: u64) -> Vec<(String, TestFunction)> {
    let mut out = vec![TestFunction::Coordinate];
    for eps in [1e-1, 1e-2, 1e-3] {
        out.push(TestFunction::SmoothedHalfLine { a: 0.3, eps });
    }
    out.push(TestFunction::ClampedRamp);
    out.push(TestFunction::RadialBump { radius: 1.5 });
    let mut named: Vec<(String, TestFunction)> = out.into_iter().map(|f| (f.label(), f)).collect();
    for k in 0..2 {
        named.push((
            format!("polynomial_{k}"),
            TestFunction::random_polynomial(dim, seed.wrapping_mul(31).wrapping_add(k)),
        ));
    }
    named
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central difference of `f` along coordinate `i`.
    fn numeric_grad(f: &TestFunction, x: &[f64]) -> f64 {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut up = x.to_vec();
                let mut down = x.to_vec();
                up[i] += h;
                down[i] -= h;
                let d = (f.eval(&up).0 - f.eval(&down).0) / (2.0 * h);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn gradients_match_finite_differences() {
        let points = [
            vec![0.3047, -0.2, 0.7],
            vec![-0.5, 0.4, 0.1],
            vec![0.9, 0.05, -1.1],
        ];
        let mut family: Vec<TestFunction> =
            builtin_family(3, 5).into_iter().map(|(_, f)| f).collect();
        family.push(TestFunction::SmoothedHalfLine { a: 0.3, eps: 0.1 });
        for f in &family {
            for x in &points {
                let (_, g) = f.eval(x);
                let fd = numeric_grad(f, x);
                assert!(
                    (g - fd).abs() < 1e-5 * (1.0 + g),
                    "{}: {g} vs {fd} at {x:?}",
                    f.label()
                );
            }
        }
    }

    #[test]
    fn random_polynomials_are_seeded() {
        assert_eq!(
            TestFunction::random_polynomial(2, 9),
            TestFunction::random_polynomial(2, 9)
        );
        assert_ne!(
            TestFunction::random_polynomial(2, 9),
            TestFunction::random_polynomial(2, 10)
        );
    }

    #[test]
    fn polynomial_is_clamped() {
        let p = TestFunction::Polynomial {
            constant: 0.0,
            linear: vec![10.0],
            quadratic: vec![vec![0.0]],
            clamp: 2.0,
        };
        assert_eq!(p.eval(&[1.0]), (2.0, 0.0));
        assert_eq!(p.eval(&[0.1]), (1.0, 10.0));
    }
}
