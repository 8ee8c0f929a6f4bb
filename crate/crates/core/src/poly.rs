//! Polynomial utilities: real root bracketing on an interval, all roots via
//! the companion matrix, and exact bivariate polynomials over the rationals.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Roots of `f` on `[a, b]` located by sampling `samples + 1` equispaced
/// points and bisecting every sign change to full precision.
pub fn sign_change_roots<F>(f: F, a: f64, b: f64, samples: usize) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    let mut roots = Vec::new();
    let dx = (b - a) / samples as f64;
    let mut x0 = a;
    let mut f0 = f(a);
    for i in 1..=samples {
        let x1 = if i == samples { b } else { a + dx * i as f64 };
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            roots.push(bisect(&f, x0, x1, f0));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots
}

fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Horner evaluation of `Σ coeffs[i] x^i`.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn horner_derivative(coeffs: &[f64], x: f64) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (i, &c)| acc * x + i as f64 * c)
}

/// Real roots of `Σ coeffs[i] x^i` (ascending powers) from the eigenvalues
/// of the companion matrix, each polished by a few Newton steps. Eigenvalues
/// with imaginary part above `imag_tol · max(1, |λ|)` are discarded.
pub fn real_roots(coeffs: &[f64], imag_tol: f64) -> Vec<f64> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    let mut roots: Vec<f64> = m
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= imag_tol * z.norm().max(1.0))
        .map(|z| {
            let mut x = z.re;
            for _ in 0..8 {
                let d = horner_derivative(&c, x);
                if d == 0.0 {
                    break;
                }
                let step = horner(&c, x) / d;
                if !step.is_finite() {
                    break;
                }
                x -= step;
            }
            x
        })
        .collect();
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// Exact polynomial in two variables `(s, t)`, stored sparsely as
/// `(power of s, power of t) -> coefficient`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(usize, usize), BigRational>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly::default()
    }

    pub fn monomial(coeff: BigRational, s_pow: usize, t_pow: usize) -> Self {
        let mut p = BiPoly::zero();
        p.add_term(coeff, s_pow, t_pow);
        p
    }

    pub fn constant(coeff: BigRational) -> Self {
        BiPoly::monomial(coeff, 0, 0)
    }

    pub fn add_term(&mut self, coeff: BigRational, s_pow: usize, t_pow: usize) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry((s_pow, t_pow)).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&(s_pow, t_pow));
        }
    }

    pub fn add(&self, other: &BiPoly) -> BiPoly {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(c.clone(), i, j);
        }
        out
    }

    pub fn mul(&self, other: &BiPoly) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &other.terms {
                out.add_term(c1 * c2, i1 + i2, j1 + j2);
            }
        }
        out
    }

    pub fn pow(&self, n: usize) -> BiPoly {
        let mut out = BiPoly::constant(BigRational::one());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest power of `s` with a non-zero coefficient (`None` for zero).
    pub fn degree_s(&self) -> Option<usize> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    pub fn coeff(&self, s_pow: usize, t_pow: usize) -> BigRational {
        self.terms
            .get(&(s_pow, t_pow))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &BigRational)> {
        self.terms.iter()
    }

    /// Collapses `t` to a number: coefficients of ascending powers of `s`,
    /// using precomputed powers `t_powers[j] = t^j`.
    pub fn coeffs_in_s(&self, t_powers: &[f64]) -> Vec<f64> {
        let len = self.degree_s().map_or(0, |d| d + 1);
        let mut out = vec![0.0; len];
        for (&(i, j), c) in &self.terms {
            out[i] += rational_to_f64(c) * t_powers[j];
        }
        out
    }

    pub fn max_t_power(&self) -> usize {
        self.terms.keys().map(|&(_, j)| j).max().unwrap_or(0)
    }
}

/// Exact conversion of a finite `f64` (every finite double is a dyadic rational).
pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

pub fn rational_from_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // fall back through the float division for huge numerators/denominators
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        if r.is_negative() {
            -(n.abs() / d)
        } else {
            n / d
        }
    })
}

pub fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_changes_of_cubic() {
        let roots = sign_change_roots(|x| (x - 0.3) * (x + 0.5) * (x - 0.9), -1.0, 1.0, 100);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-0.5, 0.3, 0.9]) {
            assert!((r - e).abs() < 1e-14, "{r} vs {e}");
        }
    }

    #[test]
    fn companion_roots() {
        // (x-1)(x-2)(x+3)(x^2+1) = x^5 - x^3 ... expand numerically
        let lin = [[-1.0, 1.0], [-2.0, 1.0], [3.0, 1.0]];
        let mut c = vec![1.0, 0.0, 1.0];
        for l in lin {
            let mut next = vec![0.0; c.len() + 1];
            for (i, &ci) in c.iter().enumerate() {
                next[i] += ci * l[0];
                next[i + 1] += ci * l[1];
            }
            c = next;
        }
        let roots = real_roots(&c, 1e-9);
        assert_eq!(roots.len(), 3);
        for (r, e) in roots.iter().zip([-3.0, 1.0, 2.0]) {
            assert!((r - e).abs() < 1e-12);
        }
    }

    #[test]
    fn bipoly_cancellation_is_exact() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let p = BiPoly::monomial(third.clone(), 2, 1);
        let q = BiPoly::monomial(-third, 2, 1);
        assert!(p.add(&q).is_zero());
        let s = BiPoly::monomial(rational_from_int(1), 1, 0);
        let one_minus_s = BiPoly::constant(rational_from_int(1)).add(&BiPoly::monomial(rational_from_int(-1), 1, 0));
        let sq = one_minus_s.pow(2);
        assert_eq!(sq.degree_s(), Some(2));
        assert_eq!(sq.coeff(1, 0), rational_from_int(-2));
        assert_eq!(s.mul(&s).coeffs_in_s(&[1.0]), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(7, 0), 1);
        assert_eq!(binomial(10, 10), 1);
    }

    #[test]
    fn f64_round_trips_exactly() {
        for x in [0.25, -0.1, 1.0 / 3.0, 1e-300] {
            assert_eq!(rational_to_f64(&rational_from_f64(x)), x);
        }
    }
}
