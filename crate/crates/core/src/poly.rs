//! Dense univariate polynomials over `Q`, coefficients low to high.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::quadratic::rational_to_f64;

pub type Poly = Vec<BigRational>;

pub fn trim(mut f: Poly) -> Poly {
    while f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
    f
}

/// Degree, with `None` for the zero polynomial.
pub fn degree(f: &[BigRational]) -> Option<usize> {
    f.iter().rposition(|c| !c.is_zero())
}

pub fn eval(f: &[BigRational], x: &BigRational) -> BigRational {
    f.iter()
        .rev()
        .fold(BigRational::zero(), |acc, c| acc * x + c)
}

pub fn derivative(f: &[BigRational]) -> Poly {
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(i.into()))
        .collect()
}

pub fn mul(f: &[BigRational], g: &[BigRational]) -> Poly {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    trim(out)
}

/// Quotient and remainder; panics on division by zero.
pub fn div_rem(f: &[BigRational], g: &[BigRational]) -> (Poly, Poly) {
    let dg = degree(g).expect("division by the zero polynomial");
    let mut r = trim(f.to_vec());
    let lead = g[dg].clone();
    let mut q = vec![BigRational::zero(); r.len().saturating_sub(dg).max(1)];
    while let Some(dr) = degree(&r) {
        if dr < dg {
            break;
        }
        let c = &r[dr] / &lead;
        for (i, gi) in g.iter().enumerate().take(dg + 1) {
            r[dr - dg + i] -= &c * gi;
        }
        q[dr - dg] = c;
        r = trim(r);
    }
    (trim(q), r)
}

pub fn monic(f: &[BigRational]) -> Poly {
    match degree(f) {
        None => Vec::new(),
        Some(d) => {
            let lead = f[d].clone();
            f[..=d].iter().map(|c| c / &lead).collect()
        }
    }
}

pub fn gcd(f: &[BigRational], g: &[BigRational]) -> Poly {
    let (mut a, mut b) = (trim(f.to_vec()), trim(g.to_vec()));
    while degree(&b).is_some() {
        let (_, r) = div_rem(&a, &b);
        a = b;
        b = r;
    }
    monic(&a)
}

/// Product of the distinct monic irreducible factors.
pub fn squarefree_part(f: &[BigRational]) -> Poly {
    let g = gcd(f, &derivative(f));
    monic(&div_rem(f, &g).0)
}

fn integer_coefficients(f: &[BigRational]) -> Vec<BigInt> {
    let l = f.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    f.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect()
}

/// Positive divisors of `n`, or `None` when `n` is too large to factor by
/// trial division.
fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let mut n = n.abs();
    if n.is_zero() {
        return None;
    }
    let mut primes: Vec<(BigInt, u32)> = Vec::new();
    let mut f = BigInt::from(2);
    let limit = BigInt::from(1_000_000);
    while &f * &f <= n {
        if f > limit {
            return None;
        }
        let mut e = 0;
        while (&n % &f).is_zero() {
            n /= &f;
            e += 1;
        }
        if e > 0 {
            primes.push((f.clone(), e));
        }
        f += 1;
    }
    if !n.is_one() {
        primes.push((n, 1));
    }
    let mut out = vec![BigInt::one()];
    for (p, e) in primes {
        let mut next = Vec::new();
        for d in &out {
            let mut pk = BigInt::one();
            for _ in 0..=e {
                next.push(d * &pk);
                pk *= &p;
            }
        }
        out = next;
    }
    Some(out)
}

/// Rational roots with multiplicity, and the cofactor with no rational
/// roots.
pub fn rational_roots(f: &[BigRational]) -> (Vec<BigRational>, Poly) {
    let mut rest = trim(f.to_vec());
    let mut roots = Vec::new();
    // Roots at zero.
    while degree(&rest).is_some_and(|d| d > 0) && rest[0].is_zero() {
        roots.push(BigRational::zero());
        rest.remove(0);
    }
    if degree(&rest).is_none_or(|d| d == 0) {
        return (roots, rest);
    }
    let ints = integer_coefficients(&rest);
    let a0 = ints[0].clone();
    let an = ints.last().unwrap().clone();
    let candidates: Vec<BigRational> = match (divisors(&a0), divisors(&an)) {
        (Some(num), Some(den)) => {
            let mut c = Vec::new();
            for a in &num {
                for b in &den {
                    let r = BigRational::new(a.clone(), b.clone());
                    c.push(r.clone());
                    c.push(-r);
                }
            }
            c.sort();
            c.dedup();
            c
        }
        _ => numeric_rational_candidates(&rest),
    };
    for r in candidates {
        loop {
            if degree(&rest).is_none_or(|d| d == 0) || !eval(&rest, &r).is_zero() {
                break;
            }
            let lin = vec![-r.clone(), BigRational::one()];
            rest = div_rem(&rest, &lin).0;
            roots.push(r.clone());
        }
    }
    roots.sort();
    (roots, rest)
}

fn numeric_rational_candidates(f: &[BigRational]) -> Vec<BigRational> {
    complex_roots(f)
        .into_iter()
        .filter(|(z, r)| z.im.abs() <= *r)
        .filter_map(|(z, _)| approximate_rational(z.re, 1_000_000))
        .collect()
}

/// Best rational approximation with denominator at most `max_den`, by
/// continued fractions.
pub fn approximate_rational(x: f64, max_den: i64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_den as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a;
        if frac.abs() < 1e-12 {
            break;
        }
        y = 1.0 / frac;
    }
    (k1 != 0).then(|| BigRational::new(BigInt::from(h1), BigInt::from(k1)))
}

/// Complex roots of the squarefree part of `f` with inclusion radii: each
/// disc of radius `deg·|f(z)/f'(z)|` around `z` contains a root.
pub fn complex_roots(f: &[BigRational]) -> Vec<(Complex64, f64)> {
    let g = squarefree_part(f);
    let Some(n) = degree(&g) else { return Vec::new() };
    if n == 0 {
        return Vec::new();
    }
    let c: Vec<Complex64> = g.iter().map(|x| Complex64::new(rational_to_f64(x), 0.0)).collect();
    aberth(&c)
}

/// Roots of a squarefree polynomial with complex coefficients (low to
/// high) by the Aberth iteration, with inclusion radii.
pub fn aberth(c: &[Complex64]) -> Vec<(Complex64, f64)> {
    let n = c.len() - 1;
    let lead = c[n];
    let c: Vec<Complex64> = c.iter().map(|x| x / lead).collect();
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for a in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };
    // Cauchy bound for the initial circle.
    let bound = 1.0 + c[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(bound * 0.5, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j]))
                .sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z.into_iter()
        .map(|zi| {
            let (p, dp) = eval(zi);
            let r = if p.norm() == 0.0 { 0.0 } else { n as f64 * (p / dp).norm() };
            // Floor at a few ulps so that exact hits still get a disc.
            (zi, r.max(4.0 * f64::EPSILON * (1.0 + zi.norm())))
        })
        .collect()
}

/// Splits off rational quadratic factors found by pairing numeric roots
/// and verifying divisibility exactly. Returns the factors and the
/// remaining cofactor.
pub fn quadratic_factors(f: &[BigRational]) -> (Vec<Poly>, Poly) {
    let mut rest = monic(f);
    let mut found = Vec::new();
    loop {
        let Some(d) = degree(&rest) else { break };
        if d <= 2 {
            break;
        }
        let roots = complex_roots(&rest);
        let mut hit = None;
        'pairs: for i in 0..roots.len() {
            for j in i + 1..roots.len() {
                let (a, b) = (roots[i].0, roots[j].0);
                let s = a + b;
                let p = a * b;
                if s.im.abs() > 1e-6 * (1.0 + s.norm()) || p.im.abs() > 1e-6 * (1.0 + p.norm()) {
                    continue;
                }
                let (Some(sr), Some(pr)) = (approximate_rational(s.re, 1 << 20), approximate_rational(p.re, 1 << 20)) else {
                    continue;
                };
                let quad = vec![pr, -sr, BigRational::one()];
                let (qq, r) = div_rem(&rest, &quad);
                if degree(&r).is_none() {
                    hit = Some((quad, qq));
                    break 'pairs;
                }
            }
        }
        match hit {
            Some((quad, qq)) => {
                found.push(quad);
                rest = qq;
            }
            None => break,
        }
    }
    (found, rest)
}

pub fn to_i64_coefficients(f: &[BigRational]) -> Option<Vec<i64>> {
    f.iter()
        .map(|c| c.is_integer().then(|| c.to_integer().to_i64()).flatten())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> Poly {
        c.iter().map(|&x| BigRational::from_integer(x.into())).collect()
    }

    #[test]
    fn rational_roots_of_product() {
        // (2x - 1)(x + 3)(x^2 + 2)
        let f = mul(&mul(&poly(&[-1, 2]), &poly(&[3, 1])), &poly(&[2, 0, 1]));
        let (roots, rest) = rational_roots(&f);
        assert_eq!(roots, vec![BigRational::from_integer((-3).into()), BigRational::new(1.into(), 2.into())]);
        assert_eq!(monic(&rest), poly(&[2, 0, 1]));
    }

    #[test]
    fn gcd_and_squarefree() {
        let f = mul(&poly(&[-1, 1]), &poly(&[-1, 1]));
        assert_eq!(squarefree_part(&f), poly(&[-1, 1]));
        assert_eq!(gcd(&f, &poly(&[1, 1])), poly(&[1]));
    }

    #[test]
    fn aberth_finds_roots_of_unity() {
        let roots = complex_roots(&poly(&[-1, 0, 0, 0, 1]));
        assert_eq!(roots.len(), 4);
        for (z, r) in roots {
            assert!((z.norm() - 1.0).abs() <= r + 1e-12);
        }
    }

    #[test]
    fn quadratic_factor_recovery() {
        let f = mul(&poly(&[2, 0, 1]), &poly(&[5, 2, 1]));
        let (qs, rest) = quadratic_factors(&f);
        assert_eq!(qs.len() + usize::from(degree(&rest) == Some(2)), 2);
    }
}
