//! Brute-force oracles for cross-checking the main algorithms. Everything
//! here uses plain dense rational arithmetic and deliberately does not call
//! into the matrix, module or Weil–Deligne code.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

type Q = BigRational;
type Vector = Vec<Q>;
type Dense = Vec<Vec<Q>>;

fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

// ---------------------------------------------------------------- points

/// `#E(F_q)` for `y² + a1 xy + a3 y = x³ + a2 x² + a4 x + a6`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveCount {
    pub q: u64,
    pub coefficients: [i64; 5],
    pub count: u64,
    /// `a = q + 1 − #E(F_q)`.
    pub trace: i64,
    /// `T² − aT + q`, low to high.
    pub charpoly: [i64; 3],
}

fn is_prime_u64(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Exhaustive count over the prime field `F_q` plus the point at infinity.
pub fn count_points_weierstrass(q: u64, coefficients: [i64; 5]) -> Result<CurveCount> {
    if !is_prime_u64(q) || q > 10_000 {
        return Err(Error::NotPrime(q));
    }
    let m = q as i64;
    let r = |x: i64| x.rem_euclid(m);
    let [a1, a2, a3, a4, a6] = coefficients.map(r);
    let b2 = r(a1 * a1 + 4 * a2);
    let b4 = r(2 * a4 + a1 * a3);
    let b6 = r(a3 * a3 + 4 * a6);
    let b8 = r(a1 * a1 % m * a6 + 4 * a2 * a6 - a1 * a3 % m * a4 + a2 * a3 % m * a3 - a4 * a4);
    let disc = r(-b2 * b2 % m * b8 - 8 * (b4 * b4 % m) * b4 - 27 * b6 * b6 + 9 * (b2 * b4 % m) * b6);
    if disc == 0 {
        return Err(Error::SingularCurve);
    }
    let mut count = 1u64;
    for x in 0..m {
        for y in 0..m {
            let lhs = r(y * y + a1 * x % m * y + a3 * y);
            let rhs = r(x * x % m * x + a2 * x % m * x + a4 * x + a6);
            if lhs == rhs {
                count += 1;
            }
        }
    }
    let trace = m + 1 - count as i64;
    assert!(trace * trace <= 4 * m, "Hasse bound violated");
    Ok(CurveCount {
        q,
        coefficients,
        count,
        trace,
        charpoly: [m, -trace, 1],
    })
}

// ---------------------------------------------------------- linear algebra

/// Row echelon form (reduced), returning the nonzero rows.
fn rref_rows(mut rows: Dense) -> Dense {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut lead = 0;
    let mut r = 0;
    while r < rows.len() && lead < ncols {
        let Some(i) = (r..rows.len()).find(|&i| !rows[i][lead].is_zero()) else {
            lead += 1;
            continue;
        };
        rows.swap(r, i);
        let inv = rows[r][lead].recip();
        for x in rows[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][lead].is_zero() {
                let f = rows[i][lead].clone();
                for j in 0..ncols {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        r += 1;
        lead += 1;
    }
    rows.truncate(r);
    rows
}

fn apply(m: &Dense, v: &Vector) -> Vector {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Q::zero(), |acc, (a, b)| acc + a * b))
        .collect()
}

fn mat_mul(a: &Dense, b: &Dense) -> Dense {
    let n = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b).fold(Q::zero(), |acc, (x, r)| acc + x * &r[j]))
                .collect()
        })
        .collect()
}

fn identity(d: usize) -> Dense {
    (0..d).map(|i| (0..d).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect()
}

/// Null space of `m` (acting on column vectors).
fn null_space(m: &Dense, ncols: usize) -> Vec<Vector> {
    let r = rref_rows(m.to_vec());
    let pivots: Vec<usize> = r
        .iter()
        .map(|row| row.iter().position(|x| !x.is_zero()).unwrap())
        .collect();
    (0..ncols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); ncols];
            v[free] = Q::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[free].clone();
            }
            v
        })
        .collect()
}

/// A subspace kept as its reduced echelon basis (a canonical key).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Space(Dense);

impl Space {
    fn of(vectors: &[Vector]) -> Self {
        Space(rref_rows(vectors.to_vec()))
    }

    fn dim(&self) -> usize {
        self.0.len()
    }

    fn sum(&self, other: &Space) -> Space {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Space::of(&v)
    }

    fn contains(&self, other: &Space) -> bool {
        self.sum(other).dim() == self.dim()
    }

    fn intersect(&self, other: &Space, n: usize) -> Space {
        // x ∈ U ∩ W  ⟺  x ⊥ (U^⊥ + W^⊥).
        let perp_u = null_space(&self.0, n);
        let perp_w = null_space(&other.0, n);
        let mut all = perp_u;
        all.extend(perp_w);
        Space::of(&null_space(&all, n))
    }

    fn image(&self, m: &Dense) -> Space {
        Space::of(&self.0.iter().map(|v| apply(m, v)).collect::<Vec<_>>())
    }
}

// ------------------------------------------------------ monodromy axioms

/// A filtration given on `[lowest, lowest + spaces.len())`: zero below,
/// everything above.
#[derive(Clone, Debug)]
pub struct IndexedFiltration {
    pub dim: usize,
    pub lowest: i64,
    pub spaces: Vec<Vec<Vector>>,
}

impl IndexedFiltration {
    fn get(&self, k: i64) -> Space {
        let i = k - self.lowest;
        if i < 0 {
            Space(Vec::new())
        } else if i as usize >= self.spaces.len() {
            Space::of(&identity(self.dim))
        } else {
            Space::of(&self.spaces[i as usize])
        }
    }

    fn range(&self) -> std::ops::RangeInclusive<i64> {
        let hi = self.lowest + self.spaces.len() as i64;
        (self.lowest.min(-hi) - 2)..=(hi.max(-self.lowest) + 2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axiom {
    /// `N M_k ⊂ M_{k−2}`.
    Shift,
    /// `N^k: Gr_k → Gr_{−k}` bijective.
    HardLefschetz,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub violations: Vec<(Axiom, i64)>,
}

impl AxiomCheck {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Both axioms checked by rank computations at every relevant index.
pub fn verify_monodromy_axioms(n: &[Vector], filtration: &IndexedFiltration) -> AxiomCheck {
    let n: Dense = n.to_vec();
    let mut violations = Vec::new();
    for k in filtration.range() {
        if !filtration.get(k - 2).contains(&filtration.get(k).image(&n)) {
            violations.push((Axiom::Shift, k));
        }
    }
    let mut nk = n.clone();
    for k in 1..=*filtration.range().end() {
        let (up, low) = (filtration.get(k), filtration.get(k - 1));
        let (up_m, low_m) = (filtration.get(-k), filtration.get(-k - 1));
        let gr = up.dim() - low.dim().min(up.dim());
        let gr_m = up_m.dim() - low_m.dim().min(up_m.dim());
        let img = up.image(&nk).sum(&low_m);
        let image_ok = up_m.contains(&img) && img.dim() - low_m.dim() == gr;
        let kernel_ok = low.image(&nk).sum(&low_m).dim() == low_m.dim();
        if gr != gr_m || !image_ok || !kernel_ok {
            violations.push((Axiom::HardLefschetz, k));
        }
        nk = mat_mul(&nk, &n);
    }
    AxiomCheck { violations }
}

/// Every filtration built from the lattice generated by the subspaces
/// `ker N^a ∩ im N^b` that satisfies both axioms. Exponential; meant for
/// dimension ≤ 4.
pub fn axiom_filtrations(n: &[Vector]) -> Vec<IndexedFiltration> {
    let d = n.len();
    let n: Dense = n.to_vec();
    let mut powers = vec![identity(d)];
    for _ in 0..=d {
        let next = mat_mul(powers.last().unwrap(), &n);
        powers.push(next);
    }
    let kernel = |m: &Dense| Space::of(&null_space(m, d));
    let image = |m: &Dense| {
        let cols: Vec<Vector> = (0..d).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect();
        Space::of(&cols)
    };
    let mut lattice: BTreeSet<Space> = BTreeSet::new();
    for a in 0..=d + 1 {
        for b in 0..=d {
            lattice.insert(kernel(&powers[a]).intersect(&image(&powers[b]), d));
        }
    }
    // Close under sum and intersection, meeting each pair once.
    let mut items: Vec<Space> = lattice.iter().cloned().collect();
    let mut next = 0;
    while next < items.len() {
        let x = items[next].clone();
        for y in items[..=next].to_vec() {
            for z in [x.sum(&y), x.intersect(&y, d)] {
                if lattice.insert(z.clone()) {
                    items.push(z);
                }
            }
        }
        next += 1;
    }
    let lattice: Vec<Space> = lattice.into_iter().collect();
    let m = lattice.len();
    // contains[i][j]: lattice[i] ⊇ lattice[j]; maps[i][j]: lattice[i] ⊇ N lattice[j].
    let images: Vec<Space> = lattice.iter().map(|x| x.image(&n)).collect();
    let contains: Vec<Vec<bool>> = (0..m).map(|i| (0..m).map(|j| lattice[i].contains(&lattice[j])).collect()).collect();
    let maps: Vec<Vec<bool>> = (0..m).map(|i| (0..m).map(|j| lattice[i].contains(&images[j])).collect()).collect();
    let zero_maps: Vec<bool> = images.iter().map(|x| x.dim() == 0).collect();
    let s = d as i64 - 1;
    let len = (2 * s + 1).max(1) as usize;
    let mut out = Vec::new();
    let mut chain: Vec<usize> = Vec::new();
    struct Search<'a> {
        lattice: &'a [Space],
        contains: &'a [Vec<bool>],
        maps: &'a [Vec<bool>],
        zero_maps: &'a [bool],
        n: &'a Dense,
        s: i64,
        len: usize,
        d: usize,
    }
    fn dfs(c: &Search, chain: &mut Vec<usize>, out: &mut Vec<IndexedFiltration>) {
        if chain.len() == c.len {
            let f = IndexedFiltration {
                dim: c.d,
                lowest: -c.s,
                spaces: chain.iter().map(|&i| c.lattice[i].0.clone()).collect(),
            };
            if verify_monodromy_axioms(c.n, &f).holds() {
                out.push(f);
            }
            return;
        }
        for cand in 0..c.lattice.len() {
            if chain.last().is_some_and(|&prev| !c.contains[cand][prev]) {
                continue;
            }
            // N M_k ⊂ M_{k−2}, pruning early.
            let ok = if chain.len() >= 2 {
                c.maps[chain[chain.len() - 2]][cand]
            } else {
                c.zero_maps[cand]
            };
            if !ok {
                continue;
            }
            // Hard Lefschetz forces dim Gr_k = dim Gr_{−k}.
            let i = chain.len();
            let dim = |j: usize| c.lattice[chain[j]].dim();
            let gr = c.lattice[cand].dim() - chain.last().map_or(0, |&p| c.lattice[p].dim());
            if i as i64 > c.s {
                let mirror = c.len - 1 - i;
                let gr_mirror = dim(mirror) - if mirror == 0 { 0 } else { dim(mirror - 1) };
                if gr != gr_mirror {
                    continue;
                }
            }
            if i + 1 == c.len && c.lattice[cand].dim() != c.d {
                continue;
            }
            chain.push(cand);
            dfs(c, chain, out);
            chain.pop();
        }
    }
    let search = Search {
        lattice: &lattice,
        contains: &contains,
        maps: &maps,
        zero_maps: &zero_maps,
        n: &n,
        s,
        len,
        d,
    };
    dfs(&search, &mut chain, &mut out);
    out
}

/// Dimensions `dim M_k` for `k` in `[−s, s]`, for comparing filtrations
/// found by different means.
pub fn filtration_dims(f: &IndexedFiltration, s: i64) -> Vec<usize> {
    (-s..=s).map(|k| f.get(k).dim()).collect()
}

/// True if the two filtrations agree as flags on `[−s, s]`.
pub fn same_flag(a: &IndexedFiltration, b: &IndexedFiltration, s: i64) -> bool {
    (-s..=s).all(|k| a.get(k) == b.get(k))
}

// ------------------------------------------------------------ recurrences

/// Laurent polynomial matrix with rational coefficients: `m[i][j]` is a
/// list of `(exponent, coefficient)`.
pub type LaurentMatrix = Vec<Vec<Vec<(i64, Q)>>>;

#[derive(Clone, Debug)]
pub struct RecurrenceSolutions {
    /// Terminating formal solutions: component lists of `(exponent,
    /// coefficient)`.
    pub solutions: Vec<Vec<Vec<(i64, Q)>>>,
    /// Roots `n` of `det(n + R)`, with multiplicity: the exponents where
    /// the recurrence step is singular.
    pub obstruction_exponents: Vec<Q>,
    /// Number of roots of `det(n + R)` that are not integers (rational or
    /// not).
    pub non_integral: usize,
}

/// Solves `n c_n + Σ_k H_k c_{n−k} = 0` (with `H = tG`) degree by degree on
/// `[lo, hi]`, keeping the formal solutions that vanish on the last
/// `deg H + 1` exponents of the window.
pub fn ode_recurrence_solutions(g: &LaurentMatrix, lo: i64, hi: i64) -> Result<RecurrenceSolutions> {
    let r = g.len();
    let mut hmax = 0;
    for row in g {
        for entry in row {
            for (e, c) in entry {
                if c.is_zero() {
                    continue;
                }
                if *e < -1 {
                    return Err(Error::IrregularSingularity);
                }
                hmax = hmax.max(e + 1);
            }
        }
    }
    let h_coeff = |k: i64| -> Dense {
        (0..r)
            .map(|i| {
                (0..r)
                    .map(|j| g[i][j].iter().filter(|(e, _)| e + 1 == k).fold(Q::zero(), |a, (_, c)| a + c))
                    .collect()
            })
            .collect()
    };
    let hs: Vec<Dense> = (0..=hmax).map(h_coeff).collect();
    let res = &hs[0];
    // det(x + R) through Faddeev–LeVerrier on −R.
    let charpoly = faddeev(&res.iter().map(|row| row.iter().map(|x| -x).collect()).collect::<Dense>());
    let (roots, rest) = rational_roots(&charpoly);
    let non_integral = roots.iter().filter(|x| !x.is_integer()).count() + degree(&rest).unwrap_or(0);
    // Partial solutions: each a list of coefficient vectors c_lo..c_n.
    let width = (hi - lo + 1).max(0) as usize;
    let mut partial: Vec<Vec<Vector>> = Vec::new();
    for idx in 0..width {
        let n = lo + idx as i64;
        let mut step = res.clone();
        for (i, row) in step.iter_mut().enumerate() {
            row[i] += qi(n);
        }
        let rhs: Vec<Vector> = partial
            .iter()
            .map(|p| {
                let mut acc = vec![Q::zero(); r];
                for k in 1..=hmax {
                    if idx as i64 - k >= 0 {
                        let c = apply(&hs[k as usize], &p[idx - k as usize]);
                        for i in 0..r {
                            acc[i] -= &c[i];
                        }
                    }
                }
                acc
            })
            .collect();
        // Unknowns: combination weights w of the partials and a kernel-free
        // c_n; solve step·c_n = Σ w_j rhs_j.
        let m = partial.len();
        let sys: Dense = (0..r)
            .map(|i| {
                let mut row: Vector = step[i].clone();
                row.extend(rhs.iter().map(|v| -v[i].clone()));
                row
            })
            .collect();
        let null = null_space(&sys, r + m);
        partial = null
            .iter()
            .map(|v| {
                let (c_n, w) = v.split_at(r);
                let mut seq: Vec<Vector> = (0..idx)
                    .map(|t| {
                        (0..r)
                            .map(|i| partial.iter().zip(w).fold(Q::zero(), |a, (p, x)| a + &p[t][i] * x))
                            .collect()
                    })
                    .collect();
                seq.push(c_n.to_vec());
                seq
            })
            .collect();
        // Drop dependent combinations.
        let flat: Vec<Vector> = partial.iter().map(|p| p.concat()).collect();
        let basis = rref_rows(flat);
        partial = basis.iter().map(|v| v.chunks(r).map(|c| c.to_vec()).collect()).collect();
    }
    // Keep the combinations vanishing on the last deg H + 1 exponents.
    let tail = (hmax + 1) as usize;
    let all: Vec<Vector> = partial.iter().map(|p| p.concat()).collect();
    let k = all.len();
    let start = width.saturating_sub(tail) * r;
    let tail_rows: Dense = (start..width * r)
        .map(|pos| all.iter().map(|v| v[pos].clone()).collect())
        .collect();
    let combos = if k == 0 { Vec::new() } else { null_space(&tail_rows, k) };
    let solutions = combos
        .iter()
        .map(|w| {
            (0..r)
                .map(|i| {
                    (0..width)
                        .filter_map(|t| {
                            let c = all.iter().zip(w).fold(Q::zero(), |a, (v, x)| a + &v[t * r + i] * x);
                            (!c.is_zero()).then_some((lo + t as i64, c))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(RecurrenceSolutions {
        solutions,
        obstruction_exponents: roots,
        non_integral,
    })
}

/// `det(x − M)` low to high, by the Faddeev–LeVerrier recursion.
fn faddeev(m: &Dense) -> Vec<Q> {
    let n = m.len();
    let mut coeffs = vec![Q::zero(); n + 1];
    coeffs[n] = Q::one();
    let mut mk = identity(n);
    for k in 1..=n {
        let am = mat_mul(m, &mk);
        let tr = (0..n).fold(Q::zero(), |a, i| a + &am[i][i]);
        let c = -tr / qi(k as i64);
        coeffs[n - k] = c.clone();
        mk = am;
        for (i, row) in mk.iter_mut().enumerate() {
            row[i] += &c;
        }
    }
    coeffs
}

// -------------------------------------------------------------- polynomials

fn trim(mut f: Vec<Q>) -> Vec<Q> {
    while f.last().is_some_and(|x| x.is_zero()) {
        f.pop();
    }
    f
}

fn degree(f: &[Q]) -> Option<usize> {
    let f = trim(f.to_vec());
    (!f.is_empty()).then(|| f.len() - 1)
}

fn divide(f: &[Q], g: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let g = trim(g.to_vec());
    let mut r = trim(f.to_vec());
    if r.len() < g.len() {
        return (Vec::new(), r);
    }
    let mut quot = vec![Q::zero(); r.len() - g.len() + 1];
    let lead = g.last().unwrap().clone();
    while r.len() >= g.len() && !r.is_empty() {
        let shift = r.len() - g.len();
        let c = r.last().unwrap() / &lead;
        for (i, x) in g.iter().enumerate() {
            r[shift + i] -= &c * x;
        }
        quot[shift] = c;
        r.pop();
        r = trim(r);
    }
    (trim(quot), r)
}

fn gcd_poly(f: &[Q], g: &[Q]) -> Vec<Q> {
    let (mut a, mut b) = (trim(f.to_vec()), trim(g.to_vec()));
    while !b.is_empty() {
        let (_, r) = divide(&a, &b);
        a = b;
        b = r;
    }
    match a.last().cloned() {
        Some(l) => a.iter().map(|x| x / &l).collect(),
        None => a,
    }
}

fn derivative(f: &[Q]) -> Vec<Q> {
    f.iter().enumerate().skip(1).map(|(i, c)| c * qi(i as i64)).collect()
}

fn evaluate(f: &[Q], x: &Q) -> Q {
    f.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    let n = n.abs();
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut out = Vec::new();
    let root = n.sqrt();
    let mut d = BigInt::one();
    while d <= root {
        if (&n % &d).is_zero() {
            out.push(d.clone());
            out.push(&n / &d);
        }
        d += 1;
    }
    out
}

/// Rational roots with multiplicity (ascending) and the cofactor.
fn rational_roots(f: &[Q]) -> (Vec<Q>, Vec<Q>) {
    let mut f = trim(f.to_vec());
    let mut roots = Vec::new();
    while f.len() > 1 && f[0].is_zero() {
        f.remove(0);
        roots.push(Q::zero());
    }
    loop {
        if f.len() <= 1 {
            break;
        }
        let den = f.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = f.iter().map(|c| (c * Q::from_integer(den.clone())).to_integer()).collect();
        let mut found = None;
        'search: for a in divisors(&ints[0]) {
            for b in divisors(ints.last().unwrap()) {
                for s in [1, -1] {
                    let x = Q::new(&a * s, b.clone());
                    if evaluate(&f, &x).is_zero() {
                        found = Some(x);
                        break 'search;
                    }
                }
            }
        }
        match found {
            Some(x) => {
                f = divide(&f, &[-x.clone(), Q::one()]).0;
                roots.push(x);
            }
            None => break,
        }
    }
    roots.sort();
    (roots, f)
}

/// Number of distinct real roots of a squarefree `f` in `(a, b]`.
fn sturm_count(f: &[Q], a: &Q, b: &Q) -> usize {
    let mut seq = vec![trim(f.to_vec()), trim(derivative(f))];
    while seq.last().is_some_and(|g| !g.is_empty()) {
        let n = seq.len();
        let (_, r) = divide(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.iter().map(|x| -x).collect());
    }
    let changes = |x: &Q| {
        let signs: Vec<i32> = seq
            .iter()
            .map(|g| {
                let v = evaluate(g, x);
                if v.is_positive() {
                    1
                } else if v.is_negative() {
                    -1
                } else {
                    0
                }
            })
            .filter(|s| *s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    };
    changes(a) - changes(b)
}

/// Roots of `f` in `[a, b]` counted with multiplicity (Yun decomposition,
/// then Sturm on each squarefree factor).
fn count_in_interval(f: &[Q], a: &Q, b: &Q) -> usize {
    let mut total = 0;
    let mut rest = trim(f.to_vec());
    let mut mult = 1;
    while degree(&rest).is_some_and(|d| d > 0) {
        let g = gcd_poly(&rest, &derivative(&rest));
        let sf = divide(&rest, &g).0;
        // sf collects every root of multiplicity ≥ mult; peel one layer.
        let next_sf = gcd_poly(&sf, &g);
        let layer = divide(&sf, &next_sf).0;
        let at_a = if evaluate(&layer, a).is_zero() { 1 } else { 0 };
        total += mult * (sturm_count(&layer, a, b) + at_a);
        rest = g;
        mult += 1;
    }
    total
}

/// `f(x) = x^m h(x + Q/x)` for a polynomial of degree `2m` symmetric
/// under `x ↦ Q/x`; `None` if `f` is not of that form.
fn reciprocal_reduction(f: &[Q], qv: &Q) -> Option<Vec<Q>> {
    let f = trim(f.to_vec());
    let deg = f.len().checked_sub(1)?;
    if deg % 2 != 0 {
        return None;
    }
    let m = deg / 2;
    // Laurent coefficients of f / x^m, indexed by exponent + m.
    let mut l = f.clone();
    let mut h = vec![Q::zero(); m + 1];
    for k in (0..=m).rev() {
        let c = l[k + m].clone();
        h[k] = c.clone();
        if c.is_zero() {
            continue;
        }
        // (x + Q/x)^k = Σ_i C(k,i) Q^i x^{k−2i}.
        let mut binom = BigInt::one();
        for i in 0..=k {
            let term = &c * Q::from_integer(binom.clone()) * num_traits::pow(qv.clone(), i);
            let e = k as i64 - 2 * i as i64 + m as i64;
            l[e as usize] -= term;
            binom = binom * BigInt::from(k - i) / BigInt::from(i + 1);
        }
    }
    l.iter().all(|x| x.is_zero()).then_some(h)
}

fn p_power_exponent(x: &Q, p: u64) -> Option<i64> {
    let pb = BigInt::from(p);
    let v = |n: &BigInt| {
        let mut n = n.abs();
        let mut k = 0i64;
        while (&n % &pb).is_zero() {
            n /= &pb;
            k += 1;
        }
        (n.is_one()).then_some(k)
    };
    Some(v(x.numer())? - v(x.denom())?)
}

fn prime_power(q: u64) -> Option<(u64, u32)> {
    let p = (2..=q).find(|d| q.is_multiple_of(*d))?;
    let (mut r, mut a) = (q, 0);
    while r % p == 0 {
        r /= p;
        a += 1;
    }
    (r == 1).then_some((p, a))
}

/// Weights of the roots of an integer polynomial (low to high), one entry
/// per root, `None` for roots that are not Weil numbers. Exact: rational
/// roots and quadratic norms directly, higher degree through the
/// substitution `y = x + Q/x` and a Sturm count.
pub fn algebraic_weight(poly: &[i64], q: u64) -> Result<Vec<Option<Q>>> {
    let (p, a) = prime_power(q).ok_or(Error::NotPrime(q))?;
    let f: Vec<Q> = trim(poly.iter().map(|&c| qi(c)).collect());
    if f.len() <= 1 {
        return Err(Error::NotWeil("constant polynomial".into()));
    }
    let weight_of_square_abs = |x: &Q| -> Option<Q> {
        // |α|² = x = p^k ⇒ w = k / a.
        (x.is_positive()).then(|| p_power_exponent(x, p)).flatten().map(|k| Q::new(k.into(), (a as i64).into()))
    };
    let mut out = Vec::new();
    let (roots, mut rest) = rational_roots(&f);
    for r in &roots {
        out.push(if r.is_zero() { None } else { weight_of_square_abs(&(r * r)) });
    }
    let d = degree(&rest).unwrap_or(0);
    if d == 2 {
        let (c0, c1, c2) = (&rest[0], &rest[1], &rest[2]);
        let disc = c1 * c1 - qi(4) * c0 * c2;
        let prod = c0 / c2;
        let w = if disc.is_negative() {
            weight_of_square_abs(&prod)
        } else if c1.is_zero() {
            weight_of_square_abs(&-prod)
        } else {
            None
        };
        out.extend([w.clone(), w]);
    } else if d > 2 {
        // Root bound: every |α| ≤ 1 + max |c_i / c_d|, and the reverse
        // polynomial bounds 1/|α|.
        let lead = rest[d].abs();
        let upper = rest.iter().map(|c| c.abs() / &lead).max().unwrap() + Q::one();
        let c0 = rest[0].abs();
        let lower_inv = rest.iter().map(|c| c.abs() / &c0).max().unwrap() + Q::one();
        let bound = upper.max(lower_inv);
        let bound_f = bound.to_f64().unwrap_or(f64::MAX);
        let jmax = ((2.0 * bound_f.ln() / (p as f64).ln()).ceil() as i64).max(1) + 1;
        for j in -jmax..=jmax {
            if degree(&rest).unwrap_or(0) == 0 {
                break;
            }
            let qv = if j >= 0 {
                Q::from_integer(BigInt::from(p).pow(j as u32))
            } else {
                Q::from_integer(BigInt::from(p).pow((-j) as u32)).recip()
            };
            let w = Some(Q::new(j.into(), (a as i64).into()));
            let m = degree(&rest).unwrap();
            let rev: Vec<Q> = (0..=m).map(|i| &rest[m - i] * num_traits::pow(qv.clone(), m - i)).collect();
            let mut g = gcd_poly(&rest, &rev);
            if degree(&g).unwrap_or(0) == 0 {
                continue;
            }
            rest = divide(&rest, &g).0;
            // ±√Q roots (x² − Q) first; they are fixed by x ↦ Q/x.
            let xq = vec![-qv.clone(), Q::zero(), Q::one()];
            loop {
                let (quot, r) = divide(&g, &xq);
                if !r.is_empty() {
                    break;
                }
                g = quot;
                out.extend([w.clone(), w.clone()]);
            }
            if degree(&g).unwrap_or(0) == 0 {
                continue;
            }
            let Some(h) = reciprocal_reduction(&g, &qv) else {
                return Err(Error::Uncertifiable(format!("factor of degree {} at weight {j}/{a}", degree(&g).unwrap())));
            };
            // Roots on the circle |x|² = Q ⟺ y = x + Q/x real in [−2√Q, 2√Q]
            // ⟺ z = y² ∈ [0, 4Q] where G(y²) = h(y) h(−y).
            let hm: Vec<Q> = h.iter().enumerate().map(|(i, c)| if i % 2 == 0 { c.clone() } else { -c }).collect();
            let prod = poly_mul(&h, &hm);
            let big_g: Vec<Q> = prod.iter().step_by(2).cloned().collect();
            let on_circle = count_in_interval(&big_g, &Q::zero(), &(qi(4) * &qv));
            let total = degree(&h).unwrap_or(0);
            for _ in 0..on_circle {
                out.extend([w.clone(), w.clone()]);
            }
            for _ in on_circle..total {
                out.extend([None, None]);
            }
        }
        for _ in 0..degree(&rest).unwrap_or(0) {
            out.push(None);
        }
    }
    out.sort();
    Ok(out)
}

fn poly_mul(f: &[Q], g: &[Q]) -> Vec<Q> {
    if f.is_empty() || g.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); f.len() + g.len() - 1];
    for (i, a) in f.iter().enumerate() {
        for (j, b) in g.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| qi(x)).collect()
    }

    #[test]
    fn supersingular_curve_over_f2() {
        let c = count_points_weierstrass(2, [0, 0, 1, 0, 0]).unwrap();
        assert_eq!((c.count, c.trace, c.charpoly), (3, 0, [2, 0, 1]));
        let c = count_points_weierstrass(5, [0, 0, 0, 1, 0]).unwrap();
        assert!(c.trace.abs() <= 4);
        assert_eq!(count_points_weierstrass(5, [0, 0, 0, 0, 0]), Err(Error::SingularCurve));
    }

    #[test]
    fn axioms_for_e12() {
        let n = vec![v(&[0, 1]), v(&[0, 0])];
        let good = IndexedFiltration { dim: 2, lowest: -1, spaces: vec![vec![v(&[1, 0])], vec![v(&[1, 0])]] };
        assert!(verify_monodromy_axioms(&n, &good).holds());
        let all = IndexedFiltration { dim: 2, lowest: -1, spaces: vec![vec![v(&[1, 0]), v(&[0, 1])]; 3] };
        let check = verify_monodromy_axioms(&n, &all);
        assert!(check.violations.contains(&(Axiom::HardLefschetz, 1)));
        let zero = vec![v(&[0, 0]), v(&[0, 0])];
        let trivial = IndexedFiltration { dim: 2, lowest: 0, spaces: vec![] };
        assert!(verify_monodromy_axioms(&zero, &trivial).holds());
    }

    #[test]
    fn unique_filtration_for_jordan_blocks() {
        let n = vec![v(&[0, 1, 0]), v(&[0, 0, 1]), v(&[0, 0, 0])];
        assert_eq!(axiom_filtrations(&n).len(), 1);
        let n = vec![v(&[0, 1, 0, 0]), v(&[0, 0, 0, 0]), v(&[0, 0, 0, 1]), v(&[0, 0, 0, 0])];
        let all = axiom_filtrations(&n);
        assert_eq!(all.len(), 1);
        assert_eq!(filtration_dims(&all[0], 1), vec![2, 2, 4]);
    }

    #[test]
    fn recurrences() {
        let kt: LaurentMatrix = vec![vec![vec![], vec![(-1, qi(1))]], vec![vec![], vec![]]];
        let s = ode_recurrence_solutions(&kt, -8, 8).unwrap();
        assert_eq!(s.solutions.len(), 1);
        assert_eq!(s.obstruction_exponents, vec![qi(0), qi(0)]);
        let half: LaurentMatrix = vec![vec![vec![(-1, Q::new(1.into(), 2.into()))]]];
        let s = ode_recurrence_solutions(&half, -8, 8).unwrap();
        assert!(s.solutions.is_empty());
        assert_eq!(s.obstruction_exponents, vec![Q::new((-1).into(), 2.into())]);
        let zero: LaurentMatrix = vec![vec![vec![]]];
        assert_eq!(ode_recurrence_solutions(&zero, -4, 4).unwrap().solutions.len(), 1);
        let irregular: LaurentMatrix = vec![vec![vec![(-2, qi(1))]]];
        assert!(ode_recurrence_solutions(&irregular, -4, 4).is_err());
    }

    #[test]
    fn weights() {
        assert_eq!(algebraic_weight(&[-5, 1], 5).unwrap(), vec![Some(qi(2))]);
        assert_eq!(algebraic_weight(&[2, 0, 1], 2).unwrap(), vec![Some(qi(1)), Some(qi(1))]);
        assert_eq!(algebraic_weight(&[5, -6, 1], 5).unwrap(), vec![Some(qi(0)), Some(qi(2))]);
        // (x² + 2)(x² + x + 2) at q = 2: four roots of weight 1.
        assert_eq!(algebraic_weight(&[4, 2, 4, 1, 1], 2).unwrap(), vec![Some(qi(1)); 4]);
        // x⁴ − x − 1 has no Weil roots.
        assert!(algebraic_weight(&[-1, -1, 0, 0, 1], 2).unwrap().iter().all(|w| w.is_none()));
    }
}
