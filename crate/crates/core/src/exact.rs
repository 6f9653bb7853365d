//! Exact rational support: conversions from f64, characteristic polynomials,
//! Sturm chains, and certified eigenvalue enclosures for symmetric matrices.
//!
//! Every f64 is a dyadic rational, so Gram matrices `T^t T` built from f64
//! entries are exactly representable and all sign decisions below are exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// Exact conversion; panics on non-finite input (callers validate finiteness).
pub fn rat(x: f64) -> Rat {
    BigRational::from_float(x).expect("finite f64")
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Largest f64 `s >= 0` with `s^2 <= r` (assumes `r >= 0`).
pub fn sqrt_lower(r: &Rat) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let mut s = rat_to_f64(r).sqrt();
    if !s.is_finite() {
        s = f64::MAX;
    }
    while s > 0.0 && &(rat(s) * rat(s)) > r {
        s = s.next_down();
    }
    s.max(0.0)
}

/// Smallest f64 `s` with `s^2 >= r` (assumes `r >= 0`).
pub fn sqrt_upper(r: &Rat) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let mut s = rat_to_f64(r).sqrt();
    if !s.is_finite() {
        return f64::INFINITY;
    }
    while &(rat(s) * rat(s)) < r {
        s = s.next_up();
    }
    s
}

/// Floor of a rational as BigInt.
pub fn rat_floor(r: &Rat) -> BigInt {
    r.floor().to_integer()
}

/// Dense univariate polynomial, ascending coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<Rat>);

impl Poly {
    pub fn zero() -> Self {
        Poly(vec![])
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn trim(mut self) -> Self {
        while self.0.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.0.pop();
        }
        self
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly::zero();
        }
        let coeffs = self
            .0
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * Rat::from_integer(BigInt::from(i)))
            .collect();
        Poly(coeffs).trim()
    }

    /// Remainder of self divided by divisor (exact rational long division).
    pub fn rem(&self, divisor: &Poly) -> Poly {
        assert!(!divisor.is_zero());
        let mut r = self.0.clone();
        let dd = divisor.degree();
        let lead = divisor.0.last().unwrap().clone();
        while r.len() > dd + 1 || (r.len() == dd + 1 && dd == 0) {
            if r.last().map(|c| c.is_zero()).unwrap_or(true) {
                r.pop();
                if r.is_empty() {
                    break;
                }
                continue;
            }
            if r.len() < dd + 1 {
                break;
            }
            let shift = r.len() - 1 - dd;
            let factor = r.last().unwrap() / &lead;
            for (i, c) in divisor.0.iter().enumerate() {
                let idx = shift + i;
                let v = &r[idx] - &factor * c;
                r[idx] = v;
            }
            r.pop();
            if dd == 0 {
                r.clear();
            }
        }
        Poly(r).trim()
    }
}

/// Characteristic polynomial of a square rational matrix via
/// Faddeev-LeVerrier; returns a monic polynomial of degree d.
pub fn char_poly(b: &[Vec<Rat>]) -> Poly {
    let d = b.len();
    let mut coeffs = vec![Rat::zero(); d + 1];
    coeffs[d] = Rat::one();
    // m starts as the identity, c accumulates the trace corrections
    let mut m: Vec<Vec<Rat>> = (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect();
    let mut prev_c = Rat::one();
    for k in 1..=d {
        // m <- B * (m + prev_c * I) for k > 1; for k = 1, m = B
        if k > 1 {
            for i in 0..d {
                let v = &m[i][i] + &prev_c;
                m[i][i] = v;
            }
        }
        let mut bm = vec![vec![Rat::zero(); d]; d];
        for i in 0..d {
            for j in 0..d {
                let mut s = Rat::zero();
                for l in 0..d {
                    s += &b[i][l] * &m[l][j];
                }
                bm[i][j] = s;
            }
        }
        m = bm;
        let trace: Rat = (0..d).map(|i| m[i][i].clone()).sum();
        let c = -trace / Rat::from_integer(BigInt::from(k));
        coeffs[d - k] = c.clone();
        prev_c = c;
    }
    Poly(coeffs)
}

/// Sturm chain of the squarefree part of a polynomial.
pub struct SturmChain {
    chain: Vec<Poly>,
}

impl SturmChain {
    pub fn new(p: &Poly) -> Self {
        // squarefree part: p / gcd(p, p')
        let g = poly_gcd(p, &p.derivative());
        let sf = if g.degree() == 0 {
            p.clone()
        } else {
            poly_div_exact(p, &g)
        };
        let mut chain = vec![sf.clone(), sf.derivative()];
        loop {
            let n = chain.len();
            if chain[n - 1].is_zero() || chain[n - 1].degree() == 0 {
                break;
            }
            let r = chain[n - 2].rem(&chain[n - 1]);
            if r.is_zero() {
                break;
            }
            chain.push(Poly(r.0.iter().map(|c| -c).collect()));
        }
        SturmChain { chain }
    }

    fn sign_changes(&self, x: &Rat) -> usize {
        let mut changes = 0;
        let mut last: i8 = 0;
        for p in &self.chain {
            let v = p.eval(x);
            let s: i8 = if v.is_zero() {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            };
            if s != 0 {
                if last != 0 && s != last {
                    changes += 1;
                }
                last = s;
            }
        }
        changes
    }

    pub fn is_root(&self, x: &Rat) -> bool {
        self.chain[0].eval(x).is_zero()
    }

    /// Number of distinct real roots strictly below `x`, assuming all roots
    /// lie strictly above `anchor`.
    pub fn roots_below(&self, anchor: &Rat, x: &Rat) -> usize {
        debug_assert!(!self.is_root(anchor));
        if self.is_root(x) {
            // count roots in (anchor, x), excluding x itself: nudge left past
            // the root using a radius below the minimal root gap is overkill;
            // instead count (anchor, x] and subtract the root at x
            let va = self.sign_changes(anchor);
            let vx = self.sign_changes(x);
            // Sturm with a root endpoint still counts roots in (anchor, x]
            (va - vx).saturating_sub(1)
        } else {
            self.sign_changes(anchor) - self.sign_changes(x)
        }
    }

    pub fn distinct_roots(&self) -> usize {
        self.chain[0].degree()
    }
}

fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_zero() {
        let r = a.rem(&b);
        a = b;
        b = r;
    }
    // normalize to monic
    if let Some(lead) = a.0.last().cloned() {
        if !lead.is_zero() && !lead.is_one() {
            for c in &mut a.0 {
                *c = &*c / &lead;
            }
        }
    }
    a
}

fn poly_div_exact(a: &Poly, b: &Poly) -> Poly {
    // long division, remainder known to vanish
    let mut r = a.0.clone();
    let dd = b.degree();
    let lead = b.0.last().unwrap().clone();
    let mut q = vec![Rat::zero(); a.0.len().saturating_sub(dd)];
    while r.len() > dd {
        let shift = r.len() - 1 - dd;
        let factor = r.last().unwrap() / &lead;
        q[shift] = factor.clone();
        for (i, c) in b.0.iter().enumerate() {
            let v = &r[shift + i] - &factor * c;
            r[shift + i] = v;
        }
        r.pop();
        while r.last().map(|c| c.is_zero()).unwrap_or(false) {
            r.pop();
        }
    }
    Poly(q).trim()
}

/// Certified enclosures `[lo, hi]` of the smallest and largest real roots of
/// the characteristic polynomial of a symmetric PSD rational matrix.
///
/// Bisection narrows each enclosure until its width is at most `tol`, or the
/// root is hit exactly.
pub struct EigenEnclosure {
    pub min: (Rat, Rat),
    pub max: (Rat, Rat),
}

pub fn eigen_enclosure_psd(b: &[Vec<Rat>], tol: &Rat) -> EigenEnclosure {
    let d = b.len();
    assert!(d >= 1);
    let p = char_poly(b);
    let sturm = SturmChain::new(&p);
    let total = sturm.distinct_roots();
    // Gershgorin upper bound: max_i sum_j |b_ij|
    let mut upper = Rat::zero();
    for row in b {
        let s: Rat = row.iter().map(|c| c.abs()).sum();
        if s > upper {
            upper = s;
        }
    }
    upper += Rat::one();
    let anchor = -Rat::one(); // PSD: all roots >= 0 > -1

    // smallest root: invariant roots_below(lo) == 0, root <= hi
    let mut lo = Rat::zero() - tol.clone();
    let mut hi = upper.clone();
    loop {
        if &(&hi - &lo) <= tol {
            break;
        }
        let m = (&lo + &hi) / Rat::from_integer(BigInt::from(2));
        if sturm.is_root(&m) && sturm.roots_below(&anchor, &m) == 0 {
            lo = m.clone();
            hi = m;
            break;
        }
        if sturm.roots_below(&anchor, &m) >= 1 {
            hi = m;
        } else {
            lo = m;
        }
    }
    let min_enc = (lo, hi);

    // largest root: invariant root in (lo, hi]
    let mut lo = -Rat::one();
    let mut hi = upper;
    loop {
        if &(&hi - &lo) <= tol {
            break;
        }
        let m = (&lo + &hi) / Rat::from_integer(BigInt::from(2));
        let below = sturm.roots_below(&anchor, &m);
        let le = below + usize::from(sturm.is_root(&m));
        if le == total {
            hi = m.clone();
            if sturm.is_root(&m) {
                lo = m;
                break;
            }
        } else {
            lo = m;
        }
    }
    let max_enc = (lo.max(Rat::zero()), hi);
    EigenEnclosure {
        min: (min_enc.0.max(Rat::zero()), min_enc.1),
        max: max_enc,
    }
}

/// Exact comparison of the root set of `char_poly(b)` against a threshold.
/// Returns (roots strictly below t, t is a root, total distinct roots).
pub fn root_position(b: &[Vec<Rat>], t: &Rat) -> (usize, bool, usize) {
    let p = char_poly(b);
    let sturm = SturmChain::new(&p);
    // PSD Gram matrices have all roots >= 0, so -1 sits below every root
    let anchor = -Rat::one();
    let below = sturm.roots_below(&anchor, t);
    (below, sturm.is_root(t), sturm.distinct_roots())
}

/// Exact Gram matrix `T^t T` of an f64 matrix.
pub fn gram(t: &[Vec<f64>]) -> Vec<Vec<Rat>> {
    let d = t.len();
    let tr: Vec<Vec<Rat>> = t
        .iter()
        .map(|row| row.iter().map(|&v| rat(v)).collect())
        .collect();
    let mut g = vec![vec![Rat::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let mut s = Rat::zero();
            for k in 0..d {
                s += &tr[k][i] * &tr[k][j];
            }
            g[i][j] = s;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rmat(rows: &[&[f64]]) -> Vec<Vec<Rat>> {
        rows.iter()
            .map(|r| r.iter().map(|&v| rat(v)).collect())
            .collect()
    }

    #[test]
    fn char_poly_of_diag() {
        let b = rmat(&[&[2.0, 0.0], &[0.0, 3.0]]);
        let p = char_poly(&b);
        // (x-2)(x-3) = x^2 - 5x + 6
        assert_eq!(p.0, vec![rat(6.0), rat(-5.0), rat(1.0)]);
    }

    #[test]
    fn sturm_counts_roots() {
        // (x-1)(x-2)(x-3)
        let p = Poly(vec![rat(-6.0), rat(11.0), rat(-6.0), rat(1.0)]);
        let s = SturmChain::new(&p);
        let anchor = rat(-1.0);
        assert_eq!(s.roots_below(&anchor, &rat(0.5)), 0);
        assert_eq!(s.roots_below(&anchor, &rat(1.5)), 1);
        assert_eq!(s.roots_below(&anchor, &rat(2.5)), 2);
        assert_eq!(s.roots_below(&anchor, &rat(10.0)), 3);
        assert!(s.is_root(&rat(2.0)));
        assert_eq!(s.roots_below(&anchor, &rat(2.0)), 1);
    }

    #[test]
    fn sturm_handles_repeated_roots() {
        // (x-1)^2: squarefree part has one root
        let p = Poly(vec![rat(1.0), rat(-2.0), rat(1.0)]);
        let s = SturmChain::new(&p);
        assert_eq!(s.distinct_roots(), 1);
        assert!(s.is_root(&rat(1.0)));
        assert_eq!(s.roots_below(&rat(-1.0), &rat(5.0)), 1);
    }

    #[test]
    fn eigen_enclosure_diag() {
        let b = rmat(&[&[4.0, 0.0], &[0.0, 9.0]]);
        let enc = eigen_enclosure_psd(&b, &rat(1e-13));
        assert!(enc.min.0 <= rat(4.0) && rat(4.0) <= enc.min.1);
        assert!(enc.max.0 <= rat(9.0) && rat(9.0) <= enc.max.1);
    }

    #[test]
    fn eigen_enclosure_multiplicity() {
        // identity: both roots equal 1
        let b = rmat(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let enc = eigen_enclosure_psd(&b, &rat(1e-13));
        assert!(enc.min.0 <= rat(1.0) && rat(1.0) <= enc.min.1);
        assert!(enc.max.0 <= rat(1.0) && rat(1.0) <= enc.max.1);
        assert!(rat_to_f64(&(&enc.max.1 - &enc.max.0)) <= 1e-12);
    }

    #[test]
    fn sqrt_bounds_are_certified() {
        let r = rat(2.0);
        let lo = sqrt_lower(&r);
        let hi = sqrt_upper(&r);
        assert!(rat(lo) * rat(lo) <= r);
        assert!(rat(hi) * rat(hi) >= r);
        assert!(hi - lo < 1e-15);
    }
}
