//! Exact arithmetic in Z[sqrt(-D)] together with the small integer toolkit
//! (gcds, modular inverses, Legendre symbols, valuations) used everywhere
//! else in the crate.
//!
//! Elements are plain `(re, im)` pairs; the ambient D is carried by a [`Ring`]
//! context value rather than per element. All arithmetic is checked 128-bit:
//! overflow is an error, never a wrap.

use crate::error::{Error, Result};

pub type Int = i128;
/// Exact rational with 128-bit components, used for radii and window scales.
pub type Rat = num_rational::Ratio<i128>;

/// An element a + b*sqrt(-D). Which D is meant comes from the `Ring` context.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct RingElt {
    pub re: Int,
    pub im: Int,
}

impl RingElt {
    pub const ZERO: RingElt = RingElt { re: 0, im: 0 };
    pub const ONE: RingElt = RingElt { re: 1, im: 0 };

    pub fn new(re: Int, im: Int) -> Self {
        RingElt { re, im }
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }
}

/// Arithmetic context for Z[sqrt(-D)], D squarefree and positive.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Ring {
    pub d: Int,
}

impl Ring {
    pub fn new(d: Int) -> Result<Ring> {
        if d < 1 {
            return Err(Error::Invalid(format!("ring parameter must be >= 1, got {d}")));
        }
        if !is_squarefree(d) {
            return Err(Error::Invalid(format!("ring parameter must be squarefree, got {d}")));
        }
        Ok(Ring { d })
    }

    pub fn elt(&self, re: Int, im: Int) -> RingElt {
        RingElt { re, im }
    }

    pub fn add(&self, x: RingElt, y: RingElt) -> Result<RingElt> {
        Ok(RingElt {
            re: x.re.checked_add(y.re).ok_or(Error::Overflow("ring add"))?,
            im: x.im.checked_add(y.im).ok_or(Error::Overflow("ring add"))?,
        })
    }

    pub fn sub(&self, x: RingElt, y: RingElt) -> Result<RingElt> {
        Ok(RingElt {
            re: x.re.checked_sub(y.re).ok_or(Error::Overflow("ring sub"))?,
            im: x.im.checked_sub(y.im).ok_or(Error::Overflow("ring sub"))?,
        })
    }

    pub fn neg(&self, x: RingElt) -> Result<RingElt> {
        Ok(RingElt {
            re: x.re.checked_neg().ok_or(Error::Overflow("ring neg"))?,
            im: x.im.checked_neg().ok_or(Error::Overflow("ring neg"))?,
        })
    }

    /// (a + b w)(c + e w) with w^2 = -D: real part ac - D be, imag part ae + bc.
    pub fn mul(&self, x: RingElt, y: RingElt) -> Result<RingElt> {
        let ac = x.re.checked_mul(y.re).ok_or(Error::Overflow("ring mul"))?;
        let be = x.im.checked_mul(y.im).ok_or(Error::Overflow("ring mul"))?;
        let dbe = self.d.checked_mul(be).ok_or(Error::Overflow("ring mul"))?;
        let ae = x.re.checked_mul(y.im).ok_or(Error::Overflow("ring mul"))?;
        let bc = x.im.checked_mul(y.re).ok_or(Error::Overflow("ring mul"))?;
        Ok(RingElt {
            re: ac.checked_sub(dbe).ok_or(Error::Overflow("ring mul"))?,
            im: ae.checked_add(bc).ok_or(Error::Overflow("ring mul"))?,
        })
    }

    pub fn conj(&self, x: RingElt) -> RingElt {
        RingElt { re: x.re, im: -x.im }
    }

    /// norm(a + b sqrt(-D)) = a^2 + D b^2, a nonnegative rational integer.
    pub fn norm(&self, x: RingElt) -> Result<Int> {
        let a2 = x.re.checked_mul(x.re).ok_or(Error::Overflow("ring norm"))?;
        let b2 = x.im.checked_mul(x.im).ok_or(Error::Overflow("ring norm"))?;
        let db2 = self.d.checked_mul(b2).ok_or(Error::Overflow("ring norm"))?;
        a2.checked_add(db2).ok_or(Error::Overflow("ring norm"))
    }

    /// Componentwise reduction of (re, im) into [0, q).
    pub fn reduce(&self, x: RingElt, q: Int) -> RingElt {
        debug_assert!(q >= 1, "modulus must be positive");
        RingElt {
            re: x.re.rem_euclid(q),
            im: x.im.rem_euclid(q),
        }
    }
}

/// The four Z-invariants of the row (c, d): the gcd of the 2x2 minors of the
/// lattice spanned by c, c*w, d, d*w decides whether the row extends to a
/// determinant-1 matrix. Returns [norm(c), norm(d), c1 d1 + D c2 d2, c1 d2 - c2 d1].
pub fn row_minors(ring: Ring, c: RingElt, d: RingElt) -> Result<[Int; 4]> {
    let nc = ring.norm(c)?;
    let nd = ring.norm(d)?;
    let m1 = c
        .re
        .checked_mul(d.re)
        .and_then(|t| {
            c.im.checked_mul(d.im)
                .and_then(|u| u.checked_mul(ring.d))
                .and_then(|u| t.checked_add(u))
        })
        .ok_or(Error::Overflow("row minors"))?;
    let m2 = c
        .re
        .checked_mul(d.im)
        .and_then(|t| c.im.checked_mul(d.re).and_then(|u| t.checked_sub(u)))
        .ok_or(Error::Overflow("row minors"))?;
    Ok([nc, nd, m1, m2])
}

/// Whether (c, d) is the bottom row of some determinant-1 matrix over the ring,
/// i.e. 1 lies in the ideal (c, d). Decided by the minor gcd being 1.
pub fn unimodular_row(ring: Ring, c: RingElt, d: RingElt) -> Result<bool> {
    let m = row_minors(ring, c, d)?;
    Ok(gcd4(m) == 1)
}

/// Row completability in the residue ring mod q: the minor gcd must be coprime
/// to q.
pub fn unimodular_row_mod(ring: Ring, c: RingElt, d: RingElt, q: Int) -> Result<bool> {
    debug_assert!(q >= 1);
    let m = row_minors(ring, c, d)?;
    Ok(gcd_i(gcd4(m), q) == 1)
}

fn gcd4(m: [Int; 4]) -> Int {
    gcd_i(gcd_i(m[0], m[1]), gcd_i(m[2], m[3]))
}

// ---------------------------------------------------------------------------
// Rational-integer helpers.
// ---------------------------------------------------------------------------

pub fn gcd_i(a: Int, b: Int) -> Int {
    num_integer::gcd(a, b)
}

/// Extended gcd: returns (g, x, y) with a x + b y = g = gcd(a, b), g >= 0.
pub fn ext_gcd(a: Int, b: Int) -> (Int, Int, Int) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        // a = b*floor + r with r = a.rem_euclid(b)
        let floor = (a - a.rem_euclid(b)) / b;
        (g, y, x - floor * y)
    }
}

/// Inverse of a mod m (m >= 1), in [0, m), or None when gcd(a, m) != 1.
pub fn mod_inv(a: Int, m: Int) -> Option<Int> {
    debug_assert!(m >= 1);
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    if g == 1 {
        Some(x.rem_euclid(m))
    } else {
        None
    }
}

/// base^exp mod m for m small enough that (m-1)^2 fits i128.
pub fn mod_pow(base: Int, mut exp: u64, m: Int) -> Int {
    debug_assert!(m >= 1);
    let mut b = base.rem_euclid(m);
    let mut acc: Int = 1 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc
}

/// Legendre symbol (a|p) for odd prime p, by Euler's criterion.
pub fn legendre(a: Int, p: u64) -> i32 {
    debug_assert!(p > 2 && is_prime(p), "legendre wants an odd prime, got {p}");
    let pi = p as Int;
    let r = a.rem_euclid(pi);
    if r == 0 {
        return 0;
    }
    let e = mod_pow(r, (p - 1) / 2, pi);
    if e == 1 {
        1
    } else {
        -1
    }
}

/// p-adic valuation of n != 0.
pub fn valuation(mut n: Int, p: u64) -> u32 {
    debug_assert!(n != 0, "valuation of 0 is infinite");
    debug_assert!(p >= 2);
    let pi = p as Int;
    let mut v = 0;
    while n % pi == 0 {
        n /= pi;
        v += 1;
    }
    v
}

pub fn is_squarefree(n: Int) -> bool {
    if n < 1 {
        return false;
    }
    let mut m = n;
    let mut p: Int = 2;
    while p * p <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            return false;
        }
        p += 1;
    }
    true
}

/// Trial-division factorization, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    debug_assert!(n >= 1);
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut k = 0;
            while n % p == 0 {
                n /= p;
                k += 1;
            }
            out.push((p, k));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    let mut sieve = vec![true; (n as usize) + 1];
    let mut out = Vec::new();
    for p in 2..=n as usize {
        if sieve[p] {
            out.push(p as u64);
            let mut m = p * p;
            while m <= n as usize {
                sieve[m] = false;
                m += p;
            }
        }
    }
    out
}

/// Floor of sqrt(n) for n >= 0.
pub fn isqrt(n: Int) -> Int {
    debug_assert!(n >= 0);
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as Int;
    while x > 0 && x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Euler's totient for small q.
pub fn euler_phi(q: u64) -> u64 {
    let mut out = q;
    for (p, _) in factorize(q) {
        out = out / p * (p - 1);
    }
    out
}

/// Rational to float; exact rationals carry the precision, conversion is the
/// last step.
pub fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_ring(d: Int) -> Ring {
        Ring::new(d).expect("test ring must construct")
    }

    #[test]
    fn ring_rejects_bad_parameters() {
        assert!(Ring::new(0).is_err(), "0 is not a valid ring parameter");
        assert!(Ring::new(-3).is_err(), "negative parameter must be rejected");
        assert!(Ring::new(4).is_err(), "4 is not squarefree");
        assert!(Ring::new(12).is_err(), "12 is not squarefree");
        assert!(Ring::new(10).is_ok(), "10 = 2*5 is squarefree");
    }

    #[test]
    fn mul_conj_gives_norm() {
        let r = small_ring(1);
        let x = r.elt(1, 1);
        let prod = r.mul(x, r.conj(x)).unwrap();
        assert_eq!(prod, r.elt(2, 0), "x * conj(x) must be the norm as a real element");
        assert_eq!(r.norm(x).unwrap(), 2);

        let r2 = small_ring(2);
        assert_eq!(r2.norm(r2.elt(2, 3)).unwrap(), 22, "4 + 2*9");
    }

    #[test]
    fn reduce_into_range() {
        let r = small_ring(1);
        assert_eq!(r.reduce(r.elt(5, 7), 3), r.elt(2, 1));
        assert_eq!(r.reduce(r.elt(-1, -5), 3), r.elt(2, 1));
        assert_eq!(r.reduce(r.elt(123, -456), 1), r.elt(0, 0), "everything is 0 mod 1");
    }

    #[test]
    fn overflow_is_an_error_not_a_wrap() {
        let r = small_ring(1);
        let big = r.elt(Int::MAX, 0);
        assert!(matches!(r.add(big, RingElt::ONE), Err(Error::Overflow(_))));
        assert!(matches!(r.norm(big), Err(Error::Overflow(_))));
    }

    #[test]
    fn ext_gcd_and_inverse() {
        for (a, m) in [(3, 7), (10, 21), (-5, 13), (122, 455)] {
            let (g, x, y) = ext_gcd(a, m);
            assert_eq!(a * x + m * y, g, "Bezout identity for ({a},{m})");
            assert_eq!(g, gcd_i(a, m).abs());
        }
        assert_eq!(mod_inv(3, 7), Some(5));
        assert_eq!(mod_inv(6, 9), None, "gcd 3 has no inverse");
        for a in 1..97 {
            if let Some(inv) = mod_inv(a, 97) {
                assert_eq!(a * inv % 97, 1);
            }
        }
    }

    #[test]
    fn legendre_matches_square_table() {
        for p in [3u64, 5, 7, 11, 13, 17] {
            let pi = p as Int;
            let mut squares = vec![false; p as usize];
            for x in 1..pi {
                squares[(x * x % pi) as usize] = true;
            }
            for a in 0..pi {
                let want = if a == 0 {
                    0
                } else if squares[a as usize] {
                    1
                } else {
                    -1
                };
                assert_eq!(legendre(a, p), want, "legendre({a}|{p})");
            }
        }
    }

    #[test]
    fn valuation_and_factorization() {
        assert_eq!(valuation(24, 2), 3);
        assert_eq!(valuation(24, 3), 1);
        assert_eq!(valuation(-18, 3), 2);
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(1), vec![]);
        assert_eq!(primes_up_to(13), vec![2, 3, 5, 7, 11, 13]);
        assert_eq!(euler_phi(60), 16);
    }

    #[test]
    fn isqrt_exact_at_boundaries() {
        for n in 0..2000 {
            let s = isqrt(n);
            assert!(s * s <= n && (s + 1) * (s + 1) > n, "isqrt({n}) = {s}");
        }
    }

    #[test]
    fn unimodular_rows_match_small_completion_search() {
        // Independent oracle: search a generous box of (a, b) for a d - b c = 1.
        // In the Euclidean cases D = 1, 2 a completion, when one exists, exists
        // with entries comparable to the row itself, so the box is conclusive.
        for d in [1, 2] {
            let ring = small_ring(d);
            for c1 in -3..=3 {
                for c2 in -3..=3 {
                    for d1 in -3..=3 {
                        for d2 in -3..=3 {
                            let c = ring.elt(c1, c2);
                            let dd = ring.elt(d1, d2);
                            let fast = unimodular_row(ring, c, dd).unwrap();
                            let mut found = false;
                            'search: for a1 in -8..=8 {
                                for a2 in -8..=8 {
                                    for b1 in -8..=8 {
                                        for b2 in -8..=8 {
                                            let a = ring.elt(a1, a2);
                                            let b = ring.elt(b1, b2);
                                            let det = ring
                                                .sub(ring.mul(a, dd).unwrap(), ring.mul(b, c).unwrap())
                                                .unwrap();
                                            if det == RingElt::ONE {
                                                found = true;
                                                break 'search;
                                            }
                                        }
                                    }
                                }
                            }
                            assert_eq!(
                                fast, found,
                                "minor-gcd test disagrees with completion search at D={d}, c=({c1},{c2}), d=({d1},{d2})"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn unimodular_row_mod_matches_direct_mod_search() {
        for d in [1, 2, 3] {
            let ring = small_ring(d);
            for q in [2 as Int, 3, 4, 5] {
                for c1 in 0..q {
                    for c2 in 0..q {
                        for d1 in 0..q {
                            for d2 in 0..q {
                                let c = ring.elt(c1, c2);
                                let dd = ring.elt(d1, d2);
                                let fast = unimodular_row_mod(ring, c, dd, q).unwrap();
                                let mut found = false;
                                'mods: for a1 in 0..q {
                                    for a2 in 0..q {
                                        for b1 in 0..q {
                                            for b2 in 0..q {
                                                let a = ring.elt(a1, a2);
                                                let b = ring.elt(b1, b2);
                                                let det = ring
                                                    .sub(
                                                        ring.mul(a, dd).unwrap(),
                                                        ring.mul(b, c).unwrap(),
                                                    )
                                                    .unwrap();
                                                if ring.reduce(det, q) == RingElt::ONE {
                                                    found = true;
                                                    break 'mods;
                                                }
                                            }
                                        }
                                    }
                                }
                                assert_eq!(
                                    fast, found,
                                    "mod-{q} unimodularity mismatch at D={d}, c=({c1},{c2}), d=({d1},{d2})"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(
            d in prop::sample::select(vec![1 as Int, 2, 3, 5, 7, 10]),
            a in -1000i128..1000, b in -1000i128..1000,
            c in -1000i128..1000, e in -1000i128..1000,
        ) {
            let ring = small_ring(d);
            let x = ring.elt(a, b);
            let y = ring.elt(c, e);
            let xy = ring.mul(x, y).unwrap();
            prop_assert_eq!(
                ring.norm(xy).unwrap(),
                ring.norm(x).unwrap() * ring.norm(y).unwrap(),
                "norm(xy) != norm(x)norm(y)"
            );
        }

        #[test]
        fn conj_is_involutive_and_additive(
            d in prop::sample::select(vec![1 as Int, 2, 3, 5]),
            a in -1000i128..1000, b in -1000i128..1000,
            c in -1000i128..1000, e in -1000i128..1000,
        ) {
            let ring = small_ring(d);
            let x = ring.elt(a, b);
            let y = ring.elt(c, e);
            prop_assert_eq!(ring.conj(ring.conj(x)), x);
            let lhs = ring.conj(ring.add(x, y).unwrap());
            let rhs = ring.add(ring.conj(x), ring.conj(y)).unwrap();
            prop_assert_eq!(lhs, rhs);
            let lhs = ring.conj(ring.mul(x, y).unwrap());
            let rhs = ring.mul(ring.conj(x), ring.conj(y)).unwrap();
            prop_assert_eq!(lhs, rhs, "conj must be a ring homomorphism");
        }

        #[test]
        fn reduction_is_a_ring_homomorphism(
            d in prop::sample::select(vec![1 as Int, 2, 5]),
            q in 1i128..50,
            a in -500i128..500, b in -500i128..500,
            c in -500i128..500, e in -500i128..500,
        ) {
            let ring = small_ring(d);
            let x = ring.elt(a, b);
            let y = ring.elt(c, e);
            let sum_then_mod = ring.reduce(ring.add(x, y).unwrap(), q);
            let mod_then_sum = ring.reduce(
                ring.add(ring.reduce(x, q), ring.reduce(y, q)).unwrap(), q);
            prop_assert_eq!(sum_then_mod, mod_then_sum);
            let mul_then_mod = ring.reduce(ring.mul(x, y).unwrap(), q);
            let mod_then_mul = ring.reduce(
                ring.mul(ring.reduce(x, q), ring.reduce(y, q)).unwrap(), q);
            prop_assert_eq!(mul_then_mod, mod_then_mul);
        }

        #[test]
        fn shifted_reduction_is_stable(
            q in 1i128..40,
            a in -300i128..300, b in -300i128..300,
            ka in -5i128..5, kb in -5i128..5,
        ) {
            let ring = small_ring(1);
            let x = ring.elt(a, b);
            let shifted = ring.elt(a + ka * q, b + kb * q);
            prop_assert_eq!(ring.reduce(x, q), ring.reduce(shifted, q));
        }
    }
}
