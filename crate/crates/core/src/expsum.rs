//! Exponential sums: Ramanujan sums, quadratic Gauss sums, diagonal
//! two-variable sums, the normalized per-element form sums, and the paired
//! sum with its two-factor closed form.
//!
//! Every closed form here is paired with a direct-summation oracle of cost
//! O(q) or O(q^2); the acceptance battery sweeps them against each other.
//! Complex arithmetic is f64; closed forms are exact up to rounding in exp().

use crate::error::{Error, Result};
use crate::qform::QuadForm;
use crate::ring::{factorize, gcd_i, legendre, mod_inv, valuation, Int};
use num_complex::Complex64;
use std::f64::consts::TAU;

/// e(num/q) = exp(2 pi i num / q).
pub fn e_frac(num: Int, q: Int) -> Complex64 {
    debug_assert!(q >= 1);
    let r = num.rem_euclid(q);
    let angle = TAU * (r as f64) / (q as f64);
    Complex64::new(angle.cos(), angle.sin())
}

/// Reduced residues mod q. For q = 1 this is the single residue 0, matching
/// the convention that the empty-modulus sum has one term.
pub fn reduced_residues(q: Int) -> Vec<Int> {
    (0..q.max(1)).filter(|&r| gcd_i(r, q) == 1).collect()
}

/// Valuation of z as a residue mod p^nu: min(v_p(z), nu), with the residue 0
/// assigned the full exponent nu. This is the truncation degree entering the
/// chi indicators; the 0 convention keeps them well-defined for vanishing
/// linear coefficients.
pub fn deg_pnu(z: Int, p: u64, nu: u32) -> u32 {
    let q = (p as Int).pow(nu);
    let r = z.rem_euclid(q);
    if r == 0 {
        nu
    } else {
        valuation(r, p)
    }
}

// ---------------------------------------------------------------------------
// Ramanujan sums.
// ---------------------------------------------------------------------------

/// c_q(m) by the multiplicative closed form: for p^k || q the factor is
/// phi(p^k) when p^k | m, -p^{k-1} when p^{k-1} || m, and 0 otherwise.
pub fn ramanujan_sum(q: u64, m: Int) -> Int {
    debug_assert!(q >= 1);
    let mut out: Int = 1;
    for (p, k) in factorize(q) {
        let pk1 = (p as Int).pow(k - 1);
        // p-divisibility depth of m, with m = 0 deeper than any k.
        let v = if m == 0 { u32::MAX } else { valuation(m, p) };
        let factor = if v >= k {
            pk1 * (p as Int - 1)
        } else if v == k - 1 {
            -pk1
        } else {
            0
        };
        out *= factor;
        if out == 0 {
            return 0;
        }
    }
    out
}

/// Direct sum over reduced residues; the float oracle for `ramanujan_sum`.
pub fn ramanujan_sum_direct(q: u64, m: Int) -> Complex64 {
    let qi = q as Int;
    reduced_residues(qi)
        .into_iter()
        .map(|r| e_frac(r * m.rem_euclid(qi), qi))
        .sum()
}

// ---------------------------------------------------------------------------
// Quadratic Gauss sums, odd prime power modulus.
// ---------------------------------------------------------------------------

/// 1 if m = 1 mod 4, else the imaginary unit; the quarter-turn factor of the
/// odd Gauss sum.
fn quarter_turn(m: Int) -> Complex64 {
    debug_assert!(m % 2 != 0);
    if m.rem_euclid(4) == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, 1.0)
    }
}

/// Closed form of sum over x mod p^nu of e(a x^2 + b x / p^nu), p odd.
///
/// Writing k = v_p(a) (clamped at nu), the sum vanishes unless p^k | b; for
/// k = nu it degenerates to p^nu [p^nu | b]. Otherwise with q' = p^{nu-k},
/// a' = a/p^k, b' = b/p^k:
///   p^{(nu+k)/2} * quarter_turn(q') * legendre(a'|p)^{nu-k}
///     * e(-b'^2 * inv(4 a') / q').
pub fn gauss_quad(p: u64, nu: u32, a: Int, b: Int) -> Complex64 {
    debug_assert!(p > 2 && nu >= 1, "odd prime power modulus required");
    let q = (p as Int).pow(nu);
    let a_mod = a.rem_euclid(q);
    if a_mod == 0 {
        return if b.rem_euclid(q) == 0 {
            Complex64::new(q as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    let k = valuation(a_mod, p);
    let pk = (p as Int).pow(k);
    if b.rem_euclid(pk) != 0 {
        return Complex64::new(0.0, 0.0);
    }
    let qp = (p as Int).pow(nu - k);
    let ap = (a_mod / pk).rem_euclid(qp);
    let bp = (b.rem_euclid(q) / pk).rem_euclid(qp);
    let magnitude = (p as f64).powi((nu + k) as i32).sqrt();
    let leg = if (nu - k) % 2 == 1 {
        legendre(ap, p) as f64
    } else {
        1.0
    };
    let inv4a = mod_inv(4 * ap, qp).expect("4a' is a unit mod an odd prime power");
    let t = (bp * bp).rem_euclid(qp) * inv4a;
    magnitude * leg * quarter_turn(qp) * e_frac(-t, qp)
}

/// O(q) direct oracle for `gauss_quad` (any modulus).
pub fn gauss_quad_direct(q: Int, a: Int, b: Int) -> Complex64 {
    debug_assert!(q >= 1);
    let am = a.rem_euclid(q);
    let bm = b.rem_euclid(q);
    (0..q)
        .map(|x| e_frac((am * x).rem_euclid(q) * x + bm * x, q))
        .sum()
}

/// Direct evaluation at an even prime power together with the trivial-bound
/// report: |S| <= 2^nu is asserted only when 2^{nu-1} | a (the regime the
/// truncated closed theory covers); other a are reported unasserted.
#[derive(Clone, Copy, Debug)]
pub struct EvenGaussReport {
    pub value: Complex64,
    /// Whether 2^{nu-1} divides a, i.e. the bound's indicator is on.
    pub indicator: bool,
    /// |value| / 2^nu, always finite.
    pub ratio: f64,
    /// Some(check) when the indicator is on; None means nothing is asserted.
    pub within_bound: Option<bool>,
}

pub fn gauss_even_bound(nu: u32, a: Int, b: Int) -> EvenGaussReport {
    debug_assert!(nu >= 1);
    let q = (1 as Int) << nu;
    let value = gauss_quad_direct(q, a, b);
    let half = (1 as Int) << (nu - 1);
    let indicator = a.rem_euclid(half) == 0;
    let ratio = value.norm() / q as f64;
    let within_bound = if indicator {
        Some(value.norm() <= q as f64 + 1e-9)
    } else {
        None
    };
    EvenGaussReport {
        value,
        indicator,
        ratio,
        within_bound,
    }
}

// ---------------------------------------------------------------------------
// Diagonal two-variable sums.
// ---------------------------------------------------------------------------

/// Closed evaluation of sum over x, y mod q of e((A x^2 + B y^2 + C x + D y)/q).
///
/// The sum splits across coprime moduli with the quadratic coefficients
/// twisted by the complementary factor (CRT substitution x = sum x_i q/q_i),
/// and each odd prime power separates into two one-variable Gauss sums; the
/// 2-part is summed directly.
pub fn diag_quad_sum(q: Int, a: Int, b: Int, c: Int, d: Int) -> Result<Complex64> {
    if q < 1 {
        return Err(Error::Invalid(format!("modulus must be >= 1, got {q}")));
    }
    let mut out = Complex64::new(1.0, 0.0);
    for (p, k) in factorize(q as u64) {
        let pe = (p as Int).pow(k);
        let co = q / pe;
        let (ta, tb) = ((a * co).rem_euclid(pe), (b * co).rem_euclid(pe));
        let factor = if p == 2 {
            // Direct separable summation; 2-power closed forms are only
            // bounds, not identities.
            let sx: Complex64 = (0..pe).map(|x| e_frac((ta * x + c) * x, pe)).sum();
            let sy: Complex64 = (0..pe).map(|y| e_frac((tb * y + d) * y, pe)).sum();
            sx * sy
        } else {
            gauss_quad(p, k, ta, c) * gauss_quad(p, k, tb, d)
        };
        out *= factor;
    }
    Ok(out)
}

/// Honest O(q^2) double-loop oracle for `diag_quad_sum`; shares no algebraic
/// step (no separation, no multiplicativity) with the closed path.
pub fn diag_quad_sum_direct(q: Int, a: Int, b: Int, c: Int, d: Int) -> Complex64 {
    debug_assert!(q >= 1);
    let (am, bm, cm, dm) = (
        a.rem_euclid(q),
        b.rem_euclid(q),
        c.rem_euclid(q),
        d.rem_euclid(q),
    );
    let mut s = Complex64::new(0.0, 0.0);
    for x in 0..q {
        let xpart = ((am * x).rem_euclid(q) * x + cm * x).rem_euclid(q);
        for y in 0..q {
            let val = xpart + (bm * y).rem_euclid(q) * y + dm * y;
            s += e_frac(val, q);
        }
    }
    s
}

// ---------------------------------------------------------------------------
// Normalized per-element form sums.
// ---------------------------------------------------------------------------

/// (1/q^2) sum over x, y mod q of
/// e((r (A x^2 + B y^2 + C x + D y) - xi x - zeta y)/q).
/// The constant coefficient of the form is deliberately excluded; it enters
/// the paired sum as a separate phase.
pub fn form_exp_sum(q: Int, f: &QuadForm, r: Int, xi: Int, zeta: Int) -> Complex64 {
    debug_assert!(q >= 1);
    debug_assert!(gcd_i(r, q) == 1, "r must be a reduced residue");
    let (a, b, c, d) = (
        (f.a * r).rem_euclid(q),
        (f.b * r).rem_euclid(q),
        (f.c * r - xi).rem_euclid(q),
        (f.d * r - zeta).rem_euclid(q),
    );
    let mut s = Complex64::new(0.0, 0.0);
    for x in 0..q {
        let xpart = ((a * x).rem_euclid(q) * x + c * x).rem_euclid(q);
        for y in 0..q {
            s += e_frac(xpart + (b * y).rem_euclid(q) * y + d * y, q);
        }
    }
    s / (q as f64 * q as f64)
}

/// Trivial-bound trichotomy for `form_exp_sum`:
/// with q | A (hence q | B for height forms) the sum is an indicator pair,
/// otherwise it is bounded by gcd(q,A)^{1/2} gcd(q,B)^{1/2} / q.
pub fn form_exp_sum_bound(q: Int, f: &QuadForm, r: Int, xi: Int, zeta: Int) -> f64 {
    debug_assert!(q >= 1);
    if f.a.rem_euclid(q) == 0 && f.b.rem_euclid(q) == 0 {
        if (f.c * r - xi).rem_euclid(q) == 0 && (f.d * r - zeta).rem_euclid(q) == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (gcd_i(q, f.a) as f64).sqrt() * (gcd_i(q, f.b) as f64).sqrt() / q as f64
    }
}

// ---------------------------------------------------------------------------
// Paired sums.
// ---------------------------------------------------------------------------

/// Direct paired sum: sum over reduced r mod q of
/// S_f(q,r,xi,zeta) * conj(S_g(q,r,xi',zeta')) * e((E_f - E_g) r / q).
pub fn paired_form_sum(
    q: Int,
    f: &QuadForm,
    xi: Int,
    zeta: Int,
    g: &QuadForm,
    xi2: Int,
    zeta2: Int,
) -> Complex64 {
    reduced_residues(q)
        .into_iter()
        .map(|r| {
            form_exp_sum(q, f, r, xi, zeta)
                * form_exp_sum(q, g, r, xi2, zeta2).conj()
                * e_frac((f.e - g.e) * r, q)
        })
        .sum()
}

/// The two factors of the paired-sum closed form at an odd prime power.
#[derive(Clone, Copy, Debug)]
pub struct PairedFactors {
    /// r-independent factor: magnitudes, quarter-turn signs, Legendre symbol
    /// of the ring discriminant, and the two linear-shift phases.
    pub first: Complex64,
    /// Reduced-residue sum with the quadratic-shift phases and the chi cutoff.
    pub second: Complex64,
    pub product: Complex64,
    /// Number of reduced residues surviving the chi indicator.
    pub chi_support: usize,
}

/// Closed two-factor evaluation of the paired sum for q = p^nu, p odd, p not
/// dividing the ring parameter, and p^nu dividing neither leading
/// coefficient. Callers outside these preconditions get an error and must
/// use the direct path.
pub fn paired_factors(
    d_ring: Int,
    p: u64,
    nu: u32,
    f: &QuadForm,
    xi: Int,
    zeta: Int,
    g: &QuadForm,
    xi2: Int,
    zeta2: Int,
) -> Result<PairedFactors> {
    if p == 2 {
        return Err(Error::Invalid("paired closed form needs an odd prime".into()));
    }
    if d_ring.rem_euclid(p as Int) == 0 {
        return Err(Error::Invalid(
            "paired closed form needs the prime coprime to the ring parameter".into(),
        ));
    }
    let q = (p as Int).pow(nu);
    if f.a.rem_euclid(q) == 0 || g.a.rem_euclid(q) == 0 {
        return Err(Error::Invalid(
            "paired closed form needs q dividing neither leading coefficient".into(),
        ));
    }
    let k = valuation(f.a.rem_euclid(q), p);
    let k2 = valuation(g.a.rem_euclid(q), p);
    let l0 = (p as Int).pow(k);
    let l02 = (p as Int).pow(k2);

    // First factor: the r-independent pieces of the four Gauss sums. The
    // quarter-turn enters squared per element (once for x, once for y), so it
    // contributes a real sign; the two Legendre symbols per element collapse
    // to the symbol of the ring parameter since squares of units drop out.
    let magnitude = (p as f64).powi(k as i32 + k2 as i32 - 2 * nu as i32);
    let qt = quarter_turn((p as Int).pow(nu - k)) * quarter_turn((p as Int).pow(nu - k2));
    let sign = (qt * qt).re;
    let leg_pow = (nu - k) + (nu - k2);
    let leg = if leg_pow % 2 == 1 {
        legendre(d_ring, p) as f64
    } else {
        1.0
    };

    // Linear-shift phases. B/l0 is a unit mod q by construction.
    let shift_phase = |ff: &QuadForm, l: Int, x: Int, z: Int| -> Option<Int> {
        let num = d_ring * ff.c * x + ff.d * z;
        if num.rem_euclid(l) != 0 {
            return None;
        }
        let inv = mod_inv(2 * (ff.b / l), q)?;
        Some((inv * ((num / l).rem_euclid(q))).rem_euclid(q))
    };
    let phase1 = shift_phase(f, l0, xi, zeta);
    let phase2 = shift_phase(g, l02, xi2, zeta2);

    // Second factor: reduced-residue sum with the chi truncation-depth cutoff
    // and the quadratic-shift phases.
    let mut second = Complex64::new(0.0, 0.0);
    let mut chi_support = 0usize;
    let (c1, d1, c2, d2) = (f.c, f.d, g.c, g.d);
    for r in reduced_residues(q) {
        let chi = deg_pnu(r * c1 - xi, p, nu) >= k
            && deg_pnu(r * d1 - zeta, p, nu) >= k
            && deg_pnu(r * c2 - xi2, p, nu) >= k2
            && deg_pnu(r * d2 - zeta2, p, nu) >= k2;
        if !chi {
            continue;
        }
        chi_support += 1;
        let quad_phase = |ff: &QuadForm, l: Int, x: Int, z: Int| -> Int {
            let num = z * z + d_ring * x * x;
            debug_assert!(
                num.rem_euclid(l) == 0,
                "chi support forces the quadratic shift to be divisible"
            );
            let inv = mod_inv((4 * r).rem_euclid(q) * ((ff.b / l).rem_euclid(q)), q)
                .expect("unit by construction");
            (inv * ((num / l).rem_euclid(q))).rem_euclid(q)
        };
        let b1 = quad_phase(f, l0, xi, zeta);
        let b2 = quad_phase(g, l02, xi2, zeta2);
        second += e_frac((f.a - g.a) * r, q) * e_frac(-b1 + b2, q);
    }

    let first = match (phase1, phase2) {
        (Some(a1), Some(a2)) => {
            magnitude * sign * leg * e_frac(a1, q) * e_frac(-a2, q)
        }
        // Linear shift not divisible: chi is empty and the product vanishes.
        _ => Complex64::new(0.0, 0.0),
    };
    if phase1.is_none() || phase2.is_none() {
        debug_assert_eq!(chi_support, 0, "indivisible shift must empty the chi support");
    }
    Ok(PairedFactors {
        first,
        second,
        product: first * second,
        chi_support,
    })
}

/// Splits the paired sum across coprime moduli. The linear twists are
/// multiplied by the inverse of the complementary modulus (the plain product
/// without twisting is false once any linear twist is nonzero).
/// Returns (value at q1*q2, product of twisted factors).
pub fn paired_split(
    q1: Int,
    q2: Int,
    f: &QuadForm,
    xi: Int,
    zeta: Int,
    g: &QuadForm,
    xi2: Int,
    zeta2: Int,
) -> Result<(Complex64, Complex64)> {
    if gcd_i(q1, q2) != 1 {
        return Err(Error::Invalid(format!("moduli must be coprime, got {q1}, {q2}")));
    }
    let lhs = paired_form_sum(q1 * q2, f, xi, zeta, g, xi2, zeta2);
    let tw = |v: Int, qq: Int, other_inv: Int| (v * other_inv).rem_euclid(qq);
    let rhs = if q1 == 1 {
        paired_form_sum(q2, f, xi, zeta, g, xi2, zeta2)
    } else if q2 == 1 {
        paired_form_sum(q1, f, xi, zeta, g, xi2, zeta2)
    } else {
        let q2_inv = mod_inv(q2, q1).expect("coprime");
        let q1_inv = mod_inv(q1, q2).expect("coprime");
        paired_form_sum(
            q1,
            f,
            tw(xi, q1, q2_inv),
            tw(zeta, q1, q2_inv),
            g,
            tw(xi2, q1, q2_inv),
            tw(zeta2, q1, q2_inv),
        ) * paired_form_sum(
            q2,
            f,
            tw(xi, q2, q1_inv),
            tw(zeta, q2, q1_inv),
            g,
            tw(xi2, q2, q1_inv),
            tw(zeta2, q2, q1_inv),
        )
    };
    Ok((lhs, rhs))
}

// ---------------------------------------------------------------------------
// Bound shapes for the paired sum (report only).
// ---------------------------------------------------------------------------

/// Bound shape for distinct leading coefficients:
/// (q,A)(q,A') (q,A-A')^{1/4} q^{-5/4}.
pub fn paired_bound_neq(q: Int, a: Int, a2: Int) -> f64 {
    let g1 = gcd_i(q, a) as f64;
    let g2 = gcd_i(q, a2) as f64;
    let g3 = gcd_i(q, a - a2) as f64;
    g1 * g2 * g3.powf(0.25) * (q as f64).powf(-1.25)
}

/// Bound shape for equal leading coefficients:
/// (q,A)^2 (q,t)^{1/4} q^{-5/4}, where t collects the quadratic-shift
/// difference w = D xi^2 + zeta^2 - D xi'^2 - zeta'^2 with its p-valuations
/// clamped from below by those of l0 = (q, D A) and from above by q. Unit
/// inverse factors never move gcds with q, so they are dropped.
pub fn paired_bound_eq(
    q: Int,
    d_ring: Int,
    a: Int,
    xi: Int,
    zeta: Int,
    xi2: Int,
    zeta2: Int,
) -> f64 {
    let l0 = gcd_i(q, d_ring * a);
    let w = d_ring * xi * xi + zeta * zeta - d_ring * xi2 * xi2 - zeta2 * zeta2;
    let t_factor: Int = if w == 0 {
        q
    } else {
        let mut t: Int = 1;
        for (p, nu) in factorize(q as u64) {
            let vw = valuation(w, p);
            let vl = if l0.rem_euclid(p as Int) == 0 {
                valuation(l0, p)
            } else {
                0
            };
            let e = nu.min(vw.saturating_sub(vl));
            t *= (p as Int).pow(e);
        }
        t
    };
    let ga = gcd_i(q, a) as f64;
    ga * ga * (t_factor as f64).powf(0.25) * (q as f64).powf(-1.25)
}

// ---------------------------------------------------------------------------
// Linear congruence solution counts.
// ---------------------------------------------------------------------------

/// Number of (x, y) in [1, a] x [1, b] with f x + j y = k (mod l), by brute
/// force. The companion bound is `congruence_bound`.
pub fn congruence_count(l: Int, f: Int, j: Int, k: Int, a: Int, b: Int) -> u64 {
    debug_assert!(l >= 1 && a >= 0 && b >= 0);
    let mut count = 0u64;
    for x in 1..=a {
        let rem = (k - f * x).rem_euclid(l);
        for y in 1..=b {
            if (j * y).rem_euclid(l) == rem {
                count += 1;
            }
        }
    }
    count
}

/// The solution-count bound shape a b / (l / (l, gcd(f, j))) + a + b.
/// gcd(0,0) = 0 makes (l, 0) = l, collapsing the main denominator to 1.
pub fn congruence_bound(l: Int, f: Int, j: Int, a: Int, b: Int) -> f64 {
    debug_assert!(l >= 1);
    let tau = gcd_i(f, j);
    let denom = l / gcd_i(l, tau);
    (a as f64) * (b as f64) / (denom as f64) + a as f64 + b as f64
}
