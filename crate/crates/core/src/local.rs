//! Local structure mod q: row solution counts, the per-prime densities and
//! their closed forms, the averaged local terms U_q, the truncated singular
//! series, and stabilization of admissible height classes.
//!
//! Brute-force counts iterate rows (c1, c2, d1, d2) directly; closed forms
//! are checked against them exactly (rational equality) by the tests and the
//! acceptance battery. Closed densities cover odd primes coprime to twice
//! the ring parameter; p = 2 and ramified primes always go through the
//! honest enumeration paths.

use crate::error::{Error, Result};
use crate::expsum::ramanujan_sum;
use crate::group::{
    full_residue_group_order, residue_image, unpack_residue, GroupSpec, OrbitBall,
};
use crate::qform::{height, qform_of};
use crate::ring::{gcd_i, is_prime, legendre, rat_f64, Int, Rat};
use serde::Serialize;

fn require_good_prime(d: Int, p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    if p == 2 || d.rem_euclid(p as Int) == 0 {
        return Err(Error::Invalid(format!(
            "prime {p} divides twice the ring parameter {d}; closed densities do not apply"
        )));
    }
    Ok(())
}

/// Height of a raw row mod m: c1^2 + D c2^2 + d1^2 + D d2^2.
fn row_height_mod(d: Int, row: [Int; 4], m: Int) -> Int {
    let [c1, c2, d1, d2] = row;
    (c1 * c1 + d * c2 * c2 + d1 * d1 + d * d2 * d2).rem_euclid(m)
}

/// Whether a raw row is unimodular mod q: the gcd of its four minors is
/// coprime to q.
fn row_unimodular_mod(d: Int, row: [Int; 4], q: Int) -> bool {
    let [c1, c2, d1, d2] = row;
    let m1 = c1 * c1 + d * c2 * c2;
    let m2 = d1 * d1 + d * d2 * d2;
    let m3 = c1 * d1 + d * c2 * d2;
    let m4 = c1 * d2 - c2 * d1;
    let g = gcd_i(gcd_i(m1, m2), gcd_i(m3, m4));
    gcd_i(g, q) == 1
}

/// Q_row(x, y) mod m for a raw row: the shifted height
/// A x^2 + B y^2 + C x + D y + E with coefficients read off the row.
fn row_qform_mod(d: Int, row: [Int; 4], x: Int, y: Int, m: Int) -> Int {
    let [c1, c2, d1, d2] = row;
    let a = c1 * c1 + d * c2 * c2;
    let b = d * a;
    let cc = 2 * (c1 * d1 + d * c2 * d2);
    let dc = 2 * d * (c1 * d2 - c2 * d1);
    let e = a + d1 * d1 + d * d2 * d2;
    (a * x * x + b * y * y + cc * x + dc * y + e).rem_euclid(m)
}

// ---------------------------------------------------------------------------
// Row solution counts and densities at a good prime.
// ---------------------------------------------------------------------------

/// #{rows mod p : Q_row(x, y) = n (mod p)} over all p^4 rows, brute force.
pub fn w_p_count(d: Int, p: u64, n: Int, x: Int, y: Int) -> Result<u64> {
    require_good_prime(d, p)?;
    let pi = p as Int;
    let mut count = 0u64;
    let mut row = [0 as Int; 4];
    for c1 in 0..pi {
        row[0] = c1;
        for c2 in 0..pi {
            row[1] = c2;
            for d1 in 0..pi {
                row[2] = d1;
                for d2 in 0..pi {
                    row[3] = d2;
                    if row_qform_mod(d, row, x, y, pi) == n.rem_euclid(pi) {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// Closed form of the all-rows count: p^3 - p off the divisible class,
/// p^3 + p(p - 1) on it; independent of the ring parameter and of (x, y).
pub fn w_p_closed(p: u64, n: Int) -> u64 {
    let p3 = p * p * p;
    if n.rem_euclid(p as Int) == 0 {
        p3 + p * (p - 1)
    } else {
        p3 - p
    }
}

/// #{unimodular rows mod p}, brute force.
pub fn v_p_count(d: Int, p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    let pi = p as Int;
    let mut count = 0u64;
    for c1 in 0..pi {
        for c2 in 0..pi {
            for d1 in 0..pi {
                for d2 in 0..pi {
                    if row_unimodular_mod(d, [c1, c2, d1, d2], pi) {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// Closed unimodular-row count at an odd unramified prime:
/// (p^2 - 1)^2 when -D is a square mod p, p^4 - 1 otherwise.
pub fn v_p_closed(d: Int, p: u64) -> Result<u64> {
    require_good_prime(d, p)?;
    let p2 = (p * p) as u64;
    Ok(match legendre(-d, p) {
        1 => (p2 - 1) * (p2 - 1),
        -1 => p2 * p2 - 1,
        _ => unreachable!("good prime cannot divide the ring parameter"),
    })
}

/// Density of unimodular rows hitting n: #(solution rows among unimodular) /
/// #(unimodular rows), as an exact rational, by brute force.
pub fn tau_p(d: Int, p: u64, n: Int, x: Int, y: Int) -> Result<Rat> {
    require_good_prime(d, p)?;
    let pi = p as Int;
    let target = n.rem_euclid(pi);
    let mut hits: Int = 0;
    let mut total: Int = 0;
    for c1 in 0..pi {
        for c2 in 0..pi {
            for d1 in 0..pi {
                for d2 in 0..pi {
                    let row = [c1, c2, d1, d2];
                    if !row_unimodular_mod(d, row, pi) {
                        continue;
                    }
                    total += 1;
                    if row_qform_mod(d, row, x, y, pi) == target {
                        hits += 1;
                    }
                }
            }
        }
    }
    Ok(Rat::new(hits, total))
}

/// Closed form of the density. With eps the quadratic character of -D at p:
/// (p - eps)/(p^2 - eps) when p | n, p/(p^2 - eps) otherwise. Both split
/// branches follow from counting pairs of nonzero plane vectors with a fixed
/// dot product; the inert branches from fibers of the field norm.
pub fn tau_p_closed(d: Int, p: u64, n: Int) -> Result<Rat> {
    require_good_prime(d, p)?;
    let eps = legendre(-d, p) as Int;
    let pi = p as Int;
    Ok(if n.rem_euclid(pi) == 0 {
        Rat::new(pi - eps, pi * pi - eps)
    } else {
        Rat::new(pi, pi * pi - eps)
    })
}

/// Exact per-prime density data: tau and the averaged term it induces.
#[derive(Clone, Debug)]
pub struct LocalDensity {
    pub p: u64,
    pub n_residue: Int,
    pub tau: Rat,
    pub up: Rat,
}

pub fn local_density(d: Int, p: u64, n: Int) -> Result<LocalDensity> {
    let tau = tau_p_closed(d, p, n)?;
    let up = Rat::from_integer(p as Int) * tau - Rat::from_integer(1);
    Ok(LocalDensity {
        p,
        n_residue: n.rem_euclid(p as Int),
        tau,
        up,
    })
}

// ---------------------------------------------------------------------------
// Averaged local terms U_q and the truncated singular series.
// ---------------------------------------------------------------------------

/// Where the residue average runs: the full residue group (rows enumerated
/// per prime power, completions counted by the uniform q^2 fiber), or the
/// empirical image of a ball.
#[derive(Clone, Copy)]
pub enum UqSource<'a> {
    Full(Int),
    Ball(&'a OrbitBall),
}

#[derive(Clone, Debug)]
pub struct UqValue {
    pub q: u64,
    pub value: Rat,
    /// Ball source only: whether the image filled the full residue group.
    pub surjective: Option<bool>,
    pub image_size: u128,
}

const ROW_ENUM_GUARD: u128 = 20_000_000;

/// Sum of c_{pe}(Q_row(x, y) - n) over unimodular rows mod pe, with the row
/// count, by direct enumeration.
fn row_average_term(d: Int, pe: Int, n: Int, x: Int, y: Int) -> Result<(Int, Int)> {
    let pe_u = pe as u128;
    if pe_u * pe_u * pe_u * pe_u > ROW_ENUM_GUARD {
        return Err(Error::CostGuard(format!(
            "row enumeration mod {pe} exceeds the guard"
        )));
    }
    // c_{pe} is periodic; table it once.
    let table: Vec<Int> = (0..pe).map(|m| ramanujan_sum(pe as u64, m)).collect();
    let mut sum: Int = 0;
    let mut count: Int = 0;
    for c1 in 0..pe {
        for c2 in 0..pe {
            for d1 in 0..pe {
                for d2 in 0..pe {
                    let row = [c1, c2, d1, d2];
                    if !row_unimodular_mod(d, row, pe) {
                        continue;
                    }
                    count += 1;
                    let m = (row_qform_mod(d, row, x, y, pe) - n).rem_euclid(pe);
                    sum += table[m as usize];
                }
            }
        }
    }
    Ok((sum, count))
}

/// U_q(n; x, y): the c_q-weighted average of Q - n over the residue group.
///
/// Full source: every row has exactly q^2 completions, so the matrix average
/// collapses to the row average, which is multiplicative across coprime
/// moduli. Ball source: honest average over the image matrices, flagged when
/// the image is not the whole group.
pub fn u_q(source: UqSource<'_>, q: u64, n: Int, x: Int, y: Int) -> Result<UqValue> {
    if q == 0 {
        return Err(Error::Invalid("modulus must be positive".into()));
    }
    match source {
        UqSource::Full(d) => {
            let mut value = Rat::from_integer(1);
            let mut image: u128 = 1;
            for (p, k) in crate::ring::factorize(q) {
                let pe = (p as Int).pow(k);
                let (sum, count) = row_average_term(d, pe, n, x, y)?;
                value *= Rat::new(sum, count);
                image *= (count as u128) * (pe as u128) * (pe as u128);
            }
            Ok(UqValue {
                q,
                value,
                surjective: None,
                image_size: image,
            })
        }
        UqSource::Ball(ball) => {
            let qi = q as Int;
            let ring = ball.spec.ring;
            let image = residue_image(ball, qi)?;
            if image.is_empty() {
                return Err(Error::Invalid("empty residue image".into()));
            }
            let table: Vec<Int> = (0..qi).map(|m| ramanujan_sum(q, m)).collect();
            let mut sum: Int = 0;
            for &key in &image {
                let m = unpack_residue(key);
                let f = qform_of(ring, &m)?;
                let val = (f.eval(x, y)? - n).rem_euclid(qi);
                sum += table[val as usize];
            }
            let full = full_residue_group_order(ring.d, qi)?;
            Ok(UqValue {
                q,
                value: Rat::new(sum, image.len() as Int),
                surjective: Some(image.len() as u128 == full),
                image_size: image.len() as u128,
            })
        }
    }
}

#[derive(Clone, Debug)]
pub struct SingularSeries {
    pub q0: u64,
    pub value: f64,
    pub terms: Vec<UqValue>,
    /// False when any ball-source term saw a proper subgroup image.
    pub all_surjective: bool,
}

/// Truncated singular series: sum of U_q over q <= Q0, each term exact, the
/// sum in floating point.
pub fn singular_series(
    source: UqSource<'_>,
    n: Int,
    x: Int,
    y: Int,
    q0: u64,
) -> Result<SingularSeries> {
    if q0 == 0 {
        return Err(Error::Invalid("truncation must be positive".into()));
    }
    let mut terms = Vec::with_capacity(q0 as usize);
    let mut value = 0.0f64;
    let mut all_surjective = true;
    for q in 1..=q0 {
        let t = u_q(source, q, n, x, y)?;
        value += rat_f64(t.value);
        if t.surjective == Some(false) {
            all_surjective = false;
        }
        terms.push(t);
    }
    Ok(SingularSeries {
        q0,
        value,
        terms,
        all_surjective,
    })
}

// ---------------------------------------------------------------------------
// Admissible-class stabilization.
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StabilizationMode {
    /// Classes mod p^{k+1} are exactly the full lifts of those mod p^k: no
    /// constraint deeper than k.
    FullLift,
    /// The class set stopped growing: the same integers represent every
    /// deeper level (singleton-orbit style constraint).
    Frozen,
}

#[derive(Clone, Debug, Serialize)]
pub struct PrimeStabilization {
    pub prime: u64,
    /// Exponent at which the image stabilized; None within the explored depth
    /// means unresolved.
    pub k_p: Option<u32>,
    pub mode: Option<StabilizationMode>,
    /// Admissible classes at the recorded modulus.
    pub classes: Vec<i64>,
    pub modulus: i64,
    pub surjective: bool,
    pub bad: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalStructure {
    pub d: i64,
    pub bad_primes: Vec<u64>,
    pub l: i64,
    pub admissible_classes: Vec<i64>,
    pub per_prime: Vec<PrimeStabilization>,
}

/// Distinct height values over a ball, sorted.
fn height_values(ball: &OrbitBall) -> Result<Vec<Int>> {
    let ring = ball.spec.ring;
    let mut hs: Vec<Int> = Vec::new();
    for m in ball.iter() {
        hs.push(height(ring, &m)?);
    }
    hs.sort_unstable();
    hs.dedup();
    Ok(hs)
}

fn classes_mod(heights: &[Int], m: Int) -> Vec<Int> {
    let mut cl: Vec<Int> = heights.iter().map(|h| h.rem_euclid(m)).collect();
    cl.sort_unstable();
    cl.dedup();
    cl
}

/// Stabilization of the admissible height classes per prime, assembled into
/// the modulus L and its class list.
///
/// Per prime the class images mod p, p^2, ... are compared level to level;
/// stabilization means either exact full lifting (the image grows by the
/// factor p, twice in a row) or freezing (the image stops growing, twice in
/// a row). k_p = 0 records full lifting from the very first level.
///
/// L multiplies p^{k_p} over every stabilized prime, including flagged ones:
/// the even prime often carries a genuine obstruction (the Gaussian lattice
/// admits no height divisible by 4), and dropping it would misclassify a
/// quarter of all integers as admissible. The bad flags are warnings about
/// trustworthiness: p dividing twice the ring parameter lies outside the
/// closed density theory, and a non-surjective image may mean the ball
/// under-samples the group, so a frozen level could be an artifact.
pub fn admissible_structure(
    spec: &GroupSpec,
    ball: &OrbitBall,
    prime_bound: u64,
    exp_bound: u32,
) -> Result<LocalStructure> {
    if ball.is_empty() {
        return Err(Error::Invalid("empty ball has no admissible classes".into()));
    }
    if exp_bound < 3 {
        return Err(Error::Invalid(
            "need depth at least 3 to confirm stabilization twice".into(),
        ));
    }
    let d = spec.ring.d;
    let heights = height_values(ball)?;
    let mut per_prime = Vec::new();
    let mut bad_primes = Vec::new();
    let mut l: Int = 1;

    for p in crate::ring::primes_up_to(prime_bound) {
        // Class images by level, stopping before the modulus outgrows i64.
        let mut levels: Vec<Vec<Int>> = Vec::new();
        let mut pk: Int = 1;
        for _ in 1..=exp_bound {
            if pk > (1 as Int) << 50 {
                break;
            }
            pk *= p as Int;
            levels.push(classes_mod(&heights, pk));
        }
        let depth = levels.len();
        let class_at = |k: usize| -> &[Int] {
            // k = 0 is the trivial single class mod 1.
            if k == 0 {
                &[]
            } else {
                &levels[k - 1]
            }
        };
        let len_at = |k: usize| -> usize {
            if k == 0 {
                1
            } else {
                levels[k - 1].len()
            }
        };
        // Projection of the image mod p^{k+1} is exactly the image mod p^k,
        // so full lifting at level k is a pure cardinality statement.
        let full_lift_at = |k: usize| len_at(k + 1) == len_at(k) * p as usize;
        let frozen_at = |k: usize| k >= 1 && class_at(k + 1) == class_at(k);

        let mut k_p: Option<u32> = None;
        let mut mode: Option<StabilizationMode> = None;
        for k in 0..depth.saturating_sub(1) {
            if k + 2 > depth {
                break;
            }
            if full_lift_at(k) && full_lift_at(k + 1) {
                k_p = Some(k as u32);
                mode = Some(StabilizationMode::FullLift);
                break;
            }
            if frozen_at(k) && frozen_at(k + 1) {
                k_p = Some(k as u32);
                mode = Some(StabilizationMode::Frozen);
                break;
            }
        }

        let image = residue_image(ball, p as Int)?;
        let surjective = image.len() as u128 == full_residue_group_order(d, p as Int)?;
        let divides_2d = (2 * d).rem_euclid(p as Int) == 0;
        let bad = divides_2d || !surjective || k_p.is_none();
        if bad {
            bad_primes.push(p);
        }
        if let Some(k) = k_p {
            l *= (p as Int).pow(k);
        }

        // Record classes at the stabilized level (level 1 when k_p = 0, so
        // the report always shows a concrete residue set).
        let record_level = k_p.map(|k| (k as usize).max(1)).unwrap_or(depth);
        let modulus = (p as Int).pow(record_level as u32);
        per_prime.push(PrimeStabilization {
            prime: p,
            k_p,
            mode,
            classes: levels[record_level - 1].iter().map(|&c| c as i64).collect(),
            modulus: modulus as i64,
            surjective,
            bad,
        });
    }

    let admissible_classes = classes_mod(&heights, l)
        .into_iter()
        .map(|c| c as i64)
        .collect();
    Ok(LocalStructure {
        d: d as i64,
        bad_primes,
        l: l as i64,
        admissible_classes,
        per_prime,
    })
}

/// Membership of n mod L in the admissible classes.
pub fn is_admissible(ls: &LocalStructure, n: Int) -> bool {
    let r = n.rem_euclid(ls.l as Int) as i64;
    ls.admissible_classes.binary_search(&r).is_ok()
}

// ---------------------------------------------------------------------------
// Exact lifting balance at level two.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct LiftBalance {
    pub p: u64,
    pub rows_checked: u64,
    /// Lifts landing in each height class mod p^2; exactness of p^3 per class
    /// is the balance property.
    pub per_class: u64,
    pub balanced: bool,
}

/// For every unimodular row mod p, its p^4 lifts mod p^2 spread their heights
/// equally over the p classes above the base height: exactly p^3 per class.
/// The height gradient 2(c1, D c2, d1, D d2) never vanishes mod p on a
/// unimodular row when p is odd and unramified, which forces the balance.
pub fn lift_balance(d: Int, p: u64) -> Result<LiftBalance> {
    require_good_prime(d, p)?;
    let pi = p as Int;
    let p2 = pi * pi;
    let expected = (p * p * p) as u64;
    let mut rows_checked = 0u64;
    let mut balanced = true;

    let mut base = [0 as Int; 4];
    for c1 in 0..pi {
        base[0] = c1;
        for c2 in 0..pi {
            base[1] = c2;
            for d1 in 0..pi {
                base[2] = d1;
                for d2 in 0..pi {
                    base[3] = d2;
                    if !row_unimodular_mod(d, base, pi) {
                        continue;
                    }
                    rows_checked += 1;
                    let base_h = row_height_mod(d, base, pi);
                    let mut tally = vec![0u64; p as usize];
                    for t1 in 0..pi {
                        for t2 in 0..pi {
                            for t3 in 0..pi {
                                for t4 in 0..pi {
                                    let lift = [
                                        base[0] + pi * t1,
                                        base[1] + pi * t2,
                                        base[2] + pi * t3,
                                        base[3] + pi * t4,
                                    ];
                                    let h = row_height_mod(d, lift, p2);
                                    debug_assert_eq!(
                                        h.rem_euclid(pi),
                                        base_h,
                                        "lift heights must project to the base height"
                                    );
                                    tally[((h - base_h) / pi) as usize] += 1;
                                }
                            }
                        }
                    }
                    if tally.iter().any(|&c| c != expected) {
                        balanced = false;
                    }
                }
            }
        }
    }
    Ok(LiftBalance {
        p,
        rows_checked,
        per_class: expected,
        balanced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::enumerate_ball;
    use crate::ring::{Rat, Ring};

    fn rat(n: Int, d: Int) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn w_count_examples_and_closed_form() {
        assert_eq!(w_p_count(1, 3, 1, 0, 0).unwrap(), 24);
        assert_eq!(w_p_count(1, 3, 0, 0, 0).unwrap(), 33);
        assert_eq!(w_p_count(1, 3, 1, 2, 1).unwrap(), 24, "shift independence");
        for n in 0..5 {
            for x in 0..5 {
                for y in 0..5 {
                    assert_eq!(
                        w_p_count(2, 5, n, x, y).unwrap(),
                        w_p_closed(5, n),
                        "all-rows count mismatch at n={n}, x={x}, y={y}"
                    );
                }
            }
        }
    }

    #[test]
    fn v_count_examples_and_closed_form() {
        assert_eq!(v_p_count(1, 3).unwrap(), 80);
        assert_eq!(v_p_count(2, 3).unwrap(), 64);
        assert_eq!(v_p_count(1, 7).unwrap(), 2400);
        for d in [1, 2, 3] {
            for p in [3u64, 5, 7, 11] {
                if d % (p as Int) == 0 {
                    continue;
                }
                assert_eq!(
                    v_p_count(d, p).unwrap(),
                    v_p_closed(d, p).unwrap(),
                    "unimodular row count mismatch at d={d}, p={p}"
                );
            }
        }
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau_p(1, 3, 1, 0, 0).unwrap(), rat(3, 10));
        // Split prime on the divisible class: counting nonzero plane vectors
        // with zero dot product gives (p-1)/(p^2-1), here 1/6.
        assert_eq!(tau_p(1, 5, 5, 0, 0).unwrap(), rat(1, 6));
        assert_eq!(tau_p_closed(1, 5, 5).unwrap(), rat(1, 6));
        assert_eq!(tau_p_closed(1, 3, 1).unwrap(), rat(3, 10));
    }

    #[test]
    fn tau_brute_matches_closed_and_ignores_shifts() {
        for (d, p) in [(1 as Int, 3u64), (2, 5), (3, 7)] {
            for n in 0..(p as Int) {
                let closed = tau_p_closed(d, p, n).unwrap();
                for (x, y) in [(0, 0), (1, 2), (p as Int - 1, 1)] {
                    assert_eq!(
                        tau_p(d, p, n, x, y).unwrap(),
                        closed,
                        "density mismatch at d={d}, p={p}, n={n}, x={x}, y={y}"
                    );
                }
            }
        }
    }

    #[test]
    fn bad_primes_rejected() {
        assert!(tau_p(1, 2, 1, 0, 0).is_err(), "p = 2 excluded");
        assert!(tau_p(3, 3, 1, 0, 0).is_err(), "ramified prime excluded");
        assert!(tau_p(1, 4, 1, 0, 0).is_err(), "composite modulus excluded");
        assert!(v_p_closed(5, 5).is_err());
    }

    #[test]
    fn u_q_trivial_and_prime_identity() {
        let u1 = u_q(UqSource::Full(1), 1, 7, 0, 0).unwrap();
        assert_eq!(u1.value, rat(1, 1));
        let u3 = u_q(UqSource::Full(1), 3, 1, 0, 0).unwrap();
        assert_eq!(u3.value, rat(-1, 10), "3 tau - 1 = -1/10");
        for (d, p) in [(1 as Int, 3u64), (2, 5), (3, 7)] {
            for n in 0..(p as Int) {
                let up = u_q(UqSource::Full(d), p, n, 1, 2).unwrap().value;
                let want =
                    Rat::from_integer(p as Int) * tau_p_closed(d, p, n).unwrap() - rat(1, 1);
                assert_eq!(up, want, "averaged term identity failed at d={d}, p={p}, n={n}");
            }
        }
    }

    #[test]
    fn u_q_full_matches_direct_composite_enumeration() {
        // The multiplicative path at q = 15 against one honest enumeration of
        // all rows mod 15.
        let (d, q, n, x, y) = (1 as Int, 15 as Int, 2 as Int, 1 as Int, 0 as Int);
        let table: Vec<Int> = (0..q).map(|m| ramanujan_sum(q as u64, m)).collect();
        let mut sum: Int = 0;
        let mut count: Int = 0;
        for c1 in 0..q {
            for c2 in 0..q {
                for d1 in 0..q {
                    for d2 in 0..q {
                        let row = [c1, c2, d1, d2];
                        if !row_unimodular_mod(d, row, q) {
                            continue;
                        }
                        count += 1;
                        sum += table[(row_qform_mod(d, row, x, y, q) - n).rem_euclid(q) as usize];
                    }
                }
            }
        }
        let direct = Rat::new(sum, count);
        let multiplicative = u_q(UqSource::Full(d), 15, n, x, y).unwrap().value;
        assert_eq!(multiplicative, direct, "splitting across 3 * 5 must be exact");
    }

    #[test]
    fn u_q_ball_source_matches_full_when_surjective() {
        let spec = GroupSpec::elementary(1).unwrap();
        let ball = enumerate_ball(&spec, Rat::new(6, 1), false, 64).unwrap();
        for n in [1 as Int, 2, 3] {
            let b = u_q(UqSource::Ball(&ball), 3, n, 0, 0).unwrap();
            assert_eq!(b.surjective, Some(true), "lattice ball should fill mod 3");
            let f = u_q(UqSource::Full(1), 3, n, 0, 0).unwrap();
            assert_eq!(b.value, f.value, "surjective image average equals full average");
        }
    }

    #[test]
    fn u_q_ball_flags_proper_subgroup() {
        let ring = Ring::new(1).unwrap();
        let lower = crate::group::GroupMat::from_entries([1, 0, 0, 0, 1, 0, 1, 0]);
        let spec = GroupSpec::new(ring, vec![lower], "lower-parabolic").unwrap();
        let ball = enumerate_ball(&spec, Rat::new(4, 1), false, 16).unwrap();
        let b = u_q(UqSource::Ball(&ball), 3, 1, 0, 0).unwrap();
        assert_eq!(b.surjective, Some(false), "parabolic image is a proper subgroup");
    }

    #[test]
    fn singular_series_truncations() {
        let s = singular_series(UqSource::Full(1), 5, 0, 0, 1).unwrap();
        assert!((s.value - 1.0).abs() < 1e-15, "depth-1 series is the trivial term");
        let s8 = singular_series(UqSource::Full(1), 2, 0, 0, 8).unwrap();
        assert_eq!(s8.terms.len(), 8);
        assert!(s8.value.is_finite());
    }

    #[test]
    fn admissible_structure_lattice_sees_the_even_obstruction() {
        let spec = GroupSpec::elementary(1).unwrap();
        let ball = enumerate_ball(&spec, Rat::new(8, 1), false, 64).unwrap();
        let ls = admissible_structure(&spec, &ball, 3, 4).unwrap();
        let p3 = ls.per_prime.iter().find(|s| s.prime == 3).unwrap();
        assert_eq!(p3.k_p, Some(0), "no odd-prime obstruction for the full lattice");
        assert_eq!(p3.mode, Some(StabilizationMode::FullLift));
        assert!(p3.surjective && !p3.bad);
        // Heights of unimodular Gaussian rows are never divisible by 4: both
        // entries would share the ramified prime. The even prime stabilizes
        // at exponent 2 and carries the whole obstruction.
        let p2 = ls.per_prime.iter().find(|s| s.prime == 2).unwrap();
        assert_eq!(p2.k_p, Some(2));
        assert!(p2.bad, "2 divides twice the ring parameter, flagged but counted");
        assert_eq!(ls.l, 4);
        assert_eq!(ls.admissible_classes, vec![1, 2, 3]);
        assert!(is_admissible(&ls, 17) && is_admissible(&ls, 2));
        assert!(!is_admissible(&ls, 0) && !is_admissible(&ls, 512));
    }

    #[test]
    fn admissible_structure_parabolic_freezes_on_one() {
        let ring = Ring::new(1).unwrap();
        let upper = crate::group::GroupMat::from_entries([1, 0, 1, 0, 0, 0, 1, 0]);
        let spec = GroupSpec::new(ring, vec![upper], "upper-parabolic").unwrap();
        let ball = enumerate_ball(&spec, Rat::new(6, 1), false, 64).unwrap();
        let ls = admissible_structure(&spec, &ball, 5, 4).unwrap();
        for s in &ls.per_prime {
            if s.prime == 2 {
                continue;
            }
            assert_eq!(s.k_p, Some(1), "heights are constant 1, frozen at the first level");
            assert_eq!(s.mode, Some(StabilizationMode::Frozen));
            assert_eq!(s.classes, vec![1]);
            assert!(!s.surjective, "a parabolic line cannot fill the residue group");
            assert!(s.bad, "non-surjective primes are flagged");
        }
        assert_eq!(ls.l, 30, "every prime freezes on the single class");
        assert_eq!(ls.admissible_classes, vec![1]);
        assert!(is_admissible(&ls, 31) && !is_admissible(&ls, 7));
        let json = serde_json::to_string(&ls).unwrap();
        assert!(json.contains("\"per_prime\""), "structure must serialize");
    }

    #[test]
    fn admissible_structure_rejects_empty_ball() {
        let spec = GroupSpec::elementary(1).unwrap();
        let ball = enumerate_ball(&spec, Rat::new(1, 1), false, 8).unwrap();
        assert!(ball.is_empty());
        assert!(admissible_structure(&spec, &ball, 3, 4).is_err());
    }

    #[test]
    fn lift_balance_exact_at_three_and_five() {
        for (d, p) in [(1 as Int, 3u64), (2, 3), (1, 5), (2, 5)] {
            let lb = lift_balance(d, p).unwrap();
            assert!(lb.balanced, "lift balance must be exact at d={d}, p={p}");
            assert_eq!(lb.per_class, p * p * p);
            assert_eq!(lb.rows_checked, v_p_count(d, p).unwrap());
        }
        assert!(lift_balance(1, 2).is_err());
        assert!(lift_balance(3, 3).is_err(), "ramified prime rejected");
    }
}
