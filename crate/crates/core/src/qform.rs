//! Heights, the per-element shifted quadratic forms, window weights, and
//! representation counts.
//!
//! Every group element gamma with bottom row (c, d) induces
//! Q(x, y) = height(gamma * unipotent(x, y)), an integer quadratic polynomial
//! whose five coefficients depend only on (c, d). Representation counts sum a
//! window weight over the solutions of Q(x, y) = n across a ball.

use crate::error::{Error, Result};
use crate::group::{enumerate_ball, GroupMat, GroupSpec, OrbitBall};
use crate::ring::{unimodular_row, Int, Rat, RingElt};

/// Coefficients of Q(x, y) = a x^2 + b y^2 + c x + d y + e.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct QuadForm {
    pub a: Int,
    pub b: Int,
    pub c: Int,
    pub d: Int,
    pub e: Int,
}

impl QuadForm {
    pub fn eval(&self, x: Int, y: Int) -> Result<Int> {
        let ax2 = self
            .a
            .checked_mul(x)
            .and_then(|t| t.checked_mul(x))
            .ok_or(Error::Overflow("quad form eval"))?;
        let by2 = self
            .b
            .checked_mul(y)
            .and_then(|t| t.checked_mul(y))
            .ok_or(Error::Overflow("quad form eval"))?;
        let cx = self.c.checked_mul(x).ok_or(Error::Overflow("quad form eval"))?;
        let dy = self.d.checked_mul(y).ok_or(Error::Overflow("quad form eval"))?;
        ax2.checked_add(by2)
            .and_then(|t| t.checked_add(cx))
            .and_then(|t| t.checked_add(dy))
            .and_then(|t| t.checked_add(self.e))
            .ok_or(Error::Overflow("quad form eval"))
    }

    /// Both structural identities tying the coefficients to a bottom row over
    /// Z[sqrt(-D)]: b = D a and D c^2 + d^2 = 4 D (e - a) a.
    pub fn invariants_hold(&self, d_ring: Int) -> bool {
        if self.b != d_ring * self.a {
            return false;
        }
        d_ring * self.c * self.c + self.d * self.d
            == 4 * d_ring * (self.e - self.a) * self.a
    }
}

/// height = norm(c) + norm(d) of the bottom row.
pub fn height(ring: crate::ring::Ring, m: &GroupMat) -> Result<Int> {
    let nc = ring.norm(m.c)?;
    let nd = ring.norm(m.d)?;
    nc.checked_add(nd).ok_or(Error::Overflow("height"))
}

/// The upper unipotent [[1, x + y sqrt(-D)], [0, 1]].
pub fn unipotent(x: Int, y: Int) -> GroupMat {
    GroupMat::new(
        RingElt::ONE,
        RingElt::new(x, y),
        RingElt::ZERO,
        RingElt::ONE,
    )
}

/// The quadratic polynomial (x, y) -> height(gamma * unipotent(x, y)),
/// read off the bottom row (c, d):
///   a = norm(c), b = D a,
///   c-coef = 2 (c1 d1 + D c2 d2), d-coef = 2 D (c1 d2 - c2 d1),
///   e = height(gamma).
pub fn qform_of(ring: crate::ring::Ring, m: &GroupMat) -> Result<QuadForm> {
    let d = ring.d;
    let a = ring.norm(m.c)?;
    let b = d.checked_mul(a).ok_or(Error::Overflow("quad form coefficients"))?;
    let (c1, c2) = (m.c.re, m.c.im);
    let (d1, d2) = (m.d.re, m.d.im);
    let p = c1
        .checked_mul(d1)
        .and_then(|t| c2.checked_mul(d2)?.checked_mul(d)?.checked_add(t))
        .ok_or(Error::Overflow("quad form coefficients"))?;
    let q = c1
        .checked_mul(d2)
        .and_then(|t| t.checked_sub(c2.checked_mul(d1)?))
        .ok_or(Error::Overflow("quad form coefficients"))?;
    let c_coef = p.checked_mul(2).ok_or(Error::Overflow("quad form coefficients"))?;
    let d_coef = q
        .checked_mul(2)
        .and_then(|t| t.checked_mul(d))
        .ok_or(Error::Overflow("quad form coefficients"))?;
    let e = height(ring, m)?;
    let form = QuadForm {
        a,
        b,
        c: c_coef,
        d: d_coef,
        e,
    };
    debug_assert!(form.invariants_hold(d), "coefficient identities violated");
    Ok(form)
}

// ---------------------------------------------------------------------------
// Smooth cutoff.
// ---------------------------------------------------------------------------

fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth ramp rising from 0 at t=0 to 1 at t=1.
fn ramp(t: f64) -> f64 {
    let f = bump(t);
    let g = bump(1.0 - t);
    if f == 0.0 && g == 0.0 {
        // Unreachable for t in (0,1); defensively split the midpoint.
        return 0.5;
    }
    f / (f + g)
}

/// C-infinity cutoff: 0 outside (0.5, 2.5), 1 on [1, 2], smooth ramps on the
/// flanks. Pinned concretely so every downstream number is reproducible.
pub fn smooth_cutoff(x: f64) -> f64 {
    if x <= 0.5 || x >= 2.5 {
        0.0
    } else if x < 1.0 {
        ramp(2.0 * (x - 0.5))
    } else if x <= 2.0 {
        1.0
    } else {
        ramp(2.0 * (2.5 - x))
    }
}

// ---------------------------------------------------------------------------
// Windows and representation counts.
// ---------------------------------------------------------------------------

/// Which window weights the (x, y) sum: the smooth cutoff at scale X or the
/// sharp box [X, 2X].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Window {
    Smooth,
    Sharp,
}

/// Inclusive integer range of x with nonzero window weight at scale X.
pub fn window_range(x_scale: Rat, window: Window) -> (Int, Int) {
    let (num, den) = (*x_scale.numer(), *x_scale.denom());
    match window {
        Window::Smooth => {
            // Support of Psi(x/X) is X/2 < x < 5X/2 strictly.
            let lo = num.div_euclid(2 * den) + 1;
            let hi = {
                let five = 5 * num;
                let q = five.div_euclid(2 * den);
                if five.rem_euclid(2 * den) == 0 {
                    q - 1
                } else {
                    q
                }
            };
            (lo, hi)
        }
        Window::Sharp => {
            // X <= x <= 2X.
            let lo = {
                let q = num.div_euclid(den);
                if num.rem_euclid(den) == 0 {
                    q
                } else {
                    q + 1
                }
            };
            let hi = (2 * num).div_euclid(den);
            (lo, hi)
        }
    }
}

/// Window weight at integer x: Psi(x/X) or the sharp indicator.
pub fn window_weight(x: Int, x_scale: Rat, window: Window) -> f64 {
    let ratio = x as f64 * *x_scale.denom() as f64 / *x_scale.numer() as f64;
    match window {
        Window::Smooth => smooth_cutoff(ratio),
        Window::Sharp => {
            let (lo, hi) = window_range(x_scale, Window::Sharp);
            if (lo..=hi).contains(&x) {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn window_weights(x_scale: Rat, window: Window) -> (Int, Vec<f64>) {
    let (lo, hi) = window_range(x_scale, window);
    let ws = (lo..=hi)
        .map(|x| window_weight(x, x_scale, window))
        .collect();
    (lo, ws)
}

fn guard_cost(ball: &OrbitBall, x_scale: Rat) -> Result<()> {
    let (lo, hi) = window_range(x_scale, Window::Smooth);
    let w = (hi - lo + 1).max(0) as u128;
    let cost = ball.len() as u128 * w * w;
    if cost > 2_000_000_000 {
        return Err(Error::CostGuard(format!(
            "representation sweep costs {cost} form evaluations, over the 2e9 guard"
        )));
    }
    Ok(())
}

/// Largest form value over the window box, for histogram sizing. The form is
/// convex in each variable, so the maximum sits at a corner.
fn max_window_value(forms: &[QuadForm], lo: Int, hi: Int) -> Result<Int> {
    let mut best: Int = 0;
    for f in forms {
        for &x in &[lo, hi] {
            for &y in &[lo, hi] {
                best = best.max(f.eval(x, y)?);
            }
        }
    }
    Ok(best)
}

fn ball_forms(ball: &OrbitBall) -> Result<Vec<QuadForm>> {
    ball.iter().map(|m| qform_of(ball.spec.ring, &m)).collect()
}

/// Weighted representation counts for every n at once:
/// hist[n] = sum over gamma, x, y of w(x) w(y) [Q_gamma(x, y) = n].
pub fn rep_histogram(ball: &OrbitBall, x_scale: Rat, window: Window) -> Result<Vec<f64>> {
    guard_cost(ball, x_scale)?;
    let (lo, ws) = window_weights(x_scale, window);
    let hi = lo + ws.len() as Int - 1;
    if ws.is_empty() {
        return Ok(vec![]);
    }
    let forms = ball_forms(ball)?;
    let max_n = max_window_value(&forms, lo, hi)?;
    let mut hist = vec![0.0f64; (max_n + 1) as usize];
    for f in &forms {
        for (ix, &wx) in ws.iter().enumerate() {
            if wx == 0.0 {
                continue;
            }
            let x = lo + ix as Int;
            let base = f.a * x * x + f.c * x + f.e;
            for (iy, &wy) in ws.iter().enumerate() {
                if wy == 0.0 {
                    continue;
                }
                let y = lo + iy as Int;
                let n = base + f.b * y * y + f.d * y;
                debug_assert!(n >= 0, "window form values must be nonnegative");
                hist[n as usize] += wx * wy;
            }
        }
    }
    Ok(hist)
}

/// Integer counts of sharp-window representations for every n at once.
pub fn sharp_histogram(ball: &OrbitBall, x_scale: Rat) -> Result<Vec<u64>> {
    guard_cost(ball, x_scale)?;
    let (lo, hi) = window_range(x_scale, Window::Sharp);
    if lo > hi {
        return Ok(vec![]);
    }
    let forms = ball_forms(ball)?;
    let max_n = max_window_value(&forms, lo, hi)?;
    let mut hist = vec![0u64; (max_n + 1) as usize];
    for f in &forms {
        for x in lo..=hi {
            let base = f.a * x * x + f.c * x + f.e;
            for y in lo..=hi {
                let n = base + f.b * y * y + f.d * y;
                hist[n as usize] += 1;
            }
        }
    }
    Ok(hist)
}

/// Single-n representation count; smooth mode returns the real weighted sum,
/// sharp mode an integer-valued count. A positive value certifies that n is a
/// height in the orbit.
pub fn rep_count(ball: &OrbitBall, n: Int, x_scale: Rat, window: Window) -> Result<f64> {
    guard_cost(ball, x_scale)?;
    let (lo, ws) = window_weights(x_scale, window);
    let hi = lo + ws.len() as Int - 1;
    let mut total = 0.0f64;
    for m in ball.iter() {
        let f = qform_of(ball.spec.ring, &m)?;
        for (ix, &wx) in ws.iter().enumerate() {
            if wx == 0.0 {
                continue;
            }
            let x = lo + ix as Int;
            let base = f.a * x * x + f.c * x + f.e;
            // Solve b y^2 + d y = n - base over the window instead of scanning
            // when the y-coefficients vanish.
            if f.b == 0 && f.d == 0 {
                if base == n {
                    total += wx * ws.iter().sum::<f64>();
                }
                continue;
            }
            for (iy, &wy) in ws.iter().enumerate() {
                if wy == 0.0 {
                    continue;
                }
                let y = lo + iy as Int;
                if base + f.b * y * y + f.d * y == n {
                    total += wx * wy;
                }
            }
        }
        let _ = hi;
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Ground-truth represented set.
// ---------------------------------------------------------------------------

/// Membership table of {height(row) <= bound : row unimodular over
/// Z[sqrt(-D)]} by direct row enumeration with the exact unimodularity test.
/// This is the brute-force oracle for orbit heights of the full group;
/// index n holds whether n is represented.
pub fn represented_set(d: Int, bound: Int) -> Result<Vec<bool>> {
    if bound < 0 || bound > 10_000_000 {
        return Err(Error::CostGuard(format!(
            "represented_set bound must lie in [0, 10^7], got {bound}"
        )));
    }
    let ring = crate::ring::Ring::new(d)?;
    // All ring points with norm <= bound, grouped so the inner loop can stop
    // early once norms overflow the remaining budget.
    let mut points: Vec<(Int, RingElt)> = Vec::new();
    let max_re = crate::ring::isqrt(bound);
    for re in -max_re..=max_re {
        let rem = bound - re * re;
        let max_im = crate::ring::isqrt(rem / d);
        for im in -max_im..=max_im {
            let nrm = re * re + d * im * im;
            if nrm <= bound {
                points.push((nrm, RingElt::new(re, im)));
            }
        }
    }
    points.sort_by_key(|&(n, e)| (n, e));
    let mut marked = vec![false; (bound + 1) as usize];
    for &(nc, c) in &points {
        for &(nd, dd) in &points {
            let n = nc + nd;
            if n > bound {
                break;
            }
            if marked[n as usize] {
                continue;
            }
            if unimodular_row(ring, c, dd)? {
                marked[n as usize] = true;
            }
        }
    }
    Ok(marked)
}

/// Smallest and largest form value over the window box across a ball; the
/// sanity range for filtered balls is [N/100, 100N] with N = T^2 X^2.
pub fn window_value_bounds(
    ball: &OrbitBall,
    x_scale: Rat,
    window: Window,
) -> Result<(Int, Int)> {
    let (lo, hi) = window_range(x_scale, window);
    let forms = ball_forms(ball)?;
    let mut min_v = Int::MAX;
    let mut max_v = Int::MIN;
    for f in &forms {
        for x in lo..=hi {
            for y in lo..=hi {
                let v = f.eval(x, y)?;
                min_v = min_v.min(v);
                max_v = max_v.max(v);
            }
        }
    }
    Ok((min_v, max_v))
}

/// Convenience: the tiny fixed instance used by exactness tests. The group
/// generated by the lower unipotent over D = 1, radius 2, filtered: the ball
/// is exactly [[1,0],[1,1]] and [[1,0],[-1,1]].
pub fn tiny_instance() -> Result<(GroupSpec, OrbitBall)> {
    let ring = crate::ring::Ring::new(1)?;
    let lower = GroupMat::from_entries([1, 0, 0, 0, 1, 0, 1, 0]);
    let spec = GroupSpec::new(ring, vec![lower], "lower-parabolic-D1")?;
    let ball = enumerate_ball(&spec, Rat::from_integer(2), true, 16)?;
    Ok((spec, ball))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{enumerate_ball, mat_mul};
    use crate::ring::Ring;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rat(n: i128, d: i128) -> Rat {
        Rat::new(n, d)
    }

    #[test]
    fn height_examples() {
        let ring = Ring::new(1).unwrap();
        assert_eq!(height(ring, &GroupMat::identity()).unwrap(), 1);
        let s = GroupMat::from_entries([0, 0, -1, 0, 1, 0, 0, 0]);
        assert_eq!(height(ring, &s).unwrap(), 1);
        let lower = GroupMat::from_entries([1, 0, 0, 0, 2, 3, 1, 0]);
        assert_eq!(height(ring, &lower).unwrap(), 14, "4 + 9 + 1");
    }

    #[test]
    fn qform_examples() {
        let ring = Ring::new(1).unwrap();
        let f = qform_of(ring, &GroupMat::identity()).unwrap();
        assert_eq!((f.a, f.b, f.c, f.d, f.e), (0, 0, 0, 0, 1));
        let s = GroupMat::from_entries([0, 0, -1, 0, 1, 0, 0, 0]);
        let f = qform_of(ring, &s).unwrap();
        assert_eq!((f.a, f.b, f.c, f.d, f.e), (1, 1, 0, 0, 1), "Q = x^2 + y^2 + 1");
    }

    #[test]
    fn qform_matches_shifted_heights() {
        let spec = crate::group::GroupSpec::elementary(2).unwrap();
        let ball = enumerate_ball(&spec, rat(4, 1), false, 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let keys = ball.keys();
        for _ in 0..60 {
            let m = crate::group::unpack_mat(keys[rng.gen_range(0..keys.len())]);
            let f = qform_of(spec.ring, &m).unwrap();
            assert!(f.invariants_hold(2), "coefficient identities must hold");
            assert!(f.e >= f.a && f.e >= 0);
            for x in -3..=3 {
                for y in -3..=3 {
                    let shifted = mat_mul(spec.ring, &m, &unipotent(x, y)).unwrap();
                    assert_eq!(
                        f.eval(x, y).unwrap(),
                        height(spec.ring, &shifted).unwrap(),
                        "form value must equal shifted height at ({x},{y})"
                    );
                }
            }
        }
    }

    #[test]
    fn cutoff_pinned_values() {
        assert_eq!(smooth_cutoff(0.5), 0.0);
        assert_eq!(smooth_cutoff(2.5), 0.0);
        assert_eq!(smooth_cutoff(0.4), 0.0);
        assert_eq!(smooth_cutoff(3.0), 0.0);
        assert_eq!(smooth_cutoff(1.0), 1.0);
        assert_eq!(smooth_cutoff(1.5), 1.0);
        assert_eq!(smooth_cutoff(2.0), 1.0);
        assert!((smooth_cutoff(0.75) - 0.5).abs() < 1e-15, "ramp midpoint");
        assert!((smooth_cutoff(2.25) - 0.5).abs() < 1e-15, "ramp midpoint");
        // Ramps are monotone and the two flanks mirror each other.
        let mut prev = 0.0;
        for i in 0..=100 {
            let x = 0.5 + 0.5 * (i as f64) / 100.0;
            let v = smooth_cutoff(x);
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev, "left ramp must be nondecreasing");
            let mirrored = smooth_cutoff(3.0 - x);
            assert!((v - mirrored).abs() < 1e-15, "flanks mirror at x={x}");
            prev = v;
        }
    }

    #[test]
    fn window_ranges() {
        assert_eq!(window_range(rat(4, 1), Window::Smooth), (3, 9));
        assert_eq!(window_range(rat(4, 1), Window::Sharp), (4, 8));
        assert_eq!(window_range(rat(1, 1), Window::Sharp), (1, 2));
        assert_eq!(window_range(rat(256, 19), Window::Sharp), (14, 26));
        // Smooth support is open: endpoints with Psi = 0 are excluded.
        let (lo, hi) = window_range(rat(8, 1), Window::Smooth);
        assert_eq!((lo, hi), (5, 19));
        assert!(window_weight(lo, rat(8, 1), Window::Smooth) > 0.0);
        assert_eq!(window_weight(4, rat(8, 1), Window::Smooth), 0.0);
        assert_eq!(window_weight(20, rat(8, 1), Window::Smooth), 0.0);
    }

    #[test]
    fn sharp_count_single_inversion() {
        let ring = Ring::new(1).unwrap();
        let s = GroupMat::from_entries([0, 0, -1, 0, 1, 0, 0, 0]);
        let spec = crate::group::GroupSpec::new(ring, vec![s], "inversion").unwrap();
        let ball = OrbitBall::from_elements(&spec, rat(3, 2), &[s], true).unwrap();
        // Q = x^2 + y^2 + 1 over x, y in {1, 2}.
        assert_eq!(rep_count(&ball, 3, rat(1, 1), Window::Sharp).unwrap(), 1.0);
        assert_eq!(rep_count(&ball, 6, rat(1, 1), Window::Sharp).unwrap(), 2.0);
        assert_eq!(rep_count(&ball, 9, rat(1, 1), Window::Sharp).unwrap(), 1.0);
        assert_eq!(rep_count(&ball, 4, rat(1, 1), Window::Sharp).unwrap(), 0.0);
        let hist = sharp_histogram(&ball, rat(1, 1)).unwrap();
        assert_eq!(hist[3], 1);
        assert_eq!(hist[6], 2);
        assert_eq!(hist.iter().sum::<u64>(), 4, "four lattice points in the box");
    }

    #[test]
    fn smooth_mass_identity() {
        // Total smooth mass = #ball * (sum of weights)^2, since every (x, y)
        // lands in exactly one bin.
        let spec = crate::group::GroupSpec::elementary(1).unwrap();
        let ball = enumerate_ball(&spec, rat(3, 1), false, 24).unwrap();
        let x_scale = rat(4, 1);
        let hist = rep_histogram(&ball, x_scale, Window::Smooth).unwrap();
        let total: f64 = hist.iter().sum();
        let (lo, hi) = window_range(x_scale, Window::Smooth);
        let wsum: f64 = (lo..=hi)
            .map(|x| window_weight(x, x_scale, Window::Smooth))
            .sum();
        let expect = ball.len() as f64 * wsum * wsum;
        assert!(
            (total - expect).abs() <= 1e-9 * expect,
            "smooth mass {total} vs {expect}"
        );
        // Histogram and single-n path agree.
        for n in [1, 2, 20, 40] {
            let direct = rep_count(&ball, n, x_scale, Window::Smooth).unwrap();
            let binned = hist.get(n as usize).copied().unwrap_or(0.0);
            assert!((direct - binned).abs() < 1e-12, "mismatch at n={n}");
        }
    }

    #[test]
    fn tiny_instance_is_two_unipotents() {
        let (spec, ball) = tiny_instance().unwrap();
        assert!(ball.filtered && ball.saturated);
        assert_eq!(ball.len(), 2);
        let lower = GroupMat::from_entries([1, 0, 0, 0, 1, 0, 1, 0]);
        let lower_inv = GroupMat::from_entries([1, 0, 0, 0, -1, 0, 1, 0]);
        assert!(ball.contains(&lower));
        assert!(ball.contains(&lower_inv));
        // Window sanity: form values stay inside [N/100, 100N] at N = 64.
        let (min_v, max_v) = window_value_bounds(&ball, rat(4, 1), Window::Smooth).unwrap();
        assert!(min_v >= 64 / 100 && max_v <= 100 * 64, "{min_v}..{max_v}");
        let _ = spec;
    }

    #[test]
    fn represented_set_examples() {
        let set = represented_set(1, 60).unwrap();
        assert!(set[1], "row (0, 1) gives 1");
        assert!(set[2], "row (1, 1) completed by a=1, b=0");
        assert!(set[3], "row (1, 1+i)");
        assert!(!set[0], "the zero row is not unimodular");

        // Independent per-n recount by direct search over rows of that height.
        let ring = Ring::new(1).unwrap();
        for n in 0..=60 {
            let mut found = false;
            'outer: for c1 in -8..=8 as Int {
                for c2 in -8..=8 as Int {
                    let nc = c1 * c1 + c2 * c2;
                    if nc > n {
                        continue;
                    }
                    for d1 in -8..=8 as Int {
                        for d2 in -8..=8 as Int {
                            if nc + d1 * d1 + d2 * d2 == n
                                && unimodular_row(
                                    ring,
                                    RingElt::new(c1, c2),
                                    RingElt::new(d1, d2),
                                )
                                .unwrap()
                            {
                                found = true;
                                break 'outer;
                            }
                        }
                    }
                }
            }
            assert_eq!(set[n as usize], found, "membership mismatch at n={n}");
        }
        assert!(matches!(
            represented_set(1, 10_000_001),
            Err(Error::CostGuard(_))
        ));
    }
}
