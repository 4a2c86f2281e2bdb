//! The exact circle decomposition: the smooth generating function, the wedge
//! majorant over rational neighborhoods, the closed-form major term, the
//! residual minor term, and the schedule experiments built on them.
//!
//! The decomposition is exact for any parameter pair with N = T^2 X^2: the
//! major term integrates the wedge-windowed generating function in closed
//! form, the minor term is the residual, and a composite Gauss-Legendre
//! quadrature oracle validates the interchange of sum and integral on
//! instances small enough to integrate numerically.

use crate::error::{Error, Result};
use crate::expsum::{e_frac, ramanujan_sum, reduced_residues};
use crate::group::{enumerate_ball_sq, DeltaEstimate, GroupSpec, OrbitBall};
use crate::local::{is_admissible, LocalStructure};
use crate::qform::{rep_histogram, represented_set, sharp_histogram, Window};
use crate::ring::{gcd_i, isqrt, rat_f64, Int, Rat};
use num_complex::Complex64;
use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Parameters.
// ---------------------------------------------------------------------------

/// Circle parameters tied by N = T^2 X^2 exactly (checked as rationals).
#[derive(Clone, Debug)]
pub struct CircleParams {
    pub n: u64,
    pub t: Rat,
    pub x: Rat,
    pub k0: u64,
    pub q0: u64,
    /// Bookkeeping only: records which exponent regime T was chosen from.
    pub sigma: Rat,
}

impl CircleParams {
    pub fn new(n: u64, t: Rat, x: Rat, k0: u64, q0: u64, sigma: Rat) -> Result<Self> {
        if t <= Rat::from_integer(0) || x <= Rat::from_integer(0) {
            return Err(Error::Invalid("T and X must be positive".into()));
        }
        if k0 < 1 || q0 < 1 {
            return Err(Error::Invalid("K0 and Q0 must be at least 1".into()));
        }
        if t * t * x * x != Rat::from_integer(n as Int) {
            return Err(Error::Invalid(format!(
                "N = T^2 X^2 must hold exactly: {n} vs {}",
                t * t * x * x
            )));
        }
        Ok(CircleParams { n, t, x, k0, q0, sigma })
    }

    /// Derives the parameter point for a scale N: T is the best rational
    /// approximation to N^sigma with denominator at most 10, X = sqrt(N)/T
    /// (N must be a perfect square so the product constraint stays exact),
    /// Q0 = max(2, floor(T)), K0 = Q0^3.
    pub fn schedule_point(n: u64, sigma: Rat) -> Result<Self> {
        let s = isqrt(n as Int);
        if s * s != n as Int {
            return Err(Error::Invalid(format!(
                "schedule scale {n} must be a perfect square"
            )));
        }
        let target = (n as f64).powf(rat_f64(sigma));
        let mut best = Rat::from_integer(1);
        let mut best_err = f64::INFINITY;
        for den in 1..=10 as Int {
            let num = (target * den as f64).round() as Int;
            if num < 1 {
                continue;
            }
            let err = (target - num as f64 / den as f64).abs();
            if err + 1e-15 < best_err {
                best_err = err;
                best = Rat::new(num, den);
            }
        }
        let t = best;
        if t > Rat::from_integer(s) {
            return Err(Error::Invalid(format!(
                "approximated T {t} exceeds sqrt(N) = {s}"
            )));
        }
        let x = Rat::from_integer(s) / t;
        let q0 = (*(t.floor()).numer()).max(2) as u64;
        let k0 = q0 * q0 * q0;
        CircleParams::new(n, t, x, k0, q0, sigma)
    }
}

// ---------------------------------------------------------------------------
// Wedge majorant.
// ---------------------------------------------------------------------------

/// The triangular bump max(0, 1 - |x|).
pub fn wedge(x: f64) -> f64 {
    (1.0 - x.abs()).max(0.0)
}

/// Fourier transform of the wedge: (sin(pi y)/(pi y))^2, 1 at 0.
pub fn wedge_hat(y: f64) -> f64 {
    if y == 0.0 {
        return 1.0;
    }
    let t = PI * y;
    let s = t.sin() / t;
    s * s
}

/// The majorant sum of wedges of width K0/N around every reduced rational
/// with denominator at most Q0 (q = 1 contributing the single center r = 0,
/// i.e. the integers). 1-periodic, valued in [0, Q0^2].
pub fn tee(theta: f64, params: &CircleParams) -> f64 {
    let scale = params.n as f64 / params.k0 as f64;
    let width = params.k0 as f64 / params.n as f64;
    let mut total = 0.0;
    for q in 1..=params.q0 {
        for r in reduced_residues(q as Int) {
            let center = r as f64 / q as f64;
            // Integer shifts m with |theta + m - center| <= width.
            let lo = (center - theta - width).ceil() as i64;
            let hi = (center - theta + width).floor() as i64;
            for m in lo..=hi {
                total += wedge(scale * (theta + m as f64 - center));
            }
        }
    }
    total
}

// ---------------------------------------------------------------------------
// The smooth generating function.
// ---------------------------------------------------------------------------

/// Smooth-window representation histogram bundled with its parameters: the
/// coefficients of the generating function R-hat.
#[derive(Clone, Debug)]
pub struct SmoothSetup {
    pub params: CircleParams,
    /// hist[v] = smooth-weighted count of representations of v.
    pub hist: Vec<f64>,
    pub ball_len: usize,
}

pub fn smooth_setup(ball: &OrbitBall, params: &CircleParams) -> Result<SmoothSetup> {
    let hist = rep_histogram(ball, params.x, Window::Smooth)?;
    Ok(SmoothSetup {
        params: params.clone(),
        hist,
        ball_len: ball.len(),
    })
}

fn r_hat_from_hist(hist: &[f64], theta: f64) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for (v, &h) in hist.iter().enumerate() {
        if h == 0.0 {
            continue;
        }
        let angle = std::f64::consts::TAU * ((v as f64 * theta).fract());
        s += h * Complex64::new(angle.cos(), angle.sin());
    }
    s
}

/// The generating function at theta: sum over the ball and the smooth window
/// of the weights times e(Q theta). 1-periodic; its value at 0 dominates.
pub fn r_hat(theta: f64, ball: &OrbitBall, params: &CircleParams) -> Result<Complex64> {
    let setup = smooth_setup(ball, params)?;
    Ok(r_hat_from_hist(&setup.hist, theta))
}

// ---------------------------------------------------------------------------
// Major term: two independent evaluations.
// ---------------------------------------------------------------------------

/// Per-(q, r) complex evaluation of the major term at one n, with the
/// imaginary part asserted to cancel. This is the shape obtained by
/// integrating the wedge against the generating function term by term.
pub fn major_exact_setup(setup: &SmoothSetup, n: Int) -> f64 {
    let p = &setup.params;
    let ratio = p.k0 as f64 / p.n as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for q in 1..=p.q0 {
        let qi = q as Int;
        for r in reduced_residues(qi) {
            let mut inner = Complex64::new(0.0, 0.0);
            for (v, &h) in setup.hist.iter().enumerate() {
                if h == 0.0 {
                    continue;
                }
                let m = v as Int - n;
                inner += h * wedge_hat(ratio * m as f64) * e_frac(v as Int * r, qi);
            }
            total += inner * e_frac(-n * r, qi);
        }
    }
    let mass: f64 = setup.hist.iter().sum();
    assert!(
        total.im.abs() <= 1e-8 * (1.0 + mass),
        "major term must be real: imag {} at n={n}",
        total.im
    );
    ratio * total.re
}

pub fn major_exact(n: Int, ball: &OrbitBall, params: &CircleParams) -> Result<f64> {
    let setup = smooth_setup(ball, params)?;
    Ok(major_exact_setup(&setup, n))
}

/// Kernel evaluation of the major term for every n in [n_lo, n_hi]: the
/// (q, r) sums collapse to Ramanujan sums, leaving a real convolution
/// kernel W(m) = (K0/N) wedge_hat((K0/N) m) sum_{q <= Q0} c_q(m).
/// Algebraically identical to `major_exact_setup`, evaluated independently.
pub fn major_kernel_range(setup: &SmoothSetup, n_lo: Int, n_hi: Int) -> Vec<f64> {
    let p = &setup.params;
    let ratio = p.k0 as f64 / p.n as f64;
    // Ramanujan tables per q: c_q(m) depends on m mod q.
    let tables: Vec<Vec<Int>> = (1..=p.q0)
        .map(|q| (0..q as Int).map(|m| ramanujan_sum(q, m)).collect())
        .collect();
    // sin^2(pi m K0/N) is periodic in m with period N/gcd(K0, N).
    let g = gcd_i(p.k0 as Int, p.n as Int);
    let (num, den) = (p.k0 as Int / g, p.n as Int / g);
    let sin2: Vec<f64> = (0..den)
        .map(|j| {
            let s = (PI * j as f64 / den as f64).sin();
            s * s
        })
        .collect();
    let kernel = |m: Int| -> f64 {
        let w = if m == 0 {
            1.0
        } else {
            let j = (m * num).rem_euclid(den) as usize;
            let t = PI * ratio * m as f64;
            sin2[j] / (t * t)
        };
        let c: Int = tables.iter().map(|tab| tab[(m.rem_euclid(tab.len() as Int)) as usize]).sum();
        ratio * w * c as f64
    };
    let mut out = Vec::with_capacity((n_hi - n_lo + 1).max(0) as usize);
    for n in n_lo..=n_hi {
        let mut acc = 0.0;
        for (v, &h) in setup.hist.iter().enumerate() {
            if h == 0.0 {
                continue;
            }
            acc += h * kernel(v as Int - n);
        }
        out.push(acc);
    }
    out
}

/// Residual minor term: the smooth count minus the major term. Empty balls
/// give 0 identically.
pub fn minor_residual(n: Int, ball: &OrbitBall, params: &CircleParams) -> Result<f64> {
    let setup = smooth_setup(ball, params)?;
    let smooth = if n >= 0 {
        setup.hist.get(n as usize).copied().unwrap_or(0.0)
    } else {
        0.0
    };
    Ok(smooth - major_exact_setup(&setup, n))
}

// ---------------------------------------------------------------------------
// Quadrature oracle.
// ---------------------------------------------------------------------------

const GL8_NODES: [f64; 4] = [
    0.1834346424956498,
    0.5255324099163290,
    0.7966664774136267,
    0.9602898564975363,
];
const GL8_WEIGHTS: [f64; 4] = [
    0.3626837833783620,
    0.3137066458778873,
    0.2223810344533745,
    0.1012285362903763,
];
const GL16_NODES: [f64; 8] = [
    0.0950125098376374,
    0.2816035507792589,
    0.4580167776572274,
    0.6178762444026438,
    0.7554044083550030,
    0.8656312023878318,
    0.9445750230732326,
    0.9894009349916499,
];
const GL16_WEIGHTS: [f64; 8] = [
    0.1894506104550685,
    0.1826034150449236,
    0.1691565193950025,
    0.1495959888165767,
    0.1246289712555339,
    0.0951585116824928,
    0.0622535239386479,
    0.0271524594117541,
];

struct QuadNode {
    theta: f64,
    weight: f64,
    majorant_part: Complex64,
    residual_part: Complex64,
}

/// Composite Gauss-Legendre quadrature of the circle integrand, with the
/// mesh refined at every wedge corner so the piecewise-linear majorant is
/// polynomial on each cell. `refined` halves the step and doubles the nodes;
/// the oracle is validated against its own refinement before use.
pub struct CircleQuadrature {
    nodes: Vec<QuadNode>,
}

pub fn circle_quadrature(setup: &SmoothSetup, refined: bool) -> CircleQuadrature {
    let p = &setup.params;
    let steps = 64 * p.n * if refined { 2 } else { 1 };
    let width = p.k0 as f64 / p.n as f64;
    let mut breaks: Vec<f64> = (0..=steps).map(|j| j as f64 / steps as f64).collect();
    for q in 1..=p.q0 {
        for r in 0..=q {
            let c = r as f64 / q as f64;
            for corner in [c - width, c, c + width] {
                if (0.0..=1.0).contains(&corner) {
                    breaks.push(corner);
                }
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    let (xs, ws): (&[f64], &[f64]) = if refined {
        (&GL16_NODES, &GL16_WEIGHTS)
    } else {
        (&GL8_NODES, &GL8_WEIGHTS)
    };
    let mut nodes = Vec::with_capacity((breaks.len() - 1) * xs.len() * 2);
    for win in breaks.windows(2) {
        let (a, b) = (win[0], win[1]);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (&x, &w) in xs.iter().zip(ws) {
            for theta in [mid - half * x, mid + half * x] {
                let rh = r_hat_from_hist(&setup.hist, theta);
                let t = tee(theta, p);
                nodes.push(QuadNode {
                    theta,
                    weight: half * w,
                    majorant_part: t * rh,
                    residual_part: (1.0 - t) * rh,
                });
            }
        }
    }
    CircleQuadrature { nodes }
}

impl CircleQuadrature {
    /// Integral of the majorant-windowed generating function against e(-n theta).
    pub fn major(&self, n: Int) -> f64 {
        self.integrate(n, |node| node.majorant_part)
    }

    /// Integral of the complementary window against e(-n theta).
    pub fn minor(&self, n: Int) -> f64 {
        self.integrate(n, |node| node.residual_part)
    }

    fn integrate(&self, n: Int, pick: impl Fn(&QuadNode) -> Complex64) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for node in &self.nodes {
            let angle = -std::f64::consts::TAU * ((n as f64 * node.theta) % 1.0);
            acc += node.weight * pick(node) * Complex64::new(angle.cos(), angle.sin());
        }
        acc.re
    }
}

// ---------------------------------------------------------------------------
// Row assembly for reports.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct CircleRow {
    pub n: u64,
    pub admissible: bool,
    pub r_sharp: u64,
    pub r_smooth: f64,
    pub major: f64,
    pub minor: f64,
}

/// One row per n in [n_lo, n_hi]: membership, both counts, and the exact
/// decomposition. The major column uses the kernel path (deterministic
/// iteration order); minor is the residual against the smooth count.
pub fn circle_rows(
    setup: &SmoothSetup,
    sharp: &[u64],
    ls: &LocalStructure,
    n_lo: u64,
    n_hi: u64,
) -> Vec<CircleRow> {
    let majors = major_kernel_range(setup, n_lo as Int, n_hi as Int);
    (n_lo..=n_hi)
        .map(|n| {
            let r_smooth = setup.hist.get(n as usize).copied().unwrap_or(0.0);
            let major = majors[(n - n_lo) as usize];
            CircleRow {
                n,
                admissible: is_admissible(ls, n as Int),
                r_sharp: sharp.get(n as usize).copied().unwrap_or(0),
                r_smooth,
                major,
                minor: r_smooth - major,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Schedule experiment: normalized minor-term mass.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct L2Point {
    pub n: u64,
    pub t: Rat,
    pub x: Rat,
    pub q0: u64,
    pub k0: u64,
    pub ball_len: usize,
    /// Sum over n in [N, 2N] of the squared minor term.
    pub sum_sq: f64,
    /// sum_sq / (T^{4 delta_hat - 4} N).
    pub normalized: f64,
}

#[derive(Clone, Debug)]
pub struct L2Report {
    pub sigma: Rat,
    pub delta_hat: f64,
    pub points: Vec<L2Point>,
    /// Consecutive ratios of the normalized values (trend monitor).
    pub ratios: Vec<f64>,
}

/// Minor-term mass across a schedule of scales, normalized by the growth
/// prediction. Trend is reported, not asserted.
pub fn l2_minor_experiment(
    spec: &GroupSpec,
    scales: &[u64],
    sigma: Rat,
    delta: &DeltaEstimate,
    word_len_cap: usize,
) -> Result<L2Report> {
    let mut points = Vec::with_capacity(scales.len());
    for &n in scales {
        let params = CircleParams::schedule_point(n, sigma)?;
        let ball = enumerate_ball_sq(spec, params.t * params.t, true, word_len_cap)?;
        let setup = smooth_setup(&ball, &params)?;
        let majors = major_kernel_range(&setup, n as Int, 2 * n as Int);
        let mut sum_sq = 0.0;
        for nn in n..=2 * n {
            let smooth = setup.hist.get(nn as usize).copied().unwrap_or(0.0);
            let minor = smooth - majors[(nn - n) as usize];
            sum_sq += minor * minor;
        }
        let t_f = rat_f64(params.t);
        let normalized = sum_sq / (t_f.powf(4.0 * delta.half_slope - 4.0) * n as f64);
        points.push(L2Point {
            n,
            t: params.t,
            x: params.x,
            q0: params.q0,
            k0: params.k0,
            ball_len: ball.len(),
            sum_sq,
            normalized,
        });
    }
    let ratios = points
        .windows(2)
        .map(|w| w[1].normalized / w[0].normalized)
        .collect();
    Ok(L2Report {
        sigma,
        delta_hat: delta.half_slope,
        points,
        ratios,
    })
}

// ---------------------------------------------------------------------------
// Exceptional set.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ExceptionalReport {
    pub range: (u64, u64),
    pub admissible_count: usize,
    /// Admissible n in range with sharp count zero over the given ball.
    pub exceptional: Vec<u64>,
    /// #exceptional / #admissible; None when no admissible n is in range.
    pub ratio: Option<f64>,
    /// Subset of `exceptional` that the unrestricted-pair oracle also fails
    /// to represent (genuine exceptions rather than ball-coverage misses).
    pub oracle_confirmed: Vec<u64>,
}

/// Membership experiment: sharp counts over the ball versus admissibility,
/// cross-checked against the unrestricted represented-value oracle.
pub fn exceptional_set(
    ball: &OrbitBall,
    ls: &LocalStructure,
    x_scale: Rat,
    n_lo: u64,
    n_hi: u64,
    oracle_bound: Int,
) -> Result<ExceptionalReport> {
    if n_lo > n_hi {
        return Err(Error::Invalid("empty range".into()));
    }
    let sharp = sharp_histogram(ball, x_scale)?;
    let oracle = represented_set(ball.spec.ring.d, oracle_bound)?;
    let mut admissible_count = 0usize;
    let mut exceptional = Vec::new();
    let mut oracle_confirmed = Vec::new();
    for n in n_lo..=n_hi {
        if !is_admissible(ls, n as Int) {
            continue;
        }
        admissible_count += 1;
        if sharp.get(n as usize).copied().unwrap_or(0) == 0 {
            exceptional.push(n);
            if !oracle.get(n as usize).copied().unwrap_or(false) {
                oracle_confirmed.push(n);
            }
        }
    }
    let ratio = if admissible_count > 0 {
        Some(exceptional.len() as f64 / admissible_count as f64)
    } else {
        None
    };
    Ok(ExceptionalReport {
        range: (n_lo, n_hi),
        admissible_count,
        exceptional,
        ratio,
        oracle_confirmed,
    })
}
