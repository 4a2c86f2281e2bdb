//! Determinant-1 matrices over Z[sqrt(-D)], breadth-first orbit-ball
//! enumeration, congruence reduction, full residue groups, and the empirical
//! growth-exponent fit.
//!
//! Ball states are packed into `u128` keys (eight biased 16-bit entries, most
//! significant first) so a saturated radius-32 ball and its explored shell fit
//! in a few GB as flat sorted vectors. The packing preserves lexicographic
//! entry order, which lets every set operation be a sort/merge/binary-search
//! over `u128`.

use crate::error::{Error, Result};
use crate::ring::{gcd_i, Int, Rat, Ring, RingElt};

/// 2x2 matrix over Z[sqrt(-D)] with determinant 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GroupMat {
    pub a: RingElt,
    pub b: RingElt,
    pub c: RingElt,
    pub d: RingElt,
}

impl GroupMat {
    pub fn new(a: RingElt, b: RingElt, c: RingElt, d: RingElt) -> Self {
        GroupMat { a, b, c, d }
    }

    pub fn from_entries(e: [Int; 8]) -> Self {
        GroupMat {
            a: RingElt::new(e[0], e[1]),
            b: RingElt::new(e[2], e[3]),
            c: RingElt::new(e[4], e[5]),
            d: RingElt::new(e[6], e[7]),
        }
    }

    pub fn entries(&self) -> [Int; 8] {
        [
            self.a.re, self.a.im, self.b.re, self.b.im, self.c.re, self.c.im, self.d.re,
            self.d.im,
        ]
    }

    pub fn identity() -> Self {
        GroupMat {
            a: RingElt::ONE,
            b: RingElt::ZERO,
            c: RingElt::ZERO,
            d: RingElt::ONE,
        }
    }
}

pub fn mat_mul(ring: Ring, x: &GroupMat, y: &GroupMat) -> Result<GroupMat> {
    let a = ring.add(ring.mul(x.a, y.a)?, ring.mul(x.b, y.c)?)?;
    let b = ring.add(ring.mul(x.a, y.b)?, ring.mul(x.b, y.d)?)?;
    let c = ring.add(ring.mul(x.c, y.a)?, ring.mul(x.d, y.c)?)?;
    let d = ring.add(ring.mul(x.c, y.b)?, ring.mul(x.d, y.d)?)?;
    Ok(GroupMat { a, b, c, d })
}

pub fn mat_det(ring: Ring, m: &GroupMat) -> Result<RingElt> {
    ring.sub(ring.mul(m.a, m.d)?, ring.mul(m.b, m.c)?)
}

/// Inverse of a determinant-1 matrix: [[d, -b], [-c, a]].
pub fn mat_inv(ring: Ring, m: &GroupMat) -> Result<GroupMat> {
    Ok(GroupMat {
        a: m.d,
        b: ring.neg(m.b)?,
        c: ring.neg(m.c)?,
        d: m.a,
    })
}

/// Squared Frobenius norm: sum of the four entry norms.
pub fn frob_norm_sq(ring: Ring, m: &GroupMat) -> Result<Int> {
    let mut s: Int = 0;
    for e in [m.a, m.b, m.c, m.d] {
        s = s
            .checked_add(ring.norm(e)?)
            .ok_or(Error::Overflow("frobenius norm"))?;
    }
    Ok(s)
}

/// Entrywise reduction mod q. The result is a residue representative, not a
/// determinant-1 matrix over the ring; its determinant is 1 mod q.
pub fn reduce_mod(ring: Ring, m: &GroupMat, q: Int) -> GroupMat {
    GroupMat {
        a: ring.reduce(m.a, q),
        b: ring.reduce(m.b, q),
        c: ring.reduce(m.c, q),
        d: ring.reduce(m.d, q),
    }
}

// ---------------------------------------------------------------------------
// Packed representation.
// ---------------------------------------------------------------------------

const PACK_BIAS: Int = 32768;
/// Largest entry magnitude representable by the packed key.
pub const PACK_MAX: Int = 32767;

/// Packs the eight entries into a u128, most significant entry first, each
/// biased into u16 range. Lexicographic order of entry tuples is preserved.
/// Caller guarantees |entry| <= PACK_MAX.
#[inline]
fn pack_entries(e: &[Int; 8]) -> u128 {
    let mut k: u128 = 0;
    for &v in e {
        debug_assert!(v.abs() <= PACK_MAX, "entry {v} exceeds packed range");
        k = (k << 16) | ((v + PACK_BIAS) as u128 & 0xffff);
    }
    k
}

#[inline]
fn unpack_entries(mut k: u128) -> [Int; 8] {
    let mut e = [0 as Int; 8];
    for i in (0..8).rev() {
        e[i] = ((k & 0xffff) as Int) - PACK_BIAS;
        k >>= 16;
    }
    e
}

pub fn pack_mat(m: &GroupMat) -> Result<u128> {
    let e = m.entries();
    for &v in &e {
        if v.abs() > PACK_MAX {
            return Err(Error::Overflow("matrix entry exceeds packed range"));
        }
    }
    Ok(pack_entries(&e))
}

pub fn unpack_mat(k: u128) -> GroupMat {
    GroupMat::from_entries(unpack_entries(k))
}

// ---------------------------------------------------------------------------
// Group specifications.
// ---------------------------------------------------------------------------

/// A finitely generated subgroup: the ring context plus an inverse-closed
/// generator list.
#[derive(Clone, Debug)]
pub struct GroupSpec {
    pub ring: Ring,
    pub generators: Vec<GroupMat>,
    pub label: String,
}

impl GroupSpec {
    /// Validates determinants and closes the list under inverses.
    pub fn new(ring: Ring, gens: Vec<GroupMat>, label: &str) -> Result<GroupSpec> {
        if gens.is_empty() {
            return Err(Error::Invalid("generator list is empty".into()));
        }
        let mut closed: Vec<GroupMat> = Vec::new();
        for (i, g) in gens.iter().enumerate() {
            let det = mat_det(ring, g)?;
            if det != RingElt::ONE {
                return Err(Error::Invalid(format!(
                    "generator {i} has determinant ({}, {}), expected 1",
                    det.re, det.im
                )));
            }
            if !closed.contains(g) {
                closed.push(*g);
            }
        }
        for i in 0..closed.len() {
            let inv = mat_inv(ring, &closed[i])?;
            if !closed.contains(&inv) {
                closed.push(inv);
            }
        }
        Ok(GroupSpec {
            ring,
            generators: closed,
            label: label.to_string(),
        })
    }

    /// The subgroup generated by the two elementary unipotents and the
    /// inversion. For the Euclidean parameters D = 1, 2 this is the whole
    /// determinant-1 group over the ring.
    pub fn elementary(d: Int) -> Result<GroupSpec> {
        let ring = Ring::new(d)?;
        let t = GroupMat::from_entries([1, 0, 1, 0, 0, 0, 1, 0]);
        let u = GroupMat::from_entries([1, 0, 0, 1, 0, 0, 1, 0]);
        let s = GroupMat::from_entries([0, 0, -1, 0, 1, 0, 0, 0]);
        GroupSpec::new(ring, vec![t, u, s], &format!("elementary-D{d}"))
    }

    /// Parses the plain-text group format: '#' starts a comment, the first
    /// data line is `D <int>`, and each later data line gives one generator as
    /// eight integers a1 a2 b1 b2 c1 c2 d1 d2.
    pub fn parse(text: &str, label: &str) -> Result<GroupSpec> {
        let mut ring: Option<Ring> = None;
        let mut gens: Vec<GroupMat> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let data = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            };
            let toks: Vec<&str> = data.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if ring.is_none() {
                if toks.len() != 2 || (toks[0] != "D" && toks[0] != "d") {
                    return Err(Error::SpecParse {
                        line,
                        msg: format!("expected 'D <int>' header, got '{}'", data.trim()),
                    });
                }
                let d: Int = toks[1].parse().map_err(|_| Error::SpecParse {
                    line,
                    msg: format!("cannot parse ring parameter '{}'", toks[1]),
                })?;
                ring = Some(Ring::new(d).map_err(|e| Error::SpecParse {
                    line,
                    msg: e.to_string(),
                })?);
                continue;
            }
            if toks.len() != 8 {
                return Err(Error::SpecParse {
                    line,
                    msg: format!("expected 8 integers per generator line, got {}", toks.len()),
                });
            }
            let mut e = [0 as Int; 8];
            for (j, t) in toks.iter().enumerate() {
                e[j] = t.parse().map_err(|_| Error::SpecParse {
                    line,
                    msg: format!("cannot parse integer '{t}'"),
                })?;
            }
            gens.push(GroupMat::from_entries(e));
        }
        let ring = ring.ok_or(Error::SpecParse {
            line: 0,
            msg: "missing 'D <int>' header".into(),
        })?;
        GroupSpec::new(ring, gens, label).map_err(|e| match e {
            Error::Invalid(msg) => Error::SpecParse { line: 0, msg },
            other => other,
        })
    }

    /// Largest squared operator norm among the generators. For determinant 1
    /// the singular values satisfy s^2 + 1/s^2 = frobNormSq, so
    /// s_max^2 = (f + sqrt(f^2 - 4)) / 2.
    pub fn max_op_norm_sq(&self) -> Result<f64> {
        let mut best: f64 = 1.0;
        for g in &self.generators {
            let f = frob_norm_sq(self.ring, g)? as f64;
            let s = (f + (f * f - 4.0).max(0.0).sqrt()) / 2.0;
            best = best.max(s);
        }
        Ok(best)
    }
}

// ---------------------------------------------------------------------------
// Orbit balls.
// ---------------------------------------------------------------------------

/// All enumerated group elements with frobNormSq < T^2, stored as sorted
/// packed keys. `filtered` means the bottom-row constraint
/// norm(c) >= T^2/100 was applied after enumeration.
#[derive(Clone, Debug)]
pub struct OrbitBall {
    pub spec: GroupSpec,
    /// Squared radius, kept exact: instances with irrational T are specified
    /// by T^2 directly.
    pub t_sq: Rat,
    keys: Vec<u128>,
    pub filtered: bool,
    /// Element count before the bottom-row filter (equals len() when unfiltered).
    pub unfiltered_count: usize,
    pub word_len_cap: usize,
    pub saturated: bool,
    /// Whether BFS was still finding new states when the cap stopped it.
    pub cap_hit: bool,
    /// BFS layers actually expanded.
    pub layers: usize,
    /// Total distinct states visited inside the prune radius.
    pub explored_states: usize,
}

impl OrbitBall {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[u128] {
        &self.keys
    }

    pub fn iter(&self) -> impl Iterator<Item = GroupMat> + '_ {
        self.keys.iter().map(|&k| unpack_mat(k))
    }

    pub fn contains(&self, m: &GroupMat) -> bool {
        match pack_mat(m) {
            Ok(k) => self.keys.binary_search(&k).is_ok(),
            Err(_) => false,
        }
    }

    /// Builds a ball from an explicit element list (deduplicated, norms
    /// checked against T). Used for hand-picked instances and diagnostics;
    /// enumeration state fields are synthetic.
    pub fn from_elements(
        spec: &GroupSpec,
        t: Rat,
        elements: &[GroupMat],
        filtered: bool,
    ) -> Result<OrbitBall> {
        let t_sq = t * t;
        let mut keys = Vec::with_capacity(elements.len());
        for m in elements {
            let det = mat_det(spec.ring, m)?;
            if det != RingElt::ONE {
                return Err(Error::Invalid("ball element must have determinant 1".into()));
            }
            let f = frob_norm_sq(spec.ring, m)?;
            if Rat::from_integer(f) >= t_sq {
                return Err(Error::Invalid(format!(
                    "element with frobNormSq {f} does not fit in the T={t} ball"
                )));
            }
            if filtered {
                let a = spec.ring.norm(m.c)?;
                if Rat::from_integer(100 * a) < t_sq {
                    return Err(Error::Invalid(
                        "element fails the bottom-row filter for this radius".into(),
                    ));
                }
            }
            keys.push(pack_mat(m)?);
        }
        keys.sort_unstable();
        keys.dedup();
        let n = keys.len();
        Ok(OrbitBall {
            spec: spec.clone(),
            t_sq,
            keys,
            filtered,
            unfiltered_count: n,
            word_len_cap: 0,
            saturated: true,
            cap_hit: false,
            layers: 0,
            explored_states: n,
        })
    }

    /// Applies the bottom-row constraint norm(c) >= T^2/100 to an unfiltered
    /// ball, yielding the same ball enumerate_ball(.., filtered=true, ..)
    /// would produce.
    pub fn filter_rows(&self) -> OrbitBall {
        if self.filtered {
            return self.clone();
        }
        let d = self.spec.ring.d;
        let t_sq = self.t_sq;
        let (num, den) = (*t_sq.numer(), *t_sq.denom());
        let keys: Vec<u128> = self
            .keys
            .iter()
            .copied()
            .filter(|&k| {
                let e = unpack_entries(k);
                let a_gamma = e[4] * e[4] + d * e[5] * e[5];
                // norm(c) >= T^2/100  <=>  100 * norm(c) * den >= num
                100 * a_gamma * den >= num
            })
            .collect();
        OrbitBall {
            spec: self.spec.clone(),
            t_sq: self.t_sq,
            unfiltered_count: self.keys.len(),
            keys,
            filtered: true,
            word_len_cap: self.word_len_cap,
            saturated: self.saturated,
            cap_hit: self.cap_hit,
            layers: self.layers,
            explored_states: self.explored_states,
        }
    }
}

/// Hard cap on distinct visited states; past this the run aborts with a cost
/// guard error rather than exhausting memory.
pub const MAX_BALL_STATES: usize = 200_000_000;

/// Default BFS word-length cap used by the CLI and acceptance runs.
pub const DEFAULT_WORD_LEN_CAP: usize = 256;

const CHUNK: usize = 1 << 21;

/// Merges two sorted deduplicated vectors into one, dropping duplicates.
fn merge_dedup(a: Vec<u128>, b: Vec<u128>) -> Vec<u128> {
    if a.is_empty() {
        return b;
    }
    if b.is_empty() {
        return a;
    }
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Sorted elements of `a` not present in sorted `known`.
fn sorted_difference(a: &[u128], known: &[u128]) -> Vec<u128> {
    let mut out = Vec::new();
    let mut j = 0;
    for &x in a {
        while j < known.len() && known[j] < x {
            j += 1;
        }
        if j >= known.len() || known[j] != x {
            out.push(x);
        }
    }
    out
}

struct Expansion {
    /// New states this layer, sorted, disjoint from `known`.
    new_states: Vec<u128>,
}

/// Expands one BFS layer: every frontier state times every generator, kept if
/// inside the prune radius and not yet visited.
fn expand_layer(
    frontier: &[u128],
    gens: &[[Int; 8]],
    d: Int,
    prune_sq: f64,
    known: &[u128],
) -> Expansion {
    let mut chunks: Vec<Vec<u128>> = Vec::new();
    let mut buf: Vec<u128> = Vec::with_capacity(CHUNK);
    let flush = |buf: &mut Vec<u128>, chunks: &mut Vec<Vec<u128>>| {
        if buf.is_empty() {
            return;
        }
        buf.sort_unstable();
        buf.dedup();
        let fresh = sorted_difference(buf, known);
        buf.clear();
        if !fresh.is_empty() {
            chunks.push(fresh);
        }
    };
    for &key in frontier {
        let m = unpack_entries(key);
        for g in gens {
            // Ring product of row-times-column pairs; entries stay far below
            // i128 range because both factors are bounded by the packed width.
            let p = [
                m[0] * g[0] - d * m[1] * g[1] + m[2] * g[4] - d * m[3] * g[5],
                m[0] * g[1] + m[1] * g[0] + m[2] * g[5] + m[3] * g[4],
                m[0] * g[2] - d * m[1] * g[3] + m[2] * g[6] - d * m[3] * g[7],
                m[0] * g[3] + m[1] * g[2] + m[2] * g[7] + m[3] * g[6],
                m[4] * g[0] - d * m[5] * g[1] + m[6] * g[4] - d * m[7] * g[5],
                m[4] * g[1] + m[5] * g[0] + m[6] * g[5] + m[7] * g[4],
                m[4] * g[2] - d * m[5] * g[3] + m[6] * g[6] - d * m[7] * g[7],
                m[4] * g[3] + m[5] * g[2] + m[6] * g[7] + m[7] * g[6],
            ];
            let frob = p[0] * p[0]
                + d * p[1] * p[1]
                + p[2] * p[2]
                + d * p[3] * p[3]
                + p[4] * p[4]
                + d * p[5] * p[5]
                + p[6] * p[6]
                + d * p[7] * p[7];
            if (frob as f64) < prune_sq {
                buf.push(pack_entries(&p));
                if buf.len() >= CHUNK {
                    flush(&mut buf, &mut chunks);
                }
            }
        }
    }
    flush(&mut buf, &mut chunks);
    // Pairwise tree merge keeps the total move count near n log(#chunks).
    while chunks.len() > 1 {
        let mut next = Vec::with_capacity(chunks.len() / 2 + 1);
        let mut it = chunks.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(merge_dedup(a, b)),
                None => next.push(a),
            }
        }
        chunks = next;
    }
    Expansion {
        new_states: chunks.pop().unwrap_or_default(),
    }
}

/// Breadth-first enumeration of the orbit ball of radius T.
///
/// Products are pruned once their Frobenius norm exceeds T times the largest
/// generator operator norm; an element of the ball can leave that shell only
/// on its final letter, so the shell is the natural search region. Saturation
/// is empirical: after the cap (or exhaustion) one extra layer is expanded
/// and the ball is saturated iff that layer adds no new in-ball element.
pub fn enumerate_ball(
    spec: &GroupSpec,
    t: Rat,
    filtered: bool,
    word_len_cap: usize,
) -> Result<OrbitBall> {
    if t <= Rat::from_integer(0) {
        return Err(Error::Invalid(format!("ball radius must be positive, got {t}")));
    }
    enumerate_ball_sq(spec, t * t, filtered, word_len_cap)
}

/// `enumerate_ball` with the squared radius given directly, for instances
/// whose T is irrational but T^2 rational.
pub fn enumerate_ball_sq(
    spec: &GroupSpec,
    t_sq: Rat,
    filtered: bool,
    word_len_cap: usize,
) -> Result<OrbitBall> {
    if t_sq <= Rat::from_integer(0) {
        return Err(Error::Invalid(format!(
            "squared ball radius must be positive, got {t_sq}"
        )));
    }
    if word_len_cap < 1 {
        return Err(Error::Invalid("word length cap must be >= 1".into()));
    }
    let d = spec.ring.d;
    let (num, den) = (*t_sq.numer(), *t_sq.denom());
    let t_sq_f64 = num as f64 / den as f64;
    // Small multiplicative slack keeps boundary states on the explored side of
    // any f64 rounding; extra states cost time, never correctness.
    let prune_sq = t_sq_f64 * spec.max_op_norm_sq()? * (1.0 + 1e-7);
    if prune_sq.sqrt() > (PACK_MAX - 1) as f64 {
        return Err(Error::CostGuard(format!(
            "prune radius {:.1} exceeds the packed entry range",
            prune_sq.sqrt()
        )));
    }

    let in_ball = |k: u128| -> bool {
        let e = unpack_entries(k);
        let frob = e[0] * e[0]
            + d * e[1] * e[1]
            + e[2] * e[2]
            + d * e[3] * e[3]
            + e[4] * e[4]
            + d * e[5] * e[5]
            + e[6] * e[6]
            + d * e[7] * e[7];
        frob * den < num
    };

    let gens: Vec<[Int; 8]> = spec.generators.iter().map(|g| g.entries()).collect();
    let id_key = pack_mat(&GroupMat::identity())?;
    let mut known: Vec<u128> = vec![id_key];
    let mut frontier: Vec<u128> = vec![id_key];
    let mut ball_keys: Vec<u128> = if in_ball(id_key) { vec![id_key] } else { vec![] };
    let mut layers = 0usize;
    let mut cap_hit = false;
    let mut saturated = false;

    for depth in 1..=word_len_cap {
        if frontier.is_empty() {
            // Prune region exhausted: the extra-layer check is vacuous.
            saturated = true;
            break;
        }
        let exp = expand_layer(&frontier, &gens, d, prune_sq, &known);
        layers = depth;
        ball_keys.extend(exp.new_states.iter().copied().filter(|&k| in_ball(k)));
        known = merge_dedup(known, exp.new_states.clone());
        if known.len() > MAX_BALL_STATES {
            return Err(Error::CostGuard(format!(
                "ball exploration exceeded {MAX_BALL_STATES} states at word length {depth}"
            )));
        }
        frontier = exp.new_states;
    }
    if !saturated {
        if frontier.is_empty() {
            saturated = true;
        } else {
            // Cap reached with work left: probe one extra layer.
            cap_hit = true;
            let probe = expand_layer(&frontier, &gens, d, prune_sq, &known);
            saturated = !probe.new_states.iter().any(|&k| in_ball(k));
        }
    }

    ball_keys.sort_unstable();
    ball_keys.dedup();
    let explored_states = known.len();
    drop(known);

    let ball = OrbitBall {
        spec: spec.clone(),
        t_sq,
        unfiltered_count: ball_keys.len(),
        keys: ball_keys,
        filtered: false,
        word_len_cap,
        saturated,
        cap_hit,
        layers,
        explored_states,
    };
    Ok(if filtered { ball.filter_rows() } else { ball })
}

// ---------------------------------------------------------------------------
// Growth exponent.
// ---------------------------------------------------------------------------

/// Least-squares fit of log ball count against log radius; half the slope
/// estimates the critical exponent.
#[derive(Clone, Debug)]
pub struct DeltaEstimate {
    pub ts: Vec<Rat>,
    pub counts: Vec<usize>,
    pub slope: f64,
    pub half_slope: f64,
}

pub fn estimate_delta_from_counts(ts: &[Rat], counts: &[usize]) -> Result<DeltaEstimate> {
    if ts.len() < 3 || ts.len() != counts.len() {
        return Err(Error::Invalid(format!(
            "need >= 3 radii with matching counts, got {} radii and {} counts",
            ts.len(),
            counts.len()
        )));
    }
    for w in counts.windows(2) {
        if w[1] < w[0] {
            return Err(Error::Invalid(format!(
                "ball counts must be nondecreasing in T, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    let xs: Vec<f64> = ts
        .iter()
        .map(|t| (*t.numer() as f64 / *t.denom() as f64).ln())
        .collect();
    let ys: Vec<f64> = counts
        .iter()
        .map(|&c| {
            if c == 0 {
                Err(Error::Invalid("empty ball in growth fit".into()))
            } else {
                Ok((c as f64).ln())
            }
        })
        .collect::<Result<_>>()?;
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(Error::Invalid("radii must not all be equal".into()));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    Ok(DeltaEstimate {
        ts: ts.to_vec(),
        counts: counts.to_vec(),
        slope,
        half_slope: slope / 2.0,
    })
}

/// Enumerates unfiltered balls at each radius and fits the growth exponent.
/// Every ball must be saturated; an unsaturated radius is an error because the
/// fit would understate the count there.
pub fn estimate_delta(spec: &GroupSpec, ts: &[Rat], word_len_cap: usize) -> Result<DeltaEstimate> {
    if ts.len() < 3 {
        return Err(Error::Invalid(format!("need >= 3 radii, got {}", ts.len())));
    }
    let mut counts = Vec::with_capacity(ts.len());
    for &t in ts {
        let ball = enumerate_ball(spec, t, false, word_len_cap)?;
        if !ball.saturated {
            return Err(Error::Unsaturated(format!(
                "ball at T={t} hit the word-length cap {word_len_cap} while still growing"
            )));
        }
        counts.push(ball.len());
    }
    estimate_delta_from_counts(ts, &counts)
}

// ---------------------------------------------------------------------------
// Residue groups and images.
// ---------------------------------------------------------------------------

/// Packs a residue matrix (entries in [0, q), q <= 255) into a u64 image key.
pub fn pack_residue(m: &GroupMat) -> u64 {
    let e = m.entries();
    let mut k: u64 = 0;
    for &v in &e {
        debug_assert!((0..256).contains(&v), "residue entry out of packed range");
        k = (k << 8) | (v as u64 & 0xff);
    }
    k
}

pub fn unpack_residue(mut k: u64) -> GroupMat {
    let mut e = [0 as Int; 8];
    for i in (0..8).rev() {
        e[i] = (k & 0xff) as Int;
        k >>= 8;
    }
    GroupMat::from_entries(e)
}

/// Sorted deduplicated image of the ball in the residue group mod q.
pub fn residue_image(ball: &OrbitBall, q: Int) -> Result<Vec<u64>> {
    if !(1..=255).contains(&q) {
        return Err(Error::Invalid(format!("residue image needs 1 <= q <= 255, got {q}")));
    }
    let ring = ball.spec.ring;
    let mut keys: Vec<u64> = ball
        .iter()
        .map(|m| pack_residue(&reduce_mod(ring, &m, q)))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    Ok(keys)
}

/// Number of unimodular bottom rows mod q (rows extending to a determinant-1
/// residue matrix). Computed by brute force per prime and lifted by p^4 per
/// extra power; the lift is validated against brute force in tests.
pub fn unimodular_row_count(d: Int, q: Int) -> Result<u128> {
    let ring = Ring::new(d)?;
    let mut total: u128 = 1;
    for (p, k) in crate::ring::factorize(q as u64) {
        let pi = p as Int;
        let mut base: u128 = 0;
        for c1 in 0..pi {
            for c2 in 0..pi {
                for d1 in 0..pi {
                    for d2 in 0..pi {
                        if crate::ring::unimodular_row_mod(
                            ring,
                            RingElt::new(c1, c2),
                            RingElt::new(d1, d2),
                            pi,
                        )? {
                            base += 1;
                        }
                    }
                }
            }
        }
        let mut factor = base;
        for _ in 1..k {
            factor *= (p as u128).pow(4);
        }
        total *= factor;
    }
    Ok(total)
}

/// Order of the full determinant-1 residue group mod q: each unimodular
/// bottom row admits exactly q^2 completing top rows.
pub fn full_residue_group_order(d: Int, q: Int) -> Result<u128> {
    if !(1..=2197).contains(&q) {
        return Err(Error::CostGuard(format!(
            "residue group order guard: need 1 <= q <= 2197, got {q}"
        )));
    }
    Ok(unimodular_row_count(d, q)? * (q as u128) * (q as u128))
}

/// All elements of the determinant-1 residue group mod q by direct entry
/// enumeration. Costs q^8, guarded at 10^7.
pub fn full_residue_group_elements(d: Int, q: Int) -> Result<Vec<GroupMat>> {
    let cost = (q as u128).checked_pow(8).unwrap_or(u128::MAX);
    if cost > 10_000_000 {
        return Err(Error::CostGuard(format!(
            "direct residue enumeration costs q^8 = {cost}, over the 10^7 guard"
        )));
    }
    let ring = Ring::new(d)?;
    let mut out = Vec::new();
    let one = RingElt::ONE;
    for a1 in 0..q {
        for a2 in 0..q {
            for b1 in 0..q {
                for b2 in 0..q {
                    for c1 in 0..q {
                        for c2 in 0..q {
                            for d1 in 0..q {
                                for d2 in 0..q {
                                    let m = GroupMat::from_entries([a1, a2, b1, b2, c1, c2, d1, d2]);
                                    let det = mat_det(ring, &m)?;
                                    if ring.reduce(det, q) == one {
                                        out.push(m);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Largest number of ball elements sharing one bottom row, with the number of
/// distinct rows. Meaningful on filtered balls where rows nearly determine
/// the element.
pub fn bottom_row_multiplicity(ball: &OrbitBall) -> (usize, usize) {
    if ball.is_empty() {
        return (0, 0);
    }
    let mut rows: Vec<u64> = ball
        .keys()
        .iter()
        .map(|&k| (k & 0xffff_ffff_ffff_ffff) as u64)
        .collect();
    rows.sort_unstable();
    let mut max_mult = 0usize;
    let mut distinct = 0usize;
    let mut i = 0;
    while i < rows.len() {
        let mut j = i + 1;
        while j < rows.len() && rows[j] == rows[i] {
            j += 1;
        }
        max_mult = max_mult.max(j - i);
        distinct += 1;
        i = j;
    }
    (max_mult, distinct)
}

/// gcd of q with the determinant defect; exposed for congruence diagnostics.
pub fn det_defect_gcd(ring: Ring, m: &GroupMat, q: Int) -> Result<Int> {
    let det = mat_det(ring, m)?;
    let defect = ring.sub(det, RingElt::ONE)?;
    Ok(gcd_i(gcd_i(defect.re, defect.im), q))
}
