//! Python bindings over the core crate: group specs and orbit balls, height
//! histograms, local admissibility, the closed-form densities and sums, and
//! the circle-method decomposition. Thin wrappers only; all arithmetic lives
//! in the core crate. Rationals cross the boundary as (numerator,
//! denominator) pairs and complex values as (re, im) pairs, so the module
//! needs nothing beyond builtin Python types.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use bianchi_heights::acceptance;
use bianchi_heights::circle::{circle_rows, smooth_setup, CircleParams};
use bianchi_heights::expsum::{gauss_quad, ramanujan_sum};
use bianchi_heights::group::{
    bottom_row_multiplicity, enumerate_ball, estimate_delta, GroupMat, GroupSpec, OrbitBall,
    DEFAULT_WORD_LEN_CAP,
};
use bianchi_heights::local::{admissible_structure, is_admissible, tau_p, tau_p_closed, LocalStructure};
use bianchi_heights::qform::{height, qform_of, represented_set, sharp_histogram};
use bianchi_heights::ring::{Int, Rat, Ring};
use bianchi_heights::Error;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn rat_pair(r: Rat) -> (Int, Int) {
    (*r.numer(), *r.denom())
}

/// A finitely generated group over Z[sqrt(-D)], closed under inverses.
#[pyclass(name = "GroupSpec", frozen)]
struct PyGroupSpec {
    inner: GroupSpec,
}

#[pymethods]
impl PyGroupSpec {
    /// The full elementary-generated group for discriminant parameter d.
    #[staticmethod]
    fn elementary(d: Int) -> PyResult<Self> {
        Ok(Self { inner: GroupSpec::elementary(d).map_err(err)? })
    }

    /// Parse the text form: a "D <int>" line, then one generator per line as
    /// eight integers a_re a_im b_re b_im c_re c_im d_re d_im; '#' comments.
    #[staticmethod]
    fn parse(text: &str, label: &str) -> PyResult<Self> {
        Ok(Self { inner: GroupSpec::parse(text, label).map_err(err)? })
    }

    #[getter]
    fn d(&self) -> Int {
        self.inner.ring.d
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label.clone()
    }

    /// Generators (inverse-closed) as rows of eight integers.
    #[getter]
    fn generators(&self) -> Vec<[Int; 8]> {
        self.inner.generators.iter().map(GroupMat::entries).collect()
    }

    /// Orbit ball of radius t under the squared-entry height, breadth first.
    #[pyo3(signature = (t, filtered = true, word_len_cap = DEFAULT_WORD_LEN_CAP))]
    fn ball(&self, t: Int, filtered: bool, word_len_cap: usize) -> PyResult<PyBall> {
        let b = enumerate_ball(&self.inner, Rat::from_integer(t), filtered, word_len_cap)
            .map_err(err)?;
        Ok(PyBall { inner: b })
    }

    /// Stabilized admissibility data: per-prime lift behavior, the frozen
    /// modulus L, and the admissible classes mod L.
    #[pyo3(signature = (t = 6, prime_bound = 5, exp_bound = 4))]
    fn local_structure(&self, t: Int, prime_bound: u64, exp_bound: u32) -> PyResult<PyLocalStructure> {
        let ball =
            enumerate_ball(&self.inner, Rat::from_integer(t), false, DEFAULT_WORD_LEN_CAP)
                .map_err(err)?;
        let ls = admissible_structure(&self.inner, &ball, prime_bound, exp_bound).map_err(err)?;
        Ok(PyLocalStructure { inner: ls })
    }

    /// Least-squares growth exponent over the given radii: (slope, slope/2).
    /// The half slope is the critical-exponent estimate.
    #[pyo3(signature = (ts, word_len_cap = DEFAULT_WORD_LEN_CAP))]
    fn delta(&self, ts: Vec<Int>, word_len_cap: usize) -> PyResult<(f64, f64)> {
        let ts: Vec<Rat> = ts.into_iter().map(Rat::from_integer).collect();
        let est = estimate_delta(&self.inner, &ts, word_len_cap).map_err(err)?;
        Ok((est.slope, est.half_slope))
    }

    /// Exact decomposition rows for n in [n, 2n]: (n, admissible, R_sharp,
    /// R_smooth, major, minor). Scheduling follows the sigma exponent.
    #[pyo3(signature = (n, sigma = (1, 8), prime_bound = 3))]
    fn circle_table(
        &self,
        n: u64,
        sigma: (Int, Int),
        prime_bound: u64,
    ) -> PyResult<Vec<(u64, bool, u64, f64, f64, f64)>> {
        let sigma = Rat::new(sigma.0, sigma.1);
        let params = CircleParams::schedule_point(n, sigma).map_err(err)?;
        let ball = enumerate_ball(&self.inner, params.t, true, DEFAULT_WORD_LEN_CAP).map_err(err)?;
        let setup = smooth_setup(&ball, &params).map_err(err)?;
        let sharp = sharp_histogram(&ball, params.x).map_err(err)?;
        let probe =
            enumerate_ball(&self.inner, Rat::from_integer(6), false, DEFAULT_WORD_LEN_CAP)
                .map_err(err)?;
        let ls = admissible_structure(&self.inner, &probe, prime_bound, 4).map_err(err)?;
        let rows = circle_rows(&setup, &sharp, &ls, n, 2 * n);
        Ok(rows
            .into_iter()
            .map(|r| (r.n, r.admissible, r.r_sharp, r.r_smooth, r.major, r.minor))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "GroupSpec(d={}, label={:?}, generators={})",
            self.inner.ring.d,
            self.inner.label,
            self.inner.generators.len()
        )
    }
}

/// A breadth-first orbit ball, optionally filtered to one representative per
/// bottom row.
#[pyclass(name = "Ball", frozen)]
struct PyBall {
    inner: OrbitBall,
}

#[pymethods]
impl PyBall {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn layers(&self) -> usize {
        self.inner.layers
    }

    #[getter]
    fn saturated(&self) -> bool {
        self.inner.saturated
    }

    #[getter]
    fn explored_states(&self) -> usize {
        self.inner.explored_states
    }

    /// Elements as rows of eight integers a_re a_im b_re b_im c_re c_im d_re d_im.
    fn elements(&self) -> Vec<[Int; 8]> {
        self.inner.iter().map(|m| m.entries()).collect()
    }

    /// Applies the bottom-row positivity window norm(c) >= T^2/100, the same
    /// constraint `ball(t, filtered=True)` applies during enumeration.
    fn filter_rows(&self) -> PyBall {
        PyBall { inner: self.inner.filter_rows() }
    }

    /// (max multiplicity, distinct rows) over bottom rows.
    fn row_multiplicity(&self) -> (usize, usize) {
        bottom_row_multiplicity(&self.inner)
    }

    /// Sorted distinct height values over the ball.
    fn heights(&self) -> PyResult<Vec<Int>> {
        let ring = self.inner.spec.ring;
        let mut hs = Vec::with_capacity(self.inner.len());
        for m in self.inner.iter() {
            hs.push(height(ring, &m).map_err(err)?);
        }
        hs.sort_unstable();
        hs.dedup();
        Ok(hs)
    }

    /// Histogram of heights up to x_scale^2: index n holds the number of
    /// rows of height n.
    fn sharp_histogram(&self, x_scale: Int) -> PyResult<Vec<u64>> {
        sharp_histogram(&self.inner, Rat::from_integer(x_scale)).map_err(err)
    }

    /// Height-form coefficients (A, B, C, D, E) for each element.
    fn forms(&self) -> PyResult<Vec<(Int, Int, Int, Int, Int)>> {
        let ring = self.inner.spec.ring;
        let mut out = Vec::with_capacity(self.inner.len());
        for m in self.inner.iter() {
            let f = qform_of(ring, &m).map_err(err)?;
            out.push((f.a, f.b, f.c, f.d, f.e));
        }
        Ok(out)
    }

    fn __repr__(&self) -> String {
        format!(
            "Ball(len={}, layers={}, saturated={})",
            self.inner.len(),
            self.inner.layers,
            self.inner.saturated
        )
    }
}

/// Stabilized local admissibility: modulus L and the admissible classes.
#[pyclass(name = "LocalStructure", frozen)]
struct PyLocalStructure {
    inner: LocalStructure,
}

#[pymethods]
impl PyLocalStructure {
    #[getter]
    fn l(&self) -> i64 {
        self.inner.l
    }

    #[getter]
    fn d(&self) -> i64 {
        self.inner.d
    }

    #[getter]
    fn bad_primes(&self) -> Vec<u64> {
        self.inner.bad_primes.clone()
    }

    #[getter]
    fn admissible_classes(&self) -> Vec<i64> {
        self.inner.admissible_classes.clone()
    }

    fn is_admissible(&self, n: Int) -> bool {
        is_admissible(&self.inner, n)
    }

    fn __repr__(&self) -> String {
        format!(
            "LocalStructure(d={}, l={}, classes={:?}, bad_primes={:?})",
            self.inner.d, self.inner.l, self.inner.admissible_classes, self.inner.bad_primes
        )
    }
}

/// Height |c|^2 + |d|^2 of the matrix with the given eight entries.
#[pyfunction]
fn height_of(d: Int, entries: [Int; 8]) -> PyResult<Int> {
    let ring = Ring::new(d).map_err(err)?;
    height(ring, &GroupMat::from_entries(entries)).map_err(err)
}

/// Closed-form local density at p as (numerator, denominator).
#[pyfunction]
fn tau(d: Int, p: u64, n: Int) -> PyResult<(Int, Int)> {
    Ok(rat_pair(tau_p_closed(d, p, n).map_err(err)?))
}

/// Brute-force local density at p over the full residue group, shifted to
/// the window point (x, y); the oracle behind `tau`.
#[pyfunction]
#[pyo3(signature = (d, p, n, x = 0, y = 0))]
fn tau_brute(d: Int, p: u64, n: Int, x: Int, y: Int) -> PyResult<(Int, Int)> {
    Ok(rat_pair(tau_p(d, p, n, x, y).map_err(err)?))
}

/// Ramanujan sum c_q(m), exact.
#[pyfunction]
fn ramanujan(q: u64, m: Int) -> Int {
    ramanujan_sum(q, m)
}

/// Quadratic Gauss sum sum_x e((a x^2 + b x) / p^nu) as (re, im).
#[pyfunction]
fn gauss_sum(p: u64, nu: u32, a: Int, b: Int) -> (f64, f64) {
    let z = gauss_quad(p, nu, a, b);
    (z.re, z.im)
}

/// Membership oracle: index n is True when some unimodular pair over
/// Z[sqrt(-d)] has norm sum n.
#[pyfunction]
fn represented(d: Int, bound: Int) -> PyResult<Vec<bool>> {
    represented_set(d, bound).map_err(err)
}

/// Number of verification-battery criteria.
#[pyfunction]
fn criterion_count() -> usize {
    acceptance::CRITERION_COUNT
}

/// Run one battery criterion; returns (name, passed, detail).
#[pyfunction]
#[pyo3(signature = (index, seed = 271828))]
fn run_criterion(index: usize, seed: u64) -> (String, bool, String) {
    let r = acceptance::run_criterion(index, seed);
    (r.name.to_string(), r.passed, r.detail)
}

#[pymodule]
fn bianchi_heights_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroupSpec>()?;
    m.add_class::<PyBall>()?;
    m.add_class::<PyLocalStructure>()?;
    m.add_function(wrap_pyfunction!(height_of, m)?)?;
    m.add_function(wrap_pyfunction!(tau, m)?)?;
    m.add_function(wrap_pyfunction!(tau_brute, m)?)?;
    m.add_function(wrap_pyfunction!(ramanujan, m)?)?;
    m.add_function(wrap_pyfunction!(gauss_sum, m)?)?;
    m.add_function(wrap_pyfunction!(represented, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_count, m)?)?;
    m.add_function(wrap_pyfunction!(run_criterion, m)?)?;
    Ok(())
}
