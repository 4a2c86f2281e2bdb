//! Command-line front end: orbit-ball statistics, height multisets, local
//! structure, density tables, exponential-sum oracle suites, the circle-method
//! decomposition, the membership experiment, and the verification battery.
//!
//! Every run prints phase timings to stdout and writes its data files (CSV
//! and a JSON summary with a top-level "schema": 1) into --out. File contents
//! are byte-identical across runs with the same inputs and seed; wall-clock
//! figures appear only on stdout.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use bianchi_heights::acceptance::{format_line, run_criterion, CriterionResult, CRITERION_COUNT};
use bianchi_heights::circle::{circle_rows, exceptional_set, smooth_setup, CircleParams};
use bianchi_heights::group::{
    bottom_row_multiplicity, enumerate_ball, enumerate_ball_sq, estimate_delta_from_counts,
    GroupSpec, DEFAULT_WORD_LEN_CAP,
};
use bianchi_heights::local::{admissible_structure, tau_p, tau_p_closed, u_q, LocalStructure, UqSource};
use bianchi_heights::qform::{height, represented_set, sharp_histogram};
use bianchi_heights::ring::{isqrt, primes_up_to, Int, Rat};
use bianchi_heights::{Error, Result};

const DEFAULT_SEED: u64 = 271828;

#[derive(Parser)]
#[command(
    name = "bianchi-heights",
    version,
    about = "Experiments on heights of orbit balls over imaginary quadratic rings"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Group description file: a 'D <int>' line, then one generator per line
    /// as eight integers a1 a2 b1 b2 c1 c2 d1 d2 ('#' starts a comment).
    #[arg(long = "spec", global = true, value_name = "FILE", conflicts_with = "d")]
    spec: Option<PathBuf>,

    /// Ring parameter for the built-in full group (default 1).
    #[arg(long = "D", global = true, value_name = "INT")]
    d: Option<i64>,

    /// Ball radius as a rational, e.g. 8 or 19/8.
    #[arg(long = "T", global = true, value_name = "RAT", value_parser = parse_rat)]
    t: Option<Rat>,

    /// Scale parameter N (circle: the represented range starts here).
    #[arg(long = "N", global = true, value_name = "INT")]
    n: Option<u64>,

    /// Depth of the low-denominator arc family (default floor(T), at least 2).
    #[arg(long = "Q0", global = true, value_name = "INT")]
    q0: Option<u64>,

    /// Arc half-width parameter (default Q0^3).
    #[arg(long = "K0", global = true, value_name = "INT")]
    k0: Option<u64>,

    /// Radius exponent sigma with T = N^sigma on schedules (default 1/8).
    #[arg(long = "sigma", global = true, value_name = "RAT", value_parser = parse_rat)]
    sigma: Option<Rat>,

    /// Largest prime examined by local-structure and density commands.
    #[arg(long = "prime-bound", global = true, value_name = "INT")]
    prime_bound: Option<u64>,

    /// Seed for every sampled check.
    #[arg(long = "seed", global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Output directory for CSV and JSON files (default: current directory).
    #[arg(long = "out", global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate a ball, report growth statistics and the fitted exponent.
    Ball,
    /// Height multiset of the filtered ball against the ring-wide oracle.
    Heights,
    /// Stabilized congruence structure: modulus L and admissible classes.
    Admissible,
    /// Local density tables: brute-force values against the closed forms.
    Density,
    /// Exponential-sum oracle suites (Gauss, two-variable, Ramanujan, paired).
    Sums,
    /// Major/minor decomposition per n over [N, 2N], CSV plus summary.
    Circle,
    /// Membership experiment: admissible vs represented over [N, 2N].
    Lgp,
    /// Run the full verification battery; exit 0 only if every check passes.
    Verify,
}

fn parse_rat(s: &str) -> std::result::Result<Rat, String> {
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s.trim(), "1"),
    };
    let n: i128 = num.parse().map_err(|e| format!("bad numerator: {e}"))?;
    let d: i128 = den.parse().map_err(|e| format!("bad denominator: {e}"))?;
    if d == 0 {
        return Err("denominator is zero".into());
    }
    Ok(Rat::new(n, d))
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(match e {
                Error::CostGuard(_) => 3,
                Error::Io(_) => 1,
                _ => 2,
            });
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&out)?;
    match cli.cmd {
        Cmd::Ball => cmd_ball(cli, &out),
        Cmd::Heights => cmd_heights(cli, &out),
        Cmd::Admissible => cmd_admissible(cli, &out),
        Cmd::Density => cmd_density(cli, &out),
        Cmd::Sums => cmd_sums(cli, &out),
        Cmd::Circle => cmd_circle(cli, &out),
        Cmd::Lgp => cmd_lgp(cli, &out),
        Cmd::Verify => cmd_verify(cli, &out),
    }
}

fn load_spec(cli: &Cli) -> Result<GroupSpec> {
    if let Some(path) = &cli.spec {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read group file {}: {e}", path.display())))?;
        let label = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("group");
        GroupSpec::parse(&text, label)
    } else {
        GroupSpec::elementary(cli.d.unwrap_or(1) as Int)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Invalid(format!("serialization: {e}")))?;
    text.push('\n');
    fs::write(path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_csv(path: &Path, text: String) -> Result<()> {
    fs::write(path, text)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Probe structure used by circle and lgp: classes from an unfiltered ball
/// large enough to stabilize the small primes.
fn probe_structure(spec: &GroupSpec, prime_bound: u64) -> Result<LocalStructure> {
    let probe = enumerate_ball(spec, Rat::from_integer(6), false, DEFAULT_WORD_LEN_CAP)?;
    admissible_structure(spec, &probe, prime_bound, 4)
}

fn rat_str(r: Rat) -> String {
    r.to_string()
}

fn rat_sqrt(r: Rat) -> Option<Rat> {
    if r < Rat::from_integer(0) {
        return None;
    }
    let n = isqrt(*r.numer());
    let d = isqrt(*r.denom());
    (n * n == *r.numer() && d * d == *r.denom()).then(|| Rat::new(n, d))
}

// ---------------------------------------------------------------------------
// ball
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct GrowthJson {
    ts: Vec<String>,
    counts: Vec<usize>,
    slope: f64,
    half_slope: f64,
}

#[derive(Serialize)]
struct BallSummary {
    schema: u32,
    command: &'static str,
    label: String,
    d: i64,
    t: String,
    count: usize,
    explored_states: usize,
    layers: usize,
    saturated: bool,
    filtered_rows: usize,
    max_row_multiplicity: usize,
    distinct_rows: usize,
    growth: Option<GrowthJson>,
}

fn cmd_ball(cli: &Cli, out: &Path) -> Result<i32> {
    let spec = load_spec(cli)?;
    let t = cli.t.unwrap_or_else(|| Rat::from_integer(8));
    let t0 = Instant::now();
    let ball = enumerate_ball(&spec, t, false, DEFAULT_WORD_LEN_CAP)?;
    println!(
        "phase enumerate: {:.2}s ({} elements, {} layers, saturated {})",
        t0.elapsed().as_secs_f64(),
        ball.len(),
        ball.layers,
        ball.saturated
    );
    let filtered = ball.filter_rows();
    let (max_mult, distinct) = bottom_row_multiplicity(&filtered);

    // Growth fit over radius halvings; needs the smallest radius to stay
    // above the identity shell.
    let growth = if t >= Rat::from_integer(16) {
        let t1 = Instant::now();
        let ts = vec![t / Rat::from_integer(8), t / Rat::from_integer(4), t / Rat::from_integer(2), t];
        let mut counts = Vec::new();
        for tt in &ts[..3] {
            counts.push(enumerate_ball(&spec, *tt, false, DEFAULT_WORD_LEN_CAP)?.len());
        }
        counts.push(ball.len());
        let fit = estimate_delta_from_counts(&ts, &counts)?;
        println!(
            "phase growth fit: {:.2}s (exponent {:.4})",
            t1.elapsed().as_secs_f64(),
            fit.half_slope
        );
        Some(GrowthJson {
            ts: ts.iter().map(|r| rat_str(*r)).collect(),
            counts,
            slope: fit.slope,
            half_slope: fit.half_slope,
        })
    } else {
        println!("growth fit skipped: needs T >= 16 so the quarter radius is meaningful");
        None
    };

    let summary = BallSummary {
        schema: 1,
        command: "ball",
        label: spec.label.clone(),
        d: spec.ring.d as i64,
        t: rat_str(t),
        count: ball.len(),
        explored_states: ball.explored_states,
        layers: ball.layers,
        saturated: ball.saturated,
        filtered_rows: filtered.len(),
        max_row_multiplicity: max_mult,
        distinct_rows: distinct,
        growth,
    };
    write_json(&out.join("ball.json"), &summary)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// heights
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct HeightsSummary {
    schema: u32,
    command: &'static str,
    label: String,
    d: i64,
    t: String,
    bound: u64,
    filtered_rows: usize,
    distinct_heights: usize,
    represented_up_to_bound: usize,
    covered_by_ball: usize,
    csv: &'static str,
}

fn cmd_heights(cli: &Cli, out: &Path) -> Result<i32> {
    let spec = load_spec(cli)?;
    let t = cli.t.unwrap_or_else(|| Rat::from_integer(8));
    let t0 = Instant::now();
    let ball = enumerate_ball(&spec, t, true, DEFAULT_WORD_LEN_CAP)?;
    let t_sq = ball.t_sq;
    let default_bound = (*t_sq.numer() / *t_sq.denom()).max(1) as u64;
    let bound = cli.n.unwrap_or(default_bound);
    let mut hist = vec![0u64; bound as usize + 1];
    for m in ball.iter() {
        let h = height(spec.ring, &m)?;
        if h >= 0 && (h as u64) <= bound {
            hist[h as usize] += 1;
        }
    }
    println!(
        "phase heights: {:.2}s ({} filtered rows)",
        t0.elapsed().as_secs_f64(),
        ball.len()
    );
    let t1 = Instant::now();
    let oracle = represented_set(spec.ring.d, bound as Int)?;
    println!("phase oracle: {:.2}s (bound {bound})", t1.elapsed().as_secs_f64());

    let mut csv = String::from("n,count,represented\n");
    let mut distinct = 0usize;
    let mut represented = 0usize;
    let mut covered = 0usize;
    for n in 1..=bound as usize {
        let c = hist[n];
        let r = oracle.get(n).copied().unwrap_or(false);
        if c > 0 {
            distinct += 1;
        }
        if r {
            represented += 1;
            if c > 0 {
                covered += 1;
            }
        }
        csv.push_str(&format!("{n},{c},{}\n", u8::from(r)));
    }
    let csv_path = out.join("heights.csv");
    write_csv(&csv_path, csv)?;
    let summary = HeightsSummary {
        schema: 1,
        command: "heights",
        label: spec.label.clone(),
        d: spec.ring.d as i64,
        t: rat_str(t),
        bound,
        filtered_rows: ball.len(),
        distinct_heights: distinct,
        represented_up_to_bound: represented,
        covered_by_ball: covered,
        csv: "heights.csv",
    };
    write_json(&out.join("heights.json"), &summary)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// admissible
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AdmissibleSummary {
    schema: u32,
    command: &'static str,
    label: String,
    d: i64,
    t: String,
    prime_bound: u64,
    structure: LocalStructure,
}

fn cmd_admissible(cli: &Cli, out: &Path) -> Result<i32> {
    let spec = load_spec(cli)?;
    let t = cli.t.unwrap_or_else(|| Rat::from_integer(6));
    let prime_bound = cli.prime_bound.unwrap_or(5);
    let t0 = Instant::now();
    let ball = enumerate_ball(&spec, t, false, DEFAULT_WORD_LEN_CAP)?;
    let ls = admissible_structure(&spec, &ball, prime_bound, 4)?;
    println!(
        "phase structure: {:.2}s (ball {}, L = {}, {} classes, flagged primes {:?})",
        t0.elapsed().as_secs_f64(),
        ball.len(),
        ls.l,
        ls.admissible_classes.len(),
        ls.bad_primes
    );
    let summary = AdmissibleSummary {
        schema: 1,
        command: "admissible",
        label: spec.label.clone(),
        d: spec.ring.d as i64,
        t: rat_str(t),
        prime_bound,
        structure: ls,
    };
    write_json(&out.join("admissible.json"), &summary)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// density
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct DensitySummary {
    schema: u32,
    command: &'static str,
    d: i64,
    prime_bound: u64,
    rows: usize,
    all_agree: bool,
    csv: &'static str,
}

fn cmd_density(cli: &Cli, out: &Path) -> Result<i32> {
    let spec = load_spec(cli)?;
    let d = spec.ring.d;
    let prime_bound = cli.prime_bound.unwrap_or(13);
    if prime_bound > 37 {
        return Err(Error::CostGuard(format!(
            "density tables enumerate p^4 residue rows per value; prime bound {prime_bound} exceeds the cap 37"
        )));
    }
    let t0 = Instant::now();
    let mut csv = String::from("p,n,tau_brute,tau_closed,u_p,agree\n");
    let mut rows = 0usize;
    let mut all_agree = true;
    for p in primes_up_to(prime_bound) {
        if (2 * d).rem_euclid(p as Int) == 0 {
            continue;
        }
        for n in 0..p as Int {
            let brute = tau_p(d, p, n, 0, 0)?;
            let closed = tau_p_closed(d, p, n)?;
            let term = u_q(UqSource::Full(d), p, n, 0, 0)?;
            let agree = brute == closed
                && term.value == Rat::from_integer(p as Int) * closed - Rat::from_integer(1);
            all_agree &= agree;
            csv.push_str(&format!(
                "{p},{n},{brute},{closed},{},{}\n",
                term.value,
                u8::from(agree)
            ));
            rows += 1;
        }
    }
    println!(
        "phase density: {:.2}s ({} rows, all_agree {})",
        t0.elapsed().as_secs_f64(),
        rows,
        all_agree
    );
    let csv_path = out.join("density.csv");
    write_csv(&csv_path, csv)?;
    let summary = DensitySummary {
        schema: 1,
        command: "density",
        d: d as i64,
        prime_bound,
        rows,
        all_agree,
        csv: "density.csv",
    };
    write_json(&out.join("density.json"), &summary)?;
    Ok(if all_agree { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// sums
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ChecksSummary {
    schema: u32,
    command: &'static str,
    seed: u64,
    all_passed: bool,
    results: Vec<CriterionResult>,
}

fn cmd_sums(cli: &Cli, out: &Path) -> Result<i32> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let mut results = Vec::new();
    for index in [1, 2, 3, 6] {
        let r = run_criterion(index, seed);
        println!("{}", format_line(&r));
        results.push(r);
    }
    let all_passed = results.iter().all(|r| r.passed);
    let summary = ChecksSummary {
        schema: 1,
        command: "sums",
        seed,
        all_passed,
        results,
    };
    write_json(&out.join("sums.json"), &summary)?;
    Ok(if all_passed { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// circle
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CircleParamsJson {
    n: u64,
    t: String,
    x: String,
    q0: u64,
    k0: u64,
    sigma: String,
}

#[derive(Serialize)]
struct CircleSummary {
    schema: u32,
    command: &'static str,
    label: String,
    d: i64,
    params: CircleParamsJson,
    ball_len: usize,
    saturated: bool,
    admissible_in_range: usize,
    sharp_total: u64,
    smooth_total: f64,
    major_total: f64,
    minor_total: f64,
    max_abs_minor: f64,
    min_major_on_admissible: Option<f64>,
    csv: &'static str,
}

fn circle_params(cli: &Cli, n: u64, sigma: Rat) -> Result<CircleParams> {
    if let Some(t) = cli.t {
        let x_sq = Rat::from_integer(n as Int) / (t * t);
        let x = rat_sqrt(x_sq).ok_or_else(|| {
            Error::Invalid(format!(
                "N / T^2 = {x_sq} is not a rational square; pick T with T^2 | N up to squares"
            ))
        })?;
        let q0 = cli
            .q0
            .unwrap_or_else(|| ((*t.numer() / *t.denom()).max(2)) as u64);
        let k0 = cli.k0.unwrap_or(q0 * q0 * q0);
        CircleParams::new(n, t, x, k0, q0, sigma)
    } else {
        let mut p = CircleParams::schedule_point(n, sigma)?;
        if let Some(q0) = cli.q0 {
            p.q0 = q0.max(1);
            p.k0 = cli.k0.unwrap_or(p.q0 * p.q0 * p.q0);
        } else if let Some(k0) = cli.k0 {
            p.k0 = k0;
        }
        Ok(p)
    }
}

fn cmd_circle(cli: &Cli, out: &Path) -> Result<i32> {
    let spec = load_spec(cli)?;
    let n = cli.n.unwrap_or(1024);
    let sigma = cli.sigma.unwrap_or_else(|| Rat::new(1, 8));
    let params = circle_params(cli, n, sigma)?;
    let t0 = Instant::now();
    let ball = enumerate_ball_sq(&spec, params.t * params.t, true, DEFAULT_WORD_LEN_CAP)?;
    println!(
        "phase enumerate: {:.2}s ({} filtered rows at T = {})",
        t0.elapsed().as_secs_f64(),
        ball.len(),
        rat_str(params.t)
    );
    let t1 = Instant::now();
    let setup = smooth_setup(&ball, &params)?;
    let sharp = sharp_histogram(&ball, params.x)?;
    let ls = probe_structure(&spec, cli.prime_bound.unwrap_or(3))?;
    let rows = circle_rows(&setup, &sharp, &ls, n, 2 * n);
    println!("phase decompose: {:.2}s ({} rows)", t1.elapsed().as_secs_f64(), rows.len());

    let mut csv = String::from("n,admissible,R_sharp,R_smooth,major,minor\n");
    let mut sharp_total = 0u64;
    let mut smooth_total = 0.0f64;
    let mut major_total = 0.0f64;
    let mut minor_total = 0.0f64;
    let mut max_abs_minor = 0.0f64;
    let mut admissible_in_range = 0usize;
    let mut min_major: Option<f64> = None;
    for row in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.n,
            u8::from(row.admissible),
            row.r_sharp,
            row.r_smooth,
            row.major,
            row.minor
        ));
        sharp_total += row.r_sharp;
        smooth_total += row.r_smooth;
        major_total += row.major;
        minor_total += row.minor;
        max_abs_minor = max_abs_minor.max(row.minor.abs());
        if row.admissible {
            admissible_in_range += 1;
            min_major = Some(min_major.map_or(row.major, |m: f64| m.min(row.major)));
        }
    }
    let csv_path = out.join("circle.csv");
    write_csv(&csv_path, csv)?;
    let summary = CircleSummary {
        schema: 1,
        command: "circle",
        label: spec.label.clone(),
        d: spec.ring.d as i64,
        params: CircleParamsJson {
            n,
            t: rat_str(params.t),
            x: rat_str(params.x),
            q0: params.q0,
            k0: params.k0,
            sigma: rat_str(sigma),
        },
        ball_len: ball.len(),
        saturated: ball.saturated,
        admissible_in_range,
        sharp_total,
        smooth_total,
        major_total,
        minor_total,
        max_abs_minor,
        min_major_on_admissible: min_major,
        csv: "circle.csv",
    };
    write_json(&out.join("circle.json"), &summary)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// lgp
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct LgpSummary {
    schema: u32,
    command: &'static str,
    label: String,
    d: i64,
    range: (u64, u64),
    t_sq: String,
    x: String,
    ball_len: usize,
    saturated: bool,
    admissible_count: usize,
    exceptional_count: usize,
    ratio: Option<f64>,
    oracle_confirmed: Vec<u64>,
    csv: &'static str,
}

fn cmd_lgp(cli: &Cli, out: &Path) -> Result<i32> {
    let spec = load_spec(cli)?;
    let n = cli.n.unwrap_or(500);
    if n == 0 {
        return Err(Error::Invalid("range start must be positive".into()));
    }
    // Window scale fixed at X = 2, so T^2 = N / 4 exactly; T itself need not
    // be rational.
    let x = Rat::from_integer(2);
    let t_sq = Rat::new(n as Int, 4);
    let t0 = Instant::now();
    let ball = enumerate_ball_sq(&spec, t_sq, true, DEFAULT_WORD_LEN_CAP)?;
    println!(
        "phase enumerate: {:.2}s ({} filtered rows at T^2 = {})",
        t0.elapsed().as_secs_f64(),
        ball.len(),
        rat_str(t_sq)
    );
    let t1 = Instant::now();
    let ls = probe_structure(&spec, cli.prime_bound.unwrap_or(3))?;
    let oracle_bound = 4 * n as Int;
    let report = exceptional_set(&ball, &ls, x, n, 2 * n, oracle_bound)?;
    println!(
        "phase membership: {:.2}s ({} admissible, {} exceptional)",
        t1.elapsed().as_secs_f64(),
        report.admissible_count,
        report.exceptional.len()
    );

    let sharp = sharp_histogram(&ball, x)?;
    let oracle = represented_set(spec.ring.d, oracle_bound)?;
    let mut csv = String::from("n,admissible,r_sharp,represented,exceptional\n");
    for m in n..=2 * n {
        let adm = bianchi_heights::local::is_admissible(&ls, m as Int);
        let r_sharp = sharp.get(m as usize).copied().unwrap_or(0);
        let rep = oracle.get(m as usize).copied().unwrap_or(false);
        let exc = adm && r_sharp == 0;
        csv.push_str(&format!(
            "{m},{},{r_sharp},{},{}\n",
            u8::from(adm),
            u8::from(rep),
            u8::from(exc)
        ));
    }
    let csv_path = out.join("lgp.csv");
    write_csv(&csv_path, csv)?;
    let summary = LgpSummary {
        schema: 1,
        command: "lgp",
        label: spec.label.clone(),
        d: spec.ring.d as i64,
        range: (n, 2 * n),
        t_sq: rat_str(t_sq),
        x: rat_str(x),
        ball_len: ball.len(),
        saturated: ball.saturated,
        admissible_count: report.admissible_count,
        exceptional_count: report.exceptional.len(),
        ratio: report.ratio,
        oracle_confirmed: report.oracle_confirmed.clone(),
        csv: "lgp.csv",
    };
    write_json(&out.join("lgp.json"), &summary)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn cmd_verify(cli: &Cli, out: &Path) -> Result<i32> {
    if cli.spec.is_some() || cli.d.is_some() {
        println!("note: the battery runs on fixed built-in instances; group flags are ignored");
    }
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let t0 = Instant::now();
    let mut results = Vec::with_capacity(CRITERION_COUNT);
    for index in 1..=CRITERION_COUNT {
        let r = run_criterion(index, seed);
        println!("{}", format_line(&r));
        results.push(r);
    }
    let all_passed = results.iter().all(|r| r.passed);
    println!(
        "battery: {}/{} passed in {:.1}s",
        results.iter().filter(|r| r.passed).count(),
        results.len(),
        t0.elapsed().as_secs_f64()
    );
    let summary = ChecksSummary {
        schema: 1,
        command: "verify",
        seed,
        all_passed,
        results,
    };
    write_json(&out.join("verify.json"), &summary)?;
    Ok(if all_passed { 0 } else { 1 })
}
