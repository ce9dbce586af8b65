//! Segmented prime sieve with a compensated, error-tracked theta accumulator,
//! range maxima of the prime-gap functional, the bias check, and theta
//! sampling at arbitrary points.
//!
//! Concurrency: segments are sieved in parallel; theta is an ordered prefix
//! reduction over per-segment partial sums, and per-range maxima merge
//! associatively. Results do not depend on the worker count.

use crate::error::{Error, Result};
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// Default segment length (numbers per segment).
pub const DEFAULT_SEGMENT_LEN: u64 = 100_000_000;

/// Hard cap: one segment's bitset must stay within a sane memory budget.
const MAX_SEGMENT_LEN: u64 = 2_000_000_000;

/// Per-logarithm error allowance (ulps of `ln p` plus summation slack).
const LOG_ERR_FACTOR: f64 = 4.0 * 1.1102230246251565e-16; // 4 * 2^-53

/// Simple odd sieve for the base primes up to `limit` (inclusive).
fn base_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut is_comp = vec![false; n / 2 + 1]; // index i <-> odd 2i+1
    let mut primes = vec![2];
    let mut i = 1usize; // odd 3
    while (2 * i + 1) * (2 * i + 1) <= n {
        if !is_comp[i] {
            let p = 2 * i + 1;
            let mut m = p * p;
            while m <= n {
                is_comp[(m - 1) / 2] = true;
                m += 2 * p;
            }
        }
        i += 1;
    }
    for i in 1..=(n.saturating_sub(1)) / 2 {
        if !is_comp[i] {
            primes.push((2 * i + 1) as u64);
        }
    }
    primes
}

/// One sieved block: ascending primes in `(lo, hi]`.
#[derive(Clone, Debug)]
pub struct SieveSegment {
    pub lo: u64,
    pub hi: u64,
    pub primes: Vec<u64>,
}

fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> SieveSegment {
    // primes in (lo, hi]
    let start = lo + 1;
    let mut primes = Vec::new();
    if start <= 2 && hi >= 2 {
        primes.push(2);
    }
    // odd candidates in [max(3, start), hi]
    let first_odd = start.max(3) | 1;
    if first_odd > hi {
        return SieveSegment { lo, hi, primes };
    }
    let count = ((hi - first_odd) / 2 + 1) as usize;
    let mut comp = vec![0u64; count.div_ceil(64)];
    for &p in base.iter().skip(1) {
        // odd base primes
        if p * p > hi {
            break;
        }
        let mut m = (start.div_ceil(p)) * p;
        if m < p * p {
            m = p * p;
        }
        if m % 2 == 0 {
            m += p;
        }
        while m <= hi {
            if m >= first_odd {
                let idx = ((m - first_odd) / 2) as usize;
                comp[idx / 64] |= 1 << (idx % 64);
            }
            m += 2 * p;
        }
    }
    for idx in 0..count {
        if comp[idx / 64] & (1 << (idx % 64)) == 0 {
            let n = first_odd + 2 * idx as u64;
            if n >= 3 {
                primes.push(n);
            }
        }
    }
    SieveSegment { lo, hi, primes }
}

/// Streams every prime in `(a, b]` exactly once, in order, in segments.
pub fn sieve_range(
    a: u64,
    b: u64,
    segment_len: u64,
    mut f: impl FnMut(&SieveSegment),
) -> Result<()> {
    if !(a < b) {
        return Err(Error::Domain(format!("need a < b (got {a}, {b})")));
    }
    if segment_len == 0 || segment_len > MAX_SEGMENT_LEN {
        return Err(Error::Resource(format!(
            "segment length {segment_len} outside 1..={MAX_SEGMENT_LEN}"
        )));
    }
    let base = base_primes((b as f64).sqrt() as u64 + 2);
    let mut lo = a;
    while lo < b {
        let hi = (lo + segment_len).min(b);
        let seg = sieve_segment(lo, hi, &base);
        f(&seg);
        lo = hi;
    }
    Ok(())
}

/// Running `theta(p)` with compensated summation and a tracked error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaAccumulator {
    pub theta: f64,
    comp: f64,
    pub abs_err: f64,
    pub n: u64,
    pub last_prime: u64,
}

impl ThetaAccumulator {
    pub fn start() -> Self {
        ThetaAccumulator {
            theta: 0.0,
            comp: 0.0,
            abs_err: 0.0,
            n: 0,
            last_prime: 1,
        }
    }

    pub fn add_prime(&mut self, p: u64) {
        let t = (p as f64).ln();
        let s = self.theta + t;
        if self.theta.abs() >= t.abs() {
            self.comp += (self.theta - s) + t;
        } else {
            self.comp += (t - s) + self.theta;
        }
        self.theta = s;
        self.abs_err += LOG_ERR_FACTOR * t;
        self.n += 1;
        self.last_prime = p;
    }

    /// Compensated total.
    pub fn value(&self) -> f64 {
        self.theta + self.comp
    }

    fn merge_segment(&mut self, seg: &SegmentSums) {
        let s = self.theta + seg.sum;
        if self.theta.abs() >= seg.sum.abs() {
            self.comp += (self.theta - s) + seg.sum;
        } else {
            self.comp += (seg.sum - s) + self.theta;
        }
        self.comp += seg.comp;
        self.theta = s;
        self.abs_err += seg.err;
        self.n += seg.count;
        if seg.last_prime > 0 {
            self.last_prime = seg.last_prime;
        }
    }

    /// Plain-text checkpoint: `last_prime,theta,abs_err,n`.
    pub fn write_checkpoint(&self, path: &Path) -> Result<()> {
        let mut fh = std::fs::File::create(path)?;
        writeln!(
            fh,
            "last_prime,theta,abs_err,n\n{},{:?},{:?},{}",
            self.last_prime,
            self.value(),
            self.abs_err,
            self.n
        )?;
        Ok(())
    }

    pub fn read_checkpoint(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)?;
        let line = content
            .lines()
            .find(|l| !l.trim().is_empty() && !l.starts_with('#') && !l.starts_with("last_prime"))
            .ok_or_else(|| Error::Parse {
                path: path.display().to_string(),
                line: 0,
                msg: "no data line".into(),
            })?;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: 2,
                msg: format!("expected 4 fields, got {}", fields.len()),
            });
        }
        let mk = |m: &str| Error::Parse {
            path: path.display().to_string(),
            line: 2,
            msg: m.to_string(),
        };
        Ok(ThetaAccumulator {
            theta: fields[1].parse().map_err(|_| mk("theta"))?,
            comp: 0.0,
            abs_err: fields[2].parse().map_err(|_| mk("abs_err"))?,
            n: fields[3].parse().map_err(|_| mk("n"))?,
            last_prime: fields[0].parse().map_err(|_| mk("last_prime"))?,
        })
    }
}

#[derive(Clone, Debug, Default)]
struct SegmentSums {
    sum: f64,
    comp: f64,
    err: f64,
    count: u64,
    last_prime: u64,
}

fn segment_sums(seg: &SieveSegment, upto: u64) -> SegmentSums {
    let mut s = SegmentSums::default();
    for &p in &seg.primes {
        if p > upto {
            break;
        }
        let t = (p as f64).ln();
        let x = s.sum + t;
        if s.sum.abs() >= t.abs() {
            s.comp += (s.sum - x) + t;
        } else {
            s.comp += (t - x) + s.sum;
        }
        s.sum = x;
        s.err += LOG_ERR_FACTOR * t;
        s.count += 1;
        s.last_prime = p;
    }
    s
}

/// Maximum of `(log p)^k (p - theta(p^-)) / p` over one scanned range,
/// with the attaining prime and the extendability condition.
#[derive(Clone, Debug)]
pub struct DkMax {
    pub k: u8,
    pub value: f64,
    pub argmax: u64,
    /// `value < (k+1)^(k+1)`: the pointwise maxima extend to the whole
    /// interval bound.
    pub condition_ok: bool,
}

#[derive(Clone, Debug)]
pub struct DkOutcome {
    pub a: u64,
    pub b: u64,
    pub per_k: Vec<DkMax>,
}

/// What to compute in one pass.
#[derive(Clone, Debug)]
pub struct ScanRequest {
    /// Resume position; primes `> from.last_prime` are scanned.
    pub from: ThetaAccumulator,
    /// Scan end: the accumulator stops here (inclusive).
    pub upto: u64,
    /// Ranges `(a, b]` for the gap functional; ascending, `a >= from.last_prime`.
    pub dk_ranges: Vec<(u64, u64)>,
    pub ks: Vec<u8>,
    /// Verify `theta(p) < p - 0.05 sqrt(p)` for primes `>= this`.
    pub bias_from: Option<u64>,
    /// Sorted points at which to record `theta`.
    pub theta_points: Vec<u64>,
    pub segment_len: u64,
}

impl ScanRequest {
    pub fn new(upto: u64) -> Self {
        ScanRequest {
            from: ThetaAccumulator::start(),
            upto,
            dk_ranges: Vec::new(),
            ks: Vec::new(),
            bias_from: None,
            theta_points: Vec::new(),
            segment_len: DEFAULT_SEGMENT_LEN,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanOutcome {
    pub dk: Vec<DkOutcome>,
    /// First prime violating the bias inequality, if any.
    pub bias_violation: Option<u64>,
    /// `theta(x)` for each requested point, in input order.
    pub theta_at: Vec<(u64, f64)>,
    pub acc: ThetaAccumulator,
}

struct SegmentScan {
    // (range index, k index) -> (value, argmax)
    dk: Vec<(f64, u64)>,
    // (range index) -> closing prime candidate and its per-k values
    closing: Vec<Option<(u64, Vec<f64>)>>,
    bias_violation: Option<u64>,
    theta_at: Vec<(usize, f64)>, // index into request points
}

/// One parallel pass computing everything in the request.
pub fn run_scan(req: &ScanRequest) -> Result<ScanOutcome> {
    if req.segment_len == 0 || req.segment_len > MAX_SEGMENT_LEN {
        return Err(Error::Resource(format!(
            "segment length {} outside 1..={MAX_SEGMENT_LEN}",
            req.segment_len
        )));
    }
    for w in req.dk_ranges.windows(2) {
        if w[0].1 > w[1].0 {
            return Err(Error::Domain(
                "dk ranges must be ascending and non-overlapping".into(),
            ));
        }
    }
    for &(a, b) in &req.dk_ranges {
        if a < req.from.last_prime || a >= b {
            return Err(Error::Domain(format!(
                "bad dk range ({a}, {b}) for scan starting at {}",
                req.from.last_prime
            )));
        }
    }
    if !req.theta_points.windows(2).all(|w| w[0] <= w[1]) {
        return Err(Error::Domain("theta points must be sorted".into()));
    }
    // Slack past the end so each range's closing prime is present (prime gaps
    // below 1e12 are far smaller).
    let range_end = req.dk_ranges.iter().map(|r| r.1).max().unwrap_or(0);
    let sieve_end = req.upto.max(range_end) + if req.dk_ranges.is_empty() { 0 } else { 4000 };
    let start = req.from.last_prime;
    let base = base_primes((sieve_end as f64).sqrt() as u64 + 2);

    // segment grid (independent of worker count)
    let mut bounds = Vec::new();
    let mut lo = start;
    while lo < sieve_end {
        let hi = (lo + req.segment_len).min(sieve_end);
        bounds.push((lo, hi));
        lo = hi;
    }

    // Phase A: per-segment prime sums up to `upto` (for the prefix).
    let sums: Vec<SegmentSums> = bounds
        .par_iter()
        .map(|&(lo, hi)| {
            let seg = sieve_segment(lo, hi, &base);
            segment_sums(&seg, req.upto)
        })
        .collect();
    let mut prefixes = Vec::with_capacity(bounds.len());
    let mut acc = req.from.clone();
    for s in &sums {
        prefixes.push(acc.clone());
        acc.merge_segment(s);
    }
    let final_acc = acc;

    // Phase B: re-sieve each segment and scan with its prefix.
    let point_slices: Vec<(usize, usize)> = {
        // points partitioned by segment
        let mut v = Vec::with_capacity(bounds.len());
        let mut idx = 0usize;
        for &(lo, hi) in &bounds {
            let s = idx;
            while idx < req.theta_points.len()
                && req.theta_points[idx] <= hi
                && req.theta_points[idx] > lo
            {
                idx += 1;
            }
            v.push((s, idx));
        }
        v
    };
    let scans: Vec<SegmentScan> = bounds
        .par_iter()
        .enumerate()
        .map(|(i, &(lo, hi))| {
            let seg = sieve_segment(lo, hi, &base);
            let prefix = &prefixes[i];
            let mut theta = prefix.value();
            // conservative error bound for the whole segment
            let err_bound = prefix.abs_err + sums[i].err + 1e-307;
            let nk = req.ks.len();
            let mut out = SegmentScan {
                dk: vec![(f64::NEG_INFINITY, 0); req.dk_ranges.len() * nk],
                closing: vec![None; req.dk_ranges.len()],
                bias_violation: None,
                theta_at: Vec::new(),
            };
            let (ps, pe) = point_slices[i];
            let mut pi = ps;
            for &p in &seg.primes {
                // record theta at sample points below p
                while pi < pe && req.theta_points[pi] < p {
                    out.theta_at.push((pi, theta));
                    pi += 1;
                }
                let lp = (p as f64).ln();
                // gap functional against theta of the previous prime
                let theta_lo = theta - err_bound;
                for (ri, &(a, b)) in req.dk_ranges.iter().enumerate() {
                    let in_range = p > a && p <= b;
                    let closing = p > b && out.closing[ri].is_none() && lo < b + 4000;
                    if !(in_range || closing) {
                        continue;
                    }
                    let ratio = (p as f64 - theta_lo) / p as f64;
                    let mut vals = Vec::with_capacity(nk);
                    for (ki, &k) in req.ks.iter().enumerate() {
                        let v = lp.powi(k as i32) * ratio * (1.0 + 1e-14);
                        vals.push(v);
                        if in_range {
                            let cell = &mut out.dk[ri * nk + ki];
                            if v > cell.0 {
                                *cell = (v, p);
                            }
                        }
                    }
                    if closing {
                        out.closing[ri] = Some((p, vals));
                    }
                }
                if p <= req.upto {
                    theta += lp;
                    // bias check at the new prime (theta is largest there)
                    if let Some(from) = req.bias_from {
                        if p >= from
                            && out.bias_violation.is_none()
                            && !(theta + err_bound < p as f64 - 0.05 * (p as f64).sqrt())
                        {
                            out.bias_violation = Some(p);
                        }
                    }
                }
            }
            while pi < pe {
                out.theta_at.push((pi, theta));
                pi += 1;
            }
            out
        })
        .collect();

    // merge (in segment order)
    let nk = req.ks.len();
    let mut dk_cells = vec![(f64::NEG_INFINITY, 0u64); req.dk_ranges.len() * nk];
    let mut closings: Vec<Option<(u64, Vec<f64>)>> = vec![None; req.dk_ranges.len()];
    let mut bias_violation = None;
    let mut theta_at = vec![(0u64, 0.0f64); req.theta_points.len()];
    for s in &scans {
        for (cell, seen) in dk_cells.iter_mut().zip(&s.dk) {
            if seen.0 > cell.0 {
                *cell = *seen;
            }
        }
        for (c, seen) in closings.iter_mut().zip(&s.closing) {
            if c.is_none() {
                if let Some(x) = seen {
                    *c = Some(x.clone());
                }
            }
        }
        if bias_violation.is_none() {
            bias_violation = s.bias_violation;
        }
        for &(pi, th) in &s.theta_at {
            theta_at[pi] = (req.theta_points[pi], th);
        }
    }
    // fold closing primes into their ranges
    let mut dk = Vec::new();
    for (ri, &(a, b)) in req.dk_ranges.iter().enumerate() {
        let mut per_k = Vec::new();
        for (ki, &k) in req.ks.iter().enumerate() {
            let (mut v, mut am) = dk_cells[ri * nk + ki];
            if let Some((p, vals)) = &closings[ri] {
                if vals[ki] > v {
                    v = vals[ki];
                    am = *p;
                }
            } else {
                return Err(Error::Coverage(format!(
                    "no closing prime found past {b} (range ({a}, {b}))"
                )));
            }
            let cond = v < ((k as f64) + 1.0).powi(k as i32 + 1);
            per_k.push(DkMax {
                k,
                value: v,
                argmax: am,
                condition_ok: cond,
            });
        }
        dk.push(DkOutcome { a, b, per_k });
    }
    Ok(ScanOutcome {
        dk,
        bias_violation,
        theta_at,
        acc: final_acc,
    })
}

/// Per-range maxima of the gap functional starting from an accumulator
/// positioned at the largest prime `<= a` (so `theta = theta(a)`).
pub fn dk_scan(
    a: u64,
    b: u64,
    ks: &[u8],
    acc: &ThetaAccumulator,
    segment_len: u64,
) -> Result<(DkOutcome, ThetaAccumulator)> {
    if acc.last_prime > a {
        return Err(Error::Domain(format!(
            "accumulator at {} is past the range start {a}",
            acc.last_prime
        )));
    }
    let mut req = ScanRequest::new(b);
    req.from = acc.clone();
    req.dk_ranges = vec![(a, b)];
    req.ks = ks.to_vec();
    req.segment_len = segment_len;
    let out = run_scan(&req)?;
    Ok((out.dk.into_iter().next().unwrap(), out.acc))
}

/// Checks `theta(x) < x - 0.05 sqrt(x)` at every prime in `[599, limit]`.
pub fn bias_check(limit: u64, segment_len: u64) -> Result<Option<u64>> {
    if !(599..=MAX_SEGMENT_LEN * 64).contains(&limit) {
        return Err(Error::Domain(format!(
            "bias check needs 599 <= limit (got {limit})"
        )));
    }
    let mut req = ScanRequest::new(limit);
    req.bias_from = Some(599);
    req.segment_len = segment_len;
    Ok(run_scan(&req)?.bias_violation)
}

/// `theta(x)` for each point (sorted ascending), in one pass.
pub fn theta_at_points(points: &[u64], segment_len: u64) -> Result<Vec<(u64, f64)>> {
    if points.is_empty() {
        return Ok(Vec::new());
    }
    let mut req = ScanRequest::new(*points.last().unwrap());
    req.theta_points = points.to_vec();
    req.segment_len = segment_len;
    Ok(run_scan(&req)?.theta_at)
}

/// Exact integer k-th root.
pub fn iroot(x: u64, k: u32) -> u64 {
    if x == 0 || k == 0 {
        return 0;
    }
    if k == 1 {
        return x;
    }
    let mut r = (x as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && r.checked_pow(k).map_or(true, |v| v > x) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= x) {
        r += 1;
    }
    r
}


#[cfg(test)]
mod perf_probe {
    use super::*;

    #[test]
    #[ignore]
    fn billion_scan() {
        let t = std::time::Instant::now();
        let mut req = ScanRequest::new(1_000_000_000);
        req.dk_ranges = vec![
            (1, 100_000),
            (100_000, 500_000),
            (500_000, 1_000_000),
            (1_000_000, 5_000_000),
            (5_000_000, 10_000_000),
            (10_000_000, 50_000_000),
            (50_000_000, 100_000_000),
            (100_000_000, 1_000_000_000),
        ];
        req.ks = vec![0, 1, 2, 3, 4, 5];
        req.bias_from = Some(599);
        let out = run_scan(&req).unwrap();
        println!("time: {:?}", t.elapsed());
        println!("pi(1e9) = {}, theta = {}, err = {:e}", out.acc.n, out.acc.value(), out.acc.abs_err);
        println!("bias violation: {:?}", out.bias_violation);
        for o in &out.dk {
            print!("[{:>9}, {:>10}]:", o.a, o.b);
            for m in &o.per_k {
                print!(" {:e}@{}", m.value, m.argmax);
            }
            println!();
        }
    }
}
