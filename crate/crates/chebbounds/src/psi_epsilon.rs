//! Constants `eps(b)` with `|psi(x) - x| <= eps x` for `x >= e^b`.
//!
//! Three producers: the small-range comparison lemma (valid up to the bias
//! threshold), a truncated Perron sum driven by the zero-density table, and
//! the optional Logan-kernel smoothing machinery (needs externally supplied
//! `nu`/`mu` values and a zeros file; never used by the default pipeline).

use crate::conservative::{ConservativeReal, Direction, Iv};
use crate::error::{Error, Result};
use crate::inputs::{GlobalConstants, ZeroDensityRow, ZeroDensityTable, ZetaZeroFile};

/// `eps(b) = max(c e^{-b/2}, eps(log B_cap))` for `log 11 < b <= log B_cap`.
pub fn small_range_epsilon(
    b: f64,
    c_num: f64,
    b_cap: f64,
    eps_at_cap: f64,
) -> Result<ConservativeReal> {
    let lo = 11f64.ln();
    if !(b > lo) || !(b <= b_cap.ln() * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!(
            "small-range eps requires log 11 < b <= log {b_cap:e} (got {b})"
        )));
    }
    let decay = Iv::from_f64(c_num).mul(&Iv::from_f64(-b / 2.0).exp());
    let iv = decay.max(&Iv::from_f64(eps_at_cap));
    Ok(ConservativeReal::new(iv, Direction::UpperSafe))
}

/// Small-range `eps(b)` with the default constants.
pub fn small_range_epsilon_default(b: f64, consts: &GlobalConstants) -> Result<ConservativeReal> {
    small_range_epsilon(b, 0.94, consts.x1, consts.alpha)
}

/// Parameters of one truncated-Perron evaluation.
#[derive(Clone, Debug)]
pub struct PtParams {
    pub delta: f64,
    pub lambda: f64,
    /// `log T`; the cutoff itself is astronomically large.
    pub log_t: f64,
    pub k_terms: u64,
    pub sigma_row: ZeroDensityRow,
    /// Set when `1 - delta` exceeds the selected row's sigma by more than 0.01.
    pub row_gap_flagged: bool,
}

fn ln_h(consts: &GlobalConstants) -> f64 {
    consts.h.ln()
}

fn k_terms_for(log_t: f64, lambda: f64, consts: &GlobalConstants) -> u64 {
    (((log_t - ln_h(consts)) / lambda.ln()).floor() as i64 + 1).max(1) as u64
}

impl PtParams {
    /// Builds parameters, selecting the zero-density row for `sigma = 1 - delta`.
    pub fn new(
        delta: f64,
        lambda: f64,
        log_t: f64,
        zd: &ZeroDensityTable,
        consts: &GlobalConstants,
    ) -> Result<PtParams> {
        if !(0.001..=0.025).contains(&delta) {
            return Err(Error::Hypothesis(format!(
                "delta = {delta} violates 0.001 <= delta <= 0.025"
            )));
        }
        if !(lambda > 1.0) {
            return Err(Error::Hypothesis(format!("lambda = {lambda} violates lambda > 1")));
        }
        let (row, flagged) = zd.row_for_delta(delta)?;
        Ok(PtParams {
            delta,
            lambda,
            log_t,
            k_terms: k_terms_for(log_t, lambda, consts),
            sigma_row: row.clone(),
            row_gap_flagged: flagged,
        })
    }
}

/// Truncation term `s0(b, T) = 2 b^2 / T`.
pub fn pt_s0(b2: f64, log_t: f64) -> ConservativeReal {
    let b = Iv::from_f64(b2);
    let iv = Iv::from_f64(2.0)
        .mul(&b.mul(&b))
        .mul(&Iv::from_f64(-log_t).exp());
    ConservativeReal::new(iv, Direction::UpperSafe)
}

/// Low-zeros term `s1(b, delta, T) = e^{-delta b} ((log(T/2pi))^2 / (2pi) + 1.8642)`.
pub fn pt_s1(b1: f64, delta: f64, log_t: f64) -> ConservativeReal {
    let two_pi = Iv::from_f64(std::f64::consts::TAU);
    let log_t_2pi = Iv::from_f64(log_t).sub(&two_pi.ln().expect("2pi > 0"));
    let iv = Iv::from_f64(-delta * b1).exp().mul(
        &log_t_2pi
            .mul(&log_t_2pi)
            .div(&two_pi)
            .expect("2pi nonzero")
            .add(&Iv::parse("1.8642").unwrap()),
    );
    ConservativeReal::new(iv, Direction::UpperSafe)
}

/// High-zeros term: dyadic-in-`lambda` sum against the zero-density bound.
///
/// The density factors use the selected row's own exponents (its sigma may
/// sit below `1 - delta`; the row bound is then weaker, hence still valid).
pub fn pt_s2(
    b1: f64,
    delta: f64,
    lambda: f64,
    k_terms: u64,
    log_t: f64,
    zd_row: &ZeroDensityRow,
) -> Result<ConservativeReal> {
    if zd_row.sigma > 1.0 - delta + 1e-12 {
        return Err(Error::Hypothesis(format!(
            "zero-density row sigma = {} violates sigma <= 1 - delta = {}",
            zd_row.sigma,
            1.0 - delta
        )));
    }
    let r = GlobalConstants::default().r;
    let drow = 1.0 - zd_row.sigma;
    let c1 = Iv::parse(&zd_row.c1_dec).unwrap();
    let c2 = Iv::parse(&zd_row.c2_dec).unwrap();
    let ln_lam = Iv::from_f64(lambda).ln()?;
    let mut sum = Iv::zero();
    for k in 0..k_terms {
        let log_tau = Iv::from_f64(log_t).sub(&Iv::from_u64(k).mul(&ln_lam));
        if log_tau.lo_f64() <= 0.0 {
            return Err(Error::Hypothesis(
                "lambda subdivision ran past T (K too large)".into(),
            ));
        }
        // c1 tau^{8 drow / 3} (log tau)^{3 + 2 drow} + c2 (log tau)^2
        let dens = c1
            .mul(&log_tau.mul(&Iv::from_f64(8.0 * drow / 3.0)).exp())
            .mul(&log_tau.pow(&Iv::from_f64(3.0 + 2.0 * drow))?)
            .add(&c2.mul(&log_tau.mul(&log_tau)));
        // 2 lambda/T * lambda^k * x^{-1/(R log tau)} with x = e^{b1}
        let xfac = Iv::from_f64(-b1)
            .div(&Iv::from_f64(r).mul(&log_tau))?
            .exp();
        let scale = Iv::from_f64(2.0 * lambda)
            .mul(&Iv::from_u64(k).mul(&ln_lam).sub(&Iv::from_f64(log_t)).exp());
        sum = sum.add(&scale.mul(&xfac).mul(&dens));
    }
    Ok(ConservativeReal::new(sum, Direction::UpperSafe))
}

/// Fast f64 evaluation of `s0 + s1 + s2` used by the optimizer grid.
fn pt_eval_f64(
    b1: f64,
    b2: f64,
    delta: f64,
    drow: f64,
    c1: f64,
    c2: f64,
    lambda: f64,
    log_t: f64,
    lnh: f64,
    r: f64,
) -> f64 {
    let s0 = 2.0 * b2 * b2 * (-log_t).exp();
    let l2pi = log_t - (std::f64::consts::TAU).ln();
    let s1 = (-delta * b1).exp() * (l2pi * l2pi / std::f64::consts::TAU + 1.8642);
    let ln_lam = lambda.ln();
    let kt = (((log_t - lnh) / ln_lam).floor() as i64 + 1).max(1) as u64;
    let mut terms: Vec<f64> = Vec::with_capacity(kt as usize);
    let mut max_ln = f64::NEG_INFINITY;
    for k in 0..kt {
        let log_tau = log_t - k as f64 * ln_lam;
        let ln_dens = {
            let a = c1.ln() + (8.0 * drow / 3.0) * log_tau + (3.0 + 2.0 * drow) * log_tau.ln();
            let b = c2.ln() + 2.0 * log_tau.ln();
            let m = a.max(b);
            m + ((a - m).exp() + (b - m).exp()).ln()
        };
        let ln_term =
            (2.0 * lambda).ln() + k as f64 * ln_lam - log_t - b1 / (r * log_tau) + ln_dens;
        max_ln = max_ln.max(ln_term);
        terms.push(ln_term);
    }
    let s2 = if max_ln.is_finite() {
        max_ln.exp() * terms.iter().map(|t| (t - max_ln).exp()).sum::<f64>()
    } else {
        0.0
    };
    s0 + s1 + s2
}

/// `|psi(x) - x|/x <= s0(b2,T) + s1(b1,delta,T) + s2(...)` on `[e^b1, e^b2]`.
pub fn pt_epsilon(
    b1: f64,
    b2: f64,
    params: &PtParams,
    consts: &GlobalConstants,
) -> Result<ConservativeReal> {
    if !(b1 >= 1000.0) {
        return Err(Error::Hypothesis(format!("b1 = {b1} violates b1 >= 1000")));
    }
    if !(b1 < b2) {
        return Err(Error::Hypothesis(format!("b1 = {b1}, b2 = {b2} violate b1 < b2")));
    }
    if !(params.log_t > ln_h(consts)) {
        return Err(Error::Hypothesis(format!(
            "log T = {} violates T > H (log H = {:.4})",
            params.log_t,
            ln_h(consts)
        )));
    }
    if !(params.log_t < b1) {
        return Err(Error::Hypothesis(format!(
            "log T = {} violates T < e^b1 (b1 = {b1})",
            params.log_t
        )));
    }
    let s0 = pt_s0(b2, params.log_t);
    let s1 = pt_s1(b1, params.delta, params.log_t);
    let s2 = pt_s2(
        b1,
        params.delta,
        params.lambda,
        params.k_terms,
        params.log_t,
        &params.sigma_row,
    )?;
    let iv = s0.interval().add(s1.interval()).add(s2.interval());
    Ok(ConservativeReal::new(iv, Direction::UpperSafe))
}

/// Deterministic grid search plus local refinement minimizing `pt_epsilon`.
///
/// Grid (fixed, versioned): delta in {0.001..0.025 step 0.001},
/// lambda in {1.05, 1.1, 1.2, 1.5, 2}, 32 log-spaced cutoffs; refinement does
/// coordinate descent on the cutoff, delta and lambda.
pub fn pt_optimize(
    b1: f64,
    b2: f64,
    zd: &ZeroDensityTable,
    consts: &GlobalConstants,
) -> Result<(ConservativeReal, PtParams)> {
    if !(b1 >= 1000.0 && b1 < b2) {
        return Err(Error::Hypothesis(format!(
            "pt_optimize requires 1000 <= b1 < b2 (got {b1}, {b2})"
        )));
    }
    let lnh = ln_h(consts);
    let r = consts.r;
    let row_cache: Vec<(f64, f64, f64, f64)> = (1..=25)
        .map(|i| {
            let delta = i as f64 * 0.001;
            let (row, _) = zd.row_for_delta(delta).expect("default grid rows exist");
            (delta, 1.0 - row.sigma, row.c1, row.c2)
        })
        .collect();
    let eval = |delta: f64, lambda: f64, log_t: f64| -> f64 {
        let idx = ((delta / 0.001).round() as usize).clamp(1, 25) - 1;
        let (_, drow, c1, c2) = row_cache[idx];
        pt_eval_f64(b1, b2, delta, drow, c1, c2, lambda, log_t, lnh, r)
    };
    let lambdas = [1.05, 1.1, 1.2, 1.5, 2.0];
    let n_t = 32;
    let t_hi = b1 * 0.999;
    // Cutoff grid: linear in log T plus a geometric refinement of the low end.
    let t_grid: Vec<f64> = (1..=n_t)
        .map(|j| lnh + (t_hi - lnh) * j as f64 / n_t as f64)
        .chain((1..=n_t).map(|j| lnh * (t_hi / lnh).powf(j as f64 / n_t as f64)))
        .collect();
    // Parallel grid scan; deterministic min-reduction with lexicographic
    // parameter tie-break.
    use rayon::prelude::*;
    let mut cells: Vec<(f64, f64, f64, f64)> = (1..=25usize)
        .into_par_iter()
        .flat_map_iter(|i| {
            let delta = i as f64 * 0.001;
            let t_grid = &t_grid;
            lambdas.iter().flat_map(move |&lambda| {
                t_grid
                    .iter()
                    .map(move |&log_t| (eval(delta, lambda, log_t), delta, lambda, log_t))
            })
        })
        .collect();
    cells.sort_by(|a, b| a.partial_cmp(b).unwrap());
    // Multi-start coordinate descent from the best grid cells; the surface
    // has several basins in the cutoff direction.
    let refine = |start: (f64, f64, f64, f64)| -> (f64, f64, f64, f64) {
        let (mut v, mut delta, mut lambda, mut log_t) = start;
        let mut t_step = (t_hi - lnh) / n_t as f64;
        for _ in 0..400 {
            let mut improved = false;
            for cand in [log_t - t_step, log_t + t_step] {
                if cand > lnh && cand < b1 {
                    let w = eval(delta, lambda, cand);
                    if w < v {
                        v = w;
                        log_t = cand;
                        improved = true;
                    }
                }
            }
            for cand in [delta - 0.001, delta + 0.001] {
                let cand = (cand * 1000.0).round() / 1000.0;
                if (0.001..=0.025).contains(&cand) {
                    let w = eval(cand, lambda, log_t);
                    if w < v {
                        v = w;
                        delta = cand;
                        improved = true;
                    }
                }
            }
            for cand in [lambda / 1.25, lambda * 1.25, lambda / 1.02, lambda * 1.02] {
                if cand > 1.0001 && cand <= 64.0 {
                    let w = eval(delta, cand, log_t);
                    if w < v {
                        v = w;
                        lambda = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                t_step /= 2.0;
                if t_step < 1e-4 * (t_hi - lnh) / n_t as f64 {
                    break;
                }
            }
        }
        (v, delta, lambda, log_t)
    };
    let starts: Vec<(f64, f64, f64, f64)> = cells.into_iter().take(12).collect();
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0);
    let refined: Vec<_> = starts.into_par_iter().map(refine).collect();
    for r in refined {
        if r.partial_cmp(&best) == Some(std::cmp::Ordering::Less) {
            best = r;
        }
    }
    let (_, delta, lambda, log_t) = best;
    let params = PtParams::new(delta, lambda, log_t, zd, consts)?;
    let value = pt_epsilon(b1, b2, &params, consts)?;
    Ok((value, params))
}

/// The sharp cut-off filter kernel: entire in `xi`, even, `l(0) = 1`.
pub fn logan_kernel(c: f64, eps_smooth: f64, xi: f64) -> Result<ConservativeReal> {
    if !(c > 0.0) || !(eps_smooth > 0.0) {
        return Err(Error::Domain("logan kernel requires c > 0 and eps > 0".into()));
    }
    let civ = Iv::from_f64(c);
    let scale = civ.div(&civ.sinh())?;
    let xe = Iv::from_f64(xi).mul(&Iv::from_f64(eps_smooth));
    let z2 = xe.mul(&xe).sub(&civ.mul(&civ));
    let iv = if z2.lo_f64() > 0.0 {
        // sin branch
        let z = z2.sqrt()?;
        scale.mul(&z.sin().div(&z)?)
    } else if z2.hi_f64() < 0.0 {
        // analytic continuation through sinh
        let z = z2.neg().sqrt()?;
        scale.mul(&z.sinh().div(&z)?)
    } else {
        // straddles the branch point: sin(z)/z <= 1 <= sinh(z)/z pins the hull
        let m = z2.hi_f64().max(-z2.lo_f64()).sqrt();
        let z = Iv::from_f64(m);
        if m == 0.0 {
            scale
        } else {
            let lo_part = z.sin().div(&z)?;
            let hi_part = z.sinh().div(&z)?;
            scale.mul(&Iv {
                lo: lo_part.lo,
                hi: hi_part.hi,
            })
        }
    };
    Ok(ConservativeReal::new(iv, Direction::Exact))
}

/// Configuration of the Logan-kernel bound. The `nu`/`mu` weights are
/// external inputs with no defaults; the method is optional and unused by
/// the default pipeline.
#[derive(Clone, Debug)]
pub struct ButheConfig {
    pub c: f64,
    pub eps_smooth: f64,
    pub x0: f64,
    pub alpha_smooth: f64,
    pub nu_abs: f64,
    pub mu_plus: f64,
}

impl ButheConfig {
    /// `B0 = eps e^{-eps} x0 |nu| / (2 mu_plus)`.
    pub fn b0(&self) -> f64 {
        self.eps_smooth * (-self.eps_smooth).exp() * self.x0 * self.nu_abs / (2.0 * self.mu_plus)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 3.0) {
            return Err(Error::Hypothesis(format!("c = {} violates c >= 3", self.c)));
        }
        if !(self.eps_smooth > 0.0 && self.eps_smooth < 1e-3) {
            return Err(Error::Hypothesis(format!(
                "eps = {} violates 0 < eps < 1e-3",
                self.eps_smooth
            )));
        }
        if !(self.x0 >= 100.0) {
            return Err(Error::Hypothesis(format!(
                "x0 = {} violates x0 >= 100",
                self.x0
            )));
        }
        if !(0.0..1.0).contains(&self.alpha_smooth) {
            return Err(Error::Hypothesis(format!(
                "alpha = {} violates 0 <= alpha < 1",
                self.alpha_smooth
            )));
        }
        if !(self.b0() > 1.0) {
            return Err(Error::Hypothesis(format!(
                "B0 = {} violates B0 > 1",
                self.b0()
            )));
        }
        Ok(())
    }
}

/// Main smoothing error term, including the trailing `e^{eps alpha} - 1`.
pub fn buthe_e1(cfg: &ButheConfig) -> Result<ConservativeReal> {
    let eps = Iv::from_f64(cfg.eps_smooth);
    let x0 = Iv::from_f64(cfg.x0);
    let b0 = Iv::from_f64(cfg.eps_smooth)
        .mul(&eps.neg().exp())
        .mul(&x0)
        .mul(&Iv::from_f64(cfg.nu_abs))
        .div(&Iv::from_f64(2.0 * cfg.mu_plus))?;
    if !(b0.lo_f64() > 1.0) {
        return Err(Error::Hypothesis(format!(
            "B0 = {} violates B0 > 1",
            b0.mid_f64()
        )));
    }
    let bracket = Iv::from_f64(2.0 * cfg.nu_abs)
        .mul(&eps)
        .div(&b0.ln()?)?
        .add(&Iv::parse("2.01").unwrap().mul(&eps).div(&x0.sqrt()?)?)
        .add(
            &Iv::from_f64(2.0)
                .mul(&x0)
                .mul(&x0)
                .ln()?
                .ln()?
                .div(&Iv::from_f64(2.0).mul(&x0))?,
        );
    let lead = Iv::from_f64(2.0)
        .mul(&eps)
        .exp()
        .mul(&eps.exp().mul(&x0).ln()?)
        .mul(&bracket);
    let tail = eps
        .mul(&Iv::from_f64(cfg.alpha_smooth))
        .exp()
        .sub(&Iv::one());
    Ok(ConservativeReal::new(lead.add(&tail), Direction::UpperSafe))
}

/// Kernel-tail term `0.16 (1 + 1/x0) / sinh c * e^{0.71 sqrt(c eps)} log(c/eps)`.
pub fn buthe_e2(cfg: &ButheConfig) -> Result<ConservativeReal> {
    let c = Iv::from_f64(cfg.c);
    let eps = Iv::from_f64(cfg.eps_smooth);
    let x0 = Iv::from_f64(cfg.x0);
    let iv = Iv::parse("0.16")
        .unwrap()
        .mul(&Iv::one().add(&Iv::one().div(&x0)?))
        .div(&c.sinh())?
        .mul(
            &Iv::parse("0.71")
                .unwrap()
                .mul(&c.mul(&eps).sqrt()?)
                .exp(),
        )
        .mul(&c.div(&eps)?.ln()?);
    Ok(ConservativeReal::new(iv, Direction::UpperSafe))
}

/// Low-zeros term `(2/sqrt(x0)) sum_{0 < gamma < c/eps} l(gamma)/gamma + 2/x0`.
pub fn buthe_e3(cfg: &ButheConfig, zeros: &ZetaZeroFile) -> Result<ConservativeReal> {
    let cutoff = cfg.c / cfg.eps_smooth;
    if zeros.max_ordinate() < cutoff {
        return Err(Error::ZerosTooShort {
            need: cutoff,
            have: zeros.max_ordinate(),
        });
    }
    let mut sum = Iv::zero();
    for &g in &zeros.ordinates {
        if g >= cutoff {
            break;
        }
        let l = logan_kernel(cfg.c, cfg.eps_smooth, g)?;
        sum = sum.add(&l.interval().div(&Iv::from_f64(g))?);
    }
    let x0 = Iv::from_f64(cfg.x0);
    let iv = Iv::from_f64(2.0)
        .div(&x0.sqrt()?)?
        .mul(&sum)
        .add(&Iv::from_f64(2.0).div(&x0)?);
    Ok(ConservativeReal::new(iv, Direction::UpperSafe))
}

/// `eps = e^{eps alpha} (E1 + E2 + E3)`, valid for `x >= e^{eps alpha} x0`.
pub fn buthe_epsilon(cfg: &ButheConfig, zeros: &ZetaZeroFile) -> Result<ConservativeReal> {
    cfg.validate()?;
    let e1 = buthe_e1(cfg)?;
    let e2 = buthe_e2(cfg)?;
    let e3 = buthe_e3(cfg, zeros)?;
    let sum = e1.interval().add(e2.interval()).add(e3.interval());
    let iv = Iv::from_f64(cfg.eps_smooth * cfg.alpha_smooth)
        .exp()
        .mul(&sum);
    Ok(ConservativeReal::new(iv, Direction::UpperSafe))
}


#[cfg(test)]
mod optimize_probe {
    use super::*;
    use crate::inputs::{GlobalConstants, ZeroDensityTable};

    #[test]
    #[ignore]
    fn probe_optimizer() {
        let zd = ZeroDensityTable::default_table();
        let gc = GlobalConstants::default();
        for (b1, b2, table) in [
            (2500.0, 3000.0, 9.06304e-13),
            (3000.0, 3500.0, 4.59972e-14),
            (5000.0, 5500.0, 5.63030e-19),
            (10000.0, 10500.0, 3.78493e-29),
        ] {
            let t = std::time::Instant::now();
            let (v, p) = pt_optimize(b1, b2, &zd, &gc).unwrap();
            println!(
                "pt({b1},{b2}) = {:e}  ratio {:.3}  [d={} lam={:.3} logT={:.1}]  {:?}",
                v.reported(),
                v.reported() / table,
                p.delta,
                p.lambda,
                p.log_t,
                t.elapsed()
            );
        }
        for b in (2600..3000).step_by(50) {
            let (v, _) = pt_optimize(b as f64, b as f64 + 50.0, &zd, &gc).unwrap();
            println!("infill {b}: {:e}", v.reported());
        }
        let (v, _) = pt_optimize(12100.0, 12500.0, &zd, &gc).unwrap();
        println!("infill 12100: {:e}", v.reported());
    }
}
