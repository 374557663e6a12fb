//! Threshold-router model of load balancing over time: a single router
//! sends one packet per step down link A or B, each link's cost depending on
//! the fraction of the last `W` packets it carried. Load balancing is the
//! threshold rule `A iff S(t) <= k_LB`; the bounds below compare it with the
//! best threshold.

use crate::cost::LoadToCost;
use crate::error::{Error, Result};

/// Cost functions `C_A`, `C_B`, window `W` and threshold `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdModel {
    pub ca: LoadToCost,
    pub cb: LoadToCost,
    pub window: usize,
    pub k: f64,
}

impl ThresholdModel {
    pub fn new(ca: LoadToCost, cb: LoadToCost, window: usize, k: f64) -> Result<Self> {
        check_k(window, k)?;
        Ok(ThresholdModel { ca, cb, window, k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub window: usize,
    pub k_lb: f64,
    pub k_prime: f64,
    /// Lower bound on the load-balancing cost, at `k_lb`.
    pub lb_lower_bound: f64,
    /// Upper bound on the best threshold's cost, at `k_prime`.
    pub opt_upper_bound: f64,
    /// `opt_upper_bound < lb_lower_bound`: load balancing is provably
    /// not optimal.
    pub suboptimal: bool,
}

impl BoundsReport {
    pub const CSV_HEADER: &'static str =
        "W,k_lb,k_lb_over_w,k_prime,k_prime_over_w,lb_lower_bound,opt_upper_bound,suboptimal";

    pub fn to_csv_row(&self) -> String {
        let w = self.window as f64;
        format!(
            "{},{},{},{},{},{},{},{}",
            self.window,
            self.k_lb,
            self.k_lb / w,
            self.k_prime,
            self.k_prime / w,
            self.lb_lower_bound,
            self.opt_upper_bound,
            self.suboptimal
        )
    }
}

impl std::fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let w = self.window as f64;
        writeln!(f, "W                 {}", self.window)?;
        writeln!(f, "k_LB / W          {:.6}", self.k_lb / w)?;
        writeln!(f, "k' / W            {:.6}", self.k_prime / w)?;
        writeln!(f, "LB lower bound    {:.6}", self.lb_lower_bound)?;
        writeln!(f, "opt upper bound   {:.6}", self.opt_upper_bound)?;
        write!(f, "LB suboptimal     {}", self.suboptimal)
    }
}

fn check_window(window: usize) -> Result<()> {
    if window <= 4 {
        return Err(Error::WindowTooSmall(window));
    }
    Ok(())
}

fn check_k(window: usize, k: f64) -> Result<()> {
    check_window(window)?;
    let max = window as f64 - 1.0;
    if !(k > 1.0 && k < max) {
        return Err(Error::ThresholdOutOfRange { k, max });
    }
    Ok(())
}

/// The `k` with `C_A(k/W) = C_B(1 - k/W)`, by bisection on `(1, W - 1)`.
pub fn solve_klb(ca: &LoadToCost, cb: &LoadToCost, window: usize) -> Result<f64> {
    check_window(window)?;
    let w = window as f64;
    let gap = |k: f64| ca.eval_unchecked(k / w) - cb.eval_unchecked(1.0 - k / w);
    let (mut lo, mut hi) = (1.0, w - 1.0);
    let (flo, fhi) = (gap(lo), gap(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if flo.signum() == fhi.signum() || fhi == 0.0 {
        return Err(Error::NoRoot);
    }
    let rising = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let g = gap(mid);
        if g.abs() < 1e-10 || hi - lo < f64::EPSILON * w {
            return Ok(mid);
        }
        if (g < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn weighted(c: &LoadToCost, u: f64) -> f64 {
    u * c.eval_unchecked(u.max(0.0))
}

/// Upper bound on the long-run average cost of threshold `k`.
pub fn upper_bound(ca: &LoadToCost, cb: &LoadToCost, window: usize, k: f64) -> Result<f64> {
    check_k(window, k)?;
    let w = window as f64;
    let a = (k + 1.0) / w;
    Ok(weighted(ca, a) + weighted(cb, 1.0 + 2.0 / w - a))
}

/// Lower bound on the long-run average cost of threshold `k`.
pub fn lower_bound(ca: &LoadToCost, cb: &LoadToCost, window: usize, k: f64) -> Result<f64> {
    check_k(window, k)?;
    let w = window as f64;
    let a = (k - 1.0) / w;
    Ok(weighted(ca, a) + weighted(cb, 1.0 - 2.0 / w - a))
}

/// Minimizes [`upper_bound`] over `k` by golden-section search; returns
/// `(k', bound)`.
pub fn argmin_upper(ca: &LoadToCost, cb: &LoadToCost, window: usize) -> Result<(f64, f64)> {
    check_window(window)?;
    let w = window as f64;
    let f = |k: f64| upper_bound(ca, cb, window, k).unwrap();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    // stay strictly inside the open interval
    let eps = 1e-9 * w;
    let (mut a, mut b) = (1.0 + eps, w - 1.0 - eps);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-6 * w {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let k = 0.5 * (a + b);
    Ok((k, f(k)))
}

/// Closed-form `k'/W` for `C_A(x) = x^2`, `C_B(x) = x`.
pub fn square_linear_kprime_fraction(window: usize) -> f64 {
    let w = window as f64;
    -1.0 / 3.0 - 1.0 / w + (28.0 + 48.0 / w).sqrt() / 6.0
}

pub fn verdict(ca: &LoadToCost, cb: &LoadToCost, window: usize) -> Result<BoundsReport> {
    let k_lb = solve_klb(ca, cb, window)?;
    let (k_prime, opt_upper_bound) = argmin_upper(ca, cb, window)?;
    let lb_lower_bound = lower_bound(ca, cb, window, k_lb)?;
    Ok(BoundsReport {
        window,
        k_lb,
        k_prime,
        lb_lower_bound,
        opt_upper_bound,
        suboptimal: opt_upper_bound < lb_lower_bound,
    })
}

/// Outcome of [`simulate_threshold`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdRun {
    /// Time-averaged cost over the measured steps.
    pub average: f64,
    /// First step at which the router switched from A to B.
    pub absorbed_at: usize,
    /// Range of `S(t)` over the measured steps.
    pub s_min: usize,
    pub s_max: usize,
}

/// Simulates the threshold router exactly, starting from an all-B window.
/// The transient up to the first A-to-B switch plus one window is
/// discarded; the next `steps` steps are averaged.
pub fn simulate_threshold(model: &ThresholdModel, steps: usize) -> Result<ThresholdRun> {
    check_k(model.window, model.k)?;
    let w = model.window;
    if steps < 10 * w {
        return Err(Error::Experiment(format!(
            "{steps} steps is fewer than 10 windows of {w}"
        )));
    }
    let wf = w as f64;
    let mut ring = vec![false; w];
    let mut s = 0usize;
    let mut prev_a = false;
    let mut absorbed_at = None;
    let mut measure_from = usize::MAX;
    let (mut total, mut counted) = (0.0, 0usize);
    let (mut s_min, mut s_max) = (usize::MAX, 0);
    let mut t = 0usize;
    while counted < steps {
        let choose_a = s as f64 <= model.k;
        if absorbed_at.is_none() && prev_a && !choose_a {
            absorbed_at = Some(t);
            measure_from = t + w;
        }
        if t >= measure_from {
            let u = s as f64 / wf;
            total += if choose_a {
                model.ca.eval_unchecked(u)
            } else {
                model.cb.eval_unchecked(1.0 - u)
            };
            counted += 1;
            s_min = s_min.min(s);
            s_max = s_max.max(s);
        }
        let slot = t % w;
        if ring[slot] {
            s -= 1;
        }
        ring[slot] = choose_a;
        if choose_a {
            s += 1;
        }
        prev_a = choose_a;
        t += 1;
        if absorbed_at.is_none() && t > 100 * w {
            return Err(Error::Experiment("threshold router never switched".into()));
        }
    }
    Ok(ThresholdRun {
        average: total / counted as f64,
        absorbed_at: absorbed_at.unwrap(),
        s_min,
        s_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> LoadToCost {
        LoadToCost::power(1.0, 2.0).unwrap()
    }

    fn lin() -> LoadToCost {
        LoadToCost::affine(0.0, 1.0).unwrap()
    }

    #[test]
    fn worked_example() {
        let r = verdict(&sq(), &lin(), 1000).unwrap();
        assert!((r.k_lb / 1000.0 - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-9);
        assert!((r.k_prime / 1000.0 - 0.548).abs() < 1e-3);
        assert!((r.lb_lower_bound - 0.380).abs() < 1e-3);
        assert!((r.opt_upper_bound - 0.371).abs() < 1e-3);
        assert!(r.suboptimal);
    }

    #[test]
    fn closed_form_kprime() {
        for w in [100, 1000, 10000] {
            let (k, _) = argmin_upper(&sq(), &lin(), w).unwrap();
            let want = square_linear_kprime_fraction(w);
            assert!((k / w as f64 - want).abs() < 1e-4, "W={w}");
        }
    }

    #[test]
    fn symmetric_and_linear_cases() {
        let two = LoadToCost::affine(0.0, 2.0).unwrap();
        assert!((solve_klb(&lin(), &lin(), 100).unwrap() - 50.0).abs() < 1e-6);
        assert!((solve_klb(&two, &lin(), 300).unwrap() - 100.0).abs() < 1e-6);
        let r = verdict(&lin(), &lin(), 1000).unwrap();
        assert!(!r.suboptimal);
        assert!((r.k_prime / 1000.0 - 0.5).abs() < 2e-3);
        let z = LoadToCost::Zero;
        assert_eq!(lower_bound(&z, &z, 100, 50.0).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            verdict(&sq(), &lin(), 4).unwrap_err(),
            Error::WindowTooSmall(4)
        );
        assert!(matches!(
            upper_bound(&sq(), &lin(), 100, 99.0),
            Err(Error::ThresholdOutOfRange { .. })
        ));
        assert!(matches!(
            lower_bound(&sq(), &lin(), 100, 1.0),
            Err(Error::ThresholdOutOfRange { .. })
        ));
        // C_A always above C_B: balancing never happens
        let high = LoadToCost::affine(5.0, 1.0).unwrap();
        assert_eq!(solve_klb(&high, &lin(), 100).unwrap_err(), Error::NoRoot);
    }

    #[test]
    fn simulator_absorbs_and_respects_bounds() {
        let w = 200;
        let k = solve_klb(&sq(), &lin(), w).unwrap();
        let m = ThresholdModel::new(sq(), lin(), w, k).unwrap();
        let run = simulate_threshold(&m, 20 * w).unwrap();
        assert!(run.s_max - run.s_min <= 1);
        assert!((run.s_min as f64) > k - 1.0 && (run.s_min as f64) <= k);
        let lo = lower_bound(&sq(), &lin(), w, k).unwrap();
        let hi = upper_bound(&sq(), &lin(), w, k).unwrap();
        assert!(lo <= run.average && run.average <= hi);
    }
}
