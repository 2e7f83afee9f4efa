//! The jump profile `phi`, the clock `eta(R) = R^gamma / int_0^R s^(gamma-1)/phi(s) ds`,
//! its running supremum `eta~` and the numeric inverse `zeta`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::fit_loglog;

/// `phi(t) = max(1, (1+t)^beta * ln(e+t)^lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpProfile {
    pub beta: f64,
    #[serde(default)]
    pub log_exponent: f64,
}

impl JumpProfile {
    pub fn new(beta: f64, log_exponent: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() || !log_exponent.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "jump profile needs beta > 0 (got {beta}) and finite lambda (got {log_exponent})"
            )));
        }
        Ok(JumpProfile { beta, log_exponent })
    }

    pub fn power(beta: f64) -> Result<Self> {
        Self::new(beta, 0.0)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let t = t.max(0.0);
        let mut v = (1.0 + t).powf(self.beta);
        if self.log_exponent != 0.0 {
            v *= (std::f64::consts::E + t).ln().powf(self.log_exponent);
        }
        v.max(1.0)
    }

    /// Whether `phi` sits on its floor of 1 at `t` (only possible for `lambda < 0`).
    pub fn floored(&self, t: f64) -> bool {
        self.log_exponent < 0.0
            && (1.0 + t).powf(self.beta) * (std::f64::consts::E + t).ln().powf(self.log_exponent) < 1.0
    }
}

/// Romberg integration (trapezoid with interval doubling plus Richardson
/// extrapolation) of a smooth integrand on `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    const MAX_LEVEL: usize = 22;
    let mut prev_row: Vec<f64> = vec![0.5 * (b - a) * (f(a) + f(b))];
    let mut points = 1usize;
    for level in 1..=MAX_LEVEL {
        let h = (b - a) / (2 * points) as f64;
        let mid: f64 = (0..points).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        points *= 2;
        let mut row = Vec::with_capacity(level + 1);
        row.push(0.5 * prev_row[0] + h * mid);
        let mut factor = 1.0;
        for k in 1..=level {
            factor *= 4.0;
            let r = row[k - 1] + (row[k - 1] - prev_row[k - 1]) / (factor - 1.0);
            row.push(r);
        }
        let best = row[level];
        let last = prev_row[level - 1];
        if level >= 4 && (best - last).abs() <= rel_tol * best.abs().max(1e-300) {
            return best;
        }
        prev_row = row;
    }
    *prev_row.last().unwrap()
}

/// `int_a^b s^(gamma-1)/phi(s) ds`, split on a geometric grid so each piece is smooth.
fn clock_integral(profile: &JumpProfile, gamma: f64, a: f64, b: f64) -> f64 {
    let f = |s: f64| if s <= 0.0 { 0.0 } else { s.powf(gamma - 1.0) / profile.eval(s) };
    let mut total = 0.0;
    let mut lo = a;
    // s^(gamma-1) is not smooth at 0 for fractional gamma; the first sliver is
    // integrated in closed form with phi frozen at phi(0).
    const EPS: f64 = 1.0 / (1u64 << 30) as f64;
    if lo < EPS {
        let hi = b.min(EPS);
        total += (hi.powf(gamma) - lo.powf(gamma)) / (gamma * profile.eval(0.0));
        lo = hi;
    }
    while lo < b {
        let hi = b.min(2.0 * lo);
        total += integrate(f, lo, hi, 1e-13);
        lo = hi;
    }
    total
}

/// `eta(t)` by direct quadrature, with `eta(0) = gamma * phi(0)`.
pub fn eta(profile: &JumpProfile, gamma: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return gamma * profile.eval(0.0);
    }
    t.powf(gamma) / clock_integral(profile, gamma, 0.0, t)
}

/// Tabulated `eta`, `eta~` and inverse `zeta` for one `(phi, gamma)`.
#[derive(Debug, Clone)]
pub struct EtaZeta {
    profile: JumpProfile,
    gamma: f64,
    ts: Vec<f64>,
    integral: Vec<f64>,
    eta: Vec<f64>,
    eta_tilde: Vec<f64>,
}

/// Table points per factor of two in `t`.
const PER_OCTAVE: usize = 16;

impl EtaZeta {
    /// Tabulates on `[0, t_max]`: a uniform grid on `[0, 1]` and a geometric
    /// grid beyond.
    pub fn new(profile: JumpProfile, gamma: f64, t_max: f64) -> Result<Self> {
        if !(gamma >= 2.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 2 (got {gamma})")));
        }
        if !(t_max >= 1.0) || !t_max.is_finite() {
            return Err(Error::InvalidParameter(format!("table range must reach t >= 1 (got {t_max})")));
        }
        let mut ts: Vec<f64> = (0..=PER_OCTAVE).map(|i| i as f64 / PER_OCTAVE as f64).collect();
        let step = 2f64.powf(1.0 / PER_OCTAVE as f64);
        let mut k = 1;
        loop {
            let t = step.powi(k);
            if t >= t_max {
                ts.push(t_max);
                break;
            }
            ts.push(t);
            k += 1;
        }
        let mut integral = Vec::with_capacity(ts.len());
        let mut acc = 0.0;
        integral.push(0.0);
        for w in ts.windows(2) {
            acc += clock_integral(&profile, gamma, w[0], w[1]);
            integral.push(acc);
        }
        let eta: Vec<f64> = ts
            .iter()
            .zip(&integral)
            .map(|(&t, &i)| if t == 0.0 { gamma * profile.eval(0.0) } else { t.powf(gamma) / i })
            .collect();
        let mut run = f64::NEG_INFINITY;
        let eta_tilde = eta
            .iter()
            .map(|&e| {
                run = run.max(e);
                run
            })
            .collect();
        Ok(EtaZeta { profile, gamma, ts, integral, eta, eta_tilde })
    }

    pub fn profile(&self) -> JumpProfile {
        self.profile
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn t_max(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    /// Table index `k` with `ts[k] <= t < ts[k+1]`.
    fn bracket(&self, t: f64) -> usize {
        match self.ts.binary_search_by(|p| p.total_cmp(&t)) {
            Ok(k) => k.min(self.ts.len() - 1),
            Err(k) => k.saturating_sub(1),
        }
    }

    /// `eta(t)` from the table plus one quadrature piece.
    pub fn eta(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.eta[0];
        }
        let k = self.bracket(t);
        if self.ts[k] == t {
            return self.eta[k];
        }
        let i = self.integral[k] + clock_integral(&self.profile, self.gamma, self.ts[k], t);
        t.powf(self.gamma) / i
    }

    /// `eta~(t) = sup_{s <= t} eta(s)`. Between table points `eta` is taken
    /// as monotone, so the supremum is the larger of the table value and `eta(t)`.
    pub fn eta_tilde(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return self.eta_tilde[0];
        }
        let k = self.bracket(t);
        self.eta_tilde[k].max(self.eta(t))
    }

    /// `zeta(t)`: the smallest `s` with `eta~(s) = t`, clamped below at 1.
    /// The flag is set when `t` falls outside the tabulated range.
    pub fn zeta_flagged(&self, t: f64) -> (f64, bool) {
        let top = *self.eta_tilde.last().unwrap();
        if t > top {
            return (self.t_max(), true);
        }
        if t <= self.eta_tilde[0] {
            return (1.0, true);
        }
        let k = self.eta_tilde.partition_point(|&e| e < t);
        let (mut lo, mut hi) = (self.ts[k - 1], self.ts[k]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eta_tilde(mid) < t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi {
                break;
            }
        }
        (hi.max(1.0), false)
    }

    pub fn zeta(&self, t: f64) -> f64 {
        self.zeta_flagged(t).0
    }

    /// Table rows `(t, phi, eta, eta~, zeta(eta~(t)))`.
    pub fn rows(&self) -> impl Iterator<Item = [f64; 5]> + '_ {
        self.ts.iter().enumerate().map(move |(k, &t)| {
            [t, self.profile.eval(t), self.eta[k], self.eta_tilde[k], self.zeta(self.eta_tilde[k])]
        })
    }

    /// Table dump with header `t,phi,eta,eta_tilde,zeta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,phi,eta,eta_tilde,zeta\n");
        for r in self.rows() {
            let _ = writeln!(out, "{},{},{},{},{}", r[0], r[1], r[2], r[3], r[4]);
        }
        out
    }

    /// Table of `(t, eta(t))` on the geometric part of the grid.
    pub fn eta_table(&self) -> Vec<(f64, f64)> {
        self.ts.iter().zip(&self.eta).filter(|(&t, _)| t >= 1.0).map(|(&t, &e)| (t, e)).collect()
    }
}

/// Index of regular variation: slope of `ln f` against `ln t` over the top
/// two decades of the table.
pub fn rv_index_fit(table: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = table.iter().copied().filter(|&(t, f)| t > 0.0 && f > 0.0).collect();
    let (t_lo, t_hi) = match (pts.first(), pts.last()) {
        (Some(a), Some(b)) => (a.0, b.0),
        _ => return Err(Error::InvalidParameter("empty table".into())),
    };
    if t_hi / t_lo < 1e3 * (1.0 - 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "table spans {:.2} decades; at least 3 are needed",
            (t_hi / t_lo).log10()
        )));
    }
    let cut = t_hi / 100.0;
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().filter(|p| p.0 >= cut * (1.0 - 1e-12)).copied().unzip();
    Ok(fit_loglog(&xs, &ys).slope)
}

/// `max_t eta(t)/phi(t)` over `grid`.
pub fn eta_le_phi_check(profile: &JumpProfile, gamma: f64, grid: &[f64]) -> f64 {
    grid.iter().map(|&t| eta(profile, gamma, t) / profile.eval(t)).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eta_at_zero() {
        let p = JumpProfile::power(1.0).unwrap();
        assert_eq!(eta(&p, 2.0, 0.0), 2.0);
        let ez = EtaZeta::new(p, 2.5, 10.0).unwrap();
        assert_eq!(ez.eta(0.0), 2.5);
    }

    #[test]
    fn eta_closed_form_for_gamma2_beta1() {
        let p = JumpProfile::power(1.0).unwrap();
        let exact = 1e4 / (100.0 - 101f64.ln());
        assert_relative_eq!(eta(&p, 2.0, 100.0), exact, max_relative = 1e-10);
        let ez = EtaZeta::new(p, 2.0, 1e3).unwrap();
        assert_relative_eq!(ez.eta(100.0), exact, max_relative = 1e-10);
        assert_relative_eq!(ez.eta(37.3), 37.3f64.powi(2) / (37.3 - 38.3f64.ln()), max_relative = 1e-10);
    }

    #[test]
    fn eta_beta_above_gamma_tends_to_inverse_integral() {
        // int_0^inf s/(1+s)^4 ds = B(2, 2) = 1/6
        let p = JumpProfile::power(4.0).unwrap();
        let t = 1e6;
        assert_relative_eq!(eta(&p, 2.0, t) / (t * t), 6.0, max_relative = 1e-5);
    }

    #[test]
    fn quadrature_is_stable_under_refinement() {
        let f = |s: f64| s.powf(1.3) / (1.0 + s).powf(1.5);
        let a = integrate(f, 0.0, 5.0, 1e-13);
        let b = integrate(f, 0.0, 2.5, 1e-13) + integrate(f, 2.5, 5.0, 1e-13);
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn zeta_inverts_eta_tilde() {
        let p = JumpProfile::power(1.0).unwrap();
        let ez = EtaZeta::new(p, 2.0, 1e5).unwrap();
        // below eta~(1) the clamp at 1 takes over
        let mut t = 1.01 * ez.eta_tilde(1.0);
        while t < 1e5 {
            let s = ez.zeta(t);
            let back = ez.eta_tilde(s);
            assert!((back / t - 1.0).abs() < 1e-3, "t={t} s={s} back={back}");
            t *= 1.7;
        }
        assert!(ez.zeta_flagged(1e12).1);
        assert_eq!(ez.zeta(0.5), 1.0);
    }

    #[test]
    fn negative_log_exponent_is_floored() {
        let p = JumpProfile::new(0.5, -3.0).unwrap();
        assert!(!p.floored(0.0));
        assert!(p.floored(1.0));
        assert_eq!(p.eval(1.0), 1.0);
        let ez = EtaZeta::new(p, 2.0, 1e3).unwrap();
        let rows: Vec<_> = ez.rows().collect();
        assert!(rows.windows(2).all(|w| w[1][3] >= w[0][3]));
        assert!(rows.iter().all(|r| r[3] >= r[2]));
    }

    #[test]
    fn index_fits() {
        let grid: Vec<f64> = (0..=50).map(|k| 10f64.powf(k as f64 / 10.0)).collect();
        let p = JumpProfile::power(1.5).unwrap();
        let table: Vec<_> = grid.iter().map(|&t| (t, p.eval(t))).collect();
        assert!((rv_index_fit(&table).unwrap() - 1.5).abs() < 0.02);
        assert!(rv_index_fit(&table[..25]).is_err());
    }
}
