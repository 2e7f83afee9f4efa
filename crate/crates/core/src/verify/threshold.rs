use super::{trimmed_range, Band, ConstantReport, Slope};
use crate::asymptotics::EtaZeta;
use crate::error::{Error, Result};
use crate::graph::VolumeProfile;
use crate::linalg::fit_loglog;
use crate::operators::DecayCurve;

/// The radius function `n -> r(n)` that the decay curve is compared with.
#[derive(Debug, Clone, Copy)]
pub enum Clock<'a> {
    /// `zeta(n)`, the numeric inverse of `eta~`.
    Zeta(&'a EtaZeta),
    /// `n^{1/gamma}`.
    Power(f64),
}

impl Clock<'_> {
    pub fn radius(&self, n: f64) -> f64 {
        match self {
            Clock::Zeta(ez) => ez.zeta(n),
            Clock::Power(gamma) => n.powf(1.0 / gamma),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Clock::Zeta(_) => "zeta",
            Clock::Power(_) => "power",
        }
    }
}

/// Largest `n` whose length scales `n^{1/gamma}` and (with `ez`) `zeta(n)`
/// both stay within `r_max`.
pub fn safe_horizon(r_max: f64, gamma: f64, ez: Option<&EtaZeta>) -> usize {
    let scale = |n: usize| {
        let t = n as f64;
        let z = ez.map_or(0.0, |ez| ez.zeta(t));
        z.max(t.powf(1.0 / gamma))
    };
    let (mut lo, mut hi) = (0usize, 1usize);
    while scale(hi) <= r_max {
        lo = hi;
        hi *= 2;
        if hi > 1 << 40 {
            return lo;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if scale(mid) <= r_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn window(curve: &DecayCurve) -> Result<(Vec<f64>, Vec<f64>)> {
    let pts: Vec<_> = curve.points.iter().filter(|p| p.n >= 1 && !p.flag_boundary).collect();
    if pts.len() < 2 {
        return Err(Error::EmptyWindow(
            "fewer than two n whose walk scale stays below a quarter of the diameter; use a larger graph".into(),
        ));
    }
    Ok((pts.iter().map(|p| p.n as f64).collect(), pts.iter().map(|p| p.psi).collect()))
}

/// `psi_K(n) V(r(n))` over the unflagged part of `curve`, plus the log-log
/// slope of `psi_K` on the trimmed window. With the `zeta` clock the band
/// starts where `zeta` leaves its clamp at 1. Passes when the band spread is
/// at most `band_tol`.
pub fn verify_threshold(curve: &DecayCurve, v: &VolumeProfile, clock: Clock<'_>, band_tol: f64) -> Result<ConstantReport> {
    let (ns, psi) = window(curve)?;
    let cut = trimmed_range(ns.len());
    let fit = fit_loglog(&ns[cut.clone()], &psi[cut]);
    let n_min = match clock {
        Clock::Zeta(ez) => ez.eta_tilde(1.0),
        Clock::Power(_) => 1.0,
    };
    let (band_ns, ratios): (Vec<f64>, Vec<f64>) = ns
        .iter()
        .zip(&psi)
        .filter(|(&n, _)| n >= n_min)
        .map(|(&n, &p)| (n, p * v.eval(clock.radius(n))))
        .unzip();
    let band = Band::of(ratios.iter().copied());
    let mut r = ConstantReport::new("decay_threshold", clock.label())
        .grid("n", band_ns)
        .grid("ratio", ratios)
        .constant("slope", fit.slope)
        .constant("band_n_min", n_min);
    r.band = band;
    r.slope = Some(Slope { value: fit.slope, stderr: fit.stderr });
    if let Clock::Zeta(ez) = clock {
        let clamped = ns.iter().filter(|&&n| n >= n_min && ez.zeta_flagged(n).1).count();
        if clamped > 0 {
            r.notes.push(format!("{clamped} zeta values clamped to the tabulated range"));
        }
    }
    if band.is_none() {
        r.notes.push("no n in the window reaches zeta(n) >= 1".into());
    }
    r.pass = band.is_some_and(|b| b.spread() <= band_tol);
    Ok(r)
}

/// One member of a growing graph family for the moment check.
#[derive(Debug, Clone)]
pub struct MomentLevel {
    pub label: String,
    pub diameter: f64,
    /// `M_{gamma, K}` on this graph.
    pub moment: f64,
    pub curve: DecayCurve,
    pub volume: VolumeProfile,
    /// `1 / mu(Gamma)`: the stationary part of `psi_K`, which the infinite
    /// graph does not have. It is subtracted before forming the band.
    pub stationary: f64,
}

/// Bounded `M_{gamma, K}` across sizes against a bounded
/// `(psi_K(n) - 1/mu(Gamma)) V(n^{1/gamma})` band.
///
/// The moment counts as bounded when its spread is below 2, the band when
/// its spread is at most `band_tol`; the check passes when the two
/// verdicts agree.
pub fn verify_moment_threshold(levels: &[MomentLevel], gamma: f64, band_tol: f64) -> Result<ConstantReport> {
    if levels.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "moment check needs at least 3 graph sizes (got {})",
            levels.len()
        )));
    }
    let moments: Vec<f64> = levels.iter().map(|l| l.moment).collect();
    let diams: Vec<f64> = levels.iter().map(|l| l.diameter).collect();
    let m_band = Band::of(moments.iter().copied()).expect("nonempty");
    let m_fit = fit_loglog(&diams, &moments);

    let mut psi_band: Option<Band> = None;
    let mut monotone = 0usize;
    for l in levels {
        let (ns, psi) = window(&l.curve)?;
        let ratios: Vec<f64> =
            ns.iter().zip(&psi).map(|(&n, &p)| (p - l.stationary) * l.volume.eval(n.powf(1.0 / gamma))).collect();
        if ratios.windows(2).all(|w| w[1] < w[0]) {
            monotone += 1;
        }
        let b = Band::of(ratios.iter().copied()).expect("nonempty window");
        psi_band = Some(psi_band.map_or(b, |a| a.merge(b)));
    }
    let psi_band = psi_band.expect("levels nonempty");
    let m_bounded = m_band.spread() < 2.0;
    let psi_bounded = psi_band.spread() <= band_tol;

    let mut r = ConstantReport::new("moment_threshold", "graph_family")
        .grid("diameter", diams)
        .grid("moment", moments)
        .constant("moment_spread", m_band.spread())
        .constant("moment_slope", m_fit.slope)
        .constant("psi_band_spread", psi_band.spread())
        .constant("monotone_levels", monotone as f64);
    r.band = Some(psi_band);
    r.slope = Some(Slope { value: m_fit.slope, stderr: m_fit.stderr });
    r.notes.extend(levels.iter().map(|l| l.label.clone()));
    r.pass = m_bounded == psi_bounded;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BaseConvention;
    use crate::operators::DecayPoint;

    fn curve(f: impl Fn(f64) -> f64, ns: &[usize]) -> DecayCurve {
        DecayCurve {
            points: ns
                .iter()
                .map(|&n| DecayPoint { n, psi: f(n as f64), flag_boundary: false, argmax: 0 })
                .collect(),
        }
    }

    fn linear_profile(len: usize) -> VolumeProfile {
        VolumeProfile::from_table((0..len).map(|r| 2.0 * r as f64 + 1.0).collect(), BaseConvention::FixedBase(0))
            .unwrap()
    }

    #[test]
    fn exact_power_law_is_flat() {
        let ns: Vec<usize> = (1..=64).collect();
        let c = curve(|n| 1.0 / (2.0 * n.sqrt() + 1.0), &ns);
        let rep = verify_threshold(&c, &linear_profile(100), Clock::Power(2.0), 10.0).unwrap();
        assert!(rep.band.unwrap().spread() < 1.0 + 1e-9);
        assert!(rep.pass);
    }

    #[test]
    fn horizon_of_the_power_clock() {
        assert_eq!(safe_horizon(16.0, 2.0, None), 256);
        assert_eq!(safe_horizon(0.5, 2.0, None), 0);
    }

    #[test]
    fn empty_window_is_an_error() {
        let c = DecayCurve {
            points: vec![DecayPoint { n: 5, psi: 1.0, flag_boundary: true, argmax: 0 }],
        };
        let err = verify_threshold(&c, &linear_profile(10), Clock::Power(2.0), 10.0).unwrap_err();
        assert!(err.to_string().contains("diameter"));
    }

    #[test]
    fn moment_check_needs_three_levels() {
        let ns: Vec<usize> = (1..10).collect();
        let l = MomentLevel {
            label: "a".into(),
            diameter: 10.0,
            moment: 1.0,
            curve: curve(|n| 1.0 / n, &ns),
            volume: linear_profile(50),
            stationary: 0.0,
        };
        assert!(verify_moment_threshold(&[l.clone(), l], 2.0, 10.0).is_err());
    }
}
