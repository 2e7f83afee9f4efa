use serde::{Deserialize, Serialize};

use super::{volume_profile, BaseConvention, SafeWindow, VolumeProfile, WeightedGraph};
use crate::error::{Error, Result};
use crate::linalg::fit_line;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReverseDoubling {
    pub a: u32,
    pub c1: f64,
}

/// Measured constants of the standing volume and walk assumptions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDiagnostics {
    pub c_mu: f64,
    pub c_d: f64,
    pub c_h: f64,
    pub p0: f64,
    pub alpha_fit: f64,
    pub reverse_doubling: ReverseDoubling,
    pub profile: String,
    pub r_grid: Vec<f64>,
}

/// Integer radii in the top octave `[r_max/2, r_max]` of the window.
///
/// Small radii carry an additive offset in `V` (the centre vertex and its
/// first shells) that biases log-log fits, so fits use the top octave.
pub fn default_radius_grid(window: &SafeWindow) -> Vec<f64> {
    if window.r_max < 1.0 {
        return vec![window.r_max];
    }
    let hi = window.r_max.floor() as u32;
    let lo = ((window.r_max / 2.0).ceil() as u32).clamp(1, hi);
    (lo..=hi).map(f64::from).collect()
}

/// Diagnostics with the default median profile and boundary-safe window.
pub fn diagnostics(g: &WeightedGraph, r_grid: &[f64]) -> Result<GraphDiagnostics> {
    let window = SafeWindow::new(g);
    let profile = volume_profile(g, BaseConvention::Median, &window)?;
    diagnostics_with(g, &profile, &window, r_grid)
}

pub fn diagnostics_with(
    g: &WeightedGraph,
    profile: &VolumeProfile,
    window: &SafeWindow,
    r_grid: &[f64],
) -> Result<GraphDiagnostics> {
    if r_grid.is_empty() {
        return Err(Error::EmptyWindow("radius grid is empty".into()));
    }
    for &r in r_grid {
        window.check_radius(r)?;
    }

    let c_mu = g
        .measures()
        .iter()
        .map(|&m| m.max(1.0 / m))
        .fold(1.0, f64::max);

    let c_d = r_grid
        .iter()
        .filter(|&&r| r > 0.0)
        .map(|&r| profile.eval(2.0 * r) / profile.eval(r))
        .fold(1.0, f64::max);

    const A: u32 = 2;
    let mut c_h: f64 = 1.0;
    let mut c1 = f64::INFINITY;
    for &x in &window.base {
        let vols = g.volume_by_radius(x)?;
        let at = |r: f64| -> f64 {
            let i = (r.floor().max(0.0) as usize).min(vols.len() - 1);
            vols[i]
        };
        for &r in r_grid {
            let vr = profile.eval(r);
            let vx = at(r);
            c_h = c_h.max(vx / vr).max(vr / vx);
            if r >= 0.5 {
                c1 = c1.min((at(f64::from(A) * r) - vx) / vr);
            }
        }
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = r_grid
        .iter()
        .filter(|&&r| r > 0.0)
        .map(|&r| (r.ln(), profile.eval(r).ln()))
        .unzip();
    let alpha_fit = if xs.len() >= 2 { fit_line(&xs, &ys).slope } else { f64::NAN };

    Ok(GraphDiagnostics {
        c_mu,
        c_d,
        c_h,
        p0: g.p0(),
        alpha_fit,
        reverse_doubling: ReverseDoubling { a: A, c1 },
        profile: profile.label(),
        r_grid: r_grid.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_graph;

    #[test]
    fn two_vertex_graph() {
        let g = build_graph(&[(0, 1, 1.0)]).unwrap();
        let d = diagnostics(&g, &[0.25]).unwrap();
        assert_eq!(d.c_mu, 1.0);
        assert_eq!(d.p0, 1.0);
    }

    #[test]
    fn grid_beyond_window_names_bound() {
        let list: Vec<_> = (0..20).map(|i| (i, i + 1, 1.0)).collect();
        let g = build_graph(&list).unwrap().with_boundary(vec![0, 20]).unwrap();
        match diagnostics(&g, &[2.0, 9.0]) {
            Err(Error::UnsafeRadius { requested, safe }) => {
                assert_eq!(requested, 9.0);
                assert_eq!(safe, 5.0);
            }
            other => panic!("expected unsafe radius, got {other:?}"),
        }
    }

    #[test]
    fn default_grid_is_top_octave() {
        let w = SafeWindow { r_max: 16.0, base: vec![0] };
        assert_eq!(default_radius_grid(&w), (8..=16).map(f64::from).collect::<Vec<_>>());
        let w = SafeWindow { r_max: 0.75, base: vec![0] };
        assert_eq!(default_radius_grid(&w), vec![0.75]);
    }
}
