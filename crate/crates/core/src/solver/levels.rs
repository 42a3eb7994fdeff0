//! Level-set quantities of the oracle solution: the flux of
//! `A |u'|^{p-1}` through `{u = tau}`, `psi_u` and their integrals.
//!
//! In the weighted 1D model `A |u'|^{p-1} = |F|`, so the flux through a level
//! is the sum of `|F|` over its crossing points, located on the
//! piecewise-linear `u`.

use super::{gl3, NeumannSolution};
use crate::error::{Error, Result};
use crate::rearrange::Sign;

fn signed_values(sol: &NeumannSolution, sign: Sign) -> Vec<f64> {
    match sign {
        Sign::Plus => sol.u.clone(),
        Sign::Minus => sol.u.iter().map(|v| -v).collect(),
    }
}

fn crossing(sol: &NeumannSolution, v: &[f64], j: usize, tau: f64) -> f64 {
    let (t0, t1) = (sol.nodes[j], sol.nodes[j + 1]);
    t0 + (t1 - t0) * (tau - v[j]) / (v[j + 1] - v[j])
}

fn crosses(v: &[f64], j: usize, tau: f64) -> bool {
    let (lo, hi) = (v[j].min(v[j + 1]), v[j].max(v[j + 1]));
    lo < tau && tau <= hi
}

/// `∫_{u_± = tau} |∇u|^{p-1}`: the sum of `|F|` over the crossings of the level.
pub fn level_flux(sol: &NeumannSolution, sign: Sign, tau: f64) -> f64 {
    let v = signed_values(sol, sign);
    (0..sol.cells())
        .filter(|&j| crosses(&v, j, tau))
        .map(|j| sol.flux_at(crossing(sol, &v, j, tau)).abs())
        .sum()
}

/// `∫_0^t g(flux(tau)) dtau` for every `t` in `queries` (any order), by a
/// sweep over the bands between consecutive node levels. Within a band the
/// crossing cells are fixed and the flux is smooth.
pub(super) fn band_integrals<G: Fn(f64) -> f64>(
    sol: &NeumannSolution,
    sign: Sign,
    queries: &[f64],
    g: G,
) -> Vec<f64> {
    let v = signed_values(sol, sign);
    let top = v.iter().fold(0.0f64, |m, &x| m.max(x));
    let mut levels: Vec<f64> = v.iter().copied().filter(|&x| x > 0.0 && x < top).collect();
    levels.push(0.0);
    levels.push(top);
    levels.sort_by(f64::total_cmp);
    levels.dedup();

    let mut by_lo: Vec<usize> = (0..sol.cells()).filter(|&j| v[j] != v[j + 1]).collect();
    by_lo.sort_by(|&a, &b| v[a].min(v[a + 1]).total_cmp(&v[b].min(v[b + 1])));

    let mut order: Vec<usize> = (0..queries.len()).collect();
    order.sort_by(|&a, &b| queries[a].total_cmp(&queries[b]));
    let mut out = vec![f64::NAN; queries.len()];
    let mut qi = 0;

    let flux = |active: &[usize], tau: f64| -> f64 {
        active
            .iter()
            .map(|&j| sol.flux_at(crossing(sol, &v, j, tau)).abs())
            .sum()
    };
    let mut active: Vec<usize> = Vec::new();
    let mut next = 0;
    let mut acc = 0.0;
    while qi < order.len() && queries[order[qi]] <= 0.0 {
        out[order[qi]] = 0.0;
        qi += 1;
    }
    for k in 0..levels.len() - 1 {
        let (b0, b1) = (levels[k], levels[k + 1]);
        while next < by_lo.len() {
            let j = by_lo[next];
            if v[j].min(v[j + 1]) <= b0 {
                active.push(j);
                next += 1;
            } else {
                break;
            }
        }
        active.retain(|&j| v[j].max(v[j + 1]) > b0);
        let band = |a: f64, b: f64| gl3(|tau| g(flux(&active, tau)), a, b);
        while qi < order.len() && queries[order[qi]] <= b1 {
            let t = queries[order[qi]];
            out[order[qi]] = acc + band(b0, t);
            qi += 1;
        }
        acc += band(b0, b1);
    }
    for &i in &order[qi..] {
        out[i] = acc;
    }
    out
}

/// `psi_{u_±}(t) = ∫_0^t dtau / (∫_{u_± = tau} |∇u|^{p-1})^{1/(p-1)}`.
pub fn psi_function(sol: &NeumannSolution, sign: Sign, t_grid: &[f64]) -> Result<Vec<f64>> {
    if t_grid.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidInput("levels must be non-negative".into()));
    }
    let e = -1.0 / (sol.p - 1.0);
    Ok(band_integrals(sol, sign, t_grid, |phi| {
        if phi > 0.0 {
            phi.powf(e)
        } else {
            f64::INFINITY
        }
    }))
}

/// `count` levels spread over `(0, max u_±)`, skipping levels on which `u`
/// is constant over a cell. Returns the levels and the number skipped.
pub fn sample_levels(sol: &NeumannSolution, sign: Sign, count: usize) -> (Vec<f64>, usize) {
    let v = signed_values(sol, sign);
    let top = v.iter().fold(0.0f64, |m, &x| m.max(x));
    if top <= 0.0 {
        return (Vec::new(), 0);
    }
    let flat: Vec<f64> = (0..sol.cells()).filter(|&j| v[j] == v[j + 1]).map(|j| v[j]).collect();
    let mut skipped = 0;
    let levels = (1..=count)
        .map(|k| top * k as f64 / (count + 1) as f64)
        .filter(|&t| {
            let jump = flat.iter().any(|&x| (x - t).abs() <= 1e-12 * top);
            skipped += jump as usize;
            !jump
        })
        .collect();
    (levels, skipped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{solve_with, Datum, SolveOptions, SolverGrid};
    use std::f64::consts::PI;
    use std::sync::Arc;

    #[test]
    fn unit_slope_flux_is_the_weight() {
        // A = t(1-t) and f = (1-2t)/(t(1-t)) give F = A and u' = -1 for p = 2.
        let w = Arc::new(|t: f64| t * (1.0 - t)) as crate::numerics::RealFn;
        let d = Datum::new("ramp", |t: f64| (1.0 - 2.0 * t) / (t * (1.0 - t)));
        let opts = SolveOptions {
            median_normalize: false,
            compatibility_tol: 1e-10,
        };
        let sol = solve_with(&w, 2.0, &d, SolverGrid::new(1.0, 1000).unwrap(), opts).unwrap();
        for g in &sol.cell_gradient {
            assert!((g + 1.0).abs() < 1e-9, "{g}");
        }
        for tau in [0.1, 0.4, 0.75] {
            let phi = level_flux(&sol, Sign::Minus, tau);
            assert!((phi - tau * (1.0 - tau)).abs() < 1e-9, "{tau} {phi}");
        }
        // psi diverges at 0 because the flux vanishes linearly there.
        let psi = psi_function(&sol, Sign::Minus, &[0.5]).unwrap();
        assert!(psi[0] > 5.0);
    }

    #[test]
    fn psi_of_cos_solution() {
        // p = 2, u = cos(2 pi t) / 4 pi^2 normalized to median 0, so u > 0 on
        // (0, 1/4) and (3/4, 1); |F| = |sin 2 pi t| / 2 pi at both crossings.
        let sol = crate::solver::solve_weighted_neumann(
            &(Arc::new(|_| 1.0) as crate::numerics::RealFn),
            2.0,
            &Datum::new("cos", |t| (2.0 * PI * t).cos()),
            SolverGrid::new(1.0, 4000).unwrap(),
        )
        .unwrap();
        let c = 1.0 / (4.0 * PI * PI);
        // level tau = c cos(2 pi x): flux = 2 * sin(2 pi x) / 2 pi = sqrt(1 - (tau/c)^2) / pi.
        let taus = [0.2 * c, 0.6 * c];
        for &tau in &taus {
            let exact = (1.0 - (tau / c).powi(2)).sqrt() / PI;
            assert!((level_flux(&sol, Sign::Plus, tau) - exact).abs() < 1e-7);
        }
        // psi(t) = ∫_0^t pi / sqrt(1 - (tau/c)^2) dtau = pi c asin(t/c).
        let psi = psi_function(&sol, Sign::Plus, &taus).unwrap();
        for (&t, y) in taus.iter().zip(&psi) {
            let exact = PI * c * (t / c).asin();
            assert!((y - exact).abs() < 1e-6 * exact, "{y} {exact}");
        }
    }

    #[test]
    fn sample_levels_avoid_flat_cells() {
        let sol = crate::solver::solve_weighted_neumann(
            &(Arc::new(|_| 1.0) as crate::numerics::RealFn),
            2.0,
            &Datum::new("cos", |t| (2.0 * PI * t).cos()),
            SolverGrid::new(1.0, 100).unwrap(),
        )
        .unwrap();
        let (levels, skipped) = sample_levels(&sol, Sign::Plus, 50);
        assert_eq!(levels.len() + skipped, 50);
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
    }
}
