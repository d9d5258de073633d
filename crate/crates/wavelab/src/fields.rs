//! Grids, field states and discrete norms shared by every solver and
//! diagnostic.
//!
//! All radial integrals use the measure r^{n-1} dr and composite trapezoid
//! quadrature; the surface factor |S^{n-1}| is omitted throughout (every
//! estimate the suite checks is stated up to constants, and the factor
//! cancels in all ratios formed by the acceptance checks).
//!
//! The weighted Sobolev norm on {r >= M} follows the recorded convention
//!   ‖f‖_{H^{a,b}(r >= M)} = Σ_{k<=a} ‖⟨r⟩^b ∂_r^k f‖_{L²(r >= M)},
//! which is a project choice: the space is used but not defined in the
//! estimates this artifact checks.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Japanese bracket ⟨s⟩ = (1 + s²)^{1/2}.
#[inline]
pub fn bracket(s: f64) -> f64 {
    (1.0 + s * s).sqrt()
}

/// |x|^e with a fast path for small integer exponents; the power
/// nonlinearity sits in every solver's inner loop and powf dominates the
/// step cost otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsPower {
    exp: f64,
    int_exp: Option<i32>,
}

impl AbsPower {
    pub fn new(exp: f64) -> Self {
        let rounded = exp.round();
        AbsPower {
            exp,
            int_exp: (exp == rounded && rounded.abs() <= 32.0).then(|| rounded as i32),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self.int_exp {
            Some(k) => x.abs().powi(k),
            None => x.abs().powf(self.exp),
        }
    }
}

/// PDE family parameters: spatial dimension n and nonlinearity power p in
/// u_tt - Δu + |u|^{p-1} u = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub p: f64,
    #[serde(default)]
    pub label: String,
}

impl Params {
    /// n >= 3 and p > 1 are the standing assumptions; stronger conditions
    /// (p > 3, p > 11/2, p > n+3) are checked by the modules that need them.
    pub fn new(n: usize, p: f64, label: impl Into<String>) -> Result<Self> {
        if n < 3 {
            return Err(Error::Params(format!("n = {n} < 3")));
        }
        if !(p > 1.0) {
            return Err(Error::Params(format!("p = {p} must exceed 1")));
        }
        Ok(Params {
            n,
            p,
            label: label.into(),
        })
    }
}

/// Uniform grid on [1, r_max]; r = 1 is the obstacle boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub num_points: usize,
    pub h: f64,
}

/// Build a uniform radial grid from 1 to `r_max` inclusive.
pub fn make_grid(r_max: f64, num_points: usize) -> Result<RadialGrid> {
    if !(r_max > 1.0) {
        return Err(Error::Grid(format!(
            "r_max = {r_max} must exceed the obstacle radius 1"
        )));
    }
    if num_points < 16 {
        return Err(Error::Grid(format!("num_points = {num_points} < 16")));
    }
    let h = (r_max - 1.0) / (num_points - 1) as f64;
    Ok(RadialGrid {
        r_min: 1.0,
        r_max,
        num_points,
        h,
    })
}

impl RadialGrid {
    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        1.0 + i as f64 * self.h
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.num_points).map(|i| self.r(i)).collect()
    }

    /// Index of the first node with r >= value (num_points if none).
    pub fn first_node_at_or_after(&self, r: f64) -> usize {
        if r <= self.r_min {
            return 0;
        }
        let i = ((r - self.r_min) / self.h).ceil() as usize;
        i.min(self.num_points)
    }
}

/// The pair (u, ∂_t u) on a radial grid at one time, with the Dirichlet
/// condition u = ∂_t u = 0 pinned at the first node.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub grid: RadialGrid,
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl RadialState {
    pub fn new(grid: RadialGrid, t: f64, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != grid.num_points || v.len() != grid.num_points {
            return Err(Error::Grid(format!(
                "field length {} / {} does not match grid ({} points)",
                u.len(),
                v.len(),
                grid.num_points
            )));
        }
        if u[0] != 0.0 || v[0] != 0.0 {
            return Err(Error::Grid(
                "Dirichlet violation: u and v must vanish at r = 1".into(),
            ));
        }
        Ok(RadialState { grid, t, u, v })
    }

    pub fn zero(grid: RadialGrid) -> Self {
        RadialState {
            grid,
            t: 0.0,
            u: vec![0.0; grid.num_points],
            v: vec![0.0; grid.num_points],
        }
    }

    /// Sample (u0, u1) from closures, pinning the boundary node to zero.
    pub fn from_fn(
        grid: RadialGrid,
        u0: impl Fn(f64) -> f64,
        u1: impl Fn(f64) -> f64,
    ) -> Self {
        let mut u: Vec<f64> = (0..grid.num_points).map(|i| u0(grid.r(i))).collect();
        let mut v: Vec<f64> = (0..grid.num_points).map(|i| u1(grid.r(i))).collect();
        u[0] = 0.0;
        v[0] = 0.0;
        RadialState { grid, t: 0.0, u, v }
    }

    pub fn sup_abs_u(&self) -> (f64, f64) {
        let mut best = (0.0, self.grid.r(0));
        for (i, &ui) in self.u.iter().enumerate() {
            if ui.abs() > best.0 {
                best = (ui.abs(), self.grid.r(i));
            }
        }
        best
    }

    /// Outermost radius where either field exceeds `tiny` (r_min if none).
    pub fn support_radius(&self, tiny: f64) -> f64 {
        for i in (0..self.grid.num_points).rev() {
            if self.u[i].abs() > tiny || self.v[i].abs() > tiny {
                return self.grid.r(i);
            }
        }
        self.grid.r_min
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|x| x.is_finite()) && self.v.iter().all(|x| x.is_finite())
    }

    /// CSV with header `r,u,v`, >= 15 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "r,u,v")?;
        for i in 0..self.grid.num_points {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e}",
                self.grid.r(i),
                self.u[i],
                self.v[i]
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R, t: f64) -> Result<Self> {
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            if k == 0 {
                continue; // header
            }
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::Grid(format!("CSV row {k}: expected 3 columns")));
            }
            let parse = |s: &str| -> Result<f64> {
                s.trim()
                    .parse()
                    .map_err(|e| Error::Grid(format!("CSV row {k}: {e}")))
            };
            rows.push((parse(cols[0])?, parse(cols[1])?, parse(cols[2])?));
        }
        if rows.len() < 16 {
            return Err(Error::Grid("CSV field has fewer than 16 rows".into()));
        }
        let r_max = rows.last().unwrap().0;
        let grid = make_grid(r_max, rows.len())?;
        let u = rows.iter().map(|x| x.1).collect();
        let v = rows.iter().map(|x| x.2).collect();
        RadialState::new(grid, t, u, v)
    }
}

/// Energy split into its three nonnegative summands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub gradient: f64,
    pub potential: f64,
    pub total: f64,
}

impl EnergyReport {
    pub fn new(kinetic: f64, gradient: f64, potential: f64) -> Self {
        debug_assert!(kinetic >= 0.0 && gradient >= 0.0 && potential >= 0.0);
        EnergyReport {
            kinetic,
            gradient,
            potential,
            total: kinetic + gradient + potential,
        }
    }

    pub fn zero() -> Self {
        EnergyReport::new(0.0, 0.0, 0.0)
    }
}

// ---------------------------------------------------------------------------
// Finite-difference stencils
// ---------------------------------------------------------------------------

/// d-th radial derivative (d <= 3) of a sampled field, second-order centered
/// in the interior and second-order one-sided at the edges. These stencils
/// are fixed across the crate so convergence orders stay uniform.
pub fn derivative(f: &[f64], h: f64, d: usize) -> Vec<f64> {
    let n = f.len();
    assert!(d <= 3, "derivative order {d} > 3 unsupported");
    assert!(n >= 5, "need at least 5 points for the edge stencils");
    let mut out = vec![0.0; n];
    match d {
        0 => out.copy_from_slice(f),
        1 => {
            let c = 1.0 / (2.0 * h);
            out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) * c;
            for i in 1..n - 1 {
                out[i] = (f[i + 1] - f[i - 1]) * c;
            }
            out[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) * c;
        }
        2 => {
            let c = 1.0 / (h * h);
            out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) * c;
            for i in 1..n - 1 {
                out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * c;
            }
            out[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) * c;
        }
        3 => {
            let c = 1.0 / (2.0 * h * h * h);
            // 2nd-order one-sided stencil (-5/2, 9, -12, 7, -3/2)/h^3
            let e = 1.0 / (h * h * h);
            for i in 0..2 {
                out[i] = (-2.5 * f[i] + 9.0 * f[i + 1] - 12.0 * f[i + 2] + 7.0 * f[i + 3]
                    - 1.5 * f[i + 4])
                    * e;
            }
            for i in 2..n - 2 {
                out[i] = (f[i + 2] - 2.0 * f[i + 1] + 2.0 * f[i - 1] - f[i - 2]) * c;
            }
            for i in n - 2..n {
                out[i] = (2.5 * f[i] - 9.0 * f[i - 1] + 12.0 * f[i - 2] - 7.0 * f[i - 3]
                    + 1.5 * f[i - 4])
                    * e;
            }
        }
        _ => unreachable!(),
    }
    out
}

/// Discrete radial Laplacian Δf = f'' + (n-1)/r f' in conservative form,
///   (r^{n-1} f')' / r^{n-1}
/// with face coefficients at half nodes. The flux form keeps the operator
/// symmetric with respect to the r^{n-1}-weighted inner product, which is
/// what bounds the long-run energy drift of the leapfrog solvers. Boundary
/// entries (first and last node) are set to zero; the solvers pin those
/// nodes themselves.
pub fn radial_laplacian(f: &[f64], grid: &RadialGrid, n: usize) -> Vec<f64> {
    let m = f.len();
    assert_eq!(m, grid.num_points, "field/grid shape mismatch");
    let h = grid.h;
    let pw = (n - 1) as i32;
    let mut out = vec![0.0; m];
    for i in 1..m - 1 {
        let r = grid.r(i);
        let r_minus = (r - 0.5 * h).powi(pw);
        let r_plus = (r + 0.5 * h).powi(pw);
        out[i] = (r_plus * (f[i + 1] - f[i]) - r_minus * (f[i] - f[i - 1]))
            / (h * h * r.powi(pw));
    }
    out
}

// ---------------------------------------------------------------------------
// Quadrature and norms
// ---------------------------------------------------------------------------

/// Composite trapezoid rule with the r^{n-1} radial measure.
pub fn radial_integral(values: &[f64], grid: &RadialGrid, n: usize) -> f64 {
    assert_eq!(values.len(), grid.num_points, "field/grid shape mismatch");
    let pw = (n - 1) as i32;
    let m = grid.num_points;
    let mut sum = 0.5 * (values[0] * grid.r(0).powi(pw) + values[m - 1] * grid.r(m - 1).powi(pw));
    for i in 1..m - 1 {
        sum += values[i] * grid.r(i).powi(pw);
    }
    sum * grid.h
}

/// Same integral restricted to r >= r_from (starting at the first grid node
/// at or after r_from).
pub fn radial_integral_from(values: &[f64], grid: &RadialGrid, n: usize, r_from: f64) -> f64 {
    let i0 = grid.first_node_at_or_after(r_from);
    if i0 + 2 > grid.num_points {
        return 0.0;
    }
    let pw = (n - 1) as i32;
    let m = grid.num_points;
    let mut sum =
        0.5 * (values[i0] * grid.r(i0).powi(pw) + values[m - 1] * grid.r(m - 1).powi(pw));
    for i in i0 + 1..m - 1 {
        sum += values[i] * grid.r(i).powi(pw);
    }
    sum * grid.h
}

/// ‖⟨r⟩^a f‖_{L^q} with the r^{n-1} measure: (∫ |⟨r⟩^a f|^q r^{n-1} dr)^{1/q}.
pub fn lp_norm(f: &[f64], grid: &RadialGrid, n: usize, q: f64, weight_exponent: f64) -> f64 {
    assert!(q >= 1.0, "lp_norm requires q >= 1, got {q}");
    let vals: Vec<f64> = (0..grid.num_points)
        .map(|i| {
            let w = if weight_exponent == 0.0 {
                1.0
            } else {
                bracket(grid.r(i)).powf(weight_exponent)
            };
            (w * f[i]).abs().powf(q)
        })
        .collect();
    radial_integral(&vals, grid, n).max(0.0).powf(1.0 / q)
}

/// Discrete H^k norm (Σ_{j<=k} ‖∂_r^j f‖²_{L²})^{1/2} with the r^{n-1}
/// measure. For radial functions this is equivalent (up to dimensional
/// constants from the angular derivatives) to the full H^k(Ω) norm; we use
/// the radial-derivative version throughout.
pub fn sobolev_norm(f: &[f64], grid: &RadialGrid, n: usize, k: usize) -> Result<f64> {
    if k > 3 {
        return Err(Error::CompatOrder {
            order: k,
            reason: "discrete derivatives above order 3 are too noisy".into(),
        });
    }
    let mut sq = 0.0;
    for j in 0..=k {
        let dj = derivative(f, grid.h, j);
        let nj = lp_norm(&dj, grid, n, 2.0, 0.0);
        sq += nj * nj;
    }
    Ok(sq.sqrt())
}

/// Weighted Sobolev norm on {r >= M} under the recorded convention
/// Σ_{k<=a} ‖⟨r⟩^b ∂_r^k f‖_{L²(r >= M)}.
pub fn weighted_sobolev_norm(
    f: &[f64],
    grid: &RadialGrid,
    n: usize,
    a: usize,
    b: f64,
    r_from: f64,
) -> Result<f64> {
    if a > 3 {
        return Err(Error::CompatOrder {
            order: a,
            reason: "discrete derivatives above order 3 are too noisy".into(),
        });
    }
    let mut total = 0.0;
    for k in 0..=a {
        let dk = derivative(f, grid.h, k);
        let vals: Vec<f64> = (0..grid.num_points)
            .map(|i| {
                let w = bracket(grid.r(i)).powf(b);
                (w * dk[i]).powi(2)
            })
            .collect();
        total += radial_integral_from(&vals, grid, n, r_from).max(0.0).sqrt();
    }
    Ok(total)
}

/// Time derivatives ∂_t^j (j <= 2) of a uniformly sampled history of fields,
/// centered in the interior, second-order one-sided at the ends.
pub fn time_derivative(history: &[&[f64]], dt: f64, j: usize) -> Vec<Vec<f64>> {
    let m = history.len();
    let len = history[0].len();
    assert!(j <= 2);
    match j {
        0 => history.iter().map(|f| f.to_vec()).collect(),
        1 => {
            assert!(m >= 3, "need >= 3 snapshots for first time derivatives");
            let c = 1.0 / (2.0 * dt);
            (0..m)
                .map(|i| {
                    (0..len)
                        .map(|x| {
                            if i == 0 {
                                (-3.0 * history[0][x] + 4.0 * history[1][x] - history[2][x]) * c
                            } else if i == m - 1 {
                                (3.0 * history[m - 1][x] - 4.0 * history[m - 2][x]
                                    + history[m - 3][x])
                                    * c
                            } else {
                                (history[i + 1][x] - history[i - 1][x]) * c
                            }
                        })
                        .collect()
                })
                .collect()
        }
        2 => {
            assert!(m >= 4, "need >= 4 snapshots for second time derivatives");
            let c = 1.0 / (dt * dt);
            (0..m)
                .map(|i| {
                    (0..len)
                        .map(|x| {
                            if i == 0 {
                                (2.0 * history[0][x] - 5.0 * history[1][x] + 4.0 * history[2][x]
                                    - history[3][x])
                                    * c
                            } else if i == m - 1 {
                                (2.0 * history[m - 1][x] - 5.0 * history[m - 2][x]
                                    + 4.0 * history[m - 3][x]
                                    - history[m - 4][x])
                                    * c
                            } else {
                                (history[i + 1][x] - 2.0 * history[i][x] + history[i - 1][x]) * c
                            }
                        })
                        .collect()
                })
                .collect()
        }
        _ => unreachable!(),
    }
}

/// Spacetime norm Σ_{j+k <= N} ‖∂_t^j ∂_r^k u‖_{L^q_t L^{r_exp}_x} over a
/// uniformly spaced history. `q = f64::INFINITY` takes the max over time;
/// finite q integrates ‖·‖^q by the trapezoid rule in t.
pub fn y_norm(
    history: &[RadialState],
    n: usize,
    q: f64,
    r_exp: f64,
    order: usize,
) -> Result<f64> {
    if order > 2 {
        return Err(Error::CompatOrder {
            order,
            reason: "y_norm supports derivative order <= 2".into(),
        });
    }
    let m = history.len();
    if m == 0 {
        return Err(Error::HistoryTooShort { got: 0, need: 1 });
    }
    let need = match order {
        0 => 1,
        1 => 3,
        _ => 4,
    };
    if m < need {
        return Err(Error::HistoryTooShort { got: m, need });
    }
    let grid = history[0].grid;
    let dt = if m >= 2 {
        let dt0 = history[1].t - history[0].t;
        for i in 1..m {
            let d = history[i].t - history[i - 1].t;
            if (d - dt0).abs() > 1e-9 * dt0.abs().max(1e-9) {
                return Err(Error::Diagnostics(
                    "y_norm requires a uniformly spaced history".into(),
                ));
            }
        }
        dt0
    } else {
        1.0
    };

    let frames: Vec<&[f64]> = history.iter().map(|s| s.u.as_slice()).collect();
    let mut total = 0.0;
    for j in 0..=order {
        let dtj = time_derivative(&frames, dt, j);
        for k in 0..=(order - j) {
            // per-snapshot spatial norm of ∂_t^j ∂_r^k u
            let series: Vec<f64> = dtj
                .iter()
                .map(|f| {
                    let dk = derivative(f, grid.h, k);
                    lp_norm(&dk, &grid, n, r_exp, 0.0)
                })
                .collect();
            total += time_lq(&series, dt, q);
        }
    }
    Ok(total)
}

/// L^q norm in time of a scalar series (trapezoid in t; max for q = ∞).
pub fn time_lq(series: &[f64], dt: f64, q: f64) -> f64 {
    if q.is_infinite() {
        return series.iter().cloned().fold(0.0, f64::max);
    }
    assert!(q >= 1.0, "time_lq requires q >= 1");
    if series.len() == 1 {
        return 0.0;
    }
    let m = series.len();
    let mut sum = 0.5 * (series[0].powf(q) + series[m - 1].powf(q));
    for s in &series[1..m - 1] {
        sum += s.powf(q);
    }
    (sum * dt).powf(1.0 / q)
}

/// Four-point (cubic Lagrange) interpolation on a uniform grid; `x` in index
/// coordinates. Clamps the stencil window at the array ends.
pub fn cubic_interp(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    assert!(n >= 4, "cubic interpolation needs >= 4 samples");
    let i = (x.floor() as isize).clamp(1, n as isize - 3) as usize;
    let s = x - i as f64; // offset from the second stencil point, in [-1, 2]
    let (f0, f1, f2, f3) = (values[i - 1], values[i], values[i + 1], values[i + 2]);
    // Lagrange basis on nodes -1, 0, 1, 2
    let b0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
    let b1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    let b2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
    let b3 = (s + 1.0) * s * (s - 1.0) / 6.0;
    f0 * b0 + f1 * b1 + f2 * b2 + f3 * b3
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Exact ∫_1^R r^k dr, the oracle for polynomial radial integrals.
    fn monomial_integral(k: i32, r_max: f64) -> f64 {
        (r_max.powi(k + 1) - 1.0) / (k + 1) as f64
    }

    /// Exact ∫_1^R poly(r) dr with poly given by coefficients (rising powers).
    fn poly_integral(coeffs: &[f64], r_max: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c * monomial_integral(k as i32, r_max))
            .sum()
    }

    /// Polynomial product, used to square polynomials exactly.
    fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn make_grid_examples() {
        let g = make_grid(2.0, 101).unwrap();
        assert_relative_eq!(g.h, 0.01, max_relative = 1e-14);
        assert_eq!(g.r(0), 1.0);
        assert_relative_eq!(g.r(100), 2.0, max_relative = 1e-14);

        assert!(make_grid(1.0, 101).is_err());
        assert!(make_grid(0.5, 101).is_err());
        assert!(make_grid(2.0, 8).is_err());

        let g = make_grid(65.0, 6401).unwrap();
        assert_relative_eq!(g.h, 0.01, max_relative = 1e-14);
    }

    #[test]
    fn lp_norm_zero_field() {
        let g = make_grid(2.0, 64).unwrap();
        let f = vec![0.0; 64];
        assert_eq!(lp_norm(&f, &g, 3, 2.0, 0.0), 0.0);
    }

    #[test]
    fn lp_norm_constant_closed_form() {
        // f ≡ 1, n = 3, q = 2: ∫_1^2 r² dr = 7/3.
        let g = make_grid(2.0, 2001).unwrap();
        let f = vec![1.0; g.num_points];
        let got = lp_norm(&f, &g, 3, 2.0, 0.0);
        assert_relative_eq!(got, (7.0f64 / 3.0).sqrt(), max_relative = 1e-8);
    }

    #[test]
    fn lp_norm_power_profile_closed_form() {
        // f(r) = r^{1-n/2}, n = 4: |f|² r³ = r, so ∫_1^R = (R²-1)/2.
        let r_max = 3.0;
        let g = make_grid(r_max, 4001).unwrap();
        let f: Vec<f64> = (0..g.num_points).map(|i| g.r(i).powf(-1.0)).collect();
        let got = lp_norm(&f, &g, 4, 2.0, 0.0);
        let expect = ((r_max * r_max - 1.0) / 2.0).sqrt();
        assert_relative_eq!(got, expect, max_relative = 1e-7);
        // the gradient of the same profile integrates to a logarithm:
        // |f'|² r³ = r^{-1}, ∫ = ln R
        let df = derivative(&f, g.h, 1);
        let got_grad = lp_norm(&df, &g, 4, 2.0, 0.0);
        assert_relative_eq!(got_grad, r_max.ln().sqrt(), max_relative = 1e-5);
    }

    #[test]
    fn lp_norm_weighted_bracket() {
        // ⟨r⟩² f with f = 1/(1+r²) leaves the integrand equal to r^{n-1}.
        let g = make_grid(2.0, 1001).unwrap();
        let f: Vec<f64> = (0..g.num_points)
            .map(|i| 1.0 / (1.0 + g.r(i) * g.r(i)))
            .collect();
        let got = lp_norm(&f, &g, 3, 2.0, 2.0);
        assert_relative_eq!(got, (7.0f64 / 3.0).sqrt(), max_relative = 1e-7);
    }

    #[test]
    fn quadrature_second_order_convergence() {
        // halving h reduces the quadrature error of a smooth integrand by ~4
        // (the integrand's derivative must not vanish at both endpoints, or
        // Euler-Maclaurin hides the h² term)
        let exact = {
            let g = make_grid(2.0, 1 << 15).unwrap();
            let f: Vec<f64> = (0..g.num_points).map(|i| g.r(i).exp()).collect();
            lp_norm(&f, &g, 3, 2.0, 0.0)
        };
        let err_at = |pts: usize| {
            let g = make_grid(2.0, pts).unwrap();
            let f: Vec<f64> = (0..g.num_points).map(|i| g.r(i).exp()).collect();
            (lp_norm(&f, &g, 3, 2.0, 0.0) - exact).abs()
        };
        let e1 = err_at(129);
        let e2 = err_at(257);
        let ratio = e1 / e2;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "expected order-2 quadrature, got ratio {ratio}"
        );
    }

    proptest! {
        #[test]
        fn lp_norm_absolutely_homogeneous(c in -100.0f64..100.0, seed in 0u64..1000) {
            let g = make_grid(3.0, 64).unwrap();
            let f: Vec<f64> = (0..64).map(|i| ((i as f64 + seed as f64) * 0.7).sin()).collect();
            let scaled: Vec<f64> = f.iter().map(|x| c * x).collect();
            let a = lp_norm(&scaled, &g, 3, 2.0, 0.0);
            let b = c.abs() * lp_norm(&f, &g, 3, 2.0, 0.0);
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn sobolev_norm_zero_and_cap() {
        let g = make_grid(2.0, 64).unwrap();
        let f = vec![0.0; 64];
        for k in 0..=3 {
            assert_eq!(sobolev_norm(&f, &g, 3, k).unwrap(), 0.0);
        }
        assert!(sobolev_norm(&f, &g, 3, 4).is_err());
    }

    #[test]
    fn sobolev_norm_constant_equals_lp() {
        let g = make_grid(2.0, 101).unwrap();
        let f = vec![2.5; g.num_points];
        let h1 = sobolev_norm(&f, &g, 3, 1).unwrap();
        let l2 = lp_norm(&f, &g, 3, 2.0, 0.0);
        assert_relative_eq!(h1, l2, max_relative = 1e-13);
    }

    #[test]
    fn sobolev_norm_matches_symbolic_h1() {
        // f(r) = (r-1)(2-r) on [1,2], n = 3; oracle via exact polynomial
        // integration of f² r² and f'² r².
        let f_coeffs = [-2.0, 3.0, -1.0]; // (r-1)(2-r) = -2 + 3r - r²
        let df_coeffs = [3.0, -2.0];
        let r2 = [0.0, 0.0, 1.0];
        let l2_sq = poly_integral(&poly_mul(&poly_mul(&f_coeffs, &f_coeffs), &r2), 2.0);
        let h1_semi_sq = poly_integral(&poly_mul(&poly_mul(&df_coeffs, &df_coeffs), &r2), 2.0);
        let oracle = (l2_sq + h1_semi_sq).sqrt();

        let err_at = |pts: usize| {
            let g = make_grid(2.0, pts).unwrap();
            let f: Vec<f64> = (0..pts).map(|i| (g.r(i) - 1.0) * (2.0 - g.r(i))).collect();
            (sobolev_norm(&f, &g, 3, 1).unwrap() - oracle).abs()
        };
        let e1 = err_at(201);
        assert!(e1 < 1e-4, "H¹ error {e1} too large at h = 5e-3");
        let e2 = err_at(401);
        assert!(e2 < e1 / 3.0, "no order-2 gain: {e1} -> {e2}");
    }

    #[test]
    fn derivative_third_order_stencil() {
        // f = r^4 has f''' = 24 r, captured to O(h²) including edges
        let g = make_grid(2.0, 401).unwrap();
        let f: Vec<f64> = (0..g.num_points).map(|i| g.r(i).powi(4)).collect();
        let d3 = derivative(&f, g.h, 3);
        for i in [0, 1, 137, g.num_points - 2, g.num_points - 1] {
            assert_relative_eq!(d3[i], 24.0 * g.r(i), max_relative = 1e-4);
        }
    }

    #[test]
    fn radial_laplacian_consistency() {
        // Δ(r²) in n = 3 equals 2 + 4/r · r = ... f'' + (2/r) f' = 2 + 4 = 6
        let g = make_grid(3.0, 801).unwrap();
        let f: Vec<f64> = (0..g.num_points).map(|i| g.r(i).powi(2)).collect();
        let lap = radial_laplacian(&f, &g, 3);
        // the flux form carries an O(h²) residual even on quadratics
        for i in [1, 100, 400, g.num_points - 2] {
            assert_relative_eq!(lap[i], 6.0, max_relative = 1e-6);
        }
    }

    #[test]
    fn y_norm_zero_history() {
        let g = make_grid(2.0, 64).unwrap();
        let hist: Vec<RadialState> = (0..5)
            .map(|i| {
                let mut s = RadialState::zero(g);
                s.t = i as f64 * 0.1;
                s
            })
            .collect();
        assert_eq!(y_norm(&hist, 3, f64::INFINITY, 2.0, 1).unwrap(), 0.0);
    }

    #[test]
    fn y_norm_static_state_is_lp_norm() {
        let g = make_grid(2.0, 101).unwrap();
        let f: Vec<f64> = (0..101).map(|i| ((g.r(i) - 1.0) * 2.0).sin()).collect();
        let hist: Vec<RadialState> = (0..4)
            .map(|i| {
                let mut u = f.clone();
                u[0] = 0.0;
                let mut s = RadialState::new(g, 0.0, u, vec![0.0; 101]).unwrap();
                s.t = i as f64 * 0.1;
                s
            })
            .collect();
        let y = y_norm(&hist, 3, f64::INFINITY, 4.0, 0).unwrap();
        let mut f0 = f.clone();
        f0[0] = 0.0;
        assert_eq!(y, lp_norm(&f0, &g, 3, 4.0, 0.0));
    }

    #[test]
    fn y_norm_linear_in_time_oracle() {
        // u(t, r) = t g(r): the N = 1, q = ∞ norm equals
        // t_max (‖g‖ + ‖g'‖) + ‖g‖ up to finite-difference error (here the
        // time differencing is exact, so only spatial FD error remains).
        let g = make_grid(2.0, 401).unwrap();
        let prof: Vec<f64> = (0..g.num_points)
            .map(|i| (g.r(i) - 1.0) * (2.0 - g.r(i)))
            .collect();
        let times: Vec<f64> = (0..6).map(|i| i as f64 * 0.2).collect();
        let hist: Vec<RadialState> = times
            .iter()
            .map(|&t| {
                let u: Vec<f64> = prof.iter().map(|x| t * x).collect();
                let mut s = RadialState::new(g, t, u, vec![0.0; g.num_points]).unwrap();
                s.t = t;
                s
            })
            .collect();
        let y = y_norm(&hist, 3, f64::INFINITY, 2.0, 1).unwrap();
        let t_max = times[times.len() - 1];
        let norm_g = lp_norm(&prof, &g, 3, 2.0, 0.0);
        let dg = derivative(&prof, g.h, 1);
        let norm_dg = lp_norm(&dg, &g, 3, 2.0, 0.0);
        let oracle = t_max * (norm_g + norm_dg) + norm_g;
        assert_relative_eq!(y, oracle, max_relative = 1e-6);
    }

    #[test]
    fn y_norm_too_short_history() {
        let g = make_grid(2.0, 64).unwrap();
        let hist: Vec<RadialState> = (0..2)
            .map(|i| {
                let mut s = RadialState::zero(g);
                s.t = i as f64;
                s
            })
            .collect();
        assert!(matches!(
            y_norm(&hist, 3, 2.0, 2.0, 1),
            Err(Error::HistoryTooShort { .. })
        ));
    }

    #[test]
    fn cubic_interp_reproduces_cubics() {
        let vals: Vec<f64> = (0..10)
            .map(|i| {
                let x = i as f64;
                1.0 + 2.0 * x - 0.5 * x * x + 0.125 * x * x * x
            })
            .collect();
        for &x in &[0.3, 1.7, 4.25, 8.9] {
            let exact = 1.0 + 2.0 * x - 0.5 * x * x + 0.125 * x * x * x;
            assert_relative_eq!(cubic_interp(&vals, x), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn state_csv_roundtrip() {
        let g = make_grid(2.0, 32).unwrap();
        let s = RadialState::from_fn(g, |r| (r - 1.0) * (2.0 - r), |r| 0.1 * (r - 1.5));
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let back = RadialState::read_csv(std::io::BufReader::new(&buf[..]), 0.0).unwrap();
        for i in 0..32 {
            assert_relative_eq!(back.u[i], s.u[i], max_relative = 1e-14);
            assert_relative_eq!(back.v[i], s.v[i], max_relative = 1e-14);
        }
    }

    #[test]
    fn state_dirichlet_enforced() {
        let g = make_grid(2.0, 32).unwrap();
        let u = vec![1.0; 32];
        assert!(RadialState::new(g, 0.0, u, vec![0.0; 32]).is_err());
    }

    #[test]
    fn params_invariants() {
        assert!(Params::new(2, 7.0, "").is_err());
        assert!(Params::new(3, 1.0, "").is_err());
        assert!(Params::new(3, 7.0, "cubic defocusing").is_ok());
    }
}
