//! Spatial discretization: 1-D line grids and radially symmetric grids in
//! `R^N`, with the regularized diffusion and absorption operators
//!
//! ```text
//!     a_ε(ξ) = (ξ + ε²)^{(p−2)/2},      b_ε(ξ) = (ξ + ε²)^{q/2} − ε^q.
//! ```
//!
//! The diffusion operator is discretized in conservative flux form with
//! face-centered coefficients, so the discrete divergence theorem holds to
//! rounding: the volume-weighted sum of `div(a_ε ∇u)` telescopes to the
//! boundary fluxes, which vanish under the homogeneous Neumann condition
//! used at the outer edge. That exact bookkeeping is what the mass-balance
//! checks downstream rely on.
//!
//! A line grid covers `[−L, L]` with `2M+1` nodes; a radial grid covers
//! `[0, L]` with `M+1` nodes and carries the full `R^N` volume measure
//! `ω_N r^{N−1} dr`. Cells are the usual finite-volume duals (half cells at
//! the ends, an `N`-ball of radius `h/2` around the radial origin).

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exponents::Params;
// When std is in the crate graph (tests, or std-enabled dependents via
// feature unification) its inherent f64 methods shadow this trait.
#[allow(unused_imports)]
use crate::num::{unit_sphere_area, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("half-width/radius L must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("cell count M must be at least 8, got {0}")]
    TooFewCells(usize),
    #[error("radial geometry requires dimension N >= 1, got {0}")]
    InvalidDimension(u32),
    #[error("field has {got} values but the grid has {want} nodes")]
    LengthMismatch { got: usize, want: usize },
    #[error("field values must all be finite")]
    NonFiniteValue,
    #[error("regularization eps must lie in (0, 1/2), got {0}")]
    InvalidEps(f64),
    #[error("lifting exponent gamma={gamma} outside (0, {max}) for these parameters")]
    InvalidGamma { gamma: f64, max: f64 },
}

/// Grid geometry: a symmetric line segment or a radial slice of `R^N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Geometry {
    Line,
    Radial { dim: u32 },
}

/// Uniform grid with spacing `h = L/M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    geometry: Geometry,
    l: f64,
    m: usize,
    h: f64,
}

impl Grid {
    pub fn line(l: f64, m: usize) -> Result<Self, GridError> {
        Self::new(Geometry::Line, l, m)
    }

    pub fn radial(dim: u32, l: f64, m: usize) -> Result<Self, GridError> {
        Self::new(Geometry::Radial { dim }, l, m)
    }

    pub fn new(geometry: Geometry, l: f64, m: usize) -> Result<Self, GridError> {
        if !(l.is_finite() && l > 0.0) {
            return Err(GridError::InvalidLength(l));
        }
        if m < 8 {
            return Err(GridError::TooFewCells(m));
        }
        if let Geometry::Radial { dim } = geometry {
            if dim < 1 {
                return Err(GridError::InvalidDimension(dim));
            }
        }
        Ok(Grid {
            geometry,
            l,
            m,
            h: l / m as f64,
        })
    }

    #[inline]
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }
    #[inline]
    pub fn half_width(&self) -> f64 {
        self.l
    }
    #[inline]
    pub fn cells(&self) -> usize {
        self.m
    }
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Spatial dimension of the underlying problem (1 for a line grid).
    #[inline]
    pub fn dim(&self) -> u32 {
        match self.geometry {
            Geometry::Line => 1,
            Geometry::Radial { dim } => dim,
        }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        match self.geometry {
            Geometry::Line => 2 * self.m + 1,
            Geometry::Radial { .. } => self.m + 1,
        }
    }

    /// Coordinate of node `i` (`x` on a line, `r` on a radial grid).
    #[inline]
    pub fn node_pos(&self, i: usize) -> f64 {
        match self.geometry {
            Geometry::Line => -self.l + i as f64 * self.h,
            Geometry::Radial { .. } => i as f64 * self.h,
        }
    }

    /// Full `R^N` measure of the finite-volume cell around node `i`
    /// (length on a line, `ω_N ∫ r^{N−1} dr` on a radial grid; half cells at
    /// the ends, an `N`-ball of radius `h/2` at the origin).
    pub fn cell_volume(&self, i: usize) -> f64 {
        let last = self.node_count() - 1;
        match self.geometry {
            Geometry::Line => {
                if i == 0 || i == last {
                    0.5 * self.h
                } else {
                    self.h
                }
            }
            Geometry::Radial { dim } => {
                let nf = dim as f64;
                let omega = unit_sphere_area(dim);
                let r_lo = if i == 0 {
                    0.0
                } else {
                    (i as f64 - 0.5) * self.h
                };
                let r_hi = if i == last {
                    self.l
                } else {
                    (i as f64 + 0.5) * self.h
                };
                omega * (r_hi.powf(nf) - r_lo.powf(nf)) / nf
            }
        }
    }

    /// Area of the face between nodes `i` and `i+1` (1 on a line,
    /// `ω_N r^{N−1}` at the face radius on a radial grid).
    pub fn face_area(&self, i: usize) -> f64 {
        match self.geometry {
            Geometry::Line => 1.0,
            Geometry::Radial { dim } => {
                let r = (i as f64 + 0.5) * self.h;
                unit_sphere_area(dim) * r.powf(dim as f64 - 1.0)
            }
        }
    }

    /// Total measure of the truncated domain.
    pub fn domain_volume(&self) -> f64 {
        match self.geometry {
            Geometry::Line => 2.0 * self.l,
            Geometry::Radial { dim } => {
                unit_sphere_area(dim) * self.l.powf(dim as f64) / dim as f64
            }
        }
    }
}

/// Discrete non-negative solution values on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.node_count() {
            return Err(GridError::LengthMismatch {
                got: values.len(),
                want: grid.node_count(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue);
        }
        Ok(Field { grid, values })
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Field {
            grid,
            values: vec![value; grid.node_count()],
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Regularization parameters: `ε` for the operator coefficients and `γ` for
/// the lifted datum `u₀ + ε^γ`. The admissible range of `γ` is
/// `(0, min{p/4, q/2, p−1, 1−k})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegEps {
    eps: f64,
    gamma: f64,
}

impl RegEps {
    /// Largest admissible lifting exponent for `params`.
    pub fn gamma_bound(params: &Params) -> f64 {
        let k = crate::exponents::critical_exponents(params).k;
        (params.p() / 4.0)
            .min(params.q() / 2.0)
            .min(params.p() - 1.0)
            .min(1.0 - k)
    }

    pub fn new(eps: f64, gamma: f64, params: &Params) -> Result<Self, GridError> {
        if !(eps.is_finite() && eps > 0.0 && eps < 0.5) {
            return Err(GridError::InvalidEps(eps));
        }
        let max = Self::gamma_bound(params);
        if !(gamma.is_finite() && gamma > 0.0 && gamma < max) {
            return Err(GridError::InvalidGamma { gamma, max });
        }
        Ok(RegEps { eps, gamma })
    }

    /// Defaults tied to the grid: `ε` must dominate discretization noise in
    /// `|∇u|` yet keep the regularization error in `b_ε` (of size `ε^q` on
    /// the gradient support) well below the mass-balance tolerances, so it
    /// scales like `h²`; `γ` takes 90% of its admissible bound to keep the
    /// lift floor small.
    pub fn default_for(params: &Params, h: f64) -> Self {
        let eps = (0.25 * h * h).clamp(1e-5, 1e-2);
        let gamma = 0.9 * Self::gamma_bound(params);
        RegEps { eps, gamma }
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }
    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    /// The lift floor `ε^γ`.
    #[inline]
    pub fn floor(&self) -> f64 {
        self.eps.powf(self.gamma)
    }
}

/// Regularized diffusivity `a_ε(ξ) = (ξ + ε²)^{(p−2)/2}`, evaluated on the
/// squared gradient `ξ`. Monotone decreasing in `ξ` for `p < 2`, with
/// `a_ε(ξ) ≤ ε^{p−2}`.
#[inline]
pub fn a_eps(xi: f64, p: f64, eps: f64) -> f64 {
    (xi + eps * eps).powf((p - 2.0) / 2.0)
}

/// Regularized absorption `b_ε(ξ) = (ξ + ε²)^{q/2} − ε^q`; `b_ε(0) = 0` and
/// `0 ≤ b_ε(ξ) ≤ ξ^{q/2}`. The subtracted constant is computed as
/// `(ε²)^{q/2}` so that `b_ε(0)` cancels exactly in floating point.
#[inline]
pub fn b_eps(xi: f64, q: f64, eps: f64) -> f64 {
    let e2 = eps * eps;
    (xi + e2).powf(q / 2.0) - e2.powf(q / 2.0)
}

/// Signed face differences `(u_{i+1} − u_i)/h`, one per interior face.
pub(crate) fn face_differences(field: &Field) -> Vec<f64> {
    let u = field.values();
    let h = field.grid().spacing();
    u.windows(2).map(|w| (w[1] - w[0]) / h).collect()
}

/// Squared gradient per node as the mean of the two adjacent squared face
/// differences. Faces outside the domain carry zero difference (Neumann
/// mirror); the radial origin sees its reflected face, which contributes the
/// same square as the first interior face.
pub(crate) fn face_avg_grad_sq(field: &Field) -> Vec<f64> {
    let d = face_differences(field);
    let n = field.values().len();
    let mut out = vec![0.0; n];
    let radial = matches!(field.grid().geometry(), Geometry::Radial { .. });
    for i in 0..n {
        let left = if i == 0 {
            if radial && !d.is_empty() {
                // mirror face at −h/2: same magnitude as the first face
                d[0] * d[0]
            } else {
                0.0
            }
        } else {
            d[i - 1] * d[i - 1]
        };
        let right = if i == n - 1 { 0.0 } else { d[i] * d[i] };
        out[i] = 0.5 * (left + right);
    }
    out
}

/// Discrete gradient magnitude `|∇u|`: centered differences at interior
/// nodes, one-sided at the boundary. At the radial origin the symmetric
/// extension `u(−r) = u(r)` makes the centered difference vanish.
pub fn gradient_magnitude(field: &Field) -> Field {
    let u = field.values();
    let n = u.len();
    let h = field.grid().spacing();
    let mut g = vec![0.0; n];
    for i in 1..n - 1 {
        g[i] = ((u[i + 1] - u[i - 1]) / (2.0 * h)).abs();
    }
    match field.grid().geometry() {
        Geometry::Line => {
            g[0] = ((u[1] - u[0]) / h).abs();
        }
        Geometry::Radial { .. } => {
            g[0] = 0.0;
        }
    }
    g[n - 1] = ((u[n - 1] - u[n - 2]) / h).abs();
    Field {
        grid: *field.grid(),
        values: g,
    }
}

/// Regularized p-Laplacian `div(a_ε(|∇u|²) ∇u)` in conservative flux form:
/// face flux `F_{i+1/2} = a_ε(D²) D` with `D = (u_{i+1} − u_i)/h`, divergence
/// as (face-area-weighted) flux difference over the cell volume. The outer
/// boundary (and both line ends) carries zero flux.
pub fn p_laplacian_reg(field: &Field, p: f64, eps: f64) -> Field {
    let grid = field.grid();
    let d = face_differences(field);
    let n = field.values().len();
    let mut out = vec![0.0; n];
    // Flux through each interior face, premultiplied by the face area.
    let fluxes: Vec<f64> = d
        .iter()
        .enumerate()
        .map(|(i, &df)| grid.face_area(i) * a_eps(df * df, p, eps) * df)
        .collect();
    for i in 0..n {
        let inflow = if i == 0 { 0.0 } else { fluxes[i - 1] };
        let outflow = if i == n - 1 { 0.0 } else { fluxes[i] };
        out[i] = (outflow - inflow) / grid.cell_volume(i);
    }
    Field {
        grid: *grid,
        values: out,
    }
}

/// Regularized absorption term `b_ε(|∇u|²)` per node, with the squared
/// gradient taken as the face average (consistent with the flux stencil).
pub fn hamilton_term_reg(field: &Field, q: f64, eps: f64) -> Field {
    let gsq = face_avg_grad_sq(field);
    Field {
        grid: *field.grid(),
        values: gsq.iter().map(|&xi| b_eps(xi, q, eps)).collect(),
    }
}
