//! Feedback stabilization of an unstable fixed point.
//!
//! A control term δ = -s1(u - ū) - s2(v - v̄) is added to the first
//! map component. In gain space (s1, s2) the controlled Jacobian loses
//! stability across three lines — l1 (λ1λ2 = 1), l2 (λ1 = 1) and
//! l3 (λ1 = -1) — whose enclosed triangle is exactly the set of gains
//! with both multipliers inside the unit circle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{curve_v, map_step, psi, Matrix2, Params, State};
use crate::roots::scan_roots;

/// Feedback gain pair. Either sign is allowed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gains {
    pub s1: f64,
    pub s2: f64,
}

impl Gains {
    pub fn new(s1: f64, s2: f64) -> Self {
        Self { s1, s2 }
    }
}

/// Stabilization target: a fixed point on the curve v = (1-u)(γ+u).
///
/// Positive fixed points (u in (0,1)) are the usual targets, but the
/// curve extends past u = 1 with v̄ < 0, and for some parameter sets the
/// only fixed point available to stabilize lives there; those targets
/// are accepted and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub u_bar: f64,
    pub v_bar: f64,
    /// u̅ in (0,1), i.e. the target is a positive fixed point.
    pub positive: bool,
}

impl Target {
    /// Validate that u is a fixed-point abscissa for these parameters
    /// (θ = Ψ(u) up to the fixed-point residual tolerance).
    pub fn on_curve(u: f64, p: &Params) -> Result<Target> {
        let psi_u = psi(u, p)?;
        if (psi_u - p.theta()).abs() > 1e-8 * p.theta().abs().max(1.0) {
            return Err(Error::Domain(format!(
                "u = {u} is not a fixed point: psi(u) = {psi_u} but theta = {}",
                p.theta()
            )));
        }
        Ok(Target {
            u_bar: u,
            v_bar: curve_v(u, p),
            positive: u > 0.0 && u < 1.0,
        })
    }

    pub fn state(&self) -> State {
        State::unchecked(self.u_bar, self.v_bar)
    }
}

/// Fixed-point abscissas on the curve within (lo, hi): roots of
/// Ψ(u) = θ. Beyond u = 1 this finds the extended-curve points used as
/// fallback control targets.
pub fn curve_fixed_points(p: &Params, lo: f64, hi: f64) -> Vec<f64> {
    let f = |u: f64| crate::model::psi_unchecked(u, p) - p.theta();
    let n = (((hi - lo) * 4096.0).ceil() as usize).clamp(4096, 1 << 20);
    scan_roots(f, lo.max(crate::equilibria::U_EPS), hi, n, 1e-13, 0.0)
}

/// One step of the controlled map: map_step with δ added to the first
/// component only.
pub fn controlled_step(s: State, g: Gains, target: &Target, p: &Params) -> State {
    let delta = -g.s1 * (s.u - target.u_bar) - g.s2 * (s.v - target.v_bar);
    let base = map_step(s, p);
    State::raw(base.u + delta, base.v)
}

/// Coefficients of the marginal-stability lines at the target.
fn line_data(target: &Target, p: &Params) -> (f64, f64, f64) {
    let u = target.u_bar;
    let g = p.gamma();
    let gu = g + u;
    let g2u2 = g * g + u * u;
    let a = (1.0 - u) * (g + 2.0 * u) / gu;
    let b = g * (1.0 - u) * gu * (p.beta() / (gu * gu) - 2.0 * p.theta() * g * u / (g2u2 * g2u2));
    let k = b * u / gu;
    (a, b, k)
}

/// Jacobian of the controlled system at the target.
pub fn controlled_jacobian(target: &Target, g: Gains, p: &Params) -> Matrix2 {
    let u = target.u_bar;
    let (a, b, _) = line_data(target, p);
    Matrix2::new(a - g.s1, -u / (p.gamma() + u) - g.s2, b, 1.0)
}

/// An affine locus a·s1 + b·s2 + c = 0 in gain space, with the sign of
/// the expression on the stable side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub stable_sign: f64,
}

impl GainLine {
    pub fn eval(&self, g: Gains) -> f64 {
        self.a * g.s1 + self.b * g.s2 + self.c
    }

    /// Signed distance from the line in gain space.
    pub fn distance(&self, g: Gains) -> f64 {
        self.eval(g) / self.a.hypot(self.b)
    }
}

/// The stability region in gain space: three lines, their pairwise
/// intersection vertices, and the stable orientation of each line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityTriangle {
    /// l1 (λ1λ2 = 1), l2 (λ1 = 1), l3 (λ1 = -1)
    pub lines: [GainLine; 3],
    /// Intersections l1∩l2, l1∩l3, l2∩l3 (empty when degenerate).
    pub vertices: Vec<(f64, f64)>,
    pub degenerate: bool,
}

impl StabilityTriangle {
    pub fn centroid(&self) -> Option<Gains> {
        if self.degenerate || self.vertices.len() != 3 {
            return None;
        }
        let (mut s1, mut s2) = (0.0, 0.0);
        for &(x, y) in &self.vertices {
            s1 += x;
            s2 += y;
        }
        Some(Gains::new(s1 / 3.0, s2 / 3.0))
    }

    /// Strict interior test with a margin band (in line-value units
    /// normalized to distance).
    pub fn contains(&self, g: Gains, margin: f64) -> bool {
        !self.degenerate
            && self
                .lines
                .iter()
                .all(|l| l.stable_sign * l.distance(g) > margin)
    }

    /// Distance to the nearest boundary line (positive inside).
    pub fn boundary_distance(&self, g: Gains) -> f64 {
        self.lines
            .iter()
            .map(|l| l.stable_sign * l.distance(g))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Build the stability triangle at a curve fixed point.
///
/// Line coefficients come from the closed forms; the stable side of
/// each line is oriented numerically from an interior sample rather
/// than from printed sign conventions.
pub fn stability_triangle(target: &Target, p: &Params) -> Result<StabilityTriangle> {
    let (a, b, k) = line_data(target, p);
    let u = target.u_bar;
    let mut lines = [
        // λ1λ2 = 1: s1 - B s2 + 1 - A - K = 0
        GainLine { a: 1.0, b: -b, c: 1.0 - a - k, stable_sign: 0.0 },
        // λ1 = 1: ū + (γ+ū) s2 = 0 (independent of s1)
        GainLine { a: 0.0, b: p.gamma() + u, c: u, stable_sign: 0.0 },
        // λ1 = -1: 2 s1 - B s2 - 2 - 2A - K = 0
        GainLine { a: 2.0, b: -b, c: -2.0 - 2.0 * a - k, stable_sign: 0.0 },
    ];

    let mut vertices = Vec::new();
    let mut degenerate = false;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let (l1, l2) = (lines[i], lines[j]);
        let det = l1.a * l2.b - l1.b * l2.a;
        let scale = (l1.a.abs() + l1.b.abs()) * (l2.a.abs() + l2.b.abs());
        if det.abs() <= 1e-12 * scale.max(1.0) {
            degenerate = true;
            continue;
        }
        vertices.push((
            (-l1.c * l2.b + l2.c * l1.b) / det,
            (-l2.c * l1.a + l1.c * l2.a) / det,
        ));
    }
    if vertices.len() == 3 {
        // collinear vertices mean an empty interior
        let (p0, p1, p2) = (vertices[0], vertices[1], vertices[2]);
        let area2 = (p1.0 - p0.0) * (p2.1 - p0.1) - (p2.0 - p0.0) * (p1.1 - p0.1);
        let scale = vertices
            .iter()
            .map(|v| v.0.abs().max(v.1.abs()))
            .fold(1.0, f64::max);
        if area2.abs() <= 1e-12 * scale * scale {
            degenerate = true;
        }
    } else {
        degenerate = true;
    }

    if degenerate {
        return Ok(StabilityTriangle { lines, vertices, degenerate: true });
    }

    let centroid = {
        let (mut x, mut y) = (0.0, 0.0);
        for &(vx, vy) in &vertices {
            x += vx;
            y += vy;
        }
        Gains::new(x / 3.0, y / 3.0)
    };
    for l in &mut lines {
        let val = l.eval(centroid);
        if val == 0.0 {
            return Ok(StabilityTriangle { lines, vertices, degenerate: true });
        }
        l.stable_sign = val.signum();
    }
    Ok(StabilityTriangle { lines, vertices, degenerate: false })
}

/// True iff both multipliers of the controlled Jacobian lie strictly
/// inside the unit circle (modulus < 1 - 1e-12).
pub fn is_stabilizing(g: Gains, target: &Target, p: &Params) -> bool {
    let j = controlled_jacobian(target, g, p);
    let (l1, l2) = j.eigenvalues();
    l1.norm() < 1.0 - 1e-12 && l2.norm() < 1.0 - 1e-12
}
