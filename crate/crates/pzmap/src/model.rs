//! The discrete phytoplankton-zooplankton map and its algebraic substrate.
//!
//! The map acts on scaled densities (u, v):
//!
//! ```text
//! u' = u(2 - u) - uv/(γ + u)
//! v' = βuv/(γ + u) + (1 - r)v - θu²v/(γ² + u²)
//! ```
//!
//! Grazing saturates as u/(γ+u) (Holling type II) while toxin release
//! follows u²/(γ²+u²) (type III). Positive fixed points lie on the curve
//! v = (1-u)(γ+u) with θ = Ψ(u); everything downstream (equilibria,
//! bifurcation, control) is built from the scalar functions Ψ, h, p, q
//! and the two Jacobian forms defined here.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model constants. All four are dimensionless and strictly positive:
/// `r` zooplankton mortality, `beta` conversion efficiency, `theta`
/// toxin release rate, `gamma` half-saturation constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    r: f64,
    beta: f64,
    theta: f64,
    gamma: f64,
}

impl Params {
    pub fn new(r: f64, beta: f64, theta: f64, gamma: f64) -> Result<Self> {
        for (name, x) in [("r", r), ("beta", beta), ("theta", theta), ("gamma", gamma)] {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive and finite, got {x}"
                )));
            }
        }
        Ok(Self { r, beta, theta, gamma })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Same (r, β, γ) with a different toxin rate. Used by θ-sweeps and
    /// the bifurcation solver, which treat θ as the moving parameter.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.r, self.beta, theta, self.gamma)
    }
}

/// A point in phase space. Constructed states are finite and
/// nonnegative; iteration is allowed to leave the quadrant, and such
/// exits are classified downstream rather than clamped here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub u: f64,
    pub v: f64,
}

impl State {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !u.is_finite() || !v.is_finite() || u < 0.0 || v < 0.0 {
            return Err(Error::InvalidState(format!(
                "state must be finite and nonnegative, got ({u}, {v})"
            )));
        }
        Ok(Self { u, v })
    }

    /// Constructor without the quadrant check, for values produced by
    /// iteration (which may leave the quadrant) and for control targets
    /// on the extended curve where v̄ < 0.
    pub fn unchecked(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub(crate) fn raw(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn dist(&self, other: &State) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }
}

/// 2x2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2 {
    pub m: [[f64; 2]; 2],
}

impl Matrix2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { m: [[a, b], [c, d]] }
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Eigenvalue pair from the characteristic polynomial
    /// λ² - tr·λ + det, ordered by real part (then imaginary part) for
    /// the real case and as (λ, conj λ) with Im λ ≤ 0 first for the
    /// complex case.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        let t = self.trace();
        let d = self.det();
        let disc = t * t - 4.0 * d;
        if disc >= 0.0 {
            let s = disc.sqrt();
            let l1 = (t - s) / 2.0;
            let l2 = (t + s) / 2.0;
            (Complex64::new(l1, 0.0), Complex64::new(l2, 0.0))
        } else {
            let s = (-disc).sqrt() / 2.0;
            (Complex64::new(t / 2.0, -s), Complex64::new(t / 2.0, s))
        }
    }
}

/// One step of the map. Deterministic and total: negative outputs are
/// produced as-is and classified by the orbit machinery.
pub fn map_step(s: State, p: &Params) -> State {
    let (u, v) = (s.u, s.v);
    let u1 = u * (2.0 - u) - u * v / (p.gamma + u);
    let v1 = p.beta * u * v / (p.gamma + u) + (1.0 - p.r) * v
        - p.theta * u * u * v / (p.gamma * p.gamma + u * u);
    State::raw(u1, v1)
}

/// Ψ(u) = [(β-r)u - rγ](γ²+u²) / (u²(γ+u)).
///
/// Positive fixed points are exactly the solutions of θ = Ψ(u) on (0,1).
/// Diverges to -∞ as u → 0⁺, so u ≤ 0 is a domain error.
pub fn psi(u: f64, p: &Params) -> Result<f64> {
    if u <= 0.0 {
        return Err(Error::Domain(format!("psi requires u > 0, got {u}")));
    }
    Ok(psi_unchecked(u, p))
}

pub(crate) fn psi_unchecked(u: f64, p: &Params) -> f64 {
    ((p.beta - p.r) * u - p.r * p.gamma) * (p.gamma * p.gamma + u * u)
        / (u * u * (p.gamma + u))
}

/// h(u) = βu³ + 2(r-β)γu² + (4r-β)γ²u + 2rγ³.
///
/// Carries the sign of Ψ′: Ψ′(u) = γ·h(u) / (u³(u+γ)²), so the roots of
/// h in (0,1) are the critical points of Ψ.
pub fn h_poly(u: f64, p: &Params) -> f64 {
    let g = p.gamma;
    p.beta * u * u * u + 2.0 * (p.r - p.beta) * g * u * u + (4.0 * p.r - p.beta) * g * g * u
        + 2.0 * p.r * g * g * g
}

/// h′(u) = 3βu² + 4(r-β)γu + (4r-β)γ².
pub fn h_prime(u: f64, p: &Params) -> f64 {
    let g = p.gamma;
    3.0 * p.beta * u * u + 4.0 * (p.r - p.beta) * g * u + (4.0 * p.r - p.beta) * g * g
}

/// Jacobian of the map at an arbitrary state.
pub fn jacobian_general(s: State, p: &Params) -> Matrix2 {
    let (u, v) = (s.u, s.v);
    let g = p.gamma;
    let gu = g + u;
    let g2u2 = g * g + u * u;
    Matrix2::new(
        2.0 - 2.0 * u - g * v / (gu * gu),
        -u / gu,
        p.beta * g * v / (gu * gu) - 2.0 * p.theta * g * g * u * v / (g2u2 * g2u2),
        p.beta * u / gu - p.theta * u * u / g2u2 + 1.0 - p.r,
    )
}

/// Jacobian reduced to the fixed-point curve v = (1-u)(γ+u).
///
/// The lower-right entry is 1, which uses the fixed-point relation
/// θ = Ψ(u); the matrix is only meaningful where that relation holds.
/// Its trace and determinant are p(u) and q(u).
pub fn jacobian_on_curve(u: f64, p: &Params) -> Matrix2 {
    let g = p.gamma;
    let gu = g + u;
    let g2u2 = g * g + u * u;
    Matrix2::new(
        (1.0 - u) * (g + 2.0 * u) / gu,
        -u / gu,
        g * (1.0 - u) * gu * (p.beta / (gu * gu) - 2.0 * p.theta * g * u / (g2u2 * g2u2)),
        1.0,
    )
}

/// (p(u), q(u)): trace and determinant of the on-curve Jacobian. The
/// characteristic polynomial at a positive fixed point is
/// F(λ, u) = λ² - p(u)λ + q(u).
pub fn pq(u: f64, p: &Params) -> (f64, f64) {
    let g = p.gamma;
    let gu = g + u;
    let g2u2 = g * g + u * u;
    let a = (1.0 - u) * (g + 2.0 * u) / gu;
    let q = a + g * u * (1.0 - u) * (p.beta / (gu * gu) - 2.0 * p.theta * g * u / (g2u2 * g2u2));
    (1.0 + a, q)
}

/// F(λ, u) = λ² - p(u)λ + q(u).
pub fn char_poly(lambda: f64, u: f64, p: &Params) -> f64 {
    let (pu, qu) = pq(u, p);
    lambda * lambda - pu * lambda + qu
}

/// The parabola v = (1-u)(γ+u) on which every positive fixed point lies.
pub fn curve_v(u: f64, p: &Params) -> f64 {
    (1.0 - u) * (p.gamma + u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(r: f64, beta: f64, theta: f64, gamma: f64) -> Params {
        Params::new(r, beta, theta, gamma).unwrap()
    }

    #[test]
    fn params_reject_nonpositive() {
        assert!(Params::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(Params::new(0.5, -2.0, 1.0, 1.0).is_err());
        assert!(Params::new(0.5, 2.0, 0.0, 1.0).is_err());
        assert!(Params::new(0.5, 2.0, 1.0, f64::NAN).is_err());
        assert!(Params::new(0.5, 2.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn state_rejects_negative_and_nonfinite() {
        assert!(State::new(-0.1, 0.0).is_err());
        assert!(State::new(0.1, f64::INFINITY).is_err());
        assert!(State::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn boundary_points_are_fixed() {
        let p = params(0.7, 3.1, 2.2, 0.9);
        for s in [State::new(0.0, 0.0).unwrap(), State::new(1.0, 0.0).unwrap()] {
            let s1 = map_step(s, &p);
            assert_eq!((s1.u, s1.v), (s.u, s.v));
        }
    }

    #[test]
    fn example_fixed_point_is_fixed() {
        // unique positive fixed point at the Neimark-Sacker threshold
        let p = params(0.5, 2.0, 0.347233, 1.0);
        let s = State::new(0.371926, 0.861671).unwrap();
        let s1 = map_step(s, &p);
        assert!((s1.u - s.u).abs() < 1e-4, "u moved: {}", s1.u);
        assert!((s1.v - s.v).abs() < 1e-4, "v moved: {}", s1.v);
    }

    #[test]
    fn psi_closed_form_values() {
        let p = params(0.5, 4.0, 1.0, 1.0);
        assert_eq!(psi(1.0, &p).unwrap(), 3.0);
        // unique zero of the bracket
        let u0 = p.r() * p.gamma() / (p.beta() - p.r());
        assert!(psi(u0, &p).unwrap().abs() < 1e-14);
        assert!(psi(0.0, &p).is_err());
        assert!(psi(-1.0, &p).is_err());

        let p3 = params(0.5, 3.0, 1.0, 0.1);
        assert!((psi(1.0, &p3).unwrap() - 2.2495).abs() < 2e-3);
    }

    #[test]
    fn h_constant_term() {
        let p = params(0.8, 2.5, 1.0, 1.3);
        let g = p.gamma();
        assert_eq!(h_poly(0.0, &p), 2.0 * p.r() * g * g * g);
        assert!(h_poly(0.0, &p) > 0.0);
    }

    #[test]
    fn h_root_example() {
        let p = params(0.5, 4.0, 1.0, 1.0);
        assert!(h_poly(0.2757, &p).abs() < 5e-3);
    }

    #[test]
    fn jacobian_at_origin_and_boundary() {
        let p = params(0.6, 2.4, 1.7, 0.8);
        let j0 = jacobian_general(State::new(0.0, 0.0).unwrap(), &p);
        assert_eq!(j0.m, [[2.0, 0.0], [0.0, 1.0 - p.r()]]);

        let j1 = jacobian_general(State::new(1.0, 0.0).unwrap(), &p);
        assert_eq!(j1.m[1][0], 0.0);
        let lam2 = p.beta() / (1.0 + p.gamma()) - p.theta() / (1.0 + p.gamma() * p.gamma())
            + 1.0
            - p.r();
        let (e1, e2) = j1.eigenvalues();
        let mut mods = [e1.re, e2.re];
        mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect = [0.0, lam2];
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((mods[0] - expect[0]).abs() < 1e-12);
        assert!((mods[1] - expect[1]).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        // central differences, step 1e-6, relative error <= 1e-6
        let mut rng = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..50 {
            let p = params(
                0.2 + next() * 1.5,
                0.5 + next() * 4.0,
                0.2 + next() * 4.0,
                0.2 + next() * 2.0,
            );
            let s = State::new(0.05 + next() * 1.4, 0.05 + next() * 1.4).unwrap();
            let j = jacobian_general(s, &p);
            let h = 1e-6;
            let fd = |i: usize, du: f64, dv: f64| {
                let up = map_step(State::raw(s.u + du, s.v + dv), &p);
                let dn = map_step(State::raw(s.u - du, s.v - dv), &p);
                (if i == 0 { up.u - dn.u } else { up.v - dn.v }) / (2.0 * h)
            };
            let approx = [[fd(0, h, 0.0), fd(0, 0.0, h)], [fd(1, h, 0.0), fd(1, 0.0, h)]];
            for i in 0..2 {
                for k in 0..2 {
                    let scale = approx[i][k].abs().max(1.0);
                    assert!(
                        (j.m[i][k] - approx[i][k]).abs() / scale <= 1e-6,
                        "entry ({i},{k}): analytic {} vs fd {}",
                        j.m[i][k],
                        approx[i][k]
                    );
                }
            }
        }
    }

    #[test]
    fn on_curve_jacobian_consistency() {
        // at a curve fixed point (theta = psi(u)) the reduced Jacobian equals
        // the general one, and trace/det match p(u), q(u)
        let mut seed = 0x51ed270b_u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut tested = 0;
        while tested < 100 {
            let r = 0.2 + next() * 1.2;
            let beta = 0.5 + next() * 4.0;
            let gamma = 0.2 + next() * 2.0;
            let u = 0.05 + next() * 0.9;
            let pr = Params::new(r, beta, 1.0, gamma).unwrap();
            let theta = psi_unchecked(u, &pr);
            if theta <= 1e-6 {
                continue;
            }
            tested += 1;
            let p = Params::new(r, beta, theta, gamma).unwrap();
            let jc = jacobian_on_curve(u, &p);
            let jg = jacobian_general(State::raw(u, curve_v(u, &p)), &p);
            for i in 0..2 {
                for k in 0..2 {
                    let scale = jg.m[i][k].abs().max(1.0);
                    assert!(
                        (jc.m[i][k] - jg.m[i][k]).abs() / scale <= 1e-12,
                        "entry ({i},{k})"
                    );
                }
            }
            let (pu, qu) = pq(u, &p);
            assert!((jc.trace() - pu).abs() <= 1e-12 * pu.abs().max(1.0));
            assert!((jc.det() - qu).abs() <= 1e-12 * qu.abs().max(1.0));
        }
    }

    #[test]
    fn on_curve_examples() {
        // determinant 1 at the bifurcation point
        let p = params(0.5, 2.0, 0.347233, 1.0);
        assert!((jacobian_on_curve(0.371926, &p).det() - 1.0).abs() < 1e-4);
        // repelling three-fixed-point configuration
        let p = params(0.5, 3.0, 2.0, 0.1);
        assert!((jacobian_on_curve(0.3732, &p).det() - 1.2778).abs() < 2e-3);
    }

    #[test]
    fn pq_examples() {
        let p = params(0.5, 2.0, 0.347233, 1.0);
        let (pu, _) = pq(0.371926, &p);
        assert!((pu / 2.0 - 0.8991).abs() < 5e-4);
        // p(u) -> 1 as u -> 1
        let (p1, _) = pq(1.0 - 1e-12, &p);
        assert!((p1 - 1.0).abs() < 1e-10);

        let p = params(0.5, 2.1, 1.1, 0.5);
        let (_, q1) = pq(0.3208712, &p);
        assert!((q1 - 0.9755).abs() < 2e-3);
    }

    #[test]
    fn eigenvalues_satisfy_trace_det() {
        for m in [
            Matrix2::new(0.3, -1.2, 0.7, 1.1),
            Matrix2::new(2.0, 0.0, 0.0, -0.5),
            Matrix2::new(0.9, -0.4, 0.4, 0.9),
        ] {
            let (l1, l2) = m.eigenvalues();
            assert!(((l1 + l2).re - m.trace()).abs() <= 1e-12 * m.trace().abs().max(1.0));
            assert!((l1 + l2).im.abs() <= 1e-12);
            assert!(((l1 * l2).re - m.det()).abs() <= 1e-12 * m.det().abs().max(1.0));
        }
    }
}
