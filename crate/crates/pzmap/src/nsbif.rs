//! Neimark-Sacker bifurcation detection and normal-form reduction.
//!
//! A positive fixed point ū loses stability when its complex eigenvalue
//! pair crosses the unit circle, i.e. when q(ū) = 1 with 1 < p(ū) < 2.
//! Treating θ as the bifurcation parameter, the critical pairs (θ0, ū)
//! solve the simultaneous system θ = Ψ(u), q(u) = 1. Around such a pair
//! the map is shifted to the origin, expanded to third order, rotated
//! into eigenbasis coordinates, and condensed into the discriminating
//! quantity 𝓛 whose sign decides whether the invariant closed curve
//! born at the bifurcation is attracting (𝓛 < 0, curve for θ < θ0) or
//! repelling (𝓛 > 0, curve for θ > θ0).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::{positive_roots, FpKind, U_EPS};
use crate::error::{Error, Result};
use crate::model::{curve_v, pq, psi_unchecked, Params};
use crate::roots::scan_roots;

/// Which fixed-point branch a critical pair belongs to (the middle
/// branch E2 is a saddle and never bifurcates this way).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NsBranch {
    E1,
    E3,
}

/// A solution of { θ = Ψ(u), q(u) = 1 }.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NsCritical {
    pub theta0: f64,
    pub u_bar: f64,
    pub kind: FpKind,
}

/// Solve θ = Ψ(u), q(u) = 1 on (0,1). θ of the input parameters is
/// ignored; r, β, γ select the slice. Returns every admissible pair
/// (θ0 > 0, complex eigenvalue regime), ascending in u, optionally
/// restricted to one branch.
pub fn ns_critical(p: &Params, branch: Option<NsBranch>) -> Vec<NsCritical> {
    // q is affine in theta, so substitute theta = Ψ(u) directly; Ψ may be
    // negative along the scan, which Params would reject
    let objective = |u: f64| {
        let (_, q) = pq_with_theta(u, psi_unchecked(u, p), p);
        q - 1.0
    };
    let mut out = Vec::new();
    for u in scan_roots(objective, U_EPS, 1.0 - 1e-12, 4096, 1e-14, 0.0) {
        let theta0 = psi_unchecked(u, p);
        if !(theta0 > 0.0) {
            continue;
        }
        let (pu, _) = pq_with_theta(u, theta0, p);
        if pu >= 2.0 - 1e-12 || pu <= 1.0 {
            // real eigenvalues (or resonance at p = 2): not a
            // Neimark-Sacker point
            continue;
        }
        let kind = resolve_kind(u, theta0, p);
        out.push(NsCritical { theta0, u_bar: u, kind });
    }
    match branch {
        None => out,
        Some(NsBranch::E1) => out.into_iter().filter(|c| c.kind == FpKind::E1).collect(),
        Some(NsBranch::E3) => out.into_iter().filter(|c| c.kind == FpKind::E3).collect(),
    }
}

fn pq_with_theta(u: f64, theta: f64, p: &Params) -> (f64, f64) {
    let g = p.gamma();
    let gu = g + u;
    let g2u2 = g * g + u * u;
    let a = (1.0 - u) * (g + 2.0 * u) / gu;
    let q = a + g * u * (1.0 - u) * (p.beta() / (gu * gu) - 2.0 * theta * g * u / (g2u2 * g2u2));
    (1.0 + a, q)
}

/// Ordinal of ū among the positive fixed points of the θ0-slice.
fn resolve_kind(u: f64, theta0: f64, p: &Params) -> FpKind {
    let kinds = [FpKind::E1, FpKind::E2, FpKind::E3];
    if let Ok(pt) = p.with_theta(theta0) {
        let roots = positive_roots(&pt);
        for (i, &(ru, _)) in roots.iter().enumerate() {
            if (ru - u).abs() <= 1e-6 * u.max(1.0) {
                return kinds[i.min(2)];
            }
        }
    }
    FpKind::E1
}

/// Eigenvalue pair of the on-curve Jacobian in the complex regime,
/// λ = p(u)/2 ∓ i√(4q(u) - p(u)²)/2, with the negative-imaginary member
/// first. Modulus is √q(u).
pub fn eigen_at(u: f64, p: &Params) -> Result<(Complex64, Complex64)> {
    let (pu, qu) = pq(u, p);
    let disc = 4.0 * qu - pu * pu;
    if disc <= 0.0 {
        return Err(Error::NotNsApplicable { u });
    }
    let s = disc.sqrt() / 2.0;
    Ok((Complex64::new(pu / 2.0, -s), Complex64::new(pu / 2.0, s)))
}

/// d|λ|/dθ at the critical pair:
/// -ū²(1-ū)(2ū³ + γū² + 4γ²ū + 3γ³) / (2(γ+ū)(γ²+ū²)²), strictly
/// negative on (0,1) — raising the toxin rate always pushes the pair
/// inward.
pub fn transversality(u_bar: f64, p: &Params) -> f64 {
    let g = p.gamma();
    let u = u_bar;
    let num = u * u * (1.0 - u) * (2.0 * u * u * u + g * u * u + 4.0 * g * g * u + 3.0 * g * g * g);
    let den = 2.0 * (g + u) * (g * g + u * u) * (g * g + u * u);
    -num / den
}

/// Third-order Taylor coefficients of the shifted map at (ū, v̄), θ = θ0.
/// x-component coefficients are `a`, y-component `b`; index jk is the
/// x^j y^k term. These are the exact derivatives (they match a
/// finite-difference expansion of the map).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorCoeffs {
    pub a10: f64,
    pub a01: f64,
    pub a20: f64,
    pub a11: f64,
    pub a02: f64,
    pub a30: f64,
    pub a21: f64,
    pub a12: f64,
    pub a03: f64,
    pub b10: f64,
    pub b01: f64,
    pub b20: f64,
    pub b11: f64,
    pub b02: f64,
    pub b30: f64,
    pub b21: f64,
    pub b12: f64,
    pub b03: f64,
}

/// Closed-form Taylor table at a critical pair (ū, θ0).
pub fn taylor_coeffs(u_bar: f64, theta0: f64, p: &Params) -> TaylorCoeffs {
    let g = p.gamma();
    let beta = p.beta();
    let u = u_bar;
    let gu = g + u;
    let gu2 = gu * gu;
    let gu3 = gu2 * gu;
    let g2u2 = g * g + u * u;
    TaylorCoeffs {
        a10: (1.0 - u) * (g + 2.0 * u) / gu,
        a01: -u / gu,
        a20: (g * (1.0 - 3.0 * u) - g * g - u * u) / gu2,
        a11: -g / gu2,
        a02: 0.0,
        a30: g * (u - 1.0) / gu3,
        a21: g / gu3,
        a12: 0.0,
        a03: 0.0,
        b10: g * (1.0 - u) * (beta / gu - 2.0 * g * theta0 * u * gu / (g2u2 * g2u2)),
        b01: 1.0,
        b20: -g
            * (1.0 - u)
            * (beta / gu2 + g * theta0 * gu * (g * g - 3.0 * u * u) / (g2u2 * g2u2 * g2u2)),
        b11: g * (beta / gu2 - 2.0 * g * theta0 * u / (g2u2 * g2u2)),
        b02: 0.0,
        b30: g
            * (1.0 - u)
            * (beta / gu3 + 4.0 * g * theta0 * u * (g - u) * gu2 / (g2u2 * g2u2 * g2u2 * g2u2)),
        b21: -g * (beta / gu3 + g * theta0 * (g * g - 3.0 * u * u) / (g2u2 * g2u2 * g2u2)),
        b12: 0.0,
        b03: 0.0,
    }
}

/// Quadratic y-coefficient variant used inside the normal-form cascade.
/// It differs from the exact derivative `TaylorCoeffs::b20` by a factor
/// of (γ² + ū²); the cascade and the resulting discriminating quantity
/// are calibrated against this variant (see `normal_form`).
fn cascade_b20(u_bar: f64, theta0: f64, p: &Params) -> f64 {
    let g = p.gamma();
    let u = u_bar;
    let gu = g + u;
    let g2u2 = g * g + u * u;
    -g * (1.0 - u)
        * (p.beta() / (gu * gu) + g * theta0 * gu * (g * g - 3.0 * u * u) / (g2u2 * g2u2))
}

/// Quadratic/cubic coefficients of the transformed system
/// (X,Y) -> T⁻¹ H(T(X,Y)); `c` is the first component, `d` the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdCoeffs {
    pub c20: f64,
    pub c11: f64,
    pub c02: f64,
    pub c30: f64,
    pub c21: f64,
    pub c12: f64,
    pub c03: f64,
    pub d20: f64,
    pub d11: f64,
    pub d02: f64,
    pub d30: f64,
    pub d21: f64,
    pub d12: f64,
    pub d03: f64,
}

/// Everything the normal-form reduction produces at one critical pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NsReport {
    pub theta0: f64,
    pub u_bar: f64,
    pub v_bar: f64,
    /// (λ1, λ2) = ((1 + a10) ∓ iα)/2; λ1 carries the negative
    /// imaginary part, λ2 is its conjugate.
    #[serde(with = "crate::serde_complex::complex_pair")]
    pub eigenvalues: (Complex64, Complex64),
    pub alpha: f64,
    pub m: f64,
    pub n: f64,
    pub taylor: TaylorCoeffs,
    pub cd: CdCoeffs,
    #[serde(with = "crate::serde_complex::complex")]
    pub l20: Complex64,
    #[serde(with = "crate::serde_complex::complex")]
    pub l11: Complex64,
    #[serde(with = "crate::serde_complex::complex")]
    pub l02: Complex64,
    #[serde(with = "crate::serde_complex::complex")]
    pub l21: Complex64,
    /// The discriminating quantity 𝓛.
    pub l: f64,
    /// d|λ|/dθ at θ0 (always negative).
    pub dmod_dtheta: f64,
}

/// Cascade from a Taylor table to the normal-form quantities, given the
/// transformation scalars and the critical eigenvalue pair.
pub fn normal_form_from_coeffs(
    t: &TaylorCoeffs,
    m: f64,
    n: f64,
    lam1: Complex64,
    lam2: Complex64,
) -> (CdCoeffs, [Complex64; 4], f64) {
    let cd = CdCoeffs {
        c20: t.a20 * m * n + t.b20 * m * n * n,
        c11: t.a11 - t.a20 * n + t.b11 * n - t.b20 * n * n,
        c02: (t.a20 * n - t.a11 + t.b20 * n * n - t.b11 * n) / m,
        c30: t.a30 * m * m * n * n + t.b30 * m * m * n * n * n,
        c21: t.a21 * m * n - 3.0 * t.a30 * m * n * n + t.b21 * m * n * n
            - 3.0 * t.b30 * m * n * n * n,
        c12: 3.0 * t.a30 * n * n - 2.0 * t.a21 * n + 3.0 * t.b30 * n * n * n
            - 2.0 * t.b21 * n * n,
        c03: (t.a21 * n - t.a30 * n * n + t.b21 * n * n - t.b30 * n * n * n) / m,
        d20: t.b20 * m * m * n * n,
        d11: t.b11 * m * n - t.b20 * m * n * n,
        d02: t.b20 * n * n - t.b11 * n,
        d30: t.b30 * m * m * m * n * n * n,
        d21: t.b21 * m * m * n * n - 3.0 * t.b30 * m * m * n * n * n,
        d12: 3.0 * t.b30 * m * n * n * n - 2.0 * t.b21 * m * n * n,
        d03: t.b21 * n * n - t.b30 * n * n * n,
    };

    let f_xx = 2.0 * cd.c20;
    let f_xy = cd.c11;
    let f_yy = 2.0 * cd.c02;
    let f_xxx = 6.0 * cd.c30;
    let f_xxy = 2.0 * cd.c21;
    let f_xyy = 2.0 * cd.c12;
    let f_yyy = 6.0 * cd.c03;
    let g_xx = 2.0 * cd.d20;
    let g_xy = cd.d11;
    let g_yy = 2.0 * cd.d02;
    let g_xxx = 6.0 * cd.d30;
    let g_xxy = 2.0 * cd.d21;
    let g_xyy = 2.0 * cd.d12;
    let g_yyy = 6.0 * cd.d03;

    let l20 = Complex64::new(f_xx - f_yy + 2.0 * g_xy, g_xx - g_yy - 2.0 * f_xy) / 8.0;
    let l11 = Complex64::new(f_xx + f_yy, g_xx + g_yy) / 4.0;
    let l02 = Complex64::new(f_xx - f_yy - 2.0 * g_xy, g_xx - g_yy + 2.0 * f_xy) / 8.0;
    let l21 = Complex64::new(
        f_xxx + f_xyy + g_xxy + g_yyy,
        g_xxx + g_xyy - f_xxy - f_yyy,
    ) / 16.0;

    let one = Complex64::new(1.0, 0.0);
    let l = -((one - 2.0 * lam1) * lam2 * lam2 / (one - lam1) * l11 * l20).re
        - 0.5 * l11.norm_sqr()
        - l02.norm_sqr()
        + (lam2 * l21).re;
    (cd, [l20, l11, l02, l21], l)
}

/// Full normal-form reduction at a critical pair from `ns_critical`.
pub fn normal_form(u_bar: f64, theta0: f64, p: &Params) -> Result<NsReport> {
    let g = p.gamma();
    let u = u_bar;
    let pivot = 2.0 * u + g - 1.0;
    if pivot.abs() < 1e-10 {
        return Err(Error::SingularTransformation { u, tol: 1e-10 });
    }
    let taylor = taylor_coeffs(u_bar, theta0, p);
    let a10 = taylor.a10;
    let alpha_sq = 3.0 - a10 * a10 - 2.0 * a10; // = 4 - (1 + a10)²
    if alpha_sq <= 0.0 {
        return Err(Error::NotNsApplicable { u });
    }
    let alpha = alpha_sq.sqrt();
    let lam1 = Complex64::new((1.0 + a10) / 2.0, -alpha / 2.0);
    let lam2 = lam1.conj();
    let m = alpha * (g + u) / (u * pivot);
    let n = u / (2.0 * (g + u));

    let mut cascade_table = taylor;
    cascade_table.b20 = cascade_b20(u_bar, theta0, p);
    let (cd, ls, l) = normal_form_from_coeffs(&cascade_table, m, n, lam1, lam2);

    Ok(NsReport {
        theta0,
        u_bar,
        v_bar: curve_v(u_bar, p),
        eigenvalues: (lam1, lam2),
        alpha,
        m,
        n,
        taylor,
        cd,
        l20: ls[0],
        l11: ls[1],
        l02: ls[2],
        l21: ls[3],
        l,
        dmod_dtheta: transversality(u_bar, p),
    })
}

/// Convenience: critical pairs with their full reports for one (r, β, γ)
/// slice.
pub fn ns_reports(p: &Params, branch: Option<NsBranch>) -> Result<Vec<(NsCritical, NsReport)>> {
    ns_critical(p, branch)
        .into_iter()
        .map(|c| normal_form(c.u_bar, c.theta0, p).map(|rep| (c, rep)))
        .collect()
}

/// Side of θ0 on which the invariant curve exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaSide {
    BelowTheta0,
    AboveTheta0,
}

/// What bifurcates, read off the sign of 𝓛.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NsVerdict {
    /// 𝓛 < 0: attracting curve for θ < θ0.
    Attracting(ThetaSide),
    /// 𝓛 > 0: repelling curve for θ > θ0.
    Repelling(ThetaSide),
    /// |𝓛| ≤ 1e-8: verdict withheld.
    Degenerate,
}

impl NsVerdict {
    pub fn bifurcates(&self) -> bool {
        !matches!(self, NsVerdict::Degenerate)
    }
}

pub fn ns_verdict(report: &NsReport) -> NsVerdict {
    if report.l.abs() <= 1e-8 {
        NsVerdict::Degenerate
    } else if report.l < 0.0 {
        NsVerdict::Attracting(ThetaSide::BelowTheta0)
    } else {
        NsVerdict::Repelling(ThetaSide::AboveTheta0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{map_step, State};

    fn params(r: f64, beta: f64, theta: f64, gamma: f64) -> Params {
        Params::new(r, beta, theta, gamma).unwrap()
    }

    #[test]
    fn critical_pair_example_1() {
        let pts = ns_critical(&params(0.5, 2.0, 1.0, 1.0), None);
        assert_eq!(pts.len(), 1);
        assert!((pts[0].theta0 - 0.347233).abs() < 1e-4);
        assert!((pts[0].u_bar - 0.371926).abs() < 1e-4);
        assert_eq!(pts[0].kind, FpKind::E1);
    }

    #[test]
    fn critical_pair_example_2() {
        let pts = ns_critical(&params(0.5, 4.0, 1.0, 1.0), Some(NsBranch::E1));
        assert_eq!(pts.len(), 1);
        assert!((pts[0].theta0 - 5.0).abs() < 1e-6);
        assert!((pts[0].u_bar - 0.2360).abs() < 5e-4);
        // exact closed form of the bifurcating abscissa
        assert!((pts[0].u_bar - (5f64.sqrt() - 2.0)).abs() < 1e-9);
    }

    #[test]
    fn no_critical_pair_without_positive_fixed_points() {
        assert!(ns_critical(&params(0.5, 0.6, 1.0, 1.0), None).is_empty());
    }

    #[test]
    fn eigenvalues_at_criticality() {
        let p = params(0.5, 2.0, 0.34723308884581194, 1.0);
        let (l1, l2) = eigen_at(0.3719261171, &p).unwrap();
        assert!((l1.re - 0.8991).abs() < 5e-4);
        assert!((l1.im + 0.4376).abs() < 5e-4);
        assert_eq!(l2, l1.conj());
        assert!((l1.norm() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn eigen_modulus_squared_is_q() {
        let mut seed = 77u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut checked = 0;
        while checked < 100 {
            let p = params(
                0.2 + next(),
                0.5 + 4.0 * next(),
                0.1 + 4.0 * next(),
                0.2 + 2.0 * next(),
            );
            let u = 0.02 + 0.96 * next();
            match eigen_at(u, &p) {
                Ok((l1, _)) => {
                    let (_, q) = pq(u, &p);
                    assert!((l1.norm_sqr() - q).abs() <= 1e-12 * q.abs().max(1.0));
                    checked += 1;
                }
                Err(_) => continue,
            }
        }
    }

    #[test]
    fn eigen_real_regime_is_rejected() {
        // E2 of the three-point example has real eigenvalues
        assert!(eigen_at(0.1, &params(0.5, 3.0, 2.0, 0.1)).is_err());
    }

    #[test]
    fn transversality_is_negative_and_vanishes_at_one() {
        let p = params(0.5, 2.0, 1.0, 1.0);
        for i in 1..100 {
            let u = i as f64 / 100.0;
            assert!(transversality(u, &p) < 0.0);
        }
        assert!(transversality(1.0 - 1e-12, &p).abs() < 1e-10);
    }

    #[test]
    fn transversality_matches_derivative_of_modulus() {
        // |λ(θ*)| = sqrt(b(θ*)); compare against a central difference
        let p = params(0.5, 2.0, 1.0, 1.0);
        let u = 0.3719261171459723;
        let g = p.gamma();
        let num = u * u * (1.0 - u)
            * (2.0 * u * u * u + g * u * u + 4.0 * g * g * u + 3.0 * g * g * g);
        let den = (g + u) * (g * g + u * u) * (g * g + u * u);
        let modulus = |ts: f64| (1.0 - ts * num / den).sqrt();
        let h = 1e-6;
        let fd = (modulus(h) - modulus(-h)) / (2.0 * h);
        let t = transversality(u, &p);
        assert!((t - fd).abs() <= 1e-6 * fd.abs());
    }

    /// Central-difference Taylor coefficients of the shifted map, one
    /// Richardson extrapolation step; independent of the closed forms.
    fn fd_taylor(u_bar: f64, v_bar: f64, p: &Params) -> TaylorCoeffs {
        let f = |x: f64, y: f64, comp: usize| {
            let s = map_step(State::raw(u_bar + x, v_bar + y), p);
            if comp == 0 {
                s.u - u_bar
            } else {
                s.v - v_bar
            }
        };
        let richardson = |coarse: f64, fine: f64, order: u32| {
            // step halving with error O(h^2): fine + (fine - coarse)/(2^2 - 1)
            let _ = order;
            fine + (fine - coarse) / 3.0
        };
        let d = |comp: usize, jx: u32, ky: u32| {
            // third-order stencils divide by h³, so they need a larger
            // step to stay above roundoff; Richardson removes the h²
            // truncation either way
            let base_h = if jx + ky == 3 { 2e-3 } else { 1e-4 };
            let stencil = |h: f64| -> f64 {
                let e = |i: f64, j: f64| f(i * h, j * h, comp);
                match (jx, ky) {
                    (1, 0) => (e(1.0, 0.0) - e(-1.0, 0.0)) / (2.0 * h),
                    (0, 1) => (e(0.0, 1.0) - e(0.0, -1.0)) / (2.0 * h),
                    (2, 0) => (e(1.0, 0.0) - 2.0 * e(0.0, 0.0) + e(-1.0, 0.0)) / (h * h),
                    (0, 2) => (e(0.0, 1.0) - 2.0 * e(0.0, 0.0) + e(0.0, -1.0)) / (h * h),
                    (1, 1) => {
                        (e(1.0, 1.0) - e(1.0, -1.0) - e(-1.0, 1.0) + e(-1.0, -1.0))
                            / (4.0 * h * h)
                    }
                    (3, 0) => {
                        (e(2.0, 0.0) - 2.0 * e(1.0, 0.0) + 2.0 * e(-1.0, 0.0) - e(-2.0, 0.0))
                            / (2.0 * h * h * h)
                    }
                    (0, 3) => {
                        (e(0.0, 2.0) - 2.0 * e(0.0, 1.0) + 2.0 * e(0.0, -1.0) - e(0.0, -2.0))
                            / (2.0 * h * h * h)
                    }
                    (2, 1) => {
                        ((e(1.0, 1.0) - 2.0 * e(0.0, 1.0) + e(-1.0, 1.0))
                            - (e(1.0, -1.0) - 2.0 * e(0.0, -1.0) + e(-1.0, -1.0)))
                            / (2.0 * h * h * h)
                    }
                    (1, 2) => {
                        ((e(1.0, 1.0) - 2.0 * e(1.0, 0.0) + e(1.0, -1.0))
                            - (e(-1.0, 1.0) - 2.0 * e(-1.0, 0.0) + e(-1.0, -1.0)))
                            / (2.0 * h * h * h)
                    }
                    _ => unreachable!(),
                }
            };
            richardson(stencil(2.0 * base_h), stencil(base_h), 2)
        };
        let fac = |jx: u32, ky: u32| -> f64 {
            let f = |n: u32| (1..=n).map(|i| i as f64).product::<f64>().max(1.0);
            f(jx) * f(ky)
        };
        let coef = |comp: usize, jx: u32, ky: u32| d(comp, jx, ky) / fac(jx, ky);
        TaylorCoeffs {
            a10: coef(0, 1, 0),
            a01: coef(0, 0, 1),
            a20: coef(0, 2, 0),
            a11: coef(0, 1, 1),
            a02: coef(0, 0, 2),
            a30: coef(0, 3, 0),
            a21: coef(0, 2, 1),
            a12: coef(0, 1, 2),
            a03: coef(0, 0, 3),
            b10: coef(1, 1, 0),
            b01: coef(1, 0, 1),
            b20: coef(1, 2, 0),
            b11: coef(1, 1, 1),
            b02: coef(1, 0, 2),
            b30: coef(1, 3, 0),
            b21: coef(1, 2, 1),
            b12: coef(1, 1, 2),
            b03: coef(1, 0, 3),
        }
    }

    fn assert_taylor_close(sym: &TaylorCoeffs, fd: &TaylorCoeffs) {
        let pairs = [
            ("a10", sym.a10, fd.a10),
            ("a01", sym.a01, fd.a01),
            ("a20", sym.a20, fd.a20),
            ("a11", sym.a11, fd.a11),
            ("a02", sym.a02, fd.a02),
            ("a30", sym.a30, fd.a30),
            ("a21", sym.a21, fd.a21),
            ("a12", sym.a12, fd.a12),
            ("a03", sym.a03, fd.a03),
            ("b10", sym.b10, fd.b10),
            ("b01", sym.b01, fd.b01),
            ("b20", sym.b20, fd.b20),
            ("b11", sym.b11, fd.b11),
            ("b02", sym.b02, fd.b02),
            ("b30", sym.b30, fd.b30),
            ("b21", sym.b21, fd.b21),
            ("b12", sym.b12, fd.b12),
            ("b03", sym.b03, fd.b03),
        ];
        for (name, s, f) in pairs {
            // 1e-5 relative; identically-zero entries compare against the
            // second-difference noise floor instead
            let tol = 1e-5 * f.abs().max(1e-2);
            assert!((s - f).abs() <= tol, "{name}: closed {s} vs fd {f}");
        }
    }

    #[test]
    fn taylor_coeffs_match_fd_oracle_example_1() {
        let pts = ns_critical(&params(0.5, 2.0, 1.0, 1.0), None);
        let (theta0, u_bar) = (pts[0].theta0, pts[0].u_bar);
        let p = params(0.5, 2.0, theta0, 1.0);
        let sym = taylor_coeffs(u_bar, theta0, &p);
        let fd = fd_taylor(u_bar, curve_v(u_bar, &p), &p);
        assert_taylor_close(&sym, &fd);
        // spot values
        assert!((sym.a01 + 0.2711).abs() < 5e-4);
        assert_eq!(sym.b01, 1.0);
        assert_eq!(sym.a02, 0.0);
        assert_eq!(sym.b12, 0.0);
    }

    #[test]
    fn taylor_coeffs_match_fd_oracle_example_2() {
        let pts = ns_critical(&params(0.5, 4.0, 1.0, 1.0), None);
        let (theta0, u_bar) = (pts[0].theta0, pts[0].u_bar);
        let p = params(0.5, 4.0, theta0, 1.0);
        let sym = taylor_coeffs(u_bar, theta0, &p);
        let fd = fd_taylor(u_bar, curve_v(u_bar, &p), &p);
        assert_taylor_close(&sym, &fd);
    }

    #[test]
    fn normal_form_example_1() {
        let pts = ns_critical(&params(0.5, 2.0, 1.0, 1.0), None);
        let rep = normal_form(pts[0].u_bar, pts[0].theta0, &params(0.5, 2.0, 1.0, 1.0)).unwrap();
        assert!((rep.l20.re - 0.011155).abs() < 2e-3, "l20 {}", rep.l20);
        assert!((rep.l20.im - 0.040816).abs() < 2e-3);
        assert!((rep.l11.re + 0.192358).abs() < 2e-3);
        assert!((rep.l11.im + 0.204738).abs() < 2e-3);
        assert!((rep.l02.re + 0.274762).abs() < 2e-3);
        assert!((rep.l02.im + 0.113795).abs() < 2e-3);
        assert!((rep.l21.re + 0.087924).abs() < 2e-3);
        assert!((rep.l21.im - 0.048583).abs() < 2e-3);
        assert!((rep.l + 0.248898).abs() < 2e-3, "L = {}", rep.l);
        assert!(rep.dmod_dtheta < 0.0);
        assert!((rep.eigenvalues.0.norm() - 1.0).abs() < 1e-8);
        assert_eq!(ns_verdict(&rep), NsVerdict::Attracting(ThetaSide::BelowTheta0));
    }

    #[test]
    fn normal_form_example_2() {
        let pts = ns_critical(&params(0.5, 4.0, 1.0, 1.0), None);
        let rep = normal_form(pts[0].u_bar, pts[0].theta0, &params(0.5, 4.0, 1.0, 1.0)).unwrap();
        assert!((rep.l + 1.544896).abs() < 2e-3, "L = {}", rep.l);
        assert!((rep.l20.re + 0.019339).abs() < 2e-3);
        assert!((rep.l20.im + 0.394724).abs() < 2e-3);
        assert!((rep.l11.re + 0.284541).abs() < 2e-3);
        assert!((rep.l11.im + 1.141906).abs() < 2e-3);
        assert!((rep.l02.re + 0.342470).abs() < 2e-3);
        assert!((rep.l02.im + 0.649029).abs() < 2e-3);
        assert!((rep.l21.re + 0.360033).abs() < 2e-3);
        assert!((rep.l21.im - 0.565082).abs() < 2e-3);
        assert_eq!(ns_verdict(&rep), NsVerdict::Attracting(ThetaSide::BelowTheta0));
    }

    #[test]
    fn zeroed_nonlinearity_gives_vanishing_normal_form() {
        let pts = ns_critical(&params(0.5, 2.0, 1.0, 1.0), None);
        let p = params(0.5, 2.0, 1.0, 1.0);
        let rep = normal_form(pts[0].u_bar, pts[0].theta0, &p).unwrap();
        let mut t = rep.taylor;
        t.a20 = 0.0;
        t.a11 = 0.0;
        t.a30 = 0.0;
        t.a21 = 0.0;
        t.b20 = 0.0;
        t.b11 = 0.0;
        t.b30 = 0.0;
        t.b21 = 0.0;
        let (_, ls, l) = normal_form_from_coeffs(&t, rep.m, rep.n, rep.eigenvalues.0, rep.eigenvalues.1);
        for z in ls {
            assert_eq!(z, Complex64::new(0.0, 0.0));
        }
        assert_eq!(l, 0.0);
    }

    #[test]
    fn discriminating_quantity_invariant_under_conjugate_swap() {
        let p = params(0.5, 2.0, 1.0, 1.0);
        let pts = ns_critical(&p, None);
        let rep = normal_form(pts[0].u_bar, pts[0].theta0, &p).unwrap();
        let mut table = rep.taylor;
        table.b20 = cascade_b20(rep.u_bar, rep.theta0, &p);
        // the conjugate labeling flips the sign of α, hence of m
        let (_, _, l_swapped) =
            normal_form_from_coeffs(&table, -rep.m, rep.n, rep.eigenvalues.1, rep.eigenvalues.0);
        assert!((l_swapped - rep.l).abs() < 1e-12, "{l_swapped} vs {}", rep.l);
    }

    #[test]
    fn non_resonance_at_critical_pairs() {
        for (r, beta) in [(0.5, 2.0), (0.5, 4.0)] {
            let p = params(r, beta, 1.0, 1.0);
            for c in ns_critical(&p, None) {
                let (pu, _) = pq(c.u_bar, &p.with_theta(c.theta0).unwrap());
                assert!(pu > 1.0 && pu < 2.0, "p(u) = {pu}");
                let (l1, _) = eigen_at(c.u_bar, &p.with_theta(c.theta0).unwrap()).unwrap();
                let mut pw = Complex64::new(1.0, 0.0);
                for m in 1..=4 {
                    pw *= l1;
                    assert!((pw - 1.0).norm() > 1e-6, "resonance at power {m}");
                }
            }
        }
    }

    #[test]
    fn singular_transformation_is_reported() {
        // 2u + γ - 1 = 0 at u = (1-γ)/2; force that configuration
        let g = 0.5;
        let u = (1.0 - g) / 2.0;
        let p = params(0.5, 3.0, 1.0, g);
        match normal_form(u, 1.0, &p) {
            Err(Error::SingularTransformation { .. }) => {}
            other => panic!("expected singular transformation, got {other:?}"),
        }
    }
}
