//! Fixed-point existence, location, and stability.
//!
//! The (r, γ, β) space splits into twelve regions A0-A11 (plus a
//! nonexistence zone β ≤ r(1+γ)) that determine how many positive fixed
//! points θ = Ψ(u) can have on (0,1). Within a region the count follows
//! from comparing θ against Ψ at the critical points of Ψ (the roots
//! û1 < û2 of h) and against Ψ(1). Roots are then bracketed on the
//! monotone pieces of Ψ and refined, and each point is classified by the
//! unit-circle certificates F(1,u), F(-1,u), q(u) of its characteristic
//! polynomial.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{
    curve_v, h_poly, jacobian_general, map_step, pq, psi_unchecked, Params, State,
};
use crate::roots::bracketed_root;

pub const SQRT2_M1: f64 = 0.41421356237309515; // sqrt(2) - 1
pub const SQRT7_M2: f64 = 0.6457513110645906; // sqrt(7) - 2
pub const GAMMA_KNEE: f64 = 1.6407828697637986; // (3 + 6 sqrt(2)) / 7
pub const SQRT3: f64 = 1.7320508075688772;
/// β/r ratio below which h' has no real roots: (10 + 6 sqrt(2)) / 7.
pub const BETA_KNEE: f64 = 2.64078286976379855;

/// Leftmost admissible u for root searches on (0, 1).
pub(crate) const U_EPS: f64 = 1e-12;

const TANGENT_TOL: f64 = 1e-9;
const NONHYP_TOL: f64 = 1e-9;

/// One cell of the parameter-space partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// β ≤ r(1+γ): θ = Ψ(u) has no positive solution.
    NoPositiveFp,
    A0,
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
    A10,
    A11,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::NoPositiveFp => write!(f, "no-positive-fixed-point"),
            other => write!(f, "{other:?}"),
        }
    }
}

/// Region assignment for one parameter triple. `boundary_with` is set
/// when the triple lies within a 1e-12 relative band of a deciding
/// threshold (e.g. β = 4r), recording the adjoining region; the primary
/// `region` keeps the closed-inequality assignment so exact threshold
/// hits stay deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub region: Region,
    pub boundary_with: Option<Region>,
}

impl RegionLabel {
    pub fn is_boundary(&self) -> bool {
        self.boundary_with.is_some()
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.boundary_with {
            Some(other) => write!(f, "{} (boundary with {})", self.region, other),
            None => write!(f, "{}", self.region),
        }
    }
}

fn beta_t1(r: f64, g: f64) -> f64 {
    // 4rγ(1+γ)/(γ²+4γ-3), the u2 >= 1 threshold; only meaningful where
    // the denominator is positive (γ > sqrt(7)-2)
    4.0 * r * g * (1.0 + g) / (g * g + 4.0 * g - 3.0)
}

fn beta_t2(r: f64, g: f64) -> f64 {
    // 2rγ(1+γ)²/(γ²+2γ-1), the h(1) = 0 threshold (γ > sqrt(2)-1)
    2.0 * r * g * (1.0 + g) * (1.0 + g) / (g * g + 2.0 * g - 1.0)
}

fn classify_tree(r: f64, gamma: f64, beta: f64) -> Region {
    if beta <= r * (1.0 + gamma) {
        return Region::NoPositiveFp;
    }
    if beta <= BETA_KNEE * r {
        // h' has no real roots; Ψ strictly increasing
        return Region::A0;
    }
    let g = gamma;
    if g <= SQRT2_M1 {
        return if beta <= 4.0 * r { Region::A5 } else { Region::A10 };
    }
    if g <= SQRT7_M2 {
        if beta <= 4.0 * r {
            return Region::A5;
        }
        return if beta < beta_t2(r, g) { Region::A11 } else { Region::A8 };
    }
    if g < 1.0 {
        if beta <= 4.0 * r {
            return Region::A5;
        }
        if beta < beta_t2(r, g) {
            return Region::A11;
        }
        return if beta < beta_t1(r, g) { Region::A9 } else { Region::A3 };
    }
    if g == 1.0 {
        // T1 = T2 = 4r here; the unique-point bullet takes the tie
        return if beta <= 4.0 * r { Region::A5 } else { Region::A3 };
    }
    if g <= GAMMA_KNEE {
        if beta < beta_t1(r, g) {
            return Region::A6;
        }
        return if beta <= beta_t2(r, g) { Region::A1 } else { Region::A4 };
    }
    if g < SQRT3 {
        if beta < beta_t1(r, g) {
            return Region::A7;
        }
        return if beta <= beta_t2(r, g) { Region::A1 } else { Region::A4 };
    }
    if beta <= beta_t2(r, g) {
        Region::A2
    } else {
        Region::A4
    }
}

/// Assign the parameter triple (r, γ, β) to its region (θ is ignored).
pub fn classify_region(p: &Params) -> RegionLabel {
    let (r, g, b) = (p.r(), p.gamma(), p.beta());
    let region = classify_tree(r, g, b);
    // flag 1e-12-relative proximity to any deciding surface by re-classifying
    // at nudged parameters
    let mut boundary_with = None;
    let db = 2e-12 * b.abs().max(1.0);
    let dg = 2e-12 * g.abs().max(1.0);
    for (gp, bp) in [(g, b - db), (g, b + db), (g - dg, b), (g + dg, b)] {
        if gp <= 0.0 || bp <= 0.0 {
            continue;
        }
        let other = classify_tree(r, gp, bp);
        if other != region {
            boundary_with = Some(other);
            break;
        }
    }
    RegionLabel { region, boundary_with }
}

/// Roots of h inside (0,1), ascending: the critical points û1 (< û2) of
/// Ψ. Zero, one, or two of them exist.
pub fn psi_critical_points(p: &Params) -> Vec<f64> {
    // h' is a quadratic; its roots split (0,1) into monotone pieces of h
    let a = 3.0 * p.beta();
    let b = 4.0 * (p.r() - p.beta()) * p.gamma();
    let c = (4.0 * p.r() - p.beta()) * p.gamma() * p.gamma();
    let disc = b * b - 4.0 * a * c;
    let mut cuts = vec![U_EPS];
    if disc > 0.0 {
        let s = disc.sqrt();
        for x in [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)] {
            if x > U_EPS && x < 1.0 {
                cuts.push(x);
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    }
    cuts.push(1.0);

    let scale = h_scale(p);
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (h_poly(lo, p), h_poly(hi, p));
        if flo == 0.0 {
            if lo > U_EPS {
                roots.push(lo);
            }
        } else if flo * fhi < 0.0 {
            roots.push(bracketed_root(|u| h_poly(u, p), lo, hi, 1e-15, 1e-13 * scale));
        }
    }
    debug_assert!(roots.iter().all(|&u| h_poly(u, p).abs() <= 1e-10 * scale));
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    roots
}

fn h_scale(p: &Params) -> f64 {
    let g = p.gamma();
    p.beta()
        .max(2.0 * (p.beta() - p.r()).abs() * g)
        .max((4.0 * p.r() - p.beta()).abs() * g * g)
        .max(2.0 * p.r() * g * g * g)
        .max(1.0)
}

/// Predicted number of positive fixed points and which case fired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FpPrediction {
    pub count: usize,
    pub branch: String,
    /// θ is within the tangency band of some Ψ(û); the count includes a
    /// double root.
    pub tangent: bool,
}

fn tangent_band(theta: f64) -> f64 {
    TANGENT_TOL * theta.abs().max(1.0)
}

/// Count positive fixed points for the full parameter set by comparing θ
/// against the extrema of Ψ on (0,1).
pub fn predict_fp_count(p: &Params) -> FpPrediction {
    let label = classify_region(p);
    if label.region == Region::NoPositiveFp {
        return FpPrediction {
            count: 0,
            branch: "no-positive-fixed-point".into(),
            tangent: false,
        };
    }
    let theta = p.theta();
    let psi1 = psi_unchecked(1.0, p);
    let crits = psi_critical_points(p);
    let band = tangent_band(theta);

    match crits.len() {
        0 => {
            // Ψ strictly increasing toward Ψ(1)
            if theta < psi1 - band {
                FpPrediction { count: 1, branch: "unique: theta below Psi(1)".into(), tangent: false }
            } else {
                FpPrediction {
                    count: 0,
                    branch: "outside-theorem: theta at or above Psi(1)".into(),
                    tangent: false,
                }
            }
        }
        1 => {
            // local max at û1, then decreasing toward Ψ(1) < Ψ(û1)
            let pm = psi_unchecked(crits[0], p);
            if (theta - pm).abs() <= band {
                FpPrediction { count: 1, branch: "tangent at u-hat-1".into(), tangent: true }
            } else if theta < psi1 - band {
                FpPrediction { count: 1, branch: "unique: theta below Psi(1)".into(), tangent: false }
            } else if theta > psi1 + band && theta < pm {
                FpPrediction {
                    count: 2,
                    branch: "two: theta between Psi(1) and Psi(u-hat-1)".into(),
                    tangent: false,
                }
            } else if (theta - psi1).abs() <= band {
                // root merging into (1,0); only the branch below û1 counts
                FpPrediction {
                    count: 1,
                    branch: "outside-theorem: theta at Psi(1)".into(),
                    tangent: false,
                }
            } else {
                FpPrediction {
                    count: 0,
                    branch: "outside-theorem: theta above Psi(u-hat-1)".into(),
                    tangent: false,
                }
            }
        }
        _ => {
            // max at û1, min at û2, rising again toward Ψ(1)
            let pm1 = psi_unchecked(crits[0], p);
            let pm2 = psi_unchecked(crits[1], p);
            let t1 = (theta - pm1).abs() <= band;
            let t2 = (theta - pm2).abs() <= band;
            if t1 || t2 {
                let mut count = 0;
                if t1 {
                    count += 1; // double root at û1
                    if pm2 + band < theta && theta < psi1 - band {
                        count += 1; // plus a crossing on (û2, 1)
                    }
                } else {
                    count += 1; // double root at û2
                    if theta < pm1 - band {
                        count += 1; // plus a crossing on (0, û1)
                    }
                }
                let site = if t1 { "u-hat-1" } else { "u-hat-2" };
                return FpPrediction {
                    count,
                    branch: format!("tangent at {site}"),
                    tangent: true,
                };
            }
            let mut count = 0;
            if theta < pm1 {
                count += 1; // rising branch (0, û1)
            }
            if theta > pm2 && theta < pm1 {
                count += 1; // falling branch (û1, û2)
            }
            if theta > pm2 && theta < psi1 - band {
                count += 1; // rising branch (û2, 1)
            } else if (theta - psi1).abs() <= band && theta > pm2 {
                // merging into (1,0): open interval, not counted
                return FpPrediction {
                    count,
                    branch: "outside-theorem: theta at Psi(1)".into(),
                    tangent: false,
                };
            }
            let branch = match count {
                3 => "three: theta between Psi(u-hat-2) and min(Psi(u-hat-1), Psi(1))".to_string(),
                2 => "two: theta between Psi(1) and Psi(u-hat-1)".to_string(),
                1 if theta < pm2 => "unique: theta below Psi(u-hat-2)".to_string(),
                1 => "unique: theta between Psi(u-hat-1) and Psi(1)".to_string(),
                _ => "outside-theorem: theta above all branches".to_string(),
            };
            FpPrediction { count, branch, tangent: false }
        }
    }
}

/// Fixed-point type by eigenvalue moduli relative to the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StabilityTag {
    Attracting,
    Repelling,
    Saddle,
    NonHyperbolic,
}

impl fmt::Display for StabilityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StabilityTag::Attracting => "attracting",
            StabilityTag::Repelling => "repelling",
            StabilityTag::Saddle => "saddle",
            StabilityTag::NonHyperbolic => "nonhyperbolic",
        };
        write!(f, "{s}")
    }
}

/// Unit-circle certificates of F(λ) = λ² - pλ + q: the values F(1),
/// F(-1) and the product of roots q.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificates {
    pub f_plus_1: f64,
    pub f_minus_1: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityClass {
    pub tag: StabilityTag,
    #[serde(with = "crate::serde_complex::complex_pair")]
    pub eigenvalues: (Complex64, Complex64),
    pub certificates: Certificates,
    /// Whether the certificate-based tag agrees with the tag recomputed
    /// from raw eigenvalue moduli.
    pub certificate_agrees: bool,
}

/// Tag from the root-location certificates of λ² - pλ + q.
fn tag_from_certificates(tr: f64, det: f64) -> StabilityTag {
    let f1 = 1.0 - tr + det;
    let fm1 = 1.0 + tr + det;
    let scale = 1.0_f64.max(tr.abs()).max(det.abs());
    let tol = NONHYP_TOL * scale;
    if f1.abs() <= tol || fm1.abs() <= tol {
        return StabilityTag::NonHyperbolic; // root at +1 or -1
    }
    if f1 < 0.0 {
        // one root in (1, inf)
        return if fm1 > 0.0 { StabilityTag::Saddle } else { StabilityTag::Repelling };
    }
    if fm1 < 0.0 {
        return StabilityTag::Saddle;
    }
    if (det - 1.0).abs() <= NONHYP_TOL {
        return StabilityTag::NonHyperbolic; // conjugate pair on the unit circle
    }
    if det < 1.0 {
        StabilityTag::Attracting
    } else {
        StabilityTag::Repelling
    }
}

fn tag_from_moduli(l1: Complex64, l2: Complex64) -> StabilityTag {
    let (m1, m2) = (l1.norm(), l2.norm());
    if (m1 - 1.0).abs() <= NONHYP_TOL || (m2 - 1.0).abs() <= NONHYP_TOL {
        StabilityTag::NonHyperbolic
    } else if m1 < 1.0 && m2 < 1.0 {
        StabilityTag::Attracting
    } else if m1 > 1.0 && m2 > 1.0 {
        StabilityTag::Repelling
    } else {
        StabilityTag::Saddle
    }
}

pub(crate) fn stability_from_trace_det(tr: f64, det: f64) -> StabilityClass {
    let disc = tr * tr - 4.0 * det;
    let eigenvalues = if disc >= 0.0 {
        let s = disc.sqrt();
        (Complex64::new((tr - s) / 2.0, 0.0), Complex64::new((tr + s) / 2.0, 0.0))
    } else {
        let s = (-disc).sqrt() / 2.0;
        (Complex64::new(tr / 2.0, -s), Complex64::new(tr / 2.0, s))
    };
    let cert_tag = tag_from_certificates(tr, det);
    let eig_tag = tag_from_moduli(eigenvalues.0, eigenvalues.1);
    StabilityClass {
        tag: cert_tag,
        eigenvalues,
        certificates: Certificates {
            f_plus_1: 1.0 - tr + det,
            f_minus_1: 1.0 + tr + det,
            q: det,
        },
        certificate_agrees: cert_tag == eig_tag || near_unit_circle(eigenvalues),
    }
}

fn near_unit_circle(e: (Complex64, Complex64)) -> bool {
    // disagreements inside a thin band around |λ| = 1 are tolerance
    // artifacts, not diagnostics
    (e.0.norm() - 1.0).abs() <= 10.0 * NONHYP_TOL || (e.1.norm() - 1.0).abs() <= 10.0 * NONHYP_TOL
}

/// Classify a positive (on-curve) fixed point at u.
///
/// The certificate logic follows the branch the root lies on: F(1,u) > 0
/// (outer branches) resolves through q(u), F(1,u) < 0 (middle branch)
/// through F(-1,u), and F(1,u) ≈ 0 is a tangency with eigenvalue 1.
pub fn classify_positive(u: f64, p: &Params) -> Result<StabilityClass> {
    let (pu, qu) = pq(u, p);
    let class = stability_from_trace_det(pu, qu);
    if !class.certificate_agrees {
        let (m1, m2) = (class.eigenvalues.0.norm(), class.eigenvalues.1.norm());
        return Err(Error::CertificateMismatch {
            u,
            detail: format!(
                "certificates give {:?} but moduli are ({m1}, {m2})",
                class.tag
            ),
        });
    }
    Ok(class)
}

/// Stability of the two boundary fixed points ((0,0), (1,0)).
pub fn classify_boundary(p: &Params) -> (StabilityClass, StabilityClass) {
    let j0 = jacobian_general(State::raw(0.0, 0.0), p);
    let j1 = jacobian_general(State::raw(1.0, 0.0), p);
    (
        stability_from_trace_det(j0.trace(), j0.det()),
        stability_from_trace_det(j1.trace(), j1.det()),
    )
}

/// Which equilibrium a `FixedPoint` is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FpKind {
    Origin,
    /// (1, 0)
    Boundary,
    E1,
    E2,
    E3,
}

impl fmt::Display for FpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FpKind::Origin => write!(f, "origin"),
            FpKind::Boundary => write!(f, "boundary(1,0)"),
            other => write!(f, "{other:?}"),
        }
    }
}

/// A located equilibrium with its classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub u: f64,
    pub v: f64,
    /// max-norm of map_step(fp) - fp
    pub residual: f64,
    pub kind: FpKind,
    pub stability: StabilityClass,
    /// θ sits in the tangency band of Ψ(û): this is a double root.
    pub tangent: bool,
}

impl FixedPoint {
    pub fn state(&self) -> State {
        State::raw(self.u, self.v)
    }

    pub fn is_positive(&self) -> bool {
        matches!(self.kind, FpKind::E1 | FpKind::E2 | FpKind::E3)
    }
}

fn residual_at(u: f64, v: f64, p: &Params) -> f64 {
    let s1 = map_step(State::raw(u, v), p);
    (s1.u - u).abs().max((s1.v - v).abs())
}

/// Roots of Ψ(u) = θ on (0,1), each refined to |Ψ(u)-θ| ≤ 1e-10·max(1,θ).
/// Tangent double roots (θ within 1e-9 of Ψ(û)) are returned once,
/// flagged in the second tuple slot.
pub(crate) fn positive_roots(p: &Params) -> Vec<(f64, bool)> {
    let theta = p.theta();
    let band = tangent_band(theta);
    let ftol = 1e-10 * theta.abs().max(1.0);
    let crits = psi_critical_points(p);
    let f = |u: f64| psi_unchecked(u, p) - theta;

    let mut roots: Vec<(f64, bool)> = Vec::new();
    let mut cuts = vec![U_EPS];
    for &c in &crits {
        if (psi_unchecked(c, p) - theta).abs() <= band {
            roots.push((c, true));
            // widen a window around the tangency so the flat top is not
            // re-detected as two crossings
            let mut w = 1e-8;
            while w < 0.25 && f(c - w).abs().min(f(c + w).abs()) <= 10.0 * band {
                w *= 2.0;
            }
            cuts.push((c - w).max(U_EPS));
            cuts.push((c + w).min(1.0));
        } else {
            cuts.push(c);
        }
    }
    cuts.push(1.0);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut skip_next_start = false;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if skip_next_start {
            skip_next_start = false;
        }
        if hi - lo < 4.0 * U_EPS {
            continue;
        }
        // drop the excluded window around a tangency
        if roots.iter().any(|&(c, t)| t && c > lo && c < hi) {
            continue;
        }
        let (flo, fhi) = (f(lo), f(hi));
        if flo == 0.0 && lo > U_EPS {
            roots.push((lo, false));
        } else if flo * fhi < 0.0 {
            roots.push((bracketed_root(f, lo, hi, 1e-15, ftol), false));
        }
    }
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    roots.dedup_by(|a, b| (a.0 - b.0).abs() <= 1e-10);
    debug_assert!(roots.iter().all(|&(u, t)| t || f(u).abs() <= ftol));
    roots
}

/// All fixed points for the parameter set: the origin, (1,0), and every
/// positive root of Ψ(u) = θ with kinds E1/E2/E3 in increasing u.
///
/// The located count is cross-checked against `predict_fp_count`; a
/// disagreement is reported as an error, never reconciled silently.
pub fn find_fixed_points(p: &Params) -> Result<Vec<FixedPoint>> {
    let (origin_class, boundary_class) = classify_boundary(p);
    let mut out = vec![
        FixedPoint {
            u: 0.0,
            v: 0.0,
            residual: 0.0,
            kind: FpKind::Origin,
            stability: origin_class,
            tangent: false,
        },
        FixedPoint {
            u: 1.0,
            v: 0.0,
            residual: 0.0,
            kind: FpKind::Boundary,
            stability: boundary_class,
            tangent: false,
        },
    ];

    let roots = positive_roots(p);
    let prediction = predict_fp_count(p);
    if roots.len() != prediction.count {
        return Err(Error::CountMismatch {
            predicted: prediction.count,
            found: roots.len(),
            branch: prediction.branch,
        });
    }

    let kinds = [FpKind::E1, FpKind::E2, FpKind::E3];
    for (i, &(u, tangent)) in roots.iter().enumerate() {
        let v = curve_v(u, p);
        out.push(FixedPoint {
            u,
            v,
            residual: residual_at(u, v, p),
            kind: kinds[i.min(2)],
            stability: classify_positive(u, p)?,
            tangent,
        });
    }
    Ok(out)
}
