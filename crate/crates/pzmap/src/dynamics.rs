//! Orbit iteration, attractor classification, θ-sweeps, invariant-set
//! sampling and Lyapunov-descent checks.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::control::{controlled_step, Gains, Target};
use crate::equilibria::{find_fixed_points, FixedPoint, FpKind};
use crate::error::{Error, Result};
use crate::model::{map_step, Params, State};

/// Orbits are terminated once they leave this box.
pub const ESCAPE_BOX: f64 = 1e6;

/// An iterated trajectory. `points[k+1]` is exactly one step applied to
/// `points[k]`, so a replay with the same inputs is bit-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub initial: State,
    pub params: Params,
    pub gains: Option<(Gains, Target)>,
    pub points: Vec<State>,
    /// First index outside the escape box, or — for uncontrolled
    /// orbits — outside the nonnegative quadrant. Controlled orbits may
    /// legitimately track targets with v̄ < 0, so only the box applies
    /// to them.
    pub escape_step: Option<usize>,
}

impl Orbit {
    pub fn last(&self) -> State {
        *self.points.last().unwrap()
    }
}

/// Iterate `n` steps from `initial`, stopping early on escape.
pub fn iterate(initial: State, n: usize, p: &Params, control: Option<(Gains, Target)>) -> Orbit {
    let mut points = Vec::with_capacity(n + 1);
    points.push(initial);
    let mut s = initial;
    let mut escape_step = None;
    for k in 1..=n {
        s = match &control {
            Some((g, t)) => controlled_step(s, *g, t, p),
            None => map_step(s, p),
        };
        points.push(s);
        let out_of_box = !s.u.is_finite()
            || !s.v.is_finite()
            || s.u.abs() > ESCAPE_BOX
            || s.v.abs() > ESCAPE_BOX;
        let out_of_quadrant = control.is_none() && (s.u < 0.0 || s.v < 0.0);
        if out_of_box || out_of_quadrant {
            escape_step = Some(k);
            break;
        }
    }
    Orbit { initial, params: *p, gains: control, points, escape_step }
}

/// What an orbit settles onto.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// Converged (tail distance < 1e-8) to the named fixed point.
    FixedPoint(FpKind),
    /// Bounded rotating tail around a positive fixed point.
    InvariantCurve,
    /// Converged to (1, 0).
    BoundaryFp,
    /// Left the escape box or the nonnegative quadrant.
    Escaped,
    Undetermined,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::FixedPoint(k) => write!(f, "fixed-point({k})"),
            Verdict::InvariantCurve => write!(f, "invariant-curve"),
            Verdict::BoundaryFp => write!(f, "boundary-fp"),
            Verdict::Escaped => write!(f, "escaped"),
            Verdict::Undetermined => write!(f, "undetermined"),
        }
    }
}

/// Min/max/mean of each coordinate over the classified tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailStats {
    pub u_min: f64,
    pub u_max: f64,
    pub u_mean: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub v_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttractorSummary {
    pub verdict: Verdict,
    pub tail_stats: TailStats,
    /// Distance to the reference fixed point along the tail (empty when
    /// no positive fixed point exists).
    pub radius_series: Vec<f64>,
}

const FP_TOL: f64 = 1e-8;
const CURVE_RADIUS_MIN: f64 = 1e-4;
const CURVE_RADIUS_MAX: f64 = 1.0;
const CURVE_MIN_SWEEP: f64 = 4.0 * PI;
/// Minimum orbit length for invariant-curve detection.
const CURVE_MIN_LEN: usize = 2000;

/// Classify the asymptotic behavior of an orbit against the known fixed
/// points of its parameter set.
///
/// An invariant curve must keep the tail at radius in
/// [1e-4, 1] around a positive fixed point while sweeping more than 4π
/// of angle; the rotation requirement rules slow spirals out.
pub fn classify_attractor(orbit: &Orbit, known_fps: &[FixedPoint]) -> AttractorSummary {
    let pts = &orbit.points;
    let tail_from = pts.len() - pts.len() / 4;
    let tail = &pts[tail_from.min(pts.len() - 1)..];
    let stats = tail_stats(tail);

    if orbit.escape_step.is_some() {
        return AttractorSummary { verdict: Verdict::Escaped, tail_stats: stats, radius_series: vec![] };
    }

    let last = orbit.last();
    let nearest = known_fps
        .iter()
        .min_by(|a, b| {
            let da = last.dist(&a.state());
            let db = last.dist(&b.state());
            da.partial_cmp(&db).unwrap()
        });

    if let Some(fp) = nearest {
        if last.dist(&fp.state()) < FP_TOL {
            let verdict = match fp.kind {
                FpKind::Boundary => Verdict::BoundaryFp,
                k => Verdict::FixedPoint(k),
            };
            let radius: Vec<f64> = tail.iter().map(|s| s.dist(&fp.state())).collect();
            return AttractorSummary { verdict, tail_stats: stats, radius_series: radius };
        }
    }

    // curve detection relative to the positive fixed point nearest to the
    // tail barycenter
    let center = known_fps
        .iter()
        .filter(|f| f.is_positive())
        .min_by(|a, b| {
            let da = (a.u - stats.u_mean).hypot(a.v - stats.v_mean);
            let db = (b.u - stats.u_mean).hypot(b.v - stats.v_mean);
            da.partial_cmp(&db).unwrap()
        });
    let Some(center) = center else {
        return AttractorSummary { verdict: Verdict::Undetermined, tail_stats: stats, radius_series: vec![] };
    };
    let c = center.state();
    let radius: Vec<f64> = tail.iter().map(|s| s.dist(&c)).collect();

    if pts.len() >= CURVE_MIN_LEN {
        let rmin = radius.iter().cloned().fold(f64::INFINITY, f64::min);
        let rmax = radius.iter().cloned().fold(0.0, f64::max);
        if rmin >= CURVE_RADIUS_MIN && rmax <= CURVE_RADIUS_MAX {
            let mut sweep = 0.0;
            let mut prev = (tail[0].v - c.v).atan2(tail[0].u - c.u);
            for s in &tail[1..] {
                let ang = (s.v - c.v).atan2(s.u - c.u);
                let mut d = ang - prev;
                if d > PI {
                    d -= 2.0 * PI;
                } else if d < -PI {
                    d += 2.0 * PI;
                }
                sweep += d;
                prev = ang;
            }
            if sweep.abs() >= CURVE_MIN_SWEEP {
                return AttractorSummary {
                    verdict: Verdict::InvariantCurve,
                    tail_stats: stats,
                    radius_series: radius,
                };
            }
        }
    }
    AttractorSummary { verdict: Verdict::Undetermined, tail_stats: stats, radius_series: radius }
}

fn tail_stats(tail: &[State]) -> TailStats {
    let mut st = TailStats {
        u_min: f64::INFINITY,
        u_max: f64::NEG_INFINITY,
        u_mean: 0.0,
        v_min: f64::INFINITY,
        v_max: f64::NEG_INFINITY,
        v_mean: 0.0,
    };
    for s in tail {
        st.u_min = st.u_min.min(s.u);
        st.u_max = st.u_max.max(s.u);
        st.u_mean += s.u;
        st.v_min = st.v_min.min(s.v);
        st.v_max = st.v_max.max(s.v);
        st.v_mean += s.v;
    }
    let n = tail.len().max(1) as f64;
    st.u_mean /= n;
    st.v_mean /= n;
    st
}

/// One θ-slice of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    /// Post-burn-in u values (most recent last), capped by `tail_keep`.
    pub u_tail: Vec<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub steps: usize,
    pub initial: State,
    pub n: usize,
    /// Fraction of the orbit discarded before recording (0..1).
    pub burn_in: f64,
    /// Cap on recorded tail samples per θ (None keeps everything).
    pub tail_keep: Option<usize>,
}

/// Bifurcation-diagram sweep: iterate at each θ on the grid, record the
/// post-burn-in u values and the attractor verdict.
pub fn sweep_theta(p: &Params, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if !(spec.theta_lo > 0.0) || spec.steps < 2 || spec.theta_hi < spec.theta_lo {
        return Err(Error::Domain(format!(
            "sweep needs 0 < theta_lo <= theta_hi and steps >= 2, got [{}, {}] x {}",
            spec.theta_lo, spec.theta_hi, spec.steps
        )));
    }
    if !(0.0..1.0).contains(&spec.burn_in) {
        return Err(Error::Domain(format!("burn_in must be in [0,1), got {}", spec.burn_in)));
    }
    let mut rows = Vec::with_capacity(spec.steps);
    for i in 0..spec.steps {
        let theta = spec.theta_lo
            + (spec.theta_hi - spec.theta_lo) * (i as f64) / ((spec.steps - 1) as f64);
        let pt = p.with_theta(theta)?;
        // a count mismatch at some grid θ (tangency) should not kill the
        // sweep: classify against boundary points only in that case
        let fps = find_fixed_points(&pt).unwrap_or_default();
        let orbit = iterate(spec.initial, spec.n, &pt, None);
        let summary = classify_attractor(&orbit, &fps);
        let burn = ((orbit.points.len() as f64) * spec.burn_in) as usize;
        let tail = &orbit.points[burn.min(orbit.points.len() - 1)..];
        let keep = spec.tail_keep.unwrap_or(tail.len()).min(tail.len());
        let u_tail: Vec<f64> = tail[tail.len() - keep..].iter().map(|s| s.u).collect();
        rows.push(SweepRow { theta, u_tail, verdict: summary.verdict });
    }
    Ok(rows)
}

/// The invariant sets of the global-stability analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MSet {
    /// γ ≥ 2: 0 ≤ u ≤ 1, 0 ≤ v ≤ (2-u)(γ+u).
    M1,
    /// 1 ≤ γ < 2: [0, 2-γ]×[0, 2γ] ∪ {2-γ < u ≤ 1, v ≤ (2-u)(γ+u)}.
    M2,
}

impl MSet {
    pub fn contains(&self, s: State, gamma: f64, tol: f64) -> bool {
        let f = (2.0 - s.u) * (gamma + s.u);
        match self {
            MSet::M1 => {
                s.u >= -tol && s.u <= 1.0 + tol && s.v >= -tol && s.v <= f + tol
            }
            MSet::M2 => {
                if s.u < -tol || s.u > 1.0 + tol || s.v < -tol {
                    return false;
                }
                if s.u <= 2.0 - gamma {
                    s.v <= 2.0 * gamma + tol
                } else {
                    s.v <= f + tol
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub set: MSet,
    pub samples: usize,
    pub seed: u64,
    /// Sampled points whose image left the set (expected empty).
    pub violations: Vec<(State, State)>,
}

/// Check Lemma-style invariance of M1/M2 by uniform sampling.
///
/// Requires θ < β ≤ r(1+γ), 0 < r ≤ 1, and γ ≥ 2 (M1) or 1 ≤ γ < 2
/// (M2); violated hypotheses are a precondition error, not an empty
/// report.
pub fn invariant_set_check(
    p: &Params,
    which: MSet,
    samples: usize,
    seed: u64,
) -> Result<InvarianceReport> {
    let (r, beta, theta, gamma) = (p.r(), p.beta(), p.theta(), p.gamma());
    if !(theta < beta && beta <= r * (1.0 + gamma)) {
        return Err(Error::HypothesisViolation(format!(
            "need theta < beta <= r(1+gamma); got theta={theta}, beta={beta}, r(1+gamma)={}",
            r * (1.0 + gamma)
        )));
    }
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::HypothesisViolation(format!("need 0 < r <= 1, got r={r}")));
    }
    match which {
        MSet::M1 if gamma < 2.0 => {
            return Err(Error::HypothesisViolation(format!(
                "M1 requires gamma >= 2, got {gamma}"
            )));
        }
        MSet::M2 if !(1.0..2.0).contains(&gamma) => {
            return Err(Error::HypothesisViolation(format!(
                "M2 requires 1 <= gamma < 2, got {gamma}"
            )));
        }
        _ => {}
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // rejection sampling from the bounding box keeps the density uniform
    // over the (non-rectangular) set
    let v_cap = if gamma >= 2.0 {
        2.0 * gamma
    } else {
        ((2.0 + gamma) / 2.0) * ((2.0 + gamma) / 2.0)
    };
    let mut violations = Vec::new();
    let mut accepted = 0usize;
    while accepted < samples {
        let s = State::raw(rng.random::<f64>(), rng.random::<f64>() * v_cap);
        if !which.contains(s, gamma, 0.0) {
            continue;
        }
        accepted += 1;
        let image = map_step(s, p);
        if !which.contains(image, gamma, 1e-12) {
            violations.push((s, image));
        }
    }
    Ok(InvarianceReport { set: which, samples, seed, violations })
}

/// True iff V = v is non-increasing along the whole orbit (each step
/// v may grow by at most 1e-12) and the tail has reached (1, 0) to
/// within 1e-6.
pub fn lyapunov_descent(orbit: &Orbit) -> bool {
    let monotone = orbit
        .points
        .windows(2)
        .all(|w| w[1].v <= w[0].v + 1e-12);
    let target = State::raw(1.0, 0.0);
    monotone && orbit.last().dist(&target) < 1e-6
}
