//! The Gaussian parameterization of the two-user MAC-with-feedback scheme:
//! validated parameters, the correlation-shaping pair (xi1, xi2), the full
//! linear-Gaussian system over two consecutive blocks, closed-form rate
//! bounds, and an independent covariance oracle that evaluates the same
//! bounds directly as conditional mutual informations on that system.

use crate::info::{InfoError, LinearGaussianSystem, VarSet};
use crate::terms::{bounds_from_terms, MacMiTerms, RegionBounds, REGION_TOL};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no real correlation-shaping pair: lambda {lambda} exceeds its bound {lambda_max}")]
    NoRealSolution { lambda: f64, lambda_max: f64 },
    #[error("term `{term}` diverges at this parameter corner: {source}")]
    DegenerateTerm {
        term: &'static str,
        source: InfoError,
    },
    #[error(transparent)]
    Info(#[from] InfoError),
}

/// Variance of a per-user feedback quantization noise; `Infinite` removes the
/// corresponding private feedback signal entirely (common-feedback mode).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseVar {
    Finite(f64),
    Infinite,
}

impl NoiseVar {
    pub fn is_finite(&self) -> bool {
        matches!(self, NoiseVar::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            NoiseVar::Finite(v) => Some(*v),
            NoiseVar::Infinite => None,
        }
    }
}

/// The knobs of the Gaussian scheme. Powers and variances are linear (not
/// dB); `rfb` is the feedback budget in bits and may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    /// Per-user transmit power.
    pub p: f64,
    /// Channel noise variance.
    pub sigma2: f64,
    /// Power share of the private resolution layer inside the U layer.
    pub alpha: f64,
    /// Power share of the correlated resolution layer inside the U layer.
    pub beta: f64,
    /// Fraction of power spent on resolution (vs fresh data).
    pub theta: f64,
    /// Target correlation of the cross-transmitter resolution pair.
    pub lambda: f64,
    /// Variance of the common feedback quantization noise.
    pub sigma12_sq: f64,
    /// Variance of transmitter 1's private feedback quantization noise.
    pub sigma1_sq: NoiseVar,
    /// Variance of transmitter 2's private feedback quantization noise.
    pub sigma2_sq: NoiseVar,
    /// Feedback rate budget in bits.
    pub rfb: f64,
}

/// Slack admitted on alpha + beta <= 1 so that gridded shares like
/// 0.35 + 0.65 survive rounding.
const SHARE_TOL: f64 = 1e-9;

impl SchemeParams {
    pub fn common_feedback(&self) -> bool {
        !self.sigma1_sq.is_finite()
    }

    /// Power share of the common resolution layer.
    pub fn gamma(&self) -> f64 {
        (1.0 - self.alpha - self.beta).max(0.0)
    }

    fn validate_structural(&self) -> Result<(), SchemeError> {
        let bad = |m: String| Err(SchemeError::InvalidParams(m));
        if !(self.p > 0.0 && self.p.is_finite()) {
            return bad(format!("p must be positive and finite, got {}", self.p));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return bad(format!("sigma2 must be positive, got {}", self.sigma2));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha must lie in [0,1], got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return bad(format!("beta must lie in [0,1], got {}", self.beta));
        }
        if self.alpha + self.beta > 1.0 + SHARE_TOL {
            return bad(format!(
                "alpha + beta must not exceed 1, got {}",
                self.alpha + self.beta
            ));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return bad(format!("theta must lie in [0,1], got {}", self.theta));
        }
        if !(self.sigma12_sq > 0.0 && self.sigma12_sq.is_finite()) {
            return bad(format!("sigma12_sq must be positive, got {}", self.sigma12_sq));
        }
        match (self.sigma1_sq, self.sigma2_sq) {
            (NoiseVar::Finite(a), NoiseVar::Finite(b)) => {
                if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                    return bad("sigma1_sq and sigma2_sq must be positive".into());
                }
            }
            (NoiseVar::Infinite, NoiseVar::Infinite) => {}
            _ => {
                return bad(
                    "sigma1_sq and sigma2_sq must be both finite or both infinite".into(),
                )
            }
        }
        if self.rfb.is_nan() || self.rfb < 0.0 {
            return bad(format!("rfb must be nonnegative, got {}", self.rfb));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        self.validate_structural()?;
        if !(-1.0..=1.0).contains(&self.lambda) {
            return Err(SchemeError::InvalidParams(format!(
                "lambda must lie in [-1,1], got {}",
                self.lambda
            )));
        }
        let lmax = lambda_max(self)?;
        if self.lambda > lmax + 1e-12 {
            return Err(SchemeError::NoRealSolution {
                lambda: self.lambda,
                lambda_max: lmax,
            });
        }
        Ok(())
    }
}

/// C(x) = 1/2 log2(1 + x), the Gaussian capacity function in bits.
pub fn cap(x: f64) -> f64 {
    debug_assert!(x >= -1e-12, "cap of negative ratio {x}");
    0.5 * (1.0 + x.max(0.0)).log2()
}

/// Upper bound on the admissible correlation `lambda`; always in [0, 1).
pub fn lambda_max(p: &SchemeParams) -> Result<f64, SchemeError> {
    p.validate_structural()?;
    Ok(p.p * p.theta * p.alpha
        / (p.sigma2 + p.sigma12_sq + p.p * p.alpha * p.theta + 2.0 * p.p * (1.0 - p.theta)))
}

/// The correlation-shaping coefficients for the cross-transmitter pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiPair {
    pub xi1: f64,
    pub xi2: f64,
}

/// Sign of the square root taken for `xi2`; either branch yields the same
/// rate region, the canonical one keeps outputs deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiBranch {
    Canonical,
    Alternate,
}

/// Coupling coefficient between a private-resolution coordinate and the
/// standardized summary of the previous block's common information.
fn coupling(p: &SchemeParams) -> f64 {
    let d = p.sigma2
        + p.sigma12_sq
        + 2.0 * p.p * p.alpha * p.theta
        + 2.0 * p.p * (1.0 - p.theta);
    (p.p * p.theta * p.alpha / d).sqrt()
}

pub fn solve_xi(p: &SchemeParams) -> Result<XiPair, SchemeError> {
    solve_xi_branch(p, XiBranch::Canonical)
}

pub fn solve_xi_branch(p: &SchemeParams, branch: XiBranch) -> Result<XiPair, SchemeError> {
    p.validate()?;
    let g = coupling(p);
    let xi1 = (1.0 + p.lambda).sqrt();
    let mut disc = (1.0 + p.lambda) * g * g - p.lambda;
    if disc < 0.0 {
        if disc > -1e-12 {
            disc = 0.0; // lambda exactly at its bound, up to rounding
        } else {
            return Err(SchemeError::NoRealSolution {
                lambda: p.lambda,
                lambda_max: lambda_max(p)?,
            });
        }
    }
    let root = disc.sqrt();
    let xi2 = match branch {
        XiBranch::Canonical => -xi1 * g + root,
        XiBranch::Alternate => -xi1 * g - root,
    };
    Ok(XiPair { xi1, xi2 })
}

/// Residuals of the two moment conditions the pair must satisfy:
/// |xi1² + xi2² + 2 xi1 xi2 g - 1| and |-2 xi1 xi2 g - xi2² - lambda|.
pub fn xi_residuals(p: &SchemeParams, xi: &XiPair) -> (f64, f64) {
    let g = coupling(p);
    let unit = xi.xi1 * xi.xi1 + xi.xi2 * xi.xi2 + 2.0 * xi.xi1 * xi.xi2 * g - 1.0;
    let corr = -2.0 * xi.xi1 * xi.xi2 * g - xi.xi2 * xi.xi2 - p.lambda;
    (unit.abs(), corr.abs())
}

// ---------------------------------------------------------------------------
// System construction
// ---------------------------------------------------------------------------

/// Previous-block common information shared by both transmitters.
const PREV_COMMON: [&str; 4] = ["prevW", "prevV1", "prevV2", "prevY12"];

pub fn build_system(p: &SchemeParams) -> Result<LinearGaussianSystem, SchemeError> {
    build_system_with_xi(p, &solve_xi(p)?)
}

/// Construct the two-block system: the previous block drawn from the scheme's
/// single-block law, the current resolution pair (V1, V2) computed from the
/// previous block, and the current block rebuilt around that pair.
pub fn build_system_with_xi(
    p: &SchemeParams,
    xi: &XiPair,
) -> Result<LinearGaussianSystem, SchemeError> {
    p.validate()?;
    let common = p.common_feedback();
    let a = p.alpha.sqrt();
    let b = p.beta.sqrt();
    let c = p.gamma().sqrt();
    let data = (p.p * (1.0 - p.theta)).sqrt();
    let res = (p.p * p.theta).sqrt();

    let mut s = LinearGaussianSystem::new();
    let block = |s: &mut LinearGaussianSystem, pre: &str| -> Result<(), InfoError> {
        let n = |base: &str| format!("{pre}{base}");
        for i in ["1", "2"] {
            s.add_variable(&n(&format!("U{i}")), &[
                (&n(&format!("A{i}")), a),
                (&n(&format!("V{i}")), b),
                (&n("W"), c),
            ], 0.0)?;
            s.add_variable(&n(&format!("X{i}")), &[
                (&n(&format!("I{i}")), data),
                (&n(&format!("U{i}")), res),
            ], 0.0)?;
        }
        s.add_variable(&n("Y"), &[
            (&n("X1"), 1.0),
            (&n("X2"), 1.0),
            (&n("Z"), 1.0),
        ], 0.0)?;
        s.add_variable(&n("Y12"), &[(&n("Y"), 1.0), (&n("Z12"), 1.0)], 0.0)?;
        if s.contains(&n("Z1")) {
            s.add_variable(&n("Y1"), &[(&n("Y"), 1.0), (&n("Z1"), 1.0)], 0.0)?;
            s.add_variable(&n("Y2"), &[(&n("Y"), 1.0), (&n("Z2"), 1.0)], 0.0)?;
        }
        Ok(())
    };
    let noises = |s: &mut LinearGaussianSystem, pre: &str| -> Result<(), InfoError> {
        let n = |base: &str| format!("{pre}{base}");
        for v in ["W", "A1", "A2", "I1", "I2"] {
            s.add_variable(&n(v), &[], 1.0)?;
        }
        s.add_variable(&n("Z"), &[], p.sigma2)?;
        s.add_variable(&n("Z12"), &[], p.sigma12_sq)?;
        if !common {
            s.add_variable(&n("Z1"), &[], p.sigma1_sq.finite().unwrap())?;
            s.add_variable(&n("Z2"), &[], p.sigma2_sq.finite().unwrap())?;
        }
        Ok(())
    };

    // previous block: its resolution pair is drawn directly with the target
    // correlation
    noises(&mut s, "prev")?;
    s.add_variable("prevV1", &[], 1.0)?;
    s.add_variable(
        "prevV2",
        &[("prevV1", p.lambda)],
        (1.0 - p.lambda * p.lambda).max(0.0),
    )?;
    block(&mut s, "prev")?;

    // standardized summary of the previous block's common information: the
    // common feedback signal with its known resolution components removed
    let d_norm = (p.sigma2
        + p.sigma12_sq
        + 2.0 * p.p * p.alpha * p.theta
        + 2.0 * p.p * (1.0 - p.theta))
        .sqrt();
    let vcoef = -(p.beta * p.theta * p.p).sqrt() / d_norm;
    let wcoef = -2.0 * (p.gamma() * p.theta * p.p).sqrt() / d_norm;
    s.add_variable("F", &[
        ("prevY12", 1.0 / d_norm),
        ("prevV1", vcoef),
        ("prevV2", vcoef),
        ("prevW", wcoef),
    ], 0.0)?;

    // current resolution pair, computed from the previous block
    s.add_variable("V1", &[("prevA1", xi.xi1), ("F", xi.xi2)], 0.0)?;
    s.add_variable("V2", &[("prevA2", -xi.xi1), ("F", -xi.xi2)], 0.0)?;

    // current block around that pair
    noises(&mut s, "")?;
    block(&mut s, "")?;

    debug_assert!((s.variance_of("V1").unwrap() - 1.0).abs() < 1e-10);
    debug_assert!((s.variance_of("V2").unwrap() - 1.0).abs() < 1e-10);
    debug_assert!((s.covariance_of("V1", "V2").unwrap() - p.lambda).abs() < 1e-10);
    debug_assert!((s.variance_of("F").unwrap() - 1.0).abs() < 1e-10);
    Ok(s)
}

// ---------------------------------------------------------------------------
// Covariance oracle
// ---------------------------------------------------------------------------

/// Evaluate the sixteen region terms on a constructed system by direct
/// conditional-mutual-information queries. Whether the per-user feedback
/// signals exist is read off the system itself.
pub fn oracle_terms_on(s: &LinearGaussianSystem) -> Result<MacMiTerms, SchemeError> {
    let common = !s.contains("Y1");
    let v = |names: &[&str]| VarSet::of(names.iter().copied());
    let mi = |term: &'static str, a: &[&str], b: &[&str], c: &[&str]| {
        s.cond_mi(&v(a), &v(b), &v(c)).map_err(|e| match e {
            InfoError::InfiniteMutualInformation { .. } => {
                SchemeError::DegenerateTerm { term, source: e }
            }
            other => SchemeError::Info(other),
        })
    };
    fn prev<'a>(extra: &[&'a str]) -> Vec<&'a str> {
        PREV_COMMON.iter().copied().chain(extra.iter().copied()).collect()
    }

    let t_fb1 = mi("t_fb1", &["Y12"], &["Y"], &["W", "X1"])?;
    let t_fb2 = mi("t_fb2", &["Y12"], &["Y"], &["W", "X2"])?;
    let (t_fba, t_fbb) = if common {
        (0.0, 0.0)
    } else {
        (
            mi("t_fba", &["Y"], &["Y1"], &["Y12", "X1", "W"])?,
            mi("t_fbb", &["Y"], &["Y2"], &["Y12", "X2", "W"])?,
        )
    };
    // Receiver-side decoding of the fresh-data layer. The receiver produced
    // the feedback signals itself, so they carry no information beyond Y and
    // do not enter the conditioning.
    let d1 = mi("d1", &["X1"], &["Y"], &["W", "V1", "V2", "U1", "U2", "X2"])?;
    let d2 = mi("d2", &["X2"], &["Y"], &["W", "V1", "V2", "U1", "U2", "X1"])?;
    let d12 = mi("d12", &["X1", "X2"], &["Y"], &["W", "V1", "V2", "U1", "U2"])?;
    let (a1, a2) = if common {
        (
            mi("a1", &["U1"], &["Y12"], &prev(&["prevU2", "prevX2", "W", "V2", "U2", "X2"]))?,
            mi("a2", &["U2"], &["Y12"], &prev(&["prevU1", "prevX1", "W", "V1", "U1", "X1"]))?,
        )
    } else {
        (
            mi(
                "a1",
                &["U1"],
                &["Y2", "Y12"],
                &prev(&["prevY2", "prevU2", "prevX2", "W", "V2", "U2", "X2"]),
            )?,
            mi(
                "a2",
                &["U2"],
                &["Y1", "Y12"],
                &prev(&["prevY1", "prevU1", "prevX1", "W", "V1", "U1", "X1"]),
            )?,
        )
    };
    let b_w = mi("b_w", &["W"], &["Y"], &["prevW", "prevY"])?;
    let b_u1 = mi("b_u1", &["U1"], &["Y"], &["W", "V1", "V2", "U2"])?;
    let b_u2 = mi("b_u2", &["U2"], &["Y"], &["W", "V1", "V2", "U1"])?;
    let b_u12 = mi("b_u12", &["U1", "U2"], &["Y"], &["W", "V1", "V2"])?;
    let (b_v1, b_v2, b_v12) = if common {
        (
            mi("b_v1", &["V1"], &["Y"], &prev(&["prevY", "prevU2", "W", "V2"]))?,
            mi("b_v2", &["V2"], &["Y"], &prev(&["prevY", "prevU1", "W", "V1"]))?,
            mi("b_v12", &["V1", "V2"], &["Y"], &prev(&["prevY", "W"]))?,
        )
    } else {
        (
            mi(
                "b_v1",
                &["V1"],
                &["Y"],
                &prev(&["prevY", "prevY1", "prevY2", "prevU2", "W", "V2"]),
            )?,
            mi(
                "b_v2",
                &["V2"],
                &["Y"],
                &prev(&["prevY", "prevY1", "prevY2", "prevU1", "W", "V1"]),
            )?,
            mi(
                "b_v12",
                &["V1", "V2"],
                &["Y"],
                &prev(&["prevY", "prevY1", "prevY2", "W"]),
            )?,
        )
    };
    Ok(MacMiTerms {
        t_fb1,
        t_fb2,
        t_fba,
        t_fbb,
        d1,
        d2,
        d12,
        a1,
        a2,
        b_w,
        b_u1,
        b_u2,
        b_v1,
        b_v2,
        b_u12,
        b_v12,
    })
}

pub fn oracle_terms(p: &SchemeParams) -> Result<MacMiTerms, SchemeError> {
    oracle_terms_on(&build_system(p)?)
}

/// The region terms and bounds evaluated by the covariance oracle.
pub fn oracle_bounds(p: &SchemeParams) -> Result<(MacMiTerms, RegionBounds), SchemeError> {
    let t = oracle_terms(p)?;
    Ok((t, bounds_from_terms(&t)))
}

// ---------------------------------------------------------------------------
// Closed-form bounds
// ---------------------------------------------------------------------------

/// Exact transcription of the printed closed-form rate bounds of the
/// Gaussian scheme. In common-feedback mode the blended quantization
/// variance degenerates to `sigma12_sq` and the per-user feedback cost
/// terms vanish.
pub fn closed_form_bounds(p: &SchemeParams) -> Result<RegionBounds, SchemeError> {
    p.validate()?;
    let (pw, s2, al, be, th, lam, s12) =
        (p.p, p.sigma2, p.alpha, p.beta, p.theta, p.lambda, p.sigma12_sq);
    let gam = p.gamma();
    let fresh = pw * (1.0 - th);
    let e = 1.0 - gam * th;

    let mut fb = cap(
        s2 / s12 + pw / s12
            - (pw * th / s12) * (gam + be * be * th * lam * lam / e),
    );
    let shaped = pw * (e * e - be * be * th * th * lam * lam);
    for so in [p.sigma1_sq, p.sigma2_sq] {
        if let Some(so) = so.finite() {
            fb += cap((s12 / so) * (s2 * e + shaped) / ((s2 + s12) * e + shaped));
        }
    }

    // blended variance of the two feedback looks available to a transmitter
    let blend = |so: NoiseVar| match so.finite() {
        Some(so) => s12 * so / (s12 + so),
        None => s12,
    };
    let cross_route = |so: NoiseVar| {
        let h = blend(so);
        cap(pw * th * al / (s2 + h + fresh)
            + pw * th * be * (1.0 + lam) / (h + s2 + fresh + pw * al * th))
    };
    let receiver_route = cap(al * pw * th / (2.0 * fresh + s2))
        + cap(4.0 * pw * th * gam / (s2 + 2.0 * fresh + 2.0 * pw * th * (al + be * (1.0 + lam))))
        + cap(
            be * pw * th * (2.0 * fresh + s2) * (1.0 + lam)
                / ((2.0 * al * pw * th + 2.0 * fresh + s2) * (s2 + 2.0 * fresh + al * pw * th)),
        );
    // user 1's cross route is decoded at transmitter 2, hence its noise
    let m1 = cross_route(p.sigma2_sq).min(receiver_route);
    let m2 = cross_route(p.sigma1_sq).min(receiver_route);

    let direct = cap(fresh / s2);
    let direct_sum = cap(2.0 * fresh / s2);
    Ok(RegionBounds {
        r1: direct + m1,
        r2: direct + m2,
        sum_a: direct_sum
            + cap(2.0 * pw * th * (2.0 - al - be * (1.0 - lam)) / (2.0 * fresh + s2)),
        sum_b: direct_sum + m1 + m2,
        fb_cost: fb,
    })
}

/// True iff the feedback budget covers the scheme's feedback cost.
pub fn feedback_feasible(p: &SchemeParams) -> Result<bool, SchemeError> {
    Ok(p.rfb >= closed_form_bounds(p)?.fb_cost - REGION_TOL)
}

// ---------------------------------------------------------------------------
// Decoupled family (independent blocks, no correlated resolution pair)
// ---------------------------------------------------------------------------

/// Parameters of the reduced scheme without the cross-block resolution pair;
/// consecutive blocks are independent and all terms are single-block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoupledParams {
    pub p: f64,
    pub sigma2: f64,
    pub alpha: f64,
    pub theta: f64,
    pub sigma12_sq: f64,
    pub sigma1_sq: NoiseVar,
    pub sigma2_sq: NoiseVar,
    pub rfb: f64,
}

impl DecoupledParams {
    fn as_scheme(&self) -> SchemeParams {
        SchemeParams {
            p: self.p,
            sigma2: self.sigma2,
            alpha: self.alpha,
            beta: 0.0,
            theta: self.theta,
            lambda: 0.0,
            sigma12_sq: self.sigma12_sq,
            sigma1_sq: self.sigma1_sq,
            sigma2_sq: self.sigma2_sq,
            rfb: self.rfb,
        }
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        self.as_scheme().validate_structural()
    }
}

/// Single-block system for the decoupled family.
fn build_decoupled_system(p: &DecoupledParams) -> Result<LinearGaussianSystem, SchemeError> {
    p.validate()?;
    let common = !p.sigma1_sq.is_finite();
    let a = p.alpha.sqrt();
    let w = (1.0 - p.alpha).max(0.0).sqrt();
    let data = (p.p * (1.0 - p.theta)).sqrt();
    let res = (p.p * p.theta).sqrt();
    let mut s = LinearGaussianSystem::new();
    for v in ["W", "A1", "A2", "I1", "I2"] {
        s.add_variable(v, &[], 1.0)?;
    }
    s.add_variable("Z", &[], p.sigma2)?;
    s.add_variable("Z12", &[], p.sigma12_sq)?;
    if !common {
        s.add_variable("Z1", &[], p.sigma1_sq.finite().unwrap())?;
        s.add_variable("Z2", &[], p.sigma2_sq.finite().unwrap())?;
    }
    for i in ["1", "2"] {
        s.add_variable(&format!("U{i}"), &[(&format!("A{i}") as &str, a), ("W", w)], 0.0)?;
        s.add_variable(&format!("X{i}"), &[
            (&format!("I{i}") as &str, data),
            (&format!("U{i}") as &str, res),
        ], 0.0)?;
    }
    s.add_variable("Y", &[("X1", 1.0), ("X2", 1.0), ("Z", 1.0)], 0.0)?;
    s.add_variable("Y12", &[("Y", 1.0), ("Z12", 1.0)], 0.0)?;
    if !common {
        s.add_variable("Y1", &[("Y", 1.0), ("Z1", 1.0)], 0.0)?;
        s.add_variable("Y2", &[("Y", 1.0), ("Z2", 1.0)], 0.0)?;
    }
    Ok(s)
}

/// Rate bounds of the decoupled family: per-user bounds with the two-route
/// minimum, the unconditional sum bound in `sum_a`, the min-sum bound in
/// `sum_b`, and the feedback cost.
pub fn decoupled_bounds(p: &DecoupledParams) -> Result<RegionBounds, SchemeError> {
    let s = build_decoupled_system(p)?;
    let common = !s.contains("Y1");
    let v = |names: &[&str]| VarSet::of(names.iter().copied());
    let mi = |a: &[&str], b: &[&str], c: &[&str]| s.cond_mi(&v(a), &v(b), &v(c));

    let fb1 = mi(&["Y12"], &["Y"], &["W", "X1"])?;
    let fb2 = mi(&["Y12"], &["Y"], &["W", "X2"])?;
    let mut fb = fb1.max(fb2);
    if !common {
        fb += mi(&["Y"], &["Y1"], &["Y12", "X1", "W"])?;
        fb += mi(&["Y"], &["Y2"], &["Y12", "X2", "W"])?;
    }

    let b_w = mi(&["W"], &["Y"], &[])?;
    let cross = |ui: &str, other_x: &str, own_fb: &str| -> Result<f64, InfoError> {
        if common {
            mi(&[ui], &["Y12"], &["W", other_x])
        } else {
            mi(&[ui], &[own_fb, "Y12"], &["W", other_x])
        }
    };
    let m1 = (mi(&["U1"], &["Y"], &["W", "U2"])? + b_w).min(cross("U1", "X2", "Y2")?);
    let m2 = (mi(&["U2"], &["Y"], &["W", "U1"])? + b_w).min(cross("U2", "X1", "Y1")?);

    let d1 = mi(&["X1"], &["Y"], &["W", "U1", "X2"])?;
    let d2 = mi(&["X2"], &["Y"], &["W", "U2", "X1"])?;
    let d12 = mi(&["X1", "X2"], &["Y"], &["W", "U1", "U2"])?;
    Ok(RegionBounds {
        r1: d1 + m1,
        r2: d2 + m2,
        sum_a: mi(&["X1", "X2"], &["Y"], &[])?,
        sum_b: d12 + m1 + m2,
        fb_cost: fb,
    })
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn reference_params(common: bool) -> SchemeParams {
        SchemeParams {
            p: 5.0,
            sigma2: 1.0,
            alpha: 0.3,
            beta: 0.2,
            theta: 0.5,
            lambda: 0.05,
            sigma12_sq: 0.4,
            sigma1_sq: if common { NoiseVar::Infinite } else { NoiseVar::Finite(2.0) },
            sigma2_sq: if common { NoiseVar::Infinite } else { NoiseVar::Finite(3.0) },
            rfb: 2.5,
        }
    }

    #[test]
    fn lambda_max_examples() {
        let mut p = reference_params(true);
        p.theta = 0.0;
        p.lambda = 0.0;
        assert_eq!(lambda_max(&p).unwrap(), 0.0);
        p.theta = 0.5;
        p.alpha = 0.0;
        assert_eq!(lambda_max(&p).unwrap(), 0.0);
        let p = reference_params(true);
        // 0.75 / 7.15, by substitution
        let want = 0.75 / 7.15;
        assert!((lambda_max(&p).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.104895).abs() < 1e-6);
    }

    #[test]
    fn xi_canonical_and_residuals() {
        let mut p = reference_params(true);
        p.lambda = 0.0;
        let xi = solve_xi(&p).unwrap();
        assert!((xi.xi1 - 1.0).abs() < 1e-15);
        assert!(xi.xi2.abs() < 1e-15);

        let p = reference_params(false);
        for branch in [XiBranch::Canonical, XiBranch::Alternate] {
            let xi = solve_xi_branch(&p, branch).unwrap();
            let (r1, r2) = xi_residuals(&p, &xi);
            assert!(r1 < 1e-12 && r2 < 1e-12, "residuals {r1} {r2}");
        }
    }

    #[test]
    fn xi_rejects_lambda_beyond_bound() {
        let mut p = reference_params(true);
        p.lambda = lambda_max(&p).unwrap() + 1e-3;
        assert!(matches!(
            solve_xi(&p),
            Err(SchemeError::NoRealSolution { .. })
        ));
        // exactly at the bound the discriminant vanishes and both branches
        // coincide
        p.lambda = lambda_max(&p).unwrap();
        let a = solve_xi_branch(&p, XiBranch::Canonical).unwrap();
        let b = solve_xi_branch(&p, XiBranch::Alternate).unwrap();
        assert!((a.xi2 - b.xi2).abs() < 1e-9);
    }

    #[test]
    fn constructed_pair_moments() {
        for common in [true, false] {
            let p = reference_params(common);
            let s = build_system(&p).unwrap();
            assert!((s.variance_of("V1").unwrap() - 1.0).abs() < 1e-10);
            assert!((s.variance_of("V2").unwrap() - 1.0).abs() < 1e-10);
            assert!((s.covariance_of("V1", "V2").unwrap() - p.lambda).abs() < 1e-10);
            assert!((s.variance_of("F").unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_lambda_pair_is_pure_private_coordinate() {
        let mut p = reference_params(true);
        p.lambda = 0.0;
        let s = build_system(&p).unwrap();
        let v1 = s.row("V1").unwrap();
        let a1 = s.row("prevA1").unwrap();
        for (x, y) in v1.iter().zip(a1) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn full_resolution_power_keeps_transmit_power() {
        let mut p = reference_params(true);
        p.theta = 1.0;
        p.alpha = 0.4;
        p.beta = 0.6;
        p.lambda = 0.0;
        let s = build_system(&p).unwrap();
        assert!((s.variance_of("X1").unwrap() - p.p).abs() < 1e-10);
        assert!((s.variance_of("X2").unwrap() - p.p).abs() < 1e-10);
    }

    #[test]
    fn theta_zero_closed_form_is_the_nofeedback_pentagon() {
        let mut p = reference_params(true);
        p.theta = 0.0;
        p.lambda = 0.0;
        let b = closed_form_bounds(&p).unwrap();
        assert!((b.r1 - cap(5.0)).abs() < 1e-10);
        assert!((b.r2 - cap(5.0)).abs() < 1e-10);
        assert!((b.sum_a - cap(10.0)).abs() < 1e-10);
        assert!((b.sum_b - cap(10.0)).abs() < 1e-10);
        // common feedback at sigma12_sq = 0.4: cost C(15) = 2 bits exactly
        assert!((b.fb_cost - 2.0).abs() < 1e-12);
    }

    #[test]
    fn theta_zero_oracle_terms() {
        let mut p = reference_params(true);
        p.theta = 0.0;
        p.lambda = 0.0;
        let t = oracle_terms(&p).unwrap();
        assert!((t.d1 - cap(5.0)).abs() < 1e-10);
        assert!(t.a1.abs() < 1e-10);
        assert!(t.b_u1.abs() < 1e-10);
    }

    #[test]
    fn no_correlated_layer_kills_the_v_terms() {
        let mut p = reference_params(false);
        p.beta = 0.0;
        p.lambda = 0.0;
        let t = oracle_terms(&p).unwrap();
        assert!(t.b_v1.abs() < 1e-10);
        assert!(t.b_v2.abs() < 1e-10);
        assert!(t.b_v12.abs() < 1e-10);
    }

    #[test]
    fn oracle_matches_closed_form_at_reference_points() {
        for common in [true, false] {
            let p = reference_params(common);
            let (_, ob) = oracle_bounds(&p).unwrap();
            let cf = closed_form_bounds(&p).unwrap();
            assert!(
                ob.max_abs_delta(&cf) < 1e-6,
                "common={common}: {:?} vs {:?}",
                ob,
                cf
            );
        }
    }

    #[test]
    fn frozen_reference_values() {
        // Frozen from an independent dense-covariance evaluation of the same
        // system (numpy); guards against silent regressions in either route.
        let t = oracle_terms(&reference_params(true)).unwrap();
        let expect = [
            (t.t_fb1, 1.843226918633907),
            (t.d1, 0.903677461028802),
            (t.d12, 1.292481250360578),
            (t.a1, 0.192141480382167),
            (t.b_w, 0.332148263233987),
            (t.b_u1, 0.084962500721156),
            (t.b_v1, 0.043542808381856),
            (t.b_u12, 0.160964047443681),
            (t.b_v12, 0.094516912195009),
        ];
        for (got, want) in expect {
            assert!((got - want).abs() < 1e-9, "got {got}, want {want}");
        }
        let b = closed_form_bounds(&reference_params(true)).unwrap();
        assert!((b.r1 - 1.095818941410970).abs() < 1e-9);
        assert!((b.sum_a - 1.880110473233255).abs() < 1e-9);
        assert!((b.sum_b - 1.676764211124913).abs() < 1e-9);
        assert!((b.fb_cost - 1.843226918633907).abs() < 1e-9);

        let tf = oracle_terms(&reference_params(false)).unwrap();
        assert!((tf.t_fba - 0.122118099021435).abs() < 1e-9);
        assert!((tf.t_fbb - 0.083664197048515).abs() < 1e-9);
        assert!((tf.a1 - 0.194074924172224).abs() < 1e-9);
        assert!((tf.a2 - 0.194892221183864).abs() < 1e-9);
        let bf = closed_form_bounds(&reference_params(false)).unwrap();
        assert!((bf.r1 - 1.097752385201026).abs() < 1e-9);
        assert!((bf.r2 - 1.098569682212667).abs() < 1e-9);
        assert!((bf.fb_cost - 2.049009214703857).abs() < 1e-9);
    }

    #[test]
    fn xi_branch_does_not_change_terms() {
        let p = reference_params(false);
        let ta = oracle_terms_on(
            &build_system_with_xi(&p, &solve_xi_branch(&p, XiBranch::Canonical).unwrap()).unwrap(),
        )
        .unwrap();
        let tb = oracle_terms_on(
            &build_system_with_xi(&p, &solve_xi_branch(&p, XiBranch::Alternate).unwrap()).unwrap(),
        )
        .unwrap();
        assert!(ta.max_abs_delta(&tb) < 1e-9);
    }

    #[test]
    fn feedback_feasibility_boundary() {
        let mut p = reference_params(true);
        p.theta = 0.0;
        p.lambda = 0.0;
        p.rfb = 2.0;
        assert!(feedback_feasible(&p).unwrap());
        p.rfb = 1.9;
        assert!(!feedback_feasible(&p).unwrap());
        p.rfb = f64::INFINITY;
        assert!(feedback_feasible(&p).unwrap());
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = reference_params(true);
        p.alpha = 0.7;
        p.beta = 0.4;
        assert!(matches!(
            closed_form_bounds(&p),
            Err(SchemeError::InvalidParams(_))
        ));
        let mut p = reference_params(true);
        p.sigma1_sq = NoiseVar::Finite(1.0); // mixed modes
        assert!(p.validate().is_err());
    }

    #[test]
    fn decoupled_theta_zero_is_the_pentagon() {
        let p = DecoupledParams {
            p: 5.0,
            sigma2: 1.0,
            alpha: 0.4,
            theta: 0.0,
            sigma12_sq: 0.4,
            sigma1_sq: NoiseVar::Infinite,
            sigma2_sq: NoiseVar::Infinite,
            rfb: 2.0,
        };
        let b = decoupled_bounds(&p).unwrap();
        assert!((b.r1 - cap(5.0)).abs() < 1e-10);
        assert!((b.r2 - cap(5.0)).abs() < 1e-10);
        assert!((b.sum_a - cap(10.0)).abs() < 1e-10);
        assert!((b.sum_b - cap(10.0)).abs() < 1e-10);
    }
}
