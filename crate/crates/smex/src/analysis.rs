//! Closed-form well-posedness and regularity diagnostics.
//!
//! For the disk-in-annulus geometry the problem is well-posed exactly when
//! the contrast avoids -1 and the forbidden set
//! S = { -(1 - 4^-n) / (1 + 4^-n) }, whose elements accumulate at -1. For
//! the pi/4 corner geometry it is well-posed iff the contrast lies outside
//! [-3, -1], and the limit regularity exponent is the smallest positive root
//! of the dispersion relation kappa = -tan(3 lambda pi / 4) / tan(lambda pi / 4).

use std::f64::consts::FRAC_PI_4;
use std::fmt;

/// Elements of the forbidden set beyond this index are within 2^-61 of -1
/// and are subsumed by the kappa = -1 test for any practical tolerance.
const ANNULUS_TAIL_CUT: usize = 30;

#[derive(Clone, Debug, PartialEq)]
pub enum AnalysisError {
    ZeroContrast,
    Pole { lambda: f64 },
    CriticalInterval { kappa: f64 },
    NoRoot { kappa: f64 },
    OutOfRange { what: &'static str, value: f64 },
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalysisError::ZeroContrast => write!(f, "contrast must be nonzero"),
            AnalysisError::Pole { lambda } => {
                write!(f, "dispersion relation has a pole at lambda = {lambda}")
            }
            AnalysisError::CriticalInterval { kappa } => {
                write!(f, "contrast {kappa} lies in the critical interval [-3, -1]")
            }
            AnalysisError::NoRoot { kappa } => write!(
                f,
                "no dispersion root in (0, 1] for contrast {kappa}; the regularity exponent is not determined by this search"
            ),
            AnalysisError::OutOfRange { what, value } => {
                write!(f, "{what} = {value} out of range")
            }
        }
    }
}

impl std::error::Error for AnalysisError {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeometryTag {
    Annulus,
    CornerQuarterPi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    WellPosed,
    IllPosed,
    CriticalInterval,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::WellPosed => write!(f, "well-posed"),
            Verdict::IllPosed => write!(f, "ill-posed"),
            Verdict::CriticalInterval => write!(f, "critical-interval"),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct WellPosednessVerdict {
    pub geometry: GeometryTag,
    pub verdict: Verdict,
    /// Distance to the nearest forbidden value (annulus) or critical-interval
    /// endpoint (corner).
    pub distance: f64,
    /// Limit regularity exponent, when the geometry determines one.
    pub regularity_exponent: Option<f64>,
}

/// First `n_max` forbidden annulus contrasts, in increasing n. The values
/// decrease strictly from -3/5 toward -1.
pub fn annulus_forbidden_set(n_max: usize) -> Vec<f64> {
    (1..=n_max)
        .map(|n| {
            let q = 0.25f64.powi(n as i32);
            -(1.0 - q) / (1.0 + q)
        })
        .collect()
}

/// Decides annulus well-posedness for a contrast, treating values within
/// `tol` of -1 or of a forbidden value as ill-posed.
pub fn annulus_wellposed(kappa: f64, tol: f64) -> Result<WellPosednessVerdict, AnalysisError> {
    if kappa == 0.0 {
        return Err(AnalysisError::ZeroContrast);
    }
    if !(tol > 0.0) {
        return Err(AnalysisError::OutOfRange {
            what: "tolerance",
            value: tol,
        });
    }
    // distance to {-1} and to the explicit head of S; the tail past the cut
    // lies within 2^-61 of -1, so the -1 test covers it
    let mut distance = (kappa + 1.0).abs();
    for s in annulus_forbidden_set(ANNULUS_TAIL_CUT) {
        distance = distance.min((kappa - s).abs());
    }
    let verdict = if distance <= tol {
        Verdict::IllPosed
    } else {
        Verdict::WellPosed
    };
    Ok(WellPosednessVerdict {
        geometry: GeometryTag::Annulus,
        verdict,
        distance,
        regularity_exponent: None,
    })
}

/// The corner dispersion value -tan(3 lambda pi/4) / tan(lambda pi/4).
/// Reports lambda -> 0 by its analytic limit -3; signals poles (lambda =
/// 2/3 in the search range) rather than returning huge values.
pub fn corner_dispersion(lambda: f64) -> Result<f64, AnalysisError> {
    if lambda.abs() < 1e-12 {
        return Ok(-3.0);
    }
    let u = lambda * FRAC_PI_4;
    let three_u = 3.0 * u;
    // tan(3u) poles where cos(3u) = 0 (lambda = 2/3 in the search range);
    // tan(u) vanishes at lambda = 4m, removable only at lambda = 0
    if three_u.cos().abs() < 1e-12 {
        return Err(AnalysisError::Pole { lambda });
    }
    if u.sin().abs() < 1e-12 && lambda.abs() > 1.0 {
        return Err(AnalysisError::Pole { lambda });
    }
    Ok(-three_u.tan() / u.tan())
}

/// Smallest positive root of the dispersion relation in (0, 1], by bracketed
/// bisection on the pole-separated subintervals (0, 2/3) and (2/3, 1], to
/// absolute tolerance 1e-10. Roots beyond 1 are irrelevant to the regularity
/// exponent, which lies in (0, 1]; when no root exists in the searched range
/// that is reported, not guessed.
pub fn corner_lambda0(kappa: f64) -> Result<f64, AnalysisError> {
    if kappa == 0.0 {
        return Err(AnalysisError::ZeroContrast);
    }
    if (-3.0..=-1.0).contains(&kappa) {
        return Err(AnalysisError::CriticalInterval { kappa });
    }
    let g = |lambda: f64| corner_dispersion(lambda).map(|v| v - kappa);

    const SAMPLES: usize = 4096;
    let pole = 2.0 / 3.0;
    let eps = 1e-9;
    for (lo, hi) in [(eps, pole - eps), (pole + eps, 1.0)] {
        let mut prev: Option<(f64, f64)> = None;
        for i in 0..=SAMPLES {
            let x = lo + (hi - lo) * (i as f64 / SAMPLES as f64);
            let Ok(v) = g(x) else { continue };
            if v.abs() <= 1e-12 * (1.0 + kappa.abs()) {
                return Ok(x);
            }
            if let Some((px, pv)) = prev {
                if pv.signum() != v.signum() {
                    return Ok(bisect(&g, px, x));
                }
            }
            prev = Some((x, v));
        }
    }
    Err(AnalysisError::NoRoot { kappa })
}

fn bisect(g: &impl Fn(f64) -> Result<f64, AnalysisError>, mut lo: f64, mut hi: f64) -> f64 {
    let mut glo = g(lo).expect("bracket endpoint is not a pole");
    for _ in 0..200 {
        if hi - lo <= 1e-10 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let gm = match g(mid) {
            Ok(v) => v,
            Err(_) => {
                // nudge off a pole; the bracket stays valid
                lo = mid + 1e-14;
                continue;
            }
        };
        if gm == 0.0 {
            return mid;
        }
        if glo.signum() != gm.signum() {
            hi = mid;
        } else {
            lo = mid;
            glo = gm;
        }
    }
    0.5 * (lo + hi)
}

/// Corner well-posedness: well-posed iff the contrast avoids [-3, -1]. For
/// well-posed contrasts the limit regularity exponent (the smallest
/// dispersion root) is attached when the root search finds one.
pub fn corner_wellposed(kappa: f64) -> Result<WellPosednessVerdict, AnalysisError> {
    if kappa == 0.0 {
        return Err(AnalysisError::ZeroContrast);
    }
    let distance = (kappa + 3.0).abs().min((kappa + 1.0).abs());
    if (-3.0..=-1.0).contains(&kappa) {
        return Ok(WellPosednessVerdict {
            geometry: GeometryTag::CornerQuarterPi,
            verdict: Verdict::CriticalInterval,
            distance,
            regularity_exponent: None,
        });
    }
    Ok(WellPosednessVerdict {
        geometry: GeometryTag::CornerQuarterPi,
        verdict: Verdict::WellPosed,
        distance,
        regularity_exponent: corner_lambda0(kappa).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forbidden_set_head_values() {
        let s = annulus_forbidden_set(2);
        assert!((s[0] - (-3.0 / 5.0)).abs() < 1e-15);
        assert!((s[1] - (-15.0 / 17.0)).abs() < 1e-15);
    }

    #[test]
    fn forbidden_set_decreases_toward_minus_one() {
        let s = annulus_forbidden_set(20);
        for w in s.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(s.iter().all(|&v| (-1.0..=-0.6).contains(&v)));
        assert!((s[19] + 1.0).abs() < 1e-11);
    }

    #[test]
    fn annulus_verdicts() {
        assert_eq!(
            annulus_wellposed(-2.0, 1e-9).unwrap().verdict,
            Verdict::WellPosed
        );
        assert_eq!(
            annulus_wellposed(-0.6, 1e-9).unwrap().verdict,
            Verdict::IllPosed
        );
        assert_eq!(
            annulus_wellposed(3.0, 1e-9).unwrap().verdict,
            Verdict::WellPosed
        );
        assert_eq!(
            annulus_wellposed(-1.0, 1e-9).unwrap().verdict,
            Verdict::IllPosed
        );
        assert!(annulus_wellposed(0.0, 1e-9).is_err());
        let v = annulus_wellposed(-2.0, 1e-9).unwrap();
        assert!((v.distance - 1.0).abs() < 1e-12, "distance to -1 is 1");
    }

    #[test]
    fn dispersion_values() {
        assert!((corner_dispersion(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(corner_dispersion(1e-13).unwrap(), -3.0);
        assert!((corner_dispersion(1e-7).unwrap() + 3.0).abs() < 1e-10);
        assert!(matches!(
            corner_dispersion(2.0 / 3.0),
            Err(AnalysisError::Pole { .. })
        ));
    }

    /// Closed-form oracle: the triple-angle identity turns the dispersion
    /// relation into (3 - t^2)/(1 - 3 t^2) = -kappa with t = tan(lambda pi/4),
    /// so lambda0 = (4/pi) atan(sqrt((-kappa - 3)/(-3 kappa - 1))) whenever
    /// the radicand is nonnegative.
    fn lambda0_closed_form(kappa: f64) -> f64 {
        let k = -kappa;
        (4.0 / std::f64::consts::PI) * ((k - 3.0) / (3.0 * k - 1.0)).sqrt().atan()
    }

    #[test]
    fn lambda0_matches_the_closed_form_oracle() {
        for kappa in [-10.0, -5.0, -3.5, -3.1, 1.0, 2.0, 7.5] {
            let l = corner_lambda0(kappa).unwrap();
            let oracle = lambda0_closed_form(kappa);
            assert!((l - oracle).abs() < 1e-10, "kappa {kappa}: {l} vs {oracle}");
        }
    }

    #[test]
    fn lambda0_reference_contrasts() {
        // kappa = -5: the closed form gives 0.46011 (0.458 solves the
        // relation only to kappa = -4.965); kappa = -3.1 rounds to 0.139
        let l5 = corner_lambda0(-5.0).unwrap();
        assert!((l5 - 0.460107).abs() < 1e-3, "lambda0(-5) = {l5}");
        let l31 = corner_lambda0(-3.1).unwrap();
        assert!((l31 - 0.139).abs() < 1e-3, "lambda0(-3.1) = {l31}");
        let l1 = corner_lambda0(1.0).unwrap();
        assert!((l1 - 1.0).abs() < 1e-10, "lambda0(1) = {l1}");
    }

    #[test]
    fn lambda0_solves_the_dispersion_relation() {
        for kappa in [-10.0, -5.0, -3.5, -3.1, 1.0, 2.0, 7.5] {
            let l = corner_lambda0(kappa).unwrap();
            let back = corner_dispersion(l).unwrap();
            assert!(
                (back - kappa).abs() < 1e-8 * (1.0 + kappa.abs()),
                "kappa {kappa}: {back}"
            );
        }
    }

    #[test]
    fn lambda0_decreases_toward_the_critical_interval() {
        let kappas = [-10.0, -5.0, -3.5, -3.1];
        let roots: Vec<f64> = kappas.iter().map(|&k| corner_lambda0(k).unwrap()).collect();
        for w in roots.windows(2) {
            assert!(w[1] < w[0], "roots not decreasing: {roots:?}");
        }
    }

    #[test]
    fn lambda0_errors() {
        assert!(matches!(
            corner_lambda0(-2.0),
            Err(AnalysisError::CriticalInterval { .. })
        ));
        assert!(matches!(
            corner_lambda0(-3.0),
            Err(AnalysisError::CriticalInterval { .. })
        ));
        assert!(matches!(
            corner_lambda0(-0.5),
            Err(AnalysisError::NoRoot { .. })
        ));
        assert!(matches!(
            corner_lambda0(0.0),
            Err(AnalysisError::ZeroContrast)
        ));
    }

    #[test]
    fn corner_verdicts() {
        let v = corner_wellposed(-5.0).unwrap();
        assert_eq!(v.verdict, Verdict::WellPosed);
        assert!((v.regularity_exponent.unwrap() - 0.460107).abs() < 1e-3);
        assert!((v.distance - 2.0).abs() < 1e-12);

        assert_eq!(
            corner_wellposed(-2.0).unwrap().verdict,
            Verdict::CriticalInterval
        );
        assert_eq!(
            corner_wellposed(-3.0).unwrap().verdict,
            Verdict::CriticalInterval
        );
        assert_eq!(
            corner_wellposed(-1.0).unwrap().verdict,
            Verdict::CriticalInterval
        );
        assert!(corner_wellposed(0.0).is_err());
    }

    #[test]
    fn dispersion_at_its_roots_is_consistent_with_dispersion_eval() {
        // structural invariant: evaluate-then-invert round trip
        for kappa in [-6.0, -4.0, 1.5] {
            let l = corner_lambda0(kappa).unwrap();
            assert!(l > 0.0 && l <= 1.0 + 1e-12);
            assert!((corner_dispersion(l).unwrap() - kappa).abs() < 1e-8 * (1.0 + kappa.abs()));
        }
    }
}
