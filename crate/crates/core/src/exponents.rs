//! Exact exponent calculus for the regularity theory of p,q-growth functionals.
//!
//! Every exponent is held as an exact [`BigRational`]. The integrability
//! exponents `r` and `s` are stored through their reciprocals so that the
//! infinite cases `r = inf`, `s = inf` are ordinary values (`1/inf = 0`) and the
//! limit formulas come out exactly instead of through large sentinels.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Tolerance for classifying a gap margin as lying on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExponentError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("cannot parse exponent {0:?}")]
    Parse(String),
    #[error("Moser ladder does not grow: ratio 2*_s/(2m) = {ratio} <= 1")]
    LadderDivergence { ratio: f64 },
}

/// An extended-real exponent: a finite rational or `+inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtExponent {
    Finite(BigRational),
    Infinite,
}

impl ExtExponent {
    pub fn infinite() -> Self {
        ExtExponent::Infinite
    }

    pub fn from_f64(v: f64) -> Result<Self, ExponentError> {
        if v.is_nan() {
            return Err(ExponentError::Parse("NaN".into()));
        }
        if v == f64::INFINITY {
            return Ok(ExtExponent::Infinite);
        }
        BigRational::from_float(v)
            .map(ExtExponent::Finite)
            .ok_or_else(|| ExponentError::Parse(v.to_string()))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        ExtExponent::Finite(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtExponent::Infinite)
    }

    /// `1/x`, with `1/inf = 0`. Zero has no reciprocal here; callers validate positivity first.
    pub fn reciprocal(&self) -> BigRational {
        match self {
            ExtExponent::Finite(v) => v.recip(),
            ExtExponent::Infinite => BigRational::zero(),
        }
    }

    /// Inverse of [`reciprocal`](Self::reciprocal).
    pub fn from_reciprocal(inv: &BigRational) -> Self {
        if inv.is_zero() {
            ExtExponent::Infinite
        } else {
            ExtExponent::Finite(inv.recip())
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExtExponent::Finite(v) => ratio_to_f64(v),
            ExtExponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for ExtExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtExponent::Finite(v) => write!(f, "{}", ratio_to_f64(v)),
            ExtExponent::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtExponent {
    type Err = ExponentError;

    /// Accepts `inf`/`infinity` (any case, optional `+`), decimals such as
    /// `2.125` or `1e3` (parsed exactly), and fractions such as `7/3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let lower = t.to_ascii_lowercase();
        let lower = lower.strip_prefix('+').unwrap_or(&lower);
        if lower == "inf" || lower == "infinity" {
            return Ok(ExtExponent::Infinite);
        }
        if let Some((n, d)) = t.split_once('/') {
            let n = parse_decimal(n).ok_or_else(|| ExponentError::Parse(s.into()))?;
            let d = parse_decimal(d).ok_or_else(|| ExponentError::Parse(s.into()))?;
            if d.is_zero() {
                return Err(ExponentError::Parse(s.into()));
            }
            return Ok(ExtExponent::Finite(n / d));
        }
        parse_decimal(t)
            .map(ExtExponent::Finite)
            .ok_or_else(|| ExponentError::Parse(s.into()))
    }
}

impl Serialize for ExtExponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtExponent::Finite(v) => serializer.serialize_f64(ratio_to_f64(v)),
            ExtExponent::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtExponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(serde_json::Number),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            // Going through the textual form keeps "2.1" exact.
            Raw::Num(n) => n.to_string().parse().map_err(serde::de::Error::custom),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

pub(crate) fn ratio_to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or_else(|| {
        // Fallback for ratios whose parts overflow f64.
        let n = v.numer().to_f64().unwrap_or(f64::NAN);
        let d = v.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Classification of a profile against the gap condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapClass {
    Regular,
    Boundary,
    Outside,
}

/// The exponent tuple `(p, q, n, r, s)` together with every derived exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentProfile {
    p: BigRational,
    q: BigRational,
    n: u32,
    r_inv: BigRational,
    s_inv: BigRational,
}

impl ExponentProfile {
    /// Validates `p >= 2`, `q >= p`, `n >= 1`, `r > n` (or `r = inf`) and `s >= 1` (or `s = inf`).
    pub fn new(
        p: ExtExponent,
        q: ExtExponent,
        n: u32,
        r: ExtExponent,
        s: ExtExponent,
    ) -> Result<Self, ExponentError> {
        let p = match p {
            ExtExponent::Finite(v) => v,
            ExtExponent::Infinite => return Err(ExponentError::Precondition("p must be finite".into())),
        };
        let q = match q {
            ExtExponent::Finite(v) => v,
            ExtExponent::Infinite => return Err(ExponentError::Precondition("q must be finite".into())),
        };
        if p < rat(2) {
            return Err(ExponentError::Precondition(format!("p >= 2 (got {})", ratio_to_f64(&p))));
        }
        if q < p {
            return Err(ExponentError::Precondition("q >= p".into()));
        }
        if n == 0 {
            return Err(ExponentError::Precondition("n >= 1".into()));
        }
        if let ExtExponent::Finite(rv) = &r {
            if *rv <= rat(n as i64) {
                return Err(ExponentError::Precondition(format!(
                    "r > n (got r = {}, n = {n})",
                    ratio_to_f64(rv)
                )));
            }
        }
        if let ExtExponent::Finite(sv) = &s {
            if *sv < rat(1) {
                return Err(ExponentError::Precondition(format!("s >= 1 (got {})", ratio_to_f64(sv))));
            }
        }
        Ok(Self { p, q, n, r_inv: r.reciprocal(), s_inv: s.reciprocal() })
    }

    /// Convenience constructor from floating-point inputs (`f64::INFINITY` allowed for `r`, `s`).
    pub fn from_f64(p: f64, q: f64, n: u32, r: f64, s: f64) -> Result<Self, ExponentError> {
        Self::new(
            ExtExponent::from_f64(p)?,
            ExtExponent::from_f64(q)?,
            n,
            ExtExponent::from_f64(r)?,
            ExtExponent::from_f64(s)?,
        )
    }

    pub fn p(&self) -> &BigRational {
        &self.p
    }
    pub fn q(&self) -> &BigRational {
        &self.q
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn r(&self) -> ExtExponent {
        ExtExponent::from_reciprocal(&self.r_inv)
    }
    pub fn s(&self) -> ExtExponent {
        ExtExponent::from_reciprocal(&self.s_inv)
    }
    pub fn p_f64(&self) -> f64 {
        ratio_to_f64(&self.p)
    }
    pub fn q_f64(&self) -> f64 {
        ratio_to_f64(&self.q)
    }

    fn n_rat(&self) -> BigRational {
        rat(self.n as i64)
    }

    /// `sigma = ps/(s+1)`; equals `p` when `s = inf`.
    pub fn sigma(&self) -> BigRational {
        &self.p / (rat(1) + &self.s_inv)
    }

    /// Right-hand side of the gap condition, `(s/(s+1))(1 + 1/n - 1/r)`.
    pub fn threshold(&self) -> BigRational {
        (rat(1) + self.n_rat().recip() - &self.r_inv) / (rat(1) + &self.s_inv)
    }

    /// `threshold - q/p`; positive exactly in the regular regime.
    pub fn gap_margin(&self) -> BigRational {
        self.threshold() - &self.q / &self.p
    }

    pub fn classify(&self) -> GapClass {
        let margin = self.gap_margin();
        if margin.is_zero() || ratio_to_f64(&margin).abs() <= BOUNDARY_TOL {
            GapClass::Boundary
        } else if margin.is_positive() {
            GapClass::Regular
        } else {
            GapClass::Outside
        }
    }

    /// `1/r + 1/s < 1/n`, which is also the condition `s > nr/(r-n)`.
    pub fn trudinger(&self) -> bool {
        &self.r_inv + &self.s_inv < self.n_rat().recip()
    }

    /// `2*_s = 2ns/(n(s+1) - 2s)`, or `+inf` when the denominator is not positive
    /// (the Sobolev conjugate of an exponent at least `n`).
    pub fn two_star_s(&self) -> ExtExponent {
        let n = self.n_rat();
        let den = &n - rat(2) + &n * &self.s_inv;
        if den.is_positive() {
            ExtExponent::Finite(rat(2) * n / den)
        } else {
            ExtExponent::Infinite
        }
    }

    /// `m = rs/(rs - 2s - r)`, finite and positive iff `2/r + 1/s < 1`.
    pub fn m(&self) -> Option<BigRational> {
        let den = rat(1) - rat(2) * &self.r_inv - &self.s_inv;
        den.is_positive().then(|| den.recip())
    }

    fn require_regular(&self) -> Result<(), ExponentError> {
        if self.classify() != GapClass::Regular {
            return Err(ExponentError::Precondition(format!(
                "gap condition q/p < (s/(s+1))(1+1/n-1/r) (margin {})",
                ratio_to_f64(&self.gap_margin())
            )));
        }
        Ok(())
    }

    fn require_s_large(&self) -> Result<(), ExponentError> {
        if !self.trudinger() {
            return Err(ExponentError::Precondition("s > nr/(r-n)".into()));
        }
        Ok(())
    }

    fn finite_two_star(&self) -> Result<BigRational, ExponentError> {
        match self.two_star_s() {
            ExtExponent::Finite(v) => Ok(v),
            ExtExponent::Infinite => Err(ExponentError::Precondition(
                "2*_s finite (needs n >= 3, or n = 2 with s < inf)".into(),
            )),
        }
    }

    fn finite_m(&self) -> Result<BigRational, ExponentError> {
        self.m().ok_or_else(|| ExponentError::Precondition("2/r + 1/s < 1 (m finite)".into()))
    }

    /// `theta = (ns(qr - pr + p) + qrn) / (rs(2q - p))`, written with reciprocals as
    /// `n(q - p + p/r + q/s) / (2q - p)`.
    pub fn theta(&self) -> Result<BigRational, ExponentError> {
        self.require_regular()?;
        self.require_s_large()?;
        let n = self.n_rat();
        let num = n * (&self.q - &self.p + &self.p * &self.r_inv + &self.q * &self.s_inv);
        let den = rat(2) * &self.q - &self.p;
        Ok(num / den)
    }

    /// The Hölder exponents `(tau, tau_1, tau_2)` used in the interpolation step.
    pub fn interpolation_exponents(
        &self,
    ) -> Result<(BigRational, BigRational, BigRational), ExponentError> {
        let m = self.finite_m()?;
        let two_star = self.finite_two_star()?;
        let tau = (rat(2) * &self.q - &self.p) * m;
        let tau1 = &self.p * two_star / rat(2);
        let tau2 = self.sigma();
        Ok((tau, tau1, tau2))
    }

    /// `1 - theta tau/tau_1 - (1 - theta) tau/tau_2`, zero in exact arithmetic.
    pub fn interpolation_residual(&self) -> Result<BigRational, ExponentError> {
        let theta = self.theta()?;
        let (tau, tau1, tau2) = self.interpolation_exponents()?;
        Ok(rat(1) - &theta * &tau / tau1 - (rat(1) - theta) * tau / tau2)
    }

    /// `theta (2q - p) / p`, which must stay below one.
    pub fn theta_growth(&self) -> Result<BigRational, ExponentError> {
        Ok(self.theta()? * (rat(2) * &self.q - &self.p) / &self.p)
    }

    /// `2(q-p) 2*_s / (p (2*_s - 2m))`, with its exact limit `2(q-p)/p` when `2*_s = inf`.
    pub fn young_ratio(&self) -> Result<BigRational, ExponentError> {
        let m = self.finite_m()?;
        let diff = &self.q - &self.p;
        match self.two_star_s() {
            ExtExponent::Infinite => Ok(rat(2) * diff / &self.p),
            ExtExponent::Finite(t) => {
                let den = &self.p * (&t - rat(2) * m);
                if !den.is_positive() {
                    return Err(ExponentError::Precondition("2*_s > 2m".into()));
                }
                Ok(rat(2) * diff * t / den)
            }
        }
    }

    /// `2*_s / (2m)`, the geometric growth factor of the Moser exponents.
    pub fn ladder_ratio(&self) -> Result<BigRational, ExponentError> {
        let m = self.finite_m()?;
        let t = self.finite_two_star()?;
        Ok(t / (rat(2) * m))
    }
}

/// Gap classification straight from floating-point inputs.
pub fn gap_classify(p: f64, q: f64, n: u32, r: f64, s: f64) -> Result<GapClass, ExponentError> {
    Ok(ExponentProfile::from_f64(p, q, n, r, s)?.classify())
}

/// Whether `1/r + 1/s < 1/n`.
pub fn gap_implies_trudinger(n: u32, r: &ExtExponent, s: &ExtExponent) -> bool {
    r.reciprocal() + s.reciprocal() < rat(n as i64).recip()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleWindow {
    /// `|x|^{-alpha} in L^s`, i.e. `alpha < 1/s`.
    pub a_inv_integrable: bool,
    /// `alpha |x|^{alpha-1} in L^r`, i.e. `alpha > 1 - 1/r`.
    pub k_integrable: bool,
    /// Some alpha satisfies both, i.e. `1/r + 1/s > 1`.
    pub window_nonempty: bool,
    pub window: (f64, f64),
}

/// The one-dimensional table for `a(x) = |x|^alpha`.
pub fn counterexample_window(
    alpha: f64,
    p: f64,
    r: &ExtExponent,
    s: &ExtExponent,
) -> Result<CounterexampleWindow, ExponentError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ExponentError::Precondition("alpha in (0,1)".into()));
    }
    if !(p > 1.0) {
        return Err(ExponentError::Precondition("p > 1".into()));
    }
    let alpha_r = BigRational::from_float(alpha).ok_or_else(|| ExponentError::Parse(alpha.to_string()))?;
    let lo = rat(1) - r.reciprocal();
    let hi = s.reciprocal();
    Ok(CounterexampleWindow {
        a_inv_integrable: alpha_r < hi,
        k_integrable: alpha_r > lo,
        window_nonempty: r.reciprocal() + s.reciprocal() > rat(1),
        window: (ratio_to_f64(&lo), ratio_to_f64(&hi)),
    })
}

/// Largest `(s, r)` for which `|x|^{-alpha s}` and `|x|^{(alpha-1) r}` are locally
/// integrable in dimension `n`: `s_max = n/alpha`, `r_max = n/(1-alpha)`.
pub fn power_weight_exponents(alpha: f64, n: u32) -> Result<(f64, f64), ExponentError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(ExponentError::Precondition("alpha in (0,1)".into()));
    }
    if n == 0 {
        return Err(ExponentError::Precondition("n >= 1".into()));
    }
    let n = n as f64;
    Ok((n / alpha, n / (1.0 - alpha)))
}

/// The Moser exponent sequence `p_i = p m (2*_s/(2m))^i`.
#[derive(Clone, Debug, Serialize)]
pub struct MoserLadder {
    pub p0: f64,
    pub ratio: f64,
    pub exponents: Vec<f64>,
    /// Closed form of `sum_{j>=0} 1/p_j = ratio / (p0 (ratio - 1))`.
    pub inverse_sum: f64,
}

pub fn moser_ladder(profile: &ExponentProfile, i_max: usize) -> Result<MoserLadder, ExponentError> {
    profile.require_regular()?;
    profile.require_s_large()?;
    let m = profile.finite_m()?;
    let ratio = profile.ladder_ratio()?;
    if ratio <= rat(1) {
        return Err(ExponentError::LadderDivergence { ratio: ratio_to_f64(&ratio) });
    }
    let p0 = profile.p() * &m;
    let mut exponents = Vec::with_capacity(i_max + 1);
    let mut current = p0.clone();
    for _ in 0..=i_max {
        exponents.push(ratio_to_f64(&current));
        current = &current * &ratio;
    }
    let inverse_sum = &ratio / (&p0 * (&ratio - rat(1)));
    Ok(MoserLadder {
        p0: ratio_to_f64(&p0),
        ratio: ratio_to_f64(&ratio),
        exponents,
        inverse_sum: ratio_to_f64(&inverse_sum),
    })
}

/// The JSON record emitted by the `exponents` subcommand.
#[derive(Clone, Debug, Serialize)]
pub struct ClassificationRecord {
    pub class: GapClass,
    pub threshold: f64,
    pub q_over_p: f64,
    pub gap_margin: f64,
    pub trudinger: bool,
    pub sigma: f64,
    pub two_star_s: ExtExponent,
    pub m: Option<f64>,
    pub theta: Option<f64>,
    pub theta_growth: Option<f64>,
    pub young_ratio: Option<f64>,
    pub ladder_ratio: Option<f64>,
}

impl ClassificationRecord {
    pub fn from_profile(profile: &ExponentProfile) -> Self {
        let f = |r: Result<BigRational, ExponentError>| r.ok().map(|v| ratio_to_f64(&v));
        Self {
            class: profile.classify(),
            threshold: ratio_to_f64(&profile.threshold()),
            q_over_p: ratio_to_f64(&(profile.q() / profile.p())),
            gap_margin: ratio_to_f64(&profile.gap_margin()),
            trudinger: profile.trudinger(),
            sigma: ratio_to_f64(&profile.sigma()),
            two_star_s: profile.two_star_s(),
            m: profile.m().map(|v| ratio_to_f64(&v)),
            theta: f(profile.theta()),
            theta_growth: f(profile.theta_growth()),
            young_ratio: f(profile.young_ratio()),
            ladder_ratio: f(profile.ladder_ratio()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> ExtExponent {
        s.parse().unwrap()
    }

    fn prof(p: &str, q: &str, n: u32, r: &str, s: &str) -> ExponentProfile {
        ExponentProfile::new(e(p), e(q), n, e(r), e(s)).unwrap()
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(e("2.1"), ExtExponent::from_ratio(21, 10));
        assert_eq!(e("1e3"), ExtExponent::from_ratio(1000, 1));
        assert_eq!(e("-0.25"), ExtExponent::from_ratio(-1, 4));
        assert_eq!(e("7/3"), ExtExponent::from_ratio(7, 3));
        assert_eq!(e("INF"), ExtExponent::Infinite);
        assert_eq!(e("+infinity"), ExtExponent::Infinite);
        assert!("abc".parse::<ExtExponent>().is_err());
        assert!("1/0".parse::<ExtExponent>().is_err());
    }

    #[test]
    fn infinite_limits_are_exact() {
        let pr = prof("2", "2", 2, "inf", "inf");
        assert_eq!(pr.threshold(), BigRational::new(3.into(), 2.into()));
        assert_eq!(pr.sigma(), rat(2));
        let pr = prof("2", "2", 3, "inf", "inf");
        assert_eq!(pr.two_star_s(), ExtExponent::Finite(rat(6)));
        let pr = prof("3", "3", 2, "5", "inf");
        // 1 + 1/2 - 1/5
        assert_eq!(pr.threshold(), BigRational::new(13.into(), 10.into()));
    }

    #[test]
    fn worked_gap_example() {
        let pr = prof("2", "2", 2, "20", "20");
        let margin = ratio_to_f64(&pr.gap_margin());
        assert!((margin - (20.0 / 21.0 * 1.45 - 1.0)).abs() < 1e-15);
        assert!((margin - 0.381).abs() < 1e-3);
        assert_eq!(pr.classify(), GapClass::Regular);
    }

    #[test]
    fn boundary_and_outside() {
        // threshold with n=2, r=s=inf is 3/2
        assert_eq!(prof("2", "3", 2, "inf", "inf").classify(), GapClass::Boundary);
        assert_eq!(prof("2", "3.1", 2, "inf", "inf").classify(), GapClass::Outside);
    }

    #[test]
    fn r_not_above_n_is_rejected() {
        assert!(ExponentProfile::new(e("2"), e("2"), 2, e("2"), e("inf")).is_err());
        assert!(ExponentProfile::new(e("1.5"), e("2"), 2, e("inf"), e("inf")).is_err());
        assert!(ExponentProfile::new(e("2"), e("1.9"), 2, e("inf"), e("inf")).is_err());
        assert!(ExponentProfile::new(e("2"), e("2"), 2, e("inf"), e("0.5")).is_err());
    }

    #[test]
    fn trudinger_examples() {
        assert!(gap_implies_trudinger(3, &ExtExponent::Infinite, &ExtExponent::Infinite));
        assert!(gap_implies_trudinger(2, &e("20"), &e("20")));
        assert!(!gap_implies_trudinger(1, &e("1.9"), &e("1.9")));
    }

    #[test]
    fn counterexample_windows() {
        let w = counterexample_window(0.5, 2.0, &e("4"), &e("4")).unwrap();
        assert!(!w.window_nonempty);
        assert_eq!(w.window, (0.75, 0.25));
        let w = counterexample_window(0.5, 2.0, &e("1.5"), &e("1.5")).unwrap();
        assert!(w.window_nonempty && w.a_inv_integrable && w.k_integrable);
        assert!((w.window.0 - 1.0 / 3.0).abs() < 1e-15 && (w.window.1 - 2.0 / 3.0).abs() < 1e-15);
        let w = counterexample_window(0.5, 2.0, &e("1.0001"), &e("1.0001")).unwrap();
        assert!(w.a_inv_integrable && w.k_integrable);
        assert!(counterexample_window(1.0, 2.0, &e("2"), &e("2")).is_err());
    }

    #[test]
    fn power_weight_table() {
        assert_eq!(power_weight_exponents(0.5, 1).unwrap(), (2.0, 2.0));
        assert_eq!(power_weight_exponents(0.5, 2).unwrap(), (4.0, 4.0));
        let (s, r) = power_weight_exponents(1e-9, 1).unwrap();
        assert!(s > 1e8 && (r - 1.0).abs() < 1e-8);
        assert!(power_weight_exponents(0.0, 1).is_err());
    }

    #[test]
    fn ladder_example() {
        let pr = prof("2", "2", 2, "20", "20");
        assert_eq!(pr.two_star_s(), ExtExponent::Finite(rat(40)));
        assert_eq!(pr.m().unwrap(), BigRational::new(20.into(), 17.into()));
        let ladder = moser_ladder(&pr, 2).unwrap();
        assert!((ladder.p0 - 40.0 / 17.0).abs() < 1e-14);
        assert!((ladder.ratio - 17.0).abs() < 1e-12);
        assert!((ladder.exponents[1] - 40.0).abs() < 1e-12);
        let partial: f64 = (0..60).map(|i| 1.0 / (ladder.p0 * ladder.ratio.powi(i))).sum();
        assert!((partial - ladder.inverse_sum).abs() < 1e-14);
    }

    #[test]
    fn ladder_rejects_outside_profiles() {
        let pr = prof("2", "4", 2, "20", "20");
        assert!(moser_ladder(&pr, 3).is_err());
    }

    #[test]
    fn theta_examples() {
        // p = q reduces to n/r + n/s
        let pr = prof("3", "3", 2, "20", "10");
        assert_eq!(pr.theta().unwrap(), BigRational::new(3.into(), 10.into()));
        let pr = prof("2", "2.1", 2, "20", "20");
        let th = ratio_to_f64(&pr.theta().unwrap());
        assert!((th - 244.0 / 880.0).abs() < 1e-15);
        assert!(pr.interpolation_residual().unwrap().is_zero());
    }

    #[test]
    fn young_examples() {
        let pr = prof("2", "2", 2, "20", "20");
        assert!(pr.young_ratio().unwrap().is_zero());
        let pr = prof("2", "2.1", 2, "20", "20");
        let y = ratio_to_f64(&pr.young_ratio().unwrap());
        // 0.2 * 40 / (2 * (40 - 40/17))
        assert!((y - 8.0 / (2.0 * (40.0 - 40.0 / 17.0))).abs() < 1e-15);
        assert!((y - 0.106).abs() < 1e-3);
    }

    #[test]
    fn record_serializes_threshold() {
        let rec = ClassificationRecord::from_profile(&prof("2", "2", 2, "inf", "inf"));
        let v = serde_json::to_value(&rec).unwrap();
        assert_eq!(v["class"], "regular");
        assert_eq!(v["threshold"], 1.5);
        assert_eq!(v["two_star_s"], "inf");
    }
}
