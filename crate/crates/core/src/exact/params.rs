use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Which family of models a parameter set was built for.
///
/// The splitting process `X_n` is only defined for `p <= 1/2`; the PATRICIA
/// depth, left arm and geometric/urn models accept any `0 < p < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamDomain {
    Splitting,
    Bernoulli,
}

/// The probability `p` of the process, held as a reduced fraction `a/b`.
#[derive(Clone, PartialEq, Eq)]
pub struct SplitParams {
    num: u64,
    den: u64,
    domain: ParamDomain,
}

impl SplitParams {
    /// Parameters for the splitting process; requires `0 < p <= 1/2`.
    pub fn new(num: u64, den: u64) -> Result<Self> {
        let params = Self::bernoulli(num, den)?;
        if 2 * params.num > params.den {
            return Err(Error::InvalidParameter(format!(
                "p must satisfy p ≤ 1/2 for model X (got {params})"
            )));
        }
        Ok(Self {
            domain: ParamDomain::Splitting,
            ..params
        })
    }

    /// Parameters for the Bernoulli-key models; requires `0 < p < 1`.
    pub fn bernoulli(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num == 0 || num >= den {
            return Err(Error::InvalidParameter(format!(
                "p = {num}/{den} must satisfy 0 < p < 1"
            )));
        }
        // keeps every a^k, b^n computation comfortably inside BigInt fast paths
        if den > u32::MAX as u64 {
            return Err(Error::InvalidParameter(format!(
                "denominator {den} too large"
            )));
        }
        let g = num.gcd(&den);
        Ok(Self {
            num: num / g,
            den: den / g,
            domain: ParamDomain::Bernoulli,
        })
    }

    /// `p = 1/(m+1)`, the parking process with cars `[0,m]^n` in `[0,2m]^n`.
    pub fn parking(m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("m must be at least 1".into()));
        }
        Self::new(1, m + 1)
    }

    pub fn half() -> Self {
        Self {
            num: 1,
            den: 2,
            domain: ParamDomain::Splitting,
        }
    }

    /// Parse `"a/b"`. Decimal input is rejected so exact paths never see a
    /// rounded probability.
    pub fn parse(text: &str, domain: ParamDomain) -> Result<Self> {
        let (a, b) = text.trim().split_once('/').ok_or_else(|| {
            Error::InvalidParameter(format!("p must be written as a/b, got {text:?}"))
        })?;
        let parse = |s: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| Error::InvalidParameter(format!("bad integer {s:?} in p = {text:?}")))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        match domain {
            ParamDomain::Splitting => Self::new(a, b),
            ParamDomain::Bernoulli => Self::bernoulli(a, b),
        }
    }

    pub fn numer(&self) -> u64 {
        self.num
    }

    pub fn denom(&self) -> u64 {
        self.den
    }

    pub fn domain(&self) -> ParamDomain {
        self.domain
    }

    pub fn is_half(&self) -> bool {
        self.num == 1 && self.den == 2
    }

    pub fn allows_splitting(&self) -> bool {
        2 * self.num <= self.den
    }

    pub(crate) fn require_splitting(&self) -> Result<()> {
        if self.allows_splitting() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "p must satisfy p ≤ 1/2 for model X (got {self})"
            )))
        }
    }

    /// `Some(a)` when `p = 1/a`.
    pub fn unit_denominator(&self) -> Option<u64> {
        (self.num == 1).then_some(self.den)
    }

    pub fn p(&self) -> BigRational {
        BigRational::new(BigInt::from(self.num), BigInt::from(self.den))
    }

    pub fn q(&self) -> BigRational {
        BigRational::new(BigInt::from(self.den - self.num), BigInt::from(self.den))
    }

    pub fn p_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn q_f64(&self) -> f64 {
        (self.den - self.num) as f64 / self.den as f64
    }

    /// `log(1/p)`.
    pub fn log_inv_p(&self) -> f64 {
        (self.den as f64).ln() - (self.num as f64).ln()
    }

    /// `log_{1/p} x`.
    pub fn log_base(&self, x: f64) -> f64 {
        x.ln() / self.log_inv_p()
    }

    /// `⌊log_{1/p} n⌋` by exact integer comparison: the largest `m` with
    /// `b^m <= n a^m`.
    pub fn floor_log(&self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::InvalidParameter("log of n = 0".into()));
        }
        let (a, b, n) = (
            BigInt::from(self.num),
            BigInt::from(self.den),
            BigInt::from(n),
        );
        let (mut pa, mut pb) = (BigInt::from(1), BigInt::from(1));
        let mut m = 0;
        loop {
            pa *= &a;
            pb *= &b;
            if pb > &n * &pa {
                return Ok(m);
            }
            m += 1;
        }
    }

    /// Fractional part `η(n)` of `log_{1/p} n` together with the exact floor.
    pub fn log_split(&self, n: u64) -> Result<(u64, f64)> {
        let floor = self.floor_log(n)?;
        let scale = (self.den as f64 / self.num as f64).powi(floor as i32);
        let eta = ((n as f64 / scale).ln() / self.log_inv_p()).clamp(0.0, 1.0 - f64::EPSILON);
        Ok((floor, eta))
    }

    pub(crate) fn q_minus_p_f64(&self) -> f64 {
        (self.den as f64 - 2.0 * self.num as f64) / self.den as f64
    }

    pub(crate) fn as_ratio_f64(r: &BigRational) -> f64 {
        r.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for SplitParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl fmt::Debug for SplitParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SplitParams({}/{}, {:?})",
            self.num, self.den, self.domain
        )
    }
}

impl FromStr for SplitParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, ParamDomain::Splitting)
    }
}

impl Serialize for SplitParams {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}
