//! `kind:key=value,...` strings naming initial states and operators.
//!
//! ```text
//! ground
//! coherent:x0=1,p0=0.5
//! squeezed:x0=1,p0=0.5,r=0.8,phi=1.0471975511965979
//! evenodd:x0=2,s=1.5,sign=-1
//!
//! squeeze:r=1,phi=0
//! displace:x0=1,p0=0.5
//! time:t=0.7              (substeps default to steps of at most π/4)
//! time:t=6.283185307179586,substeps=8
//! ```
//!
//! Missing keys take the defaults documented on each variant. Unknown or
//! repeated keys and non-finite numbers are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::SqueezeParameter;
use crate::analytic::{self, EvenOddSpec, Parity, SqueezedStateSpec};
use crate::factors::{substeps_for, FactoredOperator};
use crate::grid::{Grid, WaveFunction};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("unknown kind {0:?}")]
    UnknownKind(String),
    #[error("{kind}: unknown key {key:?}")]
    UnknownKey { kind: &'static str, key: String },
    #[error("{kind}: key {key:?} given twice")]
    DuplicateKey { kind: &'static str, key: String },
    #[error("{kind}: expected key=value, found {item:?}")]
    Malformed { kind: &'static str, item: String },
    #[error("{kind}: {key}={value:?} is not a finite number")]
    BadValue { kind: &'static str, key: &'static str, value: String },
    #[error("{kind}: {message}")]
    Invalid { kind: &'static str, message: String },
    #[error("{kind} takes no parameters")]
    UnexpectedParameters { kind: &'static str },
}

/// Parsed `key=value` pairs for one spec.
struct Params {
    kind: &'static str,
    values: BTreeMap<String, String>,
}

impl Params {
    fn parse(kind: &'static str, body: &str, allowed: &[&'static str]) -> Result<Self, SpecError> {
        let mut values = BTreeMap::new();
        for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) =
                item.split_once('=').ok_or_else(|| SpecError::Malformed { kind, item: item.to_string() })?;
            let key = key.trim();
            if !allowed.contains(&key) {
                return Err(SpecError::UnknownKey { kind, key: key.to_string() });
            }
            if values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(SpecError::DuplicateKey { kind, key: key.to_string() });
            }
        }
        Ok(Self { kind, values })
    }

    fn number(&self, key: &'static str, default: f64) -> Result<f64, SpecError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(text) => match text.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(SpecError::BadValue { kind: self.kind, key, value: text.clone() }),
            },
        }
    }

    fn count(&self, key: &'static str) -> Result<Option<usize>, SpecError> {
        self.values
            .get(key)
            .map(|text| {
                text.parse::<usize>().map_err(|_| SpecError::BadValue { kind: self.kind, key, value: text.clone() })
            })
            .transpose()
    }
}

fn split_kind(s: &str) -> (&str, &str) {
    let s = s.trim();
    s.split_once(':').unwrap_or((s, ""))
}

/// Initial states for `evolve`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateSpec {
    /// Oscillator ground state.
    Ground,
    /// Coherent state; `x0`, `p0` default to 0.
    Coherent { x0: f64, p0: f64 },
    /// `D(x0, p0) S(r e^{iφ}) ψ0`; all keys default to 0.
    Squeezed { x0: f64, p0: f64, r: f64, phi: f64 },
    /// Even (`sign=1`, default) or odd (`sign=-1`) pair of width `s`
    /// (default 1) centred at `±x0` (default 0).
    EvenOdd { x0: f64, s: f64, sign: i32 },
}

impl StateSpec {
    /// Samples the state on `grid`.
    pub fn sample(&self, grid: Grid) -> WaveFunction {
        match *self {
            StateSpec::Ground => WaveFunction::from_fn(grid, analytic::psi0),
            StateSpec::Coherent { x0, p0 } => WaveFunction::from_fn(grid, |x| analytic::psi_cs(x, x0, p0, 1.0)),
            StateSpec::Squeezed { x0, p0, r, phi } => {
                let z = SqueezeParameter::new(r, phi).expect("validated when parsed");
                let spec = SqueezedStateSpec::new(x0, p0, z);
                WaveFunction::from_fn(grid, |x| analytic::psi_ss(x, &spec))
            }
            StateSpec::EvenOdd { x0, s, sign } => {
                let parity = Parity::from_sign(sign).expect("validated when parsed");
                let spec = EvenOddSpec::new(x0, s, parity).expect("validated when parsed");
                WaveFunction::from_fn(grid, |x| spec.initial(x))
            }
        }
    }

    /// The closed form, for callers that want values off the grid.
    pub fn value(&self, x: f64) -> Complex64 {
        match *self {
            StateSpec::Ground => analytic::psi0(x),
            StateSpec::Coherent { x0, p0 } => analytic::psi_cs(x, x0, p0, 1.0),
            StateSpec::Squeezed { x0, p0, r, phi } => {
                let z = SqueezeParameter::new(r, phi).expect("validated when parsed");
                analytic::psi_ss(x, &SqueezedStateSpec::new(x0, p0, z))
            }
            StateSpec::EvenOdd { x0, s, sign } => {
                let parity = Parity::from_sign(sign).expect("validated when parsed");
                EvenOddSpec::new(x0, s, parity).expect("validated when parsed").initial(x)
            }
        }
    }
}

impl FromStr for StateSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, body) = split_kind(s);
        match kind {
            "ground" => {
                if !body.trim().is_empty() {
                    return Err(SpecError::UnexpectedParameters { kind: "ground" });
                }
                Ok(StateSpec::Ground)
            }
            "coherent" => {
                let p = Params::parse("coherent", body, &["x0", "p0"])?;
                Ok(StateSpec::Coherent { x0: p.number("x0", 0.0)?, p0: p.number("p0", 0.0)? })
            }
            "squeezed" => {
                let p = Params::parse("squeezed", body, &["x0", "p0", "r", "phi"])?;
                let (r, phi) = (p.number("r", 0.0)?, p.number("phi", 0.0)?);
                SqueezeParameter::new(r, phi)
                    .map_err(|e| SpecError::Invalid { kind: "squeezed", message: e.to_string() })?;
                Ok(StateSpec::Squeezed { x0: p.number("x0", 0.0)?, p0: p.number("p0", 0.0)?, r, phi })
            }
            "evenodd" => {
                let p = Params::parse("evenodd", body, &["x0", "s", "sign"])?;
                let (x0, s) = (p.number("x0", 0.0)?, p.number("s", 1.0)?);
                let sign_value = p.number("sign", 1.0)?;
                let sign = if sign_value == 1.0 {
                    1
                } else if sign_value == -1.0 {
                    -1
                } else {
                    return Err(SpecError::Invalid { kind: "evenodd", message: "sign must be 1 or -1".into() });
                };
                if !(s > 0.0) {
                    return Err(SpecError::Invalid { kind: "evenodd", message: "s must be positive".into() });
                }
                if sign == -1 && x0 == 0.0 {
                    return Err(SpecError::Invalid { kind: "evenodd", message: "the odd state needs x0 != 0".into() });
                }
                Ok(StateSpec::EvenOdd { x0, s, sign })
            }
            other => Err(SpecError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StateSpec::Ground => write!(f, "ground"),
            StateSpec::Coherent { x0, p0 } => write!(f, "coherent:x0={x0:?},p0={p0:?}"),
            StateSpec::Squeezed { x0, p0, r, phi } => write!(f, "squeezed:x0={x0:?},p0={p0:?},r={r:?},phi={phi:?}"),
            StateSpec::EvenOdd { x0, s, sign } => write!(f, "evenodd:x0={x0:?},s={s:?},sign={sign}"),
        }
    }
}

/// Operators for `evolve`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorSpec {
    /// `S(r e^{iφ})`; both keys default to 0.
    Squeeze { r: f64, phi: f64 },
    /// `D(x0, p0)`; both default to 0.
    Displace { x0: f64, p0: f64 },
    /// `T(t)` (t defaults to 0). `substeps` defaults to the fewest steps of
    /// at most π/4.
    Time { t: f64, substeps: Option<usize> },
}

impl OperatorSpec {
    pub fn to_operator(&self) -> FactoredOperator {
        match *self {
            OperatorSpec::Squeeze { r, phi } => {
                FactoredOperator::Squeeze(SqueezeParameter::new(r, phi).expect("validated when parsed"))
            }
            OperatorSpec::Displace { x0, p0 } => FactoredOperator::Displacement { x0, p0 },
            OperatorSpec::Time { t, substeps } => {
                FactoredOperator::TimeDisplacement { t, substeps: substeps.unwrap_or_else(|| substeps_for(t)) }
            }
        }
    }
}

impl FromStr for OperatorSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, body) = split_kind(s);
        match kind {
            "squeeze" => {
                let p = Params::parse("squeeze", body, &["r", "phi"])?;
                let (r, phi) = (p.number("r", 0.0)?, p.number("phi", 0.0)?);
                SqueezeParameter::new(r, phi)
                    .map_err(|e| SpecError::Invalid { kind: "squeeze", message: e.to_string() })?;
                Ok(OperatorSpec::Squeeze { r, phi })
            }
            "displace" => {
                let p = Params::parse("displace", body, &["x0", "p0"])?;
                Ok(OperatorSpec::Displace { x0: p.number("x0", 0.0)?, p0: p.number("p0", 0.0)? })
            }
            "time" => {
                let p = Params::parse("time", body, &["t", "substeps"])?;
                let substeps = p.count("substeps")?;
                if substeps == Some(0) {
                    return Err(SpecError::Invalid { kind: "time", message: "substeps must be at least 1".into() });
                }
                Ok(OperatorSpec::Time { t: p.number("t", 0.0)?, substeps })
            }
            other => Err(SpecError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            OperatorSpec::Squeeze { r, phi } => write!(f, "squeeze:r={r:?},phi={phi:?}"),
            OperatorSpec::Displace { x0, p0 } => write!(f, "displace:x0={x0:?},p0={p0:?}"),
            OperatorSpec::Time { t, substeps: None } => write!(f, "time:t={t:?}"),
            OperatorSpec::Time { t, substeps: Some(k) } => write!(f, "time:t={t:?},substeps={k}"),
        }
    }
}
