//! Time-dependent coefficient schedules for the particle dynamics.

use std::fmt;

use thiserror::Error;

/// Scalar schedule `t ↦ value(t)` used for the drift strength `β(t)`, the
/// diffusion strength `σ(t)` and the repelling strength `λ(t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// `intercept + slope · t`
    Linear { intercept: f64, slope: f64 },
    /// `initial · e^{−rate · t}`
    ExpDecay { initial: f64, rate: f64 },
    /// `initial / (1 + t²)`
    InverseSquare { initial: f64 },
}

#[derive(Debug, Error)]
#[error("invalid schedule spec '{spec}': expected <number>, const:v, linear:a:b, expdecay:v0:rate or invsq:v0")]
pub struct ScheduleParseError {
    pub spec: String,
}

impl Schedule {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Self::Constant(v) => v,
            Self::Linear { intercept, slope } => intercept + slope * t,
            Self::ExpDecay { initial, rate } => initial * (-rate * t).exp(),
            Self::InverseSquare { initial } => initial / (1.0 + t * t),
        }
    }

    /// True when the schedule stays nonnegative on `[0, t_end]`.
    pub fn nonnegative_on(&self, t_end: f64) -> bool {
        match *self {
            Self::Constant(v) => v >= 0.0,
            Self::Linear { .. } => self.value(0.0) >= 0.0 && self.value(t_end) >= 0.0,
            Self::ExpDecay { initial, .. } | Self::InverseSquare { initial } => initial >= 0.0,
        }
    }

    /// Parses the compact spec syntax used in config files and on the
    /// command line. A bare number is a constant schedule.
    pub fn parse(spec: &str) -> Result<Self, ScheduleParseError> {
        let err = || ScheduleParseError { spec: spec.to_string() };
        let s = spec.trim();
        if let Ok(v) = s.parse::<f64>() {
            return Ok(Self::Constant(v));
        }
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| err());
        match parts.as_slice() {
            ["const", v] => Ok(Self::Constant(num(v)?)),
            ["linear", a, b] => Ok(Self::Linear {
                intercept: num(a)?,
                slope: num(b)?,
            }),
            ["expdecay", v0, rate] => Ok(Self::ExpDecay {
                initial: num(v0)?,
                rate: num(rate)?,
            }),
            ["invsq", v0] => Ok(Self::InverseSquare { initial: num(v0)? }),
            _ => Err(err()),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Constant(v) => write!(f, "const:{v}"),
            Self::Linear { intercept, slope } => write!(f, "linear:{intercept}:{slope}"),
            Self::ExpDecay { initial, rate } => write!(f, "expdecay:{initial}:{rate}"),
            Self::InverseSquare { initial } => write!(f, "invsq:{initial}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_eval() {
        assert_eq!(Schedule::parse("1").unwrap(), Schedule::Constant(1.0));
        assert_eq!(Schedule::parse("const:4").unwrap(), Schedule::Constant(4.0));
        let lin = Schedule::parse("linear:0:10").unwrap();
        assert_eq!(lin.value(0.5), 5.0);
        let exp = Schedule::parse("expdecay:10:2.302585092994046").unwrap();
        assert!((exp.value(1.0) - 1.0).abs() < 1e-12);
        let inv = Schedule::parse("invsq:1").unwrap();
        assert_eq!(inv.value(1.0), 0.5);
        assert!(Schedule::parse("bogus:1").is_err());
        assert!(Schedule::parse("linear:1").is_err());
    }

    #[test]
    fn display_round_trips() {
        for s in [
            Schedule::Constant(4.0),
            Schedule::Linear { intercept: 0.0, slope: 10.0 },
            Schedule::ExpDecay { initial: 10.0, rate: 2.5 },
            Schedule::InverseSquare { initial: 1.0 },
        ] {
            assert_eq!(Schedule::parse(&s.to_string()).unwrap(), s);
        }
    }

    #[test]
    fn nonnegativity_window() {
        let lin = Schedule::Linear { intercept: 1.0, slope: -2.0 };
        assert!(lin.nonnegative_on(0.5));
        assert!(!lin.nonnegative_on(1.0));
    }
}
