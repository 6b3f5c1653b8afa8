use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// An increasing, unbounded control function.
#[derive(Clone, Debug, PartialEq)]
pub enum Control {
    Identity,
    /// `slope·x + intercept`.
    Affine { slope: f64, intercept: f64 },
    /// `scale·ln(1 + x) + intercept`.
    Log { scale: f64, intercept: f64 },
    /// Piecewise linear through the breakpoints, extended linearly past both ends.
    Table(Vec<(f64, f64)>),
}

impl Control {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Input(format!("control function {msg}")));
        match self {
            Control::Identity => Ok(()),
            Control::Affine { slope, .. } if !(*slope > 0.0) => bad("needs a positive slope"),
            Control::Log { scale, .. } if !(*scale > 0.0) => bad("needs a positive scale"),
            Control::Table(pts) => {
                if pts.len() < 2 {
                    return bad("table needs at least two breakpoints");
                }
                for w in pts.windows(2) {
                    if !(w[1].0 > w[0].0) || w[1].1 < w[0].1 {
                        return bad("table must be increasing");
                    }
                }
                let (a, b) = (pts[pts.len() - 2], pts[pts.len() - 1]);
                if !(b.1 > a.1) {
                    return bad("table must be unbounded (last segment slope > 0)");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Control::Identity => x,
            Control::Affine { slope, intercept } => slope * x + intercept,
            Control::Log { scale, intercept } => scale * libm::log1p(x) + intercept,
            Control::Table(pts) => {
                let seg = pts.windows(2).position(|w| x <= w[1].0).unwrap_or(pts.len() - 2);
                let (a, b) = (pts[seg], pts[seg + 1]);
                a.1 + (x - a.0) * (b.1 - a.1) / (b.0 - a.0)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ControlFunctions {
    pub rho_minus: Control,
    pub rho_plus: Control,
}

impl ControlFunctions {
    pub fn identity() -> Self {
        ControlFunctions {
            rho_minus: Control::Identity,
            rho_plus: Control::Identity,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `L > U`: no coarse embedding with these controls exists.
    Contradiction,
    Consistent,
    /// The argument of `ρ₋` is negative.
    Undefined,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Contradiction => "contradiction",
            Verdict::Consistent => "consistent",
            Verdict::Undefined => "undefined",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObstructionCertificate {
    pub p_size: u64,
    pub q: f64,
    pub d: u64,
    pub epsilon: f64,
    pub controls: ControlFunctions,
    /// `log_D(|P| / 2Q) − 1`.
    pub argument: f64,
    /// `¼·ρ₋(argument)`; absent when the argument is negative.
    pub lower_bound: Option<f64>,
    /// `ρ₊(1) / ε`.
    pub upper_bound: f64,
    pub verdict: Verdict,
}

/// Compares the norm lower bound `¼·ρ₋(log_D(|P|/2Q) − 1)` for a zero-mean
/// 1-Lipschitz function on an expander with the upper bound `ρ₊(1)/ε`
/// forced by a spectral gap `ε`.
pub fn embedding_obstruction(
    p_size: u64,
    q: f64,
    d: u64,
    epsilon: f64,
    controls: &ControlFunctions,
) -> Result<ObstructionCertificate> {
    if !(q >= 1.0) {
        return Err(Error::Input(format!("measure ratio Q must be at least 1, got {q}")));
    }
    if d < 2 {
        return Err(Error::Input(format!("degree D must be at least 2, got {d}")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Input(format!("gap epsilon must be positive, got {epsilon}")));
    }
    controls.rho_minus.validate()?;
    controls.rho_plus.validate()?;
    // log2 keeps powers of two exact.
    let argument = (libm::log2(p_size as f64) - libm::log2(2.0 * q)) / libm::log2(d as f64) - 1.0;
    let upper_bound = controls.rho_plus.eval(1.0) / epsilon;
    let (lower_bound, verdict) = if argument < 0.0 {
        (None, Verdict::Undefined)
    } else {
        let l = 0.25 * controls.rho_minus.eval(argument);
        (Some(l), if l > upper_bound { Verdict::Contradiction } else { Verdict::Consistent })
    };
    Ok(ObstructionCertificate {
        p_size,
        q,
        d,
        epsilon,
        controls: controls.clone(),
        argument,
        lower_bound,
        upper_bound,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn worked_values() {
        let id = ControlFunctions::identity();
        let c = embedding_obstruction(2048, 2.0, 4, 1.0, &id).unwrap();
        assert_eq!(c.argument, 3.5);
        assert_eq!(c.lower_bound, Some(0.875));
        assert_eq!(c.upper_bound, 1.0);
        assert_eq!(c.verdict, Verdict::Consistent);
        let c = embedding_obstruction(2048, 2.0, 4, 2.0, &id).unwrap();
        assert_eq!(c.upper_bound, 0.5);
        assert_eq!(c.verdict, Verdict::Contradiction);
        let c = embedding_obstruction(4, 2.0, 4, 2.0, &id).unwrap();
        assert_eq!(c.verdict, Verdict::Undefined);
        assert_eq!(c.lower_bound, None);
    }

    #[test]
    fn controls() {
        let t = Control::Table(vec![(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)]);
        t.validate().unwrap();
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(2.0), 2.5);
        assert_eq!(t.eval(5.0), 4.0);
        assert!(Control::Table(vec![(0.0, 1.0), (1.0, 1.0)]).validate().is_err());
        assert!(Control::Table(vec![(1.0, 0.0), (0.0, 1.0)]).validate().is_err());
        assert!(Control::Affine { slope: 0.0, intercept: 1.0 }.validate().is_err());
        assert!((Control::Log { scale: 2.0, intercept: 0.0 }.eval(libm::exp(1.0) - 1.0) - 2.0).abs() < 1e-12);
    }
}
