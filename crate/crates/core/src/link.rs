//! Link functions for the mean and correlation models.

use std::fmt;
use std::str::FromStr;

use crate::error::{GeeError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkKind {
    Identity,
    Log,
    Logit,
    /// ½ ln((1 + ρ) / (1 − ρ)); correlation model only.
    FisherZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkMode {
    Forward,
    Inverse,
    /// Derivative of the inverse link with respect to the linear predictor.
    DInverse,
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkKind::Identity => "identity",
            LinkKind::Log => "log",
            LinkKind::Logit => "logit",
            LinkKind::FisherZ => "fisherz",
        })
    }
}

impl fmt::Display for LinkMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkMode::Forward => "forward",
            LinkMode::Inverse => "inverse",
            LinkMode::DInverse => "d_inv_d_eta",
        })
    }
}

impl FromStr for LinkKind {
    type Err = GeeError;

    /// Accepts names or numeric codes
    /// (1 identity, 2 log, 3 logit, 4 Fisher's Z).
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "1" => Ok(LinkKind::Identity),
            "log" | "2" => Ok(LinkKind::Log),
            "logit" | "3" => Ok(LinkKind::Logit),
            "fisherz" | "fisher-z" | "fisher_z" | "4" => Ok(LinkKind::FisherZ),
            other => Err(GeeError::Config(format!("unknown link `{other}`"))),
        }
    }
}

impl LinkKind {
    pub fn valid_for_mean(self) -> bool {
        self != LinkKind::FisherZ
    }

    /// g(v).
    pub fn forward(self, v: f64) -> Result<f64> {
        let in_domain = match self {
            LinkKind::Identity => v.is_finite(),
            LinkKind::Log => v > 0.0 && v.is_finite(),
            LinkKind::Logit => v > 0.0 && v < 1.0,
            LinkKind::FisherZ => v > -1.0 && v < 1.0,
        };
        if !in_domain {
            return Err(self.domain_error(LinkMode::Forward, v));
        }
        Ok(match self {
            LinkKind::Identity => v,
            LinkKind::Log => v.ln(),
            LinkKind::Logit => (v / (1.0 - v)).ln(),
            LinkKind::FisherZ => v.atanh(),
        })
    }

    /// g⁻¹(η). Never fails for finite η; callers validate finiteness upstream.
    #[inline]
    pub fn inverse(self, eta: f64) -> f64 {
        match self {
            LinkKind::Identity => eta,
            LinkKind::Log => eta.exp(),
            LinkKind::Logit => {
                if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let t = eta.exp();
                    t / (1.0 + t)
                }
            }
            LinkKind::FisherZ => eta.tanh(),
        }
    }

    /// d g⁻¹(η) / dη.
    #[inline]
    pub fn d_inverse(self, eta: f64) -> f64 {
        match self {
            LinkKind::Identity => 1.0,
            LinkKind::Log => eta.exp(),
            LinkKind::Logit => {
                let t = (-eta.abs()).exp();
                t / ((1.0 + t) * (1.0 + t))
            }
            LinkKind::FisherZ => {
                let c = eta.cosh();
                1.0 / (c * c)
            }
        }
    }

    fn domain_error(self, mode: LinkMode, value: f64) -> GeeError {
        GeeError::LinkDomain {
            kind: self,
            mode,
            value,
        }
    }
}

/// Evaluates a link in the requested mode.
pub fn link_eval(kind: LinkKind, mode: LinkMode, v: f64) -> Result<f64> {
    match mode {
        LinkMode::Forward => kind.forward(v),
        LinkMode::Inverse | LinkMode::DInverse if !v.is_finite() => {
            Err(kind.domain_error(mode, v))
        }
        LinkMode::Inverse => Ok(kind.inverse(v)),
        LinkMode::DInverse => Ok(kind.d_inverse(v)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [LinkKind; 4] = [
        LinkKind::Identity,
        LinkKind::Log,
        LinkKind::Logit,
        LinkKind::FisherZ,
    ];

    fn grid(kind: LinkKind) -> Vec<f64> {
        (1..=1000)
            .map(|i| {
                let t = i as f64 / 1001.0;
                match kind {
                    LinkKind::Identity => -5.0 + 10.0 * t,
                    LinkKind::Log => 1e-3 + 20.0 * t,
                    LinkKind::Logit => t,
                    LinkKind::FisherZ => 2.0 * t - 1.0,
                }
            })
            .collect()
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn spot_values() {
        assert_eq!(link_eval(LinkKind::Logit, LinkMode::Forward, 0.5).unwrap(), 0.0);
        assert_eq!(link_eval(LinkKind::Log, LinkMode::Inverse, 0.0).unwrap(), 1.0);
        let z = link_eval(LinkKind::FisherZ, LinkMode::Forward, 0.6).unwrap();
        // ½ ln 4 = ln 2
        assert!((z - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((z - 0.6931).abs() < 1e-4);
    }

    #[test]
    fn forward_inverse_round_trip() {
        for kind in ALL {
            for v in grid(kind) {
                let eta = kind.forward(v).unwrap();
                let back = kind.inverse(eta);
                assert!((back - v).abs() < 1e-12, "{kind}: {v} -> {eta} -> {back}");
            }
        }
    }

    #[test]
    fn derivative_matches_central_differences() {
        for kind in ALL {
            for v in grid(kind) {
                let eta = kind.forward(v).unwrap();
                let h = 1e-5 * (1.0 + eta.abs());
                let fd = (kind.inverse(eta + h) - kind.inverse(eta - h)) / (2.0 * h);
                let an = kind.d_inverse(eta);
                let rel = (fd - an).abs() / an.abs().max(1e-300);
                assert!(rel < 1e-6, "{kind} at eta={eta}: fd={fd} analytic={an}");
            }
        }
    }

    #[test]
    fn bounded_monotone_inverses() {
        let etas: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.1).collect();
        for (kind, lo, hi) in [(LinkKind::Logit, 0.0, 1.0), (LinkKind::FisherZ, -1.0, 1.0)] {
            let vals: Vec<f64> = etas.iter().map(|&e| kind.inverse(e)).collect();
            for w in vals.windows(2) {
                assert!(w[1] >= w[0]);
            }
            for (&e, &v) in etas.iter().zip(&vals) {
                assert!(v >= lo && v <= hi);
                if e.abs() < 15.0 {
                    assert!(v > lo && v < hi);
                }
            }
        }
    }

    #[test]
    fn logit_inverse_is_symmetric_for_large_eta() {
        for eta in [35.0, 50.0, 300.0, 800.0] {
            let a = LinkKind::Logit.inverse(-eta);
            assert!(a.is_finite() && a >= 0.0);
            assert!(LinkKind::Logit.inverse(eta) <= 1.0);
            assert!(LinkKind::Logit.d_inverse(eta).is_finite());
        }
        assert!(LinkKind::Logit.inverse(-50.0) > 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(
            link_eval(LinkKind::Logit, LinkMode::Forward, 1.0),
            Err(GeeError::LinkDomain { kind: LinkKind::Logit, .. })
        ));
        assert!(link_eval(LinkKind::Log, LinkMode::Forward, 0.0).is_err());
        assert!(link_eval(LinkKind::FisherZ, LinkMode::Forward, -1.0).is_err());
        assert!(link_eval(LinkKind::Identity, LinkMode::Inverse, f64::NAN).is_err());
        assert!(!LinkKind::FisherZ.valid_for_mean());
    }

    #[test]
    fn parses_names_and_codes() {
        assert_eq!("3".parse::<LinkKind>().unwrap(), LinkKind::Logit);
        assert_eq!("Fisherz".parse::<LinkKind>().unwrap(), LinkKind::FisherZ);
        assert!("probit".parse::<LinkKind>().is_err());
    }
}
