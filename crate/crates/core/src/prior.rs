use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Which non-informative prior to attach to a selective model.
///
/// `Normal` is an informative `N(mean, sd²)` prior on the location scale,
/// used only to reproduce the random-versus-fixed parameter comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorKind {
    Uniform,
    ExactMatching,
    SelectiveJeffreys,
    NonSelectiveJeffreys,
    Normal { mean: f64, sd: f64 },
}

impl PriorKind {
    /// The four non-informative choices, in display order.
    pub const NON_INFORMATIVE: [PriorKind; 4] = [
        PriorKind::Uniform,
        PriorKind::ExactMatching,
        PriorKind::SelectiveJeffreys,
        PriorKind::NonSelectiveJeffreys,
    ];

    pub fn is_data_dependent(&self) -> bool {
        matches!(self, PriorKind::ExactMatching)
    }

    pub fn label(&self) -> &'static str {
        match self {
            PriorKind::Uniform => "uniform",
            PriorKind::ExactMatching => "pmp",
            PriorKind::SelectiveJeffreys => "jeffreys",
            PriorKind::NonSelectiveJeffreys => "nonselective_jeffreys",
            PriorKind::Normal { .. } => "normal",
        }
    }
}

impl fmt::Display for PriorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorKind::Normal { mean, sd } => write!(f, "normal({mean},{sd})"),
            other => f.write_str(other.label()),
        }
    }
}

impl FromStr for PriorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim().to_ascii_lowercase();
        let kind = match s.as_str() {
            "uniform" | "flat" | "u" => PriorKind::Uniform,
            "pmp" | "exact_matching" | "matching" => PriorKind::ExactMatching,
            "jeffreys" | "selective_jeffreys" | "j" => PriorKind::SelectiveJeffreys,
            "nonselective_jeffreys" | "non_selective_jeffreys" | "nsj" => {
                PriorKind::NonSelectiveJeffreys
            }
            _ => {
                if let Some(args) = s.strip_prefix("normal(").and_then(|r| r.strip_suffix(')')) {
                    let mut parts = args.split(',').map(|p| p.trim().parse::<f64>());
                    if let (Some(Ok(mean)), Some(Ok(sd)), None) =
                        (parts.next(), parts.next(), parts.next())
                    {
                        if sd > 0.0 && mean.is_finite() && sd.is_finite() {
                            return Ok(PriorKind::Normal { mean, sd });
                        }
                    }
                }
                return Err(Error::Config(format!("unknown prior '{s}'")));
            }
        };
        Ok(kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        for k in PriorKind::NON_INFORMATIVE {
            assert_eq!(k.to_string().parse::<PriorKind>().unwrap(), k);
        }
        let n: PriorKind = "normal(0, 1)".parse().unwrap();
        assert_eq!(n, PriorKind::Normal { mean: 0.0, sd: 1.0 });
        assert_eq!(n.to_string().parse::<PriorKind>().unwrap(), n);
        assert!("normal(0,-1)".parse::<PriorKind>().is_err());
        assert!("beta".parse::<PriorKind>().is_err());
    }
}
