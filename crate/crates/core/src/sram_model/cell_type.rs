use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Millivolts;

/// Sizing configuration of a 6T cell. The first letter names the nMOS width,
/// the second the pMOS width: S = 1x, M = 1.5x, L = 2x the minimum width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellTypeName {
    SS,
    SM,
    SL,
    MM,
    LS,
}

impl CellTypeName {
    pub const ALL: [CellTypeName; 5] = [
        CellTypeName::SS,
        CellTypeName::SM,
        CellTypeName::SL,
        CellTypeName::MM,
        CellTypeName::LS,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CellTypeName::SS => "SS",
            CellTypeName::SM => "SM",
            CellTypeName::SL => "SL",
            CellTypeName::MM => "MM",
            CellTypeName::LS => "LS",
        }
    }

    /// Minimum word-line write voltage from typical-corner circuit simulation.
    pub fn simulated_vwl_min(self) -> Millivolts {
        Millivolts(match self {
            CellTypeName::SS => 792,
            CellTypeName::SM => 853,
            CellTypeName::SL => 897,
            CellTypeName::MM => 803,
            CellTypeName::LS => 726,
        })
    }

    fn ratios(self) -> (f64, f64) {
        let width = |c: u8| match c {
            b'S' => 1.0,
            b'M' => 1.5,
            _ => 2.0,
        };
        let b = self.as_str().as_bytes();
        (width(b[0]), width(b[1]))
    }
}

impl fmt::Display for CellTypeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CellTypeName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CellTypeName::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown cell type `{s}`")))
    }
}

/// A cell type with its nMOS/pMOS width ratios relative to the minimum width.
///
/// The ratios are metadata: robustness differences between types enter the
/// model only through [`super::VariationModel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellType {
    pub name: CellTypeName,
    pub r_n: f64,
    pub r_p: f64,
}

impl CellType {
    pub fn new(name: CellTypeName, r_n: f64, r_p: f64) -> Result<Self> {
        if !(r_n >= 1.0 && r_p >= 1.0) {
            return Err(Error::Config(format!(
                "sizing ratios must be >= 1, got r_n={r_n}, r_p={r_p}"
            )));
        }
        Ok(CellType { name, r_n, r_p })
    }

    pub fn bundled(name: CellTypeName) -> Self {
        let (r_n, r_p) = name.ratios();
        CellType { name, r_n, r_p }
    }

    pub fn all() -> [CellType; 5] {
        CellTypeName::ALL.map(CellType::bundled)
    }
}

impl From<CellTypeName> for CellType {
    fn from(name: CellTypeName) -> Self {
        CellType::bundled(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_ratios_follow_the_naming() {
        let got: Vec<(f64, f64)> = CellType::all().iter().map(|c| (c.r_n, c.r_p)).collect();
        assert_eq!(
            got,
            vec![(1.0, 1.0), (1.0, 1.5), (1.0, 2.0), (1.5, 1.5), (2.0, 1.0)]
        );
    }

    #[test]
    fn ratios_below_one_are_rejected() {
        assert!(CellType::new(CellTypeName::SS, 0.9, 1.0).is_err());
        assert!(CellType::new(CellTypeName::SS, 1.0, f64::NAN).is_err());
        assert!(CellType::new(CellTypeName::MM, 1.5, 1.5).is_ok());
    }

    #[test]
    fn names_parse_case_insensitively() {
        assert_eq!("ls".parse::<CellTypeName>().unwrap(), CellTypeName::LS);
        assert!("XX".parse::<CellTypeName>().is_err());
    }
}
