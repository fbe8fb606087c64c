//! JSON interchange formats. Every top-level document carries `"format": 1`.
//!
//! Probability vectors are row-major over the product of the type spaces with
//! the last bidder varying fastest. Lottery charges are indexed by
//! `(v_{-i}, s_1, ..., s_m)` with the opponent profile slowest and each sample
//! a joint profile index in the same row-major order.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::dist::{DistributionFamily, JointDistribution, TypeSpace};
use crate::error::{Error, Result};
use crate::mechanisms::{LotterySchedule, SampleAuction};
use crate::verify::CertificationReport;

pub const FORMAT_VERSION: u32 = 1;

fn format_version() -> u32 {
    FORMAT_VERSION
}

fn check_format(found: u32) -> Result<()> {
    if found == FORMAT_VERSION {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("unsupported format version {found}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionFile {
    #[serde(default = "format_version")]
    pub format: u32,
    pub type_spaces: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
}

impl DistributionFile {
    pub fn from_distribution(d: &JointDistribution) -> Self {
        Self { format: FORMAT_VERSION, type_spaces: d.space().all_values().to_vec(), probs: d.probs().to_vec() }
    }

    pub fn into_distribution(self) -> Result<JointDistribution> {
        check_format(self.format)?;
        JointDistribution::new(TypeSpace::new(self.type_spaces)?, self.probs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    #[serde(default = "format_version")]
    pub format: u32,
    pub members: Vec<DistributionFile>,
    #[serde(default)]
    pub labels: Vec<String>,
}

impl FamilyFile {
    pub fn from_family(fam: &DistributionFamily) -> Self {
        Self {
            format: FORMAT_VERSION,
            members: fam.members().iter().map(DistributionFile::from_distribution).collect(),
            labels: fam.labels().to_vec(),
        }
    }

    /// Missing labels default to `D1, D2, ...`.
    pub fn into_family(self) -> Result<DistributionFamily> {
        check_format(self.format)?;
        let members = self.members.into_iter().map(DistributionFile::into_distribution).collect::<Result<Vec<_>>>()?;
        if self.labels.is_empty() {
            DistributionFamily::new(members)
        } else {
            DistributionFamily::with_labels(members, self.labels)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LotteryEntry {
    pub bidder: usize,
    pub charges: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuctionFile {
    #[serde(default = "format_version")]
    pub format: u32,
    pub m: usize,
    pub residuals: Vec<f64>,
    pub lotteries: Vec<LotteryEntry>,
}

impl AuctionFile {
    pub fn from_auction(a: &SampleAuction) -> Self {
        Self {
            format: FORMAT_VERSION,
            m: a.m(),
            residuals: a.residuals().to_vec(),
            lotteries: a
                .lotteries()
                .iter()
                .map(|l| LotteryEntry { bidder: l.bidder, charges: l.charges.clone() })
                .collect(),
        }
    }

    /// Reattach the family the auction was built for; shapes are checked.
    pub fn into_auction(self, family: DistributionFamily) -> Result<SampleAuction> {
        check_format(self.format)?;
        let m = self.m;
        let lotteries = self
            .lotteries
            .into_iter()
            .map(|e| LotterySchedule { bidder: e.bidder, m, charges: e.charges })
            .collect();
        SampleAuction::from_parts(family, m, lotteries, self.residuals)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationFile {
    #[serde(default = "format_version")]
    pub format: u32,
    pub tol: f64,
    pub all_ok: bool,
    pub reports: Vec<CertificationReport>,
}

impl CertificationFile {
    pub fn new(tol: f64, reports: Vec<CertificationReport>) -> Self {
        let all_ok = reports.iter().all(CertificationReport::all_ok);
        Self { format: FORMAT_VERSION, tol, all_ok, reports }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_distribution(path: &Path) -> Result<JointDistribution> {
    read_json::<DistributionFile>(path)?.into_distribution()
}

pub fn read_family(path: &Path) -> Result<DistributionFamily> {
    read_json::<FamilyFile>(path)?.into_family()
}

pub fn write_family(path: &Path, fam: &DistributionFamily) -> Result<()> {
    write_json(path, &FamilyFile::from_family(fam))
}

pub fn read_auction(path: &Path, family: DistributionFamily) -> Result<SampleAuction> {
    read_json::<AuctionFile>(path)?.into_auction(family)
}

pub fn write_auction(path: &Path, auction: &SampleAuction) -> Result<()> {
    write_json(path, &AuctionFile::from_auction(auction))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::coin_family;
    use proptest::prelude::*;

    #[test]
    fn distribution_schema_field_names() {
        let text = r#"{"type_spaces": [[1, 2], [1, 2]], "probs": [0.25, 0.25, 0.25, 0.25]}"#;
        let d = serde_json::from_str::<DistributionFile>(text).unwrap().into_distribution().unwrap();
        assert_eq!(d.probs(), &[0.25; 4]);
        let v: serde_json::Value = serde_json::to_value(DistributionFile::from_distribution(&d)).unwrap();
        assert_eq!(v["format"], 1);
        assert!(v.get("type_spaces").is_some() && v.get("probs").is_some());
    }

    #[test]
    fn rejects_unknown_format() {
        let text = r#"{"format": 2, "type_spaces": [[1], [1]], "probs": [1.0]}"#;
        assert!(serde_json::from_str::<DistributionFile>(text).unwrap().into_distribution().is_err());
    }

    #[test]
    fn family_without_labels() {
        let text = r#"{"members": [{"type_spaces": [[1], [1]], "probs": [1.0]}]}"#;
        let fam = serde_json::from_str::<FamilyFile>(text).unwrap().into_family().unwrap();
        assert_eq!(fam.labels(), &["D1".to_string()]);
    }

    #[test]
    fn auction_schema() {
        let fam = coin_family(2, 0.1).unwrap();
        let auction = SampleAuction::zero(fam.clone(), 1);
        let v = serde_json::to_value(AuctionFile::from_auction(&auction)).unwrap();
        assert_eq!(v["m"], 1);
        assert_eq!(v["lotteries"][1]["bidder"], 1);
        assert_eq!(v["lotteries"][1]["charges"].as_array().unwrap().len(), 8);
        let back: AuctionFile = serde_json::from_value(v).unwrap();
        assert_eq!(back.into_auction(fam).unwrap(), auction);
    }

    proptest! {
        #[test]
        fn family_round_trip_is_bitwise(
            raw in prop::collection::vec(prop::collection::vec(0.001f64..1.0, 6), 1..4),
        ) {
            let space = TypeSpace::new(vec![vec![0.0, 1.5], vec![1.0, 2.0, 7.25]]).unwrap();
            let members: Vec<JointDistribution> = raw
                .into_iter()
                .map(|w| {
                    let s: f64 = w.iter().sum();
                    JointDistribution::new(space.clone(), w.iter().map(|x| x / s).collect()).unwrap()
                })
                .collect();
            let fam = DistributionFamily::new(members).unwrap();
            let text = serde_json::to_string(&FamilyFile::from_family(&fam)).unwrap();
            let back = serde_json::from_str::<FamilyFile>(&text).unwrap().into_family().unwrap();
            for (a, b) in fam.members().iter().zip(back.members()) {
                let abits: Vec<u64> = a.probs().iter().map(|x| x.to_bits()).collect();
                let bbits: Vec<u64> = b.probs().iter().map(|x| x.to_bits()).collect();
                prop_assert_eq!(abits, bbits);
            }
        }
    }
}
