use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::{Approach, Category, Experience, HoldingPeriod, InvestorProfile, Sector, TickerCatalog};
use crate::ingest::Ticker;

/// Firm-side grouping value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group1 {
    AllFirms,
    Sector(Sector),
    Industry(String),
    Firm(Ticker),
}

/// Investor-side grouping value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Group2 {
    AllInvestors,
    Approach(Approach),
    HoldingPeriod(HoldingPeriod),
    Experience(Experience),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub group1: Group1,
    pub group2: Group2,
}

impl Group1 {
    pub fn label(&self) -> String {
        match self {
            Group1::AllFirms => "All Firms".into(),
            Group1::Sector(s) => s.label().into(),
            Group1::Industry(i) => i.clone(),
            Group1::Firm(t) => t.to_string(),
        }
    }
}

impl Group2 {
    pub fn label(&self) -> &'static str {
        match self {
            Group2::AllInvestors => "All Investors",
            Group2::Approach(c) => c.label(),
            Group2::HoldingPeriod(c) => c.label(),
            Group2::Experience(c) => c.label(),
        }
    }

    /// True for the NotClassified bucket of a profile dimension.
    pub fn is_unclassified(&self) -> bool {
        match self {
            Group2::AllInvestors => false,
            Group2::Approach(c) => *c == Approach::NotClassified,
            Group2::HoldingPeriod(c) => *c == HoldingPeriod::NotClassified,
            Group2::Experience(c) => *c == Experience::NotClassified,
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} / {}", self.group1.label(), self.group2.label())
    }
}

/// Which firm-side dimension to group by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group1Dim {
    AllFirms,
    Sector,
    Industry,
    Firm,
}

/// Which investor-side dimension to group by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group2Dim {
    AllInvestors,
    Approach,
    HoldingPeriod,
    Experience,
}

impl Group1Dim {
    pub const ALL: [Group1Dim; 4] = [Group1Dim::AllFirms, Group1Dim::Sector, Group1Dim::Industry, Group1Dim::Firm];

    pub fn slug(self) -> &'static str {
        match self {
            Group1Dim::AllFirms => "all",
            Group1Dim::Sector => "sector",
            Group1Dim::Industry => "industry",
            Group1Dim::Firm => "firm",
        }
    }

    pub fn key(self, ticker: &Ticker, catalog: &TickerCatalog) -> Group1 {
        match self {
            Group1Dim::AllFirms => Group1::AllFirms,
            Group1Dim::Sector => Group1::Sector(catalog.sector(ticker)),
            Group1Dim::Industry => Group1::Industry(catalog.industry(ticker).to_string()),
            Group1Dim::Firm => Group1::Firm(*ticker),
        }
    }
}

impl Group2Dim {
    pub const ALL: [Group2Dim; 4] = [
        Group2Dim::AllInvestors,
        Group2Dim::Approach,
        Group2Dim::HoldingPeriod,
        Group2Dim::Experience,
    ];

    pub fn slug(self) -> &'static str {
        match self {
            Group2Dim::AllInvestors => "all",
            Group2Dim::Approach => "approach",
            Group2Dim::HoldingPeriod => "holding_period",
            Group2Dim::Experience => "experience",
        }
    }

    /// Column title used in report tables.
    pub fn title(self) -> &'static str {
        match self {
            Group2Dim::AllInvestors => "Investors",
            Group2Dim::Approach => "Approach",
            Group2Dim::HoldingPeriod => "Holding Period",
            Group2Dim::Experience => "Experience",
        }
    }

    pub fn key(self, profile: &InvestorProfile) -> Group2 {
        match self {
            Group2Dim::AllInvestors => Group2::AllInvestors,
            Group2Dim::Approach => Group2::Approach(profile.approach),
            Group2Dim::HoldingPeriod => Group2::HoldingPeriod(profile.holding_period),
            Group2Dim::Experience => Group2::Experience(profile.experience),
        }
    }
}

impl FromStr for Group1Dim {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Group1Dim::ALL
            .into_iter()
            .find(|d| d.slug() == s || (s == "all_firms" && *d == Group1Dim::AllFirms))
            .ok_or_else(|| format!("unknown group1 dimension {s:?} (all|sector|industry|firm)"))
    }
}

impl FromStr for Group2Dim {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Group2Dim::ALL
            .into_iter()
            .find(|d| d.slug() == s || (s == "all_investors" && *d == Group2Dim::AllInvestors))
            .ok_or_else(|| format!("unknown group2 dimension {s:?} (all|approach|holding_period|experience)"))
    }
}
