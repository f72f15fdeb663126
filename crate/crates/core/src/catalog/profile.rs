//! Investor profile taxonomy and sector names.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A closed set of display-labelled categories.
pub trait Category: Copy + Eq + Ord + std::hash::Hash + fmt::Debug + 'static {
    /// Every variant, in canonical (report) order.
    const ALL: &'static [Self];
    /// The catch-all variant for absent or unrecognized values.
    const FALLBACK: Self;

    fn label(self) -> &'static str;

    /// Lowercase underscore form used in file names.
    fn slug(self) -> &'static str;

    /// Matches labels case-insensitively, ignoring spaces, `_` and `-`.
    fn lookup(raw: &str) -> Option<Self> {
        if let Some(c) = Self::ALL.iter().copied().find(|c| c.label() == raw) {
            return Some(c);
        }
        let key = normalize(raw);
        Self::ALL.iter().copied().find(|c| {
            normalize(c.label()) == key || normalize(c.slug()) == key || normalize(&format!("{c:?}")) == key
        })
    }

    /// Like [`Category::lookup`] but maps anything unknown to the fallback.
    fn from_label(raw: &str) -> Self {
        Self::lookup(raw).unwrap_or(Self::FALLBACK)
    }
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| !matches!(c, ' ' | '_' | '-'))
        .flat_map(char::to_lowercase)
        .collect()
}

macro_rules! category_enum {
    (
        $(#[$meta:meta])*
        $name:ident fallback $fallback:ident {
            $($variant:ident => $label:literal, $slug:literal;)+
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
        pub enum $name {
            $($variant,)+
            #[default]
            $fallback,
        }

        impl Category for $name {
            const ALL: &'static [Self] = &[$($name::$variant,)+ $name::$fallback];
            const FALLBACK: Self = $name::$fallback;

            fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label,)+
                    $name::$fallback => category_enum!(@fallback_label $fallback),
                }
            }

            fn slug(self) -> &'static str {
                match self {
                    $($name::$variant => $slug,)+
                    $name::$fallback => category_enum!(@fallback_slug $fallback),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.label())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(d)?;
                <$name as Category>::lookup(&raw)
                    .ok_or_else(|| serde::de::Error::custom(format!("unknown {} {raw:?}", stringify!($name))))
            }
        }
    };
    (@fallback_label NotClassified) => { "Not Classified" };
    (@fallback_label Unknown) => { "Unknown" };
    (@fallback_slug NotClassified) => { "not_classified" };
    (@fallback_slug Unknown) => { "unknown" };
}

category_enum! {
    /// Self-declared investment approach.
    Approach fallback NotClassified {
        Technical => "Technical", "technical";
        Growth => "Growth", "growth";
        Momentum => "Momentum", "momentum";
        Fundamental => "Fundamental", "fundamental";
        Value => "Value", "value";
        GlobalMacro => "Global Macro", "global_macro";
    }
}

category_enum! {
    /// Self-declared investment horizon.
    HoldingPeriod fallback NotClassified {
        DayTrader => "Day Trader", "day_trader";
        SwingTrader => "Swing Trader", "swing_trader";
        PositionTrader => "Position Trader", "position_trader";
        LongTermInvestor => "Long Term Investor", "long_term_investor";
    }
}

category_enum! {
    /// Self-declared experience level.
    Experience fallback NotClassified {
        Novice => "Novice", "novice";
        Intermediate => "Intermediate", "intermediate";
        Professional => "Professional", "professional";
    }
}

category_enum! {
    /// Closed sector taxonomy; `Unknown` marks tickers absent from the catalog.
    /// Declaration order is the report order.
    Sector fallback Unknown {
        BasicMaterials => "Basic Materials", "basic_materials";
        Technology => "Technology", "technology";
        Healthcare => "Healthcare", "healthcare";
        IndustrialGoods => "Industrial Goods", "industrial_goods";
        Services => "Services", "services";
        ConsumerGoods => "Consumer Goods", "consumer_goods";
        Financial => "Financial", "financial";
        Utilities => "Utilities", "utilities";
        Conglomerates => "Conglomerates", "conglomerates";
    }
}

impl Sector {
    /// Strict name lookup for catalog files. Accepts "Service" for Services
    /// and never yields `Unknown`.
    pub fn from_catalog_name(raw: &str) -> Option<Sector> {
        match Sector::lookup(raw) {
            Some(Sector::Unknown) => None,
            Some(s) => Some(s),
            None if normalize(raw) == "service" => Some(Sector::Services),
            None => None,
        }
    }
}

/// The three self-reported profile dimensions. Absent values are `NotClassified`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct InvestorProfile {
    pub approach: Approach,
    pub holding_period: HoldingPeriod,
    pub experience: Experience,
}

impl InvestorProfile {
    pub fn new(approach: Approach, holding_period: HoldingPeriod, experience: Experience) -> Self {
        InvestorProfile {
            approach,
            holding_period,
            experience,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_lookup_is_lenient() {
        assert_eq!(Approach::from_label("Global Macro"), Approach::GlobalMacro);
        assert_eq!(Approach::from_label("global_macro"), Approach::GlobalMacro);
        assert_eq!(Approach::from_label("GlobalMacro"), Approach::GlobalMacro);
        assert_eq!(HoldingPeriod::from_label("long term investor"), HoldingPeriod::LongTermInvestor);
        assert_eq!(Experience::from_label("Guru"), Experience::NotClassified);
        assert_eq!(Experience::from_label(""), Experience::NotClassified);
    }

    #[test]
    fn sector_catalog_names() {
        assert_eq!(Sector::from_catalog_name("ConsumerGoods"), Some(Sector::ConsumerGoods));
        assert_eq!(Sector::from_catalog_name("Consumer Goods"), Some(Sector::ConsumerGoods));
        assert_eq!(Sector::from_catalog_name("Service"), Some(Sector::Services));
        assert_eq!(Sector::from_catalog_name("Unknown"), None);
        assert_eq!(Sector::from_catalog_name("Crypto"), None);
    }

    #[test]
    fn all_lists_fallback_last() {
        assert_eq!(*Approach::ALL.last().unwrap(), Approach::NotClassified);
        assert_eq!(Approach::ALL.len(), 7);
        assert_eq!(HoldingPeriod::ALL.len(), 5);
        assert_eq!(Experience::ALL.len(), 4);
        assert_eq!(Sector::ALL.len(), 10);
    }

    #[test]
    fn serde_uses_labels() {
        let p = InvestorProfile::new(Approach::GlobalMacro, HoldingPeriod::DayTrader, Experience::NotClassified);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(
            json,
            r#"{"approach":"Global Macro","holding_period":"Day Trader","experience":"Not Classified"}"#
        );
        let back: InvestorProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
