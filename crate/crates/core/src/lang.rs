//! Language tags for the 24 official EU languages, source code, and an
//! `unknown` sentinel.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LanguageTag {
    Bg,
    Cs,
    Da,
    De,
    El,
    En,
    Es,
    Et,
    Fi,
    Fr,
    Ga,
    Hr,
    Hu,
    It,
    Lt,
    Lv,
    Mt,
    Nl,
    Pl,
    Pt,
    Ro,
    Sk,
    Sl,
    Sv,
    Code,
    Unknown,
}

impl LanguageTag {
    /// The 24 official EU languages, alphabetical by code.
    pub const EU24: [LanguageTag; 24] = [
        LanguageTag::Bg,
        LanguageTag::Cs,
        LanguageTag::Da,
        LanguageTag::De,
        LanguageTag::El,
        LanguageTag::En,
        LanguageTag::Es,
        LanguageTag::Et,
        LanguageTag::Fi,
        LanguageTag::Fr,
        LanguageTag::Ga,
        LanguageTag::Hr,
        LanguageTag::Hu,
        LanguageTag::It,
        LanguageTag::Lt,
        LanguageTag::Lv,
        LanguageTag::Mt,
        LanguageTag::Nl,
        LanguageTag::Pl,
        LanguageTag::Pt,
        LanguageTag::Ro,
        LanguageTag::Sk,
        LanguageTag::Sl,
        LanguageTag::Sv,
    ];

    pub fn as_str(self) -> &'static str {
        use LanguageTag::*;
        match self {
            Bg => "bg",
            Cs => "cs",
            Da => "da",
            De => "de",
            El => "el",
            En => "en",
            Es => "es",
            Et => "et",
            Fi => "fi",
            Fr => "fr",
            Ga => "ga",
            Hr => "hr",
            Hu => "hu",
            It => "it",
            Lt => "lt",
            Lv => "lv",
            Mt => "mt",
            Nl => "nl",
            Pl => "pl",
            Pt => "pt",
            Ro => "ro",
            Sk => "sk",
            Sl => "sl",
            Sv => "sv",
            Code => "code",
            Unknown => "unknown",
        }
    }

    /// Lenient lookup: anything outside the closed set maps to `Unknown`.
    pub fn from_code(code: &str) -> LanguageTag {
        code.parse().unwrap_or(LanguageTag::Unknown)
    }

    pub fn is_natural_language(self) -> bool {
        !matches!(self, LanguageTag::Code | LanguageTag::Unknown)
    }
}

impl FromStr for LanguageTag {
    type Err = Error;

    /// Strict parse. Codes are matched exactly (lowercase).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "code" => Ok(LanguageTag::Code),
            "unknown" => Ok(LanguageTag::Unknown),
            _ => LanguageTag::EU24
                .iter()
                .copied()
                .find(|tag| tag.as_str() == s)
                .ok_or_else(|| Error::Invalid(format!("unknown language code {s:?}"))),
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for LanguageTag {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for LanguageTag {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let code = String::deserialize(deserializer)?;
        Ok(LanguageTag::from_code(&code))
    }
}
