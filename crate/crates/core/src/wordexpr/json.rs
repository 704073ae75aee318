use serde::{Deserialize, Serialize};

use super::{BigExponent, Symbol, WordExpr};
use crate::error::{Error, Result};

/// Serialized form of a word: `{kind, symbol | children | base + exp}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WordJson {
    Letter { symbol: String },
    Concat { children: Vec<WordJson> },
    Power { base: Box<WordJson>, exp: BigExponent },
}

impl From<&WordExpr> for WordJson {
    fn from(w: &WordExpr) -> Self {
        match w {
            WordExpr::Letter(s) => WordJson::Letter { symbol: s.to_string() },
            WordExpr::Concat(cs) => WordJson::Concat { children: cs.iter().map(WordJson::from).collect() },
            WordExpr::Power { base, exp } => {
                WordJson::Power { base: Box::new(WordJson::from(base.as_ref())), exp: exp.clone() }
            }
        }
    }
}

impl TryFrom<&WordJson> for WordExpr {
    type Error = Error;
    fn try_from(j: &WordJson) -> Result<Self> {
        match j {
            WordJson::Letter { symbol } => {
                let mut chars = symbol.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => Ok(WordExpr::Letter(Symbol::from_char(c)?)),
                    _ => Err(Error::Config(format!("bad letter {symbol:?}"))),
                }
            }
            WordJson::Concat { children } => {
                Ok(WordExpr::concat(children.iter().map(WordExpr::try_from).collect::<Result<_>>()?))
            }
            WordJson::Power { base, exp } => Ok(WordExpr::power(WordExpr::try_from(base.as_ref())?, exp.clone())),
        }
    }
}

impl Serialize for WordExpr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WordJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for WordExpr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = WordJson::deserialize(d)?;
        WordExpr::try_from(&j).map_err(serde::de::Error::custom)
    }
}
