use indexmap::IndexMap;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{ModelError, TubularGroup};

/// Positive integers `k_e`, one per edge, in edge order.
///
/// Only positive entries are represented: `k_e·G_e = |k_e|·G_e`, so negative
/// entries never change which tuples are regulating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ETuple {
    entries: IndexMap<String, BigInt>,
}

impl ETuple {
    pub fn new<S: Into<String>>(
        entries: impl IntoIterator<Item = (S, BigInt)>,
    ) -> Result<Self, ModelError> {
        let entries: IndexMap<String, BigInt> =
            entries.into_iter().map(|(k, v)| (k.into(), v)).collect();
        if let Some((edge, _)) = entries.iter().find(|(_, k)| !k.is_positive()) {
            return Err(ModelError::NonPositiveEntry { edge: edge.clone() });
        }
        Ok(ETuple { entries })
    }

    pub fn from_ints<'a>(
        entries: impl IntoIterator<Item = (&'a str, i64)>,
    ) -> Result<Self, ModelError> {
        ETuple::new(entries.into_iter().map(|(e, k)| (e, BigInt::from(k))))
    }

    /// All ones over the edges of `g`.
    pub fn ones(g: &TubularGroup) -> Self {
        ETuple {
            entries: g
                .edge_ids()
                .map(|e| (e.to_string(), BigInt::one()))
                .collect(),
        }
    }

    pub fn get(&self, edge: &str) -> Option<&BigInt> {
        self.entries.get(edge)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BigInt)> {
        self.entries.iter().map(|(e, k)| (e.as_str(), k))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn gcd(&self) -> BigInt {
        self.entries.values().fold(BigInt::zero(), |g, k| g.gcd(k))
    }

    pub fn is_normalized(&self) -> bool {
        self.is_empty() || self.gcd().is_one()
    }

    /// Divides out the gcd of all entries.
    pub fn normalized(&self) -> ETuple {
        let g = self.gcd();
        if g.is_zero() {
            return self.clone();
        }
        ETuple {
            entries: self
                .entries
                .iter()
                .map(|(e, k)| (e.clone(), k / &g))
                .collect(),
        }
    }

    pub fn scaled(&self, n: &BigInt) -> Result<ETuple, ModelError> {
        ETuple::new(self.entries.iter().map(|(e, k)| (e.clone(), k * n)))
    }

    /// Appends or overwrites the entry for `edge`.
    pub fn with(mut self, edge: impl Into<String>, k: BigInt) -> Result<ETuple, ModelError> {
        let edge = edge.into();
        if !k.is_positive() {
            return Err(ModelError::NonPositiveEntry { edge });
        }
        self.entries.insert(edge, k);
        Ok(self)
    }
}

impl Serialize for ETuple {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.entries.len()))?;
        for (e, k) in &self.entries {
            map.serialize_entry(e, &k.to_string())?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for ETuple {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw: IndexMap<String, String> = IndexMap::deserialize(deserializer)?;
        let entries = raw
            .into_iter()
            .map(|(e, k)| {
                k.trim()
                    .parse::<BigInt>()
                    .map(|k| (e, k))
                    .map_err(serde::de::Error::custom)
            })
            .collect::<Result<Vec<_>, _>>()?;
        ETuple::new(entries).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_divides_gcd() {
        let k = ETuple::from_ints([("s", 4), ("t", 6)]).unwrap();
        assert!(!k.is_normalized());
        let n = k.normalized();
        assert_eq!(n, ETuple::from_ints([("s", 2), ("t", 3)]).unwrap());
        assert!(n.is_normalized());
    }

    #[test]
    fn rejects_nonpositive_entries() {
        assert_eq!(
            ETuple::from_ints([("s", 1), ("t", 0)]),
            Err(ModelError::NonPositiveEntry { edge: "t".into() })
        );
    }

    #[test]
    fn serializes_as_string_map() {
        let k = ETuple::from_ints([("s", 3), ("t", 1)]).unwrap();
        let text = serde_json::to_string(&k).unwrap();
        assert_eq!(text, r#"{"s":"3","t":"1"}"#);
        assert_eq!(serde_json::from_str::<ETuple>(&text).unwrap(), k);
    }
}
