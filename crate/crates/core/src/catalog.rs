//! Surface catalog and the known-discrepancy file, both TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graded::{generator_data, GeneratorData};
use crate::lattice::SurfaceState;
use crate::rational::{self, Rational};
use crate::wps::{singularity_report, HypersurfaceSpec, SingularityReport};
use crate::{Error, Result};

pub const EMBEDDED_CATALOG: &str = include_str!("../data/catalog.toml");
pub const EMBEDDED_EXPECTATIONS: &str = include_str!("../data/expectations.toml");
pub const CATALOG_ENV: &str = "K3ORB_CATALOG";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singularities: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euler: Option<i64>,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "rational::serde_str_opt"
    )]
    pub budget: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_tuple: Option<Vec<i64>>,
    /// The tuple as printed, when normalization was needed to read it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_tuple_raw: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub weights: [u64; 4],
    pub degree: u64,
    #[serde(default)]
    pub chain: Vec<String>,
    #[serde(default)]
    pub expected: Expected,
}

/// The surface data derived from an entry's weights and degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseData {
    pub report: SingularityReport,
    pub generator: GeneratorData,
    pub state: SurfaceState,
}

impl CatalogEntry {
    pub fn spec(&self) -> Result<HypersurfaceSpec> {
        HypersurfaceSpec::generic(self.weights, self.degree)
    }

    pub fn base(&self) -> Result<BaseData> {
        let spec = self.spec()?;
        let report = singularity_report(&spec)?;
        let generator = generator_data(&spec, &report)?;
        let base_id = format!("P{:?}[{}]", self.weights, self.degree);
        let state = SurfaceState::from_report(&base_id, &report, generator.degree, generator.h_self)?;
        Ok(BaseData {
            report,
            generator,
            state,
        })
    }

    /// The surface after the full chain.
    pub fn state(&self) -> Result<SurfaceState> {
        self.base()?.state.apply_chain(&self.chain)
    }

    /// Every intermediate surface, base first.
    pub fn stages(&self) -> Result<Vec<SurfaceState>> {
        let mut out = vec![self.base()?.state];
        for step in &self.chain {
            let next = crate::lattice::blow_up(out.last().unwrap(), step.parse()?)?;
            out.push(next);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    #[serde(rename = "entry")]
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Self> {
        let cat: Catalog = toml::from_str(text).map_err(|e| Error::Catalog(e.to_string()))?;
        let mut seen = std::collections::BTreeSet::new();
        for e in &cat.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Catalog(format!("duplicate entry id {}", e.id)));
            }
        }
        Ok(cat)
    }

    pub fn embedded() -> Self {
        Catalog::parse(EMBEDDED_CATALOG).expect("embedded catalog parses")
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Catalog(format!("{}: {e}", path.display())))?;
        Catalog::parse(&text)
    }

    /// An explicit path wins over the environment override, which wins
    /// over the embedded defaults.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Catalog::from_path(p),
            None => match std::env::var_os(CATALOG_ENV) {
                Some(p) => Catalog::from_path(Path::new(&p)),
                None => Ok(Catalog::embedded()),
            },
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Catalog(e.to_string()))
    }

    pub fn get(&self, id: &str) -> Result<&CatalogEntry> {
        self.entries
            .iter()
            .find(|e| e.id == id)
            .ok_or_else(|| Error::UnknownEntry(id.to_string()))
    }

    /// Entries carrying rows of the given table, in catalog order.
    pub fn table_rows(&self, table: u8) -> impl Iterator<Item = &CatalogEntry> {
        self.entries.iter().filter(move |e| e.expected.tables.contains(&table))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub id: String,
    pub quantity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<u8>,
    #[serde(with = "rational::serde_str")]
    pub printed: Rational,
    #[serde(with = "rational::serde_str")]
    pub computed: Rational,
    #[serde(default)]
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectations {
    #[serde(rename = "discrepancy", default)]
    pub discrepancies: Vec<Discrepancy>,
}

impl Expectations {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Catalog(e.to_string()))
    }

    pub fn embedded() -> Self {
        Expectations::parse(EMBEDDED_EXPECTATIONS).expect("embedded expectations parse")
    }

    pub fn find(&self, id: &str, quantity: &str) -> Option<&Discrepancy> {
        self.discrepancies
            .iter()
            .find(|d| d.id == id && d.quantity == quantity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_catalog_shape() {
        let c = Catalog::embedded();
        assert_eq!(c.entries.len(), 20);
        assert_eq!(c.table_rows(1).count(), 8);
        assert_eq!(c.table_rows(2).count(), 8);
        assert_eq!(c.table_rows(3).count(), 17);
        assert!(matches!(c.get("Xt99"), Err(Error::UnknownEntry(_))));
    }

    #[test]
    fn round_trip() {
        let c = Catalog::embedded();
        let again = Catalog::parse(&c.to_toml().unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = "[[entry]]\nid='a'\nweights=[1,1,1,1]\ndegree=4\n[[entry]]\nid='a'\nweights=[1,1,1,1]\ndegree=4\n";
        assert!(Catalog::parse(text).is_err());
    }

    #[test]
    fn chains_apply() {
        for e in &Catalog::embedded().entries {
            let s = e.state().unwrap();
            assert_eq!(Some(s.euler), e.expected.euler, "{}", e.id);
            assert_eq!(Some(&s.labels()), e.expected.singularities.as_ref(), "{}", e.id);
        }
    }

    #[test]
    fn expectations_parse() {
        let x = Expectations::embedded();
        assert_eq!(x.find("Xt5", "q_self").unwrap().computed, rational::int(70));
        assert!(x.find("Xt2", "q_self").is_none());
    }
}
