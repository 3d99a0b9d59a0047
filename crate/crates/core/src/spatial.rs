//! Gazetteer lookup for place names, standing in for a GIS service.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thesaurus::normalize_label;

pub const GAZETTEER_HEADER: [&str; 5] = ["name", "admin", "class", "lon", "lat"];

/// Mean Earth radius in kilometres.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FeatureClass {
    #[serde(rename = "commune")]
    Commune,
    #[serde(rename = "lieu-dit")]
    LieuDit,
    #[serde(rename = "route")]
    Route,
    #[serde(rename = "pic")]
    Pic,
    #[serde(rename = "vallée")]
    Vallee,
    #[serde(rename = "région")]
    Region,
    #[serde(rename = "autre")]
    Autre,
}

impl FeatureClass {
    pub const ALL: [FeatureClass; 7] = [
        FeatureClass::Commune,
        FeatureClass::LieuDit,
        FeatureClass::Route,
        FeatureClass::Pic,
        FeatureClass::Vallee,
        FeatureClass::Region,
        FeatureClass::Autre,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureClass::Commune => "commune",
            FeatureClass::LieuDit => "lieu-dit",
            FeatureClass::Route => "route",
            FeatureClass::Pic => "pic",
            FeatureClass::Vallee => "vallée",
            FeatureClass::Region => "région",
            FeatureClass::Autre => "autre",
        }
    }
}

impl fmt::Display for FeatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = normalize_label(s);
        FeatureClass::ALL
            .into_iter()
            .find(|c| c.as_str() == key)
            .ok_or_else(|| Error::validation(format!("unknown feature class {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub name: String,
    pub admin: String,
    #[serde(rename = "class")]
    pub feature_class: FeatureClass,
    pub lon: f64,
    pub lat: f64,
}

impl GazetteerEntry {
    pub fn new(name: &str, admin: &str, feature_class: FeatureClass, lon: f64, lat: f64) -> Result<Self> {
        if name.trim().is_empty() {
            return Err(Error::validation("gazetteer entry with empty name"));
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(Error::validation(format!("longitude {lon} out of range for {name:?}")));
        }
        if !(-90.0..=90.0).contains(&lat) {
            return Err(Error::validation(format!("latitude {lat} out of range for {name:?}")));
        }
        Ok(GazetteerEntry {
            name: name.trim().to_string(),
            admin: admin.trim().to_string(),
            feature_class,
            lon,
            lat,
        })
    }

    /// Great-circle distance to `other`.
    pub fn distance_km(&self, other: &GazetteerEntry) -> f64 {
        haversine_km(self.lon, self.lat, other.lon, other.lat)
    }
}

pub fn haversine_km(lon1: f64, lat1: f64, lon2: f64, lat2: f64) -> f64 {
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = phi2 - phi1;
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().min(1.0).asin()
}

/// A label split into its base and an optional trailing `(qualifier)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelParts {
    pub base: String,
    pub qualifier: Option<String>,
}

pub fn parse_label_qualifier(label: &str) -> Result<LabelParts> {
    let trimmed = label.trim();
    let mut depth = 0i32;
    for c in trimmed.chars() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::validation(format!("unbalanced parentheses in {label:?}")));
                }
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::validation(format!("unbalanced parentheses in {label:?}")));
    }

    let Some(inner_end) = trimmed.strip_suffix(')') else {
        if trimmed.is_empty() {
            return Err(Error::validation("empty label"));
        }
        return Ok(LabelParts {
            base: trimmed.to_string(),
            qualifier: None,
        });
    };
    let open = inner_end.rfind('(').expect("balanced");
    let qualifier = inner_end[open + 1..].trim();
    let base = inner_end[..open].trim_end();
    if qualifier.contains(')') {
        return Err(Error::validation(format!("nested qualifier in {label:?}")));
    }
    if qualifier.is_empty() || base.is_empty() {
        return Err(Error::validation(format!("empty base or qualifier in {label:?}")));
    }
    Ok(LabelParts {
        base: base.to_string(),
        qualifier: Some(qualifier.to_string()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchStatus {
    Matched,
    Ambiguous,
    Unmatched,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMatch {
    entries: Vec<GazetteerEntry>,
}

impl SpatialMatch {
    pub fn from_entries(entries: Vec<GazetteerEntry>) -> Self {
        SpatialMatch { entries }
    }

    pub fn unmatched() -> Self {
        SpatialMatch { entries: Vec::new() }
    }

    pub fn status(&self) -> MatchStatus {
        match self.entries.len() {
            0 => MatchStatus::Unmatched,
            1 => MatchStatus::Matched,
            _ => MatchStatus::Ambiguous,
        }
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    /// The single entry of a matched result.
    pub fn matched(&self) -> Option<&GazetteerEntry> {
        match self.entries.as_slice() {
            [one] => Some(one),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    by_name: BTreeMap<String, Vec<usize>>,
}

impl Gazetteer {
    pub fn from_entries(entries: Vec<GazetteerEntry>) -> Self {
        let mut by_name: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_name.entry(normalize_label(&e.name)).or_default().push(i);
        }
        Gazetteer { entries, by_name }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn named<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a GazetteerEntry> + 'a {
        self.by_name
            .get(&normalize_label(name))
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
    }
}

/// Loads a gazetteer from CSV with header `name,admin,class,lon,lat`.
pub fn load_gazetteer(content: &str) -> Result<Gazetteer> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::Format(format!("gazetteer header: {e}")))?
        .clone();
    let mut columns = [0usize; 5];
    for (slot, name) in columns.iter_mut().zip(GAZETTEER_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| Error::Format(format!("gazetteer header is missing column {name:?}")))?;
    }

    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(0),
            message: e.to_string(),
        })?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |i: usize| record.get(columns[i]).unwrap_or("");
        let coord = |i: usize| {
            field(i).parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                Error::validation(format!("row {row}: bad {} value {:?}", GAZETTEER_HEADER[i], field(i)))
            })
        };
        let class: FeatureClass = field(2)
            .parse()
            .map_err(|e| Error::validation(format!("row {row}: {e}")))?;
        let entry = GazetteerEntry::new(field(0), field(1), class, coord(3)?, coord(4)?)
            .map_err(|e| Error::validation(format!("row {row}: {e}")))?;
        entries.push(entry);
    }
    Ok(Gazetteer::from_entries(entries))
}

/// Anything that can classify a label as a place.
pub trait Resolve {
    fn resolve(&self, label: &str) -> SpatialMatch;
}

/// Resolves labels by base name, filtering by the parenthesized qualifier.
#[derive(Debug, Clone)]
pub struct SpatialResolver {
    gazetteer: Gazetteer,
    countries: BTreeSet<String>,
}

impl SpatialResolver {
    pub fn new(gazetteer: Gazetteer) -> Self {
        Self::with_countries(gazetteer, ["France"])
    }

    /// `countries` are qualifiers that also accept entries with an empty admin.
    pub fn with_countries<I, S>(gazetteer: Gazetteer, countries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        SpatialResolver {
            gazetteer,
            countries: countries.into_iter().map(|c| normalize_label(c.as_ref())).collect(),
        }
    }

    pub fn gazetteer(&self) -> &Gazetteer {
        &self.gazetteer
    }
}

impl Resolve for SpatialResolver {
    fn resolve(&self, label: &str) -> SpatialMatch {
        let parts = parse_label_qualifier(label).unwrap_or_else(|_| LabelParts {
            base: label.trim().to_string(),
            qualifier: None,
        });
        let qualifier = parts.qualifier.as_deref().map(normalize_label);
        let entries = self
            .gazetteer
            .named(&parts.base)
            .filter(|e| match &qualifier {
                None => true,
                Some(q) => {
                    let admin = normalize_label(&e.admin);
                    &admin == q || (admin.is_empty() && self.countries.contains(q))
                }
            })
            .cloned()
            .collect();
        SpatialMatch::from_entries(entries)
    }
}

/// Resolves against `gazetteer` with the default country allowlist.
pub fn resolve(label: &str, gazetteer: &Gazetteer) -> SpatialMatch {
    SpatialResolver::new(gazetteer.clone()).resolve(label)
}
