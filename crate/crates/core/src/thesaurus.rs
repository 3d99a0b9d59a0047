//! Authority thesaurus store: records with broader (`tg`), associated (`ta`)
//! and used-for (`uf`) material, indexed by normalized label.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

/// Canonical comparison form of a label: NFC, lowercase, trimmed, single
/// spaces, typographic apostrophes folded to `'`. Diacritics are kept.
pub fn normalize_label(raw: &str) -> String {
    let lowered: String = raw
        .nfc()
        .flat_map(char::to_lowercase)
        .map(|c| if c == '\u{2019}' { '\'' } else { c })
        .collect();
    lowered.split_whitespace().collect::<Vec<_>>().join(" ").nfc().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThesaurusRecord {
    pub id: String,
    #[serde(rename = "pref")]
    pub pref_label: String,
    #[serde(rename = "uf", default)]
    pub used_for: Vec<String>,
    #[serde(rename = "tg", default)]
    pub generic: Vec<String>,
    #[serde(rename = "ta", default)]
    pub associated: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Thesaurus {
    records: BTreeMap<String, ThesaurusRecord>,
    label_index: BTreeMap<String, String>,
}

impl Thesaurus {
    /// Builds a store from records, checking ids, references, labels and
    /// acyclicity of the broader relation.
    pub fn from_records(records: impl IntoIterator<Item = ThesaurusRecord>) -> Result<Self> {
        let mut by_id = BTreeMap::new();
        for rec in records {
            if rec.id.trim().is_empty() {
                return Err(Error::validation("thesaurus record with empty id"));
            }
            if rec.pref_label.trim().is_empty() {
                return Err(Error::validation(format!(
                    "record {:?} has an empty pref label",
                    rec.id
                )));
            }
            if let Some(prev) = by_id.insert(rec.id.clone(), rec) {
                return Err(Error::validation(format!("duplicate record id {:?}", prev.id)));
            }
        }

        for rec in by_id.values() {
            for (kind, refs) in [("tg", &rec.generic), ("ta", &rec.associated)] {
                for target in refs {
                    if target == &rec.id {
                        return Err(Error::validation(format!("record {:?} lists itself in {kind}", rec.id)));
                    }
                    if !by_id.contains_key(target) {
                        return Err(Error::validation(format!(
                            "record {:?} references missing id {target:?} in {kind}",
                            rec.id
                        )));
                    }
                }
            }
        }

        if let Some(cycle) = find_generic_cycle(&by_id) {
            return Err(Error::validation(format!(
                "generic relation has a cycle: {}",
                cycle.join(" -> ")
            )));
        }

        let mut label_index: BTreeMap<String, String> = BTreeMap::new();
        for rec in by_id.values() {
            let labels = std::iter::once(&rec.pref_label).chain(rec.used_for.iter());
            for label in labels {
                let key = normalize_label(label);
                if key.is_empty() {
                    return Err(Error::validation(format!("record {:?} has a blank label", rec.id)));
                }
                match label_index.get(&key) {
                    Some(owner) if owner != &rec.id => {
                        return Err(Error::validation(format!(
                            "label {label:?} is shared by records {owner:?} and {:?}",
                            rec.id
                        )));
                    }
                    _ => {
                        label_index.insert(key, rec.id.clone());
                    }
                }
            }
        }

        Ok(Thesaurus {
            records: by_id,
            label_index,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&ThesaurusRecord> {
        self.records.get(id)
    }

    pub fn records(&self) -> impl Iterator<Item = &ThesaurusRecord> {
        self.records.values()
    }

    /// Id of the record whose preferred or used-for label matches `label`.
    pub fn lookup(&self, label: &str) -> Option<&str> {
        self.label_index.get(&normalize_label(label)).map(String::as_str)
    }

    /// Associated ids of `id` in both stored directions.
    pub fn associated_with(&self, id: &str) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self
            .records
            .get(id)
            .map(|r| r.associated.iter().map(String::as_str).collect())
            .unwrap_or_default();
        for rec in self.records.values() {
            if rec.associated.iter().any(|a| a == id) {
                out.insert(&rec.id);
            }
        }
        out
    }

    pub fn generic_edge_count(&self) -> usize {
        self.records.values().map(|r| r.generic.len()).sum()
    }
}

fn find_generic_cycle(records: &BTreeMap<String, ThesaurusRecord>) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }

    let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
    for start in records.keys() {
        if marks.contains_key(start.as_str()) {
            continue;
        }
        // Iterative DFS; `path` mirrors the active stack.
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        let mut path: Vec<&str> = vec![start];
        marks.insert(start, Mark::Active);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let parents = &records[node].generic;
            if *next < parents.len() {
                let parent = parents[*next].as_str();
                *next += 1;
                match marks.get(parent) {
                    Some(Mark::Active) => {
                        let at = path.iter().position(|p| *p == parent).unwrap_or(0);
                        let mut cycle: Vec<String> = path[at..].iter().map(|s| s.to_string()).collect();
                        cycle.push(parent.to_string());
                        return Some(cycle);
                    }
                    Some(Mark::Done) => {}
                    None => {
                        marks.insert(parent, Mark::Active);
                        stack.push((parent, 0));
                        path.push(parent);
                    }
                }
            } else {
                marks.insert(node, Mark::Done);
                stack.pop();
                path.pop();
            }
        }
    }
    None
}

/// Loads a JSON Lines thesaurus. Blank lines are skipped; unknown keys ignored.
pub fn load_thesaurus(content: &str) -> Result<Thesaurus> {
    let mut records = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: ThesaurusRecord = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    Thesaurus::from_records(records)
}
