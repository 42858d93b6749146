use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::corpus::University;
use crate::error::{Error, Result};
use crate::features::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SliceBy {
    Year,
    University,
}

impl FromStr for SliceBy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "year" => Ok(SliceBy::Year),
            "university" => Ok(SliceBy::University),
            other => Err(Error::InvalidInput(format!("cannot slice by {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cohort {
    All,
    Year(i32),
    University(University),
}

impl Cohort {
    /// File-name friendly tag.
    pub fn slug(&self) -> String {
        match self {
            Cohort::All => "all".into(),
            Cohort::Year(y) => y.to_string(),
            Cohort::University(u) => u.name().to_lowercase(),
        }
    }
}

impl fmt::Display for Cohort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cohort::All => f.write_str("All"),
            Cohort::Year(y) => write!(f, "{y}"),
            Cohort::University(u) => f.write_str(u.name()),
        }
    }
}

/// Splits a dataset into cohorts; each keeps the parent's threshold and the
/// examples' relative order.
pub fn slice_dataset(dataset: &Dataset, by: SliceBy) -> BTreeMap<Cohort, Dataset> {
    let mut out: BTreeMap<Cohort, Dataset> = BTreeMap::new();
    for e in &dataset.examples {
        let key = match by {
            SliceBy::Year => Cohort::Year(e.year),
            SliceBy::University => Cohort::University(e.university),
        };
        out.entry(key)
            .or_insert_with(|| Dataset { threshold: dataset.threshold, examples: Vec::new() })
            .examples
            .push(e.clone());
    }
    out
}
