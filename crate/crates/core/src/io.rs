//! JSON input schemas for groups and G-sets, and the parenthesized word
//! notation for maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Group, GroupError, GroupSpec};
use crate::gset::{GSet, GSetError};

#[derive(Debug, Error)]
pub enum InputError {
    #[error("parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("parse error: {0}")]
    Schema(String),
    #[error("invalid group: {0}")]
    Group(#[from] GroupError),
    #[error("invalid action: {0}")]
    GSet(#[from] GSetError),
}

impl InputError {
    /// Parse-level problems (as opposed to failed validation of well-formed
    /// input).
    pub fn is_parse_error(&self) -> bool {
        matches!(self, InputError::Json(_) | InputError::Schema(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Cyclic,
    Dihedral,
    Symmetric,
    Product,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GroupInput {
    Table {
        names: Vec<String>,
        table: Vec<Vec<usize>>,
    },
    Named {
        family: Family,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        factors: Option<Vec<GroupInput>>,
    },
}

impl GroupInput {
    pub fn named(spec: &GroupSpec) -> GroupInput {
        let simple = |family, n: usize| GroupInput::Named {
            family,
            n: Some(n),
            factors: None,
        };
        match spec {
            GroupSpec::Cyclic(n) => simple(Family::Cyclic, *n),
            GroupSpec::Dihedral(n) => simple(Family::Dihedral, *n),
            GroupSpec::Symmetric(n) => simple(Family::Symmetric, *n),
            GroupSpec::Product(a, b) => GroupInput::Named {
                family: Family::Product,
                n: None,
                factors: Some(vec![GroupInput::named(a), GroupInput::named(b)]),
            },
        }
    }

    pub fn table_of(group: &Group) -> GroupInput {
        GroupInput::Table {
            names: group.names().to_vec(),
            table: group.table().to_vec(),
        }
    }

    /// Named families resolve to a [`GroupSpec`]; tables do not.
    pub fn spec(&self) -> Result<Option<GroupSpec>, InputError> {
        let GroupInput::Named { family, n, factors } = self else {
            return Ok(None);
        };
        let need_n = || n.ok_or_else(|| InputError::Schema(format!("family {family:?} needs \"n\"")));
        let spec = match family {
            Family::Cyclic => GroupSpec::Cyclic(need_n()?),
            Family::Dihedral => GroupSpec::Dihedral(need_n()?),
            Family::Symmetric => GroupSpec::Symmetric(need_n()?),
            Family::Product => {
                let factors = factors
                    .as_ref()
                    .filter(|f| f.len() >= 2)
                    .ok_or_else(|| InputError::Schema("product needs at least two \"factors\"".into()))?;
                let mut specs = factors.iter().map(|f| {
                    f.spec()?
                        .ok_or_else(|| InputError::Schema("product factors must be named groups".into()))
                });
                let first = specs.next().expect("two factors")?;
                specs.try_fold(first, |acc, s| Ok::<_, InputError>(GroupSpec::product(acc, s?)))?
            }
        };
        Ok(Some(spec))
    }

    pub fn build(&self) -> Result<Group, InputError> {
        match self {
            GroupInput::Table { names, table } => Ok(Group::from_table(names.clone(), table.clone())?),
            GroupInput::Named { .. } => Ok(Group::named(&self.spec()?.expect("named"))?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GSetInput {
    pub group: GroupInput,
    pub points: Vec<String>,
    /// Images of every point, keyed by group element name.
    pub action: BTreeMap<String, Vec<PointRef>>,
}

impl GSetInput {
    pub fn build(&self) -> Result<GSet, InputError> {
        let group = self.group.build()?;
        let resolve = |r: &PointRef| match r {
            PointRef::Index(i) => Ok(*i),
            PointRef::Name(name) => self
                .points
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| InputError::Schema(format!("unknown point {name:?}"))),
        };
        if let Some(unknown) = self.action.keys().find(|k| group.index_of(k).is_none()) {
            return Err(InputError::Schema(format!("unknown group element {unknown:?} in action")));
        }
        let mut table = Vec::with_capacity(group.order());
        for g in group.elements() {
            let row = self
                .action
                .get(group.name(g))
                .ok_or_else(|| InputError::Schema(format!("action is missing element {:?}", group.name(g))))?;
            table.push(row.iter().map(resolve).collect::<Result<Vec<_>, _>>()?);
        }
        Ok(GSet::new(group, self.points.clone(), table)?)
    }

    /// Serializes a G-set with its group written out as a table.
    pub fn from_gset(x: &GSet) -> GSetInput {
        let group = x.group();
        GSetInput {
            group: GroupInput::table_of(group),
            points: x.point_names().to_vec(),
            action: group
                .elements()
                .map(|g| {
                    let row = x.action_table()[g].iter().map(|&p| PointRef::Index(p)).collect();
                    (group.name(g).to_string(), row)
                })
                .collect(),
        }
    }
}

pub fn parse_gset(text: &str) -> Result<GSet, InputError> {
    serde_json::from_str::<GSetInput>(text)?.build()
}

/// Parses `(3000)` or `(3,0,0,0)` into point indices.
pub fn parse_word(x: &GSet, text: &str) -> Result<Vec<usize>, InputError> {
    let inner = text
        .trim()
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| InputError::Schema(format!("word {text:?} must be parenthesized")))?;
    let names: Vec<String> = if inner.contains(',') {
        inner.split(',').map(|s| s.trim().to_string()).collect()
    } else {
        inner.chars().map(String::from).collect()
    };
    names
        .iter()
        .map(|n| {
            x.point_index(n)
                .ok_or_else(|| InputError::Schema(format!("unknown point {n:?} in word {text:?}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;

    const EXAMPLE1: &str = r#"{
        "group": {"kind": "named", "family": "cyclic", "n": 2},
        "points": ["0", "1", "2", "3"],
        "action": {"e": [0, 1, 2, 3], "a": ["0", "2", "1", "3"]}
    }"#;

    #[test]
    fn parses_example_one() {
        let x = parse_gset(EXAMPLE1).unwrap();
        assert_eq!(x, example1());
    }

    #[test]
    fn table_groups() {
        let input = r#"{"kind":"table","names":["a","e"],"table":[[1,0],[0,1]]}"#;
        let g: GroupInput = serde_json::from_str(input).unwrap();
        let g = g.build().unwrap();
        assert_eq!(g.name(0), "e");
        let klein = r#"{"kind":"named","family":"product","factors":[
            {"kind":"named","family":"cyclic","n":2},{"kind":"named","family":"cyclic","n":2}]}"#;
        let k: GroupInput = serde_json::from_str(klein).unwrap();
        assert_eq!(k.spec().unwrap(), Some(GroupSpec::klein()));
        assert_eq!(k.build().unwrap().order(), 4);
    }

    #[test]
    fn schema_errors() {
        let missing_row = EXAMPLE1.replace(r#", "a": ["0", "2", "1", "3"]"#, "");
        let err = parse_gset(&missing_row).unwrap_err();
        assert!(err.is_parse_error(), "{err}");
        let bad = EXAMPLE1.replace(r#""a": ["0", "2", "1", "3"]"#, r#""a": [0, 2, 2, 3]"#);
        assert!(matches!(
            parse_gset(&bad),
            Err(InputError::GSet(GSetError::CompatibilityViolated { .. }))
        ));
        assert!(parse_gset("{").unwrap_err().is_parse_error());
        let no_n: Result<GroupInput, _> = serde_json::from_str(r#"{"kind":"named","family":"cyclic"}"#);
        assert!(no_n.unwrap().build().is_err());
    }

    #[test]
    fn round_trip_through_table_schema() {
        let x = example1();
        let text = serde_json::to_string(&GSetInput::from_gset(&x)).unwrap();
        assert_eq!(parse_gset(&text).unwrap(), x);
    }

    #[test]
    fn words() {
        let x = example1();
        assert_eq!(parse_word(&x, "(3000)").unwrap(), vec![3, 0, 0, 0]);
        assert_eq!(parse_word(&x, "(3,0,0,0)").unwrap(), vec![3, 0, 0, 0]);
        assert!(parse_word(&x, "3000").is_err());
        assert!(parse_word(&x, "(3009)").is_err());
    }
}
