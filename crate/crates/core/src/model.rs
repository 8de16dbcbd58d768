//! Instances, allocations and valuation classes.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::numeric::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("format error: {0}")]
    Format(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("agent {agent} is not personalized bi-valued under {side}")]
    NotBivalued { agent: usize, side: Side },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Which valuation matrix of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `v`, the agents' own utilities.
    Agents,
    /// `u`, the allocator's utilities.
    Allocator,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Agents => "v",
            Side::Allocator => "u",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValuationClass {
    General,
    Binary,
    PersonalizedBivalued,
    /// All rows equal. Only meaningful for the allocator's matrix.
    IdenticalAllocator,
}

impl fmt::Display for ValuationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValuationClass::General => "general",
            ValuationClass::Binary => "binary",
            ValuationClass::PersonalizedBivalued => "personalized_bivalued",
            ValuationClass::IdenticalAllocator => "identical_allocator",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassTag {
    pub side: Side,
    pub class: ValuationClass,
}

impl fmt::Display for ClassTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.class, self.side)
    }
}

/// Declared classes, one optional tag per matrix.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tags {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agents: Option<ValuationClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allocator: Option<ValuationClass>,
}

impl Tags {
    pub fn is_empty(&self) -> bool {
        self.agents.is_none() && self.allocator.is_none()
    }

    pub fn get(&self, side: Side) -> Option<ValuationClass> {
        match side {
            Side::Agents => self.agents,
            Side::Allocator => self.allocator,
        }
    }
}

/// An `n × m` matrix of non-negative additive valuations, one row per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValuationProfile {
    rows: Vec<Vec<Rational>>,
}

impl ValuationProfile {
    /// Checks that the matrix has at least one row, equal row lengths and no negative entry.
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        if rows.is_empty() {
            return Err(ModelError::Validation("a profile needs at least one agent".into()));
        }
        let m = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {m}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(Rational::is_negative) {
                return Err(ModelError::Validation(format!(
                    "negative value {} at ({i}, {j})",
                    row[j]
                )));
            }
        }
        Ok(ValuationProfile { rows })
    }

    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self, ModelError> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| Rational::from(x)).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn m(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn row(&self, agent: usize) -> &[Rational] {
        &self.rows[agent]
    }

    pub fn value(&self, agent: usize, item: usize) -> &Rational {
        &self.rows[agent][item]
    }

    pub fn bundle_value(&self, agent: usize, items: &[usize]) -> Rational {
        items.iter().map(|&g| &self.rows[agent][g]).sum()
    }

    pub fn total(&self, agent: usize) -> Rational {
        self.rows[agent].iter().sum()
    }

    pub fn into_rows(self) -> Vec<Vec<Rational>> {
        self.rows
    }

    pub fn is_binary(&self) -> bool {
        self.rows
            .iter()
            .flatten()
            .all(|x| x.is_zero() || x.is_one())
    }

    pub fn is_bivalued(&self) -> bool {
        self.rows.iter().all(|r| bivalued_levels(r).is_some())
    }

    pub fn has_identical_rows(&self) -> bool {
        self.rows.windows(2).all(|w| w[0] == w[1])
    }

    pub fn satisfies(&self, class: ValuationClass) -> bool {
        match class {
            ValuationClass::General => true,
            ValuationClass::Binary => self.is_binary(),
            ValuationClass::PersonalizedBivalued => self.is_bivalued(),
            ValuationClass::IdenticalAllocator => self.has_identical_rows(),
        }
    }
}

/// The two levels `(p, q)` with `p < q` of a row taking at most two distinct values.
///
/// A row with a single positive value `c` reads as `(0, c)` so every item is high;
/// a row of zeros or an empty row reads as `(0, 1)` so every item is low.
pub fn bivalued_levels(row: &[Rational]) -> Option<(Rational, Rational)> {
    let distinct: BTreeSet<&Rational> = row.iter().collect();
    let mut it = distinct.into_iter();
    match (it.next(), it.next(), it.next()) {
        (_, _, Some(_)) => None,
        (Some(p), Some(q), None) => Some((p.clone(), q.clone())),
        (Some(c), None, None) if c.is_positive() => Some((Rational::zero(), c.clone())),
        _ => Some((Rational::zero(), Rational::one())),
    }
}

/// An instance: `n` agents, `m` items, agents' matrix `v` and allocator's matrix `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    v: ValuationProfile,
    u: ValuationProfile,
    tags: Tags,
    agent_names: Option<Vec<String>>,
    item_names: Option<Vec<String>>,
}

impl Instance {
    pub fn new(v: ValuationProfile, u: ValuationProfile) -> Result<Self, ModelError> {
        Self::with_tags(v, u, Tags::default())
    }

    /// Builds an instance and verifies each declared tag against its matrix.
    pub fn with_tags(v: ValuationProfile, u: ValuationProfile, tags: Tags) -> Result<Self, ModelError> {
        if v.n() != u.n() || v.m() != u.m() {
            return Err(ModelError::DimensionMismatch(format!(
                "v is {}x{} but u is {}x{}",
                v.n(),
                v.m(),
                u.n(),
                u.m()
            )));
        }
        if tags.agents == Some(ValuationClass::IdenticalAllocator) {
            return Err(ModelError::Validation(
                "identical_allocator applies to the allocator matrix only".into(),
            ));
        }
        for (side, profile) in [(Side::Agents, &v), (Side::Allocator, &u)] {
            if let Some(class) = tags.get(side) {
                if !profile.satisfies(class) {
                    return Err(ModelError::Validation(format!(
                        "matrix {side} is tagged {class} but its entries are not"
                    )));
                }
            }
        }
        Ok(Instance {
            v,
            u,
            tags,
            agent_names: None,
            item_names: None,
        })
    }

    pub fn from_integers(v: &[Vec<i64>], u: &[Vec<i64>]) -> Result<Self, ModelError> {
        Self::new(ValuationProfile::from_integers(v)?, ValuationProfile::from_integers(u)?)
    }

    pub fn n(&self) -> usize {
        self.v.n()
    }

    pub fn m(&self) -> usize {
        self.v.m()
    }

    pub fn v(&self) -> &ValuationProfile {
        &self.v
    }

    pub fn u(&self) -> &ValuationProfile {
        &self.u
    }

    pub fn profile(&self, side: Side) -> &ValuationProfile {
        match side {
            Side::Agents => &self.v,
            Side::Allocator => &self.u,
        }
    }

    pub fn tags(&self) -> &Tags {
        &self.tags
    }

    pub fn agent_names(&self) -> Option<&[String]> {
        self.agent_names.as_deref()
    }

    pub fn item_names(&self) -> Option<&[String]> {
        self.item_names.as_deref()
    }

    fn file(&self) -> InstanceFile {
        InstanceFile {
            agents: match &self.agent_names {
                Some(names) => Dimension::Names(names.clone()),
                None => Dimension::Count(self.n()),
            },
            items: match &self.item_names {
                Some(names) => Dimension::Names(names.clone()),
                None => Dimension::Count(self.m()),
            },
            agent_valuations: self.v.rows.clone(),
            allocator_valuations: self.u.rows.clone(),
            tags: (!self.tags.is_empty()).then(|| self.tags.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file()).expect("instance serializes")
    }
}

impl Serialize for Instance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.file().serialize(serializer)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Dimension {
    Count(usize),
    Names(Vec<String>),
}

impl Dimension {
    fn len(&self) -> usize {
        match self {
            Dimension::Count(n) => *n,
            Dimension::Names(names) => names.len(),
        }
    }

    fn names(self) -> Option<Vec<String>> {
        match self {
            Dimension::Count(_) => None,
            Dimension::Names(names) => Some(names),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    agents: Dimension,
    items: Dimension,
    agent_valuations: Vec<Vec<Rational>>,
    allocator_valuations: Vec<Vec<Rational>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tags: Option<Tags>,
}

/// Parses and validates an instance from its JSON text.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
    let n = file.agents.len();
    let m = file.items.len();
    if n == 0 {
        return Err(ModelError::Validation("an instance needs at least one agent".into()));
    }
    for (name, rows) in [
        ("agent_valuations", &file.agent_valuations),
        ("allocator_valuations", &file.allocator_valuations),
    ] {
        if rows.len() != n {
            return Err(ModelError::DimensionMismatch(format!(
                "{name} has {} rows for {n} agents",
                rows.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != m) {
            return Err(ModelError::DimensionMismatch(format!(
                "{name} row {i} has {} entries for {m} items",
                rows[i].len()
            )));
        }
    }
    let v = ValuationProfile::new(file.agent_valuations)?;
    let u = ValuationProfile::new(file.allocator_valuations)?;
    let mut instance = Instance::with_tags(v, u, file.tags.unwrap_or_default())?;
    instance.agent_names = file.agents.names();
    instance.item_names = file.items.names();
    Ok(instance)
}

/// Every class each matrix satisfies, ignoring declared tags.
pub fn classify(instance: &Instance) -> BTreeSet<ClassTag> {
    let mut out = BTreeSet::new();
    for side in [Side::Agents, Side::Allocator] {
        let profile = instance.profile(side);
        for class in [
            ValuationClass::General,
            ValuationClass::Binary,
            ValuationClass::PersonalizedBivalued,
        ] {
            if profile.satisfies(class) {
                out.insert(ClassTag { side, class });
            }
        }
    }
    if instance.u.has_identical_rows() {
        out.insert(ClassTag {
            side: Side::Allocator,
            class: ValuationClass::IdenticalAllocator,
        });
    }
    out
}

/// An ordered partition of the items `0..m` into `n` bundles.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Allocation {
    bundles: Vec<Vec<usize>>,
}

impl Allocation {
    /// Sorts each bundle and checks that the bundles partition `0..m`.
    pub fn new(mut bundles: Vec<Vec<usize>>, m: usize) -> Result<Self, ModelError> {
        if bundles.is_empty() {
            return Err(ModelError::Validation("an allocation needs at least one bundle".into()));
        }
        let mut seen = vec![false; m];
        for bundle in bundles.iter_mut() {
            bundle.sort_unstable();
            for &g in bundle.iter() {
                if g >= m {
                    return Err(ModelError::Validation(format!("item {g} out of range 0..{m}")));
                }
                if std::mem::replace(&mut seen[g], true) {
                    return Err(ModelError::Validation(format!("item {g} appears twice")));
                }
            }
        }
        if let Some(g) = seen.iter().position(|s| !s) {
            return Err(ModelError::Validation(format!("item {g} is unallocated")));
        }
        Ok(Allocation { bundles })
    }

    /// `owner[g]` is the agent receiving item `g`.
    pub fn from_owners(owner: &[usize], n: usize) -> Result<Self, ModelError> {
        let mut bundles = vec![Vec::new(); n];
        for (g, &i) in owner.iter().enumerate() {
            if i >= n {
                return Err(ModelError::Validation(format!("item {g} assigned to agent {i} of {n}")));
            }
            bundles[i].push(g);
        }
        Ok(Allocation { bundles })
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    pub fn m(&self) -> usize {
        self.bundles.iter().map(Vec::len).sum()
    }

    pub fn bundles(&self) -> &[Vec<usize>] {
        &self.bundles
    }

    pub fn bundle(&self, agent: usize) -> &[usize] {
        &self.bundles[agent]
    }

    pub fn owners(&self) -> Vec<usize> {
        let mut owner = vec![0; self.m()];
        for (i, bundle) in self.bundles.iter().enumerate() {
            for &g in bundle {
                owner[g] = i;
            }
        }
        owner
    }

    pub fn into_bundles(self) -> Vec<Vec<usize>> {
        self.bundles
    }

    /// Checks that this allocation fits an `n × m` instance.
    pub fn check_dimensions(&self, n: usize, m: usize) -> Result<(), ModelError> {
        if self.n() != n || self.m() != m {
            return Err(ModelError::DimensionMismatch(format!(
                "allocation has {} bundles over {} items, instance is {n}x{m}",
                self.n(),
                self.m()
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("allocation serializes")
    }
}

impl<'de> Deserialize<'de> for Allocation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            bundles: Vec<Vec<usize>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let m = raw.bundles.iter().map(Vec::len).sum();
        Allocation::new(raw.bundles, m).map_err(serde::de::Error::custom)
    }
}

/// Parses `{"bundles": [...]}` or a bare `[[...], ...]` list.
pub fn parse_allocation(text: &str) -> Result<Allocation, ModelError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
    let value = if value.is_array() {
        serde_json::json!({ "bundles": value })
    } else {
        value
    };
    serde_json::from_value(value).map_err(|e| ModelError::Validation(e.to_string()))
}

/// Agent `i`'s four-way item split by (v high/low) × (u high/low).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BivaluedPartition {
    pub agent: usize,
    pub p_v: Rational,
    pub q_v: Rational,
    pub p_u: Rational,
    pub q_u: Rational,
    /// `sets[0]` = (v high, u high), `sets[1]` = (v high, u low),
    /// `sets[2]` = (v low, u high), `sets[3]` = (v low, u low).
    pub sets: [Vec<usize>; 4],
}

impl BivaluedPartition {
    /// Index in `0..4` of the set holding `item`.
    pub fn class_of(&self, item: usize) -> usize {
        self.sets
            .iter()
            .position(|s| s.binary_search(&item).is_ok())
            .expect("partition covers every item")
    }
}

pub fn bivalued_partition(instance: &Instance, agent: usize) -> Result<BivaluedPartition, ModelError> {
    let (p_v, q_v) = bivalued_levels(instance.v.row(agent)).ok_or(ModelError::NotBivalued {
        agent,
        side: Side::Agents,
    })?;
    let (p_u, q_u) = bivalued_levels(instance.u.row(agent)).ok_or(ModelError::NotBivalued {
        agent,
        side: Side::Allocator,
    })?;
    let mut sets: [Vec<usize>; 4] = Default::default();
    for g in 0..instance.m() {
        let v_high = *instance.v.value(agent, g) == q_v;
        let u_high = *instance.u.value(agent, g) == q_u;
        let k = match (v_high, u_high) {
            (true, true) => 0,
            (true, false) => 1,
            (false, true) => 2,
            (false, false) => 3,
        };
        sets[k].push(g);
    }
    Ok(BivaluedPartition {
        agent,
        p_v,
        q_v,
        p_u,
        q_u,
        sets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ratio;

    const INTRO: &str = r#"{
        "agents": 2,
        "items": ["g1", "g2", "g3"],
        "agent_valuations": [[2, 1, 0], [0, 1, 2]],
        "allocator_valuations": [[0, 2, 1], [1, 2, 0]]
    }"#;

    #[test]
    fn parses_intro_instance() {
        let inst = parse_instance(INTRO).unwrap();
        assert_eq!((inst.n(), inst.m()), (2, 3));
        assert_eq!(*inst.u().value(1, 0), Rational::one());
        assert_eq!(inst.item_names().unwrap()[2], "g3");
    }

    #[test]
    fn empty_market_is_valid() {
        let text = r#"{"agents": 3, "items": 0, "agent_valuations": [[],[],[]], "allocator_valuations": [[],[],[]]}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!((inst.n(), inst.m()), (3, 0));
    }

    #[test]
    fn rejects_tag_mismatch_and_bad_values() {
        let text = r#"{"agents": 1, "items": 2, "agent_valuations": [[1, 2]],
            "allocator_valuations": [[0, 1]], "tags": {"agents": "binary"}}"#;
        assert!(matches!(parse_instance(text), Err(ModelError::Validation(_))));

        let text = r#"{"agents": 1, "items": 1, "agent_valuations": [[-1]], "allocator_valuations": [[0]]}"#;
        assert!(matches!(parse_instance(text), Err(ModelError::Validation(_))));

        let text = r#"{"agents": 2, "items": 1, "agent_valuations": [[1]], "allocator_valuations": [[0],[1]]}"#;
        assert!(matches!(parse_instance(text), Err(ModelError::DimensionMismatch(_))));

        let text = r#"{"agents": 1, "items": 1, "agent_valuations": [[0.5]], "allocator_valuations": [[0]]}"#;
        assert!(matches!(parse_instance(text), Err(ModelError::Format(_))));
    }

    #[test]
    fn rational_entries_and_round_trip() {
        let text = r#"{"agents": 2, "items": 2, "agent_valuations": [["1/2", 3], [0, "7/3"]],
            "allocator_valuations": [[1, 1], [1, 1]], "tags": {"allocator": "identical_allocator"}}"#;
        let inst = parse_instance(text).unwrap();
        assert_eq!(*inst.v().value(0, 0), ratio(1, 2));
        let again = parse_instance(&inst.to_json()).unwrap();
        assert_eq!(again, inst);
    }

    #[test]
    fn classify_reports_satisfied_classes() {
        let inst = Instance::from_integers(&[vec![0, 1], vec![1, 1]], &[vec![1, 0], vec![1, 0]]).unwrap();
        let classes = classify(&inst);
        for tag in [
            ClassTag { side: Side::Agents, class: ValuationClass::Binary },
            ClassTag { side: Side::Allocator, class: ValuationClass::Binary },
            ClassTag { side: Side::Allocator, class: ValuationClass::IdenticalAllocator },
        ] {
            assert!(classes.contains(&tag), "{tag}");
        }

        let inst = Instance::from_integers(&[vec![3, 3, 7, 7]], &[vec![0, 1, 2, 3]]).unwrap();
        let classes = classify(&inst);
        assert!(classes.contains(&ClassTag { side: Side::Agents, class: ValuationClass::PersonalizedBivalued }));
        assert!(!classes.contains(&ClassTag { side: Side::Allocator, class: ValuationClass::PersonalizedBivalued }));
        assert_eq!(bivalued_levels(inst.v().row(0)), Some((Rational::from(3), Rational::from(7))));
    }

    #[test]
    fn bivalued_partition_examples() {
        // v = (q, q, p), u = (Q, P, Q)
        let inst = Instance::from_integers(&[vec![5, 5, 1]], &[vec![4, 2, 4]]).unwrap();
        let part = bivalued_partition(&inst, 0).unwrap();
        assert_eq!(part.sets, [vec![0], vec![1], vec![2], vec![]]);

        let inst = Instance::from_integers(&[vec![5, 5]], &[vec![4, 4]]).unwrap();
        let part = bivalued_partition(&inst, 0).unwrap();
        assert_eq!(part.sets, [vec![0, 1], vec![], vec![], vec![]]);

        let inst = Instance::from_integers(&[vec![1, 2, 3]], &[vec![4, 4, 4]]).unwrap();
        assert_eq!(
            bivalued_partition(&inst, 0),
            Err(ModelError::NotBivalued { agent: 0, side: Side::Agents })
        );
    }

    #[test]
    fn allocation_validation() {
        let a = Allocation::new(vec![vec![2, 0], vec![1]], 3).unwrap();
        assert_eq!(a.bundles(), &[vec![0, 2], vec![1]]);
        assert_eq!(a.to_json(), r#"{"bundles":[[0,2],[1]]}"#);
        assert_eq!(a.owners(), vec![0, 1, 0]);
        assert!(Allocation::new(vec![vec![0, 1], vec![1]], 2).is_err());
        assert!(Allocation::new(vec![vec![0], vec![]], 2).is_err());
        assert!(Allocation::new(vec![vec![3]], 1).is_err());
        assert_eq!(parse_allocation("[[0,2],[1]]").unwrap(), a);
        assert!(parse_allocation(r#"{"bundles":[[0,2],[2]]}"#).is_err());
    }
}
