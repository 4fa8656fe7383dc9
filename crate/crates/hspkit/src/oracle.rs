//! Hidden-subgroup instances and the counting, caching query interface.
//!
//! An instance fixes a hidden subgroup H and exposes only the coset-labeling
//! function `f`; solvers reach it exclusively through [`CountingOracle::query`],
//! which counts distinct queried elements.

use std::collections::HashMap;
use std::fmt;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::group::{closure, GroupElement, GroupSignature, Subgroup};

/// An opaque coset label. Realized as the lexicographically minimal coset
/// representative; the only meaningful operation is equality (Display gives
/// the representative's element string).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Label(GroupElement);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A hidden subgroup wrapped behind a coset-labeling function.
#[derive(Debug, Clone)]
pub struct HspInstance {
    sig: GroupSignature,
    hidden: Subgroup,
    /// Canonical-representative index per element, precomputed when |G| is
    /// small enough to tabulate.
    table: Option<Vec<u64>>,
    /// Hidden elements as indices, for the lazy labeling path.
    hidden_indices: Vec<u64>,
    /// Test-only label override used by promise negative tests.
    override_labels: Option<HashMap<u64, u64>>,
}

impl HspInstance {
    /// Builds an instance whose hidden subgroup is the closure of `gens`.
    ///
    /// `label_of(g)` is the lexicographically smallest element of the coset
    /// `g + H`.
    pub fn build(sig: &GroupSignature, gens: &[GroupElement], cap: u64) -> Result<Self> {
        let hidden = closure(sig, gens, cap)?;
        Self::from_subgroup(sig, hidden, cap)
    }

    /// Builds an instance from an already-closed subgroup, skipping the
    /// closure recomputation `build` performs.
    pub fn from_subgroup(sig: &GroupSignature, hidden: Subgroup, cap: u64) -> Result<Self> {
        let hidden_indices: Vec<u64> =
            hidden.elements().iter().map(|h| sig.index_of(h)).collect();
        let table = if sig.order() <= cap as u128 {
            Some(label_table(sig, &hidden_indices))
        } else {
            None
        };
        Ok(HspInstance {
            sig: sig.clone(),
            hidden,
            table,
            hidden_indices,
            override_labels: None,
        })
    }

    /// Hand-built instance with an explicit label map over element indices.
    /// Exists only so promise-violating functions can be tested.
    #[cfg(test)]
    pub(crate) fn with_label_map(
        sig: &GroupSignature,
        hidden: Subgroup,
        labels: HashMap<u64, u64>,
    ) -> Self {
        let hidden_indices = hidden.elements().iter().map(|h| sig.index_of(h)).collect();
        HspInstance {
            sig: sig.clone(),
            hidden,
            table: None,
            hidden_indices,
            override_labels: Some(labels),
        }
    }

    pub fn signature(&self) -> &GroupSignature {
        &self.sig
    }

    /// The hidden subgroup. Test harnesses and auditors use this; solvers
    /// must only go through the oracle.
    pub fn hidden(&self) -> &Subgroup {
        &self.hidden
    }

    pub fn label_of(&self, g: &GroupElement) -> Result<Label> {
        self.sig.check(g)?;
        let idx = self.sig.index_of(g);
        Ok(Label(self.sig.element_at(self.label_index(idx))))
    }

    fn label_index(&self, idx: u64) -> u64 {
        if let Some(map) = &self.override_labels {
            return map[&idx];
        }
        if let Some(table) = &self.table {
            return table[idx as usize];
        }
        // Lazy path: minimum of the coset g + H in index space.
        self.hidden_indices
            .iter()
            .map(|&h| self.sig.index_add(idx, h))
            .min()
            .expect("hidden subgroup contains the identity")
    }

    /// Exhaustively checks the promise: `f(g1) = f(g2)` iff `g1 - g2` lies in
    /// the hidden subgroup. Checked as (a) `f` is constant on every coset and
    /// (b) the number of distinct labels equals the number of cosets.
    pub fn verify_promise(&self, cap: u64) -> Result<bool> {
        let order = self.sig.order();
        if order > cap as u128 {
            return Err(Error::CapExceeded { cap });
        }
        let order = order as u64;
        let mut distinct = std::collections::HashSet::new();
        for g in 0..order {
            let label = self.label_index(g);
            distinct.insert(label);
            for &h in &self.hidden_indices {
                if self.label_index(self.sig.index_add(g, h)) != label {
                    return Ok(false);
                }
            }
        }
        Ok(distinct.len() as u64 == order / self.hidden.order())
    }

    /// Serializes the instance file form: signature plus generators only;
    /// labels are recomputed on load.
    pub fn to_json(&self, sig_text: &str) -> serde_json::Value {
        serde_json::json!({
            "sig": sig_text,
            "generators": self
                .hidden
                .generators()
                .iter()
                .map(|g| g.to_string())
                .collect::<Vec<_>>(),
        })
    }

    /// Loads the instance file form `{"sig": "...", "generators": ["(..)"]}`.
    pub fn from_json(text: &str, cap: u64) -> Result<(Self, String)> {
        #[derive(Deserialize)]
        struct InstanceFile {
            sig: String,
            generators: Vec<String>,
        }
        let file: InstanceFile = serde_json::from_str(text)?;
        let sig = GroupSignature::parse(&file.sig)?;
        let gens = file
            .generators
            .iter()
            .map(|g| sig.parse_element(g))
            .collect::<Result<Vec<_>>>()?;
        Ok((Self::build(&sig, &gens, cap)?, file.sig))
    }
}

/// Canonical-representative table: one ascending sweep assigns every element
/// the smallest index in its coset (index order equals lexicographic order).
fn label_table(sig: &GroupSignature, hidden_indices: &[u64]) -> Vec<u64> {
    let order = sig.order() as usize;
    const UNSET: u64 = u64::MAX;
    let mut table = vec![UNSET; order];
    for rep in 0..order as u64 {
        if table[rep as usize] != UNSET {
            continue;
        }
        for &h in hidden_indices {
            table[sig.index_add(rep, h) as usize] = rep;
        }
    }
    table
}

/// Counts distinct elements queried; repeated queries hit the cache.
#[derive(Debug)]
pub struct CountingOracle<'a> {
    instance: &'a HspInstance,
    cache: HashMap<u64, u64>,
    raw_calls: u64,
}

impl<'a> CountingOracle<'a> {
    pub fn new(instance: &'a HspInstance) -> Self {
        CountingOracle { instance, cache: HashMap::new(), raw_calls: 0 }
    }

    pub fn signature(&self) -> &GroupSignature {
        self.instance.signature()
    }

    /// Queries `f(g)`. The distinct count increments iff `g` has not been
    /// queried before.
    pub fn query(&mut self, g: &GroupElement) -> Result<Label> {
        self.signature().check(g)?;
        let idx = self.signature().index_of(g);
        let label = self.query_index(idx);
        Ok(Label(self.signature().element_at(label)))
    }

    /// Index-space fast path used by the solvers.
    pub(crate) fn query_index(&mut self, idx: u64) -> u64 {
        self.raw_calls += 1;
        let instance = self.instance;
        *self
            .cache
            .entry(idx)
            .or_insert_with(|| instance.label_index(idx))
    }

    /// Number of distinct elements queried so far.
    pub fn distinct_queries(&self) -> u64 {
        self.cache.len() as u64
    }

    /// Number of raw query calls, including cache hits.
    pub fn raw_calls(&self) -> u64 {
        self.raw_calls
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::DEFAULT_ENUMERATION_CAP as CAP;

    fn sig(text: &str) -> GroupSignature {
        GroupSignature::parse(text).unwrap()
    }

    fn build(sig: &GroupSignature, gens: &[&str]) -> HspInstance {
        let gens: Vec<GroupElement> =
            gens.iter().map(|g| sig.parse_element(g).unwrap()).collect();
        HspInstance::build(sig, &gens, CAP).unwrap()
    }

    #[test]
    fn labels_are_min_coset_representatives() {
        let s = sig("2^2");
        let inst = build(&s, &["(2)"]);
        for g in ["(0)", "(2)"] {
            assert_eq!(
                inst.label_of(&s.parse_element(g).unwrap()).unwrap().to_string(),
                "(0)"
            );
        }
        for g in ["(1)", "(3)"] {
            assert_eq!(
                inst.label_of(&s.parse_element(g).unwrap()).unwrap().to_string(),
                "(1)"
            );
        }
    }

    #[test]
    fn trivial_subgroup_means_injective() {
        let s = sig("2,3");
        let inst = build(&s, &[]);
        let mut labels = std::collections::HashSet::new();
        for i in 0..6 {
            labels.insert(inst.label_of(&s.element_at(i)).unwrap());
        }
        assert_eq!(labels.len(), 6);
    }

    #[test]
    fn full_subgroup_means_constant() {
        let s = sig("2^2");
        let inst = build(&s, &["(1)"]);
        for i in 0..4 {
            assert_eq!(inst.label_of(&s.element_at(i)).unwrap().to_string(), "(0)");
        }
    }

    #[test]
    fn query_counting_semantics() {
        let s = sig("2^2");
        let inst = build(&s, &["(2)"]);
        let mut oracle = CountingOracle::new(&inst);
        let id = s.identity();
        let first = oracle.query(&id).unwrap();
        assert_eq!(oracle.distinct_queries(), 1);
        let second = oracle.query(&id).unwrap();
        assert_eq!(first, second);
        assert_eq!(oracle.distinct_queries(), 1);
        assert_eq!(oracle.raw_calls(), 2);

        let two = s.parse_element("(2)").unwrap();
        assert_eq!(oracle.query(&two).unwrap(), first);
        assert_eq!(oracle.distinct_queries(), 2);
    }

    #[test]
    fn query_rejects_malformed_elements() {
        let s = sig("2^2");
        let inst = build(&s, &[]);
        let mut oracle = CountingOracle::new(&inst);
        let other = sig("2,2");
        let bad = other.parse_element("(1,1)").unwrap();
        assert!(oracle.query(&bad).is_err());
    }

    #[test]
    fn promise_holds_by_construction() {
        for (s, gens) in [
            ("2^2", vec!["(2)"]),
            ("2,3", vec![]),
            ("3", vec!["(1)"]),
            ("2^2,3", vec!["(2,0)"]),
            ("2,2,2", vec!["(1,1,0)", "(0,1,1)"]),
        ] {
            let s = sig(s);
            let gens: Vec<&str> = gens;
            let inst = build(&s, &gens);
            assert!(inst.verify_promise(CAP).unwrap());
        }
    }

    #[test]
    fn promise_detects_violation() {
        // Everything mapped to one label while H is trivial.
        let s = sig("2^2");
        let hidden = closure(&s, &[], CAP).unwrap();
        let labels: HashMap<u64, u64> = (0..4).map(|i| (i, 0)).collect();
        let inst = HspInstance::with_label_map(&s, hidden, labels);
        assert!(!inst.verify_promise(CAP).unwrap());
    }

    #[test]
    fn constant_function_full_subgroup_is_fine() {
        let s = sig("3");
        let inst = build(&s, &["(1)"]);
        assert!(inst.verify_promise(CAP).unwrap());
        let mut labels = std::collections::HashSet::new();
        for i in 0..3 {
            labels.insert(inst.label_of(&s.element_at(i)).unwrap());
        }
        assert_eq!(labels.len(), 1);
    }

    #[test]
    fn distinct_label_count_times_order_is_group_order() {
        for (s, gens) in [("2^3,3", vec!["(4,0)"]), ("2,2,3", vec!["(1,1,0)"])] {
            let s = sig(s);
            let inst = build(&s, &gens);
            let mut labels = std::collections::HashSet::new();
            for i in 0..s.order() as u64 {
                labels.insert(inst.label_of(&s.element_at(i)).unwrap());
            }
            assert_eq!(
                labels.len() as u128 * inst.hidden().order() as u128,
                s.order()
            );
        }
    }

    #[test]
    fn instance_file_round_trip() {
        let s = sig("2^2,3");
        let inst = build(&s, &["(2,1)"]);
        let json = inst.to_json("2^2,3").to_string();
        let (loaded, sig_text) = HspInstance::from_json(&json, CAP).unwrap();
        assert_eq!(sig_text, "2^2,3");
        assert_eq!(loaded.hidden(), inst.hidden());
    }

    #[test]
    fn lazy_labeling_beyond_table_cap() {
        // Force the lazy path with a tiny cap on the table side.
        let s = sig("2^3");
        let hidden = closure(&s, &[s.parse_element("(4)").unwrap()], CAP).unwrap();
        let lazy = HspInstance::from_subgroup(&s, hidden.clone(), 4).unwrap();
        assert!(lazy.table.is_none());
        let tabled = HspInstance::from_subgroup(&s, hidden, CAP).unwrap();
        for i in 0..8 {
            let g = s.element_at(i);
            assert_eq!(lazy.label_of(&g).unwrap(), tabled.label_of(&g).unwrap());
        }
    }
}
