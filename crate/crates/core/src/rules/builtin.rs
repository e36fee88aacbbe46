use std::collections::BTreeMap;

use serde::Serialize;
use smallvec::smallvec;

use super::{Choices, EdgeChoice, ExtSize, RuleSpec, Threshold};
use crate::error::{Error, Result};

/// Largest bound accepted for `bounded_size`; the table has `(B+1)^4` cells.
pub const MAX_TABLE_BOUND: u64 = 30;

/// Decision table of a 4-vertex bounded-size Achlioptas rule.
///
/// Each sampled size is capped to a class in `1..=B` or "above B"; the table
/// maps the four classes to pair 1 (`{1,2}`) or pair 2 (`{3,4}`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundedTable {
    bound: u64,
    first_pair: Vec<bool>,
}

impl BoundedTable {
    /// First pair iff both of its endpoints lie in components of size ≤ B.
    /// With `B = 1` this is the Bohman–Frieze rule.
    pub fn bohman_frieze_like(bound: u64) -> Result<Self> {
        Self::from_fn(bound, |c| c[0] < bound && c[1] < bound)
    }

    /// Always the first pair (Erdős–Rényi in disguise).
    pub fn always_first(bound: u64) -> Result<Self> {
        Self::from_fn(bound, |_| true)
    }

    /// Table from a predicate over class indices; class `B` means "above B".
    pub fn from_fn(bound: u64, first: impl Fn([u64; 4]) -> bool) -> Result<Self> {
        check_bound(bound)?;
        let w = bound + 1;
        let mut first_pair = Vec::with_capacity((w * w * w * w) as usize);
        for a in 0..w {
            for b in 0..w {
                for c in 0..w {
                    for d in 0..w {
                        first_pair.push(first([a, b, c, d]));
                    }
                }
            }
        }
        Ok(BoundedTable { bound, first_pair })
    }

    /// Parse a string of `1`/`2` digits listing cells in lexicographic
    /// order of the capped classes (last position varies fastest).
    pub fn parse(bound: u64, digits: &str) -> Result<Self> {
        check_bound(bound)?;
        let w = (bound + 1) as usize;
        let cells = w * w * w * w;
        let digits: Vec<char> = digits.chars().filter(|c| !c.is_whitespace()).collect();
        if digits.len() != cells {
            return Err(Error::Params {
                rule: "bounded_size".into(),
                reason: format!("table for B = {bound} needs {cells} cells, got {}", digits.len()),
            });
        }
        let first_pair = digits
            .iter()
            .map(|c| match c {
                '1' => Ok(true),
                '2' => Ok(false),
                other => Err(Error::Params {
                    rule: "bounded_size".into(),
                    reason: format!("table cells must be 1 or 2, found `{other}`"),
                }),
            })
            .collect::<Result<_>>()?;
        Ok(BoundedTable { bound, first_pair })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Class index `0..=B` of a size; `B` stands for "larger than B".
    #[inline]
    pub fn class(&self, size: ExtSize) -> u64 {
        match size {
            ExtSize::Finite(s) if s <= self.bound => s - 1,
            _ => self.bound,
        }
    }

    #[inline]
    pub fn first_by_class(&self, classes: [u64; 4]) -> bool {
        let w = self.bound + 1;
        let idx = ((classes[0] * w + classes[1]) * w + classes[2]) * w + classes[3];
        self.first_pair[idx as usize]
    }

    #[inline]
    pub fn first(&self, sizes: &[ExtSize]) -> bool {
        self.first_by_class([
            self.class(sizes[0]),
            self.class(sizes[1]),
            self.class(sizes[2]),
            self.class(sizes[3]),
        ])
    }
}

fn check_bound(bound: u64) -> Result<()> {
    if bound == 0 || bound > MAX_TABLE_BOUND {
        return Err(Error::Params {
            rule: "bounded_size".into(),
            reason: format!("B must be in 1..={MAX_TABLE_BOUND}, got {bound}"),
        });
    }
    Ok(())
}

/// The built-in rule catalogue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// ℓ = 2, always adds `{1,2}`.
    ErdosRenyi,
    /// ℓ = 4, adds `{1,2}` iff both endpoints are isolated, else `{3,4}`.
    BohmanFrieze,
    /// ℓ = 4, decision from a capped-size table.
    BoundedSize(BoundedTable),
    /// ℓ = 4, pair with the smaller product of component sizes; ties to `{1,2}`.
    Product,
    /// ℓ = 4, pair with the smaller sum of component sizes; ties to `{1,2}`.
    Sum,
    /// ℓ = 4, joins the smaller-component vertex of `{1,2}` to the
    /// smaller-component vertex of `{3,4}`; ties to the lower index.
    Dcdgm,
    /// ℓ = 3, candidates `{1,2}` and `{1,3}`; adds the one whose other
    /// endpoint has the smaller component; ties to `{1,2}`.
    AdjacentEdge,
}

impl Builtin {
    pub fn ell(&self) -> usize {
        match self {
            Builtin::ErdosRenyi => 2,
            Builtin::AdjacentEdge => 3,
            _ => 4,
        }
    }

    pub fn threshold(&self) -> Threshold {
        match self {
            Builtin::ErdosRenyi | Builtin::Dcdgm | Builtin::AdjacentEdge => Threshold::Identity,
            Builtin::BohmanFrieze => Threshold::AtLeast(1),
            Builtin::BoundedSize(t) => Threshold::AtLeast(t.bound()),
            Builtin::Product => Threshold::Square,
            Builtin::Sum => Threshold::Double,
        }
    }

    pub fn is_achlioptas(&self) -> bool {
        matches!(
            self,
            Builtin::BohmanFrieze | Builtin::BoundedSize(_) | Builtin::Product | Builtin::Sum
        )
    }

    pub fn bound(&self) -> Option<u64> {
        match self {
            Builtin::BohmanFrieze => Some(1),
            Builtin::BoundedSize(t) => Some(t.bound()),
            _ => None,
        }
    }

    /// Position swaps that leave the merge outcome unchanged.
    pub fn exchangeable(&self) -> Vec<(usize, usize)> {
        match self {
            Builtin::ErdosRenyi => vec![(0, 1)],
            Builtin::AdjacentEdge => vec![(1, 2)],
            Builtin::BohmanFrieze | Builtin::Product | Builtin::Sum | Builtin::Dcdgm => {
                vec![(0, 1), (2, 3)]
            }
            // A general table need not be symmetric within pairs.
            Builtin::BoundedSize(_) => vec![],
        }
    }

    #[inline]
    pub(crate) fn decide(&self, s: &[ExtSize]) -> Choices {
        let first = match self {
            Builtin::ErdosRenyi => return smallvec![EdgeChoice::single(0, 1)],
            Builtin::AdjacentEdge => {
                return if s[1] <= s[2] {
                    smallvec![EdgeChoice::single(0, 1)]
                } else {
                    smallvec![EdgeChoice::single(0, 2)]
                };
            }
            Builtin::Dcdgm => {
                let a = if s[0] <= s[1] { 0 } else { 1 };
                let b = if s[2] <= s[3] { 2 } else { 3 };
                return smallvec![EdgeChoice::single(a, b)];
            }
            Builtin::BohmanFrieze => {
                s[0] == ExtSize::Finite(1) && s[1] == ExtSize::Finite(1)
            }
            Builtin::BoundedSize(table) => table.first(s),
            Builtin::Product => s[0].product(s[1]) <= s[2].product(s[3]),
            Builtin::Sum => s[0].sum(s[1]) <= s[2].sum(s[3]),
        };
        if first {
            smallvec![EdgeChoice::single(0, 1)]
        } else {
            smallvec![EdgeChoice::single(2, 3)]
        }
    }
}

/// One line of the rule catalogue.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogueEntry {
    pub name: &'static str,
    pub ell: usize,
    pub g: &'static str,
    pub params: &'static str,
    pub summary: &'static str,
}

pub fn catalogue() -> Vec<CatalogueEntry> {
    vec![
        CatalogueEntry {
            name: "erdos_renyi",
            ell: 2,
            g: "s",
            params: "",
            summary: "always adds {1,2}",
        },
        CatalogueEntry {
            name: "bohman_frieze",
            ell: 4,
            g: "max(1,s)",
            params: "",
            summary: "adds {1,2} iff both endpoints are isolated, else {3,4}",
        },
        CatalogueEntry {
            name: "bounded_size",
            ell: 4,
            g: "max(B,s)",
            params: "B (1..=30); table = bf | er | string of (B+1)^4 digits 1/2",
            summary: "decision read from a table over sizes capped at B+1",
        },
        CatalogueEntry {
            name: "product",
            ell: 4,
            g: "s^2",
            params: "",
            summary: "adds the pair with the smaller product of sizes, ties to {1,2}",
        },
        CatalogueEntry {
            name: "sum",
            ell: 4,
            g: "2s",
            params: "",
            summary: "adds the pair with the smaller sum of sizes, ties to {1,2}",
        },
        CatalogueEntry {
            name: "dcdgm",
            ell: 4,
            g: "s",
            params: "",
            summary: "joins the smaller-component vertex of {1,2} to that of {3,4}, ties to lower index",
        },
        CatalogueEntry {
            name: "adjacent_edge",
            ell: 3,
            g: "s",
            params: "",
            summary: "of {1,2},{1,3} adds the one whose far endpoint has the smaller component, ties to {1,2}",
        },
    ]
}

/// Look up a catalogue rule by name.
///
/// ```
/// use std::collections::BTreeMap;
/// let er = achlioptas::rules::builtin("erdos_renyi", &BTreeMap::new()).unwrap();
/// assert_eq!(er.ell(), 2);
/// assert_eq!(er.g(17), 17);
/// ```
pub fn builtin(name: &str, params: &BTreeMap<String, String>) -> Result<RuleSpec> {
    let no_params = |kind: Builtin| {
        if let Some(key) = params.keys().next() {
            return Err(Error::Params {
                rule: name.to_string(),
                reason: format!("takes no parameters, got `{key}`"),
            });
        }
        Ok(RuleSpec::from_builtin(name, BTreeMap::new(), kind))
    };
    match name {
        "erdos_renyi" => no_params(Builtin::ErdosRenyi),
        "bohman_frieze" => no_params(Builtin::BohmanFrieze),
        "product" => no_params(Builtin::Product),
        "sum" => no_params(Builtin::Sum),
        "dcdgm" => no_params(Builtin::Dcdgm),
        "adjacent_edge" => no_params(Builtin::AdjacentEdge),
        "bounded_size" => {
            let bad = |reason: String| Error::Params {
                rule: name.to_string(),
                reason,
            };
            if let Some(key) = params.keys().find(|k| *k != "B" && *k != "table") {
                return Err(bad(format!("unknown parameter `{key}`")));
            }
            let bound: u64 = params
                .get("B")
                .ok_or_else(|| bad("missing `B`".into()))?
                .trim()
                .parse()
                .map_err(|e| bad(format!("`B` is not an integer: {e}")))?;
            let table = match params.get("table").map(|s| s.trim()) {
                None => return Err(bad("missing `table`".into())),
                Some("bf") => BoundedTable::bohman_frieze_like(bound)?,
                Some("er") => BoundedTable::always_first(bound)?,
                Some(digits) => BoundedTable::parse(bound, digits)?,
            };
            Ok(RuleSpec::from_builtin(name, params.clone(), Builtin::BoundedSize(table)))
        }
        other => Err(Error::UnknownRule(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Partition;

    fn rule(name: &str) -> RuleSpec {
        builtin(name, &BTreeMap::new()).unwrap()
    }

    fn sizes(v: &[u64]) -> Vec<ExtSize> {
        v.iter().map(|&s| ExtSize::finite(s)).collect()
    }

    #[test]
    fn erdos_renyi_adds_first_pair() {
        let er = rule("erdos_renyi");
        let c = er.decide(&sizes(&[1, 1]), &Partition::discrete(2)).unwrap();
        assert_eq!(c.as_slice(), &[EdgeChoice::single(0, 1)]);
        assert_eq!(er.ell(), 2);
        assert_eq!(er.g(5), 5);
    }

    #[test]
    fn product_picks_smaller_product() {
        // 2·3 = 6 > 1·5 = 5, so {3,4}
        let c = rule("product")
            .decide(&sizes(&[2, 3, 1, 5]), &Partition::discrete(4))
            .unwrap();
        assert_eq!(c.as_slice(), &[EdgeChoice::single(2, 3)]);
    }

    #[test]
    fn product_giant_tie_goes_first() {
        let g = ExtSize::Giant;
        let f = ExtSize::Finite;
        let p = Partition::from_blocks(4, &[&[0, 2], &[1], &[3]]).unwrap();
        let c = rule("product").decide(&[g, f(2), g, f(2)], &p).unwrap();
        assert_eq!(c.as_slice(), &[EdgeChoice::single(0, 1)]);
    }

    #[test]
    fn product_flags() {
        let p = rule("product");
        assert_eq!(p.ell(), 4);
        assert!(p.is_achlioptas());
        assert_eq!(p.g(6), 36);
        assert_eq!(rule("sum").g(6), 12);
        assert!(!rule("dcdgm").is_achlioptas());
    }

    #[test]
    fn sum_rule() {
        let d = Partition::discrete(4);
        let r = rule("sum");
        assert_eq!(r.decide(&sizes(&[2, 3, 1, 5]), &d).unwrap()[0], EdgeChoice::single(0, 1));
        assert_eq!(r.decide(&sizes(&[2, 5, 1, 5]), &d).unwrap()[0], EdgeChoice::single(2, 3));
    }

    #[test]
    fn bohman_frieze() {
        let d = Partition::discrete(4);
        let r = rule("bohman_frieze");
        assert_eq!(r.decide(&sizes(&[1, 1, 9, 9]), &d).unwrap()[0], EdgeChoice::single(0, 1));
        assert_eq!(r.decide(&sizes(&[1, 2, 1, 1]), &d).unwrap()[0], EdgeChoice::single(2, 3));
        assert_eq!(r.bounded_size(), Some(1));
    }

    #[test]
    fn dcdgm_and_adjacent() {
        let d = Partition::discrete(4);
        let r = rule("dcdgm");
        assert_eq!(r.decide(&sizes(&[5, 2, 3, 3]), &d).unwrap()[0], EdgeChoice::single(1, 2));
        assert_eq!(r.decide(&sizes(&[1, 2, 7, 3]), &d).unwrap()[0], EdgeChoice::single(0, 3));
        let a = rule("adjacent_edge");
        let d3 = Partition::discrete(3);
        assert_eq!(a.decide(&sizes(&[9, 4, 4]), &d3).unwrap()[0], EdgeChoice::single(0, 1));
        assert_eq!(a.decide(&sizes(&[9, 5, 4]), &d3).unwrap()[0], EdgeChoice::single(0, 2));
    }

    #[test]
    fn bounded_size_bf_table_matches_bohman_frieze() {
        let mut params = BTreeMap::new();
        params.insert("B".to_string(), "1".to_string());
        params.insert("table".to_string(), "bf".to_string());
        let table_rule = builtin("bounded_size", &params).unwrap();
        let bf = rule("bohman_frieze");
        // Sizes 1 and 2 cover both capped classes for B = 1; add giants too.
        let values = [ExtSize::Finite(1), ExtSize::Finite(2), ExtSize::Finite(7), ExtSize::Giant];
        for &a in &values {
            for &b in &values {
                for &c in &values {
                    for &d in &values {
                        let s = [a, b, c, d];
                        let p = Partition::limit_convention(&s);
                        assert_eq!(
                            table_rule.decide(&s, &p).unwrap(),
                            bf.decide(&s, &p).unwrap(),
                            "{s:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn bounded_size_explicit_table() {
        let mut params = BTreeMap::new();
        params.insert("B".to_string(), "1".to_string());
        params.insert("table".to_string(), "1222 2222 2222 2222".to_string());
        let r = builtin("bounded_size", &params).unwrap();
        let d = Partition::discrete(4);
        assert_eq!(r.decide(&sizes(&[1, 1, 1, 1]), &d).unwrap()[0], EdgeChoice::single(0, 1));
        assert_eq!(r.decide(&sizes(&[1, 1, 1, 3]), &d).unwrap()[0], EdgeChoice::single(2, 3));
    }

    #[test]
    fn malformed_params() {
        let mut params = BTreeMap::new();
        assert!(matches!(builtin("bounded_size", &params), Err(Error::Params { .. })));
        params.insert("B".to_string(), "x".to_string());
        params.insert("table".to_string(), "bf".to_string());
        assert!(matches!(builtin("bounded_size", &params), Err(Error::Params { .. })));
        params.insert("B".to_string(), "2".to_string());
        params.insert("table".to_string(), "121".to_string());
        assert!(matches!(builtin("bounded_size", &params), Err(Error::Params { .. })));
        params.insert("table".to_string(), "bf".to_string());
        params.insert("C".to_string(), "1".to_string());
        assert!(matches!(builtin("bounded_size", &params), Err(Error::Params { .. })));
        let mut extra = BTreeMap::new();
        extra.insert("B".to_string(), "1".to_string());
        assert!(matches!(builtin("product", &extra), Err(Error::Params { .. })));
        assert!(matches!(builtin("nope", &BTreeMap::new()), Err(Error::UnknownRule(_))));
    }

    #[test]
    fn catalogue_names_resolve() {
        for entry in catalogue() {
            if entry.name == "bounded_size" {
                continue;
            }
            let r = rule(entry.name);
            assert_eq!(r.ell(), entry.ell, "{}", entry.name);
        }
    }
}
