//! Finitely generated groups with word-length metrics.
//!
//! Three families are supported: free abelian groups ℤᵈ, the discrete
//! Heisenberg group H₃(ℤ) and free groups F_k. Elements are stored in a
//! canonical normal form, so structural equality is group equality.
//!
//! Word lengths are computed once, by breadth-first search over the right
//! Cayley graph up to a configured radius cap. The resulting table is
//! read-only afterwards and can be shared across threads. The metric is
//! left-invariant: `ρ(x, y) = l(y⁻¹x)`, so every ball has the same size as
//! the ball around the identity.

mod growth;

pub use growth::{
    classify_growth, property_p_fit, GrowthProfile, GrowthReport, GrowthThresholds, GrowthVerdict, PropertyPFit,
};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Canonical normal form of a group element.
///
/// * ℤᵈ: the coordinate vector.
/// * H₃(ℤ): `[a, b, c]` for the unitriangular matrix with entries a, b on the
///   superdiagonal and c in the corner.
/// * F_k: the reduced word, letters encoded as `±(i + 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Element(pub Vec<i64>);

impl Element {
    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    FreeAbelian(usize),
    Heisenberg3,
    FreeGroup(usize),
}

impl GroupKind {
    fn validate(self) -> Result<Self> {
        match self {
            GroupKind::FreeAbelian(0) => Err(Error::invalid("rank", "ℤᵈ needs d ≥ 1")),
            GroupKind::FreeGroup(0) => Err(Error::invalid("rank", "F_k needs k ≥ 1")),
            k => Ok(k),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupKind::FreeAbelian(d) => write!(f, "zd:{d}"),
            GroupKind::Heisenberg3 => write!(f, "heisenberg"),
            GroupKind::FreeGroup(k) => write!(f, "free:{k}"),
        }
    }
}

impl FromStr for GroupKind {
    type Err = Error;

    /// Parses `zd:<d>`, `heisenberg` or `free:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, rank) = match s.split_once(':') {
            Some((n, r)) => {
                let r: usize = r
                    .trim()
                    .parse()
                    .map_err(|_| Error::invalid("group", format!("bad rank in {s:?}")))?;
                (n.trim(), Some(r))
            }
            None => (s.trim(), None),
        };
        let kind = match (name, rank) {
            ("zd", Some(d)) => GroupKind::FreeAbelian(d),
            ("heisenberg", None) => GroupKind::Heisenberg3,
            ("free", Some(k)) => GroupKind::FreeGroup(k),
            _ => {
                return Err(Error::invalid(
                    "group",
                    format!("expected zd:<d>, heisenberg or free:<k>, got {s:?}"),
                ))
            }
        };
        kind.validate()
    }
}

/// Configuration form of a group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub kind: String,
    #[serde(default = "default_rank", alias = "d")]
    pub rank: usize,
    pub radius_cap: u32,
    pub element_cap: usize,
}

fn default_rank() -> usize {
    1
}

impl GroupSpec {
    pub fn group_kind(&self) -> Result<GroupKind> {
        let kind = match self.kind.as_str() {
            "zd" => GroupKind::FreeAbelian(self.rank),
            "heisenberg" => GroupKind::Heisenberg3,
            "free" => GroupKind::FreeGroup(self.rank),
            other => {
                return Err(Error::Config(format!(
                    "group.kind: expected \"zd\", \"heisenberg\" or \"free\", got {other:?}"
                )))
            }
        };
        kind.validate()
    }

    pub fn build(&self) -> Result<GroupModel> {
        GroupModel::new(self.group_kind()?, self.radius_cap, self.element_cap)
    }
}

/// A finitely generated group with its word-length table.
#[derive(Debug)]
pub struct GroupModel {
    kind: GroupKind,
    generators: Vec<Element>,
    radius_cap: u32,
    element_cap: usize,
    /// Elements of B(e, radius_cap + 1) in BFS layer order, lexicographic within a layer.
    order: Vec<Element>,
    /// `layer_end[r]` = number of elements of length ≤ r.
    layer_end: Vec<usize>,
    lengths: HashMap<Element, u32>,
}

impl GroupModel {
    /// Builds the group and runs the BFS warm-up up to `radius_cap`.
    pub fn new(kind: GroupKind, radius_cap: u32, element_cap: usize) -> Result<Self> {
        let kind = kind.validate()?;
        let generators = symmetric_generators(kind);
        let mut model = GroupModel {
            kind,
            generators,
            radius_cap,
            element_cap,
            order: Vec::new(),
            layer_end: Vec::new(),
            lengths: HashMap::new(),
        };
        model.warm_up()?;
        Ok(model)
    }

    fn warm_up(&mut self) -> Result<()> {
        let id = self.identity();
        self.lengths.insert(id.clone(), 0);
        self.order.push(id.clone());
        self.layer_end.push(1);
        let mut frontier = vec![id];
        for r in 1..=self.radius_cap {
            let mut next = Vec::new();
            for g in &frontier {
                for s in &self.generators {
                    let h = self.mul(g, s);
                    if !self.lengths.contains_key(&h) {
                        self.lengths.insert(h.clone(), r);
                        next.push(h);
                    }
                }
            }
            next.sort();
            if self.order.len() + next.len() > self.element_cap {
                return Err(Error::BudgetExceeded {
                    what: "BFS horizon",
                    requested: self.order.len() + next.len(),
                    cap: self.element_cap,
                });
            }
            self.order.extend(next.iter().cloned());
            self.layer_end.push(self.order.len());
            frontier = next;
        }
        Ok(())
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    pub fn radius_cap(&self) -> u32 {
        self.radius_cap
    }

    pub fn element_cap(&self) -> usize {
        self.element_cap
    }

    pub fn identity(&self) -> Element {
        match self.kind {
            GroupKind::FreeAbelian(d) => Element(vec![0; d]),
            GroupKind::Heisenberg3 => Element(vec![0; 3]),
            GroupKind::FreeGroup(_) => Element(Vec::new()),
        }
    }

    pub fn mul(&self, g: &Element, h: &Element) -> Element {
        match self.kind {
            GroupKind::FreeAbelian(_) => Element(g.0.iter().zip(&h.0).map(|(a, b)| a + b).collect()),
            GroupKind::Heisenberg3 => {
                let (a, b, c) = (g.0[0], g.0[1], g.0[2]);
                let (a2, b2, c2) = (h.0[0], h.0[1], h.0[2]);
                Element(vec![a + a2, b + b2, c + c2 + a * b2])
            }
            GroupKind::FreeGroup(_) => {
                let mut word = g.0.clone();
                let mut rest = h.0.as_slice();
                while let (Some(&last), Some(&first)) = (word.last(), rest.first()) {
                    if last != -first {
                        break;
                    }
                    word.pop();
                    rest = &rest[1..];
                }
                word.extend_from_slice(rest);
                Element(word)
            }
        }
    }

    pub fn inv(&self, g: &Element) -> Element {
        match self.kind {
            GroupKind::FreeAbelian(_) => Element(g.0.iter().map(|a| -a).collect()),
            GroupKind::Heisenberg3 => {
                let (a, b, c) = (g.0[0], g.0[1], g.0[2]);
                Element(vec![-a, -b, -c + a * b])
            }
            GroupKind::FreeGroup(_) => Element(g.0.iter().rev().map(|a| -a).collect()),
        }
    }

    /// `y⁻¹x`, the group difference used by the metric and by dominating vectors.
    pub fn difference(&self, x: &Element, y: &Element) -> Element {
        self.mul(&self.inv(y), x)
    }

    /// Word length from the BFS table.
    pub fn length(&self, g: &Element) -> Result<u32> {
        self.lengths.get(g).copied().ok_or_else(|| Error::RadiusExceeded {
            element: g.to_string(),
            cap: self.radius_cap,
        })
    }

    /// `ρ(x, y) = l(y⁻¹x)`.
    pub fn distance(&self, x: &Element, y: &Element) -> Result<u32> {
        self.length(&self.difference(x, y))
    }

    /// Closed-form word length where one exists (ℓ¹ norm on ℤᵈ, reduced word
    /// length on F_k). H₃(ℤ) has none.
    pub fn closed_form_length(&self, g: &Element) -> Option<u32> {
        match self.kind {
            GroupKind::FreeAbelian(_) => Some(g.0.iter().map(|a| a.unsigned_abs() as u32).sum()),
            GroupKind::FreeGroup(_) => Some(g.0.len() as u32),
            GroupKind::Heisenberg3 => None,
        }
    }

    /// All elements with `l(g) < τ`, in BFS order.
    pub fn ball(&self, tau: u32) -> Result<&[Element]> {
        let size = self.ball_size(tau)?;
        if size > self.element_cap {
            return Err(Error::BudgetExceeded {
                what: "ball",
                requested: size,
                cap: self.element_cap,
            });
        }
        Ok(&self.order[..size])
    }

    /// `|B(e, τ)|` under the strict convention `l < τ`.
    pub fn ball_size(&self, tau: u32) -> Result<usize> {
        if tau == 0 {
            return Ok(0);
        }
        let r = tau - 1;
        if r > self.radius_cap {
            return Err(Error::RadiusExceeded {
                element: format!("ball of radius {tau}"),
                cap: self.radius_cap,
            });
        }
        Ok(self.layer_end[r as usize])
    }

    /// Number of elements of exact length n, for n = 0..=radius_cap.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        let mut prev = 0;
        self.layer_end
            .iter()
            .map(|&end| {
                let s = end - prev;
                prev = end;
                s
            })
            .collect()
    }

    /// Ball sizes `|B(e, τ)|` for τ = 1..=τ_max.
    pub fn growth_profile(&self, tau_max: u32) -> Result<GrowthProfile> {
        if tau_max < 1 {
            return Err(Error::invalid("tau_max", "must be ≥ 1"));
        }
        let radii: Vec<u32> = (1..=tau_max).collect();
        let ball_sizes = radii
            .iter()
            .map(|&t| self.ball(t).map(|b| b.len()))
            .collect::<Result<Vec<_>>>()?;
        Ok(GrowthProfile {
            radii,
            ball_sizes,
            sup_is_uniform: true,
        })
    }
}

fn symmetric_generators(kind: GroupKind) -> Vec<Element> {
    match kind {
        GroupKind::FreeAbelian(d) => (0..d)
            .flat_map(|i| {
                let mut e = vec![0; d];
                e[i] = 1;
                let neg = e.iter().map(|v| -v).collect();
                [Element(e), Element(neg)]
            })
            .collect(),
        GroupKind::Heisenberg3 => vec![
            Element(vec![1, 0, 0]),
            Element(vec![-1, 0, 0]),
            Element(vec![0, 1, 0]),
            Element(vec![0, -1, 0]),
        ],
        GroupKind::FreeGroup(k) => (1..=k as i64)
            .flat_map(|i| [Element(vec![i]), Element(vec![-i])])
            .collect(),
    }
}
