//! Algebraic-geometric data on a reducible nodal rational curve.
//!
//! The curve is a union of rational components glued at nodes. The
//! holomorphic involution acts per component: a self-paired component
//! carries z -> -z (fixed points 0 and infinity), a swapped pair is glued
//! by the identity chart map. The antiholomorphic involution is
//! coordinate-wise conjugation, which is why all admissible coordinates
//! are real.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::poly::C;

pub const DATASET_FORMAT: u32 = 1;

pub type ComponentId = usize;

/// Affine coordinate of a point on a rational component, one chart plus
/// the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coord {
    Finite(Complex64),
    Infinity,
}

impl Coord {
    pub fn finite(re: f64) -> Self {
        Coord::Finite(Complex64::new(re, 0.0))
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, Coord::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match self {
            Coord::Finite(z) => Some(*z),
            Coord::Infinity => None,
        }
    }

    pub fn negate(&self) -> Coord {
        match self {
            Coord::Finite(z) => Coord::Finite(-z),
            Coord::Infinity => Coord::Infinity,
        }
    }

    fn is_nan(&self) -> bool {
        match self {
            Coord::Finite(z) => z.re.is_nan() || z.im.is_nan(),
            Coord::Infinity => false,
        }
    }

    fn is_real(&self) -> bool {
        match self {
            Coord::Finite(z) => z.im == 0.0,
            Coord::Infinity => true,
        }
    }
}

// "inf" or [re, im] at the serialization boundary.
impl Serialize for Coord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Coord::Infinity => s.serialize_str("inf"),
            Coord::Finite(z) => [z.re, z.im].serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Inf(String),
            Pair([f64; 2]),
        }
        match Raw::deserialize(d)? {
            Raw::Inf(s) if s == "inf" => Ok(Coord::Infinity),
            Raw::Inf(s) => Err(serde::de::Error::custom(format!(
                "expected \"inf\" or [re, im], got {s:?}"
            ))),
            Raw::Pair([re, im]) => Ok(Coord::Finite(Complex64::new(re, im))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointOnCurve {
    pub component: ComponentId,
    pub z: Coord,
}

impl PointOnCurve {
    pub fn new(component: ComponentId, z: Coord) -> Self {
        PointOnCurve { component, z }
    }
}

/// A marked essential-singularity point together with its parameter scale:
/// the local parameter on its component is k(z) = rho * z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EssentialPoint {
    pub component: ComponentId,
    pub z: Coord,
    pub rho: f64,
}

impl EssentialPoint {
    pub fn point(&self) -> PointOnCurve {
        PointOnCurve::new(self.component, self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: ComponentId,
    pub sigma_partner: ComponentId,
    pub sigma_is_negation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub a: PointOnCurve,
    pub b: PointOnCurve,
}

/// The full algebraic-geometric data set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurveData {
    pub n: usize,
    #[serde(rename = "N")]
    pub codim: usize,
    pub l: usize,
    pub components: Vec<Component>,
    pub nodes: Vec<Node>,
    #[serde(rename = "P")]
    pub p_points: Vec<EssentialPoint>,
    #[serde(rename = "Q")]
    pub q_points: Vec<PointOnCurve>,
    #[serde(rename = "R")]
    pub r_points: Vec<PointOnCurve>,
    pub gamma: Vec<PointOnCurve>,
    pub d: Vec<f64>,
    pub swap_state: Vec<bool>,
}

#[derive(Debug, thiserror::Error)]
pub enum CurveError {
    #[error("unknown component id {0}")]
    UnknownComponent(ComponentId),
    #[error("dataset format {found} unsupported (expected {expected})")]
    BadFormat { found: u32, expected: u32 },
    #[error("dataset parse error: {0}")]
    Parse(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, code: &str, message: String) {
        self.violations.push(Violation {
            code: code.to_string(),
            message,
        });
    }
}

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    format: u32,
    #[serde(flatten)]
    data: SpectralCurveData,
}

impl SpectralCurveData {
    pub fn from_json_str(s: &str) -> Result<Self, CurveError> {
        let file: DatasetFile = serde_json::from_str(s)?;
        if file.format != DATASET_FORMAT {
            return Err(CurveError::BadFormat {
                found: file.format,
                expected: DATASET_FORMAT,
            });
        }
        Ok(file.data)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&DatasetFile {
            format: DATASET_FORMAT,
            data: self.clone(),
        })
        .expect("dataset serialization cannot fail")
    }

    pub fn component(&self, id: ComponentId) -> Result<&Component, CurveError> {
        self.components.get(id).ok_or(CurveError::UnknownComponent(id))
    }

    /// Arithmetic genus of the nodal curve: #nodes - #components + 1.
    pub fn arithmetic_genus(&self) -> i64 {
        self.nodes.len() as i64 - self.components.len() as i64 + 1
    }

    /// The holomorphic involution on points.
    pub fn sigma_image(&self, p: PointOnCurve) -> Result<PointOnCurve, CurveError> {
        let comp = self.component(p.component)?;
        if comp.sigma_partner == comp.id {
            Ok(PointOnCurve::new(p.component, p.z.negate()))
        } else {
            self.component(comp.sigma_partner)?;
            Ok(PointOnCurve::new(comp.sigma_partner, p.z))
        }
    }

    /// The R-point actually carrying the normalization condition for slot
    /// alpha (0-based): R_alpha or sigma(R_alpha) according to swap_state.
    pub fn physical_r(&self, alpha: usize) -> Result<PointOnCurve, CurveError> {
        let p = self.r_points[alpha];
        if alpha < self.l && *self.swap_state.get(alpha).unwrap_or(&false) {
            self.sigma_image(p)
        } else {
            Ok(p)
        }
    }

    /// Gamma points lying on the given component (indices into `gamma`).
    pub fn gamma_on(&self, comp: ComponentId) -> Vec<usize> {
        self.gamma
            .iter()
            .enumerate()
            .filter(|(_, g)| g.component == comp)
            .map(|(i, _)| i)
            .collect()
    }

    /// Essential point (if any) on the given component, with its index.
    pub fn p_on(&self, comp: ComponentId) -> Option<(usize, &EssentialPoint)> {
        self.p_points
            .iter()
            .enumerate()
            .find(|(_, p)| p.component == comp)
    }

    fn points_equal(a: PointOnCurve, b: PointOnCurve) -> bool {
        a.component == b.component && a.z == b.z
    }

    fn all_marked(&self) -> Vec<(String, PointOnCurve)> {
        let mut pts: Vec<(String, PointOnCurve)> = vec![];
        for (j, p) in self.p_points.iter().enumerate() {
            pts.push((format!("P_{}", j + 1), p.point()));
        }
        for (k, q) in self.q_points.iter().enumerate() {
            pts.push((format!("Q_{}", k + 1), *q));
        }
        for (a, r) in self.r_points.iter().enumerate() {
            pts.push((format!("R_{}", a + 1), *r));
            if a < self.l {
                if let Ok(sr) = self.sigma_image(*r) {
                    pts.push((format!("sigmaR_{}", a + 1), sr));
                }
            }
        }
        for (m, g) in self.gamma.iter().enumerate() {
            pts.push((format!("gamma_{}", m + 1), *g));
        }
        pts
    }

    /// Structural admissibility check. Total: returns a report, never fails.
    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let nc = self.components.len();

        for (i, c) in self.components.iter().enumerate() {
            if c.id != i {
                rep.push(
                    "component-ids",
                    format!("component at index {i} has id {}", c.id),
                );
            }
            if c.sigma_partner >= nc {
                rep.push(
                    "sigma-not-involution",
                    format!("component {i}: partner {} does not exist", c.sigma_partner),
                );
                continue;
            }
            let partner = &self.components[c.sigma_partner];
            if partner.sigma_partner != c.id {
                rep.push(
                    "sigma-not-involution",
                    format!("sigma pairing {} -> {} is not an involution", c.id, c.sigma_partner),
                );
            }
            let self_paired = c.sigma_partner == c.id;
            if self_paired != c.sigma_is_negation {
                rep.push(
                    "sigma-negation-flag",
                    format!(
                        "component {i}: sigma_is_negation must hold exactly for self-paired components"
                    ),
                );
            }
        }

        // all points must live on existing components with sane coordinates
        let mut coords_ok = true;
        let mut check_point = |rep: &mut ValidationReport, name: &str, p: PointOnCurve| {
            if p.component >= nc {
                rep.push("unknown-component", format!("{name} on missing component {}", p.component));
                coords_ok = false;
            }
            if p.z.is_nan() {
                rep.push("nan-coordinate", format!("{name} has a NaN coordinate"));
                coords_ok = false;
            }
            if !p.z.is_real() {
                rep.push(
                    "non-real-coordinate",
                    format!("{name} has a non-real coordinate; reality requires real data"),
                );
            }
        };
        for (j, p) in self.p_points.iter().enumerate() {
            check_point(&mut rep, &format!("P_{}", j + 1), p.point());
            if p.rho == 0.0 || p.rho.is_nan() {
                rep.push("rho-zero", format!("P_{}: parameter scale must be nonzero", j + 1));
            }
        }
        for (k, q) in self.q_points.iter().enumerate() {
            check_point(&mut rep, &format!("Q_{}", k + 1), *q);
        }
        for (a, r) in self.r_points.iter().enumerate() {
            check_point(&mut rep, &format!("R_{}", a + 1), *r);
        }
        for (m, g) in self.gamma.iter().enumerate() {
            check_point(&mut rep, &format!("gamma_{}", m + 1), *g);
        }
        for (i, nd) in self.nodes.iter().enumerate() {
            check_point(&mut rep, &format!("node_{} branch a", i + 1), nd.a);
            check_point(&mut rep, &format!("node_{} branch b", i + 1), nd.b);
        }
        if !coords_ok {
            return rep; // everything below assumes resolvable components
        }

        // cardinalities
        if self.n < 1 {
            rep.push("count-P", "n must be at least 1".to_string());
        }
        if self.l < 1 {
            rep.push("count-R", "l must be at least 1".to_string());
        }
        if self.p_points.len() != self.n {
            rep.push("count-P", format!("expected {} P-points, found {}", self.n, self.p_points.len()));
        }
        if self.q_points.len() != self.n + self.codim {
            rep.push(
                "count-Q",
                format!("expected {} Q-points, found {}", self.n + self.codim, self.q_points.len()),
            );
        }
        if self.r_points.len() != self.l + self.codim {
            rep.push(
                "count-R",
                format!("expected {} R-points, found {}", self.l + self.codim, self.r_points.len()),
            );
        }
        if self.d.len() != self.l + self.codim {
            rep.push("count-d", format!("expected {} values in d, found {}", self.l + self.codim, self.d.len()));
        }
        if self.swap_state.len() != self.l {
            rep.push("count-swap", format!("expected {} swap flags, found {}", self.l, self.swap_state.len()));
        }
        for (i, di) in self.d.iter().enumerate() {
            if di.is_nan() {
                rep.push("nan-coordinate", format!("d_{} is NaN", i + 1));
            }
        }

        let g = self.arithmetic_genus();
        if g < 0 {
            rep.push("genus-negative", format!("arithmetic genus {g} is negative"));
        }
        let expected_gamma = g + self.l as i64 + self.codim as i64 - 1;
        if self.gamma.len() as i64 != expected_gamma {
            rep.push(
                "gamma-degree",
                format!("expected {} gamma points, found {}", expected_gamma, self.gamma.len()),
            );
        }

        // dual graph connectivity
        if nc > 0 {
            let mut seen = vec![false; nc];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(c) = stack.pop() {
                for nd in &self.nodes {
                    for (x, y) in [(nd.a, nd.b), (nd.b, nd.a)] {
                        if x.component == c && !seen[y.component] {
                            seen[y.component] = true;
                            stack.push(y.component);
                        }
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                rep.push("graph-disconnected", "dual graph of the curve is not connected".to_string());
            }
        }

        // P placement: infinity of a self-paired component, so the linear
        // local parameter is odd
        for (j, p) in self.p_points.iter().enumerate() {
            let comp = &self.components[p.component];
            if !p.z.is_infinity() || comp.sigma_partner != comp.id {
                rep.push(
                    "P-placement",
                    format!("P_{} must sit at infinity of a self-paired component", j + 1),
                );
            }
        }

        // fixed points of sigma are exactly P + Q + (sigma-fixed R)
        let mut fixed_expected: Vec<PointOnCurve> = vec![];
        for c in &self.components {
            if c.sigma_partner == c.id {
                fixed_expected.push(PointOnCurve::new(c.id, Coord::finite(0.0)));
                fixed_expected.push(PointOnCurve::new(c.id, Coord::Infinity));
            }
        }
        let mut fixed_marked: Vec<(String, PointOnCurve)> = vec![];
        for (j, p) in self.p_points.iter().enumerate() {
            fixed_marked.push((format!("P_{}", j + 1), p.point()));
        }
        for (k, q) in self.q_points.iter().enumerate() {
            fixed_marked.push((format!("Q_{}", k + 1), *q));
        }
        for a in self.l..self.r_points.len() {
            fixed_marked.push((format!("R_{}", a + 1), self.r_points[a]));
        }
        for (name, pt) in &fixed_marked {
            match self.sigma_image(*pt) {
                Ok(im) if Self::points_equal(im, *pt) => {}
                _ => rep.push("marked-not-fixed", format!("{name} is not fixed by sigma")),
            }
        }
        if fixed_marked.len() != fixed_expected.len()
            || fixed_expected.iter().any(|f| {
                !fixed_marked.iter().any(|(_, m)| Self::points_equal(*m, *f))
            })
        {
            rep.push(
                "fixed-point-mismatch",
                format!(
                    "sigma has {} fixed points but {} marked points should occupy them",
                    fixed_expected.len(),
                    fixed_marked.len()
                ),
            );
        }

        // movable R-points must actually move
        for alpha in 0..self.l.min(self.r_points.len()) {
            if let Ok(im) = self.sigma_image(self.r_points[alpha]) {
                if Self::points_equal(im, self.r_points[alpha]) {
                    rep.push(
                        "R-not-movable",
                        format!("R_{} is fixed by sigma and cannot be swapped", alpha + 1),
                    );
                }
            }
        }

        // nodes: distinct branches, finite, disjoint from marked points,
        // and the node set is sigma-symmetric
        let marked = self.all_marked();
        for (i, nd) in self.nodes.iter().enumerate() {
            if Self::points_equal(nd.a, nd.b) {
                rep.push("node-branch-equal", format!("node_{} has coinciding branches", i + 1));
            }
            for br in [nd.a, nd.b] {
                if br.z.is_infinity() {
                    rep.push("node-at-infinity", format!("node_{} has a branch at infinity", i + 1));
                }
                for (name, mp) in &marked {
                    if Self::points_equal(br, *mp) {
                        rep.push(
                            "node-on-marked",
                            format!("node_{} branch coincides with {name}", i + 1),
                        );
                    }
                }
            }
        }
        for (i, nd) in self.nodes.iter().enumerate() {
            let (sa, sb) = match (self.sigma_image(nd.a), self.sigma_image(nd.b)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue,
            };
            let found = self.nodes.iter().any(|other| {
                (Self::points_equal(other.a, sa) && Self::points_equal(other.b, sb))
                    || (Self::points_equal(other.a, sb) && Self::points_equal(other.b, sa))
            });
            if !found {
                rep.push(
                    "nodes-not-sigma-symmetric",
                    format!("sigma image of node_{} is not a node", i + 1),
                );
            }
        }

        // duplicate marked points (sigma images of movable R included)
        for i in 0..marked.len() {
            for j in (i + 1)..marked.len() {
                if Self::points_equal(marked[i].1, marked[j].1) {
                    rep.push(
                        "duplicate-marked-point",
                        format!("{} and {} coincide", marked[i].0, marked[j].0),
                    );
                }
            }
        }

        rep
    }
}

/// Scalar used for the exponential factor on an essential-singularity
/// component: k(z) = rho * z evaluated at a finite chart coordinate.
pub fn local_parameter(rho: f64, z: C) -> C {
    z * rho
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dumbbell() -> SpectralCurveData {
        crate::dataset::builtin("ds-n2-l1").unwrap()
    }

    #[test]
    fn dumbbell_is_admissible() {
        let s = dumbbell();
        let rep = s.validate();
        assert!(rep.is_admissible(), "violations: {:?}", rep.violations);
    }

    #[test]
    fn genus_counts() {
        let s = dumbbell();
        assert_eq!(s.arithmetic_genus(), 1);
    }

    #[test]
    fn gamma_degree_violation() {
        let mut s = dumbbell();
        s.gamma.pop();
        let rep = s.validate();
        assert!(rep.violations.iter().any(|v| v.code == "gamma-degree"));
    }

    #[test]
    fn r_not_movable_violation() {
        let mut s = dumbbell();
        // move R_1 to a sigma-fixed coordinate of a self-paired component
        s.r_points[0] = PointOnCurve::new(0, Coord::finite(0.0));
        let rep = s.validate();
        assert!(rep.violations.iter().any(|v| v.code == "R-not-movable"));
    }

    #[test]
    fn sigma_is_involution_on_samples() {
        let s = dumbbell();
        let mut pts = vec![];
        for c in 0..s.components.len() {
            for re in [-2.5, -1.3, 0.0, 0.7, 3.1] {
                pts.push(PointOnCurve::new(c, Coord::finite(re)));
            }
            pts.push(PointOnCurve::new(c, Coord::Infinity));
        }
        for p in pts {
            let twice = s.sigma_image(s.sigma_image(p).unwrap()).unwrap();
            assert_eq!(twice, p);
        }
    }

    #[test]
    fn sigma_fixes_p_and_moves_r() {
        let s = dumbbell();
        let p1 = s.p_points[0].point();
        assert_eq!(s.sigma_image(p1).unwrap(), p1);
        let r1 = s.r_points[0];
        assert_ne!(s.sigma_image(r1).unwrap(), r1);
    }

    #[test]
    fn sigma_maps_nodes_to_nodes() {
        let s = dumbbell();
        for nd in &s.nodes {
            let sa = s.sigma_image(nd.a).unwrap();
            let sb = s.sigma_image(nd.b).unwrap();
            assert!(s.nodes.iter().any(|o| (o.a == sa && o.b == sb) || (o.a == sb && o.b == sa)));
        }
    }

    #[test]
    fn unknown_component_error() {
        let s = dumbbell();
        let bogus = PointOnCurve::new(99, Coord::finite(1.0));
        assert!(matches!(
            s.sigma_image(bogus),
            Err(CurveError::UnknownComponent(99))
        ));
    }

    #[test]
    fn serialization_round_trip() {
        let s = dumbbell();
        let json = s.to_json_string();
        let back = SpectralCurveData::from_json_str(&json).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn rejects_wrong_format_version() {
        let s = dumbbell();
        let json = s.to_json_string().replace("\"format\": 1", "\"format\": 2");
        assert!(matches!(
            SpectralCurveData::from_json_str(&json),
            Err(CurveError::BadFormat { .. })
        ));
    }
}
