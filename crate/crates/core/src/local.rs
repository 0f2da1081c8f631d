//! Local uncertainty models: mass functions, credal sets in vertex form and
//! the coherent upper expectations they induce.
//!
//! The upper envelope of a credal set is a maximum of a linear functional
//! over a polytope, so it is attained at a vertex and computed exactly as a
//! finite maximum.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::TOLERANCE;

/// Tolerance on simplex membership of mass functions.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// A probability mass function on the state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MassFunction(Vec<f64>);

impl MassFunction {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidMassFunction(format!(
                "need at least two entries, got {}",
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < -MASS_TOLERANCE) {
            return Err(Error::InvalidMassFunction(format!("entry {bad} outside [0, 1]")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidMassFunction(format!("entries sum to {total}")));
        }
        Ok(Self(probs))
    }

    /// Point mass on state `x`.
    pub fn degenerate(size: usize, x: usize) -> Self {
        let mut v = vec![0.0; size];
        v[x] = 1.0;
        Self(v)
    }

    pub fn uniform(size: usize) -> Self {
        Self(vec![1.0 / size as f64; size])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `Σ_x f(x) p(x)`.
    pub fn expectation(&self, f: &[f64]) -> f64 {
        self.0.iter().zip(f).map(|(p, v)| p * v).sum()
    }

    /// `(1 − w)·self + w·other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let v = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect();
        Self::new(v)
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for MassFunction {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<MassFunction> for Vec<f64> {
    fn from(m: MassFunction) -> Self {
        m.0
    }
}

/// A real-valued function on the state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalGamble(Vec<f64>);

impl LocalGamble {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Spec("local gamble with non-finite value".into()));
        }
        Ok(Self(values))
    }

    pub fn constant(size: usize, c: f64) -> Self {
        Self(vec![c; size])
    }

    pub fn indicator(size: usize, x: usize) -> Self {
        let mut v = vec![0.0; size];
        v[x] = 1.0;
        Self(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sup(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self(self.0.iter().map(|v| lambda * v).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }
}

impl From<Vec<f64>> for LocalGamble {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// A closed convex set of mass functions given by its extreme points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<MassFunction>", into = "Vec<MassFunction>")]
pub struct CredalSet {
    vertices: Vec<MassFunction>,
}

impl CredalSet {
    /// Builds a credal set, dropping duplicate vertices.
    pub fn new(vertices: Vec<MassFunction>) -> Result<Self> {
        let size = vertices.first().ok_or(Error::EmptyCredalSet)?.len();
        let mut kept: Vec<MassFunction> = Vec::with_capacity(vertices.len());
        for v in vertices {
            if v.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    got: v.len(),
                });
            }
            if !kept.iter().any(|k| k.max_abs_diff(&v) <= MASS_TOLERANCE) {
                kept.push(v);
            }
        }
        Ok(Self { vertices: kept })
    }

    pub fn from_vectors(vectors: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            vectors
                .into_iter()
                .map(MassFunction::new)
                .collect::<Result<_>>()?,
        )
    }

    pub fn precise(p: MassFunction) -> Self {
        Self { vertices: vec![p] }
    }

    /// All mass functions: the point masses are the vertices.
    pub fn vacuous(size: usize) -> Self {
        Self {
            vertices: (0..size).map(|x| MassFunction::degenerate(size, x)).collect(),
        }
    }

    /// Vertices `(1 − ε)p + ε·δ_x` for every state `x`.
    pub fn linear_vacuous(p: &MassFunction, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidMassFunction(format!(
                "contamination {epsilon} outside [0, 1]"
            )));
        }
        let vertices = (0..p.len())
            .map(|x| p.mix(&MassFunction::degenerate(p.len(), x), epsilon))
            .collect::<Result<_>>()?;
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[MassFunction] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn dimension(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn is_precise(&self) -> bool {
        self.vertices.len() == 1
    }

    /// Upper envelope with the maximizing vertex (lowest index on ties).
    pub fn argmax(&self, f: &[f64]) -> (usize, f64) {
        debug_assert_eq!(f.len(), self.dimension());
        let mut best = (0, f64::NEG_INFINITY);
        for (i, v) in self.vertices.iter().enumerate() {
            let e = v.expectation(f);
            if e > best.1 {
                best = (i, e);
            }
        }
        best
    }

    /// `max_v Σ f(x) v(x)` without a dimension check.
    pub fn upper(&self, f: &[f64]) -> f64 {
        self.argmax(f).1
    }

    /// `−upper(−f)`.
    pub fn lower(&self, f: &[f64]) -> f64 {
        let neg: Vec<f64> = f.iter().map(|v| -v).collect();
        -self.upper(&neg)
    }

    pub fn upper_envelope(&self, f: &LocalGamble) -> Result<f64> {
        self.check_dim(f.len())?;
        Ok(self.upper(f.values()))
    }

    pub fn lower_envelope(&self, f: &LocalGamble) -> Result<f64> {
        self.check_dim(f.len())?;
        Ok(self.lower(f.values()))
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got,
            });
        }
        Ok(())
    }
}

impl TryFrom<Vec<MassFunction>> for CredalSet {
    type Error = Error;

    fn try_from(v: Vec<MassFunction>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<CredalSet> for Vec<MassFunction> {
    fn from(k: CredalSet) -> Self {
        k.vertices
    }
}

/// Anything that can be evaluated as a local upper expectation.
pub trait LocalUpper {
    fn local_upper(&self, f: &[f64]) -> f64;
}

impl LocalUpper for CredalSet {
    fn local_upper(&self, f: &[f64]) -> f64 {
        self.upper(f)
    }
}

impl<F: Fn(&[f64]) -> f64> LocalUpper for F {
    fn local_upper(&self, f: &[f64]) -> f64 {
        self(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoherenceAxiom {
    /// `Q(f) ≤ sup f`
    C1,
    /// `Q(f + g) ≤ Q(f) + Q(g)`
    C2,
    /// `Q(λf) = λQ(f)` for `λ ≥ 0`
    C3,
}

impl fmt::Display for CoherenceAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceViolation {
    pub axiom: CoherenceAxiom,
    /// Indices into the test set (one for C1/C3, two for C2).
    pub gambles: Vec<usize>,
    pub lambda: Option<f64>,
    pub observed: f64,
    pub bound: f64,
    /// `bound − observed`; negative for a violation.
    pub slack: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub cases: usize,
    pub violations: Vec<CoherenceViolation>,
}

impl CoherenceReport {
    pub fn is_coherent(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks C1–C3 on a finite family of test gambles and non-negative scalars.
/// `λ = 0` is always included; negative scalars are ignored.
pub fn check_coherence(
    q: &impl LocalUpper,
    test_gambles: &[LocalGamble],
    nonneg_scalars: &[f64],
    tol: f64,
) -> CoherenceReport {
    let mut report = CoherenceReport::default();
    let values: Vec<f64> = test_gambles.iter().map(|f| q.local_upper(f.values())).collect();

    for (i, f) in test_gambles.iter().enumerate() {
        report.cases += 1;
        let sup = f.sup();
        if values[i] > sup + tol {
            report.violations.push(CoherenceViolation {
                axiom: CoherenceAxiom::C1,
                gambles: vec![i],
                lambda: None,
                observed: values[i],
                bound: sup,
                slack: sup - values[i],
            });
        }
    }

    for i in 0..test_gambles.len() {
        for j in i..test_gambles.len() {
            report.cases += 1;
            let sum = q.local_upper(test_gambles[i].add(&test_gambles[j]).values());
            let bound = values[i] + values[j];
            if sum > bound + tol {
                report.violations.push(CoherenceViolation {
                    axiom: CoherenceAxiom::C2,
                    gambles: vec![i, j],
                    lambda: None,
                    observed: sum,
                    bound,
                    slack: bound - sum,
                });
            }
        }
    }

    let mut lambdas = vec![0.0];
    lambdas.extend(nonneg_scalars.iter().copied().filter(|l| *l > 0.0));
    for (i, f) in test_gambles.iter().enumerate() {
        for &lambda in &lambdas {
            report.cases += 1;
            let observed = q.local_upper(f.scale(lambda).values());
            let expected = lambda * values[i];
            let gap = (observed - expected).abs();
            if gap > tol * (1.0 + lambda.abs()) {
                report.violations.push(CoherenceViolation {
                    axiom: CoherenceAxiom::C3,
                    gambles: vec![i],
                    lambda: Some(lambda),
                    observed,
                    bound: expected,
                    slack: -gap,
                });
            }
        }
    }
    report
}

/// Outcome of a domination test.
#[derive(Debug, Clone, PartialEq)]
pub enum Domination {
    Dominated,
    Violated {
        witness: LocalGamble,
        expectation: f64,
        envelope: f64,
    },
}

impl Domination {
    pub fn is_dominated(&self) -> bool {
        matches!(self, Domination::Dominated)
    }
}

/// Default test gambles for domination: coordinate indicators, all `±1` sign
/// vectors, and for every vertex pair the edge direction `±d` plus (on three
/// states) the in-plane edge normals `±d × (1,1,1)`. With at most three
/// states these include every facet normal of the hull, which makes the test
/// exact there.
pub fn domination_test_set(k: &CredalSet) -> Vec<LocalGamble> {
    let n = k.dimension();
    let mut set: Vec<LocalGamble> = (0..n).map(|x| LocalGamble::indicator(n, x)).collect();
    if n <= 16 {
        for mask in 0u32..(1 << n) {
            set.push(LocalGamble(
                (0..n)
                    .map(|x| if mask >> x & 1 == 1 { 1.0 } else { -1.0 })
                    .collect(),
            ));
        }
    }
    let vs = k.vertices();
    for i in 0..vs.len() {
        for j in i + 1..vs.len() {
            let d: Vec<f64> = vs[j]
                .probs()
                .iter()
                .zip(vs[i].probs())
                .map(|(a, b)| a - b)
                .collect();
            if n == 3 {
                let normal = vec![d[1] - d[2], d[2] - d[0], d[0] - d[1]];
                set.push(LocalGamble(normal.clone()));
                set.push(LocalGamble(normal.iter().map(|v| -v).collect()));
            }
            set.push(LocalGamble(d.iter().map(|v| -v).collect()));
            set.push(LocalGamble(d));
        }
    }
    set
}

/// Sound falsifier for `p ∈ K`: reports a witness gamble `f` with
/// `Σ f p > upper(K, f) + tol`. Exact for at most three states; possibly
/// incomplete beyond.
pub fn is_dominated(
    p: &MassFunction,
    k: &CredalSet,
    extra_gambles: &[LocalGamble],
    tol: f64,
) -> Result<Domination> {
    if p.len() != k.dimension() {
        return Err(Error::DimensionMismatch {
            expected: k.dimension(),
            got: p.len(),
        });
    }
    for f in domination_test_set(k).iter().chain(extra_gambles) {
        let envelope = k.upper_envelope(f)?;
        let expectation = p.expectation(f.values());
        if expectation > envelope + tol {
            return Ok(Domination::Violated {
                witness: f.clone(),
                expectation,
                envelope,
            });
        }
    }
    Ok(Domination::Dominated)
}

/// `is_dominated` with the default tolerance and no extra gambles.
pub fn dominated_by(p: &MassFunction, k: &CredalSet) -> Result<bool> {
    Ok(is_dominated(p, k, &[], TOLERANCE)?.is_dominated())
}
