//! Symbolic algebra of tensor-product operator strings.
//!
//! An [`OperatorString`] is `coeff · a ⊗ m₁ ⊗ … ⊗ m_T ⊗ b` where the
//! mediator factors are Pauli labels and the probe factors are words of
//! named operator keys. Pauli phases are tracked exactly as powers of `i`;
//! probe words are never simplified, a product of two probe operators is
//! the concatenated word and is only resolved to a matrix by
//! [`crate::dense::to_dense`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::layout::{SystemLayout, C64};

/// Coefficients below this magnitude are dropped by [`OperatorSum::canonicalize`].
pub const PRUNE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PauliLabel {
    I,
    X,
    Y,
    Z,
}

impl PauliLabel {
    pub const ALL: [PauliLabel; 4] = [PauliLabel::I, PauliLabel::X, PauliLabel::Y, PauliLabel::Z];

    pub fn from_char(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(PauliLabel::I),
            'X' => Some(PauliLabel::X),
            'Y' => Some(PauliLabel::Y),
            'Z' => Some(PauliLabel::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliLabel::I => 'I',
            PauliLabel::X => 'X',
            PauliLabel::Y => 'Y',
            PauliLabel::Z => 'Z',
        }
    }

    /// Parses a mediator label string such as `"XIZ"`.
    pub fn parse_string(s: &str) -> Result<Vec<PauliLabel>> {
        s.chars()
            .map(|c| {
                PauliLabel::from_char(c).ok_or_else(|| {
                    Error::InvalidArgument(format!("`{c}` is not a Pauli label in `{s}`"))
                })
            })
            .collect()
    }

    /// X and Y pick up the (2p-1) factor under phase-flip noise.
    pub fn is_off_diagonal(self) -> bool {
        matches!(self, PauliLabel::X | PauliLabel::Y)
    }

    pub fn commutes_with(self, other: PauliLabel) -> bool {
        self == PauliLabel::I || other == PauliLabel::I || self == other
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A power of `i`: one of +1, +i, -1, -i.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn to_complex(self) -> C64 {
        match self.0 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    pub fn neg(self) -> Phase {
        Phase((self.0 + 2) % 4)
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Exact single-qubit product `a · b = phase · c`.
pub fn mul_pauli(a: PauliLabel, b: PauliLabel) -> (Phase, PauliLabel) {
    use PauliLabel::*;
    match (a, b) {
        (I, p) | (p, I) => (Phase::ONE, p),
        (p, q) if p == q => (Phase::ONE, I),
        (X, Y) => (Phase::I, Z),
        (Y, Z) => (Phase::I, X),
        (Z, X) => (Phase::I, Y),
        (Y, X) => (Phase::MINUS_I, Z),
        (Z, Y) => (Phase::MINUS_I, X),
        (X, Z) => (Phase::MINUS_I, Y),
        _ => unreachable!(),
    }
}

/// Ordered product of named probe operators; the empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbeWord(Vec<String>);

impl ProbeWord {
    pub fn identity() -> Self {
        ProbeWord(Vec::new())
    }

    /// A single key; `"I"` (or an empty string) yields the identity.
    pub fn key(key: &str) -> Self {
        if key.is_empty() || key == "I" {
            Self::identity()
        } else {
            ProbeWord(vec![key.to_string()])
        }
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    pub fn keys(&self) -> &[String] {
        &self.0
    }

    pub fn then(&self, rhs: &ProbeWord) -> ProbeWord {
        let mut w = self.0.clone();
        w.extend(rhs.0.iter().cloned());
        ProbeWord(w)
    }

    /// Adjoint of a product of Hermitian keys: the reversed word.
    pub fn reversed(&self) -> ProbeWord {
        ProbeWord(self.0.iter().rev().cloned().collect())
    }
}

impl fmt::Display for ProbeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "I")
        } else {
            write!(f, "{}", self.0.join("*"))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorString {
    pub coeff: C64,
    pub a: ProbeWord,
    pub mediator: Vec<PauliLabel>,
    pub b: ProbeWord,
}

type TermKey = (ProbeWord, Vec<PauliLabel>, ProbeWord);

impl OperatorString {
    pub fn new(coeff: C64, a: ProbeWord, mediator: Vec<PauliLabel>, b: ProbeWord) -> Self {
        Self { coeff, a, mediator, b }
    }

    /// Convenience constructor from keys and a label string like `"XZ"`.
    pub fn parse(coeff: f64, a: &str, mediator: &str, b: &str) -> Result<Self> {
        Ok(Self::new(
            C64::new(coeff, 0.0),
            ProbeWord::key(a),
            PauliLabel::parse_string(mediator)?,
            ProbeWord::key(b),
        ))
    }

    pub fn identity(mediator_qubits: usize) -> Self {
        Self::new(
            C64::new(1.0, 0.0),
            ProbeWord::identity(),
            vec![PauliLabel::I; mediator_qubits],
            ProbeWord::identity(),
        )
    }

    fn key(&self) -> TermKey {
        (self.a.clone(), self.mediator.clone(), self.b.clone())
    }

    pub fn adjoint(&self) -> Self {
        Self::new(
            self.coeff.conj(),
            self.a.reversed(),
            self.mediator.clone(),
            self.b.reversed(),
        )
    }
}

impl fmt::Display for OperatorString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: String = self.mediator.iter().map(|l| l.as_char()).collect();
        write!(f, "({}) {}_A {}_M {}_B", self.coeff, self.a, m, self.b)
    }
}

/// Sitewise product of two strings.
pub fn string_mul(s1: &OperatorString, s2: &OperatorString) -> Result<OperatorString> {
    if s1.mediator.len() != s2.mediator.len() {
        return Err(Error::LayoutMismatch(format!(
            "strings over {} and {} mediator qubits",
            s1.mediator.len(),
            s2.mediator.len()
        )));
    }
    let mut phase = Phase::ONE;
    let mediator = s1
        .mediator
        .iter()
        .zip(&s2.mediator)
        .map(|(&x, &y)| {
            let (ph, l) = mul_pauli(x, y);
            phase = phase * ph;
            l
        })
        .collect();
    Ok(OperatorString::new(
        s1.coeff * s2.coeff * phase.to_complex(),
        s1.a.then(&s2.a),
        mediator,
        s1.b.then(&s2.b),
    ))
}

/// Canonical weighted sum of operator strings over one layout.
#[derive(Clone, Debug)]
pub struct OperatorSum {
    layout: Arc<SystemLayout>,
    terms: Vec<OperatorString>,
    hermitian: bool,
}

impl OperatorSum {
    pub fn zero(layout: Arc<SystemLayout>) -> Self {
        Self { layout, terms: Vec::new(), hermitian: true }
    }

    /// Builds a canonical sum. The Hermitian flag is not set; see
    /// [`OperatorSum::into_hermitian`].
    pub fn from_terms(
        layout: Arc<SystemLayout>,
        terms: impl IntoIterator<Item = OperatorString>,
    ) -> Result<Self> {
        let t = layout.mediator_qubits();
        let terms: Vec<_> = terms.into_iter().collect();
        if let Some(bad) = terms.iter().find(|s| s.mediator.len() != t) {
            return Err(Error::LayoutMismatch(format!(
                "term {bad} has {} mediator factors, layout has {t}",
                bad.mediator.len()
            )));
        }
        Ok(Self { layout, terms, hermitian: false }.canonicalize())
    }

    /// Verifies symbolically that the sum equals its adjoint and sets the flag.
    pub fn into_hermitian(mut self) -> Result<Self> {
        if !self.adjoint().approx_eq(&self, PRUNE_TOL) {
            return Err(Error::NotHermitian(format!("operator sum with {} terms", self.len())));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn layout(&self) -> &Arc<SystemLayout> {
        &self.layout
    }

    pub fn terms(&self) -> &[OperatorString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.iter().map(|s| s.coeff.norm()).fold(0.0, f64::max)
    }

    /// Merges like terms, prunes |coeff| < [`PRUNE_TOL`] and sorts by
    /// (A word, mediator labels read as a base-4 number with qubit 1 most
    /// significant, B word).
    pub fn canonicalize(self) -> Self {
        let mut merged: BTreeMap<TermKey, C64> = BTreeMap::new();
        for s in self.terms {
            *merged.entry(s.key()).or_insert(C64::new(0.0, 0.0)) += s.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() >= PRUNE_TOL)
            .map(|((a, m, b), c)| OperatorString::new(c, a, m, b))
            .collect();
        Self { layout: self.layout, terms, hermitian: self.hermitian }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            layout: self.layout.clone(),
            terms: self.terms.iter().map(OperatorString::adjoint).collect(),
            hermitian: self.hermitian,
        }
        .canonicalize()
    }

    pub fn scale(&self, factor: C64) -> Self {
        let hermitian = self.hermitian && factor.im == 0.0;
        Self {
            layout: self.layout.clone(),
            terms: self
                .terms
                .iter()
                .map(|s| OperatorString { coeff: s.coeff * factor, ..s.clone() })
                .collect(),
            hermitian,
        }
        .canonicalize()
    }

    pub fn add(&self, other: &OperatorSum) -> Result<Self> {
        self.check_layout(other)?;
        Ok(Self {
            layout: self.layout.clone(),
            terms: self.terms.iter().chain(&other.terms).cloned().collect(),
            hermitian: self.hermitian && other.hermitian,
        }
        .canonicalize())
    }

    /// Structural equality: identical keys, coefficients within `tol`.
    pub fn approx_eq(&self, other: &OperatorSum, tol: f64) -> bool {
        self.layout.same_shape(&other.layout)
            && self.terms.len() == other.terms.len()
            && self.terms.iter().zip(&other.terms).all(|(x, y)| {
                x.a == y.a && x.mediator == y.mediator && x.b == y.b && (x.coeff - y.coeff).norm() <= tol
            })
    }

    /// Largest coefficient deviation, treating missing terms as zero.
    pub fn max_deviation(&self, other: &OperatorSum) -> f64 {
        let mut diff: BTreeMap<TermKey, C64> = BTreeMap::new();
        for s in &self.terms {
            *diff.entry(s.key()).or_default() += s.coeff;
        }
        for s in &other.terms {
            *diff.entry(s.key()).or_default() -= s.coeff;
        }
        diff.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn check_layout(&self, other: &OperatorSum) -> Result<()> {
        if Arc::ptr_eq(&self.layout, &other.layout) || *self.layout == *other.layout {
            Ok(())
        } else {
            Err(Error::LayoutMismatch(format!(
                "{} vs {}",
                self.layout.summary(),
                other.layout.summary()
            )))
        }
    }

    fn check_commutator_inputs(&self, other: &OperatorSum) -> Result<()> {
        self.check_layout(other)?;
        for (name, h) in [("left", self), ("right", other)] {
            if !h.hermitian {
                return Err(Error::NotHermitian(format!("{name} commutator argument")));
            }
        }
        Ok(())
    }

    fn with_terms(&self, terms: Vec<OperatorString>) -> Self {
        Self { layout: self.layout.clone(), terms, hermitian: false }.canonicalize()
    }
}

impl fmt::Display for OperatorSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, s) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// `[h1, h2] = h1·h2 − h2·h1` by direct string products.
pub fn commutator(h1: &OperatorSum, h2: &OperatorSum) -> Result<OperatorSum> {
    h1.check_commutator_inputs(h2)?;
    let mut terms = Vec::with_capacity(2 * h1.len() * h2.len());
    for s1 in &h1.terms {
        for s2 in &h2.terms {
            terms.push(string_mul(s1, s2)?);
            let mut back = string_mul(s2, s1)?;
            back.coeff = -back.coeff;
            terms.push(back);
        }
    }
    Ok(h1.with_terms(terms))
}

/// `[h1, h2]` via the sitewise expansion
/// `[A⊗B, C⊗D] = CA⊗[B,D] + [A,C]⊗BD`, applied recursively over the
/// sites A, M₁ … M_T, B. Unrolled, site `k` contributes
/// `(reversed products on sites < k) ⊗ [x_k, y_k] ⊗ (products on sites > k)`.
pub fn structural_commutator(h1: &OperatorSum, h2: &OperatorSum) -> Result<OperatorSum> {
    h1.check_commutator_inputs(h2)?;
    let mut terms = Vec::new();
    for s1 in &h1.terms {
        for s2 in &h2.terms {
            structural_pair(s1, s2, &mut terms);
        }
    }
    Ok(h1.with_terms(terms))
}

fn structural_pair(x: &OperatorString, y: &OperatorString, out: &mut Vec<OperatorString>) {
    let t = x.mediator.len();
    let base = x.coeff * y.coeff;

    // Site A commutator; every later site takes the forward product.
    let forward_mediator = |phase: &mut Phase| -> Vec<PauliLabel> {
        x.mediator
            .iter()
            .zip(&y.mediator)
            .map(|(&p, &q)| {
                let (ph, l) = mul_pauli(p, q);
                *phase = *phase * ph;
                l
            })
            .collect()
    };
    for (sign, a) in probe_commutator(&x.a, &y.a) {
        let mut phase = Phase::ONE;
        let mediator = forward_mediator(&mut phase);
        out.push(OperatorString::new(
            base * sign * phase.to_complex(),
            a,
            mediator,
            x.b.then(&y.b),
        ));
    }

    // Mediator site k.
    for k in 0..t {
        let (p, q) = (x.mediator[k], y.mediator[k]);
        if p.commutes_with(q) {
            continue;
        }
        // [p, q] = 2·pq for anticommuting Paulis.
        let (mut phase, label_k) = mul_pauli(p, q);
        let mut mediator = Vec::with_capacity(t);
        for j in 0..t {
            let (ph, l) = if j < k {
                mul_pauli(y.mediator[j], x.mediator[j])
            } else if j == k {
                (Phase::ONE, label_k)
            } else {
                mul_pauli(x.mediator[j], y.mediator[j])
            };
            phase = phase * ph;
            mediator.push(l);
        }
        out.push(OperatorString::new(
            base * 2.0 * phase.to_complex(),
            y.a.then(&x.a),
            mediator,
            x.b.then(&y.b),
        ));
    }

    // Site B; every earlier site takes the reversed product.
    for (sign, b) in probe_commutator(&x.b, &y.b) {
        let mut phase = Phase::ONE;
        let mediator = y
            .mediator
            .iter()
            .zip(&x.mediator)
            .map(|(&q, &p)| {
                let (ph, l) = mul_pauli(q, p);
                phase = phase * ph;
                l
            })
            .collect();
        out.push(OperatorString::new(
            base * sign * phase.to_complex(),
            y.a.then(&x.a),
            mediator,
            b,
        ));
    }
}

/// `[a, c] = ac − ca` on a probe site, as signed words. Empty when the
/// words trivially commute.
fn probe_commutator(a: &ProbeWord, c: &ProbeWord) -> Vec<(f64, ProbeWord)> {
    if a.is_identity() || c.is_identity() || a == c {
        return Vec::new();
    }
    let ac = a.then(c);
    let ca = c.then(a);
    if ac == ca {
        return Vec::new();
    }
    vec![(1.0, ac), (-1.0, ca)]
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::ProbabilityOutOfRange(p))
    }
}

/// Heisenberg-picture phase flip on one mediator qubit: X and Y factors
/// are scaled by (2p − 1), I and Z are untouched.
pub fn dephase_string(s: &OperatorString, qubit: usize, p: f64) -> Result<OperatorString> {
    check_probability(p)?;
    let label = *s
        .mediator
        .get(qubit)
        .ok_or(Error::QubitOutOfRange { index: qubit, len: s.mediator.len() })?;
    let mut out = s.clone();
    if label.is_off_diagonal() {
        out.coeff *= 2.0 * p - 1.0;
    }
    Ok(out)
}

/// Applies [`dephase_string`] for every mediator qubit, one probability each.
pub fn dephase_sum(h: &OperatorSum, p_per_qubit: &[f64]) -> Result<OperatorSum> {
    let t = h.layout.mediator_qubits();
    if p_per_qubit.len() != t {
        return Err(Error::LayoutMismatch(format!(
            "{} dephasing probabilities for {t} mediator qubits",
            p_per_qubit.len()
        )));
    }
    let mut terms = Vec::with_capacity(h.len());
    for s in &h.terms {
        let mut d = s.clone();
        for (k, &p) in p_per_qubit.iter().enumerate() {
            d = dephase_string(&d, k, p)?;
        }
        terms.push(d);
    }
    // Real rescaling keeps Hermiticity.
    Ok(OperatorSum { layout: h.layout.clone(), terms, hermitian: h.hermitian }.canonicalize())
}
