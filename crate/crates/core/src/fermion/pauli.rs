use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;

use crate::{Error, Result};

/// Coefficients below this magnitude are dropped after collection.
pub const PRUNE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

/// Power of `i` (0..4).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phase(pub u8);

impl Phase {
    pub fn to_complex(self) -> Complex64 {
        match self.0 & 3 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

/// A Pauli word on `n` qubits in symplectic form: qubit `k` carries
/// `X` if only bit `k` of `x` is set, `Z` if only bit `k` of `z`, `Y` if both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n: u8,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        assert!(n <= 64, "at most 64 qubits");
        Self { n: n as u8, x: 0, z: 0 }
    }

    pub fn from_masks(n: usize, x: u64, z: u64) -> Self {
        assert!(n <= 64, "at most 64 qubits");
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        assert!(x & !mask == 0 && z & !mask == 0, "mask exceeds register");
        Self { n: n as u8, x, z }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        Self::identity(n).with(qubit, p)
    }

    pub fn with(mut self, qubit: usize, p: Pauli) -> Self {
        assert!(qubit < self.n as usize);
        let b = 1u64 << qubit;
        self.x &= !b;
        self.z &= !b;
        match p {
            Pauli::I => {}
            Pauli::X => self.x |= b,
            Pauli::Z => self.z |= b,
            Pauli::Y => {
                self.x |= b;
                self.z |= b;
            }
        }
        self
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        let b = 1u64 << qubit;
        match (self.x & b != 0, self.z & b != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (false, true) => Pauli::Z,
            (true, true) => Pauli::Y,
        }
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        (self.x | self.z).count_ones() as usize
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    /// Same word with every `Z` letter replaced by `I`.
    pub fn without_z(&self) -> Self {
        Self { n: self.n, x: self.x, z: self.z & self.x }
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// `P|b> = phase * |b ^ x>`; returns the phase for basis index `b`.
    #[inline]
    pub fn phase_on(&self, b: u64) -> Complex64 {
        let k = self.y_count() + 2 * (self.z & b).count_ones();
        Phase((k & 3) as u8).to_complex()
    }
}

/// Letterwise product `a * b = phase * c`.
pub fn multiply(a: &PauliString, b: &PauliString) -> Result<(Phase, PauliString)> {
    if a.n != b.n {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(multiply_unchecked(a, b))
}

#[inline]
fn multiply_unchecked(a: &PauliString, b: &PauliString) -> (Phase, PauliString) {
    // P = i^{#Y} X^x Z^z, and Z^za X^xb = (-1)^{|za & xb|} X^xb Z^za
    let c = PauliString { n: a.n, x: a.x ^ b.x, z: a.z ^ b.z };
    let k = 4 + a.y_count() as i64 + b.y_count() as i64 - c.y_count() as i64
        + 2 * (a.z & b.x).count_ones() as i64;
    (Phase((k.rem_euclid(4)) as u8), c)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.len() {
            let c = match self.letter(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Character `k` of the word is qubit `k`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > 64 {
            return Err(Error::InvalidInput(format!("Pauli word longer than 64: {s}")));
        }
        let mut p = PauliString::identity(s.len());
        for (q, c) in s.chars().enumerate() {
            let letter = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => return Err(Error::InvalidInput(format!("bad Pauli letter '{c}' in {s}"))),
            };
            p = p.with(q, letter);
        }
        Ok(p)
    }
}

/// Weighted sum of Pauli strings on a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn identity(n: usize, c: f64) -> Self {
        let mut s = Self::zero(n);
        s.add_term(PauliString::identity(n), Complex64::new(c, 0.0));
        s.simplify();
        s
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (PauliString, Complex64)>) -> Self {
        let mut s = Self::zero(n);
        for (p, c) in terms {
            s.add_term(p, c);
        }
        s.simplify();
        s
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        assert_eq!(p.len(), self.n, "Pauli string length differs from register");
        *self.terms.entry(p).or_default() += c;
    }

    /// Drops coefficients below [`PRUNE_TOL`].
    pub fn simplify(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOL);
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self { n: self.n, terms: self.terms.iter().map(|(p, c)| (*p, c * s)).collect() };
        out.simplify();
        out
    }

    pub fn add(&self, other: &PauliSum) -> Self {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c);
        }
        out.simplify();
        out
    }

    pub fn mul(&self, other: &PauliSum) -> Self {
        assert_eq!(self.n, other.n);
        let mut acc: std::collections::HashMap<PauliString, Complex64> = Default::default();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (ph, p) = multiply_unchecked(a, b);
                *acc.entry(p).or_default() += ca * cb * ph.to_complex();
            }
        }
        let mut out = Self { n: self.n, terms: acc.into_iter().collect() };
        out.simplify();
        out
    }

    pub fn commutator(&self, other: &PauliSum) -> Self {
        self.mul(other).add(&other.mul(self).scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn adjoint(&self) -> Self {
        Self { n: self.n, terms: self.terms.iter().map(|(p, c)| (*p, c.conj())).collect() }
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// True when every coefficient is real to `tol` (Pauli words are hermitian).
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    /// Discards imaginary parts; callers check [`Self::max_imag`] first.
    pub fn real_part(&self) -> Self {
        let mut out = Self {
            n: self.n,
            terms: self.terms.iter().map(|(p, c)| (*p, Complex64::new(c.re, 0.0))).collect(),
        };
        out.simplify();
        out
    }

    pub fn terms_commute(&self) -> bool {
        let keys: Vec<&PauliString> = self.terms.keys().collect();
        keys.iter().enumerate().all(|(i, a)| keys[i + 1..].iter().all(|b| a.commutes_with(b)))
    }

    /// Dense `2^n x 2^n` matrix; basis index bit `k` is qubit `k`.
    pub fn to_dense(&self) -> Array2<Complex64> {
        let dim = 1usize << self.n;
        let mut m = Array2::zeros((dim, dim));
        for (p, c) in &self.terms {
            for b in 0..dim as u64 {
                let row = (b ^ p.x_mask()) as usize;
                m[[row, b as usize]] += c * p.phase_on(b);
            }
        }
        m
    }

    /// One `coeff * WORD` line per term.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut n = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (coeff, word) = line
                .split_once('*')
                .ok_or_else(|| Error::InvalidInput(format!("expected 'coeff * WORD', got '{line}'")))?;
            let p: PauliString = word.trim().parse()?;
            if *n.get_or_insert(p.len()) != p.len() {
                return Err(Error::LengthMismatch(n.unwrap(), p.len()));
            }
            terms.push((p, parse_coeff(coeff.trim())?));
        }
        Ok(Self::from_terms(n.unwrap_or(0), terms))
    }
}

fn parse_coeff(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidInput(format!("bad coefficient '{s}'"));
    if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(")")) {
        // "(re+imi)" / "(re-imi)"; search for the sign splitting the parts,
        // skipping exponent signs
        let body = inner.strip_suffix('i').ok_or_else(bad)?;
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
            .ok_or_else(bad)?;
        let re: f64 = body[..split].parse().map_err(|_| bad())?;
        let im: f64 = body[split..].parse().map_err(|_| bad())?;
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(s.parse().map_err(|_| bad())?, 0.0))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, c) in &self.terms {
            if c.im == 0.0 {
                writeln!(f, "{:?} * {p}", c.re)?;
            } else {
                writeln!(f, "({:?}{:+?}i) * {p}", c.re, c.im)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn x_times_y_is_i_z() {
        let (ph, c) = multiply(&p("X"), &p("Y")).unwrap();
        assert_eq!(ph, Phase(1));
        assert_eq!(c, p("Z"));
    }

    #[test]
    fn involution() {
        for w in ["XYZI", "YYYY", "IZXY", "IIII"] {
            let (ph, c) = multiply(&p(w), &p(w)).unwrap();
            assert_eq!(ph, Phase(0));
            assert!(c.is_identity());
        }
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(multiply(&p("XX"), &p("X")), Err(Error::LengthMismatch(2, 1))));
    }

    #[test]
    fn weight_and_letters() {
        let s = p("XIYZ");
        assert_eq!(s.weight(), 3);
        assert_eq!(s.letter(2), Pauli::Y);
        assert_eq!(s.without_z(), p("XIYI"));
        assert_eq!(s.to_string(), "XIYZ");
    }

    #[test]
    fn text_round_trip() {
        let s = PauliSum::from_terms(
            3,
            [
                (p("XYZ"), Complex64::new(0.5, 0.0)),
                (p("IIZ"), Complex64::new(-1.25e-3, 2.0e-7)),
                (p("III"), Complex64::new(0.0, -0.75)),
            ],
        );
        let back = PauliSum::from_text(&s.to_text()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn simplify_prunes_tiny() {
        let s = PauliSum::from_terms(1, [(p("X"), Complex64::new(1e-13, 0.0)), (p("Z"), Complex64::new(1.0, 0.0))]);
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn commutation_rule() {
        assert!(p("XX").commutes_with(&p("YY")));
        assert!(!p("XI").commutes_with(&p("ZI")));
        assert!(p("XZ").commutes_with(&p("ZX")));
    }
}
