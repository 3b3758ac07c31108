//! Built-in discrete groups with their word-length functions.
//!
//! Three families are supported: free groups `F_k`, free abelian groups `Z^d`
//! and cyclic groups `Z/m`. Every element is stored in a unique normal form,
//! so structural equality of [`Element`] values is equality in the group.
//!
//! Lengths are word lengths for the standard symmetric generating set, whose
//! canonical order is `a < A < b < B < ...` (a generator precedes its
//! inverse). This order fixes the enumeration order of balls and therefore the
//! basis order of every compression matrix built on top of them.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Default upper bound on the number of elements a ball may enumerate.
pub const DEFAULT_BALL_CAP: usize = 200_000;

/// Largest supported free-group rank (one lowercase letter per generator).
pub const MAX_FREE_RANK: u32 = 26;

/// A built-in group. Fully determines multiplication, inversion, identity and
/// word length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", try_from = "GroupRepr")]
pub enum Group {
    Free { rank: u32 },
    FreeAbelian { rank: u32 },
    Cyclic { order: u64 },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum GroupRepr {
    Free { rank: u32 },
    FreeAbelian { rank: u32 },
    Cyclic { order: u64 },
}

impl TryFrom<GroupRepr> for Group {
    type Error = Error;

    fn try_from(repr: GroupRepr) -> Result<Self> {
        match repr {
            GroupRepr::Free { rank } => Group::free(rank),
            GroupRepr::FreeAbelian { rank } => Group::free_abelian(rank),
            GroupRepr::Cyclic { order } => Group::cyclic(order),
        }
    }
}

/// Letter of a free-group word. Code `2g` is generator `g`, `2g + 1` its
/// inverse, so the derived order is the canonical `a < A < b < B < ...`.
pub type Letter = u8;

#[inline]
fn invert_letter(l: Letter) -> Letter {
    l ^ 1
}

fn letter_char(l: Letter) -> char {
    let c = (b'a' + l / 2) as char;
    if l & 1 == 1 {
        c.to_ascii_uppercase()
    } else {
        c
    }
}

/// Normal form of a group element.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Element {
    /// Freely reduced word.
    Word(Vec<Letter>),
    /// Integer vector of a free abelian group.
    Vector(Vec<i64>),
    /// Residue in `[0, m)`.
    Residue(u64),
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Word(w) => {
                if w.is_empty() {
                    return f.write_str("1");
                }
                w.iter().try_for_each(|&l| write!(f, "{}", letter_char(l)))
            }
            Element::Vector(v) => {
                f.write_str("[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
            Element::Residue(r) => write!(f, "{r}"),
        }
    }
}

impl Group {
    pub fn free(rank: u32) -> Result<Self> {
        if rank == 0 || rank > MAX_FREE_RANK {
            return Err(Error::InvalidDescriptor(format!(
                "free group rank must be in 1..={MAX_FREE_RANK}, got {rank}"
            )));
        }
        Ok(Group::Free { rank })
    }

    pub fn free_abelian(rank: u32) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidDescriptor(
                "free abelian rank must be at least 1".into(),
            ));
        }
        Ok(Group::FreeAbelian { rank })
    }

    pub fn cyclic(order: u64) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidDescriptor(format!(
                "cyclic order must be at least 2, got {order}"
            )));
        }
        Ok(Group::Cyclic { order })
    }

    pub fn identity(&self) -> Element {
        match *self {
            Group::Free { .. } => Element::Word(Vec::new()),
            Group::FreeAbelian { rank } => Element::Vector(vec![0; rank as usize]),
            Group::Cyclic { .. } => Element::Residue(0),
        }
    }

    /// Checks that `x` is a well-formed normal form for this group.
    pub fn check(&self, x: &Element) -> Result<()> {
        let ok = match (*self, x) {
            (Group::Free { rank }, Element::Word(w)) => {
                w.iter().all(|&l| u32::from(l) < 2 * rank)
                    && w.windows(2).all(|p| p[1] != invert_letter(p[0]))
            }
            (Group::FreeAbelian { rank }, Element::Vector(v)) => v.len() == rank as usize,
            (Group::Cyclic { order }, Element::Residue(r)) => *r < order,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(self.mismatch(x))
        }
    }

    fn mismatch(&self, x: &Element) -> Error {
        Error::GroupMismatch {
            group: *self,
            element: x.to_string(),
        }
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.mul(x, y))
    }

    /// Product of two elements already known to belong to this group.
    pub(crate) fn mul(&self, x: &Element, y: &Element) -> Element {
        match (*self, x, y) {
            (Group::Free { .. }, Element::Word(a), Element::Word(b)) => {
                let mut out = Vec::with_capacity(a.len() + b.len());
                out.extend_from_slice(a);
                push_reduced(&mut out, b);
                Element::Word(out)
            }
            (Group::FreeAbelian { .. }, Element::Vector(a), Element::Vector(b)) => {
                Element::Vector(a.iter().zip(b).map(|(p, q)| p + q).collect())
            }
            (Group::Cyclic { order }, Element::Residue(a), Element::Residue(b)) => {
                Element::Residue(((*a as u128 + *b as u128) % order as u128) as u64)
            }
            _ => unreachable!("mul called on elements of {self}"),
        }
    }

    pub fn inverse(&self, x: &Element) -> Result<Element> {
        self.check(x)?;
        Ok(self.inv(x))
    }

    pub(crate) fn inv(&self, x: &Element) -> Element {
        match (*self, x) {
            (Group::Free { .. }, Element::Word(w)) => {
                Element::Word(w.iter().rev().map(|&l| invert_letter(l)).collect())
            }
            (Group::FreeAbelian { .. }, Element::Vector(v)) => {
                Element::Vector(v.iter().map(|c| -c).collect())
            }
            (Group::Cyclic { order }, Element::Residue(r)) => Element::Residue((order - r) % order),
            _ => unreachable!("inv called on element of {self}"),
        }
    }

    /// Word length with respect to the standard symmetric generating set.
    pub fn word_length(&self, x: &Element) -> Result<u64> {
        self.check(x)?;
        Ok(self.len_of(x))
    }

    pub(crate) fn len_of(&self, x: &Element) -> u64 {
        match (*self, x) {
            (_, Element::Word(w)) => w.len() as u64,
            (_, Element::Vector(v)) => v.iter().map(|c| c.unsigned_abs()).sum(),
            (Group::Cyclic { order }, Element::Residue(r)) => (*r).min(order - r),
            _ => unreachable!(),
        }
    }

    /// Symmetric generating set in canonical order.
    pub fn generators(&self) -> Vec<Element> {
        match *self {
            Group::Free { rank } => (0..2 * rank as u8).map(|l| Element::Word(vec![l])).collect(),
            Group::FreeAbelian { rank } => {
                let d = rank as usize;
                let mut gens = Vec::with_capacity(2 * d);
                for i in 0..d {
                    for sign in [1, -1] {
                        let mut v = vec![0; d];
                        v[i] = sign;
                        gens.push(Element::Vector(v));
                    }
                }
                gens
            }
            Group::Cyclic { order } => {
                let mut gens = vec![Element::Residue(1)];
                if order > 2 {
                    gens.push(Element::Residue(order - 1));
                }
                gens
            }
        }
    }

    /// Number of elements of length at most `n`, or `None` on `u128` overflow.
    pub fn ball_size(&self, n: u64) -> Option<u128> {
        match *self {
            Group::Free { rank } => {
                let k = rank as u128;
                if k == 1 {
                    return (n as u128).checked_mul(2)?.checked_add(1);
                }
                // 1 + 2k * ((2k-1)^n - 1) / (2k-2)
                let q = 2 * k - 1;
                let pow = q.checked_pow(u32::try_from(n).ok()?)?;
                (2 * k).checked_mul(pow - 1).map(|t| 1 + t / (q - 1))
            }
            Group::FreeAbelian { rank } => {
                // sum_i 2^i C(d, i) C(n, i)
                let d = rank as u128;
                let n = n as u128;
                let mut total: u128 = 0;
                let mut choose_d: u128 = 1;
                let mut choose_n: u128 = 1;
                let mut two_pow: u128 = 1;
                for i in 0..=d.min(n) {
                    if i > 0 {
                        choose_d = choose_d.checked_mul(d - i + 1)? / i;
                        choose_n = choose_n.checked_mul(n - i + 1)? / i;
                        two_pow = two_pow.checked_mul(2)?;
                    }
                    let term = two_pow.checked_mul(choose_d)?.checked_mul(choose_n)?;
                    total = total.checked_add(term)?;
                }
                Some(total)
            }
            Group::Cyclic { order } => {
                Some((order as u128).min((n as u128).saturating_mul(2).saturating_add(1)))
            }
        }
    }

    /// All elements of length at most `n`: by length, then by normal form.
    ///
    /// Fails if the ball would hold more than `cap` elements.
    pub fn ball(&self, n: u64, cap: usize) -> Result<Vec<Element>> {
        match self.ball_size(n) {
            Some(size) if size <= cap as u128 => {}
            size => {
                return Err(Error::BallCapExceeded {
                    radius: n,
                    size,
                    cap,
                })
            }
        }
        let gens = self.generators();
        let mut ball = vec![self.identity()];
        let mut seen: HashSet<Element> = ball.iter().cloned().collect();
        let mut sphere_start = 0;
        for _ in 0..n {
            let mut next: Vec<Element> = Vec::new();
            for x in &ball[sphere_start..] {
                for s in &gens {
                    let y = self.mul(x, s);
                    if !seen.contains(&y) {
                        seen.insert(y.clone());
                        next.push(y);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort_unstable();
            sphere_start = ball.len();
            ball.extend(next);
        }
        Ok(ball)
    }

    /// Parses a free-group word over `a, b, ...` (inverses uppercase),
    /// reducing it freely.
    pub fn parse_word(&self, text: &str) -> Result<Element> {
        let Group::Free { rank } = *self else {
            return Err(Error::InvalidElement(format!(
                "word {text:?} given for non-free group {self}"
            )));
        };
        let mut letters = Vec::with_capacity(text.len());
        for ch in text.chars() {
            let (g, inverse) = match ch {
                'a'..='z' => (ch as u8 - b'a', false),
                'A'..='Z' => (ch as u8 - b'A', true),
                _ => {
                    return Err(Error::InvalidElement(format!(
                        "unexpected character {ch:?} in word {text:?}"
                    )))
                }
            };
            if u32::from(g) >= rank {
                return Err(Error::InvalidElement(format!(
                    "generator {ch:?} out of range for {self}"
                )));
            }
            letters.push(2 * g + u8::from(inverse));
        }
        let mut reduced = Vec::with_capacity(letters.len());
        push_reduced(&mut reduced, &letters);
        Ok(Element::Word(reduced))
    }

    /// Decodes the text encoding of an element: a word string for free
    /// groups, an integer array for free abelian groups, an integer for
    /// cyclic groups. Inputs are normalized (words reduced, residues taken
    /// modulo the order).
    pub fn parse_element(&self, value: &Value) -> Result<Element> {
        match (*self, value) {
            (Group::Free { .. }, Value::String(s)) => self.parse_word(s),
            (Group::FreeAbelian { rank }, Value::Array(items)) => {
                if items.len() != rank as usize {
                    return Err(Error::InvalidElement(format!(
                        "expected {rank} coordinates, got {}",
                        items.len()
                    )));
                }
                items
                    .iter()
                    .map(|v| {
                        v.as_i64().ok_or_else(|| {
                            Error::InvalidElement(format!("non-integer coordinate {v}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(Element::Vector)
            }
            (Group::Cyclic { order }, Value::Number(n)) => {
                let r = n
                    .as_i64()
                    .ok_or_else(|| Error::InvalidElement(format!("non-integer residue {n}")))?;
                Ok(Element::Residue(r.rem_euclid(order as i64) as u64))
            }
            (Group::Cyclic { .. }, Value::String(s)) => {
                let v: Value = s
                    .trim()
                    .parse::<i64>()
                    .map(Value::from)
                    .map_err(|_| Error::InvalidElement(format!("bad residue {s:?}")))?;
                self.parse_element(&v)
            }
            _ => Err(Error::InvalidElement(format!(
                "{value} is not an element encoding for {self}"
            ))),
        }
    }

    /// Inverse of [`Group::parse_element`].
    pub fn element_json(&self, x: &Element) -> Value {
        match x {
            Element::Word(w) => Value::String(w.iter().map(|&l| letter_char(l)).collect()),
            Element::Vector(v) => Value::from(v.clone()),
            Element::Residue(r) => Value::from(*r),
        }
    }
}

/// Appends `letters` to an already reduced word, cancelling as it goes.
fn push_reduced(word: &mut Vec<Letter>, letters: &[Letter]) {
    for &l in letters {
        if word.last() == Some(&invert_letter(l)) {
            word.pop();
        } else {
            word.push(l);
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Free { rank } => write!(f, "free:{rank}"),
            Group::FreeAbelian { rank } => write!(f, "free-abelian:{rank}"),
            Group::Cyclic { order } => write!(f, "cyclic:{order}"),
        }
    }
}

impl FromStr for Group {
    type Err = Error;

    /// Accepts `free:2`, `free-abelian:3`, `cyclic:5` (also `free(2)` style)
    /// or the JSON descriptor.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        let bad = || Error::InvalidDescriptor(format!("cannot parse group {s:?}"));
        let (kind, arg) = s
            .split_once(':')
            .or_else(|| s.strip_suffix(')').and_then(|t| t.split_once('(')))
            .ok_or_else(bad)?;
        let arg: u64 = arg.trim().parse().map_err(|_| bad())?;
        let rank = || u32::try_from(arg).map_err(|_| bad());
        match kind.trim() {
            "free" => Group::free(rank()?),
            "free-abelian" | "free_abelian" | "z" => Group::free_abelian(rank()?),
            "cyclic" => Group::cyclic(arg),
            _ => Err(bad()),
        }
    }
}
