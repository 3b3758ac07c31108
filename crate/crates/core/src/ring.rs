//! Finitely supported functions on a group: the group ring `C[G]`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{Element, Group};

/// A finitely supported complex function on a built-in group.
///
/// Terms are kept in normal-form order and exact zero coefficients are never
/// stored.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRingElement {
    group: Group,
    terms: BTreeMap<Element, Complex64>,
}

impl GroupRingElement {
    pub fn zero(group: Group) -> Self {
        GroupRingElement {
            group,
            terms: BTreeMap::new(),
        }
    }

    /// The point mass at `x`.
    pub fn delta(group: Group, x: Element) -> Result<Self> {
        Self::from_terms(group, [(x, Complex64::new(1.0, 0.0))])
    }

    /// Sums the given terms; repeated elements accumulate.
    pub fn from_terms(
        group: Group,
        terms: impl IntoIterator<Item = (Element, Complex64)>,
    ) -> Result<Self> {
        let mut out = Self::zero(group);
        for (x, c) in terms {
            group.check(&x)?;
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::param(format!("non-finite coefficient at {x}")));
            }
            out.accumulate(x, c);
        }
        Ok(out)
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(group: Group, terms: impl IntoIterator<Item = (Element, f64)>) -> Result<Self> {
        Self::from_terms(
            group,
            terms.into_iter().map(|(x, c)| (x, Complex64::new(c, 0.0))),
        )
    }

    /// Sum of the symmetric generators, `a + A + b + B + ...`.
    pub fn generator_sum(group: Group) -> Self {
        Self::from_real(group, group.generators().into_iter().map(|x| (x, 1.0)))
            .expect("generators belong to their group")
    }

    pub(crate) fn accumulate(&mut self, x: Element, c: Complex64) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(x) {
            Entry::Occupied(mut e) => {
                let v = *e.get() + c;
                if v == Complex64::new(0.0, 0.0) {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
            Entry::Vacant(e) => {
                if c != Complex64::new(0.0, 0.0) {
                    e.insert(c);
                }
            }
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Element, &Complex64)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &Element> {
        self.terms.keys()
    }

    pub fn coeff(&self, x: &Element) -> Complex64 {
        self.terms.get(x).copied().unwrap_or_default()
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest word length in the support (0 for the zero element).
    pub fn max_length(&self) -> u64 {
        self.support().map(|x| self.group.len_of(x)).max().unwrap_or(0)
    }

    fn same_group(&self, other: &Self) -> Result<()> {
        if self.group != other.group {
            return Err(Error::param(format!(
                "group mismatch: {} vs {}",
                self.group, other.group
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        let mut out = self.clone();
        for (x, c) in other.terms() {
            out.accumulate(x.clone(), *c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, t: Complex64) -> Self {
        self.map_terms(|_, c| c * t)
    }

    /// Applies `f` coefficientwise, dropping terms that become exactly zero.
    pub fn map_terms(&self, mut f: impl FnMut(&Element, Complex64) -> Complex64) -> Self {
        let mut out = Self::zero(self.group);
        for (x, c) in self.terms() {
            out.accumulate(x.clone(), f(x, *c));
        }
        out
    }

    /// `(f * h)(x) = sum_y f(y) h(y^{-1} x)`.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        self.same_group(other)?;
        let mut out = Self::zero(self.group);
        for (x, a) in self.terms() {
            for (y, b) in other.terms() {
                out.accumulate(self.group.mul(x, y), a * b);
            }
        }
        Ok(out)
    }

    pub fn l1_norm(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc + c.norm())
    }

    pub fn l2_norm(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc + c.norm_sqr()).sqrt()
    }

    /// `sqrt(sum |f(x)|^2 (1 + l(x))^{2s})`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .fold(0.0, |acc, (x, c)| {
                acc + c.norm_sqr() * (1.0 + self.group.len_of(x) as f64).powf(2.0 * s)
            })
            .sqrt()
    }

    /// Coefficientwise comparison with absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.group == other.group
            && self
                .support()
                .chain(other.support())
                .all(|x| (self.coeff(x) - other.coeff(x)).norm() <= tol)
    }

    /// `{"group": {...}, "terms": [{"elem": ..., "re": x, "im": y}, ...]}`.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms()
            .map(|(x, c)| json!({"elem": self.group.element_json(x), "re": c.re, "im": c.im}))
            .collect();
        json!({"group": self.group, "terms": terms})
    }

    /// Decodes [`GroupRingElement::to_json`]. The `group` key may be omitted
    /// when `fallback` is given; when both are present they must agree. The
    /// group may also be a descriptor string such as `"free:2"`.
    /// A missing `im` defaults to zero.
    pub fn from_json(value: &Value, fallback: Option<Group>) -> Result<Self> {
        let group = match (value.get("group"), fallback) {
            (Some(v), fb) => {
                let g: Group = match v.as_str() {
                    Some(text) => text.parse()?,
                    None => serde_json::from_value(v.clone())?,
                };
                if let Some(fb) = fb {
                    if fb != g {
                        return Err(Error::param(format!(
                            "element is over {g} but {fb} was requested"
                        )));
                    }
                }
                g
            }
            (None, Some(g)) => g,
            (None, None) => return Err(Error::InvalidElement("missing \"group\"".into())),
        };
        let terms = value
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::InvalidElement("missing \"terms\" array".into()))?;
        let mut parsed = Vec::with_capacity(terms.len());
        for t in terms {
            let elem = t
                .get("elem")
                .ok_or_else(|| Error::InvalidElement(format!("term without \"elem\": {t}")))?;
            let part = |key: &str| -> Result<f64> {
                match t.get(key) {
                    None => Ok(0.0),
                    Some(v) => v
                        .as_f64()
                        .ok_or_else(|| Error::InvalidElement(format!("bad {key:?} in {t}"))),
                }
            };
            parsed.push((group.parse_element(elem)?, Complex64::new(part("re")?, part("im")?)));
        }
        Self::from_terms(group, parsed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Group {
        Group::free(2).unwrap()
    }

    fn d(s: &str) -> GroupRingElement {
        GroupRingElement::delta(f2(), f2().parse_word(s).unwrap()).unwrap()
    }

    #[test]
    fn convolution_examples() {
        assert_eq!(d("a").convolve(&d("A")).unwrap(), d(""));
        let f = d("ab").add(&d("B").scale(Complex64::new(0.0, 2.0))).unwrap();
        assert_eq!(d("").convolve(&f).unwrap(), f);
        let lhs = d("a").add(&d("b")).unwrap();
        let rhs = d("A").add(&d("B")).unwrap();
        let expected = d("")
            .scale(Complex64::new(2.0, 0.0))
            .add(&d("aB"))
            .unwrap()
            .add(&d("bA"))
            .unwrap();
        assert_eq!(lhs.convolve(&rhs).unwrap(), expected);
    }

    #[test]
    fn norms() {
        let e = d("");
        assert_eq!((e.l2_norm(), e.l1_norm()), (1.0, 1.0));
        assert_eq!(e.sobolev_norm(3.7), 1.0);
        let three_a = d("a").scale(Complex64::new(3.0, 0.0));
        assert_eq!((three_a.l2_norm(), three_a.l1_norm()), (3.0, 3.0));
        let k = GroupRingElement::generator_sum(f2());
        assert_eq!((k.l2_norm(), k.l1_norm()), (2.0, 4.0));
        assert_eq!(d("a").sobolev_norm(2.0), 4.0);
        let ab = d("a").add(&d("b")).unwrap();
        assert!((ab.sobolev_norm(1.0) - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zeros_are_not_stored() {
        let z = d("a").sub(&d("a")).unwrap();
        assert!(z.is_zero());
        let f = GroupRingElement::from_real(f2(), [(f2().identity(), 0.0)]).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn mismatched_groups() {
        let c = GroupRingElement::delta(Group::cyclic(3).unwrap(), Element::Residue(1)).unwrap();
        assert!(c.convolve(&d("a")).is_err());
        assert!(c.add(&d("a")).is_err());
    }

    #[test]
    fn json_round_trip() {
        let f = d("aB").scale(Complex64::new(0.5, -1.5)).add(&d("")).unwrap();
        let v = f.to_json();
        assert_eq!(GroupRingElement::from_json(&v, None).unwrap(), f);
        let bare = json!({"terms": [{"elem": "a", "re": 1.0}]});
        assert_eq!(GroupRingElement::from_json(&bare, Some(f2())).unwrap(), d("a"));
        assert!(GroupRingElement::from_json(&bare, None).is_err());
        assert!(GroupRingElement::from_json(&v, Some(Group::free(3).unwrap())).is_err());
    }
}
