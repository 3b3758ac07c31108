//! Pointwise multipliers `M_phi lambda(f) = lambda(phi . f)`.
//!
//! The heat family `phi_r = e^{-r l}` gives completely positive maps of norm
//! `phi_r(e) = 1` whenever `l` is conditionally negative (all built-in word
//! lengths are). Truncating to `l <= n` makes the support finite and hence the
//! map finite rank, at the price of a norm excess bounded by the tail
//! `C K_n`. Dividing by `U = 1 + C K_n` turns the truncation back into a
//! contraction, and `U -> 1` as `n -> infinity`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{Element, Group};
use crate::kernel::DecayCertificate;
use crate::operators::{opnorm_bracket, NormBracket, PowerOptions, RdParams};
use crate::ring::GroupRingElement;

/// A function on the group acting as a multiplier.
#[derive(Clone, Debug, PartialEq)]
pub enum Multiplier {
    /// Finitely supported, given by its values.
    Table(BTreeMap<Element, Complex64>),
    /// `e^{-r l(x)}`.
    Heat { r: f64 },
    /// `e^{-r l(x)}` where `l(x) <= n`, zero elsewhere.
    TruncatedHeat { r: f64, n: u64 },
    /// `inner / scale` with `scale >= 1`.
    Scaled { inner: Box<Multiplier>, scale: f64 },
}

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("r must be positive, got {r}")))
    }
}

impl Multiplier {
    pub fn heat(r: f64) -> Result<Self> {
        check_r(r)?;
        Ok(Multiplier::Heat { r })
    }

    pub fn truncated_heat(r: f64, n: u64) -> Result<Self> {
        check_r(r)?;
        Ok(Multiplier::TruncatedHeat { r, n })
    }

    pub fn scaled(inner: Multiplier, scale: f64) -> Result<Self> {
        if !(scale >= 1.0 && scale.is_finite()) {
            return Err(Error::param(format!("scale must be at least 1, got {scale}")));
        }
        Ok(Multiplier::Scaled {
            inner: Box::new(inner),
            scale,
        })
    }

    pub fn table(g: &Group, values: impl IntoIterator<Item = (Element, Complex64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (x, c) in values {
            g.check(&x)?;
            if c != Complex64::default() {
                map.insert(x, c);
            }
        }
        Ok(Multiplier::Table(map))
    }

    /// `phi(x)`.
    pub fn eval(&self, g: &Group, x: &Element) -> Result<Complex64> {
        g.check(x)?;
        if let Multiplier::Table(map) = self {
            if let Some(y) = map.keys().next() {
                g.check(y)?;
            }
        }
        Ok(self.value(g, x))
    }

    pub(crate) fn value(&self, g: &Group, x: &Element) -> Complex64 {
        match self {
            Multiplier::Table(map) => map.get(x).copied().unwrap_or_default(),
            Multiplier::Heat { r } => Complex64::new((-r * g.len_of(x) as f64).exp(), 0.0),
            Multiplier::TruncatedHeat { r, n } => {
                let l = g.len_of(x);
                if l <= *n {
                    Complex64::new((-r * l as f64).exp(), 0.0)
                } else {
                    Complex64::default()
                }
            }
            Multiplier::Scaled { inner, scale } => inner.value(g, x) / scale,
        }
    }

    /// The pointwise product `phi . f`.
    pub fn apply(&self, f: &GroupRingElement) -> Result<GroupRingElement> {
        let g = f.group();
        if let Multiplier::Table(map) = self {
            for x in map.keys() {
                g.check(x)?;
            }
        }
        Ok(f.map_terms(|x, c| c * self.value(&g, x)))
    }

    /// Size of the support, which bounds the rank of `M_phi`; `None` when the
    /// support is infinite.
    pub fn rank_bound(&self, g: &Group) -> Option<RankBound> {
        match self {
            Multiplier::Table(map) => Some(RankBound::Exact(map.len() as u128)),
            Multiplier::Heat { .. } => None,
            Multiplier::TruncatedHeat { n, .. } => Some(
                g.ball_size(*n)
                    .map_or(RankBound::ExceedsU128, RankBound::Exact),
            ),
            Multiplier::Scaled { inner, .. } => inner.rank_bound(g),
        }
    }

    /// `K = sup_x |phi(x)| (1 + l(x))^s`, using the real-variable supremum
    /// for the heat kinds.
    pub fn decay_sup(&self, g: &Group, s: f64) -> Result<f64> {
        let k = match self {
            Multiplier::Table(map) => map
                .iter()
                .map(|(x, c)| c.norm() * (1.0 + g.len_of(x) as f64).powf(s))
                .fold(0.0, f64::max),
            Multiplier::Heat { r } => DecayCertificate::new(*r, s, true)?.k,
            Multiplier::TruncatedHeat { r, n } => DecayCertificate::new(*r, s, true)?.head(*n),
            Multiplier::Scaled { inner, scale } => inner.decay_sup(g, s)? / scale,
        };
        if !k.is_finite() {
            return Err(Error::MissingCertificate(format!("sup is {k}")));
        }
        Ok(k)
    }

    /// Best available certified bound for `||M_phi||`.
    ///
    /// Heat multipliers have norm 1. A truncation differs from its heat
    /// multiplier by the tail, whose norm is at most `C K_n`, so its norm is at
    /// most `min(C K, 1 + C K_n)`. Tables only have the `C K` bound.
    pub fn norm_bound(&self, g: &Group, rd: &RdParams) -> Result<f64> {
        Ok(match self {
            Multiplier::Heat { .. } => 1.0,
            Multiplier::TruncatedHeat { r, n } => {
                let decay = rd.c * self.decay_sup(g, rd.s)?;
                decay.min(certified_scale(*r, rd.s, *n, rd.c)?)
            }
            Multiplier::Scaled { inner, scale } => inner.norm_bound(g, rd)? / scale,
            Multiplier::Table(_) => rd.c * self.decay_sup(g, rd.s)?,
        })
    }

    /// `{"kind": "heat"|"truncated"|"scaled"|"table", "r", "n", "U", "terms"}`.
    pub fn to_json(&self, g: &Group) -> Value {
        match self {
            Multiplier::Table(map) => json!({
                "kind": "table",
                "terms": map
                    .iter()
                    .map(|(x, c)| json!({"elem": g.element_json(x), "re": c.re, "im": c.im}))
                    .collect::<Vec<_>>(),
            }),
            Multiplier::Heat { r } => json!({"kind": "heat", "r": r}),
            Multiplier::TruncatedHeat { r, n } => json!({"kind": "truncated", "r": r, "n": n}),
            Multiplier::Scaled { inner, scale } => {
                let mut out = match inner.as_ref() {
                    Multiplier::Scaled { .. } => json!({"inner": inner.to_json(g)}),
                    other => other.to_json(g),
                };
                out["kind"] = json!("scaled");
                out["U"] = json!(scale);
                out
            }
        }
    }

    pub fn from_json(g: &Group, value: &Value) -> Result<Self> {
        let bad = |msg: String| Error::InvalidParameter(format!("multiplier JSON: {msg}"));
        let field = |key: &str| {
            value
                .get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| bad(format!("missing numeric {key:?}")))
        };
        let n = || {
            value
                .get("n")
                .and_then(Value::as_u64)
                .ok_or_else(|| bad("missing integer \"n\"".into()))
        };
        let kind = value
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing \"kind\"".into()))?;
        match kind {
            "heat" => Multiplier::heat(field("r")?),
            "truncated" => Multiplier::truncated_heat(field("r")?, n()?),
            "table" => {
                let terms = value
                    .get("terms")
                    .and_then(Value::as_array)
                    .ok_or_else(|| bad("missing \"terms\"".into()))?;
                let mut values = Vec::with_capacity(terms.len());
                for t in terms {
                    let x = g.parse_element(t.get("elem").unwrap_or(&Value::Null))?;
                    let part = |k: &str| t.get(k).and_then(Value::as_f64).unwrap_or(0.0);
                    values.push((x, Complex64::new(part("re"), part("im"))));
                }
                Multiplier::table(g, values)
            }
            "scaled" => {
                let inner = if let Some(inner) = value.get("inner") {
                    Multiplier::from_json(g, inner)?
                } else if value.get("terms").is_some() {
                    let mut v = value.clone();
                    v["kind"] = json!("table");
                    Multiplier::from_json(g, &v)?
                } else if value.get("n").is_some() {
                    Multiplier::truncated_heat(field("r")?, n()?)?
                } else {
                    Multiplier::heat(field("r")?)?
                };
                Multiplier::scaled(inner, field("U")?)
            }
            other => Err(bad(format!("unknown kind {other:?}"))),
        }
    }
}

/// Rank bound of a finitely supported multiplier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankBound {
    Exact(u128),
    /// Finite, but larger than `u128::MAX`.
    ExceedsU128,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MultiplierNormBound {
    /// `C K`.
    pub upper: f64,
    /// The decay supremum `K`.
    pub k: f64,
    /// Present exactly when the support is finite.
    pub rank_bound: Option<RankBound>,
}

/// `||M_phi|| <= C sup_x |phi(x)| (1 + l(x))^s`.
pub fn lemma_norm_bound(phi: &Multiplier, g: &Group, rd: &RdParams) -> Result<MultiplierNormBound> {
    let k = phi.decay_sup(g, rd.s)?;
    Ok(MultiplierNormBound {
        upper: rd.c * k,
        k,
        rank_bound: phi.rank_bound(g),
    })
}

/// `C K_n`, bounding `||M_{phi_r} - M_{phi_{r,n}}||`.
pub fn tail_bound(r: f64, s: f64, n: u64, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param(format!("C must be positive, got {c}")));
    }
    Ok(c * DecayCertificate::new(r, s, true)?.tail(n))
}

/// `U = 1 + C K_n >= ||M_{phi_{r,n}}||`.
pub fn certified_scale(r: f64, s: f64, n: u64, c: f64) -> Result<f64> {
    Ok(1.0 + tail_bound(r, s, n, c)?)
}

/// `phi_{r,n} / U`, a finite-rank contraction.
pub fn scaled_multiplier(r: f64, s: f64, n: u64, c: f64) -> Result<Multiplier> {
    let u = certified_scale(r, s, n, c)?;
    Multiplier::scaled(Multiplier::truncated_heat(r, n)?, u)
}

/// How far `M_phi` moves `lambda(f)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefectReport {
    /// Bracket for `||lambda(phi . f - f)||`.
    pub bracket: NormBracket,
    /// `sup_{x in supp f} |phi(x) - 1| * ||f||_1`.
    pub cheap_bound: f64,
}

pub fn map_defect(
    f: &GroupRingElement,
    phi: &Multiplier,
    rd: &RdParams,
    opts: &PowerOptions,
) -> Result<DefectReport> {
    let g = f.group();
    let moved = phi.apply(f)?;
    let diff = moved.sub(f)?;
    let worst = f
        .support()
        .map(|x| (phi.value(&g, x) - 1.0).norm())
        .fold(0.0, f64::max);
    Ok(DefectReport {
        bracket: opnorm_bracket(&diff, rd, opts)?,
        cheap_bound: worst * f.l1_norm(),
    })
}
