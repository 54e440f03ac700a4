//! JSON map definitions: a `"kind"` tag plus numeric parameters. Angles
//! may be given as numbers or as the names `"golden"` and `"silver"`;
//! composed maps list child definitions by name.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circle_maps::{CircleLift, GeometricSchedule};
use crate::error::{Error, Result};
use crate::gallery::{self, EssentialParams, InessentialParams, DENJOY_TRUNCATION};
use crate::torus_maps::{DiskPush, Suspension, TorusMap};
use crate::{GOLDEN, SILVER};

/// A real parameter, literal or named.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Value(f64),
    Named(String),
}

impl Angle {
    pub fn resolve(&self) -> Result<f64> {
        match self {
            Self::Value(v) if v.is_finite() => Ok(*v),
            Self::Value(v) => Err(Error::Definition(format!("non-finite parameter {v}"))),
            Self::Named(name) => match name.to_ascii_lowercase().as_str() {
                "golden" => Ok(GOLDEN),
                "silver" => Ok(SILVER),
                _ => Err(Error::Definition(format!("unknown constant {name:?}; use \"golden\" or \"silver\""))),
            },
        }
    }
}

impl From<f64> for Angle {
    fn from(v: f64) -> Self {
        Self::Value(v)
    }
}

fn default_truncation() -> usize {
    DENJOY_TRUNCATION
}

fn default_mass() -> f64 {
    0.3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CircleDef {
    Rigid {
        alpha: Angle,
    },
    /// Breakpoints on `[0,1)` and lift values there.
    PiecewiseAffine {
        knots: Vec<f64>,
        values: Vec<f64>,
    },
    DenjoyTruncated {
        alpha: Angle,
        #[serde(default = "default_truncation")]
        n: usize,
        #[serde(default = "default_mass")]
        mass: f64,
    },
}

impl CircleDef {
    pub fn build(&self) -> Result<CircleLift> {
        match self {
            Self::Rigid { alpha } => CircleLift::rigid(alpha.resolve()?),
            Self::PiecewiseAffine { knots, values } => CircleLift::piecewise(knots.clone(), values.clone()),
            Self::DenjoyTruncated { alpha, n, mass } => {
                if !(*mass > 0.0 && *mass < 1.0) {
                    return Err(Error::Definition(format!("gap mass {mass} must lie in (0, 1)")));
                }
                CircleLift::denjoy(alpha.resolve()?, &GeometricSchedule::with_mass(*mass), *n)
            }
        }
    }

    /// Nominal rotation number when it is known without iteration.
    pub fn nominal_rotation(&self) -> Option<f64> {
        match self {
            Self::Rigid { alpha } | Self::DenjoyTruncated { alpha, .. } => alpha.resolve().ok(),
            Self::PiecewiseAffine { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TorusDef {
    Rigid {
        alpha: Angle,
        beta: Angle,
    },
    /// `z ↦ I_k·z + shift`.
    Twist {
        k: i64,
        #[serde(default = "zero_shift")]
        shift: [Angle; 2],
    },
    Product {
        first: CircleDef,
        second: CircleDef,
    },
    Suspension {
        base: CircleDef,
        fiber: CircleDef,
        #[serde(default)]
        warp: Option<f64>,
    },
    DiskPush {
        from: [f64; 2],
        to: [f64; 2],
        radius: f64,
    },
    /// `chain[0] ∘ … ∘ chain[last]`, each entry naming a child.
    Composed {
        chain: Vec<String>,
        #[serde(default)]
        children: BTreeMap<String, TorusDef>,
    },
    Swapped {
        inner: Box<TorusDef>,
    },
    /// A map from the gallery: `"3.1"`, `"3.2"` or `"3.3"`.
    Gallery {
        id: String,
    },
}

fn zero_shift() -> [Angle; 2] {
    [Angle::Value(0.0), Angle::Value(0.0)]
}

impl TorusDef {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Definition(e.to_string()))
    }

    pub fn build(&self) -> Result<TorusMap> {
        self.build_in(&BTreeMap::new())
    }

    fn build_in(&self, scope: &BTreeMap<String, TorusDef>) -> Result<TorusMap> {
        Ok(match self {
            Self::Rigid { alpha, beta } => TorusMap::rigid(alpha.resolve()?, beta.resolve()?),
            Self::Twist { k, shift } => TorusMap::Affine { twist: *k, shift: [shift[0].resolve()?, shift[1].resolve()?] },
            Self::Product { first, second } => TorusMap::Product { first: first.build()?, second: second.build()? },
            Self::Suspension { base, fiber, warp } => TorusMap::Suspension(Box::new(Suspension::new(
                base.build()?,
                fiber.build()?,
                warp.unwrap_or(Suspension::DEFAULT_WARP),
            )?)),
            Self::DiskPush { from, to, radius } => TorusMap::DiskPush(DiskPush::new(*from, *to, *radius)?),
            Self::Composed { chain, children } => {
                let mut inner = scope.clone();
                inner.extend(children.iter().map(|(k, v)| (k.clone(), v.clone())));
                let maps = chain
                    .iter()
                    .map(|name| {
                        inner
                            .get(name)
                            .ok_or_else(|| Error::Definition(format!("composed map names unknown child {name:?}")))?
                            .build_in(&inner)
                    })
                    .collect::<Result<Vec<_>>>()?;
                TorusMap::composed(maps)?
            }
            Self::Swapped { inner } => TorusMap::swapped(inner.build_in(scope)?)?,
            Self::Gallery { id } => match id.as_str() {
                "3.1" => gallery::rigid_suspension()?.map,
                "3.2" => gallery::example_unbounded_inessential(InessentialParams::default())?.map,
                "3.3" => gallery::example_fully_essential(EssentialParams::default())?.map,
                other => {
                    return Err(Error::UnknownExample { id: other.into(), known: "3.1, 3.2, 3.3".into() });
                }
            },
        })
    }

    /// Rotation vector implied by the definition, when it is explicit.
    pub fn nominal_rotation(&self) -> Option<[f64; 2]> {
        match self {
            Self::Rigid { alpha, beta } => Some([alpha.resolve().ok()?, beta.resolve().ok()?]),
            Self::Twist { k: 0, shift } => Some([shift[0].resolve().ok()?, shift[1].resolve().ok()?]),
            Self::Product { first, second } => Some([first.nominal_rotation()?, second.nominal_rotation()?]),
            Self::Suspension { base, fiber, .. } => {
                let (a, b) = (base.nominal_rotation()?, fiber.nominal_rotation()?);
                Some([a, a * b])
            }
            Self::Gallery { id } => match id.as_str() {
                "3.1" | "3.2" | "3.3" => Some([GOLDEN, GOLDEN * SILVER]),
                _ => None,
            },
            Self::Swapped { inner } => inner.nominal_rotation().map(|[a, b]| [b, a]),
            Self::Twist { .. } | Self::DiskPush { .. } | Self::Composed { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_constants_resolve() {
        let def = TorusDef::from_json(r#"{"kind": "rigid", "alpha": "golden", "beta": 0.25}"#).unwrap();
        assert_eq!(def.nominal_rotation(), Some([GOLDEN, 0.25]));
        assert!(TorusDef::from_json(r#"{"kind": "rigid", "alpha": "bronze", "beta": 0}"#).unwrap().build().is_err());
    }

    #[test]
    fn composition_by_name() {
        let text = r#"{
            "kind": "composed",
            "chain": ["g", "push"],
            "children": {
                "g": {"kind": "suspension", "base": {"kind": "rigid", "alpha": "golden"},
                      "fiber": {"kind": "denjoy-truncated", "alpha": "silver"}},
                "push": {"kind": "disk-push", "from": [0.5, 0.5], "to": [0.51, 0.5], "radius": 0.05}
            }
        }"#;
        let map = TorusDef::from_json(text).unwrap().build().unwrap();
        assert_eq!(map.kind(), "composed");
        let missing = r#"{"kind": "composed", "chain": ["nope"]}"#;
        assert!(TorusDef::from_json(missing).unwrap().build().is_err());
    }

    #[test]
    fn twist_and_round_trip() {
        let def = TorusDef::from_json(r#"{"kind": "twist", "k": 2}"#).unwrap();
        assert_eq!(def.build().unwrap().twist(), 2);
        let back = TorusDef::from_json(&serde_json::to_string(&def).unwrap()).unwrap();
        assert_eq!(back, def);
        assert!(TorusDef::from_json(r#"{"kind": "twist", "k": 1, "bogus": 3}"#).is_err());
    }

    #[test]
    fn gallery_reference() {
        let def = TorusDef::from_json(r#"{"kind": "gallery", "id": "3.2"}"#).unwrap();
        assert_eq!(def.build().unwrap().kind(), "composed");
        assert!(TorusDef::from_json(r#"{"kind": "gallery", "id": "9"}"#).unwrap().build().is_err());
    }

    #[test]
    fn circle_definitions() {
        let d: CircleDef = serde_json::from_str(r#"{"kind": "denjoy-truncated", "alpha": "golden"}"#).unwrap();
        let lift = d.build().unwrap();
        assert_eq!(lift.as_denjoy().unwrap().truncation_order(), DENJOY_TRUNCATION);
        let p: CircleDef =
            serde_json::from_str(r#"{"kind": "piecewise-affine", "knots": [0, 0.5], "values": [0.1, 0.8]}"#).unwrap();
        assert!(p.build().is_ok());
    }
}
