//! JSON form of kernels: `{preset | grid, atoms: [{re, im, location}]}`.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Atom, ContinuousPart, MemoryKernel, SampledGrid, Shape};
use crate::error::{Error, Result};

/// Lazy continuous parts are sampled on this many intervals on export.
pub const EXPORT_INTERVALS: usize = 1 << 12;

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

fn is_unit(s: &[f64; 2]) -> bool {
    *s == unit()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum PresetSpec {
    Zero,
    Exponential {
        gamma: f64,
        #[serde(default = "unit", skip_serializing_if = "is_unit")]
        scale: [f64; 2],
    },
    Ohmic {
        alpha: f64,
        cutoff: f64,
        #[serde(default = "unit", skip_serializing_if = "is_unit")]
        scale: [f64; 2],
    },
    Box {
        half_width: f64,
        #[serde(default = "unit", skip_serializing_if = "is_unit")]
        scale: [f64; 2],
    },
    /// A single atom; further atoms may be listed alongside.
    Dirac {
        location: f64,
        #[serde(default = "unit", skip_serializing_if = "is_unit")]
        weight: [f64; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub step: f64,
    /// `[re, im]` pairs.
    pub values: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    pub location: f64,
}

/// Serializable kernel description.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
}

fn c(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

impl KernelSpec {
    pub fn to_kernel(&self) -> Result<MemoryKernel> {
        let mut atoms: Vec<Atom> = self.atoms.iter().map(|a| Atom::new(C64::new(a.re, a.im), a.location)).collect();
        let continuous = match (&self.preset, &self.grid) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument("a kernel has either a preset or a grid, not both".into()))
            }
            (None, Some(g)) => ContinuousPart::Grid(Arc::new(SampledGrid::new(
                g.start,
                g.step,
                g.values.iter().map(|&v| c(v)).collect(),
            )?)),
            (None, None) | (Some(PresetSpec::Zero), None) => ContinuousPart::Zero,
            (Some(PresetSpec::Dirac { location, weight }), None) => {
                atoms.push(Atom::new(c(*weight), *location));
                ContinuousPart::Zero
            }
            (Some(PresetSpec::Exponential { gamma, scale }), None) => {
                ContinuousPart::preset(Shape::Exponential { gamma: *gamma }, c(*scale))?
            }
            (Some(PresetSpec::Ohmic { alpha, cutoff, scale }), None) => {
                ContinuousPart::preset(Shape::Ohmic { alpha: *alpha, cutoff: *cutoff }, c(*scale))?
            }
            (Some(PresetSpec::Box { half_width, scale }), None) => {
                ContinuousPart::preset(Shape::Box { half_width: *half_width }, c(*scale))?
            }
        };
        MemoryKernel::new(continuous, atoms)
    }

    /// Presets and grids are exported as such; lazy parts are sampled.
    pub fn from_kernel(kernel: &MemoryKernel) -> Result<Self> {
        let atoms = kernel
            .atoms()
            .iter()
            .map(|a| AtomSpec { re: a.weight.re, im: a.weight.im, location: a.location })
            .collect();
        let mut spec = KernelSpec { preset: None, grid: None, atoms };
        let part = match kernel.continuous() {
            ContinuousPart::Preset { .. } | ContinuousPart::Grid(_) | ContinuousPart::Zero => kernel.continuous().clone(),
            other => other.materialize(EXPORT_INTERVALS)?,
        };
        match part {
            ContinuousPart::Zero => {}
            ContinuousPart::Preset { shape, scale } => {
                let scale = [scale.re, scale.im];
                spec.preset = Some(match shape {
                    Shape::Exponential { gamma } => PresetSpec::Exponential { gamma, scale },
                    Shape::Ohmic { alpha, cutoff } => PresetSpec::Ohmic { alpha, cutoff, scale },
                    Shape::Box { half_width } => PresetSpec::Box { half_width, scale },
                });
            }
            ContinuousPart::Grid(g) => {
                spec.grid = Some(GridSpec {
                    start: g.start(),
                    step: g.step(),
                    values: g.values().iter().map(|v| [v.re, v.im]).collect(),
                });
            }
            _ => unreachable!("materialized parts are grids"),
        }
        Ok(spec)
    }
}

impl MemoryKernel {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<KernelSpec>(text)?.to_kernel()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&KernelSpec::from_kernel(self)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_round_trip() {
        let text = r#"{"preset": {"name": "exponential", "gamma": 1.0}, "atoms": [{"re": 1.0, "im": 0.0, "location": 1.0}]}"#;
        let k = MemoryKernel::from_json(text).unwrap();
        assert!((k.total_variation(None).unwrap() - 2.0).abs() < 1e-14);
        let back = MemoryKernel::from_json(&k.to_json().unwrap()).unwrap();
        assert_eq!(back.atoms(), k.atoms());
        assert_eq!(back.eval_continuous(0.3), k.eval_continuous(0.3));
    }

    #[test]
    fn dirac_and_zero_presets() {
        let k = MemoryKernel::from_json(r#"{"preset": {"name": "dirac", "location": 1.0}}"#).unwrap();
        assert_eq!(k.total_variation(Some((1.0, 2.0))).unwrap(), 0.5);
        let z = MemoryKernel::from_json(r#"{"preset": {"name": "zero"}}"#).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn unknown_fields_and_conflicts_are_rejected() {
        assert!(MemoryKernel::from_json(r#"{"preset": {"name": "exponential", "gamma": 1.0, "beta": 2}}"#).is_err());
        assert!(MemoryKernel::from_json(r#"{"bogus": 1}"#).is_err());
        let both = r#"{"preset": {"name": "zero"}, "grid": {"start": 0, "step": 1, "values": [[0,0],[1,0]]}}"#;
        assert!(MemoryKernel::from_json(both).is_err());
    }

    #[test]
    fn lazy_parts_export_as_grids() {
        let k = super::super::mollify(&MemoryKernel::dirac(C64::new(1.0, 0.0), 0.0).unwrap(), 0.25, 0.25).unwrap();
        let spec = KernelSpec::from_kernel(&k).unwrap();
        let g = spec.grid.as_ref().unwrap();
        assert_eq!(g.values.len(), EXPORT_INTERVALS + 1);
        let back = spec.to_kernel().unwrap();
        assert!((back.total_variation(None).unwrap() - 1.0).abs() < 1e-6);
    }
}
