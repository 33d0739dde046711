//! JSON form of lattice models. Supports are lists of site coordinates and
//! matrices are nested `[re, im]` rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Bath, Coupling, InteractionTerm, Lattice, LatticeModel, Schedule};
use crate::error::{Error, Result};
use crate::kernels::{KernelSpec, MemoryKernel};

pub const MODEL_SCHEMA: u32 = 1;

fn schema() -> u32 {
    MODEL_SCHEMA
}

fn qubit() -> usize {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BathSpec {
    Vacuum { kernel: KernelSpec },
    Full { xx: KernelSpec, xp: KernelSpec, px: KernelSpec, pp: KernelSpec },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub support: Vec<Vec<usize>>,
    pub h: Schedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Coupling>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default = "schema")]
    pub schema: u32,
    pub extents: Vec<usize>,
    #[serde(default)]
    pub periodic: Vec<bool>,
    #[serde(default = "qubit")]
    pub qudit_dim: usize,
    #[serde(default)]
    pub baths: BTreeMap<String, BathSpec>,
    pub terms: Vec<TermSpec>,
}

impl BathSpec {
    fn to_bath(&self) -> Result<Bath> {
        Ok(match self {
            BathSpec::Vacuum { kernel } => Bath::Vacuum { kernel: kernel.to_kernel()? },
            BathSpec::Full { xx, xp, px, pp } => Bath::Full {
                kernels: Box::new([[xx.to_kernel()?, xp.to_kernel()?], [px.to_kernel()?, pp.to_kernel()?]]),
            },
        })
    }

    fn from_bath(b: &Bath) -> Result<Self> {
        let k = |m: &MemoryKernel| KernelSpec::from_kernel(m);
        Ok(match b {
            Bath::Vacuum { kernel } => BathSpec::Vacuum { kernel: k(kernel)? },
            Bath::Full { kernels } => BathSpec::Full {
                xx: k(&kernels[0][0])?,
                xp: k(&kernels[0][1])?,
                px: k(&kernels[1][0])?,
                pp: k(&kernels[1][1])?,
            },
        })
    }
}

impl ModelSpec {
    pub fn to_model(&self) -> Result<LatticeModel> {
        if self.schema != MODEL_SCHEMA {
            return Err(Error::InvalidModel(format!("unsupported model schema {} (expected {MODEL_SCHEMA})", self.schema)));
        }
        let lattice = Lattice::new(self.extents.clone(), self.periodic.clone())?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let support = t.support.iter().map(|c| lattice.index(c)).collect::<Result<Vec<_>>>()?;
                Ok(InteractionTerm { support, h: t.h.clone(), coupling: t.coupling.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        let baths = self.baths.iter().map(|(id, b)| Ok((id.clone(), b.to_bath()?))).collect::<Result<_>>()?;
        LatticeModel::new(lattice, self.qudit_dim, terms, baths)
    }

    pub fn from_model(model: &LatticeModel) -> Result<Self> {
        let lattice = model.lattice();
        Ok(Self {
            schema: MODEL_SCHEMA,
            extents: lattice.extents().to_vec(),
            periodic: lattice.periodic().to_vec(),
            qudit_dim: model.qudit_dim(),
            baths: model.baths().iter().map(|(id, b)| Ok((id.clone(), BathSpec::from_bath(b)?))).collect::<Result<_>>()?,
            terms: model
                .terms()
                .iter()
                .map(|t| TermSpec {
                    support: t.support.iter().map(|&s| lattice.coords(s)).collect(),
                    h: t.h.clone(),
                    coupling: t.coupling.clone(),
                })
                .collect(),
        })
    }
}

impl LatticeModel {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<ModelSpec>(text)?.to_model()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelSpec::from_model(self)?)?)
    }
}
