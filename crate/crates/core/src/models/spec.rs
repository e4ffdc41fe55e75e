use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Architecture variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// Single-task model: one head, trained on one cultivar.
    #[serde(alias = "Single")]
    Stl,
    /// Shared backbone with one linear head per task.
    MultiH,
    /// Task embedding added elementwise to the input features.
    AddE,
    /// Task embedding concatenated to the input features.
    ConcatE,
    /// Task embedding multiplied elementwise with the input features.
    MultE,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::MultE,
        Variant::ConcatE,
        Variant::AddE,
        Variant::MultiH,
        Variant::Stl,
    ];
    pub const MULTI_TASK: [Variant; 4] = [
        Variant::MultE,
        Variant::ConcatE,
        Variant::AddE,
        Variant::MultiH,
    ];

    /// Column label used in reports.
    pub fn label(self) -> &'static str {
        match self {
            Variant::Stl => "Single",
            Variant::MultiH => "MultiH",
            Variant::AddE => "AddE",
            Variant::ConcatE => "ConcatE",
            Variant::MultE => "MultE",
        }
    }

    pub fn uses_embedding(self) -> bool {
        matches!(self, Variant::AddE | Variant::ConcatE | Variant::MultE)
    }

    pub fn combine_mode(self) -> Option<CombineMode> {
        match self {
            Variant::AddE => Some(CombineMode::Add),
            Variant::ConcatE => Some(CombineMode::Concat),
            Variant::MultE => Some(CombineMode::Mult),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "stl" | "single" => Ok(Variant::Stl),
            "multih" | "multihead" => Ok(Variant::MultiH),
            "adde" => Ok(Variant::AddE),
            "concate" => Ok(Variant::ConcatE),
            "multe" => Ok(Variant::MultE),
            _ => Err(ModelError::InvalidSpec(format!("unknown variant `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CombineMode {
    Add,
    Concat,
    Mult,
}

/// Architecture description. Stored in every checkpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub variant: Variant,
    pub input_dim: usize,
    pub fc_dims: [usize; 3],
    pub gru_hidden: usize,
    pub output_dim: usize,
    /// Total task count, including tasks added by finetuning.
    pub n_tasks: usize,
    pub embed_dim: usize,
    /// Embedding tasks whose vector is a learned combination of the
    /// embedding table rows rather than a row of its own.
    #[serde(default)]
    pub derived_tasks: usize,
}

pub const OUTPUT_DIM: usize = 3;
pub const PAPER_FC_DIMS: [usize; 3] = [1024, 2048, 1024];
pub const PAPER_GRU_HIDDEN: usize = 2048;
pub const DESK_FC_DIMS: [usize; 3] = [64, 128, 64];
pub const DESK_GRU_HIDDEN: usize = 128;

impl ModelSpec {
    pub fn new(
        variant: Variant,
        input_dim: usize,
        n_tasks: usize,
        fc_dims: [usize; 3],
        gru_hidden: usize,
    ) -> Self {
        Self {
            variant,
            input_dim,
            fc_dims,
            gru_hidden,
            output_dim: OUTPUT_DIM,
            n_tasks: if variant == Variant::Stl { 1 } else { n_tasks },
            embed_dim: input_dim,
            derived_tasks: 0,
        }
    }

    pub fn paper(variant: Variant, input_dim: usize, n_tasks: usize) -> Self {
        Self::new(variant, input_dim, n_tasks, PAPER_FC_DIMS, PAPER_GRU_HIDDEN)
    }

    pub fn desk(variant: Variant, input_dim: usize, n_tasks: usize) -> Self {
        Self::new(variant, input_dim, n_tasks, DESK_FC_DIMS, DESK_GRU_HIDDEN)
    }

    pub fn with_embed_dim(mut self, embed_dim: usize) -> Self {
        self.embed_dim = embed_dim;
        self
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |msg: String| Err(ModelError::InvalidSpec(msg));
        if self.output_dim != OUTPUT_DIM {
            return fail(format!(
                "output_dim must be {OUTPUT_DIM}, got {}",
                self.output_dim
            ));
        }
        if self.input_dim == 0 || self.gru_hidden == 0 || self.fc_dims.contains(&0) {
            return fail("layer dimensions must be positive".into());
        }
        if self.n_tasks == 0 {
            return fail("n_tasks must be at least 1".into());
        }
        match self.variant {
            Variant::Stl if self.n_tasks != 1 => {
                fail(format!("STL has exactly one task, got {}", self.n_tasks))
            }
            Variant::AddE | Variant::MultE if self.embed_dim != self.input_dim => fail(format!(
                "{} requires embed_dim == input_dim ({} != {})",
                self.variant, self.embed_dim, self.input_dim
            )),
            Variant::ConcatE if self.embed_dim == 0 => {
                fail("ConcatE requires embed_dim > 0".into())
            }
            _ if self.derived_tasks > 0 && !self.variant.uses_embedding() => {
                fail(format!("{} cannot hold derived tasks", self.variant))
            }
            _ if self.derived_tasks >= self.n_tasks => {
                fail("derived tasks need at least one base task".into())
            }
            _ => Ok(()),
        }
    }

    /// Width of the first dense layer's input after task combination.
    pub fn backbone_input_dim(&self) -> usize {
        match self.variant {
            Variant::ConcatE => self.input_dim + self.embed_dim,
            _ => self.input_dim,
        }
    }

    pub fn n_heads(&self) -> usize {
        match self.variant {
            Variant::MultiH => self.n_tasks,
            _ => 1,
        }
    }

    /// Rows of the embedding table (tasks with their own vector).
    pub fn base_tasks(&self) -> usize {
        self.n_tasks - self.derived_tasks
    }

    pub fn feature_dim(&self) -> usize {
        self.fc_dims[2]
    }
}
