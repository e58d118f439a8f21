//! Registry of tree-building strategies behind a single trait, keyed by
//! the method names the command line exposes.

use crate::dendrogram::Dendrogram;
use crate::error::{Error, Result};
use crate::gcp::{run_gcp, run_nn_chain, GcpOptions, ReductionKind};
use crate::matrix::DistanceMatrix;
use crate::me::{run_addition, InsertionOrder, WeightScheme};
use crate::nj::{run_nj, NjOptions, NjVariant};
use crate::phylo::PhyloTree;

#[derive(Debug, Clone)]
pub enum TreeOutput {
    /// Dendrogram with merge heights (clustering methods).
    Rooted(Dendrogram),
    /// Unrooted tree with branch lengths.
    Unrooted(PhyloTree),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Naive,
    NnChain,
}

#[derive(Debug, Clone, Copy)]
pub struct MethodOptions {
    pub engine: Engine,
    pub order: InsertionOrder,
    /// BIONJ only: select pairs by the raw variance matrix instead of the
    /// usual Q criterion.
    pub bionj_select_over_v: bool,
}

impl Default for MethodOptions {
    fn default() -> MethodOptions {
        MethodOptions {
            engine: Engine::Naive,
            order: InsertionOrder::Input,
            bionj_select_over_v: false,
        }
    }
}

pub trait TreeMethod: Sync {
    fn name(&self) -> &'static str;
    fn run(&self, d: &DistanceMatrix, opts: &MethodOptions) -> Result<TreeOutput>;
}

struct GcpMethod(ReductionKind);

impl TreeMethod for GcpMethod {
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn run(&self, d: &DistanceMatrix, opts: &MethodOptions) -> Result<TreeOutput> {
        let gcp_opts = GcpOptions::default();
        let run = match opts.engine {
            Engine::Naive => run_gcp(d, self.0, &gcp_opts)?,
            Engine::NnChain => run_nn_chain(d, self.0, &gcp_opts)?,
        };
        Ok(TreeOutput::Rooted(run.dendrogram))
    }
}

struct NjMethod(NjVariant);

impl TreeMethod for NjMethod {
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn run(&self, d: &DistanceMatrix, opts: &MethodOptions) -> Result<TreeOutput> {
        if opts.engine == Engine::NnChain {
            return Err(Error::domain(format!(
                "the nn-chain engine only applies to clustering methods, not {}",
                self.name()
            )));
        }
        let nj_opts = NjOptions {
            bionj_select_over_v: opts.bionj_select_over_v,
            clamp_negative_lengths: false,
        };
        Ok(TreeOutput::Unrooted(run_nj(d, self.0, &nj_opts)?))
    }
}

struct MeMethod(WeightScheme);

impl TreeMethod for MeMethod {
    fn name(&self) -> &'static str {
        self.0.name()
    }

    fn run(&self, d: &DistanceMatrix, opts: &MethodOptions) -> Result<TreeOutput> {
        if opts.engine == Engine::NnChain {
            return Err(Error::domain(format!(
                "the nn-chain engine only applies to clustering methods, not {}",
                self.name()
            )));
        }
        Ok(TreeOutput::Unrooted(run_addition(d, self.0, opts.order)?))
    }
}

/// Every registered method, in the order the CLI documents them.
pub fn all_methods() -> Vec<Box<dyn TreeMethod>> {
    let mut out: Vec<Box<dyn TreeMethod>> = Vec::new();
    for kind in ReductionKind::ALL {
        out.push(Box::new(GcpMethod(kind)));
    }
    for variant in NjVariant::ALL {
        out.push(Box::new(NjMethod(variant)));
    }
    out.push(Box::new(MeMethod(WeightScheme::Ols)));
    out.push(Box::new(MeMethod(WeightScheme::Balanced)));
    out
}

pub fn method_names() -> Vec<&'static str> {
    all_methods().iter().map(|m| m.name()).collect()
}

pub fn method_by_name(name: &str) -> Option<Box<dyn TreeMethod>> {
    all_methods().into_iter().find(|m| m.name() == name)
}
