//! Team semantics evaluation.
//!
//! Two strategies share one compiled representation. `Brute` applies the
//! satisfaction rules literally: covers for `∨`, set-valued choice functions
//! for `∃`, all non-empty subteams for `◇`. `Optimized` adds exact shortcuts,
//! each switchable on its own:
//!
//! - `flat_pointwise`: first-order subformulas are checked row by row;
//! - `downwards_singleton_choice`: under downwards-closed bodies `∃` tries
//!   only functions and `◇` only singletons;
//! - `downwards_partition_cover`: `∨` uses partitions when both sides are
//!   downwards closed, and removes the rows of a flat side otherwise;
//! - `quantifier_block_witness`: blocks `∃v̄` are solved jointly (constancy
//!   atoms pin variables, a single atom is searched through its relation,
//!   blocks over `{ε}` become witness queries) and subformulas with an
//!   atom that has no member at all are refuted outright.

mod engine;

use crate::dependencies::Registry;
use crate::error::{Budget, Error, Result};
use crate::structures::Structure;
use crate::syntax::{free_variables, Formula};
use crate::teams::Team;

pub use engine::Evaluator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Strategy {
    #[default]
    Brute,
    Optimized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shortcuts {
    pub flat_pointwise: bool,
    pub downwards_singleton_choice: bool,
    pub downwards_partition_cover: bool,
    pub quantifier_block_witness: bool,
}

impl Default for Shortcuts {
    fn default() -> Self {
        Shortcuts {
            flat_pointwise: true,
            downwards_singleton_choice: true,
            downwards_partition_cover: true,
            quantifier_block_witness: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalConfig {
    pub strategy: Strategy,
    /// Node budget for a single top-level evaluation.
    pub budget: u64,
    /// Accept universes with fewer than two elements.
    pub allow_small: bool,
    /// Only consulted by the optimized strategy.
    pub shortcuts: Shortcuts,
    /// Memo entries kept before the cache is cleared.
    pub memo_limit: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            strategy: Strategy::Brute,
            budget: Budget::DEFAULT,
            allow_small: false,
            shortcuts: Shortcuts::default(),
            memo_limit: 1 << 22,
        }
    }
}

impl EvalConfig {
    pub fn brute() -> Self {
        EvalConfig::default()
    }

    pub fn optimized() -> Self {
        EvalConfig {
            strategy: Strategy::Optimized,
            ..EvalConfig::default()
        }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_small_universe(mut self, allow: bool) -> Self {
        self.allow_small = allow;
        self
    }

    pub fn with_shortcuts(mut self, shortcuts: Shortcuts) -> Self {
        self.shortcuts = shortcuts;
        self
    }
}

/// `𝔐 ⊨_X φ` using the built-in dependencies.
pub fn eval(structure: &Structure, team: &Team, formula: &Formula, config: &EvalConfig) -> Result<bool> {
    eval_with(structure, team, formula, &Registry::standard(), config)
}

pub fn eval_with(
    structure: &Structure,
    team: &Team,
    formula: &Formula,
    registry: &Registry,
    config: &EvalConfig,
) -> Result<bool> {
    Evaluator::new(structure, formula, registry, config)?.eval(team)
}

/// `𝔐 ⊨_{ε} φ` for a sentence.
pub fn eval_sentence(structure: &Structure, sentence: &Formula, config: &EvalConfig) -> Result<bool> {
    eval_sentence_with(structure, sentence, &Registry::standard(), config)
}

pub fn eval_sentence_with(
    structure: &Structure,
    sentence: &Formula,
    registry: &Registry,
    config: &EvalConfig,
) -> Result<bool> {
    let free = free_variables(sentence);
    if let Some(v) = free.into_iter().next() {
        return Err(Error::Precondition(format!(
            "`{sentence}` is not a sentence: `{v}` is free"
        )));
    }
    eval_with(structure, &Team::unit(structure.size()), sentence, registry, config)
}

#[cfg(test)]
mod tests;
