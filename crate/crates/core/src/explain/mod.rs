//! Explanations for recommended actions: action-only text, causal-link
//! chains and subgoal-based sentences.

mod attribution;
mod lexicon;
mod links;
mod render;

pub use attribution::{attribute_subgoals, AttributionRule, SubgoalAttribution};
pub use lexicon::{ActionPhrases, Lexicon};
pub use links::{extract_causal_links, CausalLink};
pub use render::{action_text, explain_step, render, ExplainError, ExplanationMode, ExplanationRendering, Payload};
