//! Shared inputs for the pipeline benchmarks.

use taskdraft_core::generate::{random_model, seeded, Generated};
use taskdraft_core::script::AuthorScript;
use taskdraft_core::{bundled, Language};

/// A fixed set of generated models, the same on every run.
pub fn corpus(n: u64) -> Vec<Generated> {
    (0..n).map(|seed| random_model(&mut seeded(seed))).collect()
}

pub fn save_script() -> AuthorScript {
    AuthorScript::parse(bundled::SAVE_SCRIPT).expect("bundled script parses")
}

pub fn languages() -> [Language; 2] {
    [Language::new("en"), Language::new("fr")]
}

#[cfg(test)]
mod tests {
    #[test]
    fn corpus_is_reproducible() {
        let a: Vec<String> = super::corpus(5).iter().map(|g| g.model.to_text()).collect();
        let b: Vec<String> = super::corpus(5).iter().map(|g| g.model.to_text()).collect();
        assert_eq!(a, b);
    }
}
