//! Tokenization shared by text matching, featurization and similarity.

use std::collections::BTreeSet;

/// Lowercased alphanumeric runs; punctuation and whitespace separate tokens.
pub fn tokens(s: &str) -> Vec<String> {
    s.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

pub fn token_set(s: &str) -> BTreeSet<String> {
    tokens(s).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn punctuation_and_case() {
        assert_eq!(tokens("Breaking: Mayor's bill, 2023!"), ["breaking", "mayor", "s", "bill", "2023"]);
        assert!(tokens(" -- ").is_empty());
    }
}
