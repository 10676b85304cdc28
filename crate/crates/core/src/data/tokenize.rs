/// Lowercases, splits on whitespace and strips leading/trailing punctuation
/// from each piece. Pieces that end up empty are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| c.is_ascii_punctuation() || c.is_ascii_control()))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(tokenize("Great food."), ["great", "food"]);
        assert!(tokenize("  ").is_empty());
        assert_eq!(tokenize("Wow... Loved it!"), ["wow", "loved", "it"]);
    }

    #[test]
    fn inner_punctuation_survives() {
        assert_eq!(tokenize("don't  (re-heat)"), ["don't", "re-heat"]);
        assert!(tokenize("!!! ...").is_empty());
    }
}
