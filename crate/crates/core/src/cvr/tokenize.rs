//! Input tokenization for the resolver.

use crate::kb::KnowledgeBase;

/// Tokenization strategy.
#[derive(Debug, Clone, Copy)]
pub enum TokenizeMode<'kb> {
    /// One token per Unicode scalar, whitespace dropped.
    Char,
    /// Greedy longest match against the KB's symbols, falling back to
    /// single characters.
    Lexicon(&'kb KnowledgeBase),
}

/// Splits `text` into resolver tokens.
pub fn tokenize(text: &str, mode: TokenizeMode) -> Vec<String> {
    match mode {
        TokenizeMode::Char => text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(String::from)
            .collect(),
        TokenizeMode::Lexicon(kb) => tokenize_lexicon(text, kb),
    }
}

fn tokenize_lexicon(text: &str, kb: &KnowledgeBase) -> Vec<String> {
    let max_symbol_chars = kb
        .entries()
        .iter()
        .map(|e| e.symbol.chars().count())
        .max()
        .unwrap_or(0);

    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let longest = (1..=max_symbol_chars.min(chars.len() - pos))
            .rev()
            .map(|len| chars[pos..pos + len].iter().collect::<String>())
            .find(|candidate| kb.contains_symbol(candidate));
        if let Some(symbol) = longest {
            pos += symbol.chars().count();
            tokens.push(symbol);
        } else {
            let c = chars[pos];
            pos += 1;
            if !c.is_whitespace() {
                tokens.push(c.to_string());
            }
        }
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::test_support::entry;
    use crate::kb::KnowledgeBase;

    fn kb_with(symbols: &[&str]) -> KnowledgeBase {
        let mut kb = KnowledgeBase::new(2);
        for s in symbols {
            kb.push(entry(s, None));
        }
        kb
    }

    #[test]
    fn char_mode_splits_scalars() {
        assert_eq!(tokenize("你好", TokenizeMode::Char), vec!["你", "好"]);
    }

    #[test]
    fn char_mode_drops_whitespace() {
        assert_eq!(
            tokenize("a b\tc\n", TokenizeMode::Char),
            vec!["a", "b", "c"]
        );
        assert!(tokenize("", TokenizeMode::Char).is_empty());
    }

    #[test]
    fn lexicon_greedy_longest_match() {
        let kb = kb_with(&["你好", "世界"]);
        assert_eq!(
            tokenize("你好世界", TokenizeMode::Lexicon(&kb)),
            vec!["你好", "世界"]
        );
    }

    #[test]
    fn lexicon_falls_back_to_chars() {
        let kb = kb_with(&["你好"]);
        assert_eq!(
            tokenize("你好吗", TokenizeMode::Lexicon(&kb)),
            vec!["你好", "吗"]
        );
    }

    #[test]
    fn lexicon_prefers_longer_symbol() {
        let kb = kb_with(&["你", "你好"]);
        assert_eq!(
            tokenize("你好", TokenizeMode::Lexicon(&kb)),
            vec!["你好"]
        );
    }
}
