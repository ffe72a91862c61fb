//! Keyword lexicon driving feature-catalog generation.
//!
//! A lexicon file is UTF-8 text with one section header per list
//! (`[keywords]`, `[type_keywords]`, `[param_buckets]`), one token per line
//! and `#` comments.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Configurable vocabulary from which the feature catalog is generated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    /// Lowercase name-fragment keywords.
    pub keywords: Vec<String>,
    /// Type-name fragments, matched case-insensitively against simple
    /// (unqualified) type names.
    pub type_keywords: Vec<String>,
    /// Parameter-count bucket thresholds; the last bucket is open-ended
    /// (`n >= last`).
    pub param_count_buckets: Vec<u8>,
}

impl Default for Lexicon {
    /// The shipped default vocabulary, curated from the behavior-label verbs
    /// and the Android / FIDO2 biometric API surface.
    fn default() -> Self {
        let keywords = [
            "acquire",
            "authenticate",
            "biometric",
            "callback",
            "cancel",
            "check",
            "cipher",
            "close",
            "crypt",
            "database",
            "delete",
            "dialog",
            "enroll",
            "error",
            "face",
            "finger",
            "get",
            "has",
            "is",
            "key",
            "listener",
            "permission",
            "prompt",
            "query",
            "register",
            "remove",
            "result",
            "save",
            "send",
            "set",
            "sign",
            "status",
            "stop",
            "store",
            "strength",
            "success",
            "transfer",
            "user",
            "verify",
        ];
        let type_keywords = [
            "BiometricPrompt",
            "CancellationSignal",
            "Cipher",
            "CryptoObject",
            "Cursor",
            "Database",
            "Executor",
            "Intent",
            "KeyStore",
            "PromptInfo",
            "PublicKeyCredential",
            "Signature",
            "String",
        ];
        Lexicon {
            keywords: keywords.iter().map(|s| s.to_string()).collect(),
            type_keywords: type_keywords.iter().map(|s| s.to_string()).collect(),
            param_count_buckets: alloc::vec![0, 1, 2, 3, 4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LexiconError {
    Empty,
    Invalid { line: usize, message: &'static str },
}

impl fmt::Display for LexiconError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LexiconError::Empty => f.write_str("lexicon has no keywords"),
            LexiconError::Invalid { line, message } => {
                write!(f, "lexicon line {line}: {message}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LexiconError {}

impl Lexicon {
    /// Checks the invariants: non-empty, unique, lowercase keywords.
    pub fn validate(&self) -> Result<(), LexiconError> {
        if self.keywords.is_empty() {
            return Err(LexiconError::Empty);
        }
        for (i, kw) in self.keywords.iter().enumerate() {
            if kw.is_empty() || kw.chars().any(|c| c.is_uppercase()) {
                return Err(LexiconError::Invalid { line: i + 1, message: "keyword must be non-empty lowercase" });
            }
            if self.keywords[..i].contains(kw) {
                return Err(LexiconError::Invalid { line: i + 1, message: "duplicate keyword" });
            }
        }
        for (i, tk) in self.type_keywords.iter().enumerate() {
            if tk.is_empty() {
                return Err(LexiconError::Invalid { line: i + 1, message: "empty type keyword" });
            }
            if self.type_keywords[..i].contains(tk) {
                return Err(LexiconError::Invalid { line: i + 1, message: "duplicate type keyword" });
            }
        }
        if self.param_count_buckets.is_empty() {
            return Err(LexiconError::Invalid { line: 0, message: "no parameter-count buckets" });
        }
        if self.param_count_buckets.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LexiconError::Invalid { line: 0, message: "bucket thresholds must be strictly increasing" });
        }
        Ok(())
    }

    /// Sorts and deduplicates every list, giving a canonical lexicon whose
    /// catalog hash is order-independent.
    pub fn canonicalize(&mut self) {
        self.keywords.sort();
        self.keywords.dedup();
        self.type_keywords.sort();
        self.type_keywords.dedup();
        self.param_count_buckets.sort_unstable();
        self.param_count_buckets.dedup();
    }

    /// Parses the sectioned text format.
    pub fn parse(text: &str) -> Result<Lexicon, LexiconError> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Keywords,
            TypeKeywords,
            ParamBuckets,
        }
        let mut section = Section::None;
        let mut lex = Lexicon {
            keywords: Vec::new(),
            type_keywords: Vec::new(),
            param_count_buckets: Vec::new(),
        };
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[keywords]" => section = Section::Keywords,
                "[type_keywords]" => section = Section::TypeKeywords,
                "[param_buckets]" => section = Section::ParamBuckets,
                token => match section {
                    Section::None => {
                        return Err(LexiconError::Invalid { line: n + 1, message: "token before any section header" })
                    }
                    Section::Keywords => lex.keywords.push(token.to_string()),
                    Section::TypeKeywords => lex.type_keywords.push(token.to_string()),
                    Section::ParamBuckets => {
                        let v = token.parse::<u8>().map_err(|_| LexiconError::Invalid {
                            line: n + 1,
                            message: "bucket threshold is not a small integer",
                        })?;
                        lex.param_count_buckets.push(v);
                    }
                },
            }
        }
        if lex.param_count_buckets.is_empty() {
            lex.param_count_buckets = alloc::vec![0, 1, 2, 3, 4];
        }
        lex.validate()?;
        Ok(lex)
    }

    /// Renders back to the file format.
    pub fn render(&self) -> String {
        let mut out = String::from("[keywords]\n");
        for k in &self.keywords {
            out.push_str(k);
            out.push('\n');
        }
        out.push_str("\n[type_keywords]\n");
        for k in &self.type_keywords {
            out.push_str(k);
            out.push('\n');
        }
        out.push_str("\n[param_buckets]\n");
        for b in &self.param_count_buckets {
            out.push_str(&b.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        Lexicon::default().validate().unwrap();
    }

    #[test]
    fn parse_render_round_trip() {
        let lex = Lexicon::default();
        let parsed = Lexicon::parse(&lex.render()).unwrap();
        assert_eq!(parsed, lex);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let lex = Lexicon::parse("# header\n[keywords]\nfoo # trailing\n\nbar\n").unwrap();
        assert_eq!(lex.keywords, ["foo", "bar"]);
    }

    #[test]
    fn rejects_uppercase_keyword() {
        assert!(Lexicon::parse("[keywords]\nFoo\n").is_err());
    }

    #[test]
    fn rejects_token_outside_section() {
        assert!(Lexicon::parse("foo\n").is_err());
    }
}
