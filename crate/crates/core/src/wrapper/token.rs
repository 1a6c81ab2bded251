use std::fmt;

/// Coarse token types used by landmark wildcards and content patterns.
///
/// The word classes form an implication chain: every `AllCaps` token is also
/// `Capitalized`, and every `Number`, `AllCaps` or `Capitalized` token is also
/// `AlphaNum`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenClass {
    Number,
    AllCaps,
    Capitalized,
    AlphaNum,
    HtmlTag,
    Punctuation,
    Whitespace,
}

impl TokenClass {
    pub const ALL: [TokenClass; 7] = [
        TokenClass::Number,
        TokenClass::AllCaps,
        TokenClass::Capitalized,
        TokenClass::AlphaNum,
        TokenClass::HtmlTag,
        TokenClass::Punctuation,
        TokenClass::Whitespace,
    ];

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn name(self) -> &'static str {
        match self {
            TokenClass::Number => "Number",
            TokenClass::AllCaps => "AllCaps",
            TokenClass::Capitalized => "Capitalized",
            TokenClass::AlphaNum => "AlphaNum",
            TokenClass::HtmlTag => "HtmlTag",
            TokenClass::Punctuation => "Punctuation",
            TokenClass::Whitespace => "Whitespace",
        }
    }
}

impl fmt::Display for TokenClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Set of token classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct ClassSet(u8);

impl ClassSet {
    pub fn empty() -> Self {
        ClassSet(0)
    }

    pub fn contains(self, c: TokenClass) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn insert(&mut self, c: TokenClass) {
        self.0 |= c.bit();
    }

    pub fn union(self, other: ClassSet) -> ClassSet {
        ClassSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ClassSet) -> ClassSet {
        ClassSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: ClassSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = TokenClass> {
        TokenClass::ALL.into_iter().filter(move |&c| self.contains(c))
    }

    /// The most specific class in the set, if any (declaration order).
    pub fn most_specific(self) -> Option<TokenClass> {
        self.iter().next()
    }
}

impl FromIterator<TokenClass> for ClassSet {
    fn from_iter<I: IntoIterator<Item = TokenClass>>(iter: I) -> Self {
        let mut s = ClassSet::empty();
        for c in iter {
            s.insert(c);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    pub classes: ClassSet,
    /// Byte offset of the token in the raw text.
    pub offset: usize,
}

fn classify(text: &str) -> ClassSet {
    let mut s = ClassSet::empty();
    let first = text.chars().next().expect("nonempty token");
    if text.starts_with('<') && text.ends_with('>') && text.len() >= 2 {
        s.insert(TokenClass::HtmlTag);
    } else if text.chars().all(char::is_alphanumeric) {
        s.insert(TokenClass::AlphaNum);
        if text.chars().all(|c| c.is_ascii_digit()) {
            s.insert(TokenClass::Number);
        }
        if first.is_uppercase() {
            s.insert(TokenClass::Capitalized);
            if text.chars().all(char::is_uppercase) {
                s.insert(TokenClass::AllCaps);
            }
        }
    } else if text.chars().all(char::is_whitespace) {
        s.insert(TokenClass::Whitespace);
    } else {
        s.insert(TokenClass::Punctuation);
    }
    s
}

/// Splits raw text into tokens.
///
/// Whitespace separates tokens and is not itself emitted. `<...>` runs become
/// one `HtmlTag` token, maximal alphanumeric runs become word tokens and every
/// other character is a single `Punctuation` token. Token offsets point into
/// `raw`, so the text between tokens can always be recovered.
pub fn tokenize(raw: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut chars = raw.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let end = if c == '<' {
            match raw[start..].find('>') {
                Some(rel) if !raw[start + 1..start + rel].contains(['<', '\n']) && rel > 1 => {
                    let end = start + rel + 1;
                    while chars.peek().is_some_and(|&(i, _)| i < end) {
                        chars.next();
                    }
                    end
                }
                _ => {
                    chars.next();
                    start + c.len_utf8()
                }
            }
        } else if c.is_alphanumeric() {
            let mut end = start;
            while let Some(&(i, ch)) = chars.peek() {
                if !ch.is_alphanumeric() {
                    break;
                }
                end = i + ch.len_utf8();
                chars.next();
            }
            end
        } else {
            chars.next();
            start + c.len_utf8()
        };
        let text = &raw[start..end];
        tokens.push(Token {
            text: text.to_string(),
            classes: classify(text),
            offset: start,
        });
    }
    tokens
}

/// Rebuilds raw text from tokens and the separators between them.
pub fn detokenize(raw: &str, tokens: &[Token]) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut at = 0;
    for t in tokens {
        out.push_str(&raw[at..t.offset]);
        out.push_str(&t.text);
        at = t.offset + t.text.len();
    }
    out.push_str(&raw[at..]);
    out
}
