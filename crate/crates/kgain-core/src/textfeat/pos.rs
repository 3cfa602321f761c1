//! Part-of-speech tagging behind the c_noun/c_verb/c_adj/c_oth ratios.
//!
//! The interface is pluggable; the bundled baseline is a closed-class word
//! list plus suffix rules. It is deterministic and dictionary-free, which is
//! all the ratio features require.

use std::collections::HashSet;
use std::sync::OnceLock;

/// Coarse tag classes in feature order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosTag {
    Noun,
    Verb,
    Adj,
    Other,
}

/// A tagger maps one token to a coarse class. Implementations must be pure.
pub trait PosTagger: Send + Sync {
    fn tag(&self, token: &str) -> PosTag;
}

/// Baseline tagger: function words are Other; derivational suffixes pick
/// adjective, verb, or noun; everything else defaults to Noun (the majority
/// open class).
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleTagger;

/// Derivational suffix rules, longest first so "ment" beats "ent".
const SUFFIX_RULES: [(&str, PosTag); 32] = [
    ("less", PosTag::Adj),
    ("able", PosTag::Adj),
    ("ible", PosTag::Adj),
    ("ical", PosTag::Adj),
    ("tion", PosTag::Noun),
    ("sion", PosTag::Noun),
    ("ment", PosTag::Noun),
    ("ness", PosTag::Noun),
    ("ance", PosTag::Noun),
    ("ence", PosTag::Noun),
    ("ship", PosTag::Noun),
    ("hood", PosTag::Noun),
    ("ous", PosTag::Adj),
    ("ful", PosTag::Adj),
    ("ive", PosTag::Adj),
    ("ish", PosTag::Adj),
    ("ary", PosTag::Adj),
    ("ent", PosTag::Adj),
    ("ant", PosTag::Adj),
    ("ity", PosTag::Noun),
    ("ism", PosTag::Noun),
    ("ist", PosTag::Noun),
    ("ure", PosTag::Noun),
    ("ize", PosTag::Verb),
    ("ise", PosTag::Verb),
    ("ify", PosTag::Verb),
    ("ate", PosTag::Verb),
    ("ing", PosTag::Verb),
    ("ed", PosTag::Verb),
    ("ic", PosTag::Adj),
    ("al", PosTag::Adj),
    ("er", PosTag::Noun),
];

fn function_words() -> &'static HashSet<&'static str> {
    static WORDS: OnceLock<HashSet<&'static str>> = OnceLock::new();
    WORDS.get_or_init(|| {
        [
            "the", "a", "an", "and", "or", "but", "if", "while", "of", "to", "in", "on", "at",
            "by", "for", "with", "about", "against", "between", "into", "through", "during",
            "before", "after", "above", "below", "from", "up", "down", "out", "off", "over",
            "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
            "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such",
            "no", "nor", "not", "only", "own", "same", "so", "than", "too", "very", "can", "will",
            "just", "should", "now", "is", "are", "was", "were", "be", "been", "being", "am",
            "have", "has", "had", "do", "does", "did", "i", "you", "he", "she", "it", "we",
            "they", "me", "him", "her", "us", "them", "my", "your", "his", "its", "our", "their",
            "this", "that", "these", "those", "as", "until", "because", "yet", "also", "what",
            "which", "who", "whom", "whose", "don't", "doesn't", "didn't", "isn't", "aren't",
            "won't", "can't", "it's", "that's",
        ]
        .into_iter()
        .collect()
    })
}

impl PosTagger for RuleTagger {
    fn tag(&self, token: &str) -> PosTag {
        let lower = token.to_lowercase();
        if function_words().contains(lower.as_str()) {
            return PosTag::Other;
        }
        for (suffix, tag) in SUFFIX_RULES {
            if lower.len() > suffix.len() && lower.ends_with(suffix) {
                return tag;
            }
        }
        PosTag::Noun
    }
}
