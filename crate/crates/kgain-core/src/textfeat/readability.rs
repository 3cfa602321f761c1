//! Readability grade indices: Gunning Fog, SMOG, Flesch-Kincaid Grade.
//!
//! Formulas follow the standard published definitions. Pages with no tokens
//! or no sentences score 0 on all three rather than NaN.

use super::html::PageText;

/// The three readability grades, in feature order c_gi, c_smog, c_fk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadabilityFeatures {
    pub c_gi: f64,
    pub c_smog: f64,
    pub c_fk: f64,
}

/// Syllable count heuristic: maximal vowel groups (a e i o u y) of the
/// lowercased token, minus one for a terminal silent "e" that forms its own
/// group and is not the only group, with a floor of one.
pub fn syllables(token: &str) -> usize {
    let chars: Vec<char> = token.to_lowercase().chars().collect();
    let is_vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if is_vowel(chars[i]) {
            let start = i;
            while i < chars.len() && is_vowel(chars[i]) {
                i += 1;
            }
            groups.push((start, i - start));
        } else {
            i += 1;
        }
    }
    let mut count = groups.len();
    if count >= 2 {
        let (start, len) = *groups.last().unwrap();
        let ends_with_e = chars.last() == Some(&'e');
        let final_group_is_lone_e = len == 1 && chars[start] == 'e' && start + 1 == chars.len();
        if ends_with_e && final_group_is_lone_e {
            count -= 1;
        }
    }
    count.max(1)
}

/// True for Fog/SMOG "complex" words: three or more syllables.
pub fn is_complex(token: &str) -> bool {
    syllables(token) >= 3
}

/// All three indices for a page.
pub fn readability(text: &PageText) -> ReadabilityFeatures {
    let words = text.tokens.len();
    let sentences = text.sentences.len();
    if words == 0 || sentences == 0 {
        return ReadabilityFeatures { c_gi: 0.0, c_smog: 0.0, c_fk: 0.0 };
    }
    let mut total_syllables = 0usize;
    let mut complex_words = 0usize;
    for token in &text.tokens {
        let s = syllables(token);
        total_syllables += s;
        if s >= 3 {
            complex_words += 1;
        }
    }
    let w = words as f64;
    let s = sentences as f64;
    ReadabilityFeatures {
        c_gi: gunning_fog(w, s, complex_words as f64),
        c_smog: smog(s, complex_words as f64),
        c_fk: flesch_kincaid(w, s, total_syllables as f64),
    }
}

pub fn gunning_fog(words: f64, sentences: f64, complex_words: f64) -> f64 {
    0.4 * (words / sentences + 100.0 * complex_words / words)
}

pub fn smog(sentences: f64, polysyllables: f64) -> f64 {
    1.0430 * (polysyllables * 30.0 / sentences).sqrt() + 3.1291
}

pub fn flesch_kincaid(words: f64, sentences: f64, syllables: f64) -> f64 {
    0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59
}
