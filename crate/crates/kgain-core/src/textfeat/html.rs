//! HTML to visible text, plus the tag counts behind the h_ features.
//!
//! The page is parsed once; text extraction walks the DOM skipping
//! script/style/head subtrees and inserting line breaks around block-level
//! elements so adjacent blocks never fuse into one token.

use std::ops::Range;

use scraper::node::Node;
use scraper::{Html, Selector};

use crate::corpus::HtmlSnapshot;

/// Extracted visible text of one page, in token units.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageText {
    pub url: String,
    pub tokens: Vec<String>,
    /// Sentence spans over `tokens`; spans partition the token list.
    pub sentences: Vec<Range<usize>>,
    /// Non-whitespace characters outside any token.
    pub punct_count: usize,
    /// Word count of each p element, in document order.
    pub paragraphs: Vec<usize>,
}

/// Counts of the structural elements behind h_link .. h_obj.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TagCounts {
    pub links: usize,
    pub unordered_lists: usize,
    pub scripts: usize,
    pub videos: usize,
    pub audios: usize,
    pub objects: usize,
}

/// One parse of a page: its text and its tag counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPage {
    pub text: PageText,
    pub tags: TagCounts,
}

const SKIP_TAGS: [&str; 7] = ["script", "style", "head", "noscript", "template", "title", "iframe"];

const BLOCK_TAGS: [&str; 35] = [
    "p", "div", "br", "li", "ul", "ol", "h1", "h2", "h3", "h4", "h5", "h6", "tr", "td", "th",
    "table", "thead", "tbody", "tfoot", "caption", "section", "article", "header", "footer",
    "nav", "aside", "blockquote", "pre", "figure", "figcaption", "hr", "form", "main", "dl",
    "dd",
];

/// Parse a snapshot and compute both text and tag counts.
pub fn parse_page(page: &HtmlSnapshot) -> ParsedPage {
    let (html, _lossy) = page.decode();
    let document = Html::parse_document(&html);

    let mut visible = String::new();
    collect_text(document.tree.root(), &mut visible);
    let tokenized = tokenize_text(&visible);

    let paragraph_sel = Selector::parse("p").unwrap();
    let paragraphs = document
        .select(&paragraph_sel)
        .map(|p| {
            let mut text = String::new();
            collect_text(*p, &mut text);
            tokenize_text(&text).tokens.len()
        })
        .collect();

    let count = |css: &str| {
        let sel = Selector::parse(css).unwrap();
        document.select(&sel).count()
    };
    let tags = TagCounts {
        links: count("a"),
        unordered_lists: count("ul"),
        scripts: count("script"),
        videos: count("video"),
        audios: count("audio"),
        objects: count("object"),
    };

    ParsedPage {
        text: PageText {
            url: page.url.clone(),
            tokens: tokenized.tokens,
            sentences: tokenized.sentences,
            punct_count: tokenized.punct_count,
            paragraphs,
        },
        tags,
    }
}

/// Visible text of one page.
pub fn extract_page_text(page: &HtmlSnapshot) -> PageText {
    parse_page(page).text
}

fn collect_text(node: ego_tree::NodeRef<'_, Node>, out: &mut String) {
    match node.value() {
        Node::Text(t) => out.push_str(t),
        Node::Element(el) => {
            let name = el.name();
            if SKIP_TAGS.contains(&name) {
                return;
            }
            let block = BLOCK_TAGS.contains(&name);
            if block {
                out.push('\n');
            }
            for child in node.children() {
                collect_text(child, out);
            }
            if block {
                out.push('\n');
            }
        }
        _ => {
            for child in node.children() {
                collect_text(child, out);
            }
        }
    }
}

/// Token stream of a plain-text string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tokenized {
    pub tokens: Vec<String>,
    pub sentences: Vec<Range<usize>>,
    pub punct_count: usize,
}

/// Tokenize plain text.
///
/// Tokens are maximal alphanumeric runs; an apostrophe (' or U+2019) joins a
/// token when alphanumerics flank it. Sentences end at `.`/`!`/`?` followed by
/// whitespace or end of text; trailing unterminated tokens still close a
/// sentence, so the sentence spans partition the token list. Every
/// non-whitespace character outside a token counts as punctuation.
pub fn tokenize_text(text: &str) -> Tokenized {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut sentences = Vec::new();
    let mut punct_count = 0usize;
    let mut sentence_start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c.is_alphanumeric() {
            let start = i;
            let mut j = i + 1;
            loop {
                if j < chars.len() && chars[j].is_alphanumeric() {
                    j += 1;
                } else if j + 1 < chars.len()
                    && matches!(chars[j], '\'' | '\u{2019}')
                    && chars[j + 1].is_alphanumeric()
                {
                    j += 2;
                } else {
                    break;
                }
            }
            tokens.push(chars[start..j].iter().collect());
            i = j;
        } else {
            if !c.is_whitespace() {
                punct_count += 1;
                if matches!(c, '.' | '!' | '?') {
                    let at_boundary = chars.get(i + 1).is_none_or(|n| n.is_whitespace());
                    if at_boundary && tokens.len() > sentence_start {
                        sentences.push(sentence_start..tokens.len());
                        sentence_start = tokens.len();
                    }
                }
            }
            i += 1;
        }
    }
    if tokens.len() > sentence_start {
        sentences.push(sentence_start..tokens.len());
    }
    Tokenized { tokens, sentences, punct_count }
}
