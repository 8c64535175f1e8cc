//! Rule-based sentence segmentation.
//!
//! A sentence ends at `.`, `!` or `?` when the terminator is followed by
//! whitespace and then an uppercase letter, or by the end of the text. A
//! trailing word that matches the abbreviation list never ends a sentence.

/// Token-final strings (matched case-sensitively, including their period)
/// that do not terminate a sentence.
const ABBREVIATIONS: &[&str] = &[
    "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "Sr.", "Jr.", "St.", "Mt.", "Gen.", "Col.", "Sgt.",
    "Capt.", "Lt.", "Rev.", "Hon.", "U.S.", "U.K.", "U.N.", "E.U.", "e.g.", "i.e.", "etc.",
    "vs.", "cf.", "Inc.", "Ltd.", "Co.", "Corp.", "No.", "Fig.", "Jan.", "Feb.", "Mar.", "Apr.",
    "Jun.", "Jul.", "Aug.", "Sep.", "Sept.", "Oct.", "Nov.", "Dec.", "approx.",
];

/// Ordered sentences plus their byte offsets into the source text.
///
/// Offsets are non-overlapping and increasing; splicing the sentences back
/// between the source's inter-sentence gaps reproduces the input exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceList {
    pub sentences: Vec<String>,
    pub offsets: Vec<(usize, usize)>,
}

impl SentenceList {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }
}

/// `true` if the word ending at byte `end` (exclusive, just past a `.`)
/// matches the abbreviation list.
fn ends_with_abbreviation(text: &str, end: usize) -> bool {
    let head = &text[..end];
    let word_start = head
        .rfind(|c: char| c.is_whitespace())
        .map(|i| i + head[i..].chars().next().map_or(1, char::len_utf8))
        .unwrap_or(0);
    let word = &head[word_start..];
    ABBREVIATIONS.contains(&word)
}

/// `true` if a terminator ending at byte `end` closes a sentence: the rest of
/// the text is whitespace followed by an uppercase letter, or nothing at all.
fn breaks_here(text: &str, end: usize) -> bool {
    let rest = &text[end..];
    if rest.trim().is_empty() {
        return true;
    }
    let mut chars = rest.chars();
    match chars.next() {
        Some(c) if c.is_whitespace() => (),
        _ => return false,
    }
    for c in chars {
        if c.is_whitespace() {
            continue;
        }
        return c.is_uppercase();
    }
    true
}

/// Splits `text` into sentences. Text with no terminator yields a single
/// sentence; empty or all-whitespace text yields none.
pub fn segment_sentences(text: &str) -> SentenceList {
    let mut sentences = Vec::new();
    let mut offsets = Vec::new();
    let mut start: Option<usize> = None;

    let mut push_sentence = |from: usize, to: usize| {
        let raw = &text[from..to];
        let leading = raw.len() - raw.trim_start().len();
        let trailing = raw.trim_end().len();
        if trailing > leading {
            sentences.push(raw[leading..trailing].to_string());
            offsets.push((from + leading, from + trailing));
        }
    };

    for (i, c) in text.char_indices() {
        if start.is_none() && !c.is_whitespace() {
            start = Some(i);
        }
        if matches!(c, '.' | '!' | '?') {
            let end = i + c.len_utf8();
            if c == '.' && ends_with_abbreviation(text, end) {
                continue;
            }
            if breaks_here(text, end) {
                if let Some(s) = start.take() {
                    push_sentence(s, end);
                }
            }
        }
    }
    if let Some(s) = start {
        push_sentence(s, text.len());
    }

    SentenceList { sentences, offsets }
}
