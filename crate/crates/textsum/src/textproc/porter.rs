//! The Porter stemming algorithm, all five steps as published, with the
//! customary guard that words of one or two letters are returned unchanged.
//!
//! Operates on lowercase ASCII words; anything containing other characters is
//! returned as-is.

/// `true` if `word[i]` acts as a consonant. `y` counts as a vowel when it
/// follows a consonant.
fn is_consonant(word: &[u8], i: usize) -> bool {
    match word[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(word, i - 1),
        _ => true,
    }
}

/// The measure m: number of vowel-consonant sequences in [C](VC)^m[V].
fn measure(word: &[u8]) -> usize {
    let mut m = 0;
    for i in 1..word.len() {
        if is_consonant(word, i) && !is_consonant(word, i - 1) {
            m += 1;
        }
    }
    m
}

fn has_vowel(word: &[u8]) -> bool {
    (0..word.len()).any(|i| !is_consonant(word, i))
}

fn ends_double_consonant(word: &[u8]) -> bool {
    let n = word.len();
    n >= 2 && word[n - 1] == word[n - 2] && is_consonant(word, n - 1)
}

/// *o: the word ends consonant-vowel-consonant where the final consonant is
/// not w, x or y.
fn ends_cvc(word: &[u8]) -> bool {
    let n = word.len();
    n >= 3
        && is_consonant(word, n - 3)
        && !is_consonant(word, n - 2)
        && is_consonant(word, n - 1)
        && !matches!(word[n - 1], b'w' | b'x' | b'y')
}

fn ends_with(word: &[u8], suffix: &[u8]) -> bool {
    word.len() >= suffix.len() && &word[word.len() - suffix.len()..] == suffix
}

/// Replaces `suffix` (assumed present) with `replacement`.
fn set_suffix(word: &mut Vec<u8>, suffix: &[u8], replacement: &[u8]) {
    let keep = word.len() - suffix.len();
    word.truncate(keep);
    word.extend_from_slice(replacement);
}

/// Applies the first rule whose suffix matches; the replacement happens only
/// when the stem measure exceeds `min_measure`. A matched suffix consumes the
/// step even if its condition fails.
fn apply_rule_list(word: &mut Vec<u8>, rules: &[(&[u8], &[u8])], min_measure: usize) {
    for (suffix, replacement) in rules {
        if ends_with(word, suffix) {
            let stem_len = word.len() - suffix.len();
            if measure(&word[..stem_len]) > min_measure {
                set_suffix(word, suffix, replacement);
            }
            return;
        }
    }
}

fn step_1a(word: &mut Vec<u8>) {
    // SSES -> SS and IES -> I both drop two letters but are separate rules.
    #[allow(clippy::if_same_then_else)]
    if ends_with(word, b"sses") {
        word.truncate(word.len() - 2);
    } else if ends_with(word, b"ies") {
        word.truncate(word.len() - 2);
    } else if !ends_with(word, b"ss") && ends_with(word, b"s") {
        word.pop();
    }
}

fn step_1b(word: &mut Vec<u8>) {
    if ends_with(word, b"eed") {
        if measure(&word[..word.len() - 3]) > 0 {
            word.pop();
        }
        return;
    }
    let removed = if ends_with(word, b"ed") && has_vowel(&word[..word.len() - 2]) {
        word.truncate(word.len() - 2);
        true
    } else if ends_with(word, b"ing") && has_vowel(&word[..word.len() - 3]) {
        word.truncate(word.len() - 3);
        true
    } else {
        false
    };
    if removed {
        if ends_with(word, b"at") || ends_with(word, b"bl") || ends_with(word, b"iz") {
            word.push(b'e');
        } else if ends_double_consonant(word) && !matches!(word[word.len() - 1], b'l' | b's' | b'z')
        {
            word.pop();
        } else if measure(word) == 1 && ends_cvc(word) {
            word.push(b'e');
        }
    }
}

fn step_1c(word: &mut Vec<u8>) {
    if ends_with(word, b"y") && has_vowel(&word[..word.len() - 1]) {
        let n = word.len();
        word[n - 1] = b'i';
    }
}

const STEP_2_RULES: &[(&[u8], &[u8])] = &[
    (b"ational", b"ate"),
    (b"tional", b"tion"),
    (b"enci", b"ence"),
    (b"anci", b"ance"),
    (b"izer", b"ize"),
    (b"abli", b"able"),
    (b"alli", b"al"),
    (b"entli", b"ent"),
    (b"eli", b"e"),
    (b"ousli", b"ous"),
    (b"ization", b"ize"),
    (b"ation", b"ate"),
    (b"ator", b"ate"),
    (b"alism", b"al"),
    (b"iveness", b"ive"),
    (b"fulness", b"ful"),
    (b"ousness", b"ous"),
    (b"aliti", b"al"),
    (b"iviti", b"ive"),
    (b"biliti", b"ble"),
];

const STEP_3_RULES: &[(&[u8], &[u8])] = &[
    (b"icate", b"ic"),
    (b"ative", b""),
    (b"alize", b"al"),
    (b"iciti", b"ic"),
    (b"ical", b"ic"),
    (b"ful", b""),
    (b"ness", b""),
];

const STEP_4_SUFFIXES: &[&[u8]] = &[
    b"al", b"ance", b"ence", b"er", b"ic", b"able", b"ible", b"ant", b"ement", b"ment", b"ent",
    b"ion", b"ou", b"ism", b"ate", b"iti", b"ous", b"ive", b"ize",
];

fn step_4(word: &mut Vec<u8>) {
    for suffix in STEP_4_SUFFIXES {
        if ends_with(word, suffix) {
            let stem_len = word.len() - suffix.len();
            let stem = &word[..stem_len];
            let allowed = if *suffix == b"ion" {
                stem.last().is_some_and(|&c| c == b's' || c == b't')
            } else {
                true
            };
            if allowed && measure(stem) > 1 {
                word.truncate(stem_len);
            }
            return;
        }
    }
}

fn step_5a(word: &mut Vec<u8>) {
    if ends_with(word, b"e") {
        let stem = &word[..word.len() - 1];
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            word.pop();
        }
    }
}

fn step_5b(word: &mut Vec<u8>) {
    if measure(word) > 1 && ends_double_consonant(word) && word[word.len() - 1] == b'l' {
        word.pop();
    }
}

/// Stems one lowercase word.
pub fn stem(word: &str) -> String {
    if word.len() <= 2 || !word.bytes().all(|b| b.is_ascii_lowercase()) {
        return word.to_string();
    }
    let mut w = word.as_bytes().to_vec();
    step_1a(&mut w);
    step_1b(&mut w);
    step_1c(&mut w);
    apply_rule_list(&mut w, STEP_2_RULES, 0);
    apply_rule_list(&mut w, STEP_3_RULES, 0);
    step_4(&mut w);
    step_5a(&mut w);
    step_5b(&mut w);
    String::from_utf8(w).expect("stemming preserves ASCII")
}
