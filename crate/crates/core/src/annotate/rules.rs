//! Self-contained English annotator: tokenizer, sentence splitter, lexicon and
//! suffix POS tagger, gazetteer NER, and a head-rule dependency parser.
//!
//! Quality is well below a statistical parser, but output is deterministic and
//! every invariant of the data model holds (one root, acyclic heads, exact
//! character offsets).

use super::lexicon as lex;
use super::{Annotator, Pos, Token, NO_ENTITY};
use crate::error::Result;

#[derive(Debug, Clone, Default)]
pub struct RuleAnnotator;

impl RuleAnnotator {
    pub fn new() -> Self {
        RuleAnnotator
    }
}

impl Annotator for RuleAnnotator {
    fn id(&self) -> String {
        "rule-en-v1".to_string()
    }

    fn annotate_tokens(&self, raw_text: &str) -> Result<Vec<Token>> {
        let spans = tokenize_words(raw_text);
        let texts: Vec<String> = spans.iter().map(|s| s.2.clone()).collect();
        let tags = tag(&texts);
        let ner = recognize_entities(&texts, &tags);
        let heads = parse(&texts, &tags, &ner);
        Ok(spans
            .into_iter()
            .enumerate()
            .map(|(i, (start, end, text))| {
                let lower = text.to_lowercase();
                Token {
                    index: i,
                    lemma: lex::lemmatize(&lower, tags[i]),
                    text,
                    pos: tags[i],
                    ner: ner[i].clone(),
                    is_content: false,
                    head_index: heads[i],
                    start_char: start,
                    end_char: end,
                }
            })
            .collect())
    }
}

const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "jr.", "sr.", "vs.", "etc.", "inc.", "ltd.",
    "co.", "corp.", "e.g.", "i.e.", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.",
    "sep.", "sept.", "oct.", "nov.", "dec.", "no.", "mt.", "ft.", "gen.", "gov.", "sen.",
    "rep.", "rev.", "approx.", "ca.", "c.", "u.s.", "u.k.", "a.m.", "p.m.",
];

const CONTRACTIONS: &[&str] = &["n't", "'s", "'re", "'ve", "'ll", "'d", "'m"];

fn is_abbreviation(word: &str) -> bool {
    let lower = word.to_lowercase();
    if ABBREVIATIONS.contains(&lower.as_str()) {
        return true;
    }
    let chars: Vec<char> = word.chars().collect();
    // single initial "J." or dotted acronym "U.S.A."
    if chars.len() == 2 && chars[0].is_alphabetic() && chars[1] == '.' {
        return true;
    }
    chars.len() >= 4
        && chars.last() == Some(&'.')
        && chars
            .chunks(2)
            .all(|p| p.len() == 2 && p[0].is_alphabetic() && p[1] == '.')
}

fn is_open_punct(c: char) -> bool {
    matches!(c, '"' | '\'' | '(' | '[' | '{' | '“' | '‘' | '«' | '$' | '£' | '€')
}

fn is_close_punct(c: char) -> bool {
    matches!(
        c,
        '.' | ',' | ';' | ':' | '!' | '?' | '"' | '\'' | ')' | ']' | '}' | '”' | '’' | '»' | '%'
    )
}

/// Split text into word tokens: `(start_char, end_char, text)`.
pub fn tokenize_words(text: &str) -> Vec<(usize, usize, String)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() {
            i += 1;
        }
        split_piece(&chars, start, i, &mut out);
    }
    out
}

fn split_piece(chars: &[char], mut start: usize, mut end: usize, out: &mut Vec<(usize, usize, String)>) {
    let text = |s: usize, e: usize| -> String { chars[s..e].iter().collect() };

    // dashes split a piece into independent pieces
    for k in start..end {
        if chars[k] == '\u{2014}' || chars[k] == '\u{2013}' || (chars[k] == '-' && k + 1 < end && chars[k + 1] == '-') {
            let width = if chars[k] == '-' { 2 } else { 1 };
            if k > start {
                split_piece(chars, start, k, out);
            }
            out.push((k, k + width, text(k, k + width)));
            if k + width < end {
                split_piece(chars, k + width, end, out);
            }
            return;
        }
    }

    let mut leading = Vec::new();
    while start < end && is_open_punct(chars[start]) && end - start > 1 {
        let rest = text(start, end).to_lowercase();
        if chars[start] == '\'' && CONTRACTIONS.contains(&rest.as_str()) {
            break;
        }
        leading.push((start, start + 1, text(start, start + 1)));
        start += 1;
    }

    let mut trailing = Vec::new();
    loop {
        if end - start <= 1 {
            break;
        }
        let c = chars[end - 1];
        if c == '.' && is_abbreviation(&text(start, end)) {
            break;
        }
        if is_close_punct(c) {
            // trailing apostrophe on a plural possessive stays a separate token
            trailing.push((end - 1, end, text(end - 1, end)));
            end -= 1;
            continue;
        }
        break;
    }

    // contractions: did|n't, Sharon|'s
    let word = text(start, end);
    let lower = word.to_lowercase().replace('’', "'");
    let mut split_at = None;
    for suffix in CONTRACTIONS {
        let n = suffix.chars().count();
        if lower.ends_with(suffix) && lower.chars().count() > n {
            split_at = Some(end - n);
            break;
        }
    }

    out.extend(leading);
    match split_at {
        Some(k) => {
            split_internal_commas(chars, start, k, out);
            out.push((k, end, text(k, end)));
        }
        None => split_internal_commas(chars, start, end, out),
    }
    out.extend(trailing.into_iter().rev());
}

fn split_internal_commas(chars: &[char], start: usize, end: usize, out: &mut Vec<(usize, usize, String)>) {
    let mut s = start;
    for k in start..end {
        let is_sep = (chars[k] == ',' || chars[k] == ';')
            && !(k > start && k + 1 < end && chars[k - 1].is_ascii_digit() && chars[k + 1].is_ascii_digit());
        if is_sep {
            if k > s {
                out.push((s, k, chars[s..k].iter().collect()));
            }
            out.push((k, k + 1, chars[k].to_string()));
            s = k + 1;
        }
    }
    if end > s {
        out.push((s, end, chars[s..end].iter().collect()));
    }
}

/// Sentence boundaries as character spans `[start, end)` over `text`.
pub fn split_sentences(text: &str) -> Vec<(usize, usize)> {
    let tokens = tokenize_words(text);
    let mut out = Vec::new();
    let mut sent_start: Option<usize> = None;
    let mut i = 0;
    while i < tokens.len() {
        let (s, e, ref t) = tokens[i];
        if sent_start.is_none() {
            sent_start = Some(s);
        }
        let terminal = t == "." || t == "!" || t == "?";
        if terminal {
            // absorb closing quotes/brackets
            let mut last_end = e;
            let mut j = i + 1;
            while j < tokens.len() && matches!(tokens[j].2.as_str(), "\"" | "'" | ")" | "”" | "’" | "]") {
                last_end = tokens[j].1;
                j += 1;
            }
            let next_starts_sentence = match tokens.get(j) {
                None => true,
                Some((_, _, next)) => next
                    .chars()
                    .next()
                    .map(|c| c.is_uppercase() || c.is_ascii_digit() || matches!(c, '"' | '“' | '(' | '\''))
                    .unwrap_or(false),
            };
            if next_starts_sentence {
                out.push((sent_start.take().unwrap(), last_end));
                i = j;
                continue;
            }
        }
        i += 1;
    }
    if let Some(s) = sent_start {
        out.push((s, tokens.last().map(|t| t.1).unwrap_or(s)));
    }
    out
}

fn is_punct_text(t: &str) -> bool {
    !t.chars().any(|c| c.is_alphanumeric())
}

fn is_numeric(t: &str) -> bool {
    let body = t.trim_end_matches('s');
    !body.is_empty()
        && body.chars().any(|c| c.is_ascii_digit())
        && body.chars().all(|c| c.is_ascii_digit() || c == ',' || c == '.' || c == '-' || c == '/')
}

fn is_capitalized(t: &str) -> bool {
    t.chars().next().map(|c| c.is_uppercase()).unwrap_or(false)
}

fn looks_like_past_participle(lower: &str) -> bool {
    lower.ends_with("ed")
        || lower.ends_with("en")
        || lex::irregular_verb_lemma(lower).is_some() && !lex::is_base_verb(lower)
}

/// Suffix-driven guess for words missing from every lexicon.
fn guess_open_class(lower: &str, prev: Option<Pos>) -> Pos {
    let after_nominal_modifier = matches!(prev, Some(Pos::Det) | Some(Pos::Adj));
    if lower.len() > 4 && lower.ends_with("ly") {
        return Pos::Adv;
    }
    if lower.len() > 4 && lower.ends_with("ing") {
        return if after_nominal_modifier { Pos::Noun } else { Pos::Verb };
    }
    if lower.len() > 4 && lower.ends_with("ed") {
        return if after_nominal_modifier { Pos::Adj } else { Pos::Verb };
    }
    const NOUN_SUFFIXES: &[&str] = &[
        "tion", "sion", "ment", "ness", "ity", "ship", "ism", "ist", "ance", "ence", "er", "or",
        "age", "ure", "dom", "hood", "ery", "logy", "graphy",
    ];
    const ADJ_SUFFIXES: &[&str] = &[
        "ous", "ful", "ive", "able", "ible", "ical", "ic", "ish", "less", "ary", "ant", "ent",
        "ial", "ian", "ese", "al",
    ];
    const VERB_SUFFIXES: &[&str] = &["ize", "ise", "ify"];
    if NOUN_SUFFIXES.iter().any(|s| lower.len() > s.len() + 2 && lower.ends_with(s)) {
        return Pos::Noun;
    }
    if ADJ_SUFFIXES.iter().any(|s| lower.len() > s.len() + 2 && lower.ends_with(s)) {
        return Pos::Adj;
    }
    if VERB_SUFFIXES.iter().any(|s| lower.len() > s.len() + 2 && lower.ends_with(s)) {
        return Pos::Verb;
    }
    Pos::Noun
}

fn is_known_lowercase(lower: &str) -> bool {
    lex::pos_of_closed(lower).is_some()
        || lex::is_adverb(lower)
        || lex::is_interjection(lower)
        || lex::is_number_word(lower)
        || lex::is_ordinal(lower)
        || lex::is_adjective(lower)
        || lex::verb_lemma(lower).is_some()
}

/// Lexicon + suffix + left-context tagger with a right-context repair pass.
pub(crate) fn tag(texts: &[String]) -> Vec<Pos> {
    let n = texts.len();
    let lowers: Vec<String> = texts.iter().map(|t| t.to_lowercase().replace('’', "'")).collect();
    let mut tags: Vec<Pos> = Vec::with_capacity(n);

    for i in 0..n {
        let t = &texts[i];
        let w = lowers[i].as_str();
        let prev = tags.last().copied();
        let next = lowers.get(i + 1).map(|s| s.as_str());
        let next_cap = texts.get(i + 1).map(|s| is_capitalized(s)).unwrap_or(false);
        let sentence_initial = i == 0
            || matches!(texts[i - 1].as_str(), "\"" | "“" | "(" | "'" | "‘")
                && i == 1;

        let pos = if matches!(w, "$" | "%" | "&" | "#" | "+" | "=" | "@" | "£" | "€" | "<" | ">")
        {
            if w == "&" {
                Pos::Cconj
            } else {
                Pos::Sym
            }
        } else if w == "'s" || w == "'" {
            // possessive after a nominal, otherwise a reduced "is"
            match prev {
                Some(Pos::Noun | Pos::Propn | Pos::Num) if w == "'s" && next.map(|n| !is_punct_text(n)).unwrap_or(false)
                    && next.map(|n| lex::pos_of_closed(n) != Some(Pos::Det)).unwrap_or(true) =>
                {
                    Pos::Part
                }
                _ if w == "'" => Pos::Part,
                _ => Pos::Aux,
            }
        } else if is_punct_text(w) {
            Pos::Punct
        } else if lex::is_ordinal(w) && w.chars().next().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            Pos::Adj
        } else if is_numeric(w) {
            Pos::Num
        } else if w == "may" && (next.map(is_numeric).unwrap_or(false) || (!sentence_initial && is_capitalized(t))) {
            Pos::Propn
        } else if is_capitalized(t) && !sentence_initial && !(is_known_lowercase(w) && lex::pos_of_closed(w).is_some()) {
            if w == "i" { Pos::Pron } else { Pos::Propn }
        } else if is_capitalized(t) && sentence_initial && !is_known_lowercase(w) {
            if next_cap || lex::is_first_name(w) || lex::is_gpe(w) {
                Pos::Propn
            } else {
                match guess_open_class(w, prev) {
                    Pos::Noun => Pos::Propn,
                    other => other,
                }
            }
        } else if let Some(closed) = lex::pos_of_closed(w) {
            match (w, closed) {
                ("to", _) => {
                    if next.map(|n| lex::is_base_verb(n) || lex::irregular_verb_lemma(n) == Some("be") && n == "be").unwrap_or(false) {
                        Pos::Part
                    } else {
                        Pos::Adp
                    }
                }
                ("that", _) => match prev {
                    Some(Pos::Verb) => Pos::Sconj,
                    Some(Pos::Noun | Pos::Propn) => Pos::Pron,
                    _ => Pos::Det,
                },
                ("no", _) if next.map(is_punct_text).unwrap_or(true) => Pos::Intj,
                ("one", _) => match next {
                    Some(n) if !is_punct_text(n) && lex::pos_of_closed(n).is_none() && n != "of" => Pos::Num,
                    _ => Pos::Pron,
                },
                ("there", _) if !next.map(|n| lex::irregular_verb_lemma(n) == Some("be")).unwrap_or(false) => Pos::Adv,
                ("have" | "has" | "had" | "having" | "do" | "does" | "did", _) => {
                    // auxiliary only when a verb follows (possibly after an adverb/negation)
                    let mut j = i + 1;
                    while j < n && (lowers[j] == "not" || lowers[j] == "n't" || lex::is_adverb(&lowers[j])) {
                        j += 1;
                    }
                    let verb_follows = lowers
                        .get(j)
                        .map(|n| looks_like_past_participle(n) || lex::is_base_verb(n))
                        .unwrap_or(false);
                    if verb_follows || (matches!(w, "do" | "does" | "did") && j < n && matches!(tags_guess_pron(&lowers[j]), true)) {
                        Pos::Aux
                    } else {
                        Pos::Verb
                    }
                }
                _ => closed,
            }
        } else if lex::is_ordinal(w) {
            Pos::Adj
        } else if lex::is_number_word(w) {
            Pos::Num
        } else if lex::is_interjection(w) && (i == 0 || next.map(is_punct_text).unwrap_or(true)) {
            Pos::Intj
        } else if lex::is_adverb(w) {
            Pos::Adv
        } else if lex::is_adjective(w) && !(matches!(prev, Some(Pos::Det)) && next.map(is_punct_text).unwrap_or(true) && lex::verb_lemma(w).is_some()) {
            Pos::Adj
        } else if let Some(_lemma) = lex::verb_lemma(w) {
            disambiguate_verb(w, prev, next)
        } else {
            guess_open_class(w, prev)
        };
        tags.push(pos);
    }

    // a clause needs a verb: promote the first -s/-ed word after a nominal
    if !tags.iter().any(|t| matches!(t, Pos::Verb | Pos::Aux)) {
        for i in 1..n.saturating_sub(1) {
            let w = &lowers[i];
            let inflected = (w.ends_with('s') && !w.ends_with("ss")) || w.ends_with("ed");
            if inflected
                && tags[i] == Pos::Noun
                && matches!(tags[i - 1], Pos::Noun | Pos::Propn | Pos::Pron)
                && matches!(tags[i + 1], Pos::Det | Pos::Adj | Pos::Noun | Pos::Propn | Pos::Num | Pos::Pron | Pos::Adp)
            {
                tags[i] = Pos::Verb;
                break;
            }
        }
    }

    // right-context repairs
    for i in 0..n {
        if lowers[i] == "to" && tags[i] == Pos::Adp && tags.get(i + 1) == Some(&Pos::Verb)
            && lex::verb_lemma(&lowers[i + 1]).as_deref() == Some(lowers[i + 1].as_str())
        {
            tags[i] = Pos::Part;
        }
        if tags[i] == Pos::Part && lowers[i] == "to" {
            if let Some(next) = tags.get_mut(i + 1) {
                if *next == Pos::Noun && lex::is_base_verb(&lowers[i + 1]) {
                    *next = Pos::Verb;
                }
            }
        }
    }
    tags
}

fn tags_guess_pron(w: &str) -> bool {
    lex::pos_of_closed(w) == Some(Pos::Pron) || w == "the"
}

fn disambiguate_verb(w: &str, prev: Option<Pos>, next: Option<&str>) -> Pos {
    let is_base = lex::is_base_verb(w);
    let ends_s = w.ends_with('s') && !w.ends_with("ss");
    let participle = looks_like_past_participle(w) && !is_base;
    let gerund = w.ends_with("ing");
    match prev {
        Some(Pos::Det) | Some(Pos::Adj) => {
            if participle {
                Pos::Adj
            } else {
                Pos::Noun
            }
        }
        Some(Pos::Pron) if w.ends_with("ing") => Pos::Verb,
        Some(Pos::Aux) | Some(Pos::Part) => Pos::Verb,
        Some(Pos::Noun) | Some(Pos::Propn) | Some(Pos::Pron) => {
            if is_base && !ends_s && next.map(|n| n == "of").unwrap_or(false) {
                Pos::Noun
            } else {
                Pos::Verb
            }
        }
        Some(Pos::Adp) if gerund => Pos::Verb,
        Some(Pos::Adp) | Some(Pos::Num) => {
            if participle || gerund {
                Pos::Verb
            } else {
                Pos::Noun
            }
        }
        _ => {
            if participle || gerund || !is_base {
                Pos::Verb
            } else if next.map(|n| lex::pos_of_closed(n) == Some(Pos::Det)).unwrap_or(false) {
                Pos::Verb
            } else {
                Pos::Noun
            }
        }
    }
}

fn is_year(t: &str) -> bool {
    t.len() == 4
        && t.chars().all(|c| c.is_ascii_digit())
        && (1000..=2099).contains(&t.parse::<u32>().unwrap_or(0))
}

fn is_decade(t: &str) -> bool {
    t.len() == 5 && t.ends_with('s') && t[..4].chars().all(|c| c.is_ascii_digit())
}

/// Gazetteer and shape based entity typing; returns one label per token.
pub(crate) fn recognize_entities(texts: &[String], tags: &[Pos]) -> Vec<String> {
    let n = texts.len();
    let lowers: Vec<String> = texts.iter().map(|t| t.to_lowercase()).collect();
    let mut labels = vec![NO_ENTITY.to_string(); n];
    let set = |labels: &mut Vec<String>, s: usize, e: usize, l: &str| {
        for lab in labels.iter_mut().take(e).skip(s) {
            *lab = l.to_string();
        }
    };

    // dates: [weekday ,] month [day] [, year]; ordinal century; bare years and decades
    let mut i = 0;
    while i < n {
        let w = lowers[i].as_str();
        if lex::is_month(w) && (tags[i] == Pos::Propn || is_capitalized(&texts[i])) {
            let s = if i >= 2 && texts[i - 1] == "," && lex::is_weekday(&lowers[i - 2]) { i - 2 } else { i };
            let mut e = i + 1;
            if e < n && is_numeric(&lowers[e]) && !is_year(&lowers[e]) {
                e += 1;
            }
            if e + 1 < n && texts[e] == "," && is_year(&lowers[e + 1]) {
                e += 2;
            } else if e < n && is_year(&lowers[e]) {
                e += 1;
            }
            set(&mut labels, s, e, "DATE");
            i = e;
            continue;
        }
        if lex::is_weekday(w) || is_year(w) || is_decade(w) {
            let s = if i > 0 && lowers[i - 1] == "the" && is_decade(w) { i } else { i };
            set(&mut labels, s, i + 1, "DATE");
            i += 1;
            continue;
        }
        if lex::is_ordinal(w) && i + 1 < n && matches!(lowers[i + 1].as_str(), "century" | "centuries") {
            set(&mut labels, i, i + 2, "DATE");
            i += 2;
            continue;
        }
        i += 1;
    }

    // money, percent, cardinal, ordinal
    let mut i = 0;
    while i < n {
        if labels[i] != NO_ENTITY {
            i += 1;
            continue;
        }
        let w = lowers[i].as_str();
        if matches!(w, "$" | "£" | "€") && i + 1 < n && tags[i + 1] == Pos::Num {
            let mut e = i + 2;
            while e < n && tags[e] == Pos::Num && lex::is_number_word(&lowers[e]) {
                e += 1;
            }
            set(&mut labels, i, e, "MONEY");
            i = e;
            continue;
        }
        if tags[i] == Pos::Num {
            let mut e = i + 1;
            while e < n && tags[e] == Pos::Num && labels[e] == NO_ENTITY {
                e += 1;
            }
            if e < n && matches!(lowers[e].as_str(), "%" | "percent" | "per") {
                let end = if lowers[e] == "per" && e + 1 < n && lowers[e + 1] == "cent" { e + 2 } else { e + 1 };
                set(&mut labels, i, end, "PERCENT");
                i = end;
                continue;
            }
            if e < n && matches!(lowers[e].as_str(), "dollars" | "pounds" | "euros" | "yen") {
                set(&mut labels, i, e + 1, "MONEY");
                i = e + 1;
                continue;
            }
            set(&mut labels, i, e, "CARDINAL");
            i = e;
            continue;
        }
        if lex::is_ordinal(w) && tags[i] == Pos::Adj {
            set(&mut labels, i, i + 1, "ORDINAL");
        }
        i += 1;
    }

    // proper-noun runs, optionally joined by "of"/"for"/"de"/"the" between capitalized words
    let mut i = 0;
    while i < n {
        if tags[i] != Pos::Propn || labels[i] != NO_ENTITY {
            i += 1;
            continue;
        }
        let s = i;
        let mut e = i + 1;
        loop {
            if e < n && tags[e] == Pos::Propn && labels[e] == NO_ENTITY {
                e += 1;
                continue;
            }
            if e + 1 < n
                && matches!(lowers[e].as_str(), "of" | "for" | "de" | "von" | "van" | "da" | "del")
                && tags[e + 1] == Pos::Propn
                && labels[e + 1] == NO_ENTITY
            {
                e += 2;
                continue;
            }
            if e + 2 < n
                && lowers[e] == "of"
                && lowers[e + 1] == "the"
                && tags[e + 2] == Pos::Propn
            {
                e += 3;
                continue;
            }
            break;
        }
        let label = entity_type(&lowers, s, e);
        set(&mut labels, s, e, label);
        i = e;
    }
    labels
}

fn entity_type(lowers: &[String], s: usize, e: usize) -> &'static str {
    let words = &lowers[s..e];
    if words.iter().any(|w| lex::is_event_cue(w)) {
        return "EVENT";
    }
    if words.iter().any(|w| lex::is_org_cue(w)) {
        return "ORG";
    }
    if words.iter().any(|w| lex::is_loc_cue(w)) {
        return "LOC";
    }
    if words.iter().all(|w| lex::is_gpe(w) || w == "of" || w == "the") {
        return "GPE";
    }
    if s > 0 && lex::is_title(&lowers[s - 1]) {
        return "PERSON";
    }
    if lex::is_title(&words[0]) || lex::is_first_name(&words[0]) {
        return "PERSON";
    }
    let raw_len = words.len();
    if raw_len == 1 && words[0].chars().count() <= 5 && words[0] == words[0].to_uppercase() {
        return "ORG";
    }
    if words.iter().any(|w| matches!(w.as_str(), "of" | "for" | "the")) {
        return "ORG";
    }
    if raw_len == 1 && (words[0].ends_with("ian") || words[0].ends_with("ese") || words[0].ends_with("ish")) {
        return "NORP";
    }
    "PERSON"
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UnitKind {
    Noun,
    Verb,
    Adp,
    Coord,
    Subord,
    Rel,
    Adv,
    Punct,
    Other,
}

#[derive(Debug, Clone, Copy)]
struct Unit {
    kind: UnitKind,
    start: usize,
    end: usize,
    head: usize,
    /// verb group with an auxiliary, or marked by infinitival "to"
    has_aux: bool,
    infinitival: bool,
}

fn group_units(lowers: &[String], tags: &[Pos]) -> Vec<Unit> {
    let n = tags.len();
    let mut units = Vec::new();
    let mut i = 0;
    while i < n {
        let start = i;
        match tags[i] {
            Pos::Det | Pos::Adj | Pos::Num | Pos::Noun | Pos::Propn | Pos::Pron
                if !(tags[i] == Pos::Pron
                    && matches!(lowers[i].as_str(), "who" | "which" | "that" | "whom")
                    && i > 0
                    && matches!(tags[i - 1], Pos::Noun | Pos::Propn | Pos::Punct)) =>
            {
                let mut last_nominal = None;
                let mut j = i;
                while j < n {
                    let fits = match tags[j] {
                        Pos::Det => j == start || last_nominal.is_none(),
                        Pos::Pron => j == start,
                        Pos::Adj | Pos::Num | Pos::Noun | Pos::Propn => {
                            // a bare pronoun closes its phrase
                            !(j > start && tags[start] == Pos::Pron && !lex::is_possessive_pronoun(&lowers[start]))
                        }
                        Pos::Part => lowers[j] == "'s" || lowers[j] == "'",
                        _ => false,
                    };
                    if !fits {
                        break;
                    }
                    if matches!(tags[j], Pos::Noun | Pos::Propn | Pos::Num | Pos::Pron) {
                        last_nominal = Some(j);
                    }
                    j += 1;
                }
                let end = match last_nominal {
                    Some(l) => l + 1,
                    None => j.max(start + 1),
                };
                let head = last_nominal.unwrap_or(end - 1);
                let kind = if last_nominal.is_some() { UnitKind::Noun } else { UnitKind::Other };
                units.push(Unit { kind, start, end, head, has_aux: false, infinitival: false });
                i = end;
            }
            Pos::Aux | Pos::Verb | Pos::Part if tags[i] != Pos::Part || lowers[i] == "to" || lowers[i] == "not" || lowers[i] == "n't" => {
                let mut j = i;
                let mut verb = None;
                let mut last_aux = None;
                let mut infinitival = false;
                while j < n {
                    match tags[j] {
                        Pos::Aux => {
                            if verb.is_some() {
                                break;
                            }
                            last_aux = Some(j);
                        }
                        Pos::Part if matches!(lowers[j].as_str(), "not" | "n't" | "to") => {
                            if verb.is_some() {
                                break;
                            }
                            if lowers[j] == "to" {
                                infinitival = true;
                            }
                        }
                        Pos::Adv if verb.is_none() && (j + 1 < n && matches!(tags[j + 1], Pos::Verb | Pos::Aux | Pos::Adv)) => {}
                        Pos::Verb => {
                            if verb.is_some() {
                                break;
                            }
                            verb = Some(j);
                        }
                        _ => break,
                    }
                    j += 1;
                }
                let end = j.max(start + 1);
                let head = verb.or(last_aux).unwrap_or(start);
                let kind = if verb.is_some() || last_aux.is_some() { UnitKind::Verb } else { UnitKind::Other };
                units.push(Unit {
                    kind,
                    start,
                    end,
                    head,
                    has_aux: last_aux.is_some(),
                    infinitival,
                });
                i = end;
            }
            other => {
                let kind = match other {
                    Pos::Adp => UnitKind::Adp,
                    Pos::Cconj => UnitKind::Coord,
                    Pos::Sconj => UnitKind::Subord,
                    Pos::Pron => UnitKind::Rel,
                    Pos::Adv => UnitKind::Adv,
                    Pos::Punct => UnitKind::Punct,
                    _ => UnitKind::Other,
                };
                units.push(Unit { kind, start, end: i + 1, head: i, has_aux: false, infinitival: false });
                i += 1;
            }
        }
    }
    units
}

/// Head-rule dependency parse. Returns the head index of every token; the
/// root points at itself.
pub(crate) fn parse(texts: &[String], tags: &[Pos], ner: &[String]) -> Vec<usize> {
    let n = tags.len();
    if n == 0 {
        return Vec::new();
    }
    let lowers: Vec<String> = texts.iter().map(|t| t.to_lowercase()).collect();
    let units = group_units(&lowers, tags);
    let m = units.len();

    let prev_content = |u: usize| -> Option<usize> {
        (0..u).rev().find(|&k| units[k].kind != UnitKind::Punct)
    };
    let is_reduced_relative = |u: usize| -> bool {
        let unit = &units[u];
        unit.kind == UnitKind::Verb
            && !unit.has_aux
            && !unit.infinitival
            && looks_like_past_participle(&lowers[unit.head])
            && u > 0
            && units[u - 1].kind == UnitKind::Noun
            && units
                .get(u + 1)
                .map(|next| next.kind == UnitKind::Adp && lowers[next.head] == "by")
                .unwrap_or(false)
    };
    let is_dependent_verb = |u: usize| -> bool {
        if units[u].infinitival || is_reduced_relative(u) {
            return true;
        }
        matches!(
            prev_content(u).map(|p| units[p].kind),
            Some(UnitKind::Subord) | Some(UnitKind::Rel)
        )
    };

    let root_unit = (0..m)
        .find(|&u| units[u].kind == UnitKind::Verb && !is_dependent_verb(u))
        .or_else(|| (0..m).find(|&u| units[u].kind == UnitKind::Verb))
        .or_else(|| (0..m).find(|&u| units[u].kind == UnitKind::Noun))
        .or_else(|| (0..m).find(|&u| units[u].kind != UnitKind::Punct))
        .unwrap_or(0);
    let root = units[root_unit].head;

    let mut heads = vec![usize::MAX; n];
    for unit in &units {
        for k in unit.start..unit.end {
            if k != unit.head {
                heads[k] = unit.head;
            }
        }
    }
    heads[root] = root;

    let nearest_verb_before = |u: usize| (0..u).rev().find(|&k| units[k].kind == UnitKind::Verb);
    let nearest_verb_after = |u: usize| (u + 1..m).find(|&k| units[k].kind == UnitKind::Verb);
    let nearest_noun_before = |u: usize| (0..u).rev().find(|&k| units[k].kind == UnitKind::Noun);

    for u in 0..m {
        if u == root_unit {
            continue;
        }
        let unit = units[u];
        let head_of = |k: usize| units[k].head;
        let attach = match unit.kind {
            UnitKind::Punct => root,
            UnitKind::Verb => {
                let prev = prev_content(u);
                if is_reduced_relative(u) {
                    head_of(u - 1)
                } else if let Some(p) = prev.filter(|&p| units[p].kind == UnitKind::Rel) {
                    // relative pronoun hangs off this verb, verb off the modified noun
                    heads[units[p].head] = unit.head;
                    nearest_noun_before(p).map(head_of).unwrap_or(root)
                } else if let Some(p) = prev.filter(|&p| units[p].kind == UnitKind::Subord) {
                    heads[units[p].head] = unit.head;
                    root
                } else if let Some(p) = prev.filter(|&p| units[p].kind == UnitKind::Coord) {
                    heads[units[p].head] = unit.head;
                    nearest_verb_before(p).map(head_of).unwrap_or(root)
                } else if unit.infinitival {
                    nearest_verb_before(u)
                        .or_else(|| nearest_noun_before(u))
                        .map(head_of)
                        .unwrap_or(root)
                } else {
                    root
                }
            }
            UnitKind::Noun => {
                let prev = prev_content(u);
                match prev.map(|p| (p, units[p].kind)) {
                    Some((p, UnitKind::Adp)) => {
                        heads[units[p].head] = unit.head;
                        let inside_entity = ner[units[p].head] != NO_ENTITY
                            && ner[units[p].head] == ner[unit.head]
                            && p > 0
                            && ner[units[p - 1].head] == ner[unit.head];
                        let noun_before = nearest_noun_before(p);
                        let verb_before = nearest_verb_before(p);
                        let prefer_noun = lowers[units[p].head] == "of"
                            || inside_entity
                            || verb_before.is_none();
                        if prefer_noun {
                            noun_before.or(verb_before).map(head_of).unwrap_or(root)
                        } else {
                            verb_before.or(noun_before).map(head_of).unwrap_or(root)
                        }
                    }
                    Some((p, UnitKind::Coord)) => {
                        heads[units[p].head] = unit.head;
                        nearest_noun_before(p)
                            .filter(|&nb| nearest_verb_before(p).map(|vb| nb > vb).unwrap_or(true) || units[nb].end + 2 >= units[p].start)
                            .or_else(|| nearest_noun_before(p))
                            .map(head_of)
                            .unwrap_or(root)
                    }
                    _ => {
                        let next_verb = nearest_verb_after(u);
                        let prev_verb = nearest_verb_before(u);
                        let subject_slot = match (next_verb, prev_verb) {
                            (Some(nv), Some(pv)) => {
                                // subject of a later clause if only adverbs/punct separate us
                                (u + 1..nv).all(|k| matches!(units[k].kind, UnitKind::Adv | UnitKind::Punct))
                                    && !(units[pv].end == unit.start)
                            }
                            (Some(_), None) => true,
                            _ => false,
                        };
                        if subject_slot {
                            head_of(next_verb.unwrap())
                        } else if let Some(pv) = prev_verb {
                            head_of(pv)
                        } else {
                            root
                        }
                    }
                }
            }
            UnitKind::Adv => {
                let after = nearest_verb_after(u).filter(|&k| k == u + 1);
                after
                    .or_else(|| nearest_verb_before(u))
                    .map(head_of)
                    .unwrap_or(root)
            }
            UnitKind::Other => nearest_verb_before(u)
                .or_else(|| nearest_noun_before(u))
                .map(head_of)
                .unwrap_or(root),
            UnitKind::Adp | UnitKind::Coord | UnitKind::Subord | UnitKind::Rel => {
                if heads[unit.head] != usize::MAX {
                    continue;
                }
                // stranded function word: hang it on whatever follows, else the root
                (u + 1..m)
                    .find(|&k| matches!(units[k].kind, UnitKind::Noun | UnitKind::Verb))
                    .map(head_of)
                    .unwrap_or(root)
            }
        };
        if heads[unit.head] == usize::MAX || unit.kind != UnitKind::Adp {
            if heads[unit.head] == usize::MAX || matches!(unit.kind, UnitKind::Noun | UnitKind::Verb | UnitKind::Punct | UnitKind::Adv | UnitKind::Other) {
                heads[unit.head] = attach;
            }
        }
    }
    heads[root] = root;
    for h in heads.iter_mut() {
        if *h == usize::MAX {
            *h = root;
        }
    }
    break_cycles(&mut heads, root);
    heads
}

fn break_cycles(heads: &mut [usize], root: usize) {
    let n = heads.len();
    for i in 0..n {
        let mut cur = i;
        let mut steps = 0;
        while cur != root {
            if heads[cur] == cur || steps > n {
                heads[cur] = root;
                break;
            }
            cur = heads[cur];
            steps += 1;
        }
    }
    heads[root] = root;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotate::{annotate, dependency_distance};

    fn words(text: &str) -> Vec<String> {
        tokenize_words(text).into_iter().map(|t| t.2).collect()
    }

    #[test]
    fn tokenizer_splits_punct_and_contractions() {
        assert_eq!(words("Hello."), vec!["Hello", "."]);
        assert_eq!(words("He didn't go."), vec!["He", "did", "n't", "go", "."]);
        assert_eq!(words("Sharon's movie, (2010)"), vec!["Sharon", "'s", "movie", ",", "(", "2010", ")"]);
        assert_eq!(words("It cost $5,000 in the U.S."), vec!["It", "cost", "$", "5,000", "in", "the", "U.S."]);
        assert_eq!(words("about 45%"), vec!["about", "45", "%"]);
    }

    #[test]
    fn tokenizer_offsets_are_char_exact() {
        let text = "Beyoncé won \u{2014} twice.";
        let chars: Vec<char> = text.chars().collect();
        for (s, e, t) in tokenize_words(text) {
            assert_eq!(chars[s..e].iter().collect::<String>(), t);
        }
    }

    #[test]
    fn sentence_splitting() {
        let text = "Mr. Smith went to Paris. He liked it! Did he stay? Yes.";
        let spans = split_sentences(text);
        let chars: Vec<char> = text.chars().collect();
        let sents: Vec<String> = spans.iter().map(|&(s, e)| chars[s..e].iter().collect()).collect();
        assert_eq!(sents, vec!["Mr. Smith went to Paris.", "He liked it!", "Did he stay?", "Yes."]);
    }

    #[test]
    fn selina_parse() {
        let s = annotate(&RuleAnnotator, "Selina left her hometown at the age of 18.").unwrap();
        let root = s.root().unwrap();
        assert_eq!(s.tokens[root].text, "left");
        assert_eq!(s.tokens[root].lemma, "leave");
        assert_eq!(s.tokens[0].pos, Pos::Propn);
        assert_eq!(s.tokens[0].ner, "PERSON");
        assert!(s.chunks.iter().any(|c| c.text == "her hometown"));
        assert!(s.chunks.iter().any(|c| c.text.contains("age")));
        // "Selina" is the subject of "left"
        assert_eq!(dependency_distance(&s, 0, root).unwrap(), 1);
    }

    #[test]
    fn award_entity_chunk() {
        let text = "The fight scene finale between Sharon and the character played by Ali Larter, \
                    from the movie Obsessed, won the 2010 MTV Movie Award for Best Fight.";
        let s = annotate(&RuleAnnotator, text).unwrap();
        assert!(s.chunks.iter().any(|c| c.text == "MTV Movie Award for Best Fight"));
        assert!(s.chunks.iter().any(|c| c.text == "Ali Larter"));
        assert_eq!(s.tokens[s.root().unwrap()].text, "won");
    }

    #[test]
    fn hello_has_two_tokens() {
        let s = annotate(&RuleAnnotator, "Hello.").unwrap();
        assert_eq!(s.tokens.len(), 2);
        assert_eq!(s.tokens[0].text, "Hello");
    }

    #[test]
    fn dates_and_numbers() {
        let s = annotate(&RuleAnnotator, "The war ended on May 8, 1945 with 20 million dead.").unwrap();
        let ner: Vec<&str> = s.tokens.iter().map(|t| t.ner.as_str()).collect();
        assert_eq!(&ner[4..8], &["DATE", "DATE", "DATE", "DATE"]);
        assert_eq!(ner[9], "CARDINAL");
    }
}
