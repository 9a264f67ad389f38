use std::collections::HashMap;

const ARTICLES: [&str; 3] = ["a", "an", "the"];

/// Extractive-QA answer normalisation: lowercase, strip punctuation, drop
/// articles, split on whitespace.
pub fn normalize_answer(text: &str) -> Vec<String> {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_punctuation() || (!c.is_alphanumeric() && !c.is_whitespace()) { ' ' } else { c })
        .collect();
    cleaned
        .split_whitespace()
        .filter(|w| !ARTICLES.contains(w))
        .map(str::to_string)
        .collect()
}

fn normalize_tokens<S: AsRef<str>>(tokens: &[S]) -> Vec<String> {
    tokens.iter().flat_map(|t| normalize_answer(t.as_ref())).collect()
}

/// Token-level F1 between a gold and a predicted span, after normalisation.
/// If both normalise to nothing the score is 1 when the raw tokens agree.
pub fn span_f1<S: AsRef<str>>(gold: &[S], predicted: &[S]) -> f64 {
    let g = normalize_tokens(gold);
    let p = normalize_tokens(predicted);
    if g.is_empty() && p.is_empty() {
        let raw = |v: &[S]| v.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>();
        return if raw(gold) == raw(predicted) { 1.0 } else { 0.0 };
    }
    if g.is_empty() || p.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, i64> = HashMap::new();
    for t in &g {
        *counts.entry(t).or_default() += 1;
    }
    let mut overlap = 0usize;
    for t in &p {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    // harmonic mean of overlap/|p| and overlap/|g|, in one division
    (2 * overlap) as f64 / (p.len() + g.len()) as f64
}

/// [`span_f1`] on raw strings.
pub fn span_f1_text(gold: &str, predicted: &str) -> f64 {
    span_f1(&[gold], &[predicted])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split(' ').collect()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(span_f1(&toks("a b c"), &toks("a b c")), 1.0);
        assert_eq!(span_f1(&toks("x y"), &toks("z")), 0.0);
        let f = span_f1(&toks("MTV Movie Award for Best Fight"), &toks("Movie Award for Best Fight"));
        assert!((f - 10.0 / 11.0).abs() < 1e-12);
        assert!((f - 0.9091).abs() < 5e-5);
    }

    #[test]
    fn normalisation_and_empty_cases() {
        assert_eq!(span_f1_text("The Beatles!", "beatles"), 1.0);
        assert_eq!(span_f1_text("the", "a"), 0.0);
        assert_eq!(span_f1_text("the", "the"), 1.0);
        assert_eq!(span_f1_text("the", "dog"), 0.0);
        assert_eq!(normalize_answer("U.S. (2001)"), vec!["u", "s", "2001"]);
    }

    /// Counting oracle: overlap = Σ_w min(count_g(w), count_p(w)).
    fn oracle(g: &[String], p: &[String]) -> f64 {
        let mut vocab: Vec<&String> = g.iter().chain(p).collect();
        vocab.sort();
        vocab.dedup();
        let overlap: usize = vocab
            .iter()
            .map(|w| g.iter().filter(|x| x == w).count().min(p.iter().filter(|x| x == w).count()))
            .sum();
        if overlap == 0 {
            return 0.0;
        }
        let (pr, rc) = (overlap as f64 / p.len() as f64, overlap as f64 / g.len() as f64);
        2.0 * pr * rc / (pr + rc)
    }

    proptest! {
        #[test]
        fn agrees_with_counting_oracle(
            g in prop::collection::vec("[b-e]", 1..7),
            p in prop::collection::vec("[b-e]", 1..7),
        ) {
            let f = span_f1(&g, &p);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((f - oracle(&g, &p)).abs() < 1e-12);
            let mut gs = g.clone();
            let mut ps = p.clone();
            gs.sort();
            ps.sort();
            prop_assert_eq!(f == 1.0, gs == ps);
            if g.len() == p.len() {
                prop_assert!((f - span_f1(&p, &g)).abs() < 1e-12);
            }
        }
    }
}
