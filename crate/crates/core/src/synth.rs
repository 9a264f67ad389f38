//! Deterministic template corpus for demos and tests when no real corpus is
//! available. Sentences mix common words with generated surnames so that a
//! reduced vocabulary leaves some words to be copied.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::QaSample;

const FIRST: &[&str] = &[
    "John", "Mary", "Peter", "Anna", "George", "Sarah", "Thomas", "Linda", "Henry", "Maria",
    "Edward", "Susan", "Robert", "Victoria", "Paul", "Elizabeth",
];
const SYLLABLES: &[&str] = &["ka", "lo", "mi", "ren", "dor", "vas", "tel", "bri", "son", "mar", "ul", "zen"];
const CITIES: &[&str] = &[
    "Paris", "London", "Berlin", "Madrid", "Tokyo", "Chicago", "Boston", "Moscow", "Beijing", "Rome",
];
const COUNTRIES: &[(&str, &str)] = &[
    ("Paris", "France"),
    ("Berlin", "Germany"),
    ("Madrid", "Spain"),
    ("Tokyo", "Japan"),
    ("Rome", "Italy"),
    ("Moscow", "Russia"),
    ("Beijing", "China"),
    ("London", "England"),
];
const ORG_KINDS: &[&str] = &["Company", "University", "Museum", "Society", "Institute"];
const ANIMALS: &[&str] = &["fox", "bear", "goat", "horse", "rabbit", "deer", "wolf", "crow"];
const FOODS: &[&str] = &["apples", "carrots", "fish", "berries", "nuts", "seeds"];
const PLACES: &[&str] = &["river", "forest", "village", "bridge", "lake", "barn"];
const DAYS: &[&str] = &["Monday", "Tuesday", "Friday", "Sunday"];
const REASONS: &[&str] = &["war", "drought", "flood", "famine", "strike"];
const THINGS: &[&str] = &["bridges", "museums", "parks", "theaters", "libraries"];
const EVENTS: &[&str] = &["siege", "drought", "conflict", "expedition", "festival"];

fn pick<'a, R: Rng>(rng: &mut R, xs: &'a [&'a str]) -> &'a str {
    xs.choose(rng).expect("non-empty list")
}

fn surname<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(2..=3);
    let s: String = (0..n).map(|_| pick(rng, SYLLABLES)).collect();
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().collect::<String>() + c.as_str())
        .unwrap_or_default()
}

fn year<R: Rng>(rng: &mut R) -> String {
    rng.gen_range(1700..2000).to_string()
}

/// One context with its (question, answer) pairs.
fn passage<R: Rng>(rng: &mut R) -> (String, Vec<(String, String)>) {
    let person = format!("{} {}", pick(rng, FIRST), surname(rng));
    let city = pick(rng, CITIES);
    let y = year(rng);
    match rng.gen_range(0..6) {
        0 => (
            format!("{person} was born in {city} in {y}."),
            vec![
                (format!("Where was {person} born?"), city.to_string()),
                (format!("When was {person} born?"), y.clone()),
                (format!("Who was born in {city} in {y}?"), person.clone()),
            ],
        ),
        1 => {
            let org = format!("{} {}", surname(rng), pick(rng, ORG_KINDS));
            (
                format!("{person} founded the {org} in {city} in {y}."),
                vec![
                    (format!("Who founded the {org}?"), person.clone()),
                    (format!("Where did {person} found the {org}?"), city.to_string()),
                    (format!("What did {person} found in {y}?"), format!("the {org}")),
                ],
            )
        }
        2 => {
            let (animal, food, place, day) = (pick(rng, ANIMALS), pick(rng, FOODS), pick(rng, PLACES), pick(rng, DAYS));
            let n = rng.gen_range(2..40);
            (
                format!("The {animal} ate {n} {food} near the {place} on {day}."),
                vec![
                    (format!("How many {food} did the {animal} eat?"), n.to_string()),
                    (format!("What did the {animal} eat near the {place}?"), format!("{n} {food}")),
                    (format!("Where did the {animal} eat the {food}?"), format!("the {place}")),
                ],
            )
        }
        3 => {
            let (cap, country) = *COUNTRIES.choose(rng).expect("non-empty");
            let n = rng.gen_range(3..90);
            let thing = pick(rng, THINGS);
            (
                format!("{cap} is the capital of {country} and has {n} {thing}."),
                vec![
                    (format!("What is the capital of {country}?"), cap.to_string()),
                    (format!("Which country has {cap} as its capital?"), country.to_string()),
                    (format!("How many {thing} does {cap} have?"), n.to_string()),
                ],
            )
        }
        4 => {
            let reason = pick(rng, REASONS);
            (
                format!("{person} moved to {city} because of the {reason} in {y}."),
                vec![
                    (format!("Why did {person} move to {city}?"), format!("the {reason}")),
                    (format!("When did {person} move to {city}?"), y.clone()),
                    (format!("What city did {person} move to?"), city.to_string()),
                ],
            )
        }
        _ => {
            let event = pick(rng, EVENTS);
            let n = rng.gen_range(2..30);
            (
                format!("The {event} of {city} lasted {n} years and ended in {y}."),
                vec![
                    (format!("How long did the {event} of {city} last?"), format!("{n} years")),
                    (format!("When did the {event} of {city} end?"), y.clone()),
                    (format!("What lasted {n} years?"), format!("The {event} of {city}")),
                ],
            )
        }
    }
}

/// `n` QA samples from roughly n/3 template passages.
pub fn synthetic_corpus(n: usize, seed: u64) -> Vec<QaSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut p = 0;
    while out.len() < n {
        let (context, qas) = passage(&mut rng);
        for (k, (question, answer)) in qas.into_iter().enumerate() {
            if out.len() == n {
                break;
            }
            let answer_start = context
                .find(&answer)
                .map(|b| context[..b].chars().count())
                .expect("template answers occur in their passage");
            out.push(QaSample {
                id: format!("synth-{p}-{k}"),
                context_id: format!("synth-{p}"),
                context: context.clone(),
                question,
                answer_text: answer,
                answer_start,
            });
        }
        p += 1;
    }
    out
}

/// `n` unlabeled template sentences.
pub fn synthetic_sentences(n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| passage(&mut rng).0).collect()
}
