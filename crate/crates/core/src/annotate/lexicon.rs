//! Word lists backing the rule annotator and the content-word test.

use super::Pos;

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "every", "each", "some", "any", "no",
    "all", "both", "either", "neither", "another", "such", "whichever", "whatever",
];

const PREPOSITIONS: &[&str] = &[
    "of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "onto", "over", "under",
    "about", "after", "before", "during", "between", "among", "amongst", "through", "throughout",
    "against", "without", "within", "upon", "across", "behind", "beyond", "near", "toward",
    "towards", "until", "till", "despite", "via", "per", "like", "than", "as", "around", "along",
    "above", "below", "beneath", "beside", "besides", "inside", "outside", "off", "out", "up",
    "down", "past", "since", "except", "unlike", "amid", "alongside", "following", "including",
    "regarding", "concerning",
];

const COORDINATORS: &[&str] = &["and", "or", "but", "nor", "yet", "&"];

const SUBORDINATORS: &[&str] = &[
    "because", "although", "though", "whereas", "unless", "whether", "if", "while", "whilst",
    "once", "so",
];

const PRONOUNS: &[&str] = &[
    "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them", "my", "your",
    "his", "its", "our", "their", "mine", "yours", "hers", "ours", "theirs", "myself", "yourself",
    "himself", "herself", "itself", "ourselves", "themselves", "yourselves", "who", "whom",
    "whose", "which", "what", "someone", "somebody", "something", "anyone", "anybody",
    "anything", "everyone", "everybody", "everything", "nobody", "nothing", "one", "none",
    "there",
];

const POSSESSIVE_PRONOUNS: &[&str] = &["my", "your", "his", "her", "its", "our", "their", "whose"];

const AUXILIARIES: &[&str] = &[
    "be", "am", "is", "are", "was", "were", "been", "being", "'m", "'re", "have", "has", "had",
    "having", "'ve", "'d", "do", "does", "did", "will", "would", "shall", "should", "can",
    "could", "may", "might", "must", "'ll", "ca", "wo",
];

const ADVERBS: &[&str] = &[
    "very", "also", "too", "often", "always", "never", "ever", "here", "now", "then", "just",
    "only", "even", "still", "already", "soon", "later", "however", "thus", "therefore",
    "almost", "quite", "rather", "when", "where", "why", "how", "again", "once", "twice",
    "together", "ago", "away", "back", "instead", "perhaps", "maybe", "yet", "sometimes",
    "usually", "mostly", "nearly", "far", "well", "eventually", "originally", "first",
    "previously", "currently", "recently", "finally", "else", "further", "furthermore",
    "moreover", "meanwhile", "otherwise", "hence", "abroad", "alone", "especially",
];

const INTERJECTIONS: &[&str] = &["hello", "hi", "oh", "yes", "no", "wow", "hey", "ok", "okay", "please"];

const NUMBER_WORDS: &[&str] = &[
    "zero", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety", "hundred",
    "thousand", "million", "billion", "trillion", "dozen", "dozens", "hundreds", "thousands",
    "millions", "billions",
];

const ORDINAL_WORDS: &[&str] = &[
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth",
    "tenth", "eleventh", "twelfth", "twentieth", "hundredth", "thousandth",
];

/// Adjectives frequent enough that suffix rules would mis-tag them.
const ADJECTIVES: &[&str] = &[
    "old", "new", "good", "great", "large", "small", "big", "last", "best", "many", "few",
    "other", "same", "different", "high", "low", "long", "short", "early", "late", "young",
    "important", "major", "famous", "little", "own", "several", "much", "more", "most", "less",
    "least", "main", "public", "private", "local", "national", "international", "free", "full",
    "whole", "true", "false", "real", "certain", "clear", "close", "common", "entire", "final",
    "former", "general", "hard", "human", "known", "likely", "open", "poor", "popular",
    "possible", "recent", "rich", "right", "wrong", "similar", "single", "social", "special",
    "strong", "weak", "top", "total", "various", "whole", "wide", "best", "better", "worse",
    "worst", "red", "blue", "green", "black", "white", "dark", "light", "hot", "cold", "warm",
    "annual", "official", "original", "ancient", "modern", "northern", "southern", "eastern",
    "western", "central", "foreign", "military", "political", "royal", "greek", "roman",
    "french", "english", "american", "british", "german", "chinese", "european", "african",
    "catholic", "christian", "jewish", "muslim", "able", "available", "due", "past", "next",
    "key", "fine", "huge", "tiny", "vast", "nearby", "only",
];

/// Base-form verbs (regular inflection is handled by suffix rules).
const VERBS: &[&str] = &[
    "be", "have", "do", "say", "go", "get", "make", "know", "think", "take", "see", "come",
    "want", "look", "use", "find", "give", "tell", "work", "call", "try", "ask", "need", "feel",
    "become", "leave", "put", "mean", "keep", "let", "begin", "seem", "help", "show", "hear",
    "play", "run", "move", "live", "believe", "bring", "happen", "write", "provide", "sit",
    "stand", "lose", "pay", "meet", "include", "continue", "set", "learn", "change", "lead",
    "understand", "watch", "follow", "stop", "create", "speak", "read", "allow", "add", "spend",
    "grow", "open", "walk", "win", "offer", "remember", "love", "consider", "appear", "buy",
    "wait", "serve", "die", "send", "expect", "build", "stay", "fall", "cut", "reach", "kill",
    "remain", "suggest", "raise", "pass", "sell", "require", "report", "decide", "pull",
    "release", "found", "establish", "design", "develop", "produce", "publish", "record",
    "receive", "name", "marry", "born", "direct", "star", "join", "form", "hold", "sing",
    "defeat", "invade", "rule", "discover", "invent", "describe", "attend", "study", "teach",
    "own", "contain", "cause", "base", "locate", "situate", "elect", "appoint", "visit",
    "return", "fight", "perform", "compose", "paint", "graduate", "retire", "score", "launch",
    "sign", "die", "eat", "drink", "fly", "drive", "ride", "swim", "sleep", "wear", "break",
    "choose", "draw", "forget", "hide", "hit", "hurt", "lay", "lend", "light", "rise", "seek",
    "shake", "shoot", "sink", "spread", "steal", "strike", "swear", "throw", "wake", "arrive",
    "agree", "announce", "approve", "argue", "claim", "close", "complete", "compete",
    "destroy", "enter", "explain", "fail", "finish", "host", "improve", "increase", "involve",
    "mention", "note", "occur", "operate", "order", "organize", "own", "prefer", "prevent",
    "promote", "protect", "prove", "reduce", "refer", "reflect", "refuse", "remove", "replace",
    "represent", "support", "translate", "travel", "vote", "ban", "capture", "conquer",
    "construct", "control", "cover", "dedicate", "defend", "depict", "earn", "emerge",
    "end", "feature", "flow", "honor", "introduce", "measure", "owe", "place", "rank",
    "reign", "settle", "share", "split", "survive", "surround", "tour", "train", "treat",
    "convert", "store", "produce", "consist", "absorb", "connect", "provide", "adopt",
    "begin", "bear", "carry", "collect", "combine", "consume", "convince", "deliver", "divide",
    "drop", "encourage", "estimate", "examine", "exist", "expand", "extend", "identify",
    "influence", "inherit", "insist", "invest", "kick", "land", "limit", "manage", "mark",
    "name", "observe", "obtain", "oppose", "outline", "plan", "predict", "prepare", "present",
    "print", "rebuild", "recognize", "recommend", "recover", "reject", "relate", "rely",
    "remind", "rename", "renew", "repeat", "reply", "request", "rescue", "resign", "resolve",
    "respond", "restore", "reveal", "review", "separate", "serve", "shape", "sponsor",
    "stretch", "struggle", "submit", "succeed", "suffer", "supply", "suppose", "taste",
    "tend", "transform", "transport", "unite", "vary", "warn", "wish", "wonder", "worry",
];

/// Irregular inflections: (form, lemma).
const IRREGULAR_VERBS: &[(&str, &str)] = &[
    ("am", "be"), ("is", "be"), ("are", "be"), ("was", "be"), ("were", "be"), ("been", "be"),
    ("being", "be"), ("'m", "be"), ("'re", "be"), ("has", "have"), ("had", "have"),
    ("'ve", "have"), ("does", "do"), ("did", "do"), ("done", "do"), ("said", "say"),
    ("went", "go"), ("gone", "go"), ("got", "get"), ("gotten", "get"), ("made", "make"),
    ("knew", "know"), ("known", "know"), ("thought", "think"), ("took", "take"),
    ("taken", "take"), ("saw", "see"), ("seen", "see"), ("came", "come"), ("found", "find"),
    ("gave", "give"), ("given", "give"), ("told", "tell"), ("felt", "feel"),
    ("became", "become"), ("left", "leave"), ("meant", "mean"), ("kept", "keep"),
    ("began", "begin"), ("begun", "begin"), ("showed", "show"), ("shown", "show"),
    ("heard", "hear"), ("ran", "run"), ("brought", "bring"), ("wrote", "write"),
    ("written", "write"), ("sat", "sit"), ("stood", "stand"), ("lost", "lose"),
    ("paid", "pay"), ("met", "meet"), ("led", "lead"), ("understood", "understand"),
    ("spoke", "speak"), ("spoken", "speak"), ("spent", "spend"), ("grew", "grow"),
    ("grown", "grow"), ("won", "win"), ("bought", "buy"), ("sent", "send"), ("built", "build"),
    ("fell", "fall"), ("fallen", "fall"), ("sold", "sell"), ("held", "hold"), ("sang", "sing"),
    ("sung", "sing"), ("taught", "teach"), ("fought", "fight"), ("ate", "eat"),
    ("eaten", "eat"), ("drank", "drink"), ("flew", "fly"), ("flown", "fly"), ("drove", "drive"),
    ("driven", "drive"), ("rode", "ride"), ("swam", "swim"), ("slept", "sleep"),
    ("wore", "wear"), ("worn", "wear"), ("broke", "break"), ("broken", "break"),
    ("chose", "choose"), ("chosen", "choose"), ("drew", "draw"), ("drawn", "draw"),
    ("forgot", "forget"), ("forgotten", "forget"), ("hid", "hide"), ("hidden", "hide"),
    ("laid", "lay"), ("lent", "lend"), ("lit", "light"), ("rose", "rise"), ("risen", "rise"),
    ("sought", "seek"), ("shook", "shake"), ("shot", "shoot"), ("sank", "sink"),
    ("stole", "steal"), ("stolen", "steal"), ("struck", "strike"), ("swore", "swear"),
    ("threw", "throw"), ("thrown", "throw"), ("woke", "wake"), ("born", "bear"),
    ("bore", "bear"), ("split", "split"), ("set", "set"), ("put", "put"), ("cut", "cut"),
    ("let", "let"), ("hit", "hit"), ("hurt", "hurt"), ("read", "read"), ("spread", "spread"),
    ("won't", "will"), ("wo", "will"), ("ca", "can"), ("'ll", "will"), ("'d", "would"),
    ("dealt", "deal"), ("dug", "dig"), ("fed", "feed"), ("fled", "flee"), ("forbade", "forbid"),
    ("froze", "freeze"), ("frozen", "freeze"), ("hung", "hang"), ("lay", "lie"),
    ("overcame", "overcome"), ("rang", "ring"), ("sped", "speed"), ("stuck", "stick"),
    ("swept", "sweep"), ("tore", "tear"), ("torn", "tear"), ("wept", "weep"), ("wound", "wind"),
    ("withdrew", "withdraw"), ("withdrawn", "withdraw"), ("undertook", "undertake"),
];

const IRREGULAR_NOUNS: &[(&str, &str)] = &[
    ("men", "man"), ("women", "woman"), ("children", "child"), ("people", "person"),
    ("feet", "foot"), ("teeth", "tooth"), ("mice", "mouse"), ("geese", "goose"),
    ("data", "datum"), ("criteria", "criterion"), ("phenomena", "phenomenon"),
];

/// Function words that are not caught by closed-class POS tags.
const STOP_WORDS: &[&str] = &[
    "a", "an", "the", "and", "or", "but", "if", "of", "at", "by", "for", "with", "about",
    "to", "from", "in", "on", "be", "am", "is", "are", "was", "were", "been", "being", "have",
    "has", "had", "do", "does", "did", "will", "would", "shall", "should", "can", "could",
    "may", "might", "must", "not", "n't", "no", "so", "than", "too", "very", "just", "also",
    "then", "there", "here", "this", "that", "these", "those", "it", "its", "'s", "s", "as",
    "such", "what", "which", "who", "whom", "whose", "when", "where", "why", "how", "i", "me",
    "my", "we", "our", "you", "your", "he", "him", "his", "she", "her", "they", "them",
    "their", "own", "same", "other", "some", "any", "each", "few", "more", "most", "only",
    "into", "over", "under", "again", "further", "once", "all", "both", "ever", "yet",
];

const MONTHS: &[&str] = &[
    "january", "february", "march", "april", "may", "june", "july", "august", "september",
    "october", "november", "december", "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.",
    "sep.", "sept.", "oct.", "nov.", "dec.",
];

const WEEKDAYS: &[&str] = &[
    "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
];

const TITLES: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "prof.", "sir", "lord", "lady", "king", "queen", "prince",
    "princess", "president", "pope", "saint", "st.", "general", "captain", "emperor",
    "senator", "governor", "bishop", "duke", "mr", "mrs", "ms", "dr",
];

const ORG_CUES: &[&str] = &[
    "university", "inc.", "inc", "corp.", "corporation", "company", "co.", "ltd.", "ltd",
    "association", "party", "club", "council", "institute", "church", "museum", "bank",
    "agency", "department", "committee", "college", "school", "group", "records", "league",
    "army", "navy", "court", "organization", "organisation", "society", "foundation",
    "academy", "union", "ministry", "parliament", "congress", "senate", "band", "orchestra",
    "network", "airlines", "press", "times", "post", "studios", "fc", "nations",
];

const LOC_CUES: &[&str] = &[
    "river", "mountain", "mountains", "mount", "ocean", "sea", "lake", "island", "islands",
    "valley", "desert", "bay", "peninsula", "coast", "forest", "park", "street", "avenue",
    "square", "bridge", "hall", "tower", "palace", "castle", "cathedral", "temple",
];

const EVENT_CUES: &[&str] = &[
    "war", "award", "awards", "prize", "cup", "olympics", "championship", "championships",
    "festival", "revolution", "battle", "games", "series", "tournament", "grammy", "oscar",
];

const GPE_NAMES: &[&str] = &[
    "america", "united", "states", "usa", "u.s.", "uk", "u.k.", "britain", "england", "france",
    "germany", "italy", "spain", "portugal", "china", "japan", "india", "russia", "canada",
    "mexico", "brazil", "australia", "egypt", "greece", "rome", "london", "paris", "berlin",
    "madrid", "tokyo", "beijing", "moscow", "chicago", "boston", "york", "california",
    "texas", "florida", "washington", "ireland", "scotland", "wales", "poland", "sweden",
    "norway", "denmark", "finland", "netherlands", "belgium", "austria", "switzerland",
    "turkey", "iran", "iraq", "israel", "korea", "vietnam", "thailand", "indonesia", "kenya",
    "nigeria", "argentina", "chile", "peru", "cuba", "europe", "asia", "africa", "antarctica",
    "alberta", "ontario", "quebec", "toronto", "vancouver", "sydney", "shanghai", "shenzhen",
    "warsaw", "vienna", "prague", "dublin", "athens", "cairo", "delhi", "mumbai", "seoul",
    "manchester", "liverpool", "oxford", "cambridge", "edinburgh", "venice", "florence",
    "milan", "naples", "lisbon", "barcelona", "amsterdam", "brussels", "geneva", "zurich",
    "munich", "hamburg", "kyoto", "osaka", "hollywood", "los", "angeles", "francisco", "san",
    "detroit", "seattle", "atlanta", "dallas", "houston", "philadelphia", "miami", "hawaii",
    "alaska", "virginia", "ohio", "michigan", "georgia", "carolina", "arizona", "nevada",
    "oregon", "colorado", "minnesota", "wisconsin", "tennessee", "kentucky", "alabama",
    "massachusetts", "connecticut", "jersey", "pennsylvania", "maryland", "louisiana",
    "normandy", "bavaria", "prussia", "ottoman", "byzantium", "constantinople", "jerusalem",
    "mecca", "babylon", "persia", "mongolia", "tibet", "nepal", "pakistan", "bangladesh",
    "afghanistan", "syria", "lebanon", "jordan", "arabia", "yemen", "oman", "qatar", "kuwait",
    "libya", "tunisia", "algeria", "morocco", "ethiopia", "somalia", "sudan", "ghana",
    "zimbabwe", "zambia", "uganda", "tanzania", "congo", "angola", "namibia", "botswana",
    "madagascar", "philippines", "malaysia", "singapore", "taiwan", "hong", "kong", "macau",
    "zealand", "fiji", "iceland", "greenland", "ukraine", "belarus", "lithuania", "latvia",
    "estonia", "hungary", "romania", "bulgaria", "serbia", "croatia", "bosnia", "albania",
    "slovakia", "slovenia", "czech", "colombia", "venezuela", "ecuador", "bolivia", "uruguay",
    "paraguay", "panama", "jamaica", "haiti",
];

const FIRST_NAMES: &[&str] = &[
    "john", "james", "robert", "michael", "william", "david", "richard", "joseph", "thomas",
    "charles", "mary", "patricia", "jennifer", "linda", "elizabeth", "barbara", "susan",
    "jessica", "sarah", "karen", "george", "paul", "peter", "anne", "anna", "maria", "henry",
    "edward", "frederick", "louis", "victoria", "albert", "alexander", "napoleon", "martin",
    "luther", "isaac", "albert", "marie", "ali", "sharon", "selina", "beyoncé", "beyonce",
    "frédéric", "frederic", "chopin", "newton", "einstein", "darwin", "lincoln", "kennedy",
    "churchill", "shakespeare", "mozart", "beethoven", "bach", "picasso", "leonardo",
    "galileo", "aristotle", "plato", "socrates", "caesar", "cleopatra", "kant", "hegel",
    "marx", "freud", "steve", "bill", "tom", "tim", "emma", "olivia", "sophia", "alice",
    "bob", "carol", "dan", "eve", "frank", "grace", "helen", "ivan", "jack", "kate", "laura",
    "mark", "nancy", "oscar", "rachel", "sam", "tina", "victor", "walter", "larter",
];

pub fn pos_of_closed(word: &str) -> Option<Pos> {
    if DETERMINERS.contains(&word) {
        return Some(Pos::Det);
    }
    if AUXILIARIES.contains(&word) {
        return Some(Pos::Aux);
    }
    if PRONOUNS.contains(&word) {
        return Some(Pos::Pron);
    }
    if COORDINATORS.contains(&word) {
        return Some(Pos::Cconj);
    }
    if PREPOSITIONS.contains(&word) {
        return Some(Pos::Adp);
    }
    if SUBORDINATORS.contains(&word) {
        return Some(Pos::Sconj);
    }
    if word == "not" || word == "n't" || word == "'s" || word == "'" {
        return Some(Pos::Part);
    }
    None
}

pub fn is_adverb(word: &str) -> bool {
    ADVERBS.contains(&word)
}

pub fn is_interjection(word: &str) -> bool {
    INTERJECTIONS.contains(&word)
}

pub fn is_number_word(word: &str) -> bool {
    NUMBER_WORDS.contains(&word)
}

pub fn is_ordinal(word: &str) -> bool {
    ORDINAL_WORDS.contains(&word)
        || ["st", "nd", "rd", "th"].iter().any(|suf| {
            word.len() > suf.len()
                && word.ends_with(suf)
                && word[..word.len() - suf.len()].chars().all(|c| c.is_ascii_digit())
        })
}

pub fn is_adjective(word: &str) -> bool {
    ADJECTIVES.contains(&word)
}

pub fn is_base_verb(word: &str) -> bool {
    VERBS.contains(&word)
}

pub fn irregular_verb_lemma(word: &str) -> Option<&'static str> {
    IRREGULAR_VERBS
        .iter()
        .find(|(form, _)| *form == word)
        .map(|(_, lemma)| *lemma)
}

pub fn irregular_noun_lemma(word: &str) -> Option<&'static str> {
    IRREGULAR_NOUNS
        .iter()
        .find(|(form, _)| *form == word)
        .map(|(_, lemma)| *lemma)
}

pub fn is_stop_word(word: &str) -> bool {
    STOP_WORDS.contains(&word)
}

pub fn is_possessive_pronoun(word: &str) -> bool {
    POSSESSIVE_PRONOUNS.contains(&word)
}

pub fn is_month(word: &str) -> bool {
    MONTHS.contains(&word)
}

pub fn is_weekday(word: &str) -> bool {
    WEEKDAYS.contains(&word)
}

pub fn is_title(word: &str) -> bool {
    TITLES.contains(&word)
}

pub fn is_org_cue(word: &str) -> bool {
    ORG_CUES.contains(&word)
}

pub fn is_loc_cue(word: &str) -> bool {
    LOC_CUES.contains(&word)
}

pub fn is_event_cue(word: &str) -> bool {
    EVENT_CUES.contains(&word)
}

pub fn is_gpe(word: &str) -> bool {
    GPE_NAMES.contains(&word)
}

pub fn is_first_name(word: &str) -> bool {
    FIRST_NAMES.contains(&word)
}

/// Does the (lowercased) word look like a known verb form?
pub fn verb_lemma(word: &str) -> Option<String> {
    if let Some(l) = irregular_verb_lemma(word) {
        return Some(l.to_string());
    }
    if is_base_verb(word) {
        return Some(word.to_string());
    }
    for (suffix, repl) in [
        ("ies", "y"),
        ("ied", "y"),
        ("ying", "y"),
        ("ing", ""),
        ("ing", "e"),
        ("ed", ""),
        ("ed", "e"),
        ("d", ""),
        ("es", ""),
        ("s", ""),
    ] {
        if let Some(stem) = word.strip_suffix(suffix) {
            let candidate = format!("{stem}{repl}");
            if is_base_verb(&candidate) {
                return Some(candidate);
            }
            // doubled consonant: stopped -> stop
            let mut chars: Vec<char> = stem.chars().collect();
            if chars.len() >= 2 && chars[chars.len() - 1] == chars[chars.len() - 2] {
                chars.pop();
                let undoubled: String = chars.into_iter().collect();
                if is_base_verb(&undoubled) {
                    return Some(undoubled);
                }
            }
        }
    }
    None
}

/// Rule-based lemma for a lowercased word given its tag.
pub fn lemmatize(word: &str, pos: Pos) -> String {
    match pos {
        Pos::Verb | Pos::Aux => verb_lemma(word).unwrap_or_else(|| strip_verb_suffix(word)),
        Pos::Noun => {
            if let Some(l) = irregular_noun_lemma(word) {
                return l.to_string();
            }
            singularize(word)
        }
        _ => word.to_string(),
    }
}

fn strip_verb_suffix(word: &str) -> String {
    if word.len() > 5 {
        if let Some(stem) = word.strip_suffix("ing") {
            return stem.to_string();
        }
    }
    if word.len() > 4 {
        if let Some(stem) = word.strip_suffix("ied") {
            return format!("{stem}y");
        }
        if let Some(stem) = word.strip_suffix("ed") {
            return stem.to_string();
        }
    }
    word.to_string()
}

fn singularize(word: &str) -> String {
    if word.len() <= 3 || word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        return word.to_string();
    }
    if let Some(stem) = word.strip_suffix("ies") {
        return format!("{stem}y");
    }
    for suffix in ["ches", "shes", "xes", "sses", "zes"] {
        if word.ends_with(suffix) {
            return word[..word.len() - 2].to_string();
        }
    }
    if let Some(stem) = word.strip_suffix('s') {
        return stem.to_string();
    }
    word.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verb_lemmas() {
        assert_eq!(verb_lemma("left").as_deref(), Some("leave"));
        assert_eq!(verb_lemma("played").as_deref(), Some("play"));
        assert_eq!(verb_lemma("stopped").as_deref(), Some("stop"));
        assert_eq!(verb_lemma("studies").as_deref(), Some("study"));
        assert_eq!(verb_lemma("hometown"), None);
    }

    #[test]
    fn noun_lemmas() {
        assert_eq!(lemmatize("awards", Pos::Noun), "award");
        assert_eq!(lemmatize("cities", Pos::Noun), "city");
        assert_eq!(lemmatize("boxes", Pos::Noun), "box");
        assert_eq!(lemmatize("class", Pos::Noun), "class");
        assert_eq!(lemmatize("children", Pos::Noun), "child");
    }

    #[test]
    fn ordinals() {
        assert!(is_ordinal("21st"));
        assert!(is_ordinal("second"));
        assert!(!is_ordinal("st"));
    }
}
