//! Shallow-NLP tags for question tokens: a rule-based tagger and a loader
//! for tags produced by an external toolchain.
//!
//! Sidecar format, one question per line:
//!
//! ```text
//! q17<TAB>Who/PRON/NONE/nsubj is/VERB/NONE/cop the/DET/NONE/det ...
//! ```
//!
//! Records are `surface/POS/NER/DEP`, separated by whitespace, one per token
//! of [`crate::textproc::split_words`]. Blank lines and lines starting with
//! `#` are ignored.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ClauseError;
use crate::textproc;

pub const POS_TAGS_TXT: &str = include_str!("../../resources/pos_tags.txt");
pub const NER_TAGS_TXT: &str = include_str!("../../resources/ner_tags.txt");
pub const DEP_RELATIONS_TXT: &str = include_str!("../../resources/dep_relations.txt");

macro_rules! inventory {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const COUNT: usize = $name::ALL.len();

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $name::ALL
                    .iter()
                    .copied()
                    .find(|t| t.name().eq_ignore_ascii_case(s))
                    .ok_or_else(|| format!("unknown {} tag {s:?}", stringify!($name)))
            }
        }
    };
}

inventory!(
    /// Coarse part-of-speech tags.
    Pos {
        Adv => "ADV",
        Verb => "VERB",
        Det => "DET",
        Adj => "ADJ",
        Propn => "PROPN",
        Adp => "ADP",
        Part => "PART",
        Noun => "NOUN",
        Num => "NUM",
        Pron => "PRON",
        Intj => "INTJ",
        Cconj => "CCONJ",
    }
);

inventory!(
    /// Named-entity classes.
    Ner {
        Person => "PERSON",
        Location => "LOCATION",
        DateTime => "DATETIME",
        Quantity => "QUANTITY",
        Organisation => "ORGANISATION",
        None => "NONE",
    }
);

inventory!(
    /// Universal dependency relations.
    Dep {
        Acl => "acl",
        Advcl => "advcl",
        Advmod => "advmod",
        Amod => "amod",
        Appos => "appos",
        Aux => "aux",
        Case => "case",
        Cc => "cc",
        Ccomp => "ccomp",
        Clf => "clf",
        Compound => "compound",
        Conj => "conj",
        Cop => "cop",
        Csubj => "csubj",
        Dep => "dep",
        Det => "det",
        Discourse => "discourse",
        Dislocated => "dislocated",
        Expl => "expl",
        Fixed => "fixed",
        Flat => "flat",
        Goeswith => "goeswith",
        Iobj => "iobj",
        List => "list",
        Mark => "mark",
        Nmod => "nmod",
        Nsubj => "nsubj",
        Nummod => "nummod",
        Obj => "obj",
        Obl => "obl",
        Orphan => "orphan",
        Parataxis => "parataxis",
        Punct => "punct",
        Reparandum => "reparandum",
        Root => "root",
        Vocative => "vocative",
        Xcomp => "xcomp",
    }
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenTags {
    pub pos: Pos,
    pub ner: Ner,
    pub dep: Dep,
}

impl TokenTags {
    pub fn new(pos: Pos, ner: Ner, dep: Dep) -> TokenTags {
        TokenTags { pos, ner, dep }
    }
}

/// Tags keyed by question id, read from a sidecar file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SidecarTags {
    entries: HashMap<String, Vec<(String, TokenTags)>>,
}

impl SidecarTags {
    pub fn parse(text: &str) -> Result<SidecarTags, ClauseError> {
        let mut entries = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: String| ClauseError::SidecarFormat {
                line: i + 1,
                reason,
            };
            let mut fields = line.split_whitespace();
            let id = fields.next().expect("non-empty line").to_string();
            let mut tokens = Vec::new();
            for rec in fields {
                let parts: Vec<&str> = rec.split('/').collect();
                let [surface, pos, ner, dep] = parts[..] else {
                    return Err(bad(format!("record {rec:?} is not surface/POS/NER/DEP")));
                };
                let tags = TokenTags::new(
                    pos.parse().map_err(bad)?,
                    ner.parse().map_err(bad)?,
                    dep.parse().map_err(bad)?,
                );
                tokens.push((surface.to_ascii_lowercase(), tags));
            }
            if entries.insert(id.clone(), tokens).is_some() {
                return Err(bad(format!("duplicate question id {id}")));
            }
        }
        Ok(SidecarTags { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Where token tags come from.
#[derive(Debug, Clone, Default, PartialEq)]
pub enum TagProvider {
    #[default]
    Heuristic,
    Sidecar(SidecarTags),
}

/// One [`TokenTags`] per token of `split_words(question)`, stopwords kept.
pub fn tag_tokens(
    question_id: &str,
    question: &str,
    provider: &TagProvider,
) -> Result<Vec<TokenTags>, ClauseError> {
    match provider {
        TagProvider::Heuristic => Ok(heuristic_tags(question)),
        TagProvider::Sidecar(side) => {
            let tokens = textproc::split_words(question);
            let tagged = side
                .entries
                .get(question_id)
                .ok_or_else(|| ClauseError::SidecarMissing(question_id.to_string()))?;
            let surfaces_differ = tagged.iter().zip(&tokens).any(|((s, _), t)| s != t);
            if tagged.len() != tokens.len() || surfaces_differ {
                return Err(ClauseError::SidecarMismatch {
                    id: question_id.to_string(),
                    expected: tokens.len(),
                    got: tagged.len(),
                });
            }
            Ok(tagged.iter().map(|(_, t)| *t).collect())
        }
    }
}

const WH_PRONOUNS: &[&str] = &["who", "whom", "what"];
const WH_DETERMINERS: &[&str] = &["which", "whose"];
const WH_ADVERBS: &[&str] = &["when", "where", "why", "how"];
const DETERMINERS: &[&str] = &[
    "the", "a", "an", "this", "that", "these", "those", "each", "every", "some", "any", "all",
    "no", "another",
];
const ADPOSITIONS: &[&str] = &[
    "of", "in", "on", "at", "by", "for", "with", "from", "to", "into", "about", "during", "before",
    "after", "between", "through", "under", "over", "against", "per", "since", "until", "among",
    "than", "as", "like",
];
const CONJUNCTIONS: &[&str] = &["and", "or", "but", "nor"];
const PRONOUNS: &[&str] = &[
    "i", "me", "you", "he", "him", "she", "her", "it", "we", "us", "they", "them", "his", "its",
    "their", "our", "my", "your",
];
const PARTICLES: &[&str] = &["not", "n't", "s"];
const COPULAS: &[&str] = &["is", "are", "was", "were", "be", "been", "being", "am"];
const AUXILIARIES: &[&str] = &[
    "do", "does", "did", "has", "have", "had", "can", "could", "will", "would", "shall", "should",
    "may", "might", "must",
];
const VERBS: &[&str] = &[
    "born",
    "died",
    "won",
    "win",
    "wins",
    "play",
    "plays",
    "played",
    "wrote",
    "write",
    "written",
    "made",
    "make",
    "makes",
    "live",
    "lives",
    "lived",
    "founded",
    "found",
    "located",
    "released",
    "directed",
    "built",
    "elected",
    "married",
    "cost",
    "costs",
    "stand",
    "stands",
    "mean",
    "means",
    "become",
    "became",
    "lead",
    "led",
    "hold",
    "holds",
    "held",
    "own",
    "owns",
    "owned",
    "sell",
    "sold",
    "sells",
    "score",
    "scored",
    "get",
    "got",
    "take",
    "took",
    "open",
    "opened",
    "start",
    "started",
    "serve",
    "served",
    "invented",
    "discovered",
    "produced",
    "published",
    "called",
    "named",
    "known",
    "run",
    "ran",
    "runs",
    "eat",
    "eats",
    "need",
    "needs",
    "weigh",
    "weighs",
    "coached",
    "starred",
    "sang",
    "sing",
    "painted",
    "signed",
];
const ADJECTIVES: &[&str] = &[
    "old", "tall", "high", "long", "far", "big", "large", "small", "fast", "heavy", "deep", "wide",
    "hot", "cold", "first", "last", "best", "largest", "biggest", "highest", "tallest", "oldest",
    "longest", "new", "current", "main", "official", "many", "much", "total", "average", "full",
    "latest", "national", "popular",
];
const ADVERBS: &[&str] = &[
    "also",
    "still",
    "currently",
    "ever",
    "never",
    "now",
    "most",
    "very",
];
const INTERJECTIONS: &[&str] = &["hello", "hi", "please", "yes", "oh"];
const MONTHS: &[&str] = &[
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
    "jan",
    "feb",
    "mar",
    "apr",
    "jun",
    "jul",
    "aug",
    "sep",
    "sept",
    "oct",
    "nov",
    "dec",
];
const WEEKDAYS: &[&str] = &[
    "monday",
    "tuesday",
    "wednesday",
    "thursday",
    "friday",
    "saturday",
    "sunday",
];
const TIME_NOUNS: &[&str] = &[
    "year", "years", "day", "days", "month", "months", "date", "week", "century",
];
const LOCATIONS: &[&str] = &[
    "alabama",
    "alaska",
    "arizona",
    "arkansas",
    "california",
    "colorado",
    "connecticut",
    "delaware",
    "florida",
    "georgia",
    "hawaii",
    "idaho",
    "illinois",
    "indiana",
    "iowa",
    "kansas",
    "kentucky",
    "louisiana",
    "maine",
    "maryland",
    "massachusetts",
    "michigan",
    "minnesota",
    "mississippi",
    "missouri",
    "montana",
    "nebraska",
    "nevada",
    "hampshire",
    "jersey",
    "mexico",
    "york",
    "carolina",
    "dakota",
    "ohio",
    "oklahoma",
    "oregon",
    "pennsylvania",
    "rhode",
    "tennessee",
    "texas",
    "utah",
    "vermont",
    "virginia",
    "washington",
    "wisconsin",
    "wyoming",
    "america",
    "usa",
    "us",
    "uk",
    "canada",
    "france",
    "germany",
    "italy",
    "spain",
    "japan",
    "china",
    "india",
    "brazil",
    "russia",
    "australia",
    "egypt",
    "kenya",
    "nigeria",
    "england",
    "scotland",
    "ireland",
    "paris",
    "london",
    "berlin",
    "rome",
    "madrid",
    "tokyo",
    "beijing",
    "delhi",
    "moscow",
    "sydney",
    "cairo",
    "nairobi",
    "chicago",
    "boston",
    "seattle",
    "denver",
    "atlanta",
    "houston",
    "dallas",
    "austin",
    "miami",
    "phoenix",
    "portland",
    "detroit",
    "europe",
    "asia",
    "africa",
    "everest",
    "nile",
    "amazon",
    "pacific",
    "atlantic",
    "alps",
    "mars",
    "jupiter",
    "saturn",
    "venus",
    "mercury",
    "neptune",
    "uranus",
    "earth",
];
const ORGANISATION_CUES: &[&str] = &[
    "inc",
    "corp",
    "corporation",
    "company",
    "university",
    "college",
    "club",
    "fc",
    "united",
    "bank",
    "airlines",
    "party",
    "association",
    "institute",
    "team",
    "league",
    "wizards",
    "lakers",
    "celtics",
    "bulls",
    "warriors",
    "google",
    "apple",
    "microsoft",
    "nasa",
    "un",
    "nba",
    "nfl",
    "fifa",
];

fn in_list(list: &[&str], w: &str) -> bool {
    list.contains(&w)
}

fn is_numeric(w: &str) -> bool {
    w.as_bytes().first().is_some_and(u8::is_ascii_digit)
}

/// Rule-based tagger. Each token gets the first matching rule:
/// digits are NUM/QUANTITY; month and weekday names are DATETIME; wh-words
/// are PRON or DET (wh-adverbs ADV); closed-class words come from fixed
/// lists; capitalized tokens after the first are PROPN with a gazetteer
/// deciding between LOCATION, ORGANISATION and PERSON; listed verbs are
/// VERB; anything else is NOUN/NONE with the unspecified relation.
pub fn heuristic_tags(question: &str) -> Vec<TokenTags> {
    let surface = textproc::split_surface(question);
    let lower: Vec<String> = surface.iter().map(|s| s.to_ascii_lowercase()).collect();
    let mut out: Vec<TokenTags> = Vec::with_capacity(surface.len());
    let mut root_assigned = false;
    for (i, (s, w)) in surface.iter().zip(&lower).enumerate() {
        let w = w.as_str();
        let capitalized = i > 0 && s.chars().next().is_some_and(|c| c.is_ascii_uppercase());
        let next_is_propn = surface
            .get(i + 1)
            .is_some_and(|n| n.chars().next().is_some_and(|c| c.is_ascii_uppercase()));
        let tags = if is_numeric(w) {
            TokenTags::new(Pos::Num, Ner::Quantity, Dep::Nummod)
        } else if in_list(MONTHS, w) && (capitalized || w != "may") || in_list(WEEKDAYS, w) {
            let pos = if capitalized { Pos::Propn } else { Pos::Noun };
            TokenTags::new(pos, Ner::DateTime, Dep::Obl)
        } else if in_list(WH_PRONOUNS, w) {
            TokenTags::new(Pos::Pron, Ner::None, Dep::Nsubj)
        } else if in_list(WH_DETERMINERS, w) {
            TokenTags::new(Pos::Det, Ner::None, Dep::Det)
        } else if in_list(WH_ADVERBS, w) {
            TokenTags::new(Pos::Adv, Ner::None, Dep::Advmod)
        } else if in_list(DETERMINERS, w) {
            TokenTags::new(Pos::Det, Ner::None, Dep::Det)
        } else if in_list(ADPOSITIONS, w) {
            TokenTags::new(Pos::Adp, Ner::None, Dep::Case)
        } else if in_list(CONJUNCTIONS, w) {
            TokenTags::new(Pos::Cconj, Ner::None, Dep::Cc)
        } else if in_list(PRONOUNS, w) {
            TokenTags::new(Pos::Pron, Ner::None, Dep::Nsubj)
        } else if in_list(PARTICLES, w) {
            TokenTags::new(Pos::Part, Ner::None, Dep::Advmod)
        } else if in_list(COPULAS, w) {
            TokenTags::new(Pos::Verb, Ner::None, Dep::Cop)
        } else if in_list(AUXILIARIES, w) {
            TokenTags::new(Pos::Verb, Ner::None, Dep::Aux)
        } else if capitalized {
            let ner = if in_list(LOCATIONS, w) {
                Ner::Location
            } else if in_list(ORGANISATION_CUES, w) {
                Ner::Organisation
            } else {
                Ner::Person
            };
            let dep = if next_is_propn {
                Dep::Compound
            } else {
                Dep::Nmod
            };
            TokenTags::new(Pos::Propn, ner, dep)
        } else if in_list(VERBS, w) {
            let dep = if root_assigned { Dep::Dep } else { Dep::Root };
            root_assigned = true;
            TokenTags::new(Pos::Verb, Ner::None, dep)
        } else if in_list(ADJECTIVES, w) {
            TokenTags::new(Pos::Adj, Ner::None, Dep::Amod)
        } else if in_list(ADVERBS, w) {
            TokenTags::new(Pos::Adv, Ner::None, Dep::Advmod)
        } else if in_list(INTERJECTIONS, w) {
            TokenTags::new(Pos::Intj, Ner::None, Dep::Discourse)
        } else if in_list(TIME_NOUNS, w) {
            TokenTags::new(Pos::Noun, Ner::DateTime, Dep::Dep)
        } else {
            TokenTags::new(Pos::Noun, Ner::None, Dep::Dep)
        };
        out.push(tags);
    }
    out
}
