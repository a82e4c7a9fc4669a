//! Choose and delete rules over a five-token window.
//!
//! ```text
//! [llc:[ ],lc:[ ],choose:[case:abl],rc:[[cat:postp,subcat:abl]],rrc:[ ]]
//! ```
//!
//! A context is `[ ]` (unused), `[constraint]`, or `[boundary]`, which only
//! matches the position just past either end of the sentence.

mod apply;

pub use apply::{apply_rule_at, match_position, run_pass, run_sentence, MatchMode};

use std::fmt;

use crate::error::Result;
use crate::featstruct::{FeatureConstraint, Position};
use crate::text::Cursor;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContextConstraint {
    Boundary,
    Parse(FeatureConstraint),
}

impl ContextConstraint {
    /// `self` matches everything `other` matches.
    pub fn generalizes(&self, other: &ContextConstraint) -> bool {
        match (self, other) {
            (ContextConstraint::Boundary, ContextConstraint::Boundary) => true,
            (ContextConstraint::Parse(a), ContextConstraint::Parse(b)) => a.generalizes(b),
            _ => false,
        }
    }
}

impl fmt::Display for ContextConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContextConstraint::Boundary => f.write_str("[boundary]"),
            ContextConstraint::Parse(c) => write!(f, "[{c}]"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Choose,
    Delete,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Choose => "choose",
            Action::Delete => "delete",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    HandChoose,
    HandDelete,
    LearnedChoose,
    LearnedDelete,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::HandChoose => "hand-choose",
            Provenance::HandDelete => "hand-delete",
            Provenance::LearnedChoose => "learned-choose",
            Provenance::LearnedDelete => "learned-delete",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [
            Provenance::HandChoose,
            Provenance::HandDelete,
            Provenance::LearnedChoose,
            Provenance::LearnedDelete,
        ]
        .into_iter()
        .find(|p| p.name() == s)
    }

    pub fn is_learned(self) -> bool {
        matches!(self, Provenance::LearnedChoose | Provenance::LearnedDelete)
    }
}

/// Where a learned rule came from: the learning iteration and its score.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnInfo {
    pub iteration: usize,
    pub score: f64,
}

/// Which context positions a rule uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Shape {
    /// llc, lc _ rc, rrc
    Full,
    /// llc, lc _
    LeftPair,
    /// _ rc, rrc
    RightPair,
    /// lc _ rc
    Both,
    /// lc _
    Left,
    /// _ rc
    Right,
    /// llc, lc _ rc
    LeftPairRight,
    /// lc _ rc, rrc
    LeftRightPair,
    /// No context at all.
    Unconditioned,
}

impl Shape {
    /// The shapes learning works with, most specific first.
    pub const LEARNED: [Shape; 6] = [
        Shape::Full,
        Shape::LeftPair,
        Shape::RightPair,
        Shape::Both,
        Shape::Left,
        Shape::Right,
    ];

    /// Present flags for llc, lc, rc, rrc.
    pub fn positions(self) -> [bool; 4] {
        match self {
            Shape::Full => [true, true, true, true],
            Shape::LeftPair => [true, true, false, false],
            Shape::RightPair => [false, false, true, true],
            Shape::Both => [false, true, true, false],
            Shape::Left => [false, true, false, false],
            Shape::Right => [false, false, true, false],
            Shape::LeftPairRight => [true, true, true, false],
            Shape::LeftRightPair => [false, true, true, true],
            Shape::Unconditioned => [false, false, false, false],
        }
    }

    pub fn from_positions(present: [bool; 4]) -> Option<Shape> {
        [
            Shape::Full,
            Shape::LeftPair,
            Shape::RightPair,
            Shape::Both,
            Shape::Left,
            Shape::Right,
            Shape::LeftPairRight,
            Shape::LeftRightPair,
            Shape::Unconditioned,
        ]
        .into_iter()
        .find(|s| s.positions() == present)
    }

    /// Specificity rank, 1 (most specific) to 4. Three-position shapes rank
    /// with the two-sided pairs; a rule without context has no rank.
    pub fn rank(self) -> Option<u8> {
        match self {
            Shape::Full => Some(1),
            Shape::LeftPair | Shape::RightPair | Shape::LeftPairRight | Shape::LeftRightPair => Some(2),
            Shape::Both => Some(3),
            Shape::Left | Shape::Right => Some(4),
            Shape::Unconditioned => None,
        }
    }

    pub fn has(self, p: Position) -> bool {
        p.context_index().is_some_and(|i| self.positions()[i])
    }

    pub fn name(self) -> &'static str {
        match self {
            Shape::Full => "llc,lc-rc,rrc",
            Shape::LeftPair => "llc,lc-",
            Shape::RightPair => "-rc,rrc",
            Shape::Both => "lc-rc",
            Shape::Left => "lc-",
            Shape::Right => "-rc",
            Shape::LeftPairRight => "llc,lc-rc",
            Shape::LeftRightPair => "lc-rc,rrc",
            Shape::Unconditioned => "-",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    /// llc, lc, rc, rrc
    pub contexts: [Option<ContextConstraint>; 4],
    pub action: Action,
    pub target: FeatureConstraint,
    pub provenance: Provenance,
    pub info: Option<LearnInfo>,
}

impl Rule {
    pub fn new(action: Action, target: FeatureConstraint, provenance: Provenance) -> Self {
        Rule {
            contexts: Default::default(),
            action,
            target,
            provenance,
            info: None,
        }
    }

    pub fn with_context(mut self, p: Position, c: ContextConstraint) -> Self {
        let i = p.context_index().expect("the focus is not a context position");
        self.contexts[i] = Some(c);
        self
    }

    pub fn context(&self, p: Position) -> Option<&ContextConstraint> {
        p.context_index().and_then(|i| self.contexts[i].as_ref())
    }

    pub fn shape(&self) -> Shape {
        Shape::from_positions(std::array::from_fn(|i| self.contexts[i].is_some()))
            .expect("rules are built with a valid shape")
    }

    pub fn rank(&self) -> Option<u8> {
        self.shape().rank()
    }

    /// True if `self` applies wherever `other` does and acts the same way:
    /// same action, every context of `self` generalizes the corresponding
    /// context of `other`, and the targets likewise.
    pub fn generalizes(&self, other: &Rule) -> bool {
        self.action == other.action
            && self.target.generalizes(&other.target)
            && self.contexts.iter().zip(&other.contexts).all(|(a, b)| match (a, b) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(a), Some(b)) => a.generalizes(b),
            })
    }

    /// The rule text without any provenance comment.
    pub fn record(&self) -> String {
        let ctx = |i: usize| match &self.contexts[i] {
            None => "[ ]".to_string(),
            Some(c) => c.to_string(),
        };
        format!(
            "[llc:{},lc:{},{}:{},rc:{},rrc:{}]",
            ctx(0),
            ctx(1),
            self.action.name(),
            self.target,
            ctx(2),
            ctx(3)
        )
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.record())
    }
}

/// Reads a rule file. Rules take `default` as provenance unless preceded by
/// a comment such as `# learned-choose iter=3 score=12.5`.
pub fn decode_rules(text: &str, source: &str, default: Provenance) -> Result<Vec<Rule>> {
    let mut cur = Cursor::new(text, source);
    let mut rules = Vec::new();
    let mut pending: Option<(Provenance, Option<LearnInfo>)> = None;
    loop {
        cur.skip_ws();
        match cur.peek() {
            None => break,
            Some('#') => {
                let comment = cur.take_line();
                if let Some(p) = parse_provenance(&comment[1..]) {
                    pending = Some(p);
                }
            }
            Some('[') => {
                let mut rule = parse_record(&mut cur, default)?;
                if let Some((prov, info)) = pending.take() {
                    rule.provenance = prov;
                    rule.info = info;
                }
                cur.eat('.');
                rules.push(rule);
            }
            Some(_) => return Err(cur.error("expected '[' to start a rule")),
        }
    }
    Ok(rules)
}

fn parse_provenance(comment: &str) -> Option<(Provenance, Option<LearnInfo>)> {
    let mut words = comment.split_whitespace();
    let prov = Provenance::from_name(words.next()?)?;
    let mut iteration = None;
    let mut score = None;
    for w in words {
        match w.split_once('=') {
            Some(("iter", v)) => iteration = v.parse().ok(),
            Some(("score", v)) => score = v.parse().ok(),
            _ => {}
        }
    }
    let info = match (iteration, score) {
        (Some(iteration), Some(score)) => Some(LearnInfo { iteration, score }),
        _ => None,
    };
    Some((prov, info))
}

fn parse_record(cur: &mut Cursor<'_>, default: Provenance) -> Result<Rule> {
    let start = cur.pos();
    cur.expect('[')?;
    let mut contexts: [Option<ContextConstraint>; 4] = Default::default();
    let mut seen = [false; 4];
    let mut action: Option<(Action, FeatureConstraint)> = None;
    loop {
        let name = cur.ident()?.to_ascii_lowercase();
        cur.expect(':')?;
        match name.as_str() {
            "choose" | "delete" => {
                if action.is_some() {
                    return Err(cur.error("a rule has exactly one choose or delete part"));
                }
                let a = if name == "choose" {
                    Action::Choose
                } else {
                    Action::Delete
                };
                let target = FeatureConstraint::parse_at(cur)?;
                if target.is_empty() {
                    return Err(cur.error("the rule target must not be empty"));
                }
                action = Some((a, target));
            }
            pos => {
                let p = Position::from_name(pos)
                    .and_then(Position::context_index)
                    .ok_or_else(|| cur.error(format!("unknown rule part '{pos}'")))?;
                if seen[p] {
                    return Err(cur.error(format!("'{pos}' given twice")));
                }
                seen[p] = true;
                contexts[p] = parse_context(cur)?;
            }
        }
        if cur.eat(',') {
            continue;
        }
        cur.expect(']')?;
        break;
    }
    let (action, target) = action.ok_or_else(|| cur.error("rule has no choose or delete part"))?;
    if Shape::from_positions(std::array::from_fn(|i| contexts[i].is_some())).is_none() {
        return Err(cur.error_at(start, "unsupported combination of context positions"));
    }
    Ok(Rule {
        contexts,
        action,
        target,
        provenance: default,
        info: None,
    })
}

fn parse_context(cur: &mut Cursor<'_>) -> Result<Option<ContextConstraint>> {
    cur.expect('[')?;
    if cur.eat(']') {
        return Ok(None);
    }
    cur.skip_ws();
    let c = if cur.peek() == Some('[') {
        ContextConstraint::Parse(FeatureConstraint::parse_at(cur)?)
    } else if cur.eat_word("boundary") {
        ContextConstraint::Boundary
    } else {
        return Err(cur.error("expected '[constraint]', '[boundary]' or '[ ]'"));
    };
    cur.expect(']')?;
    Ok(Some(c))
}

/// Writes one rule per line; learned rules are preceded by their
/// provenance comment.
pub fn encode_rules(rules: &[Rule]) -> String {
    let mut out = String::new();
    for r in rules {
        if let Some(info) = r.info {
            out.push_str(&format!(
                "# {} iter={} score={}\n",
                r.provenance.name(),
                info.iteration,
                info.score
            ));
        }
        out.push_str(&r.record());
        out.push('\n');
    }
    out
}
