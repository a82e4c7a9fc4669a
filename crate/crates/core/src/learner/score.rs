use std::cmp::Ordering;
use std::fmt;

/// An exact rational score `num / den` with `den > 0`.
#[derive(Clone, Copy, Debug)]
pub struct Score {
    pub num: i64,
    pub den: i64,
}

impl Score {
    pub fn integer(n: i64) -> Self {
        Score { num: n, den: 1 }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn at_least(self, threshold: f64) -> bool {
        self.value() >= threshold
    }
}

impl PartialEq for Score {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Score {}

impl PartialOrd for Score {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Score {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Occurrence counts of one reading: how often it appears unambiguously in
/// the candidate context (`inc`) and overall (`cnt`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Counts {
    pub inc: u32,
    pub cnt: u32,
}

/// Score of choosing reading `i` over its competitors:
/// `inc_i - max_j (cnt_i / cnt_j) * inc_j`, with `cnt_i` raised to 1 when
/// zero and competitors that never occur ignored. Without a competitor that
/// contributes, the score is `inc_i`.
pub fn score_counts(i: Counts, competitors: &[Counts]) -> Score {
    let cnt_i = i64::from(i.cnt.max(1));
    let inc_i = i64::from(i.inc);
    let best = competitors
        .iter()
        .filter(|c| c.cnt > 0 && c.inc > 0)
        .max_by(|a, b| (u64::from(a.inc) * u64::from(b.cnt)).cmp(&(u64::from(b.inc) * u64::from(a.cnt))));
    match best {
        None => Score::integer(inc_i),
        Some(j) => {
            let den = i64::from(j.cnt);
            Score {
                num: inc_i * den - cnt_i * i64::from(j.inc),
                den,
            }
        }
    }
}
