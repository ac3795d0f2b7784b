//! The verbal 1-9 comparison scale.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Intensity of importance on the 1-9 scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Intensity {
    Equal,
    Intermediate2,
    Weak,
    Intermediate4,
    Strong,
    Intermediate6,
    VeryStrong,
    Intermediate8,
    Absolute,
}

impl Intensity {
    pub const ALL: [Intensity; 9] = [
        Intensity::Equal,
        Intensity::Intermediate2,
        Intensity::Weak,
        Intensity::Intermediate4,
        Intensity::Strong,
        Intensity::Intermediate6,
        Intensity::VeryStrong,
        Intensity::Intermediate8,
        Intensity::Absolute,
    ];

    /// Scale value 1..=9.
    pub fn value(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_value(v: u8) -> Option<Self> {
        Self::ALL.get(usize::from(v).checked_sub(1)?).copied()
    }

    /// Answer text for "How important is A relative to B?".
    pub fn phrase(self) -> &'static str {
        match self {
            Intensity::Equal => "Equally important",
            Intensity::Intermediate2 => "between equally and weakly more important",
            Intensity::Weak => "weakly more important",
            Intensity::Intermediate4 => "between weakly and strongly more important",
            Intensity::Strong => "strongly more important",
            Intensity::Intermediate6 => "between strongly and very strongly more important",
            Intensity::VeryStrong => "very strongly more important",
            Intensity::Intermediate8 => "between very strongly and absolutely more important",
            Intensity::Absolute => "absolutely more important",
        }
    }

    /// Short keyword used on the command line and in documents.
    pub fn keyword(self) -> &'static str {
        match self {
            Intensity::Equal => "equal",
            Intensity::Intermediate2 => "intermediate_2",
            Intensity::Weak => "weak",
            Intensity::Intermediate4 => "intermediate_4",
            Intensity::Strong => "strong",
            Intensity::Intermediate6 => "intermediate_6",
            Intensity::VeryStrong => "very_strong",
            Intensity::Intermediate8 => "intermediate_8",
            Intensity::Absolute => "absolute",
        }
    }
}

impl FromStr for Intensity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Self::ALL
            .into_iter()
            .find(|i| i.keyword() == key)
            .or_else(|| key.parse::<u8>().ok().and_then(Self::from_value))
            .ok_or_else(|| format!("unknown intensity `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    FirstOverSecond,
    SecondOverFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VerbalJudgment {
    pub intensity: Intensity,
    pub direction: Direction,
}

impl VerbalJudgment {
    pub fn new(intensity: Intensity, direction: Direction) -> Self {
        Self { intensity, direction }
    }
}

impl fmt::Display for VerbalJudgment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.intensity, self.direction) {
            (Intensity::Equal, _) => f.write_str(Intensity::Equal.phrase()),
            (i, Direction::FirstOverSecond) => write!(f, "first is {}", i.phrase()),
            (i, Direction::SecondOverFirst) => write!(f, "second is {}", i.phrase()),
        }
    }
}

/// Ratio `a_ij` for "item i compared with item j".
pub fn verbal_to_value(v: VerbalJudgment) -> f64 {
    let x = f64::from(v.intensity.value());
    match v.direction {
        Direction::FirstOverSecond => x,
        Direction::SecondOverFirst => 1.0 / x,
    }
}

/// Nearest scale point in log space. Ratios below 1 map through their
/// reciprocal with the direction flipped; log-space ties go to the smaller
/// scale value.
pub fn value_to_verbal(r: f64) -> VerbalJudgment {
    let (x, direction) = if r < 1.0 {
        (1.0 / r, Direction::SecondOverFirst)
    } else {
        (r, Direction::FirstOverSecond)
    };
    let lx = x.ln();
    let mut best = Intensity::Equal;
    let mut best_d = f64::INFINITY;
    for i in Intensity::ALL {
        let d = (lx - f64::from(i.value()).ln()).abs();
        if d < best_d - 1e-12 {
            best = i;
            best_d = d;
        }
    }
    let direction = if best == Intensity::Equal { Direction::FirstOverSecond } else { direction };
    VerbalJudgment { intensity: best, direction }
}

/// Exact scale values `1..=9` and their reciprocals, ascending.
pub fn scale_values() -> Vec<f64> {
    let mut v: Vec<f64> = (2..=9).rev().map(|k| 1.0 / f64::from(k)).collect();
    v.extend((1..=9).map(f64::from));
    v
}

/// The scale value `r` denotes, if any (relative tolerance 1e-9).
pub fn snap_to_scale(r: f64) -> Option<f64> {
    scale_values().into_iter().find(|s| ((r - s) / s).abs() <= 1e-9)
}
