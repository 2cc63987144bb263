//! Weight sequences, the reciprocal (duality) transform and urn specifications.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{parse_rational, BigFloat, Real, ScalarMode};

/// The named families of positive weight sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Family {
    /// `a * j`
    Linear { a: BigRational },
    /// `c * j^r`
    Power { c: BigRational, r: BigRational },
    /// `j^2`
    Square,
    /// `j (j + 1) / 2`
    Triangular,
    /// `(j - 1/2)^2`
    ShiftedSquare,
    /// Explicit values for `j = 1..=values.len()`.
    Custom { values: Vec<BigRational> },
}

/// A weight sequence `j -> alpha_j`, optionally reciprocated.
///
/// Index zero always evaluates to zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightSequence {
    family: Family,
    reciprocal: bool,
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl WeightSequence {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::Linear { a } if !a.is_positive() => {
                return Err(Error::InvalidArgument(format!("linear weight factor must be positive, got {a}")))
            }
            Family::Power { c, .. } if !c.is_positive() => {
                return Err(Error::InvalidArgument(format!("power weight factor must be positive, got {c}")))
            }
            Family::Custom { values } => {
                if values.is_empty() {
                    return Err(Error::InvalidArgument("custom weight table is empty".into()));
                }
                if let Some(v) = values.iter().find(|v| !v.is_positive()) {
                    return Err(Error::InvalidArgument(format!("custom weights must be positive, got {v}")));
                }
            }
            _ => {}
        }
        Ok(WeightSequence { family, reciprocal: false })
    }

    pub fn linear(a: i64) -> Self {
        Self::new(Family::Linear { a: rat(a) }).expect("positive linear factor")
    }

    pub fn power(c: BigRational, r: BigRational) -> Result<Self> {
        Self::new(Family::Power { c, r })
    }

    pub fn square() -> Self {
        WeightSequence { family: Family::Square, reciprocal: false }
    }

    pub fn triangular() -> Self {
        WeightSequence { family: Family::Triangular, reciprocal: false }
    }

    pub fn shifted_square() -> Self {
        WeightSequence { family: Family::ShiftedSquare, reciprocal: false }
    }

    pub fn custom(values: Vec<BigRational>) -> Result<Self> {
        Self::new(Family::Custom { values })
    }

    /// All built-in families with small parameters, used by sweeps.
    pub fn builtin_families() -> Vec<WeightSequence> {
        vec![
            Self::linear(1),
            Self::linear(2),
            Self::square(),
            Self::triangular(),
            Self::shifted_square(),
            Self::power(rat(1), rat(3)).expect("valid power family"),
        ]
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn is_reciprocal(&self) -> bool {
        self.reciprocal
    }

    /// The dual sequence `j -> 1 / alpha_j` (index zero stays zero).
    pub fn reciprocal(&self) -> Self {
        WeightSequence { family: self.family.clone(), reciprocal: !self.reciprocal }
    }

    /// True when every value is rational, so exact arithmetic applies.
    pub fn is_rational(&self) -> bool {
        !matches!(&self.family, Family::Power { r, .. } if !r.is_integer())
    }

    /// Largest index that can be evaluated, if the sequence is finite.
    pub fn max_index(&self) -> Option<u64> {
        match &self.family {
            Family::Custom { values } => Some(values.len() as u64),
            _ => None,
        }
    }

    /// Requires that indices `1..=upper` are defined.
    pub fn require_range(&self, upper: u64) -> Result<()> {
        match self.max_index() {
            Some(len) if upper > len => Err(Error::IndexOutOfRange { index: upper, len: len as usize }),
            _ => Ok(()),
        }
    }

    /// The exact value of `alpha_j` before reciprocation, when rational.
    fn base_rational(&self, j: u64) -> Result<Option<BigRational>> {
        let x = BigRational::from_integer(BigInt::from(j));
        Ok(match &self.family {
            Family::Linear { a } => Some(a * x),
            Family::Square => Some(&x * &x),
            Family::Triangular => Some(&x * (&x + BigRational::one()) / rat(2)),
            Family::ShiftedSquare => {
                let h = x - BigRational::new(1.into(), 2.into());
                Some(&h * &h)
            }
            Family::Power { c, r } => <BigRational as Real>::rational_power(&x, r).map(|p| c * p),
            Family::Custom { values } => Some(
                values
                    .get(j as usize - 1)
                    .cloned()
                    .ok_or(Error::IndexOutOfRange { index: j, len: values.len() })?,
            ),
        })
    }

    /// Exact value of the weight at `j`, when the family is rational.
    pub fn eval_rational(&self, j: u64) -> Result<BigRational> {
        self.eval::<BigRational>(j)
    }

    /// The weight at index `j` in the scalar type `T`; zero at `j = 0`.
    pub fn eval<T: Real>(&self, j: u64) -> Result<T> {
        if j == 0 {
            return Ok(T::zero());
        }
        let value = match self.base_rational(j)? {
            Some(v) => T::from_rational(&v),
            None => {
                let Family::Power { c, r } = &self.family else { unreachable!() };
                let p = T::rational_power(&BigRational::from_integer(BigInt::from(j)), r).ok_or_else(|| {
                    Error::NotRepresentable { mode: T::MODE, what: format!("{j}^{r}") }
                })?;
                T::from_rational(c) * p
            }
        };
        Ok(if self.reciprocal { T::one() / value } else { value })
    }

    /// `[alpha_0, alpha_1, ..., alpha_upper]`.
    pub fn table<T: Real>(&self, upper: u64) -> Result<Vec<T>> {
        (0..=upper).map(|j| self.eval(j)).collect()
    }

    /// Whether `alpha_1..alpha_upper` are pairwise distinct. Rational families
    /// are compared exactly, others in big-float arithmetic.
    pub fn check_distinct(&self, upper: u64) -> Result<bool> {
        if self.is_rational() {
            let mut values: Vec<BigRational> = (1..=upper).map(|j| self.eval(j)).collect::<Result<_>>()?;
            values.sort();
            Ok(values.windows(2).all(|w| w[0] != w[1]))
        } else {
            let values: Vec<BigFloat> = (1..=upper).map(|j| self.eval(j)).collect::<Result<_>>()?;
            Ok(all_distinct(values))
        }
    }

    /// Distinctness check in the scalar type the caller computes in.
    pub fn check_distinct_in<T: Real>(&self, upper: u64) -> Result<bool> {
        let values: Vec<T> = (1..=upper).map(|j| self.eval(j)).collect::<Result<_>>()?;
        Ok(all_distinct(values))
    }

    /// Errors unless `alpha_1..alpha_upper` are defined and pairwise distinct.
    pub fn require_distinct(&self, upper: u64) -> Result<()> {
        self.require_range(upper)?;
        if self.check_distinct(upper)? {
            Ok(())
        } else {
            Err(Error::NotDistinct(format!("{self} repeats a value among indices 1..={upper}")))
        }
    }
}

fn all_distinct<T: PartialOrd>(mut values: Vec<T>) -> bool {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    values.windows(2).all(|w| w[0] != w[1])
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reciprocal {
            f.write_str("recip:")?;
        }
        match &self.family {
            Family::Linear { a } => write!(f, "linear:{a}"),
            Family::Power { c, r } => write!(f, "power:{c}:{r}"),
            Family::Square => f.write_str("square"),
            Family::Triangular => f.write_str("triangular"),
            Family::ShiftedSquare => f.write_str("shifted-square"),
            Family::Custom { values } => {
                f.write_str("custom:")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for WeightSequence {
    type Err = Error;

    /// Accepts `linear:a`, `power:c:r`, `square`, `triangular`,
    /// `shifted-square`, `custom:v1,v2,...`, each optionally prefixed with
    /// `recip:`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("recip:") {
            return Ok(rest.parse::<WeightSequence>()?.reciprocal());
        }
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let no_args = |seq: WeightSequence| {
            if args.is_empty() {
                Ok(seq)
            } else {
                Err(Error::Parse(format!("weight family `{name}` takes no parameters")))
            }
        };
        match name {
            "linear" => {
                let a = if args.is_empty() { BigRational::one() } else { parse_rational(args)? };
                WeightSequence::new(Family::Linear { a })
            }
            "power" => {
                let (c, r) = args
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("power family needs `power:c:r`, got `{s}`")))?;
                WeightSequence::power(parse_rational(c)?, parse_rational(r)?)
            }
            "square" => no_args(WeightSequence::square()),
            "triangular" => no_args(WeightSequence::triangular()),
            "shifted-square" => no_args(WeightSequence::shifted_square()),
            "custom" => {
                let values = args.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
                WeightSequence::custom(values)
            }
            other => Err(Error::Parse(format!("unknown weight family `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct WeightJson {
    family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    c: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    values: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    reciprocal: bool,
}

impl Serialize for WeightSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut out = WeightJson { family: String::new(), a: None, c: None, r: None, values: None, reciprocal: self.reciprocal };
        out.family = match &self.family {
            Family::Linear { a } => {
                out.a = Some(a.to_string());
                "linear"
            }
            Family::Power { c, r } => {
                out.c = Some(c.to_string());
                out.r = Some(r.to_string());
                "power"
            }
            Family::Square => "square",
            Family::Triangular => "triangular",
            Family::ShiftedSquare => "shifted-square",
            Family::Custom { values } => {
                out.values = Some(values.iter().map(|v| v.to_string()).collect());
                "custom"
            }
        }
        .to_string();
        out.serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = WeightJson::deserialize(d)?;
        let field = |v: &Option<String>, name: &str| -> std::result::Result<BigRational, D::Error> {
            let text = v.as_deref().ok_or_else(|| D::Error::custom(format!("missing field `{name}`")))?;
            parse_rational(text).map_err(D::Error::custom)
        };
        let family = match raw.family.as_str() {
            "linear" => Family::Linear { a: if raw.a.is_some() { field(&raw.a, "a")? } else { BigRational::one() } },
            "power" => Family::Power { c: field(&raw.c, "c")?, r: field(&raw.r, "r")? },
            "square" => Family::Square,
            "triangular" => Family::Triangular,
            "shifted-square" => Family::ShiftedSquare,
            "custom" => Family::Custom {
                values: raw
                    .values
                    .ok_or_else(|| D::Error::custom("missing field `values`"))?
                    .iter()
                    .map(|v| parse_rational(v))
                    .collect::<Result<_>>()
                    .map_err(D::Error::custom)?,
            },
            other => return Err(D::Error::custom(format!("unknown weight family `{other}`"))),
        };
        let seq = WeightSequence::new(family).map_err(D::Error::custom)?;
        Ok(if raw.reciprocal { seq.reciprocal() } else { seq })
    }
}

/// Which drawing rule the urn follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    /// Sampling type: a color is drawn with probability proportional to its own weight.
    I,
    /// OK-Corral type: a color is drawn with probability proportional to the
    /// product of the other colors' weights.
    II,
}

impl Model {
    pub fn dual(self) -> Model {
        match self {
            Model::I => Model::II,
            Model::II => Model::I,
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::I => "I",
            Model::II => "II",
        })
    }
}

impl FromStr for Model {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" | "1" => Ok(Model::I),
            "II" | "ii" | "2" => Ok(Model::II),
            other => Err(Error::Parse(format!("unknown model `{other}`, expected I or II"))),
        }
    }
}

/// One urn instance. The last color is the one whose exhaustion stops the
/// process; with two colors the first is white and the second black.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnSpec {
    pub model: Model,
    pub weights: Vec<WeightSequence>,
    pub counts: Vec<u64>,
}

impl UrnSpec {
    pub fn new(model: Model, weights: Vec<WeightSequence>, counts: Vec<u64>) -> Result<Self> {
        let spec = UrnSpec { model, weights, counts };
        spec.validate()?;
        Ok(spec)
    }

    pub fn two_color(model: Model, a: WeightSequence, b: WeightSequence, n: u64, m: u64) -> Self {
        UrnSpec { model, weights: vec![a, b], counts: vec![n, m] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() < 2 {
            return Err(Error::InvalidArgument("an urn needs at least two colors".into()));
        }
        if self.weights.len() != self.counts.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weight sequences but {} initial counts",
                self.weights.len(),
                self.counts.len()
            )));
        }
        for (w, &c) in self.weights.iter().zip(&self.counts) {
            w.require_range(c)?;
        }
        Ok(())
    }

    /// Number of colors.
    pub fn colors(&self) -> usize {
        self.counts.len()
    }

    pub fn total_balls(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// True when every weight is rational, so exact arithmetic applies.
    pub fn is_rational(&self) -> bool {
        self.weights.iter().all(WeightSequence::is_rational)
    }

    /// Default scalar mode for this instance.
    pub fn default_mode(&self) -> ScalarMode {
        if self.is_rational() {
            ScalarMode::Exact
        } else {
            ScalarMode::BigFloat
        }
    }

    /// The dual instance: other model, every sequence reciprocated.
    pub fn dual(&self) -> UrnSpec {
        UrnSpec {
            model: self.model.dual(),
            weights: self.weights.iter().map(WeightSequence::reciprocal).collect(),
            counts: self.counts.clone(),
        }
    }

    /// Weight tables `[alpha_0..=alpha_{n_j}]` for every color.
    pub fn tables<T: Real>(&self) -> Result<Vec<Vec<T>>> {
        self.weights.iter().zip(&self.counts).map(|(w, &c)| w.table(c)).collect()
    }
}

impl fmt::Display for UrnSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "model {} [", self.model)?;
        for (i, (w, c)) in self.weights.iter().zip(&self.counts).enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{w} x{c}")?;
        }
        f.write_str("]")
    }
}

impl Default for WeightSequence {
    fn default() -> Self {
        Self::linear(1)
    }
}
