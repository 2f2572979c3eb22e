//! JSON experiment files and configuration descriptors.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::configs::{Alphabet, Configuration, Letter, OracleConfig, OracleRule, PeriodicConfig, ToeplitzTable};
use crate::error::{Error, Result};
use crate::groups::{ChainSpec, GroupElement, SubgroupChain};
use crate::harness::report::Format;
use crate::rational::{format_pq, parse_rational, Rational};

/// A rational given in JSON as `"p/q"`, a decimal string or an integer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Q(pub Rational);

impl Serialize for Q {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_pq(&self.0))
    }
}

impl<'de> Deserialize<'de> for Q {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct QVisitor;
        impl Visitor<'_> for QVisitor {
            type Value = Q;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as \"p/q\", a decimal string or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Q, E> {
                parse_rational(v).map(Q).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Q, E> {
                Ok(Q(Rational::from_integer(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Q, E> {
                i64::try_from(v).map(|v| Q(Rational::from_integer(v))).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(QVisitor)
    }
}

/// A group element given as a bare integer (rank 1) or a coordinate list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coords {
    Scalar(i64),
    Vector(Vec<i64>),
}

impl Coords {
    pub fn element(&self) -> GroupElement {
        match self {
            Coords::Scalar(v) => GroupElement::scalar(*v),
            Coords::Vector(v) => GroupElement::new(v.clone()),
        }
    }
}

/// A periodic word: letters in canonical order of `F_level`, or a map from
/// coordinates (`"3"`, `"1,2"`) to letters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WordSpec {
    List(Vec<Letter>),
    Map(BTreeMap<String, Letter>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConfigDescriptor {
    Periodic {
        level: usize,
        word: WordSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabet: Option<Vec<String>>,
    },
    Toeplitz {
        assignments: Vec<(usize, Coords, Letter)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        alphabet: Option<Vec<String>>,
    },
    Oracle {
        #[serde(rename = "box")]
        radius: u64,
        rule: String,
    },
}

fn alphabet_of(names: &Option<Vec<String>>) -> Result<Alphabet> {
    match names {
        Some(n) => Alphabet::new(n.iter().cloned()),
        None => Ok(Alphabet::binary()),
    }
}

impl ConfigDescriptor {
    /// Builds the configuration; `pointer` locates the descriptor in the experiment file
    /// for error messages.
    pub fn build(&self, chain: &SubgroupChain, pointer: &str) -> Result<Configuration> {
        let schema = |suffix: &str, message: String| Error::Schema { pointer: format!("{pointer}{suffix}"), message };
        match self {
            ConfigDescriptor::Periodic { level, word, alphabet } => {
                chain.check_level(*level).map_err(|e| schema("/level", e.to_string()))?;
                let alphabet = alphabet_of(alphabet)?;
                let letters = match word {
                    WordSpec::List(l) => l.clone(),
                    WordSpec::Map(m) => {
                        let mut by_index = vec![None; chain.domain_size(*level)];
                        for (key, &letter) in m {
                            let coords: std::result::Result<Vec<i64>, _> = key.split(',').map(|c| c.trim().parse()).collect();
                            let g = GroupElement::new(coords.map_err(|_| schema(&format!("/word/{key}"), "bad coordinates".into()))?);
                            if g.rank() != chain.rank() {
                                return Err(schema(&format!("/word/{key}"), format!("expected {} coordinates", chain.rank())));
                            }
                            by_index[chain.rep_index(&g, *level)] = Some(letter);
                        }
                        let mut out = Vec::with_capacity(by_index.len());
                        for (i, l) in by_index.into_iter().enumerate() {
                            let missing = chain.element_at(*level, i);
                            out.push(l.ok_or_else(|| schema("/word", format!("no letter for {missing}")))?);
                        }
                        out
                    }
                };
                Ok(PeriodicConfig::new(chain.clone(), *level, alphabet, letters).map_err(|e| schema("/word", e.to_string()))?.into())
            }
            ConfigDescriptor::Toeplitz { assignments, alphabet } => {
                let alphabet = alphabet_of(alphabet)?;
                let triples = assignments.iter().map(|(n, c, l)| (*n, c.element(), *l));
                Ok(ToeplitzTable::new(chain.clone(), alphabet, triples).map_err(|e| schema("/assignments", e.to_string()))?.into())
            }
            ConfigDescriptor::Oracle { radius, rule } => {
                let rule = OracleRule::parse(rule, *radius).map_err(|e| schema("/rule", e.to_string()))?;
                Ok(OracleConfig::builtin(chain.rank(), *radius, rule).map_err(|e| schema("/rule", e.to_string()))?.into())
            }
        }
    }
}

/// A subset of `G` whose density is requested.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SetDescriptor {
    /// A union of cosets of `H_level`.
    Cosets { level: usize, reps: Vec<Coords> },
    /// `Per_{H_n}` of the first configuration.
    Per(usize),
    /// `{g : x(g) = a}` for the first configuration.
    Letter(Letter),
    /// Disagreement set of the first two configurations.
    Disagreement,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Density,
    Distance,
    Entropy,
    Omega,
    Path,
    Krieger,
    Toeplitz,
    Verify,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Density => "density",
            Kind::Distance => "distance",
            Kind::Entropy => "entropy",
            Kind::Omega => "omega",
            Kind::Path => "path",
            Kind::Krieger => "krieger",
            Kind::Toeplitz => "toeplitz",
            Kind::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Dstar,
    Weyl,
    Besicovitch,
    Dwprime,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToeplitzAction {
    #[default]
    Verify,
    Profile,
    Approx,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Chain,
    Density,
    Path,
    Interpolation,
    Krieger,
    EntropyContinuity,
    EsBound,
    Prokhorov,
    Omega,
    Regular,
    Shearer,
    Sandwich,
    #[default]
    All,
}

impl Suite {
    pub const EACH: [Suite; 12] = [
        Suite::Chain,
        Suite::Density,
        Suite::Path,
        Suite::Interpolation,
        Suite::Krieger,
        Suite::EntropyContinuity,
        Suite::EsBound,
        Suite::Prokhorov,
        Suite::Omega,
        Suite::Regular,
        Suite::Shearer,
        Suite::Sandwich,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Chain => "chain",
            Suite::Density => "density",
            Suite::Path => "path",
            Suite::Interpolation => "interpolation",
            Suite::Krieger => "krieger",
            Suite::EntropyContinuity => "entropy-continuity",
            Suite::EsBound => "es-bound",
            Suite::Prokhorov => "prokhorov",
            Suite::Omega => "omega",
            Suite::Regular => "regular",
            Suite::Shearer => "shearer",
            Suite::Sandwich => "sandwich",
            Suite::All => "all",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::ParameterOutOfRange(format!("unknown suite `{s}`")))
    }
}

/// Growth of the nested boxes `[0, L_n)` used by `omega`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "growth", rename_all = "lowercase", deny_unknown_fields)]
pub enum Boxes {
    /// `L_n = n + 1`.
    Linear { count: usize },
    /// `L_{n+1} ≈ L_n / (1 − eps)`.
    Geometric { eps: Q, count: usize },
    /// The chain's own `F_n`.
    Chain,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// One experiment. Fields not used by `kind` are ignored.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: Kind,
    /// Defaults to the dyadic chain of depth `depth` (or 10).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub configs: Vec<ConfigDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set: Option<SetDescriptor>,
    /// Følner level for densities and distances, or the deepest level for
    /// entropy and approximation traces.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    /// Window radius for non-exact scans.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<Vec<Q>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stages: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_level: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Q>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub literal_quota: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boxes: Option<Boxes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ToeplitzAction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<Suite>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    /// Record wall time in the report (breaks byte-identical reruns).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub wall_time: bool,
}

impl ExperimentSpec {
    pub fn new(kind: Kind) -> Self {
        ExperimentSpec {
            kind,
            chain: None,
            configs: Vec::new(),
            set: None,
            level: None,
            depth: None,
            window: None,
            metric: None,
            t_grid: None,
            gamma: None,
            alphabet_size: None,
            stages: None,
            first_level: None,
            tolerance: None,
            literal_quota: None,
            boxes: None,
            action: None,
            suite: None,
            seed: None,
            output: None,
            wall_time: false,
        }
    }

    /// The explicit chain, or the dyadic chain of depth `depth` (default 10).
    pub fn resolve_chain(&self) -> Result<SubgroupChain> {
        match &self.chain {
            Some(spec) => SubgroupChain::from_spec(spec).map_err(|e| Error::Schema { pointer: "/chain".into(), message: e.to_string() }),
            None => Ok(SubgroupChain::dyadic(self.depth.unwrap_or(10))),
        }
    }

    pub fn build_configs(&self, chain: &SubgroupChain) -> Result<Vec<Configuration>> {
        self.configs.iter().enumerate().map(|(i, d)| d.build(chain, &format!("/configs/{i}"))).collect()
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for segment in path.iter() {
        match segment {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { .. } | Segment::Unknown => {}
        }
    }
    out
}

/// Parses a JSON spec, reporting violations with a JSON-pointer path.
pub fn parse_spec(text: &str) -> Result<ExperimentSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        pointer: json_pointer(e.path()),
        message: e.inner().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_depth_is_a_schema_error() {
        let err = parse_spec(r#"{"kind": "path", "depth": -1}"#).unwrap_err();
        match err {
            Error::Schema { pointer, .. } => assert_eq!(pointer, "/depth"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn nested_pointer() {
        let err = parse_spec(r#"{"kind": "path", "t_grid": ["1/2", "x"]}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref pointer, .. } if pointer == "/t_grid/1"), "{err:?}");
        let err = parse_spec(r#"{"kind": "path", "chain": {"rank": 1, "scales": [2, "a"]}}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref pointer, .. } if pointer == "/chain/scales/1"), "{err:?}");
        let err = parse_spec(r#"{"kind": "nope"}"#).unwrap_err();
        assert!(matches!(err, Error::Schema { ref pointer, .. } if pointer == "/kind"), "{err:?}");
    }

    #[test]
    fn descriptors_build() {
        let spec = parse_spec(
            r#"{"kind": "distance",
                "chain": {"rank": 1, "scales": [2, 4]},
                "configs": [
                  {"variant": "periodic", "level": 1, "word": {"0": 1, "1": 0}},
                  {"variant": "periodic", "level": 2, "word": [0, 0, 1, 1]},
                  {"variant": "toeplitz", "assignments": [[1, 0, 1], [2, 1, 0]]},
                  {"variant": "oracle", "box": 64, "rule": "block_alternating(1/2)"}
                ]}"#,
        )
        .unwrap();
        let chain = spec.resolve_chain().unwrap();
        let configs = spec.build_configs(&chain).unwrap();
        assert_eq!(configs[0].evaluate(&GroupElement::scalar(2)), Some(1));
        assert_eq!(configs[1].evaluate(&GroupElement::scalar(6)), Some(1));
        assert_eq!(configs[2].evaluate(&GroupElement::scalar(3)), None);
        assert_eq!(configs[3].evaluate(&GroupElement::scalar(0)), Some(1));

        let bad = parse_spec(r#"{"kind": "density", "configs": [{"variant": "periodic", "level": 1, "word": {"0": 1}}]}"#).unwrap();
        let chain = bad.resolve_chain().unwrap();
        let err = bad.build_configs(&chain).unwrap_err();
        assert!(matches!(err, Error::Schema { ref pointer, .. } if pointer == "/configs/0/word"), "{err:?}");
    }

    #[test]
    fn rationals_accept_several_spellings() {
        let spec = parse_spec(r#"{"kind": "path", "t_grid": ["1/4", 1, "0.5"]}"#).unwrap();
        let grid: Vec<Rational> = spec.t_grid.unwrap().into_iter().map(|q| q.0).collect();
        assert_eq!(grid, vec![Rational::new(1, 4), Rational::from_integer(1), Rational::new(1, 2)]);
    }
}
