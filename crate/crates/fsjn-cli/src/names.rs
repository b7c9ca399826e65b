//! The generator catalog: CLI names to sequence-family specifications.

use fsjn_core::point::{CantorPoint, Point};
use fsjn_core::rational::{parse_rational, rat};
use fsjn_core::seq::{GeneratorSpec, PointSeq, SectionSpec};

use crate::CliError;

/// All atom-sequence generator names accepted by `generate` (the
/// cylinder-presented `rademacher` family is handled separately).
pub const GENERATOR_NAMES: [&str; 11] = [
    "conv-pair",
    "square1",
    "square2",
    "square3",
    "square4",
    "schachermayer",
    "product",
    "cantor",
    "uds",
    "transport",
    "ad-dup",
];

/// Extra per-generator parameters passed on the command line.
#[derive(Debug, Default)]
pub struct GeneratorParams<'a> {
    /// The weight parameter of `square3`, as `p/q`.
    pub alpha: Option<&'a str>,
    /// The column abscissa of `conv-pair`, as `p/q`.
    pub x: Option<&'a str>,
}

/// The doubled set of the default transport section: the all-ones word.
pub fn default_doubled() -> Vec<CantorPoint> {
    vec![CantorPoint::constant(true)]
}

/// Resolves a catalog name plus parameters to a generator specification.
pub fn generator_spec(name: &str, params: &GeneratorParams) -> Result<GeneratorSpec, CliError> {
    let parse = |flag: &str, s: &str| {
        parse_rational(s).map_err(|e| CliError::Usage(format!("bad --{flag}: {e}")))
    };
    let reject_alpha = |spec: GeneratorSpec| {
        if params.alpha.is_some() {
            Err(CliError::Usage(format!("--alpha does not apply to '{name}'")))
        } else {
            Ok(spec)
        }
    };
    match name {
        "conv-pair" => {
            let x = match params.x {
                Some(s) => parse("x", s)?,
                None => rat(1, 3),
            };
            reject_alpha(GeneratorSpec::ConvPair {
                xs: PointSeq::SquareVertical { x: x.clone() },
                x: Point::Square { x, y: rat(0, 1) },
            })
        }
        "square1" => reject_alpha(GeneratorSpec::Square1),
        "square2" => reject_alpha(GeneratorSpec::Square2),
        "square3" => {
            let alpha = match params.alpha {
                Some(s) => parse("alpha", s)?,
                None => rat(1, 3),
            };
            Ok(GeneratorSpec::Square3 { alpha })
        }
        "square4" => reject_alpha(GeneratorSpec::Square4),
        "schachermayer" => reject_alpha(GeneratorSpec::PairingHalves),
        "product" => reject_alpha(GeneratorSpec::Product),
        "cantor" => reject_alpha(GeneratorSpec::CantorLevels),
        "uds" => reject_alpha(GeneratorSpec::Uds),
        "transport" => reject_alpha(GeneratorSpec::Transport {
            section: SectionSpec::PreferDoubledSide { doubled: default_doubled() },
        }),
        "ad-dup" => reject_alpha(GeneratorSpec::AdDuplicate),
        other => Err(CliError::Usage(format!(
            "unknown generator '{other}'; expected one of {}, rademacher",
            GENERATOR_NAMES.join(", ")
        ))),
    }
}

/// The catalog name of a specification (file headers use these).
pub fn spec_name(spec: &GeneratorSpec) -> &'static str {
    match spec {
        GeneratorSpec::ConvPair { .. } => "conv-pair",
        GeneratorSpec::TripleWithVanishingAtom { .. } => "conv-pair-triple",
        GeneratorSpec::Square1 => "square1",
        GeneratorSpec::Square2 => "square2",
        GeneratorSpec::Square3 { .. } => "square3",
        GeneratorSpec::Square4 => "square4",
        GeneratorSpec::PairingHalves => "schachermayer",
        GeneratorSpec::Product => "product",
        GeneratorSpec::CantorLevels => "cantor",
        GeneratorSpec::Uds => "uds",
        GeneratorSpec::Transport { .. } => "transport",
        GeneratorSpec::AdDuplicate => "ad-dup",
    }
}

/// One named pipeline stage, possibly with an inline `name=arg` parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageSpec {
    /// Stage name as listed in the pipeline catalog.
    pub name: String,
    /// The inline argument, when given.
    pub arg: Option<String>,
}

/// Names accepted inside `--pipeline` (comma-separated, `name` or `name=arg`).
pub const STAGE_NAMES: [&str; 11] = [
    "normalize",
    "truncate",
    "extract-pointwise",
    "restrict-off-limit",
    "restrict-to-L",
    "difference-normalize",
    "disjointify",
    "stabilize",
    "drop-small-atom",
    "pair-reduce",
    "concentrate",
];

/// Splits one `--pipeline` element into a stage specification.
pub fn parse_stage(element: &str) -> Result<StageSpec, CliError> {
    let (name, arg) = match element.split_once('=') {
        Some((n, a)) => (n.trim(), Some(a.trim().to_string())),
        None => (element.trim(), None),
    };
    let canonical = if name == "restrict-to-limit" { "restrict-to-L" } else { name };
    if !STAGE_NAMES.contains(&canonical) {
        return Err(CliError::Usage(format!(
            "unknown pipeline stage '{name}'; expected one of {}",
            STAGE_NAMES.join(", ")
        )));
    }
    Ok(StageSpec { name: canonical.to_string(), arg })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_resolve() {
        for name in GENERATOR_NAMES {
            let spec = generator_spec(name, &GeneratorParams::default()).unwrap();
            assert_eq!(spec_name(&spec), name, "{name}");
        }
        assert!(generator_spec("nope", &GeneratorParams::default()).is_err());
    }

    #[test]
    fn alpha_is_rejected_where_meaningless() {
        let p = GeneratorParams { alpha: Some("1/2"), x: None };
        assert!(generator_spec("square1", &p).is_err());
        assert!(generator_spec("square3", &p).is_ok());
    }

    #[test]
    fn stages_parse_with_and_without_arguments() {
        assert_eq!(
            parse_stage("drop-small-atom=1/2").unwrap(),
            StageSpec { name: "drop-small-atom".into(), arg: Some("1/2".into()) }
        );
        assert_eq!(
            parse_stage("restrict-to-limit").unwrap(),
            StageSpec { name: "restrict-to-L".into(), arg: None }
        );
        assert!(parse_stage("frobnicate").is_err());
    }
}
