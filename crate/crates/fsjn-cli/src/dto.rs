//! File formats: handle JSON (lazy source + eagerly materialized measures +
//! provenance certificates + optional replay base) and the cylinder-family
//! JSON. All numbers are exact fraction strings; key order is fixed by struct
//! declaration so identical runs produce identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use fsjn_core::measure::FiniteSignedMeasure;
use fsjn_core::point::{CantorPoint, Point, SignVector};
use fsjn_core::rational::{format_rational, parse_rational};
use fsjn_core::seq::{
    Certificate, GeneratorSpec, HandleSource, LimitOracle, PointSeq, SectionSpec, SequenceHandle,
    TransformStep,
};
use fsjn_core::space::{OmegaAlgebra, SpaceId};
use fsjn_core::Rational;

use crate::names::spec_name;
use crate::CliError;

pub const HANDLE_FORMAT: &str = "fsjn-handle/1";
pub const CYLINDER_FORMAT: &str = "fsjn-cylinders/1";

// ---------------------------------------------------------------------------
// Point rendering and space-directed parsing
// ---------------------------------------------------------------------------

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

fn parse_rat(s: &str) -> Result<Rational, CliError> {
    parse_rational(s).map_err(|e| usage(format!("bad fraction '{s}': {e}")))
}

fn parse_cantor(s: &str) -> Result<CantorPoint, CliError> {
    let err = || usage(format!("bad binary-word point '{s}'"));
    let (bits, tail_part) = s.split_once('(').ok_or_else(err)?;
    let tail = match tail_part {
        "0)^w" => false,
        "1)^w" => true,
        _ => return Err(err()),
    };
    let word = bits
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(err()),
        })
        .collect::<Result<Vec<bool>, CliError>>()?;
    Ok(CantorPoint::new(word, tail))
}

fn parse_signs(s: &str) -> Result<SignVector, CliError> {
    let mut bits = 0u64;
    let mut n = 0u32;
    for c in s.chars() {
        match c {
            '+' => bits |= 1 << n,
            '-' => {}
            _ => return Err(usage(format!("bad sign vector '{s}'"))),
        }
        n += 1;
        if n > 63 {
            return Err(usage(format!("sign vector '{s}' is too long")));
        }
    }
    Ok(SignVector::new(n, bits))
}

/// Parses a `Point::render()` string back under a known space.
pub fn parse_point(space: &SpaceId, s: &str) -> Result<Point, CliError> {
    let err = || usage(format!("bad point '{s}' for space {}", space.id_str()));
    let inner = || s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(err);
    let point = match space {
        SpaceId::UnitSquare => {
            let inner = inner()?;
            let (x, y) = inner.split_once(',').ok_or_else(err)?;
            Point::Square { x: parse_rat(x)?, y: parse_rat(y)? }
        }
        SpaceId::Omega(_) => Point::Nat(s.parse().map_err(|_| err())?),
        SpaceId::Cantor => Point::Word(parse_cantor(s)?),
        SpaceId::Product => {
            let inner = inner()?;
            let (signs, idx) = inner.rsplit_once(',').ok_or_else(err)?;
            Point::Prod { s: parse_signs(signs)?, i: idx.parse().map_err(|_| err())? }
        }
        SpaceId::Doubled { .. } => {
            let inner = inner()?;
            let (base, side) = inner.rsplit_once(',').ok_or_else(err)?;
            let side = match side {
                "0" => false,
                "1" => true,
                _ => return Err(err()),
            };
            Point::Doubled { base: parse_cantor(base)?, side }
        }
        SpaceId::Pairs => {
            let inner = inner()?;
            let (k, level) = inner.split_once(',').ok_or_else(err)?;
            let level = match level {
                "0" => false,
                "1" => true,
                _ => return Err(err()),
            };
            Point::Pair { k: k.parse().map_err(|_| err())?, level }
        }
    };
    space.canonicalize(point).map_err(|e| usage(e.to_string()))
}

// ---------------------------------------------------------------------------
// Spaces
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDto {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubled: Option<Vec<String>>,
}

pub fn space_to_dto(space: &SpaceId) -> SpaceDto {
    let doubled = match space {
        SpaceId::Doubled { doubled } => {
            Some(doubled.iter().map(|w| w.render()).collect::<Vec<String>>())
        }
        _ => None,
    };
    SpaceDto { id: space.id_str(), doubled }
}

pub fn space_from_dto(dto: &SpaceDto) -> Result<SpaceId, CliError> {
    match dto.id.as_str() {
        "unit-square" => Ok(SpaceId::UnitSquare),
        "omega/full" => Ok(SpaceId::Omega(OmegaAlgebra::Full)),
        "omega/pairing" => Ok(SpaceId::Omega(OmegaAlgebra::Pairing)),
        "omega/density" => Ok(SpaceId::Omega(OmegaAlgebra::Density)),
        "cantor" => Ok(SpaceId::Cantor),
        "product" => Ok(SpaceId::Product),
        "pairs" => Ok(SpaceId::Pairs),
        "doubled-cantor" => {
            let words = dto
                .doubled
                .as_deref()
                .unwrap_or(&[])
                .iter()
                .map(|s| parse_cantor(s))
                .collect::<Result<Vec<CantorPoint>, CliError>>()?;
            Ok(SpaceId::Doubled { doubled: words })
        }
        other => Err(usage(format!("unknown space id '{other}'"))),
    }
}

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomDto {
    pub point: String,
    pub coef: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureDto {
    pub space: String,
    pub atoms: Vec<AtomDto>,
}

pub fn measure_to_dto(space: &SpaceId, m: &FiniteSignedMeasure) -> MeasureDto {
    MeasureDto {
        space: space.id_str(),
        atoms: m
            .atoms()
            .map(|(p, c)| AtomDto { point: p.render(), coef: format_rational(c) })
            .collect(),
    }
}

pub fn measure_from_dto(space: &SpaceId, dto: &MeasureDto) -> Result<FiniteSignedMeasure, CliError> {
    if dto.space != space.id_str() {
        return Err(usage(format!(
            "measure space '{}' does not match handle space '{}'",
            dto.space,
            space.id_str()
        )));
    }
    let mut atoms = Vec::with_capacity(dto.atoms.len());
    for a in &dto.atoms {
        atoms.push((parse_point(space, &a.point)?, parse_rat(&a.coef)?));
    }
    Ok(FiniteSignedMeasure::from_atoms(atoms))
}

// ---------------------------------------------------------------------------
// Generator specifications
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PointSeqDto {
    SquareVertical { x: String },
    OmegaShift { offset: u64 },
    CantorVdc,
}

fn point_seq_to_dto(s: &PointSeq) -> PointSeqDto {
    match s {
        PointSeq::SquareVertical { x } => PointSeqDto::SquareVertical { x: format_rational(x) },
        PointSeq::OmegaShift { offset } => PointSeqDto::OmegaShift { offset: *offset },
        PointSeq::CantorVdc => PointSeqDto::CantorVdc,
    }
}

fn point_seq_from_dto(dto: &PointSeqDto) -> Result<PointSeq, CliError> {
    Ok(match dto {
        PointSeqDto::SquareVertical { x } => PointSeq::SquareVertical { x: parse_rat(x)? },
        PointSeqDto::OmegaShift { offset } => PointSeq::OmegaShift { offset: *offset },
        PointSeqDto::CantorVdc => PointSeq::CantorVdc,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SectionDto {
    Identity,
    PreferDoubledSide { doubled: Vec<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", deny_unknown_fields)]
pub enum GenSpecDto {
    #[serde(rename = "conv-pair")]
    ConvPair { xs: PointSeqDto, x: String },
    #[serde(rename = "conv-pair-triple")]
    Triple { xs: PointSeqDto, x: String, dust: PointSeqDto },
    #[serde(rename = "square1")]
    Square1,
    #[serde(rename = "square2")]
    Square2,
    #[serde(rename = "square3")]
    Square3 { alpha: String },
    #[serde(rename = "square4")]
    Square4,
    #[serde(rename = "schachermayer")]
    Schachermayer,
    #[serde(rename = "product")]
    Product,
    #[serde(rename = "cantor")]
    Cantor,
    #[serde(rename = "uds")]
    Uds,
    #[serde(rename = "transport")]
    Transport { section: SectionDto },
    #[serde(rename = "ad-dup")]
    AdDuplicate,
}

pub fn gen_spec_to_dto(spec: &GeneratorSpec) -> GenSpecDto {
    match spec {
        GeneratorSpec::ConvPair { xs, x } => {
            GenSpecDto::ConvPair { xs: point_seq_to_dto(xs), x: x.render() }
        }
        GeneratorSpec::TripleWithVanishingAtom { xs, x, dust } => GenSpecDto::Triple {
            xs: point_seq_to_dto(xs),
            x: x.render(),
            dust: point_seq_to_dto(dust),
        },
        GeneratorSpec::Square1 => GenSpecDto::Square1,
        GeneratorSpec::Square2 => GenSpecDto::Square2,
        GeneratorSpec::Square3 { alpha } => {
            GenSpecDto::Square3 { alpha: format_rational(alpha) }
        }
        GeneratorSpec::Square4 => GenSpecDto::Square4,
        GeneratorSpec::PairingHalves => GenSpecDto::Schachermayer,
        GeneratorSpec::Product => GenSpecDto::Product,
        GeneratorSpec::CantorLevels => GenSpecDto::Cantor,
        GeneratorSpec::Uds => GenSpecDto::Uds,
        GeneratorSpec::Transport { section } => GenSpecDto::Transport {
            section: match section {
                SectionSpec::Identity => SectionDto::Identity,
                SectionSpec::PreferDoubledSide { doubled } => SectionDto::PreferDoubledSide {
                    doubled: doubled.iter().map(|w| w.render()).collect(),
                },
            },
        },
        GeneratorSpec::AdDuplicate => GenSpecDto::AdDuplicate,
    }
}

pub fn gen_spec_from_dto(dto: &GenSpecDto) -> Result<GeneratorSpec, CliError> {
    let square_point = |s: &str| parse_point(&SpaceId::UnitSquare, s);
    Ok(match dto {
        GenSpecDto::ConvPair { xs, x } => GeneratorSpec::ConvPair {
            xs: point_seq_from_dto(xs)?,
            x: square_point(x)?,
        },
        GenSpecDto::Triple { xs, x, dust } => GeneratorSpec::TripleWithVanishingAtom {
            xs: point_seq_from_dto(xs)?,
            x: square_point(x)?,
            dust: point_seq_from_dto(dust)?,
        },
        GenSpecDto::Square1 => GeneratorSpec::Square1,
        GenSpecDto::Square2 => GeneratorSpec::Square2,
        GenSpecDto::Square3 { alpha } => GeneratorSpec::Square3 { alpha: parse_rat(alpha)? },
        GenSpecDto::Square4 => GeneratorSpec::Square4,
        GenSpecDto::Schachermayer => GeneratorSpec::PairingHalves,
        GenSpecDto::Product => GeneratorSpec::Product,
        GenSpecDto::Cantor => GeneratorSpec::CantorLevels,
        GenSpecDto::Uds => GeneratorSpec::Uds,
        GenSpecDto::Transport { section } => GeneratorSpec::Transport {
            section: match section {
                SectionDto::Identity => SectionSpec::Identity,
                SectionDto::PreferDoubledSide { doubled } => SectionSpec::PreferDoubledSide {
                    doubled: doubled
                        .iter()
                        .map(|s| parse_cantor(s))
                        .collect::<Result<Vec<CantorPoint>, CliError>>()?,
                },
            },
        },
        GenSpecDto::AdDuplicate => GeneratorSpec::AdDuplicate,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceDto {
    Generator { spec: GenSpecDto },
    Materialized,
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OracleDto {
    Zero,
    SinglePoint { at: String, value: String },
    Square1,
    Square1Evens,
    Square2,
    Square3 { alpha: String },
    Square4,
}

pub fn oracle_to_dto(o: &LimitOracle) -> OracleDto {
    match o {
        LimitOracle::Zero => OracleDto::Zero,
        LimitOracle::SinglePoint { at, value } => {
            OracleDto::SinglePoint { at: at.render(), value: format_rational(value) }
        }
        LimitOracle::Square1 => OracleDto::Square1,
        LimitOracle::Square1Evens => OracleDto::Square1Evens,
        LimitOracle::Square2 => OracleDto::Square2,
        LimitOracle::Square3 { alpha } => OracleDto::Square3 { alpha: format_rational(alpha) },
        LimitOracle::Square4 => OracleDto::Square4,
    }
}

pub fn oracle_from_dto(space: &SpaceId, dto: &OracleDto) -> Result<LimitOracle, CliError> {
    Ok(match dto {
        OracleDto::Zero => LimitOracle::Zero,
        OracleDto::SinglePoint { at, value } => LimitOracle::SinglePoint {
            at: parse_point(space, at)?,
            value: parse_rat(value)?,
        },
        OracleDto::Square1 => LimitOracle::Square1,
        OracleDto::Square1Evens => LimitOracle::Square1Evens,
        OracleDto::Square2 => LimitOracle::Square2,
        OracleDto::Square3 { alpha } => LimitOracle::Square3 { alpha: parse_rat(alpha)? },
        OracleDto::Square4 => LimitOracle::Square4,
    })
}

// ---------------------------------------------------------------------------
// Provenance steps and certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepDto {
    pub op: String,
    pub params: Vec<(String, String)>,
    pub certificate: CertDto,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CertDto {
    Normalize {
        rows: Vec<(u64, String)>,
    },
    Truncate {
        rows: Vec<(u64, String, String)>,
    },
    Extract {
        picks: Vec<u64>,
        exact: bool,
    },
    OffLimit {
        rows: Vec<(u64, String, String)>,
    },
    RestrictLimit {
        rows: Vec<(u64, String, String)>,
    },
    #[serde(rename_all = "camelCase")]
    Difference {
        beta: String,
        rows: Vec<(u64, u64, String)>,
    },
    #[serde(rename_all = "camelCase")]
    Disjointify {
        alpha_limit: String,
        beta: Option<String>,
        stages: Vec<StepDto>,
        disjoint_verified: bool,
    },
    Stabilize {
        picks: Vec<u64>,
        alpha: Vec<String>,
        exact: bool,
    },
    DropAtom {
        rows: Vec<(u64, String, String)>,
    },
    PairReduce {
        rows: Vec<(u64, String, String)>,
    },
    Concentrate {
        rows: Vec<(u64, String)>,
    },
}

fn rows2(rows: &[(u64, Rational)]) -> Vec<(u64, String)> {
    rows.iter().map(|(n, a)| (*n, format_rational(a))).collect()
}

fn rows3(rows: &[(u64, Rational, Rational)]) -> Vec<(u64, String, String)> {
    rows.iter().map(|(n, a, b)| (*n, format_rational(a), format_rational(b))).collect()
}

fn unrows2(rows: &[(u64, String)]) -> Result<Vec<(u64, Rational)>, CliError> {
    rows.iter().map(|(n, a)| Ok((*n, parse_rat(a)?))).collect()
}

fn unrows3(rows: &[(u64, String, String)]) -> Result<Vec<(u64, Rational, Rational)>, CliError> {
    rows.iter().map(|(n, a, b)| Ok((*n, parse_rat(a)?, parse_rat(b)?))).collect()
}

pub fn step_to_dto(step: &TransformStep) -> StepDto {
    let certificate = match &step.certificate {
        Certificate::Normalize { rows } => CertDto::Normalize { rows: rows2(rows) },
        Certificate::Truncate { rows } => CertDto::Truncate { rows: rows3(rows) },
        Certificate::Extract { picks, exact } => {
            CertDto::Extract { picks: picks.clone(), exact: *exact }
        }
        Certificate::OffL { rows } => CertDto::OffLimit { rows: rows3(rows) },
        Certificate::RestrictL { rows } => CertDto::RestrictLimit { rows: rows3(rows) },
        Certificate::Difference { beta, rows } => CertDto::Difference {
            beta: format_rational(beta),
            rows: rows.iter().map(|(a, b, r)| (*a, *b, format_rational(r))).collect(),
        },
        Certificate::Disjointify { alpha_limit, beta, stages, disjoint_verified } => {
            CertDto::Disjointify {
                alpha_limit: format_rational(alpha_limit),
                beta: beta.as_ref().map(format_rational),
                stages: stages.iter().map(step_to_dto).collect(),
                disjoint_verified: *disjoint_verified,
            }
        }
        Certificate::Stabilize { picks, alpha, exact } => CertDto::Stabilize {
            picks: picks.clone(),
            alpha: alpha.iter().map(format_rational).collect(),
            exact: *exact,
        },
        Certificate::DropAtom { rows } => CertDto::DropAtom { rows: rows3(rows) },
        Certificate::PairReduce { rows } => CertDto::PairReduce { rows: rows.clone() },
        Certificate::Concentrate { rows } => CertDto::Concentrate { rows: rows2(rows) },
    };
    StepDto { op: step.op.clone(), params: step.params.clone(), certificate }
}

pub fn step_from_dto(dto: &StepDto) -> Result<TransformStep, CliError> {
    let certificate = match &dto.certificate {
        CertDto::Normalize { rows } => Certificate::Normalize { rows: unrows2(rows)? },
        CertDto::Truncate { rows } => Certificate::Truncate { rows: unrows3(rows)? },
        CertDto::Extract { picks, exact } => {
            Certificate::Extract { picks: picks.clone(), exact: *exact }
        }
        CertDto::OffLimit { rows } => Certificate::OffL { rows: unrows3(rows)? },
        CertDto::RestrictLimit { rows } => Certificate::RestrictL { rows: unrows3(rows)? },
        CertDto::Difference { beta, rows } => Certificate::Difference {
            beta: parse_rat(beta)?,
            rows: rows
                .iter()
                .map(|(a, b, r)| Ok((*a, *b, parse_rat(r)?)))
                .collect::<Result<_, CliError>>()?,
        },
        CertDto::Disjointify { alpha_limit, beta, stages, disjoint_verified } => {
            Certificate::Disjointify {
                alpha_limit: parse_rat(alpha_limit)?,
                beta: beta.as_deref().map(parse_rat).transpose()?,
                stages: stages
                    .iter()
                    .map(step_from_dto)
                    .collect::<Result<Vec<TransformStep>, CliError>>()?,
                disjoint_verified: *disjoint_verified,
            }
        }
        CertDto::Stabilize { picks, alpha, exact } => Certificate::Stabilize {
            picks: picks.clone(),
            alpha: alpha
                .iter()
                .map(|s| parse_rat(s))
                .collect::<Result<Vec<Rational>, CliError>>()?,
            exact: *exact,
        },
        CertDto::DropAtom { rows } => Certificate::DropAtom { rows: unrows3(rows)? },
        CertDto::PairReduce { rows } => Certificate::PairReduce { rows: rows.clone() },
        CertDto::Concentrate { rows } => Certificate::Concentrate { rows: unrows2(rows)? },
    };
    Ok(TransformStep { op: dto.op.clone(), params: dto.params.clone(), certificate })
}

// ---------------------------------------------------------------------------
// Handles
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct HandleDto {
    pub format: String,
    pub space: SpaceDto,
    pub index_origin: u64,
    pub horizon: u64,
    pub cap: u64,
    pub source: SourceDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_limit: Option<String>,
    pub provenance: Vec<StepDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replay_base: Option<Box<HandleDto>>,
    pub measures: Vec<MeasureDto>,
}

/// A handle read back from disk, with the materialization parameters and
/// replay base recorded in the file.
#[derive(Debug, Clone)]
pub struct LoadedHandle {
    pub handle: SequenceHandle,
    pub horizon: u64,
    pub cap: u64,
    pub replay_base: Option<SequenceHandle>,
}

/// How many measures a handle file eagerly embeds: generator-backed sources
/// store a `min(horizon, cap)` prefix (the source itself is enough to rebuild
/// everything); materialized sources store every measure they have.
fn stored_indices(h: &SequenceHandle, horizon: u64, cap: u64) -> Vec<u64> {
    match &h.source {
        HandleSource::Generator(_) => h.indices(horizon.min(cap)).collect(),
        HandleSource::Materialized(_) => h.indices(u64::MAX).collect(),
    }
}

pub fn handle_to_dto(
    h: &SequenceHandle,
    horizon: u64,
    cap: u64,
    replay_base: Option<&SequenceHandle>,
) -> Result<HandleDto, CliError> {
    let measures = stored_indices(h, horizon, cap)
        .into_iter()
        .map(|n| {
            h.at(n)
                .map(|m| measure_to_dto(&h.space, &m))
                .map_err(|e| CliError::Usage(e.to_string()))
        })
        .collect::<Result<Vec<MeasureDto>, CliError>>()?;
    let source = match &h.source {
        HandleSource::Generator(spec) => SourceDto::Generator { spec: gen_spec_to_dto(spec) },
        HandleSource::Materialized(_) => SourceDto::Materialized,
    };
    let replay_base = replay_base
        .map(|b| {
            if !b.provenance.is_empty() {
                return Err(CliError::Usage(String::from(
                    "a replay base must have empty provenance",
                )));
            }
            handle_to_dto(b, horizon, cap, None).map(Box::new)
        })
        .transpose()?;
    Ok(HandleDto {
        format: HANDLE_FORMAT.to_string(),
        space: space_to_dto(&h.space),
        index_origin: h.index_origin,
        horizon,
        cap,
        source,
        oracle: h.oracle.as_ref().map(oracle_to_dto),
        l_limit: h.l_limit.as_ref().map(format_rational),
        provenance: h.provenance.iter().map(step_to_dto).collect(),
        replay_base,
        measures,
    })
}

pub fn handle_from_dto(dto: &HandleDto) -> Result<LoadedHandle, CliError> {
    if dto.format != HANDLE_FORMAT {
        return Err(usage(format!(
            "unsupported file format '{}'; expected '{HANDLE_FORMAT}'",
            dto.format
        )));
    }
    let space = space_from_dto(&dto.space)?;
    let measures = dto
        .measures
        .iter()
        .map(|m| measure_from_dto(&space, m))
        .collect::<Result<Vec<FiniteSignedMeasure>, CliError>>()?;
    let source = match &dto.source {
        SourceDto::Generator { spec } => HandleSource::Generator(gen_spec_from_dto(spec)?),
        SourceDto::Materialized => HandleSource::Materialized(measures.clone()),
    };
    let handle = SequenceHandle {
        space: space.clone(),
        index_origin: dto.index_origin,
        source,
        oracle: dto
            .oracle
            .as_ref()
            .map(|o| oracle_from_dto(&space, o))
            .transpose()?,
        l_limit: dto.l_limit.as_deref().map(parse_rat).transpose()?,
        provenance: dto
            .provenance
            .iter()
            .map(step_from_dto)
            .collect::<Result<Vec<TransformStep>, CliError>>()?,
    };
    // generator-backed files carry the measures as derived data; make sure
    // they have not drifted from the specification
    if matches!(handle.source, HandleSource::Generator(_)) {
        for (pos, n) in handle.indices(dto.measures.len() as u64).enumerate() {
            if pos >= measures.len() {
                break;
            }
            let regenerated = handle.at(n).map_err(|e| usage(e.to_string()))?;
            if regenerated != measures[pos] {
                return Err(usage(format!(
                    "stored measure at index {n} disagrees with the '{}' specification",
                    match &handle.source {
                        HandleSource::Generator(s) => spec_name(s),
                        HandleSource::Materialized(_) => unreachable!(),
                    }
                )));
            }
        }
    }
    let replay_base = dto
        .replay_base
        .as_ref()
        .map(|b| handle_from_dto(b).map(|l| l.handle))
        .transpose()?;
    Ok(LoadedHandle { handle, horizon: dto.horizon, cap: dto.cap, replay_base })
}

// ---------------------------------------------------------------------------
// Cylinder-family files
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CylinderElementDto {
    pub index: u64,
    pub declared_norm: String,
    pub additivity_ok: bool,
    pub declared_norm_ok: bool,
    pub vanishing_depth: u64,
    pub vanishing_ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CylinderFileDto {
    pub format: String,
    pub family: String,
    pub count: u64,
    pub check_depth: u64,
    pub elements: Vec<CylinderElementDto>,
    pub all_checks_pass: bool,
}

// ---------------------------------------------------------------------------
// File IO
// ---------------------------------------------------------------------------

/// Serializes any DTO as pretty JSON with a trailing newline (the canonical
/// on-disk form; reruns must be byte-identical).
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// What kind of file a JSON document is.
pub enum FileKind {
    Handle(Box<HandleDto>),
    Cylinders(Box<CylinderFileDto>),
}

/// Reads a JSON file and classifies it. Accepts full handle files, cylinder
/// files, and bare measures (a single `{"space", "atoms"}` object or an array
/// of them), which load as materialized handles with origin 0.
pub fn read_file(path: &Path) -> Result<FileKind, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{} is not valid JSON: {e}", path.display())))?;
    let reparse = |v: serde_json::Value| -> Result<FileKind, CliError> {
        match v.get("format").and_then(|f| f.as_str()) {
            Some(HANDLE_FORMAT) => {
                let dto: HandleDto = serde_json::from_value(v)
                    .map_err(|e| usage(format!("bad handle file {}: {e}", path.display())))?;
                Ok(FileKind::Handle(Box::new(dto)))
            }
            Some(CYLINDER_FORMAT) => {
                let dto: CylinderFileDto = serde_json::from_value(v)
                    .map_err(|e| usage(format!("bad cylinder file {}: {e}", path.display())))?;
                Ok(FileKind::Cylinders(Box::new(dto)))
            }
            Some(other) => Err(usage(format!(
                "{}: unsupported format '{other}'",
                path.display()
            ))),
            None => {
                // bare measures: one object or an array of objects
                let dtos: Vec<MeasureDto> = if v.is_array() {
                    serde_json::from_value(v)
                } else {
                    serde_json::from_value::<MeasureDto>(v).map(|m| vec![m])
                }
                .map_err(|e| usage(format!("bad measure file {}: {e}", path.display())))?;
                let first = dtos.first().ok_or_else(|| {
                    usage(format!("{} contains no measures", path.display()))
                })?;
                let space_dto = SpaceDto { id: first.space.clone(), doubled: None };
                let space = space_from_dto(&space_dto)?;
                let count = dtos.len() as u64;
                let handle_dto = HandleDto {
                    format: HANDLE_FORMAT.to_string(),
                    space: space_to_dto(&space),
                    index_origin: 0,
                    horizon: count,
                    cap: count,
                    source: SourceDto::Materialized,
                    oracle: None,
                    l_limit: None,
                    provenance: Vec::new(),
                    replay_base: None,
                    measures: dtos,
                };
                Ok(FileKind::Handle(Box::new(handle_dto)))
            }
        }
    };
    reparse(value)
}

/// Reads a file that must be a handle (atoms) file.
pub fn read_handle(path: &Path) -> Result<LoadedHandle, CliError> {
    match read_file(path)? {
        FileKind::Handle(dto) => handle_from_dto(&dto),
        FileKind::Cylinders(_) => Err(usage(format!(
            "{} is a cylinder-family file; this command needs an atom-sequence handle",
            path.display()
        ))),
    }
}

/// Writes text to `dir/name`, creating the directory, and returns the path.
pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<std::path::PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
