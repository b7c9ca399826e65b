//! Report documents: JSON bodies (fixed key order) plus CSV renderings with
//! authoritative fraction strings and advisory 20-significant-digit decimals.

use serde::Serialize;

use fsjn_core::analysis::{
    AuditReport, BalanceReport, Basis, BinomialTailQuery, Classification, DecayReport,
    LimitMassMethod, LimitMassReport, LimitSetReport,
};
use fsjn_core::rational::{decimal_approx, format_rational};
use fsjn_core::Rational;

use crate::CliError;

/// Significant digits of the advisory decimal renderings.
const SIG: usize = 20;

fn fr(r: &Rational) -> String {
    format_rational(r)
}

fn approx(r: &Rational) -> String {
    decimal_approx(r, SIG)
}

// ---------------------------------------------------------------------------
// Balance
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BalanceRowJson {
    pub index: u64,
    pub positive_mass: String,
    pub positive_mass_approx: String,
    pub deviation: String,
    pub deviation_approx: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BalanceJson {
    pub suite: &'static str,
    pub seed: u64,
    pub horizon: u64,
    pub tolerance: String,
    pub rows: Vec<BalanceRowJson>,
    pub max_tail_deviation: String,
    pub max_tail_deviation_approx: String,
    pub balanced: bool,
}

fn deviation(positive: &Rational) -> Rational {
    let d = positive - fsjn_core::rational::rat(1, 2);
    if d < Rational::from_integer(0.into()) {
        -d
    } else {
        d
    }
}

pub fn balance_json(r: &BalanceReport, seed: u64, horizon: u64) -> BalanceJson {
    BalanceJson {
        suite: "balance",
        seed,
        horizon,
        tolerance: fr(&r.tolerance),
        rows: r
            .rows
            .iter()
            .map(|row| {
                let dev = deviation(&row.positive_mass);
                BalanceRowJson {
                    index: row.index,
                    positive_mass: fr(&row.positive_mass),
                    positive_mass_approx: approx(&row.positive_mass),
                    deviation: fr(&dev),
                    deviation_approx: approx(&dev),
                }
            })
            .collect(),
        max_tail_deviation: fr(&r.max_tail_deviation),
        max_tail_deviation_approx: approx(&r.max_tail_deviation),
        balanced: r.balanced,
    }
}

pub fn balance_csv(r: &BalanceReport) -> Result<String, CliError> {
    let mut w = csv_writer();
    write_record(
        &mut w,
        &["index", "positiveMass", "positiveMassApprox", "deviation", "deviationApprox"],
    )?;
    for row in &r.rows {
        let dev = deviation(&row.positive_mass);
        write_record(
            &mut w,
            &[
                &row.index.to_string(),
                &fr(&row.positive_mass),
                &approx(&row.positive_mass),
                &fr(&dev),
                &approx(&dev),
            ],
        )?;
    }
    finish(w)
}

// ---------------------------------------------------------------------------
// Limit sets
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LimitSetRowJson {
    pub point: String,
    pub classification: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    pub basis: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_inf: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_sup: Option<String>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ChainCountsJson {
    pub limit: usize,
    pub liminf: usize,
    pub limsup: usize,
    pub support: usize,
    pub nested: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LimitSetsJson {
    pub suite: &'static str,
    pub seed: u64,
    pub horizon: u64,
    pub sampled: Vec<u64>,
    pub oracle_backed: bool,
    pub appears_finite: bool,
    pub counts: ChainCountsJson,
    pub rows: Vec<LimitSetRowJson>,
}

fn classification_name(c: &Classification) -> &'static str {
    match c {
        Classification::Limit(_) => "limit",
        Classification::LimInfPositive => "liminf-positive",
        Classification::LimSupPositive => "limsup-positive",
        Classification::Transient => "transient",
    }
}

pub fn limit_sets_json(r: &LimitSetReport, seed: u64) -> LimitSetsJson {
    LimitSetsJson {
        suite: "limit-sets",
        seed,
        horizon: r.horizon,
        sampled: r.sampled.clone(),
        oracle_backed: r.oracle_backed,
        appears_finite: r.appears_finite,
        counts: ChainCountsJson {
            limit: r.counts.limit,
            liminf: r.counts.liminf,
            limsup: r.counts.limsup,
            support: r.counts.support,
            nested: r.counts.nested(),
        },
        rows: r
            .rows
            .iter()
            .map(|row| {
                let value = match &row.classification {
                    Classification::Limit(v) => Some(fr(v)),
                    _ => None,
                };
                let (basis, window_inf, window_sup) = match &row.basis {
                    Basis::OracleExact => ("oracle", None, None),
                    Basis::WindowEstimate { inf, sup } => {
                        ("window", Some(fr(inf)), Some(fr(sup)))
                    }
                };
                LimitSetRowJson {
                    point: row.point.render(),
                    classification: classification_name(&row.classification),
                    value,
                    basis,
                    window_inf,
                    window_sup,
                }
            })
            .collect(),
    }
}

pub fn limit_sets_csv(r: &LimitSetReport) -> Result<String, CliError> {
    let mut w = csv_writer();
    write_record(
        &mut w,
        &["point", "classification", "value", "valueApprox", "basis", "windowInf", "windowSup"],
    )?;
    for row in &r.rows {
        let (value, value_approx) = match &row.classification {
            Classification::Limit(v) => (fr(v), approx(v)),
            _ => (String::new(), String::new()),
        };
        let (basis, inf, sup) = match &row.basis {
            Basis::OracleExact => ("oracle", String::new(), String::new()),
            Basis::WindowEstimate { inf, sup } => ("window", fr(inf), fr(sup)),
        };
        write_record(
            &mut w,
            &[
                &row.point.render(),
                classification_name(&row.classification),
                &value,
                &value_approx,
                basis,
                &inf,
                &sup,
            ],
        )?;
    }
    finish(w)
}

// ---------------------------------------------------------------------------
// Limit-set mass
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LimitMassJson {
    pub suite: &'static str,
    pub seed: u64,
    pub horizon: u64,
    pub sum: String,
    pub sum_approx: String,
    pub within_half: bool,
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub enumerated_points: Option<usize>,
}

pub fn limit_mass_json(r: &LimitMassReport, seed: u64, horizon: u64) -> LimitMassJson {
    let (method, enumerated_points) = match &r.method {
        LimitMassMethod::ClosedForm => ("closed-form", None),
        LimitMassMethod::WindowEnumerated { points } => ("window-enumerated", Some(*points)),
    };
    LimitMassJson {
        suite: "l-mass",
        seed,
        horizon,
        sum: fr(&r.sum),
        sum_approx: approx(&r.sum),
        within_half: r.within_half,
        method,
        enumerated_points,
    }
}

pub fn limit_mass_csv(r: &LimitMassReport) -> Result<String, CliError> {
    let mut w = csv_writer();
    write_record(&mut w, &["sum", "sumApprox", "withinHalf", "method", "enumeratedPoints"])?;
    let (method, pts) = match &r.method {
        LimitMassMethod::ClosedForm => ("closed-form", String::new()),
        LimitMassMethod::WindowEnumerated { points } => ("window-enumerated", points.to_string()),
    };
    write_record(
        &mut w,
        &[&fr(&r.sum), &approx(&r.sum), &r.within_half.to_string(), method, &pts],
    )?;
    finish(w)
}

// ---------------------------------------------------------------------------
// Decay
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecayRowJson {
    pub functional: String,
    pub values: Vec<(u64, String)>,
    pub tail_max: String,
    pub tail_max_approx: String,
    pub vanishing: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DecayJson {
    pub suite: &'static str,
    pub seed: u64,
    pub horizon: u64,
    pub tolerance: String,
    pub all_vanishing: bool,
    pub rows: Vec<DecayRowJson>,
}

pub fn decay_json(r: &DecayReport, seed: u64) -> DecayJson {
    DecayJson {
        suite: "decay",
        seed,
        horizon: r.horizon,
        tolerance: fr(&r.tolerance),
        all_vanishing: r.all_vanishing,
        rows: r
            .rows
            .iter()
            .map(|row| DecayRowJson {
                functional: row.name.to_string(),
                values: row.values.iter().map(|(n, v)| (*n, fr(v))).collect(),
                tail_max: fr(&row.tail_max),
                tail_max_approx: approx(&row.tail_max),
                vanishing: row.vanishing,
            })
            .collect(),
    }
}

pub fn decay_csv(r: &DecayReport) -> Result<String, CliError> {
    let mut w = csv_writer();
    write_record(&mut w, &["functional", "n", "value", "valueApprox"])?;
    for row in &r.rows {
        for (n, v) in &row.values {
            write_record(&mut w, &[&row.name.to_string(), &n.to_string(), &fr(v), &approx(v)])?;
        }
    }
    finish(w)
}

// ---------------------------------------------------------------------------
// Product-rectangle audit
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditRowJson {
    pub n: u64,
    pub case_one: bool,
    pub a_count: u64,
    pub b_count: u64,
    pub value: String,
    pub value_approx: String,
    pub rect_bound: String,
    pub bound_ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case_zero_bound: Option<String>,
    pub case_zero_ok: bool,
    pub threshold_passed: bool,
    pub within_two_eps: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditJson {
    pub pair: usize,
    pub a_desc: String,
    pub b_desc: String,
    pub eps: String,
    pub case_split: String,
    pub n_threshold: String,
    pub verdict: bool,
    pub rows: Vec<AuditRowJson>,
}

pub fn audit_json(pair: usize, a_desc: &str, b_desc: &str, r: &AuditReport) -> AuditJson {
    AuditJson {
        pair,
        a_desc: a_desc.to_string(),
        b_desc: b_desc.to_string(),
        eps: fr(&r.eps),
        case_split: fr(&r.case_split),
        n_threshold: fr(&r.n_threshold),
        verdict: r.verdict,
        rows: r
            .rows
            .iter()
            .map(|row| AuditRowJson {
                n: row.n,
                case_one: row.case_one,
                a_count: row.a_count,
                b_count: row.b_count,
                value: fr(&row.value),
                value_approx: approx(&row.value),
                rect_bound: fr(&row.rect_bound),
                bound_ok: row.bound_ok,
                case_zero_bound: row.case_zero_bound.as_ref().map(|b| fr(b)),
                case_zero_ok: row.case_zero_ok,
                threshold_passed: row.threshold_passed,
                within_two_eps: row.within_two_eps,
            })
            .collect(),
    }
}

pub fn audit_csv_rows(
    w: &mut csv::Writer<Vec<u8>>,
    pair: usize,
    a_desc: &str,
    b_desc: &str,
    r: &AuditReport,
) -> Result<(), CliError> {
    for row in &r.rows {
        write_record(
            w,
            &[
                &pair.to_string(),
                a_desc,
                b_desc,
                &row.n.to_string(),
                &row.case_one.to_string(),
                &row.a_count.to_string(),
                &row.b_count.to_string(),
                &fr(&row.value),
                &approx(&row.value),
                &fr(&row.rect_bound),
                &row.bound_ok.to_string(),
                &row.case_zero_ok.to_string(),
                &row.within_two_eps.to_string(),
            ],
        )?;
    }
    Ok(())
}

pub const AUDIT_CSV_HEADER: [&str; 13] = [
    "pair",
    "aDesc",
    "bDesc",
    "n",
    "caseOne",
    "aCount",
    "bCount",
    "value",
    "valueApprox",
    "rectBound",
    "boundOk",
    "caseZeroOk",
    "withinTwoEps",
];

// ---------------------------------------------------------------------------
// Binomial tails
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TailRowJson {
    pub n: u64,
    pub tail: String,
    pub tail_approx: String,
    pub bound_lower: String,
    pub bound_lower_approx: String,
    pub holds: bool,
}

pub fn tail_row_json(q: &BinomialTailQuery) -> TailRowJson {
    TailRowJson {
        n: q.n,
        tail: fr(&q.tail),
        tail_approx: approx(&q.tail),
        bound_lower: fr(&q.bound_lower),
        bound_lower_approx: approx(&q.bound_lower),
        holds: q.bound_holds == Some(true),
    }
}

// ---------------------------------------------------------------------------
// CSV plumbing
// ---------------------------------------------------------------------------

pub fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

pub fn write_record(w: &mut csv::Writer<Vec<u8>>, fields: &[&str]) -> Result<(), CliError> {
    w.write_record(fields)
        .map_err(|e| CliError::Usage(format!("csv write failed: {e}")))
}

pub fn finish(w: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Usage(format!("csv flush failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Usage(format!("csv is not UTF-8: {e}")))
}
