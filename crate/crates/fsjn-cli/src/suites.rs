//! The verification suites driven by `verify` and `report`: each runs an
//! analysis, renders a JSON body plus a CSV table, and reports pass/fail.

use serde::Serialize;
use serde_json::Value;

use fsjn_core::analysis::{
    balance_check, binomial_tail, binomial_tail_sweep, decay_report, l_mass_sum, limit_sets,
    product_proof_audit, AnalysisError,
};
use fsjn_core::functional::{canonical_family, IndexSet, NamedFunctional, SignSet, TestFunctional};
use fsjn_core::rational::{ceil_ratio, format_rational, parse_rational, rat};
use fsjn_core::space::SpaceId;
use fsjn_core::{Rational, SequenceHandle};

use crate::config::RunConfig;
use crate::reports;
use crate::seeded::{describe_index_set, describe_sign_set, rect_pairs, RectPair};
use crate::CliError;

/// One executed suite: a JSON body, a CSV table, and the verdict.
#[derive(Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub body: Value,
    pub csv: String,
    pub pass: bool,
    pub detail: Option<String>,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Usage(format!("report serialization: {e}")))
}

/// Analysis errors split into usage problems (exit 2) and failed certified
/// bounds (exit 1); the bound case is handled by the suites that can hit it.
fn usage_of(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::OracleRequired => CliError::Usage(String::from("limit oracle required")),
        AnalysisError::BoundFailed { .. } => CliError::Assertion(e.to_string()),
        other => CliError::Usage(other.to_string()),
    }
}

pub fn run_balance(h: &SequenceHandle, cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let r = balance_check(h, cfg.horizon, &cfg.tolerance).map_err(usage_of)?;
    let detail = (!r.balanced).then(|| {
        format!(
            "max tail deviation {} is not below tolerance {}",
            format_rational(&r.max_tail_deviation),
            format_rational(&r.tolerance)
        )
    });
    Ok(SuiteResult {
        name: "balance",
        body: to_value(&reports::balance_json(&r, cfg.seed, cfg.horizon))?,
        csv: reports::balance_csv(&r)?,
        pass: r.balanced,
        detail,
    })
}

pub fn run_limit_sets(h: &SequenceHandle, cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let r = limit_sets(h, cfg.horizon).map_err(usage_of)?;
    let nested = r.counts.nested();
    Ok(SuiteResult {
        name: "limit-sets",
        body: to_value(&reports::limit_sets_json(&r, cfg.seed))?,
        csv: reports::limit_sets_csv(&r)?,
        pass: nested,
        detail: (!nested).then(|| String::from("set-chain counts failed to nest")),
    })
}

pub fn run_l_mass(h: &SequenceHandle, cfg: &RunConfig) -> Result<SuiteResult, CliError> {
    let r = l_mass_sum(h, cfg.horizon).map_err(usage_of)?;
    let detail = (!r.within_half).then(|| {
        format!("limit-set mass {} exceeds 1/2", format_rational(&r.sum))
    });
    Ok(SuiteResult {
        name: "l-mass",
        body: to_value(&reports::limit_mass_json(&r, cfg.seed, cfg.horizon))?,
        csv: reports::limit_mass_csv(&r)?,
        pass: r.within_half,
        detail,
    })
}

/// Selects the functionals decay runs against: the whole canonical family,
/// the cylinder-style subset, or one functional by name.
pub fn select_family(
    space: &SpaceId,
    selector: Option<&str>,
) -> Result<Vec<NamedFunctional>, CliError> {
    let family = canonical_family(space);
    let selected: Vec<NamedFunctional> = match selector {
        None | Some("canonical") | Some("all") => family,
        Some("cylinders") => family
            .into_iter()
            .filter(|nf| {
                matches!(
                    &nf.functional,
                    TestFunctional::CylinderIndicator { .. }
                        | TestFunctional::CollapseCylinder { .. }
                        | TestFunctional::Rect { a: SignSet::Cylinder { .. }, .. }
                )
            })
            .collect(),
        Some(name) => family.into_iter().filter(|nf| nf.name == name).collect(),
    };
    if selected.is_empty() {
        return Err(CliError::Usage(format!(
            "family '{}' selects no functionals on space {}",
            selector.unwrap_or("canonical"),
            space.id_str()
        )));
    }
    Ok(selected)
}

pub fn run_decay(
    h: &SequenceHandle,
    cfg: &RunConfig,
    family: Option<&str>,
) -> Result<SuiteResult, CliError> {
    let fam = select_family(&h.space, family)?;
    let r = decay_report(h, &fam, cfg.horizon, &cfg.tolerance).map_err(usage_of)?;
    let failing: Vec<&str> = r
        .rows
        .iter()
        .filter(|row| !row.vanishing)
        .map(|row| row.name.as_str())
        .collect();
    let detail = (!failing.is_empty()).then(|| {
        format!("tail values above tolerance for: {}", failing.join(", "))
    });
    Ok(SuiteResult {
        name: "decay",
        body: to_value(&reports::decay_json(&r, cfg.seed))?,
        csv: reports::decay_csv(&r)?,
        pass: r.all_vanishing,
        detail,
    })
}

// ---------------------------------------------------------------------------
// Product-rectangle audit
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ProductAuditJson {
    suite: &'static str,
    seed: u64,
    eps: String,
    n_from: u64,
    n_to: u64,
    brute_cap: u64,
    pairs: usize,
    canonical_reciprocal: bool,
    all_verdicts: bool,
    audits: Vec<reports::AuditJson>,
}

/// How many seeded rectangle pairs the audit sweeps (beyond the canonical one).
pub const AUDIT_PAIRS: usize = 50;

pub fn canonical_rect_pair() -> RectPair {
    let a = SignSet::Cylinder { constraints: vec![(0, true)] };
    let b = IndexSet::All;
    let a_desc = describe_sign_set(&a);
    let b_desc = describe_index_set(&b);
    RectPair { a, b, a_desc, b_desc }
}

pub fn run_product_audit(
    h: &SequenceHandle,
    cfg: &RunConfig,
    eps: Option<&str>,
) -> Result<SuiteResult, CliError> {
    if h.space != SpaceId::Product {
        return Err(CliError::Usage(format!(
            "the product-audit suite needs a product-space handle, got {}",
            h.space.id_str()
        )));
    }
    let eps = parse_eps(eps)?.unwrap_or_else(|| rat(1, 12));
    let n_to = cfg.brute_force_cap;
    let mut pairs = vec![canonical_rect_pair()];
    pairs.extend(rect_pairs(cfg.seed, AUDIT_PAIRS));

    let mut audits = Vec::with_capacity(pairs.len());
    let mut all_verdicts = true;
    let mut canonical_reciprocal = true;
    let mut detail = None;
    let mut csv = reports::csv_writer();
    reports::write_record(&mut csv, &reports::AUDIT_CSV_HEADER)?;
    for (k, pair) in pairs.iter().enumerate() {
        let r = product_proof_audit(&pair.a, &pair.b, &eps, 1, n_to, cfg.brute_force_cap)
            .map_err(usage_of)?;
        if k == 0 {
            // the fully unconstrained-index, one-sign-pinned rectangle has the
            // exact closed form 1/(2n)
            for row in &r.rows {
                let expected = Rational::new(1.into(), (2 * row.n).into());
                if row.value != expected {
                    canonical_reciprocal = false;
                    detail = Some(format!(
                        "canonical rectangle value at n = {} is {}, expected {}",
                        row.n,
                        format_rational(&row.value),
                        format_rational(&expected)
                    ));
                }
            }
        }
        if !r.verdict {
            all_verdicts = false;
            detail.get_or_insert_with(|| {
                format!("audit verdict failed for pair {k} (A = {}, B = {})", pair.a_desc, pair.b_desc)
            });
        }
        reports::audit_csv_rows(&mut csv, k, &pair.a_desc, &pair.b_desc, &r)?;
        audits.push(reports::audit_json(k, &pair.a_desc, &pair.b_desc, &r));
    }
    let pass = all_verdicts && canonical_reciprocal;
    let body = ProductAuditJson {
        suite: "product-audit",
        seed: cfg.seed,
        eps: format_rational(&eps),
        n_from: 1,
        n_to,
        brute_cap: cfg.brute_force_cap,
        pairs: pairs.len(),
        canonical_reciprocal,
        all_verdicts,
        audits,
    };
    Ok(SuiteResult {
        name: "product-audit",
        body: to_value(&body)?,
        csv: reports::finish(csv)?,
        pass,
        detail,
    })
}

// ---------------------------------------------------------------------------
// Binomial-tail sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct BollobasJson {
    suite: &'static str,
    seed: u64,
    eps: String,
    n_from: u64,
    n_max: u64,
    checked: u64,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    failure: Option<String>,
    rows: Vec<reports::TailRowJson>,
}

fn parse_eps(eps: Option<&str>) -> Result<Option<Rational>, CliError> {
    eps.map(|s| parse_rational(s).map_err(|e| CliError::Usage(format!("bad --eps: {e}"))))
        .transpose()
}

/// The first index the sweep covers: `ceil(3/eps)`.
fn sweep_start(eps: &Rational) -> u64 {
    let three: Rational = rat(3, 1);
    let start = ceil_ratio(&(three / eps.clone()));
    u64::try_from(start.max(1.into())).unwrap_or(u64::MAX)
}

pub fn run_bollobas(
    cfg: &RunConfig,
    eps: Option<&str>,
    n_max: Option<u64>,
) -> Result<SuiteResult, CliError> {
    let eps = parse_eps(eps)?.unwrap_or_else(|| rat(1, 12));
    let n_max = n_max.unwrap_or(2000);
    let start = sweep_start(&eps);
    let (checked, holds, failure) = match binomial_tail_sweep(&eps, n_max) {
        Ok(count) => (count, true, None),
        Err(AnalysisError::BoundFailed { n, lhs, bound }) => (
            n.saturating_sub(start),
            false,
            Some(format!(
                "tail {} exceeds the certified bound {} at n = {n}",
                format_rational(&lhs),
                format_rational(&bound)
            )),
        ),
        Err(e) => return Err(usage_of(e)),
    };
    // the report samples a readable grid; the sweep itself checked every n
    let mut rows = Vec::new();
    let mut csv = reports::csv_writer();
    reports::write_record(
        &mut csv,
        &["n", "tail", "tailApprox", "boundLower", "boundLowerApprox", "holds"],
    )?;
    if start <= n_max {
        for n in start..=n_max {
            let sampled = n == start || n == n_max || n % 100 == 0 || n - start < 20;
            if !sampled {
                continue;
            }
            let q = binomial_tail(n, &eps).map_err(usage_of)?;
            let row = reports::tail_row_json(&q);
            reports::write_record(
                &mut csv,
                &[
                    &row.n.to_string(),
                    &row.tail,
                    &row.tail_approx,
                    &row.bound_lower,
                    &row.bound_lower_approx,
                    &row.holds.to_string(),
                ],
            )?;
            rows.push(row);
        }
    }
    let body = BollobasJson {
        suite: "bollobas",
        seed: cfg.seed,
        eps: format_rational(&eps),
        n_from: start,
        n_max,
        checked,
        holds,
        failure: failure.clone(),
        rows,
    };
    Ok(SuiteResult {
        name: "bollobas",
        body: to_value(&body)?,
        csv: reports::finish(csv)?,
        pass: holds,
        detail: failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fsjn_core::generators::handle;
    use fsjn_core::seq::GeneratorSpec;
    use std::path::PathBuf;

    fn cfg() -> RunConfig {
        RunConfig {
            horizon: 10,
            brute_force_cap: 8,
            materialization_cap: 18,
            tolerance: rat(1, 16),
            output_dir: PathBuf::from("."),
            seed: 1,
        }
    }

    #[test]
    fn product_balance_suite_passes() {
        let h = handle(GeneratorSpec::Product).unwrap();
        let r = run_balance(&h, &cfg()).unwrap();
        assert!(r.pass);
        assert!(r.body.get("balanced").unwrap().as_bool().unwrap());
    }

    #[test]
    fn l_mass_without_oracle_is_the_documented_usage_error() {
        let mut h = handle(GeneratorSpec::Square1).unwrap();
        h.oracle = None;
        let err = run_l_mass(&h, &cfg()).unwrap_err();
        match err {
            CliError::Usage(msg) => assert_eq!(msg, "limit oracle required"),
            other => panic!("wrong class: {other:?}"),
        }
    }

    #[test]
    fn family_selection_covers_the_documented_cases() {
        let fam = select_family(&SpaceId::Product, Some("cylinders")).unwrap();
        let names: Vec<&str> = fam.iter().map(|nf| nf.name.as_str()).collect();
        assert!(names.contains(&"rect-s0plus-all"));
        assert!(!names.contains(&"rect-all-all"));
        assert!(select_family(&SpaceId::UnitSquare, Some("cylinders")).is_err());
        let single = select_family(&SpaceId::UnitSquare, Some("bump-center")).unwrap();
        assert_eq!(single.len(), 1);
        assert!(select_family(&SpaceId::UnitSquare, Some("no-such")).is_err());
    }

    #[test]
    fn bollobas_suite_reports_the_sweep_window() {
        let r = run_bollobas(&cfg(), Some("1/12"), Some(100)).unwrap();
        assert!(r.pass);
        assert_eq!(r.body.get("nFrom").unwrap().as_u64().unwrap(), 36);
        assert_eq!(r.body.get("checked").unwrap().as_u64().unwrap(), 65);
        let rows = r.body.get("rows").unwrap().as_array().unwrap();
        assert!(rows.iter().all(|row| row.get("holds").unwrap().as_bool().unwrap()));
    }

    #[test]
    fn bollobas_rejects_out_of_range_parameters() {
        assert!(run_bollobas(&cfg(), Some("1/4"), Some(100)).is_err());
        assert!(run_bollobas(&cfg(), Some("1/12"), Some(5000)).is_err());
    }
}
