//! The obstruction report: analysis driver, verdict logic, and rendering.
//!
//! Verdict semantics: T₁ = T₂ = 0 on the lift is a *necessary* condition for
//! a holomorphic bi-disk through the origin, so NO_OBSTRUCTION_FOUND never
//! asserts that a bi-disk exists. OBSTRUCTED requires the U(2) minimum of
//! |T₁(0,·)|² + |T₂(0,·)|² to exceed 1e−6; minima below 1e−9 report
//! NO_OBSTRUCTION_FOUND; the guard band between reports INDETERMINATE.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use bidisk_core::error::PipelineError;
use bidisk_core::fiber::render_fiber_poly_origin;
use bidisk_core::parser::{self, LowerError, ParseError};
use bidisk_core::pipeline::{
    build_sigma, build_tau, dtau_structure, reconstruct_torsion_forms, run_pipeline,
    torsion_two_forms, DefiningFunction,
};
use bidisk_core::u2::{minimize_over_u2, ObstructionAtOrigin};
use bidisk_core::{Covector, KForm, VarContext};

/// Threshold above which the minimum certifies an obstruction.
pub const OBSTRUCTED_THRESHOLD: f64 = 1e-6;
/// Threshold below which no obstruction is reported.
pub const CLEAR_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub order: u32,
    pub grid: usize,
    pub iters: usize,
    pub check_structure: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            order: bidisk_core::DEFAULT_ORDER,
            grid: 12,
            iters: 200,
            check_structure: false,
        }
    }
}

/// Analysis failures that map to nonzero exit codes (completed verdicts,
/// including WRONG_SIGNATURE and LEVI_DEGENERATE reports, are not errors).
#[derive(Debug, Clone)]
pub enum AnalyzeError {
    Parse(ParseError),
    Lower(LowerError),
    NotReal,
    NonzeroAtOrigin,
    NotRigid,
    PivotDegenerate(usize),
    BadOrder(u32),
    Internal(String),
}

impl AnalyzeError {
    /// Exit codes: 2 parse/input errors, 3 reality/validation failures,
    /// 4 Levi-shape failures, 5 internal invariant failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AnalyzeError::Parse(_) | AnalyzeError::Lower(_) | AnalyzeError::BadOrder(_) => 2,
            AnalyzeError::NotReal | AnalyzeError::NonzeroAtOrigin | AnalyzeError::NotRigid => 3,
            AnalyzeError::PivotDegenerate(_) => 4,
            AnalyzeError::Internal(_) => 5,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            AnalyzeError::Parse(_) => "parse_error",
            AnalyzeError::Lower(_) => "degree_exceeds_order",
            AnalyzeError::BadOrder(_) => "bad_order",
            AnalyzeError::NotReal => "not_real",
            AnalyzeError::NonzeroAtOrigin => "nonzero_at_origin",
            AnalyzeError::NotRigid => "not_rigid",
            AnalyzeError::PivotDegenerate(_) => "pivot_degenerate",
            AnalyzeError::Internal(_) => "internal",
        }
    }

    pub fn message(&self) -> String {
        match self {
            AnalyzeError::Parse(e) => e.to_string(),
            AnalyzeError::Lower(e) => e.to_string(),
            AnalyzeError::BadOrder(n) => format!("truncation order {n} is too small (need ≥ 2)"),
            AnalyzeError::NotReal => "defining function is not real".to_string(),
            AnalyzeError::NonzeroAtOrigin => {
                "defining function does not vanish at the origin".to_string()
            }
            AnalyzeError::NotRigid => {
                "defining function depends on v; only rigid inputs are supported".to_string()
            }
            AnalyzeError::PivotDegenerate(k) => format!(
                "pivot {k} of the Levi matrix vanishes at the origin; adapted coframe unavailable"
            ),
            AnalyzeError::Internal(m) => m.clone(),
        }
    }

    /// The JSON error object (a single line).
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct ErrObj<'a> {
            code: &'a str,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            line: Option<u32>,
            #[serde(skip_serializing_if = "Option::is_none")]
            col: Option<u32>,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: ErrObj<'a>,
        }
        let (line, col) = match self {
            AnalyzeError::Parse(e) => (Some(e.line), Some(e.col)),
            _ => (None, None),
        };
        serde_json::to_string(&Wrapper {
            error: ErrObj {
                code: self.code(),
                message: self.message(),
                line,
                col,
            },
        })
        .expect("serializable")
    }
}

/// Verdicts, ordered by severity of what they assert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "OBSTRUCTED")]
    Obstructed,
    #[serde(rename = "NO_OBSTRUCTION_FOUND")]
    NoObstructionFound,
    #[serde(rename = "INDETERMINATE")]
    Indeterminate,
    #[serde(rename = "WRONG_SIGNATURE")]
    WrongSignature,
    #[serde(rename = "LEVI_DEGENERATE")]
    LeviDegenerate,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Obstructed => "OBSTRUCTED",
            Verdict::NoObstructionFound => "NO_OBSTRUCTION_FOUND",
            Verdict::Indeterminate => "INDETERMINATE",
            Verdict::WrongSignature => "WRONG_SIGNATURE",
            Verdict::LeviDegenerate => "LEVI_DEGENERATE",
        }
    }
}

/// Timings are reported as zeros so that reports are byte-reproducible;
/// wall-clock measurements go to stderr instead.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub parse: u64,
    pub pipeline: u64,
    pub search: u64,
    pub total: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ObstructionReport {
    pub version: String,
    pub input: String,
    pub order: u32,
    pub signature: [u32; 2],
    pub verdict: Verdict,
    pub torsions_at_origin: BTreeMap<String, String>,
    pub t1_at_origin: String,
    pub t2_at_origin: String,
    pub u2_min: f64,
    pub u2_argmin_angles: [f64; 4],
    pub checks: BTreeMap<String, bool>,
    pub timings_ms: Timings,
}

impl ObstructionReport {
    fn shell(input: &str, order: u32, signature: [u32; 2], verdict: Verdict) -> Self {
        let torsions = ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J"]
            .iter()
            .map(|n| (n.to_string(), "0".to_string()))
            .collect();
        ObstructionReport {
            version: env!("CARGO_PKG_VERSION").to_string(),
            input: input.to_string(),
            order,
            signature,
            verdict,
            torsions_at_origin: torsions,
            t1_at_origin: "0".to_string(),
            t2_at_origin: "0".to_string(),
            u2_min: 0.0,
            u2_argmin_angles: [0.0; 4],
            checks: BTreeMap::new(),
            timings_ms: Timings::default(),
        }
    }
}

/// Wall-clock milliseconds, reported on stderr by the binary.
#[derive(Debug, Clone, Default)]
pub struct MeasuredTimings {
    pub parse_ms: u128,
    pub pipeline_ms: u128,
    pub search_ms: u128,
    pub total_ms: u128,
}

/// Run the full chain on an expression text.
pub fn analyze(
    input: &str,
    opts: &AnalyzeOptions,
) -> Result<(ObstructionReport, MeasuredTimings), AnalyzeError> {
    let t_start = Instant::now();
    let mut timings = MeasuredTimings::default();

    let t0 = Instant::now();
    let expr = parser::parse(input).map_err(AnalyzeError::Parse)?;
    let ctx = VarContext::new(opts.order).map_err(|_| AnalyzeError::BadOrder(opts.order))?;
    let f = parser::to_series(&expr, &ctx).map_err(AnalyzeError::Lower)?;
    let df = DefiningFunction::new(f).map_err(|e| match e {
        PipelineError::NotReal => AnalyzeError::NotReal,
        PipelineError::NonzeroAtOrigin => AnalyzeError::NonzeroAtOrigin,
        PipelineError::NotRigid => AnalyzeError::NotRigid,
        other => AnalyzeError::Internal(other.to_string()),
    })?;
    timings.parse_ms = t0.elapsed().as_millis();

    let t1 = Instant::now();
    let data = match run_pipeline(df) {
        Ok(data) => data,
        Err(PipelineError::WrongSignature(p, n)) => {
            let report =
                ObstructionReport::shell(input, opts.order, [p, n], Verdict::WrongSignature);
            timings.total_ms = t_start.elapsed().as_millis();
            return Ok((report, timings));
        }
        Err(PipelineError::LeviDegenerate) => {
            let report =
                ObstructionReport::shell(input, opts.order, [0, 0], Verdict::LeviDegenerate);
            timings.total_ms = t_start.elapsed().as_millis();
            return Ok((report, timings));
        }
        Err(PipelineError::PivotDegenerate(k)) => return Err(AnalyzeError::PivotDegenerate(k)),
        Err(other) => return Err(AnalyzeError::Internal(other.to_string())),
    };
    timings.pipeline_ms = t1.elapsed().as_millis();

    let mut report = ObstructionReport::shell(
        input,
        opts.order,
        [data.signature.0, data.signature.1],
        Verdict::NoObstructionFound,
    );
    for (name, t) in data.torsions.all() {
        report.torsions_at_origin.insert(
            name.to_string(),
            render_fiber_poly_origin(&t.eval_series_origin()),
        );
    }
    report.t1_at_origin = render_fiber_poly_origin(&data.obstruction.t1.eval_series_origin());
    report.t2_at_origin = render_fiber_poly_origin(&data.obstruction.t2.eval_series_origin());

    let t2 = Instant::now();
    let exact_zero = data.obstruction.t1.is_zero() && data.obstruction.t2.is_zero();
    if exact_zero {
        report.verdict = Verdict::NoObstructionFound;
        report.u2_min = 0.0;
        report.u2_argmin_angles = [0.0; 4];
    } else {
        let obs = ObstructionAtOrigin::from_upolys(&data.obstruction.t1, &data.obstruction.t2);
        let (min, argmin) = minimize_over_u2(&obs, opts.grid, opts.iters);
        report.u2_min = min;
        report.u2_argmin_angles = [argmin.phi, argmin.t, argmin.a, argmin.b];
        report.verdict = if min > OBSTRUCTED_THRESHOLD {
            Verdict::Obstructed
        } else if min <= CLEAR_THRESHOLD {
            Verdict::NoObstructionFound
        } else {
            Verdict::Indeterminate
        };
    }
    timings.search_ms = t2.elapsed().as_millis();

    if opts.check_structure {
        run_structure_checks(&data, &mut report.checks)
            .map_err(|e| AnalyzeError::Internal(e.to_string()))?;
        if report.checks.values().any(|&ok| !ok) {
            return Err(AnalyzeError::Internal(
                "structure identity check failed".to_string(),
            ));
        }
    }

    timings.total_ms = t_start.elapsed().as_millis();
    Ok((report, timings))
}

/// The opt-in heavy identities: dθ-residual, τ/Σ skewness, torsion
/// reconstruction, and the dτ structure equation.
fn run_structure_checks(
    data: &bidisk_core::pipeline::PipelineData,
    checks: &mut BTreeMap<String, bool>,
) -> Result<(), PipelineError> {
    use bidisk_core::fiber::UPoly;
    let ctx = data.df.ctx().clone();

    // dθ = i·Σ H_{jk} dz^j ∧ dz̄^k, exactly
    let dtheta = data
        .theta
        .theta
        .ext_d()
        .map_err(PipelineError::from)?;
    let mut hess = KForm::zero(&ctx, 2);
    for j in 0..4 {
        for k in 0..4 {
            let coeff = data.levi.h[j][k].scale(&bidisk_core::GaussRational::i());
            hess = hess
                .add(&KForm::monomial(
                    &ctx,
                    &[Covector::dz(j), Covector::dzb(k)],
                    UPoly::from_series(coeff),
                ))
                .map_err(PipelineError::from)?;
        }
    }
    checks.insert(
        "dtheta_residual_zero".to_string(),
        dtheta.sub(&hess).map_err(PipelineError::from)?.is_zero(),
    );

    // torsion reconstruction: extracted coefficients reproduce the reduced
    // torsion 2-forms with zero residual
    let omegas = torsion_two_forms(&data.dalphas)?;
    let rebuilt = reconstruct_torsion_forms(&data.torsions)?;
    checks.insert(
        "torsion_reconstruction_zero".to_string(),
        omegas[0]
            .sub(&rebuilt[0])
            .map_err(PipelineError::from)?
            .is_zero()
            && omegas[1]
                .sub(&rebuilt[1])
                .map_err(PipelineError::from)?
                .is_zero(),
    );

    let sigma = build_sigma(&data.torsions)?;
    let tau = build_tau(&data.torsions, &data.absorption, &data.obstruction)?;
    let mut sigma_skew = true;
    let mut tau_skew = true;
    for r in 0..2 {
        for c in 0..2 {
            sigma_skew &= sigma[r][c]
                .conj_form()
                .add(&sigma[c][r])
                .map_err(PipelineError::from)?
                .is_zero();
            tau_skew &= tau.tau[r][c]
                .conj_form()
                .add(&tau.tau[c][r])
                .map_err(PipelineError::from)?
                .is_zero();
        }
    }
    checks.insert("sigma_skew_hermitian".to_string(), sigma_skew);
    checks.insert("tau_skew_hermitian".to_string(), tau_skew);

    let k = dtau_structure(&sigma, &data.coframe, &data.dalphas)?;
    let mut dtau_skew = true;
    let mut dtau_fiber_free = true;
    for r in 0..2 {
        for c in 0..2 {
            dtau_skew &= k[r][c]
                .conj_form()
                .add(&k[c][r])
                .map_err(PipelineError::from)?
                .is_zero();
            dtau_fiber_free &= !k[r][c].contains_covector(|cv| cv.is_fiber());
        }
    }
    checks.insert("dtau_skew_hermitian".to_string(), dtau_skew);
    checks.insert("dtau_fiber_free".to_string(), dtau_fiber_free);
    Ok(())
}

/// Render the report. Both formats are byte-reproducible for fixed inputs.
pub fn emit(report: &ObstructionReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string(report).expect("serializable report");
            s.push('\n');
            s.into_bytes()
        }
        ReportFormat::Text => {
            let mut out = String::new();
            out.push_str(&format!("bidisk analyzer v{}\n", report.version));
            out.push_str(&format!("input:      {}\n", report.input));
            out.push_str(&format!("order:      {}\n", report.order));
            out.push_str(&format!(
                "signature:  ({},{})\n",
                report.signature[0], report.signature[1]
            ));
            out.push_str("torsions at origin:\n");
            for (name, value) in &report.torsions_at_origin {
                out.push_str(&format!("  {name} = {value}\n"));
            }
            out.push_str(&format!("T1 at origin: {}\n", report.t1_at_origin));
            out.push_str(&format!("T2 at origin: {}\n", report.t2_at_origin));
            out.push_str(&format!("U(2) minimum: {:e}\n", report.u2_min));
            out.push_str(&format!(
                "argmin angles: [{:e}, {:e}, {:e}, {:e}]\n",
                report.u2_argmin_angles[0],
                report.u2_argmin_angles[1],
                report.u2_argmin_angles[2],
                report.u2_argmin_angles[3]
            ));
            if !report.checks.is_empty() {
                out.push_str("structure checks:\n");
                for (name, ok) in &report.checks {
                    out.push_str(&format!(
                        "  {name}: {}\n",
                        if *ok { "pass" } else { "FAIL" }
                    ));
                }
            }
            out.push_str(&format!("verdict: {}\n", report.verdict.as_str()));
            out.into_bytes()
        }
    }
}
