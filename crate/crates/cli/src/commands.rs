//! One handler per subcommand. Inputs are parsed from the JSON document with
//! serde; each handler returns the result body and whether the answer is
//! positive.

use ncpick::envelope::{
    full_envelope_membership, nc_envelope_membership, similarity_envelope_membership, zariski_membership_d1,
    EnvelopeWitness, DEFAULT_CLUSTER_TOL, DEFAULT_RANK_TOL,
};
use ncpick::interpolation::{
    ltoa_certificate, multi_point_to_single, pick_certificate, solve_pick, stein_dominance_certificate,
    strict_stein_refuter, LtoaProblem, PickProblem, SolveOptions,
};
use ncpick::json::{matrix_to_value, JsonMatrix};
use ncpick::kernel::{szego_cp_check, PsdCertificate};
use ncpick::linalg;
use ncpick::okaweil::{extract_nc_polynomial, uniform_error_report, DEFAULT_WORD_CAP};
use ncpick::realization::{Colligation, RealizedFunction};
use ncpick::{CMat, MatrixTuple, NcPoly};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::{EnvelopeMode, Failure, Flags, Outcome};

/// Condition-number cap for similarity witnesses.
const SIMILARITY_COND_BOUND: f64 = 1e8;
/// Largest `‖Q0(Z)‖` of the points sampled by `okaweil`.
const OKAWEIL_SAMPLE_NORM: f64 = 0.9;
const DEFAULT_TRUNCATION: usize = 10;

fn parse<T: DeserializeOwned>(input: Value) -> Result<T, Failure> {
    Ok(serde_json::from_value(input)?)
}

fn outcome(positive: bool, body: Value) -> Result<Outcome, Failure> {
    let Value::Object(body) = body else { unreachable!("bodies are objects") };
    Ok(Outcome { positive, body })
}

fn certificate_json(c: &PsdCertificate) -> Value {
    serde_json::to_value(c).expect("certificates serialize")
}

fn amplification(flags: &Flags) -> Option<usize> {
    flags.amplification.map(|k| k as usize)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolyAtPoint {
    #[serde(rename = "Q")]
    q: NcPoly,
    #[serde(rename = "Z")]
    z: MatrixTuple,
}

pub fn eval(input: Value) -> Result<Outcome, Failure> {
    let p: PolyAtPoint = parse(input)?;
    let value = p.q.eval(&p.z)?;
    outcome(true, json!({"value": matrix_to_value(&value)}))
}

pub fn domain_check(input: Value) -> Result<Outcome, Failure> {
    let p: PolyAtPoint = parse(input)?;
    let chk = p.q.in_domain(&p.z)?;
    outcome(chk.in_domain, json!({"in_domain": chk.in_domain, "norm": chk.norm, "margin": chk.margin}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvelopeInput {
    #[serde(rename = "Z_tilde")]
    ztilde: MatrixTuple,
    generators: Vec<MatrixTuple>,
}

pub fn envelope(input: Value, mode: EnvelopeMode, flags: &Flags) -> Result<Outcome, Failure> {
    let p: EnvelopeInput = parse(input)?;
    let max = flags.max_multiplicity.map(|m| m as usize);
    let witness: Option<EnvelopeWitness> = match mode {
        EnvelopeMode::Nc => nc_envelope_membership(&p.ztilde, &p.generators, max, flags.tol)?,
        EnvelopeMode::Similarity => {
            similarity_envelope_membership(&p.ztilde, &p.generators, max, SIMILARITY_COND_BOUND, flags.seed)?
        }
        EnvelopeMode::Full => full_envelope_membership(&p.ztilde, &p.generators, max, DEFAULT_RANK_TOL, flags.seed)?,
    };
    let residual = match &witness {
        Some(w) => Some(w.residual(&p.ztilde, &p.generators)?),
        None => None,
    };
    let mode = match mode {
        EnvelopeMode::Nc => "nc",
        EnvelopeMode::Similarity => "similarity",
        EnvelopeMode::Full => "full",
    };
    outcome(
        witness.is_some(),
        json!({"mode": mode, "member": witness.is_some(), "witness": witness, "witness_residual": residual}),
    )
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ZariskiInput {
    #[serde(rename = "Z_tilde")]
    ztilde: JsonMatrix,
    omega: Vec<JsonMatrix>,
}

pub fn zariski(input: Value) -> Result<Outcome, Failure> {
    let p: ZariskiInput = parse(input)?;
    let omega: Vec<CMat> = p.omega.into_iter().map(|m| m.0).collect();
    let res = zariski_membership_d1(&p.ztilde.0, &omega, DEFAULT_CLUSTER_TOL)?;
    let separating = match &res.separating {
        Some(poly) => json!({
            "poly": poly,
            "at_Z_tilde": linalg::norm2(&poly.eval(&MatrixTuple::new(vec![p.ztilde.0.clone()])?)?),
        }),
        None => Value::Null,
    };
    outcome(res.member, json!({"member": res.member, "ambiguous": res.ambiguous, "separating": separating}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CpInput {
    #[serde(rename = "Q0")]
    q0: NcPoly,
    omega: Vec<MatrixTuple>,
}

pub fn cp_check(input: Value, flags: &Flags) -> Result<Outcome, Failure> {
    let p: CpInput = parse(input)?;
    let (cert, choi) = szego_cp_check(&p.q0, &p.omega, flags.tol)?;
    outcome(cert.is_psd(), json!({"certificate": certificate_json(&cert), "choi_dim": choi.matrix.nrows()}))
}

/// A single problem, or `{"points": [..]}` merged into one direct-sum point.
fn pick_problem(input: Value) -> Result<PickProblem, Failure> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Many {
        points: Vec<PickProblem>,
    }
    if input.get("points").is_some() {
        let many: Many = parse(input)?;
        Ok(multi_point_to_single(&many.points)?)
    } else {
        parse(input)
    }
}

pub fn pick_check(input: Value, flags: &Flags) -> Result<Outcome, Failure> {
    let p = pick_problem(input)?;
    let cert = pick_certificate(&p, amplification(flags), flags.tol)?;
    let psd = cert.certificate.is_psd();
    outcome(
        psd,
        json!({
            "feasible": psd,
            "certificate": certificate_json(&cert.certificate),
            "amplification": cert.amplification,
        }),
    )
}

pub fn pick_solve(input: Value, flags: &Flags) -> Result<Outcome, Failure> {
    let p = pick_problem(input)?;
    let opts = SolveOptions {
        tol: flags.tol,
        amplification: amplification(flags),
        samples: flags.samples as usize,
        seed: flags.seed,
        ..SolveOptions::default()
    };
    let out = solve_pick(&p, opts)?;
    let mut body = json!({
        "feasible": out.solution.is_some(),
        "certificate": certificate_json(&out.certificate.certificate),
        "amplification": out.certificate.amplification,
    });
    if let Some(sol) = &out.solution {
        let obj = body.as_object_mut().expect("object");
        obj.insert("colligation".into(), json!(sol.function.colligation()));
        obj.insert("Q0".into(), json!(sol.function.q0()));
        obj.insert("interp_residual".into(), json!(sol.interp_residual));
        obj.insert("gram_residual".into(), json!(sol.gram_residual));
        obj.insert("contractivity".into(), json!(sol.contractivity));
    }
    outcome(out.solution.is_some(), body)
}

pub fn ltoa_check(input: Value, flags: &Flags) -> Result<Outcome, Failure> {
    let p: LtoaProblem = parse(input)?;
    let cert = ltoa_certificate(&p, flags.tol)?;
    let psd = cert.certificate.is_psd();
    outcome(psd, json!({"feasible": psd, "certificate": certificate_json(&cert.certificate), "T": matrix_to_value(&cert.t)}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SteinInput {
    #[serde(rename = "Q0")]
    q0: Option<NcPoly>,
    #[serde(rename = "Z0")]
    z0: MatrixTuple,
    #[serde(rename = "Lambda0")]
    lambda0: JsonMatrix,
    /// Runs the strict-Stein refuter with this margin when present.
    delta: Option<f64>,
}

pub fn stein_check(input: Value, flags: &Flags) -> Result<Outcome, Failure> {
    let p: SteinInput = parse(input)?;
    let q0 = p.q0.unwrap_or_else(|| NcPoly::row_pencil(p.z0.d()));
    let (cert, _) = stein_dominance_certificate(&q0, &p.z0, &p.lambda0.0, amplification(flags), flags.tol)?;
    let refuter = match p.delta {
        Some(delta) => {
            let found = strict_stein_refuter(&q0, &p.z0, &p.lambda0.0, delta, flags.samples as usize, flags.seed)?;
            json!({"delta": delta, "trials": flags.samples, "refuted": found.is_some(), "P": found.as_ref().map(matrix_to_value)})
        }
        None => Value::Null,
    };
    outcome(cert.is_psd(), json!({"dominated": cert.is_psd(), "certificate": certificate_json(&cert), "refuter": refuter}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RealizeInput {
    colligation: Colligation,
    #[serde(rename = "Q0")]
    q0: Option<NcPoly>,
    #[serde(rename = "Z")]
    z: Option<MatrixTuple>,
    #[serde(default)]
    points: Vec<MatrixTuple>,
    /// With `B0` (and optionally `A0`) the residual `‖A0 S(Z) − B0‖` is reported.
    #[serde(rename = "A0")]
    a0: Option<JsonMatrix>,
    #[serde(rename = "B0")]
    b0: Option<JsonMatrix>,
}

fn realized(colligation: Colligation, q0: Option<NcPoly>) -> Result<RealizedFunction, Failure> {
    let q0 = q0.unwrap_or_else(|| NcPoly::row_pencil(colligation.dims().r));
    Ok(RealizedFunction::new(colligation, q0)?)
}

pub fn realize_eval(input: Value) -> Result<Outcome, Failure> {
    let p: RealizeInput = parse(input)?;
    let f = realized(p.colligation, p.q0)?;
    let mut points = p.points;
    let single = p.z.is_some();
    if let Some(z) = p.z {
        points.insert(0, z);
    }
    if points.is_empty() {
        return Err(Failure::input("give \"Z\" or \"points\""));
    }
    let values = points.iter().map(|z| f.eval(z)).collect::<ncpick::Result<Vec<_>>>()?;
    let mut body = Map::new();
    body.insert("values".into(), Value::Array(values.iter().map(matrix_to_value).collect()));
    body.insert("norms".into(), json!(values.iter().map(linalg::norm2).collect::<Vec<_>>()));
    match (p.a0, p.b0) {
        (a0, Some(b0)) if single => {
            let s = &values[0];
            let a0 = a0.map_or_else(|| linalg::identity(s.nrows()), |m| m.0);
            if a0.ncols() != s.nrows() || b0.0.shape() != (a0.nrows(), s.ncols()) {
                return Err(Failure::input("A0 and B0 do not match the value at Z"));
            }
            body.insert("interp_residual".into(), json!(linalg::norm2(&(a0 * s - b0.0))));
        }
        (None, None) => {}
        _ => return Err(Failure::input("B0 needs a single point \"Z\"")),
    }
    outcome(true, Value::Object(body))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct OkaWeilInput {
    colligation: Colligation,
    #[serde(rename = "Q0")]
    q0: Option<NcPoly>,
    /// Sample set; drawn at random (levels 1 to 3) when absent.
    samples: Option<Vec<MatrixTuple>>,
    #[serde(default)]
    extract: bool,
}

pub fn okaweil(input: Value, flags: &Flags) -> Result<Outcome, Failure> {
    let p: OkaWeilInput = parse(input)?;
    let f = realized(p.colligation, p.q0)?;
    let l = flags.truncation_l.map_or(DEFAULT_TRUNCATION, |l| l as usize);
    let samples = match p.samples {
        Some(s) if !s.is_empty() => s,
        Some(_) => return Err(Failure::input("empty sample set")),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(flags.seed);
            (0..flags.samples as usize)
                .map(|k| f.q0().sample_domain_point(&mut rng, 1 + k % 3, OKAWEIL_SAMPLE_NORM))
                .collect::<ncpick::Result<Vec<_>>>()?
        }
    };
    let report = uniform_error_report(&f, &samples, l)?;
    let poly = if p.extract { Some(extract_nc_polynomial(&f, l, 0.0, DEFAULT_WORD_CAP)?) } else { None };
    outcome(true, json!({"report": report, "polynomial": poly}))
}

fn check(name: &str, pass: bool, detail: Value) -> Value {
    json!({"name": name, "pass": pass, "detail": detail})
}

fn scalar(x: f64) -> CMat {
    linalg::real_matrix(1, 1, &[x])
}

pub fn selftest(flags: &Flags) -> Result<Outcome, Failure> {
    let q = NcPoly::row_pencil(1);
    let mut checks = Vec::new();

    let chk = q.in_domain(&MatrixTuple::new(vec![scalar(0.5)])?)?;
    checks.push(check("domain", chk.in_domain && (chk.margin - 0.5).abs() < 1e-15, json!({"margin": chk.margin})));

    let zero = MatrixTuple::new(vec![scalar(0.0)])?;
    let cert = pick_certificate(&PickProblem::value_problem(q.clone(), zero, scalar(2.0))?, None, flags.tol)?;
    checks.push(check("pick-negative", !cert.certificate.is_psd(), json!({"min_eig": cert.certificate.min_eig})));

    let z0 = MatrixTuple::new(vec![scalar(0.5)])?;
    let prob = PickProblem::value_problem(q.clone(), z0, scalar(0.3))?;
    let opts = SolveOptions { samples: flags.samples as usize, seed: flags.seed, ..SolveOptions::default() };
    let sol = solve_pick(&prob, opts)?.solution;
    let residual = sol.as_ref().map(|s| s.interp_residual);
    checks.push(check("pick-solve", residual.is_some_and(|r| r < 1e-8), json!({"interp_residual": residual})));

    // (|x|² − |y|²) / (1 − |z|²) at z = 0.6, x = 0.8, y = 0.5
    let ltoa = LtoaProblem::new(MatrixTuple::new(vec![scalar(0.6)])?, scalar(0.8), scalar(0.5))?;
    let t = ltoa_certificate(&ltoa, flags.tol)?.t[(0, 0)].re;
    let want = (0.64 - 0.25) / (1.0 - 0.36);
    checks.push(check("ltoa-scalar", (t - want).abs() < 1e-12, json!({"T": t, "expected": want})));

    let mut rng = ChaCha8Rng::seed_from_u64(flags.seed);
    let q2 = NcPoly::row_pencil(2);
    let omega = (1..=3).map(|n| q2.sample_domain_point(&mut rng, n, 0.9)).collect::<ncpick::Result<Vec<_>>>()?;
    let (cp, _) = szego_cp_check(&q2, &omega, flags.tol)?;
    checks.push(check("szego-cp", cp.is_psd(), json!({"min_eig": cp.min_eig})));

    let jordan = linalg::real_matrix(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let z = zariski_membership_d1(&jordan, &[scalar(0.0)], DEFAULT_CLUSTER_TOL)?;
    checks.push(check("zariski-jordan", !z.member && z.separating.is_some(), json!({"member": z.member})));

    let all = checks.iter().all(|c| c["pass"] == json!(true));
    outcome(all, json!({"passed": all, "checks": checks}))
}
