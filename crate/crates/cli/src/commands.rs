use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::{json, Map, Value};
use twistlab::arith::{ArithError, Place};
use twistlab::curve::{Curve, CurveError, ReductionType};
use twistlab::descent::{self, DescentError, FullTorsionCurve};
use twistlab::f2::BitMatrix;
use twistlab::gmodule::{self, GModule, GModuleError, StabilityVerdict};
use twistlab::localdata::{DParity, DeltaValue, PlaceDescriptor, PlaceKind};
use twistlab::parity::{self, ConstantParity, ParityError};
use twistlab::twistsearch::{self, DistinguishedPlace, SearchError};

use crate::json::{self, coeffs, get, int, place, req, uint};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JobError {
    /// malformed or invalid input
    Input(String),
    /// outside the supported domain of a computation
    Unsupported(String),
}

impl std::fmt::Display for JobError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            JobError::Input(m) => write!(f, "input error: {m}"),
            JobError::Unsupported(m) => write!(f, "unsupported: {m}"),
        }
    }
}

impl From<CurveError> for JobError {
    fn from(e: CurveError) -> Self {
        match e {
            CurveError::Arith(ArithError::OutOfRange(_) | ArithError::PrecisionExhausted(_)) => {
                JobError::Unsupported(e.to_string())
            }
            _ => JobError::Input(e.to_string()),
        }
    }
}

impl From<ParityError> for JobError {
    fn from(e: ParityError) -> Self {
        match e {
            ParityError::Curve(c) => c.into(),
            ParityError::InconsistentFlag(_) => JobError::Input(e.to_string()),
            _ => JobError::Unsupported(e.to_string()),
        }
    }
}

impl From<SearchError> for JobError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::Curve(c) => c.into(),
            SearchError::Parity(p) => p.into(),
            SearchError::NotOddPrime(_) => JobError::Input(e.to_string()),
            _ => JobError::Unsupported(e.to_string()),
        }
    }
}

impl From<DescentError> for JobError {
    fn from(e: DescentError) -> Self {
        match e {
            DescentError::Curve(c) => c.into(),
            DescentError::RepeatedRoot => JobError::Input(e.to_string()),
            _ => JobError::Unsupported(e.to_string()),
        }
    }
}

impl From<GModuleError> for JobError {
    fn from(e: GModuleError) -> Self {
        JobError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Analyze,
    Twist,
    Envelope,
    Descend,
    Search,
    Density,
    Classify,
    Gmodule,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Twist => "twist",
            Command::Envelope => "envelope",
            Command::Descend => "descend",
            Command::Search => "search",
            Command::Density => "density",
            Command::Classify => "classify",
            Command::Gmodule => "gmodule",
        }
    }
}

impl FromStr for Command {
    type Err = JobError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        <Command as clap::ValueEnum>::from_str(s, false)
            .map_err(|_| JobError::Input(format!("unknown command \"{s}\"")))
    }
}

/// Result of one job; `unsupported` is set when part of the output is an
/// inline unsupported / out-of-domain report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub value: Value,
    pub unsupported: bool,
}

impl Outcome {
    fn ok(value: Value) -> Self {
        Outcome {
            value,
            unsupported: false,
        }
    }

    fn unsupported(reason: String) -> Self {
        Outcome {
            value: json!({ "status": "unsupported", "reason": reason }),
            unsupported: true,
        }
    }
}

pub struct Context {
    pub jobs: usize,
}

pub fn run(cmd: Command, inputs: &Map<String, Value>, ctx: &Context) -> Result<Outcome, JobError> {
    log::debug!("{} {}", cmd.name(), Value::Object(inputs.clone()));
    let res = match cmd {
        Command::Analyze => analyze(inputs),
        Command::Twist => twist(inputs),
        Command::Envelope => envelope(inputs),
        Command::Descend => descend(inputs),
        Command::Search => search(inputs, ctx),
        Command::Density => density(inputs, ctx),
        Command::Classify => classify(inputs),
        Command::Gmodule => gmodule_cmd(inputs),
    };
    match res {
        Err(JobError::Unsupported(reason)) => Ok(Outcome::unsupported(reason)),
        other => other,
    }
}

fn full_torsion(obj: &Map<String, Value>) -> Result<Option<FullTorsionCurve>, JobError> {
    let Some(e) = get(obj, "e") else {
        return Ok(None);
    };
    let e = json::int_array(e, "e", 3)?;
    let e: Vec<i128> = e
        .iter()
        .map(|x| {
            i128::try_from(x).map_err(|_| JobError::Unsupported(format!("root {x} out of range")))
        })
        .collect::<Result<_, _>>()?;
    Ok(Some(FullTorsionCurve::new(e[0], e[1], e[2])?))
}

fn curve(obj: &Map<String, Value>) -> Result<Curve, JobError> {
    if let Some(ft) = full_torsion(obj)? {
        return Ok(ft.curve()?);
    }
    let a = get(obj, "a")
        .ok_or_else(|| JobError::Input("missing curve: give \"a\" or \"e\"".into()))?;
    let a = json::int_array(a, "a", 5)?;
    Ok(Curve::new([
        a[0].clone(),
        a[1].clone(),
        a[2].clone(),
        a[3].clone(),
        a[4].clone(),
    ])?)
}

fn max_x(obj: &Map<String, Value>) -> Result<u64, JobError> {
    Ok(json::u64_field(obj, "maxX")?.unwrap_or(10_000))
}

fn analyze(obj: &Map<String, Value>) -> Result<Outcome, JobError> {
    let e = curve(obj)?;
    let m = e.minimal_model()?;
    let two = m.two_division();
    let reduction: Vec<Value> = m
        .bad_reduction()?
        .iter()
        .map(|r| {
            json!({
                "p": place(r.place),
                "type": r.kind.name(),
                "ordDelta": r.ord_delta_min,
            })
        })
        .collect();
    let mut out = json!({
        "curve": coeffs(&e),
        "minimalModel": coeffs(&m),
        "disc": int(m.disc()),
        "c4": int(m.c4()),
        "c6": int(m.c6()),
        "j": m.j().to_string(),
        "galoisType": two.galois_type.name(),
        "torsionDimQ": two.torsion_dim_q,
        "reduction": reduction,
        "semistable": m.is_semistable()?,
    });
    let mut unsupported = false;
    match parity::root_number(&m) {
        Ok(w) => out["rootNumber"] = json!(w.global),
        Err(err @ ParityError::OutOfDomain(_)) => {
            unsupported = true;
            out["rootNumber"] = Value::Null;
            out["rootNumberStatus"] = json!(err.to_string());
        }
        Err(err) => return Err(err.into()),
    }
    Ok(Outcome {
        value: out,
        unsupported,
    })
}

fn delta_json(v: Place, dv: &DeltaValue) -> Value {
    match dv {
        DeltaValue::Known { value, rule } => {
            json!({ "place": place(v), "delta": value, "rule": rule.tag() })
        }
        DeltaValue::Unsupported { reason } => {
            json!({ "place": place(v), "delta": Value::Null, "unsupported": reason })
        }
    }
}

fn twist(obj: &Map<String, Value>) -> Result<Outcome, JobError> {
    let e = curve(obj)?;
    let d = json::twist_disc(obj)?;
    let d2 = json::u64_field(obj, "d2")?.map(|v| v as u32);
    let twisted = e.twist(d)?;
    let report = twistlab::localdata::norm_index_report(&e, d)?;
    let deltas: Vec<Value> = report
        .entries
        .iter()
        .map(|(v, dv)| delta_json(*v, dv))
        .collect();
    let mut out = json!({
        "d": d.value(),
        "twist": coeffs(&twisted),
        "twistDisc": int(twisted.disc()),
        "deltas": deltas,
        "flip": report.total_parity,
    });
    if let Some(b) = d2 {
        out["predictedParity"] = json!(report.total_parity.map(|f| (b as u8 % 2 + f) % 2));
    }
    Ok(Outcome {
        value: out,
        unsupported: report.total_parity.is_none(),
    })
}

fn envelope(obj: &Map<String, Value>) -> Result<Outcome, JobError> {
    let e = curve(obj)?;
    let d = json::twist_disc(obj)?;
    let d2 = json::u64_field(obj, "d2")?
        .ok_or_else(|| JobError::Input("missing field \"d2\"".into()))? as u32;
    let dim_vt = json::u64_field(obj, "dimVT")?.map(|v| v as u32);
    let env = parity::selmer_envelope(&e, d, d2, dim_vt)?;
    Ok(Outcome::ok(json!({
        "d": d.value(),
        "tPrimes": env.t_primes.iter().map(|p| uint(*p)).collect::<Vec<_>>(),
        "t": env.t,
        "possible": env.possible,
        "exact": env.exact,
    })))
}

fn pair(g: &(BigInt, BigInt)) -> Value {
    json!([int(&g.0), int(&g.1)])
}

fn descend(obj: &Map<String, Value>) -> Result<Outcome, JobError> {
    let ft = full_torsion(obj)?.ok_or_else(|| {
        JobError::Input("descend needs a full 2-torsion curve given as \"e\": [e1, e2, e3]".into())
    })?;
    let basis = descent::sel2(&ft)?;
    let mut out = json!({
        "e": ft.e().iter().map(|x| int(&BigInt::from(*x))).collect::<Vec<_>>(),
        "d2": basis.dim,
        "generators": basis.generators.iter().map(pair).collect::<Vec<_>>(),
        "support": basis.support.iter().map(|p| uint(*p)).collect::<Vec<_>>(),
    });
    if get(obj, "d").is_some() {
        let d = json::twist_disc(obj)?;
        let r = descent::verify_twist_comparison(&ft, d)?;
        out["twist"] = json!({
            "d": d.value(),
            "t": r.t.iter().map(|p| uint(*p)).collect::<Vec<_>>(),
            "tDim": r.t_dim,
            "d2Twist": r.d2_twist,
            "dimVT": r.dim_vt,
            "dd": r.dd,
            "holds": r.holds(),
        });
    }
    Ok(Outcome::ok(out))
}

fn v0_json(v: DistinguishedPlace) -> Value {
    match v {
        DistinguishedPlace::Real => place(Place::Real),
        DistinguishedPlace::Multiplicative(q) => uint(q),
    }
}

fn search(obj: &Map<String, Value>, ctx: &Context) -> Result<Outcome, JobError> {
    let mode = get(obj, "mode")
        .and_then(Value::as_str)
        .ok_or_else(|| JobError::Input("missing field \"mode\"".into()))?;
    let x = max_x(obj)?;
    let out = match mode {
        "stable" => {
            let primes = twistsearch::stable_twist_primes(&curve(obj)?, x)?;
            json!({ "mode": mode, "maxX": x, "primes": primes })
        }
        "step" => {
            let cands = twistsearch::step_twist_candidates(&curve(obj)?, x)?;
            let cands: Vec<Value> = cands
                .iter()
                .map(|c| {
                    json!({
                        "p": c.p,
                        "d": c.d.value(),
                        "v0": v0_json(c.v0),
                        "shifts": c.shifts,
                        "flip": c.flip,
                    })
                })
                .collect();
            json!({ "mode": mode, "maxX": x, "candidates": cands })
        }
        "flip" => match twistsearch::flip_twist(&curve(obj)?, x) {
            Ok(f) => json!({
                "mode": mode,
                "maxX": x,
                "found": true,
                "d": f.d.value(),
                "v0": v0_json(f.v0),
                "frobeniusOrder": f.frobenius_order,
            }),
            Err(SearchError::NotFound) => json!({ "mode": mode, "maxX": x, "found": false }),
            Err(err) => return Err(err.into()),
        },
        "family" => {
            let p = json::u64_field(obj, "p")?
                .ok_or_else(|| JobError::Input("missing field \"p\"".into()))?;
            let t0 = json::i64_field(obj, "t0")?.unwrap_or(0);
            let eta = match json::u64_field(obj, "eta")? {
                Some(eta) => eta,
                None => twistsearch::family_eta(p)?,
            };
            let e = twistsearch::family_curve_with_eta(p, eta, t0)?;
            json!({
                "mode": mode,
                "p": p,
                "t0": t0,
                "eta": eta,
                "curve": coeffs(&e),
                "disc": int(e.disc()),
                "c4": int(e.c4()),
            })
        }
        "density" => return density(obj, ctx),
        other => {
            return Err(JobError::Input(format!(
                "unknown mode \"{other}\" (stable, step, flip, family, density)"
            )))
        }
    };
    Ok(Outcome::ok(out))
}

fn density(obj: &Map<String, Value>, ctx: &Context) -> Result<Outcome, JobError> {
    let e = curve(obj)?;
    let x = max_x(obj)?;
    let r = twistsearch::density_scan(&e, x, ctx.jobs)?;
    let orders: Vec<u8> = r.counts.keys().copied().collect();
    Ok(Outcome::ok(json!({
        "maxX": x,
        "galoisType": r.galois_type.name(),
        "total": r.total(),
        "order": orders,
        "count": orders.iter().map(|k| r.counts[k]).collect::<Vec<_>>(),
        "fraction": orders.iter().map(|k| r.fraction(*k)).collect::<Vec<_>>(),
        "expected": orders.iter().map(|k| r.expected.get(k).copied()).collect::<Vec<_>>(),
        "n1Count": r.n1_count,
        "exponent": r.exponent,
    })))
}

fn descriptor(v: &Value, i: usize) -> Result<PlaceDescriptor, JobError> {
    let bad = |m: &str| JobError::Input(format!("places[{i}]: {m}"));
    let obj = v.as_object().ok_or_else(|| bad("expected an object"))?;
    let kind = match get(obj, "kind").and_then(Value::as_str) {
        Some("real") => PlaceKind::Real,
        Some("complex") => PlaceKind::Complex,
        Some("finite") => PlaceKind::Finite {
            residue_char: json::u64_field(obj, "p")?.ok_or_else(|| bad("missing \"p\""))?,
            ramified: get(obj, "ramified")
                .and_then(Value::as_bool)
                .unwrap_or(false),
        },
        _ => return Err(bad("\"kind\" must be real, complex or finite")),
    };
    let reduction = match get(obj, "reduction").and_then(Value::as_str) {
        None => None,
        Some(s) => Some(
            [
                ReductionType::Good,
                ReductionType::MultSplit,
                ReductionType::MultNonsplit,
                ReductionType::Additive,
            ]
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| bad("unknown reduction type"))?,
        ),
    };
    let delta_parity = match get(obj, "deltaParity").and_then(Value::as_str) {
        None => None,
        Some(s) => Some(
            [DParity::Yes, DParity::No, DParity::Unknown]
                .into_iter()
                .find(|f| f.name() == s)
                .ok_or_else(|| bad("deltaParity must be yes, no or unknown"))?,
        ),
    };
    Ok(PlaceDescriptor {
        kind,
        reduction,
        ord_delta: json::u64_field(obj, "ordDelta")?.unwrap_or(0) as u32,
        delta_parity,
    })
}

fn classify(obj: &Map<String, Value>) -> Result<Outcome, JobError> {
    let places = req(obj, "places")?
        .as_array()
        .ok_or_else(|| JobError::Input("\"places\" must be an array".into()))?;
    let descs: Vec<PlaceDescriptor> = places
        .iter()
        .enumerate()
        .map(|(i, v)| descriptor(v, i))
        .collect::<Result<_, _>>()?;
    let flags: Vec<&str> = parity::effective_flags(&descs)?
        .iter()
        .map(|f| f.name())
        .collect();
    let out = match parity::classify_constant_parity(&descs)? {
        ConstantParity::Constant => json!({ "verdict": "constant", "flags": flags }),
        ConstantParity::NotConstant(i) => {
            json!({ "verdict": "not_constant", "place": i, "flags": flags })
        }
    };
    Ok(Outcome::ok(out))
}

fn gmodule_cmd(obj: &Map<String, Value>) -> Result<Outcome, JobError> {
    let p =
        json::u64_field(obj, "p")?.ok_or_else(|| JobError::Input("missing field \"p\"".into()))?;
    let alg = gmodule::group_algebra(p)?;
    let mut out = json!({
        "p": p,
        "simpleDims": alg.simple_dims(),
        "factors": alg.factors.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
    });
    if let Some(rows) = get(obj, "action") {
        let rows: Vec<String> = rows
            .as_array()
            .ok_or_else(|| JobError::Input("\"action\" must be an array of bit strings".into()))?
            .iter()
            .map(|r| r.as_str().map(str::to_string))
            .collect::<Option<_>>()
            .ok_or_else(|| JobError::Input("\"action\" rows must be strings".into()))?;
        let a = BitMatrix::from_row_strings(&rows).map_err(JobError::Input)?;
        let b = GModule::new(p, a)?;
        let dec = gmodule::split_module(&b)?;
        out["dim"] = json!(b.dim());
        out["fixedDim"] = json!(dec.fixed_dim);
        out["newDim"] = json!(dec.new_dim);
        out["multiplicities"] = dec
            .multiplicities
            .iter()
            .map(|(f, m)| json!({ "factor": f.to_string(), "multiplicity": m }))
            .collect();
        out["verdict"] = json!(match gmodule::rank_stability(&dec.multiplicities) {
            StabilityVerdict::RankStable => "rank_stable",
            StabilityVerdict::Inconclusive => "inconclusive",
        });
    }
    Ok(Outcome::ok(out))
}
