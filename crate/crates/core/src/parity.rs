//! Global parity of 2-Selmer ranks under quadratic twist: Kramer's
//! congruence, the Selmer envelope for admissible twists, root numbers and
//! the constant-parity classifier.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use thiserror::Error;

use crate::arith::{kronecker, split_power, Place};
use crate::curve::{Curve, CurveError, ReductionType, TwistDisc};
use crate::localdata::{
    admissible, d_parity, norm_index_report, Admissibility, DParity, NormIndexReport,
    PlaceDescriptor, PlaceKind,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParityError {
    #[error("norm index unsupported at {place}: {reason}")]
    UnsupportedPlace { place: Place, reason: String },
    #[error("root number formula not available: additive reduction at {0}")]
    OutOfDomain(u128),
    #[error("twist is not admissible: {0}")]
    NotAdmissible(String),
    #[error("place {0} has no determined Δ-parity flag")]
    UnresolvedPlace(usize),
    #[error("place {0}: supplied Δ-parity flag contradicts its reduction data")]
    InconsistentFlag(usize),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityPrediction {
    /// Σ_v δ_v mod 2
    pub flip: u8,
    pub report: NormIndexReport,
    /// parity of d2(E^d) when d2(E) was supplied
    pub predicted_parity: Option<u8>,
}

/// d2(E^d) ≡ d2(E) + Σ_v δ_v(E, Q(√d)/Q) mod 2.
pub fn kramer_parity(
    e: &Curve,
    d: TwistDisc,
    d2_base: Option<u32>,
) -> Result<ParityPrediction, ParityError> {
    let report = norm_index_report(e, d)?;
    if let Some((place, reason)) = report.first_unsupported() {
        return Err(ParityError::UnsupportedPlace {
            place,
            reason: reason.to_string(),
        });
    }
    let flip = report.total_parity.expect("all entries supported");
    Ok(ParityPrediction {
        flip,
        predicted_parity: d2_base.map(|b| ((b % 2) as u8 + flip) % 2),
        report,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelmerEnvelope {
    pub t_primes: Vec<u128>,
    /// Σ_{p∈T} dim E(Q_p)[2]
    pub t: u32,
    /// admissible values of d2(E^d), ascending
    pub possible: Vec<u32>,
    pub exact: Option<u32>,
}

/// Values of d2(E^d) allowed by d2(E^d) = d2(E) - dim V_T + dd with
/// 0 ≤ dd ≤ t - dim V_T and dd ≡ t - dim V_T mod 2. When dim V_T is not
/// supplied it ranges over [0, min(d2, t)].
pub fn selmer_envelope(
    e: &Curve,
    d: TwistDisc,
    d2_base: u32,
    dim_vt: Option<u32>,
) -> Result<SelmerEnvelope, ParityError> {
    let t_primes = match admissible(e, d)? {
        Admissibility::Admissible { t } => t,
        Admissibility::Violation { reason } => return Err(ParityError::NotAdmissible(reason)),
    };
    let mut t = 0;
    for p in &t_primes {
        t += e.local_two_torsion_dim(Place::Finite(*p))?;
    }
    Ok(envelope_from_dims(t_primes, t, d2_base, dim_vt))
}

/// Envelope from the dimension data alone.
pub fn envelope_from_dims(
    t_primes: Vec<u128>,
    t: u32,
    d2_base: u32,
    dim_vt: Option<u32>,
) -> SelmerEnvelope {
    let range: Vec<u32> = match dim_vt {
        Some(x) => vec![x],
        None => (0..=d2_base.min(t)).collect(),
    };
    let mut possible = BTreeSet::new();
    for dim_v in range {
        if dim_v > t || dim_v > d2_base {
            continue;
        }
        let room = t - dim_v;
        for dd in (room % 2..=room).step_by(2) {
            possible.insert(d2_base - dim_v + dd);
        }
    }
    let exact = if t == 0 {
        Some(d2_base)
    } else {
        match dim_vt {
            Some(x) if x <= t && t - x <= 1 && x <= d2_base => Some(d2_base + t - 2 * x),
            _ => None,
        }
    };
    SelmerEnvelope {
        t_primes,
        t,
        possible: possible.into_iter().collect(),
        exact,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootNumberReport {
    pub global: i8,
    pub local: Vec<(Place, i8)>,
}

fn kron(a: i64, p: u128) -> i8 {
    kronecker(&BigInt::from(a), &BigInt::from(p)).expect("nonzero modulus")
}

/// Global root number from local factors: -1 at ∞, +1 at good primes,
/// -1 / +1 at split / nonsplit multiplicative primes and the standard table
/// for additive primes p ≥ 5.
pub fn root_number(e: &Curve) -> Result<RootNumberReport, ParityError> {
    let m = e.minimal_model()?;
    let mut local = vec![(Place::Real, -1i8)];
    for r in m.bad_reduction()? {
        let p = r.place.prime().expect("finite place");
        let w = match r.kind {
            ReductionType::MultSplit => -1,
            ReductionType::MultNonsplit => 1,
            ReductionType::Additive if p < 5 => return Err(ParityError::OutOfDomain(p)),
            ReductionType::Additive => {
                let j = m.j();
                let potentially_mult = !num_traits::Zero::is_zero(j.numer())
                    && split_power(j.denom(), p).0 > split_power(j.numer(), p).0;
                if potentially_mult {
                    kron(-1, p)
                } else {
                    match 12 / gcd(12, r.ord_delta_min) {
                        2 | 6 => kron(-1, p),
                        3 => kron(-3, p),
                        4 => kron(-2, p),
                        _ => unreachable!("additive potentially good reduction has e > 1"),
                    }
                }
            }
            ReductionType::Good | ReductionType::RealPlace => 1,
        };
        local.push((r.place, w));
    }
    let global = local.iter().map(|(_, w)| *w).product();
    Ok(RootNumberReport { global, local })
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Whether (-1)^d2 matches the global root number.
pub fn parity_crosscheck(e: &Curve, descent_d2: u32) -> Result<bool, ParityError> {
    let w = root_number(e)?.global;
    let sign = if descent_d2.is_multiple_of(2) { 1 } else { -1 };
    Ok(sign == w)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstantParity {
    Constant,
    /// index of the first place without Δ-parity
    NotConstant(usize),
}

/// Constant 2-Selmer parity holds iff every place has Δ-parity. Real and
/// multiplicative places never do. Places the local rules leave open take
/// the caller's flag; a place with neither is an error unless some other
/// place already decides the answer.
pub fn classify_constant_parity(places: &[PlaceDescriptor]) -> Result<ConstantParity, ParityError> {
    let flags = effective_flags(places)?;
    if let Some(i) = places.iter().position(|p| {
        p.kind == PlaceKind::Real || p.reduction.is_some_and(|r| r.is_multiplicative())
    }) {
        return Ok(ConstantParity::NotConstant(i));
    }
    if let Some(i) = flags.iter().position(|f| *f == DParity::No) {
        return Ok(ConstantParity::NotConstant(i));
    }
    match flags.iter().position(|f| *f == DParity::Unknown) {
        Some(i) => Err(ParityError::UnresolvedPlace(i)),
        None => Ok(ConstantParity::Constant),
    }
}

/// Δ-parity flag of each place: the one forced by its kind and reduction,
/// else the supplied one, else Unknown.
pub fn effective_flags(places: &[PlaceDescriptor]) -> Result<Vec<DParity>, ParityError> {
    places
        .iter()
        .enumerate()
        .map(|(i, p)| match (d_parity(p), p.delta_parity) {
            (DParity::Unknown, given) => Ok(given.unwrap_or(DParity::Unknown)),
            (forced, Some(given)) if given != DParity::Unknown && given != forced => {
                Err(ParityError::InconsistentFlag(i))
            }
            (forced, _) => Ok(forced),
        })
        .collect()
}

/// Squarefree d (by increasing |d|, negative first) with every δ_v supported
/// and Σ δ_v odd.
pub fn parity_flip_witness(e: &Curve, bound: u64) -> Result<Option<TwistDisc>, ParityError> {
    for n in 1..=bound as i64 {
        for d in [-n, n] {
            let Ok(d) = TwistDisc::new(d) else { continue };
            if d.is_trivial() {
                continue;
            }
            match kramer_parity(e, d, None) {
                Ok(pred) if pred.flip == 1 => return Ok(Some(d)),
                Ok(_) | Err(ParityError::UnsupportedPlace { .. }) => {}
                Err(err) => return Err(err),
            }
        }
    }
    Ok(None)
}
