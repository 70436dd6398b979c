//! Local conditions at each place: H^1_f dimensions, local norm indices
//! δ_v(E, F/Q) for F = Q(√d), D-parity flags and twist admissibility.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::arith::{hilbert_int, kronecker, Place};
use crate::curve::{Curve, CurveError, ReductionType, TwistDisc};

/// How a place behaves in Q(√d)/Q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

pub fn place_behavior(d: TwistDisc, v: Place) -> Splitting {
    let dv = d.value();
    if dv == 1 {
        return Splitting::Split;
    }
    match v {
        Place::Real => {
            if dv > 0 {
                Splitting::Split
            } else {
                Splitting::Ramified
            }
        }
        Place::Finite(2) => match dv.rem_euclid(8) {
            1 => Splitting::Split,
            5 => Splitting::Inert,
            _ => Splitting::Ramified,
        },
        Place::Finite(p) => {
            if (dv.unsigned_abs() as u128).is_multiple_of(p) {
                Splitting::Ramified
            } else if kronecker(&BigInt::from(dv), &BigInt::from(p)).unwrap() == 1 {
                Splitting::Split
            } else {
                Splitting::Inert
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum H1fRule {
    /// dim E(Q_p)[2] for odd p
    LocalTorsion,
    /// real place and p = 2 formulas
    Extended,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct H1fDim {
    pub dim: u32,
    pub rule: H1fRule,
}

/// dim_F2 of the local Kummer image E(Q_v)/2E(Q_v).
pub fn h1f_dim(e: &Curve, v: Place) -> Result<H1fDim, CurveError> {
    Ok(match v {
        Place::Real => H1fDim {
            dim: if e.minimal_disc()?.is_positive() {
                1
            } else {
                0
            },
            rule: H1fRule::Extended,
        },
        Place::Finite(2) => H1fDim {
            dim: e.local_two_torsion_dim(v)? + 1,
            rule: H1fRule::Extended,
        },
        Place::Finite(_) => H1fDim {
            dim: e.local_two_torsion_dim(v)?,
            rule: H1fRule::LocalTorsion,
        },
    })
}

/// Which criterion determined a local norm index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeltaRule {
    /// v splits in F
    Split,
    /// v odd with E(Q_v)[2] = 0
    NoLocalTwoTorsion,
    /// good reduction, v unramified
    GoodUnramified,
    /// real place with Δ < 0
    RealNegativeDisc,
    /// real place, d < 0, Δ > 0: δ = 1 iff (Δ, d)_∞ = 1
    RealHilbert,
    /// good reduction at odd ramified v: δ = dim E(Q_v)[2]
    GoodRamified,
    /// multiplicative, inert, ord_v(Δ) odd
    MultInertOddOrd,
    /// split multiplicative, ramified: δ = 1 iff (Δ, d)_v = 1
    MultSplitRamified,
}

impl DeltaRule {
    pub fn tag(self) -> &'static str {
        match self {
            DeltaRule::Split => "split",
            DeltaRule::NoLocalTwoTorsion => "no-local-2-torsion",
            DeltaRule::GoodUnramified => "good-unramified",
            DeltaRule::RealNegativeDisc => "real-negative-disc",
            DeltaRule::RealHilbert => "real-hilbert",
            DeltaRule::GoodRamified => "good-ramified",
            DeltaRule::MultInertOddOrd => "mult-inert-odd-ord",
            DeltaRule::MultSplitRamified => "mult-split-ramified",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DeltaValue {
    Known { value: u32, rule: DeltaRule },
    Unsupported { reason: String },
}

impl DeltaValue {
    pub fn value(&self) -> Option<u32> {
        match self {
            DeltaValue::Known { value, .. } => Some(*value),
            DeltaValue::Unsupported { .. } => None,
        }
    }

    fn known(value: u32, rule: DeltaRule) -> Self {
        DeltaValue::Known { value, rule }
    }
}

impl fmt::Display for DeltaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaValue::Known { value, rule } => write!(f, "{value} ({})", rule.tag()),
            DeltaValue::Unsupported { reason } => write!(f, "unsupported ({reason})"),
        }
    }
}

/// Local norm index δ_v(E, Q(√d)/Q). First matching rule wins; places the
/// rules do not cover are reported as unsupported rather than guessed.
pub fn delta_v(e: &Curve, d: TwistDisc, v: Place) -> Result<DeltaValue, CurveError> {
    let e = e.minimal_model()?;
    let splitting = place_behavior(d, v);
    if splitting == Splitting::Split {
        return Ok(DeltaValue::known(0, DeltaRule::Split));
    }
    let red = e.reduction_type(v)?;
    let disc = e.disc();
    match v {
        Place::Real => {
            if disc.is_negative() {
                return Ok(DeltaValue::known(0, DeltaRule::RealNegativeDisc));
            }
            // d < 0 here
            let h = hilbert_int(disc, &d.big(), v)?;
            Ok(DeltaValue::known(u32::from(h == 1), DeltaRule::RealHilbert))
        }
        Place::Finite(p) => {
            let torsion = if p != 2 {
                let t = e.local_two_torsion_dim(v)?;
                if t == 0 {
                    return Ok(DeltaValue::known(0, DeltaRule::NoLocalTwoTorsion));
                }
                Some(t)
            } else {
                None
            };
            let ramified = splitting == Splitting::Ramified;
            match (red.kind, ramified) {
                (ReductionType::Good, false) => Ok(DeltaValue::known(0, DeltaRule::GoodUnramified)),
                (ReductionType::Good, true) if p != 2 => Ok(DeltaValue::known(
                    torsion.expect("odd prime"),
                    DeltaRule::GoodRamified,
                )),
                (k, false) if k.is_multiplicative() && red.ord_delta_min % 2 == 1 => {
                    Ok(DeltaValue::known(0, DeltaRule::MultInertOddOrd))
                }
                (ReductionType::MultSplit, true) => {
                    let h = hilbert_int(disc, &d.big(), v)?;
                    Ok(DeltaValue::known(
                        u32::from(h == 1),
                        DeltaRule::MultSplitRamified,
                    ))
                }
                (k, _) => Ok(DeltaValue::Unsupported {
                    reason: format!(
                        "{} reduction at {p}, {}",
                        k.name(),
                        if ramified { "ramified" } else { "inert" }
                    ),
                }),
            }
        }
    }
}

/// δ_v at every place that can contribute: ∞, 2, primes of bad reduction
/// and primes dividing d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormIndexReport {
    pub entries: Vec<(Place, DeltaValue)>,
    /// Σ δ_v mod 2, absent when some entry is unsupported
    pub total_parity: Option<u8>,
}

impl NormIndexReport {
    pub fn first_unsupported(&self) -> Option<(Place, &str)> {
        self.entries.iter().find_map(|(v, dv)| match dv {
            DeltaValue::Unsupported { reason } => Some((*v, reason.as_str())),
            _ => None,
        })
    }

    pub fn delta_at(&self, v: Place) -> Option<&DeltaValue> {
        self.entries.iter().find(|(w, _)| *w == v).map(|(_, dv)| dv)
    }
}

/// Places where δ_v can be nonzero for the twist by d.
pub fn relevant_places(e: &Curve, d: TwistDisc) -> Result<Vec<Place>, CurveError> {
    let mut primes = e.bad_primes_min()?;
    primes.push(2);
    primes.extend(d.primes());
    primes.sort_unstable();
    primes.dedup();
    let mut out = vec![Place::Real];
    out.extend(primes.into_iter().map(Place::Finite));
    Ok(out)
}

pub fn norm_index_report(e: &Curve, d: TwistDisc) -> Result<NormIndexReport, CurveError> {
    let mut entries = Vec::new();
    let mut total = Some(0u8);
    for v in relevant_places(e, d)? {
        let dv = delta_v(e, d, v)?;
        total = match (total, dv.value()) {
            (Some(t), Some(x)) => Some((t + (x % 2) as u8) % 2),
            _ => None,
        };
        entries.push((v, dv));
    }
    Ok(NormIndexReport {
        entries,
        total_parity: total,
    })
}

/// Whether a local curve has Δ-parity: δ(E, F/K) is even exactly when Δ is a
/// norm from F.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DParity {
    Yes,
    No,
    Unknown,
}

impl DParity {
    pub fn name(self) -> &'static str {
        match self {
            DParity::Yes => "yes",
            DParity::No => "no",
            DParity::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaceKind {
    Real,
    Complex,
    Finite { residue_char: u64, ramified: bool },
}

/// Local data at a place of an arbitrary number field, supplied by the
/// caller.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaceDescriptor {
    pub kind: PlaceKind,
    /// `None` at archimedean places
    pub reduction: Option<ReductionType>,
    pub ord_delta: u32,
    /// caller-supplied flag, used where the local rules are silent
    pub delta_parity: Option<DParity>,
}

/// Δ-parity from the local case analysis: good reduction at odd residue
/// characteristic has it, multiplicative reduction and the real place do not.
/// Complex places split every quadratic extension and so have it trivially.
pub fn d_parity(desc: &PlaceDescriptor) -> DParity {
    match desc.kind {
        PlaceKind::Real => DParity::No,
        PlaceKind::Complex => DParity::Yes,
        PlaceKind::Finite { residue_char, .. } => match desc.reduction {
            Some(r) if r.is_multiplicative() => DParity::No,
            Some(ReductionType::Good) if residue_char != 2 => DParity::Yes,
            _ => DParity::Unknown,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Admissibility {
    /// T: ramified primes with nontrivial local 2-torsion
    Admissible {
        t: Vec<u128>,
    },
    Violation {
        reason: String,
    },
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible { .. })
    }
}

/// Check the splitting hypotheses under which the local conditions of E and
/// its twist agree outside T.
pub fn admissible(e: &Curve, d: TwistDisc) -> Result<Admissibility, CurveError> {
    let e = e.minimal_model()?;
    let violation = |reason: String| Ok(Admissibility::Violation { reason });
    if place_behavior(d, Place::Finite(2)) != Splitting::Split {
        return violation(format!("2 does not split: {d} is not 1 mod 8"));
    }
    if e.disc().is_positive() && d.value() < 0 {
        return violation("real place with positive discriminant must split".into());
    }
    for r in e.bad_reduction()? {
        let v = r.place;
        let s = place_behavior(d, v);
        let p = v.prime().unwrap();
        match r.kind {
            ReductionType::Additive if s != Splitting::Split => {
                return violation(format!("additive place {p} must split"));
            }
            k if k.is_multiplicative() && r.ord_delta_min % 2 == 0 && s != Splitting::Split => {
                return violation(format!("multiplicative place {p} with even ord must split"));
            }
            k if k.is_multiplicative() && s == Splitting::Ramified => {
                return violation(format!("multiplicative place {p} must be unramified"));
            }
            _ => {}
        }
    }
    let mut t = Vec::new();
    for p in d.primes() {
        if e.local_two_torsion_dim(Place::Finite(p))? > 0 {
            t.push(p);
        }
    }
    Ok(Admissibility::Admissible { t })
}
