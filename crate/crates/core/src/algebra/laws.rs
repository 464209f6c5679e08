use std::fmt;

use thiserror::Error;

use super::{Usage, UsageAlgebra};

/// A law that failed, with the offending carrier values.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct LawViolation {
    pub law: Law,
    pub witness: Vec<Usage>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Law {
    /// `x' ·= y ⊹ z` and `x ·= y ⊹ z` imply `x' = x`.
    Unique,
    /// `x ·= y' ⊹ z` and `x ·= y ⊹ z` imply `y' = y`.
    UniqueLeft,
    /// `x ·= y ⊹ z` and `y ·= u ⊹ v` imply some `w` with `x ·= u ⊹ w` and `w ·= v ⊹ z`.
    Assoc,
    /// `x ·= y ⊹ z` implies `x ·= z ⊹ y`.
    Comm,
    /// `split` decides the relation and stays inside the carrier.
    ComputeRight,
    /// `x ·= 0 ⊹ x`.
    IdLeft,
    /// `0 ·= y ⊹ z` implies `y = 0`.
    MinLeft,
}

impl Law {
    pub const ALL: [Law; 7] = [
        Law::Unique,
        Law::UniqueLeft,
        Law::Assoc,
        Law::Comm,
        Law::ComputeRight,
        Law::IdLeft,
        Law::MinLeft,
    ];
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Law::Unique => "·-unique",
            Law::UniqueLeft => "·-uniqueˡ",
            Law::Assoc => "·-assoc",
            Law::Comm => "·-comm",
            Law::ComputeRight => "·-computeʳ",
            Law::IdLeft => "·-idˡ",
            Law::MinLeft => "·-minˡ",
        };
        f.write_str(name)
    }
}

impl fmt::Display for LawViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} fails at {:?}", self.law, self.witness)
    }
}

/// Checks one law over every combination drawn from `domain`.
pub fn check_law(alg: &dyn UsageAlgebra, law: Law, domain: &[Usage]) -> Result<(), LawViolation> {
    let fail = |witness: Vec<Usage>| Err(LawViolation { law, witness });
    let rel = |x, y, z| alg.split(x, y) == Some(z);
    match law {
        Law::Unique => {
            for &y in domain {
                for &x in domain {
                    let Some(z) = alg.split(x, y) else { continue };
                    for &x2 in domain {
                        if x2 != x && rel(x2, y, z) {
                            return fail(vec![x2, x, y, z]);
                        }
                    }
                }
            }
        }
        Law::UniqueLeft => {
            for &x in domain {
                for &y in domain {
                    let Some(z) = alg.split(x, y) else { continue };
                    for &y2 in domain {
                        if y2 != y && rel(x, y2, z) {
                            return fail(vec![x, y2, y, z]);
                        }
                    }
                }
            }
        }
        Law::Assoc => {
            for &x in domain {
                for &y in domain {
                    let Some(z) = alg.split(x, y) else { continue };
                    for &u in domain {
                        let Some(v) = alg.split(y, u) else { continue };
                        let ok = alg.split(x, u).is_some_and(|w| rel(w, v, z));
                        if !ok {
                            return fail(vec![x, y, z, u, v]);
                        }
                    }
                }
            }
        }
        Law::Comm => {
            for &x in domain {
                for &y in domain {
                    if let Some(z) = alg.split(x, y) {
                        if !rel(x, z, y) {
                            return fail(vec![x, y, z]);
                        }
                    }
                }
            }
        }
        Law::ComputeRight => {
            for &x in domain {
                for &y in domain {
                    let first = alg.split(x, y);
                    if first != alg.split(x, y) {
                        return fail(vec![x, y]);
                    }
                    if let Some(z) = first {
                        if !alg.contains(z) {
                            return fail(vec![x, y, z]);
                        }
                    }
                }
            }
        }
        Law::IdLeft => {
            for &x in domain {
                if !rel(x, alg.zero(), x) {
                    return fail(vec![x]);
                }
            }
        }
        Law::MinLeft => {
            for &y in domain {
                if alg.split(alg.zero(), y).is_some() && y != alg.zero() {
                    return fail(vec![y]);
                }
            }
        }
    }
    Ok(())
}

/// Checks all seven laws over the algebra's carrier (exhaustive for finite
/// carriers, the bounded sample otherwise).
pub fn check_laws(alg: &dyn UsageAlgebra) -> Result<(), LawViolation> {
    for (law, value) in [(Law::IdLeft, alg.zero()), (Law::ComputeRight, alg.one())] {
        if !alg.contains(value) {
            return Err(LawViolation {
                law,
                witness: vec![value],
            });
        }
    }
    let carrier = alg.carrier();
    Law::ALL
        .iter()
        .try_for_each(|&law| check_law(alg, law, carrier.values()))
}
