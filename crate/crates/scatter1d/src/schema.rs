//! Versioned JSON description of potentials. Complex numbers are `[re, im]`.
//!
//! ```json
//! {"schema": "scatter1d/v1", "potential": {"type": "delta", "strength": [2.0, 0.0], "location": 0.0}}
//! ```

use crate::potentials::{Potential, Sampled};
use crate::{Result, ScatterError, C64};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: &str = "scatter1d/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDocument {
    pub schema: String,
    pub potential: PotentialSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaTerm {
    pub strength: C64,
    pub location: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub n: i32,
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialSpec {
    Delta { strength: C64, location: f64 },
    DeltaComb { terms: Vec<DeltaTerm> },
    Barrier { height: C64, a_minus: f64, a_plus: f64 },
    Piecewise { breakpoints: Vec<f64>, values: Vec<C64> },
    ExpGrating { strength: C64, harmonic: u32, length: f64, #[serde(default)] offset: f64 },
    FourierCell { length: f64, coefficients: Vec<FourierTerm> },
    Smis { k0: f64, alpha: f64, winding: u32, #[serde(default)] shift: f64, #[serde(default)] conjugated: bool },
    Sampled { x0: f64, dx: f64, values: Vec<C64> },
    Sum { terms: Vec<PotentialSpec> },
    Translated { shift: f64, inner: Box<PotentialSpec> },
    TimeReversed { inner: Box<PotentialSpec> },
    LocallyPeriodic { cell: Box<PotentialSpec>, copies: u32, period: f64 },
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        Ok(match self {
            PotentialSpec::Delta { strength, location } => Potential::delta(*strength, *location)?,
            PotentialSpec::DeltaComb { terms } => {
                Potential::delta_comb(terms.iter().map(|t| (t.strength, t.location)).collect())?
            }
            PotentialSpec::Barrier { height, a_minus, a_plus } => Potential::barrier(*height, *a_minus, *a_plus)?,
            PotentialSpec::Piecewise { breakpoints, values } => Potential::piecewise(breakpoints.clone(), values.clone())?,
            PotentialSpec::ExpGrating { strength, harmonic, length, offset } => {
                Potential::exp_grating(*strength, *harmonic, *length, *offset)?
            }
            PotentialSpec::FourierCell { length, coefficients } => {
                Potential::fourier_cell(*length, coefficients.iter().map(|t| (t.n, t.value)).collect())?
            }
            PotentialSpec::Smis { k0, alpha, winding, shift, conjugated } => {
                Potential::smis(*k0, *alpha, *winding, *shift, *conjugated)?
            }
            PotentialSpec::Sampled { x0, dx, values } => Potential::Sampled(Sampled::new(*x0, *dx, values.clone())?),
            PotentialSpec::Sum { terms } => Potential::Sum(terms.iter().map(|t| t.build()).collect::<Result<_>>()?),
            PotentialSpec::Translated { shift, inner } => {
                if !shift.is_finite() {
                    return Err(ScatterError::InvalidPotential("shift must be finite".into()));
                }
                inner.build()?.translated(*shift)
            }
            PotentialSpec::TimeReversed { inner } => inner.build()?.time_reversed(),
            PotentialSpec::LocallyPeriodic { cell, copies, period } => {
                Potential::locally_periodic(cell.build()?, *copies, *period)?
            }
        })
    }
}

impl From<&Potential> for PotentialSpec {
    fn from(p: &Potential) -> Self {
        match p {
            Potential::DeltaComb(d) => {
                if let [(strength, location)] = d.terms() {
                    PotentialSpec::Delta { strength: *strength, location: *location }
                } else {
                    PotentialSpec::DeltaComb {
                        terms: d.terms().iter().map(|&(strength, location)| DeltaTerm { strength, location }).collect(),
                    }
                }
            }
            Potential::Piecewise(pc) => match (pc.breakpoints(), pc.values()) {
                ([a, b], [h]) => PotentialSpec::Barrier { height: *h, a_minus: *a, a_plus: *b },
                (bp, vals) => PotentialSpec::Piecewise { breakpoints: bp.to_vec(), values: vals.to_vec() },
            },
            Potential::ExpGrating(g) => PotentialSpec::ExpGrating {
                strength: g.strength(),
                harmonic: g.harmonic(),
                length: g.length(),
                offset: g.offset(),
            },
            Potential::FourierCell(f) => PotentialSpec::FourierCell {
                length: f.length(),
                coefficients: f.coefficients().iter().map(|&(n, value)| FourierTerm { n, value }).collect(),
            },
            Potential::Smis(s) => PotentialSpec::Smis {
                k0: s.k0(),
                alpha: s.alpha(),
                winding: s.winding(),
                shift: s.shift(),
                conjugated: s.conjugated(),
            },
            Potential::Sampled(s) => PotentialSpec::Sampled { x0: s.x0(), dx: s.dx(), values: s.values().to_vec() },
            Potential::Sum(ps) => PotentialSpec::Sum { terms: ps.iter().map(PotentialSpec::from).collect() },
            Potential::Translated { inner, shift } => {
                PotentialSpec::Translated { shift: *shift, inner: Box::new(inner.as_ref().into()) }
            }
            Potential::TimeReversed(inner) => PotentialSpec::TimeReversed { inner: Box::new(inner.as_ref().into()) },
            Potential::LocallyPeriodic { cell, copies, period } => PotentialSpec::LocallyPeriodic {
                cell: Box::new(cell.as_ref().into()),
                copies: *copies,
                period: *period,
            },
        }
    }
}

/// Parse a versioned potential document.
pub fn potential_from_json(text: &str) -> Result<Potential> {
    let doc: PotentialDocument = serde_json::from_str(text)?;
    if doc.schema != SCHEMA_VERSION {
        return Err(ScatterError::Json(format!(
            "unsupported schema '{}', expected '{SCHEMA_VERSION}'",
            doc.schema
        )));
    }
    doc.potential.build()
}

/// Serialize a potential as a versioned document.
pub fn potential_to_json(p: &Potential) -> Result<String> {
    let doc = PotentialDocument { schema: SCHEMA_VERSION.into(), potential: p.into() };
    Ok(serde_json::to_string_pretty(&doc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_delta_document() {
        let p = potential_from_json(
            r#"{"schema":"scatter1d/v1","potential":{"type":"delta","strength":[2.0,0.0],"location":0.5}}"#,
        )
        .unwrap();
        assert_eq!(p.delta_terms(), vec![(C64::new(2.0, 0.0), 0.5)]);
    }

    #[test]
    fn rejects_wrong_version_and_unknown_fields() {
        let bad = r#"{"schema":"v0","potential":{"type":"sum","terms":[]}}"#;
        assert!(potential_from_json(bad).is_err());
        let extra = r#"{"schema":"scatter1d/v1","potential":{"type":"sum","terms":[],"x":1}}"#;
        assert!(potential_from_json(extra).is_err());
    }

    #[test]
    fn roundtrip_nested() {
        let cell = Potential::barrier(C64::new(1.0, -0.5), 0.0, 0.3).unwrap();
        let p = Potential::Sum(vec![
            Potential::locally_periodic(cell, 4, 0.5).unwrap(),
            Potential::smis(1.0, 0.01, 3, 5.0, true).unwrap().translated(1.0),
            Potential::exp_grating(C64::new(0.1, 0.0), 2, 3.0, -4.0).unwrap().time_reversed(),
        ]);
        let back = potential_from_json(&potential_to_json(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
