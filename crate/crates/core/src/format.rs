//! Versioned JSON records for step functions, spectra, measures and
//! chaos polynomials.
//!
//! Array record (`format_version` 1):
//!
//! ```text
//! { "format_version": 1, "kind": "cells" | "paley", "p": 3, "level": 2,
//!   "values": [[re, im], ...],            // p^level entries
//!   "provenance": {...}, "variation": 1.0, "summary": {...} }   // optional
//! ```
//!
//! `kind = "cells"` stores a step function in cell order, `"paley"` stores
//! coefficients in Paley order. Polynomial record:
//!
//! ```text
//! { "format_version": 1, "p": 3, "N": 4,
//!   "terms": [{ "k": [0, 2], "l": [1, 2], "re": 0.5, "im": 0.0 }, ...] }
//! ```
//!
//! Terms are written by increasing order, then lexicographically in `(k, l)`.
//! Floats are written in shortest round-trip form, so reading back is exact.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{MeasureRep, Provenance};
use crate::padic::ChaosTerm;
use crate::poly::ChaosPolynomial;
use crate::transform::{Spectrum, StepFunction};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrayKind {
    Cells,
    Paley,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArrayFile {
    pub format_version: u32,
    pub kind: ArrayKind,
    pub p: usize,
    pub level: usize,
    pub values: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
}

fn pack(values: &[Complex64]) -> Vec<[f64; 2]> {
    values.iter().map(|c| [c.re, c.im]).collect()
}

fn unpack(values: &[[f64; 2]]) -> Vec<Complex64> {
    values
        .iter()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect()
}

fn check_version(v: u32) -> Result<()> {
    if v != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "field `format_version`: unsupported version {v}, expected {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
}

impl ArrayFile {
    pub fn from_step_function(f: &StepFunction) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: ArrayKind::Cells,
            p: f.base(),
            level: f.level(),
            values: pack(f.values()),
            provenance: None,
            variation: None,
            summary: None,
        }
    }

    pub fn from_spectrum(s: &Spectrum) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            kind: ArrayKind::Paley,
            p: s.base(),
            level: s.level(),
            values: pack(s.coeffs()),
            provenance: None,
            variation: None,
            summary: None,
        }
    }

    pub fn from_measure(m: &MeasureRep) -> Self {
        Self {
            provenance: Some(m.provenance.clone()),
            variation: Some(m.variation),
            ..Self::from_spectrum(&m.spectrum)
        }
    }

    pub fn with_summary(mut self, summary: serde_json::Value) -> Self {
        self.summary = Some(summary);
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = parse_json(text)?;
        check_version(file.format_version)?;
        let expected = crate::padic::cell_count(file.p, file.level)
            .map_err(|e| Error::Format(format!("fields `p`/`level`: {e}")))?;
        if file.values.len() != expected {
            return Err(Error::Format(format!(
                "field `values`: expected {expected} entries for {}^{}, found {}",
                file.p,
                file.level,
                file.values.len()
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("array records always serialize")
    }

    pub fn to_step_function(&self) -> Result<StepFunction> {
        if self.kind != ArrayKind::Cells {
            return Err(Error::Format("field `kind`: expected \"cells\"".into()));
        }
        StepFunction::new(self.p, self.level, unpack(&self.values))
    }

    pub fn to_spectrum(&self) -> Result<Spectrum> {
        if self.kind != ArrayKind::Paley {
            return Err(Error::Format("field `kind`: expected \"paley\"".into()));
        }
        Spectrum::new(self.p, self.level, unpack(&self.values))
    }

    /// A measure record; the variation is recomputed from the coefficients.
    pub fn to_measure(&self) -> Result<MeasureRep> {
        let spectrum = self.to_spectrum()?;
        Ok(MeasureRep::from_spectrum(
            spectrum,
            self.provenance.clone().unwrap_or(Provenance::Raw),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub k: Vec<usize>,
    pub l: Vec<usize>,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFile {
    pub format_version: u32,
    pub p: usize,
    #[serde(rename = "N")]
    pub n_max: usize,
    pub terms: Vec<TermRecord>,
}

impl PolyFile {
    pub fn from_poly(q: &ChaosPolynomial) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            p: q.base(),
            n_max: q.n_max(),
            terms: q
                .iter()
                .map(|(t, c)| TermRecord {
                    k: t.positions().to_vec(),
                    l: t.exponents().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = parse_json(text)?;
        check_version(file.format_version)?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("polynomial records always serialize")
    }

    pub fn to_poly(&self) -> Result<ChaosPolynomial> {
        let mut q = ChaosPolynomial::new(self.p, self.n_max)
            .map_err(|e| Error::Format(format!("field `p`: {e}")))?;
        for (i, rec) in self.terms.iter().enumerate() {
            let term = ChaosTerm::new(rec.k.clone(), rec.l.clone(), self.p)
                .map_err(|e| Error::Format(format!("terms[{i}]: {e}")))?;
            if q.coeff(&term) != Complex64::default() {
                return Err(Error::Format(format!("terms[{i}]: duplicate term")));
            }
            q.insert(term, Complex64::new(rec.re, rec.im))
                .map_err(|e| Error::Format(format!("terms[{i}]: {e}")))?;
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::enumerate_nd;
    use proptest::prelude::*;

    #[test]
    fn malformed_inputs_name_the_field() {
        let err = ArrayFile::parse("{\"format_version\": 1,\n \"kind\": \"cells\"").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let bad_len = r#"{"format_version":1,"kind":"paley","p":2,"level":2,"values":[[1,0]]}"#;
        assert!(ArrayFile::parse(bad_len)
            .unwrap_err()
            .to_string()
            .contains("`values`"));
        let bad_ver = r#"{"format_version":9,"kind":"paley","p":2,"level":0,"values":[[1,0]]}"#;
        assert!(ArrayFile::parse(bad_ver)
            .unwrap_err()
            .to_string()
            .contains("format_version"));
        let bad_term = r#"{"format_version":1,"p":3,"N":2,"terms":[{"k":[0],"l":[1],"re":1,"im":0},{"k":[1,0],"l":[1,1],"re":1,"im":0}]}"#;
        let err = PolyFile::parse(bad_term).unwrap().to_poly().unwrap_err();
        assert!(err.to_string().contains("terms[1]"), "{err}");
    }

    #[test]
    fn kind_is_enforced() {
        let s = Spectrum::dirac(2, 2).unwrap();
        let file = ArrayFile::from_spectrum(&s);
        assert!(file.to_step_function().is_err());
        assert_eq!(file.to_spectrum().unwrap(), s);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn array_round_trip_is_exact(p in 2usize..6, level in 0usize..4, seed in any::<u64>()) {
            let n = p.pow(level as u32);
            let vals: Vec<Complex64> = (0..n as u64)
                .map(|i| {
                    let x = seed.wrapping_mul(i + 1).rotate_left(17);
                    Complex64::new(x as f64 / 3.0e18 - 1.7, (x >> 7) as f64 * 1e-13)
                })
                .collect();
            let s = Spectrum::new(p, level, vals).unwrap();
            let back = ArrayFile::parse(&ArrayFile::from_spectrum(&s).to_json()).unwrap();
            prop_assert_eq!(back.to_spectrum().unwrap(), s);
        }

        #[test]
        fn poly_round_trip_is_exact(p in 2usize..5, n in 0usize..4, seed in any::<u64>()) {
            let mut q = ChaosPolynomial::new(p, n).unwrap();
            for (i, t) in enumerate_nd(p, 1, n).unwrap().into_iter().enumerate() {
                let x = seed.wrapping_mul(i as u64 + 3).rotate_left(11);
                q.insert(t, Complex64::new(x as f64 * 1.1e-19, -(x as f64).sqrt())).unwrap();
            }
            let back = PolyFile::parse(&PolyFile::from_poly(&q).to_json()).unwrap().to_poly().unwrap();
            prop_assert_eq!(back, q);
        }
    }
}
