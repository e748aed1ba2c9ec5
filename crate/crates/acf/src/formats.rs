//! Group definition files, counterexample certificates (TOML) and CSV output.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use carnot_core::group::{make_step2, GroupLaw, VectorField};
use carnot_core::ratpoly::{format_rational, parse_poly_with, print_poly_with};
use carnot_core::{parse_rational, CarnotGroup, CounterexampleResult, StratifiedWeights, VarNames};
use serde::{Deserialize, Serialize};

use crate::acf::{AcfEvaluation, JCurve, QuarticCoeffs};
use crate::error::{AcfError, Result};
use crate::sampling::Estimate;

pub const DEFAULT_PRECISION: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldEntry {
    /// 1-based index of the horizontal coordinate the field starts with.
    pub base_index: usize,
    /// Coordinate (name such as `y`, or 1-based index) to polynomial.
    #[serde(default)]
    pub coeffs: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFile {
    pub name: String,
    pub strata: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step2_skew: Option<Vec<Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<FieldEntry>,
    /// Coordinates of `P o P'`, with `P'` written in primed variables.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<Vec<String>>,
}

fn invalid(msg: impl Into<String>) -> AcfError {
    AcfError::InvalidInput(msg.into())
}

impl GroupFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("group file: {e}")))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| invalid(format!("group file: {e}")))
    }

    pub fn to_group(&self) -> Result<CarnotGroup> {
        let w = StratifiedWeights::new(&self.strata)?;
        if let Some(bs) = &self.step2_skew {
            let mats = bs
                .iter()
                .map(|b| b.iter().map(|row| row.iter().map(|s| parse_rational(s)).collect()).collect())
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let mut g = make_step2(&mats)?;
            if g.weights != w {
                return Err(invalid("strata do not match the step2_skew matrices"));
            }
            g.name = self.name.clone();
            return Ok(g);
        }
        let names = VarNames::for_weights(&w);
        let n = w.n();
        let mut fields: Vec<VectorField> = (0..w.m1()).map(VectorField::coordinate).collect();
        for entry in &self.fields {
            let base = entry
                .base_index
                .checked_sub(1)
                .filter(|&b| b < w.m1())
                .ok_or_else(|| invalid(format!("base_index {} out of range", entry.base_index)))?;
            let mut coeffs = BTreeMap::new();
            for (coord, poly) in &entry.coeffs {
                let k = names
                    .index_of(coord)
                    .or_else(|| coord.parse::<usize>().ok().and_then(|i| i.checked_sub(1)).filter(|&i| i < n))
                    .ok_or_else(|| invalid(format!("unknown coordinate `{coord}`")))?;
                coeffs.insert(k, parse_poly_with(poly, &names)?);
            }
            fields[base] = VectorField::new(base, coeffs);
        }
        let law = match (&self.law, &self.inverse) {
            (Some(law), Some(inv)) => {
                let two = names.primed_copies(2);
                Some(GroupLaw {
                    product: law.iter().map(|s| parse_poly_with(s, &two)).collect::<std::result::Result<_, _>>()?,
                    inverse: inv.iter().map(|s| parse_poly_with(s, &names)).collect::<std::result::Result<_, _>>()?,
                })
            }
            (None, None) => None,
            _ => return Err(invalid("law and inverse must be given together")),
        };
        Ok(CarnotGroup::new(self.name.clone(), w, fields, law, None)?)
    }

    pub fn from_group(g: &CarnotGroup) -> Self {
        let names = VarNames::for_weights(&g.weights);
        let fields = g
            .fields
            .iter()
            .filter(|f| !f.coeffs.is_empty())
            .map(|f| FieldEntry {
                base_index: f.base + 1,
                coeffs: f.coeffs.iter().map(|(k, p)| (names.name(*k).to_string(), print_poly_with(p, &names))).collect(),
            })
            .collect();
        let two = names.primed_copies(2);
        GroupFile {
            name: g.name.clone(),
            strata: g.weights.strata().to_vec(),
            step2_skew: g.step2.as_ref().map(|bs| {
                bs.iter().map(|b| b.iter().map(|row| row.iter().map(format_rational).collect()).collect()).collect()
            }),
            fields,
            law: g.law.as_ref().map(|l| l.product.iter().map(|p| print_poly_with(p, &two)).collect()),
            inverse: g.law.as_ref().map(|l| l.inverse.iter().map(|p| print_poly_with(p, &names)).collect()),
        }
    }
}

/// A preset name, or the path of a group definition file.
pub fn load_group(source: &str) -> Result<CarnotGroup> {
    let path = Path::new(source);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{source}: {e}")))?;
        return GroupFile::from_toml(&text)?.to_group();
    }
    Ok(CarnotGroup::preset(source)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub i: usize,
    pub s: usize,
    pub j: usize,
    pub alpha_gap: String,
}

/// Serialized counterexample; all numbers are exact rational strings and
/// indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub group: String,
    pub b: String,
    pub p: String,
    pub q: String,
    pub pair: PairEntry,
    pub coefficients: Vec<String>,
    pub p1: String,
    pub p3: String,
    pub u: String,
    pub harmonic: bool,
    pub inner_product: String,
    pub inner_matches_pq: bool,
}

impl Certificate {
    pub fn from_result(g: &CarnotGroup, r: &CounterexampleResult) -> Self {
        let names = VarNames::for_weights(&g.weights);
        let show = |p| print_poly_with(p, &names);
        Certificate {
            group: g.name.clone(),
            b: format_rational(&r.b),
            p: format_rational(&r.p),
            q: format_rational(&r.q),
            pair: PairEntry {
                i: r.pair.i + 1,
                s: r.pair.s + 1,
                j: r.pair.j + 1,
                alpha_gap: format_rational(&r.pair.alpha_gap),
            },
            coefficients: r.coefficients.iter().map(format_rational).collect(),
            p1: show(&r.p1),
            p3: show(&r.p3),
            u: show(&r.u),
            harmonic: r.certificate.harmonic,
            inner_product: show(&r.certificate.inner_product),
            inner_matches_pq: r.certificate.inner_matches_pq,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| invalid(format!("certificate: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("certificate: {e}")))
    }
}

/// `precision` significant digits in scientific notation.
pub fn fmt_num(x: f64, precision: usize) -> String {
    if x.is_finite() {
        format!("{:.*e}", precision.max(1) - 1, x)
    } else {
        String::new()
    }
}

fn csv_err(e: csv::Error) -> AcfError {
    invalid(format!("csv: {e}"))
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| invalid(format!("csv: {e}")))?;
    Ok(())
}

pub fn write_phi_csv<W: Write>(out: W, ev: &AcfEvaluation, precision: usize) -> Result<()> {
    let f = |x: f64| fmt_num(x, precision);
    let rows = ev
        .r_grid
        .iter()
        .enumerate()
        .map(|(a, &r)| {
            let q = ev.phi_quartic.as_ref().map(|v| v[a]);
            vec![
                f(r),
                f(ev.phi[a].value),
                f(ev.phi[a].stderr),
                q.map_or(String::new(), |e| f(e.value)),
                q.map_or(String::new(), |e| f(e.stderr)),
            ]
        })
        .collect();
    write_rows(out, &["r", "phi", "stderr", "phi_quartic", "quartic_stderr"], rows)
}

pub fn write_coeffs_csv<W: Write>(out: W, c: &QuarticCoeffs, precision: usize) -> Result<()> {
    let f = |x: f64| fmt_num(x, precision);
    let row = |name: &str, e: Estimate| vec![name.to_string(), f(e.value), f(e.stderr)];
    let mut rows = vec![row("a0", c.a0), row("a2", c.a2), row("a4", c.a4)];
    let rs = c.r_star().unwrap_or(Estimate::new(f64::NAN, f64::NAN));
    rows.push(row("r_star", rs));
    write_rows(out, &["name", "estimate", "stderr"], rows)
}

pub fn write_jay_csv<W: Write>(out: W, curve: &JCurve, precision: usize) -> Result<()> {
    let f = |x: f64| fmt_num(x, precision);
    let rows = curve
        .points
        .iter()
        .map(|p| {
            vec![
                f(p.r),
                f(p.j.value),
                f(p.j.stderr),
                f(p.i_plus.value),
                f(p.i_plus.stderr),
                f(p.i_minus.value),
                f(p.i_minus.stderr),
            ]
        })
        .collect();
    write_rows(out, &["r", "J", "J_stderr", "I_plus", "I_plus_stderr", "I_minus", "I_minus_stderr"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use carnot_core::counterexample::construct;
    use carnot_core::group::validate_group;
    use carnot_core::ratpoly::{int, rat};

    #[test]
    fn group_file_round_trip() {
        for name in ["engel", "heisenberg:2", "heisenberg:1:polarized", "euclidean:3"] {
            let g = CarnotGroup::preset(name).unwrap();
            let text = GroupFile::from_group(&g).to_toml().unwrap();
            let back = GroupFile::from_toml(&text).unwrap().to_group().unwrap();
            assert!(back.same_fields(&g), "{name}\n{text}");
            assert_eq!(back.law, g.law, "{name}");
            assert!(validate_group(&back).all_passed());
        }
    }

    #[test]
    fn hand_written_group_file() {
        let text = r#"
name = "engel-by-hand"
strata = [2, 1, 1]

[[fields]]
base_index = 2
coeffs = { y = "x1", "4" = "1/2*x1^2" }
"#;
        let g = GroupFile::from_toml(text).unwrap().to_group().unwrap();
        assert!(g.same_fields(&CarnotGroup::preset("engel").unwrap()));
        assert!(g.law.is_none());

        let skew = "name = \"h\"\nstrata = [2, 1]\nstep2_skew = [[[\"0\", \"-1\"], [\"1\", \"0\"]]]\n";
        let h = GroupFile::from_toml(skew).unwrap().to_group().unwrap();
        assert!(h.same_fields(&CarnotGroup::preset("heisenberg:1").unwrap()));

        let bad = "name = \"b\"\nstrata = [2, 1]\n[[fields]]\nbase_index = 3\n";
        assert!(GroupFile::from_toml(bad).unwrap().to_group().is_err());
    }

    #[test]
    fn certificate_round_trip() {
        let g = CarnotGroup::preset("engel").unwrap();
        let r = construct(&g, &int(1), &int(0), &rat(1, 2)).unwrap();
        let c = Certificate::from_result(&g, &r);
        assert_eq!(c.u, "x2 - 1/2*x1*y + 1/2*x1^2*x2 - 1/6*x2^3");
        assert_eq!(c.coefficients, vec!["0", "-1/2", "0", "1/6", "1/2"]);
        assert_eq!((c.pair.i, c.pair.s, c.pair.j), (1, 2, 1));
        let text = c.to_toml().unwrap();
        assert_eq!(Certificate::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(std::f64::consts::TAU, 9), "6.28318531e0");
        assert_eq!(fmt_num(-0.00012345, 3), "-1.23e-4");
        assert_eq!(fmt_num(f64::NAN, 9), "");
    }
}
