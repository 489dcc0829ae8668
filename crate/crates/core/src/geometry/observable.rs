use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::{Monomial, Poly};
use super::space::PhaseSpace;
use super::spectral::{FourierSeries, Grid};
use crate::error::{Error, Result};
use crate::exact::{crat, rational_from_f64, to_c64};

#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    Poly(Poly),
    Fourier(FourierSeries),
    Grid(Grid),
}

/// A function on phase space in one of three interchangeable representations.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub space: PhaseSpace,
    pub repr: Representation,
}

impl Observable {
    pub fn poly(space: &PhaseSpace, p: Poly) -> Self {
        Self { space: *space, repr: Representation::Poly(p) }
    }

    pub fn fourier(space: &PhaseSpace, f: FourierSeries) -> Self {
        Self { space: *space, repr: Representation::Fourier(f) }
    }

    pub fn grid(g: Grid) -> Self {
        Self { space: g.space, repr: Representation::Grid(g) }
    }

    pub fn parse_poly(space: &PhaseSpace, s: &str) -> Result<Self> {
        Ok(Self::poly(space, Poly::parse(s)?))
    }

    pub fn as_poly(&self) -> Option<&Poly> {
        match &self.repr {
            Representation::Poly(p) => Some(p),
            _ => None,
        }
    }

    pub fn eval(&self, q: f64, p: f64) -> Complex64 {
        match &self.repr {
            Representation::Poly(poly) => poly.eval(q, p),
            Representation::Fourier(f) => f.eval(&self.space, q, p),
            Representation::Grid(g) => g.interpolator().eval(q, p),
        }
    }

    pub fn to_grid(&self) -> Grid {
        match &self.repr {
            Representation::Poly(poly) => Grid::from_fn(&self.space, |q, p| poly.eval(q, p)),
            Representation::Fourier(f) => f.to_grid(&self.space),
            Representation::Grid(g) => g.clone(),
        }
    }

    /// Fourier form; grids and polynomials go through the sampled spectrum,
    /// which must be resolved.
    pub fn to_fourier(&self) -> Result<FourierSeries> {
        match &self.repr {
            Representation::Fourier(f) => Ok(f.clone()),
            _ => {
                let g = self.to_grid();
                g.check_resolved()?;
                Ok(g.to_fourier().pruned(0.0))
            }
        }
    }

    pub fn ensure_same_space(&self, other: &Observable) -> Result<()> {
        if self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(Error::MismatchedSpace)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = match &self.repr {
            Representation::Poly(p) => {
                if p.has_hbar() {
                    return Err(Error::Unsupported("serializing polynomials in hbar".into()));
                }
                ObservableDoc::Poly(
                    p.terms()
                        .map(|(m, c)| {
                            let z = to_c64(c);
                            [m.q as f64, m.p as f64, z.re, z.im]
                        })
                        .collect(),
                )
            }
            Representation::Fourier(f) => ObservableDoc::Fourier(
                f.modes.iter().map(|(&(a, b), z)| [a as f64, b as f64, z.re, z.im]).collect(),
            ),
            Representation::Grid(_) => return Err(Error::Unsupported("serializing grid observables".into())),
        };
        serde_json::to_string(&doc).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads `{"poly": [[dq,dp,re,im],...]}` or `{"fourier": [[a,b,re,im],...]}`.
    /// Polynomial coefficients are converted exactly from their binary values.
    pub fn from_json(space: &PhaseSpace, text: &str) -> Result<Self> {
        let doc: ObservableDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let index = |x: f64, signed: bool| -> Result<i64> {
            if x.fract() != 0.0 || (!signed && x < 0.0) {
                return Err(Error::Parse(format!("expected an integer index, got {x}")));
            }
            Ok(x as i64)
        };
        match doc {
            ObservableDoc::Poly(rows) => {
                let mut poly = Poly::zero();
                for [dq, dp, re, im] in rows {
                    let m = Monomial::new(index(dq, false)? as u32, index(dp, false)? as u32, 0);
                    poly.add_term(m, crat(rational_from_f64(re)?, rational_from_f64(im)?));
                }
                Ok(Self::poly(space, poly))
            }
            ObservableDoc::Fourier(rows) => {
                let mut f = FourierSeries::zero();
                for [a, b, re, im] in rows {
                    f.add((index(a, true)?, index(b, true)?), Complex64::new(re, im));
                }
                Ok(Self::fourier(space, f))
            }
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ObservableDoc {
    Poly(Vec<[f64; 4]>),
    Fourier(Vec<[f64; 4]>),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let s = PhaseSpace::standard_torus(16).unwrap();
        let f = Observable::parse_poly(&s, "q^2/2 - 3 q p").unwrap();
        let text = f.to_json().unwrap();
        assert_eq!(Observable::from_json(&s, &text).unwrap(), f);

        let g = Observable::fourier(&s, FourierSeries::cosine(1, -2));
        let text = g.to_json().unwrap();
        assert!(text.starts_with("{\"fourier\""));
        assert_eq!(Observable::from_json(&s, &text).unwrap(), g);
    }

    #[test]
    fn rejects_fractional_indices() {
        let s = PhaseSpace::standard_torus(16).unwrap();
        assert!(Observable::from_json(&s, r#"{"poly": [[0.5, 0, 1, 0]]}"#).is_err());
        assert!(Observable::from_json(&s, r#"{"fourier": [[-1, 0, 1, 0]]}"#).is_ok());
        assert!(Observable::from_json(&s, r#"{"grid": []}"#).is_err());
    }

    #[test]
    fn phase_space_json_keys() {
        let s = PhaseSpace::standard_torus(16).unwrap();
        let v: serde_json::Value = serde_json::to_value(s).unwrap();
        for key in ["kind", "Lq", "Lp", "Nq", "Np"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["kind"], "torus");
    }
}
