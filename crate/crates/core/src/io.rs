//! Form files: `{"dim": n, "degree": k, "terms": [{"idx": [...], "re": x, "im": y}]}`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exterior::{mask_position, Form, MultiIndex, MAX_DIM};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRecord {
    pub idx: Vec<usize>,
    pub re: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormRecord {
    pub dim: usize,
    pub degree: usize,
    pub terms: Vec<TermRecord>,
}

impl FormRecord {
    pub fn into_form(self) -> Result<Form> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::Parse(format!("unsupported dimension {}", self.dim)));
        }
        if self.degree > self.dim {
            return Err(Error::Parse(format!("degree {} exceeds dimension {}", self.degree, self.dim)));
        }
        let mut f = Form::zeros(self.dim, self.degree);
        let mut im = vec![0.0; f.len()];
        let mut seen = std::collections::BTreeSet::new();
        for (t, term) in self.terms.into_iter().enumerate() {
            let at = |msg: String| Error::Parse(format!("term {t}: {msg}"));
            if term.idx.len() != self.degree {
                return Err(at(format!("index length {} but degree is {}", term.idx.len(), self.degree)));
            }
            if term.idx.iter().any(|&i| i == 0 || i > self.dim) {
                return Err(at(format!("index out of range 1..={}", self.dim)));
            }
            let mi = MultiIndex::new(term.idx).map_err(|e| match e {
                Error::Parse(m) => at(m),
                other => at(other.to_string()),
            })?;
            if !term.re.is_finite() || !term.im.unwrap_or(0.0).is_finite() {
                return Err(at("non-finite coefficient".into()));
            }
            if !seen.insert(mi.clone()) {
                return Err(at("duplicate multi-index".into()));
            }
            let p = mask_position(self.dim, mi.mask());
            f.re_mut()[p] = term.re;
            im[p] = term.im.unwrap_or(0.0);
        }
        if im.iter().any(|&x| x != 0.0) {
            let re = f.re().to_vec();
            f = Form::from_complex(f.dim(), f.degree(), re, im)?;
        }
        Ok(f)
    }

    pub fn from_form(f: &Form) -> Self {
        let terms = f
            .terms()
            .into_iter()
            .map(|(mi, c)| TermRecord {
                idx: mi.indices().to_vec(),
                re: c.re,
                im: f.is_complex().then_some(c.im),
            })
            .collect();
        FormRecord { dim: f.dim(), degree: f.degree(), terms }
    }
}

pub fn parse_form(text: &str) -> Result<Form> {
    let rec: FormRecord = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    rec.into_form()
}

pub fn read_form(path: &std::path::Path) -> Result<Form> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_form(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let f = Form::from_terms(6, 3, &[(&[1, 2, 3], 1.0), (&[4, 5, 6], -2.5)]);
        let text = serde_json::to_string(&FormRecord::from_form(&f)).unwrap();
        assert_eq!(parse_form(&text).unwrap(), f);
    }

    #[test]
    fn complex_terms() {
        let f = parse_form(r#"{"dim":6,"degree":1,"terms":[{"idx":[1],"re":1},{"idx":[2],"re":0,"im":1}]}"#)
            .unwrap();
        assert!(f.is_complex());
        assert_eq!(f.coeff(&[2]).im, 1.0);
    }

    #[test]
    fn errors_name_the_term() {
        let e = parse_form(r#"{"dim":6,"degree":3,"terms":[{"idx":[1,2,3],"re":1},{"idx":[3,2,1],"re":1}]}"#)
            .unwrap_err();
        assert!(e.to_string().contains("term 1"), "{e}");
        let e = parse_form(r#"{"dim":6,"degree":3,"terms":[{"idx":[1,2],"re":1}]}"#).unwrap_err();
        assert!(e.to_string().contains("term 0"), "{e}");
        assert!(parse_form("{").is_err());
    }
}
