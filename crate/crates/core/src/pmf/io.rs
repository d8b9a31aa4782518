//! Text serialization for pmfs.
//!
//! Format: one header line `offset=<int> mode=<exact|float>`, then one
//! weight per line (rationals as `num/den`, floats in shortest round-trip
//! decimal). Exact-mode round trips are bit-exact.

use num::BigRational;

use super::{LatticePmf, Weight};
use crate::error::{Error, Result};

/// A pmf of either mode, as read back from text.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyPmf {
    Exact(LatticePmf<BigRational>),
    Float(LatticePmf<f64>),
}

impl<W: Weight> LatticePmf<W> {
    pub fn to_text(&self) -> String {
        let mode = if W::EXACT { "exact" } else { "float" };
        let mut out = format!("offset={} mode={}\n", self.min_support(), mode);
        for (_, w) in self.iter() {
            out.push_str(&w.render());
            out.push('\n');
        }
        out
    }
}

pub fn parse_pmf(text: &str) -> Result<AnyPmf> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty pmf text".into()))?;
    let mut offset: Option<i64> = None;
    let mut mode: Option<&str> = None;
    for field in header.split_whitespace() {
        match field.split_once('=') {
            Some(("offset", v)) => {
                offset = Some(
                    v.parse()
                        .map_err(|e| Error::Parse(format!("bad offset {v:?}: {e}")))?,
                )
            }
            Some(("mode", v)) => mode = Some(v),
            _ => return Err(Error::Parse(format!("bad header field {field:?}"))),
        }
    }
    let offset = offset.ok_or_else(|| Error::Parse("header missing offset".into()))?;
    let body: Vec<&str> = lines.collect();
    match mode {
        Some("exact") => {
            let weights = body
                .iter()
                .map(|l| <BigRational as Weight>::parse_weight(l))
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyPmf::Exact(LatticePmf::new(offset, weights)?))
        }
        Some("float") => {
            let weights = body
                .iter()
                .map(|l| <f64 as Weight>::parse_weight(l))
                .collect::<Result<Vec<_>>>()?;
            Ok(AnyPmf::Float(LatticePmf::new(offset, weights)?))
        }
        other => Err(Error::Parse(format!("bad mode {other:?}"))),
    }
}
