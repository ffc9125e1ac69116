//! Wire formats: JSON series literals and map files, domain strings, and the
//! inline series syntax for quick command-line use.
//!
//! A series literal is `{"n":2,"D":16,"terms":[[[1,0],"1"],[[0,2],"5"]]}`,
//! read as `x1 + 5*x2^2` under degree cap 16, coefficients as decimal
//! strings (`p/q` for rationals). A map file carries a domain header and one
//! literal per component. Round-trips are exact.

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, DomainSpec};
use crate::error::{Error, Result};
use crate::maps::PolyMap;
use crate::series::{MultiIndex, TateSeries};

fn is_false(b: &bool) -> bool {
    !*b
}

/// JSON form of a single series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesLiteral {
    pub n: usize,
    #[serde(rename = "D")]
    pub degree_cap: u32,
    /// `[[exponents], "coefficient"]` pairs in canonical order.
    pub terms: Vec<(Vec<u32>, String)>,
    /// Marker that terms past the cap were discarded.
    #[serde(default, skip_serializing_if = "is_false")]
    pub truncated: bool,
}

impl SeriesLiteral {
    pub fn from_series(series: &TateSeries) -> Self {
        SeriesLiteral {
            n: series.variable_count(),
            degree_cap: series.degree_cap(),
            terms: series
                .iter()
                .map(|(idx, c)| (idx.exponents().to_vec(), c.to_coeff_string()))
                .collect(),
            truncated: !series.is_exact(),
        }
    }

    pub fn to_series(&self, domain: &Domain) -> Result<TateSeries> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (exps, coeff) in &self.terms {
            terms.push((MultiIndex::new(exps.clone()), domain.parse_element(coeff)?));
        }
        let series = TateSeries::from_terms(domain, self.n, self.degree_cap, terms)?;
        Ok(if self.truncated {
            series.mark_truncated()
        } else {
            series
        })
    }
}

/// JSON form of a single series together with its domain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesFile {
    pub domain: DomainSpec,
    pub series: SeriesLiteral,
}

impl SeriesFile {
    pub fn from_series(series: &TateSeries) -> Self {
        SeriesFile {
            domain: series.domain().spec().clone(),
            series: SeriesLiteral::from_series(series),
        }
    }

    pub fn to_series(&self) -> Result<TateSeries> {
        let domain = Domain::new(self.domain.clone())?;
        self.series.to_series(&domain)
    }
}

/// JSON form of a map: a domain header plus one series literal per
/// component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapFile {
    pub domain: DomainSpec,
    pub components: Vec<SeriesLiteral>,
}

impl MapFile {
    pub fn from_map(map: &PolyMap) -> Self {
        MapFile {
            domain: map.domain().spec().clone(),
            components: map
                .components()
                .iter()
                .map(SeriesLiteral::from_series)
                .collect(),
        }
    }

    pub fn to_map(&self) -> Result<PolyMap> {
        let domain = Domain::new(self.domain.clone())?;
        PolyMap::new(
            self.components
                .iter()
                .map(|c| c.to_series(&domain))
                .collect::<Result<_>>()?,
        )
    }
}

/// Parse a compact domain string: `z-adic:m:N` for `Z/m^N`, `z-exact:m` for
/// exact integers with ideal `(m)`, and `q` for the rationals.
pub fn parse_domain_str(text: &str) -> Result<DomainSpec> {
    let parts: Vec<&str> = text.split(':').collect();
    let parse_u64 = |s: &str, what: &str| -> Result<u64> {
        s.parse().map_err(|_| Error::Parse {
            offset: 0,
            message: format!("invalid {what} in domain string {text:?}"),
        })
    };
    match parts.as_slice() {
        ["q"] | ["rational"] => Ok(DomainSpec::RationalDiscrete),
        ["z-adic", m, n] => Ok(DomainSpec::TruncatedAdic {
            m: parse_u64(m, "modulus")?,
            precision: parse_u64(n, "precision")? as u32,
        }),
        ["z-exact", m] => Ok(DomainSpec::ExactIntegerAdic {
            m: parse_u64(m, "modulus")?,
        }),
        _ => Err(Error::Parse {
            offset: 0,
            message: format!(
                "unknown domain string {text:?}; expected q, z-adic:m:N, or z-exact:m"
            ),
        }),
    }
}

/// Render the compact domain string for a spec.
pub fn domain_str(spec: &DomainSpec) -> String {
    match spec {
        DomainSpec::TruncatedAdic { m, precision } => format!("z-adic:{m}:{precision}"),
        DomainSpec::ExactIntegerAdic { m } => format!("z-exact:{m}"),
        DomainSpec::RationalDiscrete => "q".into(),
    }
}

/// Parse the inline series syntax `c*x1^a*x2^b +- ...`.
///
/// Bare `x` means `x1`. Coefficients are optional integers or `p/q`
/// rationals; `*` between factors is optional. The variable count is the
/// largest index seen unless `n` is given.
pub fn parse_inline_series(
    text: &str,
    domain: &Domain,
    n: Option<usize>,
    cap: u32,
) -> Result<TateSeries> {
    let tokens = tokenize(text)?;
    let terms = parse_terms(&tokens, text)?;
    let inferred = terms
        .iter()
        .flat_map(|t| t.powers.iter().map(|&(var, _)| var + 1))
        .max()
        .unwrap_or(1);
    let n = n.unwrap_or(inferred);
    if inferred > n {
        return Err(Error::Parse {
            offset: 0,
            message: format!("series mentions x{inferred} but n = {n}"),
        });
    }
    let mut out = Vec::with_capacity(terms.len());
    for t in terms {
        let mut exps = vec![0u32; n];
        for (var, e) in t.powers {
            exps[var] += e;
        }
        let mut coeff = domain.parse_element(&t.coefficient)?;
        if t.negative {
            coeff = coeff.neg();
        }
        out.push((MultiIndex::new(exps), coeff));
    }
    TateSeries::from_terms(domain, n, cap, out)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Plus(usize),
    Minus(usize),
    Star(usize),
    Caret(usize),
    Number(usize, String),
    Variable(usize, usize), // offset, zero-based index
}

impl Token {
    fn offset(&self) -> usize {
        match self {
            Token::Plus(o)
            | Token::Minus(o)
            | Token::Star(o)
            | Token::Caret(o)
            | Token::Number(o, _)
            | Token::Variable(o, _) => *o,
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                tokens.push(Token::Plus(i));
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus(i));
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star(i));
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret(i));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'/') {
                    i += 1;
                }
                tokens.push(Token::Number(start, text[start..i].to_string()));
            }
            'x' | 'X' => {
                let start = i;
                i += 1;
                let digits_start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let index = if digits_start == i {
                    1
                } else {
                    text[digits_start..i].parse::<usize>().map_err(|_| Error::Parse {
                        offset: start,
                        message: "invalid variable index".into(),
                    })?
                };
                if index == 0 {
                    return Err(Error::Parse {
                        offset: start,
                        message: "variable indices start at 1".into(),
                    });
                }
                tokens.push(Token::Variable(start, index - 1));
            }
            other => {
                return Err(Error::Parse {
                    offset: i,
                    message: format!("unexpected character {other:?}"),
                })
            }
        }
    }
    Ok(tokens)
}

struct InlineTerm {
    negative: bool,
    coefficient: String,
    powers: Vec<(usize, u32)>,
}

fn parse_terms(tokens: &[Token], text: &str) -> Result<Vec<InlineTerm>> {
    let mut terms = Vec::new();
    let mut pos = 0;
    if tokens.is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty series".into(),
        });
    }
    while pos < tokens.len() {
        let mut negative = false;
        // sign prefix
        loop {
            match tokens.get(pos) {
                Some(Token::Plus(_)) => pos += 1,
                Some(Token::Minus(_)) => {
                    negative = !negative;
                    pos += 1;
                }
                _ => break,
            }
        }
        let mut coefficient: Option<String> = None;
        let mut powers: Vec<(usize, u32)> = Vec::new();
        let mut saw_factor = false;
        loop {
            match tokens.get(pos) {
                Some(Token::Number(off, digits)) => {
                    if coefficient.is_some() || !powers.is_empty() {
                        return Err(Error::Parse {
                            offset: *off,
                            message: "coefficient must come first in a term".into(),
                        });
                    }
                    coefficient = Some(digits.clone());
                    saw_factor = true;
                    pos += 1;
                }
                Some(Token::Variable(_, var)) => {
                    let var = *var;
                    pos += 1;
                    let exponent = match tokens.get(pos) {
                        Some(Token::Caret(coff)) => {
                            let coff = *coff;
                            pos += 1;
                            match tokens.get(pos) {
                                Some(Token::Number(_, digits)) => {
                                    let e =
                                        digits.parse::<u32>().map_err(|_| Error::Parse {
                                            offset: coff + 1,
                                            message: "invalid exponent".into(),
                                        })?;
                                    pos += 1;
                                    e
                                }
                                _ => {
                                    return Err(Error::Parse {
                                        offset: coff,
                                        message: "expected exponent after ^".into(),
                                    })
                                }
                            }
                        }
                        _ => 1,
                    };
                    powers.push((var, exponent));
                    saw_factor = true;
                }
                Some(Token::Star(off)) => {
                    if !saw_factor {
                        return Err(Error::Parse {
                            offset: *off,
                            message: "unexpected *".into(),
                        });
                    }
                    pos += 1;
                }
                Some(Token::Plus(_)) | Some(Token::Minus(_)) | None => break,
                Some(tok) => {
                    return Err(Error::Parse {
                        offset: tok.offset(),
                        message: format!(
                            "unexpected token near {:?}",
                            &text[tok.offset()..text.len().min(tok.offset() + 4)]
                        ),
                    })
                }
            }
        }
        if !saw_factor {
            let offset = tokens.get(pos).map(Token::offset).unwrap_or(text.len());
            return Err(Error::Parse {
                offset,
                message: "expected a term".into(),
            });
        }
        terms.push(InlineTerm {
            negative,
            coefficient: coefficient.unwrap_or_else(|| "1".into()),
            powers,
        });
    }
    Ok(terms)
}
