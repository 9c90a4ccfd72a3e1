//! Trial rows as CSV or JSON lines, and the run metadata sidecar.

use std::io::Write;

use serde::Serialize;

use super::{Status, TrialRecord};
use crate::error::Result;

pub const CSV_HEADER: &str =
    "n,r,s,p,seed,trial,status,alpha_eq_N,alpha,stars_only,y_count,nodes,elapsed_ms";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Jsonl,
}

impl std::str::FromStr for Format {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "jsonl" | "json" => Ok(Format::Jsonl),
            other => Err(crate::Error::Parameter(format!(
                "unknown output format '{other}'"
            ))),
        }
    }
}

/// A real with 17 significant digits, trailing zeros dropped (C's `%.17g`).
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific form");
    let exp: i32 = exp.parse().expect("exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    if !(-5..17).contains(&exp) {
        let trimmed = mantissa.trim_end_matches('0').trim_end_matches('.');
        return format!("{sign}{trimmed}e{exp}");
    }
    let mut out = String::from(sign);
    if exp < 0 {
        out.push_str("0.");
        out.push_str(&"0".repeat((-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let point = exp as usize + 1;
        out.push_str(&digits[..point]);
        out.push('.');
        out.push_str(&digits[point..]);
    }
    out.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn json_opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "null".into())
}

pub fn write_records<W: Write>(out: &mut W, records: &[TrialRecord], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for rec in records {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    rec.n,
                    rec.r,
                    rec.s,
                    fmt_real(rec.p),
                    rec.seed,
                    rec.trial,
                    rec.status,
                    opt(rec.alpha_eq_n),
                    opt(rec.alpha),
                    opt(rec.stars_only),
                    opt(rec.y_count),
                    rec.nodes,
                    opt(rec.elapsed_ms),
                )?;
            }
        }
        Format::Jsonl => {
            for rec in records {
                writeln!(
                    out,
                    "{{\"n\":{},\"r\":{},\"s\":{},\"p\":{},\"seed\":{},\"trial\":{},\"status\":\"{}\",\
                     \"alpha_eq_N\":{},\"alpha\":{},\"stars_only\":{},\"y_count\":{},\"nodes\":{},\"elapsed_ms\":{}}}",
                    rec.n,
                    rec.r,
                    rec.s,
                    fmt_real(rec.p),
                    rec.seed,
                    rec.trial,
                    rec.status,
                    json_opt(rec.alpha_eq_n),
                    json_opt(rec.alpha),
                    json_opt(rec.stars_only),
                    json_opt(rec.y_count),
                    rec.nodes,
                    json_opt(rec.elapsed_ms),
                )?;
            }
        }
    }
    Ok(())
}

pub fn records_to_string(records: &[TrialRecord], format: Format) -> String {
    let mut buf = Vec::new();
    write_records(&mut buf, records, format).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Ok => "ok",
            Status::BudgetExceeded => "budget_exceeded",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(fmt_real(0.1), "0.10000000000000001");
        assert_eq!(fmt_real(0.5), "0.5");
        assert_eq!(fmt_real(1.0), "1");
        assert_eq!(fmt_real(0.0), "0");
        assert_eq!(fmt_real(75.497472), "75.497472000000002");
        assert_eq!(fmt_real(1e-7), "9.9999999999999995e-8");
        assert_eq!(fmt_real(-2.5), "-2.5");
        assert_eq!(fmt_real(123456.0), "123456");
        assert_eq!(fmt_real(3e20), "3e20");
        for x in [0.1, 0.7, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 6.02e23] {
            assert_eq!(fmt_real(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn rows_render() {
        let rec = TrialRecord {
            n: 5,
            r: 2,
            s: 0,
            p: 0.5,
            seed: 42,
            trial: 3,
            status: Status::Ok,
            alpha_eq_n: Some(true),
            alpha: Some(4),
            stars_only: None,
            y_count: Some(0),
            nodes: 7,
            elapsed_ms: None,
        };
        let csv = records_to_string(std::slice::from_ref(&rec), Format::Csv);
        assert_eq!(
            csv,
            format!("{CSV_HEADER}\n5,2,0,0.5,42,3,ok,true,4,,0,7,\n")
        );
        let json = records_to_string(&[rec], Format::Jsonl);
        let v: serde_json::Value = serde_json::from_str(json.trim()).unwrap();
        assert_eq!(v["alpha_eq_N"], true);
        assert_eq!(v["stars_only"], serde_json::Value::Null);
        assert_eq!(v["p"], 0.5);
        let header_keys: Vec<&str> = CSV_HEADER.split(',').collect();
        let obj = v.as_object().unwrap();
        assert_eq!(obj.len(), header_keys.len());
        assert!(header_keys.iter().all(|k| obj.contains_key(*k)));
    }
}
