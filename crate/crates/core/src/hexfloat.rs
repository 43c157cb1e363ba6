//! C99 `%a`-style hexadecimal float text, used wherever a value must
//! survive a JSON round trip bit for bit.

use crate::error::{invalid, Result};
use nalgebra::DVector;
use serde::{Deserialize, Deserializer, Serializer};

/// Formats `x` as e.g. `0x1.8p+1`, `-0x0.0000000000001p-1022`, `inf`, `nan`.
pub fn format(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    if x.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if exp_bits == 0 {
        (0, -1022)
    } else {
        (1, exp_bits - 1023)
    };
    let mut frac = format!("{mantissa:013x}");
    while frac.ends_with('0') {
        frac.pop();
    }
    let esign = if exp < 0 { '-' } else { '+' };
    if frac.is_empty() {
        format!("{sign}0x{lead}p{esign}{}", exp.abs())
    } else {
        format!("{sign}0x{lead}.{frac}p{esign}{}", exp.abs())
    }
}

/// Parses the output of [`format`]. Also accepts plain decimal text so
/// hand-written configs can use ordinary numbers.
pub fn parse(s: &str) -> Result<f64> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let lower = body.to_ascii_lowercase();
    let apply = |v: f64| if neg { -v } else { v };
    match lower.as_str() {
        "nan" => return Ok(f64::NAN),
        "inf" | "infinity" => return Ok(apply(f64::INFINITY)),
        _ => {}
    }
    let Some(hex) = lower.strip_prefix("0x") else {
        return s
            .parse::<f64>()
            .map_err(|_| invalid(format!("not a float: {s:?}")));
    };
    let bad = || invalid(format!("malformed hex float: {s:?}"));
    let (mant, exp) = hex.split_once('p').ok_or_else(bad)?;
    let exp: i64 = exp.parse().map_err(|_| bad())?;
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() || frac_part.len() > 13 {
        return Err(bad());
    }
    let lead = u64::from_str_radix(int_part, 16).map_err(|_| bad())?;
    if lead > 1 {
        return Err(bad());
    }
    let frac = if frac_part.is_empty() {
        0
    } else {
        let padded = format!("{frac_part:0<13}");
        u64::from_str_radix(&padded, 16).map_err(|_| bad())?
    };
    let bits = match lead {
        0 if frac == 0 => 0,
        0 => {
            if exp != -1022 {
                return Err(bad());
            }
            frac
        }
        _ => {
            let biased = exp + 1023;
            if !(1..=2046).contains(&biased) {
                return Err(bad());
            }
            ((biased as u64) << 52) | frac
        }
    };
    Ok(apply(f64::from_bits(bits)))
}

pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format(*x))
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    let text = String::deserialize(d)?;
    parse(&text).map_err(serde::de::Error::custom)
}

/// Serde adapter for `Option<f64>`.
pub mod opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&format(*v)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<f64>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|t| parse(&t).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Serde adapter for dense vectors.
pub mod vector {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(
        x: &DVector<f64>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(x.len()))?;
        for v in x.iter() {
            seq.serialize_element(&format(*v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<DVector<f64>, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        let vals = items
            .iter()
            .map(|t| parse(t))
            .collect::<Result<Vec<f64>>>()
            .map_err(serde::de::Error::custom)?;
        Ok(DVector::from_vec(vals))
    }
}

/// Serde adapter for `Option<DVector<f64>>`.
pub mod opt_vector {
    use super::*;

    #[derive(serde::Serialize, serde::Deserialize)]
    #[serde(transparent)]
    struct Wrap(#[serde(with = "super::vector")] DVector<f64>);

    pub fn serialize<S: Serializer>(
        x: &Option<DVector<f64>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match x {
            Some(v) => s.serialize_some(&Wrap(v.clone())),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<DVector<f64>>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}
