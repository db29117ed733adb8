//! C99-style hexadecimal float text (`0x1.8p+1` for 3.0), used so stored
//! matrices reload bit-exactly.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

const MANTISSA_BITS: u32 = 52;
const MANTISSA_MASK: u64 = (1 << MANTISSA_BITS) - 1;
const EXP_BIAS: i64 = 1023;

pub fn format(value: f64) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    let sign = if value.is_sign_negative() { "-" } else { "" };
    if value.is_infinite() {
        return format!("{sign}inf");
    }
    let bits = value.to_bits();
    let biased = ((bits >> MANTISSA_BITS) & 0x7ff) as i64;
    let mantissa = bits & MANTISSA_MASK;
    if biased == 0 && mantissa == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, exp) = if biased == 0 { (0, 1 - EXP_BIAS) } else { (1, biased - EXP_BIAS) };
    let digits = format!("{mantissa:013x}");
    let digits = digits.trim_end_matches('0');
    let frac = if digits.is_empty() { String::new() } else { format!(".{digits}") };
    format!("{sign}0x{lead}{frac}p{exp:+}")
}

pub fn parse(text: &str) -> Option<f64> {
    let t = text.trim();
    match t {
        "nan" => return Some(f64::NAN),
        "inf" => return Some(f64::INFINITY),
        "-inf" => return Some(f64::NEG_INFINITY),
        _ => {}
    }
    let (negative, rest) = match t.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let rest = rest.strip_prefix("0x").or_else(|| rest.strip_prefix("0X"))?;
    let (body, exp) = rest.split_once(['p', 'P'])?;
    let exp: i64 = exp.parse().ok()?;
    let (lead, frac) = body.split_once('.').unwrap_or((body, ""));
    if frac.len() > 13 || !frac.chars().all(|c| c.is_ascii_hexdigit()) {
        return None;
    }
    let mantissa = if frac.is_empty() {
        0
    } else {
        u64::from_str_radix(frac, 16).ok()? << (4 * (13 - frac.len()))
    };
    let biased = match lead {
        "1" => exp + EXP_BIAS,
        "0" if mantissa == 0 => 0,
        "0" if exp == 1 - EXP_BIAS => 0,
        _ => return None,
    };
    if !(0..0x7ff).contains(&biased) {
        return None;
    }
    let bits = (u64::from(negative) << 63) | ((biased as u64) << MANTISSA_BITS) | mantissa;
    Some(f64::from_bits(bits))
}

/// `f64` that serializes as a hex-float string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hex(pub f64);

impl Serialize for Hex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(self.0))
    }
}

impl<'de> Deserialize<'de> for Hex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text)
            .map(Hex)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid hex float {text:?}")))
    }
}
