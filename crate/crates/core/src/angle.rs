//! Angle literals for configuration files.
//!
//! Phases may be written either as plain numbers (radians) or as rational
//! multiples of π: `pi`, `pi/2`, `3pi/8`, `3*pi/8`, `-pi/4`, `0.25pi`, `π/2`.

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer};

use crate::{Error, Result};

/// Parse an angle literal into radians.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Parse("empty angle".into()));
    }
    let lower = s.to_ascii_lowercase().replace('π', "pi");
    let value = match lower.find("pi") {
        None => parse_number(&lower)?,
        Some(pos) => {
            let head = &lower[..pos];
            let tail = &lower[pos + 2..];
            let head = head.strip_suffix('*').unwrap_or(head);
            let factor = match head {
                "" | "+" => 1.0,
                "-" => -1.0,
                h => parse_number(h)?,
            };
            let divisor = match tail {
                "" => 1.0,
                t => {
                    let d = t
                        .strip_prefix('/')
                        .ok_or_else(|| Error::Parse(format!("unexpected `{t}` after pi")))?;
                    parse_number(d)?
                }
            };
            if divisor == 0.0 {
                return Err(Error::Parse("division by zero in angle".into()));
            }
            factor * PI / divisor
        }
    };
    if !value.is_finite() {
        return Err(Error::Parse(format!("angle `{text}` is not finite")));
    }
    Ok(value)
}

fn parse_number(s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("invalid number `{s}`")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("non-finite number `{s}`")))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Number(f64),
    Text(String),
}

impl AngleRepr {
    fn resolve(self) -> Result<f64> {
        match self {
            AngleRepr::Number(v) if v.is_finite() => Ok(v),
            AngleRepr::Number(v) => Err(Error::Parse(format!("non-finite angle {v}"))),
            AngleRepr::Text(t) => parse_angle(&t),
        }
    }
}

/// `deserialize_with` helper for a single angle.
pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
    AngleRepr::deserialize(de)?
        .resolve()
        .map_err(serde::de::Error::custom)
}

/// `deserialize_with` helper for a list of angles.
pub fn deserialize_list<'de, D: Deserializer<'de>>(
    de: D,
) -> std::result::Result<Vec<f64>, D::Error> {
    Vec::<AngleRepr>::deserialize(de)?
        .into_iter()
        .map(|a| a.resolve().map_err(serde::de::Error::custom))
        .collect()
}
