//! JSON interchange formats.
//!
//! Elements are always serialized as their length-2r coefficient vectors
//! over F_p; field specs carry (p, r, base_modulus, ext_modulus) with the
//! extension coefficients as plain integers when r = 1 and as length-r
//! digit vectors otherwise. serde_json's map is ordered, so identical data
//! serializes to identical bytes.

use crate::construct::{Family, PPForm};
use crate::error::{Error, Result};
use crate::fields::{build_field, Elt, FieldCtx};
use crate::inverse::{InverseCert, InverseForm, InverseMethod, SForm};
use crate::linearized::LinPoly;
use crate::spoly::SPoly;
use serde_json::{json, Map, Value};

pub fn field_spec_json(ctx: &FieldCtx) -> Value {
    let ext: Vec<Value> = ctx
        .ext_modulus()
        .iter()
        .map(|&e| {
            if ctx.r() == 1 {
                json!(e)
            } else {
                json!(ctx.fq_digits(e))
            }
        })
        .collect();
    json!({
        "p": ctx.p(),
        "r": ctx.r(),
        "base_modulus": ctx.base_modulus(),
        "ext_modulus": ext,
    })
}

pub fn field_from_json(v: &Value) -> Result<FieldCtx> {
    let obj = v.as_object().ok_or_else(|| malformed("field spec must be an object"))?;
    let p = get_u64(obj, "p")? as u32;
    let r = get_u64(obj, "r")? as u32;
    let base: Vec<u32> = obj
        .get("base_modulus")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("base_modulus must be an array"))?
        .iter()
        .map(|c| c.as_u64().map(|x| x as u32).ok_or_else(|| malformed("bad base coefficient")))
        .collect::<Result<_>>()?;
    // build once without the extension to translate its coefficients
    let ext_raw = obj
        .get("ext_modulus")
        .and_then(Value::as_array)
        .ok_or_else(|| malformed("ext_modulus must be an array"))?;
    if ext_raw.len() != 3 {
        return Err(malformed("ext_modulus must have 3 coefficients"));
    }
    let probe = build_field(p, r, Some(base.clone()), None)?;
    let mut ext = [0u32; 3];
    for (i, c) in ext_raw.iter().enumerate() {
        ext[i] = match c {
            Value::Number(n) => n.as_u64().ok_or_else(|| malformed("bad ext coefficient"))? as u32,
            Value::Array(digits) => {
                let d: Vec<u32> = digits
                    .iter()
                    .map(|x| {
                        x.as_u64()
                            .map(|v| v as u32)
                            .ok_or_else(|| malformed("bad ext digit"))
                    })
                    .collect::<Result<_>>()?;
                probe.fq_from_digits(&d)?
            }
            _ => return Err(malformed("ext coefficient must be int or digit vector")),
        };
    }
    build_field(p, r, Some(base), Some(ext))
}

pub fn elt_to_json(ctx: &FieldCtx, x: Elt) -> Value {
    json!(ctx.elt_coeffs(x))
}

pub fn elt_from_json(ctx: &FieldCtx, v: &Value) -> Result<Elt> {
    let arr = v.as_array().ok_or_else(|| malformed("element must be a coefficient array"))?;
    let coeffs: Vec<u32> = arr
        .iter()
        .map(|c| c.as_u64().map(|x| x as u32).ok_or_else(|| malformed("bad coefficient")))
        .collect::<Result<_>>()?;
    ctx.elt_from_coeffs(&coeffs)
}

pub fn linpoly_to_json(ctx: &FieldCtx, l: &LinPoly) -> Value {
    json!({
        "a1": elt_to_json(ctx, l.a1()),
        "a0": elt_to_json(ctx, l.a0()),
    })
}

pub fn linpoly_from_json(ctx: &FieldCtx, v: &Value) -> Result<LinPoly> {
    let obj = v.as_object().ok_or_else(|| malformed("linearized polynomial must be an object"))?;
    let a1 = elt_from_json(ctx, obj.get("a1").ok_or_else(|| malformed("missing a1"))?)?;
    let a0 = elt_from_json(ctx, obj.get("a0").ok_or_else(|| malformed("missing a0"))?)?;
    Ok(LinPoly::new(ctx, a1, a0))
}

pub fn spoly_to_json(ctx: &FieldCtx, g: &SPoly) -> Value {
    let mut coeffs = Map::new();
    for (&i, &c) in g.coeffs() {
        coeffs.insert(i.to_string(), elt_to_json(ctx, c));
    }
    json!({
        "delta": elt_to_json(ctx, g.delta()),
        "m": g.m(),
        "coeffs": Value::Object(coeffs),
    })
}

pub fn spoly_from_json(ctx: &FieldCtx, v: &Value) -> Result<SPoly> {
    let obj = v.as_object().ok_or_else(|| malformed("s-polynomial must be an object"))?;
    let delta = elt_from_json(ctx, obj.get("delta").ok_or_else(|| malformed("missing delta"))?)?;
    let m = get_u64(obj, "m")? as usize;
    let mut coeffs = Vec::new();
    if let Some(cmap) = obj.get("coeffs") {
        let cmap = cmap.as_object().ok_or_else(|| malformed("coeffs must be an object"))?;
        for (k, val) in cmap {
            let i: usize = k.parse().map_err(|_| malformed("bad exponent key"))?;
            coeffs.push((i, elt_from_json(ctx, val)?));
        }
    }
    SPoly::new(ctx, delta, m, coeffs)
}

pub fn ppform_to_json(ctx: &FieldCtx, pp: &PPForm) -> Value {
    json!({
        "field": field_spec_json(ctx),
        "g": spoly_to_json(ctx, &pp.g),
        "L": linpoly_to_json(ctx, &pp.lin),
        "family": pp.family.as_str(),
    })
}

/// Rebuilds the field named in the document and the form itself.
pub fn ppform_from_json(v: &Value) -> Result<(FieldCtx, PPForm)> {
    let obj = v.as_object().ok_or_else(|| malformed("form must be an object"))?;
    let ctx = field_from_json(obj.get("field").ok_or_else(|| malformed("missing field"))?)?;
    let g = spoly_from_json(&ctx, obj.get("g").ok_or_else(|| malformed("missing g"))?)?;
    let lin = linpoly_from_json(&ctx, obj.get("L").ok_or_else(|| malformed("missing L"))?)?;
    let family = Family::parse(
        obj.get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| malformed("missing family"))?,
    )?;
    let pp = PPForm {
        g,
        lin,
        family,
        certificate: "deserialized".into(),
    };
    Ok((ctx, pp))
}

fn sform_to_json(ctx: &FieldCtx, s: &SForm) -> Value {
    let mut coeffs = Map::new();
    for (&i, &c) in s.coeffs() {
        coeffs.insert(i.to_string(), elt_to_json(ctx, c));
    }
    json!({
        "delta": elt_to_json(ctx, s.delta()),
        "coeffs": Value::Object(coeffs),
    })
}

fn sform_from_json(ctx: &FieldCtx, g: &Value, l: &Value) -> Result<SForm> {
    let obj = g.as_object().ok_or_else(|| malformed("inverse g must be an object"))?;
    let delta = elt_from_json(ctx, obj.get("delta").ok_or_else(|| malformed("missing delta"))?)?;
    let mut coeffs = Vec::new();
    let cmap = obj
        .get("coeffs")
        .and_then(Value::as_object)
        .ok_or_else(|| malformed("missing coeffs"))?;
    for (k, val) in cmap {
        let i: usize = k.parse().map_err(|_| malformed("bad exponent key"))?;
        coeffs.push((i, elt_from_json(ctx, val)?));
    }
    let lin = linpoly_from_json(ctx, l)?;
    SForm::new(ctx, delta, coeffs, lin)
}

pub fn cert_to_json(ctx: &FieldCtx, cert: &InverseCert) -> Value {
    let mut out = Map::new();
    out.insert("field".into(), field_spec_json(ctx));
    out.insert("method".into(), json!(cert.method.as_str()));
    out.insert("verified".into(), json!(cert.verified));
    match &cert.form {
        InverseForm::Closed(s) => {
            out.insert("g".into(), sform_to_json(ctx, s));
            out.insert("L".into(), linpoly_to_json(ctx, &s.lin));
        }
        InverseForm::Table(t) => {
            let rows: Vec<Value> = t
                .iter()
                .enumerate()
                .map(|(x, y)| json!([elt_to_json(ctx, Elt(x as u32)), elt_to_json(ctx, *y)]))
                .collect();
            out.insert("table".into(), Value::Array(rows));
        }
    }
    Value::Object(out)
}

pub fn cert_from_json(v: &Value) -> Result<(FieldCtx, InverseCert)> {
    let obj = v.as_object().ok_or_else(|| malformed("certificate must be an object"))?;
    let ctx = field_from_json(obj.get("field").ok_or_else(|| malformed("missing field"))?)?;
    let method = match obj.get("method").and_then(Value::as_str) {
        Some("Rank2Aligned") => InverseMethod::Rank2Aligned,
        Some("Rank1Coprime") => InverseMethod::Rank1Coprime,
        Some("HalfIndex") => InverseMethod::HalfIndex,
        Some("TraceSPoly") => InverseMethod::TraceSPoly,
        Some("FromPermLift") => InverseMethod::FromPermLift,
        Some("Rank1SPoly") => InverseMethod::Rank1SPoly,
        Some("Generic") => InverseMethod::Generic,
        _ => return Err(malformed("missing or unknown method")),
    };
    let verified = obj.get("verified").and_then(Value::as_bool).unwrap_or(false);
    let form = if let Some(table) = obj.get("table") {
        let rows = table.as_array().ok_or_else(|| malformed("table must be an array"))?;
        let mut t = vec![Elt::ZERO; ctx.q2() as usize];
        if rows.len() != t.len() {
            return Err(malformed("table must list every element"));
        }
        for row in rows {
            let pair = row.as_array().filter(|a| a.len() == 2).ok_or_else(|| malformed("bad table row"))?;
            let x = elt_from_json(&ctx, &pair[0])?;
            let y = elt_from_json(&ctx, &pair[1])?;
            t[x.index() as usize] = y;
        }
        InverseForm::Table(t)
    } else {
        let g = obj.get("g").ok_or_else(|| malformed("missing g"))?;
        let l = obj.get("L").ok_or_else(|| malformed("missing L"))?;
        InverseForm::Closed(sform_from_json(&ctx, g, l)?)
    };
    Ok((ctx, InverseCert { form, method, verified }))
}

fn get_u64(obj: &Map<String, Value>, key: &str) -> Result<u64> {
    obj.get(key)
        .and_then(Value::as_u64)
        .ok_or_else(|| malformed(&format!("missing integer field {key}")))
}

fn malformed(msg: &str) -> Error {
    Error::Malformed(msg.to_string())
}
