//! Lexical and facet checks for simple-typed values.

use std::sync::OnceLock;

use regex::Regex;

use crate::model::*;

fn decimal_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[+-]?(\d+(\.\d*)?|\.\d+)$").unwrap())
}

fn double_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^([+-]?(\d+(\.\d*)?|\.\d+)([Ee][+-]?\d+)?|[+-]?INF|NaN)$").unwrap()
    })
}

fn integer_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[+-]?\d+$").unwrap())
}

fn date_time_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^-?\d{4,}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})?$").unwrap()
    })
}

fn date_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^-?\d{4,}-\d{2}-\d{2}(Z|[+-]\d{2}:\d{2})?$").unwrap())
}

fn name_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[_:A-Za-z][-._:A-Za-z0-9]*$").unwrap())
}

fn collapse(value: &str) -> String {
    value.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn parse_double(lexical: &str) -> f64 {
    match lexical {
        "INF" | "+INF" => f64::INFINITY,
        "-INF" => f64::NEG_INFINITY,
        "NaN" => f64::NAN,
        other => other.parse().unwrap_or(f64::NAN),
    }
}

/// Checks `value` against a built-in type. Returns the normalized value and,
/// for numeric types, its numeric value.
pub(crate) fn check_builtin(b: Builtin, raw: &str) -> Result<(String, Option<f64>), String> {
    use Builtin::*;
    let value = match b {
        String | AnySimpleType => raw.to_owned(),
        NormalizedString => raw.replace(['\t', '\n', '\r'], " "),
        _ => collapse(raw),
    };
    let bad = || Err(format!("'{raw}' is not a valid xs:{}", builtin_name(b)));
    let number = match b {
        Double | Float => {
            if !double_re().is_match(&value) {
                return bad();
            }
            Some(parse_double(&value))
        }
        Decimal => {
            if !decimal_re().is_match(&value) {
                return bad();
            }
            Some(value.parse::<f64>().unwrap_or(f64::NAN))
        }
        Integer | Long | Int | Short | Byte | NonNegativeInteger | PositiveInteger
        | NonPositiveInteger | NegativeInteger | UnsignedLong | UnsignedInt | UnsignedShort
        | UnsignedByte => {
            if !integer_re().is_match(&value) {
                return bad();
            }
            let n: i128 = match value.trim_start_matches('+').parse() {
                Ok(n) => n,
                // Arbitrary precision integers: only the sign matters below.
                Err(_) if matches!(b, Integer) => 0,
                Err(_) => return bad(),
            };
            let (lo, hi): (i128, i128) = match b {
                Long => (i64::MIN as i128, i64::MAX as i128),
                Int => (i32::MIN as i128, i32::MAX as i128),
                Short => (i16::MIN as i128, i16::MAX as i128),
                Byte => (i8::MIN as i128, i8::MAX as i128),
                NonNegativeInteger => (0, i128::MAX),
                PositiveInteger => (1, i128::MAX),
                NonPositiveInteger => (i128::MIN, 0),
                NegativeInteger => (i128::MIN, -1),
                UnsignedLong => (0, u64::MAX as i128),
                UnsignedInt => (0, u32::MAX as i128),
                UnsignedShort => (0, u16::MAX as i128),
                UnsignedByte => (0, u8::MAX as i128),
                _ => (i128::MIN, i128::MAX),
            };
            if n < lo || n > hi {
                return bad();
            }
            Some(n as f64)
        }
        Boolean => {
            if !matches!(value.as_str(), "true" | "false" | "1" | "0") {
                return bad();
            }
            None
        }
        DateTime => {
            if !date_time_re().is_match(&value) {
                return bad();
            }
            None
        }
        Date => {
            if !date_re().is_match(&value) {
                return bad();
            }
            None
        }
        Name | NcName | Id | IdRef => {
            if !name_re().is_match(&value) || (b != Name && value.contains(':')) {
                return bad();
            }
            None
        }
        NmToken => {
            if value.is_empty() || value.contains(char::is_whitespace) {
                return bad();
            }
            None
        }
        _ => None,
    };
    Ok((value, number))
}

fn builtin_name(b: Builtin) -> &'static str {
    use Builtin::*;
    match b {
        AnySimpleType => "anySimpleType",
        String => "string",
        NormalizedString => "normalizedString",
        Token => "token",
        Boolean => "boolean",
        Decimal => "decimal",
        Double => "double",
        Float => "float",
        Integer => "integer",
        Long => "long",
        Int => "int",
        Short => "short",
        Byte => "byte",
        NonNegativeInteger => "nonNegativeInteger",
        PositiveInteger => "positiveInteger",
        NonPositiveInteger => "nonPositiveInteger",
        NegativeInteger => "negativeInteger",
        UnsignedLong => "unsignedLong",
        UnsignedInt => "unsignedInt",
        UnsignedShort => "unsignedShort",
        UnsignedByte => "unsignedByte",
        Date => "date",
        DateTime => "dateTime",
        AnyUri => "anyURI",
        Id => "ID",
        IdRef => "IDREF",
        NmToken => "NMTOKEN",
        Name => "Name",
        NcName => "NCName",
    }
}

/// Outcome of a successful simple-type check.
pub(crate) struct Checked {
    pub value: String,
    pub number: Option<f64>,
}

pub(crate) fn check(schema: &Schema, ty: &SimpleTypeRef, raw: &str) -> Result<Checked, String> {
    check_depth(schema, ty, raw, 0)
}

pub(crate) fn check_def(schema: &Schema, st: &SimpleType, raw: &str) -> Result<Checked, String> {
    check_simple(schema, st, raw, 0)
}

fn check_depth(
    schema: &Schema,
    ty: &SimpleTypeRef,
    raw: &str,
    depth: usize,
) -> Result<Checked, String> {
    if depth > 64 {
        return Err("simple type derivation too deep".into());
    }
    match ty {
        SimpleTypeRef::Builtin(b) => {
            let (value, number) = check_builtin(*b, raw)?;
            Ok(Checked { value, number })
        }
        SimpleTypeRef::Named(name) => match schema.types.get(name) {
            Some(TypeDef::Simple(st)) => check_simple(schema, st, raw, depth + 1),
            Some(TypeDef::Complex(_)) => Err(format!("type '{name}' is not a simple type")),
            None => Err(format!("unknown simple type '{name}'")),
        },
        SimpleTypeRef::Inline(st) => check_simple(schema, st, raw, depth + 1),
    }
}

fn check_simple(
    schema: &Schema,
    st: &SimpleType,
    raw: &str,
    depth: usize,
) -> Result<Checked, String> {
    match st {
        SimpleType::Restriction { base, facets } => {
            let checked = check_depth(schema, base, raw, depth)?;
            apply_facets(facets, &checked, raw)?;
            Ok(checked)
        }
        SimpleType::Union(members) => {
            let mut errors = Vec::new();
            for m in members {
                match check_depth(schema, m, raw, depth) {
                    Ok(c) => return Ok(c),
                    Err(e) => errors.push(e),
                }
            }
            Err(format!(
                "'{raw}' matches no member of the union ({})",
                errors.join("; ")
            ))
        }
        SimpleType::List(item) => {
            for token in raw.split_whitespace() {
                check_depth(schema, item, token, depth)?;
            }
            Ok(Checked {
                value: collapse(raw),
                number: None,
            })
        }
    }
}

fn apply_facets(f: &Facets, c: &Checked, raw: &str) -> Result<(), String> {
    if !f.enumeration.is_empty() {
        let hit = f.enumeration.iter().any(|e| match c.number {
            Some(n) => e.trim().parse::<f64>().map(|v| v == n).unwrap_or(false),
            None => *e == c.value,
        });
        if !hit {
            return Err(format!(
                "'{raw}' is not one of the allowed values [{}]",
                f.enumeration.join(", ")
            ));
        }
    }
    if !f.patterns.is_empty() && !f.patterns.iter().any(|p| p.is_match(&c.value)) {
        return Err(format!("'{raw}' does not match the required pattern"));
    }
    if let Some(n) = c.number {
        let bounds = [
            (f.min_inclusive, n >= f.min_inclusive.unwrap_or(0.0), ">="),
            (f.max_inclusive, n <= f.max_inclusive.unwrap_or(0.0), "<="),
            (f.min_exclusive, n > f.min_exclusive.unwrap_or(0.0), ">"),
            (f.max_exclusive, n < f.max_exclusive.unwrap_or(0.0), "<"),
        ];
        for (bound, ok, op) in bounds {
            if let Some(b) = bound {
                if !ok {
                    return Err(format!("'{raw}' violates the bound {op} {b}"));
                }
            }
        }
    }
    let len = c.value.chars().count();
    if f.length.is_some_and(|l| len != l)
        || f.min_length.is_some_and(|l| len < l)
        || f.max_length.is_some_and(|l| len > l)
    {
        return Err(format!("'{raw}' has an invalid length"));
    }
    Ok(())
}

/// Value equality used for `fixed` constraints.
pub(crate) fn same_value(a: &Checked, fixed: &str) -> bool {
    match a.number {
        Some(n) => fixed.trim().parse::<f64>().map(|v| v == n).unwrap_or(false),
        None => a.value == fixed,
    }
}
