use std::fmt;

use thiserror::Error;

use crate::syntax::Sort;

/// A runtime value. Strings and dates are opaque; dates are represented by
/// their string form throughout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Date(String),
}

impl Value {
    pub fn sort(&self) -> Sort {
        match self {
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
            Value::Str(_) => Sort::Str,
            Value::Date(_) => Sort::Date,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) | Value::Date(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("cannot decode `{payload}` as {sort}")]
    Value { payload: String, sort: Sort },
}

/// Values travel the channels in serialised form; one sort per channel
/// instance, so the receiver always knows what to decode.
pub fn serialize_value(v: &Value) -> String {
    v.to_string()
}

/// Casts a serialised payload back to its sort.
pub fn deserialize_value(payload: &str, sort: Sort) -> Result<Value, DecodeError> {
    match sort {
        Sort::Int => payload
            .parse::<i64>()
            .map(Value::Int)
            .map_err(|_| DecodeError::Value { payload: payload.to_string(), sort }),
        Sort::Bool => match payload {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(DecodeError::Value { payload: payload.to_string(), sort }),
        },
        Sort::Str => Ok(Value::Str(payload.to_string())),
        Sort::Date => Ok(Value::Date(payload.to_string())),
    }
}

/// Labels travel as the branch-group identifier glued to the label, the
/// dispatch key a branching endpoint matches on.
pub fn serialize_label(branch_id: &str, label: &str) -> String {
    format!("{branch_id}{label}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_per_sort() {
        assert_eq!(serialize_value(&Value::Int(42)), "42");
        assert_eq!(deserialize_value("42", Sort::Int).unwrap(), Value::Int(42));
        assert_eq!(serialize_value(&Value::Bool(true)), "true");
        assert_eq!(deserialize_value("true", Sort::Bool).unwrap(), Value::Bool(true));
        assert_eq!(
            deserialize_value("2026-09-01", Sort::Date).unwrap(),
            Value::Date("2026-09-01".into())
        );
    }

    #[test]
    fn labels_are_prefixed_by_their_group() {
        assert_eq!(serialize_label("id", "ok"), "idok");
        assert_eq!(serialize_label("id", "quit"), "idquit");
    }

    #[test]
    fn malformed_payloads_are_rejected() {
        let err = deserialize_value("abc", Sort::Int).unwrap_err();
        assert!(matches!(err, DecodeError::Value { .. }));
    }
}
