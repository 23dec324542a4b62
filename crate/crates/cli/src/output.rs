use serde_json::{Map, Value};

use dirpki_core::encoding::to_canonical_string;

use crate::failure::Failure;

/// Result lines: `key=value` pairs, or one canonical JSON object per line.
#[derive(Debug, Clone, Copy)]
pub struct Output {
    pub json: bool,
}

impl Output {
    pub fn fields(&self, fields: &[(&str, Value)]) {
        if self.json {
            let map: Map<String, Value> = fields
                .iter()
                .map(|(k, v)| (k.to_string(), v.clone()))
                .collect();
            println!("{}", to_canonical_string(&Value::Object(map)));
        } else {
            let parts: Vec<String> = fields
                .iter()
                .map(|(k, v)| match v {
                    Value::String(s) => format!("{k}={s}"),
                    other => format!("{k}={other}"),
                })
                .collect();
            println!("{}", parts.join(" "));
        }
    }

    /// A `TOKEN subject` line such as `DELETED cn=x,...`.
    pub fn action(&self, token: &str, dn: &str) {
        if self.json {
            self.fields(&[("action", token.into()), ("dn", dn.into())]);
        } else {
            println!("{token} {dn}");
        }
    }

    pub fn failure(&self, failure: &Failure) {
        if self.json {
            self.fields(&[
                ("error", failure.token.into()),
                ("message", failure.message.clone().into()),
            ]);
        } else {
            eprintln!("error: {failure}");
        }
    }
}
