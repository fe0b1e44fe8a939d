//! Ordered key/value reports rendered as text or JSON with identical fields.

use serde_json::{Map, Value};

#[derive(Debug, Clone)]
pub enum Field {
    Value(String),
    List(Vec<String>),
    Pairs(Vec<(String, String)>),
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    fields: Vec<(String, Field)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&mut self, key: &str, v: impl ToString) -> &mut Self {
        self.fields.push((key.into(), Field::Value(v.to_string())));
        self
    }

    pub fn list(&mut self, key: &str, items: Vec<String>) -> &mut Self {
        self.fields.push((key.into(), Field::List(items)));
        self
    }

    pub fn pairs(&mut self, key: &str, items: Vec<(String, String)>) -> &mut Self {
        self.fields.push((key.into(), Field::Pairs(items)));
        self
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        for (k, f) in &self.fields {
            match f {
                Field::Value(v) => out.push_str(&format!("{k} = {v}\n")),
                Field::List(items) if items.is_empty() => out.push_str(&format!("{k}: none\n")),
                Field::List(items) => {
                    out.push_str(&format!("{k}:\n"));
                    for i in items {
                        out.push_str(&format!("  {i}\n"));
                    }
                }
                Field::Pairs(items) if items.is_empty() => out.push_str(&format!("{k}: none\n")),
                Field::Pairs(items) => {
                    out.push_str(&format!("{k}:\n"));
                    for (a, b) in items {
                        out.push_str(&format!("  {a} = {b}\n"));
                    }
                }
            }
        }
        out
    }

    pub fn json(&self) -> String {
        let mut obj = Map::new();
        for (k, f) in &self.fields {
            let v = match f {
                Field::Value(v) => Value::String(v.clone()),
                Field::List(items) => Value::Array(items.iter().cloned().map(Value::String).collect()),
                Field::Pairs(items) => {
                    Value::Object(items.iter().map(|(a, b)| (a.clone(), Value::String(b.clone()))).collect())
                }
            };
            obj.insert(k.clone(), v);
        }
        let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("string-only JSON");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_and_json_carry_the_same_fields() {
        let mut r = Report::new();
        r.value("tau", "1/2").list("checks", vec!["a: passed".into()]).pairs("xi", vec![("t".into(), "1".into())]);
        assert_eq!(r.text(), "tau = 1/2\nchecks:\n  a: passed\nxi:\n  t = 1\n");
        let v: Value = serde_json::from_str(&r.json()).unwrap();
        assert_eq!(v["tau"], "1/2");
        assert_eq!(v["checks"][0], "a: passed");
        assert_eq!(v["xi"]["t"], "1");
        assert!(r.json().find("tau").unwrap() < r.json().find("checks").unwrap());
    }
}
