use serde_json::{json, Map, Value};

pub struct Report {
    pub verb: &'static str,
    pub parameters: Value,
    pub results: Value,
    /// Dedicated CSV body; otherwise the results are flattened.
    pub csv: Option<String>,
    pub wall_clock_ms: Option<u128>,
}

impl Report {
    pub fn new(verb: &'static str, parameters: Value, results: Value) -> Self {
        Report { verb, parameters, results, csv: None, wall_clock_ms: None }
    }

    pub fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("verb".into(), self.verb.into());
        m.insert("parameters".into(), self.parameters.clone());
        m.insert("results".into(), self.results.clone());
        m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        if let Some(ms) = self.wall_clock_ms {
            m.insert("wall_clock_ms".into(), json!(ms));
        }
        Value::Object(m)
    }

    pub fn render(&self, csv: bool, truncate: bool) -> String {
        if csv {
            let body = self.csv.clone().unwrap_or_else(|| flatten_csv(&self.results));
            if truncate {
                body.lines().map(|l| l.split(',').map(shorten).collect::<Vec<_>>().join(",") + "\n").collect()
            } else {
                body
            }
        } else {
            let mut v = self.to_json();
            if truncate {
                truncate_json(&mut v);
            }
            serde_json::to_string_pretty(&v).expect("serializable") + "\n"
        }
    }
}

const DISPLAY_LIMIT: usize = 64;

fn looks_rational(s: &str) -> bool {
    let body = s.strip_prefix('-').unwrap_or(s);
    !body.is_empty() && body.bytes().all(|b| b.is_ascii_digit() || b == b'/')
}

fn shorten(s: &str) -> String {
    if s.len() <= DISPLAY_LIMIT || !looks_rational(s) {
        return s.to_string();
    }
    let head = &s[..24];
    let tail = &s[s.len() - 24..];
    format!("{head}...{tail} [{} chars, use --full]", s.len())
}

fn truncate_json(v: &mut Value) {
    match v {
        Value::String(s) => *s = shorten(s),
        Value::Array(a) => a.iter_mut().for_each(truncate_json),
        Value::Object(m) => m.values_mut().for_each(truncate_json),
        _ => {}
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `key,value` rows with dotted paths in document order.
pub fn flatten_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(m) => m.iter().for_each(|(k, x)| walk(&join(k), x, out)),
            Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| walk(&join(&i.to_string()), x, out)),
            Value::Null => {}
            Value::String(s) => out.push_str(&format!("{},{}\n", csv_field(prefix), csv_field(s))),
            other => out.push_str(&format!("{},{}\n", csv_field(prefix), other)),
        }
    }
    let mut out = String::from("key,value\n");
    walk("", v, &mut out);
    out
}
