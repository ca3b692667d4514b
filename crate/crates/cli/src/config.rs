//! `--config file.json` expands into flags placed right after the
//! subcommand words, so flags given on the command line still win.

use std::ffi::OsString;

use serde_json::Value;

pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, String> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy().into_owned();
        if s == "--config" {
            path = Some(
                it.next()
                    .ok_or("--config needs a file")?
                    .to_string_lossy()
                    .into_owned(),
            );
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(&path).map_err(|e| format!("cannot read {path}: {e}"))?;
    let flags = flags_from_json(&text)?;
    // program name, then the leading subcommand words
    let split = 1 + rest
        .iter()
        .skip(1)
        .take_while(|a| !a.to_string_lossy().starts_with('-'))
        .count();
    let mut out: Vec<OsString> = rest[..split].to_vec();
    out.extend(flags.into_iter().map(OsString::from));
    out.extend(rest[split..].iter().cloned());
    Ok(out)
}

fn flags_from_json(text: &str) -> Result<Vec<String>, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("config is not JSON: {e}"))?;
    let Value::Object(map) = v else {
        return Err("config must be a JSON object".into());
    };
    let mut out = Vec::new();
    for (k, v) in map {
        let flag = format!("--{}", k.replace('_', "-"));
        match v {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => out.extend([flag, s]),
            Value::Number(n) => out.extend([flag, n.to_string()]),
            Value::Array(_) | Value::Object(_) => {
                return Err(format!("config value for {k} must be a scalar"))
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn flags_follow_subcommands() {
        let dir = std::env::temp_dir().join(format!("mpgreen-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let f = dir.join("c.json");
        std::fs::write(&f, r#"{"eps": 0.001, "case": "generic", "quiet": false}"#).unwrap();
        let got = expand(os(&[
            "mpgreen",
            "green",
            "sandwich",
            "--config",
            f.to_str().unwrap(),
            "--seed",
            "3",
        ]))
        .unwrap();
        assert_eq!(
            got,
            os(&[
                "mpgreen", "green", "sandwich", "--case", "generic", "--eps", "0.001", "--seed",
                "3"
            ])
        );
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn rejects_nested_values() {
        assert!(flags_from_json(r#"{"torus": [0.3]}"#).is_err());
        assert!(flags_from_json("[1]").is_err());
    }
}
