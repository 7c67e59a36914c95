use thiserror::Error;

use super::{AddressPolicy, Request};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

fn number(tok: &str) -> Result<u64, String> {
    let parsed = match tok.strip_prefix("0x").or_else(|| tok.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => tok.parse(),
    };
    parsed.map_err(|_| format!("`{tok}` is not a number"))
}

fn byte(tok: &str) -> Result<u8, String> {
    let v = number(tok)?;
    u8::try_from(v).map_err(|_| format!("`{tok}` does not fit in a byte"))
}

/// Parses a transaction script, one request per line:
///
/// ```text
/// W  <addr> <byte>...          # write
/// R  <addr> <count>            # read
/// WR <addr> <count> <byte>...  # write, repeated start, read
/// ```
///
/// Numbers are decimal or `0x` hex; `#` starts a comment.
pub fn parse_script(text: &str, policy: &AddressPolicy) -> Result<Vec<Request>, ScriptError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ScriptError { line, message };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        let op = toks[0].to_ascii_uppercase();
        let address = toks
            .get(1)
            .ok_or_else(|| err("missing address".into()))
            .and_then(|t| byte(t).map_err(err))?;
        let bytes = |from: usize| -> Result<Vec<u8>, ScriptError> {
            toks[from.min(toks.len())..]
                .iter()
                .map(|t| byte(t).map_err(err))
                .collect()
        };
        let count = || -> Result<usize, ScriptError> {
            let t = toks.get(2).ok_or_else(|| err("missing byte count".into()))?;
            number(t).map(|n| n as usize).map_err(err)
        };
        let req = match op.as_str() {
            "W" => Request::Write {
                address,
                bytes: bytes(2)?,
            },
            "R" => {
                if toks.len() > 3 {
                    return Err(err("R takes an address and a count".into()));
                }
                Request::Read {
                    address,
                    count: count()?,
                }
            }
            "WR" => Request::WriteRead {
                address,
                count: count()?,
                bytes: bytes(3)?,
            },
            other => return Err(err(format!("unknown operation `{other}`; expected W, R or WR"))),
        };
        req.validate(policy).map_err(|e| err(e.to_string()))?;
        out.push(req);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        let text = "# header\nW 0x18 0x01 0x00 0x20\n\nr 24 2  # read two\nWR 0x1F 2 0x05\n";
        let got = parse_script(text, &AddressPolicy::default()).unwrap();
        assert_eq!(
            got,
            vec![
                Request::Write {
                    address: 0x18,
                    bytes: vec![1, 0, 0x20]
                },
                Request::Read {
                    address: 0x18,
                    count: 2
                },
                Request::WriteRead {
                    address: 0x1F,
                    bytes: vec![5],
                    count: 2
                },
            ]
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let p = AddressPolicy::default();
        let e = parse_script("W 0x18 1\nX 0x18\n", &p).unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_script("\n\nW 0x18 0x100\n", &p).unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_script("R 0x02 1\n", &p).unwrap_err();
        assert!(e.message.contains("reserved"));
        let e = parse_script("WR 0x18 1\n", &p).unwrap_err();
        assert!(e.message.contains("repeated start"));
    }
}
