#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

pub struct Run {
    pub stdout: Vec<u8>,
    pub stderr: String,
    pub code: i32,
}

impl Run {
    pub fn text(&self) -> String {
        String::from_utf8(self.stdout.clone()).expect("utf-8 output")
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.stdout).expect("JSON output")
    }
}

pub fn gauss_eof(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_gauss-eof"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
        code: out.status.code().unwrap_or(-1),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub l: f64,
    pub setting: String,
    pub tau: f64,
    pub r: f64,
    pub e_g: f64,
    pub e_n: f64,
}

pub fn parse_csv(text: &str) -> Vec<Row> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("l_over_lA,setting,tau,r,e_g_ebits,log_negativity"));
    lines
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            assert_eq!(f.len(), 6, "{line}");
            let num = |s: &str| s.parse::<f64>().expect("number");
            Row {
                l: num(f[0]),
                setting: f[1].to_string(),
                tau: num(f[2]),
                r: num(f[3]),
                e_g: num(f[4]),
                e_n: num(f[5]),
            }
        })
        .collect()
}

/// Splits interleaved `both` output into (symmetric, asymmetric) columns.
pub fn split_settings(rows: &[Row]) -> (Vec<Row>, Vec<Row>) {
    let sym = rows.iter().filter(|r| r.setting == "sym").cloned().collect();
    let asym = rows.iter().filter(|r| r.setting == "asym").cloned().collect();
    (sym, asym)
}

pub fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).expect("write input");
    path.to_str().expect("utf-8 path").to_string()
}
