//! Output plumbing: significant-digit float formatting shared by every
//! command, and the stdout-or-file writer.

use std::fs;
use std::io::Write;
use std::path::Path;

/// Formats `x` with `sig` significant digits, fixed or scientific
/// notation depending on magnitude (the usual %g behavior), trailing
/// zeros stripped. Guarantees byte-stable output for golden files.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // round first in scientific form, then pick the notation from the
    // rounded exponent so carries (9.9996 -> 10.0) land correctly
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp_str) = sci.split_once('e').expect("e-notation");
    let exp: i32 = exp_str.parse().expect("exponent");
    if exp >= -4 && exp < sig as i32 {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

/// Rounds `x` to `sig` significant digits (the value `fmt_sig` prints).
pub fn round_sig(x: f64, sig: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    fmt_sig(x, sig).parse().expect("fmt_sig output is a float")
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes `content` to `path` when given, else to stdout.
pub fn write_output(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, content),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(content.as_bytes())
        }
    }
}
