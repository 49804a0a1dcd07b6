use std::io::Write;

use serde::Serialize;
use yangkit::{Report, C64};

use crate::{Ctx, Failure, Format};

/// Values this small print as zero.
const ZERO_CUTOFF: f64 = 1e-12;

/// Round to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x.abs() < ZERO_CUTOFF {
        return if x.is_finite() { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn sig12(x: f64) -> String {
    format!("{}", round12(x))
}

pub fn complex12(z: C64) -> String {
    let (re, im) = (round12(z.re), round12(z.im));
    match (re == 0.0, im == 0.0) {
        (_, true) => format!("{re}"),
        (true, false) => format!("{im}i"),
        (false, false) if im < 0.0 => format!("{re}-{}i", -im),
        _ => format!("{re}+{im}i"),
    }
}

/// Short scientific form for residuals.
pub fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

/// Resolve the output format, rejecting those a command does not offer.
pub fn format_for(ctx: &Ctx, default: Format, allowed: &[Format], command: &str) -> Result<Format, Failure> {
    let f = ctx.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::Usage(format!("`{command}` does not support --format {f:?}").to_lowercase()))
    }
}

pub fn json<T: Serialize>(report: &Report<T>) -> String {
    let mut s = report.to_pretty();
    s.push('\n');
    s
}

pub fn emit(ctx: &Ctx, text: &str) -> Result<(), Failure> {
    match &ctx.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Error(format!("{}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Error(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig12(7.868033988749895), "7.86803398875");
        assert_eq!(sig12(-2.0), "-2");
        assert_eq!(sig12(3e-17), "0");
        assert_eq!(complex12(C64::new(0.5, -0.25)), "0.5-0.25i");
        assert_eq!(complex12(C64::new(2.25, 1e-16)), "2.25");
    }
}
