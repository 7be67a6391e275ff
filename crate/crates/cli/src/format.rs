//! Number formatting shared by CSV rows and text reports.

use hahnbound_core::arith::SignedLog;

/// Significant digits in CSV and text output.
pub const SIG_DIGITS: usize = 12;

/// Magnitudes outside `[1e-300, 1e300]` are printed from their logarithm.
const LN_SMALL: f64 = -690.7755278982137; // ln(1e-300)
const LN_LARGE: f64 = 690.7755278982137;

fn trim_mantissa(m: &str) -> &str {
    if m.contains('.') {
        m.trim_end_matches('0').trim_end_matches('.')
    } else {
        m
    }
}

/// `%.12g`-style formatting: fixed notation for exponents in `[-5, 12)`,
/// scientific otherwise, trailing zeros removed.
pub fn fmt_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_mantissa(&format!("{v:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_mantissa(mantissa))
    }
}

/// Formats a log-space value; magnitudes beyond f64 range are rendered as
/// `m e x` with the mantissa taken from the base-10 logarithm.
pub fn fmt_log(v: SignedLog) -> String {
    if v.sign == 0 {
        return "0".to_string();
    }
    if v.ln_abs.is_nan() {
        return "nan".to_string();
    }
    if (LN_SMALL..=LN_LARGE).contains(&v.ln_abs) {
        return fmt_sig(v.to_f64());
    }
    if v.ln_abs.is_infinite() {
        return if v.ln_abs > 0.0 { "inf".to_string() } else { "0".to_string() };
    }
    let l10 = v.log10_abs();
    let mut exp = l10.floor();
    let mut text = format!("{:.*}", SIG_DIGITS - 1, 10f64.powf(l10 - exp));
    if text.starts_with("10") {
        exp += 1.0;
        text = format!("{:.*}", SIG_DIGITS - 1, 1.0);
    }
    let sign = if v.sign < 0 { "-" } else { "" };
    format!("{sign}{}e{}", trim_mantissa(&text), exp as i64)
}

/// `min(v, 1)` for a nonnegative log-space value.
pub fn clip_log(v: SignedLog) -> SignedLog {
    if v.sign > 0 && v.ln_abs >= 0.0 {
        SignedLog::ONE
    } else {
        v
    }
}
