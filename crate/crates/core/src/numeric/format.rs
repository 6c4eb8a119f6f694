/// Formats `x` with 17 significant digits, like C's `%.17g` but without
/// stripping trailing zeros. Plain decimal notation is used for decimal
/// exponents in `[-5, 17)`, scientific notation otherwise.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}
