//! SI scale constants and engineering-suffix number parsing.

pub const MM: f64 = 1e-3;
pub const UM: f64 = 1e-6;
pub const NH: f64 = 1e-9;
pub const FF: f64 = 1e-15;
pub const PS: f64 = 1e-12;
pub const NS: f64 = 1e-9;
pub const MOHM: f64 = 1e-3;

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability, H/m.
pub const MU0: f64 = 4e-7 * std::f64::consts::PI;

/// Parses a SPICE-style number with an optional scale suffix
/// (`f p n u m k meg g t`, case-insensitive). Trailing unit letters after the
/// suffix are ignored, as in `10pF` or `2.5kohm`.
pub fn parse_si(token: &str) -> Option<f64> {
    let t = token.trim();
    let split = t
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E') && is_exponent(t, i)))
        })
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let (num, rest) = t.split_at(split);
    let base: f64 = num.parse().ok()?;
    let rest = rest.to_lowercase();
    // trailing unit letters are ignored, anything else is a typo
    if !rest.chars().all(char::is_alphabetic) {
        return None;
    }
    let scale = if rest.starts_with("meg") {
        1e6
    } else if rest.starts_with("mil") {
        25.4e-6
    } else {
        match rest.chars().next() {
            None => 1.0,
            Some('f') => 1e-15,
            Some('p') => 1e-12,
            Some('n') => 1e-9,
            Some('u') | Some('µ') => 1e-6,
            Some('m') => 1e-3,
            Some('k') => 1e3,
            Some('g') => 1e9,
            Some('t') => 1e12,
            Some(c) if c.is_ascii_alphabetic() => 1.0,
            Some(_) => return None,
        }
    };
    Some(base * scale)
}

// `e` is an exponent marker only when followed by a digit or sign+digit.
fn is_exponent(t: &str, i: usize) -> bool {
    let b = t.as_bytes();
    if i == 0 {
        return false;
    }
    match b.get(i + 1) {
        Some(c) if c.is_ascii_digit() => true,
        Some(b'+') | Some(b'-') => b.get(i + 2).is_some_and(|c| c.is_ascii_digit()),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::parse_si;

    #[test]
    fn suffixes() {
        assert_eq!(parse_si("5.978n"), Some(5.978e-9));
        assert_eq!(parse_si("1141f"), Some(1141e-15));
        assert_eq!(parse_si("1p"), Some(1e-12));
        assert_eq!(parse_si("2MEG"), Some(2e6));
        assert_eq!(parse_si("3m"), Some(3e-3));
        assert_eq!(parse_si("1k"), Some(1e3));
        assert_eq!(parse_si("10pF"), Some(10e-12));
        assert_eq!(parse_si("7.04"), Some(7.04));
        assert_eq!(parse_si("1e-12"), Some(1e-12));
        assert_eq!(parse_si("-2.5E3"), Some(-2500.0));
        assert_eq!(parse_si("abc"), None);
        assert_eq!(parse_si(""), None);
    }
}
