//! Plain-text CSV emission shared by the library types and the CLI.

/// Scientific notation with 17 significant digits, enough to round-trip
/// any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Header line followed by one line per row, each terminated by `\n`.
pub fn csv<I>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = String::with_capacity(4096);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, std::f64::consts::PI] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn table_layout() {
        let text = csv("a,b", vec![vec!["1".into(), "2".into()]]);
        assert_eq!(text, "a,b\n1,2\n");
    }
}
