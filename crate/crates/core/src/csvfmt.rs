//! Plain CSV emission: comma separated, one header row, `\n` line endings and
//! 17 significant digits per number, so files round-trip `f64` exactly.

use std::io::{self, Write};

/// `x` with 17 significant digits in scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_header<W: Write>(w: &mut W, columns: &[String]) -> io::Result<()> {
    writeln!(w, "{}", columns.join(","))
}

pub fn write_row<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
    writeln!(w, "{}", cells.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn rows_are_newline_terminated() {
        let mut buf = Vec::new();
        write_header(&mut buf, &["tau".into(), "x".into()]).unwrap();
        write_row(&mut buf, &[0.0, 1.0]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "tau,x\n0.0000000000000000e0,1.0000000000000000e0\n");
    }
}
