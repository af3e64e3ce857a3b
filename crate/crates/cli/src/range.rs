/// `a:b:n`, n uniform samples from a to b inclusive; a bare number is a single sample.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}` in range `{s}`"));
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| format!("bad sample count `{n}` in range `{s}`"))?;
            match n {
                0 => Err(format!("range `{s}` has no samples")),
                1 => Ok(vec![a]),
                _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
            }
        }
        _ => Err(format!("range `{s}` is not of the form a:b:n")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("2.5").unwrap(), vec![2.5]);
        assert_eq!(parse_range("1:2:1").unwrap(), vec![1.0]);
        assert!(parse_range("1:2").is_err());
        assert!(parse_range("1:2:0").is_err());
        assert!(parse_range("a:2:3").is_err());
    }
}
