//! Parsing of exact rationals from command-line text.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

/// Accepts `a/b`, plain integers and decimal literals, all parsed exactly.
pub fn parse_rational(text: &str) -> Result<BigRational, String> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {text:?}"))?;
        let den: BigInt = den
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {text:?}"))?;
        if den == BigInt::from(0) {
            return Err(format!("zero denominator in {text:?}"));
        }
        return Ok(BigRational::new(num, den));
    }
    let (sign, digits) = match text.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("empty number {text:?}"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(format!("cannot parse {text:?} as a rational"));
    }
    let mut numer: BigInt = if int_part.is_empty() {
        BigInt::from(0)
    } else {
        int_part.parse().expect("digits only")
    };
    let mut denom = BigInt::one();
    for c in frac_part.chars() {
        numer = numer * 10 + (c as u8 - b'0');
        denom *= 10;
    }
    Ok(BigRational::new(numer * BigInt::from(sign), denom))
}

/// Grid specification: either a comma list of rationals or `lo:hi:count`
/// for an inclusive, exactly spaced grid.
pub fn parse_grid(text: &str) -> Result<Vec<BigRational>, String> {
    if text.contains(',') {
        return text.split(',').map(parse_rational).collect();
    }
    if let Some((lo, rest)) = text.split_once(':') {
        let (hi, count) = rest
            .split_once(':')
            .ok_or_else(|| format!("grid {text:?} needs lo:hi:count"))?;
        let lo = parse_rational(lo)?;
        let hi = parse_rational(hi)?;
        let count: usize = count
            .parse()
            .map_err(|_| format!("bad grid count in {text:?}"))?;
        if count < 2 {
            return Err("grid needs at least 2 points".into());
        }
        if lo >= hi {
            return Err(format!("grid range {lo} .. {hi} is not increasing"));
        }
        let step = (&hi - &lo) / BigRational::from_integer(BigInt::from(count - 1));
        return Ok((0..count)
            .map(|t| &lo + &step * BigRational::from_integer(BigInt::from(t)))
            .collect());
    }
    Ok(vec![parse_rational(text)?])
}

pub fn rational_text(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/2").unwrap(), parse_rational("0.5").unwrap());
        assert_eq!(parse_rational("1").unwrap(), BigRational::one());
        assert_eq!(parse_rational("0.25").unwrap(), parse_rational("25/100").unwrap());
        assert_eq!(parse_rational("-3/4").unwrap(), parse_rational("-0.75").unwrap());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn parses_grids() {
        let grid = parse_grid("0:1:5").unwrap();
        assert_eq!(grid.len(), 5);
        assert_eq!(grid[1], parse_rational("1/4").unwrap());
        let listed = parse_grid("0.1,0.2,0.9").unwrap();
        assert_eq!(listed.len(), 3);
        assert!(parse_grid("1:0:5").is_err());
    }
}
