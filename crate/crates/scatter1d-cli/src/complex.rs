//! Strict parsing of complex numbers given as `re,im` or `mag@deg`.

use scatter1d::C64;

pub fn parse_complex(s: &str) -> Result<C64, String> {
    let s = s.trim();
    let num = |t: &str, what: &str| -> Result<f64, String> {
        let v: f64 = t.trim().parse().map_err(|_| format!("invalid {what} '{t}' in '{s}'"))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("{what} must be finite in '{s}'"))
        }
    };
    if let Some((mag, deg)) = s.split_once('@') {
        let mag = num(mag, "magnitude")?;
        if mag < 0.0 {
            return Err(format!("magnitude must be non-negative in '{s}'"));
        }
        let deg = num(deg, "phase")?;
        return Ok(C64::from_polar(mag, deg.to_radians()));
    }
    match s.split_once(',') {
        Some((re, im)) => Ok(C64::new(num(re, "real part")?, num(im, "imaginary part")?)),
        None => Err(format!("expected 're,im' or 'mag@deg', got '{s}'")),
    }
}
