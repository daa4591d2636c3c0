/// Parses an inclusive `from:to:step` sweep. Values are rounded to 12
/// decimal places so `0.010:0.030:0.001` yields exactly `0.011`, `0.012`, ...
pub fn parse_range(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [from, to, step] = parts[..] else {
        return Err(format!("range {spec:?} is not from:to:step"));
    };
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| format!("bad number {s:?} in range {spec:?}"))
    };
    let (from, to, step) = (num(from)?, num(to)?, num(step)?);
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() {
        return Err(format!("range {spec:?} needs a positive step"));
    }
    if to < from {
        return Err(format!("range {spec:?} is empty"));
    }
    let count = ((to - from) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((from + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}
