//! Minimal CSV emission. Every file this crate writes is numeric or holds
//! fixed identifiers, so no quoting is needed. Floats use 17 significant
//! digits so they round-trip exactly; lines end in LF.

/// Scientific notation with 17 significant digits, e.g. `4.2899999999999998e-1`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub(crate) fn push_row<I, S>(out: &mut String, fields: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut first = true;
    for f in fields {
        if !first {
            out.push(',');
        }
        out.push_str(f.as_ref());
        first = false;
    }
    out.push('\n');
}
