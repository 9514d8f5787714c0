//! Deterministic text output: floats at 9 significant digits, hand-built
//! JSON with fixed key order.

use colorcenter::FitResult;

/// Format with 9 significant digits, printf `%.9g` style: fixed notation in
/// the mid range with trailing zeros trimmed, scientific otherwise.
pub fn fmt_g(x: f64) -> String {
    const SIG: usize = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let exponent = x.abs().log10().floor() as i32;
    if exponent < -4 || exponent >= SIG as i32 {
        let s = format!("{:.*e}", SIG - 1, x);
        // trim trailing zeros in the mantissa: 1.20000000e3 -> 1.2e3
        if let Some(epos) = s.find('e') {
            let (mantissa, exp) = s.split_at(epos);
            let trimmed = mantissa.trim_end_matches('0').trim_end_matches('.');
            return format!("{trimmed}{exp}");
        }
        s
    } else {
        let decimals = (SIG as i32 - 1 - exponent).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    }
}

/// JSON string for a float; JSON has no inf/nan literals, so those become
/// null.
pub fn json_num(x: f64) -> String {
    if x.is_finite() {
        fmt_g(x)
    } else {
        "null".into()
    }
}

pub fn json_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Render a fit report as JSON with a fixed field order.
pub fn fit_report_json(
    kind: &str,
    fit: &FitResult,
    derived: &[(String, f64)],
    notes: &[(String, String)],
) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"fit_kind\": {},\n", json_str(kind)));
    out.push_str(&format!("  \"converged\": {},\n", fit.converged));
    out.push_str(&format!("  \"degenerate\": {},\n", fit.degenerate));
    out.push_str(&format!("  \"iterations\": {},\n", fit.iterations));
    out.push_str(&format!("  \"r_squared\": {},\n", json_num(fit.r_squared)));
    out.push_str(&format!(
        "  \"residual_norm\": {},\n",
        json_num(fit.residual_norm)
    ));
    out.push_str("  \"parameters\": [\n");
    for (i, p) in fit.params.iter().enumerate() {
        out.push_str(&format!(
            "    {{\"name\": {}, \"value\": {}, \"std_error\": {}}}{}\n",
            json_str(&p.name),
            json_num(p.value),
            json_num(p.std_error),
            if i + 1 < fit.params.len() { "," } else { "" }
        ));
    }
    out.push_str("  ]");
    if !derived.is_empty() {
        out.push_str(",\n  \"derived\": {\n");
        for (i, (name, value)) in derived.iter().enumerate() {
            out.push_str(&format!(
                "    {}: {}{}\n",
                json_str(name),
                json_num(*value),
                if i + 1 < derived.len() { "," } else { "" }
            ));
        }
        out.push_str("  }");
    }
    if !notes.is_empty() {
        out.push_str(",\n  \"inputs\": {\n");
        for (i, (name, value)) in notes.iter().enumerate() {
            out.push_str(&format!(
                "    {}: {}{}\n",
                json_str(name),
                value,
                if i + 1 < notes.len() { "," } else { "" }
            ));
        }
        out.push_str("  }");
    }
    out.push_str("\n}\n");
    out
}
