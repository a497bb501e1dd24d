//! SPICE-subset netlist parser.
//!
//! ```text
//! R<id> n+ n- value
//! C<id> n+ n- value [ic=v]
//! L<id> n+ n- value [ic=i]
//! V<id> n+ n- DC value | V<id> n+ n- SIN(offset ampl freq [phase_deg])
//! I<id> n+ n- DC value | I<id> n+ n- SIN(offset ampl freq [phase_deg])
//! T<id> p+ p- s+ s- ratio
//! D<id> n+ n- IS=val N=val [T=val]
//! .tran t_step t_stop
//! .ac lin npts f_start f_stop
//! .probe node...
//! .end
//! ```
//!
//! Cards are case-insensitive, `*` starts a comment line and values accept
//! the suffixes f p n u m k meg g.

use super::{Analysis, DiodeParams, ElementKind, Netlist, Waveform};
use crate::error::{Error, Result};

/// Parses a number with an optional engineering suffix.
pub fn parse_value(token: &str) -> std::result::Result<f64, String> {
    let t = token.to_lowercase();
    let (digits, exponent) = if let Some(d) = t.strip_suffix("meg") {
        (d, 6)
    } else {
        match t.chars().last() {
            Some('f') => (&t[..t.len() - 1], -15),
            Some('p') => (&t[..t.len() - 1], -12),
            Some('n') => (&t[..t.len() - 1], -9),
            Some('u') => (&t[..t.len() - 1], -6),
            Some('m') => (&t[..t.len() - 1], -3),
            Some('k') => (&t[..t.len() - 1], 3),
            Some('g') => (&t[..t.len() - 1], 9),
            _ => (t.as_str(), 0),
        }
    };
    let starts_numeric = digits
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_digit() || matches!(c, '.' | '+' | '-'));
    let bad = || format!("bad value or suffix '{token}'");
    let mantissa = digits.parse::<f64>().map_err(|_| bad())?;
    if !starts_numeric || !mantissa.is_finite() {
        return Err(bad());
    }
    // Shifting the decimal exponent in text keeps "2.2u" equal to 2.2e-6.
    let value = if exponent == 0 {
        mantissa
    } else if digits.contains('e') {
        mantissa * 10f64.powi(exponent)
    } else {
        format!("{digits}e{exponent}")
            .parse::<f64>()
            .map_err(|_| bad())?
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(bad())
    }
}

fn tokenize(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in line.chars() {
        match c {
            '(' | ')' | '=' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() || c == ',' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

struct Line<'a> {
    number: usize,
    tokens: &'a [String],
}

impl Line<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.number,
            message: message.into(),
        }
    }

    fn value(&self, idx: usize, what: &str) -> Result<f64> {
        let tok = self
            .tokens
            .get(idx)
            .ok_or_else(|| self.err(format!("missing {what}")))?;
        parse_value(tok).map_err(|m| self.err(format!("{what}: {m}")))
    }

    fn expect_len(&self, range: std::ops::RangeInclusive<usize>) -> Result<()> {
        if range.contains(&self.tokens.len()) {
            Ok(())
        } else {
            Err(self.err(format!(
                "'{}' expects {} to {} fields, got {}",
                self.tokens[0],
                range.start(),
                range.end(),
                self.tokens.len()
            )))
        }
    }

    /// `key = value` pairs starting at `from`.
    fn key_values(&self, from: usize) -> Result<Vec<(String, f64)>> {
        let rest = &self.tokens[from.min(self.tokens.len())..];
        if !rest.len().is_multiple_of(3) {
            return Err(self.err("expected key=value parameters"));
        }
        rest.chunks(3)
            .map(|kv| {
                if kv[1] != "=" {
                    return Err(self.err(format!("expected '=' after '{}'", kv[0])));
                }
                let v = parse_value(&kv[2]).map_err(|m| self.err(format!("{}: {m}", kv[0])))?;
                Ok((kv[0].to_lowercase(), v))
            })
            .collect()
    }
}

fn storage_element(line: &Line, is_cap: bool) -> Result<ElementKind> {
    line.expect_len(4..=7)?;
    let value = line.value(3, "value")?;
    let mut ic = None;
    for (k, v) in line.key_values(4)? {
        match k.as_str() {
            "ic" => ic = Some(v),
            other => return Err(line.err(format!("unknown parameter '{other}'"))),
        }
    }
    Ok(if is_cap {
        ElementKind::Capacitor {
            capacitance: value,
            ic,
        }
    } else {
        ElementKind::Inductor {
            inductance: value,
            ic,
        }
    })
}

fn waveform(line: &Line) -> Result<Waveform> {
    let t = line.tokens;
    let Some(kw) = t.get(3) else {
        return Err(line.err("missing source value"));
    };
    match kw.to_lowercase().as_str() {
        "dc" => {
            line.expect_len(5..=5)?;
            Ok(Waveform::Dc(line.value(4, "DC value")?))
        }
        "sin" => {
            if t.get(4).map(String::as_str) != Some("(")
                || t.last().map(String::as_str) != Some(")")
            {
                return Err(line.err("SIN needs parenthesised arguments"));
            }
            let args = &t[5..t.len() - 1];
            if !(3..=4).contains(&args.len()) {
                return Err(line.err("SIN expects (offset ampl freq [phase_deg])"));
            }
            let phase_deg = if args.len() == 4 {
                line.value(8, "phase")?
            } else {
                0.0
            };
            Ok(Waveform::Sin {
                offset: line.value(5, "offset")?,
                amplitude: line.value(6, "amplitude")?,
                frequency: line.value(7, "frequency")?,
                phase_deg,
            })
        }
        _ => {
            line.expect_len(4..=4)?;
            Ok(Waveform::Dc(line.value(3, "value")?))
        }
    }
}

fn diode(line: &Line) -> Result<ElementKind> {
    let mut is = None;
    let mut n = None;
    let mut temp = None;
    for (k, v) in line.key_values(3)? {
        match k.as_str() {
            "is" => is = Some(v),
            "n" => n = Some(v),
            "t" => temp = Some(v),
            other => return Err(line.err(format!("unknown diode parameter '{other}'"))),
        }
    }
    let mut p = DiodeParams::new(
        is.ok_or_else(|| line.err("diode needs IS="))?,
        n.ok_or_else(|| line.err("diode needs N="))?,
    );
    if let Some(t) = temp {
        p.temperature = t;
    }
    Ok(ElementKind::Diode(p))
}

fn dot_card(line: &Line) -> Result<Option<Analysis>> {
    let t = line.tokens;
    match t[0].to_lowercase().as_str() {
        ".tran" => {
            line.expect_len(3..=3)?;
            let step = line.value(1, "t_step")?;
            let stop = line.value(2, "t_stop")?;
            if !(step > 0.0 && stop > step) {
                return Err(line.err("need 0 < t_step < t_stop"));
            }
            Ok(Some(Analysis::Tran { step, stop }))
        }
        ".ac" => {
            line.expect_len(5..=5)?;
            if !t[1].eq_ignore_ascii_case("lin") {
                return Err(line.err(format!("unsupported sweep type '{}'", t[1])));
            }
            let points = t[2]
                .parse::<usize>()
                .map_err(|_| line.err(format!("bad point count '{}'", t[2])))?;
            let f_start = line.value(3, "f_start")?;
            let f_stop = line.value(4, "f_stop")?;
            if points < 2 || !(f_start > 0.0 && f_stop > f_start) {
                return Err(line.err("need npts >= 2 and 0 < f_start < f_stop"));
            }
            Ok(Some(Analysis::Ac {
                points,
                f_start,
                f_stop,
            }))
        }
        ".probe" => {
            if t.len() < 2 {
                return Err(line.err(".probe needs at least one node"));
            }
            Ok(Some(Analysis::Probe(
                t[1..].iter().map(|n| super::canonical_node(n)).collect(),
            )))
        }
        other => Err(line.err(format!("unknown card '{other}'"))),
    }
}

pub fn parse_netlist(text: &str) -> Result<Netlist> {
    let mut netlist = Netlist::new();
    for (idx, raw) in text.lines().enumerate() {
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let tokens = tokenize(trimmed);
        let line = Line {
            number: idx + 1,
            tokens: &tokens,
        };
        let card = tokens[0].to_lowercase();
        if card == ".end" {
            break;
        }
        if card.starts_with('.') {
            if let Some(a) = dot_card(&line)? {
                netlist.add_analysis(a);
            }
            continue;
        }

        let kind = match card.chars().next() {
            Some('r') => {
                line.expect_len(4..=4)?;
                ElementKind::Resistor {
                    resistance: line.value(3, "resistance")?,
                }
            }
            Some('c') => storage_element(&line, true)?,
            Some('l') => storage_element(&line, false)?,
            Some('v') => ElementKind::VoltageSource(waveform(&line)?),
            Some('i') => ElementKind::CurrentSource(waveform(&line)?),
            Some('t') => {
                line.expect_len(6..=6)?;
                ElementKind::Transformer {
                    ratio: line.value(5, "ratio")?,
                }
            }
            Some('d') => diode(&line)?,
            _ => return Err(line.err(format!("unknown card '{}'", tokens[0]))),
        };
        let terminals = if matches!(kind, ElementKind::Transformer { .. }) {
            4
        } else {
            2
        };
        if tokens.len() < 1 + terminals {
            return Err(line.err("missing terminal nodes"));
        }
        let nodes: Vec<&str> = tokens[1..=terminals].iter().map(String::as_str).collect();
        if let Some(bad) = nodes.iter().find(|n| matches!(**n, "(" | ")" | "=")) {
            return Err(line.err(format!("bad node name '{bad}'")));
        }
        netlist.add(&card, &nodes, kind).map_err(|e| match e {
            Error::InvalidParams(m) => line.err(m),
            Error::DuplicateElement(n) => line.err(format!("duplicate element name '{n}'")),
            other => other,
        })?;
    }
    Ok(netlist)
}
