use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{document_tokens, ExplainError, Explanation, Method};
use crate::corpus::Document;

const POSITIVE: (u8, u8, u8) = (220, 38, 38);
const NEGATIVE: (u8, u8, u8) = (37, 99, 235);

const STYLE: &str = "body{font-family:Georgia,serif;max-width:52em;margin:2em auto;line-height:1.7;color:#222}
header{border-bottom:1px solid #ccc;margin-bottom:1em}
header dl{display:grid;grid-template-columns:max-content 1fr;gap:.1em 1em;font-family:monospace;font-size:.9em}
.tok{padding:0 .1em;border-radius:2px}
.bars{font-family:monospace;font-size:.9em}
.bar-row{display:grid;grid-template-columns:12em 1fr 6em;align-items:center;gap:.5em}
.bar{height:.9em}
.warn{color:#a15c00}";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn rgba(weight: f64, alpha: f64) -> String {
    let (r, g, b) = if weight < 0.0 { NEGATIVE } else { POSITIVE };
    format!("rgba({r},{g},{b},{alpha:.3})")
}

/// Weight shown on each token position. LIME weights belong to a word and
/// shade every occurrence; intrinsic weights shade one position.
fn position_weights(expl: &Explanation, n_tokens: usize, tokens: &[String]) -> Vec<Option<f64>> {
    let mut out = vec![None; n_tokens];
    match expl.method {
        Method::Intrinsic => {
            for w in &expl.word_weights {
                if w.position < n_tokens {
                    out[w.position] = Some(w.weight);
                }
            }
        }
        Method::Lime => {
            let by_word: HashMap<&str, f64> = expl
                .word_weights
                .iter()
                .map(|w| (w.token.as_str(), w.weight))
                .collect();
            for (slot, t) in out.iter_mut().zip(tokens) {
                *slot = by_word.get(t.as_str()).copied();
            }
        }
    }
    out
}

/// Self-contained HTML page: header, highlighted token stream, and a bar
/// list of the top-k words. Output depends only on the inputs.
pub fn render_html(expl: &Explanation, doc: &Document) -> String {
    let tokens = document_tokens(&doc.text);
    let weights = position_weights(expl, tokens.len(), &tokens);
    let max = expl
        .word_weights
        .iter()
        .map(|w| w.weight.abs())
        .fold(0.0, f64::max);

    let mut h = String::new();
    h.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(h, "<title>Explanation: {}</title>", escape(&doc.id));
    let _ = writeln!(h, "<style>\n{STYLE}\n</style>\n</head>\n<body>");
    h.push_str("<header>\n");
    let _ = writeln!(h, "<h1>{}</h1>", escape(&doc.id));
    h.push_str("<dl>\n");
    let seed = expl.seed.map_or("n/a".to_string(), |s| s.to_string());
    let model = expl.model_hash.as_deref().unwrap_or("n/a");
    for (k, v) in [
        ("prediction", expl.predicted_label.to_string()),
        ("probability", format!("{:.4}", expl.probability)),
        ("method", expl.method.to_string()),
        ("model", model.to_string()),
        ("seed", seed),
    ] {
        let _ = writeln!(h, "<dt>{k}</dt><dd>{}</dd>", escape(&v));
    }
    for (k, v) in &expl.provenance {
        let _ = writeln!(h, "<dt>{}</dt><dd>{}</dd>", escape(k), escape(v));
    }
    h.push_str("</dl>\n");
    for w in &expl.warnings {
        let _ = writeln!(h, "<p class=\"warn\">{}</p>", escape(w));
    }
    h.push_str("</header>\n<section class=\"text\">\n<p>");
    for (i, (tok, w)) in tokens.iter().zip(&weights).enumerate() {
        if i > 0 {
            h.push(' ');
        }
        match w {
            Some(w) if max > 0.0 => {
                let _ = write!(
                    h,
                    "<span class=\"tok\" data-pos=\"{i}\" style=\"background:{}\" title=\"{w:.4}\">{}</span>",
                    rgba(*w, w.abs() / max),
                    escape(tok)
                );
            }
            _ => {
                let _ = write!(h, "<span class=\"tok\" data-pos=\"{i}\">{}</span>", escape(tok));
            }
        }
    }
    h.push_str("</p>\n</section>\n");

    let top = if max > 0.0 { expl.top() } else { Vec::new() };
    if !top.is_empty() {
        let _ = writeln!(h, "<section class=\"bars\">\n<h2>Top {} words</h2>", top.len());
        for w in top {
            let pct = if max > 0.0 { 100.0 * w.weight.abs() / max } else { 0.0 };
            let _ = writeln!(
                h,
                "<div class=\"bar-row\"><span>{}</span><span class=\"bar\" style=\"width:{pct:.1}%;background:{}\"></span><span>{:+.4}</span></div>",
                escape(&w.token),
                rgba(w.weight, 1.0),
                w.weight
            );
        }
        h.push_str("</section>\n");
    }
    h.push_str("</body>\n</html>\n");
    h
}

pub fn render_report(expl: &Explanation, doc: &Document, out: &Path) -> Result<(), ExplainError> {
    std::fs::write(out, render_html(expl, doc))?;
    Ok(())
}
