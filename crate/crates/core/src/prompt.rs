//! Minimal `{{placeholder}}` templating for the prompt assets in `prompts/`.

/// Substitutes `{{name}}` placeholders in one pass, so substituted values are
/// never re-scanned.
///
/// Panics on a placeholder with no value: templates are compiled into the
/// binary, so that is a programming error.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        match after.find("}}") {
            Some(end) => {
                let name = &after[..end];
                match vars.iter().find(|(k, _)| *k == name) {
                    Some((_, v)) => out.push_str(v),
                    None => panic!("template placeholder `{name}` has no value"),
                }
                rest = &after[end + 2..];
            }
            None => {
                out.push_str(&rest[start..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

/// Options listed one per line as `Distractor N: text`.
pub fn distractor_lines(distractors: &[String]) -> String {
    distractors
        .iter()
        .enumerate()
        .map(|(i, d)| format!("Distractor {}: {d}\n", i + 1))
        .collect()
}
