//! Minimal English verb morphology for simple-present singular text.

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// `carry` → `carries`, `watch` → `watches`, `take` → `takes`.
pub fn third_person(base: &str) -> String {
    let mut chars = base.chars().rev();
    let last = chars.next();
    let before = chars.next();
    match (before, last) {
        (Some(b), Some('y')) if !is_vowel(b) => format!("{}ies", &base[..base.len() - 1]),
        _ if ["s", "sh", "ch", "x", "z", "o"].iter().any(|s| base.ends_with(s)) => format!("{base}es"),
        _ => format!("{base}s"),
    }
}

/// `carries` → `carry`, `watches` → `watch`, `lives` → `live`.
pub fn lemma(word: &str) -> String {
    if let Some(stem) = word.strip_suffix("ies") {
        if !stem.is_empty() {
            return format!("{stem}y");
        }
    }
    for suffix in ["sses", "shes", "ches", "xes", "zes", "oes"] {
        if word.ends_with(suffix) {
            return word[..word.len() - 2].to_string();
        }
    }
    match word.strip_suffix('s') {
        Some(stem) if !stem.is_empty() && !stem.ends_with('s') => stem.to_string(),
        _ => word.to_string(),
    }
}

/// Base form of a past participle: `carried` → `carry`, `involved` →
/// `involve`, `contained` → `contain`.
pub fn participle_base(word: &str) -> String {
    if let Some(stem) = word.strip_suffix("ied") {
        return format!("{stem}y");
    }
    let Some(stem) = word.strip_suffix("ed") else {
        return word.to_string();
    };
    let wants_e = ["v", "c", "g", "z", "u", "at", "or", "ir", "ur"].iter().any(|s| stem.ends_with(s));
    if wants_e {
        format!("{stem}e")
    } else {
        stem.to_string()
    }
}

/// Property named by a passive participle: `contained` → `contains`. A
/// member of `known` matching any plausible base wins over the default.
pub fn participle_property(word: &str, known: &[String]) -> String {
    let base = participle_base(word);
    let mut candidates = vec![third_person(&base)];
    if let Some(stem) = word.strip_suffix("ed") {
        candidates.push(third_person(stem));
        candidates.push(third_person(&format!("{stem}e")));
    }
    if let Some(stem) = word.strip_suffix('d') {
        candidates.push(third_person(stem));
    }
    candidates.iter().find(|c| known.contains(c)).cloned().unwrap_or_else(|| candidates[0].clone())
}
