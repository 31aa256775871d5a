use crate::error::{Error, Result};

/// Canonical form of an API name used for every comparison.
///
/// Trims, drops parenthesized argument lists, collapses whitespace (and removes
/// it around dots), then lowercases: `"Integer.parseInt(String)"` becomes
/// `"integer.parseint"`.
pub fn normalize_api(name: &str) -> Result<String> {
    let mut stripped = String::with_capacity(name.len());
    let mut depth = 0usize;
    for c in name.trim().chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            _ if depth == 0 => stripped.push(c),
            _ => {}
        }
    }
    let collapsed = stripped.split_whitespace().collect::<Vec<_>>().join(" ");
    let canonical = collapsed
        .replace(" .", ".")
        .replace(". ", ".")
        .to_lowercase();
    if canonical.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "API name {name:?} is empty after normalization"
        )));
    }
    Ok(canonical)
}

/// Declaring-class part of a canonical name; a name without dots is its own class.
pub fn class_form(canonical: &str) -> &str {
    canonical.rsplit_once('.').map_or(canonical, |(class, _)| class)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_parens_and_lowercases() {
        assert_eq!(normalize_api("java.util.Arrays.asList()").unwrap(), "java.util.arrays.aslist");
        assert_eq!(normalize_api("Integer.parseInt(String)").unwrap(), "integer.parseint");
        assert_eq!(
            normalize_api("  java.util . Map.put(K key, V value) ").unwrap(),
            "java.util.map.put"
        );
    }

    #[test]
    fn empty_after_normalization_is_an_error() {
        assert!(normalize_api("   ").is_err());
        assert!(normalize_api("()").is_err());
    }

    #[test]
    fn class_form_drops_last_segment() {
        assert_eq!(class_form("java.lang.class.forname"), "java.lang.class");
        assert_eq!(class_form("parseint"), "parseint");
    }
}
