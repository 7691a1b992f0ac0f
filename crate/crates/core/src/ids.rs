//! Identifier newtypes and the slug rule used for every generated id.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }

        impl AsRef<str> for $name {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }

        impl std::borrow::Borrow<str> for $name {
            fn borrow(&self) -> &str {
                &self.0
            }
        }
    };
}

id_type!(
    /// Identifier of an action or plan node in a task model.
    NodeId
);
id_type!(
    /// Identifier of a concept in the layered hierarchy.
    ConceptId
);
id_type!(
    /// Identifier of an object instance (interface widget, agent, domain object).
    InstanceId
);

/// Lowercase hyphenated slug: runs of non-alphanumerics collapse to one `-`.
pub fn slugify(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_dash = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if pending_dash && !out.is_empty() {
                out.push('-');
            }
            pending_dash = false;
            out.extend(c.to_lowercase());
        } else {
            pending_dash = true;
        }
    }
    out
}

/// True for strings that [`slugify`] leaves unchanged and that are non-empty.
pub fn is_slug(text: &str) -> bool {
    !text.is_empty() && slugify(text) == text
}

/// Returns `base` if free, otherwise `base-2`, `base-3`, ...
pub fn unique_slug(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (2..)
        .map(|n| format!("{base}-{n}"))
        .find(|candidate| !taken(candidate))
        .expect("unbounded suffix search")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slugify("Save As"), "save-as");
        assert_eq!(slugify("  Save Current Document As "), "save-current-document-as");
        assert_eq!(slugify("Save-Document-Plan"), "save-document-plan");
        assert_eq!(slugify("Choosing-Plan / Clicking-Plan"), "choosing-plan-clicking-plan");
        assert_eq!(slugify("Fenêtre"), "fenêtre");
        assert!(is_slug("open-save-as"));
        assert!(!is_slug("Open"));
        assert!(!is_slug(""));
    }

    #[test]
    fn suffix_on_collision() {
        let taken = ["a", "a-2"];
        assert_eq!(unique_slug("a", |s| taken.contains(&s)), "a-3");
        assert_eq!(unique_slug("b", |s| taken.contains(&s)), "b");
    }
}
