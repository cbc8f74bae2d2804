//! Identifier newtypes for the grid → domain → entity hierarchy.

use std::fmt;

use serde::{Deserialize, Serialize};

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(label: impl Into<String>) -> Self {
                Self(label.into())
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
            fn from(label: &str) -> Self {
                Self::new(label)
            }
        }

        impl From<String> for $name {
            fn from(label: String) -> Self {
                Self(label)
            }
        }
    };
}

id_type!(
    /// Short label identifying an entity, unique within the topology (e.g. `"E"`).
    EntityId
);
id_type!(
    /// Label identifying a domain; every domain belongs to exactly one grid.
    DomainId
);
id_type!(
    /// Label identifying a grid.
    GridId
);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_matches_label() {
        assert_eq!(EntityId::new("E").to_string(), "E");
        assert_eq!(DomainId::from("D1").as_str(), "D1");
    }

    #[test]
    fn ordering_is_lexicographic() {
        assert!(EntityId::new("A") < EntityId::new("B"));
    }
}
