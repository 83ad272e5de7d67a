//! Strongly typed identifiers for simulation entities.

use serde::{Deserialize, Serialize};
use std::fmt;

macro_rules! id_type {
    ($(#[$meta:meta])* $name:ident, $inner:ty, $prefix:expr) => {
        $(#[$meta])*
        #[derive(
            Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        #[serde(transparent)]
        pub struct $name(pub $inner);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{}", $prefix, self.0)
            }
        }

        impl From<usize> for $name {
            fn from(v: usize) -> Self {
                Self(v as $inner)
            }
        }
    };
}

id_type!(
    /// Base station (eNodeB) identifier; also the index into the cell list.
    CellId, u32, "cell"
);
id_type!(
    /// End user identifier; also the index into the user list.
    UserId, u32, "ue"
);
id_type!(
    /// Backhaul SDN switch identifier.
    SwitchId, u32, "sw"
);
id_type!(
    /// Backhaul link identifier (index into the graph's link list).
    LinkId, u32, "link"
);
id_type!(FlowId, u64, "flow");
id_type!(MeterId, u64, "meter");
