//! The doodle vocabulary and the screen-element vocabulary it maps onto.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown class name {0:?}")]
pub struct UnknownClass(pub String);

macro_rules! class_enum {
    (
        $(#[$meta:meta])*
        $name:ident { $($variant:ident => $text:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const COUNT: usize = Self::ALL.len();

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            /// Position in [`Self::ALL`].
            pub fn index(self) -> usize {
                self as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = UnknownClass;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    other => Err(UnknownClass(other.to_string())),
                }
            }
        }
    };
}

class_enum! {
    /// What the recognizer can output: 16 stylized icon doodles plus 7
    /// free-form doodles.
    DoodleClass {
        Avatar => "avatar",
        Back => "back",
        Cancel => "cancel",
        Checkbox => "checkbox",
        Dropdown => "dropdown",
        Forward => "forward",
        LeftArrow => "left_arrow",
        Menu => "menu",
        Play => "play",
        Plus => "plus",
        Search => "search",
        Setting => "setting",
        Share => "share",
        Slider => "slider",
        Squiggle => "squiggle",
        Switch => "switch",
        Camera => "camera",
        Cloud => "cloud",
        Envelope => "envelope",
        House => "house",
        JailWindow => "jail_window",
        Square => "square",
        Star => "star",
    }
}

class_enum! {
    /// Searchable screen element types. Every doodle class maps to exactly
    /// one of these; `TextButton` only arises from merging a squiggle into a
    /// square.
    ElementClass {
        Avatar => "avatar",
        Back => "back",
        Cancel => "cancel",
        Checkbox => "checkbox",
        Dropdown => "dropdown",
        Forward => "forward",
        LeftArrow => "left_arrow",
        Menu => "menu",
        Play => "play",
        Plus => "plus",
        Search => "search",
        Setting => "setting",
        Share => "share",
        Slider => "slider",
        Text => "text",
        Switch => "switch",
        Camera => "camera",
        DefaultIcon => "default_icon",
        Envelope => "envelope",
        Home => "home",
        Image => "image",
        Container => "container",
        Star => "star",
        TextButton => "text_button",
    }
}

impl DoodleClass {
    pub fn element_class(self) -> ElementClass {
        use DoodleClass as D;
        use ElementClass as E;
        match self {
            D::Avatar => E::Avatar,
            D::Back => E::Back,
            D::Cancel => E::Cancel,
            D::Checkbox => E::Checkbox,
            D::Dropdown => E::Dropdown,
            D::Forward => E::Forward,
            D::LeftArrow => E::LeftArrow,
            D::Menu => E::Menu,
            D::Play => E::Play,
            D::Plus => E::Plus,
            D::Search => E::Search,
            D::Setting => E::Setting,
            D::Share => E::Share,
            D::Slider => E::Slider,
            D::Squiggle => E::Text,
            D::Switch => E::Switch,
            D::Camera => E::Camera,
            D::Cloud => E::DefaultIcon,
            D::Envelope => E::Envelope,
            D::House => E::Home,
            D::JailWindow => E::Image,
            D::Square => E::Container,
            D::Star => E::Star,
        }
    }
}

impl ElementClass {
    /// The doodle that draws this element, `None` for the compound text button.
    pub fn doodle_class(self) -> Option<DoodleClass> {
        DoodleClass::ALL.iter().copied().find(|d| d.element_class() == self)
    }
}

impl From<DoodleClass> for ElementClass {
    fn from(d: DoodleClass) -> Self {
        d.element_class()
    }
}
