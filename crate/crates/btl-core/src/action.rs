//! The GUI action space: `Back`, `Home`, `Tap`, `Type`, `Swipe`, `LongPress`.
//!
//! Wire format is the JSON shape used inside `<link>` payloads, e.g.
//! `{"function": "Tap", "position": [x, y]}`. Each function takes exactly
//! its mandated argument set; anything extra or missing is rejected.

use std::fmt;

use serde::de::Error as _;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::geometry::Point;
use crate::scalar::Scalar;

/// Action type tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    Back,
    Home,
    Tap,
    Type,
    Swipe,
    LongPress,
}

impl ActionKind {
    pub const ALL: [ActionKind; 6] = [
        ActionKind::Back,
        ActionKind::Home,
        ActionKind::Tap,
        ActionKind::Type,
        ActionKind::Swipe,
        ActionKind::LongPress,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ActionKind::Back => "Back",
            ActionKind::Home => "Home",
            ActionKind::Tap => "Tap",
            ActionKind::Type => "Type",
            ActionKind::Swipe => "Swipe",
            ActionKind::LongPress => "LongPress",
        }
    }

    pub fn from_str_exact(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.as_str() == s)
    }

    /// Non-interactive actions (`A*`): those that target no screen element.
    pub fn is_non_interactive(&self) -> bool {
        matches!(
            self,
            ActionKind::Back | ActionKind::Home | ActionKind::Swipe | ActionKind::Type
        )
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Swipe direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Left,
    Right,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }

    pub fn from_str_exact(s: &str) -> Option<Self> {
        match s {
            "up" => Some(Direction::Up),
            "down" => Some(Direction::Down),
            "left" => Some(Direction::Left),
            "right" => Some(Direction::Right),
            _ => None,
        }
    }
}

/// A typed GUI action with exactly the arguments its function mandates.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionCall<T = f64> {
    Back,
    Home,
    Tap { position: Point<T> },
    Type { text: String },
    Swipe { direction: Direction },
    LongPress { position: Point<T> },
}

impl<T: Scalar> ActionCall<T> {
    pub fn kind(&self) -> ActionKind {
        match self {
            ActionCall::Back => ActionKind::Back,
            ActionCall::Home => ActionKind::Home,
            ActionCall::Tap { .. } => ActionKind::Tap,
            ActionCall::Type { .. } => ActionKind::Type,
            ActionCall::Swipe { .. } => ActionKind::Swipe,
            ActionCall::LongPress { .. } => ActionKind::LongPress,
        }
    }

    /// The click position for `Tap`/`LongPress`, `None` otherwise.
    pub fn position(&self) -> Option<Point<T>> {
        match self {
            ActionCall::Tap { position } | ActionCall::LongPress { position } => Some(*position),
            _ => None,
        }
    }
}

/// Loose JSON shape accepted off the wire before argument-set validation.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawActionCall<T> {
    function: String,
    #[serde(default = "none_point")]
    position: Option<[T; 2]>,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    direction: Option<String>,
}

fn none_point<T>() -> Option<[T; 2]> {
    None
}

impl<T: Scalar> RawActionCall<T> {
    fn into_action(self) -> Result<ActionCall<T>, String> {
        let kind = ActionKind::from_str_exact(&self.function)
            .ok_or_else(|| format!("unknown function {:?}", self.function))?;
        let forbid = |name: &str, present: bool| {
            if present {
                Err(format!("{kind} takes no {name} argument"))
            } else {
                Ok(())
            }
        };
        match kind {
            ActionKind::Back | ActionKind::Home => {
                forbid("position", self.position.is_some())?;
                forbid("text", self.text.is_some())?;
                forbid("direction", self.direction.is_some())?;
                Ok(if kind == ActionKind::Back {
                    ActionCall::Back
                } else {
                    ActionCall::Home
                })
            }
            ActionKind::Tap | ActionKind::LongPress => {
                forbid("text", self.text.is_some())?;
                forbid("direction", self.direction.is_some())?;
                let [x, y] = self
                    .position
                    .ok_or_else(|| format!("{kind} requires a position argument"))?;
                if !(x.is_finite() && y.is_finite()) {
                    return Err(format!("{kind} position must be finite"));
                }
                let position = Point::new(x, y);
                Ok(if kind == ActionKind::Tap {
                    ActionCall::Tap { position }
                } else {
                    ActionCall::LongPress { position }
                })
            }
            ActionKind::Type => {
                forbid("position", self.position.is_some())?;
                forbid("direction", self.direction.is_some())?;
                let text = self
                    .text
                    .ok_or_else(|| "Type requires a text argument".to_string())?;
                Ok(ActionCall::Type { text })
            }
            ActionKind::Swipe => {
                forbid("position", self.position.is_some())?;
                forbid("text", self.text.is_some())?;
                let raw = self
                    .direction
                    .ok_or_else(|| "Swipe requires a direction argument".to_string())?;
                let direction = Direction::from_str_exact(&raw)
                    .ok_or_else(|| format!("invalid swipe direction {raw:?}"))?;
                Ok(ActionCall::Swipe { direction })
            }
        }
    }
}

impl<'de, T: Scalar> Deserialize<'de> for ActionCall<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        RawActionCall::<T>::deserialize(deserializer)?
            .into_action()
            .map_err(D::Error::custom)
    }
}

impl<T: Scalar> Serialize for ActionCall<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let n = if matches!(self, ActionCall::Back | ActionCall::Home) {
            1
        } else {
            2
        };
        let mut st = serializer.serialize_struct("ActionCall", n)?;
        st.serialize_field("function", self.kind().as_str())?;
        match self {
            ActionCall::Back | ActionCall::Home => {}
            ActionCall::Tap { position } | ActionCall::LongPress { position } => {
                st.serialize_field("position", &[position.x, position.y])?;
            }
            ActionCall::Type { text } => st.serialize_field("text", text)?,
            ActionCall::Swipe { direction } => {
                st.serialize_field("direction", direction.as_str())?;
            }
        }
        st.end()
    }
}
