use serde::{Deserialize, Serialize};

use crate::dynamics::Gear;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Headlights {
    #[default]
    Off,
    Low,
    High,
}

impl TryFrom<u8> for Headlights {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            0 => Ok(Self::Off),
            1 => Ok(Self::Low),
            2 => Ok(Self::High),
            _ => Err(format!("headlights must be 0, 1 or 2, got {v}")),
        }
    }
}

impl From<Headlights> for u8 {
    fn from(h: Headlights) -> u8 {
        h as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Indicators {
    #[default]
    Off,
    Left,
    Right,
    Hazard,
}

impl TryFrom<u8> for Indicators {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            0 => Ok(Self::Off),
            1 => Ok(Self::Left),
            2 => Ok(Self::Right),
            3 => Ok(Self::Hazard),
            _ => Err(format!("indicators must be 0..=3, got {v}")),
        }
    }
}

impl From<Indicators> for u8 {
    fn from(i: Indicators) -> u8 {
        i as u8
    }
}

/// Vehicle lamps. Headlights and indicators are operator-controlled; brake
/// and reverse lamps follow the drivetrain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct LightState {
    pub headlights: Headlights,
    pub indicators: Indicators,
    pub brake: bool,
    pub reverse: bool,
}

impl LightState {
    pub fn update_automatic(&mut self, applied_throttle: f64, gear: Gear) {
        self.brake = applied_throttle == 0.0;
        self.reverse = gear == Gear::Reverse;
    }

    /// Pressing the key for a beam level twice turns the lamps off again.
    pub fn toggle_headlights(&mut self, level: Headlights) {
        self.headlights = if self.headlights == level {
            Headlights::Off
        } else {
            level
        };
    }

    pub fn toggle_indicator(&mut self, which: Indicators) {
        self.indicators = if self.indicators == which {
            Indicators::Off
        } else {
            which
        };
    }
}
