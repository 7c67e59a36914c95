//! Design and simulation toolkit for carrying I²C plus DC power over a single
//! two-conductor medium with passively modulated carriers.

// `!(x > 0.0)` is used on purpose so NaN fails validation too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

pub mod analysis;
pub mod config;
pub mod i2c;
pub mod impedance;
pub mod modem;
pub mod sim;
pub mod synth;
pub mod units;

/// Logic level of an open-drain pin or line. `High` means released.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Level {
    #[default]
    High,
    Low,
}

impl Level {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Level::High
        } else {
            Level::Low
        }
    }

    pub fn is_high(self) -> bool {
        self == Level::High
    }
}
