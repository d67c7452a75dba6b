//! Time of day and skim periods. Times are minutes after midnight.
use serde::{Deserialize, Serialize};

pub type Minutes = f64;

/// Length of one supply-simulation interval.
pub const INTERVAL_MIN: f64 = 5.0;

pub fn hhmm(h: u32, m: u32) -> Minutes {
    (h * 60 + m) as f64
}

pub fn format_hhmm(t: Minutes) -> String {
    let total = t.round() as i64;
    format!("{:02}:{:02}", total.div_euclid(60), total.rem_euclid(60))
}

/// The three skim periods used by demand models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Period {
    Am,
    Pm,
    Off,
}

impl Period {
    pub const ALL: [Period; 3] = [Period::Am, Period::Pm, Period::Off];

    pub fn index(self) -> usize {
        match self {
            Period::Am => 0,
            Period::Pm => 1,
            Period::Off => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Period::Am => "am_peak",
            Period::Pm => "pm_peak",
            Period::Off => "off_peak",
        }
    }
}

/// Peak windows; everything else is off-peak.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodWindows {
    pub am: (Minutes, Minutes),
    pub pm: (Minutes, Minutes),
}

impl Default for PeriodWindows {
    fn default() -> Self {
        PeriodWindows {
            am: (hhmm(8, 0), hhmm(10, 0)),
            pm: (hhmm(16, 0), hhmm(19, 0)),
        }
    }
}

impl PeriodWindows {
    pub fn period_of(&self, t: Minutes) -> Period {
        if t >= self.am.0 && t < self.am.1 {
            Period::Am
        } else if t >= self.pm.0 && t < self.pm.1 {
            Period::Pm
        } else {
            Period::Off
        }
    }
}
