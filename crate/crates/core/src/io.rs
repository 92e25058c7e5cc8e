//! JSON instance and schedule files.
//!
//! ```json
//! {"variant": "kvisits", "k": 2, "deadlines": [2, 2]}
//! {"variant": "one_or_two", "single": [1, 3], "double": [4]}
//! {"variant": "pm", "deadlines": [1, 2], "targets": [3, 4]}
//! ```
//!
//! Schedules are `{"entries": [{"pos": 1, "task": 1, "role": "plain"}, ...]}`
//! and NMTS instances are `{"a": [...], "b": [...], "t": [...]}`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hardness::NMTSInstance;
use crate::model::{Deadlines, KVisitsInstance, OneOrTwoInstance, Schedule};
use crate::posmatch::PMInstance;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    KVisits(KVisitsInstance),
    OneOrTwo(OneOrTwoInstance),
    Pm(PMInstance),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Kvisits,
    OneOrTwo,
    Pm,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    variant: Variant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deadlines: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    single: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    double: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    targets: Option<Vec<u64>>,
}

fn json_error(e: serde_json::Error) -> Error {
    invalid(format!("line {} column {}: {e}", e.line(), e.column()))
}

fn required<T>(v: Option<T>, field: &str, variant: &str) -> Result<T> {
    v.ok_or_else(|| invalid(format!("variant {variant} needs field \"{field}\"")))
}

fn deadlines_or_empty(v: Option<Vec<u64>>) -> Result<Deadlines> {
    match v {
        Some(v) if !v.is_empty() => Deadlines::new(v),
        _ => Ok(Deadlines::empty()),
    }
}

impl Instance {
    pub fn variant(&self) -> Variant {
        match self {
            Instance::KVisits(_) => Variant::Kvisits,
            Instance::OneOrTwo(_) => Variant::OneOrTwo,
            Instance::Pm(_) => Variant::Pm,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawInstance = serde_json::from_str(text).map_err(json_error)?;
        match raw.variant {
            Variant::Kvisits => {
                let d = Deadlines::new(required(raw.deadlines, "deadlines", "kvisits")?)?;
                Ok(Instance::KVisits(KVisitsInstance::new(d, raw.k.unwrap_or(2))?))
            }
            Variant::OneOrTwo => {
                let single = deadlines_or_empty(raw.single)?;
                let double = deadlines_or_empty(raw.double)?;
                if single.is_empty() && double.is_empty() {
                    return Err(invalid("instance has no tasks"));
                }
                Ok(Instance::OneOrTwo(OneOrTwoInstance::new(single, double)))
            }
            Variant::Pm => {
                let d = Deadlines::new(required(raw.deadlines, "deadlines", "pm")?)?;
                Ok(Instance::Pm(PMInstance::new(d, required(raw.targets, "targets", "pm")?)?))
            }
        }
    }

    pub fn to_json(&self) -> String {
        let mut raw = RawInstance {
            variant: self.variant(),
            k: None,
            deadlines: None,
            single: None,
            double: None,
            targets: None,
        };
        match self {
            Instance::KVisits(i) => {
                raw.k = Some(i.k);
                raw.deadlines = Some(i.deadlines.values().to_vec());
            }
            Instance::OneOrTwo(i) => {
                raw.single = Some(i.single.values().to_vec());
                raw.double = Some(i.double.values().to_vec());
            }
            Instance::Pm(i) => {
                raw.deadlines = Some(i.deadlines().values().to_vec());
                raw.targets = Some(i.targets().to_vec());
            }
        }
        serde_json::to_string(&raw).expect("instance serializes")
    }
}

pub fn schedule_from_json(text: &str) -> Result<Schedule> {
    serde_json::from_str(text).map_err(json_error)
}

pub fn schedule_to_json(s: &Schedule) -> String {
    serde_json::to_string(s).expect("schedule serializes")
}

pub fn nmts_from_json(text: &str) -> Result<NMTSInstance> {
    let raw: NMTSInstance = serde_json::from_str(text).map_err(json_error)?;
    NMTSInstance::new(raw.a, raw.b, raw.t)
}
