//! Device files: `{"kind": ..., "schema_version": 1, "payload": {...}}`.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::channels::Channel;
use crate::instruments::Instrument;
use crate::observables::Observable;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceKind {
    Observable,
    Channel,
    Instrument,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceFile {
    pub kind: DeviceKind,
    pub schema_version: u32,
    pub payload: Value,
}

#[derive(Clone, Debug)]
pub enum Device {
    Observable(Observable),
    Channel(Channel),
    Instrument(Instrument),
}

#[derive(Debug, Error)]
pub enum DeviceError {
    #[error("JSON error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    SchemaVersion(u32),
    #[error("invalid {kind:?} payload: {message}")]
    Payload { kind: DeviceKind, message: String },
    #[error("expected a {expected:?} device, found {found:?}")]
    WrongKind { expected: DeviceKind, found: DeviceKind },
}

impl From<serde_json::Error> for DeviceError {
    fn from(e: serde_json::Error) -> Self {
        DeviceError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl Device {
    pub fn kind(&self) -> DeviceKind {
        match self {
            Device::Observable(_) => DeviceKind::Observable,
            Device::Channel(_) => DeviceKind::Channel,
            Device::Instrument(_) => DeviceKind::Instrument,
        }
    }

    pub fn to_file(&self) -> DeviceFile {
        let payload = match self {
            Device::Observable(o) => serde_json::to_value(o),
            Device::Channel(c) => serde_json::to_value(c),
            Device::Instrument(i) => serde_json::to_value(i),
        }
        .expect("devices serialise");
        DeviceFile {
            kind: self.kind(),
            schema_version: SCHEMA_VERSION,
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("devices serialise")
    }

    pub fn into_observable(self) -> Result<Observable, DeviceError> {
        match self {
            Device::Observable(o) => Ok(o),
            other => Err(DeviceError::WrongKind {
                expected: DeviceKind::Observable,
                found: other.kind(),
            }),
        }
    }

    pub fn into_channel(self) -> Result<Channel, DeviceError> {
        match self {
            Device::Channel(c) => Ok(c),
            other => Err(DeviceError::WrongKind {
                expected: DeviceKind::Channel,
                found: other.kind(),
            }),
        }
    }

    pub fn into_instrument(self) -> Result<Instrument, DeviceError> {
        match self {
            Device::Instrument(i) => Ok(i),
            other => Err(DeviceError::WrongKind {
                expected: DeviceKind::Instrument,
                found: other.kind(),
            }),
        }
    }
}

impl From<Observable> for Device {
    fn from(o: Observable) -> Self {
        Device::Observable(o)
    }
}

impl From<Channel> for Device {
    fn from(c: Channel) -> Self {
        Device::Channel(c)
    }
}

impl From<Instrument> for Device {
    fn from(i: Instrument) -> Self {
        Device::Instrument(i)
    }
}

/// Parses the envelope without validating the payload.
pub fn parse_device_file(text: &str) -> Result<DeviceFile, DeviceError> {
    let file: DeviceFile = serde_json::from_str(text)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(DeviceError::SchemaVersion(file.schema_version));
    }
    Ok(file)
}

/// Parses and validates a device.
pub fn parse_device(text: &str) -> Result<Device, DeviceError> {
    let file = parse_device_file(text)?;
    let kind = file.kind;
    let bad = |e: serde_json::Error| DeviceError::Payload {
        kind,
        message: e.to_string(),
    };
    Ok(match kind {
        DeviceKind::Observable => Device::Observable(serde_json::from_value(file.payload).map_err(bad)?),
        DeviceKind::Channel => Device::Channel(serde_json::from_value(file.payload).map_err(bad)?),
        DeviceKind::Instrument => Device::Instrument(serde_json::from_value(file.payload).map_err(bad)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_channel, random_instrument, random_observable, rng};

    #[test]
    fn round_trips_are_exact() {
        let mut g = rng(91);
        let devices: Vec<Device> = vec![
            random_observable(&mut g, 3, 4).into(),
            random_channel(&mut g, 2, 3, 2).into(),
            random_instrument(&mut g, 2, 2, 3, 2).into(),
        ];
        for d in devices {
            let back = parse_device(&d.to_json()).unwrap();
            match (&d, &back) {
                (Device::Observable(a), Device::Observable(b)) => assert_eq!(a, b),
                (Device::Channel(a), Device::Channel(b)) => assert_eq!(a, b),
                (Device::Instrument(a), Device::Instrument(b)) => assert_eq!(a, b),
                _ => panic!("kind changed"),
            }
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_device("{\n  \"kind\": \"observable\",\n  oops\n}").unwrap_err();
        match err {
            DeviceError::Syntax { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn invalid_payload_is_reported() {
        let text = r#"{"kind":"observable","schema_version":1,
            "payload":{"dim":1,"effects":[[[[0.5,0.0]]],[[[0.7,0.0]]]]}}"#;
        assert!(matches!(parse_device(text), Err(DeviceError::Payload { .. })));
        let text = r#"{"kind":"observable","schema_version":2,"payload":{}}"#;
        assert!(matches!(parse_device(text), Err(DeviceError::SchemaVersion(2))));
    }

    #[test]
    fn wrong_kind() {
        let d: Device = Observable::standard_basis(2).into();
        assert!(matches!(d.into_channel(), Err(DeviceError::WrongKind { .. })));
    }
}
