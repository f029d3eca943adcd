use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use super::write_file;
use crate::error::{Error, Result};
use crate::evec::EvecModel;
use crate::features::FeatureScaler;
use crate::multilabel::{ChainEnsemble, MultiLabelModel};
use crate::ordmap::OrdinalMapper;
use crate::regress::{KernelModel, Method};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Every model type that can be written to disk.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyModel {
    Kernel(KernelModel),
    Ordinal(OrdinalMapper),
    MultiLabel(MultiLabelModel),
    Chains(ChainEnsemble),
    Evec(EvecModel),
    Scaler(FeatureScaler),
}

impl AnyModel {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Kernel(m) => match m.method {
                Method::Krr { .. } => "krr",
                Method::Svr { .. } => "svr",
            },
            AnyModel::Ordinal(_) => "ordmap",
            AnyModel::MultiLabel(_) => "rlr",
            AnyModel::Chains(_) => "chains",
            AnyModel::Evec(_) => "evec",
            AnyModel::Scaler(_) => "scaler",
        }
    }

    fn body(&self) -> Result<Value> {
        Ok(match self {
            AnyModel::Kernel(m) => serde_json::to_value(m)?,
            AnyModel::Ordinal(m) => serde_json::to_value(m)?,
            AnyModel::MultiLabel(m) => serde_json::to_value(m)?,
            AnyModel::Chains(m) => serde_json::to_value(m)?,
            AnyModel::Evec(m) => serde_json::to_value(m)?,
            AnyModel::Scaler(m) => serde_json::to_value(m)?,
        })
    }

    /// Serializes to the versioned JSON document.
    pub fn to_json(&self) -> Result<String> {
        let doc = json!({
            "kind": self.kind(),
            "version": MODEL_FORMAT_VERSION,
            "model": self.body()?,
        });
        let mut s = serde_json::to_string_pretty(&doc)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut doc: Value = serde_json::from_str(text)?;
        let kind = doc
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::ModelVersion("missing \"kind\"".into()))?
            .to_string();
        let version = doc
            .get("version")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::ModelVersion("missing \"version\"".into()))?;
        if version != MODEL_FORMAT_VERSION as u64 {
            return Err(Error::ModelVersion(format!(
                "kind '{kind}' version {version} is not supported (expected {MODEL_FORMAT_VERSION})"
            )));
        }
        let body = doc
            .get_mut("model")
            .map(Value::take)
            .ok_or_else(|| Error::ModelVersion("missing \"model\"".into()))?;
        fn de<T: DeserializeOwned>(v: Value) -> Result<T> {
            Ok(serde_json::from_value(v)?)
        }
        let model = match kind.as_str() {
            "krr" | "svr" => AnyModel::Kernel(de(body)?),
            "ordmap" => AnyModel::Ordinal(de(body)?),
            "rlr" => AnyModel::MultiLabel(de(body)?),
            "chains" => AnyModel::Chains(de(body)?),
            "evec" => AnyModel::Evec(de(body)?),
            "scaler" => AnyModel::Scaler(de(body)?),
            other => return Err(Error::ModelVersion(format!("unknown kind '{other}'"))),
        };
        if model.kind() != kind {
            return Err(Error::ModelVersion(format!(
                "document kind '{kind}' does not match its contents ('{}')",
                model.kind()
            )));
        }
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        match self {
            AnyModel::Kernel(m) => m.validate(),
            AnyModel::Ordinal(m) => m.validate(),
            AnyModel::MultiLabel(m) => m.validate(),
            AnyModel::Chains(m) => m.validate(),
            AnyModel::Evec(m) => m.validate(),
            AnyModel::Scaler(m) => m.validate(),
        }
    }
}

macro_rules! any_model_conversions {
    ($($variant:ident($ty:ty)),* $(,)?) => {$(
        impl From<$ty> for AnyModel {
            fn from(m: $ty) -> Self {
                AnyModel::$variant(m)
            }
        }

        impl TryFrom<AnyModel> for $ty {
            type Error = Error;

            fn try_from(m: AnyModel) -> Result<Self> {
                match m {
                    AnyModel::$variant(inner) => Ok(inner),
                    other => Err(Error::ModelVersion(format!(
                        "expected a {} model, found '{}'",
                        stringify!($variant),
                        other.kind()
                    ))),
                }
            }
        }
    )*};
}

any_model_conversions!(
    Kernel(KernelModel),
    Ordinal(OrdinalMapper),
    MultiLabel(MultiLabelModel),
    Chains(ChainEnsemble),
    Evec(EvecModel),
    Scaler(FeatureScaler),
);

pub fn persist_model(model: &AnyModel, path: &Path) -> Result<()> {
    write_file(path, &model.to_json()?)
}

pub fn load_model(path: &Path) -> Result<AnyModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    AnyModel::from_json(&text)
}
