use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Constant, GaussianClamped, NoiseModel, NoiseSpec, Off, Poisson, Speckle};
use crate::error::{Error, Result};

pub type NoiseFactory = fn(&NoiseSpec) -> Result<Arc<dyn NoiseModel>>;

/// Name-to-constructor table for noise models.
#[derive(Debug, Clone, Default)]
pub struct NoiseRegistry {
    factories: BTreeMap<&'static str, NoiseFactory>,
}

impl NoiseRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding every model shipped with the crate.
    pub fn builtin() -> Self {
        let mut reg = Self::empty();
        reg.register(Off::KIND, |_| Ok(Arc::new(Off)));
        reg.register(Constant::KIND, |s| Ok(Arc::new(Constant::new(s.require("mean")?)?)));
        reg.register(Poisson::KIND, |s| Ok(Arc::new(Poisson::new(s.require("mean")?)?)));
        reg.register(GaussianClamped::KIND, |s| {
            Ok(Arc::new(GaussianClamped::new(
                s.require("mean")?,
                s.require("variance")?,
            )?))
        });
        reg.register(Speckle::KIND, |s| {
            Ok(Arc::new(Speckle::new(s.require("mean")?, s.require("modes")?)?))
        });
        reg
    }

    /// Adds or replaces a model. Returns the previous factory, if any.
    pub fn register(&mut self, kind: &'static str, factory: NoiseFactory) -> Option<NoiseFactory> {
        self.factories.insert(kind, factory)
    }

    pub fn build(&self, spec: &NoiseSpec) -> Result<Arc<dyn NoiseModel>> {
        let factory = self
            .factories
            .get(spec.kind.as_str())
            .ok_or_else(|| Error::UnknownNoiseModel(spec.kind.clone()))?;
        factory(spec)
    }

    pub fn kinds(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.factories.keys().copied()
    }
}
