//! Statically registered remote actions.

use std::collections::HashMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::locality::Locality;
use super::wire::{self, FIRST_SYSTEM_ACTION};
use super::{Result, RuntimeError};

pub type ActionId = u32;

/// A function that can run on another locality. Every locality must register
/// the same set of actions before the runtime starts.
pub trait Action: 'static {
    const ID: ActionId;
    const NAME: &'static str;
    type Args: Serialize + DeserializeOwned + Send + 'static;
    type Output: Serialize + DeserializeOwned + Send + 'static;

    fn execute(here: &Locality, args: Self::Args) -> Result<Self::Output>;
}

pub(crate) type Handler = fn(&Locality, &[u8]) -> Result<Vec<u8>>;

fn handler<A: Action>(here: &Locality, payload: &[u8]) -> Result<Vec<u8>> {
    let args: A::Args = wire::deserialize(payload)?;
    let out = A::execute(here, args)?;
    wire::serialize(&out)
}

#[derive(Clone)]
pub(crate) struct Entry {
    pub(crate) name: &'static str,
    pub(crate) handler: Handler,
}

#[derive(Clone, Default)]
pub struct ActionTable {
    entries: HashMap<ActionId, Entry>,
}

impl ActionTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register<A: Action>(&mut self) -> Result<&mut Self> {
        if A::ID >= FIRST_SYSTEM_ACTION {
            return Err(RuntimeError::Config(format!(
                "action id {} of {} is reserved",
                A::ID,
                A::NAME
            )));
        }
        if self.entries.contains_key(&A::ID) {
            return Err(RuntimeError::DuplicateAction(A::ID));
        }
        self.entries.insert(
            A::ID,
            Entry {
                name: A::NAME,
                handler: handler::<A>,
            },
        );
        Ok(self)
    }

    pub fn contains(&self, id: ActionId) -> bool {
        self.entries.contains_key(&id)
    }

    pub fn name(&self, id: ActionId) -> Option<&'static str> {
        self.entries.get(&id).map(|e| e.name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub(crate) fn get(&self, id: ActionId) -> Option<&Entry> {
        self.entries.get(&id)
    }

    pub(crate) fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }
}

impl std::fmt::Debug for ActionTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut names: Vec<_> = self.entries.iter().map(|(id, e)| (*id, e.name)).collect();
        names.sort_unstable();
        f.debug_map().entries(names).finish()
    }
}
