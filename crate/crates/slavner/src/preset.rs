//! The four submitted system configurations. Presets name model roles,
//! not checkpoints; a run configuration binds each role to a concrete
//! checkpoint directory, so desk-scale stand-ins can fill the slots.

use std::collections::BTreeMap;

use slavner_core::corpus::Language;

use crate::error::{Error, Result};

/// Which training data a role's checkpoint is expected to carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NerDataTier {
    /// Shared-task training data only.
    OrganizerOnly,
    /// Shared-task data plus the harmonized external corpora.
    AllAvailable,
}

impl NerDataTier {
    pub fn as_str(self) -> &'static str {
        match self {
            NerDataTier::OrganizerOnly => "organizer-only",
            NerDataTier::AllAvailable => "all-available",
        }
    }
}

pub const PL_MONOLINGUAL: &str = "pl-monolingual-large";
pub const CS_MONOLINGUAL: &str = "cs-monolingual";
pub const RU_MONOLINGUAL: &str = "ru-monolingual";
pub const MULTILINGUAL: &str = "multilingual-large";
pub const LEMMATIZER: &str = "multilingual-lemmatizer";

/// One submitted system: a NER role and data tier per language plus a
/// lemmatizer role per language.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemPreset {
    pub name: &'static str,
    pub ner_role: BTreeMap<Language, &'static str>,
    pub data_tier: BTreeMap<Language, NerDataTier>,
    pub lemma_role: BTreeMap<Language, &'static str>,
}

pub const PRESET_NAMES: [&str; 4] = ["system1", "system2", "system3", "system4"];

fn per_language<T: Copy>(pl: T, cs: T, ru: T) -> BTreeMap<Language, T> {
    let mut map = BTreeMap::new();
    map.insert(Language::Pl, pl);
    map.insert(Language::Cs, cs);
    map.insert(Language::Ru, ru);
    map
}

fn monolingual_roles() -> BTreeMap<Language, &'static str> {
    per_language(PL_MONOLINGUAL, CS_MONOLINGUAL, RU_MONOLINGUAL)
}

fn shared_role() -> BTreeMap<Language, &'static str> {
    per_language(MULTILINGUAL, MULTILINGUAL, MULTILINGUAL)
}

pub fn preset(name: &str) -> Result<SystemPreset> {
    use NerDataTier::{AllAvailable, OrganizerOnly};
    let lemma_role = per_language(LEMMATIZER, LEMMATIZER, LEMMATIZER);
    let preset = match name {
        // monolingual models; only the Polish one saw the extra corpora
        "system1" => SystemPreset {
            name: "system1",
            ner_role: monolingual_roles(),
            data_tier: per_language(AllAvailable, OrganizerOnly, OrganizerOnly),
            lemma_role,
        },
        // one multilingual model, organizer data only
        "system2" => SystemPreset {
            name: "system2",
            ner_role: shared_role(),
            data_tier: per_language(OrganizerOnly, OrganizerOnly, OrganizerOnly),
            lemma_role,
        },
        // one multilingual model, all harmonized data
        "system3" => SystemPreset {
            name: "system3",
            ner_role: shared_role(),
            data_tier: per_language(AllAvailable, AllAvailable, AllAvailable),
            lemma_role,
        },
        // monolingual models, all harmonized data
        "system4" => SystemPreset {
            name: "system4",
            ner_role: monolingual_roles(),
            data_tier: per_language(AllAvailable, AllAvailable, AllAvailable),
            lemma_role,
        },
        other => {
            return Err(Error::invalid(format!(
                "unknown preset `{other}`; expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(preset)
}

pub fn all_presets() -> Vec<SystemPreset> {
    PRESET_NAMES.iter().map(|n| preset(n).unwrap()).collect()
}
