//! Entity categories, BIO labels and the task languages.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

/// The five entity categories of the task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    Per,
    Loc,
    Org,
    Evt,
    Pro,
}

/// All categories in their canonical order.
pub const CATEGORIES: [Category; 5] = [
    Category::Per,
    Category::Loc,
    Category::Org,
    Category::Evt,
    Category::Pro,
];

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Per => "PER",
            Category::Loc => "LOC",
            Category::Org => "ORG",
            Category::Evt => "EVT",
            Category::Pro => "PRO",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "PER" => Ok(Category::Per),
            "LOC" => Ok(Category::Loc),
            "ORG" => Ok(Category::Org),
            "EVT" => Ok(Category::Evt),
            "PRO" => Ok(Category::Pro),
            other => Err(Error::UnknownCategory(other.to_string())),
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The three task languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Language {
    Pl,
    Cs,
    Ru,
}

impl Language {
    pub fn as_str(self) -> &'static str {
        match self {
            Language::Pl => "pl",
            Language::Cs => "cs",
            Language::Ru => "ru",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pl" => Ok(Language::Pl),
            "cs" => Ok(Language::Cs),
            "ru" => Ok(Language::Ru),
            other => Err(Error::InvalidConfig(alloc::format!(
                "unknown language `{other}`; expected pl, cs or ru"
            ))),
        }
    }

    pub const ALL: [Language; 3] = [Language::Pl, Language::Cs, Language::Ru];
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A per-token BIO label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Outside,
    Begin(Category),
    Inside(Category),
}

impl Label {
    pub fn category(self) -> Option<Category> {
        match self {
            Label::Outside => None,
            Label::Begin(c) | Label::Inside(c) => Some(c),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s == "O" {
            return Ok(Label::Outside);
        }
        let (prefix, cat) = s.split_once('-').ok_or_else(|| Error::InvalidTag {
            tag: s.to_string(),
            line: 0,
        })?;
        let category = Category::parse(cat).map_err(|_| Error::InvalidTag {
            tag: s.to_string(),
            line: 0,
        })?;
        match prefix {
            "B" => Ok(Label::Begin(category)),
            "I" => Ok(Label::Inside(category)),
            _ => Err(Error::InvalidTag {
                tag: s.to_string(),
                line: 0,
            }),
        }
    }

    pub fn to_str(self) -> &'static str {
        match self {
            Label::Outside => "O",
            Label::Begin(Category::Per) => "B-PER",
            Label::Begin(Category::Loc) => "B-LOC",
            Label::Begin(Category::Org) => "B-ORG",
            Label::Begin(Category::Evt) => "B-EVT",
            Label::Begin(Category::Pro) => "B-PRO",
            Label::Inside(Category::Per) => "I-PER",
            Label::Inside(Category::Loc) => "I-LOC",
            Label::Inside(Category::Org) => "I-ORG",
            Label::Inside(Category::Evt) => "I-EVT",
            Label::Inside(Category::Pro) => "I-PRO",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_str())
    }
}

/// The canonical bijection between the 11 task labels and indices
/// `0..11`: O first, then B/I pairs in category order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelIndex;

impl LabelIndex {
    pub const LEN: usize = 11;

    pub fn index(label: Label) -> usize {
        match label {
            Label::Outside => 0,
            Label::Begin(c) => 1 + 2 * Self::category_pos(c),
            Label::Inside(c) => 2 + 2 * Self::category_pos(c),
        }
    }

    pub fn label(index: usize) -> Option<Label> {
        if index == 0 {
            return Some(Label::Outside);
        }
        if index >= Self::LEN {
            return None;
        }
        let c = CATEGORIES[(index - 1) / 2];
        Some(if (index - 1).is_multiple_of(2) {
            Label::Begin(c)
        } else {
            Label::Inside(c)
        })
    }

    /// Label names in index order, as stored in CRF parameter files.
    pub fn names() -> Vec<String> {
        (0..Self::LEN)
            .map(|i| Self::label(i).unwrap().to_str().to_string())
            .collect()
    }

    fn category_pos(c: Category) -> usize {
        CATEGORIES.iter().position(|&x| x == c).unwrap()
    }
}
