//! Post corpus ingestion and the API knowledge dictionary.

mod dictionary;
mod html;
pub mod javadoc;
mod posts;

pub use dictionary::{
    build_dictionary, categorize, first_sentence, imperative_description, ApiDictionary, ApiEntry,
    BuildReport, BuildWarning, LookupMiss,
};
pub use posts::{load_posts, require_answers, Post, PostFormat, PostSource};
