//! Configuration and sample files shipped with the library.

pub const TURKISH_SUFFIXES: &str = include_str!("../data/turkish_suffixes.txt");
pub const TURKISH_TEMPLATES: &str = include_str!("../data/turkish/templates.txt");
pub const TURKISH_MASKS: &str = include_str!("../data/turkish/masks.txt");
pub const TURKISH_COLLOCATIONS: &str = include_str!("../data/turkish/collocations.txt");
pub const HAND_CHOOSE: &str = include_str!("../data/turkish/hand_choose.rules");
pub const HAND_DELETE: &str = include_str!("../data/turkish/hand_delete.rules");
/// Rules of the shape choose learning produces, for examples and tests.
pub const EXAMPLE_LEARNED_CHOOSE: &str = include_str!("../data/turkish/learned_choose.rules");
pub const EXAMPLE_LEARNED_DELETE: &str = include_str!("../data/turkish/learned_delete.rules");
pub const DEFAULT_CONFIG: &str = include_str!("../data/default.conf");

pub const SAMPLE_CORPUS: &str = include_str!("../data/sample/corpus.txt");

pub const SYNTHETIC_PLANTED: &str = include_str!("../data/synthetic/planted.rules");
pub const SYNTHETIC_TEMPLATES: &str = include_str!("../data/synthetic/templates.txt");
