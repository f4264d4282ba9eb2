//! Structural analytics, adversarial generators, the legacy recursion and
//! growth studies.

mod expansion;
mod generators;
mod legacy;
mod bounds;
mod study;

pub use expansion::{aspect_ratio, c_qr, expansion_constant, expansion_witness, AspectRatio, ExpansionReport};
pub use generators::{
    explicit_depth, gen_balanced, gen_bichromatic, gen_tall_imbalanced, short_train_line, BichromaticPair,
    GeneratedDataset, Variant,
};
pub use legacy::{legacy_findallnn, LegacyOutput, TraceStep};
pub use bounds::{
    descendant_distance_check, distinctive_set_checks, height_checks, packing_check, structural_checks, width_check,
    BoundCheck,
};
pub use study::{expansion_growth_study, loglog_slope, study_row, GrowthStudy, StudyRow};
