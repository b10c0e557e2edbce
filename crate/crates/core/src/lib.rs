//! Finite-dimensional toolkit for norm-attaining operator corrections and
//! approximate hyperplane series witnesses on direct sums of normed spaces.

pub mod absolute;
pub mod ahsp;
pub mod alignment;
pub mod bpb;
pub mod certificate;
pub mod error;
pub mod harness;
pub mod lattice;
pub mod lattice_sum;
pub mod linalg;
pub mod lp;
pub mod moduli;
pub mod real;
pub mod spaces;

/// Tolerance for membership in a unit sphere.
pub const TOL_SPHERE: f64 = 1e-9;

pub use absolute::{AbsoluteNorm2, Coordinate, FacetSlab};
pub use ahsp::{
    ahp_oracle_uniformly_convex, direct_sum_witness, finite_dim_eta, finite_dim_witness, random_ahsp_instance,
    restrict_witness, verify_ahsp_witness, AhpOracle, AhspInstance, AhspOracle, AhspWitness, DirectSumOracle,
    DirectSumWitness, FiniteDimOracle, SumCase, SumParameters, UniformlyConvexAhp,
};
pub use alignment::{align_isometry, verify_isometry, AligningIsometry, Field, IsometryReport};
pub use bpb::{
    correct_operator_l1sum, filter_large_real_part, verify_bpb_correction, BpbCorrection, BpbInstance, ComponentOracle,
    ConvexSeries, HilbertOracle, ParameterCascade,
};
pub use certificate::{Certificate, CertificateLog, Relation};
pub use error::{Error, Result};
pub use linalg::Matrix;
pub use real::{Hp, Real};
pub use harness::{generate_instance, run_scenario, InstanceDoc, Pipeline, Report, Scenario, ScenarioKind, TrialReport};
pub use lattice::FiniteLattice;
pub use lattice_sum::{
    build_norming_element, duality_isometry_check, lattice_sum_witness, LatticeParameters, LatticeSumOracle,
    LatticeSumWitness, NormingElement,
};
pub use moduli::{convexity_modulus, monotonicity_modulus, Method, ModulusCurve, ModulusKind};
pub use spaces::{operator_norm, NormKind, NormedSpace, OperatorNorm};
