#pragma once

#include "flowtrace/basis.hpp"
#include "flowtrace/manifest.hpp"
#include "flowtrace/report.hpp"

namespace flowtrace {

/// Manifest resolved into a working geometry: ambient/slice frames, the
/// completed basis, the measured admissible flow radius and the final norm
/// parameters.
struct ResolvedGeometry {
  DomainSpec domain;
  std::vector<VectorField> ambient;  // X_1..X_k on R^{n+1}
  std::vector<VectorField> slice;    // Y_i = X_i|_{t=0}
  Basis completed;                   // Z_1..Z_n on the slice
  VectorField dt = VectorField::axis(2, 1);  // d/dt on R^{n+1}
  double admissible = 0;
  NormParams norms;
  FlowSolverConfig ode;
};

ResolvedGeometry resolve_geometry(const Manifest& m);

/// Theorem 1.1 driver: ratio of the trace's flow-Besov norm over the
/// anisotropic Sobolev norm, across the dyadic corpus.
ExperimentReport verify_restriction(const Manifest& m, bool verbose = false);

/// Proposition 2.1 / Theorem 1.2 driver: Sobolev norm of the full extension
/// over the flow-Besov norm plus the trace roundtrip check.
ExperimentReport verify_extension(const Manifest& m, bool verbose = false);

/// Lemma 1.1 driver: flow-Besov norms under the alternative basis, with the
/// per-scale stability of the observed equivalence constant.
ExperimentReport verify_basis_equivalence(const Manifest& m, bool verbose = false);

/// Remark after Lemma 1.3: X = t^m d/dx1; straightening closed-form check
/// and the Lemma 1.3 ratio per corpus member.
ExperimentReport singular_gain_experiment(const Manifest& m, bool verbose = false);

/// Lemma 1.1 (*) and R_i(t) diagnostics: commutator-flow residual slope and
/// defect residual slope against their expected windows.
ExperimentReport verify_residuals(const Manifest& m, bool verbose = false);

}  // namespace flowtrace
