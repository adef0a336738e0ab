#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowtrace/domain.hpp"
#include "flowtrace/norms.hpp"
#include "flowtrace/traceops.hpp"
#include "flowtrace/vector_field.hpp"

namespace flowtrace {

/// Plain-text experiment manifest. Sections start with `name:` on its own
/// line; `fields:`-style sections hold `name: c1, c2, ..., cd` vector-field
/// declarations (dimension inferred from the coefficient count), the other
/// sections hold `key = value` lines. `#` starts a comment.
struct Manifest {
  struct NamedField {
    std::string name;
    VectorField field;
  };

  std::vector<NamedField> fields;         // primary basis (ambient or slice)
  std::vector<NamedField> fields_prime;   // alternative basis (basis equivalence)
  std::vector<NamedField> fields_defect;  // ambient fields for the defect diagnostic

  DomainSpec domain = DomainSpec::defaults(3);

  NormParams norms;
  bool norms_delta_auto = true;  // delta = 0.9 x admissible when auto
  double delta_max = 0.5;

  struct Extension {
    int quad_order = 12;
    double delta = 0;        // resolved radius when not auto
    bool delta_auto = true;  // delta = 0.45 x admissible when auto
    std::vector<SeeleyTerm> seeley = {{3, 1}, {-2, 2}};
  } extension;

  struct Experiment {
    int corpus = 10;
    double ratio_bound = 10;  // max/min ratio across the corpus
    double drift_bound = 2;   // per-scale constant drift (basis equivalence)
    std::uint64_t seed = 1;
    int singular_m = 1;       // exponent of X = t^m d/dx1
    int s_min_exp = 4;        // residual grids run over 2^-k
    int s_max_exp = 12;
    int ext_grid_res = 9;     // U-grid of the extension Sobolev norm
    int ext_t_res = 8;
    double slope_lo = 1.4;    // commutator-flow residual acceptance window
    double slope_hi = 2.1;
    double defect_lo = 1.8;   // defect residual acceptance window
    double defect_hi = 2.3;
    std::vector<std::string> run;  // experiments for the `report` command
  } experiment;

  static Manifest load(const std::string& path);
  static Manifest parse(const std::string& text, const std::string& origin = "<string>");

  /// Echo of every setting, ordered, for deterministic report headers.
  std::vector<std::pair<std::string, std::string>> echo() const;
};

/// Error with file/line context.
class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flowtrace
