#pragma once

#include <functional>
#include <span>
#include <vector>

#include "flowtrace/basis.hpp"
#include "flowtrace/domain.hpp"
#include "flowtrace/ode.hpp"

namespace flowtrace {

/// Parameters of the flow-Besov and classical Besov norms. theta and sigma
/// are always derived from p.
struct NormParams {
  double p = 2;        // 1 < p < inf
  double delta = 0.25; // upper limit of the dt/t integral
  int t_nodes = 48;    // log-spaced nodes in [delta 2^-16, delta]
  int tau_samples = 8; // m: the sup over |tau| <= t is sampled at {+-t i/m}

  double theta() const { return 1.0 - 1.0 / p; }
  double sigma() const { return 0.5 * (1.0 - 1.0 / p); }
  void validate() const;
};

/// ( sum |f(x_i)|^p cellvol )^{1/p} over the cell-centered tensor grid of
/// `res` points per axis. When f declares a support box the grid covers
/// support-intersect-box instead (the integrals agree, and dyadic-scale
/// members stay resolved). Throws on non-finite samples.
double lp_norm(const ScalarField& f, const Box& box, double p, std::span<const int> res);
double lp_norm(const ScalarField& f, const Box& box, double p, int res);

/// L^p norm over `V` of x -> displaced_value(x) - psi(x), where
/// displaced_value evaluates psi after a displacement (flow or shift).
/// `image_of_support` must contain the support of the displaced term; the
/// integration region then splits into the two support boxes (overlap
/// subtracted) so small supports stay resolved. Pass nullopt image when psi
/// declares no support: single grid over V.
double displaced_difference_lp(const ScalarField& psi,
                               const std::function<double(const Point&)>& displaced_value,
                               const std::optional<Box>& image_of_support, const Box& V, double p,
                               int res);

/// omega(t, psi, Z, V1, V): max over tau in {+-t i/m} of
/// ||psi o e^{tau Z} - psi||_{L^p(V)}. `env` may carry a precomputed field
/// envelope for the support-box inflation; pass nullptr to sample one.
double flow_modulus(double t, const ScalarField& psi, const VectorField& Z, const Box& V1,
                    const Box& V, const NormParams& params, int res, const FlowSolverConfig& cfg,
                    const FieldEnvelope* env = nullptr);

/// Classical L^p modulus: sup over shifts |s| = t (all +-1/0 direction
/// combinations, axis directions included) of ||psi(.+s) - psi||_{L^p(V)}.
double classical_modulus(double t, const ScalarField& psi, const Box& V, double p, int res);

/// ||psi||_{L^p} + sum_i { int_0^delta [t^{-theta} omega_i(t)]^p dt/t }^{1/p}
/// over the first-layer fields; dt/t by trapezoid in log t over
/// params.t_nodes nodes.
double flow_besov_norm(const ScalarField& psi, std::span<const VectorField> first_layer,
                       const Box& V1, const Box& V, const NormParams& params, int res,
                       const FlowSolverConfig& cfg);

/// Same quadrature with the classical modulus and exponent sigma (the main
/// part of the B^sigma_p norm).
double classical_besov_seminorm(const ScalarField& psi, const Box& V, const NormParams& params,
                                int res);

struct SobolevOptions {
  /// Operator-composed fields carry no analytic gradient; they must opt in
  /// to central differences. Closed-form fields always use exact gradients.
  bool allow_finite_difference = false;
  double fd_refine = 8;  // h = width / (fd_refine * res)
};

/// ||phi||_{L^p(U)} + sum_j ||Y_j phi||_{L^p(U)} over the given frame
/// (k+1 fields on R^{n+1}, d/dt included by the caller).
double sobolev_norm(const ScalarField& phi, std::span<const VectorField> frame, const Box& U,
                    double p, std::span<const int> res, const SobolevOptions& opts = {});

struct HardyCheck {
  double lhs = 0;
  double rhs = 0;
  double ratio = 0;
};

/// Hardy-Littlewood averaging check on uniform samples of h over (0, T]:
/// lhs = { int_0^T |t^-1 int_0^t h|^q dt }^{1/q}, rhs = { int_0^T h^q }^{1/q},
/// both by trapezoid with constant extension below the first node.
HardyCheck hardy_littlewood_check(std::span<const double> h, double T, double q);

/// Shared dt/t quadrature: { sum_nodes [t^{-exponent} omega(t)]^p dlog t }^{1/p}
/// with log-spaced nodes in [delta 2^-16, delta].
double besov_time_integral(const std::function<double(double)>& omega, double exponent,
                           const NormParams& params);

}  // namespace flowtrace
