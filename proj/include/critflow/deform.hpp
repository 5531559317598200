#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "critflow/functional.hpp"

namespace critflow::deform {

/// U_delta = (a - delta, a + delta) ∪ (b - delta, b + delta).
struct LevelBand {
  double a = 0.0;
  std::optional<double> b;
  double delta = 0.1;

  std::vector<double> levels() const;
  /// Distance from a value to the nearest level.
  double distance(double value) const;
  bool contains(double value) const { return distance(value) < delta; }
};

/// How the band {(lambda, x): f_lambda(x) ∈ U_delta} is sampled.
struct SampleSpec {
  int lambda_samples = 41;
  double h = 0.05;              // grid step over the domain box
  std::optional<Box> box;       // defaults to the family's domain box
  int newton_candidates = 4;    // lowest-gradient band points refined by Newton per slice
  bool seed_rings = true;       // also search ring seeds for critical points per slice
  int jobs = 1;
};

struct BandStatistics {
  double floor = 0.0;            // min |grad f| over sampled band points (+inf if none)
  double sup_lambda_grad = 0.0;  // max |df/dlambda| over sampled band points
  std::size_t points = 0;
  double worst_lambda = 0.0;
  Vec worst_x;
};

/// Band statistics over lambda ∈ [lo, hi]. Besides grid and level-projected
/// samples, every slice is searched for critical points; a critical value
/// within delta of a level, found directly or by continuing a nearby critical
/// point in lambda, makes the floor its (vanishing) gradient norm.
BandStatistics band_statistics(const FunctionalFamily& family, double lo, double hi,
                               const LevelBand& band, const SampleSpec& spec = {});

/// Observed min |grad f| on the band around a single level; throws
/// SingularLevel when it is below 1e-6.
double gradient_floor(const FunctionalFamily& family, double lo, double hi, double a, double delta,
                      const SampleSpec& spec = {});

/// Quintic smoothstep cutoff: 1 for distance <= delta/2, 0 for distance >= delta.
double cutoff(double distance, double delta);

/// v(lambda, x) = -chi(f) (|df/dlambda| + 1) grad f / |grad f|^2.
struct TransportField {
  FunctionalFamily family;
  LevelBand band;
  double floor = 0.0;
  double sup_lambda_grad = 0.0;
  double bound = 0.0;  // (sup |df/dlambda| + 1) / floor

  /// Throws FloorViolated when the band is entered where |grad f| < floor / 2.
  Vec operator()(double lambda, const Vec& x) const;
  /// df/dlambda + <grad f, v>, the rate of change of f along the flow.
  double descent(double lambda, const Vec& x) const;
};

TransportField transport_field(const FunctionalFamily& family, const LevelBand& band, double floor,
                               double sup_lambda_grad);
/// Builds the field after validating the floor with band_statistics.
TransportField transport_field(const FunctionalFamily& family, const LevelBand& band,
                               const SampleSpec& spec, double lo = -1.0, double hi = 1.0);

struct TrajectoryPoint {
  double t = 0.0;
  double lambda = 0.0;
  Vec x;
  double f = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  double step = 0.0;
  int halvings = 0;
  double max_overshoot = 0.0;  // max over guarded levels of f - level (when positive)

  const TrajectoryPoint& end() const { return points.back(); }
};

inline constexpr double kFlowTolerance = 1e-6;

/// RK4 integration of x'(t) = v(lambda0 + t, x). Levels at or above the
/// starting value are guarded: a step that lifts f above one by more than
/// kFlowTolerance is retried with half the step, up to 10 times, then
/// StepUnstable. step <= 0 selects delta / (10 bound).
Trajectory flow_integrate(const TransportField& field, double lambda0, const Vec& x0, double t_end,
                          double step = -1.0, int record_every = 1);

/// Evaluates descent() at points projected onto the exact levels; returns
/// the largest value seen (analytically <= -1).
double descent_certificate(const TransportField& field, const SampleSpec& spec, double lo = -1.0,
                           double hi = 1.0);

struct MapStatistics {
  int flows = 0;
  int violations = 0;
  double max_overshoot = 0.0;
};

struct TransportWitness {
  MapStatistics forward;        // F = phi(2, -1, .)
  MapStatistics backward;       // G = phibar(2, -1, .)
  MapStatistics homotopy;       // H_t = phibar(t, 1 - t, phi(t, -1, .))
  MapStatistics homotopy_bar;   // Hbar_t = phi(t, 1 - t, phibar(t, -1, .))
  double floor = 0.0;
  double bound = 0.0;

  int violations() const;
  double max_overshoot() const;
  int flow_count() const;
};

struct TransportOptions {
  double delta = 0.1;   // band half-width for the rescaled levels 0 and 1
  int starts = 50;      // sampled starting points per map
  double step = -1.0;
  std::uint64_t seed = 11;
  SampleSpec spec;
  std::vector<double> homotopy_times{0.5, 1.0, 1.5, 2.0};
};

/// g(lambda, x) = (f - a(lambda)) / (b(lambda) - a(lambda)).
FunctionalFamily rescaled_family(const FunctionalFamily& family, const ScalarProfile& a,
                                 const ScalarProfile& b);

/// Builds the transport fields of g and of g(-lambda, .) with levels 0 and 1,
/// integrates F, G, H_t and Hbar_t from sampled starts and counts sublevel
/// membership violations. SingularLevel propagates when a(lambda) or
/// b(lambda) meets a critical value.
TransportWitness pair_transport(const FunctionalFamily& family, const ScalarProfile& a,
                                const ScalarProfile& b, const TransportOptions& opts = {});

}  // namespace critflow::deform
