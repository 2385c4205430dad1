#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "photonlab/emitters.hpp"
#include "photonlab/event_stream.hpp"

namespace photonlab {

enum class HistogramMode { start_stop, all_pairs, auto_pairs };

/// Delay histogram with bins centered on k * bin_width for k in [-K, K], so
/// tau = 0 sits at the center of the middle bin. Delay d belongs to bin
/// floor((d + bin_width / 2) / bin_width).
struct CoincidenceHistogram {
  Picoseconds bin_width = 37;
  std::int64_t half_bins = 0;  // K
  std::vector<std::uint64_t> counts;
  std::uint64_t n_starts = 0;
  std::uint64_t n_stops = 0;
  Picoseconds duration = 0;
  HistogramMode mode = HistogramMode::all_pairs;

  static CoincidenceHistogram empty(Picoseconds bin_width, Picoseconds range);

  std::size_t size() const { return counts.size(); }
  std::size_t zero_index() const { return static_cast<std::size_t>(half_bins); }
  Picoseconds tau_center(std::size_t i) const {
    return (static_cast<std::int64_t>(i) - half_bins) * bin_width;
  }
  Picoseconds range() const { return half_bins * bin_width; }
  std::uint64_t total() const;
  /// Bin index for a delay, or nullopt outside the histogram.
  std::optional<std::size_t> bin_of(Picoseconds delay) const;
};

/// TAC semantics: each start records the delay to the first stop strictly
/// after it (positive side); the negative side is the role-swapped pass.
CoincidenceHistogram start_stop_histogram(const EventStream& start, const EventStream& stop, Picoseconds bin_width,
                                          Picoseconds range);

/// Every pair (a_i, b_j) with delay b_j - a_i inside the histogram.
CoincidenceHistogram all_pairs_histogram(const EventStream& a, const EventStream& b, Picoseconds bin_width,
                                         Picoseconds range);

/// All ordered pairs i != j within one stream.
CoincidenceHistogram autocorrelation_histogram(const EventStream& a, Picoseconds bin_width, Picoseconds range);

CoincidenceHistogram build_histogram(HistogramMode mode, const EventStream& a, const EventStream& b,
                                     Picoseconds bin_width, Picoseconds range);

/// Sums groups of `factor` (odd) adjacent bins, keeping tau = 0 centered.
CoincidenceHistogram rebin(const CoincidenceHistogram& h, int factor);

struct G2Bin {
  Picoseconds tau = 0;
  double g2 = 0.0;
  double error = 0.0;
};

struct G2Estimate {
  Picoseconds bin_width = 0;
  double accidentals_per_bin = 0.0;
  std::vector<G2Bin> bins;

  std::size_t zero_index() const { return bins.size() / 2; }
};

/// Divides each bin by the accidental expectation n_a * n_b * bin_width / T.
/// Standard errors (`error`) are Poisson, sqrt(counts) / expectation; an empty bin gets
/// the one-count scale 1 / expectation.
G2Estimate normalize_g2(const CoincidenceHistogram& h);
/// Same, with an explicit accidental expectation per bin.
G2Estimate normalize_g2(const CoincidenceHistogram& h, double accidentals_per_bin);

/// Accidental coincidences per bin for channels whose rates drift slowly
/// compared with `window` (e.g. under an interferometer scan):
/// bin_width * sum_k n_a,k n_b,k / length_k over consecutive windows.
double windowed_accidentals(const EventStream& a, const EventStream& b, Picoseconds bin_width, Picoseconds window);

struct ValueWithError {
  double value = 0.0;
  double error = 0.0;
};

/// Normalized coincidences pooled over all bins with |tau| <= half_window.
ValueWithError zero_delay_g2(const CoincidenceHistogram& h, Picoseconds half_window);
ValueWithError zero_delay_g2(const CoincidenceHistogram& h, double accidentals_per_bin, Picoseconds half_window);

/// Closed-form g2(tau) for each source model. For pulsed and Fock sources the
/// value is pulse-integrated: the normalized area of the peak nearest tau,
/// E[N(N-1)] / E[N]^2 for the central peak and 1 for the others.
double analytic_g2(const EmitterConfig& model, double tau);

/// Two-level antibunching 1 - exp(-k|tau|) convolved with a Gaussian delay
/// response of standard deviation sigma (all in seconds).
double two_level_g2_convolved(double k, double sigma, double tau);

struct PeakArea {
  std::int64_t index = 0;
  std::uint64_t area = 0;
};

struct PeakAnalysis {
  std::vector<PeakArea> peaks;
  double central_ratio = 0.0;   // central area / mean side-peak area
  double ratio_error = 0.0;
};

/// Integrates windows of width rep_period centered on k * rep_period; bins are
/// assigned by their center. Requires range >= 2 * rep_period.
PeakAnalysis pulsed_peak_areas(const CoincidenceHistogram& h, Picoseconds rep_period);

/// Direct pulse-window estimator for a single stream:
/// (sum_k n_k (n_k - 1) / K) / (N / K)^2 over K full windows of rep_period.
struct PulseWindowG2 {
  double g2 = 0.0;
  std::uint64_t same_window_pairs = 0;  // unordered
  std::uint64_t photons = 0;
  std::int64_t windows = 0;
};
PulseWindowG2 pulse_window_g2(const EventStream& stream, Picoseconds rep_period);

enum class BoundKind { below_one, exceeds_zero_delay };

struct BoundViolation {
  std::size_t bin = 0;
  Picoseconds tau = 0;
  BoundKind kind = BoundKind::below_one;
  double significance = 0.0;  // in standard errors
};

struct ClassicalityReport {
  double k_sigma = 3.0;
  double threshold = 3.0;  // per-bin significance needed for a flag
  double g2_zero = 0.0;
  double g2_zero_error = 0.0;
  std::vector<BoundViolation> violations;
  bool nonclassical = false;   // any bound violated
  bool single_photon = false;  // g2(0) + k sigma < 0.5
};

/// Flags bins with g2 < 1 or g2(tau) > g2(0). The per-bin threshold is k
/// standard errors raised so that the one-sided k-sigma tail probability is
/// shared across all bins; bin errors are those expected under the classical
/// value. `zero` overrides the zero-delay value (e.g. a pooled window
/// estimate) and is itself tested against g2 >= 1. The single-photon verdict
/// is g2(0) + k sigma < 0.5.
ClassicalityReport classical_bounds_check(const G2Estimate& g2, double k_sigma = 3.0,
                                          std::optional<ValueWithError> zero = std::nullopt);

}  // namespace photonlab
