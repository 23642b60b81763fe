#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "wearauth/features.hpp"

namespace wearauth::decision {

enum class MetricKind { Euclidean, MinkowskiP, Cosine, Correlation, Cityblock };

struct MetricSpec {
  MetricKind kind = MetricKind::Cityblock;
  double p = 5.0;  // MinkowskiP only
};

MetricSpec metric_from_name(const std::string& name);
std::string metric_name(const MetricSpec& m);

enum class Aggregation { Mean, Min };

// Verification policy. threshold applies to the [0,1] score; a session is
// suspended after suspend_after consecutive no-match decisions. The
// default threshold is the operating point calibrated on the default
// synthetic population (genuine mean scores sit near 0.37, impostors
// above 0.41 at the default sample size).
struct Policy {
  double threshold = 0.40;
  std::size_t sample_size = 1500;
  std::size_t maf_m = 9;
  double sample_rate_hz = 100.0;
  MetricSpec metric{};
  Aggregation aggregation = Aggregation::Mean;
  bool update_after_match = true;
  std::size_t max_templates = 8;
  std::size_t suspend_after = 1;
};

enum class Decision { Match, NoMatch };

// Threshold grid 0.00, 0.01, ..., 1.00 used by all sweeps.
inline constexpr std::size_t kThresholdSteps = 101;
inline double threshold_at(std::size_t t) { return static_cast<double>(t) / 100.0; }

struct Curves {
  std::array<double, kThresholdSteps> far{};
  std::array<double, kThresholdSteps> frr{};
};

struct VictimEval {
  double eer = 0.0;
  double threshold = 0.0;
  Curves curves;
  // Number of samples that hit the cosine zero-vector convention (their
  // distances were pinned at the 0.5 midpoint).
  std::size_t degenerate_direction_samples = 0;
};

struct EvalReport {
  std::vector<std::vector<double>> dissimilarity;
  std::map<std::string, VictimEval> per_user;
  double mean_eer = 0.0;
  Curves mean_curves;
};

// A labeled feature sample, the unit of the evaluation protocol. Feature
// values are raw (pre-normalization) unless stated otherwise.
struct Sample {
  std::string user_id;
  double t_start = 0.0;
  double t_end = 0.0;
  features::FeatureVector fv;
};

// Distance between two normalized vectors, rescaled into [0,1]:
// cityblock/84, euclidean/sqrt(84), minkowski/84^(1/p), cosine and
// correlation mapped by (1 - s)/2 with the degenerate conventions
// documented in the implementation.
double distance(const features::FeatureVector& a,
                const features::FeatureVector& b, const MetricSpec& m);

// Aggregated distance of a query against enrolled templates (mean by
// default, min optionally). Throws EmptyTemplateSet.
double match_score(const features::FeatureVector& query,
                   const std::vector<features::FeatureVector>& templates,
                   const MetricSpec& m,
                   Aggregation agg = Aggregation::Mean);

// Match iff score < threshold (strict).
Decision decide(double score, const Policy& policy);

// All-pairs distance matrix over normalized samples.
std::vector<std::vector<double>> dissimilarity_matrix(
    const std::vector<Sample>& samples, const MetricSpec& m);

// FAR/FRR over the 0.01 grid from genuine and impostor attempt scores;
// an attempt is accepted iff score < threshold. FAR is non-decreasing and
// FRR non-increasing by construction.
Curves sweep_scores(const std::vector<double>& genuine,
                    const std::vector<double>& impostor);

// Grid sweep over a dissimilarity matrix: every ordered pair (i, j), i != j
// is one attempt, genuine when labels match. Throws DegenerateLabels when
// only one user is present or any user has fewer than 2 samples.
Curves far_frr_sweep(const std::vector<std::vector<double>>& D,
                     const std::vector<std::string>& labels);

// Operating point where |FAR - FRR| is smallest (ties toward the smaller
// threshold); eer = midpoint of FAR and FRR there.
std::pair<double, double> eer(const Curves& curves);

// Per-victim protocol: normalization bounds are fit on the victim's own
// samples, every sample is normalized with them, genuine attempts are the
// victim's leave-one-out pairs and impostor attempts are every other
// sample against each victim sample.
VictimEval evaluate_victim(const std::vector<Sample>& samples,
                           const std::string& victim, const MetricSpec& m);

// Runs evaluate_victim for every user and aggregates mean EER and mean
// FAR/FRR curves.
EvalReport evaluate_population(const std::vector<Sample>& samples,
                               const MetricSpec& m);

}  // namespace wearauth::decision
